use super::grid::{Config3, Grid3};
use crate::constructions::AnalyticConfig3;
use crate::euclidean::{build_euclidean_ribbon, EuclideanRibbon};
use crate::error::{Error, Result};
use crate::geometry::RibbonGeometry;
use crate::quadform::{density_stress, density_w, IsotropicModuli};
use crate::quadrature::{gauss_legendre, Rule};
use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;
use std::sync::Arc;

/// Quadrature for analytic configurations: composite Gauss-Legendre in x1, a single
/// Gauss-Legendre rule in x2 and x3.
#[derive(Clone, Copy, Debug)]
pub struct AnalyticRule {
    pub panels: usize,
    pub order1: usize,
    pub order23: usize,
}

impl Default for AnalyticRule {
    fn default() -> Self {
        AnalyticRule { panels: 64, order1: 4, order23: 6 }
    }
}

/// The rescaled 3D energy at fixed (t, w).
#[derive(Clone)]
pub struct Energy3d {
    pub ribbon: Arc<EuclideanRibbon>,
    pub moduli: IsotropicModuli,
    pub t: f64,
    pub w: f64,
}

fn inv_sqrt_spd(m: &Matrix3<f64>) -> Option<Matrix3<f64>> {
    let s = (m + m.transpose()) * 0.5;
    let e = s.symmetric_eigen();
    if e.eigenvalues.min() <= 0.0 {
        return None;
    }
    let d = Matrix3::from_diagonal(&e.eigenvalues.map(|l| 1.0 / l.sqrt()));
    Some(e.eigenvectors * d * e.eigenvectors.transpose())
}

impl Energy3d {
    pub fn new(geom: &RibbonGeometry, moduli: IsotropicModuli, t: f64, w: f64) -> Result<Self> {
        if !(t > 0.0 && w > 0.0) {
            return Err(Error::Domain(format!("energy3d needs t, w > 0 (got t = {t}, w = {w})")));
        }
        moduli.validate()?;
        let ribbon = Arc::new(build_euclidean_ribbon(geom, t, w)?);
        Ok(Energy3d { ribbon, moduli, t, w })
    }

    /// Uses an already built ribbon.
    pub fn with_ribbon(ribbon: Arc<EuclideanRibbon>, moduli: IsotropicModuli, t: f64, w: f64) -> Self {
        Energy3d { ribbon, moduli, t, w }
    }

    /// G(x) with grad_t u (grad_t Psi_t)^-1 g~^-1/2 = (du/dx) G(x).
    pub fn reference(&self, x: [f64; 3]) -> Result<Matrix3<f64>> {
        let z = [x[0], self.w * x[1], self.t * x[2]];
        let (_, dpsi) = self.ribbon.psi(z);
        let dinv = dpsi
            .try_inverse()
            .ok_or_else(|| Error::Geometry(format!("grad Psi singular at z = {z:?}")))?;
        let g = self.ribbon.geom.metric_at(z)?;
        let gt = dinv.transpose() * g * dinv;
        let k = inv_sqrt_spd(&gt).ok_or_else(|| Error::Geometry(format!("pulled-back metric not positive at z = {z:?}")))?;
        let scale = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0 / self.w, 1.0 / self.t));
        Ok(scale * dinv * k)
    }

    /// Energy of an analytic configuration with the default rule.
    pub fn analytic(&self, u: &dyn AnalyticConfig3) -> Result<f64> {
        self.analytic_with(u, AnalyticRule::default())
    }

    pub fn analytic_with(&self, u: &dyn AnalyticConfig3, rule: AnalyticRule) -> Result<f64> {
        let length = self.ribbon.geom.length;
        let r1 = Rule::composite(0.0, length, rule.panels, rule.order1);
        let (x23, w23) = gauss_legendre(rule.order23);
        let parts: Vec<Result<f64>> = r1
            .nodes
            .par_iter()
            .zip(&r1.weights)
            .map(|(&x1, &w1)| {
                let mut acc = 0.0;
                for (a, &wa) in x23.iter().zip(&w23) {
                    for (b, &wb) in x23.iter().zip(&w23) {
                        let x = [x1, 0.5 * a, 0.5 * b];
                        let g = self.reference(x)?;
                        let (_, du) = u.eval(x);
                        acc += 0.25 * wa * wb * density_w(&self.moduli, &(du * g));
                    }
                }
                Ok(w1 * acc)
            })
            .collect();
        let mut total = 0.0;
        for p in parts {
            total += p?;
        }
        Ok(total / length)
    }

    /// Precomputes the reference gradients at the Gauss points of every cell of `grid`.
    pub fn discretize(&self, grid: Grid3) -> Result<Discrete3d> {
        if (grid.length - self.ribbon.geom.length).abs() > 1e-12 * grid.length.max(1.0) {
            return Err(Error::Domain(format!(
                "grid length {} differs from ribbon length {}",
                grid.length, self.ribbon.geom.length
            )));
        }
        let h = grid.spacing();
        let refs: Vec<Result<[Matrix3<f64>; 8]>> = (0..grid.cell_count())
            .into_par_iter()
            .map(|c| {
                let [i, j, k] = grid.cell(c);
                let x0 = grid.node(i, j, k);
                let mut out = [Matrix3::zeros(); 8];
                for (q, o) in out.iter_mut().enumerate() {
                    let xi = gauss_point(q);
                    *o = self.reference([x0[0] + xi[0] * h[0], x0[1] + xi[1] * h[1], x0[2] + xi[2] * h[2]])?;
                }
                Ok(out)
            })
            .collect();
        let refs = refs.into_iter().collect::<Result<Vec<_>>>()?;
        Ok(Discrete3d { grid, moduli: self.moduli, refs })
    }
}

const GP: [f64; 2] = [0.211_324_865_405_187_1, 0.788_675_134_594_812_9];

fn gauss_point(q: usize) -> [f64; 3] {
    [GP[q >> 2], GP[(q >> 1) & 1], GP[q & 1]]
}

/// Gradients of the 8 trilinear shape functions at local point xi, in physical units.
fn shape_gradients(xi: [f64; 3], h: [f64; 3]) -> [Vector3<f64>; 8] {
    let mut out = [Vector3::zeros(); 8];
    for (m, o) in out.iter_mut().enumerate() {
        let bits = [m >> 2, (m >> 1) & 1, m & 1];
        let f = |d: usize| if bits[d] == 1 { xi[d] } else { 1.0 - xi[d] };
        let df = |d: usize| if bits[d] == 1 { 1.0 } else { -1.0 };
        *o = Vector3::new(df(0) * f(1) * f(2) / h[0], f(0) * df(1) * f(2) / h[1], f(0) * f(1) * df(2) / h[2]);
    }
    out
}

/// The energy on trilinear elements of a fixed grid.
#[derive(Clone, Debug)]
pub struct Discrete3d {
    pub grid: Grid3,
    pub moduli: IsotropicModuli,
    refs: Vec<[Matrix3<f64>; 8]>,
}

impl Discrete3d {
    fn check(&self, u: &Config3) -> Result<()> {
        if u.grid != self.grid {
            return Err(Error::Domain("configuration grid differs from the discretization grid".into()));
        }
        Ok(())
    }

    fn cell_terms(&self, u: &Config3, c: usize, grads: &[[Vector3<f64>; 8]; 8], with_grad: bool) -> (f64, [Vector3<f64>; 8]) {
        let nodes = self.grid.cell_nodes(c);
        let h = self.grid.spacing();
        let wq = h[0] * h[1] * h[2] / 8.0;
        let mut e = 0.0;
        let mut g = [Vector3::zeros(); 8];
        for q in 0..8 {
            let mut du = Matrix3::zeros();
            for m in 0..8 {
                du += u.positions[nodes[m]] * grads[q][m].transpose();
            }
            let r = &self.refs[c][q];
            let f = du * r;
            e += wq * density_w(&self.moduli, &f);
            if with_grad {
                let p = density_stress(&self.moduli, &f) * r.transpose() * wq;
                for m in 0..8 {
                    g[m] += p * grads[q][m];
                }
            }
        }
        (e, g)
    }

    fn assemble(&self, u: &Config3, with_grad: bool) -> Result<(f64, Vec<Vector3<f64>>)> {
        self.check(u)?;
        let h = self.grid.spacing();
        let mut grads = [[Vector3::zeros(); 8]; 8];
        for (q, g) in grads.iter_mut().enumerate() {
            *g = shape_gradients(gauss_point(q), h);
        }
        let terms: Vec<(f64, [Vector3<f64>; 8])> = (0..self.grid.cell_count())
            .into_par_iter()
            .map(|c| self.cell_terms(u, c, &grads, with_grad))
            .collect();
        let vol = self.grid.length;
        let mut e = 0.0;
        let mut grad = if with_grad { vec![Vector3::zeros(); self.grid.node_count()] } else { Vec::new() };
        for (c, (ec, gc)) in terms.iter().enumerate() {
            e += ec;
            if with_grad {
                for (m, &n) in self.grid.cell_nodes(c).iter().enumerate() {
                    grad[n] += gc[m] / vol;
                }
            }
        }
        if !e.is_finite() {
            return Err(Error::Numeric("non-finite energy".into()));
        }
        Ok((e / vol, grad))
    }

    pub fn energy(&self, u: &Config3) -> Result<f64> {
        Ok(self.assemble(u, false)?.0)
    }

    pub fn energy_and_gradient(&self, u: &Config3) -> Result<(f64, Vec<Vector3<f64>>)> {
        self.assemble(u, true)
    }

    /// Minimum of det(du/dx) over all Gauss points (orientation monitor).
    pub fn min_jacobian(&self, u: &Config3) -> f64 {
        let h = self.grid.spacing();
        let mut out = f64::INFINITY;
        for c in 0..self.grid.cell_count() {
            let nodes = self.grid.cell_nodes(c);
            for q in 0..8 {
                let g = shape_gradients(gauss_point(q), h);
                let mut du = Matrix3::zeros();
                for m in 0..8 {
                    du += u.positions[nodes[m]] * g[m].transpose();
                }
                out = out.min(du.determinant());
            }
        }
        out
    }
}

/// Rescaled 3D energy of an analytic configuration.
pub fn energy3d(geom: &RibbonGeometry, moduli: IsotropicModuli, t: f64, w: f64, u: &dyn AnalyticConfig3) -> Result<f64> {
    Energy3d::new(geom, moduli, t, w)?.analytic(u)
}
