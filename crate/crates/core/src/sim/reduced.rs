use super::grid::{Grid2, SurfaceConfig};
use crate::error::{Error, Result};
use crate::geometry::RibbonGeometry;
use super::lbfgs::Preconditioner;
use nalgebra::{DMatrix, Matrix2, Vector3};
use nalgebra_sparse::{factorization::CscCholesky, CooMatrix, CscMatrix};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Lower bound on |d1 f x d2 f| at evaluation nodes.
pub const IMMERSION_MARGIN: f64 = 1e-6;

/// Multipliers of the stretching and bending terms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReducedWeights {
    pub stretching: f64,
    pub bending: f64,
    /// Order of the difference stencils (even, >= 2).
    pub order: usize,
}

impl Default for ReducedWeights {
    fn default() -> Self {
        ReducedWeights { stretching: 1.0, bending: 1.0, order: 4 }
    }
}

/// Discrete first and second fundamental forms at one node.
#[derive(Clone, Copy, Debug)]
pub struct NodeForms {
    pub z: [f64; 2],
    pub a: Matrix2<f64>,
    pub ii: Matrix2<f64>,
}

/// Finite-difference weights for derivatives 0..=m at x0 on nodes xs (Fornberg).
fn fd_weights(x0: f64, xs: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] *= c4 / c3;
        }
        c1 = c2;
    }
    c
}

/// Window of `m` consecutive nodes of 0..n, as centred on i as possible.
fn window(i: usize, n: usize, m: usize) -> std::ops::Range<usize> {
    let lo = i.saturating_sub(m / 2).min(n - m);
    lo..lo + m
}

/// 1D difference stencils of a given even order: centred in the interior, one-sided windows
/// near the ends.
#[derive(Clone, Debug)]
struct Stencils {
    d1: Vec<Vec<(usize, f64)>>,
    d2: Vec<Vec<(usize, f64)>>,
    trap: Vec<f64>,
}

impl Stencils {
    fn new(n: usize, h: f64, order: usize) -> Self {
        let mut d1 = Vec::with_capacity(n);
        let mut d2 = Vec::with_capacity(n);
        for i in 0..n {
            for (deriv, out) in [(1usize, &mut d1), (2, &mut d2)] {
                let mut m = order + 1;
                let mut win = window(i, n, m);
                if deriv == 2 && win.start + m / 2 != i {
                    m = order + 2;
                    win = window(i, n, m);
                }
                let xs: Vec<f64> = win.clone().map(|k| k as f64 - i as f64).collect();
                let wts = fd_weights(0.0, &xs, deriv);
                let scale = h.powi(deriv as i32);
                out.push(win.zip(&wts[deriv]).filter(|(_, w)| **w != 0.0).map(|(k, w)| (k, w / scale)).collect());
            }
        }
        let trap = (0..n).map(|i| if i == 0 || i == n - 1 { 0.5 * h } else { h }).collect();
        Stencils { d1, d2, trap }
    }

    fn min_nodes(order: usize) -> usize {
        order + 2
    }
}

/// Derivatives f1, f2, f11, f12, f22 at node (i, j).
struct Jets {
    d: [Vector3<f64>; 5],
}

fn node_jets(p: &[Vector3<f64>], n2: usize, sx: &Stencils, sy: &Stencils, i: usize, j: usize) -> Jets {
    let at = |a: usize, b: usize| p[a * n2 + b];
    let mut d = [Vector3::zeros(); 5];
    for &(a, c) in &sx.d1[i] {
        d[0] += at(a, j) * c;
    }
    for &(b, c) in &sy.d1[j] {
        d[1] += at(i, b) * c;
    }
    for &(a, c) in &sx.d2[i] {
        d[2] += at(a, j) * c;
    }
    for &(a, ca) in &sx.d1[i] {
        for &(b, cb) in &sy.d1[j] {
            d[3] += at(a, b) * (ca * cb);
        }
    }
    for &(b, c) in &sy.d2[j] {
        d[4] += at(i, b) * c;
    }
    Jets { d }
}

fn forms_of(j: &Jets, z: [f64; 2]) -> Result<(Matrix2<f64>, Matrix2<f64>, Vector3<f64>, f64)> {
    let [f1, f2, f11, f12, f22] = j.d;
    let n = f1.cross(&f2);
    let nn = n.norm();
    if !(nn >= IMMERSION_MARGIN) {
        return Err(Error::Numeric(format!(
            "degenerate surface element at z = ({:.6}, {:.6}): |d1 f x d2 f| = {nn:e}",
            z[0], z[1]
        )));
    }
    let nu = n / nn;
    let b = f1.dot(&f2);
    let a = Matrix2::new(f1.dot(&f1), b, b, f2.dot(&f2));
    let m = nu.dot(&f12);
    let ii = Matrix2::new(nu.dot(&f11), m, m, nu.dot(&f22));
    Ok((a, ii, nu, nn))
}

/// Discrete fundamental forms of f at every node, with second-order differences.
pub fn fundamental_forms(f: &SurfaceConfig) -> Result<Vec<NodeForms>> {
    fundamental_forms_with(f, 2)
}

/// Discrete fundamental forms with difference stencils of the given even order.
pub fn fundamental_forms_with(f: &SurfaceConfig, order: usize) -> Result<Vec<NodeForms>> {
    check_order(order, f.grid)?;
    let g = f.grid;
    let h = g.spacing();
    let (sx, sy) = (Stencils::new(g.n[0], h[0], order), Stencils::new(g.n[1], h[1], order));
    let mut out = Vec::with_capacity(g.node_count());
    for i in 0..g.n[0] {
        for j in 0..g.n[1] {
            let z = g.node(i, j);
            let (a, ii, _, _) = forms_of(&node_jets(&f.positions, g.n[1], &sx, &sy, i, j), z)?;
            out.push(NodeForms { z, a, ii });
        }
    }
    Ok(out)
}

fn check_order(order: usize, grid: Grid2) -> Result<()> {
    if order < 2 || order % 2 == 1 {
        return Err(Error::Domain(format!("difference order must be even and >= 2, got {order}")));
    }
    let need = Stencils::min_nodes(order);
    if grid.n[0] < need || grid.n[1] < need {
        return Err(Error::Domain(format!("order-{order} differences need at least {need} nodes per direction")));
    }
    Ok(())
}

/// Second form of f along the midline z2 = 0 (middle row, or the mean of the two middle rows).
pub fn midline_second_form(f: &SurfaceConfig, order: usize) -> Result<Vec<(f64, Matrix2<f64>)>> {
    let forms = fundamental_forms_with(f, order)?;
    let n2 = f.grid.n[1];
    let rows: Vec<usize> = if n2 % 2 == 1 { vec![n2 / 2] } else { vec![n2 / 2 - 1, n2 / 2] };
    Ok((0..f.grid.n[0])
        .map(|i| {
            let s: Matrix2<f64> = rows.iter().map(|&j| forms[i * n2 + j].ii).sum();
            (forms[i * n2].z[0], s / rows.len() as f64)
        })
        .collect())
}

/// Value of the reduced energy split into its two terms (bending already multiplied by t^2).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReducedValue {
    pub total: f64,
    pub stretching: f64,
    pub bending: f64,
}

/// mean |a_f - a|^2 dVol_a + t^2 mean |II_f - II|^2 dVol_a on a fixed grid of S_w.
#[derive(Clone, Debug)]
pub struct ReducedModel {
    pub grid: Grid2,
    pub t: f64,
    pub weights: ReducedWeights,
    targets: Vec<(Matrix2<f64>, Matrix2<f64>, f64)>,
    sx: Stencils,
    sy: Stencils,
}

type NodeTerm = (f64, f64, [Vector3<f64>; 5]);

impl ReducedModel {
    pub fn new(geom: &RibbonGeometry, t: f64, grid: Grid2, weights: ReducedWeights) -> Result<Self> {
        if !(t > 0.0) {
            return Err(Error::Domain(format!("reduced energy needs t > 0, got {t}")));
        }
        if (grid.length - geom.length).abs() > 1e-12 * geom.length.max(1.0) {
            return Err(Error::Domain(format!("grid length {} differs from ribbon length {}", grid.length, geom.length)));
        }
        check_order(weights.order, grid)?;
        let h = grid.spacing();
        let (sx, sy) = (Stencils::new(grid.n[0], h[0], weights.order), Stencils::new(grid.n[1], h[1], weights.order));
        let mut targets = Vec::with_capacity(grid.node_count());
        let mut vol = 0.0;
        for i in 0..grid.n[0] {
            for j in 0..grid.n[1] {
                let [z1, z2] = grid.node(i, j);
                let a = geom.midsurface_metric(z1, z2)?;
                let ii = geom.second_form.value(z1, z2);
                let dv = sx.trap[i] * sy.trap[j] * a.determinant().sqrt();
                vol += dv;
                targets.push((a, ii, dv));
            }
        }
        for t in &mut targets {
            t.2 /= vol;
        }
        Ok(ReducedModel { grid, t, weights, targets, sx, sy })
    }

    fn node_term(&self, p: &[Vector3<f64>], i: usize, j: usize, with_grad: bool) -> Result<NodeTerm> {
        let k = i * self.grid.n[1] + j;
        let jets = node_jets(p, self.grid.n[1], &self.sx, &self.sy, i, j);
        let (a, ii, nu, nn) = forms_of(&jets, self.grid.node(i, j))?;
        let (a0, ii0, om) = self.targets[k];
        let (da, dii) = (a - a0, ii - ii0);
        let cs = om * self.weights.stretching;
        let cb = om * self.weights.bending * self.t * self.t;
        let es = cs * da.norm_squared();
        let eb = cb * dii.norm_squared();
        let mut g = [Vector3::zeros(); 5];
        if with_grad {
            let [f1, f2, f11, f12, f22] = jets.d;
            let tm = da * (2.0 * cs);
            let sg = dii * (2.0 * cb);
            g[0] = (f1 * tm[(0, 0)] + f2 * tm[(0, 1)]) * 2.0;
            g[1] = (f1 * tm[(1, 0)] + f2 * tm[(1, 1)]) * 2.0;
            g[2] = nu * sg[(0, 0)];
            g[3] = nu * (sg[(0, 1)] + sg[(1, 0)]);
            g[4] = nu * sg[(1, 1)];
            let m = f11 * sg[(0, 0)] + f12 * (sg[(0, 1)] + sg[(1, 0)]) + f22 * sg[(1, 1)];
            let gn = (m - nu * nu.dot(&m)) / nn;
            g[0] += f2.cross(&gn);
            g[1] += gn.cross(&f1);
        }
        Ok((es, eb, g))
    }

    fn assemble(&self, f: &SurfaceConfig, with_grad: bool) -> Result<(ReducedValue, Vec<Vector3<f64>>)> {
        if f.grid != self.grid {
            return Err(Error::Domain("surface grid differs from the model grid".into()));
        }
        let (n1, n2) = (self.grid.n[0], self.grid.n[1]);
        let terms: Vec<Result<NodeTerm>> = (0..n1 * n2)
            .into_par_iter()
            .map(|k| self.node_term(&f.positions, k / n2, k % n2, with_grad))
            .collect();
        let (mut es, mut eb) = (0.0, 0.0);
        let mut grad = if with_grad { vec![Vector3::zeros(); n1 * n2] } else { Vec::new() };
        for (k, term) in terms.into_iter().enumerate() {
            let (s, b, g) = term?;
            es += s;
            eb += b;
            if with_grad {
                let (i, j) = (k / n2, k % n2);
                for &(a, c) in &self.sx.d1[i] {
                    grad[a * n2 + j] += g[0] * c;
                }
                for &(b, c) in &self.sy.d1[j] {
                    grad[i * n2 + b] += g[1] * c;
                }
                for &(a, c) in &self.sx.d2[i] {
                    grad[a * n2 + j] += g[2] * c;
                }
                for &(a, ca) in &self.sx.d1[i] {
                    for &(b, cb) in &self.sy.d1[j] {
                        grad[a * n2 + b] += g[3] * (ca * cb);
                    }
                }
                for &(b, c) in &self.sy.d2[j] {
                    grad[i * n2 + b] += g[4] * c;
                }
            }
        }
        Ok((ReducedValue { total: es + eb, stretching: es, bending: eb }, grad))
    }

    pub fn energy(&self, f: &SurfaceConfig) -> Result<ReducedValue> {
        Ok(self.assemble(f, false)?.0)
    }

    pub fn energy_and_gradient(&self, f: &SurfaceConfig) -> Result<(ReducedValue, Vec<Vector3<f64>>)> {
        self.assemble(f, true)
    }
}

impl ReducedModel {
    /// Residuals r with node energy |r|^2, and their derivatives with respect to the five
    /// jets (f1, f2, f11, f12, f22).
    fn local_jacobian(&self, p: &[Vector3<f64>], i: usize, j: usize) -> Result<[[Vector3<f64>; 5]; 6]> {
        let k = i * self.grid.n[1] + j;
        let jets = node_jets(p, self.grid.n[1], &self.sx, &self.sy, i, j);
        let (_, _, nu, nn) = forms_of(&jets, self.grid.node(i, j))?;
        let [f1, f2, f11, f12, f22] = jets.d;
        let om = self.targets[k].2;
        let cs = (om * self.weights.stretching).sqrt();
        let cb = (om * self.weights.bending).sqrt() * self.t;
        let r2 = std::f64::consts::SQRT_2;
        let z = Vector3::zeros();
        let mut jac = [[z; 5]; 6];
        jac[0][0] = f1 * (2.0 * cs);
        jac[1][0] = f2 * (r2 * cs);
        jac[1][1] = f1 * (r2 * cs);
        jac[2][1] = f2 * (2.0 * cs);
        for (row, (m, fij, scale)) in [(2usize, f11, cb), (3, f12, r2 * cb), (4, f22, cb)].into_iter().enumerate() {
            let gn = (fij - nu * nu.dot(&fij)) / nn;
            let r = &mut jac[3 + row];
            r[m] = nu * scale;
            r[0] = f2.cross(&gn) * scale;
            r[1] = gn.cross(&f1) * scale;
        }
        Ok(jac)
    }

    /// Gauss-Newton matrix 2 J^T J of the energy at f.
    pub fn gauss_newton(&self, f: &SurfaceConfig) -> Result<CscMatrix<f64>> {
        let (n1, n2) = (self.grid.n[0], self.grid.n[1]);
        let dim = 3 * n1 * n2;
        let blocks: Vec<Result<(Vec<usize>, DMatrix<f64>)>> = (0..n1 * n2)
            .into_par_iter()
            .map(|k| {
                let (i, j) = (k / n2, k % n2);
                let jac = self.local_jacobian(&f.positions, i, j)?;
                let mut nodes: Vec<(usize, [f64; 5])> = Vec::new();
                let mut add = |node: usize, m: usize, c: f64| match nodes.iter_mut().find(|e| e.0 == node) {
                    Some(e) => e.1[m] += c,
                    None => {
                        let mut w = [0.0; 5];
                        w[m] = c;
                        nodes.push((node, w));
                    }
                };
                for &(a, c) in &self.sx.d1[i] {
                    add(a * n2 + j, 0, c);
                }
                for &(b, c) in &self.sy.d1[j] {
                    add(i * n2 + b, 1, c);
                }
                for &(a, c) in &self.sx.d2[i] {
                    add(a * n2 + j, 2, c);
                }
                for &(a, ca) in &self.sx.d1[i] {
                    for &(b, cb) in &self.sy.d1[j] {
                        add(a * n2 + b, 3, ca * cb);
                    }
                }
                for &(b, c) in &self.sy.d2[j] {
                    add(i * n2 + b, 4, c);
                }
                let mut jn = DMatrix::zeros(6, 3 * nodes.len());
                for (s, (_, w)) in nodes.iter().enumerate() {
                    for (r, row) in jac.iter().enumerate() {
                        let v: Vector3<f64> = (0..5).map(|m| row[m] * w[m]).sum();
                        for d in 0..3 {
                            jn[(r, 3 * s + d)] = v[d];
                        }
                    }
                }
                let h = jn.transpose() * &jn * 2.0;
                Ok((nodes.into_iter().map(|e| e.0).collect(), h))
            })
            .collect();
        let mut coo = CooMatrix::new(dim, dim);
        for b in blocks {
            let (nodes, h) = b?;
            for (s, &p) in nodes.iter().enumerate() {
                for (u, &q) in nodes.iter().enumerate() {
                    for a in 0..3 {
                        for c in 0..3 {
                            let v = h[(3 * s + a, 3 * u + c)];
                            if v != 0.0 {
                                coo.push(3 * p + a, 3 * q + c, v);
                            }
                        }
                    }
                }
            }
        }
        Ok(CscMatrix::from(&coo))
    }
}

/// Factored Gauss-Newton matrix of a [`ReducedModel`], refreshed on demand.
pub struct GaussNewtonPreconditioner<'a> {
    model: &'a ReducedModel,
    chol: Option<CscCholesky<f64>>,
}

impl<'a> GaussNewtonPreconditioner<'a> {
    pub fn new(model: &'a ReducedModel) -> Self {
        GaussNewtonPreconditioner { model, chol: None }
    }
}

impl Preconditioner for GaussNewtonPreconditioner<'_> {
    fn update(&mut self, x: &[f64]) -> Result<()> {
        let f = SurfaceConfig::from_flat(self.model.grid, x)?;
        let h = self.model.gauss_newton(&f)?;
        let diag_max = h.diagonal_as_csc().values().iter().fold(0.0f64, |m, v| m.max(*v));
        let mut shift = 1e-10 * diag_max.max(f64::MIN_POSITIVE);
        for _ in 0..8 {
            let mut coo = CooMatrix::new(h.nrows(), h.ncols());
            for (r, c, v) in h.triplet_iter() {
                coo.push(r, c, *v);
            }
            for d in 0..h.nrows() {
                coo.push(d, d, shift);
            }
            if let Ok(ch) = CscCholesky::factor(&CscMatrix::from(&coo)) {
                self.chol = Some(ch);
                return Ok(());
            }
            shift *= 100.0;
        }
        Err(Error::Numeric("Gauss-Newton matrix could not be factored".into()))
    }

    fn apply(&self, g: &[f64]) -> Vec<f64> {
        match &self.chol {
            Some(ch) => {
                let b = nalgebra::DMatrix::from_column_slice(g.len(), 1, g);
                ch.solve(&b).as_slice().to_vec()
            }
            None => g.to_vec(),
        }
    }
}

/// Reduced shell energy of a surface configuration.
pub fn reduced_energy(geom: &RibbonGeometry, t: f64, f: &SurfaceConfig, weights: ReducedWeights) -> Result<ReducedValue> {
    ReducedModel::new(geom, t, f.grid, weights)?.energy(f)
}
