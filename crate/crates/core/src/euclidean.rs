//! The associated Euclidean ribbon: mid-surface Phi built from the Darboux frame of the
//! midline, its thickening Psi = Phi + z3 n, and Q0 = DPsi(z1, 0, 0).

use crate::error::{Error, Result};
use crate::frame::{darboux_generator, FramePath, Generator, DEFAULT_STEP};
use crate::geometry::RibbonGeometry;
use crate::jet::Jet;
use nalgebra::{Matrix2, Matrix3, Vector3};
use std::sync::Arc;

#[derive(Clone, Debug)]
pub struct EuclideanRibbon {
    pub geom: RibbonGeometry,
    frame: FramePath,
    quartic_correction: bool,
}

/// Phi and its derivatives up to order two at one point, expressed in world coordinates.
#[derive(Clone, Copy, Debug)]
pub struct MidSurfacePoint {
    pub phi: Vector3<f64>,
    pub d1: Vector3<f64>,
    pub d2: Vector3<f64>,
    pub d11: Vector3<f64>,
    pub d12: Vector3<f64>,
    pub d22: Vector3<f64>,
    pub normal: Vector3<f64>,
    pub dn1: Vector3<f64>,
    pub dn2: Vector3<f64>,
}

impl MidSurfacePoint {
    pub fn first_form(&self) -> Matrix2<f64> {
        Matrix2::new(
            self.d1.dot(&self.d1),
            self.d1.dot(&self.d2),
            self.d1.dot(&self.d2),
            self.d2.dot(&self.d2),
        )
    }

    pub fn second_form(&self) -> Matrix2<f64> {
        let b = self.d12.dot(&self.normal);
        Matrix2::new(self.d11.dot(&self.normal), b, b, self.d22.dot(&self.normal))
    }
}

fn v3(a: Jet, b: Jet, c: Jet, k: usize) -> Vector3<f64> {
    Vector3::new(a.d(k), b.d(k), c.d(k))
}

impl EuclideanRibbon {
    /// Builds the ribbon with the quartic shear correction enabled.
    pub fn new(geom: &RibbonGeometry) -> Self {
        Self::with_options(geom, true)
    }

    /// `quartic_correction` adds c(z1) z2^4 e1 to Phi, with c chosen so that the 12 entry
    /// of the induced metric has no z2^3 term; lower-order terms are unaffected.
    pub fn with_options(geom: &RibbonGeometry, quartic_correction: bool) -> Self {
        let g = geom.clone();
        let gen: Generator = Arc::new(move |s| {
            let ii = g.ii0(s);
            darboux_generator(g.kappa_at(s), ii[(0, 0)], ii[(0, 1)])
        });
        let pad = 0.1 * geom.length;
        let frame = FramePath::integrate(gen, Matrix3::identity(), 0.0, -pad, geom.length + pad, DEFAULT_STEP);
        EuclideanRibbon { geom: geom.clone(), frame, quartic_correction }
    }

    pub fn frame(&self) -> &FramePath {
        &self.frame
    }

    /// Q0(z1) = DPsi(z1, 0, 0), the Darboux frame of the midline.
    pub fn q0(&self, z1: f64) -> Matrix3<f64> {
        self.frame.eval(z1)
    }

    /// The generator M(z1) with Q0' = Q0 M.
    pub fn q0_generator(&self, z1: f64) -> Matrix3<f64> {
        self.frame.generator(z1)
    }

    /// theta(z1) = Psi(z1, 0, 0).
    pub fn midline_point(&self, z1: f64) -> Vector3<f64> {
        self.frame.integral(z1).column(0).into_owned()
    }

    pub fn mid_surface(&self, z1: f64, z2: f64) -> MidSurfacePoint {
        let md = self.geom.midline(z1);
        let (k, m, n) = (md.kappa, md.m0, md.n0);
        let l = md.l0;
        let nm = n * m;
        let nn = n * n;
        let corr = if self.quartic_correction {
            let g = 2.0 * (k * m) + n.derivative();
            (n * g).scale(-1.0 / 24.0)
        } else {
            Jet::ZERO
        };
        let (z2_2, z2_3, z2_4) = (z2 * z2, z2 * z2 * z2, z2 * z2 * z2 * z2);
        let one = Jet::constant(1.0);
        // coefficient vector c and its z2-derivatives, each entry a jet in z1
        let c = [
            nm.scale(-z2_3 / 6.0) + corr.scale(z2_4),
            Jet::constant(z2) - nn.scale(z2_3 / 6.0),
            n.scale(0.5 * z2_2),
        ];
        let c2 = [
            nm.scale(-0.5 * z2_2) + corr.scale(4.0 * z2_3),
            one - nn.scale(0.5 * z2_2),
            n.scale(z2),
        ];
        let c22 = [nm.scale(-z2) + corr.scale(12.0 * z2_2), nn.scale(-z2), n];

        let cv = v3(c[0], c[1], c[2], 0);
        let c_1 = v3(c[0], c[1], c[2], 1);
        let c_11 = v3(c[0], c[1], c[2], 2);
        let c_2 = v3(c2[0], c2[1], c2[2], 0);
        let c_12 = v3(c2[0], c2[1], c2[2], 1);
        let c_22 = v3(c22[0], c22[1], c22[2], 0);

        let x = darboux_generator(k.v(), l.v(), m.v());
        let dx = darboux_generator(k.d(1), l.d(1), m.d(1));
        let e1 = Vector3::x();
        let a1 = e1 + x * cv + c_1;
        let a2 = c_2;
        let a11 = x * a1 + dx * cv + x * c_1 + c_11;
        let a12 = x * c_2 + c_12;
        let a22 = c_22;

        let big_n = a1.cross(&a2);
        let norm = big_n.norm();
        let nv = big_n / norm;
        let proj = |v: Vector3<f64>| (v - nv * nv.dot(&v)) / norm;
        let dn1 = proj(a11.cross(&a2) + a1.cross(&a12));
        let dn2 = proj(a12.cross(&a2) + a1.cross(&a22));

        let e = self.frame.eval(z1);
        let theta = self.midline_point(z1);
        MidSurfacePoint {
            phi: theta + e * cv,
            d1: e * a1,
            d2: e * a2,
            d11: e * a11,
            d12: e * a12,
            d22: e * a22,
            normal: e * nv,
            dn1: e * dn1,
            dn2: e * dn2,
        }
    }

    pub fn phi(&self, z1: f64, z2: f64) -> Vector3<f64> {
        self.mid_surface(z1, z2).phi
    }

    /// Psi(z) and DPsi(z) in physical ribbon coordinates.
    pub fn psi(&self, z: [f64; 3]) -> (Vector3<f64>, Matrix3<f64>) {
        let p = self.mid_surface(z[0], z[1]);
        let z3 = z[2];
        let d = Matrix3::from_columns(&[p.d1 + p.dn1 * z3, p.d2 + p.dn2 * z3, p.normal]);
        (p.phi + p.normal * z3, d)
    }

    /// Coefficient X22 of the z2 z3 term in the 22 entry, read off numerically from Psi:
    /// X22 = -1/2 d2 d3 (g - DPsi^T DPsi)_22 at (z1, 0, 0).
    pub fn x22(&self, z1: f64) -> f64 {
        let h = 1e-3;
        let ii22 = |z2: f64| self.mid_surface(z1, z2).second_form()[(1, 1)];
        // d3 (DPsi^T DPsi)_22 = -2 II^Phi_22 and d3 g_22 = -2 II_22
        let d_phi = (8.0 * (ii22(h) - ii22(-h)) - (ii22(2.0 * h) - ii22(-2.0 * h))) / (12.0 * h);
        let d_ref = self.geom.second_form.eval(z1, 0.0).d2[(1, 1)];
        d_ref - d_phi
    }

    /// Smallest singular value of DPsi over a sample grid of the thickened strip.
    pub fn min_singular_value(&self, t: f64, w: f64) -> f64 {
        let mut out = f64::INFINITY;
        for i in 0..=32 {
            let z1 = self.geom.length * i as f64 / 32.0;
            for j in 0..=4 {
                for k in 0..=2 {
                    let z = [z1, w * (j as f64 / 4.0 - 0.5), t * (k as f64 / 2.0 - 0.5)];
                    let (_, d) = self.psi(z);
                    out = out.min(d.singular_values().min());
                }
            }
        }
        out
    }
}

/// Builds Phi, the normal, Psi and Q0 for `geom`, checking admissibility at (t, w).
pub fn build_euclidean_ribbon(geom: &RibbonGeometry, t: f64, w: f64) -> Result<EuclideanRibbon> {
    geom.check_admissible(w, t)?;
    let r = EuclideanRibbon::new(geom);
    let drift = r.frame.max_orthogonality_defect();
    if drift > 1e-9 {
        return Err(Error::Integrator { location: geom.length, message: format!("frame drift {drift:e}") });
    }
    let s = r.min_singular_value(t, w);
    if s < 0.05 {
        return Err(Error::Geometry(format!("DPsi nearly singular (min singular value {s:.3e}) at t = {t}, w = {w}")));
    }
    Ok(r)
}

/// Fitted decay orders of the metric expansion and the extracted X22 profile.
#[derive(Clone, Debug)]
pub struct ExpansionReport {
    pub slope_z2: f64,
    pub slope_z3: f64,
    /// True when the residual vanished identically (below 1e-12) at all scales.
    pub exact: bool,
    pub max_residual: f64,
    /// Fitted z2^2 coefficient of (DPsi^T DPsi - g)_11 at z3 = 0, averaged along the midline.
    pub gauss_coefficient: f64,
    pub x22: Vec<(f64, f64)>,
}

fn displayed_expansion(r: &EuclideanRibbon, z: [f64; 3]) -> Matrix3<f64> {
    let [z1, z2, z3] = z;
    let k = r.geom.kappa_at(z1);
    let ii = r.geom.ii0(z1);
    let mut m = Matrix3::identity();
    m[(0, 0)] = (1.0 - k * z2).powi(2) - ii.determinant() * z2 * z2;
    for i in 0..2 {
        for j in 0..2 {
            m[(i, j)] -= 2.0 * z3 * ii[(i, j)];
        }
    }
    m
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

pub fn expansion_residual(r: &EuclideanRibbon) -> ExpansionReport {
    let l = r.geom.length;
    let z1s: Vec<f64> = (1..8).map(|i| l * i as f64 / 8.0).collect();
    let scales: Vec<f64> = (0..6).map(|k| 0.1 / 2f64.powi(k)).collect();
    let residual = |z: [f64; 3]| {
        let (_, d) = r.psi(z);
        (d.transpose() * d - displayed_expansion(r, z)).amax()
    };
    let mut r2 = Vec::new();
    let mut r3 = Vec::new();
    for &h in &scales {
        r2.push(z1s.iter().map(|&z1| residual([z1, h, 0.0])).fold(0.0, f64::max));
        r3.push(z1s.iter().map(|&z1| residual([z1, 0.0, h])).fold(0.0, f64::max));
    }
    let max_residual = r2.iter().chain(&r3).copied().fold(0.0, f64::max);
    let exact = max_residual <= 1e-12;
    let lx: Vec<f64> = scales.iter().map(|h| h.ln()).collect();
    let (slope_z2, slope_z3) = if exact {
        (f64::INFINITY, f64::INFINITY)
    } else {
        let ly2: Vec<f64> = r2.iter().map(|v| v.max(1e-300).ln()).collect();
        let ly3: Vec<f64> = r3.iter().map(|v| v.max(1e-300).ln()).collect();
        (slope(&lx, &ly2), slope(&lx, &ly3))
    };
    // z2^2 coefficient of (DPsi^T DPsi - g)_11 by a symmetric quadratic fit
    let h = 1e-2;
    let coeff = |z1: f64| {
        let f = |z2: f64| {
            let (_, d) = r.psi([z1, z2, 0.0]);
            (d.transpose() * d)[(0, 0)] - r.geom.metric_unchecked([z1, z2, 0.0])[(0, 0)]
        };
        (f(h) + f(-h) - 2.0 * f(0.0)) / (2.0 * h * h)
    };
    let gauss_coefficient = z1s.iter().map(|&z1| coeff(z1)).sum::<f64>() / z1s.len() as f64;
    let x22 = (0..=16).map(|i| l * i as f64 / 16.0).map(|z1| (z1, r.x22(z1))).collect();
    ExpansionReport { slope_z2, slope_z3, exact, max_residual, gauss_coefficient, x22 }
}
