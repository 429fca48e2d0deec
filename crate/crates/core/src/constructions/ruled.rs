use super::{darboux_frame, SurfaceMap, SurfacePoint};
use crate::error::{Error, Result};
use crate::fields::SmoothField1D;
use crate::frame::FramePath;
use crate::geometry::{planar_immersion, PlanarImmersion, RibbonGeometry};
use crate::limits::{GAUSS_TOL, L0_MARGIN};
use nalgebra::{Matrix2, Matrix3, Matrix3x2, Vector2, Vector3};
use std::sync::Arc;

/// Ruled isometric immersion v_w = k_w o chi of the flat strip whose second form along the
/// midline is A_w = II0 + w [[alpha, beta], [beta, gamma_w]] with det A_w = 0.
#[derive(Clone, Debug)]
pub struct RuledIsometry {
    geom: RibbonGeometry,
    alpha: SmoothField1D,
    beta: SmoothField1D,
    pub w: f64,
    planar: PlanarImmersion,
    frame: FramePath,
}

const NEWTON_TOL: f64 = 1e-12;

impl RuledIsometry {
    /// A_w(t).
    pub fn a_w(&self, t: f64) -> Matrix2<f64> {
        a_w(&self.geom, &self.alpha, &self.beta, self.w, t)
    }

    /// Unit null vector of A_w, oriented so that q . e2 > 0.
    pub fn null_vector(&self, t: f64) -> Vector2<f64> {
        let a = self.a_w(t);
        let (x, y) = (a[(0, 0)], a[(0, 1)]);
        Vector2::new(-y, x) * (x.signum() / x.hypot(y))
    }

    fn null_vector_derivative(&self, t: f64) -> Vector2<f64> {
        let h = 1e-3;
        let q = |s: f64| self.null_vector(s);
        (8.0 * (q(t + h) - q(t - h)) - (q(t + 2.0 * h) - q(t - 2.0 * h))) / (12.0 * h)
    }

    pub fn frame(&self) -> &FramePath {
        &self.frame
    }

    fn phi_and_jacobian(&self, t: f64, s: f64) -> (Vector2<f64>, Matrix2<f64>) {
        let p = self.planar.rotation(t);
        let q = self.null_vector(t);
        let qd = self.null_vector_derivative(t);
        let k = self.planar.kappa(t);
        let perp = Vector2::new(q.y, -q.x);
        let phi = self.planar.point(t, 0.0) + p * q * s;
        let jac = p * Matrix2::from_columns(&[Vector2::x() + qd * s - perp * (s * k), q]);
        (phi, jac)
    }

    /// Ruled coordinates (t, s) with phi_w(t, s) = chi(z1, z2).
    pub fn ruled_coordinates(&self, z1: f64, z2: f64) -> Result<(f64, f64, Matrix2<f64>)> {
        let y = self.planar.point(z1, z2);
        let q0 = self.null_vector(z1);
        let mut ts = Vector2::new(z1, z2 / q0.y);
        let (mut phi, mut jac) = self.phi_and_jacobian(ts.x, ts.y);
        let mut res = (phi - y).norm();
        for _ in 0..60 {
            if res <= NEWTON_TOL {
                return Ok((ts.x, ts.y, jac));
            }
            let step = jac.lu().solve(&(y - phi)).ok_or_else(|| Error::Construction {
                point: [z1, z2],
                message: "singular ruled-coordinate Jacobian".into(),
            })?;
            let mut lam = 1.0;
            loop {
                let cand = ts + step * lam;
                let (p2, j2) = self.phi_and_jacobian(cand.x, cand.y);
                let r2 = (p2 - y).norm();
                if r2 < res || lam < 1e-6 {
                    ts = cand;
                    phi = p2;
                    jac = j2;
                    res = r2;
                    break;
                }
                lam *= 0.5;
            }
        }
        if res <= NEWTON_TOL {
            return Ok((ts.x, ts.y, jac));
        }
        Err(Error::Construction {
            point: [z1, z2],
            message: format!("Newton inversion of the ruled coordinates stalled at residual {res:e}"),
        })
    }

    /// Max of |grad v^T grad v - a| over an n1 x n2 sample grid of the strip.
    pub fn isometry_residual(&self, n1: usize, n2: usize) -> Result<f64> {
        let mut out: f64 = 0.0;
        for (z1, z2) in strip_grid(self.geom.length, self.w, n1, n2) {
            let p = self.point(z1, z2)?;
            let a = self.geom.midsurface_metric(z1, z2)?;
            out = out.max((p.first_form() - a).amax());
        }
        Ok(out)
    }

    /// Max of |II_v(z1, 0) - A_w(z1)| along the midline.
    pub fn midline_form_error(&self, n: usize) -> Result<f64> {
        let mut out: f64 = 0.0;
        for i in 0..=n {
            let z1 = self.geom.length * i as f64 / n as f64;
            out = out.max((self.point(z1, 0.0)?.second_form - self.a_w(z1)).amax());
        }
        Ok(out)
    }

    /// Midline point int_0^z1 r_w e1.
    pub fn midline_point(&self, z1: f64) -> Vector3<f64> {
        self.frame.integral(z1).column(0).into_owned()
    }
}

pub(crate) fn strip_grid(length: f64, w: f64, n1: usize, n2: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity((n1 + 1) * (n2 + 1));
    for i in 0..=n1 {
        for j in 0..=n2 {
            out.push((length * i as f64 / n1 as f64, w * (j as f64 / n2 as f64 - 0.5)));
        }
    }
    out
}

fn a_w(geom: &RibbonGeometry, alpha: &SmoothField1D, beta: &SmoothField1D, w: f64, t: f64) -> Matrix2<f64> {
    let ii = geom.ii0(t);
    let (l0, m0, n0) = (ii[(0, 0)], ii[(0, 1)], ii[(1, 1)]);
    let (a, b) = (alpha.value(t), beta.value(t));
    let gamma = (2.0 * b * m0 + w * b * b - a * n0 - ii.determinant() / w) / (l0 + w * a);
    ii + Matrix2::new(a, b, b, gamma) * w
}

impl SurfaceMap for RuledIsometry {
    fn point(&self, z1: f64, z2: f64) -> Result<SurfacePoint> {
        let (t, s, jac) = self.ruled_coordinates(z1, z2)?;
        let r = self.frame.eval(t);
        let q = self.null_vector(t);
        let rhat: Matrix3x2<f64> = r.fixed_view::<3, 2>(0, 0).into_owned();
        let f = self.midline_point(t) + rhat * q * s;
        let gchi = self.planar.jacobian(z1, z2);
        let p = self.planar.rotation(t);
        let grad = rhat * p.transpose() * gchi;
        let jinv = jac.try_inverse().ok_or_else(|| Error::Construction {
            point: [z1, z2],
            message: "singular ruled-coordinate Jacobian".into(),
        })?;
        let grad_t = (jinv * gchi).row(0).into_owned();
        let a = self.a_w(t);
        let dnu_dt = -(r.column(0) * a[(0, 0)] + r.column(1) * a[(0, 1)]);
        let d1 = grad.column(0).into_owned();
        let d2 = grad.column(1).into_owned();
        let dn = [dnu_dt * grad_t[0], dnu_dt * grad_t[1]];
        let mut ii = Matrix2::zeros();
        for (i, di) in [d1, d2].iter().enumerate() {
            for (j, dnj) in dn.iter().enumerate() {
                ii[(i, j)] = -di.dot(dnj);
            }
        }
        let ii = (ii + ii.transpose()) * 0.5;
        Ok(SurfacePoint { f, d1, d2, normal: r.column(2).into_owned(), second_form: ii })
    }

    fn length(&self) -> f64 {
        self.geom.length
    }

    fn width(&self) -> f64 {
        self.w
    }
}

/// Builds the ruled isometric immersion for midline perturbation (alpha, beta) at width w.
pub fn ruled_isometry(
    geom: &RibbonGeometry,
    alpha: &SmoothField1D,
    beta: &SmoothField1D,
    w: f64,
) -> Result<RuledIsometry> {
    if !geom.flat {
        return Err(Error::Domain("ruled isometry requires a flat reference geometry".into()));
    }
    if !(w > 0.0) {
        return Err(Error::Domain(format!("ruled isometry needs w > 0, got {w}")));
    }
    let pad = 0.1 * geom.length;
    for i in 0..=256 {
        let t = -pad + (geom.length + 2.0 * pad) * i as f64 / 256.0;
        let ii = geom.ii0(t);
        if ii.determinant().abs() > GAUSS_TOL {
            return Err(Error::Domain(format!("ruled isometry needs det II0 = 0; got {:e} at x1 = {t}", ii.determinant())));
        }
        let l0 = ii[(0, 0)];
        let lw = l0 + w * alpha.value(t);
        if l0.abs() < L0_MARGIN || lw.abs() < L0_MARGIN || lw.signum() != l0.signum() {
            return Err(Error::Domain(format!(
                "the construction needs l0 = II0_11 != 0 along the extended midline (l0 = {l0:e} at x1 = {t}, w = {w})"
            )));
        }
    }
    let planar = planar_immersion(geom, w)?;
    let (g, a, b) = (Arc::new(geom.clone()), alpha.clone(), beta.clone());
    let (g1, a1, b1) = (g.clone(), a.clone(), b.clone());
    let mu = SmoothField1D::custom(move |t| crate::jet::Jet::constant(a_w(&g1, &a1, &b1, w, t)[(0, 0)]));
    let (g2, a2, b2) = (g.clone(), a.clone(), b.clone());
    let tau = SmoothField1D::custom(move |t| crate::jet::Jet::constant(a_w(&g2, &a2, &b2, w, t)[(0, 1)]));
    let frame = darboux_frame(&geom.kappa, &mu, &tau, Matrix3::identity(), geom.length);
    let iso = RuledIsometry { geom: geom.clone(), alpha: a, beta: b, w, planar, frame };
    for (z1, z2) in strip_grid(geom.length, w, 32, 8) {
        iso.ruled_coordinates(z1, z2)?;
    }
    Ok(iso)
}
