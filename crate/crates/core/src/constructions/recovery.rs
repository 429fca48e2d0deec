use super::AnalyticConfig3;
use crate::error::{Error, Result};
use crate::euclidean::EuclideanRibbon;
use crate::frame::{FramePath, Generator, DEFAULT_STEP};
use crate::limits::{FormField, MidlineState, GAUSS_TOL};
use crate::quadform::{eta_completion, sym_coords};
use crate::spline::QuinticSpline;
use nalgebra::{Matrix2, Matrix3, Vector3};
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Gauss,
    Codazzi,
}

type Coeffs = [f64; 12];

/// Recovery configuration u^t for a limiting midline state. `eps` is w^2 (Gauss scaling) or
/// w t (Codazzi scaling).
#[derive(Clone)]
pub struct RecoveryConfig {
    ribbon: Arc<EuclideanRibbon>,
    forms: FormField,
    state: MidlineState,
    kind: Kind,
    pub t: f64,
    pub w: f64,
    pub eps: f64,
    rbar: FramePath,
    cum: Vec<Vector3<f64>>,
    cum_h: f64,
    table: Vec<QuinticSpline>,
}

const CUM_STEPS: usize = 2048;
const TABLE_NODES: usize = 256;
const GAUSS3_X: [f64; 3] = [0.112_701_665_379_258_31, 0.5, 0.887_298_334_620_741_7];
const GAUSS3_W: [f64; 3] = [5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0];

fn skew_generator(q0: &Matrix3<f64>, alpha: f64, beta: f64) -> Matrix3<f64> {
    let b = Matrix3::new(0.0, 0.0, -alpha, 0.0, 0.0, -beta, alpha, beta, 0.0);
    q0 * b * q0.transpose()
}

impl RecoveryConfig {
    fn build(
        ribbon: Arc<EuclideanRibbon>,
        forms: FormField,
        state: MidlineState,
        kind: Kind,
        t: f64,
        w: f64,
    ) -> Result<Self> {
        if !(t > 0.0 && w > 0.0) {
            return Err(Error::Domain(format!("recovery needs t, w > 0 (got t = {t}, w = {w})")));
        }
        let eps = match kind {
            Kind::Gauss => w * w,
            Kind::Codazzi => w * t,
        };
        let length = ribbon.geom.length;
        let pad = 0.1 * length;
        let (r2, st, scale) = (ribbon.clone(), state.clone(), eps / t);
        let gen: Generator = Arc::new(move |s| skew_generator(&r2.q0(s), st.alpha.value(s), st.beta.value(s)) * scale);
        let rbar = FramePath::integrate(gen, Matrix3::identity(), 0.0, -pad, length + pad, DEFAULT_STEP);
        let mut cfg = RecoveryConfig { ribbon, forms, state, kind, t, w, eps, rbar, cum: Vec::new(), cum_h: length / CUM_STEPS as f64, table: Vec::new() };
        let mut cum = vec![Vector3::zeros(); CUM_STEPS + 1];
        for k in 0..CUM_STEPS {
            let s = k as f64 * cfg.cum_h;
            cum[k + 1] = cum[k] + cfg.local_integral(s, cfg.cum_h);
        }
        cfg.cum = cum;
        let xs: Vec<f64> = (0..=TABLE_NODES).map(|i| length * i as f64 / TABLE_NODES as f64).collect();
        let rows = xs.iter().map(|&x| cfg.coeffs(x)).collect::<Result<Vec<_>>>()?;
        cfg.table = (0..12)
            .map(|i| QuinticSpline::new(&xs, &rows.iter().map(|r| r[i]).collect::<Vec<_>>()))
            .collect::<Result<Vec<_>>>()?;
        Ok(cfg)
    }

    fn integrand(&self, s: f64) -> Vector3<f64> {
        let factor = match self.kind {
            Kind::Gauss => 1.0 + self.eps / 24.0 * self.ribbon.geom.gauss_deficit(s),
            Kind::Codazzi => 1.0,
        };
        self.rbar.eval(s) * self.ribbon.q0(s).column(0) * factor
    }

    fn local_integral(&self, s: f64, h: f64) -> Vector3<f64> {
        let mut acc = Vector3::zeros();
        for (x, wt) in GAUSS3_X.iter().zip(GAUSS3_W) {
            acc += self.integrand(s + x * h) * wt;
        }
        acc * h
    }

    /// I(x1) = int_0^x1 Rbar theta' (1 + eps dG / 24).
    fn midline_integral(&self, x1: f64) -> Vector3<f64> {
        let k = ((x1 / self.cum_h).floor().max(0.0) as usize).min(CUM_STEPS);
        let sk = k as f64 * self.cum_h;
        self.cum[k] + self.local_integral(sk, x1 - sk)
    }

    fn coeffs(&self, x1: f64) -> Result<Coeffs> {
        let mut k = [0.0; 12];
        let beta = self.state.beta.value(x1);
        let gamma = self.state.gammabar.value(x1);
        k[0] = beta;
        k[1] = gamma;
        let rel = self.forms.relaxation(x1)?;
        let m0 = self.state.matrix(x1);
        match self.kind {
            Kind::Gauss => {
                let lambda = rel.completion * sym_coords(&m0);
                k[2..5].copy_from_slice(lambda.as_slice());
                let dg = self.ribbon.geom.gauss_deficit(x1);
                let (_, b) = eta_completion(&self.forms.q3_at(x1), dg)?;
                k[5..8].copy_from_slice(&[b[(0, 1)], b[(1, 1)], b[(2, 1)]]);
                k[8..11].copy_from_slice(&[b[(0, 2)], b[(1, 2)], b[(2, 2)]]);
            }
            Kind::Codazzi => {
                let [d1, d2] = self.ribbon.geom.codazzi_deficit(x1);
                let (_, a22) = rel.q2.circ(d1, d2);
                k[2] = self.ribbon.x22(x1) - a22;
                let l0 = rel.completion * sym_coords(&m0);
                let l1 = -(rel.completion * sym_coords(&Matrix2::new(d1, d2, d2, a22)));
                k[3..6].copy_from_slice(l0.as_slice());
                k[6..9].copy_from_slice(l1.as_slice());
            }
        }
        Ok(k)
    }

    /// Tabulated coefficients and their x1-derivatives.
    fn coeff_jets(&self, x1: f64) -> (Coeffs, Coeffs) {
        let mut k = [0.0; 12];
        let mut kd = [0.0; 12];
        for (i, s) in self.table.iter().enumerate() {
            let j = s.eval(x1);
            k[i] = j.v();
            kd[i] = j.d(1);
        }
        (k, kd)
    }

    /// Correction c and its x2, x3 partials, linear in the coefficient vector.
    fn corrections(&self, k: &Coeffs, x2: f64, x3: f64) -> [Vector3<f64>; 3] {
        let (e, w, t) = (self.eps, self.w, self.t);
        let v = |i: usize| Vector3::new(k[i], k[i + 1], k[i + 2]);
        let (beta, gamma) = (k[0], k[1]);
        match self.kind {
            Kind::Gauss => {
                let (lam, eta2, eta3) = (v(2), v(5), v(8));
                let bg = Vector3::new(beta, gamma, 0.0);
                let g3 = Vector3::new(0.0, 0.0, gamma);
                let c = -bg * (e * w * x2 * x3) + g3 * (0.5 * e * w * w / t * x2 * x2) - lam * (0.5 * e * t * x3 * x3)
                    + eta2 * (e * w / 6.0 * (x2.powi(3) - x2 / 4.0))
                    + eta3 * (0.5 * e * t * (x2 * x2 - 1.0 / 12.0) * x3);
                let c2 = -bg * (e * w * x3) + g3 * (e * w * w / t * x2)
                    + eta2 * (e * w / 6.0 * (3.0 * x2 * x2 - 0.25))
                    + eta3 * (e * t * x2 * x3);
                let c3 = -bg * (e * w * x2) - lam * (e * t * x3) + eta3 * (0.5 * e * t * (x2 * x2 - 1.0 / 12.0));
                [c, c2, c3]
            }
            Kind::Codazzi => {
                let sigma = k[2];
                let (l0, l1) = (v(3), v(6));
                let lam = l0 + l1 * x2;
                let c = -Vector3::new(beta, gamma + 0.5 * x2 * sigma, 0.0) * (e * w * x2 * x3)
                    + Vector3::new(0.0, 0.0, gamma + x2 * sigma / 3.0) * (0.5 * e * w * w / t * x2 * x2)
                    - lam * (0.5 * e * t * x3 * x3);
                let c2 = -Vector3::new(beta, gamma + x2 * sigma, 0.0) * (e * w * x3)
                    + Vector3::new(0.0, 0.0, x2 * gamma + 0.5 * x2 * x2 * sigma) * (e * w * w / t)
                    - l1 * (0.5 * e * t * x3 * x3);
                let c3 = -Vector3::new(beta, gamma + 0.5 * x2 * sigma, 0.0) * (e * w * x2) - lam * (e * t * x3);
                [c, c2, c3]
            }
        }
    }

    /// The rotation field Rbar(x1).
    pub fn rotation(&self, x1: f64) -> Matrix3<f64> {
        self.rbar.eval(x1)
    }
}

impl AnalyticConfig3 for RecoveryConfig {
    fn eval(&self, x: [f64; 3]) -> (Vector3<f64>, Matrix3<f64>) {
        let [x1, x2, x3] = x;
        let (w, t) = (self.w, self.t);
        let z = [x1, w * x2, t * x3];
        let (psi, dpsi) = self.ribbon.psi(z);
        let theta = self.ribbon.midline_point(x1);
        let q0 = self.ribbon.q0(x1);
        let m = self.ribbon.q0_generator(x1);
        let rb = self.rbar.eval(x1);
        let a_prime = skew_generator(&q0, self.state.alpha.value(x1), self.state.beta.value(x1));
        let rb_d = rb * a_prime * (self.eps / self.t);
        let rq = rb * q0;
        let rq_d = rb_d * q0 + rq * m;

        let (k, kd) = self.coeff_jets(x1);
        let [c, c2, c3] = self.corrections(&k, x2, x3);
        let [c1, _, _] = self.corrections(&kd, x2, x3);

        let factor = match self.kind {
            Kind::Gauss => 1.0 + self.eps / 24.0 * self.ribbon.geom.gauss_deficit(x1),
            Kind::Codazzi => 1.0,
        };
        let theta_d = q0.column(0).into_owned();
        let u = self.midline_integral(x1) + rb * (psi - theta) + rq * c;
        let d1 = rb * theta_d * factor + rb_d * (psi - theta) + rb * (dpsi.column(0) - theta_d) + rq_d * c + rq * c1;
        let d2 = rb * dpsi.column(1) * w + rq * c2;
        let d3 = rb * dpsi.column(2) * t + rq * c3;
        (u, Matrix3::from_columns(&[d1, d2, d3]))
    }

    fn length(&self) -> f64 {
        self.ribbon.geom.length
    }
}

/// Recovery sequence in the Gauss scaling eps = w^2.
pub fn recovery_narrow_gauss(
    ribbon: Arc<EuclideanRibbon>,
    forms: &FormField,
    state: &MidlineState,
    t: f64,
    w: f64,
) -> Result<RecoveryConfig> {
    RecoveryConfig::build(ribbon, forms.clone(), state.clone(), Kind::Gauss, t, w)
}

/// Recovery sequence in the Codazzi scaling eps = w t; requires det II0 = K^S.
pub fn recovery_narrow_codazzi(
    ribbon: Arc<EuclideanRibbon>,
    forms: &FormField,
    state: &MidlineState,
    t: f64,
    w: f64,
) -> Result<RecoveryConfig> {
    let geom = &ribbon.geom;
    for i in 0..=256 {
        let x = geom.length * i as f64 / 256.0;
        let d = geom.gauss_deficit(x);
        if d.abs() > GAUSS_TOL {
            return Err(Error::Domain(format!(
                "Codazzi recovery undefined on Gauss-incompatible input (deficit {d:e} at x1 = {x})"
            )));
        }
    }
    RecoveryConfig::build(ribbon, forms.clone(), state.clone(), Kind::Codazzi, t, w)
}
