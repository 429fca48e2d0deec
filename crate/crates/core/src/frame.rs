//! Rotation-valued paths R' = R X(s) with X skew, integrated by a fourth-order Magnus
//! scheme and evaluated between samples by a local re-integration step.

use nalgebra::{Matrix3, Vector3};
use std::fmt;
use std::sync::Arc;

pub type Generator = Arc<dyn Fn(f64) -> Matrix3<f64> + Send + Sync>;

pub const DEFAULT_STEP: f64 = 1.0 / 1024.0;

pub fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// The generator of the Darboux system: columns satisfy r' = r [[0,-k,-m],[k,0,-t],[m,t,0]].
pub fn darboux_generator(kappa: f64, mu: f64, tau: f64) -> Matrix3<f64> {
    Matrix3::new(0.0, -kappa, -mu, kappa, 0.0, -tau, mu, tau, 0.0)
}

/// Exponential of a skew-symmetric matrix (Rodrigues).
pub fn exp_so3(w: &Matrix3<f64>) -> Matrix3<f64> {
    let v = Vector3::new(w[(2, 1)], w[(0, 2)], w[(1, 0)]);
    let th2 = v.norm_squared();
    let th = th2.sqrt();
    let (a, b) = if th < 1e-4 {
        (1.0 - th2 / 6.0 + th2 * th2 / 120.0, 0.5 - th2 / 24.0 + th2 * th2 / 720.0)
    } else {
        (th.sin() / th, (1.0 - th.cos()) / th2)
    };
    Matrix3::identity() + w * a + w * w * b
}

/// One Newton step towards the orthogonal polar factor.
pub fn reorthogonalize(r: &Matrix3<f64>) -> Matrix3<f64> {
    r * (Matrix3::identity() * 3.0 - r.transpose() * r) * 0.5
}

pub fn orthogonality_defect(r: &Matrix3<f64>) -> f64 {
    (r.transpose() * r - Matrix3::identity()).amax()
}

const GAUSS3_X: [f64; 3] = [0.112_701_665_379_258_31, 0.5, 0.887_298_334_620_741_7];
const GAUSS3_W: [f64; 3] = [5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0];

fn magnus_step(gen: &Generator, s: f64, h: f64) -> Matrix3<f64> {
    let c = 3f64.sqrt() / 6.0;
    let x1 = gen(s + (0.5 - c) * h);
    let x2 = gen(s + (0.5 + c) * h);
    let comm = x2 * x1 - x1 * x2;
    exp_so3(&((x1 + x2) * (0.5 * h) - comm * (3f64.sqrt() / 12.0 * h * h)))
}

#[derive(Clone)]
pub struct FramePath {
    origin: f64,
    s0: f64,
    h: f64,
    samples: Vec<Matrix3<f64>>,
    integrals: Vec<Matrix3<f64>>,
    generator: Generator,
}

impl fmt::Debug for FramePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FramePath")
            .field("origin", &self.origin)
            .field("range", &self.range())
            .field("samples", &self.samples.len())
            .finish()
    }
}

impl FramePath {
    /// Integrates R' = R X(s), R(origin) = initial, on a uniform grid through `origin`
    /// covering [s_min, s_max], with step at most `max_step`.
    pub fn integrate(
        generator: Generator,
        initial: Matrix3<f64>,
        origin: f64,
        s_min: f64,
        s_max: f64,
        max_step: f64,
    ) -> Self {
        assert!(s_min <= origin && origin <= s_max && max_step > 0.0);
        let span = (s_max - s_min).max(max_step);
        let n = (span / max_step).ceil().max(4.0);
        let h = span / n;
        let k_lo = ((origin - s_min) / h - 1e-9).ceil().max(0.0) as usize;
        let k_hi = ((s_max - origin) / h - 1e-9).ceil().max(0.0) as usize;
        let count = k_lo + k_hi + 1;
        let s0 = origin - k_lo as f64 * h;
        let mut samples = vec![Matrix3::zeros(); count];
        let mut integrals = vec![Matrix3::zeros(); count];
        samples[k_lo] = initial;
        let mut path = FramePath { origin, s0, h, samples: Vec::new(), integrals: Vec::new(), generator };
        for k in k_lo + 1..count {
            let s = s0 + (k - 1) as f64 * h;
            let r = samples[k - 1];
            integrals[k] = integrals[k - 1] + path.local_integral(&r, s, h);
            samples[k] = reorthogonalize(&(r * magnus_step(&path.generator, s, h)));
        }
        for k in (0..k_lo).rev() {
            let s = s0 + (k + 1) as f64 * h;
            let r = samples[k + 1];
            integrals[k] = integrals[k + 1] + path.local_integral(&r, s, -h);
            samples[k] = reorthogonalize(&(r * magnus_step(&path.generator, s, -h)));
        }
        path.samples = samples;
        path.integrals = integrals;
        path
    }

    /// Constant-coefficient or closure-driven Darboux frame on [0, L] extended by `pad`.
    pub fn darboux(
        kappa: impl Fn(f64) -> f64 + Send + Sync + 'static,
        mu: impl Fn(f64) -> f64 + Send + Sync + 'static,
        tau: impl Fn(f64) -> f64 + Send + Sync + 'static,
        initial: Matrix3<f64>,
        s_min: f64,
        s_max: f64,
    ) -> Self {
        let gen: Generator = Arc::new(move |s| darboux_generator(kappa(s), mu(s), tau(s)));
        FramePath::integrate(gen, initial, 0.0f64.clamp(s_min, s_max), s_min, s_max, DEFAULT_STEP)
    }

    fn local_integral(&self, r: &Matrix3<f64>, s: f64, h: f64) -> Matrix3<f64> {
        let mut acc = Matrix3::zeros();
        for (x, w) in GAUSS3_X.iter().zip(GAUSS3_W) {
            acc += r * magnus_step(&self.generator, s, x * h) * w;
        }
        acc * h
    }

    pub fn range(&self) -> (f64, f64) {
        (self.s0, self.s0 + (self.samples.len() - 1) as f64 * self.h)
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn samples(&self) -> &[Matrix3<f64>] {
        &self.samples
    }

    pub fn sample_points(&self) -> Vec<f64> {
        (0..self.samples.len()).map(|k| self.s0 + k as f64 * self.h).collect()
    }

    pub fn generator(&self, s: f64) -> Matrix3<f64> {
        (self.generator)(s)
    }

    fn nearest(&self, s: f64) -> usize {
        let k = ((s - self.s0) / self.h).round();
        k.clamp(0.0, (self.samples.len() - 1) as f64) as usize
    }

    pub fn eval(&self, s: f64) -> Matrix3<f64> {
        let k = self.nearest(s);
        let sk = self.s0 + k as f64 * self.h;
        let d = s - sk;
        if d == 0.0 {
            return self.samples[k];
        }
        self.samples[k] * magnus_step(&self.generator, sk, d)
    }

    /// R(s) and its derivative R X(s).
    pub fn eval_with_derivative(&self, s: f64) -> (Matrix3<f64>, Matrix3<f64>) {
        let r = self.eval(s);
        (r, r * self.generator(s))
    }

    /// Integral of R from the origin to s.
    pub fn integral(&self, s: f64) -> Matrix3<f64> {
        let k = self.nearest(s);
        let sk = self.s0 + k as f64 * self.h;
        let d = s - sk;
        if d == 0.0 {
            return self.integrals[k];
        }
        self.integrals[k] + self.local_integral(&self.samples[k], sk, d)
    }

    pub fn max_orthogonality_defect(&self) -> f64 {
        self.samples.iter().map(orthogonality_defect).fold(0.0, f64::max)
    }

    pub fn min_determinant(&self) -> f64 {
        self.samples.iter().map(|r| r.determinant()).fold(f64::INFINITY, f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rodrigues_is_rotation() {
        let w = skew(&Vector3::new(0.3, -1.2, 2.0));
        let r = exp_so3(&w);
        assert!(orthogonality_defect(&r) < 1e-14);
        assert!((r.determinant() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn matches_rk4_reference_for_noncommuting_generator() {
        let gen: Generator =
            Arc::new(|s: f64| darboux_generator(1.0 + s, (2.0 * s).sin(), 0.5 * s * s));
        let path = FramePath::integrate(gen.clone(), Matrix3::identity(), 0.0, -0.5, 1.0, 1.0 / 64.0);
        // classical RK4 with a much finer step as reference
        let n = 20000;
        let h = 1.0 / n as f64;
        let mut r = Matrix3::identity();
        let mut integral = Matrix3::zeros();
        let f = |s: f64, r: &Matrix3<f64>| r * gen(s);
        for i in 0..n {
            let s = i as f64 * h;
            let k1 = f(s, &r);
            let k2 = f(s + h / 2.0, &(r + k1 * (h / 2.0)));
            let k3 = f(s + h / 2.0, &(r + k2 * (h / 2.0)));
            let k4 = f(s + h, &(r + k3 * h));
            let r_next = r + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
            integral += (r + r_next) * (h / 2.0);
            r = r_next;
        }
        assert!((path.eval(1.0) - r).amax() < 1e-9);
        assert!((path.integral(1.0) - integral).amax() < 1e-7);
        assert!((path.eval(0.37) - path.eval(0.37)).amax() == 0.0);
        assert!(path.max_orthogonality_defect() < 1e-12);
    }
}
