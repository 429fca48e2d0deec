//! Scalar and matrix fields on the midline and on the strip.
//!
//! Strip fields are polynomials in the transverse coordinate `z2` with midline-dependent
//! coefficients, which covers every closed-form preset and keeps all partials exact.

use crate::jet::Jet;
use crate::spline::QuinticSpline;
use nalgebra::Matrix2;
use std::fmt;
use std::sync::Arc;

#[derive(Clone)]
pub enum SmoothField1D {
    Constant(f64),
    /// Coefficients in increasing degree.
    Polynomial(Vec<f64>),
    Spline(Arc<QuinticSpline>),
    Custom(Arc<dyn Fn(f64) -> Jet + Send + Sync>),
}

impl fmt::Debug for SmoothField1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SmoothField1D::Constant(c) => write!(f, "Constant({c})"),
            SmoothField1D::Polynomial(p) => write!(f, "Polynomial({p:?})"),
            SmoothField1D::Spline(s) => write!(f, "Spline({:?})", s.domain()),
            SmoothField1D::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl Default for SmoothField1D {
    fn default() -> Self {
        SmoothField1D::Constant(0.0)
    }
}

impl From<f64> for SmoothField1D {
    fn from(c: f64) -> Self {
        SmoothField1D::Constant(c)
    }
}

impl SmoothField1D {
    pub fn custom(f: impl Fn(f64) -> Jet + Send + Sync + 'static) -> Self {
        SmoothField1D::Custom(Arc::new(f))
    }

    pub fn from_samples(xs: &[f64], ys: &[f64]) -> crate::Result<Self> {
        Ok(SmoothField1D::Spline(Arc::new(QuinticSpline::new(xs, ys)?)))
    }

    pub fn eval(&self, s: f64) -> Jet {
        match self {
            SmoothField1D::Constant(c) => Jet::constant(*c),
            SmoothField1D::Polynomial(p) => {
                let mut out = [0.0; 4];
                for (k, &c) in p.iter().enumerate() {
                    // d^j/ds^j s^k = k!/(k-j)! s^(k-j)
                    let mut fall = 1.0;
                    for (j, o) in out.iter_mut().enumerate() {
                        if j > k {
                            break;
                        }
                        *o += c * fall * s.powi((k - j) as i32);
                        fall *= (k - j) as f64;
                    }
                }
                Jet(out)
            }
            SmoothField1D::Spline(sp) => sp.eval(s),
            SmoothField1D::Custom(f) => f(s),
        }
    }

    pub fn value(&self, s: f64) -> f64 {
        self.eval(s).v()
    }

    pub fn is_zero(&self) -> bool {
        match self {
            SmoothField1D::Constant(c) => *c == 0.0,
            SmoothField1D::Polynomial(p) => p.iter().all(|&c| c == 0.0),
            _ => false,
        }
    }
}

/// f(z1, z2) = sum_k a_k(z1) z2^k.
#[derive(Clone, Debug, Default)]
pub struct StripField {
    pub coeffs: Vec<SmoothField1D>,
}

impl StripField {
    pub fn zero() -> Self {
        StripField { coeffs: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        StripField { coeffs: vec![SmoothField1D::Constant(c)] }
    }

    pub fn midline(f: SmoothField1D) -> Self {
        StripField { coeffs: vec![f] }
    }

    pub fn from_coeffs(coeffs: Vec<SmoothField1D>) -> Self {
        StripField { coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Coefficient of z2^k as a jet in z1.
    pub fn coeff(&self, k: usize, z1: f64) -> Jet {
        self.coeffs.get(k).map(|c| c.eval(z1)).unwrap_or(Jet::ZERO)
    }

    pub fn value(&self, z1: f64, z2: f64) -> f64 {
        self.partials(z1, z2)[0]
    }

    /// (f, d1 f, d2 f)
    pub fn partials(&self, z1: f64, z2: f64) -> [f64; 3] {
        let (mut f, mut f1, mut f2) = (0.0, 0.0, 0.0);
        let mut pw = 1.0;
        for (k, c) in self.coeffs.iter().enumerate() {
            let j = c.eval(z1);
            f += j.v() * pw;
            f1 += j.d(1) * pw;
            if k >= 1 {
                f2 += k as f64 * j.v() * z2.powi(k as i32 - 1);
            }
            pw *= z2;
        }
        [f, f1, f2]
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymSample {
    pub value: Matrix2<f64>,
    pub d1: Matrix2<f64>,
    pub d2: Matrix2<f64>,
}

/// Symmetric 2x2 field [[l, m], [m, n]] on the strip.
#[derive(Clone, Debug, Default)]
pub struct SymField2x2 {
    pub l: StripField,
    pub m: StripField,
    pub n: StripField,
}

fn sym(a: f64, b: f64, c: f64) -> Matrix2<f64> {
    Matrix2::new(a, b, b, c)
}

impl SymField2x2 {
    pub fn new(l: StripField, m: StripField, n: StripField) -> Self {
        SymField2x2 { l, m, n }
    }

    pub fn constant(l: f64, m: f64, n: f64) -> Self {
        SymField2x2::new(StripField::constant(l), StripField::constant(m), StripField::constant(n))
    }

    pub fn zero() -> Self {
        SymField2x2::default()
    }

    pub fn is_zero(&self) -> bool {
        self.l.is_zero() && self.m.is_zero() && self.n.is_zero()
    }

    pub fn eval(&self, z1: f64, z2: f64) -> SymSample {
        let l = self.l.partials(z1, z2);
        let m = self.m.partials(z1, z2);
        let n = self.n.partials(z1, z2);
        SymSample {
            value: sym(l[0], m[0], n[0]),
            d1: sym(l[1], m[1], n[1]),
            d2: sym(l[2], m[2], n[2]),
        }
    }

    pub fn value(&self, z1: f64, z2: f64) -> Matrix2<f64> {
        self.eval(z1, z2).value
    }

    /// Jets of the z2^k coefficient entries (l, m, n).
    pub fn coeff(&self, k: usize, z1: f64) -> [Jet; 3] {
        [self.l.coeff(k, z1), self.m.coeff(k, z1), self.n.coeff(k, z1)]
    }
}

/// A symmetric 2x2 field on the rescaled strip S = (0, L) x (-1/2, 1/2), with first partials.
pub trait StripSymField: Send + Sync {
    fn sample(&self, x1: f64, x2: f64) -> SymSample;
}

/// Adapter turning a closure into a [`StripSymField`].
pub struct FnSymField<F>(pub F);

impl<F: Fn(f64, f64) -> SymSample + Send + Sync> StripSymField for FnSymField<F> {
    fn sample(&self, x1: f64, x2: f64) -> SymSample {
        (self.0)(x1, x2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_jet_matches_closed_form() {
        let f = SmoothField1D::Polynomial(vec![1.0, 2.0, 0.0, 4.0]);
        let j = f.eval(0.5);
        assert!((j.v() - (1.0 + 1.0 + 0.5)).abs() < 1e-15);
        assert!((j.d(1) - (2.0 + 12.0 * 0.25)).abs() < 1e-15);
        assert!((j.d(2) - 24.0 * 0.5).abs() < 1e-15);
        assert!((j.d(3) - 24.0).abs() < 1e-15);
    }

    #[test]
    fn strip_partials() {
        let f = StripField::from_coeffs(vec![
            SmoothField1D::Polynomial(vec![0.0, 1.0]),
            SmoothField1D::Constant(3.0),
            SmoothField1D::Polynomial(vec![0.0, 0.0, 1.0]),
        ]);
        // f = z1 + 3 z2 + z1^2 z2^2
        let [v, d1, d2] = f.partials(0.7, 0.2);
        assert!((v - (0.7 + 0.6 + 0.49 * 0.04)).abs() < 1e-14);
        assert!((d1 - (1.0 + 2.0 * 0.7 * 0.04)).abs() < 1e-14);
        assert!((d2 - (3.0 + 2.0 * 0.49 * 0.2)).abs() < 1e-14);
    }
}
