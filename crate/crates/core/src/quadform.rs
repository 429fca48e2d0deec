//! Elastic density, its quadratic form at the identity, and the relaxed forms.

use crate::error::{Error, Result};
use nalgebra::{Matrix2, Matrix3, SMatrix, SVector, Vector3};
use serde::{Deserialize, Serialize};

pub type Mat9 = SMatrix<f64, 9, 9>;
pub type Vec9 = SVector<f64, 9>;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsotropicModuli {
    pub mu: f64,
    pub lambda: f64,
}

impl Default for IsotropicModuli {
    fn default() -> Self {
        IsotropicModuli { mu: 1.0, lambda: 0.0 }
    }
}

impl IsotropicModuli {
    pub fn new(mu: f64, lambda: f64) -> Result<Self> {
        let m = IsotropicModuli { mu, lambda };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0) || !(self.lambda >= 0.0) || !(2.0 * self.mu + self.lambda > 0.0) {
            return Err(Error::Domain(format!(
                "moduli need mu > 0 and lambda >= 0, got mu = {}, lambda = {}",
                self.mu, self.lambda
            )));
        }
        Ok(())
    }

    /// Coefficient of (tr A)^2 in the plane-stress relaxation.
    pub fn plane_stress_lambda(&self) -> f64 {
        2.0 * self.mu * self.lambda / (2.0 * self.mu + self.lambda)
    }
}

/// W(F) = (mu/2)|F^T F - I|^2 + (lambda/4)(tr(F^T F - I))^2, so that half its Hessian at the
/// identity is 2 mu |sym B|^2 + lambda (tr B)^2.
pub fn density_w(m: &IsotropicModuli, f: &Matrix3<f64>) -> f64 {
    let e = f.transpose() * f - Matrix3::identity();
    0.5 * m.mu * e.norm_squared() + 0.25 * m.lambda * e.trace().powi(2)
}

/// dW/dF.
pub fn density_stress(m: &IsotropicModuli, f: &Matrix3<f64>) -> Matrix3<f64> {
    let e = f.transpose() * f - Matrix3::identity();
    f * (e * (2.0 * m.mu) + Matrix3::identity() * (m.lambda * e.trace()))
}

fn vec9(b: &Matrix3<f64>) -> Vec9 {
    Vec9::from_fn(|k, _| b[(k / 3, k % 3)])
}

fn mat3(v: &Vec9) -> Matrix3<f64> {
    Matrix3::from_fn(|i, j| v[3 * i + j])
}

/// Quadratic form on 3x3 matrices, Q(B) = vec(B)^T H vec(B) with row-major vec.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadForm3 {
    pub h: Mat9,
}

/// Quadratic form on symmetric 2x2 matrices in coordinates (A11, A12, A22).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadForm2 {
    pub h: Matrix3<f64>,
}

/// A relaxed form together with the optimal third column (B13, B23, B33) as a linear map
/// of (A11, A12, A22).
#[derive(Clone, Copy, Debug)]
pub struct Relaxation {
    pub q2: QuadForm2,
    pub completion: Matrix3<f64>,
}

impl Relaxation {
    pub fn complete(&self, a: &Matrix2<f64>) -> Matrix3<f64> {
        let l = self.completion * sym_coords(a);
        let s = 0.5 * (a[(0, 1)] + a[(1, 0)]);
        Matrix3::new(a[(0, 0)], s, l.x, s, a[(1, 1)], l.y, 0.0, 0.0, l.z)
    }
}

pub fn sym_coords(a: &Matrix2<f64>) -> Vector3<f64> {
    Vector3::new(a[(0, 0)], 0.5 * (a[(0, 1)] + a[(1, 0)]), a[(1, 1)])
}

pub fn from_sym_coords(v: &Vector3<f64>) -> Matrix2<f64> {
    Matrix2::new(v.x, v.y, v.y, v.z)
}

/// Coefficient matrix of det in (A11, A12, A22) coordinates.
pub fn det_form() -> Matrix3<f64> {
    Matrix3::new(0.0, 0.0, 0.5, 0.0, -1.0, 0.0, 0.5, 0.0, 0.0)
}

impl QuadForm3 {
    /// Q3(B) = 2 mu |sym B|^2 + lambda (tr B)^2.
    pub fn isotropic(m: &IsotropicModuli) -> Self {
        let q = |b: &Matrix3<f64>| {
            let s = (b + b.transpose()) * 0.5;
            2.0 * m.mu * s.norm_squared() + m.lambda * b.trace().powi(2)
        };
        Self::from_fn(q)
    }

    /// Builds the coefficient matrix of a quadratic function by polarization.
    pub fn from_fn(q: impl Fn(&Matrix3<f64>) -> f64) -> Self {
        let e = |k: usize| mat3(&Vec9::from_fn(|i, _| if i == k { 1.0 } else { 0.0 }));
        let mut h = Mat9::zeros();
        for a in 0..9 {
            h[(a, a)] = q(&e(a));
        }
        for a in 0..9 {
            for b in a + 1..9 {
                let v = 0.5 * (q(&(e(a) + e(b))) - h[(a, a)] - h[(b, b)]);
                h[(a, b)] = v;
                h[(b, a)] = v;
            }
        }
        QuadForm3 { h }
    }

    /// User-supplied coefficient matrix; must be symmetric, positive semidefinite and blind
    /// to skew-symmetric matrices.
    pub fn from_matrix(h: Mat9) -> Result<Self> {
        if (h - h.transpose()).amax() > 1e-12 * h.amax().max(1.0) {
            return Err(Error::Domain("quadratic form coefficient matrix is not symmetric".into()));
        }
        let ev = h.symmetric_eigenvalues().min();
        if ev < -1e-12 * h.amax().max(1.0) {
            return Err(Error::Domain(format!("quadratic form not semidefinite (eigenvalue {ev:e})")));
        }
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            let mut s = Matrix3::zeros();
            s[(i, j)] = 1.0;
            s[(j, i)] = -1.0;
            if (h * vec9(&s)).amax() > 1e-12 * h.amax().max(1.0) {
                return Err(Error::Domain("quadratic form must vanish on skew-symmetric matrices".into()));
            }
        }
        Ok(QuadForm3 { h })
    }

    pub fn eval(&self, b: &Matrix3<f64>) -> f64 {
        let v = vec9(b);
        (v.transpose() * self.h * v)[0]
    }

    /// B -> Q(P B P^T).
    pub fn congruence(&self, p: &Matrix3<f64>) -> QuadForm3 {
        let mut t = Mat9::zeros();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        t[(3 * i + j, 3 * k + l)] = p[(i, k)] * p[(j, l)];
                    }
                }
            }
        }
        QuadForm3 { h: t.transpose() * self.h * t }
    }

    /// Minimizes over the entries listed in `free` (row-major indices), with `fixed` entries
    /// prescribed and every other entry zero. Returns the value and the minimizing matrix.
    pub fn minimize_with_fixed(&self, fixed: &[(usize, f64)], free: &[usize]) -> Result<(f64, Matrix3<f64>)> {
        let mut v = Vec9::zeros();
        for &(k, x) in fixed {
            v[k] = x;
        }
        let n = free.len();
        if n > 0 {
            let hcc = nalgebra::DMatrix::from_fn(n, n, |a, b| self.h[(free[a], free[b])]);
            let rhs = nalgebra::DVector::from_fn(n, |a, _| -(0..9).map(|k| self.h[(free[a], k)] * v[k]).sum::<f64>());
            let sol = hcc
                .cholesky()
                .ok_or_else(|| Error::Numeric("singular reduced system in relaxation".into()))?
                .solve(&rhs);
            for (a, &k) in free.iter().enumerate() {
                v[k] = sol[a];
            }
        }
        let b = mat3(&v);
        Ok((self.eval(&b), b))
    }
}

const B13: usize = 2;
const B23: usize = 5;
const B33: usize = 8;

/// Relaxation of B -> Q3(P B P^T) to its upper 2x2 block (Schur complement over the third
/// column; the third row can be taken zero since Q3 ignores skew parts).
pub fn relax_congruence(q3: &QuadForm3, p: Option<&Matrix3<f64>>) -> Result<Relaxation> {
    let q = match p {
        Some(p) => q3.congruence(p),
        None => q3.clone(),
    };
    let h = &q.h;
    // sym coordinates -> vec(B) upper block
    let s = SMatrix::<f64, 9, 3>::from_fn(|k, c| match (k, c) {
        (0, 0) => 1.0,
        (1, 1) | (3, 1) => 1.0,
        (4, 2) => 1.0,
        _ => 0.0,
    });
    let idx = [B13, B23, B33];
    let hcc = Matrix3::from_fn(|a, b| h[(idx[a], idx[b])]);
    let hcf_full = SMatrix::<f64, 3, 9>::from_fn(|a, k| h[(idx[a], k)]);
    let hcf = hcf_full * s;
    let hff = s.transpose() * h * s;
    let chol = hcc
        .cholesky()
        .ok_or_else(|| Error::Numeric("singular reduced system in relaxation".into()))?;
    let completion = -chol.solve(&hcf);
    let mut q2 = hff + hcf.transpose() * completion;
    q2 = (q2 + q2.transpose()) * 0.5;
    Ok(Relaxation { q2: QuadForm2 { h: q2 }, completion })
}

/// Q~2 for the form conjugated by an optional rotation `frame`: Q~3(B) = Q3(R B R^T).
pub fn relax_to_2x2(q3: &QuadForm3, frame: Option<&Matrix3<f64>>) -> Result<Relaxation> {
    relax_congruence(q3, frame)
}

impl QuadForm2 {
    /// 2 mu |A|^2 + (2 mu lambda / (2 mu + lambda)) (tr A)^2.
    pub fn isotropic(m: &IsotropicModuli) -> Self {
        let c = m.plane_stress_lambda();
        let d = 2.0 * m.mu + c;
        QuadForm2 { h: Matrix3::new(d, 0.0, c, 0.0, 4.0 * m.mu, 0.0, c, 0.0, d) }
    }

    pub fn eval(&self, a: &Matrix2<f64>) -> f64 {
        let v = sym_coords(a);
        v.dot(&(self.h * v))
    }

    /// Min over A22 with A11 = a, A12 = b; returns (value, A22*).
    pub fn circ(&self, a: f64, b: f64) -> (f64, f64) {
        let h = &self.h;
        let x = -(h[(2, 0)] * a + h[(2, 1)] * b) / h[(2, 2)];
        (self.eval(&Matrix2::new(a, b, b, x)), x)
    }

    /// Min over A with A11 = 1; returns (value, minimizer).
    pub fn q1(&self) -> (f64, Matrix2<f64>) {
        let h = &self.h;
        let sub = Matrix2::new(h[(1, 1)], h[(1, 2)], h[(2, 1)], h[(2, 2)]);
        let rhs = nalgebra::Vector2::new(-h[(1, 0)], -h[(2, 0)]);
        let y = sub.lu().solve(&rhs).unwrap_or_else(nalgebra::Vector2::zeros);
        let a = Matrix2::new(1.0, y.x, y.x, y.y);
        (self.eval(&a), a)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.h.symmetric_eigenvalues().min()
    }

    pub fn scaled(&self, s: f64) -> QuadForm2 {
        QuadForm2 { h: self.h * s }
    }
}

pub fn q2_circ(q2: &QuadForm2, a: f64, b: f64) -> (f64, f64) {
    q2.circ(a, b)
}

pub fn q1(q2: &QuadForm2) -> f64 {
    q2.q1().0
}

/// (alpha+, alpha-) = sup{alpha : Q2 +- alpha det >= 0}, by bisection on the smallest
/// eigenvalue of the coefficient matrix.
pub fn alpha_pm(q2: &QuadForm2) -> (f64, f64) {
    let d = det_form();
    let bisect = |sign: f64| {
        let psd = |a: f64| (q2.h + d * (sign * a)).symmetric_eigenvalues().min() >= 0.0;
        let mut lo = 0.0;
        let mut hi = 1.0;
        while psd(hi) {
            lo = hi;
            hi *= 2.0;
            if hi > 1e300 {
                return f64::INFINITY;
            }
        }
        while hi - lo > 1e-10 * hi.max(1.0) {
            let mid = 0.5 * (lo + hi);
            if psd(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    (bisect(1.0), bisect(-1.0))
}

/// The eta completion: min of Q3 over B with first column (-d, 0, 0) fixed.
pub fn eta_completion(q3: &QuadForm3, d: f64) -> Result<(f64, Matrix3<f64>)> {
    q3.minimize_with_fixed(&[(0, -d)], &[1, 2, 4, 5, 8])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn isotropic_examples() {
        let m = IsotropicModuli::default();
        let q = QuadForm3::isotropic(&m);
        let mut b = Matrix3::zeros();
        b[(0, 1)] = 1.0;
        assert!((q.eval(&b) - 1.0).abs() < 1e-14);
        let q = QuadForm3::isotropic(&IsotropicModuli::new(1.0, 1.0).unwrap());
        assert!((q.eval(&Matrix3::identity()) - 15.0).abs() < 1e-13);
    }

    #[test]
    fn relaxation_matches_closed_form() {
        for &(mu, la) in &[(1.0, 0.0), (1.0, 1.0), (0.7, 3.0)] {
            let m = IsotropicModuli::new(mu, la).unwrap();
            let r = relax_to_2x2(&QuadForm3::isotropic(&m), None).unwrap();
            assert!((r.q2.h - QuadForm2::isotropic(&m).h).amax() < 1e-12);
        }
    }

    #[test]
    fn alpha_default_moduli() {
        let (ap, am) = alpha_pm(&QuadForm2::isotropic(&IsotropicModuli::default()));
        assert!((ap - 4.0).abs() < 1e-8 && (am - 4.0).abs() < 1e-8);
    }

    #[test]
    fn invalid_moduli() {
        assert!(IsotropicModuli::new(0.0, 1.0).is_err());
        assert!(IsotropicModuli::new(1.0, -0.1).is_err());
    }
}
