//! Limiting energies of the narrow and wide regimes and their pointwise minimizations.

use crate::error::{Error, Result};
use crate::euclidean::EuclideanRibbon;
use crate::fields::{SmoothField1D, StripSymField};
use crate::geometry::RibbonGeometry;
use crate::quadform::{
    alpha_pm, det_form, relax_congruence, sym_coords, from_sym_coords, IsotropicModuli, QuadForm2, QuadForm3,
    Relaxation,
};
use crate::quadrature::Rule;
use nalgebra::{Matrix2, Matrix3, Vector3};

/// Margin below which l0 is treated as vanishing.
pub const L0_MARGIN: f64 = 1e-8;
/// Tolerance for the Gauss-compatibility checks det II0 = 0.
pub const GAUSS_TOL: f64 = 1e-10;

/// Limiting midline fields (alpha, beta, gammabar).
#[derive(Clone, Debug)]
pub struct MidlineState {
    pub alpha: SmoothField1D,
    pub beta: SmoothField1D,
    pub gammabar: SmoothField1D,
}

impl Default for MidlineState {
    fn default() -> Self {
        Self::zero()
    }
}

impl MidlineState {
    pub fn zero() -> Self {
        MidlineState {
            alpha: SmoothField1D::Constant(0.0),
            beta: SmoothField1D::Constant(0.0),
            gammabar: SmoothField1D::Constant(0.0),
        }
    }

    pub fn matrix(&self, x1: f64) -> Matrix2<f64> {
        let b = self.beta.value(x1);
        Matrix2::new(self.alpha.value(x1), b, b, self.gammabar.value(x1))
    }

    pub fn is_zero(&self) -> bool {
        self.alpha.is_zero() && self.beta.is_zero() && self.gammabar.is_zero()
    }
}

/// The x1-dependent forms Q~3(x1, B) = Q3(Q0 B Q0^T) and their relaxations. For
/// rotation-invariant Q3 the frame is not needed and is skipped.
#[derive(Clone, Debug)]
pub struct FormField {
    q3: QuadForm3,
    ribbon: Option<EuclideanRibbon>,
}

fn rotation_invariant(q3: &QuadForm3) -> bool {
    let r1 = crate::frame::exp_so3(&crate::frame::skew(&Vector3::new(0.3, -0.7, 1.1)));
    let r2 = crate::frame::exp_so3(&crate::frame::skew(&Vector3::new(-1.3, 0.2, 0.4)));
    let tol = 1e-12 * q3.h.amax().max(1.0);
    [r1, r2].iter().all(|r| (q3.congruence(r).h - q3.h).amax() <= tol)
}

impl FormField {
    pub fn isotropic(m: &IsotropicModuli) -> Self {
        FormField { q3: QuadForm3::isotropic(m), ribbon: None }
    }

    /// General Q3; the Darboux frame of `geom` is built if Q3 is not rotation invariant.
    pub fn new(geom: &RibbonGeometry, q3: QuadForm3) -> Self {
        let ribbon = if rotation_invariant(&q3) { None } else { Some(EuclideanRibbon::new(geom)) };
        FormField { q3, ribbon }
    }

    pub fn q3(&self) -> &QuadForm3 {
        &self.q3
    }

    pub fn frame_at(&self, x1: f64) -> Option<Matrix3<f64>> {
        self.ribbon.as_ref().map(|r| r.q0(x1))
    }

    /// Q~3(x1, .).
    pub fn q3_at(&self, x1: f64) -> QuadForm3 {
        match self.frame_at(x1) {
            Some(q0) => self.q3.congruence(&q0),
            None => self.q3.clone(),
        }
    }

    pub fn relaxation(&self, x1: f64) -> Result<Relaxation> {
        relax_congruence(&self.q3, self.frame_at(x1).as_ref())
    }

    /// Q~2(x1, .).
    pub fn q2(&self, x1: f64) -> Result<QuadForm2> {
        Ok(self.relaxation(x1)?.q2)
    }
}

fn require_gauss_compatible(geom: &RibbonGeometry, rule: &Rule, what: &str) -> Result<()> {
    for &x in &rule.nodes {
        let d = geom.gauss_deficit(x);
        if d.abs() > GAUSS_TOL {
            return Err(Error::Domain(format!("{what} undefined on Gauss-incompatible input (deficit {d:e} at x1 = {x})")));
        }
    }
    Ok(())
}

fn mean_result(rule: &Rule, f: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let mut acc = 0.0;
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        acc += w * f(x)?;
    }
    Ok(acc / rule.span())
}

/// (1/12) mean of Q~2(x1, [[alpha, beta], [beta, gammabar]]).
pub fn state_term(geom: &RibbonGeometry, forms: &FormField, state: &MidlineState) -> Result<f64> {
    let rule = Rule::midline(geom.length);
    Ok(mean_result(&rule, |x| Ok(forms.q2(x)?.eval(&state.matrix(x))))? / 12.0)
}

/// Narrow-ribbon limit in the Gauss scaling.
pub fn e0_gauss(geom: &RibbonGeometry, forms: &FormField, state: &MidlineState) -> Result<f64> {
    let rule = Rule::midline(geom.length);
    let e = mean_result(&rule, |x| {
        let q2 = forms.q2(x)?;
        let d = geom.gauss_deficit(x);
        Ok(q2.eval(&state.matrix(x)) / 12.0 + q2.q1().0 * d * d / 720.0)
    })?;
    Ok(e)
}

/// Narrow-ribbon limit in the Codazzi scaling; requires det II0 = K^S along the midline.
pub fn e0_codazzi(geom: &RibbonGeometry, forms: &FormField, state: &MidlineState) -> Result<f64> {
    let rule = Rule::midline(geom.length);
    require_gauss_compatible(geom, &rule, "Codazzi limit")?;
    mean_result(&rule, |x| {
        let q2 = forms.q2(x)?;
        let [c1, c2] = geom.codazzi_deficit(x);
        Ok(q2.eval(&state.matrix(x)) / 12.0 + q2.circ(c1, c2).0 / 144.0)
    })
}

/// Plate form Q_w(x', .): relaxation of G -> Q3(A0^-T G A0^-1).
pub fn plate_form(ribbon: &EuclideanRibbon, q3: &QuadForm3, w: f64, x1: f64, x2: f64) -> Result<QuadForm2> {
    let z2 = w * x2;
    let p = ribbon.mid_surface(x1, z2);
    let d = Matrix3::from_columns(&[p.d1, p.d2, p.normal]);
    let g = ribbon.geom.metric_at([x1, z2, 0.0])?;
    let d_inv = d
        .try_inverse()
        .ok_or_else(|| Error::Domain(format!("(grad Phi | n) singular at ({x1}, {z2})")))?;
    let f0 = d_inv.transpose() * g * d_inv;
    let f0 = (f0 + f0.transpose()) * 0.5;
    let eig = f0.symmetric_eigen();
    if eig.eigenvalues.min() <= 0.0 {
        return Err(Error::Domain(format!("F0 not positive definite at ({x1}, {z2})")));
    }
    let sqrt = eig.eigenvectors * Matrix3::from_diagonal(&eig.eigenvalues.map(f64::sqrt)) * eig.eigenvectors.transpose();
    let a0 = sqrt * d;
    let a0_inv = a0
        .try_inverse()
        .ok_or_else(|| Error::Domain(format!("A0 singular at ({x1}, {z2})")))?;
    Ok(relax_congruence(q3, Some(&a0_inv.transpose()))?.q2)
}

/// Tensor-product rule on S used for plate energies.
pub fn strip_rules(length: f64) -> (Rule, Rule) {
    (Rule::midline(length), Rule::composite(-0.5, 0.5, 8, 5))
}

/// Plate energy (1/12) mean over S of Q_w(x', II_field - II^w).
pub fn plate_energy(
    ribbon: &EuclideanRibbon,
    q3: &QuadForm3,
    w: f64,
    field: &dyn StripSymField,
) -> Result<f64> {
    let geom = &ribbon.geom;
    let (r1, r2) = strip_rules(geom.length);
    let iso = rotation_invariant(q3) && geom.kappa.is_zero();
    let q2_flat = if iso { Some(relax_congruence(q3, None)?.q2) } else { None };
    let mut acc = 0.0;
    for (&x1, &w1) in r1.nodes.iter().zip(&r1.weights) {
        for (&x2, &w2) in r2.nodes.iter().zip(&r2.weights) {
            let q = match q2_flat {
                Some(q) => q,
                None => plate_form(ribbon, q3, w, x1, x2)?,
            };
            let diff = field.sample(x1, x2).value - geom.second_form.value(x1, w * x2);
            acc += w1 * w2 * q.eval(&diff);
        }
    }
    Ok(acc / (12.0 * r1.span() * r2.span()))
}

/// Pointwise wide-ribbon density Q~2(M - II0) + alpha+ (det M)+ + alpha- (det M)-.
pub fn wide_density(q2: &QuadForm2, alphas: (f64, f64), ii0: &Matrix2<f64>, m: &Matrix2<f64>) -> f64 {
    let d = m[(0, 0)] * m[(1, 1)] - 0.5 * (m[(0, 1)] + m[(1, 0)]) * 0.5 * (m[(0, 1)] + m[(1, 0)]);
    q2.eval(&(m - ii0)) + alphas.0 * d.max(0.0) + alphas.1 * (-d).max(0.0)
}

fn require_flat(geom: &RibbonGeometry, what: &str) -> Result<()> {
    if !geom.flat {
        return Err(Error::Domain(format!("{what} requires a flat reference geometry")));
    }
    Ok(())
}

/// Wide-ribbon limit J(m) for a midline second form m.
pub fn wide_j(geom: &RibbonGeometry, forms: &FormField, m: &dyn Fn(f64) -> Matrix2<f64>) -> Result<f64> {
    require_flat(geom, "wide-ribbon limit")?;
    let rule = Rule::midline(geom.length);
    Ok(mean_result(&rule, |x| {
        let q2 = forms.q2(x)?;
        Ok(wide_density(&q2, alpha_pm(&q2), &geom.ii0(x), &m(x)))
    })? / 12.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    PositiveDet,
    NegativeDet,
    DetZero,
    Polished,
}

#[derive(Clone, Copy, Debug)]
pub struct Candidate {
    pub branch: Branch,
    pub m: Matrix2<f64>,
    pub value: f64,
}

/// Pointwise minimization result at one x1.
#[derive(Clone, Debug)]
pub struct PointwiseMin {
    pub x1: f64,
    pub m: Matrix2<f64>,
    pub value: f64,
    /// All candidates within the branch tolerance of the minimum.
    pub candidates: Vec<Candidate>,
    /// Principal curvature of II0 with the smaller modulus.
    pub kappa1: f64,
}

#[derive(Clone, Debug)]
pub struct MinJResult {
    /// (1/12) mean of the pointwise minima.
    pub value: f64,
    pub samples: Vec<PointwiseMin>,
    pub warnings: Vec<String>,
}

impl MinJResult {
    /// Smallest observed |M* - II0| / |kappa1| over samples with kappa1 != 0.
    pub fn gap_constant(&self, geom: &RibbonGeometry) -> Option<f64> {
        self.samples
            .iter()
            .filter(|s| s.kappa1.abs() > 1e-12)
            .map(|s| (s.m - geom.ii0(s.x1)).norm() / s.kappa1.abs())
            .reduce(f64::min)
    }

    /// Range of f_min / kappa1^2 over samples with kappa1 != 0.
    pub fn curvature_ratio_bounds(&self) -> Option<(f64, f64)> {
        let r: Vec<f64> = self
            .samples
            .iter()
            .filter(|s| s.kappa1.abs() > 1e-12)
            .map(|s| s.value / (s.kappa1 * s.kappa1))
            .collect();
        if r.is_empty() {
            return None;
        }
        Some((r.iter().cloned().fold(f64::INFINITY, f64::min), r.iter().cloned().fold(0.0, f64::max)))
    }
}

pub const BRANCH_TOL: f64 = 1e-10;

fn smaller_principal(ii0: &Matrix2<f64>) -> f64 {
    let e = ii0.symmetric_eigenvalues();
    if e[0].abs() <= e[1].abs() {
        e[0]
    } else {
        e[1]
    }
}

fn pinv_solve(a: &Matrix3<f64>, b: &Vector3<f64>) -> Vector3<f64> {
    let svd = a.svd(true, true);
    let tol = 1e-9 * svd.singular_values.max().max(1e-300);
    svd.solve(b, tol).unwrap_or_else(|_| Vector3::zeros())
}

/// Minimizes the wide density at one point by comparing branch candidates and polishing the
/// best with a compass search.
pub fn pointwise_min(q2: &QuadForm2, alphas: (f64, f64), ii0: &Matrix2<f64>) -> (Matrix2<f64>, f64, Vec<Candidate>) {
    let h = q2.h;
    let d = det_form();
    let v0 = sym_coords(ii0);
    let f = |v: &Vector3<f64>| wide_density(q2, alphas, ii0, &from_sym_coords(v));
    let mut cands = Vec::new();

    for (branch, s) in [(Branch::PositiveDet, alphas.0), (Branch::NegativeDet, -alphas.1)] {
        let v = pinv_solve(&(h + d * s), &(h * v0));
        let det = v.dot(&(d * v));
        let ok = match branch {
            Branch::PositiveDet => det >= -1e-12,
            _ => det <= 1e-12,
        };
        if ok && v.iter().all(|x| x.is_finite()) {
            cands.push(Candidate { branch, m: from_sym_coords(&v), value: f(&v) });
        }
    }

    // det-zero branch: M = s u u^T, optimal s in closed form, search over the angle
    let rank_one = |th: f64| {
        let (c, sn) = (th.cos(), th.sin());
        let p = Vector3::new(c * c, c * sn, sn * sn);
        let php = p.dot(&(h * p));
        let s = p.dot(&(h * v0)) / php;
        p * s
    };
    let g = |th: f64| f(&rank_one(th));
    let n = 720;
    let step = std::f64::consts::PI / n as f64;
    let (mut best_th, mut best) = (0.0, g(0.0));
    for k in 1..n {
        let th = k as f64 * step;
        let v = g(th);
        if v < best {
            best = v;
            best_th = th;
        }
    }
    let (mut a, mut b) = (best_th - step, best_th + step);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    while b - a > 1e-13 {
        let c = b - phi * (b - a);
        let e = a + phi * (b - a);
        if g(c) <= g(e) {
            b = e;
        } else {
            a = c;
        }
    }
    let v = rank_one(0.5 * (a + b));
    cands.push(Candidate { branch: Branch::DetZero, m: from_sym_coords(&v), value: f(&v) });

    // polish the best candidate
    let start = cands
        .iter()
        .min_by(|x, y| x.value.total_cmp(&y.value))
        .map(|c| sym_coords(&c.m))
        .unwrap_or(v0);
    let mut x = start;
    let mut fx = f(&x);
    let mut delta = 0.1 * (1.0 + v0.norm());
    while delta > 1e-12 {
        let mut improved = false;
        for i in 0..3 {
            for sgn in [1.0, -1.0] {
                let mut y = x;
                y[i] += sgn * delta;
                let fy = f(&y);
                if fy < fx {
                    x = y;
                    fx = fy;
                    improved = true;
                }
            }
        }
        if !improved {
            delta *= 0.5;
        }
    }
    cands.push(Candidate { branch: Branch::Polished, m: from_sym_coords(&x), value: fx });

    let fmin = cands.iter().map(|c| c.value).fold(f64::INFINITY, f64::min);
    let near: Vec<Candidate> = cands.iter().copied().filter(|c| c.value <= fmin + BRANCH_TOL).collect();
    let chosen = near
        .iter()
        .find(|c| c.branch == Branch::DetZero)
        .or_else(|| near.iter().min_by(|x, y| x.value.total_cmp(&y.value)))
        .copied()
        .expect("at least one candidate");
    (chosen.m, chosen.value, near)
}

/// Pointwise minimization of the wide-ribbon density along the midline quadrature nodes.
pub fn min_j(geom: &RibbonGeometry, forms: &FormField) -> Result<MinJResult> {
    require_flat(geom, "wide-ribbon limit")?;
    let rule = Rule::midline(geom.length);
    let mut samples = Vec::with_capacity(rule.nodes.len());
    let mut acc = 0.0;
    let mut warnings = Vec::new();
    for (&x, &wt) in rule.nodes.iter().zip(&rule.weights) {
        let q2 = forms.q2(x)?;
        let ii0 = geom.ii0(x);
        let (m, value, candidates) = pointwise_min(&q2, alpha_pm(&q2), &ii0);
        if !value.is_finite() {
            warnings.push(format!("pointwise minimization failed at x1 = {x}"));
        }
        acc += wt * value;
        samples.push(PointwiseMin { x1: x, m, value, candidates, kappa1: smaller_principal(&ii0) });
    }
    Ok(MinJResult { value: acc / (12.0 * rule.span()), samples, warnings })
}

fn wide_codazzi_checks(geom: &RibbonGeometry, x1: f64) -> Result<()> {
    let ii0 = geom.ii0(x1);
    if ii0.determinant().abs() > GAUSS_TOL {
        return Err(Error::Domain(format!("det II0 = {:e} != 0 at x1 = {x1}", ii0.determinant())));
    }
    if ii0[(0, 0)].abs() < L0_MARGIN {
        return Err(Error::Domain(format!(
            "the construction needs l0 = II0_11 != 0 along the midline; |l0| < {L0_MARGIN} at x1 = {x1}"
        )));
    }
    Ok(())
}

/// B0 = [[alpha, beta], [beta, (2 m0 beta - n0 alpha) / l0]].
pub fn make_b0(geom: &RibbonGeometry, alpha: f64, beta: f64, x1: f64) -> Result<Matrix2<f64>> {
    wide_codazzi_checks(geom, x1)?;
    let ii = geom.ii0(x1);
    let (l0, m0, n0) = (ii[(0, 0)], ii[(0, 1)], ii[(1, 1)]);
    Ok(Matrix2::new(alpha, beta, beta, (2.0 * m0 * beta - n0 * alpha) / l0))
}

/// B1 = -[[dC1, dC2], [dC2, (dG1 - n0 dC1 + 2 m0 dC2) / l0]].
pub fn make_b1(geom: &RibbonGeometry, x1: f64) -> Result<Matrix2<f64>> {
    wide_codazzi_checks(geom, x1)?;
    let ii = geom.ii0(x1);
    let (l0, m0, n0) = (ii[(0, 0)], ii[(0, 1)], ii[(1, 1)]);
    let [c1, c2] = geom.codazzi_deficit(x1);
    let g1 = geom.gauss_deficit_1(x1)?;
    Ok(-Matrix2::new(c1, c2, c2, (g1 - n0 * c1 + 2.0 * m0 * c2) / l0))
}

#[derive(Clone, Copy, Debug)]
pub struct CodazziI {
    pub value: f64,
    /// Value at alpha = beta = 0, the minimum over (alpha, beta).
    pub minimum: f64,
    /// mean(|dC|^2 + |dG1 - n0 dC1 + 2 m0 dC2|^2).
    pub surrogate: f64,
}

/// Codazzi-scale wide energy (1/12) mean Q~2(B0) + (1/144) mean Q~2(B1).
pub fn codazzi_i(
    geom: &RibbonGeometry,
    forms: &FormField,
    alpha: &SmoothField1D,
    beta: &SmoothField1D,
) -> Result<CodazziI> {
    let rule = Rule::midline(geom.length);
    let mut b0_term = 0.0;
    let mut b1_term = 0.0;
    let mut surrogate = 0.0;
    for (&x, &wt) in rule.nodes.iter().zip(&rule.weights) {
        let q2 = forms.q2(x)?;
        let b0 = make_b0(geom, alpha.value(x), beta.value(x), x)?;
        let b1 = make_b1(geom, x)?;
        b0_term += wt * q2.eval(&b0);
        b1_term += wt * q2.eval(&b1);
        let ii = geom.ii0(x);
        let [c1, c2] = geom.codazzi_deficit(x);
        let g1 = geom.gauss_deficit_1(x)?;
        let r = g1 - ii[(1, 1)] * c1 + 2.0 * ii[(0, 1)] * c2;
        surrogate += wt * (c1 * c1 + c2 * c2 + r * r);
    }
    let span = rule.span();
    let minimum = b1_term / (144.0 * span);
    Ok(CodazziI { value: b0_term / (12.0 * span) + minimum, minimum, surrogate: surrogate / span })
}
