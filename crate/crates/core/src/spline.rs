//! Quintic interpolating splines (not-a-knot end conditions) for sampled tables.

use crate::error::{Error, Result};
use crate::jet::Jet;
use nalgebra::{DMatrix, DVector};

const DEGREE: usize = 5;

#[derive(Clone, Debug)]
pub struct QuinticSpline {
    xs: Vec<f64>,
    /// knot vectors and coefficients of the spline and its first three derivatives
    pieces: Vec<(Vec<f64>, Vec<f64>, usize)>,
    lo: Jet,
    hi: Jet,
}

fn find_span(knots: &[f64], ncoef: usize, p: usize, x: f64) -> usize {
    if x >= knots[ncoef] {
        return ncoef - 1;
    }
    if x <= knots[p] {
        return p;
    }
    let (mut lo, mut hi) = (p, ncoef);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if knots[mid] <= x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

fn de_boor(knots: &[f64], coef: &[f64], p: usize, x: f64) -> f64 {
    let k = find_span(knots, coef.len(), p, x);
    let mut d: Vec<f64> = (0..=p).map(|j| coef[j + k - p]).collect();
    for r in 1..=p {
        for j in (r..=p).rev() {
            let left = knots[j + k - p];
            let right = knots[j + 1 + k - r];
            let a = if right > left { (x - left) / (right - left) } else { 0.0 };
            d[j] = (1.0 - a) * d[j - 1] + a * d[j];
        }
    }
    d[p]
}

fn derivative_coefficients(knots: &[f64], coef: &[f64], p: usize) -> (Vec<f64>, Vec<f64>) {
    let n = coef.len();
    let mut out = Vec::with_capacity(n - 1);
    for i in 0..n - 1 {
        let den = knots[i + p + 1] - knots[i + 1];
        out.push(if den > 0.0 { p as f64 * (coef[i + 1] - coef[i]) / den } else { 0.0 });
    }
    (knots[1..knots.len() - 1].to_vec(), out)
}

impl QuinticSpline {
    /// Interpolates `(xs[i], ys[i])`; `xs` strictly increasing with at least 6 entries.
    pub fn new(xs: &[f64], ys: &[f64]) -> Result<Self> {
        let n = xs.len();
        if n < DEGREE + 1 || ys.len() != n {
            return Err(Error::Domain(format!(
                "quintic spline needs >= 6 matching samples, got {} x and {} y",
                n,
                ys.len()
            )));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain("spline abscissae must be strictly increasing".into()));
        }
        let mut knots = vec![xs[0]; DEGREE + 1];
        knots.extend_from_slice(&xs[3..n - 3]);
        knots.extend(std::iter::repeat(xs[n - 1]).take(DEGREE + 1));
        debug_assert_eq!(knots.len(), n + DEGREE + 1);

        let mut a = DMatrix::<f64>::zeros(n, n);
        let mut unit = vec![0.0; n];
        for (j, &x) in xs.iter().enumerate() {
            let k = find_span(&knots, n, DEGREE, x);
            for i in k - DEGREE..=k {
                unit[i] = 1.0;
                a[(j, i)] = de_boor(&knots, &unit, DEGREE, x);
                unit[i] = 0.0;
            }
        }
        let coef = a
            .lu()
            .solve(&DVector::from_column_slice(ys))
            .ok_or_else(|| Error::Numeric("singular spline collocation system".into()))?;

        let mut pieces = vec![(knots, coef.as_slice().to_vec(), DEGREE)];
        for order in 1..=3 {
            let (k, c, p) = &pieces[order - 1];
            let (dk, dc) = derivative_coefficients(k, c, *p);
            pieces.push((dk, dc, p - 1));
        }
        let mut s = QuinticSpline { xs: xs.to_vec(), pieces, lo: Jet::ZERO, hi: Jet::ZERO };
        s.lo = s.inner(xs[0]);
        s.hi = s.inner(xs[n - 1]);
        Ok(s)
    }

    fn inner(&self, x: f64) -> Jet {
        let mut out = [0.0; 4];
        for (k, (knots, coef, p)) in self.pieces.iter().enumerate() {
            out[k] = de_boor(knots, coef, *p, x);
        }
        Jet(out)
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.xs[0], *self.xs.last().unwrap())
    }

    /// Value and derivatives; outside the table the quadratic Taylor polynomial of the
    /// nearest endpoint is used.
    pub fn eval(&self, x: f64) -> Jet {
        let (a, b) = self.domain();
        let taylor = |e: Jet, h: f64| {
            Jet([e.0[0] + e.0[1] * h + 0.5 * e.0[2] * h * h, e.0[1] + e.0[2] * h, e.0[2], 0.0])
        };
        if x < a {
            taylor(self.lo, x - a)
        } else if x > b {
            taylor(self.hi, x - b)
        } else {
            self.inner(x)
        }
    }
}
