//! Truncated Taylor jets in one variable: value and derivatives up to order 3.

use std::ops::{Add, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Jet(pub [f64; 4]);

impl Jet {
    pub const ZERO: Jet = Jet([0.0; 4]);

    pub fn constant(v: f64) -> Self {
        Jet([v, 0.0, 0.0, 0.0])
    }

    /// The identity jet at `s`.
    pub fn variable(s: f64) -> Self {
        Jet([s, 1.0, 0.0, 0.0])
    }

    pub fn v(&self) -> f64 {
        self.0[0]
    }

    pub fn d(&self, k: usize) -> f64 {
        self.0[k]
    }

    /// Derivative jet (loses the top order).
    pub fn derivative(&self) -> Jet {
        Jet([self.0[1], self.0[2], self.0[3], 0.0])
    }

    pub fn scale(&self, c: f64) -> Jet {
        Jet(self.0.map(|x| c * x))
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet([
            self.0[0] + o.0[0],
            self.0[1] + o.0[1],
            self.0[2] + o.0[2],
            self.0[3] + o.0[3],
        ])
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        self + (-o)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let (a, b) = (self.0, o.0);
        Jet([
            a[0] * b[0],
            a[1] * b[0] + a[0] * b[1],
            a[2] * b[0] + 2.0 * a[1] * b[1] + a[0] * b[2],
            a[3] * b[0] + 3.0 * a[2] * b[1] + 3.0 * a[1] * b[2] + a[0] * b[3],
        ])
    }
}

impl Mul<Jet> for f64 {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        o.scale(self)
    }
}
