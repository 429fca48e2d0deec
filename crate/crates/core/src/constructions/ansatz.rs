use crate::error::{Error, Result};
use crate::fields::{StripSymField, SymSample};
use crate::geometry::RibbonGeometry;
use nalgebra::Matrix2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AnsatzKind {
    /// Constant kappa, II = diag(0, n).
    D,
    /// a = I, II = diag(0, n x1).
    B,
}

/// Closed-form rescaled second forms solving the Gauss-Codazzi system for flat a.
#[derive(Clone, Copy, Debug)]
pub struct AnsatzField {
    pub kind: AnsatzKind,
    pub w: f64,
    pub delta: f64,
    pub kappa: f64,
    pub n: f64,
}

impl AnsatzField {
    /// Smallest admissible delta for the (d) family at width w.
    pub fn delta_threshold(kappa: f64, w: f64) -> f64 {
        let kw = kappa.abs() * w;
        kw.sqrt() * (4.0 - kw).sqrt() / (2.0 - kw)
    }

    /// Predicted plate-energy order kappa^(2/3) n^2 w^(2/3) of the (d) family.
    pub fn predicted_order(&self) -> f64 {
        self.kappa.abs().powf(2.0 / 3.0) * self.n * self.n * self.w.powf(2.0 / 3.0)
    }
}

impl StripSymField for AnsatzField {
    fn sample(&self, x1: f64, x2: f64) -> SymSample {
        match self.kind {
            AnsatzKind::D => {
                let (k, w, d, n) = (self.kappa, self.w, self.delta, self.n);
                let dn = d * n;
                let u = 1.0 - k * w * x2;
                let du = -k * w;
                let c = d * d + 1.0;
                let s = (c * u * u - 1.0).sqrt();
                let ds = c * u * du / s;
                let value = Matrix2::new(dn * s, dn / u, dn / u, dn / (u * u * s));
                let d2 = Matrix2::new(
                    dn * ds,
                    -dn * du / (u * u),
                    -dn * du / (u * u),
                    dn * (-2.0 * du / (u * u * u * s) - ds / (u * u * s * s)),
                );
                SymSample { value, d1: Matrix2::zeros(), d2 }
            }
            AnsatzKind::B => {
                let r = self.w.sqrt();
                let shape = Matrix2::new(self.w, r, r, 1.0);
                let shape = shape * self.n;
                SymSample { value: shape * (x1 + r * x2), d1: shape, d2: shape * r }
            }
        }
    }
}

/// Ansatz field of the given family; for (d) the default delta is (kappa w)^(1/3) and kappa,
/// n are read from the geometry's midline data at x1 = 0.
pub fn ansatz_field(kind: AnsatzKind, geom: &RibbonGeometry, w: f64, delta: Option<f64>) -> Result<AnsatzField> {
    if !(w > 0.0) {
        return Err(Error::Domain(format!("ansatz needs w > 0, got {w}")));
    }
    match kind {
        AnsatzKind::D => {
            let kappa = geom.kappa_at(0.0);
            let n = geom.ii0(0.0)[(1, 1)];
            let delta = delta.unwrap_or_else(|| (kappa.abs() * w).cbrt());
            let bound = AnsatzField::delta_threshold(kappa, w);
            if !(delta > bound) {
                return Err(Error::Domain(format!(
                    "ansatz (d) needs delta > (kappa w)^(1/2) (4 - kappa w)^(1/2) / (2 - kappa w) = {bound:e}, got {delta:e}"
                )));
            }
            Ok(AnsatzField { kind, w, delta, kappa, n })
        }
        AnsatzKind::B => {
            let n = geom.ii0(1.0)[(1, 1)] - geom.ii0(0.0)[(1, 1)];
            Ok(AnsatzField { kind, w, delta: 0.0, kappa: 0.0, n })
        }
    }
}
