//! Explicit configurations: recovery sequences, ruled isometric immersions, surfaces from
//! prescribed fundamental forms and the ansatz second forms.

mod ansatz;
mod forms;
mod recovery;
mod ruled;

pub use ansatz::{ansatz_field, AnsatzField, AnsatzKind};
pub use forms::{gc_residual, surface_from_forms, BaseFrame, FormsSurface, GcResidual, RescaledSecondForm};
pub use recovery::{recovery_narrow_codazzi, recovery_narrow_gauss, RecoveryConfig};
pub use ruled::{ruled_isometry, RuledIsometry};

use crate::error::Result;
use crate::euclidean::EuclideanRibbon;
use crate::fields::SmoothField1D;
use crate::frame::FramePath;
use nalgebra::{Matrix2, Matrix3, Vector3};
use std::sync::Arc;

/// A map U -> R^3 on the rescaled domain U = (0, L) x (-1/2, 1/2)^2, with its derivative
/// (columns d/dx1, d/dx2, d/dx3).
pub trait AnalyticConfig3: Send + Sync {
    fn eval(&self, x: [f64; 3]) -> (Vector3<f64>, Matrix3<f64>);
    fn length(&self) -> f64;
}

/// Value, tangents, unit normal and second fundamental form of a surface at one point.
#[derive(Clone, Copy, Debug)]
pub struct SurfacePoint {
    pub f: Vector3<f64>,
    pub d1: Vector3<f64>,
    pub d2: Vector3<f64>,
    pub normal: Vector3<f64>,
    pub second_form: Matrix2<f64>,
}

impl SurfacePoint {
    pub fn first_form(&self) -> Matrix2<f64> {
        let b = self.d1.dot(&self.d2);
        Matrix2::new(self.d1.dot(&self.d1), b, b, self.d2.dot(&self.d2))
    }
}

/// A surface on the physical strip (0, L) x (-w/2, w/2).
pub trait SurfaceMap: Send + Sync {
    fn point(&self, z1: f64, z2: f64) -> Result<SurfacePoint>;
    fn length(&self) -> f64;
    fn width(&self) -> f64;
}

/// Darboux frame r' = r [[0, -k, -mu], [k, 0, -tau], [mu, tau, 0]] with r(0) = initial,
/// on [0, length] padded by 10% at both ends.
pub fn darboux_frame(
    kappa: &SmoothField1D,
    mu: &SmoothField1D,
    tau: &SmoothField1D,
    initial: Matrix3<f64>,
    length: f64,
) -> FramePath {
    let (k, m, t) = (kappa.clone(), mu.clone(), tau.clone());
    let pad = 0.1 * length;
    FramePath::darboux(move |s| k.value(s), move |s| m.value(s), move |s| t.value(s), initial, -pad, length + pad)
}

/// Psi_t(x) = Psi(x1, w x2, t x3).
#[derive(Clone)]
pub struct PsiConfig {
    pub ribbon: Arc<EuclideanRibbon>,
    pub t: f64,
    pub w: f64,
}

impl AnalyticConfig3 for PsiConfig {
    fn eval(&self, x: [f64; 3]) -> (Vector3<f64>, Matrix3<f64>) {
        let (p, d) = self.ribbon.psi([x[0], self.w * x[1], self.t * x[2]]);
        (p, d * Matrix3::from_diagonal(&Vector3::new(1.0, self.w, self.t)))
    }

    fn length(&self) -> f64 {
        self.ribbon.geom.length
    }
}

/// The mid-surface Phi as a [`SurfaceMap`] on the strip of width `w`.
#[derive(Clone)]
pub struct PhiSurface {
    pub ribbon: Arc<EuclideanRibbon>,
    pub w: f64,
}

impl SurfaceMap for PhiSurface {
    fn point(&self, z1: f64, z2: f64) -> Result<SurfacePoint> {
        let p = self.ribbon.mid_surface(z1, z2);
        Ok(SurfacePoint { f: p.phi, d1: p.d1, d2: p.d2, normal: p.normal, second_form: p.second_form() })
    }

    fn length(&self) -> f64 {
        self.ribbon.geom.length
    }

    fn width(&self) -> f64 {
        self.w
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_darboux_frames() {
        let z = SmoothField1D::Constant(0.0);
        let c = SmoothField1D::Constant(0.8);
        let r = darboux_frame(&c, &z, &z, Matrix3::identity(), 1.0);
        let s: f64 = 0.7;
        let (cs, sn) = ((0.8 * s).cos(), (0.8 * s).sin());
        let expect = Matrix3::new(cs, -sn, 0.0, sn, cs, 0.0, 0.0, 0.0, 1.0);
        assert!((r.eval(s) - expect).amax() < 1e-9);
        let r = darboux_frame(&z, &c, &z, Matrix3::identity(), 1.0);
        let expect = Matrix3::new(cs, 0.0, -sn, 0.0, 1.0, 0.0, sn, 0.0, cs);
        assert!((r.eval(s) - expect).amax() < 1e-9);
        let r = darboux_frame(&z, &z, &z, Matrix3::identity(), 1.0);
        assert!((r.eval(s) - Matrix3::identity()).amax() < 1e-15);
    }
}
