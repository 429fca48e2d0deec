//! Discretized 3D energy, the reduced shell energy, discrete fundamental forms and the
//! quasi-Newton minimizer.

mod energy3d;
mod grid;
mod lbfgs;
mod reduced;

pub use energy3d::{energy3d, AnalyticRule, Discrete3d, Energy3d};
pub use grid::{sample_config, sample_surface, Config3, Grid2, Grid3, SurfaceConfig};
pub use lbfgs::{minimize, minimize_preconditioned, Minimization, MinimizeOptions, Preconditioner, StopReason};
pub use reduced::{
    fundamental_forms, fundamental_forms_with, midline_second_form, GaussNewtonPreconditioner, reduced_energy, NodeForms, ReducedModel, ReducedValue, ReducedWeights,
    IMMERSION_MARGIN,
};
