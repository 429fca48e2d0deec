//! Experiment orchestration: configs, sweeps over (t, w), exponent fits and export.

mod config;
mod evaluate;
mod fit;
mod mesh;
mod records;
mod spec;
mod sweep;

pub use config::{
    ConstructionKind, EvaluatorKind, ExperimentConfig, InitKind, OutputConfig, RegimeKind, SolverConfig, StateConfig,
    SweepConfig,
};
pub use evaluate::{
    construction_energy, default_inits, evaluate_point, initial_surface, minimize_3d, minimize_reduced, plate_value,
    stop_label, ansatz_surface, flat_metric_sample, Evaluation, ReducedRun,
};
pub use fit::{fit_exponent, fit_log_points, FitResult, Predictor};
pub use mesh::{export_mesh, Mesh};
pub use records::{
    read_csv, read_json, records_from_csv, records_from_json, records_to_csv, records_to_json, write_csv, write_json,
    RecordSet, SweepRecord,
};
pub use spec::{Regime, SweepSpec, DEFAULT_NARROW_EXPONENT};
pub use sweep::{run_sweep, run_sweep_with_output, SweepOutcome, CSV_NAME, JSON_NAME};
