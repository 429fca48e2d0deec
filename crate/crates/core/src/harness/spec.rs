use super::config::{ConstructionKind, EvaluatorKind, ExperimentConfig, RegimeKind, SolverConfig, StateConfig};
use crate::error::{Error, Result};
use crate::geometry::PresetSpec;
use crate::quadform::IsotropicModuli;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::PathBuf;

pub const DEFAULT_NARROW_EXPONENT: f64 = 1.5;

/// Path through the (t, w) plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Regime {
    /// t = w^p, 1 < p < 2.
    Narrow { p: f64 },
    /// t = w^q, q > 2.
    Wide { q: f64 },
    /// t -> 0 first: the plate functional at each w.
    Plate,
}

impl Regime {
    pub fn thickness(&self, w: f64) -> f64 {
        match *self {
            Regime::Narrow { p } => w.powf(p),
            Regime::Wide { q } => w.powf(q),
            Regime::Plate => 0.0,
        }
    }
}

/// A validated sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub geometry: PresetSpec,
    pub moduli: IsotropicModuli,
    pub state: StateConfig,
    pub regime: Regime,
    pub w: Vec<f64>,
    pub evaluator: EvaluatorKind,
    pub construction: Option<ConstructionKind>,
    pub delta: Option<f64>,
    pub solver: SolverConfig,
    pub output: Option<PathBuf>,
}

impl SweepSpec {
    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self> {
        let s = &cfg.sweep;
        let regime = match s.regime {
            RegimeKind::Narrow => Regime::Narrow { p: s.exponent.unwrap_or(DEFAULT_NARROW_EXPONENT) },
            RegimeKind::Wide => Regime::Wide {
                q: s.exponent.ok_or_else(|| Error::Config("wide regime needs sweep.exponent (q > 2)".into()))?,
            },
            RegimeKind::Plate => Regime::Plate,
        };
        let construction = match (s.evaluator, s.construction) {
            (EvaluatorKind::Energy3d, None) => Some(ConstructionKind::Psi),
            (EvaluatorKind::Plate, None) => Some(ConstructionKind::Ruled),
            (_, c) => c,
        };
        let spec = SweepSpec {
            geometry: cfg.geometry.clone(),
            moduli: cfg.moduli,
            state: cfg.state,
            regime,
            w: s.w.clone(),
            evaluator: s.evaluator,
            construction,
            delta: s.delta,
            solver: cfg.solver.clone(),
            output: cfg.output.dir.clone(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        self.moduli.validate()?;
        if self.w.is_empty() {
            return Err(Error::Config("sweep needs at least one w".into()));
        }
        if self.w.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(Error::Config("all w must be positive and finite".into()));
        }
        if self.w.windows(2).any(|p| !(p[1] < p[0])) {
            return Err(Error::Config("w list must be strictly decreasing".into()));
        }
        match self.regime {
            Regime::Narrow { p } if !(p > 1.0 && p < 2.0) => {
                return Err(Error::Config(format!("narrow regime needs 1 < p < 2, got {p}")))
            }
            Regime::Wide { q } if !(q > 2.0) => return Err(Error::Config(format!("wide regime needs q > 2, got {q}"))),
            _ => {}
        }
        let plate_regime = self.regime == Regime::Plate;
        if plate_regime != (self.evaluator == EvaluatorKind::Plate) {
            return Err(Error::Config("the plate evaluator is used exactly in the plate regime".into()));
        }
        use ConstructionKind::*;
        match (self.evaluator, self.construction) {
            (EvaluatorKind::Energy3d, Some(Psi | RecoveryGauss | RecoveryCodazzi)) => {}
            (EvaluatorKind::Plate, Some(Ruled | AnsatzD | AnsatzB)) => {}
            (EvaluatorKind::Reduced | EvaluatorKind::Minimize3d, None) => {}
            (e, c) => return Err(Error::Config(format!("construction {c:?} does not fit evaluator {e:?}"))),
        }
        if self.solver.workers == 0 {
            return Err(Error::Config("solver.workers must be at least 1".into()));
        }
        if self.solver.perturbation < 0.0 {
            return Err(Error::Config("solver.perturbation must be nonnegative".into()));
        }
        self.geometry.build()?;
        Ok(())
    }

    pub fn thickness(&self, w: f64) -> f64 {
        self.regime.thickness(w)
    }

    /// Hex digest of everything that determines a record, except the w list, the worker
    /// count and the output location.
    pub fn hash(&self) -> String {
        let mut key = self.clone();
        key.w.clear();
        key.solver.workers = 1;
        key.output = None;
        let bytes = serde_json::to_vec(&key).expect("spec serializes");
        let digest = Sha256::digest(&bytes);
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}
