use crate::error::{Error, Result};
use crate::fields::SmoothField1D;
use crate::geometry::PresetSpec;
use crate::limits::MidlineState;
use crate::quadform::IsotropicModuli;
use crate::sim::{MinimizeOptions, ReducedWeights};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Experiment file: sections geometry, moduli, state, sweep, solver, output.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub geometry: PresetSpec,
    #[serde(default)]
    pub moduli: IsotropicModuli,
    #[serde(default)]
    pub state: StateConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Constant midline state (alpha, beta, gammabar).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StateConfig {
    pub alpha: f64,
    pub beta: f64,
    pub gammabar: f64,
}

impl StateConfig {
    pub fn midline_state(&self) -> MidlineState {
        MidlineState {
            alpha: SmoothField1D::Constant(self.alpha),
            beta: SmoothField1D::Constant(self.beta),
            gammabar: SmoothField1D::Constant(self.gammabar),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegimeKind {
    Narrow,
    Wide,
    Plate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvaluatorKind {
    /// Minimization of the reduced shell energy.
    Reduced,
    /// Minimization of the discretized 3D energy.
    Minimize3d,
    /// 3D energy of an analytic construction.
    Energy3d,
    /// Plate functional of a construction.
    Plate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstructionKind {
    Psi,
    RecoveryGauss,
    RecoveryCodazzi,
    Ruled,
    AnsatzD,
    AnsatzB,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitKind {
    Phi,
    Flat,
    Ruled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub regime: RegimeKind,
    /// p in t = w^p (narrow) or q (wide); ignored in plate mode.
    pub exponent: Option<f64>,
    pub w: Vec<f64>,
    pub evaluator: EvaluatorKind,
    pub construction: Option<ConstructionKind>,
    /// delta of the (d) ansatz; default (kappa w)^(1/3).
    pub delta: Option<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            regime: RegimeKind::Narrow,
            exponent: None,
            w: vec![0.1, 0.08, 0.06, 0.04, 0.02],
            evaluator: EvaluatorKind::Reduced,
            construction: None,
            delta: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Nodes (n1, n2) of the reduced-model grid on S_w.
    pub grid: [usize; 2],
    /// Nodes of the 3D grid.
    pub grid3: [usize; 3],
    pub reduced: ReducedWeights,
    pub preconditioner: bool,
    /// Initial configurations tried by the reduced evaluator; default by regime.
    pub inits: Option<Vec<InitKind>>,
    pub seed: u64,
    /// Amplitude of the seeded perturbation of initial data, in units of w^2.
    pub perturbation: f64,
    pub workers: usize,
    pub minimize: MinimizeOptions,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            grid: [41, 9],
            grid3: [8, 4, 3],
            reduced: ReducedWeights::default(),
            preconditioner: true,
            inits: None,
            seed: 0,
            perturbation: 0.0,
            workers: 1,
            minimize: MinimizeOptions { max_iters: 3000, ..MinimizeOptions::default() },
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }
}
