use super::config::{ConstructionKind, EvaluatorKind, InitKind, SolverConfig};
use super::spec::{Regime, SweepSpec};
use crate::constructions::{
    ansatz_field, recovery_narrow_codazzi, recovery_narrow_gauss, ruled_isometry, AnsatzKind, PhiSurface, PsiConfig,
    RescaledSecondForm,
};
use crate::error::{Error, Result};
use crate::euclidean::EuclideanRibbon;
use crate::fields::SmoothField1D;
use crate::geometry::{planar_immersion, RibbonGeometry};
use crate::limits::{plate_energy, FormField};
use crate::quadform::{IsotropicModuli, QuadForm3};
use crate::sim::{
    minimize, minimize_preconditioned, sample_config, sample_surface, Config3, Energy3d, GaussNewtonPreconditioner,
    Grid2, Grid3, Minimization, ReducedModel, ReducedValue, StopReason, SurfaceConfig,
};
use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// Outcome of one sweep point.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub energy: f64,
    pub converged: bool,
    pub iters: usize,
    pub grid: String,
}

impl Evaluation {
    fn exact(energy: f64, grid: &str) -> Self {
        Evaluation { energy, converged: true, iters: 0, grid: grid.into() }
    }
}

/// Result of a reduced-model minimization.
#[derive(Clone, Debug)]
pub struct ReducedRun {
    pub init: InitKind,
    pub surface: SurfaceConfig,
    pub value: ReducedValue,
    pub minimization: Minimization,
}

/// Default initial data: Phi in the narrow regime, flat and ruled otherwise.
pub fn default_inits(regime: &Regime) -> Vec<InitKind> {
    match regime {
        Regime::Narrow { .. } => vec![InitKind::Phi],
        _ => vec![InitKind::Flat, InitKind::Ruled],
    }
}

fn rng_for(seed: u64, point: usize) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(point as u64);
    r
}

fn perturb(x: &mut [Vector3<f64>], amplitude: f64, rng: &mut ChaCha8Rng) {
    if amplitude > 0.0 {
        for p in x.iter_mut() {
            for c in p.iter_mut() {
                *c += amplitude * rng.gen_range(-1.0..1.0);
            }
        }
    }
}

/// Initial surface of the given kind, or `None` when the construction does not apply.
pub fn initial_surface(
    kind: InitKind,
    geom: &RibbonGeometry,
    ribbon: &Arc<EuclideanRibbon>,
    w: f64,
    grid: Grid2,
) -> Result<Option<SurfaceConfig>> {
    match kind {
        InitKind::Phi => Ok(Some(sample_surface(&PhiSurface { ribbon: ribbon.clone(), w }, grid)?)),
        InitKind::Flat => {
            if !geom.flat {
                return Ok(None);
            }
            let chi = planar_immersion(geom, w)?;
            let mut pos = Vec::with_capacity(grid.node_count());
            for i in 0..grid.n[0] {
                for j in 0..grid.n[1] {
                    let [z1, z2] = grid.node(i, j);
                    let p = chi.point(z1, z2);
                    pos.push(Vector3::new(p.x, p.y, 0.0));
                }
            }
            Ok(Some(SurfaceConfig::new(grid, pos)?))
        }
        InitKind::Ruled => {
            let zero = SmoothField1D::Constant(0.0);
            match ruled_isometry(geom, &zero, &zero, w) {
                Ok(r) => Ok(Some(sample_surface(&r, grid)?)),
                Err(Error::Domain(_)) => Ok(None),
                Err(e) => Err(e),
            }
        }
    }
}

/// Minimizes the reduced energy from each applicable initial surface and keeps the lowest.
pub fn minimize_reduced(
    geom: &RibbonGeometry,
    t: f64,
    w: f64,
    solver: &SolverConfig,
    inits: &[InitKind],
    seed: u64,
    point: usize,
) -> Result<ReducedRun> {
    let grid = Grid2::new(solver.grid[0], solver.grid[1], geom.length, w)?;
    let model = ReducedModel::new(geom, t, grid, solver.reduced)?;
    let ribbon = Arc::new(EuclideanRibbon::new(geom));
    let mut rng = rng_for(seed, point);
    let mut best: Option<ReducedRun> = None;
    for &kind in inits {
        let Some(mut init) = initial_surface(kind, geom, &ribbon, w, grid)? else { continue };
        perturb(&mut init.positions, solver.perturbation * w * w, &mut rng);
        let mut objective = |x: &[f64]| {
            let f = SurfaceConfig::from_flat(grid, x)?;
            let (v, g) = model.energy_and_gradient(&f)?;
            Ok((v.total, g.iter().flat_map(|v| [v.x, v.y, v.z]).collect()))
        };
        let m = if solver.preconditioner {
            let mut pc = GaussNewtonPreconditioner::new(&model);
            minimize_preconditioned(&mut objective, init.to_flat(), &solver.minimize, Some(&mut pc))?
        } else {
            minimize(&mut objective, init.to_flat(), &solver.minimize)?
        };
        let surface = SurfaceConfig::from_flat(grid, &m.x)?;
        let value = model.energy(&surface)?;
        if best.as_ref().map_or(true, |b| value.total < b.value.total) {
            best = Some(ReducedRun { init: kind, surface, value, minimization: m });
        }
    }
    best.ok_or_else(|| Error::Domain("no applicable initial configuration".into()))
}

/// Minimizes the discretized 3D energy starting from sampled Psi_t.
pub fn minimize_3d(
    geom: &RibbonGeometry,
    moduli: IsotropicModuli,
    t: f64,
    w: f64,
    solver: &SolverConfig,
    seed: u64,
    point: usize,
) -> Result<(Config3, Minimization)> {
    let e = Energy3d::new(geom, moduli, t, w)?;
    let [n1, n2, n3] = solver.grid3;
    let grid = Grid3::new(n1, n2, n3, geom.length)?;
    let disc = e.discretize(grid)?;
    let mut init = sample_config(&PsiConfig { ribbon: e.ribbon.clone(), t, w }, grid)?;
    let mut rng = rng_for(seed, point);
    perturb(&mut init.positions, solver.perturbation * w * w, &mut rng);
    let mut objective = |x: &[f64]| {
        let u = Config3::from_flat(grid, x)?;
        let (v, g) = disc.energy_and_gradient(&u)?;
        Ok((v, g.iter().flat_map(|v| [v.x, v.y, v.z]).collect()))
    };
    let m = minimize(&mut objective, init.to_flat(), &solver.minimize)?;
    Ok((Config3::from_flat(grid, &m.x)?, m))
}

/// Plate functional of a construction at width w.
pub fn plate_value(
    geom: &RibbonGeometry,
    moduli: &IsotropicModuli,
    construction: ConstructionKind,
    state: &crate::limits::MidlineState,
    delta: Option<f64>,
    w: f64,
) -> Result<f64> {
    let ribbon = EuclideanRibbon::new(geom);
    let q3 = QuadForm3::isotropic(moduli);
    match construction {
        ConstructionKind::Ruled => {
            let r = ruled_isometry(geom, &state.alpha, &state.beta, w)?;
            plate_energy(&ribbon, &q3, w, &RescaledSecondForm { surface: &r, w })
        }
        ConstructionKind::AnsatzD => plate_energy(&ribbon, &q3, w, &ansatz_field(AnsatzKind::D, geom, w, delta)?),
        ConstructionKind::AnsatzB => plate_energy(&ribbon, &q3, w, &ansatz_field(AnsatzKind::B, geom, w, None)?),
        c => Err(Error::Config(format!("{c:?} has no plate energy"))),
    }
}

/// 3D energy of an analytic construction.
pub fn construction_energy(
    geom: &RibbonGeometry,
    moduli: IsotropicModuli,
    construction: ConstructionKind,
    state: &crate::limits::MidlineState,
    t: f64,
    w: f64,
) -> Result<f64> {
    let e = Energy3d::new(geom, moduli, t, w)?;
    let forms = FormField::isotropic(&moduli);
    match construction {
        ConstructionKind::Psi => e.analytic(&PsiConfig { ribbon: e.ribbon.clone(), t, w }),
        ConstructionKind::RecoveryGauss => e.analytic(&recovery_narrow_gauss(e.ribbon.clone(), &forms, state, t, w)?),
        ConstructionKind::RecoveryCodazzi => {
            e.analytic(&recovery_narrow_codazzi(e.ribbon.clone(), &forms, state, t, w)?)
        }
        c => Err(Error::Config(format!("{c:?} is not a 3D configuration"))),
    }
}

/// Runs the configured evaluator at sweep point `point` (index into the w list).
pub fn evaluate_point(spec: &SweepSpec, point: usize) -> Result<Evaluation> {
    let geom = spec.geometry.build()?;
    let w = spec.w[point];
    let t = spec.thickness(w);
    let solver = &spec.solver;
    let state = spec.state.midline_state();
    match spec.evaluator {
        EvaluatorKind::Reduced => {
            let inits = solver.inits.clone().unwrap_or_else(|| default_inits(&spec.regime));
            let run = minimize_reduced(&geom, t, w, solver, &inits, solver.seed, point)?;
            Ok(Evaluation {
                energy: run.value.total,
                converged: run.minimization.converged,
                iters: run.minimization.iterations,
                grid: format!("{}x{}", solver.grid[0], solver.grid[1]),
            })
        }
        EvaluatorKind::Minimize3d => {
            let (_, m) = minimize_3d(&geom, spec.moduli, t, w, solver, solver.seed, point)?;
            let [a, b, c] = solver.grid3;
            Ok(Evaluation { energy: m.energy, converged: m.converged, iters: m.iterations, grid: format!("{a}x{b}x{c}") })
        }
        EvaluatorKind::Energy3d => {
            let c = spec.construction.unwrap_or(ConstructionKind::Psi);
            Ok(Evaluation::exact(construction_energy(&geom, spec.moduli, c, &state, t, w)?, "quadrature"))
        }
        EvaluatorKind::Plate => {
            let c = spec.construction.unwrap_or(ConstructionKind::Ruled);
            Ok(Evaluation::exact(plate_value(&geom, &spec.moduli, c, &state, spec.delta, w)?, "quadrature"))
        }
    }
}

/// Reason a minimization stopped, as text.
pub fn stop_label(r: StopReason) -> &'static str {
    match r {
        StopReason::Gradient => "gradient",
        StopReason::Stalled => "stalled",
        StopReason::MaxIterations => "max-iterations",
        StopReason::LineSearch => "line-search",
    }
}

/// Metric diag((1 - kappa z2)^2, 1) of a flat geometry in Fermi coordinates, with partials.
pub fn flat_metric_sample(geom: &RibbonGeometry, z1: f64, z2: f64) -> crate::fields::SymSample {
    let k = geom.kappa.eval(z1).0;
    let u = 1.0 - k[0] * z2;
    crate::fields::SymSample {
        value: nalgebra::Matrix2::new(u * u, 0.0, 0.0, 1.0),
        d1: nalgebra::Matrix2::new(-2.0 * u * k[1] * z2, 0.0, 0.0, 0.0),
        d2: nalgebra::Matrix2::new(-2.0 * u * k[0], 0.0, 0.0, 0.0),
    }
}

/// Surface integrated from the flat metric and an ansatz second form on the physical strip.
pub fn ansatz_surface(
    geom: &RibbonGeometry,
    kind: AnsatzKind,
    w: f64,
    delta: Option<f64>,
    n1: usize,
    n2: usize,
) -> Result<crate::constructions::FormsSurface> {
    use crate::fields::{StripSymField, SymSample};
    if !geom.flat {
        return Err(Error::Domain("ansatz surfaces need a flat geometry".into()));
    }
    let field = ansatz_field(kind, geom, w, delta)?;
    let a = |z1: f64, z2: f64| flat_metric_sample(geom, z1, z2);
    let ii = |z1: f64, z2: f64| {
        let s = field.sample(z1, z2 / w);
        SymSample { value: s.value, d1: s.d1, d2: s.d2 / w }
    };
    let base = crate::constructions::BaseFrame { origin: Vector3::new(0.0, -0.5 * w, 0.0), ..Default::default() };
    crate::constructions::surface_from_forms(&a, &ii, [0.0, geom.length], [-0.5 * w, 0.5 * w], n1, n2, base)
}
