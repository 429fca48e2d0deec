//! Acceptance suite: one pass/fail line per criterion, nonzero exit on any failure.

use nalgebra::{Matrix2, Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ribbonlab::constructions::{
    ansatz_field, darboux_frame, gc_residual, ruled_isometry, surface_from_forms, AnsatzKind, BaseFrame, PsiConfig,
};
use ribbonlab::euclidean::EuclideanRibbon;
use ribbonlab::fields::{SmoothField1D, SymSample};
use ribbonlab::geometry::{PresetSpec, RibbonGeometry};
use ribbonlab::harness::{
    construction_energy, fit_log_points, minimize_reduced, plate_value, records_to_csv, run_sweep, ConstructionKind,
    ExperimentConfig, InitKind, SweepSpec,
};
use ribbonlab::limits::{codazzi_i, e0_codazzi, e0_gauss, min_j, pointwise_min, wide_density, FormField, MidlineState};
use ribbonlab::quadform::{alpha_pm, q1, q2_circ, relax_to_2x2, IsotropicModuli, QuadForm2, QuadForm3};
use ribbonlab::sim::{
    midline_second_form, sample_config, Config3, Energy3d, Grid2, Grid3, ReducedModel, ReducedWeights, SurfaceConfig,
};
use std::time::Instant;

type Outcome = Result<String, String>;

fn preset(name: &str, p: &[(&str, f64)]) -> RibbonGeometry {
    PresetSpec::new(name, p).build().unwrap()
}

fn check(ok: bool, msg: String) -> Result<String, String> {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = xs.iter().zip(ys).map(|(x, y)| (x.ln(), y.ln())).collect();
    fit_log_points(&pts).map(|f| f.0).unwrap_or(f64::NAN)
}

fn compass(f: &dyn Fn(&[f64]) -> f64, x0: Vec<f64>, step: f64) -> f64 {
    let (mut x, mut fx, mut h) = (x0.clone(), f(&x0), step);
    while h > 1e-11 {
        let mut moved = false;
        for i in 0..x.len() {
            for s in [h, -h] {
                let mut y = x.clone();
                y[i] += s;
                let fy = f(&y);
                if fy < fx {
                    (x, fx, moved) = (y, fy, true);
                }
            }
        }
        if !moved {
            h *= 0.5;
        }
    }
    fx
}

/// Dense grid on [c - r, c + r]^n, then compass refinement from the best node.
fn grid_oracle(f: &dyn Fn(&[f64]) -> f64, center: &[f64], r: f64, k: usize) -> f64 {
    let n = center.len();
    let mut best = (f64::INFINITY, center.to_vec());
    for idx in 0..(k + 1).pow(n as u32) {
        let mut m = idx;
        let x: Vec<f64> = (0..n)
            .map(|d| {
                let i = m % (k + 1);
                m /= k + 1;
                center[d] - r + 2.0 * r * i as f64 / k as f64
            })
            .collect();
        let v = f(&x);
        if v < best.0 {
            best = (v, x);
        }
    }
    compass(f, best.1, 2.0 * r / k as f64)
}

fn c1_deficits() -> Outcome {
    let d = preset("fig1d", &[("kappa", 0.7), ("n", 1.3)]);
    let b = preset("fig1b", &[]);
    let xs: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
    let ok = xs.iter().all(|&x| d.codazzi_deficit(x) == [0.7 * 1.3, 0.0] && b.codazzi_deficit(x) == [0.0, -1.0]);
    check(ok, "(d): (kappa n, 0), (b): (0, -1) exactly at 21 points".into())
}

fn c2_quadratic_forms() -> Outcome {
    let mut worst_oracle: f64 = 0.0;
    let mut worst_closed: f64 = 0.0;
    let samples = [Matrix2::identity(), Matrix2::new(1.0, 0.3, 0.3, -0.5), Matrix2::new(0.2, -0.7, -0.7, 0.4)];
    for (mu, lambda) in [(1.0, 0.0), (1.0, 1.0), (0.7, 2.5)] {
        let m = IsotropicModuli::new(mu, lambda).unwrap();
        let q3 = QuadForm3::isotropic(&m);
        let q2 = relax_to_2x2(&q3, None).map_err(|e| e.to_string())?.q2;
        let closed = QuadForm2::isotropic(&m);
        let c = m.plane_stress_lambda();
        for a in &samples {
            let o = grid_oracle(
                &|x| q3.eval(&Matrix3::new(a[(0, 0)], a[(0, 1)], x[0], a[(1, 0)], a[(1, 1)], x[1], x[2], x[3], x[4])),
                &[0.0; 5],
                2.0,
                4,
            );
            worst_oracle = worst_oracle.max((q2.eval(a) - o).abs());
            worst_closed = worst_closed.max((q2.eval(a) - closed.eval(a)).abs());
            let (a11, a12) = (a[(0, 0)], a[(0, 1)]);
            let (circ, _) = q2_circ(&q2, a11, a12);
            let o = grid_oracle(&|x| q2.eval(&Matrix2::new(a11, a12, a12, x[0])), &[0.0], 2.0, 40);
            worst_oracle = worst_oracle.max((circ - o).abs());
            let closed_circ = 2.0 * mu * (a11 * a11 + 2.0 * a12 * a12) + 2.0 * mu * c * a11 * a11 / (2.0 * mu + c);
            worst_closed = worst_closed.max((circ - closed_circ).abs());
        }
        let o = grid_oracle(&|x| q2.eval(&Matrix2::new(1.0, x[0], x[1], x[2])), &[0.0; 3], 2.0, 8);
        worst_oracle = worst_oracle.max((q1(&q2) - o).abs());
        let closed_q1 = 2.0 * mu * (2.0 * mu + 2.0 * c) / (2.0 * mu + c);
        worst_closed = worst_closed.max((q1(&q2) - closed_q1).abs());
    }
    let (ap, am) = alpha_pm(&QuadForm2::isotropic(&IsotropicModuli::default()));
    let alpha_err = (ap - 4.0).abs().max((am - 4.0).abs());
    check(
        worst_oracle <= 1e-6 && worst_closed <= 1e-10 && alpha_err <= 1e-6,
        format!("oracle {worst_oracle:.1e}, closed form {worst_closed:.1e}, alpha+- err {alpha_err:.1e}"),
    )
}

fn c3_min_j() -> Outcome {
    let f = FormField::isotropic(&IsotropicModuli::default());
    let mut worst_zero: f64 = 0.0;
    for g in [
        preset("euclidean", &[]),
        preset("cylinder", &[]),
        preset("fig1b", &[]),
        preset("fig1c", &[]),
        preset("fig1d", &[]),
        preset("fig1e", &[]),
    ] {
        worst_zero = worst_zero.max(min_j(&g, &f).map_err(|e| e.to_string())?.value.abs());
    }
    let q2 = QuadForm2::isotropic(&IsotropicModuli::default());
    let mut worst_oracle: f64 = 0.0;
    let mut cmin = f64::INFINITY;
    for k in [1.0, 0.5] {
        let g = preset("fig1a", &[("curvature", k)]);
        let r = min_j(&g, &f).map_err(|e| e.to_string())?;
        let ii0 = Matrix2::identity() * k;
        let o = grid_oracle(
            &|x| wide_density(&q2, alpha_pm(&q2), &ii0, &Matrix2::new(x[0], x[1], x[1], x[2])),
            &[0.0; 3],
            1.5 * k,
            24,
        );
        let (_, v, _) = pointwise_min(&q2, alpha_pm(&q2), &ii0);
        worst_oracle = worst_oracle.max((v - o).abs()).max((r.value - o / 12.0).abs());
        cmin = cmin.min(r.gap_constant(&g).unwrap_or(0.0));
    }
    check(
        worst_zero <= 1e-10 && worst_oracle <= 1e-6 && cmin > 0.0,
        format!("det II0 = 0 presets max {worst_zero:.1e}, II0 = kI oracle {worst_oracle:.1e}, gap constant {cmin:.3}"),
    )
}

fn recovery_errors(geom: &RibbonGeometry, kind: ConstructionKind, reference: f64) -> Result<Vec<f64>, String> {
    let m = IsotropicModuli::default();
    [0.04, 0.02, 0.01]
        .iter()
        .map(|&w: &f64| {
            let t = w.powf(1.5);
            let e = construction_energy(geom, m, kind, &MidlineState::zero(), t, w).map_err(|e| e.to_string())?;
            let scale = match kind {
                ConstructionKind::RecoveryGauss => w.powi(4),
                _ => t * t * w * w,
            };
            Ok((e / scale - reference).abs() / reference)
        })
        .collect()
}

fn c4_recovery_gauss() -> Outcome {
    let g = preset("fig1a", &[]);
    let e0 = e0_gauss(&g, &FormField::isotropic(&IsotropicModuli::default()), &MidlineState::zero()).unwrap();
    let errs = recovery_errors(&g, ConstructionKind::RecoveryGauss, e0)?;
    check(errs[2] <= 0.05 && errs[1] < errs[0] && errs[2] < errs[1], format!("rel errors {:.2e} {:.2e} {:.2e} against E0G = {e0:.5e}", errs[0], errs[1], errs[2]))
}

fn c5_recovery_codazzi() -> Outcome {
    let g = preset("fig1e", &[]);
    let e0 = e0_codazzi(&g, &FormField::isotropic(&IsotropicModuli::default()), &MidlineState::zero()).unwrap();
    let errs = recovery_errors(&g, ConstructionKind::RecoveryCodazzi, e0)?;
    check(errs[2] <= 0.05 && errs[1] < errs[0] && errs[2] < errs[1], format!("rel errors {:.2e} {:.2e} {:.2e} against E0C = {e0:.5e}", errs[0], errs[1], errs[2]))
}

fn sweep_spec(preset: &str, regime: &str, exponent: f64, w: &[f64]) -> SweepSpec {
    let text = format!(
        "[geometry]\npreset = \"{preset}\"\n\n[sweep]\nregime = \"{regime}\"\nexponent = {exponent}\nw = {w:?}\nevaluator = \"reduced\"\n\n[solver]\ngrid = [41, 9]\n"
    );
    SweepSpec::from_config(&ExperimentConfig::from_toml(&text).unwrap()).unwrap()
}

const NARROW_W: [f64; 5] = [0.1, 0.08, 0.06, 0.04, 0.02];
const WIDE_W: [f64; 5] = [0.04, 0.03, 0.02, 0.015, 0.01];

/// Discrete L2 distance of the midline second form of f from II0.
fn midline_gap(f: &SurfaceConfig, geom: &RibbonGeometry) -> Result<f64, String> {
    let rows = midline_second_form(f, ReducedWeights::default().order).map_err(|e| e.to_string())?;
    let inner = &rows[2..rows.len() - 2];
    Ok((inner.iter().map(|(x, m)| (m - geom.ii0(*x)).norm_squared()).sum::<f64>() / inner.len() as f64).sqrt())
}

fn c6_gauss_transition() -> Outcome {
    let g = preset("fig1a", &[]);
    let narrow = sweep_spec("fig1a", "narrow", 1.5, &NARROW_W);
    let wide = sweep_spec("fig1a", "wide", 3.0, &WIDE_W);
    let rn = run_sweep(&narrow, None).map_err(|e| e.to_string())?.set.records;
    let rw = run_sweep(&wide, None).map_err(|e| e.to_string())?.set.records;
    let sn = slope(&rn.iter().map(|r| r.w).collect::<Vec<_>>(), &rn.iter().map(|r| r.energy).collect::<Vec<_>>());
    let sw = slope(&rw.iter().map(|r| r.t).collect::<Vec<_>>(), &rw.iter().map(|r| r.energy).collect::<Vec<_>>());
    // midline second forms at the smallest width of each path
    let run = |spec: &SweepSpec, i: usize| {
        let w = spec.w[i];
        let inits = match spec.regime {
            ribbonlab::harness::Regime::Narrow { .. } => vec![InitKind::Phi],
            _ => vec![InitKind::Flat, InitKind::Ruled],
        };
        minimize_reduced(&g, spec.thickness(w), w, &spec.solver, &inits, 0, i).map_err(|e| e.to_string())
    };
    let gap_n = midline_gap(&run(&narrow, 4)?.surface, &g)?;
    let gap_w = midline_gap(&run(&wide, 4)?.surface, &g)?;
    let c = min_j(&g, &FormField::isotropic(&IsotropicModuli::default()))
        .ok()
        .and_then(|r| r.gap_constant(&g))
        .unwrap_or(0.0);
    let kappa1 = 1.0;
    check(
        (3.6..=4.4).contains(&sn) && (1.8..=2.2).contains(&sw) && gap_w >= 0.1 * c * kappa1 && gap_n <= 0.05,
        format!(
            "narrow slope(w) {sn:.3}, wide slope(t) {sw:.3}, midline gap wide {gap_w:.3} (need >= {:.3}), narrow {gap_n:.4}",
            0.1 * c * kappa1
        ),
    )
}

fn c7_codazzi_no_transition() -> Outcome {
    let mut vals = Vec::new();
    for spec in [sweep_spec("fig1e", "narrow", 1.5, &NARROW_W), sweep_spec("fig1e", "wide", 3.0, &WIDE_W)] {
        let recs = run_sweep(&spec, None).map_err(|e| e.to_string())?.set.records;
        if let Some(r) = recs.iter().find(|r| r.is_failed()) {
            return Err(format!("sweep point w = {} failed: {:?}", r.w, r.failure));
        }
        vals.extend(recs.iter().map(|r| r.e_div_t2w2));
    }
    let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().cloned().fold(0.0, f64::max);
    let g = preset("fig1e", &[]);
    let m = IsotropicModuli::default();
    let z = SmoothField1D::Constant(0.0);
    let min_i = codazzi_i(&g, &FormField::isotropic(&m), &z, &z).map_err(|e| e.to_string())?.minimum;
    let w = 0.01;
    let plate = plate_value(&g, &m, ConstructionKind::Ruled, &MidlineState::zero(), None, w).map_err(|e| e.to_string())?;
    let rel = (plate / (w * w) - min_i).abs() / min_i;
    check(
        hi / lo <= 3.0 && rel <= 0.2,
        format!("E/(t^2 w^2) in [{lo:.4e}, {hi:.4e}] (ratio {:.3}), plate/w^2 vs min I = {min_i:.4e}: rel {rel:.2e}", hi / lo),
    )
}

fn plate_slope(g: &RibbonGeometry, c: ConstructionKind) -> Result<f64, String> {
    let ws = [1e-2, 3e-3, 1e-3, 3e-4, 1e-4];
    let m = IsotropicModuli::default();
    let es = ws
        .iter()
        .map(|&w| plate_value(g, &m, c, &MidlineState::zero(), None, w).map_err(|e| e.to_string()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(slope(&ws, &es))
}

fn psi_slope(g: &RibbonGeometry, q: i32) -> Result<f64, String> {
    let ws = [0.08, 0.04, 0.02, 0.01, 0.005];
    let es = ws
        .iter()
        .map(|&w: &f64| {
            construction_energy(g, IsotropicModuli::default(), ConstructionKind::Psi, &MidlineState::zero(), w.powi(q), w)
                .map_err(|e| e.to_string())
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(slope(&ws, &es))
}

fn c8_geometry_d() -> Outcome {
    let g = preset("fig1d", &[("kappa", 1.0), ("n", 1.0)]);
    let sp = plate_slope(&g, ConstructionKind::AnsatzD)?;
    let s3 = psi_slope(&g, 4)?;
    check(
        (sp - 2.0 / 3.0).abs() <= 0.1 && (s3 - 6.0).abs() <= 0.3,
        format!("ansatz plate slope {sp:.4}, energy3d(Psi_t) slope {s3:.4} on t = w^4"),
    )
}

fn c9_geometry_b() -> Outcome {
    let g = preset("fig1b", &[]);
    let sp = plate_slope(&g, ConstructionKind::AnsatzB)?;
    let s3 = psi_slope(&g, 5)?;
    let a = |_: f64, _: f64| SymSample { value: Matrix2::identity(), d1: Matrix2::zeros(), d2: Matrix2::zeros() };
    let ii = |x: f64, _: f64| SymSample {
        value: Matrix2::new(0.0, 0.0, 0.0, x),
        d1: Matrix2::new(0.0, 0.0, 0.0, 1.0),
        d2: Matrix2::zeros(),
    };
    let res = surface_from_forms(&a, &ii, [0.0, 1.0], [-0.5, 0.5], 21, 11, BaseFrame::default())
        .map_err(|e| e.to_string())?
        .residual;
    check(
        (sp - 1.0).abs() <= 0.1 && (s3 - 8.0).abs() <= 0.5 && res >= 1e-3,
        format!("ansatz plate slope {sp:.4}, energy3d(Psi_t) slope {s3:.4} on t = w^5, path residual {res:.3e}"),
    )
}

fn c10_constructions() -> Outcome {
    let cases = [
        (preset("cylinder", &[("l", 1.5)]), 0.3, 0.2),
        (preset("fig1c", &[("kappa", 0.8), ("l", 1.0), ("m", 0.5)]), -0.4, 0.1),
        (preset("fig1e", &[]), 0.2, -0.1),
    ];
    let (mut iso, mut mid): (f64, f64) = (0.0, 0.0);
    for (g, a, b) in &cases {
        let c = SmoothField1D::Constant;
        let v = ruled_isometry(g, &c(*a), &c(*b), 0.05).map_err(|e| e.to_string())?;
        iso = iso.max(v.isometry_residual(20, 6).map_err(|e| e.to_string())?);
        mid = mid.max(v.midline_form_error(20).map_err(|e| e.to_string())?);
    }
    let gd = preset("fig1d", &[]);
    let gb = preset("fig1b", &[]);
    let mut gc: f64 = 0.0;
    for w in [1e-4, 1e-3, 1e-2] {
        let d = ansatz_field(AnsatzKind::D, &gd, w, None).map_err(|e| e.to_string())?;
        let b = ansatz_field(AnsatzKind::B, &gb, w, None).map_err(|e| e.to_string())?;
        gc = gc.max(gc_residual(&gd, w, &d, 16, 16).max()).max(gc_residual(&gb, w, &b, 16, 16).max());
    }
    check(
        iso <= 1e-8 && mid <= 1e-6 && gc <= 1e-8,
        format!("isometry residual {iso:.1e}, midline form error {mid:.1e}, ansatz Gauss-Codazzi residual {gc:.1e}"),
    )
}

fn fd_worst(e: &dyn Fn(&[f64]) -> f64, x: &[f64], g: &[f64], rng: &mut ChaCha8Rng, h: f64) -> f64 {
    let scale = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    (0..12)
        .map(|_| {
            let k = rng.gen_range(0..x.len());
            let (mut xp, mut xm) = (x.to_vec(), x.to_vec());
            xp[k] += h;
            xm[k] -= h;
            ((e(&xp) - e(&xm)) / (2.0 * h) - g[k]).abs() / scale
        })
        .fold(0.0, f64::max)
}

fn flat(v: &[Vector3<f64>]) -> Vec<f64> {
    v.iter().flat_map(|p| [p.x, p.y, p.z]).collect()
}

fn c11_hygiene() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    // energy3d
    let g = preset("fig1c", &[]);
    let (t, w) = (0.1, 0.2);
    let e = Energy3d::new(&g, IsotropicModuli::new(1.0, 0.5).unwrap(), t, w).unwrap();
    let grid = Grid3::new(8, 4, 3, g.length).unwrap();
    let d = e.discretize(grid).unwrap();
    let base = sample_config(&PsiConfig { ribbon: e.ribbon.clone(), t, w }, grid).unwrap();
    let mut fd3: f64 = 0.0;
    for _ in 0..20 {
        let mut u = base.clone();
        for p in u.positions.iter_mut() {
            *p += Vector3::new(rng.gen_range(-0.02..0.02), rng.gen_range(-0.01..0.01), rng.gen_range(-0.005..0.005));
        }
        let (_, grad) = d.energy_and_gradient(&u).unwrap();
        let en = |y: &[f64]| d.energy(&Config3::from_flat(grid, y).unwrap()).unwrap();
        fd3 = fd3.max(fd_worst(&en, &u.to_flat(), &flat(&grad), &mut rng, 1e-6));
    }
    // reduced
    let g = preset("fig1a", &[]);
    let grid = Grid2::new(12, 6, g.length, 0.1).unwrap();
    let model = ReducedModel::new(&g, 0.01, grid, ReducedWeights::default()).unwrap();
    let mut fd2: f64 = 0.0;
    for _ in 0..20 {
        let mut f = SurfaceConfig::flat(grid);
        for p in f.positions.iter_mut() {
            *p += Vector3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * 0.01;
        }
        let (_, grad) = model.energy_and_gradient(&f).unwrap();
        let en = |y: &[f64]| model.energy(&SurfaceConfig::from_flat(grid, y).unwrap()).unwrap().total;
        fd2 = fd2.max(fd_worst(&en, &f.to_flat(), &flat(&grad), &mut rng, 1e-7));
    }
    // frame paths
    let mut drift: f64 = 0.0;
    for name in ["fig1a", "fig1b", "fig1c", "fig1d", "fig1e", "cylinder"] {
        let g = preset(name, &[]);
        let r = EuclideanRibbon::new(&g);
        drift = drift.max(r.frame().max_orthogonality_defect());
        if let Ok(v) = ruled_isometry(&g, &SmoothField1D::Constant(0.1), &SmoothField1D::Constant(0.0), 0.05) {
            drift = drift.max(v.frame().max_orthogonality_defect());
        }
    }
    let c = SmoothField1D::Constant;
    drift = drift.max(darboux_frame(&c(2.0), &c(-1.0), &c(0.5), Matrix3::identity(), 1.0).max_orthogonality_defect());
    // determinism
    let text = "[geometry]\npreset = \"fig1a\"\n\n[sweep]\nregime = \"narrow\"\nw = [0.1, 0.08, 0.06, 0.04]\nevaluator = \"reduced\"\n\n[solver]\ngrid = [17, 7]\nseed = 5\nperturbation = 0.5\nworkers = 2\n\n[solver.minimize]\nmax_iters = 200\n";
    let spec = SweepSpec::from_config(&ExperimentConfig::from_toml(text).unwrap()).unwrap();
    let csv = || records_to_csv(&run_sweep(&spec, None).unwrap().set.records).unwrap();
    let same = csv() == csv();
    check(
        fd3 <= 1e-6 && fd2 <= 1e-6 && drift <= 1e-9 && same,
        format!("FD gradient error energy3d {fd3:.1e}, reduced {fd2:.1e}; frame drift {drift:.1e}; byte-identical sweep {same}"),
    )
}

fn main() {
    let criteria: [(usize, &str, f64, fn() -> Outcome); 11] = [
        (1, "deficit correctness", 1.0, c1_deficits),
        (2, "quadratic-form oracles", 10.0, c2_quadratic_forms),
        (3, "min J dichotomy", 30.0, c3_min_j),
        (4, "narrow Gauss recovery", 120.0, c4_recovery_gauss),
        (5, "narrow Codazzi recovery", 120.0, c5_recovery_codazzi),
        (6, "Gauss transition scaling", 900.0, c6_gauss_transition),
        (7, "Codazzi no transition", 600.0, c7_codazzi_no_transition),
        (8, "geometry (d) scaling", 120.0, c8_geometry_d),
        (9, "geometry (b) scaling", 120.0, c9_geometry_b),
        (10, "construction fidelity", 60.0, c10_constructions),
        (11, "numerical hygiene", 120.0, c11_hygiene),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|s| s.parse().ok());
    let mut failed = 0;
    for (n, name, limit, run) in criteria {
        if only.is_some_and(|k| k != n) {
            continue;
        }
        let start = Instant::now();
        let out = run();
        let secs = start.elapsed().as_secs_f64();
        let in_time = secs <= limit;
        let pass = out.is_ok() && in_time;
        failed += usize::from(!pass);
        let detail = match &out {
            Ok(s) | Err(s) => s,
        };
        let timing = if in_time { format!("{secs:.1}s") } else { format!("{secs:.1}s over the {limit}s limit") };
        println!("criterion {n:>2} {}: {name}: {detail} [{timing}]", if pass { "PASS" } else { "FAIL" });
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
