use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use ribbonlab::constructions::{ruled_isometry, AnsatzKind, PhiSurface, PsiConfig};
use ribbonlab::euclidean::EuclideanRibbon;
use ribbonlab::geometry::RibbonGeometry;
use ribbonlab::harness::{
    ansatz_surface, default_inits, export_mesh, fit_exponent, minimize_3d, minimize_reduced, plate_value, read_csv,
    records_to_csv, run_sweep_with_output, stop_label, ConstructionKind, EvaluatorKind, ExperimentConfig, Mesh,
    Predictor, Regime, SweepSpec,
};
use ribbonlab::limits::{codazzi_i, e0_codazzi, e0_gauss, min_j, wide_j, FormField};
use ribbonlab::sim::{midline_second_form, sample_config, sample_surface, Energy3d, Grid2, Grid3, SurfaceConfig};
use nalgebra::{Matrix2, Vector3};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

#[derive(Parser)]
#[command(name = "ribbonlab", version, about = "Elastic ribbons with incompatible prestrain")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the Gauss and Codazzi deficits along the midline.
    Deficits {
        config: PathBuf,
        #[arg(long, default_value_t = 11)]
        samples: usize,
    },
    /// Evaluate a limit functional.
    LimitEnergy {
        config: PathBuf,
        #[arg(long, value_enum)]
        functional: Functional,
        /// Constant midline second form "l,m,n" for J; default II0.
        #[arg(long)]
        m: Option<String>,
    },
    /// Build a configuration and write its mesh.
    Construct {
        config: PathBuf,
        #[arg(long, value_enum)]
        object: Object,
        #[arg(long)]
        obj_out: PathBuf,
        /// Width; default is the first w of the sweep.
        #[arg(long)]
        w: Option<f64>,
        /// CSV of the midline second form.
        #[arg(long)]
        midline_out: Option<PathBuf>,
    },
    /// Minimize the reduced (or 3D) energy at one width.
    Minimize {
        config: PathBuf,
        #[arg(long)]
        w: Option<f64>,
        #[arg(long)]
        obj_out: Option<PathBuf>,
    },
    /// Run the configured sweep and write records.csv / records.json.
    Sweep {
        config: PathBuf,
        /// Output directory, overriding output.dir.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit log energy against log w or log t.
    Fit {
        records: PathBuf,
        #[arg(long, value_enum, default_value_t = PredictorArg::W)]
        predictor: PredictorArg,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Functional {
    E0g,
    E0c,
    Plate,
    #[value(name = "J")]
    J,
    #[value(name = "minJ")]
    MinJ,
    #[value(name = "I")]
    I,
}

#[derive(Clone, Copy, ValueEnum)]
enum Object {
    Phi,
    Psi,
    Ruled,
    AnsatzD,
    AnsatzB,
}

#[derive(Clone, Copy, ValueEnum)]
enum PredictorArg {
    W,
    T,
}

fn load(path: &Path) -> Result<(ExperimentConfig, SweepSpec, RibbonGeometry)> {
    let cfg = ExperimentConfig::load(path)?;
    let spec = SweepSpec::from_config(&cfg)?;
    let geom = spec.geometry.build()?;
    Ok((cfg, spec, geom))
}

fn deficits(path: &Path, samples: usize) -> Result<String> {
    let (_, _, geom) = load(path)?;
    if samples < 2 {
        bail!("need at least 2 samples");
    }
    let mut s = String::from("x1,gauss,codazzi_1,codazzi_2\n");
    for i in 0..samples {
        let x = geom.length * i as f64 / (samples - 1) as f64;
        let [c1, c2] = geom.codazzi_deficit(x);
        writeln!(s, "{x},{},{c1},{c2}", geom.gauss_deficit(x))?;
    }
    Ok(s)
}

fn parse_matrix(text: &str) -> Result<Matrix2<f64>> {
    let v: Vec<f64> = text.split(',').map(|x| x.trim().parse::<f64>()).collect::<std::result::Result<_, _>>()?;
    if v.len() != 3 {
        bail!("expected l,m,n");
    }
    Ok(Matrix2::new(v[0], v[1], v[1], v[2]))
}

fn limit_energy(path: &Path, functional: Functional, m: Option<&str>) -> Result<String> {
    let (_, spec, geom) = load(path)?;
    let forms = FormField::isotropic(&spec.moduli);
    let state = spec.state.midline_state();
    let mut s = String::new();
    match functional {
        Functional::E0g => writeln!(s, "e0g = {:.12e}", e0_gauss(&geom, &forms, &state)?)?,
        Functional::E0c => writeln!(s, "e0c = {:.12e}", e0_codazzi(&geom, &forms, &state)?)?,
        Functional::Plate => {
            let c = spec.construction.unwrap_or(ConstructionKind::Ruled);
            s.push_str("w,plate\n");
            for &w in &spec.w {
                writeln!(s, "{w},{:.12e}", plate_value(&geom, &spec.moduli, c, &state, spec.delta, w)?)?;
            }
        }
        Functional::J => {
            let v = match m {
                Some(text) => {
                    let m = parse_matrix(text)?;
                    wide_j(&geom, &forms, &|_| m)?
                }
                None => wide_j(&geom, &forms, &|x| geom.ii0(x))?,
            };
            writeln!(s, "J = {v:.12e}")?;
        }
        Functional::MinJ => {
            let r = min_j(&geom, &forms)?;
            writeln!(s, "minJ = {:.12e}", r.value)?;
            if let Some(c) = r.gap_constant(&geom) {
                writeln!(s, "gap_constant = {c:.6e}")?;
            }
            for w in &r.warnings {
                writeln!(s, "warning: {w}")?;
            }
            s.push_str("x1,m11,m12,m22,f_min\n");
            for p in &r.samples {
                writeln!(s, "{},{:.12e},{:.12e},{:.12e},{:.12e}", p.x1, p.m[(0, 0)], p.m[(0, 1)], p.m[(1, 1)], p.value)?;
            }
        }
        Functional::I => {
            let r = codazzi_i(&geom, &forms, &state.alpha, &state.beta)?;
            writeln!(s, "I = {:.12e}\nminI = {:.12e}", r.value, r.minimum)?;
        }
    }
    Ok(s)
}

fn midline_csv(rows: &[(f64, Matrix2<f64>)]) -> String {
    let mut s = String::from("x1,ii11,ii12,ii22\n");
    for (x, m) in rows {
        let _ = writeln!(s, "{x},{:.12e},{:.12e},{:.12e}", m[(0, 0)], m[(0, 1)], m[(1, 1)]);
    }
    s
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn construct(path: &Path, object: Object, obj_out: &Path, w: Option<f64>, midline_out: Option<&Path>) -> Result<String> {
    let (_, spec, geom) = load(path)?;
    let w = w.unwrap_or(spec.w[0]);
    let [n1, n2] = spec.solver.grid;
    let grid = Grid2::new(n1, n2, geom.length, w)?;
    let ribbon = Arc::new(EuclideanRibbon::new(&geom));
    let order = spec.solver.reduced.order;
    let mut summary = String::new();
    let (mesh, midline) = match object {
        Object::Phi | Object::Ruled => {
            let f: SurfaceConfig = if let Object::Phi = object {
                sample_surface(&PhiSurface { ribbon, w }, grid)?
            } else {
                let st = spec.state.midline_state();
                let r = ruled_isometry(&geom, &st.alpha, &st.beta, w)?;
                writeln!(summary, "isometry_residual = {:.3e}", r.isometry_residual(64, 9)?)?;
                sample_surface(&r, grid)?
            };
            (Mesh::from_surface(&f), midline_second_form(&f, order)?)
        }
        Object::Psi => {
            if spec.regime == Regime::Plate {
                bail!("psi needs a thickness; use a narrow or wide regime");
            }
            let t = spec.thickness(w);
            let e = Energy3d::new(&geom, spec.moduli, t, w)?;
            let [a, b, c] = spec.solver.grid3;
            let u = sample_config(&PsiConfig { ribbon: e.ribbon.clone(), t, w }, Grid3::new(a, b, c, geom.length)?)?;
            let mid = midline_second_form(&sample_surface(&PhiSurface { ribbon, w }, grid)?, order)?;
            (Mesh::from_config_faces(&u), mid)
        }
        Object::AnsatzD | Object::AnsatzB => {
            let kind = if let Object::AnsatzD = object { AnsatzKind::D } else { AnsatzKind::B };
            let f = ansatz_surface(&geom, kind, w, spec.delta, n1, n2.max(5))?;
            writeln!(summary, "path_residual = {:.3e}", f.residual)?;
            let j = f.n2 / 2;
            let mut rows = Vec::new();
            for i in 2..f.n1 - 2 {
                rows.push((f.node(i, j).0, f.extracted_forms(i, j)?.1));
            }
            (Mesh::from_lattice(f.n1, f.n2, f.positions.clone(), false), rows)
        }
    };
    export_mesh(&mesh, obj_out)?;
    if let Some(p) = midline_out {
        write_file(p, &midline_csv(&midline))?;
    }
    writeln!(summary, "wrote {} vertices, {} faces to {}", mesh.vertices.len(), mesh.faces.len(), obj_out.display())?;
    Ok(summary)
}

fn minimize_cmd(path: &Path, w: Option<f64>, obj_out: Option<&Path>) -> Result<String> {
    let (_, spec, geom) = load(path)?;
    let w = w.unwrap_or(spec.w[0]);
    let t = spec.thickness(w);
    let solver = &spec.solver;
    let mut s = String::new();
    match spec.evaluator {
        EvaluatorKind::Reduced => {
            let inits = solver.inits.clone().unwrap_or_else(|| default_inits(&spec.regime));
            let run = minimize_reduced(&geom, t, w, solver, &inits, solver.seed, 0)?;
            let m = &run.minimization;
            writeln!(s, "w = {w}\nt = {t:.6e}\ninit = {:?}", run.init)?;
            writeln!(
                s,
                "energy = {:.12e}\nstretching = {:.12e}\nbending = {:.12e}",
                run.value.total, run.value.stretching, run.value.bending
            )?;
            writeln!(s, "converged = {}\niterations = {}\nstop = {}", m.converged, m.iterations, stop_label(m.reason))?;
            if let Some(p) = obj_out {
                export_mesh(&Mesh::from_surface(&run.surface), p)?;
            }
        }
        EvaluatorKind::Minimize3d => {
            let (u, m) = minimize_3d(&geom, spec.moduli, t, w, solver, solver.seed, 0)?;
            writeln!(s, "w = {w}\nt = {t:.6e}\nenergy = {:.12e}", m.energy)?;
            writeln!(s, "converged = {}\niterations = {}\nstop = {}", m.converged, m.iterations, stop_label(m.reason))?;
            if let Some(p) = obj_out {
                let [n1, n2, n3] = u.grid.n;
                let k = n3 / 2;
                let mid: Vec<Vector3<f64>> = (0..n1)
                    .flat_map(|i| (0..n2).map(move |j| (i, j)))
                    .map(|(i, j)| if n3 % 2 == 1 {
                        u.positions[u.grid.index(i, j, k)]
                    } else {
                        (u.positions[u.grid.index(i, j, k - 1)] + u.positions[u.grid.index(i, j, k)]) * 0.5
                    })
                    .collect();
                export_mesh(&Mesh::from_lattice(n1, n2, mid, false), p)?;
            }
        }
        e => bail!("minimize needs the reduced or minimize-3d evaluator, config has {e:?}"),
    }
    Ok(s)
}

fn sweep(path: &Path, out: Option<PathBuf>) -> Result<String> {
    let (_, mut spec, _) = load(path)?;
    if out.is_some() {
        spec.output = out;
    }
    let outcome = run_sweep_with_output(&spec)?;
    let records = &outcome.set.records;
    let mut s = records_to_csv(records)?;
    writeln!(s, "# spec_hash = {}, reused = {}", outcome.set.spec_hash, outcome.reused)?;
    for r in records.iter().filter(|r| r.is_failed()) {
        writeln!(s, "# failed at w = {}: {}", r.w, r.failure.as_deref().unwrap_or(""))?;
    }
    if records.len() >= 4 {
        let preds: &[Predictor] = if spec.regime == Regime::Plate { &[Predictor::W] } else { &[Predictor::W, Predictor::T] };
        for &p in preds {
            if let Ok(f) = fit_exponent(records, p) {
                writeln!(s, "# slope vs {p:?} = {:.4} +- {:.4} (R2 = {:.6})", f.slope, f.stderr, f.r2)?;
            }
        }
    }
    Ok(s)
}

fn fit(path: &Path, predictor: PredictorArg) -> Result<String> {
    let records = read_csv(path)?;
    let p = match predictor {
        PredictorArg::W => Predictor::W,
        PredictorArg::T => Predictor::T,
    };
    let f = fit_exponent(&records, p)?;
    let mut s = format!(
        "slope = {:.10}\nstderr = {:.3e}\nintercept = {:.10}\nr2 = {:.10}\npoints = {}\n",
        f.slope, f.stderr, f.intercept, f.r2, f.used
    );
    for w in &f.warnings {
        writeln!(s, "warning: {w}")?;
    }
    Ok(s)
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let out = match cli.command {
        Command::Deficits { config, samples } => deficits(&config, samples)?,
        Command::LimitEnergy { config, functional, m } => limit_energy(&config, functional, m.as_deref())?,
        Command::Construct { config, object, obj_out, w, midline_out } => {
            construct(&config, object, &obj_out, w, midline_out.as_deref())?
        }
        Command::Minimize { config, w, obj_out } => minimize_cmd(&config, w, obj_out.as_deref())?,
        Command::Sweep { config, out } => sweep(&config, out)?,
        Command::Fit { records, predictor } => fit(&records, predictor)?,
    };
    print!("{out}");
    Ok(())
}
