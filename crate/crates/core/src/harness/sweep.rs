use super::evaluate::evaluate_point;
use super::records::{read_json, write_csv, write_json, RecordSet, SweepRecord};
use super::spec::SweepSpec;
use crate::error::{Error, Result};
use rayon::prelude::*;

pub const CSV_NAME: &str = "records.csv";
pub const JSON_NAME: &str = "records.json";

#[derive(Clone, Debug)]
pub struct SweepOutcome {
    pub set: RecordSet,
    /// Number of records taken over from the previous set.
    pub reused: usize,
}

fn reusable<'a>(previous: Option<&'a RecordSet>, hash: &str, w: f64) -> Option<&'a SweepRecord> {
    let p = previous.filter(|p| p.spec_hash == hash)?;
    p.records.iter().find(|r| r.w.to_bits() == w.to_bits() && !r.is_failed())
}

/// Evaluates every sweep point, reusing matching records of `previous`. Points run in a pool
/// of `solver.workers` threads; records come back in the order of the w list (decreasing).
/// A failing point yields a flagged record.
pub fn run_sweep(spec: &SweepSpec, previous: Option<&RecordSet>) -> Result<SweepOutcome> {
    spec.validate()?;
    let hash = spec.hash();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.solver.workers)
        .build()
        .map_err(|e| Error::Numeric(format!("thread pool: {e}")))?;
    let seed = spec.solver.seed;
    let results: Vec<(SweepRecord, bool)> = pool.install(|| {
        (0..spec.w.len())
            .into_par_iter()
            .map(|i| {
                let w = spec.w[i];
                if let Some(r) = reusable(previous, &hash, w) {
                    return (r.clone(), true);
                }
                let t = spec.thickness(w);
                let rec = match evaluate_point(spec, i) {
                    Ok(e) => SweepRecord::new(t, w, e.energy, e.converged, e.iters, e.grid, seed),
                    Err(err) => {
                        log::warn!("sweep point w = {w} failed: {err}");
                        SweepRecord::failed(t, w, "-".into(), seed, err.to_string())
                    }
                };
                (rec, false)
            })
            .collect()
    });
    let reused = results.iter().filter(|r| r.1).count();
    let records = results.into_iter().map(|r| r.0).collect();
    Ok(SweepOutcome { set: RecordSet { spec_hash: hash, workers: spec.solver.workers, records }, reused })
}

/// [`run_sweep`] resuming from and writing to the spec's output directory, if any.
pub fn run_sweep_with_output(spec: &SweepSpec) -> Result<SweepOutcome> {
    let Some(dir) = &spec.output else { return run_sweep(spec, None) };
    let json = dir.join(JSON_NAME);
    let previous = if json.exists() { Some(read_json(&json)?) } else { None };
    let out = run_sweep(spec, previous.as_ref())?;
    write_csv(&out.set.records, dir.join(CSV_NAME))?;
    write_json(&out.set, &json)?;
    Ok(out)
}
