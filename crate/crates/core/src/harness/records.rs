use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// One (t, w, energy) observation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub t: f64,
    pub w: f64,
    #[serde(with = "nan_as_null")]
    pub energy: f64,
    #[serde(with = "nan_as_null")]
    pub e_div_t2: f64,
    #[serde(with = "nan_as_null")]
    pub e_div_w4: f64,
    #[serde(with = "nan_as_null")]
    pub e_div_t2w2: f64,
    pub converged: bool,
    pub iters: usize,
    pub grid: String,
    pub seed: u64,
    /// Set when the evaluator failed; energy is NaN then.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

impl SweepRecord {
    /// Record with the normalized energies filled in. With t = 0 (plate mode) the energy is
    /// Ẽ_w itself, e_div_t2 repeats it and e_div_t2w2 is E / w^2.
    pub fn new(t: f64, w: f64, energy: f64, converged: bool, iters: usize, grid: String, seed: u64) -> Self {
        let t2 = if t > 0.0 { t * t } else { 1.0 };
        SweepRecord {
            t,
            w,
            energy,
            e_div_t2: energy / t2,
            e_div_w4: energy / w.powi(4),
            e_div_t2w2: energy / (t2 * w * w),
            converged,
            iters,
            grid,
            seed,
            failure: None,
        }
    }

    pub fn failed(t: f64, w: f64, grid: String, seed: u64, message: String) -> Self {
        let mut r = SweepRecord::new(t, w, f64::NAN, false, 0, grid, seed);
        r.failure = Some(message);
        r
    }

    pub fn is_failed(&self) -> bool {
        self.failure.is_some()
    }
}

/// JSON has no NaN; failed records store null instead.
mod nan_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_nan() {
            s.serialize_none()
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

/// Records plus the hash of the spec that produced them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecordSet {
    pub spec_hash: String,
    pub workers: usize,
    pub records: Vec<SweepRecord>,
}

#[derive(Serialize, Deserialize)]
struct CsvRow {
    t: f64,
    w: f64,
    energy: f64,
    e_div_t2: f64,
    e_div_w4: f64,
    e_div_t2w2: f64,
    converged: bool,
    iters: usize,
    grid: String,
    seed: u64,
}

fn nonempty(records: &[SweepRecord]) -> Result<()> {
    if records.is_empty() {
        return Err(Error::Domain("no records to export".into()));
    }
    Ok(())
}

pub fn records_to_csv(records: &[SweepRecord]) -> Result<String> {
    nonempty(records)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(CsvRow {
            t: r.t,
            w: r.w,
            energy: r.energy,
            e_div_t2: r.e_div_t2,
            e_div_w4: r.e_div_w4,
            e_div_t2w2: r.e_div_t2w2,
            converged: r.converged,
            iters: r.iters,
            grid: r.grid.clone(),
            seed: r.seed,
        })
        .map_err(|e| Error::Numeric(format!("csv: {e}")))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Numeric(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn records_from_csv(text: &str) -> Result<Vec<SweepRecord>> {
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let header = rd.headers().map_err(|e| Error::Config(format!("csv: {e}")))?.clone();
    let expect = ["t", "w", "energy", "e_div_t2", "e_div_w4", "e_div_t2w2", "converged", "iters", "grid", "seed"];
    if header.iter().ne(expect.iter().copied()) {
        return Err(Error::Config(format!("unexpected csv header {:?}", header.iter().collect::<Vec<_>>())));
    }
    rd.deserialize::<CsvRow>()
        .map(|row| {
            let r = row.map_err(|e| Error::Config(format!("csv: {e}")))?;
            Ok(SweepRecord {
                t: r.t,
                w: r.w,
                energy: r.energy,
                e_div_t2: r.e_div_t2,
                e_div_w4: r.e_div_w4,
                e_div_t2w2: r.e_div_t2w2,
                converged: r.converged,
                iters: r.iters,
                grid: r.grid,
                seed: r.seed,
                failure: None,
            })
        })
        .collect()
}

pub fn records_to_json(set: &RecordSet) -> Result<String> {
    nonempty(&set.records)?;
    serde_json::to_string_pretty(set).map_err(|e| Error::Numeric(format!("json: {e}")))
}

pub fn records_from_json(text: &str) -> Result<RecordSet> {
    serde_json::from_str(text).map_err(|e| Error::Config(format!("json: {e}")))
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn write_csv(records: &[SweepRecord], path: impl AsRef<Path>) -> Result<()> {
    write(path.as_ref(), &records_to_csv(records)?)
}

pub fn write_json(set: &RecordSet, path: impl AsRef<Path>) -> Result<()> {
    write(path.as_ref(), &records_to_json(set)?)
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<SweepRecord>> {
    let text = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
    records_from_csv(&text)
}

pub fn read_json(path: impl AsRef<Path>) -> Result<RecordSet> {
    let text = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
    records_from_json(&text)
}
