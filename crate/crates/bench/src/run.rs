//! Running presets and writing their artifacts.

use std::fs::{self, OpenOptions};
use std::path::{Path, PathBuf};
use std::time::Instant;

use pinn_core::training::train_once_on;
use pinn_core::RunRecord;
use serde::{Deserialize, Serialize};

use crate::checkpoint::Checkpoint;
use crate::config::ExperimentConfig;
use crate::error::{BenchError, Result};

/// Environment variable naming the output root.
pub const OUTPUT_ROOT_VAR: &str = "PINN_OUTPUT_ROOT";
pub const RESULTS_FILE: &str = "results.csv";

pub fn output_root() -> PathBuf {
    std::env::var_os(OUTPUT_ROOT_VAR).map_or_else(|| PathBuf::from("runs"), PathBuf::from)
}

/// One row of the results table, written with 17 significant digits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub preset: String,
    pub problem: String,
    pub model: String,
    pub risk: String,
    pub param_count: usize,
    pub depth: usize,
    pub width: usize,
    pub repeat: usize,
    pub init_seed: u64,
    pub sampling_seed: u64,
    pub epochs: usize,
    pub final_risk: String,
    pub final_fractional_error: String,
    pub min_fractional_error: String,
    pub diverged: bool,
    pub wall_time_secs: String,
}

pub fn fmt_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

pub fn parse_float(s: &str) -> f64 {
    s.trim().parse().unwrap_or(f64::NAN)
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub output_root: PathBuf,
    pub strict: bool,
    /// Repeats trained concurrently.
    pub jobs: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            output_root: output_root(),
            strict: false,
            jobs: 1,
        }
    }
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    preset: &'a str,
    init_seed: u64,
    sampling_seed: u64,
    repeats: usize,
    completed: Vec<usize>,
    status: String,
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| BenchError::io(path, e))
}

fn write_manifest(dir: &Path, m: &Manifest<'_>) -> Result<()> {
    let text = toml::to_string(m).map_err(|e| BenchError::Config(e.to_string()))?;
    write(&dir.join("manifest.toml"), &text)
}

/// `epoch,risk,fractional_error` for every epoch plus the final state.
pub fn write_trace(path: &Path, rec: &RunRecord) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| BenchError::csv(path, e))?;
    let err = |e: csv::Error| BenchError::csv(path, e);
    w.write_record(["epoch", "risk", "fractional_error"]).map_err(err)?;
    let mut errors = rec.error_trace.iter().peekable();
    for (epoch, r) in rec.risk_trace.iter().enumerate() {
        let fe = match errors.peek() {
            Some((e, v)) if *e == epoch => {
                let v = *v;
                errors.next();
                fmt_float(v)
            }
            _ => String::new(),
        };
        w.write_record([epoch.to_string(), fmt_float(*r), fe]).map_err(err)?;
    }
    if rec.diverged_at.is_none() {
        let last = rec.risk_trace.len();
        w.write_record([
            last.to_string(),
            fmt_float(rec.final_risk),
            fmt_float(rec.final_fractional_error),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| BenchError::io(path, e))
}

/// Appends rows to the results table, writing the header for a new file.
pub fn append_results(path: &Path, rows: &[ResultRow]) -> Result<()> {
    let exists = path.exists();
    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| BenchError::io(path, e))?;
    let mut w = csv::WriterBuilder::new().has_headers(!exists).from_writer(file);
    for r in rows {
        w.serialize(r).map_err(|e| BenchError::csv(path, e))?;
    }
    w.flush().map_err(|e| BenchError::io(path, e))
}

pub fn read_results(path: &Path) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| BenchError::csv(path, e))?;
    r.deserialize().map(|row| row.map_err(|e| BenchError::csv(path, e))).collect()
}

/// Trains every repeat of `cfg`, writes traces, checkpoints and the
/// manifest under `<root>/<name>/`, and appends to `<root>/results.csv`.
pub fn run_config(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Vec<ResultRow>> {
    let exp = cfg.experiment()?;
    let model = exp.build_model()?;
    let mesh = exp.test_mesh(&model.problem)?;
    let name = cfg.name();
    let root = cfg.output_dir.clone().unwrap_or_else(|| opts.output_root.clone());
    let dir = root.join(&name);
    fs::create_dir_all(&dir).map_err(|e| BenchError::io(&dir, e))?;
    write(&dir.join("config.toml"), &cfg.to_toml()?)?;
    let mut manifest = Manifest {
        preset: &name,
        init_seed: exp.train.init_seed,
        sampling_seed: exp.train.sampling_seed,
        repeats: exp.train.repeats,
        completed: Vec::new(),
        status: "running".into(),
    };
    write_manifest(&dir, &manifest)?;

    let repeats: Vec<usize> = (0..exp.train.repeats).collect();
    let jobs = opts.jobs.max(1);
    let mut records = Vec::with_capacity(repeats.len());
    for chunk in repeats.chunks(jobs) {
        let done: Vec<Result<(RunRecord, f64)>> = std::thread::scope(|s| {
            let handles: Vec<_> = chunk
                .iter()
                .map(|&r| {
                    let (exp, mesh) = (&exp, &mesh);
                    s.spawn(move || {
                        let start = Instant::now();
                        let rec = train_once_on(exp, r, mesh, |_, _| {})?;
                        Ok((rec, start.elapsed().as_secs_f64()))
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().unwrap_or_else(|p| std::panic::resume_unwind(p)))
                .collect()
        });
        for res in done {
            let (mut rec, secs) = match res {
                Ok(v) => v,
                Err(e) => {
                    manifest.status = format!("failed: {e}");
                    write_manifest(&dir, &manifest)?;
                    return Err(e);
                }
            };
            rec.wall_time_secs = Some(secs);
            let rdir = dir.join(format!("repeat_{}", rec.repeat));
            let persisted = fs::create_dir_all(&rdir)
                .map_err(|e| BenchError::io(&rdir, e))
                .and_then(|_| write_trace(&rdir.join("trace.csv"), &rec))
                .and_then(|_| {
                    Checkpoint {
                        preset: name.clone(),
                        repeat: rec.repeat,
                        init_seed: exp.train.init_seed,
                        sampling_seed: exp.train.sampling_seed,
                        epochs: rec.risk_trace.len(),
                        problem: exp.problem,
                        model: exp.model,
                        q_blend: model.q_blend,
                        net: exp.net,
                        params: rec.final_params.clone(),
                    }
                    .save(&rdir.join("checkpoint.toml"))
                });
            if let Err(e) = persisted {
                manifest.status = format!("aborted: {e}");
                // best effort: the manifest may live on the failing disk too
                let _ = write_manifest(&dir, &manifest);
                return Err(e);
            }
            manifest.completed.push(rec.repeat);
            write_manifest(&dir, &manifest)?;
            records.push(rec);
        }
    }

    let rows: Vec<ResultRow> = records
        .iter()
        .map(|rec| ResultRow {
            preset: name.clone(),
            problem: model.problem.label(),
            model: exp.model.label(),
            risk: exp.risk.family.label().to_string(),
            param_count: rec.param_count,
            depth: rec.net.depth,
            width: rec.net.width,
            repeat: rec.repeat,
            init_seed: exp.train.init_seed,
            sampling_seed: exp.train.sampling_seed,
            epochs: rec.risk_trace.len(),
            final_risk: fmt_float(rec.final_risk),
            final_fractional_error: fmt_float(rec.final_fractional_error),
            min_fractional_error: fmt_float(rec.min_fractional_error),
            diverged: rec.diverged_at.is_some(),
            wall_time_secs: fmt_float(rec.wall_time_secs.unwrap_or(f64::NAN)),
        })
        .collect();
    append_results(&root.join(RESULTS_FILE), &rows)?;
    manifest.status = "complete".into();
    write_manifest(&dir, &manifest)?;
    let diverged = rows.iter().filter(|r| r.diverged).count();
    if opts.strict && diverged > 0 {
        return Err(BenchError::Diverged(diverged));
    }
    Ok(rows)
}
