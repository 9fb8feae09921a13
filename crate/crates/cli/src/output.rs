//! CSV writers and the JSON run manifest.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a file
//! read back reproduces the values exactly.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use nlwave_core::experiments::{ConvergenceReport, EnergyRecord, SweepResult};
use nlwave_core::kernels::CoercivityCertificate;
use nlwave_core::solver::{Snapshot, Trajectory};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

fn writer(path: &Path) -> Result<csv::Writer<fs::File>, CliError> {
    let file = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn finish(mut w: csv::Writer<fs::File>, path: &Path) -> Result<(), CliError> {
    w.flush().map_err(|e| CliError::io(path, e))
}

fn wrap(path: &Path) -> impl Fn(csv::Error) -> CliError + '_ {
    move |e| CliError::io(path, std::io::Error::other(e.to_string()))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Columns `t, mode_1_x, mode_1_v, mode_1_w, mode_2_x, ...`.
pub fn write_trajectory(traj: &Trajectory, modes: usize, path: &Path) -> Result<(), CliError> {
    let mut w = writer(path)?;
    let mut header = vec!["t".to_string()];
    for k in 1..=modes {
        header.extend([format!("mode_{k}_x"), format!("mode_{k}_v"), format!("mode_{k}_w")]);
    }
    w.write_record(&header).map_err(wrap(path))?;
    for (t, s) in traj.times.iter().zip(&traj.snapshots) {
        let mut row = vec![t.to_string()];
        for k in 0..modes {
            row.extend([s.x[k].to_string(), s.v[k].to_string(), s.w[k].to_string()]);
        }
        w.write_record(&row).map_err(wrap(path))?;
    }
    finish(w, path)
}

/// Reads a file written by [`write_trajectory`].
pub fn read_trajectory(path: &Path) -> Result<Trajectory, CliError> {
    let mut r = csv::Reader::from_path(path).map_err(wrap(path))?;
    let columns = r.headers().map_err(wrap(path))?.len();
    if columns == 0 || (columns - 1) % 3 != 0 {
        return Err(CliError::io(path, std::io::Error::other(format!("{columns} columns is not a trajectory"))));
    }
    let modes = (columns - 1) / 3;
    let mut times = Vec::new();
    let mut snapshots = Vec::new();
    for record in r.records() {
        let record = record.map_err(wrap(path))?;
        let values: Vec<f64> = record
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| CliError::io(path, std::io::Error::other(e.to_string())))?;
        times.push(values[0]);
        let mut s = Snapshot::zeros(modes);
        for k in 0..modes {
            s.x[k] = values[1 + 3 * k];
            s.v[k] = values[2 + 3 * k];
            s.w[k] = values[3 + 3 * k];
        }
        snapshots.push(s);
    }
    Ok(Trajectory::new(times, snapshots))
}

pub fn write_sweep(sweep: &SweepResult, path: &Path) -> Result<(), CliError> {
    let mut w = writer(path)?;
    w.write_record(["tau", "error", "peak_energy", "iterations", "failure"]).map_err(wrap(path))?;
    for e in &sweep.entries {
        w.write_record([
            e.tau.to_string(),
            opt(e.error),
            opt(e.peak_energy),
            e.iterations.to_string(),
            e.failure.clone().unwrap_or_default(),
        ])
        .map_err(wrap(path))?;
    }
    finish(w, path)
}

pub fn write_energy(records: &[EnergyRecord], path: &Path) -> Result<(), CliError> {
    let mut w = writer(path)?;
    w.write_record([
        "t",
        "lap_u",
        "lap_ut",
        "grad_utt_cumulative",
        "phi_proxy",
        "psi_proxy",
        "wave_energy",
    ])
    .map_err(wrap(path))?;
    for r in records {
        w.write_record(
            [r.time, r.lap_u, r.lap_ut, r.grad_utt_cumulative, r.phi_proxy, r.psi_proxy, r.wave_energy]
                .map(|v| v.to_string()),
        )
        .map_err(wrap(path))?;
    }
    finish(w, path)
}

pub fn write_convergence(report: &ConvergenceReport, path: &Path) -> Result<(), CliError> {
    let mut w = writer(path)?;
    w.write_record(["h", "error", "observed_order"]).map_err(wrap(path))?;
    for (i, (h, err)) in report.rows.iter().enumerate() {
        // local order against the previous row
        let local = (i > 0 && *err > 0.0 && report.rows[i - 1].1 > 0.0)
            .then(|| (report.rows[i - 1].1 / err).ln() / (report.rows[i - 1].0 / h).ln());
        w.write_record([h.to_string(), err.to_string(), opt(local)]).map_err(wrap(path))?;
    }
    finish(w, path)
}

/// One row per assumption; skipped assumptions carry the reason.
pub fn write_certificates(
    rows: &[(String, Result<CoercivityCertificate, String>)],
    path: &Path,
) -> Result<(), CliError> {
    let mut w = writer(path)?;
    w.write_record([
        "assumption",
        "status",
        "trials",
        "worst_margin",
        "worst_witness_seed",
        "empirical_constant",
        "reference_constant",
        "note",
    ])
    .map_err(wrap(path))?;
    for (name, row) in rows {
        let record = match row {
            Ok(c) => [
                name.clone(),
                if c.pass { "pass" } else { "fail" }.to_string(),
                c.trials.to_string(),
                c.worst_margin.to_string(),
                c.worst_witness.seed.to_string(),
                c.empirical_constant.to_string(),
                opt(c.reference_constant),
                String::new(),
            ],
            Err(reason) => [
                name.clone(),
                "skipped".into(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                reason.clone(),
            ],
        };
        w.write_record(&record).map_err(wrap(path))?;
    }
    finish(w, path)
}

/// Sidecar describing one invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    /// Git blob hash of the configuration text.
    pub config_hash: String,
    pub config: String,
    pub wall_time_seconds: f64,
    pub seed: Option<u64>,
    pub status: String,
    pub outputs: Vec<String>,
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub summary: serde_json::Value,
}

/// `sha1("blob <len>\0" + text)`, as `git hash-object` computes it.
pub fn config_hash(text: &str) -> String {
    let mut h = sha1_smol::Sha1::new();
    h.update(format!("blob {}\0", text.len()).as_bytes());
    h.update(text.as_bytes());
    h.digest().to_string()
}

impl RunManifest {
    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut file = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        writeln!(file, "{text}").map_err(|e| CliError::io(path, e))
    }
}

/// Creates the output directory if needed.
pub fn prepare_dir(dir: &Path) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    Ok(dir.to_path_buf())
}
