//! Diagnostics CSV and raw field snapshots.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use alphaflow_core::{DiagnosticRecord, Error as CoreError, PolarGrid, Recorder, SimState};
use serde::Serialize;

use crate::error::CliError;

pub const CSV_HEADER: &str = "t,gamma_1,gamma_1_recomputed,energy_h1_alpha,lp_norm_q,integral_q,l2_norm_u,h1_norm_u";

/// Seventeen significant digits.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn csv_row(r: &DiagnosticRecord) -> String {
    let opt = |v: Option<&f64>| v.map(|x| fmt_num(*x)).unwrap_or_default();
    [
        fmt_num(r.time),
        opt(r.gamma.first()),
        opt(r.gamma_recomputed.first()),
        fmt_num(r.energy_h1_alpha),
        fmt_num(r.lp_norm_q),
        fmt_num(r.integral_q),
        fmt_num(r.l2_norm_u),
        fmt_num(r.h1_norm_u),
    ]
    .join(",")
}

#[derive(Serialize)]
struct Sidecar<'a> {
    field: &'a str,
    time: f64,
    r_inner: f64,
    r_outer: f64,
    n_radial: usize,
    n_angular: usize,
    layout: &'a str,
}

/// Write one field as little-endian `f64` in radial-major order plus its JSON sidecar.
pub fn write_snapshot(
    dir: &Path,
    stem: &str,
    field: &str,
    time: f64,
    grid: &PolarGrid,
    values: &ndarray::Array2<f64>,
) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir)?;
    let bin = dir.join(format!("{stem}.bin"));
    let mut w = BufWriter::new(File::create(&bin)?);
    for v in values.iter() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    let side = Sidecar {
        field,
        time,
        r_inner: grid.r_inner(),
        r_outer: grid.r_outer(),
        n_radial: grid.n_radial(),
        n_angular: grid.n_angular(),
        layout: "radial_major",
    };
    let json = serde_json::to_string_pretty(&side).map_err(|e| CliError::Io(e.to_string()))?;
    fs::write(dir.join(format!("{stem}.json")), json + "\n")?;
    Ok(bin)
}

/// Read a snapshot written by [`write_snapshot`].
pub fn read_snapshot(bin: &Path) -> Result<(serde_json::Value, Vec<f64>), CliError> {
    let bytes = fs::read(bin)?;
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    let side = fs::read_to_string(bin.with_extension("json"))?;
    let meta = serde_json::from_str(&side).map_err(|e| CliError::Io(e.to_string()))?;
    Ok((meta, values))
}

/// Snapshot `q`, `u_r` and `u_theta` of a state.
pub fn snapshot_state(dir: &Path, index: usize, state: &SimState) -> Result<(), CliError> {
    let grid = state.q.grid();
    let fields = [
        ("q", state.q.values()),
        ("u_r", state.u_cache.radial()),
        ("u_theta", state.u_cache.angular()),
    ];
    for (name, values) in fields {
        write_snapshot(dir, &format!("{name}_{index:06}"), name, state.time, grid, values)?;
    }
    Ok(())
}

/// Streams diagnostics to CSV and writes snapshots at a time cadence.
pub struct RunWriter {
    csv: BufWriter<File>,
    snapshot_dir: PathBuf,
    snapshot_interval: Option<f64>,
    next_snapshot: f64,
    snapshots: usize,
    t_end: f64,
    pub records: Vec<DiagnosticRecord>,
    io_error: Option<String>,
}

impl RunWriter {
    pub fn create(dir: &Path, snapshot_interval: Option<f64>, t_end: f64) -> Result<Self, CliError> {
        fs::create_dir_all(dir)?;
        let mut csv = BufWriter::new(File::create(dir.join("diagnostics.csv"))?);
        writeln!(csv, "{CSV_HEADER}")?;
        Ok(Self {
            csv,
            snapshot_dir: dir.join("snapshots"),
            snapshot_interval,
            next_snapshot: 0.0,
            snapshots: 0,
            t_end,
            records: Vec::new(),
            io_error: None,
        })
    }

    fn write(&mut self, record: &DiagnosticRecord, state: &SimState) -> Result<(), CliError> {
        writeln!(self.csv, "{}", csv_row(record))?;
        let eps = 1e-12 * self.t_end.max(1.0);
        let due = state.time >= self.next_snapshot - eps || state.time >= self.t_end - eps;
        if due {
            snapshot_state(&self.snapshot_dir, self.snapshots, state)?;
            self.snapshots += 1;
            self.next_snapshot = match self.snapshot_interval {
                Some(d) => {
                    let mut n = self.next_snapshot;
                    while n <= state.time + eps {
                        n += d;
                    }
                    n
                }
                None => self.t_end,
            };
        }
        Ok(())
    }

    /// Flush and surface any IO failure seen while recording.
    pub fn finish(mut self) -> Result<Vec<DiagnosticRecord>, CliError> {
        if let Some(e) = self.io_error.take() {
            return Err(CliError::Io(e));
        }
        self.csv.flush()?;
        Ok(self.records)
    }
}

impl Recorder for RunWriter {
    fn record(&mut self, record: &DiagnosticRecord, state: &SimState) -> alphaflow_core::Result<()> {
        self.records.push(record.clone());
        self.write(record, state).map_err(|e| {
            let msg = e.to_string();
            self.io_error = Some(msg.clone());
            CoreError::Sink(msg)
        })
    }
}
