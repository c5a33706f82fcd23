//! Result files. Everything outside the `metadata` block is a pure function of
//! the configuration and seed.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use fracmax::grid::{Grid, Interval, MassSnap};
use fracmax::io::{sig17, write_columns};
use fracmax::maximizer::{AscentResult, ConcentrationReport, SweepRow};
use fracmax::operator::Operator;
use fracmax::solver::{SolveMethod, SolveReport};
use serde::Serialize;

use crate::config::RunConfig;
use crate::CliError;

pub const SCHEMA_VERSION: &str = "fracmax-result/1";

#[derive(Serialize)]
struct GridSummary {
    n: usize,
    #[serde(serialize_with = "sig17")]
    h: f64,
    #[serde(serialize_with = "sig17")]
    diam: f64,
    intervals: Vec<IntervalOut>,
    snapped: bool,
}

#[derive(Serialize)]
struct IntervalOut {
    #[serde(serialize_with = "sig17")]
    left: f64,
    #[serde(serialize_with = "sig17")]
    right: f64,
}

impl From<&Interval> for IntervalOut {
    fn from(i: &Interval) -> Self {
        IntervalOut {
            left: i.left,
            right: i.right,
        }
    }
}

impl GridSummary {
    fn new(grid: &Grid) -> Self {
        GridSummary {
            n: grid.len(),
            h: grid.h(),
            diam: grid.diam(),
            intervals: grid.intervals().iter().map(IntervalOut::from).collect(),
            snapped: grid.snap_report().iter().any(|r| r.moved()),
        }
    }
}

#[derive(Serialize)]
struct MassOut {
    k: usize,
    #[serde(serialize_with = "sig17")]
    beta_eff: f64,
    #[serde(serialize_with = "sig17")]
    discrepancy: f64,
}

impl From<&MassSnap> for MassOut {
    fn from(m: &MassSnap) -> Self {
        MassOut {
            k: m.k,
            beta_eff: m.beta_eff,
            discrepancy: m.discrepancy,
        }
    }
}

#[derive(Serialize)]
struct Metadata {
    timestamp_unix: u64,
    hostname: String,
    threads: Option<usize>,
    version: &'static str,
}

impl Metadata {
    fn now(threads: Option<usize>) -> Self {
        let hostname = fs::read_to_string("/etc/hostname")
            .map(|s| s.trim().to_string())
            .or_else(|_| std::env::var("HOSTNAME"))
            .unwrap_or_default();
        Metadata {
            timestamp_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
            hostname,
            threads,
            version: env!("CARGO_PKG_VERSION"),
        }
    }
}

#[derive(Serialize)]
struct Document<'a, R: Serialize> {
    schema_version: &'static str,
    command: &'static str,
    config: &'a RunConfig,
    grid: GridSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    mass: Option<MassOut>,
    result: &'a R,
    metadata: Metadata,
}

#[derive(Debug, Serialize)]
pub struct SolveSummary {
    pub method: SolveMethod,
    #[serde(serialize_with = "sig17")]
    pub energy: f64,
    #[serde(serialize_with = "sig17")]
    pub residual_inf: f64,
    pub iterations: usize,
    /// `u` interpolated at the midpoint of the domain hull.
    #[serde(serialize_with = "sig17")]
    pub u_mid: f64,
    #[serde(serialize_with = "sig17")]
    pub u_max: f64,
}

impl SolveSummary {
    pub fn new(grid: &Grid, f: &[f64], r: &SolveReport) -> Result<Self, CliError> {
        let paired: f64 = grid.h() * f.iter().zip(&r.u).map(|(a, b)| a * b).sum::<f64>();
        let ivs = grid.intervals();
        let mid = 0.5 * (ivs[0].left + ivs[ivs.len() - 1].right);
        Ok(SolveSummary {
            method: r.method,
            energy: paired,
            residual_inf: r.residual_inf,
            iterations: r.iterations,
            u_mid: interpolate(grid.centers(), &r.u, mid),
            u_max: r.u.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    }
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if xs.len() == 1 || x <= xs[0] {
        return ys[0];
    }
    for i in 0..xs.len() - 1 {
        if x <= xs[i + 1] {
            let t = (x - xs[i]) / (xs[i + 1] - xs[i]);
            return ys[i] + t * (ys[i + 1] - ys[i]);
        }
    }
    ys[ys.len() - 1]
}

#[derive(Serialize)]
pub struct SweepResult {
    pub k: usize,
    pub rows: Vec<SweepRow>,
}

pub struct Outputs {
    dir: PathBuf,
    threads: Option<usize>,
}

impl Outputs {
    pub fn new(dir: &Path, threads: Option<usize>) -> Result<Self, CliError> {
        fs::create_dir_all(dir)?;
        Ok(Outputs {
            dir: dir.to_path_buf(),
            threads,
        })
    }

    fn create(&self, name: &str) -> Result<BufWriter<File>, CliError> {
        Ok(BufWriter::new(File::create(self.dir.join(name))?))
    }

    fn write_json<R: Serialize>(
        &self,
        command: &'static str,
        cfg: &RunConfig,
        grid: &Grid,
        mass: Option<&MassSnap>,
        result: &R,
    ) -> Result<(), CliError> {
        let doc = Document {
            schema_version: SCHEMA_VERSION,
            command,
            config: cfg,
            grid: GridSummary::new(grid),
            mass: mass.map(MassOut::from),
            result,
            metadata: Metadata::now(self.threads),
        };
        let mut w = self.create("result.json")?;
        serde_json::to_writer_pretty(&mut w, &doc)
            .map_err(|e| CliError::Failed(format!("serializing result.json: {e}")))?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }

    pub fn write_matrix(&self, op: &Operator) -> Result<(), CliError> {
        let mut w = self.create("matrix.csv")?;
        op.write_csv(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn write_solve(
        &self,
        cfg: &RunConfig,
        grid: &Grid,
        summary: &SolveSummary,
        u: &[f64],
    ) -> Result<(), CliError> {
        let mut w = self.create("u.csv")?;
        write_columns(&mut w, &["x", "u"], &[grid.centers(), u])?;
        w.flush()?;
        self.write_json("solve", cfg, grid, None, summary)
    }

    fn write_fields(&self, grid: &Grid, r: &AscentResult) -> Result<(), CliError> {
        let mut w = self.create("u.csv")?;
        write_columns(&mut w, &["x", "u"], &[grid.centers(), &r.u_hat])?;
        w.flush()?;
        let mut w = self.create("f.csv")?;
        write_columns(&mut w, &["x", "f"], &[grid.centers(), &r.f_hat])?;
        w.flush()?;
        let mut w = self.create("trace.csv")?;
        writeln!(w, "iter,energy")?;
        for (i, e) in r.trace.iter().enumerate() {
            writeln!(w, "{},{}", i, fracmax::io::fmt_f64(*e))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_maximizer(
        &self,
        command: &'static str,
        cfg: &RunConfig,
        grid: &Grid,
        mass: &MassSnap,
        r: &AscentResult,
    ) -> Result<(), CliError> {
        self.write_fields(grid, r)?;
        self.write_json(command, cfg, grid, Some(mass), r)
    }

    pub fn write_twoball(
        &self,
        cfg: &RunConfig,
        grid: &Grid,
        mass: &MassSnap,
        report: &ConcentrationReport,
    ) -> Result<(), CliError> {
        self.write_fields(grid, &report.result)?;
        self.write_json("twoball", cfg, grid, Some(mass), report)
    }

    pub fn write_sweep(
        &self,
        cfg: &RunConfig,
        grid: &Grid,
        result: &SweepResult,
    ) -> Result<(), CliError> {
        let mut w = self.create("sweep.csv")?;
        writeln!(
            w,
            "s,k,energy,alpha_mid,iterations,residual,tie_cells,error"
        )?;
        let num = |x: Option<f64>| x.map(fracmax::io::fmt_f64).unwrap_or_default();
        for row in &result.rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                fracmax::io::fmt_f64(row.s),
                row.k.map(|k| k.to_string()).unwrap_or_default(),
                num(row.energy),
                num(row.alpha_mid),
                row.iterations.map(|k| k.to_string()).unwrap_or_default(),
                num(row.residual),
                row.tie_cells.map(|k| k.to_string()).unwrap_or_default(),
                row.error.as_deref().unwrap_or("").replace(',', ";"),
            )?;
        }
        w.flush()?;
        self.write_json("sweep", cfg, grid, None, result)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation() {
        let xs = [-0.5, 0.5, 1.5];
        let ys = [1.0, 3.0, 0.0];
        assert_eq!(interpolate(&xs, &ys, 0.0), 2.0);
        assert_eq!(interpolate(&xs, &ys, -2.0), 1.0);
        assert_eq!(interpolate(&xs, &ys, 9.0), 0.0);
    }
}
