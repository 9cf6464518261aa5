//! CSV schemas. Every file has a one-line header.

use std::path::Path;

use anyhow::{Context, Result};
use qusense_core::correlators::{Corr4Grid, LagSeries, LagZero, ShotRecord};
use qusense_core::noise::NoisePath;
use qusense_core::planner::PlanPoint;
use qusense_core::spectra::Spectrum;
use serde::Deserialize;

use crate::config::bad;

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))
}

pub fn write_shots(path: &Path, rec: &ShotRecord) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["cycle", "slot", "label", "s"])?;
    for (cycle, slot, label, s) in rec.shots() {
        w.serialize((cycle, slot, label.name(), s))?;
    }
    w.flush()?;
    Ok(())
}

/// Rows `lag, t, value, stderr` from `first` on.
pub fn write_g2(path: &Path, series: &LagSeries, first: usize) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["lag", "t", "value", "stderr"])?;
    for n in first..series.values.len() {
        w.serialize((n, n as f64 * series.dt, series.values[n], series.stderr[n]))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_g4(path: &Path, grid: &Corr4Grid) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["u", "v", "w", "value", "stderr"])?;
    for (u, v, x) in grid.cells() {
        w.serialize((u, v, x, grid.get(u, v, x), grid.stderr_at(u, v, x)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_noise(path: &Path, p: &NoisePath) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["shot_index", "phi"])?;
    for (i, phi) in p.phases.iter().enumerate() {
        w.serialize((i, phi))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_spectrum(path: &Path, s: &Spectrum) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["omega", "re", "im", "abs", "stderr"])?;
    for ((omega, z), e) in s.omegas.iter().zip(&s.values).zip(&s.stderr) {
        w.serialize((omega, z.re, z.im, z.norm(), e))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_plan(path: &Path, points: &[PlanPoint]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record([
        "S_C",
        "gamma0",
        "order",
        "gammaM_opt",
        "T_opt",
        "feasible",
        "snr_bound",
    ])?;
    for p in points {
        w.serialize((
            p.s_c,
            p.gamma0,
            p.order.name(),
            p.gamma_m_opt,
            p.t_opt,
            p.feasible,
            p.snr_bound,
        ))?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Deserialize)]
struct G2Row {
    lag: usize,
    t: f64,
    value: f64,
    stderr: f64,
}

#[derive(Deserialize)]
struct G4Row {
    u: usize,
    v: usize,
    w: usize,
    value: f64,
    stderr: f64,
}

fn reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    csv::Reader::from_path(path).map_err(|e| bad(format!("cannot read {}: {e}", path.display())))
}

/// A series written by [`write_g2`]; a lag-0 row marks a model series.
pub fn read_g2(path: &Path) -> Result<LagSeries> {
    let rows: Vec<G2Row> = reader(path)?
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| bad(format!("{}: {e}", path.display())))?;
    let max_lag = rows
        .iter()
        .map(|r| r.lag)
        .max()
        .ok_or_else(|| bad(format!("{}: no rows", path.display())))?;
    let dt = rows
        .iter()
        .find(|r| r.lag > 0)
        .map(|r| r.t / r.lag as f64)
        .ok_or_else(|| bad(format!("{}: need a row with lag >= 1", path.display())))?;
    let mut values = vec![0.0; max_lag + 1];
    let mut stderr = vec![0.0; max_lag + 1];
    let mut has_zero = false;
    for r in &rows {
        values[r.lag] = r.value;
        stderr[r.lag] = r.stderr;
        has_zero |= r.lag == 0;
    }
    Ok(LagSeries {
        dt,
        values,
        stderr,
        lag_zero: if has_zero {
            LagZero::Model
        } else {
            LagZero::Absent
        },
    })
}

pub fn read_g4(path: &Path, dt: f64) -> Result<Corr4Grid> {
    let rows: Vec<G4Row> = reader(path)?
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| bad(format!("{}: {e}", path.display())))?;
    let n_f2 = rows.iter().map(|r| r.u.max(r.w)).max().unwrap_or(0);
    let n_f1 = rows.iter().map(|r| r.v).max().unwrap_or(0);
    if n_f2 == 0 || n_f1 == 0 || rows.len() != n_f2 * n_f1 * n_f2 || rows.iter().any(|r| r.u == 0 || r.v == 0 || r.w == 0) {
        return Err(bad(format!("{}: not a complete grid with lags >= 1", path.display())));
    }
    let mut grid = Corr4Grid::from_values(dt, n_f2, n_f1, vec![0.0; rows.len()]);
    for r in &rows {
        let i = grid.index(r.u, r.v, r.w);
        grid.values[i] = r.value;
        grid.stderr[i] = r.stderr;
    }
    Ok(grid)
}
