use std::path::{Path, PathBuf};

use anyhow::Result;
use qusense_core::checks::{self, Fault, Report};
use qusense_core::correlators::{
    closedform_g2_series, closedform_g4_grid, estimate_g2, estimate_g4, exact_g2_series,
    exact_g4_grid, mc_run, Corr4Grid, LagSeries, McConfig, Pattern, PhaseSource,
};
use qusense_core::noise::{sample_phases, NoiseModel, NoisePath};
use qusense_core::planner::{gamma_m_max_default, log_grid, plan_map, Order};
use qusense_core::spectra::{
    dft1, dft3, dft3_stderr, frequency_grid, optimal_n_f, optimal_n_f4, resonance_signal_2nd,
    resonance_signal_2nd_discrete, resonance_signal_4th, Complex64, Spectrum,
};
use qusense_core::SimParams;
use serde_json::{json, Value};

use crate::config::{bad, RunConfig, SimulateSpec, Source};
use crate::csvio;

/// What a command produced, for the JSON summary.
pub struct Outcome {
    pub outputs: Vec<String>,
    pub details: Value,
}

fn file(out: &Path, name: &str, outputs: &mut Vec<String>) -> PathBuf {
    outputs.push(name.to_string());
    out.join(name)
}

pub fn validate(fault: Fault, out: Option<&Path>) -> Result<(Report, Vec<String>)> {
    let report = checks::run(fault);
    let mut outputs = Vec::new();
    if let Some(dir) = out {
        let path = file(dir, "validate.json", &mut outputs);
        std::fs::write(path, serde_json::to_string_pretty(&report)?)?;
    }
    Ok((report, outputs))
}

fn default_max_lag() -> usize {
    50
}

pub fn simulate(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let spec: &SimulateSpec = cfg.simulate.as_ref().ok_or_else(|| bad("simulate: missing"))?;
    let params = cfg.params()?;
    let mc = McConfig {
        pattern: spec.pattern,
        cycles: spec.cycles,
        segment_cycles: spec.segment_cycles,
        substeps: spec.substeps,
        mode: cfg.mode,
    };
    let rec = mc_run(&mc, &params, &cfg.noise, cfg.seed, cfg.shards)?;
    let mut outputs = Vec::new();
    if spec.write_shots {
        csvio::write_shots(&file(out, "shots.csv", &mut outputs), &rec)?;
    }
    let details = match spec.pattern {
        Pattern::Xy => {
            let max_lag = spec.max_lag.unwrap_or_else(default_max_lag);
            let g = estimate_g2(&rec, max_lag, params.tau)?;
            csvio::write_g2(&file(out, "g2.csv", &mut outputs), &g, 1)?;
            json!({ "max_lag": max_lag })
        }
        Pattern::XyXz => {
            let (d2, d1) = optimal_n_f4(&params);
            let (n_f2, n_f1) = (spec.n_f2.unwrap_or(d2), spec.n_f1.unwrap_or(d1));
            let g = estimate_g4(&rec, n_f2, n_f1, params.tau)?;
            csvio::write_g4(&file(out, "g4.csv", &mut outputs), &g)?;
            let worst = g
                .values
                .iter()
                .zip(&g.stderr)
                .map(|(v, e)| if *e > 0.0 { v.abs() / e } else { 0.0 })
                .fold(0.0, f64::max);
            json!({ "n_f2": n_f2, "n_f1": n_f1, "max_abs_z": worst })
        }
    };
    if let Some(n) = spec.noise_path_shots {
        let path = sample_phases(&cfg.noise, n, params.tau, cfg.seed)?;
        csvio::write_noise(&file(out, "noise.csv", &mut outputs), &path)?;
    }
    Ok(Outcome {
        outputs,
        details: json!({
            "cycles": rec.cycles(),
            "segments": rec.segments.len(),
            "estimates": details,
        }),
    })
}

fn noise_source(noise: &NoiseModel, n: usize, tau: f64, seed: u64) -> Result<Option<NoisePath>> {
    if noise.is_gaussian() {
        Ok(None)
    } else {
        Ok(Some(sample_phases(noise, n, tau, seed)?))
    }
}

pub fn exact(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let spec = cfg.exact.as_ref().ok_or_else(|| bad("exact: missing"))?;
    let params = cfg.params()?;
    if spec.max_lag.is_none() && spec.n_f2.is_none() && spec.n_f1.is_none() {
        return Err(bad("exact: give max_lag and/or n_f2, n_f1"));
    }
    let mut outputs = Vec::new();
    let dt = params.tau;
    let path = match spec.source {
        Source::Exact => noise_source(&cfg.noise, spec.path_shots, params.tau, cfg.seed)?,
        Source::ClosedForm => None,
    };
    let phases = match &path {
        Some(p) => PhaseSource::Path(p),
        None => PhaseSource::Model(&cfg.noise),
    };
    if let Some(max_lag) = spec.max_lag {
        let path = file(out, "g2.csv", &mut outputs);
        match spec.source {
            Source::Exact => {
                let tail = exact_g2_series(max_lag, &params, phases, cfg.mode)?;
                csvio::write_g2(&path, &LagSeries::from_lag_one(dt, tail), 1)?;
            }
            Source::ClosedForm => {
                let s = closedform_g2_series(max_lag, &params, &cfg.noise);
                csvio::write_g2(&path, &LagSeries::from_model(dt, s), 0)?;
            }
        }
    }
    if spec.n_f2.is_some() || spec.n_f1.is_some() {
        let (d2, d1) = optimal_n_f4(&params);
        let (n_f2, n_f1) = (spec.n_f2.unwrap_or(d2), spec.n_f1.unwrap_or(d1));
        let values = match spec.source {
            Source::Exact => exact_g4_grid(n_f2, n_f1, &params, phases, cfg.mode)?,
            Source::ClosedForm => closedform_g4_grid(n_f2, n_f1, &params, &cfg.noise),
        };
        let grid = Corr4Grid::from_values(2.0 * dt, n_f2, n_f1, values);
        csvio::write_g4(&file(out, "g4.csv", &mut outputs), &grid)?;
    }
    Ok(Outcome {
        outputs,
        details: json!({ "source": spec.source }),
    })
}

fn crop(grid: Corr4Grid, n_f2: usize, n_f1: usize) -> Result<Corr4Grid> {
    if n_f2 > grid.n_f2 || n_f1 > grid.n_f1 {
        return Err(bad(format!(
            "spectrum: requested grid {n_f2}x{n_f1}x{n_f2} exceeds input {}x{}x{}",
            grid.n_f2, grid.n_f1, grid.n_f2
        )));
    }
    let mut c = Corr4Grid::from_values(grid.dt, n_f2, n_f1, vec![0.0; n_f2 * n_f1 * n_f2]);
    for (u, v, w) in c.cells().collect::<Vec<_>>() {
        let (i, j) = (c.index(u, v, w), grid.index(u, v, w));
        c.values[i] = grid.values[j];
        c.stderr[i] = grid.stderr[j];
    }
    Ok(c)
}

fn resonance(z: Complex64, err: f64, model: Option<f64>) -> Value {
    json!({ "re": z.re, "im": z.im, "abs": z.norm(), "stderr": err, "model": model })
}

pub fn spectrum(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let spec = cfg.spectrum.as_ref().ok_or_else(|| bad("spectrum: missing"))?;
    let params: Option<SimParams> = match cfg.params {
        Some(_) => Some(cfg.params()?),
        None => None,
    };
    let l_c = params.map(|p| cfg.noise.coherence_factor(p.tau));
    let mut outputs = Vec::new();
    let (spectrum, report): (Spectrum, Value) = match spec.order {
        Order::Second => {
            let series = match &spec.input {
                Some(path) => csvio::read_g2(path)?,
                None => {
                    let p = params.ok_or_else(|| bad("params: missing (needed without spectrum.input)"))?;
                    let n = spec.n_f.unwrap_or_else(|| optimal_n_f(&p));
                    LagSeries::from_model(p.tau, closedform_g2_series(n, &p, &cfg.noise))
                }
            };
            let n_f = spec
                .n_f
                .or_else(|| params.map(|p| optimal_n_f(&p)))
                .unwrap_or(series.values.len());
            let n_f = n_f.min(series.values.len());
            let s = dft1(&series, n_f, &frequency_grid(n_f, series.dt, spec.oversample))?;
            let report = match (params, l_c) {
                (Some(p), Some(l)) => {
                    let at = dft1(&series, n_f, &[p.omega0])?;
                    let mut r = resonance(at.values[0], at.stderr[0], Some(resonance_signal_2nd_discrete(&p, l)));
                    r["model_continuum"] = json!(resonance_signal_2nd(&p, l));
                    r["omega0"] = json!(p.omega0);
                    r
                }
                _ => Value::Null,
            };
            (s, json!({ "n_f": n_f, "resonance": report }))
        }
        Order::Fourth => {
            let p = params.ok_or_else(|| bad("params: missing (fourth order needs tau and omega0)"))?;
            let dt = 2.0 * p.tau;
            let (d2, d1) = optimal_n_f4(&p);
            let (n_f2, n_f1) = (spec.n_f2.unwrap_or(d2), spec.n_f1.unwrap_or(d1));
            let grid = match &spec.input {
                Some(path) => crop(csvio::read_g4(path, dt)?, n_f2, n_f1)?,
                None => Corr4Grid::from_values(dt, n_f2, n_f1, closedform_g4_grid(n_f2, n_f1, &p, &cfg.noise)),
            };
            let err = dft3_stderr(&grid);
            let omegas = frequency_grid(grid.n_f2, dt, spec.oversample);
            let values: Vec<_> = omegas.iter().map(|&w| dft3(&grid, (w, 0.0, w))).collect();
            let s = Spectrum {
                n_f: grid.n_f2,
                dt,
                stderr: vec![err; omegas.len()],
                omegas,
                values,
            };
            let at = dft3(&grid, (p.omega0, 0.0, p.omega0));
            let mut r = resonance(at, err, l_c.map(|l| resonance_signal_4th(&p, l)));
            r["omega"] = json!([p.omega0, 0.0, p.omega0]);
            (s, json!({ "n_f2": grid.n_f2, "n_f1": grid.n_f1, "resonance": r }))
        }
    };
    csvio::write_spectrum(&file(out, "spectrum.csv", &mut outputs), &spectrum)?;
    Ok(Outcome {
        outputs,
        details: report,
    })
}

pub fn plan(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let spec = cfg.plan.as_ref().ok_or_else(|| bad("plan: missing"))?;
    let s_cs = log_grid(spec.s_c.min, spec.s_c.max, spec.s_c.points);
    let g0s = log_grid(spec.gamma0.min, spec.gamma0.max, spec.gamma0.points);
    let gmax = spec.gamma_m_max.unwrap_or_else(|| gamma_m_max_default(spec.a));
    let mut points = Vec::new();
    let mut summary = Vec::new();
    for &order in &spec.orders {
        let map = plan_map(order, &s_cs, &g0s, spec.a, gmax)?;
        summary.push(json!({
            "order": order,
            "cells": map.len(),
            "infeasible": map.iter().filter(|p| !p.feasible).count(),
        }));
        points.extend(map);
    }
    let mut outputs = Vec::new();
    csvio::write_plan(&file(out, "plan.csv", &mut outputs), &points)?;
    Ok(Outcome {
        outputs,
        details: json!({ "gamma_m_max": gmax, "orders": summary }),
    })
}
