use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::montecarlo::{Pattern, ShotRecord};
use crate::error::{Error, Result};

/// Meaning of `values[0]` in a [`LagSeries`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LagZero {
    /// Same-shot product of a record, identically 1.
    ShotNoise,
    /// Model value; part of the correlation.
    Model,
    /// Not defined (the slot holds 0).
    Absent,
}

/// `G(n)` at `t = n·dt` for `n = 0..values.len()`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagSeries {
    pub dt: f64,
    pub values: Vec<f64>,
    pub stderr: Vec<f64>,
    pub lag_zero: LagZero,
}

impl LagSeries {
    /// Model series with `values[0]` the lag-0 model value.
    pub fn from_model(dt: f64, values: Vec<f64>) -> Self {
        let stderr = vec![0.0; values.len()];
        Self {
            dt,
            values,
            stderr,
            lag_zero: LagZero::Model,
        }
    }

    /// Series given from lag 1 on.
    pub fn from_lag_one(dt: f64, tail: Vec<f64>) -> Self {
        let mut values = Vec::with_capacity(tail.len() + 1);
        values.push(0.0);
        values.extend(tail);
        let stderr = vec![0.0; values.len()];
        Self {
            dt,
            values,
            stderr,
            lag_zero: LagZero::Absent,
        }
    }

    pub fn max_lag(&self) -> usize {
        self.values.len().saturating_sub(1)
    }

    pub fn value(&self, lag: usize) -> f64 {
        self.values[lag]
    }
}

/// `G⁴` over `u, w ∈ 1..=n_f2`, `v ∈ 1..=n_f1`, stored `[u][v][w]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corr4Grid {
    pub dt: f64,
    pub n_f2: usize,
    pub n_f1: usize,
    pub values: Vec<f64>,
    pub stderr: Vec<f64>,
}

impl Corr4Grid {
    pub fn from_values(dt: f64, n_f2: usize, n_f1: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), n_f2 * n_f1 * n_f2, "grid size");
        let stderr = vec![0.0; values.len()];
        Self {
            dt,
            n_f2,
            n_f1,
            values,
            stderr,
        }
    }

    pub fn index(&self, u: usize, v: usize, w: usize) -> usize {
        ((u - 1) * self.n_f1 + (v - 1)) * self.n_f2 + (w - 1)
    }

    pub fn get(&self, u: usize, v: usize, w: usize) -> f64 {
        self.values[self.index(u, v, w)]
    }

    pub fn stderr_at(&self, u: usize, v: usize, w: usize) -> f64 {
        self.stderr[self.index(u, v, w)]
    }

    /// `(u, v, w)` of every cell in storage order.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        let (n2, n1) = (self.n_f2, self.n_f1);
        (1..=n2).flat_map(move |u| (1..=n1).flat_map(move |v| (1..=n2).map(move |w| (u, v, w))))
    }
}

/// Pool per-segment integer sums into a ratio estimate and its standard error
/// from the segment-to-segment scatter.
fn pool(sums: &[Vec<i64>], windows: &[u64], n_cells: usize) -> (Vec<f64>, Vec<f64>) {
    let total: u64 = windows.iter().sum();
    let k = sums.len();
    let mean_w = total as f64 / k as f64;
    let mut values = vec![0.0; n_cells];
    let mut stderr = vec![0.0; n_cells];
    for c in 0..n_cells {
        let s: i64 = sums.iter().map(|v| v[c]).sum();
        let g = s as f64 / total as f64;
        values[c] = g;
        stderr[c] = if k >= 2 {
            let ss: f64 = sums
                .iter()
                .zip(windows)
                .map(|(v, &w)| {
                    let r = (v[c] as f64 - g * w as f64) / mean_w;
                    r * r
                })
                .sum();
            (ss / (k as f64 * (k as f64 - 1.0))).sqrt()
        } else {
            ((1.0 - g * g).max(0.0) / total as f64).sqrt()
        };
    }
    (values, stderr)
}

/// Sliding-window `G²(n) = ⟨s_{i+n} s_i⟩`, `n = 0..=max_lag`, from an `xy`
/// record. Each segment contributes windows `i < L − max_lag`.
pub fn estimate_g2(records: &ShotRecord, max_lag: usize, tau: f64) -> Result<LagSeries> {
    if records.pattern != Pattern::Xy {
        return Err(Error::PatternMismatch {
            expected: "pattern xy",
        });
    }
    check_lengths(records, max_lag + 1)?;
    let per_seg: Vec<(Vec<i64>, u64)> = records
        .segments
        .par_iter()
        .map(|seg| {
            let s = &seg.outputs;
            let w = s.len() - max_lag;
            let sums = (0..=max_lag)
                .map(|n| {
                    s[..w]
                        .iter()
                        .zip(&s[n..n + w])
                        .map(|(&a, &b)| i64::from(a * b))
                        .sum::<i64>()
                })
                .collect();
            (sums, w as u64)
        })
        .collect();
    let (sums, windows): (Vec<_>, Vec<_>) = per_seg.into_iter().unzip();
    let (values, stderr) = pool(&sums, &windows, max_lag + 1);
    Ok(LagSeries {
        dt: tau,
        values,
        stderr,
        lag_zero: LagZero::ShotNoise,
    })
}

fn check_lengths(records: &ShotRecord, needed: usize) -> Result<()> {
    let plen = records.pattern.len();
    let shortest = records
        .segments
        .iter()
        .map(|s| s.outputs.len() / plen)
        .min()
        .unwrap_or(0);
    if shortest < needed {
        return Err(Error::InsufficientRecords {
            needed,
            available: shortest,
        });
    }
    Ok(())
}

/// `G⁴(u,v,w) = ⟨s^{xy}_{n+w+v+u} s^{xz}_{n+w+v} s^{xz}_{n+w} s^{xy}_n⟩` from an
/// `xy_xz` record, over `u, w ≤ n_f2`, `v ≤ n_f1`.
pub fn estimate_g4(records: &ShotRecord, n_f2: usize, n_f1: usize, tau: f64) -> Result<Corr4Grid> {
    if records.pattern != Pattern::XyXz {
        return Err(Error::PatternMismatch {
            expected: "pattern xy_xz",
        });
    }
    if n_f2 == 0 || n_f1 == 0 {
        return Err(Error::SeriesTooShort {
            needed: 1,
            available: 0,
        });
    }
    let span = 2 * n_f2 + n_f1;
    check_lengths(records, span + 1)?;
    let n_cells = n_f2 * n_f1 * n_f2;
    let per_seg: Vec<(Vec<i64>, u64)> = records
        .segments
        .par_iter()
        .map(|seg| {
            let cycles = seg.outputs.len() / 2;
            let y: Vec<i8> = seg.outputs.iter().step_by(2).copied().collect();
            let z: Vec<i8> = seg.outputs.iter().skip(1).step_by(2).copied().collect();
            let w_count = cycles - span;
            let mut sums = vec![0i64; n_cells];
            for w in 1..=n_f2 {
                // y_n z_m for every window start n
                let p1: Vec<i8> = (0..w_count + n_f1 + n_f2).map(|i| y[i] * z[i + w]).collect();
                for v in 1..=n_f1 {
                    let p2: Vec<i8> = (0..w_count + n_f2).map(|i| p1[i] * z[i + w + v]).collect();
                    for u in 1..=n_f2 {
                        let off = w + v + u;
                        sums[((u - 1) * n_f1 + (v - 1)) * n_f2 + (w - 1)] = p2[..w_count]
                            .iter()
                            .zip(&y[off..off + w_count])
                            .map(|(&a, &b)| i64::from(a * b))
                            .sum();
                    }
                }
            }
            (sums, w_count as u64)
        })
        .collect();
    let (sums, windows): (Vec<_>, Vec<_>) = per_seg.into_iter().unzip();
    let (values, stderr) = pool(&sums, &windows, n_cells);
    Ok(Corr4Grid {
        dt: 2.0 * tau,
        n_f2,
        n_f1,
        values,
        stderr,
    })
}
