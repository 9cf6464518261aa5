use crate::dynamics::{Mode, ShotChannels};
use crate::error::{invalid, Error, Result};
use crate::noise::{NoiseModel, NoisePath, PairFactors};
use crate::params::SimParams;
use crate::pauli::{PauliOperator, SuperOperator};

/// Where the noise averages of the two y-readouts come from.
#[derive(Debug, Clone, Copy)]
pub enum PhaseSource<'a> {
    Noiseless,
    /// Closed-form Gaussian averages; non-Gaussian models are rejected.
    Model(&'a NoiseModel),
    /// Ergodic averages over one sampled path.
    Path(&'a NoisePath),
}

impl PhaseSource<'_> {
    pub fn pair_factors(&self, lag_shots: u64, tau: f64) -> Result<PairFactors> {
        match self {
            PhaseSource::Noiseless => Ok(PairFactors::NOISELESS),
            PhaseSource::Model(m) => m.phase_pair_factors(lag_shots, tau),
            PhaseSource::Path(p) => {
                if (p.tau - tau).abs() > 1e-12 * tau {
                    return Err(invalid("path", "shot duration differs from params.tau"));
                }
                p.pair_factors(lag_shots as usize)
            }
        }
    }
}

const RHO0: PauliOperator = PauliOperator::maximally_mixed();

/// `Tr[T ρ]` as a row vector acting on Pauli coefficients.
fn trace_row(t: &SuperOperator) -> [f64; 4] {
    let r = t.0.row(0);
    [2.0 * r[0], 2.0 * r[1], 2.0 * r[2], 2.0 * r[3]]
}

fn dot(row: &[f64; 4], p: &PauliOperator) -> f64 {
    row[0] * p.c0 + row[1] * p.cx + row[2] * p.cy + row[3] * p.cz
}

/// Combine the four endpoint traces with the noise averages. Index 0 is the
/// `M_x` endpoint (carries `sin φ`), index 1 the `M_y` endpoint (`cos φ`);
/// `t[later][earlier]`.
fn mix(t: [[f64; 2]; 2], f: &PairFactors) -> f64 {
    f.ss * t[0][0] + f.cc * t[1][1] + f.sc * t[0][1] + f.cs * t[1][0]
}

fn check_lag(name: &'static str, lag: usize) -> Result<()> {
    if lag == 0 {
        return Err(invalid(name, "lags start at 1"));
    }
    Ok(())
}

/// `G²(n) = ⟨Tr[M_{y,m+n} M^{n−1} M_{y,m} ρ]⟩` for pattern `xy`, `ρ = 𝟙/2`.
pub fn exact_g2(n: usize, params: &SimParams, noise: PhaseSource, mode: Mode) -> Result<f64> {
    check_lag("n", n)?;
    Ok(*exact_g2_series(n, params, noise, mode)?.last().expect("n >= 1"))
}

/// `G²(1..=max_lag)`.
pub fn exact_g2_series(
    max_lag: usize,
    params: &SimParams,
    noise: PhaseSource,
    mode: Mode,
) -> Result<Vec<f64>> {
    exact_g2_series_with(&ShotChannels::new(params, mode)?, max_lag, noise)
}

pub fn exact_g2_series_with(
    ch: &ShotChannels,
    max_lag: usize,
    noise: PhaseSource,
) -> Result<Vec<f64>> {
    let idle = ch.idle();
    let ends = [ch.mx.compose(&ch.lz), ch.my.compose(&ch.lz)];
    let rows = [trace_row(&ends[0]), trace_row(&ends[1])];
    let mut states = [ch.mx.apply(&RHO0), ch.my.apply(&RHO0)];
    let mut out = Vec::with_capacity(max_lag);
    for n in 1..=max_lag {
        if n > 1 {
            for s in states.iter_mut() {
                *s = idle.apply(s);
            }
        }
        let mut t = [[0.0; 2]; 2];
        for (later, row) in rows.iter().enumerate() {
            for (earlier, s) in states.iter().enumerate() {
                t[later][earlier] = dot(row, s);
            }
        }
        let f = noise.pair_factors(n as u64, ch.params.tau)?;
        out.push(mix(t, &f));
    }
    Ok(out)
}

/// `G⁴(u, v, w)` for pattern `xy_xz`: cycle lags `u = j−k`, `v = k−m`, `w = m−n`.
///
/// Every shot between the four recorded ones, including the unrecorded
/// partner shot of each recorded cycle, is an idle step.
pub fn exact_g4(
    u: usize,
    v: usize,
    w: usize,
    params: &SimParams,
    noise: PhaseSource,
    mode: Mode,
) -> Result<f64> {
    exact_g4_with(&ShotChannels::new(params, mode)?, u, v, w, noise)
}

pub fn exact_g4_with(
    ch: &ShotChannels,
    u: usize,
    v: usize,
    w: usize,
    noise: PhaseSource,
) -> Result<f64> {
    check_lag("u", u)?;
    check_lag("v", v)?;
    check_lag("w", w)?;
    let idle = ch.idle();
    let z = ch.mz.compose(&ch.lz);
    let ends = [ch.mx.compose(&ch.lz), ch.my.compose(&ch.lz)];
    let mut t = [[0.0; 2]; 2];
    for (earlier, first) in [ch.mx, ch.my].iter().enumerate() {
        let mut s = first.apply(&RHO0);
        s = idle.pow(2 * w).apply(&s);
        s = z.apply(&s);
        s = idle.pow(2 * v - 1).apply(&s);
        s = z.apply(&s);
        s = idle.pow(2 * u - 2).apply(&s);
        for (later, end) in ends.iter().enumerate() {
            t[later][earlier] = end.trace_of_apply(&s);
        }
    }
    let f = noise.pair_factors(2 * (u + v + w) as u64, ch.params.tau)?;
    Ok(mix(t, &f))
}

/// `G⁴` on the grid `u, w ∈ 1..=n_f2`, `v ∈ 1..=n_f1`, flattened as `[u][v][w]`.
pub fn exact_g4_grid(
    n_f2: usize,
    n_f1: usize,
    params: &SimParams,
    noise: PhaseSource,
    mode: Mode,
) -> Result<Vec<f64>> {
    exact_g4_grid_with(&ShotChannels::new(params, mode)?, n_f2, n_f1, noise)
}

pub fn exact_g4_grid_with(
    ch: &ShotChannels,
    n_f2: usize,
    n_f1: usize,
    noise: PhaseSource,
) -> Result<Vec<f64>> {
    if n_f2 == 0 || n_f1 == 0 {
        return Err(Error::SeriesTooShort {
            needed: 1,
            available: 0,
        });
    }
    let idle = ch.idle();
    let idle2 = idle.pow(2);
    let z = ch.mz.compose(&ch.lz);
    let rows = [
        trace_row(&ch.mx.compose(&ch.lz)),
        trace_row(&ch.my.compose(&ch.lz)),
    ];
    let idx = |u: usize, v: usize, w: usize| ((u - 1) * n_f1 + (v - 1)) * n_f2 + (w - 1);
    // traces[cell][later][earlier]
    let mut traces = vec![[[0.0; 2]; 2]; n_f2 * n_f1 * n_f2];
    for (earlier, first) in [ch.mx, ch.my].iter().enumerate() {
        let mut after_n = first.apply(&RHO0);
        for w in 1..=n_f2 {
            after_n = idle2.apply(&after_n);
            let mut after_m = idle.apply(&z.apply(&after_n));
            for v in 1..=n_f1 {
                if v > 1 {
                    after_m = idle2.apply(&after_m);
                }
                let mut after_k = z.apply(&after_m);
                for u in 1..=n_f2 {
                    if u > 1 {
                        after_k = idle2.apply(&after_k);
                    }
                    let cell = &mut traces[idx(u, v, w)];
                    for (later, row) in rows.iter().enumerate() {
                        cell[later][earlier] = dot(row, &after_k);
                    }
                }
            }
        }
    }
    // factors depend on u + v + w only
    let factors = (3..=2 * n_f2 + n_f1)
        .map(|s| noise.pair_factors(2 * s as u64, ch.params.tau))
        .collect::<Result<Vec<_>>>()?;
    let mut out = vec![0.0; traces.len()];
    for u in 1..=n_f2 {
        for v in 1..=n_f1 {
            for w in 1..=n_f2 {
                out[idx(u, v, w)] = mix(traces[idx(u, v, w)], &factors[u + v + w - 3]);
            }
        }
    }
    Ok(out)
}
