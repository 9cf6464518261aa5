//! One-sided Fourier sums of correlation series and the SNR bookkeeping.

use std::f64::consts::PI;

pub use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::correlators::{Corr4Grid, LagSeries, LagZero};
use crate::error::{invalid, Error, Result};
use crate::params::SimParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub n_f: usize,
    pub dt: f64,
    pub omegas: Vec<f64>,
    pub values: Vec<Complex64>,
    /// Propagated from the per-lag errors, ignoring lag-to-lag covariance.
    pub stderr: Vec<f64>,
}

/// `ω_k = k·2π/(oversample·N_F·Δt)` from 0 up to the Nyquist frequency `π/Δt`.
pub fn frequency_grid(n_f: usize, dt: f64, oversample: usize) -> Vec<f64> {
    let steps = (n_f * oversample.max(1)) / 2;
    let dw = 2.0 * PI / ((n_f * oversample.max(1)) as f64 * dt);
    (0..=steps).map(|k| k as f64 * dw).collect()
}

pub fn default_grid(n_f: usize, dt: f64) -> Vec<f64> {
    frequency_grid(n_f, dt, 4)
}

fn first_lag(series: &LagSeries) -> usize {
    match series.lag_zero {
        LagZero::Model => 0,
        LagZero::ShotNoise | LagZero::Absent => 1,
    }
}

fn check_len(series: &LagSeries, n_f: usize) -> Result<()> {
    if n_f == 0 {
        return Err(invalid("n_f", "must be at least 1"));
    }
    if series.values.len() < n_f {
        return Err(Error::SeriesTooShort {
            needed: n_f,
            available: series.values.len(),
        });
    }
    Ok(())
}

/// `Σ_{n=0}^{N_F−1} G(n) e^{iωnΔt}` at one frequency. Lag 0 enters only for
/// model series; in a record it is the shot-noise pedestal.
pub fn dft1_at(series: &LagSeries, n_f: usize, omega: f64) -> Result<Complex64> {
    check_len(series, n_f)?;
    Ok((first_lag(series)..n_f)
        .map(|n| series.values[n] * Complex64::from_polar(1.0, omega * n as f64 * series.dt))
        .sum())
}

pub fn dft1(series: &LagSeries, n_f: usize, omegas: &[f64]) -> Result<Spectrum> {
    check_len(series, n_f)?;
    let lo = first_lag(series);
    let err = (lo..n_f)
        .map(|n| series.stderr[n] * series.stderr[n])
        .sum::<f64>()
        .sqrt();
    let values = omegas
        .par_iter()
        .map(|&w| dft1_at(series, n_f, w).expect("length checked"))
        .collect();
    Ok(Spectrum {
        n_f,
        dt: series.dt,
        omegas: omegas.to_vec(),
        values,
        stderr: vec![err; omegas.len()],
    })
}

/// `Σ_{u,v,w} G⁴(u,v,w) e^{i(ω₁u + ω₂v + ω₃w)Δt}` over the whole grid.
pub fn dft3(grid: &Corr4Grid, omega: (f64, f64, f64)) -> Complex64 {
    let dt = grid.dt;
    let ph = |w: f64, n: usize| Complex64::from_polar(1.0, w * n as f64 * dt);
    let mut acc = Complex64::new(0.0, 0.0);
    for (u, v, w) in grid.cells() {
        acc += grid.get(u, v, w) * ph(omega.0, u) * ph(omega.1, v) * ph(omega.2, w);
    }
    acc
}

/// Error of [`dft3`] from the per-cell errors, ignoring their covariance.
pub fn dft3_stderr(grid: &Corr4Grid) -> f64 {
    grid.stderr.iter().map(|s| s * s).sum::<f64>().sqrt()
}

/// `σ_M = √(N_F/M)`.
pub fn shot_noise_2nd(n_f: usize, m: u64) -> f64 {
    (n_f as f64 / m as f64).sqrt()
}

/// `σ_M = N_F2 √N_F1 √(2τ/T)`.
pub fn shot_noise_4th(n_f2: usize, n_f1: usize, t: f64, tau: f64) -> f64 {
    n_f2 as f64 * (n_f1 as f64).sqrt() * (2.0 * tau / t).sqrt()
}

/// `σ = √(σ_M² + L_C⁴τ²δS_C²)`.
pub fn total_uncertainty_2nd(sigma_m: f64, l_c: f64, tau: f64, delta_s_c: f64) -> f64 {
    (sigma_m * sigma_m + (l_c * l_c * tau * delta_s_c).powi(2)).sqrt()
}

/// `N_F ≈ 1/((γ₀+γ_M)τ)`, at least 1.
pub fn optimal_n_f(params: &SimParams) -> usize {
    (1.0 / (params.gamma_total() * params.tau)).round().max(1.0) as usize
}

/// `(N_F2, N_F1) ≈ (1/(2(γ₀+γ_M)τ), 1/(4γ_Mτ))`, each at least 1.
pub fn optimal_n_f4(params: &SimParams) -> (usize, usize) {
    let tau = params.tau;
    let n2 = (0.5 / (params.gamma_total() * tau)).round().max(1.0);
    let n1 = (0.25 / (params.gamma_m() * tau)).round().max(1.0);
    (n2 as usize, n1 as usize)
}

/// Target peak of the 1-D spectrum at ω₀, `L_C²·2γ_M/(γ₀+γ_M)`.
pub fn resonance_signal_2nd(params: &SimParams, l_c: f64) -> f64 {
    l_c * l_c * 2.0 * params.gamma_m() / params.gamma_total()
}

/// Discrete-sum version `L_C²·2γ_Mτ/(1 − e^{−(γ₀+γ_M)τ})`.
pub fn resonance_signal_2nd_discrete(params: &SimParams, l_c: f64) -> f64 {
    let x = params.gamma_total() * params.tau;
    l_c * l_c * 2.0 * params.gamma_m() * params.tau / -(-x).exp_m1()
}

/// Flat noise pedestal `L_C²τS_C`.
pub fn noise_pedestal_2nd(l_c: f64, tau: f64, s_c: f64) -> f64 {
    l_c * l_c * tau * s_c
}

/// `L_C²(γ_M/(γ_M+γ₀))²/(4γ_Mτ)`.
pub fn resonance_signal_4th(params: &SimParams, l_c: f64) -> f64 {
    let gm = params.gamma_m();
    l_c * l_c * (gm / params.gamma_total()).powi(2) / (4.0 * gm * params.tau)
}

fn check_t(t: f64) -> Result<()> {
    if !(t > 0.0) {
        return Err(invalid("T", format!("must be > 0, got {t}")));
    }
    Ok(())
}

/// `[(γ₀+γ_M)e^{8γ_MS_C/a²}/(4γ_M²T) + 4(γ₀+γ_M)²S_C²/a⁴]^{−1/2}`.
pub fn snr_2nd(params: &SimParams, s_c: f64, t: f64) -> Result<f64> {
    check_t(t)?;
    Ok(snr_2nd_rates(params.a, params.gamma0, params.gamma_m(), s_c, t))
}

/// [`snr_2nd`] in terms of the rates alone.
pub fn snr_2nd_rates(a: f64, gamma0: f64, gamma_m: f64, s_c: f64, t: f64) -> f64 {
    let g = gamma0 + gamma_m;
    let a2 = a * a;
    let shot = g / (4.0 * gamma_m * gamma_m * t) * (8.0 * gamma_m * s_c / a2).exp();
    let noise = 4.0 * g * g * s_c * s_c / (a2 * a2);
    1.0 / (shot + noise).sqrt()
}

/// `γ_M^{3/2}√T e^{−4γ_MS_C/a²} / (√2(γ_M+γ₀))`.
pub fn snr_4th(params: &SimParams, s_c: f64, t: f64) -> Result<f64> {
    check_t(t)?;
    Ok(snr_4th_rates(params.a, params.gamma0, params.gamma_m(), s_c, t))
}

pub fn snr_4th_rates(a: f64, gamma0: f64, gamma_m: f64, s_c: f64, t: f64) -> f64 {
    gamma_m.powf(1.5) * t.sqrt() * (-4.0 * gamma_m * s_c / (a * a)).exp()
        / (std::f64::consts::SQRT_2 * (gamma_m + gamma0))
}

/// Limit of [`snr_2nd`] for every `γ_M` and `T`: `a²/(2γ₀S_C)`.
pub fn snr_2nd_bound(a: f64, gamma0: f64, s_c: f64) -> f64 {
    a * a / (2.0 * gamma0 * s_c)
}
