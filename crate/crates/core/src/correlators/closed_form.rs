use crate::error::{invalid, Result};
use crate::noise::NoiseModel;
use crate::params::SimParams;

/// `L_C² sin²α cos(ω₀nτ) e^{−(γ₀+γ_M)nτ} + L_C²⟨φ_{m+n}φ_m⟩` for pattern `xy`.
///
/// Defined for `n = 0` as well, where the noise term is the one-shot variance.
pub fn closedform_g2(n: usize, params: &SimParams, noise: &NoiseModel) -> f64 {
    let tau = params.tau;
    let l2 = noise.coherence_factor(tau).powi(2);
    let t = n as f64 * tau;
    let signal = params.alpha().sin().powi(2)
        * (params.omega0 * t).cos()
        * (-params.gamma_total() * t).exp();
    l2 * (signal + noise.phase_covariance(n as u64, tau))
}

/// `G²(0..=max_lag)` from the closed form.
pub fn closedform_g2_series(max_lag: usize, params: &SimParams, noise: &NoiseModel) -> Vec<f64> {
    (0..=max_lag)
        .map(|n| closedform_g2(n, params, noise))
        .collect()
}

/// `L_C² sin⁴α sin(ω₀t₁) sin(ω₀t₃) e^{−(γ₀+γ_M)t₁} e^{−2γ_M t₂} e^{−(γ₀+γ_M)t₃}`
/// with the physical time differences of the recorded shots,
/// `t₁ = t_j − t_k = (2u−1)τ`, `t₂ = t_k − t_m = 2vτ`, `t₃ = t_m − t_n = (2w+1)τ`.
pub fn closedform_g4(
    u: usize,
    v: usize,
    w: usize,
    params: &SimParams,
    noise: &NoiseModel,
) -> Result<f64> {
    if u == 0 || v == 0 || w == 0 {
        return Err(invalid("lag", "lags start at 1"));
    }
    let tau = params.tau;
    let (t1, t2, t3) = (
        (2 * u - 1) as f64 * tau,
        (2 * v) as f64 * tau,
        (2 * w + 1) as f64 * tau,
    );
    let g = params.gamma_total();
    let gm = params.gamma_m();
    let l2 = noise.coherence_factor(tau).powi(2);
    Ok(l2
        * params.alpha().sin().powi(4)
        * (params.omega0 * t1).sin()
        * (params.omega0 * t3).sin()
        * (-g * (t1 + t3) - 2.0 * gm * t2).exp())
}

/// Closed-form grid, flattened as `[u][v][w]` like the exact grid.
pub fn closedform_g4_grid(
    n_f2: usize,
    n_f1: usize,
    params: &SimParams,
    noise: &NoiseModel,
) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_f2 * n_f1 * n_f2);
    for u in 1..=n_f2 {
        for v in 1..=n_f1 {
            for w in 1..=n_f2 {
                out.push(closedform_g4(u, v, w, params, noise).expect("lags >= 1"));
            }
        }
    }
    out
}
