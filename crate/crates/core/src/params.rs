use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Physical constants of one run. Angular quantities in rad/time, rates in 1/time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimParams {
    /// Sensor–target coupling.
    pub a: f64,
    /// Target Larmor frequency.
    pub omega0: f64,
    /// Intrinsic pure-dephasing rate of the target.
    pub gamma0: f64,
    /// Interaction time per shot.
    pub tau: f64,
}

impl SimParams {
    pub fn new(a: f64, omega0: f64, gamma0: f64, tau: f64) -> Result<Self> {
        let p = Self {
            a,
            omega0,
            gamma0,
            tau,
        };
        p.validate()?;
        Ok(p)
    }

    /// Parameters given per shot: `alpha = aτ`, `phi = ω₀τ`, `gamma0_tau = γ₀τ`.
    pub fn from_dimensionless(alpha: f64, phi: f64, gamma0_tau: f64, tau: f64) -> Result<Self> {
        Self::new(alpha / tau, phi / tau, gamma0_tau / tau, tau)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a.is_finite() && self.a >= 0.0) {
            return Err(invalid("a", format!("must be finite and >= 0, got {}", self.a)));
        }
        if !self.omega0.is_finite() {
            return Err(invalid("omega0", "must be finite"));
        }
        if !(self.gamma0.is_finite() && self.gamma0 >= 0.0) {
            return Err(invalid(
                "gamma0",
                format!("must be finite and >= 0, got {}", self.gamma0),
            ));
        }
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(invalid("tau", format!("must be > 0, got {}", self.tau)));
        }
        Ok(())
    }

    pub fn alpha(&self) -> f64 {
        self.a * self.tau
    }

    pub fn phi(&self) -> f64 {
        self.omega0 * self.tau
    }

    pub fn gamma_m(&self) -> f64 {
        gamma_m(self.a, self.tau)
    }

    /// Total transverse decay rate `γ₀ + γ_M`.
    pub fn gamma_total(&self) -> f64 {
        self.gamma0 + self.gamma_m()
    }

    pub fn with_a(mut self, a: f64) -> Self {
        self.a = a;
        self
    }
}

/// Measurement-induced dephasing rate `sin²(aτ)/(4τ)`.
pub fn gamma_m(a: f64, tau: f64) -> f64 {
    let s = (a * tau).sin();
    s * s / (4.0 * tau)
}

/// Maximizer of `sin²x / (4x)`, the root of `tan x = 2x` in `(0, π/2)`.
pub fn gamma_m_argmax() -> f64 {
    // Newton on f(x) = 2x cos x − sin x.
    let mut x = 1.2_f64;
    for _ in 0..50 {
        let (s, c) = x.sin_cos();
        let f = 2.0 * x * c - s;
        let df = c - 2.0 * x * s;
        let step = f / df;
        x -= step;
        if step.abs() < 1e-15 {
            break;
        }
    }
    x
}

/// `γ_M^max / a = max_x sin²x / (4x) ≈ 0.181`.
pub fn gamma_m_max_ratio() -> f64 {
    let x = gamma_m_argmax();
    let s = x.sin();
    s * s / (4.0 * x)
}

pub fn gamma_m_max(a: f64) -> f64 {
    a * gamma_m_max_ratio()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_m_values() {
        // sin²(0.1)/0.4
        assert!((gamma_m(1.0, 0.1) - 0.024_916_777_698_447_96).abs() < 1e-12);
        // small-angle limit a²τ/4
        let (a, tau) = (2.0, 1e-4);
        assert!((gamma_m(a, tau) / (a * a * tau / 4.0) - 1.0).abs() < 1e-7);
    }

    #[test]
    fn gamma_m_max_by_grid_search() {
        let (mut best_x, mut best) = (0.0, 0.0);
        for i in 1..=400_000 {
            let x = i as f64 * 1e-5;
            let v = x.sin().powi(2) / (4.0 * x);
            if v > best {
                best = v;
                best_x = x;
            }
        }
        assert!((gamma_m_argmax() - best_x).abs() < 2e-5);
        assert!((gamma_m_max_ratio() - best).abs() < 1e-10);
        assert!((gamma_m_argmax() - 1.1656).abs() < 1e-4);
        assert!((gamma_m_max_ratio() - 0.18).abs() < 0.002);
    }

    #[test]
    fn validation() {
        assert!(SimParams::new(1.0, 0.5, 0.0, 0.1).is_ok());
        assert!(SimParams::new(-1.0, 0.5, 0.0, 0.1).is_err());
        assert!(SimParams::new(1.0, 0.5, -0.1, 0.1).is_err());
        assert!(SimParams::new(1.0, 0.5, 0.0, 0.0).is_err());
    }
}
