//! Required acquisition time for SNR = 1 and its optimum over the measurement
//! strength `γ_M ∈ (0, γ_M^max]`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::params::gamma_m_max;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Order {
    #[serde(rename = "2nd")]
    Second,
    #[serde(rename = "4th")]
    Fourth,
}

impl Order {
    pub fn name(self) -> &'static str {
        match self {
            Order::Second => "2nd",
            Order::Fourth => "4th",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanPoint {
    pub s_c: f64,
    pub gamma0: f64,
    pub a: f64,
    pub order: Order,
    pub gamma_m_opt: Option<f64>,
    pub t_opt: Option<f64>,
    pub feasible: bool,
    /// `a²/(2γ₀S_C)` for second order, infinite for fourth.
    pub snr_bound: f64,
    /// `2γ₀S_C/a²`.
    pub gamma0_bar: f64,
    /// `2γ_M^opt S_C/a²`.
    pub gamma_m_bar: Option<f64>,
}

/// `T = (γ₀+γ_M)e^{8γ_MS_C/a²} / (4γ_M²(1 − 4(γ₀+γ_M)²S_C²/a⁴))`;
/// `None` when `(γ₀+γ_M)S_C ≥ a²/2`.
pub fn required_t_2nd(gamma_m: f64, gamma0: f64, s_c: f64, a: f64) -> Option<f64> {
    let g = gamma0 + gamma_m;
    let a2 = a * a;
    let denom = 1.0 - 4.0 * g * g * s_c * s_c / (a2 * a2);
    if g * s_c >= 0.5 * a2 || denom <= 0.0 {
        return None;
    }
    Some(g * (8.0 * gamma_m * s_c / a2).exp() / (4.0 * gamma_m * gamma_m * denom))
}

/// `T = 2(γ_M+γ₀)²e^{8γ_MS_C/a²}/γ_M³`.
pub fn required_t_4th(gamma_m: f64, gamma0: f64, s_c: f64, a: f64) -> f64 {
    2.0 * (gamma_m + gamma0).powi(2) * (8.0 * gamma_m * s_c / (a * a)).exp() / gamma_m.powi(3)
}

/// Minimize `f` over `[lo, hi]` by golden-section search on `ln x`.
pub fn golden_section_log(f: impl Fn(f64) -> f64, lo: f64, hi: f64, rel_tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo.ln(), hi.ln());
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c.exp()), f(d.exp()));
    while (b - a) > rel_tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c.exp());
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d.exp());
        }
    }
    (0.5 * (a + b)).exp()
}

const REL_TOL: f64 = 1e-6;

fn check_inputs(gamma0: f64, s_c: f64, a: f64, gamma_m_max: f64) -> Result<()> {
    if !(a.is_finite() && a > 0.0) {
        return Err(invalid("a", format!("must be > 0, got {a}")));
    }
    if !(gamma0.is_finite() && gamma0 >= 0.0) {
        return Err(invalid("gamma0", format!("must be >= 0, got {gamma0}")));
    }
    if !(s_c.is_finite() && s_c >= 0.0) {
        return Err(invalid("s_c", format!("must be >= 0, got {s_c}")));
    }
    if !(gamma_m_max > 0.0 && gamma_m_max <= gamma_m_max_default(a) * (1.0 + 1e-9)) {
        return Err(invalid(
            "gamma_m_max",
            format!("must lie in (0, {:.6}·a]", gamma_m_max_default(1.0)),
        ));
    }
    Ok(())
}

/// Physical bound `a·max_x sin²x/(4x) ≈ 0.18a`.
pub fn gamma_m_max_default(a: f64) -> f64 {
    gamma_m_max(a)
}

/// `2γ₀S_C/a²`.
pub fn gamma0_bar(gamma0: f64, s_c: f64, a: f64) -> f64 {
    2.0 * gamma0 * s_c / (a * a)
}

pub fn snr_bound(order: Order, gamma0: f64, s_c: f64, a: f64) -> f64 {
    match order {
        Order::Second => a * a / (2.0 * gamma0 * s_c),
        Order::Fourth => f64::INFINITY,
    }
}

/// Minimize the required time over `γ_M ∈ (0, γ_M^max]`.
pub fn optimize_t(order: Order, gamma0: f64, s_c: f64, a: f64, gamma_m_max: f64) -> Result<PlanPoint> {
    check_inputs(gamma0, s_c, a, gamma_m_max)?;
    let mut point = PlanPoint {
        s_c,
        gamma0,
        a,
        order,
        gamma_m_opt: None,
        t_opt: None,
        feasible: false,
        snr_bound: snr_bound(order, gamma0, s_c, a),
        gamma0_bar: gamma0_bar(gamma0, s_c, a),
        gamma_m_bar: None,
    };
    let (gm, t) = match order {
        Order::Second => {
            let t = |g: f64| required_t_2nd(g, gamma0, s_c, a).unwrap_or(f64::INFINITY);
            // feasibility wall (γ₀+γ_M)S_C = a²/2 is open; γ_M^max is closed
            let wall = if s_c > 0.0 {
                0.5 * a * a / s_c - gamma0
            } else {
                f64::INFINITY
            };
            if wall <= 0.0 {
                return Ok(point);
            }
            let hi = if wall <= gamma_m_max {
                wall * (1.0 - 1e-12)
            } else {
                gamma_m_max
            };
            best_of(t, hi)
        }
        Order::Fourth => best_of(|g: f64| required_t_4th(g, gamma0, s_c, a), gamma_m_max),
    };
    if !t.is_finite() {
        return Ok(point);
    }
    point.gamma_m_opt = Some(gm);
    point.t_opt = Some(t);
    point.feasible = true;
    point.gamma_m_bar = Some(2.0 * gm * s_c / (a * a));
    Ok(point)
}

fn best_of(t: impl Fn(f64) -> f64, hi: f64) -> (f64, f64) {
    let g = golden_section_log(&t, hi * 1e-9, hi, REL_TOL);
    let (ti, th) = (t(g), t(hi));
    if th <= ti {
        (hi, th)
    } else {
        (g, ti)
    }
}

/// Interior stationary point of `required_t_4th`: root of
/// `2/(γ+γ₀) − 3/γ + 8S_C/a² = 0`.
pub fn interior_optimum_4th(gamma0: f64, s_c: f64, a: f64) -> f64 {
    let k = 8.0 * s_c / (a * a);
    let b = k * gamma0 - 1.0;
    (-b + (b * b + 12.0 * k * gamma0).sqrt()) / (2.0 * k)
}

/// `1 − (2/3)/(1 + √(1 − 8(1−γ̄₀)/9))`, the optimal `γ̄_M/(1−γ̄₀)` of the
/// reduced second-order objective.
pub fn opt_fraction(gamma0_bar: f64) -> f64 {
    1.0 - (2.0 / 3.0) / (1.0 + (1.0 - 8.0 * (1.0 - gamma0_bar) / 9.0).sqrt())
}

/// Reduced objective `γ̄_M²(1−γ̄₀−γ̄_M)/(γ̄₀+γ̄_M)` (∝ 1/T with O(1) factors dropped).
pub fn reduced_inverse_t_2nd(gamma_m_bar: f64, gamma0_bar: f64) -> f64 {
    gamma_m_bar.powi(2) * (1.0 - gamma0_bar - gamma_m_bar) / (gamma0_bar + gamma_m_bar)
}

/// Numerical maximizer of [`reduced_inverse_t_2nd`] over `(0, 1−γ̄₀)`.
pub fn reduced_optimum_2nd(gamma0_bar: f64) -> f64 {
    let hi = 1.0 - gamma0_bar;
    golden_section_log(
        |x| -reduced_inverse_t_2nd(x, gamma0_bar),
        hi * 1e-9,
        hi,
        1e-10,
    )
}

/// Piecewise scaling form of the optimal second-order time; `None` in the
/// undetectable zone.
pub fn scaling_t_2nd(gamma0: f64, s_c: f64, a: f64, gamma_m_max: f64) -> Option<f64> {
    let a2 = a * a;
    let q = 1.0 - 2.0 * gamma0 * s_c / a2;
    if q <= 0.0 {
        return None;
    }
    Some(if (gamma0 + gamma_m_max) * s_c >= 0.5 * a2 {
        s_c / a2 / q.powi(3)
    } else {
        (1.0 + gamma0 / gamma_m_max) / (gamma_m_max * q)
    })
}

pub fn scaling_t_4th(gamma0: f64, s_c: f64, a: f64, gamma_m_max: f64) -> f64 {
    let a2 = a * a;
    if gamma_m_max * s_c >= a2 / 8.0 {
        8.0 * s_c / a2 * (1.0 + 8.0 * gamma0 * s_c / a2).powi(2)
    } else {
        (1.0 + gamma0 / gamma_m_max).powi(2) / gamma_m_max
    }
}

/// [`optimize_t`] over a grid; rows follow `gamma0s`, columns `s_cs`.
pub fn plan_map(
    order: Order,
    s_cs: &[f64],
    gamma0s: &[f64],
    a: f64,
    gamma_m_max: f64,
) -> Result<Vec<PlanPoint>> {
    if s_cs.is_empty() || gamma0s.is_empty() {
        return Err(invalid("grid", "must not be empty"));
    }
    let cells: Vec<(f64, f64)> = gamma0s
        .iter()
        .flat_map(|&g| s_cs.iter().map(move |&s| (g, s)))
        .collect();
    cells
        .par_iter()
        .map(|&(g, s)| optimize_t(order, g, s, a, gamma_m_max))
        .collect()
}

/// `n` points spaced evenly in `ln` between `lo` and `hi`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (l, h) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (l + (h - l) * i as f64 / (n - 1) as f64).exp())
        .collect()
}
