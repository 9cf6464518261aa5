//! Self-check suite behind `qusense validate`.
//!
//! Each check re-derives an algebraic or statistical property of the library
//! at small, fast sizes. `Fault` perturbs the M_z channel so the suite can be
//! shown to catch a broken measurement model.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::correlators::{
    estimate_g2, exact_g2_series, exact_g2_series_with, exact_g4, exact_g4_grid_with, mc_run,
    McConfig, Pattern, PhaseSource,
};
use crate::dynamics::{kraus_pair_with_phase, kraus_superop, superop_m, Axis, Channel, Mode};
use crate::dynamics::{dephasing_lx, ShotChannels, ShotLabel};
use crate::noise::{sample_phases, NoiseModel, ScheduleSegment};
use crate::params::SimParams;
use crate::pauli::{
    anti_half, comm_half, eval_correlation, eval_correlation_with, CorrSignString, PauliOperator,
    Sign,
};
use crate::planner::{optimize_t, plan_map, log_grid, Order};
use crate::spectra::{dft1_at, snr_2nd_rates, snr_2nd_bound, snr_4th_rates};
use crate::correlators::LagSeries;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

/// Perturbation applied to the measurement channels before the checks run.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Fault {
    /// Couples the identity and σ_z components of `M_z` with this strength.
    pub mz_coupling: f64,
}

fn channels(params: &SimParams, fault: Fault) -> ShotChannels {
    let mut ch = ShotChannels::new(params, Mode::Exact).expect("valid params");
    ch.mz.0[(0, 3)] += fault.mz_coupling;
    ch.mz.0[(3, 0)] += fault.mz_coupling;
    ch
}

fn random_operator(rng: &mut ChaCha8Rng) -> PauliOperator {
    let mut r = || rng.random_range(-1.0..1.0);
    PauliOperator::new(r(), r(), r(), r())
}

fn check(name: &str, f: impl FnOnce() -> std::result::Result<String, String>) -> CheckResult {
    match f() {
        Ok(detail) => CheckResult {
            name: name.to_string(),
            passed: true,
            detail,
        },
        Err(detail) => CheckResult {
            name: name.to_string(),
            passed: false,
            detail,
        },
    }
}

fn within(label: &str, value: f64, bound: f64) -> std::result::Result<String, String> {
    if value <= bound {
        Ok(format!("{label} = {value:.3e} <= {bound:.1e}"))
    } else {
        Err(format!("{label} = {value:.3e} > {bound:.1e}"))
    }
}

pub fn run(fault: Fault) -> Report {
    let checks = vec![
        check("pauli-core/hermiticity", hermiticity),
        check("pauli-core/decomposition-identity", decomposition_identity),
        check("pauli-core/classical-scalar", classical_scalar),
        check("pauli-core/correlation-examples", correlation_examples),
        check("measurement-dynamics/channel-identity", channel_identity),
        check("measurement-dynamics/noise-mixing", noise_mixing),
        check("measurement-dynamics/x-dephasing-axis", x_dephasing_axis),
        check("measurement-dynamics/exact-vs-short-time", exact_vs_short),
        check("noise-models/determinism", noise_determinism),
        check("noise-models/white-coherence", white_coherence),
        check("noise-models/unit-schedule", unit_schedule),
        check("correlators/classical-noise-free", || classical_noise_free(fault)),
        check("correlators/noise-factorization", || noise_factorization(fault)),
        check("correlators/mc-vs-exact", mc_vs_exact),
        check("correlators/leading-order", || leading_order(fault)),
        check("spectra-snr/dft1-linearity", dft1_linearity),
        check("spectra-snr/snr-monotonicity", snr_monotonicity),
        check("acquisition-planner/bound-certification", bound_certification),
        check("acquisition-planner/infeasible-zone", infeasible_zone),
        check("acquisition-planner/rescaling-invariance", rescaling_invariance),
    ];
    Report {
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}

type Outcome = std::result::Result<String, String>;

fn hermiticity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let (a, b) = (random_operator(&mut rng), random_operator(&mut rng));
        let (ca, cb) = (a.to_complex(), b.to_complex());
        let anti = ca.anticommutator(&cb).scale(0.5.into());
        let comm = ca.commutator(&cb).scale(num_complex::Complex64::new(0.0, -0.5));
        worst = worst.max(anti.max_imag()).max(comm.max_imag());
        worst = worst.max(anti.real_part().max_abs_diff(&anti_half(&a).apply(&b)));
        worst = worst.max(comm.real_part().max_abs_diff(&comm_half(&a).apply(&b)));
    }
    within("max imaginary part / mismatch", worst, 1e-12)
}

fn decomposition_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let (a, b, r) = (
            random_operator(&mut rng).to_complex(),
            random_operator(&mut rng).to_complex(),
            random_operator(&mut rng).to_complex(),
        );
        let half = num_complex::Complex64::new(0.5, 0.0);
        // [AB,ρ] = A[B,ρ] + [A,ρ]B
        let lhs = a.mul(&b).commutator(&r);
        let rhs = a.mul(&b.commutator(&r)) + a.commutator(&r).mul(&b);
        worst = worst.max(lhs.max_abs_diff(&rhs));
        // ABρ − ρBA = ½{A,[B,ρ]} + ½[A,{B,ρ}]
        let lhs = a.mul(&b).mul(&r) - r.mul(&b).mul(&a);
        let rhs = a.anticommutator(&b.commutator(&r)).scale(half)
            + a.commutator(&b.anticommutator(&r)).scale(half);
        worst = worst.max(lhs.max_abs_diff(&rhs));
    }
    within("max coefficient defect", worst, 1e-12)
}

fn classical_scalar() -> Outcome {
    let rho = PauliOperator::maximally_mixed();
    let b = |t: f64| PauliOperator::identity() * (1.0 + 0.5 * t.sin());
    let times = [2.3, 1.1, 0.4, 0.0];
    let mut worst: f64 = 0.0;
    for pattern in ["+-", "+-+", "--", "+--+", "-+++"] {
        let n = pattern.chars().count();
        let s = CorrSignString::parse(pattern, &times[..n]).map_err(|e| e.to_string())?;
        worst = worst.max(eval_correlation_with(&s, b, &rho).abs());
    }
    let s = CorrSignString::parse("++++", &times).map_err(|e| e.to_string())?;
    let product: f64 = times.iter().map(|&t| 1.0 + 0.5 * t.sin()).product();
    worst = worst.max((eval_correlation_with(&s, b, &rho) - product).abs());
    within("max deviation", worst, 1e-12)
}

fn correlation_examples() -> Outcome {
    let p = SimParams::new(0.7, 1.3, 0.0, 0.1).map_err(|e| e.to_string())?;
    let rho = PauliOperator::maximally_mixed();
    let (a, w) = (p.a, p.omega0);
    let ev = |pat: &str, ts: &[f64]| -> std::result::Result<f64, String> {
        let s = CorrSignString::parse(pat, ts).map_err(|e| e.to_string())?;
        Ok(eval_correlation(&s, &p, &rho))
    };
    let mut worst: f64 = 0.0;
    worst = worst.max((ev("++", &[0.9, 0.0])? - a * a * (w * 0.9).cos()).abs());
    worst = worst.max(ev("+-", &[0.9, 0.0])?.abs());
    worst = worst.max(ev("+-+", &[1.7, 0.9, 0.2])?.abs());
    let t = [2.1, 1.4, 0.6, 0.1];
    let c4 = a.powi(4) * (w * (t[0] - t[1])).sin() * (w * (t[2] - t[3])).sin();
    worst = worst.max((ev("+--+", &t)? - c4).abs());
    within("max deviation from C^{++}, C^{+-}, C^{+-+}, C^{+--+}", worst, 1e-12)
}

fn channel_identity() -> Outcome {
    let mut worst: f64 = 0.0;
    for (alpha, phi) in [(0.2, 0.3), (0.9, 1.7), (1.4, -0.5)] {
        let p = SimParams::from_dimensionless(alpha, phi, 0.0, 1.0).map_err(|e| e.to_string())?;
        let (kp, km) = kraus_pair_with_phase(ShotLabel::recorded(Axis::Y), &p, Mode::Exact, 0.0)
            .map_err(|e| e.to_string())?;
        let sum = kraus_superop(&kp).add(&kraus_superop(&km));
        worst = worst.max(sum.max_abs_diff(&superop_m(Channel::Unread, &p, Mode::Exact)));
    }
    within("max |M⁺ + M⁻ − M₀|", worst, 1e-12)
}

fn noise_mixing() -> Outcome {
    let mut worst: f64 = 0.0;
    let p = SimParams::from_dimensionless(0.3, 0.8, 0.0, 1.0).map_err(|e| e.to_string())?;
    let ch = ShotChannels::new(&p, Mode::ShortTime).map_err(|e| e.to_string())?;
    for phase in [-1.0, -0.2, 0.5, 1.2] {
        let (kp, km) =
            kraus_pair_with_phase(ShotLabel::recorded(Axis::Y), &p, Mode::ShortTime, phase)
                .map_err(|e| e.to_string())?;
        let d = kraus_superop(&kp).sub(&kraus_superop(&km));
        let mixed = ch.mx.scale(phase.sin()).add(&ch.my.scale(phase.cos()));
        worst = worst.max(d.max_abs_diff(&mixed));
    }
    within("max |M⁺ − M⁻ − (sin φ M_x + cos φ M_y)|", worst, 1e-12)
}

fn x_dephasing_axis() -> Outcome {
    let alpha = 0.37;
    let r = dephasing_lx(alpha).apply(&PauliOperator::new(0.5, 0.3, -0.2, 0.4));
    let err = (r.cx - 0.3)
        .abs()
        .max((r.cy + 0.2 * alpha.cos()).abs())
        .max((r.cz - 0.4 * alpha.cos()).abs());
    within("max deviation", err, 1e-14)
}

fn exact_vs_short() -> Outcome {
    let mut worst_ratio: f64 = 0.0;
    for i in 0..=6 {
        for j in 0..=6 {
            let (alpha, phi) = (0.05 * i as f64, 0.05 * j as f64);
            let p = SimParams::from_dimensionless(alpha, phi, 0.0, 1.0).map_err(|e| e.to_string())?;
            let bound = 10.0 * (alpha * phi + alpha.powi(3));
            for c in [Channel::Unread, Channel::X, Channel::Y, Channel::Z] {
                let d = superop_m(c, &p, Mode::Exact).max_abs_diff(&superop_m(c, &p, Mode::ShortTime));
                if bound > 0.0 {
                    worst_ratio = worst_ratio.max(d / bound);
                } else if d > 1e-14 {
                    return Err(format!("α={alpha}, φ={phi}: {d:.2e} with zero bound"));
                }
            }
        }
    }
    within("max diff / 10(αφ+α³)", worst_ratio, 1.0)
}

fn noise_determinism() -> Outcome {
    let m = NoiseModel::OrnsteinUhlenbeck {
        variance: 1.0,
        tau_c: 0.5,
    };
    let a = sample_phases(&m, 2000, 0.1, 42).map_err(|e| e.to_string())?;
    let b = sample_phases(&m, 2000, 0.1, 42).map_err(|e| e.to_string())?;
    if a == b {
        Ok("identical paths".into())
    } else {
        Err("paths differ for identical inputs".into())
    }
}

fn white_coherence() -> Outcome {
    let m = NoiseModel::White { s_c: 1.0 };
    let tau = 0.5;
    let p = sample_phases(&m, 100_000, tau, 8).map_err(|e| e.to_string())?;
    let n = p.len() as f64;
    let cos: Vec<f64> = p.phases.iter().map(|x| x.cos()).collect();
    let mean = cos.iter().sum::<f64>() / n;
    let var = cos.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let se = (var / n).sqrt();
    let z = (mean - m.coherence_factor(tau)).abs() / se;
    within("|⟨cos φ⟩ − L_C| / stderr", z, 3.0)
}

fn unit_schedule() -> Outcome {
    let inner = NoiseModel::OrnsteinUhlenbeck {
        variance: 0.8,
        tau_c: 0.3,
    };
    let scaled = NoiseModel::Scaled {
        inner: Box::new(inner.clone()),
        schedule: vec![ScheduleSegment {
            shots: 1000,
            amplitude: 1.0,
        }],
    };
    let a = sample_phases(&inner, 1000, 0.2, 3).map_err(|e| e.to_string())?;
    let b = sample_phases(&scaled, 1000, 0.2, 3).map_err(|e| e.to_string())?;
    if a.phases == b.phases {
        Ok("identical phases".into())
    } else {
        Err("unit schedule changed the path".into())
    }
}

fn classical_noise_free(fault: Fault) -> Outcome {
    let p = SimParams::from_dimensionless(0.0, 0.4, 0.01, 1.0).map_err(|e| e.to_string())?;
    let ch = channels(&p, fault);
    let ou = NoiseModel::OrnsteinUhlenbeck {
        variance: 0.5,
        tau_c: 3.0,
    };
    let tg = NoiseModel::Telegraph {
        amplitude: 0.6,
        flip_rate: 0.2,
    };
    let path = sample_phases(&tg, 20_000, 1.0, 5).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for src in [PhaseSource::Model(&ou), PhaseSource::Path(&path)] {
        let g = exact_g4_grid_with(&ch, 5, 5, src).map_err(|e| e.to_string())?;
        worst = worst.max(g.iter().fold(0.0, |m, x| m.max(x.abs())));
    }
    if worst > 1e-12 {
        return Err(format!("max |G⁴| at a = 0 is {worst:.3e} > 1e-12"));
    }
    let g2 = exact_g2_series_with(&ch, 3, PhaseSource::Model(&ou)).map_err(|e| e.to_string())?;
    if g2[0].abs() < 1e-6 {
        return Err(format!("G²(1) = {:.3e} should carry the noise correlation", g2[0]));
    }
    Ok(format!("max |G⁴| = {worst:.1e}; G²(1) = {:.4}", g2[0]))
}

fn noise_factorization(fault: Fault) -> Outcome {
    let p = SimParams::from_dimensionless(0.25, 0.6, 0.005, 1.0).map_err(|e| e.to_string())?;
    let ch = channels(&p, fault);
    let white = NoiseModel::White { s_c: 0.4 };
    let l2 = white.coherence_factor(1.0).powi(2);
    let quiet = exact_g4_grid_with(&ch, 3, 3, PhaseSource::Noiseless).map_err(|e| e.to_string())?;
    let noisy =
        exact_g4_grid_with(&ch, 3, 3, PhaseSource::Model(&white)).map_err(|e| e.to_string())?;
    let worst = quiet
        .iter()
        .zip(&noisy)
        .fold(0.0f64, |m, (q, n)| m.max((n - l2 * q).abs()));
    within("max |G⁴_noisy − L_C² G⁴_quiet|", worst, 1e-14)
}

fn mc_vs_exact() -> Outcome {
    let p = SimParams::from_dimensionless(0.3, 0.5, 0.01, 1.0).map_err(|e| e.to_string())?;
    let cfg = McConfig::new(Pattern::Xy, 100_000).with_segment_cycles(1_000);
    let rec = mc_run(&cfg, &p, &NoiseModel::None, 2024, 4).map_err(|e| e.to_string())?;
    let g = estimate_g2(&rec, 5, p.tau).map_err(|e| e.to_string())?;
    let exact =
        exact_g2_series(5, &p, PhaseSource::Noiseless, Mode::Exact).map_err(|e| e.to_string())?;
    let z = (1..=5)
        .map(|n| (g.values[n] - exact[n - 1]).abs() / g.stderr[n])
        .fold(0.0, f64::max);
    within("max |MC − exact| / stderr over lags 1..5", z, 4.0)
}

fn leading_order(fault: Fault) -> Outcome {
    let (a, w0) = (1.0, 1.0);
    let tau = 0.02;
    let p = SimParams::new(a, w0, 0.0, tau).map_err(|e| e.to_string())?;
    let ch = channels(&p, fault);
    let rho = PauliOperator::maximally_mixed();
    let g2 = exact_g2_series_with(&ch, 60, PhaseSource::Noiseless).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for n in [1usize, 10, 30, 60] {
        let c = a * a * (w0 * n as f64 * tau).cos();
        worst = worst.max((g2[n - 1] / (tau * tau) - c).abs() / (a * a));
    }
    for (u, v, w) in [(10, 5, 10), (20, 3, 15), (30, 10, 25)] {
        let g4 = exact_g4(u, v, w, &p, PhaseSource::Noiseless, Mode::Exact)
            .map_err(|e| e.to_string())?;
        // recorded shot times, latest first
        let tn = 0.0;
        let tm = (2 * w + 1) as f64 * tau;
        let tk = tm + (2 * v) as f64 * tau;
        let tj = tk + (2 * u - 1) as f64 * tau;
        let s = CorrSignString::new(vec![
            (Sign::Plus, tj),
            (Sign::Minus, tk),
            (Sign::Minus, tm),
            (Sign::Plus, tn),
        ])
        .map_err(|e| e.to_string())?;
        let c4 = eval_correlation(&s, &p, &rho);
        worst = worst.max((g4 / tau.powi(4) - c4).abs() / a.powi(4));
    }
    within("max |G/τ^k − C| / a^k at aτ = 0.02", worst, 0.05)
}

fn dft1_linearity() -> Outcome {
    let a: Vec<f64> = (0..20).map(|n| (0.3 * n as f64).cos() * 0.9f64.powi(n)).collect();
    let b: Vec<f64> = (0..20).map(|n| 0.5 / (1.0 + n as f64)).collect();
    let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 2.0 * x - 3.0 * y).collect();
    let (sa, sb, ss) = (
        LagSeries::from_model(1.0, a),
        LagSeries::from_model(1.0, b),
        LagSeries::from_model(1.0, sum),
    );
    let mut worst: f64 = 0.0;
    for w in [0.0, 0.3, 1.1, 2.9] {
        let lhs = dft1_at(&ss, 16, w).map_err(|e| e.to_string())?;
        let rhs = 2.0 * dft1_at(&sa, 16, w).map_err(|e| e.to_string())?
            - 3.0 * dft1_at(&sb, 16, w).map_err(|e| e.to_string())?;
        worst = worst.max((lhs - rhs).norm());
    }
    within("max linearity defect", worst, 1e-12)
}

fn snr_monotonicity() -> Outcome {
    let mut prev = 0.0;
    for k in 0..60 {
        let t = 10f64.powf(0.2 * k as f64);
        let s = snr_4th_rates(1.0, 0.05, 0.1, 3.0, t);
        if s <= prev {
            return Err(format!("SNR_4th not increasing at T = {t:.2e}"));
        }
        prev = s;
    }
    Ok("SNR_4th strictly increasing over T ∈ [1, 1e12)".into())
}

fn bound_certification() -> Outcome {
    let (a, gamma0, s_c) = (1.0, 0.05, 2.0);
    let bound = snr_2nd_bound(a, gamma0, s_c);
    let gmax = crate::params::gamma_m_max(a);
    let mut sup: f64 = 0.0;
    for i in 1..=2000 {
        let gm = gmax * i as f64 / 2000.0;
        for k in 0..=24 {
            let t = 10f64.powf(0.5 * k as f64);
            sup = sup.max(snr_2nd_rates(a, gamma0, gm, s_c, t));
        }
    }
    within("sup SNR_2nd / bound", sup / bound, 1.0 + 1e-6)
}

fn infeasible_zone() -> Outcome {
    let s = log_grid(0.1, 100.0, 25);
    let g = log_grid(1e-3, 1.0, 25);
    let map = plan_map(Order::Second, &s, &g, 1.0, 0.18).map_err(|e| e.to_string())?;
    let wrong = map
        .iter()
        .filter(|p| p.feasible != (p.gamma0 * p.s_c < 0.5))
        .count();
    let four = plan_map(Order::Fourth, &s, &g, 1.0, 0.18).map_err(|e| e.to_string())?;
    let inf4 = four.iter().filter(|p| !p.feasible).count();
    if wrong == 0 && inf4 == 0 {
        Ok(format!("{} cells; zone boundary γ₀S_C = a²/2 reproduced", map.len()))
    } else {
        Err(format!("{wrong} misclassified 2nd-order cells, {inf4} infeasible 4th-order cells"))
    }
}

fn rescaling_invariance() -> Outcome {
    let mut worst: f64 = 0.0;
    for order in [Order::Second, Order::Fourth] {
        for (g0, s) in [(0.01, 1.0), (0.1, 3.0), (0.002, 20.0)] {
            let base = optimize_t(order, g0, s, 1.0, 0.18).map_err(|e| e.to_string())?;
            let k = 7.3;
            // a → ka, γ₀ → kγ₀, S_C → kS_C, γ_M^max → kγ_M^max, T → T/k
            let scaled = optimize_t(order, k * g0, k * s, k, 0.18 * k).map_err(|e| e.to_string())?;
            if let (Some(t0), Some(t1)) = (base.t_opt, scaled.t_opt) {
                worst = worst.max((t1 * k / t0 - 1.0).abs());
            } else if base.feasible != scaled.feasible {
                return Err("feasibility changed under rescaling".into());
            }
        }
    }
    within("max relative change of T_opt·a", worst, 1e-5)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_suite_passes() {
        let r = run(Fault::default());
        for c in &r.checks {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
        assert!(r.passed);
    }

    #[test]
    fn injected_fault_is_caught() {
        let r = run(Fault { mz_coupling: 1e-3 });
        assert!(!r.passed);
        let c = r
            .checks
            .iter()
            .find(|c| c.name == "correlators/classical-noise-free")
            .unwrap();
        assert!(!c.passed, "{}", c.detail);
    }
}
