use proptest::prelude::*;
use qusense_core::dynamics::{Axis, Mode, ShotChannels};
use qusense_core::noise::{sample_phases, NoiseModel};
use qusense_core::pauli::{PauliOperator, Sign};
use qusense_core::planner::{optimize_t, Order};
use qusense_core::spectra::{snr_2nd_bound, snr_2nd_rates, snr_4th_rates};
use qusense_core::SimParams;

fn unit_ball() -> impl Strategy<Value = [f64; 3]> {
    (0.0..1.0f64, 0.0..std::f64::consts::PI, 0.0..std::f64::consts::TAU).prop_map(|(r, th, ph)| {
        [r * th.sin() * ph.cos(), r * th.sin() * ph.sin(), r * th.cos()]
    })
}

fn mode() -> impl Strategy<Value = Mode> {
    prop_oneof![Just(Mode::Exact), Just(Mode::ShortTime)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // Each outcome branch is a CP map, so it sends states to subnormalized states,
    // and the two branches of one readout add up to the unread channel.
    #[test]
    fn branches_are_physical(
        alpha in 0.0..1.5f64, phi in -3.0..3.0f64, g in 0.0..0.5f64,
        noise in -2.0..2.0f64, r in unit_ball(), mode in mode(),
    ) {
        let p = SimParams::from_dimensionless(alpha, phi, g, 1.0).unwrap();
        let ch = ShotChannels::new(&p, mode).unwrap();
        let rho = PauliOperator::from_bloch(r);
        for axis in [Axis::Y, Axis::Z] {
            let plus = ch.branch(axis, Sign::Plus, noise).apply(&rho);
            let minus = ch.branch(axis, Sign::Minus, noise).apply(&rho);
            for out in [&plus, &minus] {
                let tr = out.trace();
                prop_assert!(tr > -1e-12 && tr < 1.0 + 1e-12);
                if tr > 1e-9 {
                    let b = out.bloch();
                    let rad = (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt();
                    prop_assert!(rad <= 1.0 + 1e-9, "radius {rad}");
                }
            }
            prop_assert!((plus.trace() + minus.trace() - 1.0).abs() < 1e-12);
        }
        let unread = ch.idle().apply(&rho);
        prop_assert!((unread.trace() - 1.0).abs() < 1e-12);
        prop_assert!(unread.bloch_radius() <= rho.bloch_radius() + 1e-12);
    }

    #[test]
    fn noise_paths_are_reproducible(seed in any::<u64>(), n in 1usize..200) {
        let m = NoiseModel::OrnsteinUhlenbeck { variance: 1.3, tau_c: 2.0 };
        let a = sample_phases(&m, n, 0.1, seed).unwrap();
        let b = sample_phases(&m, n, 0.1, seed).unwrap();
        prop_assert_eq!(&a.phases, &b.phases);
        let longer = sample_phases(&m, n + 7, 0.1, seed).unwrap();
        prop_assert_eq!(&longer.phases[..n], &a.phases[..]);
    }

    #[test]
    fn snr_grows_with_time(
        a in 0.1..5.0f64, g0 in 0.0..0.2f64, gm in 0.01..0.5f64,
        s_c in 0.0..1.0f64, t in 1.0..1e4f64,
    ) {
        prop_assert!(snr_2nd_rates(a, g0, gm, s_c, 2.0 * t) >= snr_2nd_rates(a, g0, gm, s_c, t));
        prop_assert!(snr_4th_rates(a, g0, gm, s_c, 2.0 * t) > snr_4th_rates(a, g0, gm, s_c, t));
        if g0 > 0.0 && s_c > 0.0 {
            let bound = snr_2nd_bound(a, g0, s_c);
            prop_assert!(snr_2nd_rates(a, g0, gm, s_c, t) <= bound * (1.0 + 1e-9));
        }
    }

    // Any feasible plan actually reaches unit SNR at its own (γ_M, T).
    #[test]
    fn plans_reach_unit_snr(a in 0.5..3.0f64, g0 in 0.0..0.1f64, s_c in 0.0..2.0f64) {
        let gmax = qusense_core::params::gamma_m_max(a);
        for order in [Order::Second, Order::Fourth] {
            let pt = optimize_t(order, g0, s_c, a, gmax).unwrap();
            if !pt.feasible {
                continue;
            }
            let (gm, t) = (pt.gamma_m_opt.unwrap(), pt.t_opt.unwrap());
            prop_assert!(gm > 0.0 && gm <= gmax * (1.0 + 1e-12));
            let snr = match order {
                Order::Second => snr_2nd_rates(a, g0, gm, s_c, t),
                Order::Fourth => snr_4th_rates(a, g0, gm, s_c, t),
            };
            prop_assert!((snr - 1.0).abs() < 1e-6, "{order:?} snr {snr}");
        }
    }
}

#[test]
fn ou_phase_variance_matches_samples() {
    let m = NoiseModel::OrnsteinUhlenbeck { variance: 0.7, tau_c: 0.5 };
    let tau = 0.2;
    let path = sample_phases(&m, 400_000, tau, 11).unwrap();
    let n = path.len() as f64;
    let var = path.phases.iter().map(|x| x * x).sum::<f64>() / n;
    let expect = m.phase_variance(tau);
    assert!((var / expect - 1.0).abs() < 0.02, "{var} vs {expect}");
    let lag1 = path.phases.windows(2).map(|w| w[0] * w[1]).sum::<f64>() / (n - 1.0);
    let expect1 = m.phase_covariance(1, tau);
    assert!((lag1 - expect1).abs() < 0.02 * expect, "{lag1} vs {expect1}");
}
