//! Estimators on planted records with known correlations, and the
//! end-to-end path from simulated records to a spectrum.

use proptest::prelude::*;
use qusense_core::correlators::{
    closedform_g2, estimate_g2, estimate_g4, exact_g2_series, mc_run, LagSeries, McConfig,
    Pattern, PhaseSource, ShotRecord,
};
use qusense_core::dynamics::Mode;
use qusense_core::noise::NoiseModel;
use qusense_core::spectra::{dft1_at, optimal_n_f, shot_noise_2nd};
use qusense_core::SimParams;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Symmetric Markov chain of ±1 with `⟨s_i s_{i+n}⟩ = rho^n`.
fn markov(n: usize, rho: f64, rng: &mut ChaCha8Rng) -> Vec<i8> {
    let keep = 0.5 * (1.0 + rho);
    let mut s: i8 = if rng.random_bool(0.5) { 1 } else { -1 };
    (0..n)
        .map(|_| {
            if !rng.random_bool(keep) {
                s = -s;
            }
            s
        })
        .collect()
}

#[test]
fn g2_recovers_planted_autocorrelation() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let rho = 0.6;
    let segments: Vec<Vec<i8>> = (0..50).map(|_| markov(20_000, rho, &mut rng)).collect();
    let rec = ShotRecord::from_segments(Pattern::Xy, segments).unwrap();
    let g = estimate_g2(&rec, 8, 0.5).unwrap();
    assert_eq!(g.values[0], 1.0);
    for n in 1..=8 {
        let want = rho.powi(n as i32);
        let z = (g.values[n] - want).abs() / g.stderr[n];
        assert!(z < 4.0, "lag {n}: {} ± {} vs {want}", g.values[n], g.stderr[n]);
    }
    assert!((g.dt - 0.5).abs() < 1e-15);
}

#[test]
fn g4_recovers_planted_correlation() {
    // z outputs fixed at +1, so the cell reduces to ⟨y_i y_{i+u+v+w}⟩ = rho^{u+v+w}
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let rho = 0.8;
    let segments: Vec<Vec<i8>> = (0..40)
        .map(|_| {
            markov(10_000, rho, &mut rng)
                .into_iter()
                .flat_map(|y| [y, 1])
                .collect()
        })
        .collect();
    let rec = ShotRecord::from_segments(Pattern::XyXz, segments).unwrap();
    let g = estimate_g4(&rec, 3, 2, 1.0).unwrap();
    assert_eq!(g.dt, 2.0);
    for (u, v, w) in g.cells() {
        let want = rho.powi((u + v + w) as i32);
        let z = (g.get(u, v, w) - want).abs() / g.stderr_at(u, v, w);
        assert!(z < 4.0, "({u},{v},{w}): {} vs {want}", g.get(u, v, w));
    }
}

#[test]
fn independent_outputs_give_zero_with_honest_errors() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let segments: Vec<Vec<i8>> = (0..100)
        .map(|_| (0..4_000).map(|_| if rng.random_bool(0.5) { 1 } else { -1 }).collect())
        .collect();
    let rec = ShotRecord::from_segments(Pattern::Xy, segments).unwrap();
    let g = estimate_g2(&rec, 20, 1.0).unwrap();
    let expected_se = (1.0 / (100.0 * 3_980.0f64)).sqrt();
    let mut chi2 = 0.0;
    for n in 1..=20 {
        assert!((g.stderr[n] / expected_se - 1.0).abs() < 0.3, "lag {n} se {}", g.stderr[n]);
        chi2 += (g.values[n] / g.stderr[n]).powi(2);
    }
    // χ² with 20 degrees of freedom, far tail
    assert!(chi2 < 50.0, "chi2 {chi2}");
}

#[test]
fn estimators_reject_wrong_pattern_and_short_records() {
    let rec = ShotRecord::from_outputs(Pattern::Xy, vec![1; 10]).unwrap();
    assert!(estimate_g4(&rec, 1, 1, 1.0).is_err());
    assert!(estimate_g2(&rec, 10, 1.0).is_err());
    assert!(ShotRecord::from_outputs(Pattern::XyXz, vec![1; 3]).is_err());
    assert!(ShotRecord::from_outputs(Pattern::Xy, vec![1, 0]).is_err());
}

/// Record → G² → dft1 at ω₀ against the same transform of the exact series.
#[test]
fn pipeline_reproduces_resonance_value() {
    let p = SimParams::from_dimensionless(0.3, 0.6, 0.02, 1.0).unwrap();
    let noise = NoiseModel::White { s_c: 0.3 };
    let n_f = optimal_n_f(&p);
    let m = 400_000;
    let cfg = McConfig::new(Pattern::Xy, m).with_segment_cycles(10_000);
    let rec = mc_run(&cfg, &p, &noise, 31, 2).unwrap();
    let est = estimate_g2(&rec, n_f, p.tau).unwrap();
    let z = dft1_at(&est, n_f, p.omega0).unwrap();
    let exact = LagSeries::from_lag_one(
        p.tau,
        exact_g2_series(n_f, &p, PhaseSource::Model(&noise), Mode::Exact).unwrap(),
    );
    let want = dft1_at(&exact, n_f, p.omega0).unwrap();
    let sigma = shot_noise_2nd(n_f, m);
    assert!((z - want).norm() < 4.0 * sigma, "{z} vs {want} (σ {sigma})");
    // white noise leaves lags ≥ 1 untouched apart from L_C²
    let l2 = noise.coherence_factor(p.tau).powi(2);
    for n in 1..5 {
        let c = closedform_g2(n, &p, &noise);
        assert!((exact.values[n] - c).abs() < 0.05 * l2 * p.alpha().sin().powi(2));
    }
    assert!(want.norm() > 10.0 * sigma);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn segments_tile_the_run(cycles in 1u64..50_000, seg in 1u64..5_000) {
        let cfg = McConfig::new(Pattern::Xy, cycles).with_segment_cycles(seg);
        let s = cfg.segments();
        prop_assert_eq!(s.iter().map(|x| x.1).sum::<u64>(), cycles);
        let lo = s.iter().map(|x| x.1).min().unwrap();
        let hi = s.iter().map(|x| x.1).max().unwrap();
        prop_assert!(hi - lo <= 1 && hi <= seg);
        for w in s.windows(2) {
            prop_assert_eq!(w[0].0 + w[0].1, w[1].0);
        }
    }

    #[test]
    fn records_do_not_depend_on_shards(seed in any::<u64>(), shards in 1usize..9) {
        let p = SimParams::from_dimensionless(0.4, 0.7, 0.01, 1.0).unwrap();
        let noise = NoiseModel::OrnsteinUhlenbeck { variance: 0.2, tau_c: 2.0 };
        let cfg = McConfig::new(Pattern::XyXz, 3_000).with_segment_cycles(400);
        let a = mc_run(&cfg, &p, &noise, seed, 1).unwrap();
        let b = mc_run(&cfg, &p, &noise, seed, shards).unwrap();
        let oa: Vec<i8> = a.segments.iter().flat_map(|s| s.outputs.clone()).collect();
        let ob: Vec<i8> = b.segments.iter().flat_map(|s| s.outputs.clone()).collect();
        prop_assert_eq!(oa, ob);
    }
}
