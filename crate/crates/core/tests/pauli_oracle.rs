//! Correlation evaluator against explicit 2×2 matrices and the known low-order forms.

use nalgebra::Matrix2;
use num_complex::Complex64 as C;
use proptest::prelude::*;
use qusense_core::pauli::{
    anti_half, comm_half, eval_correlation, eval_correlation_with, pauli_mul, CorrSignString,
    PauliOperator, Sign,
};
use qusense_core::SimParams;

type M2 = Matrix2<C>;

fn sx() -> M2 {
    M2::new(C::ZERO, C::ONE, C::ONE, C::ZERO)
}

fn sz() -> M2 {
    M2::new(C::ONE, C::ZERO, C::ZERO, -C::ONE)
}

/// `a e^{iHt} σ_x e^{−iHt}` with `H = ω₀σ_z/2`, via the matrix exponential.
fn field_matrix(a: f64, w0: f64, t: f64) -> M2 {
    let h = sz() * C::new(0.5 * w0, 0.0);
    let u = (h * C::new(0.0, t)).exp();
    u * sx() * u.adjoint() * C::new(a, 0.0)
}

fn oracle(signs: &[(Sign, f64)], a: f64, w0: f64, rho: M2) -> C {
    let mut s = rho;
    for &(sign, t) in signs.iter().rev() {
        let b = field_matrix(a, w0, t);
        s = match sign {
            Sign::Plus => (b * s + s * b) * C::new(0.5, 0.0),
            Sign::Minus => (b * s - s * b) * C::new(0.0, -0.5),
        };
    }
    s.trace()
}

fn sign_strategy(n: usize) -> impl Strategy<Value = Vec<Sign>> {
    prop::collection::vec(prop_oneof![Just(Sign::Plus), Just(Sign::Minus)], n)
}

fn descending(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..1.0, n).prop_map(|gaps| {
        let mut t = 0.0;
        let mut out: Vec<f64> = gaps
            .iter()
            .map(|g| {
                t += g;
                t
            })
            .collect();
        out.reverse();
        out
    })
}

fn operator() -> impl Strategy<Value = PauliOperator> {
    (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0)
        .prop_map(|(a, b, c, d)| PauliOperator::new(a, b, c, d))
}

#[test]
fn low_order_correlations() {
    let p = SimParams::new(0.8, 2.1, 0.0, 0.1).unwrap();
    let rho = PauliOperator::maximally_mixed();
    let (a, w) = (p.a, p.omega0);
    let ev = |pat: &str, t: &[f64]| eval_correlation(&CorrSignString::parse(pat, t).unwrap(), &p, &rho);

    let t = [1.3, 0.4, -0.2, -1.0];
    assert!((ev("++", &t[..2]) - a * a * (w * 0.9).cos()).abs() < 1e-13);
    assert!(ev("+-", &t[..2]).abs() < 1e-13);
    assert!(ev("+-+", &t[..3]).abs() < 1e-13);
    let c4 = a.powi(4) * (w * (t[0] - t[1])).sin() * (w * (t[2] - t[3])).sin();
    assert!((ev("+--+", &t) - c4).abs() < 1e-13);
}

#[test]
fn fourth_order_is_irreducible_for_mixed_state() {
    // C^{+--+} does not factor into products of second-order terms, which vanish here.
    let p = SimParams::new(1.0, 1.0, 0.0, 0.1).unwrap();
    let rho = PauliOperator::maximally_mixed();
    let t = [3.0, 2.0, 1.0, 0.0];
    let c4 = eval_correlation(&CorrSignString::parse("+--+", &t).unwrap(), &p, &rho);
    let c2a = eval_correlation(&CorrSignString::parse("+-", &t[..2]).unwrap(), &p, &rho);
    let c2b = eval_correlation(&CorrSignString::parse("-+", &t[2..]).unwrap(), &p, &rho);
    assert!(c4.abs() > 0.1);
    assert!((c2a * c2b).abs() < 1e-14);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn evaluator_matches_matrix_oracle(
        n in 1usize..=5,
        seed_signs in sign_strategy(5),
        times in descending(5),
        a in 0.1f64..2.0,
        w0 in -3.0f64..3.0,
        r in (-0.5f64..0.5, -0.5f64..0.5, -0.5f64..0.5),
    ) {
        let rho = PauliOperator::new(0.5, r.0 * 0.5, r.1 * 0.5, r.2 * 0.5);
        let entries: Vec<(Sign, f64)> = seed_signs[..n].iter().copied().zip(times[..n].iter().copied()).collect();
        let s = CorrSignString::new(entries.clone()).unwrap();
        let p = SimParams::new(a, w0, 0.0, 0.1).unwrap();
        let got = eval_correlation(&s, &p, &rho);
        let want = oracle(&entries, a, w0, rho.matrix());
        prop_assert!(want.im.abs() < 1e-12);
        prop_assert!((got - want.re).abs() < 1e-11, "got {got}, want {}", want.re);
    }

    #[test]
    fn superoperators_keep_hermiticity(a in operator(), b in operator()) {
        let (ca, cb) = (a.to_complex(), b.to_complex());
        let anti = ca.anticommutator(&cb).scale(C::new(0.5, 0.0));
        let comm = ca.commutator(&cb).scale(C::new(0.0, -0.5));
        prop_assert!(anti.max_imag() < 1e-12 && comm.max_imag() < 1e-12);
        prop_assert!(anti.real_part().max_abs_diff(&anti_half(&a).apply(&b)) < 1e-12);
        prop_assert!(comm.real_part().max_abs_diff(&comm_half(&a).apply(&b)) < 1e-12);
    }

    #[test]
    fn product_matches_matrices(a in operator(), b in operator()) {
        let m = a.matrix() * b.matrix();
        let p = pauli_mul(&a, &b).matrix();
        prop_assert!((m - p).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn classical_scalar_kills_quantum_strings(
        n in 1usize..=5,
        signs in sign_strategy(5),
        times in descending(5),
        level in 0.1f64..3.0,
    ) {
        let entries: Vec<(Sign, f64)> = signs[..n].iter().copied().zip(times[..n].iter().copied()).collect();
        let s = CorrSignString::new(entries).unwrap();
        let b = |t: f64| PauliOperator::identity() * (level + t.cos());
        let value = eval_correlation_with(&s, b, &PauliOperator::maximally_mixed());
        if s.is_quantum() {
            prop_assert!(value.abs() < 1e-12);
        } else {
            let product: f64 = times[..n].iter().map(|&t| level + t.cos()).product();
            prop_assert!((value - product).abs() < 1e-10 * product.abs().max(1.0));
        }
    }

    #[test]
    fn non_descending_times_rejected(t in 0.0f64..5.0, dt in 0.0f64..1.0) {
        prop_assert!(CorrSignString::parse("++", &[t, t + dt]).is_err());
    }
}
