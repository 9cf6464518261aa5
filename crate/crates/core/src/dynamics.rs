//! Conditional evolutions, Kraus pairs and the measurement superoperators.
//!
//! One shot entangles the sensor (prepared along x) with the target for τ and
//! reads the sensor out along β. Traced over the sensor, the shot acts on the
//! target through four superoperators:
//!
//! * `M₀ = ½(U₊ρU₊† + U₋ρU₋†)`: output discarded;
//! * `M_x = ½(U₊ρU₋† + U₋ρU₊†)`;
//! * `M_y = (i/2)(U₊ρU₋† − U₋ρU₊†)`;
//! * `M_z = ½(U₊ρU₊† − U₋ρU₋†)`.
//!
//! with `U± = exp[−i(ω₀I_z ± aI_x)τ]`.

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::params::SimParams;
use crate::pauli::{anti_half, comm_half, PauliOperator, Sign, SuperOperator};

type C2 = Matrix2<Complex64>;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Exact,
    ShortTime,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }
}

/// Which of the four measurement superoperators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    Unread,
    X,
    Y,
    Z,
}

/// A shot in a sequence. The sensor is always prepared along x.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ShotLabel {
    pub readout: Option<Axis>,
}

impl ShotLabel {
    pub const fn recorded(axis: Axis) -> Self {
        Self {
            readout: Some(axis),
        }
    }

    pub const fn idle() -> Self {
        Self { readout: None }
    }

    pub fn is_recorded(&self) -> bool {
        self.readout.is_some()
    }

    /// `"xy"`, `"xz"`, ... or `"x-"` for an idle shot.
    pub fn name(&self) -> String {
        match self.readout {
            Some(axis) => format!("x{}", axis.name()),
            None => "x-".to_string(),
        }
    }
}

/// `exp(−i h·σ)` in closed form.
pub fn su2_exp(h: [f64; 3]) -> C2 {
    let norm = (h[0] * h[0] + h[1] * h[1] + h[2] * h[2]).sqrt();
    let c = Complex64::new(norm.cos(), 0.0);
    if norm == 0.0 {
        return C2::identity();
    }
    let s = norm.sin() / norm;
    let (nx, ny, nz) = (h[0] * s, h[1] * s, h[2] * s);
    // cos|h| − i sin|h| ĥ·σ
    C2::new(
        c - I * nz,
        -I * nx - Complex64::new(ny, 0.0),
        -I * nx + Complex64::new(ny, 0.0),
        c + I * nz,
    )
}

fn sign_value(sign: Sign) -> f64 {
    match sign {
        Sign::Plus => 1.0,
        Sign::Minus => -1.0,
    }
}

/// Target evolution conditioned on the sensor being in `|±⟩` (`S_z = ±½`).
pub fn conditional_unitary(sign: Sign, params: &SimParams, mode: Mode) -> C2 {
    let (alpha, phi) = (params.alpha(), params.phi());
    let s = sign_value(sign);
    match mode {
        Mode::Exact => su2_exp([0.5 * s * alpha, 0.0, 0.5 * phi]),
        Mode::ShortTime => su2_exp([0.0, 0.0, 0.5 * phi]) * su2_exp([0.5 * s * alpha, 0.0, 0.0]),
    }
}

/// Kraus pair `(M⁺, M⁻)` of a recorded shot whose sensor picked up the extra
/// noise phase `noise_phase`.
pub fn kraus_pair_with_phase(
    label: ShotLabel,
    params: &SimParams,
    mode: Mode,
    noise_phase: f64,
) -> Result<(C2, C2)> {
    let axis = label
        .readout
        .ok_or_else(|| invalid("label", "idle shot has no Kraus pair"))?;
    let up = conditional_unitary(Sign::Plus, params, mode)
        * Complex64::from_polar(1.0, -0.5 * noise_phase);
    let um = conditional_unitary(Sign::Minus, params, mode)
        * Complex64::from_polar(1.0, 0.5 * noise_phase);
    let half = Complex64::new(0.5, 0.0);
    Ok(match axis {
        Axis::X => ((up + um) * half, (up - um) * half),
        Axis::Y => ((up - um * I) * half, (up + um * I) * half),
        Axis::Z => {
            let r = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            (up * r, um * r)
        }
    })
}

pub fn kraus_pair(label: ShotLabel, params: &SimParams, mode: Mode) -> Result<(C2, C2)> {
    kraus_pair_with_phase(label, params, mode, 0.0)
}

/// `ρ ↦ KρK†`.
pub fn kraus_superop(k: &C2) -> SuperOperator {
    let kd = k.adjoint();
    SuperOperator::from_map(|rho| k * rho * kd)
}

/// Bloch rotation by `phi` about z, i.e. conjugation by `e^{−iφI_z}`.
pub fn rotation_z(phi: f64) -> SuperOperator {
    let (s, c) = phi.sin_cos();
    let mut m = SuperOperator::identity();
    m.0[(1, 1)] = c;
    m.0[(1, 2)] = -s;
    m.0[(2, 1)] = s;
    m.0[(2, 2)] = c;
    m
}

/// `(2I_x⁺)²`: projector onto span{𝟙, σ_x}.
fn x_projector() -> SuperOperator {
    let a = anti_half(&PauliOperator::sigma_x());
    a.compose(&a)
}

pub fn superop_m(channel: Channel, params: &SimParams, mode: Mode) -> SuperOperator {
    match mode {
        Mode::Exact => {
            let up = conditional_unitary(Sign::Plus, params, Mode::Exact);
            let um = conditional_unitary(Sign::Minus, params, Mode::Exact);
            let (upd, umd) = (up.adjoint(), um.adjoint());
            let half = Complex64::new(0.5, 0.0);
            match channel {
                Channel::Unread => {
                    SuperOperator::from_map(|r| (up * r * upd + um * r * umd) * half)
                }
                Channel::X => SuperOperator::from_map(|r| (up * r * umd + um * r * upd) * half),
                Channel::Y => {
                    SuperOperator::from_map(|r| (up * r * umd - um * r * upd) * (I * half))
                }
                Channel::Z => SuperOperator::from_map(|r| (up * r * upd - um * r * umd) * half),
            }
        }
        Mode::ShortTime => {
            let alpha = params.alpha();
            let rot = rotation_z(params.phi());
            let p = x_projector();
            let inner = match channel {
                Channel::Unread => SuperOperator::identity()
                    .scale(alpha.cos())
                    .add(&p.scale(1.0 - alpha.cos())),
                Channel::X => SuperOperator::identity().sub(&p.scale(1.0 - alpha.cos())),
                Channel::Y => anti_half(&PauliOperator::sigma_x()).scale(alpha.sin()),
                Channel::Z => comm_half(&PauliOperator::sigma_x()).scale(alpha.sin()),
            };
            rot.compose(&inner)
        }
    }
}

/// Intrinsic pure dephasing over one shot: shrinks Bloch x, y by `e^{−γ₀τ}`.
pub fn dephasing_lz(gamma0: f64, tau: f64) -> Result<SuperOperator> {
    if !(gamma0.is_finite() && gamma0 >= 0.0) {
        return Err(invalid("gamma0", format!("must be >= 0, got {gamma0}")));
    }
    let f = (-gamma0 * tau).exp();
    let pz = {
        let a = anti_half(&PauliOperator::sigma_z());
        a.compose(&a)
    };
    Ok(SuperOperator::identity().scale(f).add(&pz.scale(1.0 - f)))
}

/// Back-action dephasing along x of a discarded shot, without the precession.
pub fn dephasing_lx(alpha: f64) -> SuperOperator {
    SuperOperator::identity()
        .scale(alpha.cos())
        .add(&x_projector().scale(1.0 - alpha.cos()))
}

/// One discarded shot: `M₀ ∘ L_z`.
pub fn idle_step(params: &SimParams, mode: Mode) -> SuperOperator {
    let lz = dephasing_lz(params.gamma0, params.tau).expect("validated params");
    superop_m(Channel::Unread, params, mode).compose(&lz)
}

/// The per-shot channels of one parameter set, precomputed.
///
/// Fields are public so diagnostics can perturb individual channels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShotChannels {
    pub params: SimParams,
    pub mode: Mode,
    pub m0: SuperOperator,
    pub mx: SuperOperator,
    pub my: SuperOperator,
    pub mz: SuperOperator,
    pub lz: SuperOperator,
}

impl ShotChannels {
    pub fn new(params: &SimParams, mode: Mode) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            params: *params,
            mode,
            m0: superop_m(Channel::Unread, params, mode),
            mx: superop_m(Channel::X, params, mode),
            my: superop_m(Channel::Y, params, mode),
            mz: superop_m(Channel::Z, params, mode),
            lz: dephasing_lz(params.gamma0, params.tau)?,
        })
    }

    pub fn channel(&self, channel: Channel) -> &SuperOperator {
        match channel {
            Channel::Unread => &self.m0,
            Channel::X => &self.mx,
            Channel::Y => &self.my,
            Channel::Z => &self.mz,
        }
    }

    /// `M₀ ∘ L_z`.
    pub fn idle(&self) -> SuperOperator {
        self.m0.compose(&self.lz)
    }

    /// `M⁺ − M⁻` of a y-readout with noise phase φ: `sin φ M_x + cos φ M_y`.
    pub fn y_difference(&self, noise_phase: f64) -> SuperOperator {
        let (s, c) = noise_phase.sin_cos();
        self.mx.scale(s).add(&self.my.scale(c))
    }

    /// `M⁺ − M⁻` of a readout along `axis`. The z readout ignores the noise phase.
    pub fn difference(&self, axis: Axis, noise_phase: f64) -> SuperOperator {
        match axis {
            Axis::Y => self.y_difference(noise_phase),
            Axis::Z => self.mz,
            Axis::X => {
                // x readout mixes the other way round: cos φ M_x − sin φ M_y
                let (s, c) = noise_phase.sin_cos();
                self.mx.scale(c).sub(&self.my.scale(s))
            }
        }
    }

    /// Branch superoperator `M^±` of a recorded shot.
    pub fn branch(&self, axis: Axis, outcome: Sign, noise_phase: f64) -> SuperOperator {
        let d = self.difference(axis, noise_phase);
        match outcome {
            Sign::Plus => self.m0.add(&d).scale(0.5),
            Sign::Minus => self.m0.sub(&d).scale(0.5),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::ComplexPauli;

    fn params(alpha: f64, phi: f64) -> SimParams {
        SimParams::from_dimensionless(alpha, phi, 0.0, 1.0).unwrap()
    }

    fn mat_diff(a: &C2, b: &C2) -> f64 {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Matrix exponential by Taylor series with scaling and squaring.
    fn expm(m: &C2) -> C2 {
        let scaled = m / Complex64::new(1024.0, 0.0);
        let mut term = C2::identity();
        let mut sum = C2::identity();
        for k in 1..30 {
            term = term * scaled / Complex64::new(k as f64, 0.0);
            sum += term;
        }
        for _ in 0..10 {
            sum = sum * sum;
        }
        sum
    }

    #[test]
    fn unitary_matches_series_exponential() {
        let p = SimParams::new(0.7, 1.3, 0.0, 0.4).unwrap();
        for sign in [Sign::Plus, Sign::Minus] {
            let s = sign_value(sign);
            let h = (PauliOperator::sigma_z() * (0.5 * p.omega0)
                + PauliOperator::sigma_x() * (0.5 * s * p.a))
                .matrix()
                * Complex64::new(0.0, -p.tau);
            let oracle = expm(&h);
            assert!(mat_diff(&conditional_unitary(sign, &p, Mode::Exact), &oracle) < 1e-12);
        }
    }

    #[test]
    fn commuting_limits() {
        let p = params(0.0, 0.4);
        let rot = su2_exp([0.0, 0.0, 0.2]);
        for mode in [Mode::Exact, Mode::ShortTime] {
            for sign in [Sign::Plus, Sign::Minus] {
                assert!(mat_diff(&conditional_unitary(sign, &p, mode), &rot) < 1e-14);
            }
        }
        let p = params(0.3, 0.0);
        let up = conditional_unitary(Sign::Plus, &p, Mode::Exact);
        assert!(mat_diff(&up, &su2_exp([0.15, 0.0, 0.0])) < 1e-14);
    }

    #[test]
    fn exact_and_short_time_close() {
        let p = params(0.1, 0.05);
        let d = mat_diff(
            &conditional_unitary(Sign::Plus, &p, Mode::Exact),
            &conditional_unitary(Sign::Plus, &p, Mode::ShortTime),
        );
        assert!(d <= 0.01, "{d}");
    }

    #[test]
    fn kraus_completeness_and_decoupled_limit() {
        for (alpha, phi, noise) in [(0.3, 0.7, 0.0), (1.1, -0.4, 0.25), (0.05, 2.0, -1.0)] {
            let p = params(alpha, phi);
            for axis in [Axis::X, Axis::Y, Axis::Z] {
                for mode in [Mode::Exact, Mode::ShortTime] {
                    let (kp, km) =
                        kraus_pair_with_phase(ShotLabel::recorded(axis), &p, mode, noise).unwrap();
                    let sum = kp.adjoint() * kp + km.adjoint() * km;
                    assert!(mat_diff(&sum, &C2::identity()) < 1e-12);
                }
            }
        }
        let p = params(0.0, 0.5);
        let (kp, km) = kraus_pair(ShotLabel::recorded(Axis::Y), &p, Mode::Exact).unwrap();
        for k in [kp, km] {
            // proportional to a unitary that is itself a pure z rotation
            let c = ComplexPauli::from_matrix(&k);
            assert!(c.c[1].norm() < 1e-14 && c.c[2].norm() < 1e-14);
        }
        assert!(kraus_pair(ShotLabel::idle(), &p, Mode::Exact).is_err());
    }

    #[test]
    fn first_y_readout_unbiased_on_mixed_state() {
        let p = params(0.4, 0.3);
        let rho = PauliOperator::maximally_mixed();
        let (kp, km) = kraus_pair(ShotLabel::recorded(Axis::Y), &p, Mode::ShortTime).unwrap();
        let diff = kraus_superop(&kp).trace_of_apply(&rho) - kraus_superop(&km).trace_of_apply(&rho);
        assert!(diff.abs() < 1e-12);
    }

    #[test]
    fn superop_examples() {
        let alpha = 0.37;
        let p = params(alpha, 0.0);
        let half = PauliOperator::maximally_mixed();
        for mode in [Mode::Exact, Mode::ShortTime] {
            let mx = superop_m(Channel::X, &p, mode).apply(&half);
            assert!(mx.max_abs_diff(&(half * alpha.cos())) < 1e-12);
            let my = superop_m(Channel::Y, &p, mode).apply(&half);
            assert!(my.trace().abs() < 1e-12);
            assert!((2.0 * my.cx - alpha.sin()).abs() < 1e-12);
            let mz = superop_m(Channel::Z, &p, mode).apply(&half);
            assert!(mz.max_abs_diff(&PauliOperator::zero()) < 1e-12);
        }
        let p = params(0.8, 1.9);
        let m0 = superop_m(Channel::Unread, &p, Mode::Exact);
        let rho = PauliOperator::new(0.5, 0.1, -0.3, 0.2);
        assert!((m0.apply(&rho).trace() - rho.trace()).abs() < 1e-12);
    }

    #[test]
    fn branches_sum_to_unread_channel() {
        for (alpha, phi) in [(0.2, 0.3), (1.0, 2.5), (0.01, -0.7)] {
            let p = params(alpha, phi);
            let (kp, km) = kraus_pair(ShotLabel::recorded(Axis::Y), &p, Mode::Exact).unwrap();
            let sum = kraus_superop(&kp).add(&kraus_superop(&km));
            assert!(sum.max_abs_diff(&superop_m(Channel::Unread, &p, Mode::Exact)) < 1e-12);
        }
    }

    #[test]
    fn kraus_difference_matches_mixing() {
        for mode in [Mode::Exact, Mode::ShortTime] {
            let p = params(0.3, 0.6);
            let ch = ShotChannels::new(&p, mode).unwrap();
            for noise in [-0.8, 0.0, 0.4, 1.3] {
                for axis in [Axis::X, Axis::Y, Axis::Z] {
                    let (kp, km) =
                        kraus_pair_with_phase(ShotLabel::recorded(axis), &p, mode, noise).unwrap();
                    let d = kraus_superop(&kp).sub(&kraus_superop(&km));
                    assert!(d.max_abs_diff(&ch.difference(axis, noise)) < 1e-12);
                    let bp = kraus_superop(&kp);
                    assert!(bp.max_abs_diff(&ch.branch(axis, Sign::Plus, noise)) < 1e-12);
                }
            }
        }
    }

    #[test]
    fn x_dephasing_axis() {
        let alpha = 0.45;
        let lx = dephasing_lx(alpha);
        let r = lx.apply(&PauliOperator::new(0.5, 0.2, 0.3, -0.4));
        assert!((r.cx - 0.2).abs() < 1e-15);
        assert!((r.cy - 0.3 * alpha.cos()).abs() < 1e-15);
        assert!((r.cz + 0.4 * alpha.cos()).abs() < 1e-15);
        // the short-time unread channel is precession after L_x
        let p = params(alpha, 0.9);
        let m0 = superop_m(Channel::Unread, &p, Mode::ShortTime);
        assert!(m0.max_abs_diff(&rotation_z(0.9).compose(&lx)) < 1e-15);
    }

    #[test]
    fn exact_vs_short_time_superops() {
        for i in 0..=6 {
            for j in 0..=6 {
                let (alpha, phi) = (0.05 * i as f64, 0.05 * j as f64);
                let p = params(alpha, phi);
                let bound = 10.0 * (alpha * phi + alpha.powi(3)) + 1e-14;
                for ch in [Channel::Unread, Channel::X, Channel::Y, Channel::Z] {
                    let d = superop_m(ch, &p, Mode::Exact)
                        .max_abs_diff(&superop_m(ch, &p, Mode::ShortTime));
                    assert!(d <= bound, "{ch:?} α={alpha} φ={phi}: {d} > {bound}");
                }
            }
        }
    }

    #[test]
    fn lz_action() {
        assert!(dephasing_lz(0.0, 0.3)
            .unwrap()
            .max_abs_diff(&SuperOperator::identity())
            < 1e-15);
        let lz = dephasing_lz(0.2, 0.5).unwrap();
        let f = (-0.1f64).exp();
        assert!(lz
            .apply(&PauliOperator::sigma_x())
            .max_abs_diff(&(PauliOperator::sigma_x() * f))
            < 1e-15);
        assert!(lz
            .apply(&PauliOperator::sigma_z())
            .max_abs_diff(&PauliOperator::sigma_z())
            < 1e-15);
        assert!(dephasing_lz(-1.0, 0.5).is_err());
    }

    #[test]
    fn idle_step_properties() {
        let p = SimParams::from_dimensionless(0.3, 1.1, 0.02, 0.5).unwrap();
        let idle = idle_step(&p, Mode::Exact);
        let rho = PauliOperator::new(0.5, -0.2, 0.1, 0.3);
        assert!((idle.apply(&rho).trace() - 1.0).abs() < 1e-12);

        let p = params(0.0, 0.7);
        assert!(idle_step(&p, Mode::Exact).max_abs_diff(&rotation_z(0.7)) < 1e-14);
    }

    #[test]
    fn idle_transverse_decay() {
        let g = 0.01;
        for alpha in [0.1, 0.2, 0.3] {
            for phi in [0.5, 1.0] {
                let p = SimParams::from_dimensionless(alpha, phi, g, 1.0).unwrap();
                let idle = idle_step(&p, Mode::Exact);
                // the transverse block has complex eigenvalues of modulus √det
                let m = idle.matrix();
                let det = m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)];
                let mut r = PauliOperator::new(0.5, 0.5, 0.0, 0.0);
                for n in 1..=10 {
                    r = idle.apply(&r);
                    let expect = (-(n as f64) * (alpha.sin().powi(2) / 4.0 + g)).exp();
                    let envelope = det.sqrt().powi(n);
                    assert!((envelope / expect - 1.0).abs() < 0.02);
                    // the radius itself ripples around the envelope by ~(1 − cos α)/2
                    if alpha <= 0.2 {
                        let radius = 2.0 * r.cx.hypot(r.cy);
                        assert!(
                            (radius / expect - 1.0).abs() < 0.02,
                            "α={alpha} φ={phi} n={n}: {radius} vs {expect}"
                        );
                    }
                }
            }
        }
    }
}
