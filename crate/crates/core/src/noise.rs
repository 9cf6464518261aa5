//! Classical noise on the sensor: sample paths, spectra and phase statistics.
//!
//! The noise field `B(t)` only enters a shot through the accumulated phase
//! `φ_m = ∫ B dt` over the shot's interaction window.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub const DEFAULT_SUBSTEPS: usize = 16;

/// One piece of a piecewise-constant amplitude schedule, in shots.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSegment {
    pub shots: u64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseModel {
    #[default]
    None,
    /// Flat spectral density `s_c`.
    White { s_c: f64 },
    /// Covariance `variance · e^{−|t|/tau_c}`.
    OrnsteinUhlenbeck { variance: f64, tau_c: f64 },
    /// `±amplitude`, flipping at `flip_rate`.
    Telegraph { amplitude: f64, flip_rate: f64 },
    /// A stationary `inner` process multiplied by a per-shot amplitude.
    Scaled {
        inner: Box<NoiseModel>,
        schedule: Vec<ScheduleSegment>,
    },
}

fn non_negative(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("must be finite and >= 0, got {v}")))
    }
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            NoiseModel::None => Ok(()),
            NoiseModel::White { s_c } => non_negative("s_c", *s_c),
            NoiseModel::OrnsteinUhlenbeck { variance, tau_c } => {
                non_negative("variance", *variance)?;
                if !(tau_c.is_finite() && *tau_c > 0.0) {
                    return Err(invalid("tau_c", format!("must be > 0, got {tau_c}")));
                }
                Ok(())
            }
            NoiseModel::Telegraph {
                amplitude,
                flip_rate,
            } => {
                non_negative("amplitude", *amplitude)?;
                non_negative("flip_rate", *flip_rate)
            }
            NoiseModel::Scaled { inner, schedule } => {
                if matches!(**inner, NoiseModel::Scaled { .. }) {
                    return Err(invalid("inner", "nested schedules are not supported"));
                }
                inner.validate()?;
                if schedule.is_empty() {
                    return Err(invalid("schedule", "must not be empty"));
                }
                for seg in schedule {
                    non_negative("schedule.amplitude", seg.amplitude)?;
                }
                Ok(())
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            NoiseModel::None => "none",
            NoiseModel::White { .. } => "white",
            NoiseModel::OrnsteinUhlenbeck { .. } => "ornstein_uhlenbeck",
            NoiseModel::Telegraph { .. } => "telegraph",
            NoiseModel::Scaled { .. } => "scaled",
        }
    }

    /// White, OU and no noise have closed-form phase statistics.
    pub fn is_gaussian(&self) -> bool {
        matches!(
            self,
            NoiseModel::None | NoiseModel::White { .. } | NoiseModel::OrnsteinUhlenbeck { .. }
        )
    }

    /// Shots covered by a schedule; `None` when unbounded.
    pub fn schedule_len(&self) -> Option<u64> {
        match self {
            NoiseModel::Scaled { schedule, .. } => Some(schedule.iter().map(|s| s.shots).sum()),
            _ => None,
        }
    }

    /// Shot-weighted mean of the squared schedule amplitude (1 for stationary models).
    pub fn mean_square_amplitude(&self) -> f64 {
        match self {
            NoiseModel::Scaled { schedule, .. } => {
                let total: u64 = schedule.iter().map(|s| s.shots).sum();
                if total == 0 {
                    return 0.0;
                }
                schedule
                    .iter()
                    .map(|s| s.shots as f64 * s.amplitude * s.amplitude)
                    .sum::<f64>()
                    / total as f64
            }
            _ => 1.0,
        }
    }

    /// Stationary exponential-covariance parameters `(σ², τ_c)`, if any.
    fn exponential(&self) -> Option<(f64, f64)> {
        match self {
            NoiseModel::OrnsteinUhlenbeck { variance, tau_c } => Some((*variance, *tau_c)),
            NoiseModel::Telegraph {
                amplitude,
                flip_rate,
            } => Some((amplitude * amplitude, 0.5 / flip_rate)),
            _ => None,
        }
    }

    /// `S(ω) = ∫ ⟨B(t)B(0)⟩ e^{iωt} dt`. Schedules use their mean square amplitude.
    pub fn spectral_density(&self, omega: f64) -> f64 {
        match self {
            NoiseModel::None => 0.0,
            NoiseModel::White { s_c } => *s_c,
            NoiseModel::OrnsteinUhlenbeck { variance, tau_c } => {
                2.0 * variance * tau_c / (1.0 + (omega * tau_c).powi(2))
            }
            NoiseModel::Telegraph {
                amplitude,
                flip_rate,
            } => {
                if *flip_rate == 0.0 {
                    return if omega == 0.0 { f64::INFINITY } else { 0.0 };
                }
                4.0 * amplitude * amplitude * flip_rate / (omega * omega + 4.0 * flip_rate * flip_rate)
            }
            NoiseModel::Scaled { inner, .. } => {
                self.mean_square_amplitude() * inner.spectral_density(omega)
            }
        }
    }

    /// `⟨φ_{m+lag} φ_m⟩` for shots of length `tau`.
    pub fn phase_covariance(&self, lag: u64, tau: f64) -> f64 {
        match self {
            NoiseModel::None => 0.0,
            NoiseModel::White { s_c } => {
                if lag == 0 {
                    s_c * tau
                } else {
                    0.0
                }
            }
            NoiseModel::Scaled { inner, .. } => {
                self.mean_square_amplitude() * inner.phase_covariance(lag, tau)
            }
            _ => {
                let (var, tau_c) = self.exponential().expect("exponential covariance");
                if !tau_c.is_finite() {
                    // frozen telegraph: φ = ±bτ for ever
                    return var * tau * tau;
                }
                let x = tau / tau_c;
                if lag == 0 {
                    2.0 * var * tau_c * tau_c * x_minus_one_plus_exp(x)
                } else {
                    var * tau_c * tau_c * (-x).exp_m1().powi(2) * (-((lag - 1) as f64) * x).exp()
                }
            }
        }
    }

    /// `⟨φ²⟩` over one shot.
    pub fn phase_variance(&self, tau: f64) -> f64 {
        self.phase_covariance(0, tau)
    }

    /// `L_C = e^{−⟨φ²⟩/2}`.
    pub fn coherence_factor(&self, tau: f64) -> f64 {
        (-0.5 * self.phase_variance(tau)).exp()
    }

    /// Closed-form trigonometric pair averages for shots `lag` apart.
    pub fn phase_pair_factors(&self, lag: u64, tau: f64) -> Result<PairFactors> {
        if !self.is_gaussian() {
            return Err(Error::EstimateOnly);
        }
        let var = self.phase_variance(tau);
        let cov = self.phase_covariance(lag, tau);
        let l2 = (-var).exp();
        Ok(PairFactors {
            cc: l2 * cov.cosh(),
            ss: l2 * cov.sinh(),
            sc: 0.0,
            cs: 0.0,
        })
    }
}

/// `x − 1 + e^{−x}`, accurate for small `x`.
fn x_minus_one_plus_exp(x: f64) -> f64 {
    if x < 1e-3 {
        x * x / 2.0 - x.powi(3) / 6.0 + x.powi(4) / 24.0
    } else {
        x - 1.0 + (-x).exp()
    }
}

/// `⟨cos φ cos φ'⟩, ⟨sin φ sin φ'⟩, ⟨sin φ cos φ'⟩, ⟨cos φ sin φ'⟩` with `φ`
/// the later shot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairFactors {
    pub cc: f64,
    pub ss: f64,
    pub sc: f64,
    pub cs: f64,
}

impl PairFactors {
    pub const NOISELESS: Self = Self {
        cc: 1.0,
        ss: 0.0,
        sc: 0.0,
        cs: 0.0,
    };
}

/// Per-shot phases of one noise realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoisePath {
    pub phases: Vec<f64>,
    pub tau: f64,
    pub seed: u64,
    pub model: NoiseModel,
}

impl NoisePath {
    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    /// Ergodic pair averages over all shot pairs `lag` apart.
    pub fn pair_factors(&self, lag: usize) -> Result<PairFactors> {
        if lag >= self.phases.len() {
            return Err(Error::SeriesTooShort {
                needed: lag + 1,
                available: self.phases.len(),
            });
        }
        let n = self.phases.len() - lag;
        let mut acc = [0.0; 4];
        for m in 0..n {
            let (sl, cl) = self.phases[m + lag].sin_cos();
            let (se, ce) = self.phases[m].sin_cos();
            acc[0] += cl * ce;
            acc[1] += sl * se;
            acc[2] += sl * ce;
            acc[3] += cl * se;
        }
        let k = 1.0 / n as f64;
        Ok(PairFactors {
            cc: acc[0] * k,
            ss: acc[1] * k,
            sc: acc[2] * k,
            cs: acc[3] * k,
        })
    }
}

fn check_substeps(substeps: usize) -> Result<()> {
    if substeps == 0 {
        return Err(invalid("substeps", "must be at least 1"));
    }
    Ok(())
}

/// Reproducible phase path of `n_shots` shots.
pub fn sample_phases(model: &NoiseModel, n_shots: usize, tau: f64, seed: u64) -> Result<NoisePath> {
    sample_phases_with(model, n_shots, tau, seed, DEFAULT_SUBSTEPS)
}

pub fn sample_phases_with(
    model: &NoiseModel,
    n_shots: usize,
    tau: f64,
    seed: u64,
    substeps: usize,
) -> Result<NoisePath> {
    if n_shots == 0 {
        return Err(invalid("n_shots", "must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut phases = vec![0.0; n_shots];
    fill_phases(model, tau, substeps, 0, &mut rng, &mut phases)?;
    Ok(NoisePath {
        phases,
        tau,
        seed,
        model: model.clone(),
    })
}

/// Fill `out` with consecutive shot phases starting at global shot `start`
/// (only schedules care about the offset), drawing from `rng`.
pub fn fill_phases<R: Rng + ?Sized>(
    model: &NoiseModel,
    tau: f64,
    substeps: usize,
    start: u64,
    rng: &mut R,
    out: &mut [f64],
) -> Result<()> {
    model.validate()?;
    check_substeps(substeps)?;
    if !(tau.is_finite() && tau > 0.0) {
        return Err(invalid("tau", format!("must be > 0, got {tau}")));
    }
    match model {
        NoiseModel::None => out.fill(0.0),
        NoiseModel::White { s_c } => {
            let sd = (s_c * tau).sqrt();
            for phi in out.iter_mut() {
                let z: f64 = rng.sample(StandardNormal);
                *phi = sd * z;
            }
        }
        NoiseModel::OrnsteinUhlenbeck { variance, tau_c } => {
            let mut ou = OuStepper::new(*variance, *tau_c, tau / substeps as f64, rng);
            for phi in out.iter_mut() {
                *phi = (0..substeps).map(|_| ou.step(rng)).sum();
            }
        }
        NoiseModel::Telegraph {
            amplitude,
            flip_rate,
        } => {
            let mut tg = TelegraphStepper::new(*amplitude, *flip_rate, rng);
            let dt = tau / substeps as f64;
            for phi in out.iter_mut() {
                *phi = (0..substeps).map(|_| tg.integrate(dt, rng)).sum();
            }
        }
        NoiseModel::Scaled { inner, schedule } => {
            let covered: u64 = schedule.iter().map(|s| s.shots).sum();
            let needed = start + out.len() as u64;
            if covered < needed {
                return Err(Error::ScheduleTooShort { covered, needed });
            }
            fill_phases(inner, tau, substeps, start, rng, out)?;
            let mut seg = 0;
            let mut seg_end = schedule[0].shots;
            for (i, phi) in out.iter_mut().enumerate() {
                let shot = start + i as u64;
                while shot >= seg_end {
                    seg += 1;
                    seg_end += schedule[seg].shots;
                }
                *phi *= schedule[seg].amplitude;
            }
        }
    }
    Ok(())
}

/// Samples of the field `B` itself on a grid of spacing `dt` (OU and telegraph).
pub fn sample_field(model: &NoiseModel, n_points: usize, dt: f64, seed: u64) -> Result<Vec<f64>> {
    model.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n_points);
    match model {
        NoiseModel::None => out.resize(n_points, 0.0),
        NoiseModel::OrnsteinUhlenbeck { variance, tau_c } => {
            let mut ou = OuStepper::new(*variance, *tau_c, dt, &mut rng);
            for _ in 0..n_points {
                out.push(ou.b);
                ou.step(&mut rng);
            }
        }
        NoiseModel::Telegraph {
            amplitude,
            flip_rate,
        } => {
            let mut tg = TelegraphStepper::new(*amplitude, *flip_rate, &mut rng);
            for _ in 0..n_points {
                out.push(tg.value());
                tg.integrate(dt, &mut rng);
            }
        }
        _ => return Err(invalid("model", "field samples need an OU or telegraph process")),
    }
    Ok(out)
}

/// Exact joint update of an OU field and its integral over `dt`.
struct OuStepper {
    b: f64,
    decay: f64,
    mean_int: f64,
    sd_b: f64,
    int_on_z1: f64,
    int_on_z2: f64,
}

impl OuStepper {
    fn new<R: Rng + ?Sized>(variance: f64, tau_c: f64, dt: f64, rng: &mut R) -> Self {
        let theta = 1.0 / tau_c;
        let x = theta * dt;
        let e = (-x).exp();
        let var_b = variance * -(-2.0 * x).exp_m1();
        // (σ²/θ²)(2x − 3 + 4e^{−x} − e^{−2x})
        let g = if x < 1e-2 {
            2.0 / 3.0 * x.powi(3) - 0.5 * x.powi(4) + 7.0 / 30.0 * x.powi(5)
        } else {
            2.0 * x - 3.0 + 4.0 * e - e * e
        };
        let var_i = variance / (theta * theta) * g;
        let cov = variance / theta * (-x).exp_m1().powi(2);
        let sd_b = var_b.sqrt();
        let int_on_z1 = if sd_b > 0.0 { cov / sd_b } else { 0.0 };
        let int_on_z2 = (var_i - int_on_z1 * int_on_z1).max(0.0).sqrt();
        let z: f64 = rng.sample(StandardNormal);
        Self {
            b: variance.sqrt() * z,
            decay: e,
            mean_int: -(-x).exp_m1() / theta,
            sd_b,
            int_on_z1,
            int_on_z2,
        }
    }

    /// Advance by `dt`, returning `∫ B` over the step.
    fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> f64 {
        let z1: f64 = rng.sample(StandardNormal);
        let z2: f64 = rng.sample(StandardNormal);
        let integral = self.b * self.mean_int + self.int_on_z1 * z1 + self.int_on_z2 * z2;
        self.b = self.b * self.decay + self.sd_b * z1;
        integral
    }
}

/// Random telegraph signal with exponential waiting times.
struct TelegraphStepper {
    amplitude: f64,
    up: bool,
    until_flip: f64,
    waiting: Option<Exp<f64>>,
}

impl TelegraphStepper {
    fn new<R: Rng + ?Sized>(amplitude: f64, flip_rate: f64, rng: &mut R) -> Self {
        let waiting = (flip_rate > 0.0).then(|| Exp::new(flip_rate).expect("positive rate"));
        let up = rng.random::<bool>();
        let until_flip = waiting.map_or(f64::INFINITY, |w| w.sample(rng));
        Self {
            amplitude,
            up,
            until_flip,
            waiting,
        }
    }

    fn value(&self) -> f64 {
        if self.up {
            self.amplitude
        } else {
            -self.amplitude
        }
    }

    fn integrate<R: Rng + ?Sized>(&mut self, dt: f64, rng: &mut R) -> f64 {
        let mut left = dt;
        let mut acc = 0.0;
        while self.until_flip < left {
            acc += self.value() * self.until_flip;
            left -= self.until_flip;
            self.up = !self.up;
            self.until_flip = self.waiting.expect("finite wait").sample(rng);
        }
        acc += self.value() * left;
        self.until_flip -= left;
        acc
    }
}
