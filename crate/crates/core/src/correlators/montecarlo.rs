use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{Axis, Mode, ShotChannels, ShotLabel};
use crate::error::{invalid, Error, Result};
use crate::noise::{fill_phases, NoiseModel, DEFAULT_SUBSTEPS};
use crate::params::SimParams;
use crate::pauli::PauliOperator;

pub const DEFAULT_SEGMENT_CYCLES: u64 = 10_000;

const XY: ShotLabel = ShotLabel::recorded(Axis::Y);
const XZ: ShotLabel = ShotLabel::recorded(Axis::Z);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pattern {
    Xy,
    XyXz,
}

impl Pattern {
    pub fn labels(self) -> &'static [ShotLabel] {
        match self {
            Pattern::Xy => &[XY],
            Pattern::XyXz => &[XY, XZ],
        }
    }

    pub fn len(self) -> usize {
        self.labels().len()
    }

    pub fn is_empty(self) -> bool {
        false
    }

    /// Time between consecutive cycles, in shots.
    pub fn cycle_shots(self) -> u64 {
        self.len() as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    pub pattern: Pattern,
    /// Total number of cycles M.
    pub cycles: u64,
    /// Cycles per independent segment (fresh `𝟙/2` state and noise path).
    #[serde(default = "default_segment_cycles")]
    pub segment_cycles: u64,
    #[serde(default = "default_substeps")]
    pub substeps: usize,
    #[serde(default)]
    pub mode: Mode,
}

fn default_segment_cycles() -> u64 {
    DEFAULT_SEGMENT_CYCLES
}

fn default_substeps() -> usize {
    DEFAULT_SUBSTEPS
}

impl McConfig {
    pub fn new(pattern: Pattern, cycles: u64) -> Self {
        Self {
            pattern,
            cycles,
            segment_cycles: DEFAULT_SEGMENT_CYCLES,
            substeps: DEFAULT_SUBSTEPS,
            mode: Mode::Exact,
        }
    }

    pub fn with_segment_cycles(mut self, n: u64) -> Self {
        self.segment_cycles = n;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.cycles == 0 {
            return Err(invalid("cycles", "must be at least 1"));
        }
        if self.segment_cycles == 0 {
            return Err(invalid("segment_cycles", "must be at least 1"));
        }
        if self.substeps == 0 {
            return Err(invalid("substeps", "must be at least 1"));
        }
        Ok(())
    }

    /// `(first_cycle, cycles)` of every segment; lengths differ by at most one.
    pub fn segments(&self) -> Vec<(u64, u64)> {
        let n = self.cycles.div_ceil(self.segment_cycles);
        let (base, extra) = (self.cycles / n, self.cycles % n);
        let mut out = Vec::with_capacity(n as usize);
        let mut start = 0;
        for i in 0..n {
            let len = base + u64::from(i < extra);
            out.push((start, len));
            start += len;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentRecord {
    pub index: usize,
    pub shard: usize,
    pub first_cycle: u64,
    /// One ±1 per shot, cycle-major.
    pub outputs: Vec<i8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotRecord {
    pub pattern: Pattern,
    pub seed: u64,
    pub shards: usize,
    pub segments: Vec<SegmentRecord>,
}

impl ShotRecord {
    /// Wrap externally produced outputs as a single segment.
    pub fn from_outputs(pattern: Pattern, outputs: Vec<i8>) -> Result<Self> {
        Self::from_segments(pattern, vec![outputs])
    }

    pub fn from_segments(pattern: Pattern, segments: Vec<Vec<i8>>) -> Result<Self> {
        let mut first_cycle = 0;
        let mut out = Vec::with_capacity(segments.len());
        for (index, outputs) in segments.into_iter().enumerate() {
            if outputs.len() % pattern.len() != 0 {
                return Err(invalid("outputs", "length is not a whole number of cycles"));
            }
            if outputs.iter().any(|&s| s != 1 && s != -1) {
                return Err(invalid("outputs", "entries must be +1 or -1"));
            }
            let cycles = (outputs.len() / pattern.len()) as u64;
            out.push(SegmentRecord {
                index,
                shard: 0,
                first_cycle,
                outputs,
            });
            first_cycle += cycles;
        }
        Ok(Self {
            pattern,
            seed: 0,
            shards: 1,
            segments: out,
        })
    }

    pub fn cycles(&self) -> u64 {
        self.segments
            .iter()
            .map(|s| (s.outputs.len() / self.pattern.len()) as u64)
            .sum()
    }

    /// `(cycle, slot, label, s)` for every shot in temporal order.
    pub fn shots(&self) -> impl Iterator<Item = (u64, usize, ShotLabel, i8)> + '_ {
        let plen = self.pattern.len();
        let labels = self.pattern.labels();
        self.segments.iter().flat_map(move |seg| {
            seg.outputs.iter().enumerate().map(move |(i, &s)| {
                (seg.first_cycle + (i / plen) as u64, i % plen, labels[i % plen], s)
            })
        })
    }
}

/// Simulate `cfg.cycles` cycles of `cfg.pattern` with Born-rule outputs.
///
/// The run is divided into fixed segments that each start from `𝟙/2` with
/// their own measurement and noise streams derived from `seed`; `shards`
/// only decides how segments are spread over workers, so the records do not
/// depend on it.
pub fn mc_run(
    cfg: &McConfig,
    params: &SimParams,
    noise: &NoiseModel,
    seed: u64,
    shards: usize,
) -> Result<ShotRecord> {
    mc_run_with(&ShotChannels::new(params, cfg.mode)?, cfg, noise, seed, shards)
}

pub fn mc_run_with(
    ch: &ShotChannels,
    cfg: &McConfig,
    noise: &NoiseModel,
    seed: u64,
    shards: usize,
) -> Result<ShotRecord> {
    cfg.validate()?;
    noise.validate()?;
    if shards == 0 {
        return Err(invalid("shards", "must be at least 1"));
    }
    if let Some(covered) = noise.schedule_len() {
        let needed = cfg.cycles * cfg.pattern.cycle_shots();
        if covered < needed {
            return Err(Error::ScheduleTooShort { covered, needed });
        }
    }
    let segs = cfg.segments();
    let n = segs.len();
    let per_shard: Vec<Result<Vec<SegmentRecord>>> = (0..shards)
        .into_par_iter()
        .map(|shard| {
            let (lo, hi) = (shard * n / shards, (shard + 1) * n / shards);
            (lo..hi)
                .map(|index| {
                    let (first_cycle, cycles) = segs[index];
                    let outputs = run_segment(ch, cfg, noise, seed, index, first_cycle, cycles)?;
                    Ok(SegmentRecord {
                        index,
                        shard,
                        first_cycle,
                        outputs,
                    })
                })
                .collect()
        })
        .collect();
    let mut segments = Vec::with_capacity(n);
    for part in per_shard {
        segments.extend(part?);
    }
    Ok(ShotRecord {
        pattern: cfg.pattern,
        seed,
        shards,
        segments,
    })
}

fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn run_segment(
    ch: &ShotChannels,
    cfg: &McConfig,
    noise: &NoiseModel,
    seed: u64,
    index: usize,
    first_cycle: u64,
    cycles: u64,
) -> Result<Vec<i8>> {
    let labels = cfg.pattern.labels();
    let plen = labels.len();
    let n_shots = cycles as usize * plen;
    let first_shot = first_cycle * plen as u64;
    let mut phases = vec![0.0; n_shots];
    let mut noise_rng = stream(seed, 2 * index as u64 + 1);
    fill_phases(
        noise,
        ch.params.tau,
        cfg.substeps,
        first_shot,
        &mut noise_rng,
        &mut phases,
    )?;
    let mut rng = stream(seed, 2 * index as u64);
    let mut rho = PauliOperator::maximally_mixed();
    let mut outputs = Vec::with_capacity(n_shots);
    for (i, &phi) in phases.iter().enumerate() {
        rho = ch.lz.apply(&rho);
        let base = ch.m0.apply(&rho);
        let axis = labels[i % plen].readout.expect("patterns record every shot");
        let d = match axis {
            Axis::Z => ch.mz.apply(&rho),
            _ => ch.difference(axis, phi).apply(&rho),
        };
        let norm = base.trace();
        let p_plus = (0.5 * (norm + d.trace()) / norm).clamp(0.0, 1.0);
        let s: i8 = if rng.random::<f64>() < p_plus { 1 } else { -1 };
        let mut next = if s == 1 { base + d } else { base - d };
        let tr = next.trace().max(1e-300);
        next = next * (1.0 / tr);
        let radius = next.bloch_radius();
        if radius > 1.0 + 1e-9 || !radius.is_finite() {
            return Err(Error::NonPhysicalState {
                shot: first_shot as usize + i,
                radius,
            });
        }
        rho = next;
        outputs.push(s);
    }
    Ok(outputs)
}
