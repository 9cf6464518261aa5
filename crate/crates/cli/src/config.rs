//! Run configuration read from a single JSON file.

use std::path::{Path, PathBuf};

use qusense_core::correlators::Pattern;
use qusense_core::dynamics::Mode;
use qusense_core::noise::NoiseModel;
use qusense_core::planner::Order;
use qusense_core::SimParams;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub shards: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<SimParams>,
    #[serde(default)]
    pub noise: NoiseModel,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulate: Option<SimulateSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<ExactSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan: Option<PlanSpec>,
}

fn one() -> usize {
    1
}

fn default_segment_cycles() -> u64 {
    qusense_core::correlators::DEFAULT_SEGMENT_CYCLES
}

fn default_substeps() -> usize {
    qusense_core::noise::DEFAULT_SUBSTEPS
}

fn yes() -> bool {
    true
}

fn default_oversample() -> usize {
    4
}

fn default_path_shots() -> usize {
    1_000_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSpec {
    pub pattern: Pattern,
    pub cycles: u64,
    #[serde(default = "default_segment_cycles")]
    pub segment_cycles: u64,
    #[serde(default = "default_substeps")]
    pub substeps: usize,
    /// Largest `G²` lag for an `xy` record (default 50).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_lag: Option<usize>,
    /// `G⁴` grid for an `xy_xz` record (default from the optimal transform sizes).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_f2: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_f1: Option<usize>,
    #[serde(default = "yes")]
    pub write_shots: bool,
    /// Also export a noise path of this many shots (an independent draw from the same seed).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_path_shots: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    #[default]
    Exact,
    ClosedForm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExactSpec {
    #[serde(default)]
    pub source: Source,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_lag: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_f2: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_f1: Option<usize>,
    /// Length of the sampled path used for non-Gaussian noise.
    #[serde(default = "default_path_shots")]
    pub path_shots: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSpec {
    pub order: Order,
    /// `g2.csv` or `g4.csv` to transform; without it the closed form is used.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_f: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_f2: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_f1: Option<usize>,
    #[serde(default = "default_oversample")]
    pub oversample: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanSpec {
    pub orders: Vec<Order>,
    pub a: f64,
    pub s_c: Axis,
    pub gamma0: Axis,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_m_max: Option<f64>,
}

/// Invalid configuration; maps to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn bad(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

pub fn parse(text: &str) -> anyhow::Result<RunConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| bad(format!("{}: {}", e.path(), e.inner())))
}

pub fn load(path: &Path) -> anyhow::Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
    parse(&text)
}

fn check_axis(name: &str, ax: &Axis) -> anyhow::Result<()> {
    if !(ax.min > 0.0 && ax.max >= ax.min && ax.max.is_finite() && ax.points >= 1) {
        return Err(bad(format!("plan.{name}: need 0 < min <= max and points >= 1")));
    }
    Ok(())
}

impl RunConfig {
    pub fn params(&self) -> anyhow::Result<SimParams> {
        let p = self.params.ok_or_else(|| bad("params: missing"))?;
        p.validate().map_err(|e| bad(format!("params: {e}")))?;
        Ok(p)
    }

    /// Checks shared by every command, before anything runs.
    pub fn validate(&self) -> anyhow::Result<()> {
        if self.shards == 0 {
            return Err(bad("shards: must be at least 1"));
        }
        if let Some(p) = &self.params {
            p.validate().map_err(|e| bad(format!("params: {e}")))?;
        }
        self.noise
            .validate()
            .map_err(|e| bad(format!("noise: {e}")))?;
        if let Some(s) = &self.simulate {
            if s.cycles == 0 || s.segment_cycles == 0 || s.substeps == 0 {
                return Err(bad("simulate: cycles, segment_cycles and substeps must be >= 1"));
            }
        }
        if let Some(s) = &self.spectrum {
            if s.oversample == 0 {
                return Err(bad("spectrum.oversample: must be >= 1"));
            }
        }
        if let Some(p) = &self.plan {
            if !(p.a > 0.0 && p.a.is_finite()) {
                return Err(bad("plan.a: must be > 0"));
            }
            if p.orders.is_empty() {
                return Err(bad("plan.orders: must not be empty"));
            }
            check_axis("s_c", &p.s_c)?;
            check_axis("gamma0", &p.gamma0)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_field_reports_path() {
        let err = parse(r#"{"params": {"a": 1, "omega0": 1, "gamma0": 0, "tau": 0.1, "b": 2}}"#)
            .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("params"), "{msg}");
        assert!(msg.contains("unknown field"), "{msg}");
    }

    #[test]
    fn noise_tag_round_trip() {
        let cfg = parse(
            r#"{"noise": {"kind": "scaled", "inner": {"kind": "white", "s_c": 0.2},
                "schedule": [{"shots": 10, "amplitude": 2.0}]}}"#,
        )
        .unwrap();
        let back = parse(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(cfg, back);
    }
}
