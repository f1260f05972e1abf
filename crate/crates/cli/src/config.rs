//! Experiment configuration (JSON).

use std::path::{Path, PathBuf};

use cslab_core::closed_form::blowup_time;
use cslab_core::finite_gap::make_resonant;
use cslab_core::json::JsonComplex;
use cslab_core::resonance::classify;
use cslab_core::{Classification, FiniteGapData};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub datum: DatumSpec,
    #[serde(default)]
    pub engine: Engine,
    #[serde(default = "default_truncation")]
    pub truncation: usize,
    #[serde(default)]
    pub time_grid: Option<TimeGrid>,
    /// Oracle time step.
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_s_list")]
    pub s_list: Vec<f64>,
    #[serde(default)]
    pub output: OutputPaths,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seed: u64,
}

/// Either explicit `(theta, m, p, a, c)` or the resonant family generated by `p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DatumSpec {
    Resonant(ResonantSpec),
    General(FiniteGapData),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonantSpec {
    pub resonant: bool,
    #[serde(default)]
    pub theta: f64,
    #[serde(default)]
    pub m: u32,
    pub p: JsonComplex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    ClosedForm,
    Explicit,
    Oracle,
    #[default]
    All,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::ClosedForm => "closed_form",
            Engine::Explicit => "explicit",
            Engine::Oracle => "oracle",
            Engine::All => "all",
        }
    }
}

/// Output times `t_start, t_start + stride, ...` up to and including `t_end`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    pub stride: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    /// Directory for trajectory CSVs and the diff summary.
    #[serde(default)]
    pub dir: Option<PathBuf>,
    /// JSON report file; stdout when absent.
    #[serde(default)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Relative L2 difference between engines.
    pub cross_engine: f64,
    /// Relative, for the pole-asymptotic ratios.
    pub pole_asymptotic: f64,
    /// Relative, for the H^s rate constants.
    pub hs_rate: f64,
    pub mass_defect: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            cross_engine: 1e-6,
            pole_asymptotic: 0.01,
            hs_rate: 0.02,
            mass_defect: 1e-12,
        }
    }
}

fn default_truncation() -> usize {
    128
}

fn default_dt() -> f64 {
    cslab_core::oracle::DEFAULT_DT
}

fn default_s_list() -> Vec<f64> {
    vec![1.0, 2.0]
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.datum()?;
        if self.truncation < 2 {
            return Err(CliError::Config(format!(
                "truncation {} must be at least 2",
                self.truncation
            )));
        }
        if !self.dt.is_finite() || self.dt <= 0.0 {
            return Err(CliError::Config(format!("dt {} must be positive", self.dt)));
        }
        if let Some(s) = self.s_list.iter().find(|s| s.is_nan() || **s < 0.0) {
            return Err(CliError::Config(format!("Sobolev index {s} must be non-negative")));
        }
        Ok(())
    }

    pub fn datum(&self) -> Result<FiniteGapData, CliError> {
        match &self.datum {
            DatumSpec::General(d) => Ok(*d),
            DatumSpec::Resonant(spec) => {
                if !spec.resonant {
                    return Err(CliError::Config(
                        "datum with \"resonant\": false must give a and c explicitly".into(),
                    ));
                }
                make_resonant(spec.theta, spec.m, spec.p.into()).map_err(|e| CliError::Config(e.to_string()))
            }
        }
    }

    /// The output times, checked against the engine.
    pub fn times(&self) -> Result<Vec<f64>, CliError> {
        let g = self
            .time_grid
            .ok_or_else(|| CliError::Config("simulate needs a time_grid".into()))?;
        if !(g.t_start >= 0.0 && g.t_end >= g.t_start && g.stride > 0.0 && g.t_end.is_finite()) {
            return Err(CliError::Config(format!(
                "empty time grid: t_start {}, t_end {}, stride {}",
                g.t_start, g.t_end, g.stride
            )));
        }
        let count = ((g.t_end - g.t_start) / g.stride + 1e-9).floor() as usize;
        let mut times: Vec<f64> = (0..=count).map(|k| g.t_start + k as f64 * g.stride).collect();
        if g.t_end - times[count] > 1e-9 * g.stride {
            times.push(g.t_end);
        }
        if self.engine == Engine::ClosedForm || self.engine == Engine::All {
            let d = self.datum()?;
            match classify(&d) {
                Classification::NonResonant if self.engine == Engine::ClosedForm => {
                    return Err(CliError::Config(format!(
                        "the closed_form engine needs resonant data (2a + c = 0); |2a + c| = {:e}",
                        d.resonance_defect()
                    )));
                }
                Classification::Resonant => {
                    let big_t = blowup_time(d.p()).map_err(|e| CliError::Config(e.to_string()))?;
                    if g.t_end >= big_t {
                        return Err(CliError::Config(format!(
                            "t_end {} is not before the blow-up time {big_t}",
                            g.t_end
                        )));
                    }
                }
                Classification::NonResonant => {}
            }
        }
        Ok(times)
    }
}
