//! Scenario configuration: TOML with named blocks and explicit unit tags.
//!
//! ```toml
//! [probe]
//! family = "polarization_squeezed"
//! alpha = 1000.0
//! s = 1.0
//! theta = "optimal"
//!
//! [sample]
//! concentration = { value = 0.01, unit = "g/cm3" }
//! path_length = { value = 1.0, unit = "cm" }
//! delta_gamma = 1.16
//!
//! [channel]
//! mode = "birefringence"
//! eta = 1.0
//!
//! [sweep]
//! parameter = "probe.s"
//! start = 0.0
//! stop = 1.8
//! steps = 19
//! ```

use chiral_metrology::channels::{ChiralSample, PathLength};
use chiral_metrology::metrology::{optimal_waveplate_angle, BirefringenceModel, DichroismModel};
use chiral_metrology::montecarlo::{ExperimentPlan, OutcomeModel, Pooling, Scheme};
use chiral_metrology::{ProbeSpec, C64};
use serde::{Deserialize, Serialize};

use crate::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub probe: ProbeBlock,
    pub sample: SampleBlock,
    pub channel: ChannelBlock,
    #[serde(default)]
    pub measurement: MeasurementBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepBlock>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Coherent,
    PolarizationSqueezed,
    TwinAmplitudeSqueezed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Keyword {
    Optimal,
}

/// An angle in radians or `"optimal"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AngleSetting {
    Radians(f64),
    Named(Keyword),
}

impl Default for AngleSetting {
    fn default() -> Self {
        AngleSetting::Named(Keyword::Optimal)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeBlock {
    pub family: Family,
    /// `|α|`.
    pub alpha: f64,
    #[serde(default)]
    pub alpha_phase: f64,
    #[serde(default)]
    pub s: f64,
    /// `"optimal"` aligns the squeezing with the displacement (`θ = 2 arg α`).
    #[serde(default)]
    pub theta: AngleSetting,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Quantity {
    pub value: f64,
    pub unit: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleBlock {
    pub concentration: Quantity,
    pub path_length: Quantity,
    /// Rotatory power in rad cm³ g⁻¹ dm⁻¹.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_gamma: Option<f64>,
    /// Molar extinction coefficients in L mol⁻¹ cm⁻¹.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_left: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_right: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelMode {
    Birefringence,
    Dichroism,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelBlock {
    pub mode: ChannelMode,
    #[serde(default = "one")]
    pub eta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeName {
    Balanced,
    IntensityRatio,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeName {
    GaussianBright,
    ExactFock,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoolingName {
    Summed,
    PerTrial,
}

fn one_trial() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementBlock {
    /// Defaults to the scheme that matches the channel mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<SchemeName>,
    #[serde(default)]
    pub xi: AngleSetting,
    #[serde(default = "one_trial")]
    pub nu: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default = "default_outcome")]
    pub outcome_model: OutcomeName,
    #[serde(default = "default_pooling")]
    pub pooling: PoolingName,
}

fn default_outcome() -> OutcomeName {
    OutcomeName::GaussianBright
}

fn default_pooling() -> PoolingName {
    PoolingName::Summed
}

impl Default for MeasurementBlock {
    fn default() -> Self {
        Self {
            scheme: None,
            xi: AngleSetting::default(),
            nu: 1,
            seed: None,
            outcome_model: default_outcome(),
            pooling: default_pooling(),
        }
    }
}

/// Either an explicit list of values or `steps` evenly spaced points on `[start, stop]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    pub parameter: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
}

pub const SWEEPABLE: [&str; 11] = [
    "probe.alpha",
    "probe.alpha_phase",
    "probe.s",
    "probe.theta",
    "sample.concentration",
    "sample.path_length",
    "sample.delta_gamma",
    "sample.eps_left",
    "sample.eps_right",
    "channel.eta",
    "measurement.xi",
];

fn field_error(field: &str, reason: impl Into<String>) -> CliError {
    CliError::Config {
        field: field.into(),
        reason: reason.into(),
    }
}

fn path_length(q: &Quantity) -> CliResult<PathLength> {
    match q.unit.as_str() {
        "dm" => Ok(PathLength::from_dm(q.value)),
        "cm" => Ok(PathLength::from_cm(q.value)),
        "mm" => Ok(PathLength::from_mm(q.value)),
        other => Err(field_error(
            "sample.path_length.unit",
            format!("unknown unit {other:?}; use dm, cm or mm"),
        )),
    }
}

impl SweepBlock {
    pub fn values(&self) -> CliResult<Vec<f64>> {
        match (&self.values, self.start, self.stop, self.steps) {
            (Some(v), None, None, None) if !v.is_empty() => Ok(v.clone()),
            (None, Some(a), Some(b), Some(n)) if n >= 1 => {
                if n == 1 {
                    return Ok(vec![a]);
                }
                let h = (b - a) / (n - 1) as f64;
                Ok((0..n)
                    .map(|i| if i + 1 == n { b } else { a + h * i as f64 })
                    .collect())
            }
            _ => Err(field_error(
                "sweep",
                "give either a non-empty `values` list or all of `start`, `stop`, `steps` (>= 1)",
            )),
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> CliResult<Self> {
        let config: Self = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &std::path::Path) -> CliResult<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> CliResult<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn validate(&self) -> CliResult<()> {
        let p = &self.probe;
        if !(p.alpha.is_finite() && p.alpha >= 0.0) {
            return Err(field_error("probe.alpha", "must be finite and >= 0"));
        }
        if !(p.s.is_finite() && p.s >= 0.0) {
            return Err(field_error("probe.s", "must be finite and >= 0"));
        }
        if !(0.0..=1.0).contains(&self.channel.eta) {
            return Err(field_error("channel.eta", "must lie in [0, 1]"));
        }
        path_length(&self.sample.path_length)?;
        let unit = self.sample.concentration.unit.as_str();
        match self.channel.mode {
            ChannelMode::Birefringence => {
                if !matches!(unit, "g/cm3" | "g/mL") {
                    return Err(field_error(
                        "sample.concentration.unit",
                        format!("birefringence needs g/cm3 (or g/mL), found {unit:?}"),
                    ));
                }
                if self.sample.delta_gamma.is_none() {
                    return Err(field_error("sample.delta_gamma", "required for birefringence"));
                }
                if p.family == Family::TwinAmplitudeSqueezed {
                    return Err(field_error(
                        "probe.family",
                        "birefringence uses the coherent or polarization-squeezed probe",
                    ));
                }
            }
            ChannelMode::Dichroism => {
                if !matches!(unit, "mol/L" | "M") {
                    return Err(field_error(
                        "sample.concentration.unit",
                        format!("dichroism needs mol/L, found {unit:?}"),
                    ));
                }
                let (Some(l), Some(r)) = (self.sample.eps_left, self.sample.eps_right) else {
                    return Err(field_error(
                        "sample.eps_left",
                        "eps_left and eps_right are required for dichroism",
                    ));
                };
                if l == r {
                    return Err(field_error("sample.eps_right", "must differ from eps_left"));
                }
                if p.family != Family::TwinAmplitudeSqueezed {
                    return Err(field_error(
                        "probe.family",
                        "dichroism uses the twin amplitude-squeezed probe",
                    ));
                }
            }
        }
        if let Some(sweep) = &self.sweep {
            if !SWEEPABLE.contains(&sweep.parameter.as_str()) {
                return Err(field_error(
                    "sweep.parameter",
                    format!(
                        "{:?} is not a numeric field; choose one of {}",
                        sweep.parameter,
                        SWEEPABLE.join(", ")
                    ),
                ));
            }
            sweep.values()?;
        }
        if self.measurement.seed.is_some_and(|s| s > i64::MAX as u64) {
            return Err(field_error(
                "measurement.seed",
                "must fit a TOML integer (<= 2^63 - 1)",
            ));
        }
        if self.measurement.nu == 0 {
            return Err(field_error("measurement.nu", "must be >= 1"));
        }
        Ok(())
    }

    /// Copy with `parameter` set to `value`.
    pub fn with_parameter(&self, parameter: &str, value: f64) -> CliResult<Self> {
        let mut c = self.clone();
        match parameter {
            "probe.alpha" => c.probe.alpha = value,
            "probe.alpha_phase" => c.probe.alpha_phase = value,
            "probe.s" => c.probe.s = value,
            "probe.theta" => c.probe.theta = AngleSetting::Radians(value),
            "sample.concentration" => c.sample.concentration.value = value,
            "sample.path_length" => c.sample.path_length.value = value,
            "sample.delta_gamma" => c.sample.delta_gamma = Some(value),
            "sample.eps_left" => c.sample.eps_left = Some(value),
            "sample.eps_right" => c.sample.eps_right = Some(value),
            "channel.eta" => c.channel.eta = value,
            "measurement.xi" => c.measurement.xi = AngleSetting::Radians(value),
            other => {
                return Err(field_error(
                    "sweep.parameter",
                    format!("{other:?} is not sweepable"),
                ))
            }
        }
        c.sweep = None;
        c.validate()?;
        Ok(c)
    }

    /// One configuration per sweep value, in sweep order, each paired with its value.
    pub fn points(&self) -> CliResult<Vec<(Option<f64>, ScenarioConfig)>> {
        match &self.sweep {
            None => Ok(vec![(None, self.clone())]),
            Some(sweep) => sweep
                .values()?
                .into_iter()
                .map(|v| Ok((Some(v), self.with_parameter(&sweep.parameter, v)?)))
                .collect(),
        }
    }

    pub fn probe_spec(&self) -> ProbeSpec {
        let p = &self.probe;
        let alpha = C64::from_polar(p.alpha, p.alpha_phase);
        let theta = match p.theta {
            AngleSetting::Radians(t) => t,
            AngleSetting::Named(Keyword::Optimal) => 2.0 * p.alpha_phase,
        };
        match p.family {
            Family::Coherent => ProbeSpec::coherent(alpha),
            Family::PolarizationSqueezed => ProbeSpec::polarization_squeezed(alpha, p.s, theta),
            Family::TwinAmplitudeSqueezed => ProbeSpec::twin_amplitude_squeezed(alpha, p.s, theta),
        }
    }

    pub fn sample(&self) -> CliResult<ChiralSample> {
        let l = path_length(&self.sample.path_length)?;
        let c = self.sample.concentration.value;
        let sample = match self.channel.mode {
            ChannelMode::Birefringence => {
                ChiralSample::birefringent(c, l, self.sample.delta_gamma.unwrap_or(0.0))
            }
            ChannelMode::Dichroism => ChiralSample::dichroic(
                c,
                l,
                self.sample.eps_left.unwrap_or(0.0),
                self.sample.eps_right.unwrap_or(0.0),
            ),
        };
        Ok(sample.with_efficiency(self.channel.eta))
    }

    pub fn birefringence_model(&self) -> CliResult<BirefringenceModel> {
        if self.channel.mode != ChannelMode::Birefringence {
            return Err(field_error(
                "channel.mode",
                "this command needs mode = \"birefringence\"",
            ));
        }
        Ok(BirefringenceModel::new(self.probe_spec(), self.sample()?)?)
    }

    pub fn dichroism_model(&self) -> CliResult<DichroismModel> {
        if self.channel.mode != ChannelMode::Dichroism {
            return Err(field_error(
                "channel.mode",
                "this command needs mode = \"dichroism\"",
            ));
        }
        Ok(DichroismModel::new(self.probe_spec(), self.sample()?)?)
    }

    /// Waveplate angle, resolving `"optimal"` against the configured `Δφ`.
    pub fn xi(&self, model: &BirefringenceModel) -> f64 {
        match self.measurement.xi {
            AngleSetting::Radians(x) => x,
            AngleSetting::Named(Keyword::Optimal) => optimal_waveplate_angle(model.delta_phi()),
        }
    }

    /// Monte Carlo plan; `seed` overrides the configured seed.
    pub fn plan(&self, seed: Option<u64>) -> CliResult<ExperimentPlan> {
        let m = &self.measurement;
        let default = match self.channel.mode {
            ChannelMode::Birefringence => SchemeName::Balanced,
            ChannelMode::Dichroism => SchemeName::IntensityRatio,
        };
        let scheme = match m.scheme.unwrap_or(default) {
            SchemeName::Balanced => {
                let model = self.birefringence_model()?;
                Scheme::Balanced {
                    model,
                    xi: self.xi(&model),
                }
            }
            SchemeName::IntensityRatio => Scheme::IntensityRatio {
                model: self.dichroism_model()?,
                pooling: match m.pooling {
                    PoolingName::Summed => Pooling::Summed,
                    PoolingName::PerTrial => Pooling::PerTrial,
                },
            },
        };
        Ok(ExperimentPlan {
            scheme,
            trials: m.nu,
            seed: seed.or(m.seed),
            outcome_model: match m.outcome_model {
                OutcomeName::GaussianBright => OutcomeModel::GaussianBright,
                OutcomeName::ExactFock => OutcomeModel::ExactFock,
            },
        })
    }
}
