//! Experiment configuration file (TOML).
//!
//! ```toml
//! [spectrum]
//! lambda0_nm = 800.0
//! sigma_nm = 2.55          # or fwhm_nm, or [[spectrum.components]]
//!
//! [protocol]
//! initial_pair = ["H", "V"] # or [[x, y, z], [x, y, z]]
//!
//! [protocol.uniform]
//! steps = 20
//! eta = 0.5                 # or angle_deg
//! delta_l = 120.0           # or thickness_mm (+ delta_n)
//!
//! [backend]
//! kind = "lattice"          # quadrature | lattice | both
//! nodes = 4097
//! span_sigmas = 8.0
//! lattice_cap = 10000
//! ```
//!
//! Instead of `[protocol.uniform]` an explicit list of `[[protocol.schedule]]`
//! entries may be given, each with an optional `repeat` count. Optional
//! `[sweep]`, `[optimize]` and `[measures]` tables configure the other
//! subcommands. Every error names the offending key and, where known, its
//! line.

use std::fmt;
use std::path::Path;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize};

use crate::engine::Backend;
use crate::environment::{SpectralComponent, SpectralModel, DEFAULT_NODES, DEFAULT_SPAN_SIGMAS};
use crate::engine::lattice::DEFAULT_CAP;
use crate::protocol::{lab, named_state, ControlSpec, PlateSpec, Protocol, StatePair, Step};
use crate::qmath::{BlochVector, DensityMatrix};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{}{message}", location(*.line, key))]
    Invalid {
        key: String,
        line: Option<usize>,
        message: String,
    },
}

fn location(line: Option<usize>, key: &str) -> String {
    let line = line.map(|l| format!("line {l}: ")).unwrap_or_default();
    if key.is_empty() { line } else { format!("{line}{key}: ") }
}

impl ConfigError {
    pub fn key(&self) -> Option<&str> {
        match self {
            ConfigError::Invalid { key, .. } => Some(key),
            ConfigError::Io { .. } => None,
        }
    }

    pub fn line(&self) -> Option<usize> {
        match self {
            ConfigError::Invalid { line, .. } => *line,
            ConfigError::Io { .. } => None,
        }
    }
}

macro_rules! checked_float {
    ($name:ident, $doc:literal, $ok:expr, $what:literal) => {
        #[doc = $doc]
        #[derive(Debug, Clone, Copy, PartialEq, Serialize)]
        #[serde(transparent)]
        pub struct $name(pub f64);

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let v = f64::deserialize(d)?;
                let ok: fn(f64) -> bool = $ok;
                if !ok(v) {
                    return Err(D::Error::custom(format!("{v} is not {}", $what)));
                }
                Ok($name(v))
            }
        }
    };
}

checked_float!(Fraction, "A value in `[0, 1]`.", |v| (0.0..=1.0).contains(&v), "in [0, 1]");
checked_float!(Angle, "A wave-plate angle in `[0, 45]` degrees.", |v| (0.0..=45.0).contains(&v), "an angle in [0, 45] degrees");
checked_float!(NonNegative, "A finite value `≥ 0`.", |v| v.is_finite() && v >= 0.0, "finite and non-negative");
checked_float!(Positive, "A finite value `> 0`.", |v| v.is_finite() && v > 0.0, "finite and positive");

fn default_lambda0() -> Positive {
    Positive(lab::LAMBDA0_NM)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    #[serde(default = "default_lambda0")]
    pub lambda0_nm: Positive,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_nm: Option<Positive>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fwhm_nm: Option<Positive>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub components: Option<Vec<ComponentConfig>>,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        SpectrumConfig {
            lambda0_nm: default_lambda0(),
            sigma_nm: Some(Positive(lab::SIGMA_NM)),
            fwhm_nm: None,
            components: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentConfig {
    pub weight: Positive,
    pub center_nm: Positive,
    pub sigma_nm: Positive,
}

/// Two named basis states or two Bloch vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PairConfig {
    Named([String; 2]),
    Bloch([[f64; 3]; 2]),
}

impl Default for PairConfig {
    fn default() -> Self {
        PairConfig::Named(["H".into(), "V".into()])
    }
}

/// One control/plate specification; exactly one of `eta`/`angle_deg` and
/// one of `delta_l`/`thickness_mm`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<Fraction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle_deg: Option<Angle>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_l: Option<NonNegative>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thickness_mm: Option<NonNegative>,
    /// Birefringence for `thickness_mm`; defaults to the quartz value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_n: Option<Positive>,
    /// Number of consecutive copies (schedule entries only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repeat: Option<usize>,
    /// Number of steps (uniform shorthand only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolConfig {
    #[serde(default)]
    pub initial_pair: PairConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uniform: Option<StepConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Vec<StepConfig>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Quadrature,
    #[default]
    Lattice,
    Both,
}

fn default_nodes() -> usize {
    DEFAULT_NODES
}
fn default_span() -> Positive {
    Positive(DEFAULT_SPAN_SIGMAS)
}
fn default_cap() -> usize {
    DEFAULT_CAP
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackendConfig {
    #[serde(default)]
    pub kind: BackendKind,
    #[serde(default = "default_nodes")]
    pub nodes: usize,
    #[serde(default = "default_span")]
    pub span_sigmas: Positive,
    #[serde(default = "default_cap")]
    pub lattice_cap: usize,
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig {
            kind: BackendKind::default(),
            nodes: default_nodes(),
            span_sigmas: default_span(),
            lattice_cap: default_cap(),
        }
    }
}

impl BackendConfig {
    pub fn quadrature(&self) -> Backend {
        Backend::Quadrature {
            nodes: self.nodes,
            span_sigmas: self.span_sigmas.0,
        }
    }

    pub fn lattice(&self) -> Backend {
        Backend::Lattice { cap: self.lattice_cap }
    }

    /// Backends to run, in reporting order.
    pub fn backends(&self) -> Vec<Backend> {
        match self.kind {
            BackendKind::Quadrature => vec![self.quadrature()],
            BackendKind::Lattice => vec![self.lattice()],
            BackendKind::Both => vec![self.lattice(), self.quadrature()],
        }
    }
}

/// Explicit values or `count` evenly spaced points from `start` to `stop`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RangeConfig {
    Values(Vec<f64>),
    Linspace { start: f64, stop: f64, count: usize },
}

impl RangeConfig {
    pub fn values(&self) -> Vec<f64> {
        match *self {
            RangeConfig::Values(ref v) => v.clone(),
            RangeConfig::Linspace { start, stop, count } => match count {
                0 => Vec::new(),
                1 => vec![start],
                _ => (0..count)
                    .map(|k| start + (stop - start) * (k as f64 / (count - 1) as f64))
                    .collect(),
            },
        }
    }
}

fn default_max_points() -> usize {
    10_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub etas: RangeConfig,
    pub delta_ls: RangeConfig,
    /// Steps per grid point; defaults to the protocol length.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default = "default_max_points")]
    pub max_points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// `N` for the configured initial pair.
    #[default]
    FixedPair,
    /// `N` maximized over antipodal pure pairs.
    OptimalPair,
}

fn default_budget() -> usize {
    400
}
fn default_restarts() -> usize {
    4
}
fn default_initial_step() -> Positive {
    Positive(0.25)
}
fn default_min_step() -> Positive {
    Positive(1e-9)
}
fn default_max_multiple() -> usize {
    3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeConfig {
    #[serde(default = "default_budget")]
    pub budget: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default = "default_initial_step")]
    pub initial_step: Positive,
    #[serde(default = "default_min_step")]
    pub min_step: Positive,
    #[serde(default)]
    pub objective: Objective,
    /// Also search plate multiples `l_i ∈ 0..=max_multiple` of the base
    /// plate (the first step's `ΔL`).
    #[serde(default)]
    pub optimize_delta_l: bool,
    #[serde(default = "default_max_multiple")]
    pub max_multiple: usize,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        OptimizeConfig {
            budget: default_budget(),
            seed: 0,
            restarts: default_restarts(),
            initial_step: default_initial_step(),
            min_step: default_min_step(),
            objective: Objective::default(),
            optimize_delta_l: false,
            max_multiple: default_max_multiple(),
        }
    }
}

fn default_resolution() -> usize {
    16
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasuresConfig {
    /// Hemisphere resolution for the antipodal pair search.
    #[serde(default = "default_resolution")]
    pub pair_resolution: usize,
    /// Hemisphere resolution of the positivity test in divisibility maps.
    #[serde(default = "default_resolution")]
    pub divisibility_resolution: usize,
}

impl Default for MeasuresConfig {
    fn default() -> Self {
        MeasuresConfig {
            pair_resolution: default_resolution(),
            divisibility_resolution: default_resolution(),
        }
    }
}

/// A complete experiment description.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub spectrum: SpectrumConfig,
    #[serde(default)]
    pub protocol: ProtocolConfig,
    #[serde(default)]
    pub backend: BackendConfig,
    #[serde(default)]
    pub measures: MeasuresConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimize: Option<OptimizeConfig>,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Line of the first key or table header matching the last segment of a
/// dotted key path, searched from its parent table header.
fn locate(text: &str, key: &str) -> Option<usize> {
    let (table, leaf) = match key.rsplit_once('.') {
        Some((t, l)) => (Some(t), l),
        None => (None, key),
    };
    let leaf = leaf.split('[').next().unwrap_or(leaf);
    let lines: Vec<&str> = text.lines().collect();
    let start = table
        .and_then(|t| {
            let t = t.split('[').next().unwrap_or(t);
            lines.iter().position(|l| {
                let l = l.trim();
                l == format!("[{t}]") || l == format!("[[{t}]]")
            })
        })
        .unwrap_or(0);
    lines[start..]
        .iter()
        .position(|l| {
            let l = l.trim();
            let bare = l.trim_start_matches('[').trim_end_matches(']');
            l.split('=').next().map(str::trim) == Some(leaf) || bare == key || bare.ends_with(&format!(".{leaf}"))
        })
        .map(|k| start + k + 1)
}

struct Ctx<'a> {
    text: Option<&'a str>,
}

impl Ctx<'_> {
    fn err(&self, key: &str, message: impl fmt::Display) -> ConfigError {
        ConfigError::Invalid {
            key: key.to_string(),
            line: self.text.and_then(|t| locate(t, key)),
            message: message.to_string(),
        }
    }
}

impl ExperimentConfig {
    /// Parses and validates a configuration.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let de = toml::Deserializer::parse(text).map_err(|e| ConfigError::Invalid {
            key: String::new(),
            line: e.span().map(|s| line_of(text, s.start)),
            message: e.message().trim().to_string(),
        })?;
        let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let key = e.path().to_string();
            let inner = e.into_inner();
            let line = inner.span().map(|s| line_of(text, s.start)).or_else(|| locate(text, &key));
            ConfigError::Invalid {
                key,
                line,
                message: inner.message().trim().to_string(),
            }
        })?;
        cfg.validate(&Ctx { text: Some(text) })?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Configuration reproducing a protocol under the given spectrum.
    pub fn from_protocol(protocol: &Protocol, spectrum: SpectrumConfig) -> Self {
        ExperimentConfig {
            spectrum,
            protocol: ProtocolConfig::from_protocol(protocol),
            ..Default::default()
        }
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("configuration is always representable")
    }

    fn validate(&self, ctx: &Ctx) -> Result<(), ConfigError> {
        self.spectrum_model_in(ctx)?;
        self.protocol_in(ctx)?;
        if self.backend.nodes < 3 || self.backend.nodes % 2 == 0 {
            return Err(ctx.err("backend.nodes", format!("{} must be odd and at least 3", self.backend.nodes)));
        }
        if self.backend.lattice_cap == 0 {
            return Err(ctx.err("backend.lattice_cap", "must be positive"));
        }
        for (key, res) in [
            ("measures.pair_resolution", self.measures.pair_resolution),
            ("measures.divisibility_resolution", self.measures.divisibility_resolution),
        ] {
            if res < crate::measures::MIN_RESOLUTION {
                return Err(ctx.err(key, format!("{res} is below the minimum of {}", crate::measures::MIN_RESOLUTION)));
            }
        }
        if let Some(s) = &self.sweep {
            for (key, range) in [("sweep.etas", &s.etas), ("sweep.delta_ls", &s.delta_ls)] {
                let values = range.values();
                if values.is_empty() {
                    return Err(ctx.err(key, "range is empty"));
                }
                if let Some(v) = values.iter().find(|v| !v.is_finite()) {
                    return Err(ctx.err(key, format!("{v} is not finite")));
                }
            }
            if let Some(v) = s.etas.values().iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(ctx.err("sweep.etas", format!("{v} is not in [0, 1]")));
            }
            if let Some(v) = s.delta_ls.values().iter().find(|v| **v < 0.0) {
                return Err(ctx.err("sweep.delta_ls", format!("{v} is negative")));
            }
            if s.steps == Some(0) {
                return Err(ctx.err("sweep.steps", "must be positive"));
            }
        }
        if let Some(o) = &self.optimize {
            if o.budget == 0 {
                return Err(ctx.err("optimize.budget", "at least one evaluation is required"));
            }
        }
        Ok(())
    }

    fn spectrum_model_in(&self, ctx: &Ctx) -> Result<SpectralModel, ConfigError> {
        let s = &self.spectrum;
        let lambda0 = s.lambda0_nm.0;
        let given = [s.sigma_nm.is_some(), s.fwhm_nm.is_some(), s.components.is_some()]
            .iter()
            .filter(|&&b| b)
            .count();
        if given > 1 {
            return Err(ctx.err("spectrum", "give exactly one of sigma_nm, fwhm_nm or components"));
        }
        let model = if let Some(sigma) = s.sigma_nm {
            SpectralModel::gaussian(lambda0, sigma.0)
        } else if let Some(fwhm) = s.fwhm_nm {
            SpectralModel::gaussian_fwhm(lambda0, fwhm.0)
        } else if let Some(components) = &s.components {
            let comps = components
                .iter()
                .map(|c| SpectralComponent {
                    weight: c.weight.0,
                    center_nm: c.center_nm.0,
                    sigma_nm: c.sigma_nm.0,
                })
                .collect();
            SpectralModel::new(comps, lambda0)
        } else {
            SpectralModel::gaussian(lambda0, lab::SIGMA_NM)
        };
        model.map_err(|e| ctx.err("spectrum", e))
    }

    fn protocol_in(&self, ctx: &Ctx) -> Result<Protocol, ConfigError> {
        let p = &self.protocol;
        let lambda0 = self.spectrum.lambda0_nm.0;
        let pair = p.initial_pair.to_pair().map_err(|m| ctx.err("protocol.initial_pair", m))?;
        let steps = match (&p.uniform, &p.schedule) {
            (Some(u), None) => {
                let n = u
                    .steps
                    .ok_or_else(|| ctx.err("protocol.uniform.steps", "missing number of steps"))?;
                if n == 0 {
                    return Err(ctx.err("protocol.uniform.steps", "must be positive"));
                }
                if u.repeat.is_some() {
                    return Err(ctx.err("protocol.uniform.repeat", "only valid in schedule entries"));
                }
                vec![u.to_step(lambda0, "protocol.uniform", ctx)?; n]
            }
            (None, Some(entries)) => {
                let mut steps = Vec::new();
                for (k, e) in entries.iter().enumerate() {
                    let key = format!("protocol.schedule[{k}]");
                    if e.steps.is_some() {
                        return Err(ctx.err(&format!("{key}.steps"), "use repeat in schedule entries"));
                    }
                    let step = e.to_step(lambda0, &key, ctx)?;
                    let repeat = e.repeat.unwrap_or(1);
                    if repeat == 0 {
                        return Err(ctx.err(&format!("{key}.repeat"), "must be positive"));
                    }
                    steps.extend(std::iter::repeat_n(step, repeat));
                }
                steps
            }
            (Some(_), Some(_)) => return Err(ctx.err("protocol", "give either [protocol.uniform] or [[protocol.schedule]], not both")),
            (None, None) => return Err(ctx.err("protocol", "missing [protocol.uniform] or [[protocol.schedule]]")),
        };
        Protocol::new(steps, pair).map_err(|e| ctx.err("protocol", e))
    }

    pub fn spectral_model(&self) -> Result<SpectralModel, ConfigError> {
        self.spectrum_model_in(&Ctx { text: None })
    }

    pub fn protocol(&self) -> Result<Protocol, ConfigError> {
        self.protocol_in(&Ctx { text: None })
    }
}

impl StepConfig {
    fn to_step(&self, lambda0_nm: f64, key: &str, ctx: &Ctx) -> Result<Step, ConfigError> {
        let control = match (self.eta, self.angle_deg) {
            (Some(eta), None) => ControlSpec::new(eta.0),
            (None, Some(angle)) => ControlSpec::from_angle(angle.0),
            _ => return Err(ctx.err(key, "give exactly one of eta or angle_deg")),
        }
        .map_err(|e| ctx.err(key, e))?;
        let plate = match (self.delta_l, self.thickness_mm) {
            (Some(dl), None) => {
                if self.delta_n.is_some() {
                    return Err(ctx.err(&format!("{key}.delta_n"), "only valid with thickness_mm"));
                }
                PlateSpec::new(dl.0)
            }
            (None, Some(t)) => PlateSpec::from_thickness(t.0, self.delta_n.map_or(lab::DELTA_N, |d| d.0), lambda0_nm),
            _ => return Err(ctx.err(key, "give exactly one of delta_l or thickness_mm")),
        }
        .map_err(|e| ctx.err(key, e))?;
        Ok(Step { control, plate })
    }

    fn from_step(step: &Step) -> Self {
        StepConfig {
            eta: Some(Fraction(step.control.eta())),
            delta_l: Some(NonNegative(step.plate.delta_l())),
            ..Default::default()
        }
    }
}

const NAMES: [&str; 6] = ["H", "V", "D", "A", "R", "L"];

impl PairConfig {
    pub fn to_pair(&self) -> Result<StatePair, String> {
        match self {
            PairConfig::Named(names) => {
                let get = |n: &String| named_state(n).ok_or_else(|| format!("unknown state {n:?}; expected one of {NAMES:?}"));
                Ok([get(&names[0])?, get(&names[1])?])
            }
            PairConfig::Bloch(vectors) => {
                let get = |v: &[f64; 3]| {
                    DensityMatrix::from_bloch(BlochVector(*v)).map_err(|e| format!("Bloch vector {v:?} is not a state: {e}"))
                };
                Ok([get(&vectors[0])?, get(&vectors[1])?])
            }
        }
    }

    /// Names when both states are exactly named basis states, Bloch vectors
    /// otherwise.
    pub fn from_pair(pair: &StatePair) -> Self {
        let name = |rho: &DensityMatrix| {
            NAMES
                .iter()
                .find(|n| named_state(n).as_ref() == Some(rho))
                .map(|n| n.to_string())
        };
        match (name(&pair[0]), name(&pair[1])) {
            (Some(a), Some(b)) => PairConfig::Named([a, b]),
            _ => PairConfig::Bloch([pair[0].bloch().0, pair[1].bloch().0]),
        }
    }
}

impl ProtocolConfig {
    /// Uniform shorthand when possible, otherwise a run-length schedule.
    pub fn from_protocol(p: &Protocol) -> Self {
        let initial_pair = PairConfig::from_pair(p.initial_pair());
        if p.is_uniform() {
            return ProtocolConfig {
                initial_pair,
                uniform: Some(StepConfig {
                    steps: Some(p.len()),
                    ..StepConfig::from_step(&p.steps()[0])
                }),
                schedule: None,
            };
        }
        let mut schedule: Vec<(Step, usize)> = Vec::new();
        for s in p.steps() {
            match schedule.last_mut() {
                Some((last, count)) if last == s => *count += 1,
                _ => schedule.push((*s, 1)),
            }
        }
        ProtocolConfig {
            initial_pair,
            uniform: None,
            schedule: Some(
                schedule
                    .into_iter()
                    .map(|(s, n)| StepConfig {
                        repeat: (n > 1).then_some(n),
                        ..StepConfig::from_step(&s)
                    })
                    .collect(),
            ),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const LAB: &str = r#"
[spectrum]
lambda0_nm = 800.0
sigma_nm = 2.55

[protocol]
initial_pair = ["H", "V"]

[protocol.uniform]
steps = 20
eta = 0.5
delta_l = 120
"#;

    #[test]
    fn parses_lab_configuration() {
        let cfg = ExperimentConfig::parse(LAB).unwrap();
        let p = cfg.protocol().unwrap();
        assert_eq!(p, Protocol::lab(0.5, 120.0).unwrap());
        assert_eq!(cfg.spectral_model().unwrap(), SpectralModel::lab_default());
        assert_eq!(cfg.backend.backends(), vec![Backend::Lattice { cap: DEFAULT_CAP }]);
    }

    #[test]
    fn thickness_and_angle_forms() {
        let text = r#"
[protocol.uniform]
steps = 3
angle_deg = 22.5
thickness_mm = 10.667
"#;
        let p = ExperimentConfig::parse(text).unwrap().protocol().unwrap();
        let s = p.steps()[0];
        assert!((s.control.eta() - 0.5).abs() < 1e-12);
        assert!((s.plate.delta_l() - 119.93).abs() < 0.01);
    }

    #[test]
    fn schedule_with_repeats() {
        let text = r#"
[protocol]
initial_pair = [[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]]

[[protocol.schedule]]
eta = 0.0
delta_l = 80
repeat = 2

[[protocol.schedule]]
eta = 1.0
delta_l = 40
"#;
        let p = ExperimentConfig::parse(text).unwrap().protocol().unwrap();
        assert_eq!(p.len(), 3);
        assert_eq!(p.steps()[2], Step::new(1.0, 40.0).unwrap());
        assert_eq!(p.initial_pair()[0].bloch().0, [1.0, 0.0, 0.0]);
    }

    #[test]
    fn out_of_range_value_reports_key_and_line() {
        let text = LAB.replace("eta = 0.5", "eta = 1.5");
        let err = ExperimentConfig::parse(&text).unwrap_err();
        assert_eq!(err.key(), Some("protocol.uniform.eta"));
        assert_eq!(err.line(), Some(11));
        assert!(err.to_string().contains("line 11"), "{err}");
    }

    #[test]
    fn unknown_key_is_rejected_with_path() {
        let text = LAB.replace("sigma_nm = 2.55", "sigma_nm = 2.55\nsigma = 3");
        let err = ExperimentConfig::parse(&text).unwrap_err();
        assert_eq!(err.key(), Some("spectrum.sigma"));
        assert_eq!(err.line(), Some(5));
    }

    #[test]
    fn conflicting_fields_report_table() {
        let text = LAB.replace("eta = 0.5", "eta = 0.5\nangle_deg = 10");
        let err = ExperimentConfig::parse(&text).unwrap_err();
        assert_eq!(err.key(), Some("protocol.uniform"));
        assert_eq!(err.line(), Some(9));
    }

    #[test]
    fn unknown_state_name() {
        let text = LAB.replace(r#"["H", "V"]"#, r#"["H", "Q"]"#);
        let err = ExperimentConfig::parse(&text).unwrap_err();
        assert_eq!(err.key(), Some("protocol.initial_pair"));
        assert_eq!(err.line(), Some(7));
    }

    #[test]
    fn syntax_error_has_line() {
        let err = ExperimentConfig::parse("[protocol\n").unwrap_err();
        assert_eq!(err.line(), Some(1));
    }

    #[test]
    fn missing_protocol_is_an_error() {
        let err = ExperimentConfig::parse("[spectrum]\nsigma_nm = 2.0\n").unwrap_err();
        assert_eq!(err.key(), Some("protocol"));
    }

    #[test]
    fn sweep_and_optimize_tables() {
        let text = format!(
            "{LAB}\n[sweep]\netas = {{ start = 0.0, stop = 1.0, count = 5 }}\ndelta_ls = [80, 120]\n\n[optimize]\nbudget = 10\nseed = 7\n"
        );
        let cfg = ExperimentConfig::parse(&text).unwrap();
        let sweep = cfg.sweep.unwrap();
        assert_eq!(sweep.etas.values(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(sweep.delta_ls.values(), vec![80.0, 120.0]);
        let opt = cfg.optimize.unwrap();
        assert_eq!((opt.budget, opt.seed, opt.restarts), (10, 7, 4));
    }

    #[test]
    fn serialized_config_parses_back() {
        let cfg = ExperimentConfig::parse(LAB).unwrap();
        let again = ExperimentConfig::parse(&cfg.to_toml_string()).unwrap();
        assert_eq!(cfg, again);
    }

    fn decimal(max_int: i64, digits: u32) -> impl Strategy<Value = f64> {
        let scale = 10i64.pow(digits);
        (0..=max_int * scale).prop_map(move |k| format!("{}.{:0width$}", k / scale, k % scale, width = digits as usize).parse().unwrap())
    }

    proptest! {
        #[test]
        fn protocol_round_trips_bit_identically(
            etas in prop::collection::vec(decimal(1, 8), 1..6),
            dls in prop::collection::vec(decimal(999, 6), 1..6),
            repeat in 1usize..4,
            names in (0usize..6, 0usize..6),
        ) {
            let steps: Vec<Step> = etas
                .iter()
                .zip(dls.iter().cycle())
                .flat_map(|(&e, &d)| std::iter::repeat_n(Step::new(e.min(1.0), d).unwrap(), repeat))
                .collect();
            let pair = [named_state(NAMES[names.0]).unwrap(), named_state(NAMES[names.1]).unwrap()];
            let p = Protocol::new(steps, pair).unwrap();
            let text = ExperimentConfig::from_protocol(&p, SpectrumConfig::default()).to_toml_string();
            let back = ExperimentConfig::parse(&text).unwrap().protocol().unwrap();
            prop_assert_eq!(back, p);
        }
    }
}
