//! Run configuration documents.

use std::fmt;
use std::path::{Path, PathBuf};

use nonlocal_nt::grid::BoundaryCondition;
use nonlocal_nt::harness::{Experiment, InitialSpec, Preset, PresetKind};
use nonlocal_nt::kernels::KernelShape;
use nonlocal_nt::limiters::ClipConfig;
use nonlocal_nt::models::ModelKind;
use nonlocal_nt::schemes::SchemeId;
use nonlocal_nt::time::StepMode;
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

/// Invalid input, reported with exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum Verbosity {
    Quiet,
    #[default]
    Normal,
    Verbose,
}

/// A single experiment with output settings. Omitted fields take the
/// model's defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelKind,
    #[serde(default)]
    pub kernel: Option<KernelShape>,
    #[serde(default)]
    pub eta: Option<f64>,
    /// Catalog name or inline expressions; `<model>-smooth` by default.
    #[serde(default)]
    pub initial: Option<InitialSpec>,
    #[serde(default)]
    pub domain: Option<[f64; 2]>,
    /// Final time.
    #[serde(rename = "T", alias = "t_final")]
    pub t_final: f64,
    #[serde(default)]
    pub bc: Option<BoundaryCondition>,
    #[serde(default)]
    pub dx0: Option<f64>,
    #[serde(default)]
    pub levels: Option<Vec<u32>>,
    #[serde(default)]
    pub reference_level: Option<u32>,
    /// Level for `run` and `compare`; the first of `levels` by default.
    #[serde(default)]
    pub level: Option<u32>,
    #[serde(default)]
    pub schemes: Option<Vec<SchemeId>>,
    #[serde(default)]
    pub reference_scheme: Option<SchemeId>,
    #[serde(default)]
    pub theta: Option<f64>,
    #[serde(default)]
    pub clip: Option<ClipConfig>,
    #[serde(default)]
    pub cfl: Option<f64>,
    #[serde(default)]
    pub step_mode: Option<StepMode>,
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub strict_cfl: Option<bool>,
    /// Output directory.
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub verbosity: Option<Verbosity>,
}

impl RunConfig {
    pub fn experiment(&self) -> Experiment {
        let initial = match &self.initial {
            Some(spec) => spec.clone(),
            None => InitialSpec::Named(format!("{}-smooth", short_name(self.model))),
        };
        let mut exp = Experiment::new(self.model, "", self.domain.unwrap_or([-1.0, 1.0]), self.t_final);
        exp.initial = initial;
        exp.eta = Some(self.eta.unwrap_or_else(|| self.model.default_eta()));
        exp.kernel = Some(self.kernel.unwrap_or_else(|| self.model.default_kernel()));
        if let Some(bc) = self.bc {
            exp.bc = bc;
        }
        if let Some(dx0) = self.dx0 {
            exp.dx0 = dx0;
        }
        if let Some(levels) = &self.levels {
            exp.levels = levels.clone();
        }
        if let Some(r) = self.reference_level {
            exp.reference_level = r;
        }
        if let Some(s) = &self.schemes {
            exp.schemes = s.clone();
        }
        exp.reference_scheme = self.reference_scheme;
        exp.theta = self.theta;
        if let Some(c) = self.clip {
            exp.clip = c;
        }
        if let Some(c) = self.cfl {
            exp.cfl = c;
        }
        if let Some(m) = self.step_mode {
            exp.step_mode = m;
        }
        exp.lambda = self.lambda;
        exp.strict_cfl = self.strict_cfl.unwrap_or(false);
        exp
    }
}

/// Catalog prefix of a model's initial data.
fn short_name(model: ModelKind) -> &'static str {
    match model {
        ModelKind::KeyfitzKranzer => "kk",
        ModelKind::Arrhenius => "arrhenius",
        ModelKind::Multilane => "multilane",
        ModelKind::NonlocalEuler => "euler",
        ModelKind::Garz => "garz",
    }
}

/// Parses a configuration document, naming the key path of any error.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." {
            ConfigError(format!("config: {inner}"))
        } else {
            ConfigError(format!("config at '{path}': {inner}"))
        }
    })?;
    Ok(cfg)
}

/// Reads and parses a configuration file.
pub fn read_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| ConfigError(format!("{}: {}", path.display(), e.0)))
}

/// Experiments to execute, with the name their outputs are filed under.
#[derive(Debug, Clone)]
pub struct Job {
    pub name: String,
    pub kind: Option<PresetKind>,
    pub experiments: Vec<Experiment>,
    /// Level for `run` and `compare`.
    pub level: Option<u32>,
    pub out: Option<PathBuf>,
    pub verbosity: Verbosity,
}

impl Job {
    pub fn from_config(name: &str, cfg: &RunConfig) -> Result<Self, ConfigError> {
        let exp = cfg.experiment();
        exp.validate().map_err(|e| ConfigError(e.to_string()))?;
        Ok(Self {
            name: name.to_string(),
            kind: None,
            experiments: vec![exp],
            level: cfg.level,
            out: cfg.out.clone(),
            verbosity: cfg.verbosity.unwrap_or_default(),
        })
    }

    pub fn from_preset(name: &str) -> Result<Self, ConfigError> {
        let preset = Preset::load(name).map_err(|e| ConfigError(e.to_string()))?;
        Ok(Self {
            name: preset.name,
            kind: Some(preset.kind),
            experiments: preset.experiments,
            level: None,
            out: None,
            verbosity: Verbosity::Normal,
        })
    }

    /// Level for single-level commands of one experiment.
    pub fn level_of(&self, exp: &Experiment) -> u32 {
        self.level.unwrap_or_else(|| Preset::figure_level(exp))
    }

    /// File stem for one experiment; the kernel is appended when a job
    /// holds several.
    pub fn stem(&self, exp: &Experiment) -> String {
        if self.experiments.len() > 1 {
            format!("{}-{}", self.name, exp.kernel())
        } else {
            self.name.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg = parse_config(r#"{"model": "arrhenius", "kernel": "constant", "eta": 0.2, "T": 0.15}"#).unwrap();
        let exp = cfg.experiment();
        assert_eq!(exp.initial, InitialSpec::Named("arrhenius-smooth".into()));
        assert_eq!(exp.domain, [-1.0, 1.0]);
        assert_eq!(exp.clip, ClipConfig::default());
        assert!(exp.lambda.is_none());
        exp.validate().unwrap();
    }

    #[test]
    fn t_final_alias() {
        let a = parse_config(r#"{"model": "garz", "T": 0.5}"#).unwrap();
        let b = parse_config(r#"{"model": "garz", "t_final": 0.5}"#).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn unknown_key_names_path() {
        let e = parse_config(r#"{"model": "arrhenius", "T": 0.1, "viscosity": 1}"#).unwrap_err();
        assert!(e.0.contains("viscosity"), "{e}");
        let e =
            parse_config(r#"{"model": "arrhenius", "T": 0.1, "clip": {"enabled": true, "viscosity": 1}}"#).unwrap_err();
        assert!(e.0.contains("clip") && e.0.contains("viscosity"), "{e}");
    }

    #[test]
    fn default_initial_exists_for_every_model() {
        for model in ModelKind::ALL {
            let cfg = RunConfig {
                model,
                ..parse_config(r#"{"model": "arrhenius", "T": 0.1}"#).unwrap()
            };
            let mut exp = cfg.experiment();
            exp.reference_level = 6;
            exp.validate().unwrap();
        }
    }
}
