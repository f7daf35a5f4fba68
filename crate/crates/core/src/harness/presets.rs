use serde::{Deserialize, Serialize};

use super::experiment::Experiment;
use crate::error::{Error, Result};

/// What a preset reproduces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PresetKind {
    /// Convergence study over the experiment's levels.
    Table,
    /// All schemes at the experiment's first level against its reference.
    Figure,
}

/// A named, shipped experiment set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Preset {
    pub name: String,
    pub description: String,
    pub kind: PresetKind,
    pub experiments: Vec<Experiment>,
}

const SOURCES: [(&str, &str); 10] = [
    ("table-kk", include_str!("../../presets/table-kk.json")),
    ("table-arrhenius", include_str!("../../presets/table-arrhenius.json")),
    ("table-multilane", include_str!("../../presets/table-multilane.json")),
    ("table-euler", include_str!("../../presets/table-euler.json")),
    ("table-garz", include_str!("../../presets/table-garz.json")),
    ("figure-kk", include_str!("../../presets/figure-kk.json")),
    ("figure-arrhenius", include_str!("../../presets/figure-arrhenius.json")),
    ("figure-multilane", include_str!("../../presets/figure-multilane.json")),
    ("figure-euler", include_str!("../../presets/figure-euler.json")),
    ("figure-garz", include_str!("../../presets/figure-garz.json")),
];

impl Preset {
    pub fn names() -> impl Iterator<Item = &'static str> {
        SOURCES.iter().map(|(n, _)| *n)
    }

    /// The raw JSON document of a shipped preset.
    pub fn source(name: &str) -> Result<&'static str> {
        SOURCES
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, s)| *s)
            .ok_or_else(|| {
                let known: Vec<_> = Self::names().collect();
                Error::Config(format!("unknown preset '{name}' (known: {})", known.join(", ")))
            })
    }

    pub fn load(name: &str) -> Result<Self> {
        let preset: Preset =
            serde_json::from_str(Self::source(name)?).map_err(|e| Error::Config(format!("preset '{name}': {e}")))?;
        for exp in &preset.experiments {
            exp.validate()?;
        }
        Ok(preset)
    }

    pub fn all() -> Result<Vec<Self>> {
        Self::names().map(Self::load).collect()
    }

    /// Level at which a figure preset compares schemes.
    pub fn figure_level(exp: &Experiment) -> u32 {
        exp.levels.first().copied().unwrap_or(0)
    }
}
