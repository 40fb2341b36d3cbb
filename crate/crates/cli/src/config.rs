//! Scene configuration (TOML).
//!
//! Every key has a default matching the reference experiment, so an empty
//! document describes it completely. Relative paths are resolved against the
//! directory holding the configuration file.
//!
//! ```toml
//! seed = 1
//! sample_rate = 48000
//! output = "out"
//! sh_order = 30
//! reference = "reference"
//! peak_dbfs = -3.0
//!
//! [room]
//! dimensions = [15.5, 9.8, 7.5]
//! reflection_coefficient = 0.8
//! target_t60 = 0.75
//! # length = 1.125            (seconds; default 1.5 × target_t60)
//!
//! [listener]
//! position = [9.0, 7.0, 1.7]
//! facing_deg = -8.0
//!
//! [[environments]]
//! id = 1
//! source_distance = 3.315
//! source_azimuth_deg = 30.0
//!
//! [hrtf]
//! synthetic_order = 30        # or: path = "subject.hrtf", order = 30
//!
//! [eq]
//! smoothing_octaves = 0.3333333333333333
//! gain_limit_db = 20.0
//!
//! [[conditions]]
//! name = "mixed"
//! direct_order = 30
//! reverb_order = 1
//!
//! [[signals]]
//! kind = "pink"
//! name = "noise"
//!
//! [[signals]]
//! kind = "file"
//! name = "speech"
//! path = "speech.wav"
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use ambimix_core::eq::{DEFAULT_GAIN_LIMIT_DB, DEFAULT_SMOOTHING};
use ambimix_core::hrtf::MAX_ORDER;
use ambimix_core::render::RenderCondition;
use ambimix_core::room::{
    Environment, Geometry, RoomSpec, DEFAULT_FACING_DEG, REFERENCE_LISTENER, SOURCE_AZIMUTH_DEG,
};
use serde::{Deserialize, Serialize};

use crate::PipelineError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SceneSpec {
    pub seed: u64,
    pub sample_rate: u32,
    pub output: PathBuf,
    /// Order of the simulated SH room response.
    pub sh_order: usize,
    /// Name of the condition the others are equalized to.
    pub reference: String,
    /// Peak level of the reference stimulus in each set.
    pub peak_dbfs: f64,
    pub room: RoomConfig,
    pub listener: ListenerConfig,
    pub environments: Vec<EnvironmentConfig>,
    pub hrtf: HrtfConfig,
    pub eq: EqConfig,
    pub conditions: Vec<ConditionConfig>,
    pub signals: Vec<SignalConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RoomConfig {
    pub dimensions: [f64; 3],
    pub reflection_coefficient: f64,
    pub target_t60: f64,
    pub length: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ListenerConfig {
    pub position: [f64; 3],
    pub facing_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentConfig {
    pub id: u32,
    pub source_distance: f64,
    #[serde(default = "default_azimuth")]
    pub source_azimuth_deg: f64,
}

fn default_azimuth() -> f64 {
    SOURCE_AZIMUTH_DEG
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HrtfConfig {
    /// Direction-sampled HRTF container, fitted at `order`.
    pub path: Option<PathBuf>,
    pub order: Option<usize>,
    /// Order of the synthetic HRTF used when no path is given.
    pub synthetic_order: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EqConfig {
    pub smoothing_octaves: f64,
    pub gain_limit_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionConfig {
    pub name: String,
    pub direct_order: usize,
    pub reverb_order: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SignalConfig {
    Pink {
        name: String,
        #[serde(default = "default_burst")]
        burst: f64,
        #[serde(default = "default_fade")]
        fade: f64,
        #[serde(default = "default_pause")]
        pause: f64,
        #[serde(default = "default_repetitions")]
        repetitions: usize,
    },
    File {
        name: String,
        path: PathBuf,
    },
}

fn default_burst() -> f64 {
    1.0
}
fn default_fade() -> f64 {
    0.02
}
fn default_pause() -> f64 {
    0.3
}
fn default_repetitions() -> usize {
    3
}

impl SignalConfig {
    pub fn name(&self) -> &str {
        match self {
            Self::Pink { name, .. } | Self::File { name, .. } => name,
        }
    }

    pub fn pink(name: &str) -> Self {
        Self::Pink {
            name: name.into(),
            burst: default_burst(),
            fade: default_fade(),
            pause: default_pause(),
            repetitions: default_repetitions(),
        }
    }
}

impl Default for RoomConfig {
    fn default() -> Self {
        let r = RoomSpec::reference();
        Self {
            dimensions: r.dimensions,
            reflection_coefficient: r.reflection_coefficient,
            target_t60: r.target_t60,
            length: None,
        }
    }
}

impl Default for ListenerConfig {
    fn default() -> Self {
        Self {
            position: REFERENCE_LISTENER,
            facing_deg: DEFAULT_FACING_DEG,
        }
    }
}

impl Default for EqConfig {
    fn default() -> Self {
        Self {
            smoothing_octaves: DEFAULT_SMOOTHING,
            gain_limit_db: DEFAULT_GAIN_LIMIT_DB,
        }
    }
}

impl Default for SceneSpec {
    fn default() -> Self {
        let environments = [Environment::One, Environment::Two]
            .iter()
            .map(|e| EnvironmentConfig {
                id: e.id(),
                source_distance: e.source_distance(),
                source_azimuth_deg: SOURCE_AZIMUTH_DEG,
            })
            .collect();
        let conditions = RenderCondition::listening_test_conditions()
            .into_iter()
            .map(|c| ConditionConfig {
                name: c.name,
                direct_order: c.direct_order,
                reverb_order: c.reverb_order,
            })
            .collect();
        Self {
            seed: 1,
            sample_rate: ambimix_core::DEFAULT_SAMPLE_RATE,
            output: PathBuf::from("out"),
            sh_order: MAX_ORDER,
            reference: "reference".into(),
            peak_dbfs: -3.0,
            room: RoomConfig::default(),
            listener: ListenerConfig::default(),
            environments,
            hrtf: HrtfConfig {
                synthetic_order: Some(MAX_ORDER),
                ..HrtfConfig::default()
            },
            eq: EqConfig::default(),
            conditions,
            signals: vec![SignalConfig::pink("noise")],
        }
    }
}

impl SceneSpec {
    pub fn from_toml(text: &str) -> Result<Self, PipelineError> {
        toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))
    }

    /// Reads a configuration file and resolves its relative paths.
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = fs::read_to_string(path)
            .map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
        let mut spec = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        spec.resolve_paths(base);
        Ok(spec)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        join(&mut self.output);
        if let Some(p) = self.hrtf.path.as_mut() {
            join(p);
        }
        for s in &mut self.signals {
            if let SignalConfig::File { path, .. } = s {
                join(path);
            }
        }
    }

    pub fn room_spec(&self) -> Result<RoomSpec, PipelineError> {
        RoomSpec::new(
            self.room.dimensions,
            self.room.reflection_coefficient,
            self.room.target_t60,
        )
        .map_err(|e| PipelineError::Config(e.to_string()))
    }

    pub fn response_length(&self) -> f64 {
        self.room.length.unwrap_or(1.5 * self.room.target_t60)
    }

    pub fn geometry(&self, env: &EnvironmentConfig) -> Geometry {
        Geometry::polar(
            self.listener.position,
            self.listener.facing_deg.to_radians(),
            env.source_azimuth_deg.to_radians(),
            env.source_distance,
        )
    }

    pub fn render_conditions(&self) -> Vec<RenderCondition> {
        self.conditions
            .iter()
            .map(|c| RenderCondition::new(c.name.clone(), c.direct_order, c.reverb_order))
            .collect()
    }

    pub fn condition(&self, name: &str) -> Option<RenderCondition> {
        self.render_conditions().into_iter().find(|c| c.name == name)
    }

    /// SH order the HRTF will have once loaded or synthesized.
    pub fn hrtf_order(&self) -> usize {
        match (&self.hrtf.path, self.hrtf.synthetic_order) {
            (Some(_), _) => self.hrtf.order.unwrap_or(self.sh_order),
            (None, Some(n)) => n,
            (None, None) => self.sh_order,
        }
    }

    pub fn hrtf_seed(&self) -> u64 {
        self.hrtf.seed.unwrap_or(self.seed)
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let fail = |m: String| Err(PipelineError::Config(m));
        let room = self.room_spec()?;
        if self.sample_rate == 0 {
            return fail("sample_rate must be positive".into());
        }
        if !(self.response_length() > 0.0) {
            return fail(format!("response length {} s", self.response_length()));
        }
        if self.environments.is_empty() {
            return fail("no environments".into());
        }
        for env in &self.environments {
            self.geometry(env)
                .validate(&room)
                .map_err(|e| PipelineError::Config(format!("environment {}: {e}", env.id)))?;
        }
        if self.hrtf.path.is_some() && self.hrtf.synthetic_order.is_some() {
            return fail("hrtf: give either `path` or `synthetic_order`, not both".into());
        }
        if self.hrtf_order() > MAX_ORDER {
            return fail(format!("hrtf order {} exceeds {MAX_ORDER}", self.hrtf_order()));
        }
        if self.conditions.is_empty() {
            return fail("no conditions".into());
        }
        let limit = self.sh_order.min(self.hrtf_order());
        for c in &self.conditions {
            if c.direct_order.max(c.reverb_order) > limit {
                return fail(format!(
                    "condition `{}` needs order {} but only {limit} is available",
                    c.name,
                    c.direct_order.max(c.reverb_order)
                ));
            }
            if self.conditions.iter().filter(|o| o.name == c.name).count() > 1 {
                return fail(format!("duplicate condition `{}`", c.name));
            }
        }
        if self.condition(&self.reference).is_none() {
            return fail(format!("reference condition `{}` is not listed", self.reference));
        }
        for (i, s) in self.signals.iter().enumerate() {
            if self.signals[..i].iter().any(|o| o.name() == s.name()) {
                return fail(format!("duplicate signal `{}`", s.name()));
            }
            if let SignalConfig::File { path, name } = s {
                if !path.is_file() {
                    return fail(format!("signal `{name}`: {} does not exist", path.display()));
                }
            }
        }
        if let Some(p) = &self.hrtf.path {
            if !p.is_file() {
                return fail(format!("hrtf: {} does not exist", p.display()));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_the_default_scene() {
        assert_eq!(SceneSpec::from_toml("").unwrap(), SceneSpec::default());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(SceneSpec::from_toml("sedd = 3").is_err());
    }

    #[test]
    fn signals_parse() {
        let spec = SceneSpec::from_toml(
            "[[signals]]\nkind = \"pink\"\nname = \"n\"\nrepetitions = 2\n\
             [[signals]]\nkind = \"file\"\nname = \"s\"\npath = \"a.wav\"\n",
        )
        .unwrap();
        assert_eq!(spec.signals.len(), 2);
        assert!(matches!(spec.signals[0], SignalConfig::Pink { repetitions: 2, .. }));
        assert_eq!(spec.signals[1].name(), "s");
    }

    #[test]
    fn orders_above_the_hrtf_are_rejected() {
        let mut spec = SceneSpec::default();
        spec.hrtf.synthetic_order = Some(3);
        assert!(spec.validate().is_err());
        spec.conditions.retain(|c| c.direct_order <= 3 && c.reverb_order <= 3);
        spec.reference = "third".into();
        spec.validate().unwrap();
    }
}
