//! Run configuration: one TOML file with defaults for every field, echoed
//! at startup so a run is reproducible from its log.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detect::OnError;
use crate::hash::DEFAULT_SEEDS;
use crate::ingest::TokenScheme;
use crate::model::{PfThresholdPolicy, SvmConfig};
use crate::textstats::KeywordIdf;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("failed to read config {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("failed to parse config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// Bloom filter geometry shared by the three kterm filters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BloomConfig {
    pub m: u64,
    pub h: u32,
    pub seeds: Vec<u64>,
}

impl Default for BloomConfig {
    fn default() -> Self {
        Self {
            m: 1 << 24,
            h: 7,
            seeds: DEFAULT_SEEDS.to_vec(),
        }
    }
}

impl BloomConfig {
    pub fn seed_pair(&self) -> [u64; 2] {
        [self.seeds[0], self.seeds[1]]
    }
}

/// Sub-document window length: fixed, or measured as the average message
/// length of the training stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowLength {
    Auto,
    Fixed(u32),
}

impl Serialize for WindowLength {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            WindowLength::Auto => s.serialize_str("auto"),
            WindowLength::Fixed(n) => s.serialize_u32(*n),
        }
    }
}

impl<'de> Deserialize<'de> for WindowLength {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(u32),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(n) => Ok(WindowLength::Fixed(n)),
            Raw::Str(s) if s == "auto" => Ok(WindowLength::Auto),
            Raw::Str(s) => Err(serde::de::Error::custom(format!(
                "window length must be an integer or \"auto\", got {s:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    pub length: WindowLength,
    pub stride: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub keep_top_terms: Option<u32>,
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self {
            length: WindowLength::Fixed(14),
            stride: 1,
            keep_top_terms: None,
        }
    }
}

/// PF admission threshold: the round-one optimal threshold, or a fixed
/// value written as `fixed:<number>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PfThresholdSetting {
    Theta1,
    Fixed(f64),
}

impl PfThresholdSetting {
    pub fn to_policy(self) -> PfThresholdPolicy {
        match self {
            PfThresholdSetting::Theta1 => PfThresholdPolicy::Theta1,
            PfThresholdSetting::Fixed(v) => PfThresholdPolicy::Fixed(v),
        }
    }
}

impl std::fmt::Display for PfThresholdSetting {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PfThresholdSetting::Theta1 => f.write_str("theta1"),
            PfThresholdSetting::Fixed(v) => write!(f, "fixed:{v}"),
        }
    }
}

impl std::str::FromStr for PfThresholdSetting {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "theta1" {
            return Ok(PfThresholdSetting::Theta1);
        }
        if let Some(v) = s.strip_prefix("fixed:") {
            return v
                .parse()
                .map(PfThresholdSetting::Fixed)
                .map_err(|e| format!("bad fixed threshold {v:?}: {e}"));
        }
        Err(format!(
            "pf threshold must be \"theta1\" or \"fixed:<value>\", got {s:?}"
        ))
    }
}

impl Serialize for PfThresholdSetting {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PfThresholdSetting {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PfSettings {
    pub k: usize,
    pub threshold: PfThresholdSetting,
}

impl Default for PfSettings {
    fn default() -> Self {
        Self {
            k: 100,
            threshold: PfThresholdSetting::Theta1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathsConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lexicons: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub tokenizer: TokenScheme,
    pub keyword_idf: KeywordIdf,
    pub on_error: OnError,
    pub accumulate_stream: bool,
    pub joint_round2: bool,
    pub bloom: BloomConfig,
    pub window: WindowConfig,
    pub pf: PfSettings,
    pub svm: SvmConfig,
    pub paths: PathsConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            tokenizer: TokenScheme::PreSegmented,
            keyword_idf: KeywordIdf::News,
            on_error: OnError::Skip,
            accumulate_stream: false,
            joint_round2: false,
            bloom: BloomConfig::default(),
            window: WindowConfig::default(),
            pf: PfSettings::default(),
            svm: SvmConfig::default(),
            paths: PathsConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    /// Effective config as TOML; re-parsing it yields an equal config.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |msg: String| Err(ConfigError::Invalid(msg));
        if self.bloom.m < 64 {
            return bad(format!("bloom.m must be at least 64 bits, got {}", self.bloom.m));
        }
        if self.bloom.h < 1 || self.bloom.h > 64 {
            return bad(format!("bloom.h must be in 1..=64, got {}", self.bloom.h));
        }
        if self.bloom.seeds.len() < 2 {
            return bad("bloom.seeds needs at least two entries".into());
        }
        if let WindowLength::Fixed(n) = self.window.length {
            if n < 1 {
                return bad("window.length must be positive".into());
            }
        }
        if self.window.stride < 1 {
            return bad("window.stride must be positive".into());
        }
        if self.window.keep_top_terms == Some(0) {
            return bad("window.keep_top_terms must be positive when set".into());
        }
        if !(self.svm.c > 0.0) {
            return bad(format!("svm.c must be positive, got {}", self.svm.c));
        }
        if self.svm.epochs < 1 {
            return bad("svm.epochs must be positive".into());
        }
        if let PfThresholdSetting::Fixed(v) = self.pf.threshold {
            if !v.is_finite() {
                return bad("pf.threshold fixed value must be finite".into());
            }
        }
        for (name, path) in [
            ("paths.lexicons", &self.paths.lexicons),
            ("paths.manifest", &self.paths.manifest),
        ] {
            if let Some(p) = path {
                if !p.exists() {
                    return bad(format!("{name} does not exist: {}", p.display()));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid_and_roundtrip() {
        let cfg = RunConfig::default();
        cfg.validate().unwrap();
        let text = cfg.to_toml();
        let back = RunConfig::from_toml(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn partial_toml_fills_defaults() {
        let cfg = RunConfig::from_toml("tokenizer = \"whitespace\"\n[pf]\nk = 5\nthreshold = \"fixed:0.25\"\n").unwrap();
        assert_eq!(cfg.tokenizer, TokenScheme::Whitespace);
        assert_eq!(cfg.pf.k, 5);
        assert_eq!(cfg.pf.threshold, PfThresholdSetting::Fixed(0.25));
        assert_eq!(cfg.bloom.m, 1 << 24);
    }

    #[test]
    fn window_auto_roundtrip() {
        let mut cfg = RunConfig::default();
        cfg.window.length = WindowLength::Auto;
        let back = RunConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(back.window.length, WindowLength::Auto);

        let cfg = RunConfig::from_toml("[window]\nlength = 20\nstride = 2\n").unwrap();
        assert_eq!(cfg.window.length, WindowLength::Fixed(20));
        assert_eq!(cfg.window.stride, 2);
    }

    #[test]
    fn bad_values_rejected() {
        assert!(RunConfig::from_toml("[bloom]\nm = 8\nh = 7\nseeds = [1, 2]\n").is_err());
        assert!(RunConfig::from_toml("[window]\nlength = \"sometimes\"\nstride = 1\n").is_err());
        assert!(RunConfig::from_toml("[pf]\nk = 3\nthreshold = \"loose\"\n").is_err());
        assert!(RunConfig::from_toml("[svm]\nc = -1.0\nepochs = 10\nseed = 1\n").is_err());
        assert!(RunConfig::from_toml("unknown_key = 1\n").is_err());
    }

    #[test]
    fn missing_paths_rejected() {
        let cfg = RunConfig::from_toml("[paths]\nlexicons = \"/definitely/not/here\"\n");
        assert!(matches!(cfg, Err(ConfigError::Invalid(_))));
    }

    #[test]
    fn pf_threshold_parsing() {
        assert_eq!(
            "theta1".parse::<PfThresholdSetting>().unwrap(),
            PfThresholdSetting::Theta1
        );
        assert_eq!(
            "fixed:1.5".parse::<PfThresholdSetting>().unwrap(),
            PfThresholdSetting::Fixed(1.5)
        );
        assert!("loose".parse::<PfThresholdSetting>().is_err());
        assert_eq!(PfThresholdSetting::Fixed(1.5).to_string(), "fixed:1.5");
    }
}
