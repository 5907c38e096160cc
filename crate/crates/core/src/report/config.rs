//! TOML analysis configuration.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, Error, Result};
use crate::phase_space::{subdivide, MAX_BOXES_LOG2};
use crate::shadowing_lab::default_cc_horizon;
use crate::systems::{parse_system, SystemConfig, SystemDef};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Analysis {
    Components,
    Basins,
    CoverageStudy,
    Shadowing,
    CcReport,
    FiniteOracle,
}

impl Analysis {
    pub fn name(self) -> &'static str {
        match self {
            Analysis::Components => "components",
            Analysis::Basins => "basins",
            Analysis::CoverageStudy => "coverage_study",
            Analysis::Shadowing => "shadowing",
            Analysis::CcReport => "cc_report",
            Analysis::FiniteOracle => "finite_oracle",
        }
    }

    /// Needs a single grid depth.
    fn needs_depth(self) -> bool {
        matches!(
            self,
            Analysis::Components | Analysis::Basins | Analysis::CcReport
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CoverageSection {
    pub j: u32,
    pub m: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    pub samples: usize,
    pub m_scan: Vec<usize>,
}

impl Default for CoverageSection {
    fn default() -> Self {
        CoverageSection {
            j: 4,
            m: 100,
            horizon: None,
            samples: 100,
            m_scan: vec![0, 100, 1000],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ShadowingSection {
    pub epsilon: f64,
    /// δ of the sampled pseudo-orbits.
    pub delta: f64,
    pub length: usize,
    pub trials: usize,
    pub search_depth: u32,
    /// Also bisect for the largest accepted δ.
    pub modulus: bool,
}

impl Default for ShadowingSection {
    fn default() -> Self {
        ShadowingSection {
            epsilon: 0.1,
            delta: 0.01,
            length: 10,
            trials: 20,
            search_depth: 14,
            modulus: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CcSection {
    pub ladder: Vec<(u32, u32)>,
    /// Defaults to 50 times the largest `j`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
}

impl Default for CcSection {
    fn default() -> Self {
        CcSection {
            ladder: vec![(8, 4), (16, 4), (16, 8), (32, 8)],
            horizon: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FiniteOracleSection {
    /// Functional systems of every size `1..=n`.
    pub n: usize,
    pub random: usize,
    pub random_max_n: usize,
}

impl Default for FiniteOracleSection {
    fn default() -> Self {
        FiniteOracleSection {
            n: 5,
            random: 10_000,
            random_max_n: 8,
        }
    }
}

fn default_output_dir() -> String {
    "out".into()
}

/// A validated configuration. After [`parse_config`] every default that
/// depends on other fields (`delta`, `depths`) is filled in.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    pub system: SystemConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depths: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default)]
    pub rigor_margin: f64,
    pub analyses: Vec<Analysis>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
    #[serde(default)]
    pub coverage: CoverageSection,
    #[serde(default)]
    pub shadowing: ShadowingSection,
    #[serde(default)]
    pub cc: CcSection,
    #[serde(default)]
    pub finite_oracle: FiniteOracleSection,
}

impl AnalysisConfig {
    pub fn wants(&self, a: Analysis) -> bool {
        self.analyses.contains(&a)
    }

    pub fn system_def(&self) -> Result<SystemDef> {
        parse_system(&self.system)
    }

    /// The TOML form; parsing it gives back an equal config.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Validation(format!("cannot encode config: {e}")))
    }

    pub fn cc_horizon(&self) -> usize {
        self.cc
            .horizon
            .unwrap_or_else(|| default_cc_horizon(&self.cc.ladder))
    }
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

/// Pulls the offending key out of a serde message such as
/// "unknown field `deltaa`, expected one of ...".
fn field_of(message: &str) -> Option<String> {
    let start = message.find('`')? + 1;
    let len = message[start..].find('`')?;
    Some(message[start..start + len].to_string())
}

fn semantic(field: &str, reason: impl Into<String>) -> Error {
    Error::Config(ConfigError::semantic(field, reason))
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<AnalysisConfig> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| {
        let (line, column) = e.span().map_or((1, 1), |s| line_column(text, s.start));
        Error::Config(ConfigError::Syntax {
            line,
            column,
            message: e.message().to_string(),
        })
    })?;
    let cfg: AnalysisConfig = table.try_into().map_err(|e: toml::de::Error| {
        let message = e.message().to_string();
        let field = field_of(&message).unwrap_or_else(|| "<document>".into());
        semantic(&field, message)
    })?;
    validate(cfg)
}

/// Checks cross-field rules and fills dependent defaults.
pub fn validate(mut cfg: AnalysisConfig) -> Result<AnalysisConfig> {
    if cfg.analyses.is_empty() {
        return Err(semantic(
            "analyses",
            "at least one analysis must be requested",
        ));
    }
    let distinct: BTreeSet<Analysis> = cfg.analyses.iter().copied().collect();
    if distinct.len() != cfg.analyses.len() {
        return Err(semantic("analyses", "analyses must not repeat"));
    }
    let sys = parse_system(&cfg.system).map_err(|e| semantic("system", e.to_string()))?;
    let dim = sys.domain().dim() as u32;

    if let Some(depths) = &cfg.depths {
        if depths.is_empty() {
            return Err(semantic("depths", "depths must not be empty"));
        }
        if depths.windows(2).any(|w| w[0] >= w[1]) {
            return Err(semantic("depths", "depths must be increasing"));
        }
    }
    if cfg.depth.is_none() {
        cfg.depth = cfg.depths.as_ref().and_then(|d| d.last().copied());
    }
    if cfg.wants(Analysis::CoverageStudy) && cfg.depths.is_none() {
        cfg.depths = cfg.depth.map(|d| vec![d]);
    }
    if cfg.analyses.iter().any(|a| a.needs_depth()) && cfg.depth.is_none() {
        return Err(semantic(
            "depth",
            "a grid depth is required for the requested analyses",
        ));
    }
    if cfg.wants(Analysis::CoverageStudy) && cfg.depths.is_none() {
        return Err(semantic("depths", "coverage_study needs depths"));
    }
    let all_depths = cfg.depth.iter().chain(cfg.depths.iter().flatten());
    for &d in all_depths {
        if d * dim > MAX_BOXES_LOG2 {
            return Err(semantic(
                "depth",
                format!(
                    "depth {d} gives 2^{} boxes, more than 2^{MAX_BOXES_LOG2}",
                    d * dim
                ),
            ));
        }
    }

    if !(cfg.rigor_margin.is_finite() && cfg.rigor_margin >= 0.0) {
        return Err(semantic("rigor_margin", "must be finite and nonnegative"));
    }
    match (cfg.delta, cfg.depth) {
        (Some(d), _) if !(d.is_finite() && d >= 0.0) => {
            return Err(semantic("delta", "must be finite and nonnegative"));
        }
        (None, Some(depth)) => cfg.delta = Some(subdivide(*sys.domain(), depth)?.max_width()),
        _ => {}
    }

    let cov = &cfg.coverage;
    if cov.j == 0 {
        return Err(semantic("coverage.j", "must be at least 1"));
    }
    if cov.samples == 0 {
        return Err(semantic("coverage.samples", "must be at least 1"));
    }
    let sh = &cfg.shadowing;
    if !(sh.epsilon.is_finite() && sh.epsilon > 0.0) {
        return Err(semantic("shadowing.epsilon", "must be positive"));
    }
    if !(sh.delta.is_finite() && sh.delta >= 0.0) {
        return Err(semantic(
            "shadowing.delta",
            "must be finite and nonnegative",
        ));
    }
    if sh.length < 2 {
        return Err(semantic("shadowing.length", "must be at least 2"));
    }
    if sh.trials == 0 {
        return Err(semantic("shadowing.trials", "must be at least 1"));
    }
    if sh.search_depth * dim > MAX_BOXES_LOG2 {
        return Err(semantic("shadowing.search_depth", "grid too large"));
    }
    if cfg.cc.ladder.is_empty() {
        return Err(semantic("cc.ladder", "must not be empty"));
    }
    if cfg.cc.ladder.iter().any(|&(j, l)| j == 0 || l == 0) {
        return Err(semantic("cc.ladder", "entries need j, l >= 1"));
    }
    let fo = &cfg.finite_oracle;
    if !(1..=crate::finite_oracle::MAX_FUNCTIONAL_N).contains(&fo.n) {
        return Err(semantic("finite_oracle.n", "must lie in 1..=7"));
    }
    if !(1..=crate::finite_oracle::MAX_STATES).contains(&fo.random_max_n) {
        return Err(semantic("finite_oracle.random_max_n", "must lie in 1..=64"));
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
depth = 5
analyses = ["components"]

[system]
type = "builtin"
name = "doubling"
"#;

    #[test]
    fn minimal_fills_defaults() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.delta, Some(1.0 / 32.0));
        assert_eq!(cfg.seed, 0);
        assert_eq!(cfg.rigor_margin, 0.0);
        assert_eq!(cfg.output_dir, "out");
        assert_eq!(cfg.cc, CcSection::default());
    }

    #[test]
    fn unknown_key_is_named() {
        let text = MINIMAL.replace("depth = 5", "depth = 5\ndeltaa = 0.1");
        match parse_config(&text) {
            Err(Error::Config(ConfigError::Semantic { field, .. })) => assert_eq!(field, "deltaa"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_section_key_is_named() {
        let text = format!("{MINIMAL}\n[cc]\nhorizon = 3\nladdr = []\n");
        match parse_config(&text) {
            Err(Error::Config(ConfigError::Semantic { field, .. })) => assert_eq!(field, "laddr"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn decreasing_depths() {
        let text = MINIMAL.replace("depth = 5", "depths = [6, 5]");
        let text = text.replace("[\"components\"]", "[\"coverage_study\"]");
        match parse_config(&text) {
            Err(Error::Config(ConfigError::Semantic { field, reason })) => {
                assert_eq!(field, "depths");
                assert_eq!(reason, "depths must be increasing");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn syntax_error_position() {
        let text = "depth = 5\nanalyses = [\"components\"\n";
        match parse_config(text) {
            Err(Error::Config(ConfigError::Syntax { line, .. })) => assert!(line >= 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn semantic_errors() {
        let bad = [
            MINIMAL.replace("[\"components\"]", "[]"),
            MINIMAL.replace("depth = 5", "depth = 5\ndelta = -1.0"),
            MINIMAL.replace("depth = 5", "depth = 30"),
            MINIMAL.replace("depth = 5\n", ""),
            MINIMAL.replace("doubling", "henon"),
            MINIMAL.replace("[\"components\"]", "[\"components\", \"components\"]"),
            MINIMAL.replace("[\"components\"]", "[\"spectra\"]"),
        ];
        for text in bad {
            assert!(
                matches!(
                    parse_config(&text),
                    Err(Error::Config(ConfigError::Semantic { .. }))
                ),
                "{text}"
            );
        }
    }

    #[test]
    fn finite_oracle_needs_no_depth() {
        let text =
            "analyses = [\"finite_oracle\"]\n[system]\ntype = \"builtin\"\nname = \"doubling\"\n";
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.depth, None);
        assert_eq!(cfg.delta, None);
    }

    #[test]
    fn toml_round_trip() {
        let mut cfg = parse_config(MINIMAL).unwrap();
        cfg.cc.horizon = Some(77);
        cfg.depths = Some(vec![3, 4, 5]);
        let again = parse_config(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn line_column_counts_from_one() {
        assert_eq!(line_column("ab\ncd", 4), (2, 2));
        assert_eq!(line_column("ab", 0), (1, 1));
    }
}
