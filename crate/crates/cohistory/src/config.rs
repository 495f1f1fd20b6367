//! TOML pipeline configuration.

use std::fs;
use std::path::{Path, PathBuf};

use cohistory_core::affiliation::ThresholdConfig;
use cohistory_core::consensus::{log_grid, SweepConfig};
use cohistory_core::hclust::Linkage;
use cohistory_core::nullmodel::{NullModelConfig, ResidualKind, TradeAxis};
use cohistory_core::seed::derive_seed;
use cohistory_core::timeline::LifespanPolicy;
use cohistory_core::Dimension;
use serde::{Deserialize, Serialize};

use crate::error::{PipelineError, Result};
use crate::ingest::{Compression, ExtractConfig};

/// Overrides `output_dir` from the file when set.
pub const OUTPUT_DIR_ENV: &str = "COHISTORY_OUTPUT_DIR";

pub const DEFAULT_CLUSTERS_NATIONALITY: usize = 28;
pub const DEFAULT_CLUSTERS_OCCUPATION: usize = 24;

// Separate seed streams for the two randomized stages.
const SCORE_STREAM: u64 = 1;
const SWEEP_STREAM: u64 = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InputConfig {
    pub dump: PathBuf,
    pub pagelinks: PathBuf,
    /// Picked from the file extension when absent.
    pub dump_compression: Option<Compression>,
    pub pagelinks_compression: Option<Compression>,
    pub wiki: String,
    pub human_class: String,
}

impl Default for InputConfig {
    fn default() -> Self {
        let extract = ExtractConfig::default();
        InputConfig {
            dump: PathBuf::from("entities.json"),
            pagelinks: PathBuf::from("pagelinks.nt"),
            dump_compression: None,
            pagelinks_compression: None,
            wiki: extract.wiki,
            human_class: extract.human_class,
        }
    }
}

/// Per-dimension knobs; unset fields take the dimension's default.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DimensionConfig {
    pub min_value_occurrence: Option<u32>,
    pub clusters: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisName {
    Auto,
    Persons,
    Values,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResidualName {
    Pearson,
    Zscore,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkageName {
    Average,
    Complete,
    Single,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NullModelSection {
    pub ensemble_size: u32,
    pub trades_per_sample: Option<u64>,
    pub axis: AxisName,
    pub residual: ResidualName,
}

impl Default for NullModelSection {
    fn default() -> Self {
        NullModelSection {
            ensemble_size: NullModelConfig::default().ensemble_size,
            trades_per_sample: None,
            axis: AxisName::Auto,
            residual: ResidualName::Pearson,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    /// Explicit grid; when absent a log-spaced grid is built from the
    /// count and bounds below.
    pub gammas: Option<Vec<f64>>,
    pub gamma_count: usize,
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub reps_per_gamma: u32,
    pub linkage: LinkageName,
}

impl Default for SweepSection {
    fn default() -> Self {
        let d = SweepConfig::default();
        SweepSection {
            gammas: None,
            gamma_count: d.gammas.len(),
            gamma_min: d.gammas[0],
            gamma_max: *d.gammas.last().unwrap(),
            reps_per_gamma: d.reps_per_gamma,
            linkage: LinkageName::Average,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimelineSection {
    pub imputed_lifespan: i32,
    pub dump_year: i32,
    /// Fixed robust-first-year depth; per-value default when absent.
    pub depth: Option<usize>,
}

impl Default for TimelineSection {
    fn default() -> Self {
        let p = LifespanPolicy::default();
        TimelineSection { imputed_lifespan: p.imputed_lifespan, dump_year: p.dump_year, depth: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BiographSection {
    pub max_birth_gap: i32,
}

impl Default for BiographSection {
    fn default() -> Self {
        BiographSection { max_birth_gap: cohistory_core::biograph::MAX_BIRTH_GAP }
    }
}

/// A subnetwork selection: clusters given by number, by member value, or both.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubnetSection {
    pub name: String,
    pub dimension: String,
    #[serde(default)]
    pub clusters: Vec<u32>,
    #[serde(default)]
    pub clusters_of: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub master_seed: u64,
    pub output_dir: PathBuf,
    pub input: InputConfig,
    pub nationality: DimensionConfig,
    pub occupation: DimensionConfig,
    pub null_model: NullModelSection,
    pub sweep: SweepSection,
    pub timeline: TimelineSection,
    pub biograph: BiographSection,
    #[serde(rename = "subnet")]
    pub subnets: Vec<SubnetSection>,
    /// Directory relative paths are resolved against. Not part of the file.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            master_seed: 0,
            output_dir: PathBuf::from("artifacts"),
            input: InputConfig::default(),
            nationality: DimensionConfig::default(),
            occupation: DimensionConfig::default(),
            null_model: NullModelSection::default(),
            sweep: SweepSection::default(),
            timeline: TimelineSection::default(),
            biograph: BiographSection::default(),
            subnets: Vec::new(),
            base_dir: PathBuf::from("."),
        }
    }
}

fn bad(message: impl Into<String>) -> PipelineError {
    PipelineError::Config(message.into())
}

impl PipelineConfig {
    pub fn parse(text: &str) -> Result<PipelineConfig> {
        let config: PipelineConfig = toml::from_str(text).map_err(|e| bad(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Reads a config file; the output directory environment override wins
    /// over the file.
    pub fn load(path: &Path) -> Result<PipelineConfig> {
        let text = fs::read_to_string(path).map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
        let mut config = PipelineConfig::parse(&text).map_err(|e| match e {
            PipelineError::Config(m) => bad(format!("{}: {m}", path.display())),
            other => other,
        })?;
        config.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        if let Some(dir) = std::env::var_os(OUTPUT_DIR_ENV).filter(|d| !d.is_empty()) {
            config.output_dir = PathBuf::from(dir);
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        for dim in Dimension::ALL {
            ThresholdConfig::new(self.threshold(dim))
                .map_err(|_| bad(format!("{} threshold must be positive", dim.name())))?;
            if self.clusters(dim) == 0 {
                return Err(bad(format!("{} cluster count must be positive", dim.name())));
            }
        }
        self.null_model_config(Dimension::Nationality).validate().map_err(|e| bad(e.to_string()))?;
        self.sweep_config(Dimension::Nationality)?.validate().map_err(|e| bad(e.to_string()))?;
        if self.timeline.imputed_lifespan < 0 {
            return Err(bad("imputed_lifespan must be non-negative"));
        }
        if self.timeline.depth == Some(0) {
            return Err(bad("timeline depth must be positive"));
        }
        if self.biograph.max_birth_gap < 0 {
            return Err(bad("max_birth_gap must be non-negative"));
        }
        let mut names = std::collections::BTreeSet::new();
        for s in &self.subnets {
            let safe = !s.name.is_empty() && s.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
            if !safe {
                return Err(bad(format!("subnet name `{}` must be [A-Za-z0-9_-]+", s.name)));
            }
            if !names.insert(&s.name) {
                return Err(bad(format!("duplicate subnet name `{}`", s.name)));
            }
            if Dimension::parse(&s.dimension).is_none() {
                return Err(bad(format!("subnet `{}`: unknown dimension `{}`", s.name, s.dimension)));
            }
            if s.clusters.is_empty() && s.clusters_of.is_empty() {
                return Err(bad(format!("subnet `{}` selects no clusters", s.name)));
            }
        }
        Ok(())
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn output_root(&self) -> PathBuf {
        self.resolve(&self.output_dir)
    }

    pub fn extract_config(&self) -> ExtractConfig {
        ExtractConfig { wiki: self.input.wiki.clone(), human_class: self.input.human_class.clone() }
    }

    fn dimension(&self, dim: Dimension) -> &DimensionConfig {
        match dim {
            Dimension::Nationality => &self.nationality,
            Dimension::Occupation => &self.occupation,
        }
    }

    pub fn threshold(&self, dim: Dimension) -> u32 {
        self.dimension(dim)
            .min_value_occurrence
            .unwrap_or_else(|| ThresholdConfig::default_for(dim).min_value_occurrence)
    }

    pub fn clusters(&self, dim: Dimension) -> usize {
        self.dimension(dim).clusters.unwrap_or(match dim {
            Dimension::Nationality => DEFAULT_CLUSTERS_NATIONALITY,
            Dimension::Occupation => DEFAULT_CLUSTERS_OCCUPATION,
        })
    }

    fn dim_code(dim: Dimension) -> u64 {
        match dim {
            Dimension::Nationality => 0,
            Dimension::Occupation => 1,
        }
    }

    pub fn null_model_config(&self, dim: Dimension) -> NullModelConfig {
        let s = &self.null_model;
        NullModelConfig {
            ensemble_size: s.ensemble_size,
            trades_per_sample: s.trades_per_sample,
            master_seed: derive_seed(self.master_seed, &[SCORE_STREAM, Self::dim_code(dim)]),
            axis: match s.axis {
                AxisName::Auto => TradeAxis::Auto,
                AxisName::Persons => TradeAxis::Persons,
                AxisName::Values => TradeAxis::Values,
            },
            residual: match s.residual {
                ResidualName::Pearson => ResidualKind::Pearson,
                ResidualName::Zscore => ResidualKind::ZScore,
            },
        }
    }

    pub fn sweep_config(&self, dim: Dimension) -> Result<SweepConfig> {
        let s = &self.sweep;
        let gammas = match &s.gammas {
            Some(g) => g.clone(),
            None => {
                let valid =
                    s.gamma_count > 0 && s.gamma_min > 0.0 && s.gamma_min <= s.gamma_max && s.gamma_max.is_finite();
                if !valid {
                    return Err(bad("gamma grid needs 0 < gamma_min <= gamma_max and gamma_count > 0"));
                }
                log_grid(s.gamma_count, s.gamma_min, s.gamma_max)
            }
        };
        Ok(SweepConfig {
            gammas,
            reps_per_gamma: s.reps_per_gamma,
            master_seed: derive_seed(self.master_seed, &[SWEEP_STREAM, Self::dim_code(dim)]),
        })
    }

    pub fn linkage(&self) -> Linkage {
        match self.sweep.linkage {
            LinkageName::Average => Linkage::Average,
            LinkageName::Complete => Linkage::Complete,
            LinkageName::Single => Linkage::Single,
        }
    }

    pub fn lifespan_policy(&self) -> LifespanPolicy {
        LifespanPolicy { imputed_lifespan: self.timeline.imputed_lifespan, dump_year: self.timeline.dump_year }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_published_defaults() {
        let c = PipelineConfig::parse("").unwrap();
        assert_eq!(c.threshold(Dimension::Nationality), 10);
        assert_eq!(c.threshold(Dimension::Occupation), 100);
        assert_eq!(c.clusters(Dimension::Nationality), 28);
        assert_eq!(c.clusters(Dimension::Occupation), 24);
        assert_eq!(c.null_model.ensemble_size, 10_000);
        assert_eq!(c.biograph.max_birth_gap, 75);
        let sweep = c.sweep_config(Dimension::Nationality).unwrap();
        assert_eq!(sweep.gammas.len(), 16);
        assert_eq!(sweep.reps_per_gamma, 25);
        assert_eq!(c.lifespan_policy(), LifespanPolicy::default());
    }

    #[test]
    fn dimensions_get_distinct_seed_streams() {
        let c = PipelineConfig::parse("master_seed = 7").unwrap();
        let a = c.null_model_config(Dimension::Nationality).master_seed;
        let b = c.null_model_config(Dimension::Occupation).master_seed;
        let s = c.sweep_config(Dimension::Nationality).unwrap().master_seed;
        assert!(a != b && a != s);
    }

    #[test]
    fn invalid_settings_are_rejected() {
        for text in [
            "[nationality]\nmin_value_occurrence = 0",
            "[occupation]\nclusters = 0",
            "[null_model]\nensemble_size = 1",
            "[sweep]\ngammas = [1.0, 0.5]",
            "[sweep]\ngamma_min = 0.0",
            "unknown_key = 1",
            "[[subnet]]\nname = \"a b\"\ndimension = \"occupation\"\nclusters = [1]",
            "[[subnet]]\nname = \"a\"\ndimension = \"color\"\nclusters = [1]",
            "[[subnet]]\nname = \"a\"\ndimension = \"occupation\"",
        ] {
            assert!(matches!(PipelineConfig::parse(text), Err(PipelineError::Config(_))), "{text}");
        }
    }

    #[test]
    fn paths_resolve_against_the_config_directory() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        fs::write(&path, "output_dir = \"out\"\n[input]\ndump = \"d.json.gz\"\n").unwrap();
        let c = PipelineConfig::load(&path).unwrap();
        assert_eq!(c.resolve(&c.input.dump), dir.path().join("d.json.gz"));
        assert_eq!(c.input.dump_compression, None);
    }
}
