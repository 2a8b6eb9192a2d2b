use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eval::MutateRegistry;

/// Which qualifier components take part in search-time reasoning. The final acceptance
/// check always uses full types, so modes only change how much is pruned.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QualifierMode {
    #[default]
    Full,
    /// Base types only; every qualifier is `true`.
    BaseOnly,
    /// Syntactic constraints only; cardinality and extremum predicates are dropped.
    SynOnly,
    /// Table qualifiers only; plot goals and the plot cardinality premise are dropped.
    TableOnly,
}

/// Named ablation settings accepted by the command line and the service.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ablation {
    BaseOnly,
    SynOnly,
    TableOnly,
    NoLemma,
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("unknown ablation `{0}`")]
    UnknownAblation(String),
    #[error("{0} must be at least {1}")]
    TooSmall(&'static str, usize),
    #[error("bin counts must be at least 2")]
    Bins,
    #[error("unknown mutate operator `{0}`")]
    UnknownMutateOp(String),
}

impl Ablation {
    pub fn parse(s: &str) -> Result<Ablation, ConfigError> {
        match s {
            "base-only" => Ok(Ablation::BaseOnly),
            "syn-only" => Ok(Ablation::SynOnly),
            "table-only" => Ok(Ablation::TableOnly),
            "no-lemma" => Ok(Ablation::NoLemma),
            other => Err(ConfigError::UnknownAblation(other.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthConfig {
    /// Maximum number of table operators.
    pub max_depth: usize,
    pub max_results: usize,
    /// Filter constants per column, most frequent first.
    pub filter_constants: usize,
    pub bins: Vec<usize>,
    pub interpolant_bound: usize,
    pub max_specs: usize,
    /// Largest column set a Select may keep.
    pub select_max: usize,
    /// Largest key set a Summarize may group by.
    pub max_keys: usize,
    pub qualifier_mode: QualifierMode,
    pub lemmas: bool,
    pub mutate: MutateRegistry,
    /// Worklist insertions allowed per specification before its search gives up.
    pub max_expansions: u64,
    /// Plot candidates kept per specification.
    pub max_candidates: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            max_depth: 4,
            max_results: 10,
            filter_constants: 8,
            bins: vec![5, 10],
            interpolant_bound: 3,
            max_specs: 16,
            select_max: 4,
            max_keys: 3,
            qualifier_mode: QualifierMode::Full,
            lemmas: true,
            mutate: MutateRegistry::default(),
            max_expansions: 200_000,
            max_candidates: 256,
        }
    }
}

impl SynthConfig {
    pub fn with_ablation(mut self, a: Ablation) -> SynthConfig {
        match a {
            Ablation::BaseOnly => self.qualifier_mode = QualifierMode::BaseOnly,
            Ablation::SynOnly => self.qualifier_mode = QualifierMode::SynOnly,
            Ablation::TableOnly => self.qualifier_mode = QualifierMode::TableOnly,
            Ablation::NoLemma => self.lemmas = false,
        }
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.max_depth < 1 {
            return Err(ConfigError::TooSmall("max_depth", 1));
        }
        if self.max_results < 1 {
            return Err(ConfigError::TooSmall("max_results", 1));
        }
        if self.max_specs < 1 {
            return Err(ConfigError::TooSmall("max_specs", 1));
        }
        if self.max_candidates < 1 {
            return Err(ConfigError::TooSmall("max_candidates", 1));
        }
        if self.bins.iter().any(|&n| n < 2) {
            return Err(ConfigError::Bins);
        }
        Ok(())
    }

    /// Restricts the mutate registry to the named operators.
    pub fn with_mutate_ops(mut self, names: &[String]) -> Result<SynthConfig, ConfigError> {
        if let Some(bad) = names.iter().find(|n| self.mutate.get(n).is_none()) {
            return Err(ConfigError::UnknownMutateOp(bad.clone()));
        }
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        self.mutate = self.mutate.restricted(&refs);
        Ok(self)
    }
}
