//! Synthesis settings accepted from flags and request bodies.

use plotsynth::synth::{Ablation, ConfigError, SynthConfig};
use serde::Deserialize;

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    /// Number of specifications to search.
    pub k: Option<usize>,
    pub max_results: Option<usize>,
    pub max_depth: Option<usize>,
    pub max_expansions: Option<u64>,
    pub filter_constants: Option<usize>,
    pub bins: Option<Vec<usize>>,
    pub mutate_ops: Option<Vec<String>>,
    #[serde(default)]
    pub ablation: Vec<String>,
}

impl Overrides {
    pub fn apply(&self, mut cfg: SynthConfig) -> Result<SynthConfig, ConfigError> {
        if let Some(k) = self.k {
            cfg.max_specs = k;
        }
        if let Some(n) = self.max_results {
            cfg.max_results = n;
        }
        if let Some(d) = self.max_depth {
            cfg.max_depth = d;
        }
        if let Some(n) = self.max_expansions {
            cfg.max_expansions = n;
        }
        if let Some(n) = self.filter_constants {
            cfg.filter_constants = n;
        }
        if let Some(bins) = &self.bins {
            cfg.bins = bins.clone();
        }
        if let Some(ops) = &self.mutate_ops {
            cfg = cfg.with_mutate_ops(ops)?;
        }
        for a in &self.ablation {
            cfg = cfg.with_ablation(Ablation::parse(a)?);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}
