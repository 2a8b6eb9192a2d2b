//! Goal-directed enumeration of visualization programs.

pub mod config;
pub mod genreq;
pub mod grammar;
pub mod interp;
pub mod lemma;
mod search;

use serde::{Deserialize, Serialize};

use crate::program::{PlotKind, VisProgram};
use crate::types::{BaseType, RefinementType};

pub use config::{Ablation, ConfigError, QualifierMode, SynthConfig};
pub use grammar::Grammar;
pub use lemma::{Lemma, LemmaStore};
pub use search::{is_inhabitant, plot_candidates, plot_columns, synthesize_session, universe};

/// One ranked specification: a plot goal and a table goal.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoredSpec {
    pub plot: RefinementType,
    pub table: RefinementType,
    pub score: f64,
}

impl ScoredSpec {
    pub fn kind(&self) -> Option<PlotKind> {
        match self.plot.base() {
            Some(BaseType::Plot(k)) => Some(*k),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    /// Partial programs inserted into a worklist, including initial holes.
    pub expansions: u64,
    pub prunes_by_type: u64,
    pub prunes_by_lemma: u64,
    pub lemmas_learned: u64,
    pub solver_calls: u64,
}

impl std::ops::AddAssign for Counters {
    fn add_assign(&mut self, o: Counters) {
        self.expansions += o.expansions;
        self.prunes_by_type += o.prunes_by_type;
        self.prunes_by_lemma += o.prunes_by_lemma;
        self.lemmas_learned += o.lemmas_learned;
        self.solver_calls += o.solver_calls;
    }
}

/// A synthesized program with its ranking keys.
#[derive(Clone, Debug, PartialEq)]
pub struct Found {
    pub program: VisProgram,
    /// Zero-based position of the specification it satisfies.
    pub spec_rank: usize,
    pub score: f64,
    pub ast_size: usize,
    pub candidate: usize,
    pub order: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SessionOutput {
    pub results: Vec<Found>,
    pub counters: Counters,
}
