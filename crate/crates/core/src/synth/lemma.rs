//! Synthesis lemmas and their store.

use crate::qualifier::Qualifier;
use crate::types::{is_compatible, is_subtype, RefinementType, TypeEnv};

/// Any goal below `guard` that some program of at most `depth` operators realizes is compatible
/// with `requirement`.
#[derive(Clone, Debug, PartialEq)]
pub struct Lemma {
    pub guard: RefinementType,
    pub requirement: RefinementType,
    pub depth: usize,
    /// Whether binning was available when the requirement was computed.
    pub bins: bool,
}

impl Lemma {
    fn applies(&self, budget: usize, bins: bool) -> bool {
        self.depth >= budget && (self.bins || !bins)
    }

    /// True when `goal` falls under the guard and cannot meet the requirement.
    pub fn rejects(&self, goal: &RefinementType, budget: usize, bins: bool) -> bool {
        let env = TypeEnv::new();
        self.applies(budget, bins)
            && is_subtype(&env, goal, &self.guard)
            && !is_compatible(&env, goal, &self.requirement)
    }
}

#[derive(Clone, Debug, Default)]
pub struct LemmaStore {
    lemmas: Vec<Lemma>,
}

impl LemmaStore {
    pub fn new() -> LemmaStore {
        LemmaStore::default()
    }

    pub fn len(&self) -> usize {
        self.lemmas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lemmas.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Lemma> {
        self.lemmas.iter()
    }

    /// Adds a lemma unless it is trivial or already present. Returns whether it was added.
    pub fn insert(&mut self, lemma: Lemma) -> bool {
        if lemma.requirement.qual() == &Qualifier::True || self.lemmas.contains(&lemma) {
            return false;
        }
        self.lemmas.push(lemma);
        true
    }

    pub fn violated(&self, goal: &RefinementType, budget: usize, bins: bool) -> bool {
        self.violated_since(0, goal, budget, bins)
    }

    /// Like [`LemmaStore::violated`], consulting only lemmas from position `start` on.
    pub fn violated_since(
        &self,
        start: usize,
        goal: &RefinementType,
        budget: usize,
        bins: bool,
    ) -> bool {
        self.lemmas
            .get(start..)
            .unwrap_or_default()
            .iter()
            .any(|l| l.rejects(goal, budget, bins))
    }
}
