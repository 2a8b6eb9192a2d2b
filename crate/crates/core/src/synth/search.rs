use std::collections::{HashMap, HashSet};
use std::rc::Rc;

use crate::ctype::ColumnType;
use crate::eval::{apply_op, eval_transform_with, MutateRegistry};
use crate::models::{models, plot_inhabits};
use crate::program::{PlotKind, PlotProgram, TableOp, TableProgram, VisProgram};
use crate::qualifier::Qualifier;
use crate::solver::solver_calls;
use crate::synth::config::{QualifierMode, SynthConfig};
use crate::synth::genreq::GenReq;
use crate::synth::grammar::Grammar;
use crate::synth::interp::type_interpolant;
use crate::synth::lemma::{Lemma, LemmaStore};
use crate::synth::{Counters, Found, ScoredSpec, SessionOutput};
use crate::table::Table;
use crate::types::{intersect, is_compatible, RefinementType, Schema, TypeEnv};
use crate::typing::{
    backward_goal, card_premise, input_type, op_conclusion, type_of_op, type_of_plot, type_of_table,
};

/// Every plot of `kind` over `columns`: `x` and `y` bound, `color` and `subplot` optional,
/// no column on two channels.
pub fn plot_candidates(kind: PlotKind, columns: &[String]) -> Vec<PlotProgram> {
    let optional: Vec<Option<&String>> = std::iter::once(None)
        .chain(columns.iter().map(Some))
        .collect();
    let mut out = Vec::new();
    for x in columns {
        for y in columns.iter().filter(|y| *y != x) {
            for color in &optional {
                if color.is_some_and(|c| c == x || c == y) {
                    continue;
                }
                for subplot in &optional {
                    if subplot.is_some_and(|s| s == x || s == y || Some(s) == *color) {
                        continue;
                    }
                    out.push(PlotProgram {
                        kind,
                        x: x.clone(),
                        y: y.clone(),
                        color: color.cloned(),
                        subplot: subplot.cloned(),
                    });
                }
            }
        }
    }
    out
}

/// Columns the programs for `spec` may mention: the data columns, mutate outputs and columns
/// named by the goals.
pub fn universe(data: &Table, spec: &ScoredSpec, cfg: &SynthConfig) -> Grammar {
    let mut mentioned: Vec<String> = spec
        .table
        .schema()
        .map(|s| s.keys().cloned().collect())
        .unwrap_or_default();
    mentioned.extend(spec.table.qual().mentioned_columns());
    mentioned.extend(spec.plot.qual().mentioned_columns());
    Grammar::new(data, cfg, mentioned)
}

/// Columns plot channels may bind: those of the table goal, or every column of the universe
/// when the goal names fewer than two.
pub fn plot_columns(spec: &ScoredSpec, grammar: &Grammar) -> Vec<String> {
    let goal: Vec<String> = spec
        .table
        .schema()
        .map(|s| s.keys().cloned().collect())
        .unwrap_or_default();
    if goal.len() >= 2 {
        goal
    } else {
        grammar.columns.clone()
    }
}

/// Whether `program` is well typed over `data` and its output meets both goals of `spec`.
pub fn is_inhabitant(
    data: &Table,
    program: &VisProgram,
    spec: &ScoredSpec,
    registry: &MutateRegistry,
) -> bool {
    let Ok(ty) = type_of_table(&program.table, &input_type(data), registry) else {
        return false;
    };
    if type_of_plot(&program.plot, &ty).is_err() || !plot_inhabits(&program.plot, &spec.plot) {
        return false;
    }
    eval_transform_with(&program.table, data, registry).is_ok_and(|out| models(&out, &spec.table))
}

fn ablate(mode: QualifierMode, q: &Qualifier) -> Qualifier {
    match mode {
        QualifierMode::Full | QualifierMode::TableOnly => q.clone(),
        QualifierMode::BaseOnly => Qualifier::True,
        QualifierMode::SynOnly => q.weaken(&|a| matches!(a, Qualifier::Syn(_))),
    }
}

fn ablate_type(mode: QualifierMode, t: &RefinementType) -> RefinementType {
    match mode {
        QualifierMode::Full | QualifierMode::TableOnly => t.clone(),
        _ => t.with_qual(ablate(mode, t.qual())),
    }
}

/// What the plot needs from its table: the bound columns, a quantitative `y` where the kind
/// requires one, and the cardinality premise.
fn plot_requirement(plot: &PlotProgram, mode: QualifierMode) -> RefinementType {
    let mut s = Schema::new();
    for c in plot.columns() {
        s.insert(c.to_string(), ColumnType::Top);
    }
    if plot.kind != PlotKind::Scatter {
        s.insert(plot.y.clone(), ColumnType::Quantitative);
    }
    let q = match (mode, card_premise(plot)) {
        (QualifierMode::Full, Some(p)) => p,
        _ => Qualifier::True,
    };
    RefinementType::table(s, q)
}

/// Compatibility of a goal with the type of an actual table. A goal without qualifier only
/// constrains the base type.
fn compatible(env: &TypeEnv, goal: &RefinementType, actual: &RefinementType) -> bool {
    match (goal.base(), actual.base()) {
        (Some(g), Some(a)) if goal.qual().is_true() => g.is_compatible(a),
        _ => is_compatible(env, goal, actual),
    }
}

/// A program with a hole at the bottom. `goals[i]` is the goal of the table produced below
/// `ops[i]`, the last entry being the hole's.
#[derive(Clone, Debug)]
struct Partial {
    ops: Vec<TableOp>,
    goals: Vec<Ty>,
}

/// Interned type; caches key on its address.
type Ty = Rc<RefinementType>;

fn addr(t: &Ty) -> usize {
    Rc::as_ptr(t) as usize
}

impl Partial {
    fn hole(&self) -> &Ty {
        self.goals.last().expect("hole goal")
    }

    fn inner_first(&self) -> Vec<TableOp> {
        self.ops.iter().rev().cloned().collect()
    }
}

struct Candidate {
    index: usize,
    plot: PlotProgram,
    worklist: Vec<Partial>,
}

struct Search<'a> {
    data: &'a Table,
    cfg: &'a SynthConfig,
    lemmas: &'a mut LemmaStore,
    genreq: GenReq,
    data_schema: Schema,
    interned: HashMap<RefinementType, Ty>,
    input_full: Ty,
    input_search: Ty,
    full: HashMap<Vec<TableOp>, Option<Ty>>,
    search: HashMap<Vec<TableOp>, Option<Ty>>,
    outputs: HashMap<Vec<TableOp>, Option<Rc<Table>>>,
    steps: HashMap<(TableOp, usize), Option<Ty>>,
    /// Rejection verdicts with the number of lemmas consulted.
    rejected: HashMap<(usize, usize), (usize, bool)>,
    compat: HashMap<(usize, usize), bool>,
    learned: HashSet<(usize, usize, usize)>,
    counters: Counters,
    /// Expansions before the current specification started.
    spec_start: u64,
    found: Vec<Found>,
}

impl Search<'_> {
    fn bins(&self) -> bool {
        !self.cfg.bins.is_empty()
    }

    fn out_of_budget(&self) -> bool {
        self.counters.expansions - self.spec_start >= self.cfg.max_expansions
    }

    fn intern(&mut self, t: RefinementType) -> Ty {
        self.interned
            .entry(t)
            .or_insert_with_key(|k| Rc::new(k.clone()))
            .clone()
    }

    fn chain_type(&mut self, chain: &[TableOp], searching: bool) -> Option<Ty> {
        let searching = searching && self.cfg.qualifier_mode != QualifierMode::Full;
        let Some((last, rest)) = chain.split_last() else {
            return Some(if searching {
                self.input_search.clone()
            } else {
                self.input_full.clone()
            });
        };
        let cache = if searching { &self.search } else { &self.full };
        if let Some(t) = cache.get(chain) {
            return t.clone();
        }
        let t = self.chain_type(rest, searching).and_then(|prev| {
            let t = type_of_op(last, &prev, &self.cfg.mutate).ok()?;
            Some(self.intern(if searching {
                ablate_type(self.cfg.qualifier_mode, &t)
            } else {
                t
            }))
        });
        let cache = if searching {
            &mut self.search
        } else {
            &mut self.full
        };
        cache.insert(chain.to_vec(), t.clone());
        t
    }

    fn output(&mut self, chain: &[TableOp]) -> Option<Rc<Table>> {
        let Some((last, rest)) = chain.split_last() else {
            return Some(Rc::new(self.data.clone()));
        };
        if let Some(t) = self.outputs.get(chain) {
            return t.clone();
        }
        let t = self
            .output(rest)
            .and_then(|prev| apply_op(last, &prev, &self.cfg.mutate).ok())
            .map(Rc::new);
        self.outputs.insert(chain.to_vec(), t.clone());
        t
    }

    fn step(&mut self, op: &TableOp, goal: &Ty) -> Option<Ty> {
        let key = (op.clone(), addr(goal));
        if let Some(r) = self.steps.get(&key) {
            return r.clone();
        }
        let schema = goal.schema().cloned().unwrap_or_default();
        let r = if is_compatible(&TypeEnv::new(), &op_conclusion(op, &schema), goal) {
            backward_goal(op, goal).map(|t| self.intern(t))
        } else {
            None
        };
        self.steps.insert(key, r.clone());
        r
    }

    fn rejected(&mut self, goal: &Ty, budget: usize) -> bool {
        if !self.cfg.lemmas {
            return false;
        }
        let key = (addr(goal), budget);
        let (seen, verdict) = self.rejected.get(&key).copied().unwrap_or((0, false));
        if verdict || seen == self.lemmas.len() {
            return verdict;
        }
        let verdict = self.lemmas.violated_since(seen, goal, budget, self.bins());
        self.rejected.insert(key, (self.lemmas.len(), verdict));
        verdict
    }

    fn node_compatible(&mut self, goal: &Ty, actual: &Ty) -> bool {
        let key = (addr(goal), addr(actual));
        if let Some(&ok) = self.compat.get(&key) {
            return ok;
        }
        let ok = compatible(&TypeEnv::new(), goal, actual);
        self.compat.insert(key, ok);
        ok
    }

    fn learn(&mut self, goal: &Ty, actual: &Ty, depth: usize) {
        if !self.learned.insert((addr(goal), addr(actual), depth)) {
            return;
        }
        let Some(guard) = type_interpolant(goal, actual, self.cfg.interpolant_bound) else {
            return;
        };
        let guards: Vec<RefinementType> = match guard.schema() {
            Some(s) if guard.qual().is_true() && s.len() > 1 => s
                .iter()
                .map(|(c, t)| {
                    RefinementType::table(Schema::from([(c.clone(), *t)]), Qualifier::True)
                })
                .collect(),
            _ => vec![guard],
        };
        let bins = self.bins();
        for guard in guards {
            let dst = guard.schema().cloned().unwrap_or_default();
            let requirement = self
                .genreq
                .requirement(&self.data_schema, &dst, depth, bins);
            if self.lemmas.insert(Lemma {
                guard,
                requirement,
                depth,
                bins,
            }) {
                self.counters.lemmas_learned += 1;
            }
        }
    }

    /// Closes the hole with the input table. Returns whether the completed program is accepted.
    fn close(&mut self, p: &Partial, spec: &ScoredSpec, plot: &PlotProgram) -> bool {
        let chain = p.inner_first();
        let d = chain.len();
        let mut actual = Vec::with_capacity(d + 1);
        for j in 0..=d {
            match self.chain_type(&chain[..j], true) {
                Some(t) => actual.push(t),
                None => return false,
            }
        }
        let mut conflicts = Vec::new();
        for (i, goal) in p.goals.iter().enumerate() {
            let a = &actual[d - i];
            let present = match (goal.schema(), a.schema()) {
                (Some(g), Some(s)) => g.keys().all(|c| s.contains_key(c)),
                _ => false,
            };
            if !present {
                conflicts.push((i, None));
            } else if !self.node_compatible(goal, a) {
                conflicts.push((i, Some(a.clone())));
            }
        }
        if !conflicts.is_empty() {
            self.counters.prunes_by_type += 1;
            if self.cfg.lemmas {
                for (i, a) in conflicts {
                    if let Some(a) = a {
                        self.learn(&p.goals[i], &a, self.cfg.max_depth - i);
                    }
                }
            }
            return false;
        }
        let Some(full) = self.chain_type(&chain, false) else {
            return false;
        };
        if type_of_plot(plot, &full).is_err() {
            return false;
        }
        self.output(&chain)
            .is_some_and(|out| models(&out, &spec.table))
    }

    fn expand(&mut self, p: &Partial, grammar: &Grammar, next: &mut Vec<Partial>) {
        let budget = self.cfg.max_depth - p.ops.len();
        if budget == 0 {
            return;
        }
        let hole = p.hole().clone();
        let schema = hole.schema().cloned().unwrap_or_default();
        for op in grammar.productions(&schema) {
            if self.out_of_budget() {
                return;
            }
            let Some(child) = self.step(&op, &hole) else {
                self.counters.prunes_by_type += 1;
                continue;
            };
            if self.rejected(&child, budget - 1) {
                self.counters.prunes_by_lemma += 1;
                continue;
            }
            let mut q = p.clone();
            q.ops.push(op);
            q.goals.push(child);
            self.counters.expansions += 1;
            next.push(q);
        }
    }

    fn candidates(&mut self, spec: &ScoredSpec, grammar: &Grammar) -> Vec<Candidate> {
        let Some(kind) = spec.kind() else {
            return Vec::new();
        };
        let env = TypeEnv::new();
        let mode = self.cfg.qualifier_mode;
        let table_goal = ablate_type(mode, &spec.table);
        let mut out = Vec::new();
        let plots = plot_candidates(kind, &plot_columns(spec, grammar))
            .into_iter()
            .enumerate()
            .filter(|(_, p)| plot_inhabits(p, &spec.plot))
            .take(self.cfg.max_candidates);
        for (index, plot) in plots {
            let Ok(goal) = intersect(&env, &table_goal, &plot_requirement(&plot, mode)) else {
                self.counters.prunes_by_type += 1;
                continue;
            };
            let goal = self.intern(goal);
            let mut worklist = Vec::new();
            if self.rejected(&goal, self.cfg.max_depth) {
                self.counters.prunes_by_lemma += 1;
            } else {
                self.counters.expansions += 1;
                worklist.push(Partial {
                    ops: Vec::new(),
                    goals: vec![goal],
                });
            }
            out.push(Candidate {
                index,
                plot,
                worklist,
            });
        }
        out
    }

    fn run_spec(&mut self, rank: usize, spec: &ScoredSpec, found_before: usize) {
        let grammar = universe(self.data, spec, self.cfg);
        let mut cands = self.candidates(spec, &grammar);
        for _level in 0..=self.cfg.max_depth {
            for cand in &cands {
                for p in &cand.worklist {
                    if self.close(p, spec, &cand.plot) {
                        let order = self.found.len();
                        self.found.push(Found {
                            program: VisProgram {
                                table: TableProgram::from_ops(&p.ops),
                                plot: cand.plot.clone(),
                            },
                            spec_rank: rank,
                            score: spec.score,
                            ast_size: p.ops.len() + 2,
                            candidate: cand.index,
                            order,
                        });
                    }
                }
            }
            if found_before + self.found.len() >= self.cfg.max_results || self.out_of_budget() {
                break;
            }
            for cand in cands.iter_mut() {
                let mut next = Vec::new();
                for p in std::mem::take(&mut cand.worklist) {
                    self.expand(&p, &grammar, &mut next);
                }
                cand.worklist = next;
            }
            if cands.iter().all(|c| c.worklist.is_empty()) {
                break;
            }
        }
    }
}

/// Synthesizes programs for each specification in rank order, sharing `lemmas` across them and
/// stopping after the level at which `max_results` programs have been found.
pub fn synthesize_session(
    data: &Table,
    specs: &[ScoredSpec],
    cfg: &SynthConfig,
    lemmas: &mut LemmaStore,
) -> SessionOutput {
    let calls = solver_calls();
    let input_full = input_type(data);
    let input_search = ablate_type(cfg.qualifier_mode, &input_full);
    let data_schema = input_full.schema().cloned().unwrap_or_default();
    let input_full = Rc::new(input_full);
    let input_search = Rc::new(input_search);
    let mut s = Search {
        data,
        cfg,
        lemmas,
        genreq: GenReq::new(),
        data_schema,
        input_full,
        input_search,
        interned: HashMap::new(),
        full: HashMap::new(),
        search: HashMap::new(),
        outputs: HashMap::new(),
        steps: HashMap::new(),
        rejected: HashMap::new(),
        compat: HashMap::new(),
        learned: HashSet::new(),
        counters: Counters::default(),
        spec_start: 0,
        found: Vec::new(),
    };
    let mut results = Vec::new();
    for (rank, spec) in specs.iter().enumerate() {
        s.found.clear();
        s.spec_start = s.counters.expansions;
        s.run_spec(rank, spec, results.len());
        results.append(&mut s.found);
        if results.len() >= cfg.max_results {
            break;
        }
    }
    results.sort_by(|a, b| {
        (a.spec_rank, a.ast_size, a.candidate, a.order).cmp(&(
            b.spec_rank,
            b.ast_size,
            b.candidate,
            b.order,
        ))
    });
    results.truncate(cfg.max_results);
    let mut counters = s.counters;
    counters.solver_calls = solver_calls() - calls;
    SessionOutput { results, counters }
}
