use crate::common;
use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use plotsynth::dsl::print_vis;
use plotsynth::eval::apply_op;
use plotsynth::models::{models, plot_inhabits};
use plotsynth::program::{TableOp, TableProgram, VisProgram};
use plotsynth::synth::{
    plot_candidates, plot_columns, synthesize_session, universe, Ablation, LemmaStore, ScoredSpec,
    SynthConfig,
};
use plotsynth::table::Table;
use plotsynth::types::RefinementType;
use plotsynth::typing::{input_type, type_of_op, type_of_plot};

fn config() -> SynthConfig {
    SynthConfig {
        max_depth: 3,
        max_results: usize::MAX,
        filter_constants: 2,
        bins: vec![5],
        select_max: 3,
        max_keys: 2,
        max_expansions: u64::MAX,
        max_candidates: usize::MAX,
        ..SynthConfig::default()
    }
    .with_mutate_ops(&[])
    .unwrap()
}

/// Every chain of at most `depth` operators, each well typed, with its output and type.
fn chains(
    ops: &[TableOp],
    cfg: &SynthConfig,
    prefix: &mut Vec<TableOp>,
    table: &Table,
    ty: &RefinementType,
    out: &mut Vec<(Vec<TableOp>, Table, RefinementType)>,
) {
    out.push((prefix.clone(), table.clone(), ty.clone()));
    if prefix.len() == cfg.max_depth {
        return;
    }
    for op in ops {
        let Ok(next_ty) = type_of_op(op, ty, &cfg.mutate) else {
            continue;
        };
        let Ok(next) = apply_op(op, table, &cfg.mutate) else {
            continue;
        };
        prefix.push(op.clone());
        chains(ops, cfg, prefix, &next, &next_ty, out);
        prefix.pop();
    }
}

fn oracle(data: &Table, specs: &[ScoredSpec], cfg: &SynthConfig) -> BTreeSet<(usize, String)> {
    let mut found = BTreeSet::new();
    let mut cache: Option<(Vec<TableOp>, Vec<_>)> = None;
    for (rank, spec) in specs.iter().enumerate() {
        let grammar = universe(data, spec, cfg);
        let Some(kind) = spec.kind() else { continue };
        let plots: Vec<_> = plot_candidates(kind, &plot_columns(spec, &grammar))
            .into_iter()
            .filter(|p| plot_inhabits(p, &spec.plot))
            .collect();
        let ops = grammar.all();
        if cache.as_ref().is_none_or(|(k, _)| *k != ops) {
            let mut all = Vec::new();
            let input = input_type(data);
            chains(&ops, cfg, &mut Vec::new(), data, &input, &mut all);
            cache = Some((ops, all));
        }
        for (inner_first, table, ty) in &cache.as_ref().unwrap().1 {
            if !models(table, &spec.table) {
                continue;
            }
            let ops: Vec<TableOp> = inner_first.iter().rev().cloned().collect();
            for plot in &plots {
                if type_of_plot(plot, ty).is_ok() {
                    let p = VisProgram {
                        table: TableProgram::from_ops(&ops),
                        plot: plot.clone(),
                    };
                    found.insert((rank, print_vis(&p)));
                }
            }
        }
    }
    found
}

fn synthesized(data: &Table, specs: &[ScoredSpec], cfg: &SynthConfig) -> BTreeSet<(usize, String)> {
    let out = synthesize_session(data, specs, cfg, &mut LemmaStore::new());
    let set: BTreeSet<_> = out
        .results
        .iter()
        .map(|f| (f.spec_rank, print_vis(&f.program)))
        .collect();
    assert_eq!(set.len(), out.results.len());
    set
}

pub fn results_match_exhaustive_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut nonempty = 0;
    for _ in 0..16 {
        let data = common::random_table(&mut rng);
        let specs: Vec<_> = (0..rng.gen_range(1..=2))
            .map(|_| common::random_spec(&mut rng, &data.column_names()))
            .collect();
        let cfg = config();
        let expected = oracle(&data, &specs, &cfg);
        let with = synthesized(&data, &specs, &cfg);
        let without = synthesized(&data, &specs, &cfg.clone().with_ablation(Ablation::NoLemma));
        assert_eq!(with, expected, "{specs:?}");
        assert_eq!(without, expected, "{specs:?}");
        nonempty += usize::from(!expected.is_empty());
    }
    assert!(nonempty > 0);
}
