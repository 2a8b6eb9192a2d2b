use crate::common;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use plotsynth::ctype::ColumnType;
use plotsynth::dsl::print_vis;
use plotsynth::program::{Channel, PlotKind};
use plotsynth::qualifier::{CmpOp, Qualifier, Term};
use plotsynth::synth::{
    synthesize_session, Ablation, LemmaStore, ScoredSpec, SessionOutput, SynthConfig,
};
use plotsynth::table::Table;
use plotsynth::types::{RefinementType, Schema};

fn run(data: &Table, specs: &[ScoredSpec], cfg: &SynthConfig) -> SessionOutput {
    synthesize_session(data, specs, cfg, &mut LemmaStore::new())
}

fn texts(out: &SessionOutput) -> Vec<String> {
    out.results.iter().map(|f| print_vis(&f.program)).collect()
}

fn spec(kind: PlotKind, x: &str, schema: &[(&str, ColumnType)], qual: Qualifier) -> ScoredSpec {
    ScoredSpec {
        plot: common::plot_goal(kind, &[(Channel::X, x.to_string())]),
        table: RefinementType::table(
            schema
                .iter()
                .map(|(c, t)| (c.to_string(), *t))
                .collect::<Schema>(),
            qual,
        ),
        score: 1.0,
    }
}

/// An unreachable goal on `col` followed by a goal that shares it.
fn overlapping(rng: &mut ChaCha8Rng, data: &Table, col: &str) -> Vec<ScoredSpec> {
    let others: Vec<String> = data
        .column_names()
        .into_iter()
        .filter(|c| c != col && data.column_type(c) == Some(ColumnType::Nominal))
        .collect();
    let other = others.choose(rng).unwrap();
    let mut specs = vec![
        spec(
            PlotKind::Bar,
            col,
            &[(col, ColumnType::Qualitative)],
            Qualifier::True,
        ),
        spec(
            PlotKind::Bar,
            other,
            &[(other, ColumnType::Nominal), (col, ColumnType::Nominal)],
            Qualifier::True,
        ),
    ];
    if rng.gen_bool(0.5) {
        specs.push(common::random_spec(rng, &data.column_names()));
    }
    specs
}

pub fn lemmas_never_add_expansions() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut with_total, mut without_total) = (0, 0);
    for session in 0..50 {
        let overlap = session % 2 == 0;
        let (data, specs) = if overlap {
            let data = common::cars();
            let specs = overlapping(&mut rng, &data, "Fuel_economy");
            (data, specs)
        } else {
            let data = common::random_table(&mut rng);
            let specs = (0..rng.gen_range(1..=3))
                .map(|_| common::random_spec(&mut rng, &data.column_names()))
                .collect();
            (data, specs)
        };
        let cfg = SynthConfig {
            max_depth: 3,
            max_expansions: 20_000,
            ..SynthConfig::default()
        };
        let with = run(&data, &specs, &cfg);
        let without = run(&data, &specs, &cfg.clone().with_ablation(Ablation::NoLemma));
        assert!(with.counters.expansions <= without.counters.expansions);
        assert_eq!(texts(&with), texts(&without));
        if overlap {
            with_total += with.counters.expansions;
            without_total += without.counters.expansions;
        }
    }
    assert!(
        with_total < without_total,
        "{with_total} vs {without_total}"
    );
}

pub fn qualifiers_prune_cardinality_constrained_bars() {
    let data = common::cars();
    let nom = |c: &'static str| (c, ColumnType::Nominal);
    let fe = ("Fuel_economy", ColumnType::Quantitative);
    let card = |c: &str, op: CmpOp, n: i64| Qualifier::cmp(Term::card([c]), op, Term::Const(n));
    let fixtures = [
        spec(
            PlotKind::Bar,
            "Origin",
            &[nom("Origin"), fe],
            card("Fuel_economy", CmpOp::Ge, 11),
        ),
        spec(
            PlotKind::Bar,
            "Fuel_economy",
            &[fe],
            card("Fuel_economy", CmpOp::Ge, 11),
        ),
        spec(
            PlotKind::Bar,
            "Body_style",
            &[nom("Body_style"), fe],
            card("Fuel_economy", CmpOp::Ge, 12),
        ),
        spec(
            PlotKind::Line,
            "Origin",
            &[nom("Origin"), fe],
            card("Fuel_economy", CmpOp::Ge, 11),
        ),
    ];
    let cfg = SynthConfig {
        max_depth: 2,
        ..SynthConfig::default()
    };
    for f in &fixtures {
        let full = run(&data, std::slice::from_ref(f), &cfg);
        let base = run(
            &data,
            std::slice::from_ref(f),
            &cfg.clone().with_ablation(Ablation::BaseOnly),
        );
        assert!(
            base.counters.expansions > full.counters.expansions,
            "{} vs {}",
            base.counters.expansions,
            full.counters.expansions
        );
        assert_eq!(texts(&full), texts(&base));
    }
}
