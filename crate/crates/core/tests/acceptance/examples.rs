use std::collections::BTreeSet;
use std::time::Instant;

use plotsynth::ctype::ColumnType;
use plotsynth::program::{Agg, Channel, PlotKind, TableProgram, VisProgram};
use plotsynth::qualifier::{Qualifier, SynAtom};
use plotsynth::synth::{synthesize_session, LemmaStore, ScoredSpec, SynthConfig};
use plotsynth::table::{load_table, LoadOptions, OpTag, Table};
use plotsynth::types::{BaseType, RefinementType, Schema};

fn cars() -> Table {
    load_table(
        include_bytes!("../fixtures/cars.csv"),
        &LoadOptions::default(),
    )
    .unwrap()
}

fn schema(cols: &[(&str, ColumnType)]) -> Schema {
    cols.iter().map(|(c, t)| (c.to_string(), *t)).collect()
}

fn bar(bindings: &[(Channel, &str)]) -> RefinementType {
    RefinementType::scalar(
        BaseType::Plot(PlotKind::Bar),
        Qualifier::and(
            bindings
                .iter()
                .map(|(ch, c)| Qualifier::syn(SynAtom::channel(*ch, *c))),
        ),
    )
}

fn is_fig4(p: &VisProgram) -> bool {
    let set = |v: &[String]| v.iter().cloned().collect::<BTreeSet<_>>();
    let TableProgram::Summarize {
        input,
        keys,
        agg: Agg::Mean,
        target,
    } = &p.table
    else {
        return false;
    };
    let TableProgram::Select {
        input: inner,
        columns: cols,
    } = input.as_ref()
    else {
        return false;
    };
    **inner == TableProgram::Input
        && set(cols) == set(&["Origin".into(), "Fuel_economy".into(), "Body_style".into()])
        && set(keys) == set(&["Origin".into(), "Body_style".into()])
        && target == "Fuel_economy"
        && p.plot.x == "Origin"
        && p.plot.y == "Fuel_economy"
        && p.plot.subplot.as_deref() == Some("Body_style")
        && p.plot.color.is_none()
}

pub fn running_example_finds_the_grouped_bar_chart() {
    let data = cars();
    let spec = ScoredSpec {
        plot: bar(&[
            (Channel::X, "Origin"),
            (Channel::Y, "Fuel_economy"),
            (Channel::Subplot, "Body_style"),
        ]),
        table: RefinementType::table(
            schema(&[
                ("Origin", ColumnType::Nominal),
                ("Body_style", ColumnType::Nominal),
                ("Fuel_economy", ColumnType::Quantitative),
            ]),
            Qualifier::syn(SynAtom::column_op("Fuel_economy", OpTag::Mean)),
        ),
        score: 1.0,
    };
    let start = Instant::now();
    let out = synthesize_session(
        &data,
        &[spec],
        &SynthConfig::default(),
        &mut LemmaStore::new(),
    );
    assert!(start.elapsed().as_secs() < 5);
    assert!(out.results.iter().any(|f| is_fig4(&f.program)));
}

pub fn infeasible_goal_teaches_a_lemma() {
    let data = cars();
    let cfg = SynthConfig::default();
    let mut lemmas = LemmaStore::new();
    let first = ScoredSpec {
        plot: bar(&[(Channel::X, "Fuel_economy")]),
        table: RefinementType::table(
            schema(&[("Fuel_economy", ColumnType::Qualitative)]),
            Qualifier::True,
        ),
        score: 1.0,
    };
    let out = synthesize_session(&data, &[first], &cfg, &mut lemmas);
    assert!(out.results.is_empty());
    let lemma = lemmas
        .iter()
        .find(|l| {
            l.guard
                .schema()
                .is_some_and(|s| s.contains_key("Fuel_economy"))
        })
        .expect("a lemma");
    assert_eq!(
        lemma.guard.to_string(),
        "{ν: Table({Fuel_economy: Qualitative}) | true}"
    );
    assert!(lemma.requirement.qual().is_false());
    let second = ScoredSpec {
        plot: bar(&[(Channel::X, "Body_style")]),
        table: RefinementType::table(
            schema(&[
                ("Body_style", ColumnType::Nominal),
                ("Fuel_economy", ColumnType::Nominal),
            ]),
            Qualifier::True,
        ),
        score: 1.0,
    };
    let out = synthesize_session(&data, &[second], &cfg, &mut lemmas);
    assert_eq!(out.counters.expansions, 0);
}

pub fn running_example_from_the_query() {
    let data = cars();
    let specs = plotsynth::frontend::heuristic_parse(
        "show the fuel efficiency for cars from different countries segregated based on body style",
        &data,
    );
    let start = Instant::now();
    let out = synthesize_session(
        &data,
        &specs,
        &SynthConfig::default(),
        &mut LemmaStore::new(),
    );
    assert!(start.elapsed().as_secs() < 5);
    assert!(out.results.len() <= 10);
    assert!(out.results.iter().any(|f| is_fig4(&f.program)));
}
