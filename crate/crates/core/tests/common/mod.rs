#![allow(dead_code)]

pub mod vega;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use plotsynth::ctype::ColumnType;
use plotsynth::program::{Channel, PlotKind};
use plotsynth::qualifier::{CmpOp, Qualifier, SynAtom, Term};
use plotsynth::synth::ScoredSpec;
use plotsynth::table::{load_table, LoadOptions, OpTag, Table};
use plotsynth::types::{BaseType, RefinementType, Schema};

pub const KINDS: [PlotKind; 4] = [
    PlotKind::Bar,
    PlotKind::Scatter,
    PlotKind::Line,
    PlotKind::Area,
];

pub fn cars() -> Table {
    load_table(
        include_bytes!("../fixtures/cars.csv"),
        &LoadOptions::default(),
    )
    .unwrap()
}

/// A small table with a nominal, a discrete and a continuous column.
pub fn random_table(rng: &mut ChaCha8Rng) -> Table {
    let rows = rng.gen_range(4..=9);
    let mut csv = String::from("cat,n,x\n");
    for _ in 0..rows {
        let cat = ["a", "b", "c"].choose(rng).unwrap();
        let n = rng.gen_range(1..=4);
        let x = rng.gen_range(0..100) as f64 / 4.0 + 0.5;
        csv.push_str(&format!("{cat},{n},{x}\n"));
    }
    load_table(csv.as_bytes(), &LoadOptions::default()).unwrap()
}

pub fn plot_goal(kind: PlotKind, bindings: &[(Channel, String)]) -> RefinementType {
    RefinementType::scalar(
        BaseType::Plot(kind),
        Qualifier::and(
            bindings
                .iter()
                .map(|(ch, c)| Qualifier::syn(SynAtom::channel(*ch, c.clone()))),
        ),
    )
}

fn random_qualifier(rng: &mut ChaCha8Rng, cols: &[String]) -> Qualifier {
    let c = cols.choose(rng).unwrap().clone();
    match rng.gen_range(0..4) {
        0 => Qualifier::True,
        1 => Qualifier::syn(SynAtom::column_op(
            c,
            *[OpTag::Mean, OpTag::Sum, OpTag::Count, OpTag::Bin]
                .choose(rng)
                .unwrap(),
        )),
        2 => Qualifier::cmp(
            Term::card([c]),
            CmpOp::Le,
            Term::Const(rng.gen_range(1..=4)),
        ),
        _ => Qualifier::cmp(
            Term::card([c]),
            CmpOp::Ge,
            Term::Const(rng.gen_range(1..=3)),
        ),
    }
}

/// A specification over some of `columns` with random types, bindings and qualifier.
pub fn random_spec(rng: &mut ChaCha8Rng, columns: &[String]) -> ScoredSpec {
    let mut cols = columns.to_vec();
    cols.shuffle(rng);
    cols.truncate(rng.gen_range(1..=cols.len().min(3)));
    let schema: Schema = cols
        .iter()
        .map(|c| (c.clone(), *ColumnType::ALL.choose(rng).unwrap()))
        .collect();
    let channels = [Channel::X, Channel::Y, Channel::Color, Channel::Subplot];
    let bindings: Vec<(Channel, String)> = cols
        .iter()
        .zip(channels)
        .filter(|_| rng.gen_bool(0.6))
        .map(|(c, ch)| (ch, c.clone()))
        .collect();
    ScoredSpec {
        plot: plot_goal(*KINDS.choose(rng).unwrap(), &bindings),
        table: RefinementType::table(schema, random_qualifier(rng, &cols)),
        score: 1.0,
    }
}
