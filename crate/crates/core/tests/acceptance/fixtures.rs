use std::collections::BTreeSet;

use plotsynth::ctype::ColumnType::{self, *};
use plotsynth::forget::{forget, forget_columns, Forget};
use plotsynth::qualifier::{CmpOp, Qualifier, SynAtom, Term};
use plotsynth::synth::genreq::GenReq;
use plotsynth::synth::interp::type_interpolant;
use plotsynth::table::OpTag;
use plotsynth::types::{RefinementType, Schema};

fn col_a(t: ColumnType) -> Schema {
    Schema::from([("colA".to_string(), t)])
}

pub fn genreq_examples() {
    let mut g = GenReq::new();
    let r = g.requirement(&col_a(Qualitative), &col_a(Discrete), 1, true);
    assert_eq!(r.qual().to_string(), "π(ν.colA, count)");
    let r = g.requirement(&col_a(Qualitative), &col_a(Continuous), 2, true);
    assert_eq!(
        r.qual().to_string(),
        "π(ν.colA, count) ∧ (π(ν.colA, mean) ∨ π(ν.colA, sum))"
    );
}

pub fn forget_examples() {
    let card = |c: &str| Term::card([c]);
    let q = Qualifier::and([
        Qualifier::syn(SynAtom::column_op("c1", OpTag::Mean)),
        Qualifier::syn(SynAtom::column_op("c2", OpTag::Count)),
    ]);
    let out = forget(
        &q,
        &Forget {
            term: &|_: &Term| false,
            atom: &|a: &SynAtom| a.column() == Some("c1"),
        },
    );
    assert_eq!(out.to_string(), "π(ν.c2, count)");
    let q = Qualifier::and([
        Qualifier::cmp(card("c1"), CmpOp::Eq, Term::Const(30)),
        Qualifier::cmp(card("c1"), CmpOp::Le, card("c2")),
    ]);
    let out = forget_columns(&q, &BTreeSet::from(["c1".to_string()]));
    assert_eq!(out.to_string(), "30 ≤ |Proj(ν,{c2})|");
}

pub fn interpolant_examples() {
    let goal = RefinementType::table(
        Schema::from([
            ("colA".into(), Discrete),
            ("colB".into(), Qualitative),
            ("colC".into(), Continuous),
        ]),
        Qualifier::True,
    );
    let actual = RefinementType::table(
        Schema::from([
            ("colA".into(), Qualitative),
            ("colB".into(), Qualitative),
            ("colC".into(), Continuous),
        ]),
        Qualifier::True,
    );
    let i = type_interpolant(&goal, &actual, 3).unwrap();
    assert_eq!(i.to_string(), "{ν: Table({colA: Quantitative}) | true}");

    let a = Term::card(["colA"]);
    let b = Term::card(["colB"]);
    let s = Schema::from([("colA".into(), Nominal), ("colB".into(), Nominal)]);
    let goal = RefinementType::table(
        s.clone(),
        Qualifier::and([
            Qualifier::cmp(a.clone(), CmpOp::Le, b.clone()),
            Qualifier::cmp(b, CmpOp::Le, Term::Const(20)),
        ]),
    );
    let actual = RefinementType::table(s, Qualifier::cmp(a, CmpOp::Eq, Term::Const(30)));
    let i = type_interpolant(&goal, &actual, 3).unwrap();
    assert_eq!(i.qual().to_string(), "|Proj(ν,{colA})| ≤ 20");
}
