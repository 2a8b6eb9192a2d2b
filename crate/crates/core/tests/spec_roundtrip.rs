use std::collections::BTreeMap;
use std::sync::OnceLock;

use jsonschema::Validator;

use proptest::prelude::*;

use plotsynth::ctype::ColumnType;
use plotsynth::frontend::{parse_spec_file, serialize_specs};
use plotsynth::program::{Channel, PlotKind};
use plotsynth::qualifier::{CmpOp, Qualifier, SynAtom, TableExpr, Term};
use plotsynth::synth::ScoredSpec;
use plotsynth::table::OpTag;
use plotsynth::types::{BaseType, RefinementType, Schema};

const COLUMNS: [&str; 4] = ["Origin", "Body_style", "Fuel_economy", "Year"];

fn published_schema() -> &'static Validator {
    static V: OnceLock<Validator> = OnceLock::new();
    V.get_or_init(|| {
        let schema =
            serde_json::from_str(include_str!("../../../docs/spec-file.schema.json")).unwrap();
        jsonschema::validator_for(&schema).unwrap()
    })
}

fn conforms(text: &str) -> bool {
    published_schema().is_valid(&serde_json::from_str(text).unwrap())
}

fn column() -> impl Strategy<Value = String> {
    prop::sample::select(&COLUMNS[..]).prop_map(String::from)
}

fn ctype() -> impl Strategy<Value = ColumnType> {
    prop::sample::select(&ColumnType::ALL[..])
}

fn term() -> impl Strategy<Value = Term> {
    prop_oneof![
        prop::collection::btree_set(column(), 1..3).prop_map(Term::card),
        column().prop_map(|c| Term::Max(TableExpr::nu_proj([c]))),
        column().prop_map(|c| Term::Min(TableExpr::nu_proj([c]))),
        (-5i64..40).prop_map(Term::Const),
    ]
}

fn atom() -> impl Strategy<Value = Qualifier> {
    let ops = prop::sample::select(&OpTag::ALL[..]);
    let channels =
        prop::sample::select(&[Channel::X, Channel::Y, Channel::Color, Channel::Subplot][..]);
    let cmp = prop::sample::select(&[CmpOp::Eq, CmpOp::Le, CmpOp::Ge][..]);
    prop_oneof![
        (column(), ops).prop_map(|(c, op)| Qualifier::syn(SynAtom::column_op(c, op))),
        (channels, column()).prop_map(|(ch, c)| Qualifier::syn(SynAtom::channel(ch, c))),
        (term(), cmp, term()).prop_map(|(a, op, b)| Qualifier::cmp(a, op, b)),
    ]
}

fn qualifier() -> impl Strategy<Value = Qualifier> {
    atom().prop_recursive(3, 12, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..4).prop_map(Qualifier::and),
            prop::collection::vec(inner.clone(), 2..4).prop_map(Qualifier::or),
            inner.prop_map(Qualifier::not),
        ]
    })
}

fn spec() -> impl Strategy<Value = ScoredSpec> {
    let kinds = prop::sample::select(
        &[
            PlotKind::Bar,
            PlotKind::Scatter,
            PlotKind::Line,
            PlotKind::Area,
        ][..],
    );
    (
        kinds,
        qualifier(),
        prop::collection::btree_map(column(), ctype(), 1..4),
        qualifier(),
        1u32..=20,
    )
        .prop_map(|(kind, pq, schema, tq, score)| ScoredSpec {
            plot: RefinementType::scalar(BaseType::Plot(kind), pq),
            table: RefinementType::table(schema.into_iter().collect::<Schema>(), tq),
            score: f64::from(score) / 20.0,
        })
}

proptest! {
    #[test]
    fn serialized_specs_parse_back(
        mut specs in prop::collection::vec(spec(), 1..4),
        column_types in prop::collection::btree_map(column(), ctype(), 0..3),
    ) {
        specs.sort_by(|a, b| b.score.total_cmp(&a.score));
        let text = serialize_specs(&specs, &column_types);
        let file = parse_spec_file(&text, None).unwrap();
        prop_assert_eq!(&file.specs, &specs);
        prop_assert_eq!(&file.column_types, &column_types);
        prop_assert!(file.warnings.is_empty());
        prop_assert_eq!(serialize_specs(&file.specs, &file.column_types), text.clone());
        prop_assert!(conforms(&text));
    }
}

#[test]
fn unsorted_specs_are_reordered_with_a_warning() {
    let spec = |score| ScoredSpec {
        plot: RefinementType::scalar(BaseType::Plot(PlotKind::Bar), Qualifier::True),
        table: RefinementType::table(Schema::new(), Qualifier::True),
        score,
    };
    let text = serialize_specs(&[spec(0.2), spec(0.9)], &BTreeMap::new());
    let file = parse_spec_file(&text, None).unwrap();
    assert_eq!(file.specs[0].score, 0.9);
    assert_eq!(file.warnings.len(), 1);
}

#[test]
fn fixtures_match_the_published_schema() {
    for text in [
        include_str!("fixtures/running_example.spec.json"),
        include_str!("fixtures/overlapping.spec.json"),
    ] {
        assert!(conforms(text));
        assert!(parse_spec_file(text, None).is_ok());
    }
}

#[test]
fn malformed_files_fail_both_checks() {
    let bad = [
        r#"{"specs": [{"prob": 0, "plot": {"base": "BarPlot"}, "table": {"schema": {}}}]}"#,
        r#"{"specs": [{"prob": 1, "plot": {"base": "PiePlot"}, "table": {"schema": {}}}]}"#,
        r#"{"specs": [{"prob": 1, "plot": {"base": "BarPlot"}, "table": {"schema": {"a": "Big"}}}]}"#,
        r#"{"specs": [{"prob": 1, "plot": {"base": "BarPlot"}, "table": {"schema": {}}, "x": 1}]}"#,
        r#"{"specs": [{"prob": 1, "plot": {"base": "BarPlot", "qualifier": {"pi": {"column": "a"}}}, "table": {"schema": {}}}]}"#,
        r#"{"specs": [{"prob": 1, "plot": {"base": "BarPlot", "qualifier": {"and": [], "or": []}}, "table": {"schema": {}}}]}"#,
        r#"{"specs": [{"prob": 1, "plot": {"base": "BarPlot"}, "table": {"schema": {}, "qualifier": {"cmp": {"op": "<", "lhs": {"const": 1}, "rhs": {"const": 2}}}}}]}"#,
        r#"{"version": 2, "specs": []}"#,
        r#"{"specs": {}}"#,
    ];
    for text in bad {
        assert!(!conforms(text), "{text}");
        assert!(parse_spec_file(text, None).is_err(), "{text}");
    }
}
