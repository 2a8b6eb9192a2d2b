mod common;

use common::vega::validator;
use plotsynth::session::{run_session, LemmaBank, SessionOptions, SessionResult, SpecSource};
use plotsynth::table::{load_table, LoadOptions, Table};

fn load(bytes: &[u8]) -> Table {
    load_table(bytes, &LoadOptions::default()).unwrap()
}

fn run(data: &Table, source: SpecSource) -> SessionResult {
    let mut options = SessionOptions::default();
    options.config.max_results = 5;
    run_session(data, &source, &options, &LemmaBank::default()).unwrap()
}

#[test]
fn grouped_bar_chart_document() {
    let cars = load(include_bytes!("fixtures/cars.csv"));
    let spec_file = include_str!("fixtures/running_example.spec.json");
    let result = run(&cars, SpecSource::SpecFile(spec_file.into()));
    let doc = result
        .results
        .iter()
        .find(|r| r.program["plot"]["subplot"] == "Body_style")
        .map(|r| &r.vega)
        .expect("a faceted chart");
    assert_eq!(doc["mark"], "bar");
    assert_eq!(doc["encoding"]["x"]["field"], "Origin");
    assert_eq!(doc["encoding"]["x"]["type"], "nominal");
    assert_eq!(doc["encoding"]["y"]["field"], "Fuel_economy");
    assert_eq!(doc["encoding"]["y"]["type"], "quantitative");
    assert_eq!(doc["encoding"]["column"]["field"], "Body_style");
    assert!(validator().is_valid(doc));
}

#[test]
fn invalid_documents_are_caught() {
    let bad = serde_json::json!({"mark": "pie3d", "encoding": {}});
    assert!(!validator().is_valid(&bad));
}
