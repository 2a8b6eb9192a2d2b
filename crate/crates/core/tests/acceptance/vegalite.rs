use plotsynth::session::{run_session, LemmaBank, SessionOptions, SessionResult, SpecSource};
use plotsynth::table::{load_table, LoadOptions, Table};

use crate::common::vega::validator;

fn load(bytes: &[u8]) -> Table {
    load_table(bytes, &LoadOptions::default()).unwrap()
}

fn run(data: &Table, source: SpecSource) -> SessionResult {
    let mut options = SessionOptions::default();
    options.config.max_results = 5;
    run_session(data, &source, &options, &LemmaBank::default()).unwrap()
}

fn assert_valid(result: &SessionResult) {
    for r in &result.results {
        let errors: Vec<String> = validator()
            .iter_errors(&r.vega)
            .map(|e| format!("{} at {}", e, e.instance_path))
            .collect();
        assert!(errors.is_empty(), "{}: {:?}", r.text(), errors);
    }
}

pub fn fixture_outputs_validate() {
    let cars = load(include_bytes!("../fixtures/cars.csv"));
    let sales = load(include_bytes!("../fixtures/sales.csv"));
    let cases = [
        (&cars, "show the fuel efficiency for cars from different countries segregated based on body style"),
        (&cars, "scatter plot of fuel economy by model"),
        (&cars, "number of cars per body style"),
        (&sales, "trend of total units over date"),
        (&sales, "area chart of units by date colored by region"),
        (&sales, "average price per product"),
    ];
    let mut total = 0;
    for (data, query) in cases {
        let result = run(data, SpecSource::Query(query.into()));
        assert!(result.results.len() <= 5);
        total += result.results.len();
        assert_valid(&result);
    }
    assert!(total > 0);
    let spec_file = include_str!("../fixtures/running_example.spec.json");
    let result = run(&cars, SpecSource::SpecFile(spec_file.into()));
    assert!(!result.results.is_empty());
    assert_valid(&result);
}
