//! One line per acceptance criterion; exits non-zero if any fails.

#[path = "../common/mod.rs"]
mod common;

mod ablation;
mod completeness;
mod examples;
mod fixtures;
mod solver;
mod soundness;
mod vegalite;

use std::panic;
use std::process::ExitCode;
use std::time::Instant;

type Check = fn();

const CRITERIA: [(&str, &[Check]); 10] = [
    (
        "running example end to end",
        &[
            examples::running_example_finds_the_grouped_bar_chart,
            examples::running_example_from_the_query,
        ],
    ),
    (
        "soundness on 200 random instances",
        &[soundness::every_result_inhabits_its_specification],
    ),
    (
        "completeness against enumerate-then-check",
        &[completeness::results_match_exhaustive_enumeration],
    ),
    (
        "lemma from the infeasible goal",
        &[examples::infeasible_goal_teaches_a_lemma],
    ),
    ("GenReq examples", &[fixtures::genreq_examples]),
    ("forget examples", &[fixtures::forget_examples]),
    (
        "interpolant examples and Craig conditions",
        &[
            fixtures::interpolant_examples,
            solver::interpolants_meet_craig_conditions,
        ],
    ),
    (
        "ablation monotonicity",
        &[
            ablation::lemmas_never_add_expansions,
            ablation::qualifiers_prune_cardinality_constrained_bars,
        ],
    ),
    (
        "solver matches exhaustive search",
        &[
            solver::difference_fragment_matches_exhaustive_search,
            solver::general_linear_answers_are_never_wrong,
        ],
    ),
    (
        "Vega-Lite output validates",
        &[vegalite::fixture_outputs_validate],
    ),
];

fn message(payload: &(dyn std::any::Any + Send)) -> String {
    payload
        .downcast_ref::<String>()
        .cloned()
        .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
        .unwrap_or_default()
}

fn main() -> ExitCode {
    let mut failed = 0;
    for (i, (name, checks)) in CRITERIA.iter().enumerate() {
        let start = Instant::now();
        let outcome = checks
            .iter()
            .try_for_each(|check| panic::catch_unwind(check).map_err(|e| message(&*e)));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(()) => println!("PASS {:>2} {name} ({secs:.1}s)", i + 1),
            Err(e) => {
                failed += 1;
                println!(
                    "FAIL {:>2} {name}: {}",
                    i + 1,
                    e.lines().next().unwrap_or("")
                );
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        CRITERIA.len() - failed,
        CRITERIA.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
