//! Turning user input into ranked specifications.

pub mod heuristic;
pub mod specfile;

pub use heuristic::{
    heuristic_parse, heuristic_parse_with, predict, score, IntentPrediction, ParseOptions,
};
pub use specfile::{parse_spec_file, serialize_specs, SpecError, SpecFile};
