//! Command-line front end and HTTP service for plotsynth.

pub mod commands;
pub mod overrides;
pub mod service;

use plotsynth::session::SessionResult;

/// Serialized form shared by the CLI and the service.
pub fn result_json(result: &SessionResult) -> String {
    let mut s = serde_json::to_string_pretty(result).expect("result serializes");
    s.push('\n');
    s
}

/// Failure that is not the caller's fault; exits with status 2.
#[derive(Debug)]
pub struct Internal(pub String);

impl std::fmt::Display for Internal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "internal error: {}", self.0)
    }
}

impl std::error::Error for Internal {}
