//! Type-directed synthesis of table transformations and plots.

pub mod ctype;
pub mod dsl;
pub mod eval;
pub mod forget;
pub mod frontend;
pub mod models;
pub mod program;
pub mod qualifier;
pub mod session;
pub mod solver;
pub mod synth;
pub mod table;
pub mod types;
pub mod typing;
pub mod value;
pub mod vegalite;
