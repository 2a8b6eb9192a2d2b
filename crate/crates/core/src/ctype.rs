//! Column types and their subtyping lattice.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Semantic type of a single column.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ColumnType {
    Top,
    Qualitative,
    Quantitative,
    Nominal,
    Ordinal,
    Temporal,
    Discrete,
    Continuous,
}

impl ColumnType {
    pub const ALL: [ColumnType; 8] = [
        ColumnType::Top,
        ColumnType::Qualitative,
        ColumnType::Quantitative,
        ColumnType::Nominal,
        ColumnType::Ordinal,
        ColumnType::Temporal,
        ColumnType::Discrete,
        ColumnType::Continuous,
    ];

    /// Immediate supertype, `None` for `Top`.
    pub fn parent(self) -> Option<ColumnType> {
        use ColumnType::*;
        match self {
            Top => None,
            Qualitative | Quantitative => Some(Top),
            Nominal | Ordinal | Temporal => Some(Qualitative),
            Discrete | Continuous => Some(Quantitative),
        }
    }

    /// Reflexive-transitive subtyping.
    pub fn is_subtype(self, other: ColumnType) -> bool {
        let mut cur = Some(self);
        while let Some(t) = cur {
            if t == other {
                return true;
            }
            cur = t.parent();
        }
        false
    }

    /// Two column types are compatible when one refines the other.
    pub fn compatible(self, other: ColumnType) -> bool {
        self.is_subtype(other) || other.is_subtype(self)
    }

    /// Greatest lower bound. The lattice is a tree, so the meet exists iff the types are compatible.
    pub fn meet(self, other: ColumnType) -> Option<ColumnType> {
        if self.is_subtype(other) {
            Some(self)
        } else if other.is_subtype(self) {
            Some(other)
        } else {
            None
        }
    }

    pub fn is_quantitative(self) -> bool {
        self.is_subtype(ColumnType::Quantitative)
    }

    pub fn name(self) -> &'static str {
        use ColumnType::*;
        match self {
            Top => "Top",
            Qualitative => "Qualitative",
            Quantitative => "Quantitative",
            Nominal => "Nominal",
            Ordinal => "Ordinal",
            Temporal => "Temporal",
            Discrete => "Discrete",
            Continuous => "Continuous",
        }
    }
}

impl fmt::Display for ColumnType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if *self == ColumnType::Top {
            f.write_str("⊤")
        } else {
            f.write_str(self.name())
        }
    }
}

impl FromStr for ColumnType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ColumnType::ALL
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(s) || (s == "⊤" && *t == ColumnType::Top))
            .ok_or_else(|| format!("unknown column type `{s}`"))
    }
}
