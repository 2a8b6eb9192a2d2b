//! Refinement types, subtyping, compatibility and intersection.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};

use indexmap::IndexMap;
use thiserror::Error;

use crate::ctype::ColumnType;
use crate::program::PlotKind;
use crate::qualifier::{Qualifier, NU};
use crate::solver::{self, EncodeEnv, SatResult};

/// Ordered column-name to column-type map.
pub type Schema = IndexMap<String, ColumnType>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BaseType {
    Table(Schema),
    Plot(PlotKind),
    Str,
    Int,
}

impl BaseType {
    pub fn schema(&self) -> Option<&Schema> {
        match self {
            BaseType::Table(s) => Some(s),
            _ => None,
        }
    }

    /// Width, permutation and depth subtyping for tables; equality otherwise.
    pub fn is_subtype(&self, other: &BaseType) -> bool {
        match (self, other) {
            (BaseType::Table(a), BaseType::Table(b)) => b
                .iter()
                .all(|(c, tb)| a.get(c).is_some_and(|ta| ta.is_subtype(*tb))),
            (a, b) => a == b,
        }
    }

    /// Shared columns must be pairwise compatible.
    pub fn is_compatible(&self, other: &BaseType) -> bool {
        match (self, other) {
            (BaseType::Table(a), BaseType::Table(b)) => a
                .iter()
                .all(|(c, ta)| b.get(c).is_none_or(|tb| ta.compatible(*tb))),
            (a, b) => a == b,
        }
    }

    pub fn intersect(&self, other: &BaseType) -> Option<BaseType> {
        match (self, other) {
            (BaseType::Table(a), BaseType::Table(b)) => {
                let mut out = Schema::new();
                for (c, ta) in a {
                    let t = match b.get(c) {
                        Some(tb) => ta.meet(*tb)?,
                        None => *ta,
                    };
                    out.insert(c.clone(), t);
                }
                for (c, tb) in b {
                    if !a.contains_key(c) {
                        out.insert(c.clone(), *tb);
                    }
                }
                Some(BaseType::Table(out))
            }
            (a, b) if a == b => Some(a.clone()),
            _ => None,
        }
    }
}

impl Hash for BaseType {
    fn hash<H: Hasher>(&self, state: &mut H) {
        std::mem::discriminant(self).hash(state);
        match self {
            BaseType::Table(s) => {
                let mut cols: Vec<(&String, &ColumnType)> = s.iter().collect();
                cols.sort();
                cols.hash(state);
            }
            BaseType::Plot(k) => k.hash(state),
            BaseType::Str | BaseType::Int => {}
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
#[allow(clippy::large_enum_variant)]
pub enum RefinementType {
    Scalar {
        base: BaseType,
        qual: Qualifier,
    },
    Func {
        param: String,
        input: Box<RefinementType>,
        output: Box<RefinementType>,
    },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TypeError {
    #[error("types are incompatible: {0} and {1}")]
    Incompatible(String, String),
    #[error("{0}")]
    NoRule(String),
}

/// Variables in scope with their types.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TypeEnv {
    vars: BTreeMap<String, RefinementType>,
}

impl TypeEnv {
    pub fn new() -> TypeEnv {
        TypeEnv::default()
    }

    pub fn bind(&mut self, name: &str, ty: RefinementType) {
        self.vars.insert(name.to_string(), ty);
    }

    pub fn get(&self, name: &str) -> Option<&RefinementType> {
        self.vars.get(name)
    }

    /// Conjunction of the scalar bindings' qualifiers, each with `ν` renamed to its variable.
    pub fn qualifier(&self) -> Qualifier {
        Qualifier::and(self.vars.iter().filter_map(|(x, t)| match t {
            RefinementType::Scalar { qual, .. } => Some(qual.rename_var(NU, x)),
            RefinementType::Func { .. } => None,
        }))
    }
}

impl RefinementType {
    pub fn scalar(base: BaseType, qual: Qualifier) -> RefinementType {
        RefinementType::Scalar { base, qual }
    }

    pub fn table(schema: Schema, qual: Qualifier) -> RefinementType {
        RefinementType::Scalar {
            base: BaseType::Table(schema),
            qual,
        }
    }

    pub fn base(&self) -> Option<&BaseType> {
        match self {
            RefinementType::Scalar { base, .. } => Some(base),
            RefinementType::Func { .. } => None,
        }
    }

    pub fn qual(&self) -> &Qualifier {
        match self {
            RefinementType::Scalar { qual, .. } => qual,
            RefinementType::Func { .. } => &Qualifier::True,
        }
    }

    pub fn schema(&self) -> Option<&Schema> {
        self.base().and_then(BaseType::schema)
    }

    pub fn with_qual(&self, qual: Qualifier) -> RefinementType {
        match self {
            RefinementType::Scalar { base, .. } => RefinementType::Scalar {
                base: base.clone(),
                qual,
            },
            f => f.clone(),
        }
    }
}

thread_local! {
    static SAT_CACHE: RefCell<HashMap<Qualifier, SatResult>> = RefCell::new(HashMap::new());
}

const CACHE_LIMIT: usize = 200_000;

/// Clears the memo table of qualifier satisfiability results on this thread.
pub fn reset_cache() {
    SAT_CACHE.with(|c| c.borrow_mut().clear());
}

/// Satisfiability of a qualifier, memoized per thread.
pub fn qualifier_sat(q: &Qualifier) -> SatResult {
    match q {
        Qualifier::True => return SatResult::Sat,
        Qualifier::False => return SatResult::Unsat,
        _ => {}
    }
    if let Some(r) = SAT_CACHE.with(|c| c.borrow().get(q).copied()) {
        return r;
    }
    let mut env = EncodeEnv::new();
    let f = env.encode(q);
    let r = solver::is_sat(&f, &env);
    SAT_CACHE.with(|c| {
        let mut c = c.borrow_mut();
        if c.len() >= CACHE_LIMIT {
            c.clear();
        }
        c.insert(q.clone(), r);
    });
    r
}

/// `a ⇒ b`; an undecided query is not valid.
pub fn qualifier_implies(a: &Qualifier, b: &Qualifier) -> bool {
    if b.is_true() || a.is_false() || a == b {
        return true;
    }
    qualifier_sat(&Qualifier::and([a.clone(), Qualifier::not(b.clone())])) == SatResult::Unsat
}

/// Joint satisfiability; an undecided query counts as satisfiable.
pub fn qualifiers_compatible(a: &Qualifier, b: &Qualifier) -> bool {
    qualifier_sat(&Qualifier::and([a.clone(), b.clone()])) != SatResult::Unsat
}

pub fn is_subtype(env: &TypeEnv, r1: &RefinementType, r2: &RefinementType) -> bool {
    match (r1, r2) {
        (
            RefinementType::Scalar { base: b1, qual: q1 },
            RefinementType::Scalar { base: b2, qual: q2 },
        ) => b1.is_subtype(b2) && qualifier_implies(&env.qualifier().conj(q1), q2),
        (
            RefinementType::Func {
                input: i1,
                output: o1,
                ..
            },
            RefinementType::Func {
                input: i2,
                output: o2,
                ..
            },
        ) => is_subtype(env, i2, i1) && is_subtype(env, o1, o2),
        _ => false,
    }
}

pub fn is_compatible(env: &TypeEnv, r1: &RefinementType, r2: &RefinementType) -> bool {
    match (r1, r2) {
        (
            RefinementType::Scalar { base: b1, qual: q1 },
            RefinementType::Scalar { base: b2, qual: q2 },
        ) => b1.is_compatible(b2) && qualifiers_compatible(&env.qualifier().conj(q1), q2),
        (
            RefinementType::Func {
                input: i1,
                output: o1,
                ..
            },
            RefinementType::Func {
                input: i2,
                output: o2,
                ..
            },
        ) => is_compatible(env, i1, i2) && is_compatible(env, o1, o2),
        _ => false,
    }
}

pub fn intersect(
    env: &TypeEnv,
    r1: &RefinementType,
    r2: &RefinementType,
) -> Result<RefinementType, TypeError> {
    let incompatible = || TypeError::Incompatible(r1.to_string(), r2.to_string());
    if !is_compatible(env, r1, r2) {
        return Err(incompatible());
    }
    match (r1, r2) {
        (
            RefinementType::Scalar { base: b1, qual: q1 },
            RefinementType::Scalar { base: b2, qual: q2 },
        ) => {
            let base = b1.intersect(b2).ok_or_else(incompatible)?;
            Ok(RefinementType::Scalar {
                base,
                qual: q1.conj(q2),
            })
        }
        _ => Err(incompatible()),
    }
}

/// `{c1: T1, c2: T2}`.
pub fn fmt_schema(s: &Schema) -> String {
    let cols: Vec<String> = s.iter().map(|(c, t)| format!("{c}: {t}")).collect();
    format!("{{{}}}", cols.join(", "))
}

impl fmt::Display for BaseType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaseType::Table(s) => write!(f, "Table({})", fmt_schema(s)),
            BaseType::Plot(k) => f.write_str(k.type_name()),
            BaseType::Str => f.write_str("Str"),
            BaseType::Int => f.write_str("Int"),
        }
    }
}

impl fmt::Display for RefinementType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RefinementType::Scalar { base, qual } => write!(f, "{{ν: {base} | {qual}}}"),
            RefinementType::Func {
                param,
                input,
                output,
            } => write!(f, "{param}: {input} → {output}"),
        }
    }
}
