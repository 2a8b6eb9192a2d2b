//! Type interpolants: generalized explanations of why a goal and an actual type conflict.

use crate::qualifier::Qualifier;
use crate::solver::{craig_interpolant, EncodeEnv};
use crate::types::{BaseType, RefinementType, Schema};

/// For incompatible bases, keeps each conflicting column at the most general supertype of the
/// goal's column type that still conflicts with the actual one. For compatible bases, keeps the
/// goal base with a Craig interpolant of the two qualifiers. `None` if the types are compatible
/// at the base level and no interpolant is found.
pub fn type_interpolant(
    goal: &RefinementType,
    actual: &RefinementType,
    bound: usize,
) -> Option<RefinementType> {
    let (Some(BaseType::Table(g)), Some(BaseType::Table(a))) = (goal.base(), actual.base()) else {
        return None;
    };
    let mut conflicts = Schema::new();
    for (c, gt) in g {
        let Some(at) = a.get(c) else { continue };
        if gt.compatible(*at) {
            continue;
        }
        let mut t = *gt;
        while let Some(p) = t.parent() {
            if p.compatible(*at) {
                break;
            }
            t = p;
        }
        conflicts.insert(c.clone(), t);
    }
    if !conflicts.is_empty() {
        return Some(RefinementType::table(conflicts, Qualifier::True));
    }
    let mut env = EncodeEnv::new();
    let fa = env.encode(goal.qual());
    let fb = env.encode(actual.qual());
    let i = craig_interpolant(&fa, &fb, &env, bound)?;
    let q = env.decode(&i)?;
    Some(RefinementType::table(g.clone(), q))
}
