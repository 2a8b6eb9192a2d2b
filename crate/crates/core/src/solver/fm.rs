//! Fourier–Motzkin elimination over integer linear constraints.

use std::collections::{BTreeMap, BTreeSet};

use super::formula::VarId;

/// `Σ coeffs·x ≤ rhs`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Constraint {
    pub coeffs: BTreeMap<VarId, i128>,
    pub rhs: i128,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FmError {
    /// The constraints have no solution.
    Infeasible,
    /// Coefficients overflowed or the constraint set grew past the limit.
    Blowup,
}

const MAX_CONSTRAINTS: usize = 4096;

fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl Constraint {
    pub fn new(coeffs: BTreeMap<VarId, i128>, rhs: i128) -> Constraint {
        Constraint {
            coeffs: coeffs.into_iter().filter(|(_, a)| *a != 0).collect(),
            rhs,
        }
    }

    /// Divides by the coefficient gcd, rounding the bound down. `Err` if trivially false,
    /// `Ok(None)` if trivially true.
    fn normalize(self) -> Result<Option<Constraint>, FmError> {
        if self.coeffs.is_empty() {
            return if self.rhs >= 0 {
                Ok(None)
            } else {
                Err(FmError::Infeasible)
            };
        }
        let g = self.coeffs.values().fold(0, |g, a| gcd(g, *a));
        if g <= 1 {
            return Ok(Some(self));
        }
        Ok(Some(Constraint {
            coeffs: self.coeffs.into_iter().map(|(x, a)| (x, a / g)).collect(),
            rhs: self.rhs.div_euclid(g),
        }))
    }

    pub fn is_difference(&self) -> bool {
        let cs: Vec<i128> = self.coeffs.values().copied().collect();
        match cs.as_slice() {
            [] => true,
            [a] => a.abs() == 1,
            [a, b] => a * b == -1,
            _ => false,
        }
    }
}

fn combine(p: &Constraint, n: &Constraint, x: VarId) -> Result<Constraint, FmError> {
    let a = p.coeffs[&x];
    let b = -n.coeffs[&x];
    let mut coeffs = BTreeMap::new();
    for (y, c) in &p.coeffs {
        let v = c.checked_mul(b).ok_or(FmError::Blowup)?;
        *coeffs.entry(*y).or_insert(0i128) += v;
    }
    for (y, c) in &n.coeffs {
        let v = c.checked_mul(a).ok_or(FmError::Blowup)?;
        let e = coeffs.entry(*y).or_insert(0i128);
        *e = e.checked_add(v).ok_or(FmError::Blowup)?;
    }
    coeffs.remove(&x);
    let rhs = p
        .rhs
        .checked_mul(b)
        .and_then(|l| n.rhs.checked_mul(a).and_then(|r| l.checked_add(r)))
        .ok_or(FmError::Blowup)?;
    Ok(Constraint::new(coeffs, rhs))
}

fn prepare(cs: Vec<Constraint>) -> Result<Vec<Constraint>, FmError> {
    let mut set = BTreeSet::new();
    for c in cs {
        if let Some(c) = c.normalize()? {
            set.insert(c);
        }
    }
    Ok(set.into_iter().collect())
}

/// Eliminates `vars`, returning constraints over the remaining variables that are implied by
/// the input. Exact over the rationals.
pub fn eliminate(cs: Vec<Constraint>, vars: &BTreeSet<VarId>) -> Result<Vec<Constraint>, FmError> {
    let mut cs = prepare(cs)?;
    let mut pending: BTreeSet<VarId> = vars.clone();
    while !pending.is_empty() {
        let x = *pending
            .iter()
            .min_by_key(|x| {
                let pos = cs
                    .iter()
                    .filter(|c| c.coeffs.get(x).is_some_and(|a| *a > 0))
                    .count();
                let neg = cs
                    .iter()
                    .filter(|c| c.coeffs.get(x).is_some_and(|a| *a < 0))
                    .count();
                pos * neg
            })
            .unwrap();
        pending.remove(&x);
        let (with, mut rest): (Vec<_>, Vec<_>) =
            cs.into_iter().partition(|c| c.coeffs.contains_key(&x));
        let (pos, neg): (Vec<_>, Vec<_>) = with.into_iter().partition(|c| c.coeffs[&x] > 0);
        for p in &pos {
            for n in &neg {
                rest.push(combine(p, n, x)?);
            }
        }
        cs = prepare(rest)?;
        if cs.len() > MAX_CONSTRAINTS {
            return Err(FmError::Blowup);
        }
    }
    Ok(cs)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Feasibility {
    Feasible,
    Infeasible,
    /// Rationally feasible but integrality was not established, or the procedure blew up.
    Unknown,
}

/// Integer feasibility. Complete for difference constraints; otherwise only refutations are trusted.
pub fn feasible(cs: Vec<Constraint>) -> Feasibility {
    let exact = cs.iter().all(Constraint::is_difference);
    let vars: BTreeSet<VarId> = cs.iter().flat_map(|c| c.coeffs.keys().copied()).collect();
    match eliminate(cs, &vars) {
        Ok(_) if exact => Feasibility::Feasible,
        Ok(_) => Feasibility::Unknown,
        Err(FmError::Infeasible) => Feasibility::Infeasible,
        Err(FmError::Blowup) => Feasibility::Unknown,
    }
}
