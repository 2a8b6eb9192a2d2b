use std::cmp::Ordering;
use std::collections::BTreeMap;

use plotsynth::solver::encode::EncodeEnv;
use plotsynth::solver::{check_craig, craig_interpolant, is_sat, Formula, LinAtom, SatResult};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const VARS: u32 = 3;
const PROPS: u32 = 2;
const MAX: i128 = 10;

fn bounds(vars: impl IntoIterator<Item = u32>) -> Vec<Formula> {
    vars.into_iter()
        .flat_map(|x| {
            [
                Formula::lin(LinAtom::bound(x, Ordering::Greater, 0)),
                Formula::lin(LinAtom::bound(x, Ordering::Less, MAX)),
            ]
        })
        .collect()
}

fn rel(rng: &mut ChaCha8Rng) -> Ordering {
    [Ordering::Less, Ordering::Equal, Ordering::Greater][rng.gen_range(0..3)]
}

fn diff_atom(rng: &mut ChaCha8Rng, vars: &[u32]) -> Formula {
    let x = vars[rng.gen_range(0..vars.len())];
    let c = rng.gen_range(-3..=MAX + 1);
    let f = if rng.gen_bool(0.5) || vars.len() < 2 {
        Formula::lin(LinAtom::bound(x, rel(rng), c))
    } else {
        let mut y = x;
        while y == x {
            y = vars[rng.gen_range(0..vars.len())];
        }
        Formula::lin(LinAtom::diff(x, y, rel(rng), c - 4))
    };
    if rng.gen_bool(0.3) {
        f.negate()
    } else {
        f
    }
}

fn linear_atom(rng: &mut ChaCha8Rng) -> Formula {
    let coeffs: BTreeMap<u32, i128> = (0..VARS).map(|x| (x, rng.gen_range(-3..=3))).collect();
    let rel = [plotsynth::solver::Rel::Le, plotsynth::solver::Rel::Eq][rng.gen_range(0..2)];
    let f = Formula::lin(LinAtom::new(coeffs, rel, rng.gen_range(-5..=20)));
    if rng.gen_bool(0.3) {
        f.negate()
    } else {
        f
    }
}

fn random_formula(rng: &mut ChaCha8Rng, depth: u32, general: bool) -> Formula {
    if depth == 0 || rng.gen_bool(0.3) {
        return match rng.gen_range(0..10) {
            0..=1 => {
                let p = Formula::prop(rng.gen_range(0..PROPS));
                if rng.gen_bool(0.5) {
                    p.negate()
                } else {
                    p
                }
            }
            2 if general => linear_atom(rng),
            _ => diff_atom(rng, &(0..VARS).collect::<Vec<_>>()),
        };
    }
    let parts: Vec<Formula> = (0..rng.gen_range(2..=3))
        .map(|_| random_formula(rng, depth - 1, general))
        .collect();
    if rng.gen_bool(0.5) {
        Formula::and(parts)
    } else {
        Formula::or(parts)
    }
}

/// Exhaustive search over props and integers in `0..=MAX`.
fn brute_sat(f: &Formula) -> bool {
    let n = (MAX + 1) as usize;
    for bits in 0..(1u32 << PROPS) {
        let props = (0..PROPS).map(|p| (p, bits >> p & 1 == 1)).collect();
        for code in 0..n.pow(VARS) {
            let ints = (0..VARS)
                .map(|x| (x, ((code / n.pow(x)) % n) as i128))
                .collect();
            if f.eval(&props, &ints) == Some(true) {
                return true;
            }
        }
    }
    false
}

pub fn difference_fragment_matches_exhaustive_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let env = EncodeEnv::new();
    let mut disagreements = 0;
    let mut sat = 0;
    for _ in 0..1000 {
        let body = random_formula(&mut rng, 3, false);
        let f = Formula::and(std::iter::once(body).chain(bounds(0..VARS)));
        let expected = brute_sat(&f);
        let got = is_sat(&f, &env);
        sat += expected as usize;
        if got
            != if expected {
                SatResult::Sat
            } else {
                SatResult::Unsat
            }
        {
            disagreements += 1;
        }
    }
    assert_eq!(disagreements, 0);
    assert!(
        sat > 100 && sat < 900,
        "unbalanced sample: {sat} satisfiable"
    );
}

pub fn general_linear_answers_are_never_wrong() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let env = EncodeEnv::new();
    for _ in 0..300 {
        let body = random_formula(&mut rng, 2, true);
        let f = Formula::and(std::iter::once(body).chain(bounds(0..VARS)));
        match is_sat(&f, &env) {
            SatResult::Sat => assert!(brute_sat(&f), "{f:?}"),
            SatResult::Unsat => assert!(!brute_sat(&f), "{f:?}"),
            SatResult::Unknown => {}
        }
    }
}

fn conjunction(rng: &mut ChaCha8Rng, vars: &[u32]) -> Formula {
    let atoms: Vec<Formula> = (0..rng.gen_range(1..=3))
        .map(|_| diff_atom(rng, vars))
        .collect();
    Formula::and(atoms.into_iter().chain(bounds(vars.iter().copied())))
}

pub fn interpolants_meet_craig_conditions() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let env = EncodeEnv::new();
    let mut pairs = 0;
    let mut attempts = 0;
    while pairs < 100 {
        attempts += 1;
        assert!(attempts < 100_000);
        let a = conjunction(&mut rng, &[0, 1]);
        let b = conjunction(&mut rng, &[1, 2]);
        if brute_sat(&Formula::and([a.clone(), b.clone()])) {
            continue;
        }
        pairs += 1;
        let i = craig_interpolant(&a, &b, &env, 3).expect("interpolant");
        assert!(check_craig(&a, &b, &i, &env));
        assert!(i.int_vars().iter().all(|x| *x == 1));
        assert!(!brute_sat(&Formula::and([a.clone(), i.negate()])));
        assert!(!brute_sat(&Formula::and([i.clone(), b.clone()])));
    }
}
