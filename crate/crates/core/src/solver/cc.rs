//! Congruence closure over the object terms of an encoding environment.

use std::collections::HashMap;

use super::encode::{EncodeEnv, IntSym, ObjTerm};
use super::formula::{ObjId, VarId};

pub struct Congruence {
    parent: Vec<usize>,
}

impl Congruence {
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut y = x;
        while self.parent[y] != r {
            let next = self.parent[y];
            self.parent[y] = r;
            y = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        true
    }

    /// Closes `eqs` under congruence of the environment's function applications.
    pub fn close(env: &EncodeEnv, eqs: &[(ObjId, ObjId)]) -> Congruence {
        let n = env.num_objs();
        let mut cc = Congruence {
            parent: (0..n).collect(),
        };
        for (a, b) in eqs {
            cc.union(*a as usize, *b as usize);
        }
        if eqs.is_empty() {
            return cc;
        }
        loop {
            let mut changed = false;
            let mut sigs: HashMap<(&'static str, Vec<usize>), usize> = HashMap::new();
            for i in 0..n {
                if let Some(ObjTerm::App(f, args)) = env.obj(i as ObjId) {
                    let key = (
                        *f,
                        args.iter()
                            .map(|a| cc.find(*a as usize))
                            .collect::<Vec<_>>(),
                    );
                    match sigs.get(&key) {
                        Some(&j) => changed |= cc.union(i, j),
                        None => {
                            sigs.insert(key, i);
                        }
                    }
                }
            }
            if !changed {
                return cc;
            }
        }
    }

    pub fn same(&mut self, a: ObjId, b: ObjId) -> bool {
        self.find(a as usize) == self.find(b as usize)
    }

    /// Pairs of integer variables forced equal because their applications are congruent.
    pub fn int_equalities(&mut self, env: &EncodeEnv, vars: &[VarId]) -> Vec<(VarId, VarId)> {
        let mut seen: HashMap<(&'static str, usize), VarId> = HashMap::new();
        let mut out = Vec::new();
        for &x in vars {
            if let Some(IntSym::App(f, o)) = env.int_sym(x) {
                let key = (*f, self.find(*o as usize));
                match seen.get(&key) {
                    Some(&y) => out.push((y, x)),
                    None => {
                        seen.insert(key, x);
                    }
                }
            }
        }
        out
    }
}
