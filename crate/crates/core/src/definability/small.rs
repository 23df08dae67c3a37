//! Short pp definitions of unary and binary sets over small domains.
//!
//! Starting from the atoms, close under intersection, relational
//! composition, converse, products and projection, remembering the first
//! query found for each set. Sets outside this closure may still be pp
//! definable; callers fall back to the power construction.

use std::collections::{HashMap, HashSet};

use crate::logic::{Formula, Term};
use crate::structure::{Structure, TupleSet};

/// Largest domain handled; binary sets are kept as `n*n`-bit masks.
pub(super) const MAX_DOMAIN: usize = 4;
const MAX_ENTRIES: usize = 4096;

#[derive(Clone, Debug)]
enum Atom {
    Eq(usize, usize),
    Rel(usize, Vec<usize>),
}

/// `∃ x_k … x_{vars-1}` of a conjunction of atoms; `x_0 … x_{k-1}` free.
#[derive(Clone, Debug)]
struct Query {
    arity: usize,
    vars: usize,
    atoms: Vec<Atom>,
}

impl Query {
    /// The atoms with variable `v` sent to `map(v)` for free variables and
    /// to `offset + v - arity` for bound ones.
    fn moved(&self, map: &[usize], offset: usize) -> Vec<Atom> {
        let f = |v: usize| {
            if v < self.arity {
                map[v]
            } else {
                offset + v - self.arity
            }
        };
        self.atoms
            .iter()
            .map(|a| match a {
                Atom::Eq(x, y) => Atom::Eq(f(*x), f(*y)),
                Atom::Rel(r, args) => Atom::Rel(*r, args.iter().map(|&v| f(v)).collect()),
            })
            .collect()
    }

    fn bound(&self) -> usize {
        self.vars - self.arity
    }

    fn formula(&self, names: &[String]) -> Formula {
        let parts = self
            .atoms
            .iter()
            .map(|a| match a {
                Atom::Eq(x, y) => Formula::eq(Term::Var(*x), Term::Var(*y)),
                Atom::Rel(r, args) => Formula::Atom(
                    names[*r].clone(),
                    args.iter().map(|&v| Term::Var(v)).collect(),
                ),
            })
            .collect();
        Formula::exists_all(self.arity..self.vars, Formula::and_of(parts))
    }
}

fn intersect(p: &Query, q: &Query) -> Query {
    let id: Vec<usize> = (0..p.arity).collect();
    let mut atoms = p.atoms.clone();
    atoms.extend(q.moved(&id, p.vars));
    Query {
        arity: p.arity,
        vars: p.vars + q.bound(),
        atoms,
    }
}

/// `∃z p(x0, z) ∧ q(z, x1)`.
fn compose(p: &Query, q: &Query) -> Query {
    let mut atoms = p.moved(&[0, 2], 3);
    atoms.extend(q.moved(&[2, 1], 3 + p.bound()));
    Query {
        arity: 2,
        vars: 3 + p.bound() + q.bound(),
        atoms,
    }
}

fn converse(p: &Query) -> Query {
    Query {
        arity: 2,
        vars: p.vars,
        atoms: p.moved(&[1, 0], 2),
    }
}

fn product(p: &Query, q: &Query) -> Query {
    let mut atoms = p.moved(&[0], 2);
    atoms.extend(q.moved(&[1], 2 + p.bound()));
    Query {
        arity: 2,
        vars: 2 + p.bound() + q.bound(),
        atoms,
    }
}

/// `∃y p(x0, y)`: the second free variable becomes the first bound one.
fn project(p: &Query) -> Query {
    Query {
        arity: 1,
        vars: p.vars,
        atoms: p.atoms.clone(),
    }
}

pub(super) struct SmallDefs {
    n: usize,
    names: Vec<String>,
    found: HashMap<(usize, u64), Query>,
}

impl SmallDefs {
    pub(super) fn new(a: &Structure) -> Option<SmallDefs> {
        let n = a.size();
        if n == 0 || n > MAX_DOMAIN {
            return None;
        }
        let names: Vec<String> = a
            .signature()
            .relations()
            .iter()
            .map(|r| r.name.clone())
            .collect();
        let mut defs = SmallDefs {
            n,
            names,
            found: HashMap::new(),
        };
        let mut unary: Vec<u64> = Vec::new();
        let mut binary: Vec<u64> = Vec::new();
        let add = |defs: &mut SmallDefs,
                   q: Query,
                   mask: u64,
                   unary: &mut Vec<u64>,
                   binary: &mut Vec<u64>| {
            if defs.found.len() < MAX_ENTRIES && !defs.found.contains_key(&(q.arity, mask)) {
                if q.arity == 1 {
                    unary.push(mask)
                } else {
                    binary.push(mask)
                }
                defs.found.insert((q.arity, mask), q);
            }
        };
        let mut base = vec![Query {
            arity: 1,
            vars: 1,
            atoms: vec![Atom::Eq(0, 0)],
        }];
        base.push(Query {
            arity: 2,
            vars: 2,
            atoms: vec![Atom::Eq(0, 1)],
        });
        for (r, sym) in a.signature().relations().iter().enumerate() {
            let q = |arity: usize, vars: usize, args: Vec<usize>| Query {
                arity,
                vars,
                atoms: vec![Atom::Rel(r, args)],
            };
            match sym.arity {
                1 => base.push(q(1, 1, vec![0])),
                2 => base.extend([
                    q(2, 2, vec![0, 1]),
                    q(2, 2, vec![1, 0]),
                    q(1, 1, vec![0, 0]),
                    q(1, 2, vec![0, 1]),
                    q(1, 2, vec![1, 0]),
                ]),
                _ => {}
            }
        }
        for q in base {
            let m = defs.mask(a, &q);
            add(&mut defs, q, m, &mut unary, &mut binary);
        }
        // Rounds of all operations until nothing new appears.
        let (mut u_done, mut b_done) = (0, 0);
        while (u_done < unary.len() || b_done < binary.len()) && defs.found.len() < MAX_ENTRIES {
            let (u_end, b_end) = (unary.len(), binary.len());
            let mut fresh: Vec<(u64, usize, usize, u8)> = Vec::new();
            let mut seen: HashSet<(usize, u64)> = HashSet::new();
            let mut push = |defs: &SmallDefs, mask: u64, i: usize, j: usize, op: u8| {
                let arity = if op == 0 || op == 5 { 1 } else { 2 };
                if !defs.found.contains_key(&(arity, mask)) && seen.insert((arity, mask)) {
                    fresh.push((mask, i, j, op));
                }
            };
            for i in 0..u_end {
                for j in 0..u_end {
                    if i < u_done && j < u_done {
                        continue;
                    }
                    let (p, q) = (unary[i], unary[j]);
                    if i <= j {
                        push(&defs, p & q, i, j, 0);
                    }
                    push(&defs, defs.product(p, q), i, j, 1);
                }
            }
            for i in 0..b_end {
                for j in 0..b_end {
                    if i < b_done && j < b_done {
                        continue;
                    }
                    let (p, q) = (binary[i], binary[j]);
                    if i <= j {
                        push(&defs, p & q, i, j, 2);
                    }
                    push(&defs, defs.compose(p, q), i, j, 3);
                }
                if i >= b_done {
                    push(&defs, defs.converse(binary[i]), i, i, 4);
                    push(&defs, defs.project(binary[i]), i, i, 5);
                }
            }
            drop(push);
            u_done = u_end;
            b_done = b_end;
            for (mask, i, j, op) in fresh {
                let arity = if op == 0 || op == 5 { 1 } else { 2 };
                if defs.found.contains_key(&(arity, mask)) {
                    continue;
                }
                let get = |k: usize, m: u64| &defs.found[&(k, m)];
                let q = match op {
                    0 => intersect(get(1, unary[i]), get(1, unary[j])),
                    1 => product(get(1, unary[i]), get(1, unary[j])),
                    2 => intersect(get(2, binary[i]), get(2, binary[j])),
                    3 => compose(get(2, binary[i]), get(2, binary[j])),
                    4 => converse(get(2, binary[i])),
                    _ => project(get(2, binary[i])),
                };
                add(&mut defs, q, mask, &mut unary, &mut binary);
            }
        }
        Some(defs)
    }

    fn rows(&self, m: u64) -> [u64; MAX_DOMAIN] {
        let n = self.n;
        let mut r = [0u64; MAX_DOMAIN];
        for (x, row) in r.iter_mut().enumerate().take(n) {
            *row = (m >> (x * n)) & ((1 << n) - 1);
        }
        r
    }

    fn product(&self, p: u64, q: u64) -> u64 {
        (0..self.n)
            .filter(|x| p >> x & 1 == 1)
            .fold(0, |acc, x| acc | q << (x * self.n))
    }

    fn compose(&self, p: u64, q: u64) -> u64 {
        let (rp, rq) = (self.rows(p), self.rows(q));
        let mut out = 0;
        for x in 0..self.n {
            let row = (0..self.n)
                .filter(|z| rp[x] >> z & 1 == 1)
                .fold(0, |acc, z| acc | rq[z]);
            out |= row << (x * self.n);
        }
        out
    }

    fn converse(&self, p: u64) -> u64 {
        let n = self.n;
        let mut out = 0;
        for x in 0..n {
            for y in 0..n {
                if p >> (x * n + y) & 1 == 1 {
                    out |= 1 << (y * n + x);
                }
            }
        }
        out
    }

    fn project(&self, p: u64) -> u64 {
        let r = self.rows(p);
        (0..self.n)
            .filter(|&x| r[x] != 0)
            .fold(0, |acc, x| acc | 1 << x)
    }

    fn mask(&self, a: &Structure, q: &Query) -> u64 {
        let n = self.n;
        let mut out = 0u64;
        let mut assignment = vec![0usize; q.vars];
        for code in 0..n.pow(q.arity as u32) {
            let mut c = code;
            for v in (0..q.arity).rev() {
                assignment[v] = c % n;
                c /= n;
            }
            if satisfiable(a, q, &mut assignment, q.arity) {
                out |= 1 << code;
            }
        }
        out
    }

    pub(super) fn lookup(&self, x: &TupleSet) -> Option<Formula> {
        let k = x.arity();
        if !(1..=2).contains(&k) || x.domain() != self.n {
            return None;
        }
        let mut mask = 0u64;
        for t in x.iter() {
            let code = t.iter().fold(0, |acc, &e| acc * self.n + e);
            mask |= 1 << code;
        }
        self.found.get(&(k, mask)).map(|q| q.formula(&self.names))
    }
}

/// Backtracking over the bound variables, checking each atom once its
/// variables are all assigned.
fn satisfiable(a: &Structure, q: &Query, assignment: &mut [usize], next: usize) -> bool {
    let ready = |atom: &Atom| match atom {
        Atom::Eq(x, y) => *x < next && *y < next,
        Atom::Rel(_, args) => args.iter().all(|&v| v < next),
    };
    for atom in q.atoms.iter().filter(|at| ready(at)) {
        let ok = match atom {
            Atom::Eq(x, y) => assignment[*x] == assignment[*y],
            Atom::Rel(r, args) => {
                let t: Vec<usize> = args.iter().map(|&v| assignment[v]).collect();
                a.relation(*r).contains(&t)
            }
        };
        if !ok {
            return false;
        }
    }
    if next == q.vars {
        return true;
    }
    for e in 0..a.size() {
        assignment[next] = e;
        if satisfiable(a, q, assignment, next + 1) {
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{arrow, pureset};
    use crate::logic::Fragment;
    use crate::logic::{classify, definable_set};

    #[test]
    fn every_entry_defines_its_set() {
        for a in [
            arrow().unwrap(),
            pureset(3).unwrap(),
            crate::corpus::cycle(3).unwrap(),
        ] {
            let defs = SmallDefs::new(&a).unwrap();
            for (&(k, mask), q) in &defs.found {
                let f = q.formula(&defs.names);
                assert!(classify(&f).contains(&Fragment::PP), "{f}");
                let set = definable_set(&a, &f, k).unwrap();
                let expect: Vec<_> = crate::structure::TupleIter::new(a.size(), k)
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, t)| t)
                    .collect();
                assert_eq!(set.iter().cloned().collect::<Vec<_>>(), expect, "{f}");
            }
        }
    }

    #[test]
    fn pure_set_has_only_trivial_relations() {
        // Over {} with three elements: the full unary set, equality and the
        // full binary relation.
        let defs = SmallDefs::new(&pureset(3).unwrap()).unwrap();
        assert_eq!(defs.found.len(), 3);
    }
}
