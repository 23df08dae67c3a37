//! Exhaustive and uniformly random formulas of a fragment within bounds.
//!
//! Formulas are ordered by node count, then by production (leaves, negation,
//! conjunction, disjunction, `∃`, `∀`), then by the left subformula, then by
//! the right one. Connectives are binary here.

use rand::Rng;
use serde::Serialize;

use super::{Formula, Fragment, Term};
use crate::error::{Error, Result};
use crate::structure::Signature;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Bounds {
    pub max_vars: usize,
    pub max_nodes: usize,
}

impl Bounds {
    pub fn new(max_vars: usize, max_nodes: usize) -> Result<Self> {
        let b = Bounds {
            max_vars,
            max_nodes,
        };
        b.check()?;
        Ok(b)
    }

    fn check(&self) -> Result<()> {
        if self.max_vars == 0 || self.max_nodes == 0 {
            return Err(Error::invalid(
                "formula bounds need at least one variable and one node",
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Cat {
    Any,
    Pp,
    Matrix,
}

#[derive(Clone, Copy)]
enum Prod {
    Leaf,
    NegLit,
    Not,
    And(Cat),
    Or,
    Exists(Cat),
    Forall,
    Inner,
}

struct Grammar {
    frag: Fragment,
    vars: usize,
    leaves: Vec<Formula>,
    matrix_leaves: Vec<Formula>,
    neg_lits: Vec<Formula>,
    counts: Vec<[u128; 3]>,
}

fn idx(c: Cat) -> usize {
    match c {
        Cat::Any => 0,
        Cat::Pp => 1,
        Cat::Matrix => 2,
    }
}

impl Grammar {
    fn new(sig: &Signature, frag: Fragment, bounds: Bounds) -> Self {
        let mut terms: Vec<Term> = (0..bounds.max_vars).map(Term::Var).collect();
        terms.extend(sig.constants().iter().cloned().map(Term::Const));
        let mut atoms = Vec::new();
        for r in sig.relations() {
            let mut pick = vec![0usize; r.arity];
            loop {
                atoms.push(Formula::Atom(
                    r.name.clone(),
                    pick.iter().map(|&i| terms[i].clone()).collect(),
                ));
                let mut j = r.arity;
                loop {
                    if j == 0 {
                        break;
                    }
                    j -= 1;
                    pick[j] += 1;
                    if pick[j] < terms.len() {
                        break;
                    }
                    pick[j] = 0;
                }
                if pick.iter().all(|&x| x == 0) {
                    break;
                }
            }
        }
        let mut eqs = Vec::new();
        for a in &terms {
            for b in &terms {
                eqs.push(Formula::Eq(a.clone(), b.clone()));
            }
        }
        let mut matrix_leaves = atoms.clone();
        matrix_leaves.extend(eqs.iter().cloned());
        let mut leaves = vec![Formula::True, Formula::False];
        leaves.extend(matrix_leaves.iter().cloned());
        let neg_lits = match frag {
            Fragment::EXIST => matrix_leaves.iter().cloned().map(Formula::not).collect(),
            Fragment::PEX_NEQ | Fragment::POS_NEQ => eqs.into_iter().map(Formula::not).collect(),
            _ => Vec::new(),
        };
        let mut g = Grammar {
            frag,
            vars: bounds.max_vars,
            leaves,
            matrix_leaves,
            neg_lits,
            counts: Vec::new(),
        };
        g.counts.push([0; 3]);
        for s in 1..=bounds.max_nodes {
            g.counts.push([0; 3]);
            // Pp refers to Matrix at the same size.
            for c in [Cat::Matrix, Cat::Pp, Cat::Any] {
                let n = g.prods(c).iter().map(|&p| g.count_in(c, p, s)).sum();
                g.counts[s][idx(c)] = n;
            }
        }
        g
    }

    fn prods(&self, c: Cat) -> Vec<Prod> {
        use Fragment::*;
        match c {
            Cat::Pp => vec![Prod::Inner, Prod::Exists(Cat::Pp)],
            Cat::Matrix => vec![Prod::Leaf, Prod::And(Cat::Matrix)],
            Cat::Any => {
                let mut v = vec![Prod::Leaf];
                match self.frag {
                    QF | FO => v.push(Prod::Not),
                    EXIST | PEX_NEQ | POS_NEQ => v.push(Prod::NegLit),
                    _ => {}
                }
                v.push(Prod::And(Cat::Any));
                v.push(Prod::Or);
                if self.frag != QF {
                    v.push(Prod::Exists(Cat::Any));
                }
                if matches!(self.frag, FO | POS | POS_NEQ) {
                    v.push(Prod::Forall);
                }
                v
            }
        }
    }

    fn count(&self, c: Cat, s: usize) -> u128 {
        if s == 0 || s > self.counts.len() - 1 {
            0
        } else {
            self.counts[s][idx(c)]
        }
    }

    fn leaves_of(&self, c: Cat) -> &[Formula] {
        if c == Cat::Matrix {
            &self.matrix_leaves
        } else {
            &self.leaves
        }
    }

    fn count_prod(&self, p: Prod, s: usize) -> u128 {
        match p {
            Prod::Leaf => unreachable!("leaves are counted per category"),
            Prod::NegLit => (s == 2) as u128 * self.neg_lits.len() as u128,
            Prod::Not => self.count(Cat::Any, s - 1),
            Prod::And(c) => self.binary(c, s),
            Prod::Or => self.binary(Cat::Any, s),
            Prod::Exists(c) => self.vars as u128 * self.count(c, s - 1),
            Prod::Forall => self.vars as u128 * self.count(Cat::Any, s - 1),
            Prod::Inner => self.count(Cat::Matrix, s),
        }
    }

    fn binary(&self, c: Cat, s: usize) -> u128 {
        if s < 3 {
            return 0;
        }
        (1..s - 1)
            .map(|l| self.count(c, l) * self.count(c, s - 1 - l))
            .sum()
    }

    fn count_in(&self, c: Cat, p: Prod, s: usize) -> u128 {
        match p {
            Prod::Leaf => (s == 1) as u128 * self.leaves_of(c).len() as u128,
            _ => self.count_prod(p, s),
        }
    }

    fn gen(&self, c: Cat, s: usize, f: &mut dyn FnMut(Formula) -> bool) -> bool {
        for p in self.prods(c) {
            if self.count_in(c, p, s) == 0 {
                continue;
            }
            let ok = match p {
                Prod::Leaf => self.leaves_of(c).iter().all(|l| f(l.clone())),
                Prod::NegLit => self.neg_lits.iter().all(|l| f(l.clone())),
                Prod::Not => self.gen(Cat::Any, s - 1, &mut |g| f(Formula::not(g))),
                Prod::And(_) | Prod::Or => {
                    let cc = if let Prod::And(cc) = p { cc } else { Cat::Any };
                    (1..s - 1).all(|l| {
                        self.gen(cc, l, &mut |g| {
                            self.gen(cc, s - 1 - l, &mut |h| {
                                let parts = vec![g.clone(), h];
                                f(if matches!(p, Prod::Or) {
                                    Formula::Or(parts)
                                } else {
                                    Formula::And(parts)
                                })
                            })
                        })
                    })
                }
                Prod::Exists(cc) => {
                    (0..self.vars).all(|v| self.gen(cc, s - 1, &mut |g| f(Formula::exists(v, g))))
                }
                Prod::Forall => (0..self.vars)
                    .all(|v| self.gen(Cat::Any, s - 1, &mut |g| f(Formula::forall(v, g)))),
                Prod::Inner => self.gen(Cat::Matrix, s, f),
            };
            if !ok {
                return false;
            }
        }
        true
    }

    fn unrank(&self, c: Cat, s: usize, mut r: u128) -> Formula {
        for p in self.prods(c) {
            let n = self.count_in(c, p, s);
            if r >= n {
                r -= n;
                continue;
            }
            return match p {
                Prod::Leaf => self.leaves_of(c)[r as usize].clone(),
                Prod::NegLit => self.neg_lits[r as usize].clone(),
                Prod::Not => Formula::not(self.unrank(Cat::Any, s - 1, r)),
                Prod::And(_) | Prod::Or => {
                    let cc = if let Prod::And(cc) = p { cc } else { Cat::Any };
                    for l in 1..s - 1 {
                        let (nl, nr) = (self.count(cc, l), self.count(cc, s - 1 - l));
                        if r >= nl * nr {
                            r -= nl * nr;
                            continue;
                        }
                        let parts = vec![
                            self.unrank(cc, l, r / nr),
                            self.unrank(cc, s - 1 - l, r % nr),
                        ];
                        return if matches!(p, Prod::Or) {
                            Formula::Or(parts)
                        } else {
                            Formula::And(parts)
                        };
                    }
                    unreachable!("rank within the binary production")
                }
                Prod::Exists(cc) => {
                    let per = self.count(cc, s - 1);
                    Formula::exists((r / per) as usize, self.unrank(cc, s - 1, r % per))
                }
                Prod::Forall => {
                    let per = self.count(Cat::Any, s - 1);
                    Formula::forall((r / per) as usize, self.unrank(Cat::Any, s - 1, r % per))
                }
                Prod::Inner => self.unrank(Cat::Matrix, s, r),
            };
        }
        unreachable!("rank within the category")
    }
}

fn top(frag: Fragment) -> Cat {
    if frag == Fragment::PP {
        Cat::Pp
    } else {
        Cat::Any
    }
}

/// Visit every formula of `frag` within `bounds`, in the fixed order, until
/// `visit` returns `false`.
pub fn for_each_formula(
    sig: &Signature,
    frag: Fragment,
    bounds: Bounds,
    visit: &mut dyn FnMut(Formula) -> bool,
) -> Result<()> {
    bounds.check()?;
    let g = Grammar::new(sig, frag, bounds);
    for s in 1..=bounds.max_nodes {
        if !g.gen(top(frag), s, visit) {
            break;
        }
    }
    Ok(())
}

pub fn enumerate_formulas(sig: &Signature, frag: Fragment, bounds: Bounds) -> Result<Vec<Formula>> {
    let total = count_formulas(sig, frag, bounds)?;
    crate::limits::check("formula enumeration", total, crate::limits::atom_cap())?;
    let mut out = Vec::with_capacity(total as usize);
    for_each_formula(sig, frag, bounds, &mut |f| {
        out.push(f);
        true
    })?;
    Ok(out)
}

pub fn count_formulas(sig: &Signature, frag: Fragment, bounds: Bounds) -> Result<u128> {
    bounds.check()?;
    let g = Grammar::new(sig, frag, bounds);
    Ok((1..=bounds.max_nodes).map(|s| g.count(top(frag), s)).sum())
}

/// A formula drawn uniformly from all formulas of `frag` within `bounds`.
pub fn sample_formula<R: Rng + ?Sized>(
    sig: &Signature,
    frag: Fragment,
    bounds: Bounds,
    rng: &mut R,
) -> Result<Formula> {
    bounds.check()?;
    let g = Grammar::new(sig, frag, bounds);
    let c = top(frag);
    let total: u128 = (1..=bounds.max_nodes).map(|s| g.count(c, s)).sum();
    if total == 0 {
        return Err(Error::invalid(format!(
            "no {frag} formulas within the bounds"
        )));
    }
    let mut r = rng.gen_range(0..total);
    for s in 1..=bounds.max_nodes {
        let n = g.count(c, s);
        if r < n {
            return Ok(g.unrank(c, s, r));
        }
        r -= n;
    }
    unreachable!("rank within the total")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::classify;
    use rand::SeedableRng;
    use std::collections::HashSet;

    fn sig(rels: &[(&str, usize)], consts: &[&str]) -> Signature {
        Signature::new(
            rels.iter().map(|&(n, a)| (n.to_string(), a)),
            consts.iter().map(|c| c.to_string()),
        )
        .unwrap()
    }

    #[test]
    fn tiny_pp_case() {
        let s = sig(&[("P", 1)], &[]);
        let fs = enumerate_formulas(&s, Fragment::PP, Bounds::new(1, 2).unwrap()).unwrap();
        let text: Vec<String> = fs.iter().map(|f| f.to_string()).collect();
        assert!(text.contains(&"(P x0)".to_string()));
        assert!(text.contains(&"(= x0 x0)".to_string()));
    }

    #[test]
    fn zero_bounds_rejected() {
        let s = sig(&[("P", 1)], &[]);
        assert!(Bounds::new(0, 3).is_err());
        assert!(count_formulas(
            &s,
            Fragment::FO,
            Bounds {
                max_vars: 0,
                max_nodes: 2
            }
        )
        .is_err());
    }

    #[test]
    fn enumeration_matches_count_and_classification() {
        let s = sig(&[("R", 2)], &["c"]);
        for frag in Fragment::ALL {
            let b = Bounds::new(2, 4).unwrap();
            let fs = enumerate_formulas(&s, frag, b).unwrap();
            assert_eq!(
                fs.len() as u128,
                count_formulas(&s, frag, b).unwrap(),
                "{frag}"
            );
            let distinct: HashSet<&Formula> = fs.iter().collect();
            assert_eq!(distinct.len(), fs.len(), "{frag}");
            for f in &fs {
                assert!(classify(f).contains(&frag), "{frag}: {f}");
            }
        }
    }

    #[test]
    fn node_bound_extension_appends() {
        let s = sig(&[("R", 2), ("P", 1)], &[]);
        for frag in Fragment::ALL {
            let short = enumerate_formulas(&s, frag, Bounds::new(2, 3).unwrap()).unwrap();
            let long = enumerate_formulas(&s, frag, Bounds::new(2, 4).unwrap()).unwrap();
            assert_eq!(&long[..short.len()], &short[..], "{frag}");
        }
    }

    #[test]
    fn sampling_reaches_the_grammar() {
        let s = sig(&[("R", 2)], &[]);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let b = Bounds::new(3, 7).unwrap();
        for frag in Fragment::ALL {
            for _ in 0..50 {
                let f = sample_formula(&s, frag, b, &mut rng).unwrap();
                assert!(f.size() <= 7);
                assert!(classify(&f).contains(&frag), "{frag}: {f}");
            }
        }
    }
}
