//! Evaluation over finite structures.
//!
//! Formulas are compiled to a slot-based tree. Variables get slots (free
//! variables `x0..x{k-1}` take slots `0..k`, constants the next ones, every
//! binder a fresh slot), and maximal `∃`/`∧` regions become blocks. A block
//! is solved as a constraint problem: literal conjuncts become table
//! constraints, a conjunct of the form `∀z (z = t1 ∨ … ∨ z = tm)` becomes a
//! covering constraint, and anything else is checked once the block's
//! variables are assigned.

use std::collections::BTreeSet;

use super::{Formula, Term};
use crate::csp::{Csp, Order, NONE};
use crate::error::{Error, Result};
use crate::structure::{Structure, Tuple, TupleSet};

enum Node {
    Const(bool),
    Atom(usize, Vec<usize>),
    Eq(usize, usize),
    Not(Box<Node>),
    Or(Vec<Node>),
    Forall(usize, Box<Node>),
    Block(Box<Block>),
}

#[derive(Default)]
struct Block {
    bound: Vec<usize>,
    outer: Vec<usize>,
    ins: Vec<(usize, Vec<usize>)>,
    not_ins: Vec<(usize, Vec<usize>)>,
    eqs: Vec<(usize, usize)>,
    neqs: Vec<(usize, usize)>,
    cover: Option<Vec<usize>>,
    rest: Vec<Node>,
    falsum: bool,
}

impl Node {
    fn free_slots(&self, out: &mut BTreeSet<usize>) {
        match self {
            Node::Const(_) => {}
            Node::Atom(_, s) => out.extend(s),
            Node::Eq(a, b) => {
                out.insert(*a);
                out.insert(*b);
            }
            Node::Not(g) => g.free_slots(out),
            Node::Or(gs) => gs.iter().for_each(|g| g.free_slots(out)),
            Node::Forall(s, g) => {
                let mut inner = BTreeSet::new();
                g.free_slots(&mut inner);
                inner.remove(s);
                out.extend(inner);
            }
            Node::Block(b) => out.extend(&b.outer),
        }
    }
}

struct Compiler<'a> {
    a: &'a Structure,
    next: usize,
    scope: Vec<(usize, usize)>,
    k: usize,
    const_base: usize,
}

impl Compiler<'_> {
    fn term(&self, t: &Term) -> Result<usize> {
        match t {
            Term::Var(v) => {
                if let Some(&(_, s)) = self.scope.iter().rev().find(|(w, _)| w == v) {
                    Ok(s)
                } else if *v < self.k {
                    Ok(*v)
                } else {
                    Err(Error::Unbound(*v))
                }
            }
            Term::Const(c) => self
                .a
                .signature()
                .constant_index(c)
                .map(|i| self.const_base + i)
                .ok_or_else(|| Error::Signature(format!("unknown constant `{c}`"))),
        }
    }

    fn atom(&self, r: &str, args: &[Term]) -> Result<(usize, Vec<usize>)> {
        let i = self
            .a
            .signature()
            .relation_index(r)
            .ok_or_else(|| Error::Signature(format!("unknown relation `{r}`")))?;
        let arity = self.a.relation(i).arity();
        if args.len() != arity {
            return Err(Error::Arity {
                expected: arity,
                found: args.len(),
            });
        }
        Ok((i, args.iter().map(|t| self.term(t)).collect::<Result<_>>()?))
    }

    fn fresh(&mut self) -> usize {
        let s = self.next;
        self.next += 1;
        s
    }

    fn node(&mut self, f: &Formula) -> Result<Node> {
        Ok(match f {
            Formula::True => Node::Const(true),
            Formula::False => Node::Const(false),
            Formula::Atom(r, args) => {
                let (i, s) = self.atom(r, args)?;
                Node::Atom(i, s)
            }
            Formula::Eq(a, b) => Node::Eq(self.term(a)?, self.term(b)?),
            Formula::Not(g) => Node::Not(Box::new(self.node(g)?)),
            Formula::Or(gs) => Node::Or(gs.iter().map(|g| self.node(g)).collect::<Result<_>>()?),
            Formula::Forall(v, g) => {
                let s = self.fresh();
                self.scope.push((*v, s));
                let body = self.node(g);
                self.scope.pop();
                Node::Forall(s, Box::new(body?))
            }
            Formula::And(_) | Formula::Exists(..) => {
                let mut b = Block::default();
                let depth = self.scope.len();
                let r = self.gather(f, &mut b);
                self.scope.truncate(depth);
                r?;
                let mut used = BTreeSet::new();
                for (_, s) in b.ins.iter().chain(&b.not_ins) {
                    used.extend(s);
                }
                for &(x, y) in b.eqs.iter().chain(&b.neqs) {
                    used.insert(x);
                    used.insert(y);
                }
                if let Some(c) = &b.cover {
                    used.extend(c);
                }
                for r in &b.rest {
                    r.free_slots(&mut used);
                }
                b.outer = used.into_iter().filter(|s| !b.bound.contains(s)).collect();
                Node::Block(Box::new(b))
            }
        })
    }

    fn gather(&mut self, f: &Formula, b: &mut Block) -> Result<()> {
        match f {
            Formula::Exists(v, g) => {
                let s = self.fresh();
                b.bound.push(s);
                self.scope.push((*v, s));
                self.gather(g, b)
            }
            Formula::And(gs) => gs.iter().try_for_each(|g| self.gather(g, b)),
            Formula::True => Ok(()),
            Formula::False => {
                b.falsum = true;
                Ok(())
            }
            Formula::Atom(r, args) => {
                b.ins.push(self.atom(r, args)?);
                Ok(())
            }
            Formula::Eq(x, y) => {
                b.eqs.push((self.term(x)?, self.term(y)?));
                Ok(())
            }
            Formula::Not(g) => match g.as_ref() {
                Formula::Atom(r, args) => {
                    b.not_ins.push(self.atom(r, args)?);
                    Ok(())
                }
                Formula::Eq(x, y) => {
                    b.neqs.push((self.term(x)?, self.term(y)?));
                    Ok(())
                }
                Formula::True => {
                    b.falsum = true;
                    Ok(())
                }
                Formula::False => Ok(()),
                _ => {
                    let n = self.node(f)?;
                    b.rest.push(n);
                    Ok(())
                }
            },
            Formula::Forall(z, g) if b.cover.is_none() => match self.cover_pattern(*z, g)? {
                Some(slots) => {
                    b.cover = Some(slots);
                    Ok(())
                }
                None => {
                    let n = self.node(f)?;
                    b.rest.push(n);
                    Ok(())
                }
            },
            _ => {
                let n = self.node(f)?;
                b.rest.push(n);
                Ok(())
            }
        }
    }

    /// `∀z (z = t1 ∨ … ∨ z = tm)` with no `ti` equal to `z`.
    fn cover_pattern(&self, z: usize, g: &Formula) -> Result<Option<Vec<usize>>> {
        let Formula::Or(ds) = g else { return Ok(None) };
        if ds.is_empty() {
            return Ok(None);
        }
        let zt = Term::Var(z);
        let mut others = Vec::with_capacity(ds.len());
        for d in ds {
            match d {
                Formula::Eq(x, y) if *x == zt && *y != zt => others.push(y),
                Formula::Eq(x, y) if *y == zt && *x != zt => others.push(x),
                _ => return Ok(None),
            }
        }
        others
            .into_iter()
            .map(|t| self.term(t))
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }
}

/// A formula compiled against a structure, with free variables `x0..x{k-1}`.
pub struct Compiled<'a> {
    a: &'a Structure,
    root: Node,
    k: usize,
    slots: usize,
}

impl<'a> Compiled<'a> {
    pub fn new(a: &'a Structure, f: &Formula, k: usize) -> Result<Self> {
        let c = a.signature().constants().len();
        let mut comp = Compiler {
            a,
            next: k + c,
            scope: Vec::new(),
            k,
            const_base: k,
        };
        let root = comp.node(f)?;
        Ok(Compiled {
            a,
            root,
            k,
            slots: comp.next,
        })
    }

    fn env(&self) -> Vec<usize> {
        let mut env = vec![NONE; self.slots];
        for (i, &c) in self.a.constants().iter().enumerate() {
            env[self.k + i] = c;
        }
        env
    }

    pub fn eval(&self, assignment: &[usize]) -> Result<bool> {
        if assignment.len() != self.k {
            return Err(Error::Arity {
                expected: self.k,
                found: assignment.len(),
            });
        }
        if let Some(&x) = assignment.iter().find(|&&x| x >= self.a.size()) {
            return Err(Error::invalid(format!("element {x} not in the domain")));
        }
        let mut env = self.env();
        env[..self.k].copy_from_slice(assignment);
        Ok(self.eval_node(&self.root, &mut env))
    }

    /// All satisfying `k`-tuples.
    pub fn set(&self) -> TupleSet {
        let mut out: BTreeSet<Tuple> = BTreeSet::new();
        let mut env = self.env();
        let free: Vec<usize> = (0..self.k).collect();
        let roots: Vec<&Node> = match &self.root {
            Node::Or(ds) => ds.iter().collect(),
            r => vec![r],
        };
        for r in roots {
            match r {
                Node::Block(b) => {
                    self.solve_block(b, &free, &mut env, &mut |t| {
                        out.insert(t.to_vec());
                        true
                    });
                }
                _ => {
                    for t in self.a.all_tuples(self.k) {
                        if out.contains(&t) {
                            continue;
                        }
                        env[..self.k].copy_from_slice(&t);
                        if self.eval_node(r, &mut env) {
                            out.insert(t);
                        }
                    }
                }
            }
        }
        TupleSet::from_btree(self.k, self.a.size(), out)
    }

    fn eval_node(&self, n: &Node, env: &mut Vec<usize>) -> bool {
        match n {
            Node::Const(b) => *b,
            Node::Atom(r, s) => self.holds(*r, s, env),
            Node::Eq(x, y) => env[*x] == env[*y],
            Node::Not(g) => !self.eval_node(g, env),
            Node::Or(gs) => gs.iter().any(|g| self.eval_node(g, env)),
            Node::Forall(s, g) => {
                let ok = (0..self.a.size()).all(|v| {
                    env[*s] = v;
                    self.eval_node(g, env)
                });
                env[*s] = NONE;
                ok
            }
            Node::Block(b) => {
                if b.bound.is_empty() {
                    self.block_direct(b, env)
                } else {
                    let mut found = false;
                    self.solve_block(b, &[], env, &mut |_| {
                        found = true;
                        false
                    });
                    found
                }
            }
        }
    }

    fn holds(&self, r: usize, s: &[usize], env: &[usize]) -> bool {
        let t: Tuple = s.iter().map(|&x| env[x]).collect();
        self.a.relation(r).contains(&t)
    }

    fn block_direct(&self, b: &Block, env: &mut Vec<usize>) -> bool {
        !b.falsum
            && b.ins.iter().all(|(r, s)| self.holds(*r, s, env))
            && b.not_ins.iter().all(|(r, s)| !self.holds(*r, s, env))
            && b.eqs.iter().all(|&(x, y)| env[x] == env[y])
            && b.neqs.iter().all(|&(x, y)| env[x] != env[y])
            && b.cover.as_ref().is_none_or(|c| {
                let mut seen = vec![false; self.a.size()];
                c.iter().for_each(|&s| seen[env[s]] = true);
                seen.iter().all(|&x| x)
            })
            && b.rest.iter().all(|r| self.eval_node(r, env))
    }

    /// Solve a block. `enumerated` slots are left open and reported through
    /// `out` (one call per distinct value combination); all other outer slots
    /// are read from `env`.
    fn solve_block(
        &self,
        b: &Block,
        enumerated: &[usize],
        env: &mut Vec<usize>,
        out: &mut dyn FnMut(&[usize]) -> bool,
    ) {
        if b.falsum {
            return;
        }
        let mut layout: Vec<usize> = enumerated.to_vec();
        layout.extend(b.outer.iter().filter(|s| !enumerated.contains(s)));
        let nfixed_end = layout.len();
        layout.extend(&b.bound);
        let mut local = vec![NONE; self.slots];
        for (i, &s) in layout.iter().enumerate() {
            local[s] = i;
        }
        let mut csp = Csp::new(layout.len(), self.a.size());
        for (i, &s) in layout
            .iter()
            .enumerate()
            .take(nfixed_end)
            .skip(enumerated.len())
        {
            csp.fix(i, env[s]);
        }
        let map = |s: &Vec<usize>| s.iter().map(|&x| local[x]).collect::<Vec<_>>();
        for (r, s) in &b.ins {
            csp.add_in(map(s), self.a.relation(*r));
        }
        for (r, s) in &b.not_ins {
            csp.add_not_in(map(s), self.a.relation(*r));
        }
        for &(x, y) in &b.eqs {
            csp.add_eq(local[x], local[y]);
        }
        for &(x, y) in &b.neqs {
            csp.add_neq(local[x], local[y]);
        }
        if let Some(c) = &b.cover {
            csp.set_cover(&map(c));
        }
        let nenum = enumerated.len();
        let rest = &b.rest;
        let mut leaf = |vals: &[usize]| {
            if rest.is_empty() {
                return true;
            }
            let mut inner = env.clone();
            for (i, &s) in layout.iter().enumerate() {
                inner[s] = vals[i];
            }
            rest.iter().all(|r| self.eval_node(r, &mut inner))
        };
        csp.run(
            nenum,
            Order::Lex,
            &mut leaf,
            &mut |vals| out(&vals[..nenum]),
        );
    }
}

/// `A ⊨ φ[x_i ↦ assignment[i]]`.
pub fn evaluate(a: &Structure, f: &Formula, assignment: &[usize]) -> Result<bool> {
    Compiled::new(a, f, assignment.len())?.eval(assignment)
}

/// `{ ā ∈ A^k : A ⊨ φ(ā) }`; free variables must lie among `x0..x{k-1}`.
pub fn definable_set(a: &Structure, f: &Formula, k: usize) -> Result<TupleSet> {
    Ok(Compiled::new(a, f, k)?.set())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{arrow, eq2, pureset};
    use crate::logic::parse_formula;

    fn p(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    #[test]
    fn arrow_successor() {
        let a = arrow().unwrap();
        let f = p("(exists x1 (R x0 x1))");
        assert!(evaluate(&a, &f, &[0]).unwrap());
        assert!(!evaluate(&a, &f, &[1]).unwrap());
    }

    #[test]
    fn doubleton_members() {
        let a = eq2(1, 1).unwrap();
        let f = p("(exists x1 (and (E x0 x1) (not (= x0 x1))))");
        assert!(!evaluate(&a, &f, &[0]).unwrap());
        assert!(evaluate(&a, &f, &[1]).unwrap());
        let s = definable_set(&a, &f, 1).unwrap();
        assert_eq!(s.to_string(), "{(1),(2)}");
    }

    #[test]
    fn trivial_sets() {
        let a = pureset(3).unwrap();
        assert_eq!(definable_set(&a, &Formula::True, 1).unwrap().len(), 3);
        assert!(definable_set(&a, &p("(and (= x0 x0) bot)"), 1)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn unbound_variable_is_an_error() {
        let a = arrow().unwrap();
        assert!(matches!(
            definable_set(&a, &p("(R x0 x1)"), 1),
            Err(Error::Unbound(1))
        ));
        assert!(matches!(
            evaluate(&a, &p("(R x0)"), &[0]),
            Err(Error::Arity { .. })
        ));
    }

    #[test]
    fn block_and_fallback_paths_agree() {
        let a = eq2(1, 2).unwrap();
        // The same set through a block and through an explicit negation.
        let f = p("(exists x1 (and (E x0 x1) (not (= x0 x1))))");
        let g = p("(not (forall x1 (or (not (E x0 x1)) (= x0 x1))))");
        assert_eq!(
            definable_set(&a, &f, 1).unwrap(),
            definable_set(&a, &g, 1).unwrap()
        );
    }

    #[test]
    fn covering_conjunct() {
        let a = pureset(3).unwrap();
        // x0, x1, x2 pairwise cover the domain: exactly the permutations.
        let f = p("(forall x3 (or (= x3 x0) (= x3 x1) (= x3 x2)))");
        assert_eq!(definable_set(&a, &f, 3).unwrap().len(), 6);
        let g = p("(and (forall x3 (or (= x3 x0) (= x3 x1) (= x3 x2))))");
        assert_eq!(definable_set(&a, &g, 3).unwrap().len(), 6);
    }

    #[test]
    fn shadowed_variable() {
        let a = arrow().unwrap();
        // The inner x0 is bound; the outer x0 is free.
        let f = p("(and (= x0 x0) (exists x0 (R x0 x0)))");
        assert!(definable_set(&a, &f, 1).unwrap().is_empty());
    }
}
