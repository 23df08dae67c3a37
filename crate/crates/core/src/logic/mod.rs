//! First-order formulas over a relational signature with constants.

mod diagram;
mod enumerate;
mod eval;
mod parse;

pub use diagram::{canonical_diagram, DiagramFlavor};
pub use enumerate::{count_formulas, enumerate_formulas, for_each_formula, sample_formula, Bounds};
pub use eval::{definable_set, evaluate, Compiled};
pub use parse::parse_formula;

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::structure::Signature;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(usize),
    Const(String),
}

pub fn var(i: usize) -> Term {
    Term::Var(i)
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(i) => write!(f, "x{i}"),
            Term::Const(c) => f.write_str(c),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Atom(String, Vec<Term>),
    Eq(Term, Term),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Exists(usize, Box<Formula>),
    Forall(usize, Box<Formula>),
}

impl Formula {
    pub fn atom(rel: &str, args: impl IntoIterator<Item = Term>) -> Formula {
        Formula::Atom(rel.to_string(), args.into_iter().collect())
    }

    pub fn eq(a: Term, b: Term) -> Formula {
        Formula::Eq(a, b)
    }

    pub fn neq(a: Term, b: Term) -> Formula {
        Formula::Not(Box::new(Formula::Eq(a, b)))
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn exists(v: usize, f: Formula) -> Formula {
        Formula::Exists(v, Box::new(f))
    }

    pub fn forall(v: usize, f: Formula) -> Formula {
        Formula::Forall(v, Box::new(f))
    }

    /// `∃v1 ∃v2 … f`, outermost first.
    pub fn exists_all(vars: impl IntoIterator<Item = usize>, f: Formula) -> Formula {
        let vars: Vec<usize> = vars.into_iter().collect();
        vars.into_iter()
            .rev()
            .fold(f, |acc, v| Formula::exists(v, acc))
    }

    /// Conjunction, without a wrapper for a single conjunct.
    pub fn and_of(mut parts: Vec<Formula>) -> Formula {
        if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Formula::And(parts)
        }
    }

    /// Disjunction; `⊥` when empty, no wrapper for a single disjunct.
    pub fn or_of(mut parts: Vec<Formula>) -> Formula {
        match parts.len() {
            0 => Formula::False,
            1 => parts.pop().unwrap(),
            _ => Formula::Or(parts),
        }
    }

    /// Number of nodes; atoms and equalities count one each.
    pub fn size(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Atom(..) | Formula::Eq(..) => 1,
            Formula::Not(f) | Formula::Exists(_, f) | Formula::Forall(_, f) => 1 + f.size(),
            Formula::And(fs) | Formula::Or(fs) => 1 + fs.iter().map(Formula::size).sum::<usize>(),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<usize>, out: &mut BTreeSet<usize>) {
        let mut term = |t: &Term, bound: &Vec<usize>| {
            if let Term::Var(v) = t {
                if !bound.contains(v) {
                    out.insert(*v);
                }
            }
        };
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(_, args) => args.iter().for_each(|t| term(t, bound)),
            Formula::Eq(a, b) => {
                term(a, bound);
                term(b, bound);
            }
            Formula::Not(f) => f.collect_free(bound, out),
            Formula::And(fs) | Formula::Or(fs) => {
                fs.iter().for_each(|f| f.collect_free(bound, out))
            }
            Formula::Exists(v, f) | Formula::Forall(v, f) => {
                bound.push(*v);
                f.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// Largest variable index occurring anywhere (free or bound).
    pub fn max_var(&self) -> Option<usize> {
        let t = |t: &Term| match t {
            Term::Var(v) => Some(*v),
            Term::Const(_) => None,
        };
        match self {
            Formula::True | Formula::False => None,
            Formula::Atom(_, args) => args.iter().filter_map(t).max(),
            Formula::Eq(a, b) => t(a).max(t(b)),
            Formula::Not(f) => f.max_var(),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().filter_map(Formula::max_var).max(),
            Formula::Exists(v, f) | Formula::Forall(v, f) => Some(*v).max(f.max_var()),
        }
    }

    /// Relation symbols exist with matching arities and constants exist.
    pub fn check_signature(&self, sig: &Signature) -> Result<()> {
        let term = |t: &Term| match t {
            Term::Const(c) if sig.constant_index(c).is_none() => {
                Err(Error::Signature(format!("unknown constant `{c}`")))
            }
            _ => Ok(()),
        };
        match self {
            Formula::True | Formula::False => Ok(()),
            Formula::Atom(r, args) => {
                let i = sig
                    .relation_index(r)
                    .ok_or_else(|| Error::Signature(format!("unknown relation `{r}`")))?;
                let arity = sig.relations()[i].arity;
                if args.len() != arity {
                    return Err(Error::Arity {
                        expected: arity,
                        found: args.len(),
                    });
                }
                args.iter().try_for_each(term)
            }
            Formula::Eq(a, b) => term(a).and(term(b)),
            Formula::Not(f) | Formula::Exists(_, f) | Formula::Forall(_, f) => {
                f.check_signature(sig)
            }
            Formula::And(fs) | Formula::Or(fs) => {
                fs.iter().try_for_each(|f| f.check_signature(sig))
            }
        }
    }

    /// Rename variables: free ones through `free`, bound ones to fresh
    /// indices drawn from `next`.
    pub(crate) fn rename(
        &self,
        free: &dyn Fn(usize) -> Option<usize>,
        next: &mut usize,
    ) -> Result<Formula> {
        self.rename_in(free, &mut Vec::new(), next)
    }

    fn rename_in(
        &self,
        free: &dyn Fn(usize) -> Option<usize>,
        scope: &mut Vec<(usize, usize)>,
        next: &mut usize,
    ) -> Result<Formula> {
        let term = |t: &Term, scope: &Vec<(usize, usize)>| -> Result<Term> {
            match t {
                Term::Var(v) => {
                    if let Some(&(_, to)) = scope.iter().rev().find(|(from, _)| from == v) {
                        Ok(Term::Var(to))
                    } else {
                        free(*v).map(Term::Var).ok_or(Error::Unbound(*v))
                    }
                }
                Term::Const(c) => Ok(Term::Const(c.clone())),
            }
        };
        Ok(match self {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Atom(r, args) => Formula::Atom(
                r.clone(),
                args.iter().map(|t| term(t, scope)).collect::<Result<_>>()?,
            ),
            Formula::Eq(a, b) => Formula::Eq(term(a, scope)?, term(b, scope)?),
            Formula::Not(f) => Formula::not(f.rename_in(free, scope, next)?),
            Formula::And(fs) => Formula::And(
                fs.iter()
                    .map(|f| f.rename_in(free, scope, next))
                    .collect::<Result<_>>()?,
            ),
            Formula::Or(fs) => Formula::Or(
                fs.iter()
                    .map(|f| f.rename_in(free, scope, next))
                    .collect::<Result<_>>()?,
            ),
            Formula::Exists(v, f) | Formula::Forall(v, f) => {
                let to = *next;
                *next += 1;
                scope.push((*v, to));
                let body = f.rename_in(free, scope, next)?;
                scope.pop();
                if matches!(self, Formula::Exists(..)) {
                    Formula::exists(to, body)
                } else {
                    Formula::forall(to, body)
                }
            }
        })
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => f.write_str("top"),
            Formula::False => f.write_str("bot"),
            Formula::Atom(r, args) => {
                write!(f, "({r}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                f.write_str(")")
            }
            Formula::Eq(a, b) => write!(f, "(= {a} {b})"),
            Formula::Not(g) => write!(f, "(not {g})"),
            Formula::And(gs) | Formula::Or(gs) => {
                f.write_str(if matches!(self, Formula::And(_)) {
                    "(and"
                } else {
                    "(or"
                })?;
                for g in gs {
                    write!(f, " {g}")?;
                }
                f.write_str(")")
            }
            Formula::Exists(v, g) => write!(f, "(exists x{v} {g})"),
            Formula::Forall(v, g) => write!(f, "(forall x{v} {g})"),
        }
    }
}

impl Serialize for Formula {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[allow(non_camel_case_types)]
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Fragment {
    QF,
    EXIST,
    POS,
    PEX,
    PEX_NEQ,
    POS_NEQ,
    PP,
    FO,
}

impl Fragment {
    pub const ALL: [Fragment; 8] = [
        Fragment::QF,
        Fragment::EXIST,
        Fragment::POS,
        Fragment::PEX,
        Fragment::PEX_NEQ,
        Fragment::POS_NEQ,
        Fragment::PP,
        Fragment::FO,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Fragment::QF => "QF",
            Fragment::EXIST => "EXIST",
            Fragment::POS => "POS",
            Fragment::PEX => "PEX",
            Fragment::PEX_NEQ => "PEX_NEQ",
            Fragment::POS_NEQ => "POS_NEQ",
            Fragment::PP => "PP",
            Fragment::FO => "FO",
        }
    }

    pub fn parse(s: &str) -> Result<Fragment> {
        let up = s.to_ascii_uppercase().replace('-', "_");
        Fragment::ALL
            .into_iter()
            .find(|f| f.name() == up)
            .ok_or_else(|| Error::invalid(format!("unknown fragment `{s}`")))
    }

    /// The fixed order PP ≤ PEX ≤ PEX_NEQ ≤ EXIST ≤ FO, PEX ≤ POS ≤ POS_NEQ ≤ FO
    /// (QF sits below EXIST and FO only).
    pub fn leq(self, other: Fragment) -> bool {
        use Fragment::*;
        if self == other || other == FO {
            return true;
        }
        matches!(
            (self, other),
            (PP, PEX | PEX_NEQ | EXIST | POS | POS_NEQ)
                | (PEX, PEX_NEQ | EXIST | POS | POS_NEQ)
                | (PEX_NEQ, EXIST)
                | (POS, POS_NEQ)
                | (QF, EXIST)
        )
    }
}

impl fmt::Display for Fragment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Neg {
    None,
    EqOnly,
    Literals,
    Any,
}

/// Negation discipline and quantifier use of a formula.
fn shape(f: &Formula) -> (Neg, bool, bool) {
    fn go(f: &Formula, neg: &mut Neg, ex: &mut bool, all: &mut bool) {
        let bump = |neg: &mut Neg, level: Neg| {
            let rank = |n: Neg| match n {
                Neg::None => 0,
                Neg::EqOnly => 1,
                Neg::Literals => 2,
                Neg::Any => 3,
            };
            if rank(level) > rank(*neg) {
                *neg = level;
            }
        };
        match f {
            Formula::True | Formula::False | Formula::Atom(..) | Formula::Eq(..) => {}
            Formula::Not(g) => {
                match g.as_ref() {
                    Formula::Eq(..) => bump(neg, Neg::EqOnly),
                    Formula::Atom(..) => bump(neg, Neg::Literals),
                    _ => bump(neg, Neg::Any),
                }
                go(g, neg, ex, all);
            }
            Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| go(g, neg, ex, all)),
            Formula::Exists(_, g) => {
                *ex = true;
                go(g, neg, ex, all);
            }
            Formula::Forall(_, g) => {
                *all = true;
                go(g, neg, ex, all);
            }
        }
    }
    let (mut neg, mut ex, mut all) = (Neg::None, false, false);
    go(f, &mut neg, &mut ex, &mut all);
    (neg, ex, all)
}

fn is_pp(f: &Formula) -> bool {
    fn matrix(f: &Formula) -> bool {
        match f {
            Formula::Atom(..) | Formula::Eq(..) => true,
            Formula::And(gs) => !gs.is_empty() && gs.iter().all(matrix),
            _ => false,
        }
    }
    match f {
        Formula::Exists(_, g) => is_pp(g),
        other => matrix(other),
    }
}

/// The fragments `φ` syntactically belongs to.
pub fn classify(f: &Formula) -> BTreeSet<Fragment> {
    let (neg, ex, all) = shape(f);
    let mut out = BTreeSet::from([Fragment::FO]);
    let quantifier_free = !ex && !all;
    if quantifier_free {
        out.insert(Fragment::QF);
    }
    if !all && neg != Neg::Any {
        out.insert(Fragment::EXIST);
    }
    if neg == Neg::None {
        out.insert(Fragment::POS);
        if !all {
            out.insert(Fragment::PEX);
        }
    }
    if matches!(neg, Neg::None | Neg::EqOnly) {
        out.insert(Fragment::POS_NEQ);
        if !all {
            out.insert(Fragment::PEX_NEQ);
        }
    }
    if is_pp(f) {
        out.insert(Fragment::PP);
    }
    out
}

pub fn in_fragment(f: &Formula, frag: Fragment) -> bool {
    classify(f).contains(&frag)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    #[test]
    fn fragment_order_is_a_partial_order() {
        for a in Fragment::ALL {
            assert!(a.leq(a));
            for b in Fragment::ALL {
                if a != b && a.leq(b) {
                    assert!(!b.leq(a), "{a} {b}");
                }
                for c in Fragment::ALL {
                    if a.leq(b) && b.leq(c) {
                        assert!(a.leq(c), "{a} {b} {c}");
                    }
                }
            }
        }
    }

    #[test]
    fn classification_respects_the_order() {
        for s in [
            "(exists x1 (and (E x0 x1) (not (= x0 x1))))",
            "(exists x1 (and (Q x1) (E x0 x1)))",
            "bot",
            "top",
            "(forall x1 (or (= x0 x1) (E x0 x1)))",
            "(not (E x0 x1))",
            "(not (not (E x0 x1)))",
        ] {
            let c = classify(&p(s));
            for a in &c {
                for b in Fragment::ALL {
                    if a.leq(b) && *a != Fragment::QF {
                        assert!(c.contains(&b), "{s}: {a} but not {b}");
                    }
                }
            }
        }
    }

    #[test]
    fn negation_of_verum_is_not_existential() {
        let c = classify(&p("(not top)"));
        assert!(!c.contains(&Fragment::EXIST));
        assert!(c.contains(&Fragment::QF));
    }

    #[test]
    fn rename_avoids_capture() {
        let f = p("(exists x1 (E x0 x1))");
        let mut next = 10;
        let g = f.rename(&|v| (v == 0).then_some(1), &mut next).unwrap();
        assert_eq!(g.to_string(), "(exists x10 (E x1 x10))");
    }
}
