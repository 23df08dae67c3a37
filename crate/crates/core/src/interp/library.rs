use crate::error::{Error, Result};
use crate::logic::{parse_formula, Formula, Term};
use crate::structure::Signature;

use super::Interpretation;

/// Named interpretations; the generic ones adapt to the source signature.
pub const LIBRARY: &[(&str, &str)] = &[
    ("ID", "identity, any signature"),
    ("DIAG", "2-dimensional diagonal copy, any signature"),
    ("SQUARE", "square power A^2, any signature"),
    ("REVERSE", "binary relations reversed, any signature"),
    (
        "QUOT",
        "E-quotient with P = classes of size > 1 (EQ2, M0T, M1P, M1PP)",
    ),
    (
        "QUOT_PE",
        "E-quotient with P = classes meeting Q, constants kept (M1P)",
    ),
    ("PROD", "M1P-shaped structure inside M2TC, dimension 2"),
    ("COLLAPSE3", "tripleton classes collapsed to points (M0T)"),
];

fn p(s: &str) -> Formula {
    parse_formula(s).expect("library formula")
}

fn var(i: usize) -> Term {
    Term::Var(i)
}

/// A library entry; the generic ones need the source signature.
pub fn library(name: &str, sig: &Signature) -> Result<Interpretation> {
    match name.to_ascii_uppercase().as_str() {
        "ID" => Ok(identity(sig)),
        "DIAG" => Ok(diagonal(sig)),
        "SQUARE" => Ok(square(sig)),
        "REVERSE" => Ok(reverse(sig)),
        "QUOT" => Ok(quot()),
        "QUOT_PE" => Ok(quot_pe()),
        "PROD" => Ok(prod()),
        "COLLAPSE3" => Ok(collapse3()),
        _ => Err(Error::invalid(format!(
            "unknown library interpretation `{name}`"
        ))),
    }
}

fn rel_args(arity: usize, dim: usize, coord: usize) -> Vec<Term> {
    (0..arity).map(|q| var(q * dim + coord)).collect()
}

pub fn identity(sig: &Signature) -> Interpretation {
    let mut i = Interpretation::new(
        "ID",
        1,
        Formula::eq(var(0), var(0)),
        Formula::eq(var(0), var(1)),
    );
    for r in sig.relations() {
        i = i.with_relation(
            &r.name,
            r.arity,
            Formula::Atom(r.name.clone(), rel_args(r.arity, 1, 0)),
        );
    }
    for c in sig.constants() {
        i = i.with_constant(c, Formula::eq(var(0), Term::Const(c.clone())));
    }
    i
}

/// Pairs `(x, x)`; equal to the source up to the obvious isomorphism.
pub(crate) fn diagonal(sig: &Signature) -> Interpretation {
    let mut i = Interpretation::new(
        "DIAG",
        2,
        Formula::eq(var(0), var(1)),
        Formula::eq(var(0), var(2)),
    );
    for r in sig.relations() {
        i = i.with_relation(
            &r.name,
            r.arity,
            Formula::Atom(r.name.clone(), rel_args(r.arity, 2, 0)),
        );
    }
    for c in sig.constants() {
        i = i.with_constant(c, Formula::eq(var(0), Term::Const(c.clone())));
    }
    i
}

pub(crate) fn square(sig: &Signature) -> Interpretation {
    let mut i = Interpretation::new(
        "SQUARE",
        2,
        Formula::And(vec![
            Formula::eq(var(0), var(0)),
            Formula::eq(var(1), var(1)),
        ]),
        Formula::And(vec![
            Formula::eq(var(0), var(2)),
            Formula::eq(var(1), var(3)),
        ]),
    );
    for r in sig.relations() {
        let f = Formula::And(
            (0..2)
                .map(|coord| Formula::Atom(r.name.clone(), rel_args(r.arity, 2, coord)))
                .collect(),
        );
        i = i.with_relation(&r.name, r.arity, f);
    }
    for c in sig.constants() {
        let k = Term::Const(c.clone());
        i = i.with_constant(
            c,
            Formula::And(vec![Formula::eq(var(0), k.clone()), Formula::eq(var(1), k)]),
        );
    }
    i
}

pub(crate) fn reverse(sig: &Signature) -> Interpretation {
    let mut i = identity(sig).renamed("REVERSE");
    for r in i.relations.iter_mut().filter(|r| r.arity == 2) {
        r.formula = Formula::Atom(r.name.clone(), vec![var(1), var(0)]);
    }
    i
}

pub(crate) fn quot() -> Interpretation {
    Interpretation::new("QUOT", 1, p("(= x0 x0)"), p("(E x0 x1)")).with_relation(
        "P",
        1,
        p("(exists x1 (and (E x0 x1) (not (= x0 x1))))"),
    )
}

pub(crate) fn quot_pe() -> Interpretation {
    Interpretation::new("QUOT_PE", 1, p("(= x0 x0)"), p("(E x0 x1)"))
        .with_relation("P", 1, p("(exists x1 (and (Q x1) (E x0 x1)))"))
        .with_constant("c0", p("(= x0 c0)"))
        .with_constant("c1", p("(= x0 c1)"))
}

pub(crate) fn prod() -> Interpretation {
    Interpretation::new(
        "PROD",
        2,
        p("(or (= x1 c0) (and (P x0) (= x1 c1)))"),
        p("(and (= x0 x2) (= x1 x3))"),
    )
    .with_relation("E", 2, p("(= x0 x2)"))
    .with_relation("Q", 1, p("(and (P x0) (= x1 c1))"))
    .with_constant("c0", p("(and (= x0 c0) (= x1 c0))"))
    .with_constant("c1", p("(and (= x0 c1) (= x1 c0))"))
}

pub(crate) fn collapse3() -> Interpretation {
    let triple =
        "(exists x2 x3 (and (E x0 x2) (E x0 x3) (not (= x0 x2)) (not (= x0 x3)) (not (= x2 x3))))";
    Interpretation::new(
        "COLLAPSE3",
        1,
        p("(= x0 x0)"),
        p(&format!("(or (= x0 x1) (and (E x0 x1) {triple}))")),
    )
    .with_relation("E", 2, p("(E x0 x1)"))
}
