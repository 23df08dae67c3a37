//! Parameterised families of example structures.
//!
//! Layouts are fixed so that quotient interpretations land exactly on the
//! family members: singleton classes come first, then doubletons
//! `{s+2j, s+2j+1}`, then tripletons.

use crate::error::{Error, Result};
use crate::structure::{Structure, Tuple};

pub const FAMILIES: &[(&str, &str)] = &[
    ("PURESET", "n"),
    ("EQ2", "s d"),
    ("M0T", "a b c"),
    ("M1P", "s d"),
    ("M1PP", "s d"),
    ("M2T", "p q"),
    ("M2TC", "p q"),
    ("ARROW", ""),
    ("CYCLE", "n"),
];

pub fn build_corpus(family: &str, params: &[usize]) -> Result<Structure> {
    let want = |k: usize| -> Result<()> {
        if params.len() == k {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "{family} takes {k} parameters, got {}",
                params.len()
            )))
        }
    };
    match family.to_ascii_uppercase().as_str() {
        "PURESET" => {
            want(1)?;
            pureset(params[0])
        }
        "EQ2" => {
            want(2)?;
            eq2(params[0], params[1])
        }
        "M0T" => {
            want(3)?;
            m0t(params[0], params[1], params[2])
        }
        "M1P" => {
            want(2)?;
            m1p(params[0], params[1])
        }
        "M1PP" => {
            want(2)?;
            m1pp(params[0], params[1])
        }
        "M2T" => {
            want(2)?;
            m2t(params[0], params[1])
        }
        "M2TC" => {
            want(2)?;
            m2tc(params[0], params[1])
        }
        "ARROW" => {
            want(0)?;
            arrow()
        }
        "CYCLE" => {
            want(1)?;
            cycle(params[0])
        }
        _ => Err(Error::invalid(format!("unknown family `{family}`"))),
    }
}

fn nonempty(family: &str, n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::invalid(format!(
            "{family}: parameters give an empty domain"
        )))
    } else {
        Ok(())
    }
}

/// Reflexive-symmetric closure inside the given blocks.
fn equivalence(blocks: &[Vec<usize>]) -> Vec<Tuple> {
    let mut e = Vec::new();
    for b in blocks {
        for &x in b {
            for &y in b {
                e.push(vec![x, y]);
            }
        }
    }
    e
}

/// Blocks of sizes 1 (×a), 2 (×b), 3 (×c), laid out consecutively.
fn blocks(a: usize, b: usize, c: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut next = 0;
    for (count, width) in [(a, 1), (b, 2), (c, 3)] {
        for _ in 0..count {
            out.push((next..next + width).collect());
            next += width;
        }
    }
    out
}

pub fn pureset(n: usize) -> Result<Structure> {
    nonempty("PURESET", n)?;
    Structure::builder(format!("PURESET({n})"), n).build()
}

pub fn eq2(s: usize, d: usize) -> Result<Structure> {
    nonempty("EQ2", s + 2 * d)?;
    Structure::builder(format!("EQ2({s},{d})"), s + 2 * d)
        .relation("E", 2, equivalence(&blocks(s, d, 0)))
        .build()
}

pub fn m0t(a: usize, b: usize, c: usize) -> Result<Structure> {
    nonempty("M0T", a + 2 * b + 3 * c)?;
    Structure::builder(format!("M0T({a},{b},{c})"), a + 2 * b + 3 * c)
        .relation("E", 2, equivalence(&blocks(a, b, c)))
        .build()
}

fn q_elements(s: usize, d: usize) -> impl Iterator<Item = usize> {
    (0..d).map(move |j| s + 2 * j)
}

pub fn m1p(s: usize, d: usize) -> Result<Structure> {
    if s < 2 {
        return Err(Error::invalid(
            "M1P needs s >= 2 (two singleton classes carry the constants)",
        ));
    }
    Structure::builder(format!("M1P({s},{d})"), s + 2 * d)
        .relation("E", 2, equivalence(&blocks(s, d, 0)))
        .unary("Q", q_elements(s, d))
        .constant("c0", 0)
        .constant("c1", 1)
        .build()
}

pub fn m1pp(s: usize, d: usize) -> Result<Structure> {
    nonempty("M1PP", s + 2 * d)?;
    let q: Vec<usize> = q_elements(s, d).collect();
    let r: Vec<usize> = (0..s + 2 * d).filter(|x| !q.contains(x)).collect();
    Structure::builder(format!("M1PP({s},{d})"), s + 2 * d)
        .relation("E", 2, equivalence(&blocks(s, d, 0)))
        .unary("Q", q)
        .unary("R", r)
        .build()
}

/// `q` elements outside `P`, then the `p` elements of `P`.
pub fn m2t(p: usize, q: usize) -> Result<Structure> {
    nonempty("M2T", p + q)?;
    Structure::builder(format!("M2T({p},{q})"), p + q)
        .unary("P", q..q + p)
        .build()
}

/// Constants `c0 = 0`, `c1 = 1`, then `q` further elements outside `P`,
/// then `P`.
pub fn m2tc(p: usize, q: usize) -> Result<Structure> {
    let n = p + q + 2;
    Structure::builder(format!("M2TC({p},{q})"), n)
        .unary("P", q + 2..n)
        .constant("c0", 0)
        .constant("c1", 1)
        .build()
}

pub fn arrow() -> Result<Structure> {
    Structure::builder("ARROW", 2)
        .relation("R", 2, vec![vec![0, 1]])
        .build()
}

/// The directed cycle on `n` elements.
pub fn cycle(n: usize) -> Result<Structure> {
    nonempty("CYCLE", n)?;
    Structure::builder(format!("CYCLE({n})"), n)
        .relation("R", 2, (0..n).map(|i| vec![i, (i + 1) % n]).collect())
        .build()
}

/// The fixed list of small family members used by the sweeps.
pub fn instances() -> Vec<Structure> {
    let specs: &[(&str, &[usize])] = &[
        ("PURESET", &[1]),
        ("PURESET", &[2]),
        ("PURESET", &[3]),
        ("PURESET", &[4]),
        ("EQ2", &[1, 1]),
        ("EQ2", &[2, 1]),
        ("EQ2", &[0, 2]),
        ("EQ2", &[2, 2]),
        ("EQ2", &[2, 3]),
        ("M0T", &[1, 0, 1]),
        ("M0T", &[1, 1, 1]),
        ("M1P", &[2, 1]),
        ("M1P", &[4, 3]),
        ("M1PP", &[2, 1]),
        ("M1PP", &[4, 3]),
        ("M2T", &[2, 2]),
        ("M2T", &[3, 2]),
        ("M2TC", &[1, 1]),
        ("M2TC", &[3, 2]),
        ("ARROW", &[]),
        ("CYCLE", &[3]),
        ("CYCLE", &[4]),
    ];
    specs
        .iter()
        .map(|(f, p)| build_corpus(f, p).expect("corpus parameters"))
        .collect()
}
