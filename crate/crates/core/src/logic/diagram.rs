use serde::Serialize;

use super::{Formula, Term};
use crate::error::{Error, Result};
use crate::limits;
use crate::structure::Structure;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DiagramFlavor {
    /// Relation atoms true in `A`: images under homomorphisms.
    Positive,
    /// Plus `≠` between distinct elements: injective homomorphisms.
    PositiveNeq,
    /// Plus negated atoms false in `A`: embeddings.
    Full,
    /// Positive plus "the elements cover the domain": surjective homomorphisms.
    Covering,
    /// PositiveNeq plus covering: bijective homomorphisms.
    CoveringNeq,
}

impl DiagramFlavor {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "positive" => Ok(DiagramFlavor::Positive),
            "positive_neq" => Ok(DiagramFlavor::PositiveNeq),
            "full" => Ok(DiagramFlavor::Full),
            "covering" => Ok(DiagramFlavor::Covering),
            "covering_neq" => Ok(DiagramFlavor::CoveringNeq),
            _ => Err(Error::invalid(format!("unknown diagram flavor `{s}`"))),
        }
    }

    fn neq(self) -> bool {
        matches!(
            self,
            DiagramFlavor::PositiveNeq | DiagramFlavor::Full | DiagramFlavor::CoveringNeq
        )
    }

    fn covering(self) -> bool {
        matches!(self, DiagramFlavor::Covering | DiagramFlavor::CoveringNeq)
    }
}

/// The diagram of `A` anchored at `anchor`. Element `anchor[i]` is named by
/// `x_i` (first occurrence), every other element `e` by the bound variable
/// `x_{k+e}`.
pub fn canonical_diagram(
    a: &Structure,
    anchor: &[usize],
    flavor: DiagramFlavor,
) -> Result<Formula> {
    let n = a.size();
    let k = anchor.len();
    if let Some(&e) = anchor.iter().find(|&&e| e >= n) {
        return Err(Error::invalid(format!(
            "anchor element {e} not in the domain"
        )));
    }
    let mut atoms: u128 = a.relations().iter().map(|r| r.len() as u128).sum();
    if flavor.neq() {
        atoms += (n * n.saturating_sub(1) / 2) as u128;
    }
    if flavor == DiagramFlavor::Full {
        for r in a.relations() {
            atoms += limits::pow(n, r.arity()) - r.len() as u128;
        }
    }
    limits::check("diagram atoms", atoms, limits::atom_cap())?;

    let mut name = vec![usize::MAX; n];
    let mut parts = Vec::new();
    for (i, &e) in anchor.iter().enumerate() {
        if name[e] == usize::MAX {
            name[e] = i;
        } else {
            parts.push(Formula::eq(Term::Var(name[e]), Term::Var(i)));
        }
    }
    let bound: Vec<usize> = (0..n)
        .filter(|&e| name[e] == usize::MAX)
        .map(|e| k + e)
        .collect();
    for e in 0..n {
        if name[e] == usize::MAX {
            name[e] = k + e;
        }
    }
    let v = |e: usize| Term::Var(name[e]);
    for (c, &val) in a.signature().constants().iter().zip(a.constants()) {
        parts.push(Formula::eq(v(val), Term::Const(c.clone())));
    }
    for (sym, rel) in a.signature().relations().iter().zip(a.relations()) {
        for t in rel.iter() {
            parts.push(Formula::Atom(
                sym.name.clone(),
                t.iter().map(|&e| v(e)).collect(),
            ));
        }
    }
    if flavor.neq() {
        for e in 0..n {
            for f in e + 1..n {
                parts.push(Formula::neq(v(e), v(f)));
            }
        }
    }
    if flavor == DiagramFlavor::Full {
        for (sym, rel) in a.signature().relations().iter().zip(a.relations()) {
            for t in a.all_tuples(rel.arity()) {
                if !rel.contains(&t) {
                    parts.push(Formula::not(Formula::Atom(
                        sym.name.clone(),
                        t.iter().map(|&e| v(e)).collect(),
                    )));
                }
            }
        }
    }
    if flavor.covering() {
        let z = k + n;
        let cover = (0..n).map(|e| Formula::eq(Term::Var(z), v(e))).collect();
        parts.push(Formula::forall(z, Formula::Or(cover)));
    }
    if parts.is_empty() {
        parts.push(Formula::eq(v(0), v(0)));
    }
    Ok(Formula::exists_all(bound, Formula::and_of(parts)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{eq2, pureset};
    use crate::logic::{classify, definable_set, Fragment};

    #[test]
    fn pure_set_positive_diagram_is_everything() {
        let a = pureset(2).unwrap();
        let f = canonical_diagram(&a, &[0], DiagramFlavor::Positive).unwrap();
        assert_eq!(definable_set(&a, &f, 1).unwrap().len(), 2);
        assert!(classify(&f).contains(&Fragment::PP));
    }

    #[test]
    fn doubleton_anchor() {
        let a = eq2(1, 1).unwrap();
        let pos = canonical_diagram(&a, &[1], DiagramFlavor::Positive).unwrap();
        assert_eq!(definable_set(&a, &pos, 1).unwrap().len(), 3);
        let full = canonical_diagram(&a, &[1], DiagramFlavor::Full).unwrap();
        assert_eq!(
            definable_set(&a, &full, 1).unwrap().to_string(),
            "{(1),(2)}"
        );
        let c = classify(&full);
        assert!(c.contains(&Fragment::EXIST) && !c.contains(&Fragment::PEX_NEQ));
    }

    #[test]
    fn repeated_anchor_gives_equalities() {
        let a = eq2(1, 1).unwrap();
        let f = canonical_diagram(&a, &[1, 1], DiagramFlavor::Full).unwrap();
        assert_eq!(
            definable_set(&a, &f, 2).unwrap().to_string(),
            "{(1 1),(2 2)}"
        );
    }

    #[test]
    fn covering_flavors() {
        let a = eq2(1, 1).unwrap();
        let f = canonical_diagram(&a, &[1], DiagramFlavor::Covering).unwrap();
        let c = classify(&f);
        assert!(c.contains(&Fragment::POS) && !c.contains(&Fragment::PEX));
        assert_eq!(definable_set(&a, &f, 1).unwrap().to_string(), "{(1),(2)}");
        let g = canonical_diagram(&a, &[1], DiagramFlavor::CoveringNeq).unwrap();
        assert!(classify(&g).contains(&Fragment::POS_NEQ));
        assert_eq!(definable_set(&a, &g, 1).unwrap().to_string(), "{(1),(2)}");
    }
}
