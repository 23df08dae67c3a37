use std::collections::BTreeSet;

use serde::Serialize;

use super::TransformationMonoid;
use crate::error::{Error, Result};
use crate::maps::FinMap;
use crate::structure::{Tuple, TupleSet};

fn apply(e: &[u16], t: &[usize]) -> Tuple {
    t.iter().map(|&x| e[x] as usize).collect()
}

fn check_domain(x: &TupleSet, m: &TransformationMonoid) -> Result<()> {
    if x.domain() != m.degree() {
        return Err(Error::invalid(format!(
            "tuple set over {} elements, monoid acts on {}",
            x.domain(),
            m.degree()
        )));
    }
    Ok(())
}

/// `{ t^σ : σ ∈ M }`.
pub fn orbit(t: &[usize], m: &TransformationMonoid) -> Result<TupleSet> {
    if let Some(&x) = t.iter().find(|&&x| x >= m.degree()) {
        return Err(Error::invalid(format!(
            "element {x} outside the monoid's domain"
        )));
    }
    let set: BTreeSet<Tuple> = m.iter().map(|e| apply(e, t)).collect();
    Ok(TupleSet::from_btree(t.len(), m.degree(), set))
}

/// The least `M`-closed superset of `X`.
pub fn closure(x: &TupleSet, m: &TransformationMonoid) -> Result<TupleSet> {
    check_domain(x, m)?;
    let mut set: BTreeSet<Tuple> = BTreeSet::new();
    for t in x.iter() {
        for e in m.iter() {
            set.insert(apply(e, t));
        }
    }
    Ok(TupleSet::from_btree(x.arity(), x.domain(), set))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClosureWitness {
    pub tuple: Tuple,
    pub map: FinMap,
    pub image: Tuple,
}

/// Is `X` closed under `M`? On failure the witness uses the least element
/// of `M` (in index order) that moves some tuple out, and the least such
/// tuple.
pub fn is_closed(x: &TupleSet, m: &TransformationMonoid) -> Result<Option<ClosureWitness>> {
    check_domain(x, m)?;
    if x.is_empty() {
        return Ok(None);
    }
    // Closure under a generating set is closure under the monoid, so large
    // positive instances avoid the full scan.
    if (m.len() as u128) * (x.len() as u128) > 200_000 {
        let gens = m.generators();
        let closed = gens
            .iter()
            .all(|&g| x.iter().all(|t| x.contains(&apply(m.element(g), t))));
        if closed {
            return Ok(None);
        }
    }
    for (i, e) in m.iter().enumerate() {
        for t in x.iter() {
            let image = apply(e, t);
            if !x.contains(&image) {
                return Ok(Some(ClosureWitness {
                    tuple: t.clone(),
                    map: m.map(i),
                    image,
                }));
            }
        }
    }
    Ok(None)
}

/// Closure under an explicit list of maps (not necessarily a monoid).
pub fn is_closed_under(x: &TupleSet, maps: &[FinMap]) -> Result<Option<ClosureWitness>> {
    for f in maps {
        if f.len() != x.domain() {
            return Err(Error::Arity {
                expected: x.domain(),
                found: f.len(),
            });
        }
        for t in x.iter() {
            let image = f.apply_tuple(t);
            if !x.contains(&image) {
                return Ok(Some(ClosureWitness {
                    tuple: t.clone(),
                    map: f.clone(),
                    image,
                }));
            }
        }
    }
    Ok(None)
}
