use std::collections::{HashMap, HashSet};

use serde::Serialize;

use super::monoid::compose_into;
use super::TransformationMonoid;
use crate::error::{Error, Result};
use crate::maps::{end_monoid, is_strong, FinMap};
use crate::structure::Structure;

/// Right cosets `σG = { σ·α : α ∈ G }` of the unit group `G` in `E`, as
/// sorted lists of `E`-indices, ordered by least member.
pub fn right_cosets(e: &TransformationMonoid, g: &TransformationMonoid) -> Result<Vec<Vec<usize>>> {
    check_units(e, g)?;
    let units: Vec<usize> = (0..g.len())
        .map(|i| e.index_of(g.element(i)).unwrap())
        .collect();
    let mut class = vec![usize::MAX; e.len()];
    let mut out: Vec<Vec<usize>> = Vec::new();
    for s in 0..e.len() {
        if class[s] != usize::MAX {
            continue;
        }
        let mut members: Vec<usize> = units.iter().map(|&a| e.product(s, a)).collect();
        members.sort_unstable();
        members.dedup();
        for &m in &members {
            class[m] = out.len();
        }
        out.push(members);
    }
    Ok(out)
}

/// A pair `(σ, α)` with `α·σ` outside the right coset `σG`, if any.
pub fn coset_asymmetry(
    e: &TransformationMonoid,
    g: &TransformationMonoid,
) -> Result<Option<(usize, usize)>> {
    check_units(e, g)?;
    let units: Vec<usize> = (0..g.len())
        .map(|i| e.index_of(g.element(i)).unwrap())
        .collect();
    for s in 0..e.len() {
        let right: HashSet<usize> = units.iter().map(|&a| e.product(s, a)).collect();
        for &a in &units {
            if !right.contains(&e.product(a, s)) {
                return Ok(Some((s, a)));
            }
        }
    }
    Ok(None)
}

fn check_units(e: &TransformationMonoid, g: &TransformationMonoid) -> Result<()> {
    if g.degree() != e.degree() || *g != e.invertibles() {
        return Err(Error::invalid(
            "the group given is not the group of units of the monoid",
        ));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpecialElements {
    pub absorbing: Vec<usize>,
    pub constants: Vec<usize>,
    pub idempotent_central: Vec<usize>,
}

/// Absorbing elements (`τ·σ = σ` for all `τ`), constant maps, and idempotents
/// commuting with every unit.
pub fn special_elements(e: &TransformationMonoid) -> SpecialElements {
    let n = e.degree();
    // σ is absorbing iff it is constant on every orbit x^E.
    let mut orbit: Vec<Vec<bool>> = vec![vec![false; n]; n];
    for el in e.iter() {
        for x in 0..n {
            orbit[x][el[x] as usize] = true;
        }
    }
    let orbit_lists: Vec<Vec<usize>> = orbit
        .iter()
        .map(|row| (0..n).filter(|&y| row[y]).collect())
        .collect();
    let units = e.invertibles();
    let unit_gens: Vec<&[u16]> = units
        .generators()
        .iter()
        .map(|&i| units.element(i))
        .collect();
    let mut out = SpecialElements {
        absorbing: vec![],
        constants: vec![],
        idempotent_central: vec![],
    };
    let mut a = vec![0u16; n];
    let mut b = vec![0u16; n];
    for (i, s) in e.iter().enumerate() {
        if orbit_lists
            .iter()
            .enumerate()
            .all(|(x, ys)| ys.iter().all(|&y| s[y] == s[x]))
        {
            out.absorbing.push(i);
        }
        if s.windows(2).all(|w| w[0] == w[1]) {
            out.constants.push(i);
        }
        if s.iter().all(|&x| s[x as usize] == x) {
            let central = unit_gens.iter().all(|g| {
                compose_into(s, g, &mut a);
                compose_into(g, s, &mut b);
                a == b
            });
            if central {
                out.idempotent_central.push(i);
            }
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct SandwichReport {
    pub end_size: usize,
    pub right_invertible: usize,
    pub embeddings: usize,
    pub left_cancellable: usize,
    /// An element violating one of the inclusions, with the inclusion name.
    pub violation: Option<(FinMap, String)>,
}

impl SandwichReport {
    pub fn holds(&self) -> bool {
        self.violation.is_none()
    }
}

/// `{σ : ∃τ, σ·τ a unit} ⊆ Emb ⊆ {σ : left-cancellable}` inside `End(A)`.
pub fn sandwich_check(a: &Structure) -> Result<SandwichReport> {
    let e = end_monoid(a)?;
    Ok(sandwich_in(a, &e))
}

pub(crate) fn sandwich_in(a: &Structure, e: &TransformationMonoid) -> SandwichReport {
    let n = e.degree();
    let mut ri = 0;
    let mut emb = 0;
    let mut lc = 0;
    let mut violation = None;
    // Left-cancellability of σ (σ·τ = σ·τ' ⇒ τ = τ') depends only on the
    // image set of σ: it says that restriction to that set is injective on E.
    let mut by_image: HashMap<Vec<bool>, bool> = HashMap::new();
    let mut buf = vec![0u16; n];
    for (i, s) in e.iter().enumerate() {
        let mut image = vec![false; n];
        for &x in s {
            image[x as usize] = true;
        }
        let cancellable = *by_image.entry(image.clone()).or_insert_with(|| {
            let mut seen: HashSet<Vec<u16>> = HashSet::with_capacity(e.len());
            e.iter()
                .all(|t| seen.insert((0..n).filter(|&x| image[x]).map(|x| t[x]).collect()))
        });
        let images: Vec<usize> = s.iter().map(|&x| x as usize).collect();
        let injective = FinMap::new(images.clone()).is_injective();
        let is_emb = injective && is_strong(a, a, &images);
        // σ·τ is a unit iff the composite is a bijection, which needs σ
        // injective in the first place.
        let right_inv = injective
            && e.iter().any(|t| {
                compose_into(s, t, &mut buf);
                let mut seen = vec![false; n];
                buf.iter()
                    .all(|&x| !std::mem::replace(&mut seen[x as usize], true))
            });
        ri += right_inv as usize;
        emb += is_emb as usize;
        lc += cancellable as usize;
        if violation.is_none() {
            if right_inv && !is_emb {
                violation = Some((
                    e.map(i),
                    "right-invertible but not an embedding".to_string(),
                ));
            } else if is_emb && !cancellable {
                violation = Some((e.map(i), "embedding but not left-cancellable".to_string()));
            }
        }
    }
    SandwichReport {
        end_size: e.len(),
        right_invertible: ri,
        embeddings: emb,
        left_cancellable: lc,
        violation,
    }
}
