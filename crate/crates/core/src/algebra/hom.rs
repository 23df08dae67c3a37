use serde::Serialize;

use super::TransformationMonoid;
use crate::error::{Error, Result};

/// A monoid homomorphism given by an element-index table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MonoidHom {
    pub table: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HomVerdict {
    pub is_hom: bool,
    pub identity_preserved: bool,
    /// `(x, y)` with `f(x·y) ≠ f(x)·f(y)`.
    pub failure: Option<(usize, usize)>,
    /// `"all-pairs"` or `"generators"`.
    pub method: &'static str,
}

/// Monoids up to this size are checked on all pairs.
pub const ALL_PAIRS_LIMIT: usize = 2000;

impl MonoidHom {
    /// Every element to the identity of `n`.
    pub fn trivial(m: &TransformationMonoid, n: &TransformationMonoid) -> MonoidHom {
        MonoidHom {
            table: vec![n.identity(); m.len()],
        }
    }

    pub fn identity(m: &TransformationMonoid) -> MonoidHom {
        MonoidHom {
            table: (0..m.len()).collect(),
        }
    }

    pub fn is_bijective(&self, target_len: usize) -> bool {
        let mut seen = vec![false; target_len];
        self.table.len() == target_len
            && self
                .table
                .iter()
                .all(|&y| y < target_len && !std::mem::replace(&mut seen[y], true))
    }

    pub fn inverse(&self) -> Option<MonoidHom> {
        let mut inv = vec![usize::MAX; self.table.len()];
        for (x, &y) in self.table.iter().enumerate() {
            if y >= inv.len() || inv[y] != usize::MAX {
                return None;
            }
            inv[y] = x;
        }
        Some(MonoidHom { table: inv })
    }

    /// `self` then `other`.
    pub fn then(&self, other: &MonoidHom) -> MonoidHom {
        MonoidHom {
            table: self.table.iter().map(|&y| other.table[y]).collect(),
        }
    }
}

/// Check identity preservation and multiplicativity. Small monoids are
/// checked on all pairs; larger ones on `x·g` for generators `g`, which is
/// equivalent: by induction on word length, `f(x·g) = f(x)·f(g)` for all
/// `x` and generators `g` gives `f(x·y) = f(x)·f(y)` for all `y`.
pub fn verify_monoid_hom(
    table: &[usize],
    m: &TransformationMonoid,
    n: &TransformationMonoid,
) -> Result<HomVerdict> {
    if table.len() != m.len() {
        return Err(Error::invalid(format!(
            "table has {} entries for a monoid of {} elements",
            table.len(),
            m.len()
        )));
    }
    if let Some(&y) = table.iter().find(|&&y| y >= n.len()) {
        return Err(Error::invalid(format!(
            "table entry {y} outside the target monoid"
        )));
    }
    let identity_preserved = table[m.identity()] == n.identity();
    let small = m.len() <= ALL_PAIRS_LIMIT;
    let method = if small { "all-pairs" } else { "generators" };
    let seconds: Vec<usize> = if small {
        (0..m.len()).collect()
    } else {
        m.generators().to_vec()
    };
    let mut failure = None;
    'outer: for x in 0..m.len() {
        for &y in &seconds {
            if table[m.product(x, y)] != n.product(table[x], table[y]) {
                failure = Some((x, y));
                break 'outer;
            }
        }
    }
    Ok(HomVerdict {
        is_hom: identity_preserved && failure.is_none(),
        identity_preserved,
        failure,
        method,
    })
}

/// Default cap on the source monoid for [`search_monoid_homs`].
pub const SEARCH_SOURCE_CAP: usize = 32;

/// All monoid homomorphisms `M -> N`, by backtracking over generator images.
/// Refuses sources above `source_cap` elements.
pub fn search_monoid_homs(
    m: &TransformationMonoid,
    n: &TransformationMonoid,
    source_cap: usize,
) -> Result<Vec<MonoidHom>> {
    if m.len() > source_cap {
        return Err(Error::Guard {
            what: "monoid hom search source".into(),
            required: m.len() as u128,
            cap: source_cap as u128,
        });
    }
    let gens = m.generators().to_vec();
    // Breadth-first words: each non-identity element as parent·generator.
    let id = m.identity();
    let mut word: Vec<Option<(usize, usize)>> = vec![None; m.len()];
    let mut reached = vec![false; m.len()];
    reached[id] = true;
    let mut queue = std::collections::VecDeque::from([id]);
    while let Some(x) = queue.pop_front() {
        for (gi, &g) in gens.iter().enumerate() {
            let y = m.product(x, g);
            if !reached[y] {
                reached[y] = true;
                word[y] = Some((x, gi));
                queue.push_back(y);
            }
        }
    }
    let mut order: Vec<usize> = Vec::with_capacity(m.len());
    let mut q = std::collections::VecDeque::from([id]);
    let mut done = vec![false; m.len()];
    done[id] = true;
    while let Some(x) = q.pop_front() {
        order.push(x);
        for &g in &gens {
            let y = m.product(x, g);
            if !done[y] && word[y].map(|(p, _)| p) == Some(x) {
                done[y] = true;
                q.push_back(y);
            }
        }
    }
    let mut out = Vec::new();
    let mut images = vec![0usize; gens.len()];
    loop {
        let mut table = vec![usize::MAX; m.len()];
        table[id] = n.identity();
        for &x in order.iter().skip(1) {
            let (p, gi) = word[x].unwrap();
            table[x] = n.product(table[p], images[gi]);
        }
        if verify_monoid_hom(&table, m, n)?.is_hom {
            out.push(MonoidHom { table });
        }
        let mut j = gens.len();
        loop {
            if j == 0 {
                return Ok(out);
            }
            j -= 1;
            images[j] += 1;
            if images[j] < n.len() {
                break;
            }
            images[j] = 0;
        }
    }
}
