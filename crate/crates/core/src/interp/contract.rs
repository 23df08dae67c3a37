use serde::Serialize;

use crate::algebra::{verify_monoid_hom, MonoidHom};
use crate::error::{Error, Result};
use crate::maps::{end_monoid, for_each_hom, is_hom, FinMap, MapFilter};
use crate::structure::{Signature, Structure, Tuple};

/// The least constant endomorphism, if any.
pub fn contractible(a: &Structure) -> Option<FinMap> {
    (0..a.size())
        .map(|c| vec![c; a.size()])
        .find(|f| is_hom(a, a, f))
        .map(FinMap::new)
}

/// Unordered pairs of distinct elements as bit positions.
struct Pairs {
    n: usize,
    words: usize,
}

impl Pairs {
    fn new(n: usize) -> Self {
        let count = n * n.saturating_sub(1) / 2;
        Pairs {
            n,
            words: count.div_ceil(64).max(1),
        }
    }

    fn count(&self) -> usize {
        self.n * self.n.saturating_sub(1) / 2
    }

    fn index(&self, x: usize, y: usize) -> usize {
        x * self.n - x * (x + 1) / 2 + (y - x - 1)
    }

    fn pair(&self, mut p: usize) -> (usize, usize) {
        for x in 0..self.n {
            let row = self.n - x - 1;
            if p < row {
                return (x, x + 1 + p);
            }
            p -= row;
        }
        unreachable!("pair index out of range")
    }

    fn kernel(&self, f: &[usize]) -> Vec<u64> {
        let mut bits = vec![0u64; self.words];
        for x in 0..self.n {
            for y in x + 1..self.n {
                if f[x] == f[y] {
                    let p = self.index(x, y);
                    bits[p / 64] |= 1 << (p % 64);
                }
            }
        }
        bits
    }
}

fn has(bits: &[u64], p: usize) -> bool {
    bits[p / 64] >> (p % 64) & 1 == 1
}

fn subset(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x & !y == 0)
}

/// Maximal kernels of endomorphisms, as pair sets.
fn maximal_kernels(a: &Structure, pairs: &Pairs) -> Result<Vec<Vec<u64>>> {
    let mut all = std::collections::BTreeSet::new();
    for_each_hom(a, a, MapFilter::HOM, &[], &mut |f| {
        all.insert(pairs.kernel(f));
        true
    })?;
    let mut all: Vec<Vec<u64>> = all.into_iter().collect();
    all.sort_by_key(|k| std::cmp::Reverse(k.iter().map(|w| w.count_ones()).sum::<u32>()));
    let mut out: Vec<Vec<u64>> = Vec::new();
    for k in all {
        if !out.iter().any(|m| subset(&k, m)) {
            out.push(k);
        }
    }
    Ok(out)
}

/// Smallest pair set not contained in any kernel, up to `limit` pairs.
fn hitting(pairs: &Pairs, kernels: &[Vec<u64>], limit: usize) -> Option<Vec<usize>> {
    fn dfs(
        pairs: &Pairs,
        kernels: &[Vec<u64>],
        chosen: &mut Vec<usize>,
        bits: &mut Vec<u64>,
        depth: usize,
    ) -> bool {
        let Some(k) = kernels.iter().find(|k| subset(bits, k)) else {
            return true;
        };
        if depth == 0 {
            return false;
        }
        for p in 0..pairs.count() {
            if has(k, p) {
                continue;
            }
            chosen.push(p);
            bits[p / 64] |= 1 << (p % 64);
            if dfs(pairs, kernels, chosen, bits, depth - 1) {
                return true;
            }
            bits[p / 64] &= !(1 << (p % 64));
            chosen.pop();
        }
        false
    }
    for depth in 0..=limit {
        let mut chosen = Vec::new();
        let mut bits = vec![0u64; pairs.words];
        if dfs(pairs, kernels, &mut chosen, &mut bits, depth) {
            return Some(chosen);
        }
    }
    None
}

fn to_tuples(pairs: &Pairs, chosen: &[usize]) -> (Tuple, Tuple) {
    chosen.iter().map(|&p| pairs.pair(p)).unzip()
}

/// A shortest pair of tuples that no endomorphism identifies, or `None`
/// when the structure is contractible.
pub fn separating_pair(a: &Structure) -> Result<Option<(Tuple, Tuple)>> {
    let pairs = Pairs::new(a.size());
    let kernels = maximal_kernels(a, &pairs)?;
    Ok(hitting(&pairs, &kernels, a.size().saturating_sub(1)).map(|c| to_tuples(&pairs, &c)))
}

#[derive(Clone, Debug, Serialize)]
pub struct ZusReport {
    pub max_length: usize,
    /// Every two tuples of equal length up to `max_length` are identified
    /// by some endomorphism.
    pub holds: bool,
    pub separating: Option<(Tuple, Tuple)>,
    pub contractible: bool,
    /// `holds` agrees with `contractible` (only the forward direction is
    /// claimed when `max_length < |A| - 1`).
    pub consistent: bool,
}

pub fn zus_equivalent(a: &Structure, max_length: Option<usize>) -> Result<ZusReport> {
    let len = max_length.unwrap_or(a.size());
    let pairs = Pairs::new(a.size());
    let kernels = maximal_kernels(a, &pairs)?;
    let separating = hitting(&pairs, &kernels, len).map(|c| to_tuples(&pairs, &c));
    let holds = separating.is_none();
    let contractible = contractible(a).is_some();
    let consistent = if len + 1 >= a.size() {
        holds == contractible
    } else {
        !contractible || holds
    };
    Ok(ZusReport {
        max_length: len,
        holds,
        separating,
        contractible,
        consistent,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct AdjoinReport {
    #[serde(skip)]
    pub structure: Structure,
    pub point: usize,
    pub end_size: usize,
    /// `σ ↦ σ ∪ {c ↦ c}` as a table between the two `End` monoids.
    pub end_iso: MonoidHom,
    pub verified: bool,
    pub source_contractible: bool,
    pub target_contractible: bool,
}

/// Add a new element named by a fresh constant and a fresh predicate for
/// the old domain.
pub fn adjoin_point(a: &Structure) -> Result<AdjoinReport> {
    let n = a.size();
    let sig = a.signature();
    let p = sig.fresh_name("P");
    let c = sig.fresh_name("c");
    let new_sig = Signature::new(
        sig.relations()
            .iter()
            .map(|r| (r.name.clone(), r.arity))
            .chain([(p, 1)]),
        sig.constants().iter().cloned().chain([c]),
    )?;
    let mut relations: Vec<Vec<Tuple>> = a.relations().iter().map(|r| r.to_tuples()).collect();
    relations.push((0..n).map(|x| vec![x]).collect());
    let mut constants = a.constants().to_vec();
    constants.push(n);
    let b = Structure::new(
        format!("{}+pt", a.name()),
        new_sig,
        n + 1,
        relations,
        constants,
    )?;
    let ea = end_monoid(a)?;
    let eb = end_monoid(&b)?;
    let mut table = Vec::with_capacity(ea.len());
    for s in 0..ea.len() {
        let mut images = ea.map(s).into_images();
        images.push(n);
        let k = eb.index_of_map(&FinMap::new(images)).ok_or_else(|| {
            Error::Internal("extended endomorphism is not an endomorphism".into())
        })?;
        table.push(k);
    }
    let end_iso = MonoidHom { table };
    let verified =
        end_iso.is_bijective(eb.len()) && verify_monoid_hom(&end_iso.table, &ea, &eb)?.is_hom;
    Ok(AdjoinReport {
        point: n,
        end_size: ea.len(),
        end_iso,
        verified,
        source_contractible: contractible(a).is_some(),
        target_contractible: contractible(&b).is_some(),
        structure: b,
    })
}
