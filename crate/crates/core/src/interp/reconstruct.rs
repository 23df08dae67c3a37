use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use super::contract::{contractible, separating_pair};
use super::functor::induced_monoid_hom;
use super::{verify_with, InterpVerdict, Level, TableInterpretation};
use crate::algebra::{verify_monoid_hom, MonoidHom};
use crate::definability::Definer;
use crate::error::{Error, Result};
use crate::limits;
use crate::maps::end_monoid;
use crate::structure::{Structure, Tuple, TupleIter};

#[derive(Clone, Debug, Serialize)]
pub struct Reconstruction {
    pub level: Level,
    /// Orbit representatives `b_i` covering the target.
    pub generators: Vec<usize>,
    /// Marker tuples `a'_i`.
    pub markers: Vec<Tuple>,
    pub separating: Option<(Tuple, Tuple)>,
    /// The good tuple `ā`.
    pub good: Tuple,
    #[serde(skip)]
    pub table: TableInterpretation,
    pub verdict: InterpVerdict,
    /// The interpretation induces `f` again.
    pub round_trip: bool,
}

/// Build an interpretation of `b` in `a` from a monoid homomorphism `f`
/// from `End(A)` (level pex), `Emb(A)` (exist) or `Aut(A)` (fo) into
/// `End(B)`: the universe is the union of the orbits of `(a'_i, ā)` and
/// `(a'_i, ā)^σ` goes to `b_i^{f(σ)}`.
pub fn reconstruct(
    a: &Structure,
    b: &Structure,
    f: &MonoidHom,
    level: Level,
) -> Result<Reconstruction> {
    let d = Definer::new(a);
    let m = level.monoid(&d)?;
    let nb = end_monoid(b)?;
    let v = verify_monoid_hom(&f.table, m, &nb)?;
    if !v.is_hom {
        return Err(Error::invalid(
            "the given table is not a monoid homomorphism",
        ));
    }
    if level == Level::Pex {
        if let Some(c) = contractible(a) {
            return Err(Error::Refused(format!(
                "{} is contractible (constant endomorphism {c}); positive existential reconstruction needs a non-contractible source",
                a.name()
            )));
        }
    }
    let fm: Vec<&[u16]> = f.table.iter().map(|&y| nb.element(y)).collect();

    // Orbit representatives, largest new coverage first.
    let mut covered = vec![false; b.size()];
    let mut generators = Vec::new();
    while covered.iter().any(|c| !c) {
        let gain = |x: usize| -> usize {
            let mut seen = vec![false; b.size()];
            fm.iter()
                .filter(|g| {
                    let y = g[x] as usize;
                    !covered[y] && !std::mem::replace(&mut seen[y], true)
                })
                .count()
        };
        let best = (0..b.size())
            .max_by_key(|&x| (gain(x), std::cmp::Reverse(x)))
            .unwrap();
        generators.push(best);
        for g in &fm {
            covered[g[best] as usize] = true;
        }
    }
    let k = generators.len();

    let n = a.size();
    let (markers, separating, mut good) = match level {
        Level::Pex => {
            let (c0, c1) = separating_pair(a)?.ok_or_else(|| {
                Error::Internal("non-contractible structure without a separating pair".into())
            })?;
            let blocks = k.max(3);
            let markers: Vec<Tuple> = (0..k)
                .map(|i| {
                    (0..blocks)
                        .flat_map(|p| if p == i { c1.clone() } else { c0.clone() })
                        .collect()
                })
                .collect();
            (markers, Some((c0, c1)), Vec::new())
        }
        Level::Exist | Level::Fo => {
            let mut p = 1;
            while limits::pow(n, p) < k as u128 {
                p += 1;
            }
            let markers: Vec<Tuple> = TupleIter::new(n, p).take(k).collect();
            let mut good: Tuple = markers.iter().flatten().copied().collect();
            good.sort_unstable();
            good.dedup();
            (markers, None, good)
        }
    };

    // Grow ā until equal images of (a'_i, ā) force equal images of b_i.
    loop {
        let mut conflict = None;
        'scan: for (i, mk) in markers.iter().enumerate() {
            let mut seen: HashMap<Vec<u16>, (u16, usize)> = HashMap::new();
            for (s, e) in m.iter().enumerate() {
                let key: Vec<u16> = mk.iter().chain(&good).map(|&x| e[x]).collect();
                let val = fm[s][generators[i]];
                match seen.get(&key) {
                    Some(&(w, t)) if w != val => {
                        conflict = Some((t, s));
                        break 'scan;
                    }
                    Some(_) => {}
                    None => {
                        seen.insert(key, (val, s));
                    }
                }
            }
        }
        let Some((t, s)) = conflict else { break };
        let (et, es) = (m.element(t), m.element(s));
        let x = (0..n)
            .find(|&x| et[x] != es[x] && !good.contains(&x))
            .ok_or_else(|| {
                Error::Internal("two maps with equal images on the whole domain".into())
            })?;
        good.push(x);
        good.sort_unstable();
    }

    let mut pairs: BTreeMap<Tuple, usize> = BTreeMap::new();
    for (i, mk) in markers.iter().enumerate() {
        for (s, e) in m.iter().enumerate() {
            let key: Tuple = mk.iter().chain(&good).map(|&x| e[x] as usize).collect();
            let val = fm[s][generators[i]] as usize;
            if let Some(&w) = pairs.get(&key) {
                if w != val {
                    return Err(Error::Internal(format!(
                        "reconstructed map is not well defined at {key:?}"
                    )));
                }
            } else {
                pairs.insert(key, val);
            }
        }
    }
    let dim = markers[0].len() + good.len();
    let table = TableInterpretation::from_pairs(n, dim, pairs, b.clone())?;
    let verdict = verify_with(&d, &table, level.fragment())?;
    let round = induced_monoid_hom(&table, m, &nb)?;
    Ok(Reconstruction {
        level,
        generators,
        markers,
        separating,
        good,
        round_trip: round == *f,
        table,
        verdict,
    })
}
