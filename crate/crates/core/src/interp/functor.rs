use std::collections::BTreeSet;

use serde::Serialize;

use super::compose::{compose, identify};
use super::{apply, library, verify_with, Interpretation, Level, TableInterpretation};
use crate::algebra::{verify_monoid_hom, HomVerdict, MonoidHom, TransformationMonoid};
use crate::definability::{DefinabilityVerdict, Definer};
use crate::error::{Error, Result};
use crate::limits;
use crate::maps::{end_monoid, find_isomorphism, for_each_hom, FinMap, MapFilter};
use crate::structure::{Signature, Structure, Tuple, TupleSet};

/// The map `B -> B'` induced by `h: A -> A'` on two table interpretations.
pub fn induced_map(
    t1: &TableInterpretation,
    t2: &TableInterpretation,
    h: &FinMap,
) -> Result<FinMap> {
    if h.len() != t1.source_size || h.images().iter().any(|&x| x >= t2.source_size) {
        return Err(Error::invalid(format!(
            "{h} is not a map between the two sources"
        )));
    }
    let mut out = vec![usize::MAX; t1.target.size()];
    for (u, &b) in t1.universe.iter().zip(&t1.images) {
        let v = h.apply_tuple(u);
        let c = t2.image(&v).ok_or_else(|| {
            Error::Interpretation(format!("{h} moves {u:?} outside the domain to {v:?}"))
        })?;
        if out[b] == usize::MAX {
            out[b] = c;
        } else if out[b] != c {
            return Err(Error::Interpretation(format!(
                "{h} does not induce a well defined map: class {b} goes to both {} and {c}",
                out[b]
            )));
        }
    }
    Ok(FinMap::new(out))
}

/// The map between `i(A)` and `i(A')` induced by `h: A -> A'`.
pub fn induced_hom(
    i: &Interpretation,
    a: &Structure,
    a2: &Structure,
    h: &FinMap,
) -> Result<FinMap> {
    induced_map(&apply(i, a)?, &apply(i, a2)?, h)
}

/// `σ ↦ σ*` from `source` (self-maps of the table's source) into `target`
/// (self-maps of its target).
pub fn induced_monoid_hom(
    t: &TableInterpretation,
    source: &TransformationMonoid,
    target: &TransformationMonoid,
) -> Result<MonoidHom> {
    let mut table = Vec::with_capacity(source.len());
    for s in 0..source.len() {
        let m = induced_map(t, t, &source.map(s))?;
        let k = target.index_of_map(&m).ok_or_else(|| {
            Error::Interpretation(format!("induced map {m} is not in the target monoid"))
        })?;
        table.push(k);
    }
    Ok(MonoidHom { table })
}

#[derive(Clone, Debug, Serialize)]
pub struct FunctorMap {
    pub level: Level,
    #[serde(skip)]
    pub table: TableInterpretation,
    #[serde(skip)]
    pub source: TransformationMonoid,
    #[serde(skip)]
    pub target: TransformationMonoid,
    pub hom: MonoidHom,
    pub verdict: HomVerdict,
}

/// `End(i)`, `Emb(i)` or `Aut(i)` into `End(i(A))`, after checking that
/// `i` verifies at the level's fragment.
pub fn functor_map(a: &Structure, i: &Interpretation, level: Level) -> Result<FunctorMap> {
    let table = apply(i, a)?;
    let d = Definer::new(a);
    let v = verify_with(&d, &table, level.fragment())?;
    if !v.holds {
        let bad: Vec<&str> = v.failures().iter().map(|s| s.set.as_str()).collect();
        return Err(Error::Interpretation(format!(
            "{} does not verify at {} (sets: {})",
            i.name,
            level.fragment(),
            bad.join(", ")
        )));
    }
    let source = level.monoid(&d)?.clone();
    let target = end_monoid(&table.target)?;
    let hom = induced_monoid_hom(&table, &source, &target)?;
    let verdict = verify_monoid_hom(&hom.table, &source, &target)?;
    if !verdict.is_hom {
        return Err(Error::Internal(format!(
            "induced maps of {} do not form a monoid homomorphism",
            i.name
        )));
    }
    Ok(FunctorMap {
        level,
        table,
        source,
        target,
        hom,
        verdict,
    })
}

pub fn end_functor_map(a: &Structure, i: &Interpretation) -> Result<FunctorMap> {
    functor_map(a, i, Level::Pex)
}

#[derive(Clone, Debug, Serialize)]
pub struct FunctorLawReport {
    pub holds: bool,
    pub elements: usize,
    /// An endomorphism of `A` on which the two sides differ.
    pub failure: Option<FinMap>,
}

/// `End(compose(i, j))` against `End(i)` followed by `End(j)`, compared
/// through the identification of the composite target with `j(i(A))`.
pub fn functor_law(
    a: &Structure,
    i: &Interpretation,
    j: &Interpretation,
) -> Result<FunctorLawReport> {
    let fi = end_functor_map(a, i)?;
    let fj = end_functor_map(&fi.table.target, j)?;
    let fc = end_functor_map(a, &compose(i, j)?)?;
    let iota = identify(&fc.table, &fi.table, &fj.table)?;
    let mut failure = None;
    for s in 0..fc.source.len() {
        let lhs = fc.target.map(fc.hom.table[s]);
        let rhs = fj.target.map(fj.hom.table[fi.hom.table[s]]);
        if lhs.then(&iota) != iota.then(&rhs) {
            failure = Some(fc.source.map(s));
            break;
        }
    }
    Ok(FunctorLawReport {
        holds: failure.is_none(),
        elements: fc.source.len(),
        failure,
    })
}

fn reduct(b: &Structure, rels: &BTreeSet<String>, consts: &BTreeSet<String>) -> Result<Structure> {
    let sig = b.signature();
    let mut keep_r: Vec<usize> = (0..sig.relations().len())
        .filter(|&k| rels.contains(&sig.relations()[k].name))
        .collect();
    keep_r.sort_by(|&x, &y| sig.relations()[x].name.cmp(&sig.relations()[y].name));
    let mut keep_c: Vec<usize> = (0..sig.constants().len())
        .filter(|&k| consts.contains(&sig.constants()[k]))
        .collect();
    keep_c.sort_by(|&x, &y| sig.constants()[x].cmp(&sig.constants()[y]));
    let new_sig = Signature::new(
        keep_r
            .iter()
            .map(|&k| (sig.relations()[k].name.clone(), sig.relations()[k].arity)),
        keep_c.iter().map(|&k| sig.constants()[k].clone()),
    )?;
    Structure::new(
        b.name(),
        new_sig,
        b.size(),
        keep_r.iter().map(|&k| b.relation(k).to_tuples()).collect(),
        keep_c.iter().map(|&k| b.constants()[k]).collect(),
    )
}

/// Bijections `B1 -> B2` that are isomorphisms of the reducts to the shared
/// symbols, identity first when it is one.
fn identifications(b1: &Structure, b2: &Structure) -> Result<(Vec<FinMap>, bool)> {
    if b1.size() != b2.size() {
        return Ok((Vec::new(), b1.same_signature(b2)));
    }
    let same = b1.same_signature(b2);
    let (r1, r2) = if same {
        (b1.clone(), b2.clone())
    } else {
        let names = |s: &Structure| -> (BTreeSet<String>, BTreeSet<String>) {
            (
                s.signature()
                    .relations()
                    .iter()
                    .map(|r| format!("{}/{}", r.name, r.arity))
                    .collect(),
                s.signature().constants().iter().cloned().collect(),
            )
        };
        let (ra, ca) = names(b1);
        let (rb, cb) = names(b2);
        let rels: BTreeSet<String> = ra
            .intersection(&rb)
            .map(|s| s.split('/').next().unwrap().to_string())
            .collect();
        let consts: BTreeSet<String> = ca.intersection(&cb).cloned().collect();
        (reduct(b1, &rels, &consts)?, reduct(b2, &rels, &consts)?)
    };
    let cap = limits::monoid_cap();
    let mut out = Vec::new();
    let mut over = false;
    for_each_hom(&r1, &r2, MapFilter::AUTOMORPHISM, &[], &mut |f| {
        if out.len() as u64 >= cap {
            over = true;
            return false;
        }
        out.push(FinMap::new(f.to_vec()));
        true
    })?;
    if over {
        return Err(Error::Guard {
            what: "identifications".into(),
            required: cap as u128 + 1,
            cap: cap as u128,
        });
    }
    if let Some(k) = out
        .iter()
        .position(|f| f.images().iter().enumerate().all(|(x, &y)| x == y))
    {
        let id = out.remove(k);
        out.insert(0, id);
    }
    Ok((out, same))
}

#[derive(Clone, Debug, Serialize)]
pub struct HomotopyReport {
    pub level: Level,
    pub homotopic: bool,
    /// Whether the two targets share their whole signature (otherwise only
    /// the shared symbols are matched).
    pub same_signature: bool,
    /// The identification of the targets used for the verdict.
    pub identification: Option<FinMap>,
    pub candidates: usize,
    /// Definability of `I = {(x̄, ȳ) : ι(i1(x̄)) = i2(ȳ)}` at the level.
    pub verdict: Option<DefinabilityVerdict>,
    /// The two induced monoid maps agree under the identification.
    pub maps_equal: bool,
    /// For every candidate identification: definable iff the maps agree.
    pub lemma_consistent: bool,
}

/// Homotopy of two formula interpretations over `a`.
pub fn homotopic(
    a: &Structure,
    i1: &Interpretation,
    i2: &Interpretation,
    level: Level,
) -> Result<HomotopyReport> {
    homotopic_tables(a, &apply(i1, a)?, &apply(i2, a)?, level)
}

pub fn homotopic_tables(
    a: &Structure,
    t1: &TableInterpretation,
    t2: &TableInterpretation,
    level: Level,
) -> Result<HomotopyReport> {
    let d = Definer::new(a);
    for (k, t) in [t1, t2].into_iter().enumerate() {
        if !verify_with(&d, t, level.fragment())?.holds {
            return Err(Error::Interpretation(format!(
                "interpretation {} does not verify at {}",
                k + 1,
                level.fragment()
            )));
        }
    }
    let (cands, same_signature) = identifications(&t1.target, &t2.target)?;
    let m = level.monoid(&d)?;
    let induced1: Vec<FinMap> = (0..m.len())
        .map(|s| induced_map(t1, t1, &m.map(s)))
        .collect::<Result<_>>()?;
    let induced2: Vec<FinMap> = (0..m.len())
        .map(|s| induced_map(t2, t2, &m.map(s)))
        .collect::<Result<_>>()?;
    let classes2 = t2.classes();
    let mut chosen: Option<(FinMap, DefinabilityVerdict, bool)> = None;
    let mut first: Option<(FinMap, DefinabilityVerdict, bool)> = None;
    let mut consistent = true;
    for iota in &cands {
        let mut rows = BTreeSet::new();
        for (u, &b) in t1.universe.iter().zip(&t1.images) {
            for &k in &classes2[iota.apply(b)] {
                let mut row: Tuple = u.clone();
                row.extend_from_slice(&t2.universe[k]);
                rows.insert(row);
            }
        }
        let set = TupleSet::from_btree(t1.dim + t2.dim, a.size(), rows);
        let verdict = d.check(&set, level.fragment())?;
        let equal = induced1
            .iter()
            .zip(&induced2)
            .all(|(f1, f2)| f1.then(iota) == iota.then(f2));
        consistent &= verdict.definable == equal;
        if verdict.definable && chosen.is_none() {
            chosen = Some((iota.clone(), verdict.clone(), equal));
        }
        if first.is_none() {
            first = Some((iota.clone(), verdict, equal));
        }
    }
    let homotopic = chosen.is_some();
    let pick = chosen.or(first);
    Ok(HomotopyReport {
        level,
        homotopic,
        same_signature,
        candidates: cands.len(),
        maps_equal: pick.as_ref().is_some_and(|p| p.2),
        identification: pick.as_ref().map(|p| p.0.clone()),
        verdict: pick.map(|p| p.1),
        lemma_consistent: consistent,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct BiReport {
    pub level: Level,
    pub i_verified: bool,
    pub j_verified: bool,
    /// `compose(i, j)` against the identity of `A`.
    pub forward: HomotopyReport,
    /// `compose(j, i)` against the identity of `B`.
    pub backward: HomotopyReport,
    /// The induced map between the level monoids of `A` and `B`.
    pub iso: MonoidHom,
    pub inverse: MonoidHom,
    pub iso_verified: bool,
    pub holds: bool,
}

fn transported(
    t: &TableInterpretation,
    kappa: &FinMap,
    source: &TransformationMonoid,
    target: &TransformationMonoid,
) -> Result<MonoidHom> {
    let mut inv = vec![0usize; kappa.len()];
    for (x, &y) in kappa.images().iter().enumerate() {
        inv[y] = x;
    }
    let inv = FinMap::new(inv);
    let mut table = Vec::with_capacity(source.len());
    for s in 0..source.len() {
        let m = inv.then(&induced_map(t, t, &source.map(s))?).then(kappa);
        table.push(target.index_of_map(&m).ok_or_else(|| {
            Error::Interpretation(format!("induced map {m} is not in the target monoid"))
        })?);
    }
    Ok(MonoidHom { table })
}

/// Check that `i` (interpreting `B` in `A`) and `j` (interpreting `A` in
/// `B`) form a bi-interpretation at `level`.
pub fn biinterpretation_check(
    a: &Structure,
    b: &Structure,
    i: &Interpretation,
    j: &Interpretation,
    level: Level,
) -> Result<BiReport> {
    let ti = apply(i, a)?;
    let tj = apply(j, b)?;
    let kb = find_isomorphism(&ti.target, b)?.ok_or_else(|| {
        Error::Interpretation(format!(
            "{} does not produce a copy of {}",
            i.name,
            b.name()
        ))
    })?;
    let ka = find_isomorphism(&tj.target, a)?.ok_or_else(|| {
        Error::Interpretation(format!(
            "{} does not produce a copy of {}",
            j.name,
            a.name()
        ))
    })?;
    let da = Definer::new(a);
    let db = Definer::new(b);
    let i_verified = verify_with(&da, &ti, level.fragment())?.holds;
    let j_verified = verify_with(&db, &tj, level.fragment())?.holds;
    if !i_verified || !j_verified {
        return Err(Error::Interpretation(format!(
            "the interpretations do not both verify at {}",
            level.fragment()
        )));
    }
    let forward = homotopic(a, &compose(i, j)?, &library::identity(a.signature()), level)?;
    let backward = homotopic(b, &compose(j, i)?, &library::identity(b.signature()), level)?;
    let ma = level.monoid(&da)?;
    let mb = level.monoid(&db)?;
    let iso = transported(&ti, &kb, ma, mb)?;
    let inverse = transported(&tj, &ka, mb, ma)?;
    let iso_verified = verify_monoid_hom(&iso.table, ma, mb)?.is_hom
        && verify_monoid_hom(&inverse.table, mb, ma)?.is_hom
        && iso.then(&inverse) == MonoidHom::identity(ma)
        && inverse.then(&iso) == MonoidHom::identity(mb);
    Ok(BiReport {
        level,
        i_verified,
        j_verified,
        holds: forward.homotopic && backward.homotopic && iso_verified,
        forward,
        backward,
        iso,
        inverse,
        iso_verified,
    })
}
