//! Definability of tuple sets, decided by closure under map classes.
//!
//! | fragment | maps the set must be closed under |
//! |---|---|
//! | EXIST | self-embeddings |
//! | PEX | endomorphisms |
//! | POS | surjective endomorphisms |
//! | PEX_NEQ | injective endomorphisms |
//! | POS_NEQ | bijective endomorphisms |
//! | FO | automorphisms |
//! | PP | polymorphisms |
//! | QF | partial isomorphisms between tuples |
//!
//! Every verdict carries a certificate that is checked before it is
//! returned: a defining formula, or a map of the class moving a member of
//! the set outside it.

mod small;

use std::cell::{OnceCell, RefCell};
use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Serialize, Serializer};

use crate::algebra::{is_closed, orbit, TransformationMonoid};
use crate::csp::{Csp, Order};
use crate::error::{Error, Result};
use crate::logic::{
    canonical_diagram, classify, definable_set, for_each_formula, Bounds, Compiled, DiagramFlavor,
    Formula, Fragment, Term,
};
use crate::maps::{classify_map, for_each_hom, FinMap, MapFilter};
use crate::structure::{encode_power, power_any, Structure, Tuple, TupleSet};
use crate::{limits, maps};

/// The map that moves a member of the set outside it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WitnessMap {
    /// A total map; for polymorphisms its domain is the power `A^n` in the
    /// standard encoding.
    Total(FinMap),
    /// A partial map between elements (QF witnesses).
    Partial(Vec<Option<usize>>),
}

impl fmt::Display for WitnessMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WitnessMap::Total(m) => m.fmt(f),
            WitnessMap::Partial(p) => {
                f.write_str("partial [")?;
                for (i, x) in p.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    match x {
                        Some(y) => write!(f, "{y}")?,
                        None => f.write_str("_")?,
                    }
                }
                f.write_str("]")
            }
        }
    }
}

impl Serialize for WitnessMap {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    /// The argument tuples, all in the set (one, except for polymorphisms).
    pub tuples: Vec<Tuple>,
    pub map: WitnessMap,
    /// The image, not in the set.
    pub image: Tuple,
    pub class: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct DefinabilityVerdict {
    pub fragment: Fragment,
    pub definable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Formula>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

pub fn map_class(frag: Fragment) -> &'static str {
    match frag {
        Fragment::QF => "partial isomorphisms",
        Fragment::EXIST => "self-embeddings",
        Fragment::PEX => "endomorphisms",
        Fragment::POS => "surjective endomorphisms",
        Fragment::PEX_NEQ => "injective endomorphisms",
        Fragment::POS_NEQ => "bijective endomorphisms",
        Fragment::FO => "automorphisms",
        Fragment::PP => "polymorphisms",
    }
}

fn filter_of(frag: Fragment) -> Option<(MapFilter, DiagramFlavor)> {
    match frag {
        Fragment::EXIST => Some((MapFilter::EMBEDDING, DiagramFlavor::Full)),
        Fragment::PEX => Some((MapFilter::HOM, DiagramFlavor::Positive)),
        Fragment::POS => Some((MapFilter::SURJECTIVE, DiagramFlavor::Covering)),
        Fragment::PEX_NEQ => Some((MapFilter::INJECTIVE, DiagramFlavor::PositiveNeq)),
        Fragment::POS_NEQ => Some((MapFilter::BIJECTIVE, DiagramFlavor::CoveringNeq)),
        Fragment::FO => Some((MapFilter::AUTOMORPHISM, DiagramFlavor::Full)),
        Fragment::QF | Fragment::PP => None,
    }
}

/// Domain size above which PEX and POS skip the monoid.
const PINNED_FROM: usize = 8;

fn class_index(frag: Fragment) -> usize {
    match frag {
        Fragment::EXIST => 0,
        Fragment::PEX => 1,
        Fragment::POS => 2,
        Fragment::PEX_NEQ => 3,
        Fragment::POS_NEQ => 4,
        _ => 5,
    }
}

/// Definability questions over one structure, with the map classes and
/// intermediate results cached.
pub struct Definer<'a> {
    a: &'a Structure,
    classes: [OnceCell<TransformationMonoid>; 6],
    generated: RefCell<HashMap<(usize, Vec<Tuple>), TupleSet>>,
    types: RefCell<HashMap<usize, Vec<Vec<u64>>>>,
    small: OnceCell<Option<small::SmallDefs>>,
}

impl<'a> Definer<'a> {
    pub fn new(a: &'a Structure) -> Self {
        Definer {
            a,
            classes: Default::default(),
            generated: RefCell::new(HashMap::new()),
            types: RefCell::new(HashMap::new()),
            small: OnceCell::new(),
        }
    }

    pub fn structure(&self) -> &'a Structure {
        self.a
    }

    /// The characterizing monoid of a unary-map fragment.
    pub fn monoid(&self, frag: Fragment) -> Result<&TransformationMonoid> {
        let (filter, _) = filter_of(frag).ok_or_else(|| {
            Error::invalid(format!(
                "{frag} is not characterized by a monoid of self-maps"
            ))
        })?;
        let cell = &self.classes[class_index(frag)];
        if let Some(m) = cell.get() {
            return Ok(m);
        }
        let m = match filter {
            MapFilter::HOM => maps::end_monoid(self.a)?,
            MapFilter::EMBEDDING => maps::emb_monoid(self.a)?,
            MapFilter::AUTOMORPHISM => maps::aut_group(self.a)?,
            f => {
                let all = maps::search_homs(self.a, self.a, f, &[])?;
                let data = all
                    .iter()
                    .flat_map(|m| m.images().iter().map(|&x| x as u16))
                    .collect::<Vec<_>>();
                if self.a.size() > u16::MAX as usize {
                    return Err(Error::Guard {
                        what: "monoid degree".into(),
                        required: self.a.size() as u128,
                        cap: u16::MAX as u128,
                    });
                }
                TransformationMonoid::from_sorted_data(self.a.size(), data)
            }
        };
        Ok(cell.get_or_init(|| m))
    }

    pub fn check(&self, x: &TupleSet, frag: Fragment) -> Result<DefinabilityVerdict> {
        let verdict = self.decide(x, frag)?;
        self.validate(x, &verdict)?;
        Ok(verdict)
    }

    /// The verdict of [`Definer::check`] without the final certificate
    /// check, for callers that validate on their own.
    pub fn decide(&self, x: &TupleSet, frag: Fragment) -> Result<DefinabilityVerdict> {
        if x.domain() != self.a.size() {
            return Err(Error::invalid(format!(
                "tuple set over {} elements, structure has {}",
                x.domain(),
                self.a.size()
            )));
        }
        let verdict = match frag {
            Fragment::PP => self.check_pp(x)?,
            Fragment::QF => self.check_qf(x)?,
            _ => self.check_monoid(x, frag)?,
        };
        Ok(verdict)
    }

    fn validate(&self, x: &TupleSet, v: &DefinabilityVerdict) -> Result<()> {
        match (&v.certificate, &v.witness) {
            (Some(f), None) if v.definable => {
                if !classify(f).contains(&v.fragment) {
                    return Err(Error::Internal(format!(
                        "certificate {f} is not in {}",
                        v.fragment
                    )));
                }
                if definable_set(self.a, f, x.arity())? != *x {
                    return Err(Error::Internal(format!(
                        "certificate {f} does not define the set"
                    )));
                }
                Ok(())
            }
            (None, Some(w)) if !v.definable => {
                if validate_witness(self.a, x, v.fragment, w)? {
                    Ok(())
                } else {
                    Err(Error::Internal(format!(
                        "closure witness for {} does not validate",
                        v.fragment
                    )))
                }
            }
            _ => Err(Error::Internal(
                "verdict without a matching certificate".into(),
            )),
        }
    }

    fn check_monoid(&self, x: &TupleSet, frag: Fragment) -> Result<DefinabilityVerdict> {
        let (filter, flavor) = filter_of(frag).expect("monoid fragment");
        // Endomorphism monoids of larger structures are usually too big to
        // list; pinned searches cost a few hom searches per tuple instead.
        let uncached = self.classes[class_index(frag)].get().is_none();
        if uncached && !filter.injective && self.a.size() > PINNED_FROM {
            return self.check_pinned(x, frag, filter, flavor);
        }
        let m = match self.monoid(frag) {
            Ok(m) => m,
            Err(Error::Guard { .. }) => return self.check_pinned(x, frag, filter, flavor),
            Err(e) => return Err(e),
        };
        if let Some(w) = is_closed(x, m)? {
            return Ok(DefinabilityVerdict {
                fragment: frag,
                definable: false,
                certificate: None,
                witness: Some(Witness {
                    tuples: vec![w.tuple],
                    map: WitnessMap::Total(w.map),
                    image: w.image,
                    class: map_class(frag),
                }),
            });
        }
        let mut covered: BTreeSet<Tuple> = BTreeSet::new();
        let mut parts = Vec::new();
        for t in x.iter() {
            if covered.contains(t) {
                continue;
            }
            covered.extend(orbit(t, m)?.iter().cloned());
            parts.push(canonical_diagram(self.a, t, flavor)?);
        }
        Ok(positive(frag, Formula::or_of(parts)))
    }

    /// The same decision without the monoid: one pinned hom search per pair
    /// of a member and a candidate image. Used when the monoid is too large.
    fn check_pinned(
        &self,
        x: &TupleSet,
        frag: Fragment,
        filter: MapFilter,
        flavor: DiagramFlavor,
    ) -> Result<DefinabilityVerdict> {
        let k = x.arity();
        let candidates = limits::pow(self.a.size(), k);
        limits::check(
            "pinned searches",
            candidates.saturating_mul(x.len() as u128),
            limits::element_cap(),
        )?;
        let mut covered: BTreeSet<Tuple> = BTreeSet::new();
        let mut parts = Vec::new();
        for t in x.iter() {
            if covered.contains(t) {
                continue;
            }
            for u in self.a.all_tuples(k) {
                let Some(pins) = pin(t, &u) else { continue };
                let Some(f) = maps::find_hom(self.a, self.a, filter, &pins)? else {
                    continue;
                };
                if !x.contains(&u) {
                    return Ok(DefinabilityVerdict {
                        fragment: frag,
                        definable: false,
                        certificate: None,
                        witness: Some(Witness {
                            tuples: vec![t.clone()],
                            map: WitnessMap::Total(f),
                            image: u,
                            class: map_class(frag),
                        }),
                    });
                }
                covered.insert(u);
            }
            parts.push(canonical_diagram(self.a, t, flavor)?);
        }
        Ok(positive(frag, Formula::or_of(parts)))
    }

    fn type_table(&self, k: usize) -> Result<std::cell::Ref<'_, Vec<Vec<u64>>>> {
        if !self.types.borrow().contains_key(&k) {
            let total = limits::pow(self.a.size(), k);
            limits::check("tuples for type table", total, limits::element_cap())?;
            let table = self.a.all_tuples(k).map(|t| self.qf_type(&t)).collect();
            self.types.borrow_mut().insert(k, table);
        }
        Ok(std::cell::Ref::map(self.types.borrow(), |m| &m[&k]))
    }

    fn terms(&self, t: &[usize]) -> Vec<usize> {
        let mut v = t.to_vec();
        v.extend(self.a.constants());
        v
    }

    fn qf_type(&self, t: &[usize]) -> Vec<u64> {
        let v = self.terms(t);
        let mut bits: Vec<bool> = Vec::new();
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                bits.push(v[i] == v[j]);
            }
        }
        for rel in self.a.relations() {
            for idx in crate::structure::TupleIter::new(v.len(), rel.arity()) {
                let tup: Tuple = idx.iter().map(|&i| v[i]).collect();
                bits.push(rel.contains(&tup));
            }
        }
        let mut words = vec![0u64; bits.len().div_ceil(64)];
        for (i, b) in bits.into_iter().enumerate() {
            if b {
                words[i / 64] |= 1 << (i % 64);
            }
        }
        words
    }

    fn check_qf(&self, x: &TupleSet) -> Result<DefinabilityVerdict> {
        let k = x.arity();
        let n = self.a.size();
        let nterms = k + self.a.constants().len();
        let literals: u128 = (nterms * nterms) as u128
            + self
                .a
                .relations()
                .iter()
                .map(|r| limits::pow(nterms, r.arity()))
                .sum::<u128>();
        limits::check("type literals", literals, limits::atom_cap())?;
        let table = self.type_table(k)?;
        let code = |t: &[usize]| encode_power(&t.iter().rev().copied().collect::<Vec<_>>(), n);
        let mut inside: HashMap<&Vec<u64>, Tuple> = HashMap::new();
        for t in x.iter() {
            inside.entry(&table[code(t)]).or_insert_with(|| t.clone());
        }
        for (i, u) in self.a.all_tuples(k).enumerate() {
            if x.contains(&u) {
                continue;
            }
            if let Some(t) = inside.get(&table[i]) {
                let mut partial = vec![None; n];
                for (a, b) in self.terms(t).into_iter().zip(self.terms(&u)) {
                    partial[a] = Some(b);
                }
                return Ok(DefinabilityVerdict {
                    fragment: Fragment::QF,
                    definable: false,
                    certificate: None,
                    witness: Some(Witness {
                        tuples: vec![t.clone()],
                        map: WitnessMap::Partial(partial),
                        image: u,
                        class: map_class(Fragment::QF),
                    }),
                });
            }
        }
        let mut seen: BTreeSet<&Vec<u64>> = BTreeSet::new();
        let mut parts = Vec::new();
        for t in x.iter() {
            if seen.insert(&table[code(t)]) {
                parts.push(self.type_formula(t));
            }
        }
        Ok(positive(Fragment::QF, Formula::or_of(parts)))
    }

    /// The complete quantifier-free type of `t` over the variables and
    /// constants.
    fn type_formula(&self, t: &[usize]) -> Formula {
        let v = self.terms(t);
        let k = t.len();
        let term = |i: usize| {
            if i < k {
                Term::Var(i)
            } else {
                Term::Const(self.a.signature().constants()[i - k].clone())
            }
        };
        let mut parts = Vec::new();
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                let e = Formula::eq(term(i), term(j));
                parts.push(if v[i] == v[j] { e } else { Formula::not(e) });
            }
        }
        for (sym, rel) in self
            .a
            .signature()
            .relations()
            .iter()
            .zip(self.a.relations())
        {
            for idx in crate::structure::TupleIter::new(v.len(), rel.arity()) {
                let tup: Tuple = idx.iter().map(|&i| v[i]).collect();
                let atom = Formula::Atom(sym.name.clone(), idx.iter().map(|&i| term(i)).collect());
                parts.push(if rel.contains(&tup) {
                    atom
                } else {
                    Formula::not(atom)
                });
            }
        }
        if parts.is_empty() {
            Formula::True
        } else {
            Formula::and_of(parts)
        }
    }

    /// The least PP-definable set containing `ys`: images of the columns of
    /// `ys` under homomorphisms `A^m -> A`.
    fn generated(&self, ys: &[Tuple], k: usize) -> Result<TupleSet> {
        if let Some(s) = self.generated.borrow().get(&(k, ys.to_vec())) {
            return Ok(s.clone());
        }
        let s = self.generated_uncached(ys, k)?;
        self.generated
            .borrow_mut()
            .insert((k, ys.to_vec()), s.clone());
        Ok(s)
    }

    fn generated_uncached(&self, ys: &[Tuple], k: usize) -> Result<TupleSet> {
        let m = ys.len();
        let n = self.a.size();
        let p = power_any(self.a, m)?;
        let columns: Vec<usize> = (0..k)
            .map(|j| encode_power(&ys.iter().map(|y| y[j]).collect::<Vec<_>>(), n))
            .collect();
        let mut distinct: Vec<usize> = columns.clone();
        distinct.sort_unstable();
        distinct.dedup();
        // Put the distinct column elements first so they are enumerated.
        let mut var = vec![usize::MAX; p.size()];
        for (i, &c) in distinct.iter().enumerate() {
            var[c] = i;
        }
        let mut next = distinct.len();
        for v in var.iter_mut() {
            if *v == usize::MAX {
                *v = next;
                next += 1;
            }
        }
        let mut csp = Csp::new(p.size(), n);
        for (rp, ra) in p.relations().iter().zip(self.a.relations()) {
            for t in rp.iter() {
                csp.add_in(t.iter().map(|&e| var[e]).collect(), ra);
            }
        }
        for (&cp, &ca) in p.constants().iter().zip(self.a.constants()) {
            csp.fix(var[cp], ca);
        }
        let mut out: BTreeSet<Tuple> = BTreeSet::new();
        csp.run(distinct.len(), Order::Lex, &mut |_| true, &mut |vals| {
            out.insert(columns.iter().map(|c| vals[var[*c]]).collect());
            true
        });
        Ok(TupleSet::from_btree(k, n, out))
    }

    fn single_atom(&self, x: &TupleSet) -> Result<Option<Formula>> {
        let k = x.arity();
        let c = self.a.signature().constants();
        if k == 0 || k + c.len() > 6 {
            return Ok(None);
        }
        let term = |i: usize| {
            if i < k {
                Term::Var(i)
            } else {
                Term::Const(c[i - k].clone())
            }
        };
        let mut candidates = Vec::new();
        for i in 0..k + c.len() {
            for j in i..k + c.len() {
                candidates.push(Formula::eq(term(i), term(j)));
            }
        }
        for sym in self.a.signature().relations() {
            for idx in crate::structure::TupleIter::new(k + c.len(), sym.arity) {
                candidates.push(Formula::Atom(
                    sym.name.clone(),
                    idx.iter().map(|&i| term(i)).collect(),
                ));
            }
        }
        for f in candidates {
            if Compiled::new(self.a, &f, k)?.set() == *x {
                return Ok(Some(f));
            }
        }
        Ok(None)
    }

    fn check_pp(&self, x: &TupleSet) -> Result<DefinabilityVerdict> {
        if let Some(f) = self.single_atom(x)? {
            return Ok(positive(Fragment::PP, f));
        }
        if let Some(f) = self
            .small
            .get_or_init(|| small::SmallDefs::new(self.a))
            .as_ref()
            .and_then(|d| d.lookup(x))
        {
            return Ok(positive(Fragment::PP, f));
        }
        let k = x.arity();
        // Most failures already show under binary polymorphisms.
        let members: Vec<&Tuple> = x.iter().collect();
        for (i, s) in members.iter().enumerate() {
            for t in &members[i..] {
                let ys = [(*s).clone(), (*t).clone()];
                let gen = self.generated_uncached(&ys, k)?;
                let outside = gen.iter().find(|u| !x.contains(u)).cloned();
                if let Some(u) = outside {
                    return self.pp_witness(&ys, u);
                }
            }
        }
        // Grow a generating list, each time by the member that enlarges the
        // generated set most; the certificate is a diagram of A^|ys|.
        let mut ys: Vec<Tuple> = Vec::new();
        let mut gen = self.generated(&ys, k)?;
        loop {
            if let Some(t) = gen.iter().find(|t| !x.contains(t)) {
                return self.pp_witness(&ys, t.clone());
            }
            let missing: Vec<Tuple> = x.iter().filter(|t| !gen.contains(t)).cloned().collect();
            if missing.is_empty() {
                let p = power_any(self.a, ys.len())?;
                let n = self.a.size();
                let anchor: Vec<usize> = (0..k)
                    .map(|j| encode_power(&ys.iter().map(|y| y[j]).collect::<Vec<_>>(), n))
                    .collect();
                let f = canonical_diagram(&p, &anchor, DiagramFlavor::Positive)?;
                return Ok(positive(Fragment::PP, f));
            }
            let mut best: Option<(Tuple, TupleSet)> = None;
            for t in missing {
                let mut zs = ys.clone();
                zs.push(t.clone());
                let g = self.generated_uncached(&zs, k)?;
                if let Some(u) = g.iter().find(|u| !x.contains(u)).cloned() {
                    return self.pp_witness(&zs, u);
                }
                if best.as_ref().map_or(true, |(_, b)| g.len() > b.len()) {
                    best = Some((t, g));
                }
            }
            let (t, g) = best.expect("a missing member");
            ys.push(t);
            gen = g;
        }
    }

    fn pp_witness(&self, ys: &[Tuple], image: Tuple) -> Result<DefinabilityVerdict> {
        let p = power_any(self.a, ys.len())?;
        let n = self.a.size();
        let mut partial: Vec<(usize, usize)> = Vec::new();
        for (j, &v) in image.iter().enumerate() {
            let col = encode_power(&ys.iter().map(|y| y[j]).collect::<Vec<_>>(), n);
            partial.push((col, v));
        }
        let mut found = None;
        for_each_hom(&p, self.a, MapFilter::HOM, &partial, &mut |f| {
            found = Some(FinMap::new(f.to_vec()));
            false
        })?;
        let map = found
            .ok_or_else(|| Error::Internal("generated tuple without a polymorphism".into()))?;
        Ok(DefinabilityVerdict {
            fragment: Fragment::PP,
            definable: false,
            certificate: None,
            witness: Some(Witness {
                tuples: ys.to_vec(),
                map: WitnessMap::Total(map),
                image,
                class: map_class(Fragment::PP),
            }),
        })
    }
}

/// Pins sending `t` to `u` coordinatewise, or `None` if `t` repeats an
/// element that `u` splits.
fn pin(t: &[usize], u: &[usize]) -> Option<Vec<(usize, usize)>> {
    let mut pins: Vec<(usize, usize)> = Vec::with_capacity(t.len());
    for (&a, &b) in t.iter().zip(u) {
        match pins.iter().find(|p| p.0 == a) {
            Some(p) if p.1 != b => return None,
            Some(_) => {}
            None => pins.push((a, b)),
        }
    }
    Some(pins)
}

fn positive(frag: Fragment, f: Formula) -> DefinabilityVerdict {
    DefinabilityVerdict {
        fragment: frag,
        definable: true,
        certificate: Some(f),
        witness: None,
    }
}

/// Does `w` refute `frag`-definability of `x`? The map must belong to the
/// fragment's class, its arguments must lie in `x` and its image outside.
pub fn validate_witness(a: &Structure, x: &TupleSet, frag: Fragment, w: &Witness) -> Result<bool> {
    if w.tuples.iter().any(|t| !x.contains(t)) || x.contains(&w.image) || w.image.len() != x.arity()
    {
        return Ok(false);
    }
    match (&w.map, frag) {
        (WitnessMap::Partial(p), Fragment::QF) => {
            let [t] = w.tuples.as_slice() else {
                return Ok(false);
            };
            if p.len() != a.size() {
                return Ok(false);
            }
            let terms: Vec<usize> = t.iter().chain(a.constants()).copied().collect();
            let mut dom: Vec<usize> = terms.clone();
            dom.sort_unstable();
            dom.dedup();
            if (0..a.size()).any(|e| p[e].is_some() != dom.contains(&e)) {
                return Ok(false);
            }
            let img = |e: usize| p[e].unwrap();
            let images: BTreeSet<usize> = dom.iter().map(|&e| img(e)).collect();
            if images.len() != dom.len()
                || t.iter().map(|&e| img(e)).collect::<Tuple>() != w.image
                || a.constants().iter().any(|&c| img(c) != c)
            {
                return Ok(false);
            }
            for rel in a.relations() {
                for u in crate::structure::TupleIter::new(dom.len(), rel.arity()) {
                    let src: Tuple = u.iter().map(|&i| dom[i]).collect();
                    let dst: Tuple = src.iter().map(|&e| img(e)).collect();
                    if rel.contains(&src) != rel.contains(&dst) {
                        return Ok(false);
                    }
                }
            }
            Ok(true)
        }
        (WitnessMap::Total(f), Fragment::PP) => {
            let m = w.tuples.len();
            let p = power_any(a, m)?;
            if f.len() != p.size() || f.images().iter().any(|&y| y >= a.size()) {
                return Ok(false);
            }
            if !classify_map(&p, a, f)?.homomorphism {
                return Ok(false);
            }
            let image: Tuple = (0..x.arity())
                .map(|j| {
                    f.apply(encode_power(
                        &w.tuples.iter().map(|y| y[j]).collect::<Vec<_>>(),
                        a.size(),
                    ))
                })
                .collect();
            Ok(image == w.image)
        }
        (WitnessMap::Total(f), frag) => {
            let Some((filter, _)) = filter_of(frag) else {
                return Ok(false);
            };
            let [t] = w.tuples.as_slice() else {
                return Ok(false);
            };
            if f.len() != a.size() || f.images().iter().any(|&y| y >= a.size()) {
                return Ok(false);
            }
            let kind = classify_map(a, a, f)?;
            Ok(filter.accepts(&kind) && f.apply_tuple(t) == w.image)
        }
        _ => Ok(false),
    }
}

pub fn check(a: &Structure, x: &TupleSet, frag: Fragment) -> Result<DefinabilityVerdict> {
    Definer::new(a).check(x, frag)
}

/// A formula of `frag` defining `x`, or a refusal carrying the reason.
pub fn synthesize(a: &Structure, x: &TupleSet, frag: Fragment) -> Result<Formula> {
    let v = check(a, x, frag)?;
    match v.certificate {
        Some(f) => Ok(f),
        None => {
            let w = v.witness.expect("negative verdicts carry a witness");
            Err(Error::Refused(format!(
                "not {frag}-definable: {} sends {:?} to {:?}",
                w.map, w.tuples, w.image
            )))
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleVerdict {
    pub fragment: Fragment,
    pub bounds: Bounds,
    pub formula: Option<Formula>,
    pub examined: u64,
}

/// Scan the bounded enumeration for a formula defining `x` exactly.
pub fn oracle_check(
    a: &Structure,
    x: &TupleSet,
    frag: Fragment,
    bounds: Bounds,
) -> Result<OracleVerdict> {
    let k = x.arity();
    let mut found = None;
    let mut examined = 0u64;
    let mut failure = None;
    for_each_formula(a.signature(), frag, bounds, &mut |f| {
        examined += 1;
        if f.free_vars().iter().any(|&v| v >= k) {
            return true;
        }
        match Compiled::new(a, &f, k) {
            Ok(c) => {
                if c.set() == *x {
                    found = Some(f);
                    return false;
                }
                true
            }
            Err(e) => {
                failure = Some(e);
                false
            }
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(OracleVerdict {
        fragment: frag,
        bounds,
        formula: found,
        examined,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ModelCompleteReport {
    pub holds: bool,
    /// Every self-embedding is an automorphism.
    pub degenerate: bool,
    pub max_length: usize,
    pub pairs_checked: u64,
    /// For each self-embedding, an automorphism agreeing with it on the
    /// whole domain, when there is one.
    pub witnesses: Vec<(FinMap, Option<FinMap>)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<(FinMap, Tuple)>,
}

/// Density of the automorphisms among the self-embeddings, tested on all
/// tuples of length at most `k`.
pub fn is_model_complete(a: &Structure, k: usize) -> Result<ModelCompleteReport> {
    if k == 0 {
        return Err(Error::invalid("tuple length bound must be at least 1"));
    }
    let emb = maps::emb_monoid(a)?;
    let aut = maps::aut_group(a)?;
    let total: u128 = (1..=k).map(|l| limits::pow(a.size(), l)).sum();
    limits::check("tuples", total * emb.len() as u128, limits::monoid_cap())?;
    let mut pairs = 0u64;
    let mut failure = None;
    let mut witnesses = Vec::new();
    'outer: for s in emb.maps() {
        for l in 1..=k {
            for t in a.all_tuples(l) {
                pairs += 1;
                let target = s.apply_tuple(&t);
                if !aut.maps().any(|g| g.apply_tuple(&t) == target) {
                    failure = Some((s.clone(), t));
                    break 'outer;
                }
            }
        }
        let w = aut.maps().find(|g| *g == s);
        witnesses.push((s, w));
    }
    Ok(ModelCompleteReport {
        holds: failure.is_none(),
        degenerate: emb == aut,
        max_length: k,
        pairs_checked: pairs,
        witnesses,
        failure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{arrow, eq2, m1p, pureset};
    use crate::logic::parse_formula;

    fn set(a: &Structure, text: &str) -> TupleSet {
        TupleSet::parse(text, None, a.size()).unwrap()
    }

    #[test]
    fn doubleton_side_is_existential_not_positive() {
        let a = eq2(1, 1).unwrap();
        let x = set(&a, "{(1),(2)}");
        let d = Definer::new(&a);
        assert!(d.check(&x, Fragment::EXIST).unwrap().definable);
        let v = d.check(&x, Fragment::PEX).unwrap();
        assert!(!v.definable);
        let w = v.witness.unwrap();
        assert_eq!(w.tuples, vec![vec![1]]);
        assert_eq!(w.image, vec![0]);
    }

    #[test]
    fn doubleton_members_of_m1p_are_positive_existential() {
        let a = m1p(2, 2).unwrap();
        let x = TupleSet::new(1, a.size(), (2..a.size()).map(|e| vec![e])).unwrap();
        let v = check(&a, &x, Fragment::PEX).unwrap();
        assert!(v.definable);
        let f = parse_formula("(exists x1 (and (Q x1) (E x0 x1)))").unwrap();
        assert_eq!(definable_set(&a, &f, 1).unwrap(), x);
    }

    #[test]
    fn arrow_source_is_pp() {
        let a = arrow().unwrap();
        let x = set(&a, "{(0)}");
        let v = check(&a, &x, Fragment::PP).unwrap();
        assert!(v.definable);
        let f = parse_formula("(exists x1 (R x0 x1))").unwrap();
        assert_eq!(definable_set(&a, &f, 1).unwrap(), x);
    }

    #[test]
    fn inequality_is_not_pp_on_a_pure_set() {
        let a = pureset(3).unwrap();
        let x = TupleSet::new(2, 3, a.all_tuples(2).filter(|t| t[0] != t[1])).unwrap();
        let v = check(&a, &x, Fragment::PP).unwrap();
        assert!(!v.definable);
        assert!(check(&a, &x, Fragment::PEX_NEQ).unwrap().definable);
        assert!(check(&a, &x, Fragment::QF).unwrap().definable);
    }

    #[test]
    fn empty_set_under_pp() {
        // ARROW has no loop, so no constant polymorphism: ∅ is pp-definable.
        let a = arrow().unwrap();
        assert!(
            check(&a, &TupleSet::empty(1, 2), Fragment::PP)
                .unwrap()
                .definable
        );
        // A pure set: every pp formula is satisfiable, ∅ is not pp.
        let b = pureset(2).unwrap();
        let v = check(&b, &TupleSet::empty(1, 2), Fragment::PP).unwrap();
        assert!(!v.definable);
        assert!(v.witness.unwrap().tuples.is_empty());
    }

    #[test]
    fn one_definer_serves_several_arities() {
        let b = pureset(2).unwrap();
        let d = Definer::new(&b);
        for k in 1..=3 {
            let v = d.check(&TupleSet::empty(k, 2), Fragment::PP).unwrap();
            assert_eq!(v.witness.unwrap().image.len(), k);
        }
    }

    #[test]
    fn qf_witness_is_a_partial_isomorphism() {
        let a = eq2(1, 1).unwrap();
        let x = set(&a, "{(1)}");
        let v = check(&a, &x, Fragment::QF).unwrap();
        assert!(!v.definable);
        assert_eq!(v.witness.unwrap().map.to_string(), "partial [_ 0 _]");
    }

    #[test]
    fn model_completeness_is_degenerate() {
        let a = eq2(1, 1).unwrap();
        let r = is_model_complete(&a, 3).unwrap();
        assert!(r.holds && r.degenerate);
        assert!(r.witnesses.iter().all(|(s, w)| w.as_ref() == Some(s)));
    }

    #[test]
    fn oracle_finds_small_definitions() {
        let a = arrow().unwrap();
        let x = set(&a, "{(0)}");
        let o = oracle_check(&a, &x, Fragment::PEX, Bounds::new(2, 3).unwrap()).unwrap();
        let f = o.formula.unwrap();
        assert_eq!(definable_set(&a, &f, 1).unwrap(), x);
    }

    #[test]
    fn pinned_search_agrees_with_the_monoid() {
        for a in [eq2(1, 1).unwrap(), m1p(2, 1).unwrap(), arrow().unwrap()] {
            let d = Definer::new(&a);
            for k in 1..=2 {
                let all: Vec<Tuple> = a.all_tuples(k).collect();
                for bits in 0u32..(1 << all.len()).min(64) {
                    let x = TupleSet::new(
                        k,
                        a.size(),
                        all.iter()
                            .enumerate()
                            .filter(|(i, _)| bits >> i & 1 == 1)
                            .map(|(_, t)| t.clone()),
                    )
                    .unwrap();
                    for frag in [Fragment::PEX, Fragment::EXIST, Fragment::PEX_NEQ] {
                        let (filter, flavor) = filter_of(frag).unwrap();
                        let v = d.check_pinned(&x, frag, filter, flavor).unwrap();
                        assert_eq!(
                            v.definable,
                            d.decide(&x, frag).unwrap().definable,
                            "{x} {frag}"
                        );
                        d.validate(&x, &v).unwrap();
                    }
                }
            }
        }
    }
}
