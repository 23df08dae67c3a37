//! Maps between finite structures: classification and enumeration of
//! homomorphisms, embeddings, automorphisms and polymorphisms.
//!
//! Maps act on the right: `compose(f, g)` applies `f` first.

use std::fmt;

use serde::Serialize;

use crate::algebra::TransformationMonoid;
use crate::csp::{Csp, Order};
use crate::error::{Error, Result};
use crate::limits;
use crate::structure::{decode_power, encode_power, power, Structure, Tuple, TupleSet};

/// A total map given by its image table.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct FinMap {
    images: Vec<usize>,
}

impl FinMap {
    pub fn new(images: Vec<usize>) -> Self {
        FinMap { images }
    }

    pub fn identity(n: usize) -> Self {
        FinMap {
            images: (0..n).collect(),
        }
    }

    pub fn constant(n: usize, c: usize) -> Self {
        FinMap { images: vec![c; n] }
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn into_images(self) -> Vec<usize> {
        self.images
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn apply(&self, x: usize) -> usize {
        self.images[x]
    }

    pub fn apply_tuple(&self, t: &[usize]) -> Tuple {
        t.iter().map(|&x| self.images[x]).collect()
    }

    /// `self` first, then `other`.
    pub fn then(&self, other: &FinMap) -> FinMap {
        FinMap {
            images: self.images.iter().map(|&x| other.images[x]).collect(),
        }
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = std::collections::HashSet::with_capacity(self.images.len());
        self.images.iter().all(|x| seen.insert(*x))
    }

    pub fn is_surjective(&self, target_size: usize) -> bool {
        let mut hit = vec![false; target_size];
        for &x in &self.images {
            if x < target_size {
                hit[x] = true;
            }
        }
        hit.into_iter().all(|b| b)
    }

    pub fn is_constant(&self) -> bool {
        self.images.windows(2).all(|w| w[0] == w[1])
    }

    /// Parse `map [2 0 1]` (the `map` keyword and brackets are optional).
    pub fn parse(text: &str) -> Result<FinMap> {
        let t = text.trim();
        let t = t.strip_prefix("map").unwrap_or(t).trim();
        let t = t
            .strip_prefix('[')
            .and_then(|x| x.strip_suffix(']'))
            .unwrap_or(t);
        let images = t
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|p| !p.is_empty())
            .map(|p| {
                p.parse::<usize>()
                    .map_err(|_| Error::parse(1, 1, format!("`{p}` is not an element")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FinMap { images })
    }
}

impl fmt::Display for FinMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.images.iter().map(usize::to_string).collect();
        write!(f, "map [{}]", parts.join(" "))
    }
}

/// `f` then `g`.
pub fn compose(f: &FinMap, g: &FinMap) -> FinMap {
    f.then(g)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct MapKind {
    pub homomorphism: bool,
    pub strong: bool,
    pub injective: bool,
    pub surjective: bool,
}

impl MapKind {
    pub fn is_embedding(&self) -> bool {
        self.homomorphism && self.strong && self.injective
    }

    pub fn is_automorphism(&self) -> bool {
        self.is_embedding() && self.surjective
    }

    pub fn flags(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        for (on, name) in [
            (self.homomorphism, "homomorphism"),
            (self.strong, "strong"),
            (self.injective, "injective"),
            (self.surjective, "surjective"),
            (self.is_embedding(), "embedding"),
            (self.is_automorphism(), "automorphism"),
        ] {
            if on {
                out.push(name);
            }
        }
        out
    }
}

/// Which homomorphisms a search returns. Every result is a homomorphism;
/// the flags add requirements.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MapFilter {
    pub injective: bool,
    pub surjective: bool,
    pub strong: bool,
}

impl MapFilter {
    pub const HOM: MapFilter = MapFilter {
        injective: false,
        surjective: false,
        strong: false,
    };
    pub const INJECTIVE: MapFilter = MapFilter {
        injective: true,
        surjective: false,
        strong: false,
    };
    pub const SURJECTIVE: MapFilter = MapFilter {
        injective: false,
        surjective: true,
        strong: false,
    };
    pub const BIJECTIVE: MapFilter = MapFilter {
        injective: true,
        surjective: true,
        strong: false,
    };
    pub const EMBEDDING: MapFilter = MapFilter {
        injective: true,
        surjective: false,
        strong: true,
    };
    pub const AUTOMORPHISM: MapFilter = MapFilter {
        injective: true,
        surjective: true,
        strong: true,
    };

    /// Comma-separated flags: `hom`, `injective`, `surjective`, `strong`,
    /// `bijective`, `embedding`, `automorphism`.
    pub fn parse(text: &str) -> Result<MapFilter> {
        let mut f = MapFilter::HOM;
        for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part {
                "hom" | "homomorphism" | "end" | "endomorphism" => {}
                "injective" => f.injective = true,
                "surjective" => f.surjective = true,
                "strong" => f.strong = true,
                "bijective" => {
                    f.injective = true;
                    f.surjective = true;
                }
                "embedding" | "emb" => {
                    f = MapFilter {
                        strong: true,
                        injective: true,
                        ..f
                    }
                }
                "automorphism" | "aut" => f = MapFilter::AUTOMORPHISM,
                other => return Err(Error::invalid(format!("unknown map flag `{other}`"))),
            }
        }
        Ok(f)
    }

    pub fn accepts(&self, kind: &MapKind) -> bool {
        kind.homomorphism
            && (!self.injective || kind.injective)
            && (!self.surjective || kind.surjective)
            && (!self.strong || kind.strong)
    }
}

fn check_shape(a: &Structure, b: &Structure, f: &[usize]) -> Result<()> {
    a.require_same_signature(b)?;
    if f.len() != a.size() {
        return Err(Error::Arity {
            expected: a.size(),
            found: f.len(),
        });
    }
    if let Some(&x) = f.iter().find(|&&x| x >= b.size()) {
        return Err(Error::invalid(format!(
            "image {x} outside the target domain"
        )));
    }
    Ok(())
}

pub fn classify_map(a: &Structure, b: &Structure, f: &FinMap) -> Result<MapKind> {
    check_shape(a, b, f.images())?;
    Ok(kind_of(a, b, f.images()))
}

pub(crate) fn kind_of(a: &Structure, b: &Structure, f: &[usize]) -> MapKind {
    let fm = FinMap::new(f.to_vec());
    MapKind {
        homomorphism: is_hom(a, b, f),
        strong: is_strong(a, b, f),
        injective: fm.is_injective(),
        surjective: fm.is_surjective(b.size()),
    }
}

pub(crate) fn is_hom(a: &Structure, b: &Structure, f: &[usize]) -> bool {
    if a.constants()
        .iter()
        .zip(b.constants())
        .any(|(&ca, &cb)| f[ca] != cb)
    {
        return false;
    }
    let mut buf = Vec::new();
    a.relations().iter().zip(b.relations()).all(|(ra, rb)| {
        ra.iter().all(|t| {
            buf.clear();
            buf.extend(t.iter().map(|&x| f[x]));
            rb.contains(&buf)
        })
    })
}

/// Relations are reflected: every source tuple whose image lies in a relation
/// lies in that relation itself.
pub(crate) fn is_strong(a: &Structure, b: &Structure, f: &[usize]) -> bool {
    let mut fibers: Vec<Vec<usize>> = vec![Vec::new(); b.size()];
    for (x, &y) in f.iter().enumerate() {
        fibers[y].push(x);
    }
    for (ra, rb) in a.relations().iter().zip(b.relations()) {
        for t in rb.iter() {
            if t.iter().any(|&y| fibers[y].is_empty()) {
                continue;
            }
            let mut idx = vec![0usize; t.len()];
            let mut pre: Vec<usize> = t.iter().map(|&y| fibers[y][0]).collect();
            loop {
                if !ra.contains(&pre) {
                    return false;
                }
                let mut p = 0;
                loop {
                    if p == t.len() {
                        break;
                    }
                    idx[p] += 1;
                    if idx[p] < fibers[t[p]].len() {
                        pre[p] = fibers[t[p]][idx[p]];
                        break;
                    }
                    idx[p] = 0;
                    pre[p] = fibers[t[p]][0];
                    p += 1;
                }
                if p == t.len() {
                    break;
                }
            }
        }
    }
    true
}

fn hom_csp<'a>(
    a: &Structure,
    b: &'a Structure,
    filter: MapFilter,
    partial: &[(usize, usize)],
) -> Result<Csp<'a>> {
    a.require_same_signature(b)?;
    let mut csp = Csp::new(a.size(), b.size());
    for (ra, rb) in a.relations().iter().zip(b.relations()) {
        for t in ra.iter() {
            csp.add_in(t.to_vec(), rb);
        }
    }
    for (&ca, &cb) in a.constants().iter().zip(b.constants()) {
        csp.fix(ca, cb);
    }
    for &(x, y) in partial {
        if x >= a.size() || y >= b.size() {
            return Err(Error::invalid(format!(
                "partial assignment {x}->{y} out of range"
            )));
        }
        csp.fix(x, y);
    }
    let all: Vec<usize> = (0..a.size()).collect();
    if filter.injective {
        csp.set_alldiff(&all);
    }
    if filter.surjective {
        csp.set_cover(&all);
    }
    Ok(csp)
}

/// Stream the matching homomorphisms `A -> B` extending `partial` in
/// lexicographic order of image tables. `visit` returns whether to continue.
pub fn for_each_hom(
    a: &Structure,
    b: &Structure,
    filter: MapFilter,
    partial: &[(usize, usize)],
    visit: &mut dyn FnMut(&[usize]) -> bool,
) -> Result<()> {
    let csp = hom_csp(a, b, filter, partial)?;
    let mut leaf = |f: &[usize]| !filter.strong || is_strong(a, b, f);
    csp.run(a.size(), Order::Lex, &mut leaf, visit);
    Ok(())
}

pub fn search_homs(
    a: &Structure,
    b: &Structure,
    filter: MapFilter,
    partial: &[(usize, usize)],
) -> Result<Vec<FinMap>> {
    let cap = limits::monoid_cap();
    let mut out = Vec::new();
    let mut over = false;
    for_each_hom(a, b, filter, partial, &mut |f| {
        if out.len() as u64 >= cap {
            over = true;
            return false;
        }
        out.push(FinMap::new(f.to_vec()));
        true
    })?;
    if over {
        return Err(Error::Guard {
            what: "map enumeration".into(),
            required: cap as u128 + 1,
            cap: cap as u128,
        });
    }
    Ok(out)
}

/// Some matching homomorphism, found with smallest-domain-first search (not
/// necessarily the lexicographically least one).
pub fn find_hom(
    a: &Structure,
    b: &Structure,
    filter: MapFilter,
    partial: &[(usize, usize)],
) -> Result<Option<FinMap>> {
    let csp = hom_csp(a, b, filter, partial)?;
    let mut leaf = |f: &[usize]| !filter.strong || is_strong(a, b, f);
    Ok(csp.find(&mut leaf).map(FinMap::new))
}

pub fn count_homs(a: &Structure, b: &Structure, filter: MapFilter) -> Result<u64> {
    let mut n = 0u64;
    for_each_hom(a, b, filter, &[], &mut |_| {
        n += 1;
        true
    })?;
    Ok(n)
}

/// The lexicographically least isomorphism `A -> B`, if any.
pub fn find_isomorphism(a: &Structure, b: &Structure) -> Result<Option<FinMap>> {
    if !a.same_signature(b) || a.size() != b.size() {
        return Ok(None);
    }
    let mut found = None;
    for_each_hom(a, b, MapFilter::AUTOMORPHISM, &[], &mut |f| {
        found = Some(FinMap::new(f.to_vec()));
        false
    })?;
    Ok(found)
}

fn self_monoid(a: &Structure, filter: MapFilter) -> Result<TransformationMonoid> {
    if a.size() > u16::MAX as usize {
        return Err(Error::Guard {
            what: "monoid degree".into(),
            required: a.size() as u128,
            cap: u16::MAX as u128,
        });
    }
    let cap = limits::monoid_cap();
    let mut data: Vec<u16> = Vec::new();
    let mut count = 0u64;
    let mut over = false;
    for_each_hom(a, a, filter, &[], &mut |f| {
        if count >= cap {
            over = true;
            return false;
        }
        count += 1;
        data.extend(f.iter().map(|&x| x as u16));
        true
    })?;
    if over {
        return Err(Error::Guard {
            what: format!("monoid of {}", a.name()),
            required: cap as u128 + 1,
            cap: cap as u128,
        });
    }
    Ok(TransformationMonoid::from_sorted_data(a.size(), data))
}

pub fn end_monoid(a: &Structure) -> Result<TransformationMonoid> {
    self_monoid(a, MapFilter::HOM)
}

pub fn emb_monoid(a: &Structure) -> Result<TransformationMonoid> {
    self_monoid(a, MapFilter::EMBEDDING)
}

pub fn aut_group(a: &Structure) -> Result<TransformationMonoid> {
    self_monoid(a, MapFilter::AUTOMORPHISM)
}

/// All homomorphisms `A^n -> A`.
pub fn polymorphisms(a: &Structure, n: usize) -> Result<Vec<FinMap>> {
    let p = power(a, n)?;
    search_homs(&p, a, MapFilter::HOM, &[])
}

/// A failure of `f: A^n -> A` to preserve `X`: the `n` argument tuples and
/// their coordinatewise image.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PreservationWitness {
    pub tuples: Vec<Tuple>,
    pub image: Tuple,
}

/// Does `f: A^n -> A` (given by its table over the power encoding) map every
/// `n`-choice of tuples from `X` into `X`?
pub fn preserves(
    a: &Structure,
    f: &FinMap,
    n: usize,
    x: &TupleSet,
) -> Result<Option<PreservationWitness>> {
    let expected = limits::pow(a.size(), n);
    if f.len() as u128 != expected {
        return Err(Error::Arity {
            expected: expected as usize,
            found: f.len(),
        });
    }
    if x.domain() != a.size() {
        return Err(Error::invalid("tuple set lives over a different domain"));
    }
    let tuples: Vec<&Tuple> = x.iter().collect();
    if tuples.is_empty() || n == 0 {
        return Ok(None);
    }
    let k = x.arity();
    let mut pick = vec![0usize; n];
    let mut coords = vec![0usize; n];
    loop {
        let image: Tuple = (0..k)
            .map(|p| {
                for (j, &i) in pick.iter().enumerate() {
                    coords[j] = tuples[i][p];
                }
                f.apply(encode_power(&coords, a.size()))
            })
            .collect();
        if !x.contains(&image) {
            return Ok(Some(PreservationWitness {
                tuples: pick.iter().map(|&i| tuples[i].clone()).collect(),
                image,
            }));
        }
        let mut j = n;
        loop {
            if j == 0 {
                return Ok(None);
            }
            j -= 1;
            pick[j] += 1;
            if pick[j] < tuples.len() {
                break;
            }
            pick[j] = 0;
        }
    }
}

/// The coordinate projection `A^n -> A` onto coordinate `i`.
pub fn projection(size: usize, n: usize, i: usize) -> FinMap {
    let total = limits::pow(size, n) as usize;
    FinMap::new((0..total).map(|c| decode_power(c, size, n)[i]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    #[test]
    fn strongness_on_constant_map() {
        let a = corpus::eq2(1, 1).unwrap();
        let k = classify_map(&a, &a, &FinMap::constant(3, 0)).unwrap();
        assert!(k.homomorphism && !k.strong && !k.injective && !k.surjective);
    }

    #[test]
    fn filter_parsing() {
        assert_eq!(
            MapFilter::parse("injective,surjective").unwrap(),
            MapFilter::BIJECTIVE
        );
        assert_eq!(MapFilter::parse("embedding").unwrap(), MapFilter::EMBEDDING);
        assert!(MapFilter::parse("bogus").is_err());
    }

    #[test]
    fn map_text_round_trip() {
        let f = FinMap::new(vec![2, 0, 1]);
        assert_eq!(f.to_string(), "map [2 0 1]");
        assert_eq!(FinMap::parse(&f.to_string()).unwrap(), f);
    }
}
