//! Finite relational structures with constants.
//!
//! Elements are `0..n`. Relations are stored as sorted, deduplicated flat
//! tuple arrays; membership uses a dense bitmap when `n^arity` is small and
//! binary search otherwise.

mod format;
mod tupleset;

pub use format::{load_structure, to_json, to_text};
pub use tupleset::{format_tuple, TupleSet};

use std::fmt;

use crate::error::{Error, Result};
use crate::limits;

pub type Tuple = Vec<usize>;

const RESERVED: &[&str] = &["and", "or", "not", "exists", "forall", "top", "bot"];

/// Identifiers: `[A-Za-z_][A-Za-z0-9_]*`, not a formula keyword and not of
/// the variable shape `x<digits>`.
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    if !chars.all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return false;
    }
    if RESERVED.contains(&s) {
        return false;
    }
    !is_variable_name(s)
}

pub(crate) fn is_variable_name(s: &str) -> bool {
    s.len() > 1 && s.starts_with('x') && s[1..].bytes().all(|b| b.is_ascii_digit())
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RelationSymbol {
    pub name: String,
    pub arity: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Signature {
    relations: Vec<RelationSymbol>,
    constants: Vec<String>,
}

impl Signature {
    pub fn new<R, C>(relations: R, constants: C) -> Result<Self>
    where
        R: IntoIterator<Item = (String, usize)>,
        C: IntoIterator<Item = String>,
    {
        let mut sig = Signature::default();
        for (name, arity) in relations {
            sig.push_relation(name, arity)?;
        }
        for name in constants {
            sig.push_constant(name)?;
        }
        Ok(sig)
    }

    fn check_fresh(&self, name: &str) -> Result<()> {
        if !is_identifier(name) {
            return Err(Error::invalid(format!(
                "`{name}` is not a valid symbol name"
            )));
        }
        if self.relation_index(name).is_some() || self.constant_index(name).is_some() {
            return Err(Error::invalid(format!("symbol `{name}` declared twice")));
        }
        Ok(())
    }

    pub fn push_relation(&mut self, name: String, arity: usize) -> Result<()> {
        self.check_fresh(&name)?;
        if arity == 0 {
            return Err(Error::invalid(format!("relation `{name}` has arity 0")));
        }
        self.relations.push(RelationSymbol { name, arity });
        Ok(())
    }

    pub fn push_constant(&mut self, name: String) -> Result<()> {
        self.check_fresh(&name)?;
        self.constants.push(name);
        Ok(())
    }

    pub fn relations(&self) -> &[RelationSymbol] {
        &self.relations
    }

    pub fn constants(&self) -> &[String] {
        &self.constants
    }

    pub fn relation_index(&self, name: &str) -> Option<usize> {
        self.relations.iter().position(|r| r.name == name)
    }

    pub fn constant_index(&self, name: &str) -> Option<usize> {
        self.constants.iter().position(|c| c == name)
    }

    pub fn is_relational(&self) -> bool {
        self.constants.is_empty()
    }

    /// A name not yet used by any symbol, derived from `base`.
    pub fn fresh_name(&self, base: &str) -> String {
        let taken = |s: &str| self.relation_index(s).is_some() || self.constant_index(s).is_some();
        if !taken(base) && is_identifier(base) {
            return base.to_string();
        }
        (1..)
            .map(|i| format!("{base}_{i}"))
            .find(|s| !taken(s))
            .unwrap()
    }
}

/// One relation table.
#[derive(Clone, Debug)]
pub struct Relation {
    arity: usize,
    flat: Vec<usize>,
    dense: Option<Vec<u64>>,
    domain: usize,
}

const DENSE_LIMIT: u128 = 1 << 22;

impl Relation {
    fn new(arity: usize, domain: usize, mut tuples: Vec<Tuple>) -> Result<Self> {
        for t in &tuples {
            if t.len() != arity {
                return Err(Error::Arity {
                    expected: arity,
                    found: t.len(),
                });
            }
            if let Some(&e) = t.iter().find(|&&e| e >= domain) {
                return Err(Error::invalid(format!(
                    "tuple entry {e} out of range for domain size {domain}"
                )));
            }
        }
        tuples.sort_unstable();
        tuples.dedup();
        let flat: Vec<usize> = tuples.into_iter().flatten().collect();
        Ok(Self::from_sorted_flat(arity, domain, flat))
    }

    pub(crate) fn from_sorted_flat(arity: usize, domain: usize, flat: Vec<usize>) -> Self {
        let cells = limits::pow(domain, arity);
        let dense = (cells <= DENSE_LIMIT).then(|| {
            let mut bits = vec![0u64; (cells as usize).div_ceil(64).max(1)];
            for t in flat.chunks_exact(arity) {
                let c = encode_cell(t, domain);
                bits[c / 64] |= 1 << (c % 64);
            }
            bits
        });
        Relation {
            arity,
            flat,
            dense,
            domain,
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.flat.len() / self.arity
    }

    pub fn is_empty(&self) -> bool {
        self.flat.is_empty()
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, usize> {
        self.flat.chunks_exact(self.arity)
    }

    pub fn tuple(&self, i: usize) -> &[usize] {
        &self.flat[i * self.arity..(i + 1) * self.arity]
    }

    pub fn contains(&self, t: &[usize]) -> bool {
        debug_assert_eq!(t.len(), self.arity);
        if let Some(bits) = &self.dense {
            if t.iter().any(|&e| e >= self.domain) {
                return false;
            }
            let c = encode_cell(t, self.domain);
            return bits[c / 64] >> (c % 64) & 1 == 1;
        }
        let (mut lo, mut hi) = (0, self.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.tuple(mid).cmp(t) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => return true,
            }
        }
        false
    }

    pub fn to_tuples(&self) -> Vec<Tuple> {
        self.iter().map(<[usize]>::to_vec).collect()
    }
}

impl PartialEq for Relation {
    fn eq(&self, other: &Self) -> bool {
        self.arity == other.arity && self.flat == other.flat
    }
}

impl Eq for Relation {}

fn encode_cell(t: &[usize], domain: usize) -> usize {
    t.iter().fold(0, |acc, &e| acc * domain + e)
}

/// A finite structure. Equality compares content and ignores the name.
#[derive(Clone, Debug)]
pub struct Structure {
    name: String,
    signature: Signature,
    size: usize,
    relations: Vec<Relation>,
    constants: Vec<usize>,
}

impl PartialEq for Structure {
    fn eq(&self, other: &Self) -> bool {
        self.signature == other.signature
            && self.size == other.size
            && self.relations == other.relations
            && self.constants == other.constants
    }
}

impl Eq for Structure {}

impl Structure {
    pub fn new(
        name: impl Into<String>,
        signature: Signature,
        size: usize,
        relations: Vec<Vec<Tuple>>,
        constants: Vec<usize>,
    ) -> Result<Self> {
        if size == 0 {
            return Err(Error::invalid("empty domains are not allowed"));
        }
        limits::check("domain size", size as u128, limits::element_cap())?;
        if relations.len() != signature.relations().len() {
            return Err(Error::Signature(format!(
                "{} relation tables for {} relation symbols",
                relations.len(),
                signature.relations().len()
            )));
        }
        if constants.len() != signature.constants().len() {
            return Err(Error::Signature(format!(
                "{} constant values for {} constant symbols",
                constants.len(),
                signature.constants().len()
            )));
        }
        for (name, &v) in signature.constants().iter().zip(&constants) {
            if v >= size {
                return Err(Error::invalid(format!(
                    "constant `{name}` = {v} out of range for domain size {size}"
                )));
            }
        }
        let relations = signature
            .relations()
            .iter()
            .zip(relations)
            .map(|(sym, tuples)| {
                Relation::new(sym.arity, size, tuples).map_err(|e| match e {
                    Error::Invalid(m) => Error::invalid(format!("relation `{}`: {m}", sym.name)),
                    other => other,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Structure {
            name: name.into(),
            signature,
            size,
            relations,
            constants,
        })
    }

    pub(crate) fn from_parts(
        name: String,
        signature: Signature,
        size: usize,
        relations: Vec<Relation>,
        constants: Vec<usize>,
    ) -> Self {
        Structure {
            name,
            signature,
            size,
            relations,
            constants,
        }
    }

    pub fn builder(name: impl Into<String>, size: usize) -> StructureBuilder {
        StructureBuilder {
            name: name.into(),
            size,
            relations: Vec::new(),
            constants: Vec::new(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn relation(&self, i: usize) -> &Relation {
        &self.relations[i]
    }

    pub fn relation_by_name(&self, name: &str) -> Option<&Relation> {
        self.signature
            .relation_index(name)
            .map(|i| &self.relations[i])
    }

    pub fn constants(&self) -> &[usize] {
        &self.constants
    }

    pub fn constant_by_name(&self, name: &str) -> Option<usize> {
        self.signature
            .constant_index(name)
            .map(|i| self.constants[i])
    }

    pub fn same_signature(&self, other: &Structure) -> bool {
        self.signature == other.signature
    }

    pub fn require_same_signature(&self, other: &Structure) -> Result<()> {
        if self.same_signature(other) {
            Ok(())
        } else {
            Err(Error::Signature(format!(
                "`{}` and `{}` have different signatures",
                self.name, other.name
            )))
        }
    }

    /// All tuples of `A^k` in lexicographic order.
    pub fn all_tuples(&self, k: usize) -> TupleIter {
        TupleIter::new(self.size, k)
    }
}

pub struct StructureBuilder {
    name: String,
    size: usize,
    relations: Vec<(String, usize, Vec<Tuple>)>,
    constants: Vec<(String, usize)>,
}

impl StructureBuilder {
    pub fn relation(mut self, name: &str, arity: usize, tuples: Vec<Tuple>) -> Self {
        self.relations.push((name.to_string(), arity, tuples));
        self
    }

    pub fn unary(self, name: &str, elements: impl IntoIterator<Item = usize>) -> Self {
        let tuples = elements.into_iter().map(|e| vec![e]).collect();
        self.relation(name, 1, tuples)
    }

    pub fn constant(mut self, name: &str, value: usize) -> Self {
        self.constants.push((name.to_string(), value));
        self
    }

    pub fn build(self) -> Result<Structure> {
        let sig = Signature::new(
            self.relations.iter().map(|(n, a, _)| (n.clone(), *a)),
            self.constants.iter().map(|(n, _)| n.clone()),
        )?;
        Structure::new(
            self.name,
            sig,
            self.size,
            self.relations.into_iter().map(|(_, _, t)| t).collect(),
            self.constants.into_iter().map(|(_, v)| v).collect(),
        )
    }
}

/// Lexicographic enumeration of `{0..n}^k`.
pub struct TupleIter {
    n: usize,
    current: Option<Tuple>,
}

impl TupleIter {
    pub fn new(n: usize, k: usize) -> Self {
        let current = if n == 0 && k > 0 {
            None
        } else {
            Some(vec![0; k])
        };
        TupleIter { n, current }
    }
}

impl Iterator for TupleIter {
    type Item = Tuple;

    fn next(&mut self) -> Option<Tuple> {
        let out = self.current.clone()?;
        let cur = self.current.as_mut().unwrap();
        let mut i = cur.len();
        loop {
            if i == 0 {
                self.current = None;
                break;
            }
            i -= 1;
            cur[i] += 1;
            if cur[i] < self.n {
                break;
            }
            cur[i] = 0;
        }
        Some(out)
    }
}

/// Element code of a coordinate vector in `A^m`: coordinate 0 is the least
/// significant digit in base `n`.
pub fn encode_power(coords: &[usize], n: usize) -> usize {
    coords.iter().rev().fold(0, |acc, &c| acc * n + c)
}

pub fn decode_power(mut code: usize, n: usize, m: usize) -> Tuple {
    let mut out = Vec::with_capacity(m);
    for _ in 0..m {
        out.push(code % n);
        code /= n;
    }
    out
}

/// The power `A^m` with the product structure. `m = 0` yields the one-point
/// structure in which every relation holds.
pub fn power(a: &Structure, m: usize) -> Result<Structure> {
    if m == 0 {
        return Err(Error::invalid("power exponent must be at least 1"));
    }
    power_any(a, m)
}

pub(crate) fn power_any(a: &Structure, m: usize) -> Result<Structure> {
    let n = a.size;
    let size = limits::pow(n, m);
    limits::check("power domain", size, limits::element_cap())?;
    let size = size as usize;
    let mut rels = Vec::with_capacity(a.relations.len());
    for rel in &a.relations {
        let r = rel.arity;
        let count = limits::pow(rel.len(), m);
        limits::check(
            "power relation table",
            count * r as u128,
            limits::atom_cap(),
        )?;
        let count = count as usize;
        let mut tuples: Vec<Tuple> = Vec::with_capacity(count);
        let mut pick = vec![0usize; m];
        for _ in 0..count {
            let t: Tuple = (0..r)
                .map(|p| {
                    let coords: Vec<usize> = pick.iter().map(|&j| rel.tuple(j)[p]).collect();
                    encode_power(&coords, n)
                })
                .collect();
            tuples.push(t);
            for slot in pick.iter_mut() {
                *slot += 1;
                if *slot < rel.len() {
                    break;
                }
                *slot = 0;
            }
        }
        tuples.sort_unstable();
        tuples.dedup();
        let flat = tuples.into_iter().flatten().collect();
        rels.push(Relation::from_sorted_flat(r, size, flat));
    }
    let constants = a
        .constants
        .iter()
        .map(|&c| encode_power(&vec![c; m], n))
        .collect();
    Ok(Structure::from_parts(
        format!("{}^{}", a.name, m),
        a.signature.clone(),
        size,
        rels,
        constants,
    ))
}

/// The substructure on `subset` (renumbered in increasing order). Returns the
/// structure together with the renaming `new index -> old element`.
pub fn induced_substructure(a: &Structure, subset: &[usize]) -> Result<(Structure, Vec<usize>)> {
    let mut keep: Vec<usize> = subset.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if keep.is_empty() {
        return Err(Error::invalid("substructure on the empty set"));
    }
    if let Some(&e) = keep.iter().find(|&&e| e >= a.size) {
        return Err(Error::invalid(format!("element {e} not in the domain")));
    }
    let mut new_index = vec![usize::MAX; a.size];
    for (i, &e) in keep.iter().enumerate() {
        new_index[e] = i;
    }
    let mut constants = Vec::with_capacity(a.constants.len());
    for (name, &c) in a.signature.constants().iter().zip(&a.constants) {
        if new_index[c] == usize::MAX {
            return Err(Error::invalid(format!(
                "constant `{name}` = {c} lies outside the subset"
            )));
        }
        constants.push(new_index[c]);
    }
    let relations = a
        .relations
        .iter()
        .map(|rel| {
            rel.iter()
                .filter(|t| t.iter().all(|&e| new_index[e] != usize::MAX))
                .map(|t| t.iter().map(|&e| new_index[e]).collect())
                .collect()
        })
        .collect();
    let s = Structure::new(
        format!("{}|{}", a.name, keep.len()),
        a.signature.clone(),
        keep.len(),
        relations,
        constants,
    )?;
    Ok((s, keep))
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&to_text(self))
    }
}
