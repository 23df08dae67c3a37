//! Interpretations of one structure in another: application, verification
//! per fragment, composition, induced monoid maps, homotopy,
//! contractibility, reconstruction from monoid homomorphisms and the
//! pp-interpretation reduction between constraint problems.

mod compose;
mod contract;
mod functor;
mod library;
mod reconstruct;
mod reduction;

pub use compose::{compose, compose_report, pp_normalize, translate, ComposeReport};
pub use contract::{
    adjoin_point, contractible, separating_pair, zus_equivalent, AdjoinReport, ZusReport,
};
pub use functor::{
    biinterpretation_check, end_functor_map, functor_law, functor_map, homotopic, homotopic_tables,
    induced_hom, induced_map, induced_monoid_hom, BiReport, FunctorLawReport, FunctorMap,
    HomotopyReport,
};
pub use library::{identity, library, LIBRARY};
pub use reconstruct::{reconstruct, Reconstruction};
pub use reduction::{csp_reduce, csp_solve, Reduction};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::algebra::TransformationMonoid;
use crate::definability::{DefinabilityVerdict, Definer};
use crate::error::{Error, Result};
use crate::limits;
use crate::logic::{classify, parse_formula, Compiled, Formula, Fragment};
use crate::structure::{Signature, Structure, Tuple, TupleSet};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RelationDef {
    pub name: String,
    pub arity: usize,
    /// Free variables `x0..x{arity*dim-1}`, one block of `dim` per argument.
    pub formula: Formula,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConstantDef {
    pub name: String,
    pub formula: Formula,
}

/// A formula-based interpretation of dimension `dim`: the target's elements
/// are the `kernel`-classes of the `dim`-tuples satisfying `domain`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Interpretation {
    pub name: String,
    pub dim: usize,
    pub domain: Formula,
    pub kernel: Formula,
    pub relations: Vec<RelationDef>,
    pub constants: Vec<ConstantDef>,
}

impl Interpretation {
    pub fn new(name: impl Into<String>, dim: usize, domain: Formula, kernel: Formula) -> Self {
        Interpretation {
            name: name.into(),
            dim,
            domain,
            kernel,
            relations: Vec::new(),
            constants: Vec::new(),
        }
    }

    pub fn with_relation(mut self, name: &str, arity: usize, formula: Formula) -> Self {
        self.relations.push(RelationDef {
            name: name.to_string(),
            arity,
            formula,
        });
        self
    }

    pub fn with_constant(mut self, name: &str, formula: Formula) -> Self {
        self.constants.push(ConstantDef {
            name: name.to_string(),
            formula,
        });
        self
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn target_signature(&self) -> Result<Signature> {
        Signature::new(
            self.relations.iter().map(|r| (r.name.clone(), r.arity)),
            self.constants.iter().map(|c| c.name.clone()),
        )
    }

    /// `(label, number of free variables, formula)` for every basic set.
    pub fn formulas(&self) -> Vec<(String, usize, &Formula)> {
        let l = self.dim;
        let mut out = vec![
            ("domain".to_string(), l, &self.domain),
            ("kernel".to_string(), 2 * l, &self.kernel),
        ];
        for r in &self.relations {
            out.push((r.name.clone(), r.arity * l, &r.formula));
        }
        for c in &self.constants {
            out.push((c.name.clone(), l, &c.formula));
        }
        out
    }

    /// Dimension and free-variable discipline.
    pub fn check(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::Interpretation("dimension must be at least 1".into()));
        }
        self.target_signature()?;
        for (label, k, f) in self.formulas() {
            if let Some(&v) = f.free_vars().iter().find(|&&v| v >= k) {
                return Err(Error::Interpretation(format!(
                    "{label} formula has free variable x{v}, only x0..x{} are allowed",
                    k - 1
                )));
            }
        }
        Ok(())
    }

    pub fn check_source(&self, sig: &Signature) -> Result<()> {
        self.check()?;
        for (_, _, f) in self.formulas() {
            f.check_signature(sig)?;
        }
        Ok(())
    }

    /// Total node count of all formulas.
    pub fn size(&self) -> usize {
        self.formulas().iter().map(|(_, _, f)| f.size()).sum()
    }

    /// Fragments every formula belongs to syntactically.
    pub fn fragments(&self) -> BTreeSet<Fragment> {
        let mut out: BTreeSet<Fragment> = Fragment::ALL.iter().copied().collect();
        for (_, _, f) in self.formulas() {
            let c = classify(f);
            out.retain(|x| c.contains(x));
        }
        out
    }

    /// Parse the line format:
    ///
    /// ```text
    /// interpret QUOT dim 1
    /// domain (= x0 x0)
    /// kernel (E x0 x1)
    /// rel P/1 (exists x1 (and (E x0 x1) (not (= x0 x1))))
    /// ```
    ///
    /// Lines that start with none of the keywords continue the previous
    /// formula. `#` starts a comment line.
    pub fn parse(text: &str) -> Result<Interpretation> {
        struct Entry {
            key: String,
            arg: Option<String>,
            line: usize,
            col: usize,
            text: String,
        }
        let mut header: Option<(String, usize)> = None;
        let mut entries: Vec<Entry> = Vec::new();
        for (li, raw) in text.lines().enumerate() {
            let line = li + 1;
            let trimmed = raw.trim_start();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let indent = raw.len() - trimmed.len();
            let word = trimmed.split_whitespace().next().unwrap_or("");
            match word {
                "interpret" => {
                    if header.is_some() {
                        return Err(Error::parse(line, 1, "second `interpret` header"));
                    }
                    let parts: Vec<&str> = trimmed.split_whitespace().collect();
                    if parts.len() != 4 || parts[2] != "dim" {
                        return Err(Error::parse(line, 1, "expected `interpret <name> dim <l>`"));
                    }
                    let dim = parts[3].parse::<usize>().map_err(|_| {
                        Error::parse(line, 1, format!("bad dimension `{}`", parts[3]))
                    })?;
                    header = Some((parts[1].to_string(), dim));
                }
                "domain" | "kernel" | "rel" | "const" => {
                    if header.is_none() {
                        return Err(Error::parse(line, 1, "missing `interpret` header"));
                    }
                    let mut rest = &trimmed[word.len()..];
                    let mut col = indent + word.len();
                    let mut arg = None;
                    if word == "rel" || word == "const" {
                        let r = rest.trim_start();
                        col += rest.len() - r.len();
                        let a = r.split_whitespace().next().unwrap_or("");
                        if a.is_empty() {
                            return Err(Error::parse(
                                line,
                                col + 1,
                                format!("`{word}` needs a symbol name"),
                            ));
                        }
                        arg = Some(a.to_string());
                        rest = &r[a.len()..];
                        col += a.len();
                    }
                    entries.push(Entry {
                        key: word.to_string(),
                        arg,
                        line,
                        col,
                        text: rest.to_string(),
                    });
                }
                _ => match entries.last_mut() {
                    Some(e) => {
                        e.text.push('\n');
                        e.text.push_str(raw);
                    }
                    None => {
                        return Err(Error::parse(
                            line,
                            indent + 1,
                            format!("unexpected `{word}`"),
                        ));
                    }
                },
            }
        }
        let (name, dim) = header.ok_or_else(|| Error::parse(1, 1, "missing `interpret` header"))?;
        let parse_at = |e: &Entry| -> Result<Formula> {
            parse_formula(&e.text).map_err(|err| match err {
                Error::Parse {
                    line,
                    column,
                    message,
                } => {
                    if line == 1 {
                        Error::parse(e.line, column + e.col, message)
                    } else {
                        Error::parse(e.line + line - 1, column, message)
                    }
                }
                other => other,
            })
        };
        let mut domain = None;
        let mut kernel = None;
        let mut out = Interpretation::new(name, dim, Formula::True, Formula::True);
        for e in &entries {
            let f = parse_at(e)?;
            match e.key.as_str() {
                "domain" | "kernel" => {
                    let slot = if e.key == "domain" {
                        &mut domain
                    } else {
                        &mut kernel
                    };
                    if slot.replace(f).is_some() {
                        return Err(Error::parse(e.line, 1, format!("second `{}` line", e.key)));
                    }
                }
                "rel" => {
                    let arg = e.arg.as_deref().unwrap_or_default();
                    let (sym, arity) = match arg.split_once('/') {
                        Some((s, a)) => {
                            let arity = a.parse::<usize>().map_err(|_| {
                                Error::parse(e.line, 1, format!("bad arity in `{arg}`"))
                            })?;
                            (s.to_string(), arity)
                        }
                        None => {
                            let vars = f.free_vars().iter().next_back().map_or(1, |&v| v + 1);
                            (arg.to_string(), vars.div_ceil(dim.max(1)).max(1))
                        }
                    };
                    out.relations.push(RelationDef {
                        name: sym,
                        arity,
                        formula: f,
                    });
                }
                _ => {
                    let sym = e.arg.clone().unwrap_or_default();
                    out.constants.push(ConstantDef {
                        name: sym,
                        formula: f,
                    });
                }
            }
        }
        out.domain = domain.ok_or_else(|| Error::Interpretation("missing `domain` line".into()))?;
        out.kernel = kernel.ok_or_else(|| Error::Interpretation("missing `kernel` line".into()))?;
        out.check()?;
        Ok(out)
    }
}

impl fmt::Display for Interpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "interpret {} dim {}", self.name, self.dim)?;
        writeln!(f, "domain {}", self.domain)?;
        writeln!(f, "kernel {}", self.kernel)?;
        for r in &self.relations {
            writeln!(f, "rel {}/{} {}", r.name, r.arity, r.formula)?;
        }
        for c in &self.constants {
            writeln!(f, "const {} {}", c.name, c.formula)?;
        }
        Ok(())
    }
}

/// Which map monoid of the source a construction works with.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    /// Endomorphisms, positive existential formulas.
    Pex,
    /// Self-embeddings, existential formulas.
    Exist,
    /// Automorphisms, all first-order formulas.
    Fo,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::Pex, Level::Exist, Level::Fo];

    pub fn fragment(self) -> Fragment {
        match self {
            Level::Pex => Fragment::PEX,
            Level::Exist => Fragment::EXIST,
            Level::Fo => Fragment::FO,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Level::Pex => "pex",
            Level::Exist => "exist",
            Level::Fo => "fo",
        }
    }

    pub fn parse(s: &str) -> Result<Level> {
        match s.to_ascii_lowercase().as_str() {
            "pex" | "pe" => Ok(Level::Pex),
            "exist" => Ok(Level::Exist),
            "fo" => Ok(Level::Fo),
            _ => Err(Error::invalid(format!(
                "unknown level `{s}` (pex, exist, fo)"
            ))),
        }
    }

    /// End, Emb or Aut of the structure behind `d`.
    pub fn monoid<'d>(self, d: &'d Definer<'_>) -> Result<&'d TransformationMonoid> {
        d.monoid(self.fragment())
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// An explicit interpretation: a set `U` of `dim`-tuples over the source
/// and a surjection from `U` onto the target's domain.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TableInterpretation {
    pub dim: usize,
    pub source_size: usize,
    /// Sorted.
    pub universe: Vec<Tuple>,
    /// `images[k]` is the target element of `universe[k]`.
    pub images: Vec<usize>,
    #[serde(skip)]
    pub target: Structure,
}

impl TableInterpretation {
    pub fn from_pairs(
        source_size: usize,
        dim: usize,
        pairs: BTreeMap<Tuple, usize>,
        target: Structure,
    ) -> Result<Self> {
        let mut hit = vec![false; target.size()];
        for (t, &b) in &pairs {
            if t.len() != dim || t.iter().any(|&x| x >= source_size) {
                return Err(Error::Interpretation(format!(
                    "tuple {t:?} is not a {dim}-tuple over the source"
                )));
            }
            if b >= target.size() {
                return Err(Error::Interpretation(format!(
                    "image {b} outside the target"
                )));
            }
            hit[b] = true;
        }
        if let Some(b) = hit.iter().position(|&h| !h) {
            return Err(Error::Interpretation(format!(
                "target element {b} has no preimage"
            )));
        }
        let (universe, images) = pairs.into_iter().unzip();
        Ok(TableInterpretation {
            dim,
            source_size,
            universe,
            images,
            target,
        })
    }

    pub fn image(&self, t: &[usize]) -> Option<usize> {
        self.universe
            .binary_search_by(|u| u.as_slice().cmp(t))
            .ok()
            .map(|k| self.images[k])
    }

    /// Universe indices of each target element.
    pub fn classes(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.target.size()];
        for (k, &b) in self.images.iter().enumerate() {
            out[b].push(k);
        }
        out
    }

    pub fn domain_set(&self) -> TupleSet {
        TupleSet::from_btree(
            self.dim,
            self.source_size,
            self.universe.iter().cloned().collect(),
        )
    }

    /// Preimage of a set of target tuples: all tuples of universe blocks
    /// mapping into it.
    pub fn preimage<'t>(
        &self,
        arity: usize,
        tuples: impl IntoIterator<Item = &'t [usize]>,
    ) -> Result<TupleSet> {
        let classes = self.classes();
        let tuples: Vec<&[usize]> = tuples.into_iter().collect();
        let count: u128 = tuples
            .iter()
            .map(|t| {
                t.iter()
                    .map(|&b| classes[b].len() as u128)
                    .product::<u128>()
            })
            .sum();
        limits::check(
            "preimage entries",
            count * (arity * self.dim) as u128,
            limits::atom_cap(),
        )?;
        let mut out = BTreeSet::new();
        for t in tuples {
            let mut pick = vec![0usize; arity];
            'outer: loop {
                let row: Tuple = (0..arity)
                    .flat_map(|p| self.universe[classes[t[p]][pick[p]]].iter().copied())
                    .collect();
                out.insert(row);
                for p in (0..arity).rev() {
                    pick[p] += 1;
                    if pick[p] < classes[t[p]].len() {
                        continue 'outer;
                    }
                    pick[p] = 0;
                }
                break;
            }
        }
        Ok(TupleSet::from_btree(
            arity * self.dim,
            self.source_size,
            out,
        ))
    }

    pub fn kernel_set(&self) -> Result<TupleSet> {
        let diag: Vec<[usize; 2]> = (0..self.target.size()).map(|b| [b, b]).collect();
        self.preimage(2, diag.iter().map(|d| &d[..]))
    }

    /// The preimages of the basic sets, labelled: `domain`, `kernel`, each
    /// relation symbol, each constant symbol.
    pub fn basic_sets(&self) -> Result<Vec<(String, TupleSet)>> {
        let mut out = vec![
            ("domain".to_string(), self.domain_set()),
            ("kernel".to_string(), self.kernel_set()?),
        ];
        let sig = self.target.signature();
        for (sym, rel) in sig.relations().iter().zip(self.target.relations()) {
            out.push((sym.name.clone(), self.preimage(rel.arity(), rel.iter())?));
        }
        for (name, &c) in sig.constants().iter().zip(self.target.constants()) {
            out.push((name.clone(), self.preimage(1, [&[c][..]])?));
        }
        Ok(out)
    }
}

/// Apply an interpretation: the target structure and the canonical
/// surjection. Classes are numbered by least representative.
pub fn apply(i: &Interpretation, a: &Structure) -> Result<TableInterpretation> {
    i.check_source(a.signature())?;
    let l = i.dim;
    let d: Vec<Tuple> = crate::logic::definable_set(a, &i.domain, l)?
        .iter()
        .cloned()
        .collect();
    if d.is_empty() {
        return Err(Error::Interpretation(format!(
            "{}: the domain formula defines the empty set",
            i.name
        )));
    }
    limits::check(
        "kernel evaluations",
        (d.len() as u128).pow(2),
        limits::atom_cap(),
    )?;
    let kern = Compiled::new(a, &i.kernel, 2 * l)?;
    let mut class = vec![usize::MAX; d.len()];
    let mut members: Vec<Vec<usize>> = Vec::new();
    let mut buf = vec![0usize; 2 * l];
    for u in 0..d.len() {
        buf[..l].copy_from_slice(&d[u]);
        let mut row = Vec::new();
        for (v, dv) in d.iter().enumerate() {
            buf[l..].copy_from_slice(dv);
            if kern.eval(&buf)? {
                row.push(v);
            }
        }
        let bad = || {
            Error::Interpretation(format!(
                "{}: the kernel is not an equivalence relation on the domain (at {:?})",
                i.name, d[u]
            ))
        };
        if class[u] == usize::MAX {
            if !row.contains(&u) || row.iter().any(|&v| class[v] != usize::MAX) {
                return Err(bad());
            }
            for &v in &row {
                class[v] = members.len();
            }
            members.push(row);
        } else if row != members[class[u]] {
            return Err(bad());
        }
    }
    let sig = i.target_signature()?;
    let mut relations = Vec::new();
    for r in &i.relations {
        let k = r.arity;
        limits::check(
            "relation evaluations",
            limits::pow(d.len(), k),
            limits::atom_cap(),
        )?;
        let c = Compiled::new(a, &r.formula, k * l)?;
        let mut image: BTreeSet<Tuple> = BTreeSet::new();
        let mut hits: u128 = 0;
        let mut pick = vec![0usize; k];
        let mut row = vec![0usize; k * l];
        'outer: loop {
            for p in 0..k {
                row[p * l..(p + 1) * l].copy_from_slice(&d[pick[p]]);
            }
            if c.eval(&row)? {
                hits += 1;
                image.insert(pick.iter().map(|&u| class[u]).collect());
            }
            for p in (0..k).rev() {
                pick[p] += 1;
                if pick[p] < d.len() {
                    continue 'outer;
                }
                pick[p] = 0;
            }
            break;
        }
        let saturated: u128 = image
            .iter()
            .map(|t: &Tuple| {
                t.iter()
                    .map(|&b| members[b].len() as u128)
                    .product::<u128>()
            })
            .sum();
        if hits != saturated {
            return Err(Error::Interpretation(format!(
                "{}: the formula for {} is not invariant under the kernel",
                i.name, r.name
            )));
        }
        relations.push(image.into_iter().collect());
    }
    let mut constants = Vec::new();
    for cdef in &i.constants {
        let c = Compiled::new(a, &cdef.formula, l)?;
        let mut hit = Vec::new();
        for (u, du) in d.iter().enumerate() {
            if c.eval(du)? {
                hit.push(u);
            }
        }
        let ok = !hit.is_empty()
            && hit.iter().all(|&u| class[u] == class[hit[0]])
            && hit.len() == members[class[hit[0]]].len();
        if !ok {
            return Err(Error::Interpretation(format!(
                "{}: the formula for constant {} does not define exactly one class",
                i.name, cdef.name
            )));
        }
        constants.push(class[hit[0]]);
    }
    let target = Structure::new(
        format!("{}({})", i.name, a.name()),
        sig,
        members.len(),
        relations,
        constants,
    )?;
    let pairs = d.into_iter().zip(class).collect();
    TableInterpretation::from_pairs(a.size(), l, pairs, target)
}

#[derive(Clone, Debug, Serialize)]
pub struct BasicSetVerdict {
    pub set: String,
    pub arity: usize,
    pub size: usize,
    pub verdict: DefinabilityVerdict,
}

#[derive(Clone, Debug, Serialize)]
pub struct InterpVerdict {
    pub fragment: Fragment,
    pub holds: bool,
    pub sets: Vec<BasicSetVerdict>,
}

impl InterpVerdict {
    /// The formula interpretation assembled from the certificates, when
    /// every basic set is definable.
    pub fn to_interpretation(
        &self,
        name: &str,
        table: &TableInterpretation,
    ) -> Option<Interpretation> {
        if !self.holds {
            return None;
        }
        let cert = |k: usize| self.sets[k].verdict.certificate.clone();
        let mut out = Interpretation::new(name, table.dim, cert(0)?, cert(1)?);
        let sig = table.target.signature();
        let nrel = sig.relations().len();
        for (k, sym) in sig.relations().iter().enumerate() {
            out = out.with_relation(&sym.name, sym.arity, cert(2 + k)?);
        }
        for (k, c) in sig.constants().iter().enumerate() {
            out = out.with_constant(c, cert(2 + nrel + k)?);
        }
        Some(out)
    }

    pub fn failures(&self) -> Vec<&BasicSetVerdict> {
        self.sets.iter().filter(|s| !s.verdict.definable).collect()
    }
}

/// Check every basic-set preimage at `frag`, reusing the caches of `d`.
pub fn verify_with(
    d: &Definer<'_>,
    table: &TableInterpretation,
    frag: Fragment,
) -> Result<InterpVerdict> {
    if table.source_size != d.structure().size() {
        return Err(Error::invalid(
            "table interpretation over a different source",
        ));
    }
    let mut sets = Vec::new();
    for (name, x) in table.basic_sets()? {
        let verdict = d.check(&x, frag)?;
        sets.push(BasicSetVerdict {
            set: name,
            arity: x.arity(),
            size: x.len(),
            verdict,
        });
    }
    let holds = sets.iter().all(|s| s.verdict.definable);
    Ok(InterpVerdict {
        fragment: frag,
        holds,
        sets,
    })
}

pub fn verify_table(
    a: &Structure,
    table: &TableInterpretation,
    frag: Fragment,
) -> Result<InterpVerdict> {
    verify_with(&Definer::new(a), table, frag)
}

pub fn verify(a: &Structure, i: &Interpretation, frag: Fragment) -> Result<InterpVerdict> {
    verify_table(a, &apply(i, a)?, frag)
}

#[cfg(test)]
mod tests;
