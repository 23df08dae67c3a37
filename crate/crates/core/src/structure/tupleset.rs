use std::collections::BTreeSet;
use std::fmt;

use super::{Structure, Tuple, TupleIter};
use crate::error::{Error, Result};

/// A set of `k`-tuples over `0..domain`. Arity 0 is allowed: the two subsets
/// of `A^0` are the truth values of sentences.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TupleSet {
    arity: usize,
    domain: usize,
    tuples: BTreeSet<Tuple>,
}

impl TupleSet {
    pub fn empty(arity: usize, domain: usize) -> Self {
        TupleSet {
            arity,
            domain,
            tuples: BTreeSet::new(),
        }
    }

    pub fn full(arity: usize, domain: usize) -> Self {
        TupleSet {
            arity,
            domain,
            tuples: TupleIter::new(domain, arity).collect(),
        }
    }

    pub fn new<I>(arity: usize, domain: usize, tuples: I) -> Result<Self>
    where
        I: IntoIterator<Item = Tuple>,
    {
        let mut set = Self::empty(arity, domain);
        for t in tuples {
            set.insert(t)?;
        }
        Ok(set)
    }

    pub fn over(
        a: &Structure,
        arity: usize,
        tuples: impl IntoIterator<Item = Tuple>,
    ) -> Result<Self> {
        Self::new(arity, a.size(), tuples)
    }

    pub(crate) fn from_btree(arity: usize, domain: usize, tuples: BTreeSet<Tuple>) -> Self {
        debug_assert!(tuples
            .iter()
            .all(|t| t.len() == arity && t.iter().all(|&e| e < domain)));
        TupleSet {
            arity,
            domain,
            tuples,
        }
    }

    pub fn insert(&mut self, t: Tuple) -> Result<bool> {
        if t.len() != self.arity {
            return Err(Error::Arity {
                expected: self.arity,
                found: t.len(),
            });
        }
        if let Some(&e) = t.iter().find(|&&e| e >= self.domain) {
            return Err(Error::invalid(format!(
                "tuple entry {e} out of range for domain size {}",
                self.domain
            )));
        }
        Ok(self.tuples.insert(t))
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn domain(&self) -> usize {
        self.domain
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn contains(&self, t: &[usize]) -> bool {
        self.tuples.contains(t)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Tuple> + '_ {
        self.tuples.iter()
    }

    pub fn first(&self) -> Option<&Tuple> {
        self.tuples.iter().next()
    }

    pub fn as_btree(&self) -> &BTreeSet<Tuple> {
        &self.tuples
    }

    pub fn is_subset(&self, other: &TupleSet) -> bool {
        self.tuples.is_subset(&other.tuples)
    }

    pub fn is_full(&self) -> bool {
        self.len() as u128 == crate::limits::pow(self.domain, self.arity)
    }

    /// Parse `{(1),(2)}` / `{(0 1), (1 2)}`; entries may be separated by
    /// spaces or commas. `arity` is required for the empty set.
    pub fn parse(text: &str, arity: Option<usize>, domain: usize) -> Result<Self> {
        let body = text.trim();
        let body = body
            .strip_prefix('{')
            .and_then(|b| b.strip_suffix('}'))
            .ok_or_else(|| Error::parse(1, 1, "a tuple set is written `{(..),(..)}`"))?;
        let mut tuples: Vec<Tuple> = Vec::new();
        let mut rest = body;
        let mut offset = 2;
        loop {
            let trimmed = rest.trim_start_matches(|c: char| c.is_whitespace() || c == ',');
            offset += rest.len() - trimmed.len();
            rest = trimmed;
            if rest.is_empty() {
                break;
            }
            if !rest.starts_with('(') {
                return Err(Error::parse(1, offset, "expected `(`"));
            }
            let close = rest
                .find(')')
                .ok_or_else(|| Error::parse(1, offset, "unclosed tuple"))?;
            let inner = &rest[1..close];
            let mut t = Vec::new();
            for part in inner
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|p| !p.is_empty())
            {
                t.push(
                    part.parse::<usize>().map_err(|_| {
                        Error::parse(1, offset, format!("`{part}` is not an element"))
                    })?,
                );
            }
            tuples.push(t);
            offset += close + 1;
            rest = &rest[close + 1..];
        }
        let arity = match (arity, tuples.first()) {
            (Some(k), _) => k,
            (None, Some(t)) => t.len(),
            (None, None) => {
                return Err(Error::invalid(
                    "the arity of an empty tuple set must be given",
                ))
            }
        };
        Self::new(arity, domain, tuples)
    }
}

impl fmt::Display for TupleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, t) in self.tuples.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", format_tuple(t))?;
        }
        f.write_str("}")
    }
}

pub fn format_tuple(t: &[usize]) -> String {
    let inner: Vec<String> = t.iter().map(usize::to_string).collect();
    format!("({})", inner.join(" "))
}
