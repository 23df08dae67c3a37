use std::collections::{HashMap, VecDeque};
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::limits;
use crate::maps::FinMap;

/// A composition-closed set of self-maps of `0..degree` containing the
/// identity. Elements are stored sorted by image table (flat `u16` array),
/// so element indices follow lexicographic order.
#[derive(Clone, Debug)]
pub struct TransformationMonoid {
    degree: usize,
    data: Vec<u16>,
    generators: OnceLock<Vec<usize>>,
    witnesses: Option<Vec<Option<(usize, usize)>>>,
}

impl PartialEq for TransformationMonoid {
    fn eq(&self, other: &Self) -> bool {
        self.degree == other.degree && self.data == other.data
    }
}

impl Eq for TransformationMonoid {}

#[inline]
pub(crate) fn compose_into(a: &[u16], b: &[u16], out: &mut [u16]) {
    for (o, &x) in out.iter_mut().zip(a) {
        *o = b[x as usize];
    }
}

fn is_bijection(s: &[u16]) -> bool {
    let mut seen = vec![false; s.len()];
    for &x in s {
        if std::mem::replace(&mut seen[x as usize], true) {
            return false;
        }
    }
    true
}

fn rank(s: &[u16]) -> usize {
    let mut seen = vec![false; s.len()];
    s.iter()
        .filter(|&&x| !std::mem::replace(&mut seen[x as usize], true))
        .count()
}

impl TransformationMonoid {
    pub(crate) fn from_sorted_data(degree: usize, data: Vec<u16>) -> Self {
        debug_assert!(degree == 0 || data.len() % degree == 0);
        debug_assert!(data
            .chunks_exact(degree.max(1))
            .collect::<Vec<_>>()
            .windows(2)
            .all(|w| w[0] < w[1]));
        TransformationMonoid {
            degree,
            data,
            generators: OnceLock::new(),
            witnesses: None,
        }
    }

    /// Build from an explicit element list; checks identity and closure.
    pub fn from_maps(degree: usize, maps: &[FinMap]) -> Result<Self> {
        let mut rows: Vec<Vec<u16>> = Vec::with_capacity(maps.len());
        for m in maps {
            if m.len() != degree || m.images().iter().any(|&x| x >= degree) {
                return Err(Error::invalid(format!(
                    "{m} is not a self-map of a {degree}-element set"
                )));
            }
            rows.push(m.images().iter().map(|&x| x as u16).collect());
        }
        rows.sort_unstable();
        rows.dedup();
        let m = Self::from_sorted_data(degree, rows.concat());
        if m.index_of(&(0..degree as u16).collect::<Vec<_>>())
            .is_none()
        {
            return Err(Error::invalid("element set lacks the identity"));
        }
        let mut buf = vec![0u16; degree];
        for i in 0..m.len() {
            for j in 0..m.len() {
                compose_into(m.element(i), m.element(j), &mut buf);
                if m.index_of(&buf).is_none() {
                    return Err(Error::invalid(
                        "element set is not closed under composition",
                    ));
                }
            }
        }
        Ok(m)
    }

    /// Keep the elements satisfying `keep`; the caller guarantees the result
    /// is a monoid.
    pub(crate) fn restrict(&self, keep: impl Fn(&[u16]) -> bool) -> Self {
        let mut data = Vec::new();
        for e in self.iter() {
            if keep(e) {
                data.extend_from_slice(e);
            }
        }
        Self::from_sorted_data(self.degree, data)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        if self.degree == 0 {
            1
        } else {
            self.data.len() / self.degree
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn element(&self, i: usize) -> &[u16] {
        &self.data[i * self.degree..(i + 1) * self.degree]
    }

    pub fn map(&self, i: usize) -> FinMap {
        FinMap::new(self.element(i).iter().map(|&x| x as usize).collect())
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u16]> + '_ {
        self.data.chunks_exact(self.degree.max(1))
    }

    pub fn maps(&self) -> impl Iterator<Item = FinMap> + '_ {
        (0..self.len()).map(|i| self.map(i))
    }

    pub fn index_of(&self, e: &[u16]) -> Option<usize> {
        if self.degree == 0 {
            return Some(0);
        }
        let (mut lo, mut hi) = (0, self.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.element(mid).cmp(e) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => return Some(mid),
            }
        }
        None
    }

    pub fn index_of_map(&self, f: &FinMap) -> Option<usize> {
        if f.len() != self.degree || f.images().iter().any(|&x| x >= self.degree) {
            return None;
        }
        let e: Vec<u16> = f.images().iter().map(|&x| x as u16).collect();
        self.index_of(&e)
    }

    pub fn contains(&self, f: &FinMap) -> bool {
        self.index_of_map(f).is_some()
    }

    pub fn identity(&self) -> usize {
        let id: Vec<u16> = (0..self.degree as u16).collect();
        self.index_of(&id).expect("monoid contains the identity")
    }

    /// Index of `element(i)` followed by `element(j)`.
    pub fn product(&self, i: usize, j: usize) -> usize {
        let mut buf = vec![0u16; self.degree];
        compose_into(self.element(i), self.element(j), &mut buf);
        self.index_of(&buf)
            .expect("monoid is closed under composition")
    }

    pub fn is_invertible(&self, i: usize) -> bool {
        is_bijection(self.element(i))
    }

    /// The group of units: on a finite set these are exactly the bijections
    /// in the monoid (the inverse of a bijection is one of its powers).
    pub fn invertibles(&self) -> TransformationMonoid {
        self.restrict(is_bijection)
    }

    /// Generation witnesses `(parent, generator)`, present for monoids built by
    /// [`generate`].
    pub fn witness(&self, i: usize) -> Option<(usize, usize)> {
        self.witnesses.as_ref().and_then(|w| w[i])
    }

    /// A small generating set: units first, then by decreasing rank, then in
    /// index order, each kept only if not generated by the earlier ones.
    pub fn generators(&self) -> &[usize] {
        self.generators.get_or_init(|| self.greedy_generators())
    }

    fn greedy_generators(&self) -> Vec<usize> {
        let n = self.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| {
            let e = self.element(i);
            (!is_bijection(e), std::cmp::Reverse(rank(e)), i)
        });
        let mut inside = vec![false; n];
        let id = self.identity();
        inside[id] = true;
        let mut members = vec![id];
        let mut gens: Vec<usize> = Vec::new();
        let mut buf = vec![0u16; self.degree];
        for c in order {
            if inside[c] {
                continue;
            }
            gens.push(c);
            let mut queue: VecDeque<usize> = VecDeque::new();
            for idx in 0..members.len() {
                let x = members[idx];
                compose_into(self.element(x), self.element(c), &mut buf);
                let y = self.index_of(&buf).expect("closed");
                if !inside[y] {
                    inside[y] = true;
                    members.push(y);
                    queue.push_back(y);
                }
            }
            while let Some(y) = queue.pop_front() {
                for &g in &gens {
                    compose_into(self.element(y), self.element(g), &mut buf);
                    let z = self.index_of(&buf).expect("closed");
                    if !inside[z] {
                        inside[z] = true;
                        members.push(z);
                        queue.push_back(z);
                    }
                }
            }
            if members.len() == n {
                break;
            }
        }
        gens.sort_unstable();
        gens
    }

    /// One `map [..]` line per element, in index order.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for i in 0..self.len() {
            out.push_str(&self.map(i).to_string());
            out.push('\n');
        }
        out
    }
}

/// The monoid generated by `gens` (plus the identity) by breadth-first
/// products. Each element records a witness `(parent, generator index)` with
/// `element = parent · gens[generator]`.
pub fn generate(degree: usize, gens: &[FinMap]) -> Result<TransformationMonoid> {
    for g in gens {
        if g.len() != degree || g.images().iter().any(|&x| x >= degree) {
            return Err(Error::invalid(format!(
                "{g} is not a self-map of a {degree}-element set"
            )));
        }
    }
    let gens16: Vec<Vec<u16>> = gens
        .iter()
        .map(|g| g.images().iter().map(|&x| x as u16).collect())
        .collect();
    let cap = limits::monoid_cap();
    let id: Vec<u16> = (0..degree as u16).collect();
    let mut rows: Vec<Vec<u16>> = vec![id.clone()];
    let mut parent: Vec<Option<(usize, usize)>> = vec![None];
    let mut seen: HashMap<Vec<u16>, usize> = HashMap::from([(id, 0)]);
    let mut next = 0;
    let mut buf = vec![0u16; degree];
    while next < rows.len() {
        for (gi, g) in gens16.iter().enumerate() {
            compose_into(&rows[next], g, &mut buf);
            if !seen.contains_key(&buf) {
                if rows.len() as u64 >= cap {
                    return Err(Error::Guard {
                        what: "generated monoid".into(),
                        required: cap as u128 + 1,
                        cap: cap as u128,
                    });
                }
                seen.insert(buf.clone(), rows.len());
                rows.push(buf.clone());
                parent.push(Some((next, gi)));
            }
        }
        next += 1;
    }
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.sort_by(|&a, &b| rows[a].cmp(&rows[b]));
    let mut new_index = vec![0; rows.len()];
    for (new, &old) in order.iter().enumerate() {
        new_index[old] = new;
    }
    let witnesses = order
        .iter()
        .map(|&old| parent[old].map(|(p, g)| (new_index[p], g)))
        .collect();
    let data = order
        .iter()
        .flat_map(|&old| rows[old].iter().copied())
        .collect();
    let mut m = TransformationMonoid::from_sorted_data(degree, data);
    m.witnesses = Some(witnesses);
    Ok(m)
}
