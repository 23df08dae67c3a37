//! Finite-domain backtracking search.
//!
//! Variables carry bitset domains over `0..nvals`. Constraints are table
//! membership (positive or negative), equality, disequality, plus optional
//! global all-different and covering groups. After every assignment the
//! constraints touching the assigned variable are revised once; all domain
//! changes go on a trail and are undone on backtrack. The search loop is
//! iterative so that very large variable counts (power structures) do not
//! exhaust the thread stack.
//!
//! Variables `0..nenum` are enumerated; the remaining ones are only searched
//! for existence once the enumerated prefix is complete.

use crate::structure::Relation;

pub(crate) const NONE: usize = usize::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Order {
    /// Enumerated variables are assigned in index order, values ascending:
    /// solutions come out lexicographically sorted.
    Lex,
    /// Smallest remaining domain first.
    Mrv,
}

enum Con<'a> {
    In {
        scope: Vec<usize>,
        uniq: Vec<usize>,
        slot: Vec<usize>,
        rel: &'a Relation,
    },
    NotIn {
        scope: Vec<usize>,
        uniq: Vec<usize>,
        rel: &'a Relation,
    },
    Eq(usize, usize),
    Neq(usize, usize),
}

pub(crate) struct Csp<'a> {
    nvars: usize,
    nvals: usize,
    words: usize,
    init: Vec<u64>,
    cons: Vec<Con<'a>>,
    watch: Vec<Vec<usize>>,
    alldiff: Vec<bool>,
    cover: Vec<bool>,
    cover_vars: usize,
    unsat: bool,
}

fn uniq_of(scope: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let mut uniq: Vec<usize> = Vec::with_capacity(scope.len());
    let mut slot = Vec::with_capacity(scope.len());
    for &v in scope {
        match uniq.iter().position(|&u| u == v) {
            Some(i) => slot.push(i),
            None => {
                slot.push(uniq.len());
                uniq.push(v);
            }
        }
    }
    (uniq, slot)
}

impl<'a> Csp<'a> {
    pub(crate) fn new(nvars: usize, nvals: usize) -> Self {
        let words = nvals.div_ceil(64).max(1);
        let mut init = vec![0u64; nvars * words];
        for v in 0..nvars {
            for x in 0..nvals {
                init[v * words + x / 64] |= 1 << (x % 64);
            }
        }
        Csp {
            nvars,
            nvals,
            words,
            init,
            cons: Vec::new(),
            watch: vec![Vec::new(); nvars],
            alldiff: Vec::new(),
            cover: Vec::new(),
            cover_vars: 0,
            unsat: nvals == 0 && nvars > 0,
        }
    }

    /// Restrict `var` to the single value `val`.
    pub(crate) fn fix(&mut self, var: usize, val: usize) {
        let w = self.words;
        let d = &mut self.init[var * w..(var + 1) * w];
        let keep = val < self.nvals && d[val / 64] >> (val % 64) & 1 == 1;
        d.iter_mut().for_each(|x| *x = 0);
        if keep {
            d[val / 64] |= 1 << (val % 64);
        } else {
            self.unsat = true;
        }
    }

    fn push(&mut self, c: Con<'a>, vars: &[usize]) {
        let id = self.cons.len();
        self.cons.push(c);
        let mut seen: Vec<usize> = Vec::new();
        for &v in vars {
            if !seen.contains(&v) {
                seen.push(v);
                self.watch[v].push(id);
            }
        }
    }

    pub(crate) fn add_in(&mut self, scope: Vec<usize>, rel: &'a Relation) {
        debug_assert_eq!(scope.len(), rel.arity());
        if rel.is_empty() {
            self.unsat = true;
        }
        let (uniq, slot) = uniq_of(&scope);
        let vars = uniq.clone();
        self.push(
            Con::In {
                scope,
                uniq,
                slot,
                rel,
            },
            &vars,
        );
    }

    pub(crate) fn add_not_in(&mut self, scope: Vec<usize>, rel: &'a Relation) {
        let (uniq, _) = uniq_of(&scope);
        let vars = uniq.clone();
        self.push(Con::NotIn { scope, uniq, rel }, &vars);
    }

    pub(crate) fn add_eq(&mut self, a: usize, b: usize) {
        if a != b {
            self.push(Con::Eq(a, b), &[a, b]);
        }
    }

    pub(crate) fn add_neq(&mut self, a: usize, b: usize) {
        if a == b {
            self.unsat = true;
        } else {
            self.push(Con::Neq(a, b), &[a, b]);
        }
    }

    /// The listed variables take pairwise distinct values.
    pub(crate) fn set_alldiff(&mut self, vars: &[usize]) {
        self.alldiff = vec![false; self.nvars];
        for &v in vars {
            self.alldiff[v] = true;
        }
        if vars.len() > self.nvals {
            self.unsat = true;
        }
    }

    /// The listed variables jointly take every value.
    pub(crate) fn set_cover(&mut self, vars: &[usize]) {
        self.cover = vec![false; self.nvars];
        for &v in vars {
            self.cover[v] = true;
        }
        self.cover_vars = self.cover.iter().filter(|&&b| b).count();
    }

    /// Run the search. `leaf` sees every complete assignment and decides if
    /// it is a solution; `out` is called once per solution of the enumerated
    /// prefix `0..nenum` (with the full witnessing assignment) and returns
    /// whether to continue.
    pub(crate) fn run(
        &self,
        nenum: usize,
        order: Order,
        leaf: &mut dyn FnMut(&[usize]) -> bool,
        out: &mut dyn FnMut(&[usize]) -> bool,
    ) {
        if self.unsat {
            return;
        }
        let mut s = Search::new(self);
        if !s.initial() {
            return;
        }
        let w = self.words;
        let mut frames: Vec<Frame> = Vec::new();
        let mut snaps: Vec<u64> = Vec::new();
        loop {
            match s.select(nenum, order) {
                Some((var, exist)) => {
                    frames.push(Frame {
                        var,
                        exist,
                        next: 0,
                        trail: s.trail.len(),
                        assigned: s.stack.len(),
                    });
                    snaps.extend_from_slice(&s.dom[var * w..(var + 1) * w]);
                }
                None => {
                    if leaf(&s.value) {
                        if !out(&s.value) {
                            return;
                        }
                        if let Some(first) = frames.iter().position(|f| f.exist) {
                            let (t, a) = (frames[first].trail, frames[first].assigned);
                            s.restore(t, a);
                            frames.truncate(first);
                            snaps.truncate(first * w);
                        } else if nenum == 0 {
                            return;
                        }
                    }
                }
            }
            loop {
                let depth = frames.len();
                let Some(top) = frames.last_mut() else { return };
                s.restore(top.trail, top.assigned);
                let snap = &snaps[(depth - 1) * w..depth * w];
                match next_bit(snap, top.next) {
                    None => {
                        frames.pop();
                        snaps.truncate((depth - 1) * w);
                    }
                    Some(val) => {
                        top.next = val + 1;
                        let var = top.var;
                        if s.assign(var, val) {
                            break;
                        }
                    }
                }
            }
        }
    }

    #[cfg(test)]
    pub(crate) fn solutions(&self, nenum: usize, order: Order) -> Vec<Vec<usize>> {
        let mut found = Vec::new();
        self.run(nenum, order, &mut |_| true, &mut |v| {
            found.push(v[..nenum].to_vec());
            true
        });
        found
    }

    /// Some complete solution, if any.
    pub(crate) fn find(&self, leaf: &mut dyn FnMut(&[usize]) -> bool) -> Option<Vec<usize>> {
        let mut found = None;
        self.run(0, Order::Mrv, leaf, &mut |v| {
            found = Some(v.to_vec());
            false
        });
        found
    }
}

struct Frame {
    var: usize,
    exist: bool,
    next: usize,
    trail: usize,
    assigned: usize,
}

fn next_bit(words: &[u64], from: usize) -> Option<usize> {
    let mut wi = from / 64;
    if wi >= words.len() {
        return None;
    }
    let mut cur = words[wi] & (!0u64).checked_shl((from % 64) as u32).unwrap_or(0);
    loop {
        if cur != 0 {
            return Some(wi * 64 + cur.trailing_zeros() as usize);
        }
        wi += 1;
        if wi >= words.len() {
            return None;
        }
        cur = words[wi];
    }
}

struct Search<'c, 'a> {
    csp: &'c Csp<'a>,
    w: usize,
    dom: Vec<u64>,
    trail: Vec<(usize, u64)>,
    value: Vec<usize>,
    stack: Vec<usize>,
    cover_count: Vec<u32>,
    covered: usize,
    cover_open: usize,
    support: Vec<u64>,
    picked: Vec<usize>,
    probe: Vec<usize>,
}

impl<'c, 'a> Search<'c, 'a> {
    fn new(csp: &'c Csp<'a>) -> Self {
        let max_uniq = csp
            .cons
            .iter()
            .map(|c| match c {
                Con::In { uniq, .. } | Con::NotIn { uniq, .. } => uniq.len(),
                _ => 2,
            })
            .max()
            .unwrap_or(0);
        let max_arity = csp
            .cons
            .iter()
            .map(|c| match c {
                Con::In { scope, .. } | Con::NotIn { scope, .. } => scope.len(),
                _ => 2,
            })
            .max()
            .unwrap_or(0);
        Search {
            csp,
            w: csp.words,
            dom: csp.init.clone(),
            trail: Vec::new(),
            value: vec![NONE; csp.nvars],
            stack: Vec::new(),
            cover_count: vec![0; csp.nvals],
            covered: 0,
            cover_open: csp.cover_vars,
            support: vec![0; max_uniq * csp.words],
            picked: vec![0; max_uniq],
            probe: vec![0; max_arity],
        }
    }

    #[inline]
    fn has(&self, v: usize, x: usize) -> bool {
        self.dom[v * self.w + x / 64] >> (x % 64) & 1 == 1
    }

    #[inline]
    fn set_word(&mut self, i: usize, new: u64) {
        let old = self.dom[i];
        if old != new {
            self.trail.push((i, old));
            self.dom[i] = new;
        }
    }

    fn remove(&mut self, v: usize, x: usize) -> bool {
        let i = v * self.w + x / 64;
        let new = self.dom[i] & !(1 << (x % 64));
        self.set_word(i, new);
        !self.is_empty(v)
    }

    fn is_empty(&self, v: usize) -> bool {
        self.dom[v * self.w..(v + 1) * self.w]
            .iter()
            .all(|&x| x == 0)
    }

    fn count(&self, v: usize) -> u32 {
        self.dom[v * self.w..(v + 1) * self.w]
            .iter()
            .map(|x| x.count_ones())
            .sum()
    }

    fn restore(&mut self, trail: usize, assigned: usize) {
        while self.stack.len() > assigned {
            let v = self.stack.pop().unwrap();
            let x = self.value[v];
            self.value[v] = NONE;
            if !self.csp.cover.is_empty() && self.csp.cover[v] {
                self.cover_count[x] -= 1;
                if self.cover_count[x] == 0 {
                    self.covered -= 1;
                }
                self.cover_open += 1;
            }
        }
        while self.trail.len() > trail {
            let (i, old) = self.trail.pop().unwrap();
            self.dom[i] = old;
        }
    }

    fn initial(&mut self) -> bool {
        for v in 0..self.csp.nvars {
            if self.is_empty(v) {
                return false;
            }
        }
        for id in 0..self.csp.cons.len() {
            if !self.revise(id) {
                return false;
            }
        }
        true
    }

    fn select(&self, nenum: usize, order: Order) -> Option<(usize, bool)> {
        let mut best: Option<(u32, usize)> = None;
        for v in 0..nenum {
            if self.value[v] != NONE {
                continue;
            }
            if order == Order::Lex {
                return Some((v, false));
            }
            let c = self.count(v);
            if best.is_none_or(|(bc, _)| c < bc) {
                best = Some((c, v));
                if c <= 1 {
                    break;
                }
            }
        }
        if let Some((_, v)) = best {
            return Some((v, false));
        }
        for v in nenum..self.csp.nvars {
            if self.value[v] != NONE {
                continue;
            }
            let c = self.count(v);
            if best.is_none_or(|(bc, _)| c < bc) {
                best = Some((c, v));
                if c <= 1 {
                    break;
                }
            }
        }
        best.map(|(_, v)| (v, true))
    }

    fn assign(&mut self, var: usize, val: usize) -> bool {
        let csp = self.csp;
        self.value[var] = val;
        self.stack.push(var);
        for k in 0..self.w {
            let new = if k == val / 64 { 1u64 << (val % 64) } else { 0 };
            self.set_word(var * self.w + k, new);
        }
        if !csp.cover.is_empty() && csp.cover[var] {
            self.cover_count[val] += 1;
            if self.cover_count[val] == 1 {
                self.covered += 1;
            }
            self.cover_open -= 1;
            if csp.nvals - self.covered > self.cover_open {
                return false;
            }
        }
        if !csp.alldiff.is_empty() && csp.alldiff[var] {
            for u in 0..csp.nvars {
                if u != var && csp.alldiff[u] {
                    if self.value[u] == val {
                        return false;
                    }
                    if self.value[u] == NONE && self.has(u, val) && !self.remove(u, val) {
                        return false;
                    }
                }
            }
        }
        for &id in &csp.watch[var] {
            if !self.revise(id) {
                return false;
            }
        }
        true
    }

    fn revise(&mut self, id: usize) -> bool {
        let csp = self.csp;
        match &csp.cons[id] {
            Con::Eq(a, b) => {
                let (a, b) = (*a, *b);
                for k in 0..self.w {
                    let m = self.dom[a * self.w + k] & self.dom[b * self.w + k];
                    self.set_word(a * self.w + k, m);
                    self.set_word(b * self.w + k, m);
                }
                !self.is_empty(a)
            }
            Con::Neq(a, b) => {
                let (a, b) = (*a, *b);
                let (va, vb) = (self.value[a], self.value[b]);
                if va != NONE && vb != NONE {
                    return va != vb;
                }
                if va != NONE && self.has(b, va) {
                    return self.remove(b, va);
                }
                if vb != NONE && self.has(a, vb) {
                    return self.remove(a, vb);
                }
                true
            }
            Con::NotIn { scope, uniq, rel } => {
                let open: Vec<usize> = uniq
                    .iter()
                    .copied()
                    .filter(|&u| self.value[u] == NONE)
                    .collect();
                match open.len() {
                    0 => {
                        for (p, &v) in scope.iter().enumerate() {
                            self.probe[p] = self.value[v];
                        }
                        !rel.contains(&self.probe[..scope.len()])
                    }
                    1 => {
                        let u = open[0];
                        let vals: Vec<usize> = (0..csp.nvals).filter(|&x| self.has(u, x)).collect();
                        for x in vals {
                            for (p, &v) in scope.iter().enumerate() {
                                self.probe[p] = if v == u { x } else { self.value[v] };
                            }
                            if rel.contains(&self.probe[..scope.len()]) && !self.remove(u, x) {
                                return false;
                            }
                        }
                        true
                    }
                    _ => true,
                }
            }
            Con::In {
                scope,
                uniq,
                slot,
                rel,
            } => {
                let r = scope.len();
                if uniq.iter().all(|&u| self.value[u] != NONE) {
                    for (p, &v) in scope.iter().enumerate() {
                        self.probe[p] = self.value[v];
                    }
                    return rel.contains(&self.probe[..r]);
                }
                let w = self.w;
                let nu = uniq.len();
                self.support[..nu * w].iter_mut().for_each(|x| *x = 0);
                'tuples: for t in rel.iter() {
                    for k in 0..nu {
                        self.picked[k] = NONE;
                    }
                    for p in 0..r {
                        let x = t[p];
                        let k = slot[p];
                        let pk = self.picked[k];
                        if pk == NONE {
                            if !self.has(scope[p], x) {
                                continue 'tuples;
                            }
                            self.picked[k] = x;
                        } else if pk != x {
                            continue 'tuples;
                        }
                    }
                    for k in 0..nu {
                        let x = self.picked[k];
                        self.support[k * w + x / 64] |= 1 << (x % 64);
                    }
                }
                for k in 0..nu {
                    let u = uniq[k];
                    let mut empty = true;
                    for j in 0..w {
                        let m = self.dom[u * w + j] & self.support[k * w + j];
                        if m != 0 {
                            empty = false;
                        }
                        self.set_word(u * w + j, m);
                    }
                    if empty {
                        return false;
                    }
                }
                true
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    #[test]
    fn next_bit_scans_words() {
        assert_eq!(next_bit(&[0b1010], 0), Some(1));
        assert_eq!(next_bit(&[0b1010], 2), Some(3));
        assert_eq!(next_bit(&[0b1010, 1], 4), Some(64));
        assert_eq!(next_bit(&[0, 0], 0), None);
        assert_eq!(next_bit(&[1 << 63], 63), Some(63));
        assert_eq!(next_bit(&[1 << 63], 64), None);
    }

    #[test]
    fn lex_enumeration_of_arrow_homs() {
        let a = corpus::arrow().unwrap();
        let mut csp = Csp::new(2, 2);
        csp.add_in(vec![0, 1], a.relation(0));
        assert_eq!(csp.solutions(2, Order::Lex), vec![vec![0, 1]]);
    }

    #[test]
    fn projection_reports_each_prefix_once() {
        // x0 with some y such that R(x0, y) on a 3-cycle: every x0.
        let c = corpus::cycle(3).unwrap();
        let mut csp = Csp::new(2, 3);
        csp.add_in(vec![0, 1], c.relation(0));
        assert_eq!(
            csp.solutions(1, Order::Lex),
            vec![vec![0], vec![1], vec![2]]
        );
    }

    #[test]
    fn alldiff_and_cover() {
        let mut csp = Csp::new(3, 3);
        csp.set_alldiff(&[0, 1, 2]);
        assert_eq!(csp.solutions(3, Order::Lex).len(), 6);
        let mut csp = Csp::new(3, 2);
        csp.set_cover(&[0, 1, 2]);
        assert_eq!(csp.solutions(3, Order::Lex).len(), 6);
    }

    #[test]
    fn negative_tables_and_disequalities() {
        let a = corpus::arrow().unwrap();
        let mut csp = Csp::new(2, 2);
        csp.add_not_in(vec![0, 1], a.relation(0));
        csp.add_neq(0, 1);
        assert_eq!(csp.solutions(2, Order::Lex), vec![vec![1, 0]]);
    }
}
