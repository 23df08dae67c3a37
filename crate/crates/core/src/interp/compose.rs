use serde::Serialize;

use super::{apply, verify_table, Interpretation, TableInterpretation};
use crate::error::{Error, Result};
use crate::logic::{classify, Formula, Fragment, Term};
use crate::maps::{kind_of, FinMap};
use crate::structure::{Structure, Tuple};

/// Rewrites formulas over the target signature of `i` into formulas over
/// its source: every variable becomes a block of `dim` variables.
struct Translator<'a> {
    i: &'a Interpretation,
    next: usize,
}

impl Translator<'_> {
    fn fresh(&mut self) -> usize {
        let s = self.next;
        self.next += self.i.dim;
        s
    }

    fn block_vars(&self, start: usize) -> std::ops::Range<usize> {
        start..start + self.i.dim
    }

    /// Instantiate one of `i`'s formulas with argument blocks `blocks`.
    fn inst(&mut self, f: &Formula, blocks: &[usize]) -> Result<Formula> {
        let l = self.i.dim;
        let n = blocks.len() * l;
        f.rename(&|p| (p < n).then(|| blocks[p / l] + p % l), &mut self.next)
    }

    fn args(
        &mut self,
        args: &[&Term],
        env: &[(usize, usize)],
    ) -> Result<(Vec<usize>, Vec<usize>, Vec<Formula>)> {
        let mut blocks = Vec::new();
        let mut bound = Vec::new();
        let mut guards = Vec::new();
        for t in args {
            match t {
                Term::Var(v) => {
                    let b = env
                        .iter()
                        .rev()
                        .find(|(x, _)| x == v)
                        .map(|&(_, b)| b)
                        .ok_or(Error::Unbound(*v))?;
                    blocks.push(b);
                }
                Term::Const(c) => {
                    let def = self
                        .i
                        .constants
                        .iter()
                        .find(|d| &d.name == c)
                        .ok_or_else(|| {
                            Error::Signature(format!("{} defines no constant `{c}`", self.i.name))
                        })?;
                    let b = self.fresh();
                    let g = self.inst(&def.formula.clone(), &[b])?;
                    bound.extend(self.block_vars(b));
                    guards.push(g);
                    blocks.push(b);
                }
            }
        }
        Ok((blocks, bound, guards))
    }

    fn wrap(bound: Vec<usize>, mut guards: Vec<Formula>, core: Formula) -> Formula {
        if guards.is_empty() {
            return core;
        }
        guards.push(core);
        Formula::exists_all(bound, Formula::And(guards))
    }

    fn tr(&mut self, f: &Formula, env: &mut Vec<(usize, usize)>) -> Result<Formula> {
        Ok(match f {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Atom(r, args) => {
                let def = self
                    .i
                    .relations
                    .iter()
                    .find(|d| &d.name == r)
                    .ok_or_else(|| {
                        Error::Signature(format!("{} defines no relation `{r}`", self.i.name))
                    })?;
                if def.arity != args.len() {
                    return Err(Error::Arity {
                        expected: def.arity,
                        found: args.len(),
                    });
                }
                let formula = def.formula.clone();
                let (blocks, bound, guards) = self.args(&args.iter().collect::<Vec<_>>(), env)?;
                let core = self.inst(&formula, &blocks)?;
                Self::wrap(bound, guards, core)
            }
            Formula::Eq(s, t) => {
                let (blocks, bound, guards) = self.args(&[s, t], env)?;
                let kernel = self.i.kernel.clone();
                let core = self.inst(&kernel, &blocks)?;
                Self::wrap(bound, guards, core)
            }
            Formula::Not(g) => Formula::not(self.tr(g, env)?),
            Formula::And(gs) => {
                Formula::And(gs.iter().map(|g| self.tr(g, env)).collect::<Result<_>>()?)
            }
            Formula::Or(gs) => {
                Formula::Or(gs.iter().map(|g| self.tr(g, env)).collect::<Result<_>>()?)
            }
            Formula::Exists(v, g) | Formula::Forall(v, g) => {
                let b = self.fresh();
                let domain = self.i.domain.clone();
                let guard = self.inst(&domain, &[b])?;
                env.push((*v, b));
                let body = self.tr(g, env);
                env.pop();
                let body = body?;
                let vars = self.block_vars(b);
                if matches!(f, Formula::Exists(..)) {
                    Formula::exists_all(vars, Formula::And(vec![guard, body]))
                } else {
                    vars.rev()
                        .fold(Formula::Or(vec![Formula::not(guard), body]), |acc, v| {
                            Formula::forall(v, acc)
                        })
                }
            }
        })
    }
}

/// Translate `f` (free variables among `x0..x{free-1}`, over the target
/// signature of `i`) into a formula over the source with `free * dim` free
/// variables: target variable `m` becomes the block starting at `m * dim`.
pub fn translate(i: &Interpretation, f: &Formula, free: usize) -> Result<Formula> {
    i.check()?;
    let mut t = Translator {
        i,
        next: free * i.dim,
    };
    let mut env: Vec<(usize, usize)> = (0..free).map(|m| (m, m * i.dim)).collect();
    t.tr(f, &mut env)
}

/// The interpretation of `j`'s target in `i`'s source: `i` first, then `j`.
pub fn compose(i: &Interpretation, j: &Interpretation) -> Result<Interpretation> {
    i.check()?;
    j.check_source(&i.target_signature()?)?;
    let (li, lj) = (i.dim, j.dim);
    let run = |f: &Formula, free: usize| -> Result<(Formula, usize)> {
        let mut t = Translator { i, next: free * li };
        let mut env: Vec<(usize, usize)> = (0..free).map(|m| (m, m * li)).collect();
        let g = t.tr(f, &mut env)?;
        Ok((g, t.next))
    };
    let (dj, next) = run(&j.domain, lj)?;
    let mut t = Translator { i, next };
    let mut parts = Vec::with_capacity(lj + 1);
    for m in 0..lj {
        parts.push(t.inst(&i.domain, &[m * li])?);
    }
    parts.push(dj);
    let mut out = Interpretation::new(
        format!("{}.{}", i.name, j.name),
        li * lj,
        Formula::And(parts),
        run(&j.kernel, 2 * lj)?.0,
    );
    for r in &j.relations {
        out = out.with_relation(&r.name, r.arity, run(&r.formula, r.arity * lj)?.0);
    }
    for c in &j.constants {
        out = out.with_constant(&c.name, run(&c.formula, lj)?.0);
    }
    Ok(out)
}

/// Prenex form of an `∃`/`∧` formula over atoms, equalities and `⊤`, or
/// `None` if anything else occurs. Bound variables must be distinct from
/// each other and from the free ones (as [`translate`] guarantees).
pub fn pp_normalize(f: &Formula) -> Option<Formula> {
    fn collect(f: &Formula, bound: &mut Vec<usize>, atoms: &mut Vec<Formula>) -> bool {
        match f {
            Formula::True => true,
            Formula::Atom(..) | Formula::Eq(..) => {
                atoms.push(f.clone());
                true
            }
            Formula::And(gs) => gs.iter().all(|g| collect(g, bound, atoms)),
            Formula::Exists(v, g) => {
                bound.push(*v);
                collect(g, bound, atoms)
            }
            _ => false,
        }
    }
    let mut bound = Vec::new();
    let mut atoms = Vec::new();
    if !collect(f, &mut bound, &mut atoms) {
        return None;
    }
    if atoms.is_empty() {
        let z = f.max_var().map_or(0, |v| v + 1);
        bound.push(z);
        atoms.push(Formula::eq(Term::Var(z), Term::Var(z)));
    }
    let mut seen = std::collections::BTreeSet::new();
    bound.retain(|v| seen.insert(*v));
    Some(Formula::exists_all(bound, Formula::and_of(atoms)))
}

#[derive(Clone, Debug, Serialize)]
pub struct ComposeReport {
    pub composite: Interpretation,
    #[serde(skip)]
    pub table: TableInterpretation,
    /// Composite target onto `j(i(A))`, element by element.
    pub identification: FinMap,
    pub identification_is_iso: bool,
    pub inputs_pex: bool,
    pub composite_pex: bool,
    pub composite_exist: bool,
    pub syntactically_existential: bool,
    /// The composite verifies EXIST although its formulas are not
    /// existential: this relies on Emb = Aut for finite structures.
    pub finite_degeneracy: bool,
}

/// Compose, apply to `a`, identify the result with `j(i(A))` and record the
/// fragment behaviour.
pub fn compose_report(
    a: &Structure,
    i: &Interpretation,
    j: &Interpretation,
) -> Result<ComposeReport> {
    let composite = compose(i, j)?;
    let ti = apply(i, a)?;
    let tj = apply(j, &ti.target)?;
    let table = apply(&composite, a)?;
    let identification = identify(&table, &ti, &tj)?;
    let b = &tj.target;
    let identification_is_iso = identification.len() == b.size() && {
        let k = kind_of(&table.target, b, identification.images());
        k.homomorphism && k.strong && k.injective && k.surjective
    };
    let inputs_pex = verify_table(a, &ti, Fragment::PEX)?.holds
        && verify_table(&ti.target, &tj, Fragment::PEX)?.holds;
    let composite_pex = verify_table(a, &table, Fragment::PEX)?.holds;
    let composite_exist = verify_table(a, &table, Fragment::EXIST)?.holds;
    let syntactically_existential = composite.fragments().contains(&Fragment::EXIST);
    Ok(ComposeReport {
        finite_degeneracy: composite_exist && !syntactically_existential,
        composite,
        table,
        identification,
        identification_is_iso,
        inputs_pex,
        composite_pex,
        composite_exist,
        syntactically_existential,
    })
}

/// Send each composite class to the `j`-class of the `i`-classes of its
/// blocks; fails if that is not well defined.
pub(crate) fn identify(
    table: &TableInterpretation,
    ti: &TableInterpretation,
    tj: &TableInterpretation,
) -> Result<FinMap> {
    let li = ti.dim;
    let mut out = vec![usize::MAX; table.target.size()];
    for (u, &c) in table.universe.iter().zip(&table.images) {
        let mid: Option<Tuple> = u.chunks(li).map(|b| ti.image(b)).collect();
        let img = mid.and_then(|m| tj.image(&m)).ok_or_else(|| {
            Error::Internal(format!(
                "composite element {u:?} has no image under the two-step interpretation"
            ))
        })?;
        if out[c] == usize::MAX {
            out[c] = img;
        } else if out[c] != img {
            return Err(Error::Internal(
                "composite classes do not match the two-step interpretation".into(),
            ));
        }
    }
    Ok(FinMap::new(out))
}

/// Does `f` use any connective beyond the pp ones?
pub(crate) fn is_pp_shape(f: &Formula) -> bool {
    classify(f).contains(&Fragment::PP)
}
