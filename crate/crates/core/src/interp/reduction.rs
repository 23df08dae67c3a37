use std::collections::BTreeMap;

use serde::Serialize;

use super::compose::{is_pp_shape, pp_normalize, translate};
use super::{apply, verify_table, Interpretation};
use crate::error::{Error, Result};
use crate::logic::{Formula, Fragment, Term};
use crate::maps::{find_hom, MapFilter};
use crate::structure::{Structure, Tuple};

#[derive(Clone, Debug, Serialize)]
pub struct Reduction {
    pub sentence: Formula,
    pub input_size: usize,
    pub output_size: usize,
    /// `output_size <= constant * input_size` for every input over this
    /// interpretation.
    pub constant: usize,
}

fn require_pp_sentence(phi: &Formula) -> Result<()> {
    if !is_pp_shape(phi) {
        return Err(Error::invalid(format!("{phi} is not primitive positive")));
    }
    if let Some(v) = phi.free_vars().into_iter().next() {
        return Err(Error::invalid(format!("{phi} has the free variable x{v}")));
    }
    Ok(())
}

/// The interpretation with every basic formula in pp form: syntactic pp
/// formulas are kept, the others replaced by pp certificates (which
/// requires the interpretation to verify at PP over `a`).
fn pp_version(a: &Structure, i: &Interpretation) -> Result<Interpretation> {
    let table = apply(i, a)?;
    if i.formulas().iter().all(|(_, _, f)| is_pp_shape(f)) {
        return Ok(i.clone());
    }
    let v = verify_table(a, &table, Fragment::PP)?;
    if !v.holds {
        let bad: Vec<&str> = v.failures().iter().map(|s| s.set.as_str()).collect();
        return Err(Error::Refused(format!(
            "{} is not a pp-interpretation over {} (sets: {})",
            i.name,
            a.name(),
            bad.join(", ")
        )));
    }
    let certs = v
        .to_interpretation(&i.name, &table)
        .ok_or_else(|| Error::Internal("verified interpretation without certificates".into()))?;
    let pick = |orig: &Formula, cert: &Formula| {
        if is_pp_shape(orig) {
            orig.clone()
        } else {
            cert.clone()
        }
    };
    let mut out = Interpretation::new(
        &i.name,
        i.dim,
        pick(&i.domain, &certs.domain),
        pick(&i.kernel, &certs.kernel),
    );
    for r in &i.relations {
        let c = certs
            .relations
            .iter()
            .find(|c| c.name == r.name)
            .expect("certificate per relation");
        out = out.with_relation(&r.name, r.arity, pick(&r.formula, &c.formula));
    }
    for k in &i.constants {
        let c = certs
            .constants
            .iter()
            .find(|c| c.name == k.name)
            .expect("certificate per constant");
        out = out.with_constant(&k.name, pick(&k.formula, &c.formula));
    }
    Ok(out)
}

/// Rewrite a pp sentence over the target of `i` into an equivalent pp
/// sentence over `a`.
pub fn csp_reduce(a: &Structure, i: &Interpretation, phi: &Formula) -> Result<Reduction> {
    require_pp_sentence(phi)?;
    phi.check_signature(&i.target_signature()?)?;
    let p = pp_version(a, i)?;
    let raw = translate(&p, phi, 0)?;
    let sentence = pp_normalize(&raw)
        .ok_or_else(|| Error::Internal(format!("translation of {phi} left pp form")))?;
    let l = p.dim;
    let size = |f: &Formula| f.size();
    let rel = p
        .relations
        .iter()
        .map(|r| size(&r.formula))
        .max()
        .unwrap_or(0)
        .max(size(&p.kernel));
    let cst = p
        .constants
        .iter()
        .map(|c| size(&c.formula))
        .max()
        .unwrap_or(0);
    let arity = p
        .relations
        .iter()
        .map(|r| r.arity)
        .max()
        .unwrap_or(0)
        .max(2);
    let constant = (l + 1 + size(&p.domain)).max(rel + 1 + arity * (l + 2 + cst)) + 2;
    let (input_size, output_size) = (phi.size(), sentence.size());
    if output_size > constant * input_size {
        return Err(Error::Internal(format!(
            "reduced sentence has {output_size} nodes, bound is {constant} * {input_size}"
        )));
    }
    Ok(Reduction {
        sentence,
        input_size,
        output_size,
        constant,
    })
}

/// Decide a pp sentence by searching for a homomorphism from its canonical
/// instance into `a`.
pub fn csp_solve(a: &Structure, phi: &Formula) -> Result<bool> {
    require_pp_sentence(phi)?;
    phi.check_signature(a.signature())?;
    let mut atoms = Vec::new();
    let mut f = phi;
    while let Formula::Exists(_, g) = f {
        f = g;
    }
    fn matrix<'f>(f: &'f Formula, out: &mut Vec<&'f Formula>) {
        match f {
            Formula::And(gs) => gs.iter().for_each(|g| matrix(g, out)),
            other => out.push(other),
        }
    }
    matrix(f, &mut atoms);

    // Union-find over variables and constant symbols.
    let sig = a.signature();
    let nconst = sig.constants().len();
    let mut ids: BTreeMap<usize, usize> = BTreeMap::new();
    let mut parent: Vec<usize> = (0..nconst).collect();
    let node = |t: &Term, ids: &mut BTreeMap<usize, usize>, parent: &mut Vec<usize>| -> usize {
        match t {
            Term::Const(c) => sig.constant_index(c).expect("signature checked"),
            Term::Var(v) => *ids.entry(*v).or_insert_with(|| {
                parent.push(parent.len());
                parent.len() - 1
            }),
        }
    };
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        let mut y = x;
        while parent[y] != r {
            let next = parent[y];
            parent[y] = r;
            y = next;
        }
        r
    }
    let mut facts: Vec<(usize, Vec<usize>)> = Vec::new();
    for at in &atoms {
        match at {
            Formula::Eq(s, t) => {
                let (x, y) = (
                    node(s, &mut ids, &mut parent),
                    node(t, &mut ids, &mut parent),
                );
                let (rx, ry) = (find(&mut parent, x), find(&mut parent, y));
                if rx != ry {
                    let (lo, hi) = if rx < ry { (rx, ry) } else { (ry, rx) };
                    parent[hi] = lo;
                }
            }
            Formula::Atom(r, args) => {
                let k = sig.relation_index(r).expect("signature checked");
                let xs = args
                    .iter()
                    .map(|t| node(t, &mut ids, &mut parent))
                    .collect();
                facts.push((k, xs));
            }
            _ => unreachable!("pp matrix holds atoms and equalities only"),
        }
    }
    // Constants merged with each other must agree in `a`.
    let total = parent.len();
    let mut value_of_root: BTreeMap<usize, usize> = BTreeMap::new();
    for c in 0..nconst {
        let r = find(&mut parent, c);
        if let Some(&v) = value_of_root.get(&r) {
            if v != a.constants()[c] {
                return Ok(false);
            }
        } else {
            value_of_root.insert(r, a.constants()[c]);
        }
    }
    let mut index = vec![usize::MAX; total];
    let mut size = 0;
    for x in 0..total {
        let r = find(&mut parent, x);
        if index[r] == usize::MAX {
            index[r] = size;
            size += 1;
        }
        index[x] = index[r];
    }
    if size == 0 {
        return Ok(true);
    }
    let mut relations: Vec<Vec<Tuple>> = vec![Vec::new(); sig.relations().len()];
    for (k, xs) in facts {
        relations[k].push(xs.iter().map(|&x| index[x]).collect());
    }
    let constants = (0..nconst).map(|c| index[c]).collect();
    let inst = Structure::new("instance", sig.clone(), size, relations, constants)?;
    Ok(find_hom(&inst, a, MapFilter::HOM, &[])?.is_some())
}
