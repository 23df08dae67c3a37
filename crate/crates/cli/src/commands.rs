use std::fmt::Write as _;
use std::io::Read;
use std::path::Path;

use serde_json::{json, Value};

use endomorph_core::acceptance::{self, Scale, CRITERIA};
use endomorph_core::algebra::{is_closed, orbit, right_cosets, sandwich_check, special_elements};
use endomorph_core::corpus::{build_corpus, FAMILIES};
use endomorph_core::definability::{synthesize, Definer};
use endomorph_core::demo::{demo, Status, DEMOS};
use endomorph_core::interp::{
    apply, biinterpretation_check, compose_report, contractible, csp_reduce, csp_solve, functor_map,
    homotopic, induced_hom, library, reconstruct, verify, zus_equivalent, Interpretation, Level, LIBRARY,
};
use endomorph_core::logic::parse_formula;
use endomorph_core::maps::{aut_group, emb_monoid, end_monoid, polymorphisms};
use endomorph_core::structure::{format_tuple, load_structure, to_json, to_text};
use endomorph_core::{Error, FinMap, Fragment, MonoidHom, Result, Structure, TransformationMonoid, TupleSet};

use crate::report::{Inputs, Output};
use crate::{Cli, Cmd, CspCmd, InterpCmd};

pub fn run(cli: &Cli, inputs: &mut Inputs) -> Result<Output> {
    match &cli.cmd {
        Cmd::Corpus { family, params, list } => corpus(family.as_deref(), params, *list, inputs),
        Cmd::Demo { name, list } => run_demo(name.as_deref(), *list, inputs),
        Cmd::Selftest { scale, only } => selftest(scale, only, cli.seed, inputs),
        Cmd::Interp(InterpCmd::List) => Ok(interp_list()),
        cmd => {
            let a = read_structure(cli, inputs)?;
            on_structure(cmd, &a, inputs)
        }
    }
}

fn read_structure(cli: &Cli, inputs: &mut Inputs) -> Result<Structure> {
    let text = match &cli.input {
        Some(p) => read_file(p)?,
        None => {
            let mut s = String::new();
            std::io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| Error::invalid(format!("cannot read stdin: {e}")))?;
            s
        }
    };
    inputs.add("structure", &text);
    parse_structure(&text)
}

/// A structure file, or a JSON report whose results carry a structure.
fn parse_structure(text: &str) -> Result<Structure> {
    if text.trim_start().starts_with('{') {
        let v: Value =
            serde_json::from_str(text).map_err(|e| Error::parse(e.line(), e.column(), e.to_string()))?;
        if let Some(s) = v.get("results").and_then(|r| r.get("structure")) {
            return load_structure(&s.to_string());
        }
    }
    load_structure(text)
}

fn read_file(p: &Path) -> Result<String> {
    std::fs::read_to_string(p).map_err(|e| Error::invalid(format!("cannot read {}: {e}", p.display())))
}

fn load_file_structure(p: &Path, inputs: &mut Inputs) -> Result<Structure> {
    let text = read_file(p)?;
    inputs.add("structure", &text);
    parse_structure(&text)
}

/// A file path if one exists, otherwise a library name over `sig`.
fn load_interp(arg: &str, sig: &endomorph_core::Signature, inputs: &mut Inputs) -> Result<Interpretation> {
    let p = Path::new(arg);
    if p.is_file() {
        let text = read_file(p)?;
        inputs.add("interpretation", &text);
        Interpretation::parse(&text)
    } else {
        inputs.add("library", arg);
        library(arg, sig)
    }
}

fn fragment(s: &str) -> Result<Fragment> {
    Fragment::parse(s)
}

/// Fragment whose characterizing monoid is the named map class.
fn class_fragment(class: &str) -> Result<Fragment> {
    Ok(match class.to_ascii_lowercase().as_str() {
        "end" => Fragment::PEX,
        "emb" => Fragment::EXIST,
        "aut" => Fragment::FO,
        "surj" => Fragment::POS,
        "inj" => Fragment::PEX_NEQ,
        "bij" => Fragment::POS_NEQ,
        other => return Err(Error::invalid(format!("unknown map class `{other}`"))),
    })
}

fn degeneracy_note(frag: Fragment) -> Option<&'static str> {
    match frag {
        Fragment::EXIST | Fragment::FO => Some("finite structure: EXIST and FO verdicts coincide"),
        Fragment::POS | Fragment::POS_NEQ | Fragment::PEX_NEQ => {
            Some("finite structure: POS, POS_NEQ and PEX_NEQ verdicts coincide")
        }
        _ => None,
    }
}

fn parse_set(text: &str, arity: Option<usize>, a: &Structure, inputs: &mut Inputs) -> Result<TupleSet> {
    inputs.add("set", text);
    TupleSet::parse(text, arity, a.size())
}

fn monoid_json(name: &str, m: &TransformationMonoid, list: bool) -> (Value, String) {
    let mut text = format!("{name}: {} elements\n", m.len());
    let mut v = json!({ "monoid": name, "size": m.len(), "degree": m.degree() });
    if list {
        let maps: Vec<String> = m.maps().map(|f| f.to_string()).collect();
        for f in &maps {
            text.push_str(f);
            text.push('\n');
        }
        v["elements"] = json!(maps);
    }
    (v, text)
}

fn on_structure(cmd: &Cmd, a: &Structure, inputs: &mut Inputs) -> Result<Output> {
    match cmd {
        Cmd::Show => {
            let c = contractible(a).is_some();
            let text = format!("{}size {}, contractible: {c}\n", to_text(a), a.size());
            Ok(Output::new(json!({ "structure": to_json(a), "size": a.size(), "contractible": c }), text))
        }
        Cmd::Monoid { kind, arity, list } => {
            let (label, m) = match kind.to_ascii_lowercase().as_str() {
                "end" => ("End", end_monoid(a)?),
                "emb" => ("Emb", emb_monoid(a)?),
                "aut" => ("Aut", aut_group(a)?),
                "pol" => {
                    let pols = polymorphisms(a, *arity)?;
                    let mut text = format!("Pol{}({}): {} polymorphisms\n", arity, a.name(), pols.len());
                    let mut v = json!({ "monoid": "Pol", "arity": arity, "size": pols.len() });
                    if *list {
                        let maps: Vec<String> = pols.iter().map(|f| f.to_string()).collect();
                        for f in &maps {
                            text.push_str(f);
                            text.push('\n');
                        }
                        v["elements"] = json!(maps);
                    }
                    return Ok(Output::new(v, text));
                }
                other => return Err(Error::invalid(format!("unknown monoid `{other}` (end, emb, aut, pol)"))),
            };
            let (v, text) = monoid_json(&format!("{label}({})", a.name()), &m, *list);
            Ok(Output::new(v, text))
        }
        Cmd::Orbit { tuple, class } => {
            inputs.add("tuple", tuple);
            let body = if tuple.trim_start().starts_with('{') { tuple.clone() } else { format!("{{{tuple}}}") };
            let t = TupleSet::parse(&body, None, a.size())?;
            let t = t.first().cloned().ok_or_else(|| Error::invalid("no tuple given"))?;
            let frag = class_fragment(class)?;
            let d = Definer::new(a);
            let o = orbit(&t, d.monoid(frag)?)?;
            let text = format!("orbit of {} under {class}: {} tuples\n{o}\n", format_tuple(&t), o.len());
            let tuples: Vec<_> = o.iter().cloned().collect();
            Ok(Output::new(json!({ "tuple": t, "class": class, "size": o.len(), "orbit": tuples }), text))
        }
        Cmd::Closed { set, arity, class } => {
            let x = parse_set(set, *arity, a, inputs)?;
            let frag = class_fragment(class)?;
            let d = Definer::new(a);
            let w = is_closed(&x, d.monoid(frag)?)?;
            let text = match &w {
                None => format!("closed under {class}\n"),
                Some(w) => format!(
                    "not closed under {class}: {} sends {} to {}\n",
                    w.map,
                    format_tuple(&w.tuple),
                    format_tuple(&w.image)
                ),
            };
            Ok(Output::new(json!({ "class": class, "closed": w.is_none(), "witness": w }), text)
                .negative(w.is_some()))
        }
        Cmd::Define { fragment: f, set, arity } => {
            let frag = fragment(f)?;
            let x = parse_set(set, *arity, a, inputs)?;
            let v = Definer::new(a).check(&x, frag)?;
            let mut text = format!("{x} is {}{frag}-definable\n", if v.definable { "" } else { "not " });
            if let Some(c) = &v.certificate {
                let _ = writeln!(text, "certificate: {c}");
            }
            if let Some(w) = &v.witness {
                let args: Vec<String> = w.tuples.iter().map(|t| format_tuple(t)).collect();
                let _ = writeln!(
                    text,
                    "witness: {} ({}) sends {} to {}",
                    w.map,
                    w.class,
                    args.join(" "),
                    format_tuple(&w.image)
                );
            }
            let mut out = Output::new(&v, text).negative(!v.definable);
            if let Some(n) = degeneracy_note(frag) {
                out = out.flag(n);
            }
            Ok(out)
        }
        Cmd::Synth { fragment: f, set, arity } => {
            let frag = fragment(f)?;
            let x = parse_set(set, *arity, a, inputs)?;
            let phi = synthesize(a, &x, frag)?;
            Ok(Output::new(json!({ "fragment": frag, "formula": phi }), format!("{phi}\n")))
        }
        Cmd::Interp(sub) => interp_cmd(sub, a, inputs),
        Cmd::Contractible { length } => {
            let z = zus_equivalent(a, *length)?;
            let constant = contractible(a);
            let mut text = match &constant {
                Some(c) => format!("contractible: {c}\n"),
                None => "not contractible\n".to_string(),
            };
            if let Some((s, t)) = &z.separating {
                let _ = writeln!(text, "separating tuples: {} {}", format_tuple(s), format_tuple(t));
            }
            Ok(Output::new(json!({ "constant": constant, "zus": z }), text).negative(constant.is_none()))
        }
        Cmd::Cosets => {
            let e = end_monoid(a)?;
            let g = aut_group(a)?;
            let cosets = right_cosets(&e, &g)?;
            let sizes: Vec<usize> = cosets.iter().map(Vec::len).collect();
            let text = format!("{} right cosets of Aut in End (sizes {:?})\n", cosets.len(), sizes);
            Ok(Output::new(json!({ "count": cosets.len(), "sizes": sizes, "cosets": cosets }), text))
        }
        Cmd::Special => {
            let e = end_monoid(a)?;
            let s = special_elements(&e);
            let mut text = String::new();
            for (name, els) in
                [("absorbing", &s.absorbing), ("constants", &s.constants), ("idempotent_central", &s.idempotent_central)]
            {
                let _ = writeln!(text, "{name}: {}", els.len());
                for &i in els {
                    let _ = writeln!(text, "  {}", e.map(i));
                }
            }
            let maps = |els: &[usize]| -> Vec<String> { els.iter().map(|&i| e.map(i).to_string()).collect() };
            let v = json!({
                "end_size": e.len(),
                "absorbing": { "count": s.absorbing.len(), "maps": maps(&s.absorbing) },
                "constants": { "count": s.constants.len(), "maps": maps(&s.constants) },
                "idempotent_central": { "count": s.idempotent_central.len(), "maps": maps(&s.idempotent_central) },
            });
            Ok(Output::new(v, text))
        }
        Cmd::Sandwich => {
            let r = sandwich_check(a)?;
            let mut text = format!(
                "right-invertible {} <= embeddings {} <= left-cancellable {} (of {})\n",
                r.right_invertible, r.embeddings, r.left_cancellable, r.end_size
            );
            if let Some((m, which)) = &r.violation {
                let _ = writeln!(text, "violation of {which}: {m}");
            }
            Ok(Output::new(&r, text).negative(!r.holds()))
        }
        Cmd::Csp(CspCmd::Solve { sentence }) => {
            inputs.add("sentence", sentence);
            let phi = parse_formula(sentence)?;
            let holds = csp_solve(a, &phi)?;
            Ok(Output::new(json!({ "sentence": phi, "holds": holds }), format!("{holds}\n")).negative(!holds))
        }
        Cmd::Csp(CspCmd::Reduce { interp: name, sentence }) => {
            let i = load_interp(name, a.signature(), inputs)?;
            inputs.add("sentence", sentence);
            let phi = parse_formula(sentence)?;
            let r = csp_reduce(a, &i, &phi)?;
            let text = format!(
                "{}\nsize {} -> {} (constant {})\n",
                r.sentence, r.input_size, r.output_size, r.constant
            );
            Ok(Output::new(&r, text))
        }
        Cmd::Corpus { .. } | Cmd::Demo { .. } | Cmd::Selftest { .. } => unreachable!("handled without a structure"),
    }
}

fn interp_list() -> Output {
    let mut text = String::new();
    for (name, about) in LIBRARY {
        let _ = writeln!(text, "{name:<10} {about}");
    }
    let v: Vec<Value> = LIBRARY.iter().map(|(n, d)| json!({ "name": n, "about": d })).collect();
    Output::new(json!({ "library": v }), text)
}

fn interp_cmd(sub: &InterpCmd, a: &Structure, inputs: &mut Inputs) -> Result<Output> {
    match sub {
        InterpCmd::List => Ok(interp_list()),
        InterpCmd::Apply { interp: name } => {
            let i = load_interp(name, a.signature(), inputs)?;
            let t = apply(&i, a)?;
            let classes = t.classes();
            Ok(Output::new(
                json!({ "interpretation": i, "structure": to_json(&t.target), "classes": classes }),
                to_text(&t.target),
            ))
        }
        InterpCmd::Verify { interp: name, fragment: f } => {
            let i = load_interp(name, a.signature(), inputs)?;
            let frag = fragment(f)?;
            let v = verify(a, &i, frag)?;
            let mut text = String::new();
            for s in &v.sets {
                let _ = writeln!(
                    text,
                    "{:<12} arity {} size {:>4}  {}",
                    s.set,
                    s.arity,
                    s.size,
                    if s.verdict.definable { "definable" } else { "not definable" }
                );
            }
            let _ = writeln!(text, "{} {} at {frag}", i.name, if v.holds { "verifies" } else { "fails" });
            Ok(Output::new(&v, text).negative(!v.holds))
        }
        InterpCmd::Compose { first, second } => {
            let i = load_interp(first, a.signature(), inputs)?;
            let j = load_interp(second, &i.target_signature()?, inputs)?;
            let r = compose_report(a, &i, &j)?;
            let mut text = r.composite.to_string();
            let _ = writeln!(
                text,
                "identification {} (iso: {}), composite PEX: {}, EXIST: {}",
                r.identification, r.identification_is_iso, r.composite_pex, r.composite_exist
            );
            let mut out = Output::new(&r, text);
            if r.finite_degeneracy {
                out = out.flag("composite verifies EXIST only because self-embeddings of a finite structure are automorphisms");
            }
            Ok(out)
        }
        InterpCmd::Induce { interp: name, map, to, level } => {
            let i = load_interp(name, a.signature(), inputs)?;
            match map {
                Some(m) => {
                    inputs.add("map", m);
                    let h = FinMap::parse(m)?;
                    let a2 = match to {
                        Some(p) => load_file_structure(p, inputs)?,
                        None => a.clone(),
                    };
                    let g = induced_hom(&i, a, &a2, &h)?;
                    Ok(Output::new(json!({ "map": h, "induced": g }), format!("{g}\n")))
                }
                None => {
                    let level = Level::parse(level)?;
                    let f = functor_map(a, &i, level)?;
                    let text = format!(
                        "{} elements into End of a {}-element target; homomorphism: {} ({})\n",
                        f.source.len(),
                        f.table.target.size(),
                        f.verdict.is_hom,
                        f.verdict.method
                    );
                    let bijective = f.hom.is_bijective(f.target.len());
                    Ok(Output::new(
                        json!({
                            "level": level,
                            "source_size": f.source.len(),
                            "target_size": f.target.len(),
                            "hom": f.hom,
                            "bijective": bijective,
                            "verdict": f.verdict,
                        }),
                        text,
                    ))
                }
            }
        }
        InterpCmd::Homotopy { first, second, level } => {
            let i1 = load_interp(first, a.signature(), inputs)?;
            let i2 = load_interp(second, a.signature(), inputs)?;
            let level = Level::parse(level)?;
            let r = homotopic(a, &i1, &i2, level)?;
            let text = format!(
                "{} and {} {} homotopic at {level} (maps equal: {}, lemma consistent: {})\n",
                i1.name,
                i2.name,
                if r.homotopic { "are" } else { "are not" },
                r.maps_equal,
                r.lemma_consistent
            );
            Ok(Output::new(&r, text).negative(!r.homotopic))
        }
        InterpCmd::Reconstruct { from, trivial, level } => {
            let level = Level::parse(level)?;
            let (b, f) = match (from, trivial) {
                (Some(name), None) => {
                    let i = load_interp(name, a.signature(), inputs)?;
                    let fm = functor_map(a, &i, level)?;
                    (fm.table.target, fm.hom)
                }
                (None, Some(p)) => {
                    let b = load_file_structure(p, inputs)?;
                    let d = Definer::new(a);
                    let f = MonoidHom::trivial(level.monoid(&d)?, &end_monoid(&b)?);
                    (b, f)
                }
                _ => return Err(Error::invalid("give exactly one of --from and --trivial")),
            };
            let r = reconstruct(a, &b, &f, level)?;
            let mut text = match r.verdict.to_interpretation("RECON", &r.table) {
                Some(i) => i.to_string(),
                None => String::new(),
            };
            let _ = writeln!(
                text,
                "good tuple {}, verifies at {}: {}, round trip: {}",
                format_tuple(&r.good),
                r.verdict.fragment,
                r.verdict.holds,
                r.round_trip
            );
            let ok = r.verdict.holds && r.round_trip;
            Ok(Output::new(&r, text).negative(!ok))
        }
        InterpCmd::Bi { first, second, other, level } => {
            let b = load_file_structure(other, inputs)?;
            let i = load_interp(first, a.signature(), inputs)?;
            let j = load_interp(second, b.signature(), inputs)?;
            let level = Level::parse(level)?;
            let r = biinterpretation_check(a, &b, &i, &j, level)?;
            let text = format!(
                "{} bi-interpretation at {level} (forward homotopic: {}, backward homotopic: {}, monoid iso: {})\n",
                if r.holds { "a" } else { "not a" },
                r.forward.homotopic,
                r.backward.homotopic,
                r.iso_verified
            );
            Ok(Output::new(&r, text).negative(!r.holds))
        }
    }
}

fn corpus(family: Option<&str>, params: &[usize], list: bool, inputs: &mut Inputs) -> Result<Output> {
    if list || family.is_none() {
        let mut text = String::new();
        for (f, p) in FAMILIES {
            let _ = writeln!(text, "{f} {p}");
        }
        let v: Vec<Value> = FAMILIES.iter().map(|(f, p)| json!({ "family": f, "params": p })).collect();
        return Ok(Output::new(json!({ "families": v }), text));
    }
    let family = family.unwrap_or_default();
    inputs.add("family", family);
    let ps: Vec<String> = params.iter().map(usize::to_string).collect();
    inputs.add("params", &ps.join(" "));
    let s = build_corpus(family, params)?;
    Ok(Output::new(json!({ "structure": to_json(&s), "size": s.size() }), to_text(&s)))
}

fn run_demo(name: Option<&str>, list: bool, inputs: &mut Inputs) -> Result<Output> {
    let Some(name) = name.filter(|_| !list) else {
        let mut text = String::new();
        for (n, about) in DEMOS {
            let _ = writeln!(text, "{n:<9} {about}");
        }
        let v: Vec<Value> = DEMOS.iter().map(|(n, d)| json!({ "name": n, "about": d })).collect();
        return Ok(Output::new(json!({ "demos": v }), text));
    };
    inputs.add("demo", name);
    let r = demo(name)?;
    let mut text = format!("demo {}\n", r.name);
    for f in &r.facts {
        let tag = match f.status {
            Status::Checked { holds: true } => "ok  ",
            Status::Checked { holds: false } => "FAIL",
            Status::ConstructionOnly => "only by construction",
        };
        let _ = write!(text, "[{tag}] {}", f.claim);
        if !f.detail.is_empty() {
            let _ = write!(text, " ({})", f.detail);
        }
        text.push('\n');
    }
    let passed = r.passed();
    let mut out = Output::new(json!({ "demo": r, "passed": passed }), text).negative(!passed);
    if r.facts.iter().any(|f| matches!(f.status, Status::ConstructionOnly)) {
        out = out.flag("some claims concern infinite structures and are shown by construction only");
    }
    Ok(out)
}

fn selftest(scale: &str, only: &[usize], seed: u64, inputs: &mut Inputs) -> Result<Output> {
    let scale = Scale::parse(scale)?;
    inputs.add("scale", &format!("{scale:?}"));
    let ids: Vec<usize> = if only.is_empty() { (1..=CRITERIA.len()).collect() } else { only.to_vec() };
    if let Some(&bad) = ids.iter().find(|&&id| id == 0 || id > CRITERIA.len()) {
        return Err(Error::invalid(format!("no criterion {bad}")));
    }
    let mut text = String::new();
    let mut outcomes = Vec::new();
    let mut phases = Vec::new();
    for id in ids {
        let (o, t) = acceptance::run_timed(id, scale, seed);
        let _ = writeln!(
            text,
            "criterion {id:>2} {} {} ({} checks, {:.1}s){}",
            if o.passed { "PASS" } else { "FAIL" },
            o.title,
            o.checks,
            t.as_secs_f64(),
            if o.detail.is_empty() { String::new() } else { format!(": {}", o.detail) }
        );
        phases.push((format!("criterion {id}"), t.as_secs_f64()));
        outcomes.push(o);
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    let _ = writeln!(text, "{} of {} criteria passed", outcomes.len() - failed, outcomes.len());
    let mut out = Output::new(json!({ "scale": scale, "seed": seed, "criteria": outcomes }), text).negative(failed > 0);
    out.phases = phases;
    Ok(out)
}
