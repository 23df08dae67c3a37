use super::*;
use crate::algebra::MonoidHom;
use crate::corpus::{arrow, cycle, eq2, m1p, m1pp, m2t, m2tc, pureset};
use crate::maps::{find_isomorphism, FinMap};

fn lib(name: &str, a: &Structure) -> Interpretation {
    library(name, a.signature()).unwrap()
}

#[test]
fn identity_reproduces_source() {
    let a = m1p(4, 3).unwrap();
    let t = apply(&identity(a.signature()), &a).unwrap();
    assert_eq!(t.target, a);
    assert_eq!(t.classes().len(), a.size());
}

#[test]
fn quotient_of_eq2_is_m2t() {
    for (s, d) in [(1, 1), (2, 3), (0, 2)] {
        let a = eq2(s, d).unwrap();
        let t = apply(&lib("QUOT", &a), &a).unwrap();
        assert_eq!(t.target, m2t(d, s).unwrap(), "EQ2({s},{d})");
    }
}

#[test]
fn quot_pe_of_m1p_is_m2tc() {
    let a = m1p(4, 3).unwrap();
    let i = lib("QUOT_PE", &a);
    let t = apply(&i, &a).unwrap();
    assert_eq!(t.target, m2tc(3, 2).unwrap());
    assert!(verify(&a, &i, Fragment::PEX).unwrap().holds);
}

#[test]
fn prod_lands_in_m1p_and_is_positive_existential() {
    let a = m2tc(3, 2).unwrap();
    let i = lib("PROD", &a);
    let t = apply(&i, &a).unwrap();
    assert!(find_isomorphism(&t.target, &m1p(4, 3).unwrap())
        .unwrap()
        .is_some());
    assert!(verify(&a, &i, Fragment::PEX).unwrap().holds);
    let pp = verify(&a, &i, Fragment::PP).unwrap();
    assert!(!pp.holds);
    assert!(pp.failures().iter().any(|s| s.set == "domain"));
}

#[test]
fn quot_needs_negation_on_eq2() {
    let a = eq2(2, 2).unwrap();
    let i = lib("QUOT", &a);
    assert!(verify(&a, &i, Fragment::EXIST).unwrap().holds);
    let v = verify(&a, &i, Fragment::PEX).unwrap();
    assert!(!v.holds);
    assert_eq!(
        v.failures()
            .iter()
            .map(|s| s.set.as_str())
            .collect::<Vec<_>>(),
        ["P"]
    );
}

#[test]
fn induced_map_need_not_be_strong() {
    let a = eq2(1, 2).unwrap();
    let b = eq2(0, 3).unwrap();
    let i = lib("QUOT", &a);
    let h = FinMap::new(vec![4, 0, 1, 2, 3]);
    let g = induced_hom(&i, &a, &b, &h).unwrap();
    assert_eq!(g.images(), &[2, 0, 1]);
}

#[test]
fn kernel_must_be_an_equivalence() {
    let a = arrow().unwrap();
    let i = Interpretation::new(
        "bad",
        1,
        parse_formula("(= x0 x0)").unwrap(),
        parse_formula("(R x0 x1)").unwrap(),
    );
    assert!(matches!(apply(&i, &a), Err(Error::Interpretation(_))));
}

#[test]
fn parse_round_trip() {
    let a = m2tc(3, 2).unwrap();
    let i = lib("PROD", &a);
    let text = i.to_string();
    assert_eq!(Interpretation::parse(&text).unwrap(), i);
}

#[test]
fn parse_infers_arity_and_reports_positions() {
    let text = "interpret T dim 2\ndomain (= x0 x0)\nkernel (and (= x0 x2)\n  (= x1 x3))\nrel S (R x0 x2)\n";
    let i = Interpretation::parse(text).unwrap();
    assert_eq!(i.relations[0].arity, 2);
    let err = Interpretation::parse("interpret T dim 1\ndomain (= x0 x0)\nkernel (= x0 (x1)\n")
        .unwrap_err();
    match err {
        Error::Parse { line, .. } => assert_eq!(line, 3),
        other => panic!("unexpected {other:?}"),
    }
    assert!(
        Interpretation::parse("interpret T dim 1\ndomain (= x0 x3)\nkernel (= x0 x1)\n").is_err()
    );
}

#[test]
fn separating_pairs() {
    let (x, y) = separating_pair(&arrow().unwrap()).unwrap().unwrap();
    assert_eq!((x, y), (vec![0], vec![1]));
    let (x, y) = separating_pair(&m1pp(4, 3).unwrap()).unwrap().unwrap();
    assert_eq!((x, y), (vec![0], vec![4]));
    assert!(separating_pair(&pureset(3).unwrap()).unwrap().is_none());
}

#[test]
fn zus_agrees_with_contractibility() {
    for a in [
        pureset(3).unwrap(),
        arrow().unwrap(),
        cycle(3).unwrap(),
        eq2(1, 1).unwrap(),
    ] {
        let z = zus_equivalent(&a, None).unwrap();
        assert!(z.consistent, "{}", a.name());
    }
}

#[test]
fn adjoining_a_point_keeps_the_monoid() {
    let r = adjoin_point(&pureset(3).unwrap()).unwrap();
    assert_eq!(r.end_size, 27);
    assert!(r.verified);
    assert!(r.source_contractible);
    assert!(!r.target_contractible);
}

#[test]
fn csp_solve_on_arrow() {
    let a = arrow().unwrap();
    let yes = parse_formula("(exists x0 x1 (R x0 x1))").unwrap();
    let no = parse_formula("(exists x0 x1 x2 (and (R x0 x1) (R x1 x2)))").unwrap();
    assert!(csp_solve(&a, &yes).unwrap());
    assert!(!csp_solve(&a, &no).unwrap());
}

#[test]
fn csp_reduction_preserves_truth() {
    let a = m1p(4, 3).unwrap();
    let i = lib("QUOT_PE", &a);
    let b = apply(&i, &a).unwrap().target;
    for s in [
        "(exists x0 (P x0))",
        "(exists x0 (and (P x0) (= x0 c0)))",
        "(exists x0 x1 (and (P x0) (P x1) (= x0 c1)))",
    ] {
        let phi = parse_formula(s).unwrap();
        let r = csp_reduce(&a, &i, &phi).unwrap();
        assert_eq!(
            csp_solve(&b, &phi).unwrap(),
            csp_solve(&a, &r.sentence).unwrap(),
            "{s}"
        );
    }
}

#[test]
fn reconstruction_refuses_contractible_sources() {
    let a = pureset(3).unwrap();
    let e = crate::maps::end_monoid(&a).unwrap();
    let f = MonoidHom::identity(&e);
    assert!(matches!(
        reconstruct(&a, &a, &f, Level::Pex),
        Err(Error::Refused(_))
    ));
}

#[test]
fn reconstruction_round_trips_the_identity() {
    let a = arrow().unwrap();
    let e = crate::maps::end_monoid(&a).unwrap();
    let f = MonoidHom::identity(&e);
    let r = reconstruct(&a, &a, &f, Level::Pex).unwrap();
    assert!(r.verdict.holds);
    assert!(r.round_trip);
}

#[test]
fn homotopy_examples() {
    let a = m1p(4, 3).unwrap();
    let h = homotopic(&a, &lib("QUOT", &a), &lib("QUOT_PE", &a), Level::Fo).unwrap();
    assert!(h.homotopic && h.lemma_consistent);
    let c = cycle(3).unwrap();
    let h = homotopic(&c, &lib("ID", &c), &lib("REVERSE", &c), Level::Fo).unwrap();
    assert!(!h.homotopic && h.lemma_consistent);
    let r = arrow().unwrap();
    let h = homotopic(&r, &lib("ID", &r), &lib("REVERSE", &r), Level::Pex).unwrap();
    assert!(h.homotopic && h.lemma_consistent);
}

#[test]
fn composition_matches_sequential_application() {
    let a = m1p(4, 3).unwrap();
    let r = compose_report(&a, &lib("QUOT_PE", &a), &lib("PROD", &m2tc(3, 2).unwrap())).unwrap();
    assert!(r.identification_is_iso);
    assert!(r.inputs_pex && r.composite_pex);
}

#[test]
fn functor_laws() {
    let a = m1p(4, 3).unwrap();
    let b = m2tc(3, 2).unwrap();
    let law = functor_law(&a, &lib("QUOT_PE", &a), &lib("PROD", &b)).unwrap();
    assert!(law.holds);
    let x = arrow().unwrap();
    let sq = apply(&lib("SQUARE", &x), &x).unwrap().target;
    assert!(
        functor_law(&x, &lib("SQUARE", &x), &lib("REVERSE", &sq))
            .unwrap()
            .holds
    );
}

#[test]
fn biinterpretation_of_m1p_and_m2tc() {
    let a = m1p(4, 3).unwrap();
    let b = m2tc(3, 2).unwrap();
    let (i, j) = (lib("QUOT_PE", &a), lib("PROD", &b));
    let r = biinterpretation_check(&a, &b, &i, &j, Level::Exist).unwrap();
    assert!(r.i_verified && r.j_verified);
    assert!(r.forward.homotopic && r.backward.homotopic);
    assert!(r.holds && r.iso_verified);
    // The End monoids differ, so the composite over M1P cannot be
    // identified with the identity positive existentially.
    let r = biinterpretation_check(&a, &b, &i, &j, Level::Pex).unwrap();
    assert!(!r.forward.homotopic && r.forward.lemma_consistent);
    assert!(!r.holds);
}
