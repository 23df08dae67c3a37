use std::collections::BTreeSet;

use proptest::prelude::*;

use endomorph_core::algebra::{closure, is_closed, orbit, right_cosets, special_elements};
use endomorph_core::corpus::{self, build_corpus};
use endomorph_core::definability::Definer;
use endomorph_core::interp::{
    apply, biinterpretation_check, contractible, end_functor_map, functor_law, homotopic,
    induced_hom, library, reconstruct, verify, zus_equivalent, Interpretation, Level,
};
use endomorph_core::logic::{
    canonical_diagram, classify, definable_set, enumerate_formulas, evaluate, sample_formula,
    Bounds, DiagramFlavor,
};
use endomorph_core::maps::{aut_group, classify_map, emb_monoid, end_monoid, search_homs};
use endomorph_core::structure::{load_structure, power, to_json, to_text, TupleIter};
use endomorph_core::{FinMap, Fragment, MapFilter, Structure, Tuple, TupleSet};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A structure with domain `1..=max_n` over `{R/2}`, `{U/1}` or both.
fn arb_structure(max_n: usize) -> impl Strategy<Value = Structure> {
    (1..=max_n, 0u8..3, any::<u64>(), any::<u8>()).prop_map(|(n, sig, rbits, ubits)| {
        let mut b = Structure::builder(format!("S{n}"), n);
        if sig != 1 {
            let r: Vec<Tuple> = TupleIter::new(n, 2)
                .enumerate()
                .filter(|(i, _)| rbits >> i & 1 == 1)
                .map(|(_, t)| t)
                .collect();
            b = b.relation("R", 2, r);
        }
        if sig != 0 {
            b = b.unary("U", (0..n).filter(|x| ubits >> x & 1 == 1));
        }
        b.build().unwrap()
    })
}

fn subset(n: usize, k: usize, bits: u64) -> TupleSet {
    let tuples = TupleIter::new(n, k)
        .enumerate()
        .filter(|(i, _)| bits >> i & 1 == 1)
        .map(|(_, t)| t);
    TupleSet::new(k, n, tuples).unwrap()
}

fn lib(name: &str, a: &Structure) -> Interpretation {
    library(name, a.signature()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn serialization_round_trips(a in arb_structure(5)) {
        let back = load_structure(&to_text(&a)).unwrap();
        prop_assert_eq!(to_text(&back), to_text(&a));
        let back = load_structure(&to_json(&a).to_string()).unwrap();
        prop_assert_eq!(to_json(&back), to_json(&a));
    }

    #[test]
    fn powers_multiply_relation_sizes(a in arb_structure(3)) {
        let p1 = power(&a, 1).unwrap();
        prop_assert!(endomorph_core::maps::find_isomorphism(&a, &p1).unwrap().is_some());
        let p2 = power(&a, 2).unwrap();
        prop_assert_eq!(p2.size(), a.size() * a.size());
        for (r, r2) in a.relations().iter().zip(p2.relations()) {
            prop_assert_eq!(r2.len(), r.len() * r.len());
        }
    }

    #[test]
    fn corpus_cardinalities(x in 0usize..=6, y in 0usize..=6, z in 0usize..=6) {
        let size = |family: &str, params: &[usize]| build_corpus(family, params).ok().map(|s| s.size());
        if x >= 1 {
            prop_assert_eq!(size("PURESET", &[x]), Some(x));
            prop_assert_eq!(size("CYCLE", &[x]), Some(x));
        }
        if x + 2 * y >= 1 {
            prop_assert_eq!(size("EQ2", &[x, y]), Some(x + 2 * y));
            prop_assert_eq!(size("M1PP", &[x, y]), Some(x + 2 * y));
        }
        if x + 2 * y + 3 * z >= 1 {
            prop_assert_eq!(size("M0T", &[x, y, z]), Some(x + 2 * y + 3 * z));
        }
        if x >= 2 {
            prop_assert_eq!(size("M1P", &[x, y]), Some(x + 2 * y));
        }
        if x + y >= 1 {
            prop_assert_eq!(size("M2T", &[x, y]), Some(x + y));
        }
        prop_assert_eq!(size("M2TC", &[x, y]), Some(x + y + 2));
    }

    #[test]
    fn compiled_and_direct_evaluation_agree(a in arb_structure(3), seed in any::<u64>(), frag in 0usize..8) {
        let frag = Fragment::ALL[frag];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = sample_formula(a.signature(), frag, Bounds::new(2, 6).unwrap(), &mut rng).unwrap();
        prop_assert!(classify(&f).contains(&frag));
        let set = definable_set(&a, &f, 2).unwrap();
        for t in TupleIter::new(a.size(), 2) {
            prop_assert_eq!(set.contains(&t), evaluate(&a, &f, &t).unwrap());
        }
    }

    #[test]
    fn diagrams_define_orbits(a in arb_structure(4), seed in any::<u64>()) {
        let n = a.size();
        let anchor: Vec<usize> = (0..2).map(|i| (seed as usize >> (4 * i)) % n).collect();
        let e = end_monoid(&a).unwrap();
        let pos = canonical_diagram(&a, &anchor, DiagramFlavor::Positive).unwrap();
        prop_assert_eq!(definable_set(&a, &pos, 2).unwrap(), orbit(&anchor, &e).unwrap());
        let m = emb_monoid(&a).unwrap();
        let full = canonical_diagram(&a, &anchor, DiagramFlavor::Full).unwrap();
        prop_assert_eq!(definable_set(&a, &full, 2).unwrap(), orbit(&anchor, &m).unwrap());
    }

    #[test]
    fn finite_map_degeneracies(a in arb_structure(5)) {
        let emb = search_homs(&a, &a, MapFilter::EMBEDDING, &[]).unwrap();
        let aut = search_homs(&a, &a, MapFilter::AUTOMORPHISM, &[]).unwrap();
        prop_assert_eq!(emb, aut.clone());
        let inj = search_homs(&a, &a, MapFilter::INJECTIVE, &[]).unwrap();
        let bij = search_homs(&a, &a, MapFilter::BIJECTIVE, &[]).unwrap();
        prop_assert_eq!(inj, bij);
        let e = end_monoid(&a).unwrap();
        let units: BTreeSet<FinMap> = e.invertibles().maps().collect();
        let g: BTreeSet<FinMap> = aut_group(&a).unwrap().maps().collect();
        prop_assert_eq!(&units, &g);
        prop_assert_eq!(units, aut.into_iter().collect::<BTreeSet<_>>());
    }

    #[test]
    fn search_matches_brute_force(a in arb_structure(4), b in arb_structure(4), flags in 0usize..6) {
        prop_assume!(a.same_signature(&b));
        prop_assume!((b.size() as u64).pow(a.size() as u32) <= 100_000);
        let filter = [
            MapFilter::HOM,
            MapFilter::INJECTIVE,
            MapFilter::SURJECTIVE,
            MapFilter::EMBEDDING,
            MapFilter::AUTOMORPHISM,
            MapFilter::BIJECTIVE,
        ][flags];
        let found = search_homs(&a, &b, filter, &[]).unwrap();
        let mut brute = Vec::new();
        for t in TupleIter::new(b.size(), a.size()) {
            let f = FinMap::new(t);
            if filter.accepts(&classify_map(&a, &b, &f).unwrap()) {
                brute.push(f);
            }
        }
        prop_assert_eq!(found, brute);
    }

    #[test]
    fn composition_preserves_kinds(a in arb_structure(4), i in any::<prop::sample::Index>(), j in any::<prop::sample::Index>()) {
        let homs = search_homs(&a, &a, MapFilter::HOM, &[]).unwrap();
        let (f, g) = (&homs[i.index(homs.len())], &homs[j.index(homs.len())]);
        prop_assert!(classify_map(&a, &a, &f.then(g)).unwrap().homomorphism);
        let embs = search_homs(&a, &a, MapFilter::EMBEDDING, &[]).unwrap();
        let (f, g) = (&embs[i.index(embs.len())], &embs[j.index(embs.len())]);
        prop_assert!(classify_map(&a, &a, &f.then(g)).unwrap().is_embedding());
    }

    #[test]
    fn closure_is_least(a in arb_structure(3), k in 1usize..=2, bits in any::<u64>()) {
        let n = a.size();
        let x = subset(n, k, bits);
        let e = end_monoid(&a).unwrap();
        let c = closure(&x, &e).unwrap();
        prop_assert!(x.is_subset(&c));
        prop_assert!(is_closed(&c, &e).unwrap().is_none());
        let total = n.pow(k as u32);
        for sup in 0u64..(1 << total) {
            let y = subset(n, k, sup);
            if x.is_subset(&y) && is_closed(&y, &e).unwrap().is_none() {
                prop_assert!(c.is_subset(&y));
            }
        }
    }

    #[test]
    fn cosets_partition_end(a in arb_structure(4)) {
        let e = end_monoid(&a).unwrap();
        let g = aut_group(&a).unwrap();
        let cosets = right_cosets(&e, &g).unwrap();
        let mut all: Vec<usize> = cosets.iter().flatten().copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..e.len()).collect::<Vec<_>>());
        prop_assert!(cosets.iter().all(|c| !c.is_empty() && c.len() <= g.len()));
    }

    #[test]
    fn fragment_order_is_monotone(a in arb_structure(3), k in 1usize..=2, bits in any::<u64>()) {
        let x = subset(a.size(), k, bits);
        let d = Definer::new(&a);
        let yes = |f: Fragment| d.check(&x, f).unwrap().definable;
        let chain = [Fragment::PP, Fragment::PEX, Fragment::PEX_NEQ, Fragment::EXIST, Fragment::FO];
        for w in chain.windows(2) {
            prop_assert!(!yes(w[0]) || yes(w[1]), "{} then {}", w[0], w[1]);
        }
        for w in [Fragment::PEX, Fragment::POS, Fragment::POS_NEQ].windows(2) {
            prop_assert!(!yes(w[0]) || yes(w[1]), "{} then {}", w[0], w[1]);
        }
        prop_assert_eq!(yes(Fragment::EXIST), yes(Fragment::FO));
        prop_assert_eq!(yes(Fragment::POS), yes(Fragment::PEX_NEQ));
    }

    #[test]
    fn zus_matches_contractibility(a in arb_structure(4)) {
        let z = zus_equivalent(&a, None).unwrap();
        prop_assert_eq!(z.holds, contractible(&a).is_some());
        prop_assert!(z.consistent);
    }
}

#[test]
fn constants_are_absorbing_on_the_corpus() {
    for a in corpus::instances() {
        let e = end_monoid(&a).unwrap();
        let s = special_elements(&e);
        if !s.constants.is_empty() {
            assert_eq!(s.absorbing, s.constants, "{}", a.name());
        }
    }
}

#[test]
fn enumeration_is_prefix_stable_in_nodes() {
    let a = corpus::arrow().unwrap();
    for frag in [Fragment::PP, Fragment::QF, Fragment::FO] {
        let small = enumerate_formulas(a.signature(), frag, Bounds::new(2, 3).unwrap()).unwrap();
        let large = enumerate_formulas(a.signature(), frag, Bounds::new(2, 5).unwrap()).unwrap();
        assert_eq!(&large[..small.len()], &small[..], "{frag}");
    }
}

#[test]
fn constant_endomorphisms_induce_constants() {
    let cases = [
        corpus::eq2(1, 1).unwrap(),
        corpus::pureset(2).unwrap(),
        corpus::m2t(2, 2).unwrap(),
    ];
    for a in &cases {
        let e = end_monoid(a).unwrap();
        let consts: Vec<FinMap> = e.maps().filter(|f| f.is_constant()).collect();
        assert!(!consts.is_empty());
        for name in ["ID", "DIAG", "SQUARE", "REVERSE"] {
            let Ok(i) = library(name, a.signature()) else {
                continue;
            };
            if !verify(a, &i, Fragment::PEX).unwrap().holds {
                continue;
            }
            for c in &consts {
                assert!(
                    induced_hom(&i, a, a, c).unwrap().is_constant(),
                    "{name} on {}",
                    a.name()
                );
            }
        }
    }
}

#[test]
fn homotopy_lemma_on_library_pairs() {
    let arrow = corpus::arrow().unwrap();
    let cyc = corpus::cycle(3).unwrap();
    for (a, x, y, expect) in [
        (&arrow, "ID", "REVERSE", true),
        (&arrow, "ID", "DIAG", true),
        (&cyc, "ID", "REVERSE", false),
        (&cyc, "DIAG", "ID", true),
    ] {
        let h = homotopic(a, &lib(x, a), &lib(y, a), Level::Pex).unwrap();
        assert_eq!(h.homotopic, expect, "{x} {y} on {}", a.name());
        assert_eq!(h.homotopic, h.maps_equal);
        assert!(h.lemma_consistent);
    }
}

#[test]
fn functor_law_on_library_pairs() {
    let arrow = corpus::arrow().unwrap();
    let rev = apply(&lib("REVERSE", &arrow), &arrow).unwrap().target;
    assert!(
        functor_law(&arrow, &lib("REVERSE", &arrow), &lib("REVERSE", &rev))
            .unwrap()
            .holds
    );
    let diag = apply(&lib("DIAG", &arrow), &arrow).unwrap().target;
    assert!(
        functor_law(&arrow, &lib("DIAG", &arrow), &lib("ID", &diag))
            .unwrap()
            .holds
    );
}

#[test]
fn end_isomorphism_reconstructs_to_a_biinterpretation() {
    let a = corpus::arrow().unwrap();
    let fm = end_functor_map(&a, &lib("REVERSE", &a)).unwrap();
    let b = fm.table.target.clone();
    assert!(contractible(&a).is_none() && contractible(&b).is_none());
    let f = fm.hom.clone();
    let g = f.inverse().expect("End isomorphism");
    let ri = reconstruct(&a, &b, &f, Level::Pex).unwrap();
    let rj = reconstruct(&b, &a, &g, Level::Pex).unwrap();
    assert!(ri.round_trip && rj.round_trip);
    let i = ri.verdict.to_interpretation("I", &ri.table).unwrap();
    let j = rj.verdict.to_interpretation("J", &rj.table).unwrap();
    let bi = biinterpretation_check(&a, &b, &i, &j, Level::Pex).unwrap();
    assert!(bi.holds);
}
