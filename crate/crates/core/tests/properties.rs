use std::collections::BTreeMap;

use biembed::corpus::{random_graph, random_normal_tree, random_permutation, random_qo_tree, random_tree, rng};
use biembed::gadgets::build_ordered_gt;
use biembed::io::{
    parse_gcode, parse_melem, parse_metric, parse_normal_tree, parse_qo_tree, parse_structure, write_gcode, write_melem,
    write_metric, write_normal_tree, write_qo_tree, write_structure,
};
use biembed::metrics::{geodesic_space, is_metric, is_ultrametric, ultra_space};
use biembed::monoid::{act, compose, GraphCode, MonoidElem};
use biembed::morphisms::{embed_from_witness, extract_witness, find_morphisms, is_morphism, BuildVariant, MorphismKind};
use biembed::seqs::{pair, preceq, seq_code, seq_decode, theta, unpair, FinSeq};
use biembed::structures::{relabel, FinInjection};
use biembed::trees::{
    check_normal, find_leqmax_witness, has_reflexive_skeleton, normal_closure, normalize, qo_is_normal, refine, slice,
    transitivity_violation, verify_witness, zero_separates, NormalTree, TruncationParams, WitnessMode,
};
use proptest::prelude::*;

fn params() -> impl Strategy<Value = TruncationParams> {
    (0usize..=2, 1u64..=3, 0usize..=2).prop_map(|(d, b, k)| TruncationParams::new(d, b, k).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pairing_is_a_bijection(n in 0u64..1 << 20, m in 0u64..1 << 20) {
        prop_assert_eq!(unpair(pair(n, m)), (n, m));
        let c = pair(n, m);
        prop_assert_eq!(pair(unpair(c).0, unpair(c).1), c);
    }

    #[test]
    fn sequence_codes_round_trip(items in prop::collection::vec(0u64..6, 0..5)) {
        let s = FinSeq::new(items);
        let code = seq_code(&s).unwrap();
        prop_assert_eq!(seq_decode(code), s.clone());
        if let Some(parent) = s.parent() {
            prop_assert!(seq_code(&parent).unwrap() < code);
        }
    }

    #[test]
    fn theta_is_monotone_in_shortlex(a in prop::collection::vec(0u64..2, 0..8), b in prop::collection::vec(0u64..2, 0..8)) {
        let (a, b) = (FinSeq::new(a), FinSeq::new(b));
        prop_assert_eq!(theta(&a).unwrap() <= theta(&b).unwrap(), preceq(&a, &b));
    }

    #[test]
    fn closure_yields_normal_trees(p in params(), seed in any::<u64>(), density in 0.0f64..0.6) {
        let t = random_normal_tree(&mut rng(seed), &p, density).unwrap();
        prop_assert!(check_normal(&t, &p).unwrap());
        prop_assert_eq!(normal_closure(&t, &p).unwrap(), t);
    }

    #[test]
    fn normalize_then_refine_gives_a_normal_quasi_order(p in params(), seed in any::<u64>()) {
        let raw = random_qo_tree(&mut rng(seed), &p, 0.05);
        let s = refine(&normalize(&raw, &p).unwrap());
        prop_assert!(has_reflexive_skeleton(&s, &p));
        prop_assert!(transitivity_violation(&s, &p).is_none());
        prop_assert!(zero_separates(&s));
        prop_assert!(s.is_prefix_closed());
        prop_assert!(qo_is_normal(&s, &p));
        prop_assert_eq!(refine(&normalize(&s, &p).unwrap()), s);
    }

    #[test]
    fn slices_of_refined_trees_separate_points(p in params(), seed in any::<u64>()) {
        let s = refine(&normalize(&random_qo_tree(&mut rng(seed), &p, 0.05), &p).unwrap());
        let xs = biembed::seqs::binary_sequences_of_len(p.depth);
        for x in &xs {
            let sx = slice(&s, x, &p).unwrap();
            for k in 0..=p.depth {
                let y = x.prefix(k);
                prop_assert!(sx.contains(&y, &FinSeq::zeros(k)));
            }
            for y in &xs {
                if x != y {
                    prop_assert_ne!(&sx, &slice(&s, y, &p).unwrap());
                }
            }
        }
    }

    #[test]
    fn found_witnesses_verify(p in params(), seed in any::<u64>(), mode in prop::sample::select(vec![WitnessMode::Plain, WitnessMode::LexPreserving, WitnessMode::CodeMonotone])) {
        let mut r = rng(seed);
        let s = random_normal_tree(&mut r, &p, 0.3).unwrap();
        let t = random_normal_tree(&mut r, &p, 0.3).unwrap();
        if let Some(f) = find_leqmax_witness(&s, &t, mode, &p) {
            prop_assert!(verify_witness(&f, &s, &t, mode, &p));
        }
        let union = normal_closure(&NormalTree::from_nodes(s.iter().chain(t.iter()).cloned()), &p).unwrap();
        prop_assert!(find_leqmax_witness(&s, &union, mode, &p).is_some());
    }

    #[test]
    fn witnesses_compose(p in params(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let trees: Vec<NormalTree> = (0..3).map(|_| random_normal_tree(&mut r, &p, 0.4).unwrap()).collect();
        let f = find_leqmax_witness(&trees[0], &trees[1], WitnessMode::Plain, &p);
        let g = find_leqmax_witness(&trees[1], &trees[2], WitnessMode::Plain, &p);
        if let (Some(f), Some(g)) = (f, g) {
            prop_assert!(verify_witness(&f.then(&g), &trees[0], &trees[2], WitnessMode::Plain, &p));
        }
    }

    #[test]
    fn ordered_embedding_round_trips_through_extraction(seed in any::<u64>()) {
        let p = TruncationParams::new(1, 2, 1).unwrap();
        let mut r = rng(seed);
        let s = random_normal_tree(&mut r, &p, 0.4).unwrap();
        let extra = random_normal_tree(&mut r, &p, 0.4).unwrap();
        let t = normal_closure(&NormalTree::from_nodes(s.iter().chain(extra.iter()).cloned()), &p).unwrap();
        let f = find_leqmax_witness(&s, &t, WitnessMode::LexPreserving, &p).unwrap();
        let g = embed_from_witness(&f, &s, &t, BuildVariant::OrderedGt, &p).unwrap();
        prop_assert_eq!(extract_witness(&g, &s, &t, BuildVariant::OrderedGt, &p).unwrap(), f);
    }

    #[test]
    fn relabeling_by_a_permutation_is_undone_by_its_inverse(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = TruncationParams::new(1, 2, 1).unwrap();
        let g = build_ordered_gt(&random_normal_tree(&mut r, &p, 0.3).unwrap(), &p).unwrap().structure;
        let perm = random_permutation(&mut r, g.domain());
        let moved = relabel(&perm, &g).unwrap();
        prop_assert_eq!(relabel(&perm.inverse(), &moved).unwrap(), g.clone());
        let map: BTreeMap<u64, u64> = perm.map().clone();
        prop_assert!(is_morphism(&map, &g, &moved, MorphismKind::Isomorphism).unwrap());
    }

    #[test]
    fn every_found_morphism_verifies(seed in any::<u64>(), kind in prop::sample::select(vec![MorphismKind::Embedding, MorphismKind::Isomorphism, MorphismKind::Homomorphism, MorphismKind::WeakHomomorphism])) {
        let mut r = rng(seed);
        let a = random_tree(&mut r, 4);
        let b = random_graph(&mut r, 5, 0.5);
        for m in find_morphisms(&a, &b, kind, Some(50)) {
            prop_assert!(is_morphism(&m.map, &a, &b, kind).unwrap());
        }
    }

    #[test]
    fn geodesic_spaces_are_metric(seed in any::<u64>(), n in 1u64..9) {
        let g = random_tree(&mut rng(seed), n);
        prop_assert!(is_metric(&geodesic_space(&g).unwrap()));
    }

    #[test]
    fn ultra_spaces_are_ultrametric(p in params(), seed in any::<u64>()) {
        let t = random_normal_tree(&mut rng(seed), &p, 0.3).unwrap();
        let u = ultra_space(&t, &p).unwrap();
        prop_assert!(is_ultrametric(&u.space));
        prop_assert!(u.space.len() >= 3);
    }

    #[test]
    fn action_law_on_random_elements(seed in any::<u64>()) {
        let mut r = rng(seed);
        let pick = |v: Vec<MonoidElem>, r: &mut rand_chacha::ChaCha8Rng| {
            use rand::Rng;
            let i = r.gen_range(0..v.len());
            v[i].clone()
        };
        let g = pick(MonoidElem::all(2, 3), &mut r);
        let h = pick(MonoidElem::all(3, 4), &mut r);
        for x in GraphCode::all(2) {
            prop_assert_eq!(act(&h, &act(&g, &x).unwrap()).unwrap(), act(&compose(&h, &g).unwrap(), &x).unwrap());
        }
    }

    #[test]
    fn file_formats_round_trip(p in params(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let t = random_normal_tree(&mut r, &p, 0.3).unwrap();
        prop_assert_eq!(parse_normal_tree(&write_normal_tree(&t, Some(&p))).unwrap(), (Some(p), t.clone()));
        let q = random_qo_tree(&mut r, &p, 0.1);
        prop_assert_eq!(parse_qo_tree(&write_qo_tree(&q, None)).unwrap().1, q);
        let g = build_ordered_gt(&t, &p).unwrap().structure;
        let back = parse_structure(&write_structure(&g)).unwrap();
        prop_assert_eq!(back.labels(), g.labels());
        prop_assert_eq!(back, g);
        let u = ultra_space(&t, &p).unwrap().space;
        prop_assert_eq!(parse_metric(&write_metric(&u)).unwrap(), u);
        let code = GraphCode::all(4)[(seed % 64) as usize].clone();
        prop_assert_eq!(parse_gcode(&write_gcode(&code)).unwrap(), code.clone());
        let inj = FinInjection::all(2, 4)[(seed % 12) as usize].clone();
        let e = MonoidElem::from_injection(inj, &code).unwrap();
        prop_assert_eq!(parse_melem(&write_melem(&e)).unwrap(), e);
    }
}
