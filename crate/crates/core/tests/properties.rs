use proptest::prelude::*;

use icx_core::closed_forms::{f_poly, g_poly, gen_fn_coeffs, predict_strong, GenFn};
use icx_core::complex::face_vertices;
use icx_core::homology::boundary_matrix;
use icx_core::{
    betti_match, component_homology, component_match, independence_complex, independence_homology, product, reduce, reduced_homology,
    reduced_homology_direct, replay, BettiPolynomial, Certification, Graph, HtType, ProductKind,
    RuleOrder, DEFAULT_FACE_BUDGET,
};

fn graph_strategy(max_n: usize) -> impl Strategy<Value = Graph> {
    (0..=max_n).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> =
            (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        let m = pairs.len();
        prop::collection::vec(any::<bool>(), m).prop_map(move |bits| {
            let edges = pairs.iter().zip(bits).filter(|(_, b)| *b).map(|(e, _)| *e);
            Graph::from_edges(n, edges).unwrap()
        })
    })
}

fn nonempty_graph(max_n: usize) -> impl Strategy<Value = Graph> {
    graph_strategy(max_n).prop_filter("non-empty", |g| !g.is_empty())
}

fn permuted(g: &Graph, perm: &[usize]) -> Graph {
    Graph::from_edges(g.vertex_count(), g.edges().into_iter().map(|(u, v)| (perm[u], perm[v]))).unwrap()
}

fn ht_strategy() -> impl Strategy<Value = HtType> {
    prop_oneof![
        Just(HtType::contractible()),
        prop::collection::vec((0i32..4, 1u64..3), 1..3)
            .prop_map(|s| HtType::wedge_of(&s).unwrap()),
    ]
}

fn sorted_edges(g: &Graph) -> Vec<(usize, usize)> {
    g.edges()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn strong_is_disjoint_union_of_categorical_and_cartesian(g in nonempty_graph(4), h in nonempty_graph(4)) {
        let s = product(ProductKind::Strong, &g, &h).unwrap();
        let c = product(ProductKind::Categorical, &g, &h).unwrap();
        let b = product(ProductKind::Cartesian, &g, &h).unwrap();
        prop_assert_eq!(s.vertex_count(), g.vertex_count() * h.vertex_count());
        let mut union = sorted_edges(&c);
        union.extend(sorted_edges(&b));
        let before = union.len();
        union.sort_unstable();
        union.dedup();
        prop_assert_eq!(before, union.len());
        prop_assert_eq!(union, sorted_edges(&s));
    }

    #[test]
    fn products_commute_under_coordinate_swap(g in nonempty_graph(4), h in nonempty_graph(4)) {
        let (a, b) = (g.vertex_count(), h.vertex_count());
        for kind in [ProductKind::Categorical, ProductKind::Strong, ProductKind::Cartesian] {
            let gh = product(kind, &g, &h).unwrap();
            let hg = product(kind, &h, &g).unwrap();
            // (u, v) at u*b + v goes to (v, u) at v*a + u
            let swap: Vec<usize> = (0..a * b).map(|i| (i % b) * a + i / b).collect();
            prop_assert_eq!(permuted(&gh, &swap).edges(), hg.edges());
        }
    }

    #[test]
    fn graph_identities(g in graph_strategy(8)) {
        prop_assert_eq!(g.complement().complement(), g.clone());
        let all: Vec<usize> = (0..g.vertex_count()).collect();
        prop_assert_eq!(g.induced_subgraph(&all).unwrap(), g.clone());
        let degree_sum: usize = (0..g.vertex_count()).map(|v| g.degree(v)).sum();
        prop_assert_eq!(degree_sum, 2 * g.edge_count());
        prop_assert_eq!(Graph::from_json(&g.to_json()).unwrap(), g);
    }

    #[test]
    fn faces_are_independent_and_closed(g in graph_strategy(9)) {
        let k = independence_complex(&g, None, DEFAULT_FACE_BUDGET).unwrap();
        k.audit_downward_closed().unwrap();
        for f in k.iter_faces() {
            prop_assert!(g.is_independent(&face_vertices(f)));
        }
        prop_assert_eq!(k.face_count() as u64, icx_core::complex::count_independent_sets(&g));
    }

    #[test]
    fn union_gives_join(g in graph_strategy(5), h in graph_strategy(5)) {
        let a = independence_complex(&g, None, DEFAULT_FACE_BUDGET).unwrap();
        let b = independence_complex(&h, None, DEFAULT_FACE_BUDGET).unwrap();
        let u = independence_complex(&g.disjoint_union(&h), None, DEFAULT_FACE_BUDGET).unwrap();
        let j = a.join(&b).unwrap();
        prop_assert_eq!(u.faces_by_dim(), j.faces_by_dim());
    }

    #[test]
    fn lexicographic_is_polyhedral_join(g in nonempty_graph(4), h in nonempty_graph(3)) {
        let k = independence_complex(&g, None, DEFAULT_FACE_BUDGET).unwrap();
        let l = independence_complex(&h, None, DEFAULT_FACE_BUDGET).unwrap();
        let lex = product(ProductKind::Lexicographic, &g, &h).unwrap();
        let direct = independence_complex(&lex, None, DEFAULT_FACE_BUDGET).unwrap();
        let pj = k.polyhedral_join(&vec![l; g.vertex_count()]).unwrap();
        prop_assert_eq!(direct.faces_by_dim(), pj.faces_by_dim());
    }

    #[test]
    fn boundary_squares_to_zero(g in nonempty_graph(8)) {
        let k = independence_complex(&g, None, DEFAULT_FACE_BUDGET).unwrap();
        let top = k.dim().unwrap();
        for d in 0..top {
            let a = boundary_matrix(&k, d).unwrap();
            let b = boundary_matrix(&k, d + 1).unwrap();
            prop_assert!(a.checked_mul(&b).unwrap().is_zero());
        }
    }

    #[test]
    fn coreduction_agrees_with_direct_reduction(g in nonempty_graph(9)) {
        let k = independence_complex(&g, None, DEFAULT_FACE_BUDGET).unwrap();
        prop_assert_eq!(reduced_homology(&k).unwrap(), reduced_homology_direct(&k).unwrap());
    }

    #[test]
    fn homology_is_relabeling_invariant(g in nonempty_graph(9), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut perm: Vec<usize> = (0..g.vertex_count()).collect();
        perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let t = independence_homology(&g, DEFAULT_FACE_BUDGET).unwrap();
        let k = independence_complex(&permuted(&g, &perm), None, DEFAULT_FACE_BUDGET).unwrap();
        prop_assert_eq!(&t, &reduced_homology(&k).unwrap());
        if let Ok(ht) = HtType::from_betti_table(&t) {
            prop_assert!(betti_match(&ht, &reduced_homology(&k).unwrap()));
        }
    }

    #[test]
    fn join_of_paths_convolves(a in 1usize..8, b in 1usize..8) {
        let ka = independence_complex(&Graph::path(a).unwrap(), None, DEFAULT_FACE_BUDGET).unwrap();
        let kb = independence_complex(&Graph::path(b).unwrap(), None, DEFAULT_FACE_BUDGET).unwrap();
        let (ta, tb) = (reduced_homology(&ka).unwrap(), reduced_homology(&kb).unwrap());
        let joined = reduced_homology(&ka.join(&kb).unwrap()).unwrap();
        prop_assert_eq!(&joined, &ta.join(&tb));
        let pa = BettiPolynomial::from_table_ranks(&ta);
        let pb = BettiPolynomial::from_table_ranks(&tb);
        prop_assert!(pa.mul(&pb).shift_scale(1, 1).matches_table(&joined));
    }

    #[test]
    fn wedge_and_join_laws(a in ht_strategy(), b in ht_strategy(), c in ht_strategy()) {
        prop_assert_eq!(a.wedge(&b).unwrap(), b.wedge(&a).unwrap());
        prop_assert_eq!(a.join(&b).unwrap(), b.join(&a).unwrap());
        prop_assert_eq!(
            a.wedge(&b).unwrap().wedge(&c).unwrap(),
            a.wedge(&b.wedge(&c).unwrap()).unwrap()
        );
        prop_assert_eq!(
            a.join(&b).unwrap().join(&c).unwrap(),
            a.join(&b.join(&c).unwrap()).unwrap()
        );
        prop_assert_eq!(a.wedge(&HtType::contractible()).unwrap(), a.clone());
        prop_assert!(a.join(&HtType::contractible()).unwrap().is_contractible());
        prop_assert_eq!(a.join(&HtType::empty()).unwrap(), a.clone());
        let conv = a.to_betti().mul(&b.to_betti()).shift_scale(1, 1);
        prop_assert_eq!(a.join(&b).unwrap().to_betti(), conv);
        if !a.is_contractible() {
            prop_assert_eq!(a.suspend(1).to_betti(), a.to_betti().shift_scale(1, 1));
        }
        let text = a.disjoint(&b).to_string();
        prop_assert_eq!(text.parse::<HtType>().unwrap(), a.disjoint(&b));
    }

    #[test]
    fn reduction_is_sound_and_replays(g in graph_strategy(10)) {
        let order = RuleOrder::default();
        let t = independence_homology(&g, DEFAULT_FACE_BUDGET).unwrap();
        if let Ok(r) = reduce(&g, &order, false) {
            prop_assert_eq!(r.certification, Certification::Derived);
            prop_assert!(betti_match(&r.ht, &t), "{} vs {}", r.ht, t);
            let k = independence_complex(&g, None, DEFAULT_FACE_BUDGET).unwrap();
            prop_assert!(component_match(&r.ht, &component_homology(&k).unwrap()), "{}", r.ht);
            prop_assert!(r.trace.is_well_founded());
            prop_assert_eq!(replay(&g, &r.trace, DEFAULT_FACE_BUDGET).unwrap(), r.ht.clone());
            prop_assert_eq!(reduce(&g, &order, false).unwrap(), r);
        }
        if let Ok(r) = reduce(&g, &order, true) {
            prop_assert!(betti_match(&r.ht, &t));
        }
    }
}

#[test]
fn strong_predictions_follow_the_polynomials() {
    let f = gen_fn_coeffs(GenFn::F, 12).unwrap();
    for n in 1..=12 {
        assert_eq!(predict_strong(n, 2).unwrap().to_betti(), f_poly(n).unwrap());
        assert_eq!(predict_strong(n, 3).unwrap().to_betti(), g_poly(n).unwrap());
        assert_eq!(f[n - 1], f_poly(n).unwrap());
    }
    let g = gen_fn_coeffs(GenFn::G, 3).unwrap();
    assert_ne!(g[1..3], [g_poly(2).unwrap(), g_poly(3).unwrap()]);
}
