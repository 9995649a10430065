use std::sync::Arc;

use proptest::prelude::*;
use q4dec::decomposition::{decompose, decompose_to_level};
use q4dec::embedding::are_isomorphic;
use q4dec::fuzz::instance;
use q4dec::io::{from_json, parse_dimacs, to_json, write_dimacs};
use q4dec::mincut::min_wx_separation;
use q4dec::oracle::{check_axioms, enumerate_tangles};
use q4dec::quasi4::region_of_tangle;
use q4dec::random::{random_connected, rng};
use q4dec::separation::enumerate_separations;
use q4dec::validate::validate_decomposition;
use q4dec::{Graph, VertexSet};

fn small_3connected(max_n: usize) -> impl Strategy<Value = Graph> {
    any::<u64>().prop_map(move |seed| instance(seed, max_n, 0))
}

fn small_connected(max_n: usize) -> impl Strategy<Value = Graph> {
    (2..=max_n, 0.0..0.6f64, any::<u64>()).prop_map(|(n, p, seed)| random_connected(n, p, &mut rng(seed)))
}

fn relabel(g: &Graph, perm: &[usize]) -> Graph {
    Graph::new(g.n(), g.edges().map(|(u, v)| (perm[u], perm[v]))).unwrap()
}

fn region_torsos(g: &Arc<Graph>) -> Vec<Graph> {
    enumerate_tangles(g, 4).unwrap().iter().map(|t| region_of_tangle(t).unwrap().torso().as_ref().clone()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn region_torsos_survive_relabelling(g in small_3connected(12), shuffle in any::<u64>()) {
        use rand::seq::SliceRandom;
        let mut perm: Vec<usize> = (0..g.n()).collect();
        perm.shuffle(&mut rng(shuffle));
        let h = Arc::new(relabel(&g, &perm));
        let a = region_torsos(&Arc::new(g));
        let mut b = region_torsos(&h);
        prop_assert_eq!(a.len(), b.len());
        for t in &a {
            let i = b.iter().position(|u| are_isomorphic(t, u));
            prop_assert!(i.is_some(), "no isomorphic region torso after relabelling");
            b.swap_remove(i.unwrap());
        }
    }

    #[test]
    fn decompositions_validate(g in small_connected(13), level in 2u8..=4) {
        let g = Arc::new(g);
        let td = decompose_to_level(&g, level).unwrap();
        let report = validate_decomposition(&g, &td, level);
        prop_assert!(report.is_ok(), "{:?}", report.violations);
        prop_assert!(td.adhesion() < usize::from(level));
    }

    #[test]
    fn decomposition_is_deterministic_and_round_trips(g in small_3connected(14)) {
        let g = Arc::new(g);
        let a = to_json(&decompose(&g).unwrap());
        prop_assert_eq!(&a, &to_json(&decompose(&g).unwrap()));
        let back = from_json(&g, &a).unwrap();
        prop_assert_eq!(&to_json(&back), &a);
    }

    #[test]
    fn dimacs_round_trips(g in small_connected(16)) {
        let h = parse_dimacs(&write_dimacs(&g)).unwrap();
        prop_assert_eq!(h.n(), g.n());
        prop_assert!(h.edges().eq(g.edges()));
    }

    #[test]
    fn oracle_tangles_satisfy_axioms(g in small_connected(9), k in 1usize..=4) {
        let g = Arc::new(g);
        for t in enumerate_tangles(&g, k).unwrap() {
            prop_assert!(check_axioms(&t).unwrap().is_empty());
            for s in q4dec::Tangle::choice_vector(&t).unwrap() {
                prop_assert!(g.components(&s.0).contains(&s.1));
            }
        }
    }

    #[test]
    fn meet_and_join_are_separations(g in small_connected(8), i in any::<usize>(), j in any::<usize>()) {
        let seps: Vec<_> = enumerate_separations(&g, 4).unwrap().collect();
        let (a, b) = (&seps[i % seps.len()], &seps[j % seps.len()]);
        let (m, n) = (a.meet(b), a.join(b));
        prop_assert!(m.validate(&g).is_ok());
        prop_assert!(n.validate(&g).is_ok());
        prop_assert_eq!(m.order() + n.order(), a.order() + b.order());
        prop_assert_eq!(&m, &b.meet(a));
        prop_assert_eq!(&n, &b.join(a));
        prop_assert_eq!(m.reversed(), a.reversed().join(&b.reversed()));
    }

    #[test]
    fn wx_separation_order_is_symmetric(g in small_connected(12), w in proptest::collection::btree_set(0usize..12, 1..3), x in proptest::collection::btree_set(0usize..12, 1..3)) {
        let n = g.n();
        let w: VertexSet = w.into_iter().map(|v| v % n).collect();
        let x: VertexSet = x.into_iter().map(|v| v % n).collect();
        let a = min_wx_separation(&g, &w, &x);
        let b = min_wx_separation(&g, &x, &w);
        prop_assert_eq!(a.order(), b.order());
        prop_assert!(w.is_subset(&a.ys()) && x.is_subset(&a.sz()));
    }
}
