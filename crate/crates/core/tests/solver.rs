use mif_core::sample::{sample_gnp, GnpParams};
use mif_core::solver::{brute_force_max, solve_max, Mode, Solver, Status, DEFAULT_NODE_BUDGET};
use mif_core::{Graph, VertexSet};
use proptest::prelude::*;

fn fixtures() -> Vec<(&'static str, Graph, usize, usize)> {
    let triangle = Graph::complete(3).unwrap();
    vec![
        ("empty5", Graph::empty(5).unwrap(), 5, 1),
        ("K5", Graph::complete(5).unwrap(), 2, 2),
        ("C5", Graph::cycle(5).unwrap(), 4, 4),
        ("petersen", Graph::petersen(), 7, 7),
        ("two triangles", triangle.disjoint_union(&triangle).unwrap(), 4, 2),
    ]
}

#[test]
fn fixtures_match_oracle() {
    for (name, g, forest, tree) in fixtures() {
        for (mode, expected) in [(Mode::Forest, forest), (Mode::Tree, tree)] {
            let oracle = brute_force_max(mode, &g).unwrap();
            let fast = solve_max(mode, &g, DEFAULT_NODE_BUDGET);
            assert_eq!(oracle.size, expected, "{name} {mode:?}");
            assert_eq!(fast.size, expected, "{name} {mode:?}");
            assert_eq!(fast.status, Status::Complete);
            assert!(fast.witness_is_valid(&g).unwrap());
        }
    }
}

#[test]
fn random_instances_match_oracle() {
    let mut checked = 0;
    for ps in ["0.2", "0.5", "0.8"] {
        for seed in 0..80u64 {
            let n = 8 + (seed % 11) as usize;
            let g = sample_gnp(&GnpParams::new(n, ps.parse().unwrap(), seed)).unwrap();
            let both = Solver::new(&g).solve_both();
            for (mode, got) in [(Mode::Forest, &both.forest), (Mode::Tree, &both.tree)] {
                let oracle = brute_force_max(mode, &g).unwrap();
                let single = solve_max(mode, &g, DEFAULT_NODE_BUDGET);
                assert_eq!(got.size, oracle.size, "p={ps} seed={seed} {mode:?}");
                assert_eq!(single.size, oracle.size, "p={ps} seed={seed} {mode:?}");
                assert!(got.witness_is_valid(&g).unwrap() && single.witness_is_valid(&g).unwrap());
            }
            assert!(both.forest.size >= both.tree.size);
            checked += 1;
        }
    }
    assert!(checked >= 200);
}

#[test]
fn oracle_refuses_large_graphs() {
    assert!(brute_force_max(Mode::Forest, &Graph::empty(23).unwrap()).is_err());
}

#[test]
fn budget_exhaustion_is_reported() {
    let g = sample_gnp(&GnpParams::new(60, "0.5".parse().unwrap(), 3)).unwrap();
    let r = solve_max(Mode::Forest, &g, 10);
    assert_eq!(r.status, Status::Incomplete);
    assert!(r.witness_is_valid(&g).unwrap());
}

#[test]
fn solving_is_deterministic() {
    let g = sample_gnp(&GnpParams::new(40, "0.5".parse().unwrap(), 11)).unwrap();
    for mode in [Mode::Forest, Mode::Tree] {
        let a = solve_max(mode, &g, DEFAULT_NODE_BUDGET);
        let b = solve_max(mode, &g, DEFAULT_NODE_BUDGET);
        assert_eq!(a, b);
    }
    assert_eq!(Solver::new(&g).solve_both(), Solver::new(&g).solve_both());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn deleting_a_vertex_drops_forest_optimum_by_at_most_one(
        n in 2usize..16,
        p_idx in 0usize..3,
        seed in any::<u64>(),
        victim in any::<prop::sample::Index>(),
    ) {
        let ps = ["0.2", "0.5", "0.8"][p_idx];
        let g = sample_gnp(&GnpParams::new(n, ps.parse().unwrap(), seed)).unwrap();
        let v = victim.index(n);
        let keep = VertexSet::from_vertices(n, (0..n).filter(|&u| u != v)).unwrap();
        let h = g.induced(&keep).unwrap();
        let full = solve_max(Mode::Forest, &g, DEFAULT_NODE_BUDGET).size;
        let less = solve_max(Mode::Forest, &h, DEFAULT_NODE_BUDGET).size;
        prop_assert!(less <= full && full <= less + 1, "{full} -> {less}");
        // deleting a cut vertex can split the best tree, so only the upper side holds
        let tree_full = solve_max(Mode::Tree, &g, DEFAULT_NODE_BUDGET).size;
        let tree_less = solve_max(Mode::Tree, &h, DEFAULT_NODE_BUDGET).size;
        prop_assert!(tree_less <= tree_full);
    }

    #[test]
    fn forest_at_least_tree(n in 1usize..40, p_idx in 0usize..3, seed in any::<u64>()) {
        let ps = ["0.3", "0.5", "0.7"][p_idx];
        let g = sample_gnp(&GnpParams::new(n, ps.parse().unwrap(), seed)).unwrap();
        let r = Solver::new(&g).solve_both();
        prop_assert!(r.forest.size >= r.tree.size);
        prop_assert!(r.forest.witness_is_valid(&g).unwrap());
        prop_assert!(r.tree.witness_is_valid(&g).unwrap());
    }
}
