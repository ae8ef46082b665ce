use opindex::ordinal::Ordinal;
use opindex::trees::{monotone_embedding_search, validate_embedding, EmbeddingResult, FiniteTree};
use proptest::prelude::*;
use proptest::strategy::ValueTree;

/// Random rooted trees: each new node extends an earlier one by a label.
fn tree(max: usize) -> impl Strategy<Value = FiniteTree<u8>> {
    prop::collection::vec((any::<prop::sample::Index>(), 0u8..4), 0..max).prop_map(|steps| {
        let mut nodes: Vec<Vec<u8>> = vec![Vec::new()];
        for (parent, label) in steps {
            let mut s = nodes[parent.index(nodes.len())].clone();
            s.push(label);
            if !nodes.contains(&s) {
                nodes.push(s);
            }
        }
        FiniteTree::new(nodes, true).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn rank_by_iteration_equals_rank_by_recursion(t in tree(200)) {
        prop_assert_eq!(t.rank_by_derivative(), t.rank_recursive());
    }

    #[test]
    fn derivative_shrinks_and_lowers_rank(t in tree(120)) {
        let d = t.derivative();
        prop_assert!(d.len() < t.len());
        prop_assert_eq!(d.rank_by_derivative() + 1, t.rank_by_derivative());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn iterated_derivatives_compose(t in tree(120)) {
        let rank = t.rank_by_derivative();
        for z in 0..=rank {
            for x in 0..=rank - z {
                prop_assert_eq!(t.derived(z).derived(x), t.derived(z + x));
            }
        }
    }

    #[test]
    fn derivatives_commute_with_subtrees(t in tree(120), pick in any::<prop::sample::Index>()) {
        let nodes: Vec<Vec<u8>> = t.nodes().cloned().collect();
        let s = &nodes[pick.index(nodes.len())];
        for x in 0..=t.rank_by_derivative() {
            prop_assert_eq!(t.derived(x).subtree(s), t.subtree(s).derived(x));
        }
    }
}

#[test]
fn embedding_exists_iff_rank_exceeds_xi() {
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    let strat = tree(40);
    for _ in 0..400 {
        let t = strat.new_tree(&mut runner).unwrap().current();
        let rank = t.rank_by_derivative() as u64;
        for xi in 0..=6u64 {
            let o = Ordinal::from(xi);
            match monotone_embedding_search(&o, &t, 1 << 20).unwrap() {
                EmbeddingResult::Found(w) => {
                    assert!(rank > xi, "found an embedding of rank {xi} into rank {rank}");
                    assert!(validate_embedding(&o, &t, &w));
                }
                EmbeddingResult::NotFound => assert!(rank <= xi),
            }
        }
    }
}
