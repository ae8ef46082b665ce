//! Finite trees of sequences, derived trees, orders, and the minimal trees
//! `MT_ξ` / `T_ξ`.
//!
//! A [`FiniteTree`] is either a tree (the empty sequence is a node whenever
//! the tree is non-empty) or a B-tree (the empty sequence is excluded).
//! Nodes are kept in a sorted set: the extensions of a node form a
//! contiguous run directly after it, so "is maximal" is a one-step lookahead.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::ordinal::{Kind, Ordinal, OrdinalError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("node {0} is present but its prefix {1} is not")]
    NotDownwardClosed(String, String),
    #[error("a tree with the empty sequence excluded cannot contain it")]
    EmptyInBTree,
    #[error("T_0 is empty; minimal tree membership needs xi >= 1")]
    ZeroMinimalTree,
    #[error("lazy tree has no recognized structure tag")]
    UnrecognizedTag,
    #[error("search budget of {0} node expansions exhausted")]
    BudgetExhausted(u64),
    #[error("materialized tree would exceed {0} nodes")]
    TooLarge(usize),
    #[error(transparent)]
    Ordinal(#[from] OrdinalError),
}

/// Order of a tree: an ordinal, or ill-founded.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rank {
    Ordinal(Ordinal),
    IllFounded,
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rank::Ordinal(o) => write!(f, "{o}"),
            Rank::IllFounded => write!(f, "inf"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteTree<L: Ord + Clone> {
    nodes: BTreeSet<Vec<L>>,
    root_included: bool,
}

fn is_prefix<L: PartialEq>(s: &[L], t: &[L]) -> bool {
    s.len() <= t.len() && t[..s.len()] == *s
}

impl<L: Ord + Clone + fmt::Debug> FiniteTree<L> {
    pub fn empty(root_included: bool) -> Self {
        FiniteTree { nodes: BTreeSet::new(), root_included }
    }

    /// Validates that `nodes` is closed under non-empty initial segments, and
    /// contains the empty sequence exactly when `root_included` (unless the
    /// node set is empty).
    pub fn new(nodes: impl IntoIterator<Item = Vec<L>>, root_included: bool) -> Result<Self, TreeError> {
        let nodes: BTreeSet<Vec<L>> = nodes.into_iter().collect();
        if !root_included && nodes.contains(&Vec::new()) {
            return Err(TreeError::EmptyInBTree);
        }
        for s in &nodes {
            let lowest = if root_included { 0 } else { 1 };
            for k in lowest..s.len() {
                if !nodes.contains(&s[..k]) {
                    return Err(TreeError::NotDownwardClosed(format!("{s:?}"), format!("{:?}", &s[..k])));
                }
            }
        }
        Ok(FiniteTree { nodes, root_included })
    }

    /// The smallest tree (or B-tree) containing every given sequence.
    pub fn closure(seqs: impl IntoIterator<Item = Vec<L>>, root_included: bool) -> Self {
        let mut nodes = BTreeSet::new();
        for s in seqs {
            let lowest = if root_included { 0 } else { 1 };
            for k in lowest..=s.len() {
                nodes.insert(s[..k].to_vec());
            }
        }
        FiniteTree { nodes, root_included }
    }

    pub fn root_included(&self) -> bool {
        self.root_included
    }

    pub fn nodes(&self) -> impl Iterator<Item = &Vec<L>> {
        self.nodes.iter()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, s: &[L]) -> bool {
        self.nodes.contains(s)
    }

    /// Labels occurring in some node.
    pub fn labels(&self) -> BTreeSet<L> {
        self.nodes.iter().flatten().cloned().collect()
    }

    /// The tree with the empty sequence added, or removed.
    pub fn with_root(&self, root_included: bool) -> Self {
        let mut nodes = self.nodes.clone();
        if root_included {
            nodes.insert(Vec::new());
        } else {
            nodes.remove(&Vec::<L>::new());
        }
        FiniteTree { nodes, root_included }
    }

    /// Maximal nodes are those not followed by an extension in sorted order.
    pub fn maximal_nodes(&self) -> Vec<Vec<L>> {
        let mut out = Vec::new();
        let mut it = self.nodes.iter().peekable();
        while let Some(s) = it.next() {
            match it.peek() {
                Some(t) if is_prefix(s, t) => {}
                _ => out.push(s.clone()),
            }
        }
        out
    }

    pub fn derivative(&self) -> Self {
        let mut nodes = BTreeSet::new();
        let mut it = self.nodes.iter().peekable();
        while let Some(s) = it.next() {
            if matches!(it.peek(), Some(t) if is_prefix(s, t)) {
                nodes.insert(s.clone());
            }
        }
        FiniteTree { nodes, root_included: self.root_included }
    }

    /// `T^k` for finite `k`.
    pub fn derived(&self, k: usize) -> Self {
        let mut t = self.clone();
        for _ in 0..k {
            if t.is_empty() {
                break;
            }
            t = t.derivative();
        }
        t
    }

    /// Number of derivative passes until the tree is empty.
    pub fn rank_by_derivative(&self) -> usize {
        let mut t = self.clone();
        let mut k = 0;
        while !t.is_empty() {
            t = t.derivative();
            k += 1;
        }
        k
    }

    /// `o(T)` by recursion: a node's height is one more than the largest
    /// height among its children; the order is the largest height of a
    /// minimal node.
    pub fn rank_recursive(&self) -> usize {
        let nodes: Vec<&Vec<L>> = self.nodes.iter().collect();
        fn height<L: PartialEq>(nodes: &[&Vec<L>], i: usize) -> (usize, usize) {
            let mut j = i + 1;
            let mut best = 0;
            while j < nodes.len() && is_prefix(nodes[i], nodes[j]) {
                let (h, next) = height(nodes, j);
                best = best.max(h);
                j = next;
            }
            (1 + best, j)
        }
        let mut i = 0;
        let mut best = 0;
        while i < nodes.len() {
            let (h, next) = height(&nodes, i);
            best = best.max(h);
            i = next;
        }
        best
    }

    /// `o(T)`; both computations must agree.
    pub fn rank(&self) -> Ordinal {
        let r = self.rank_recursive();
        debug_assert_eq!(r, self.rank_by_derivative());
        Ordinal::from(r as u64)
    }

    /// `T(t) = {s : t⌢s ∈ T}`. For non-empty `t` this is a tree with root.
    pub fn subtree(&self, t: &[L]) -> Self {
        let nodes = self
            .nodes
            .range(t.to_vec()..)
            .take_while(|s| is_prefix(t, s))
            .map(|s| s[t.len()..].to_vec())
            .collect();
        FiniteTree { nodes, root_included: self.root_included || !t.is_empty() }
    }

    /// Immediate successors of `s` that are nodes.
    pub fn children(&self, s: &[L]) -> Vec<L> {
        self.nodes
            .range(s.to_vec()..)
            .take_while(|u| is_prefix(s, u))
            .filter(|u| u.len() == s.len() + 1)
            .map(|u| u[s.len()].clone())
            .collect()
    }
}

impl<L: Ord + Clone + Serialize> Serialize for FiniteTree<L> {
    /// A list of nodes; the empty sequence appears exactly for trees with root.
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.nodes.iter())
    }
}

impl<'de, L: Ord + Clone + fmt::Debug + DeserializeOwned> Deserialize<'de> for FiniteTree<L> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let nodes: Vec<Vec<L>> = Vec::deserialize(d)?;
        let root = nodes.iter().any(|s| s.is_empty());
        FiniteTree::new(nodes, root).map_err(serde::de::Error::custom)
    }
}

/// Decides `s ∈ MT_ξ`.
pub fn mt_member(xi: &Ordinal, s: &[Ordinal]) -> bool {
    let Some((head, tail)) = s.split_first() else {
        return true;
    };
    match xi.classify() {
        Kind::Zero => false,
        Kind::Successor(pred) => head == xi && mt_member(&pred, tail),
        Kind::Limit => match head.classify() {
            Kind::Successor(zeta) => head < xi && mt_member(&zeta, tail),
            _ => false,
        },
    }
}

/// Decides `s ∈ T_ξ = MT_ξ \ {∅}`.
pub fn minimal_tree_member(xi: &Ordinal, s: &[Ordinal]) -> Result<bool, TreeError> {
    if xi.is_zero() {
        return Err(TreeError::ZeroMinimalTree);
    }
    Ok(!s.is_empty() && mt_member(xi, s))
}

/// Child labels below a node of a lazily described tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Children {
    Finite(Vec<Ordinal>),
    Infinite,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StructureTag {
    /// The B-tree `T_ξ`.
    MinimalTree(Ordinal),
    /// `T_ξ` with each infinite branching cut down to the first `width`
    /// elements of the fundamental sequence of the branching ordinal. For
    /// `ξ = ω` this keeps exactly the labels `1..=width`.
    Truncation { xi: Ordinal, width: u64 },
}

type MemberFn = dyn Fn(&[Ordinal]) -> bool + Send + Sync;
type ChildFn = dyn Fn(&[Ordinal]) -> Children + Send + Sync;

/// A B-tree on ordinals given by a membership predicate and a child oracle.
#[derive(Clone)]
pub struct LazyTree {
    member: Arc<MemberFn>,
    children: Arc<ChildFn>,
    tag: Option<StructureTag>,
}

impl fmt::Debug for LazyTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LazyTree").field("tag", &self.tag).finish_non_exhaustive()
    }
}

/// The ordinal `η` with `MT_ξ(s) = MT_η`, for `s ∈ MT_ξ`.
fn mt_residual(xi: &Ordinal, s: &[Ordinal]) -> Ordinal {
    match s.last() {
        None => xi.clone(),
        Some(l) => l.predecessor().expect("labels of minimal trees are successors"),
    }
}

impl LazyTree {
    pub fn new(
        member: impl Fn(&[Ordinal]) -> bool + Send + Sync + 'static,
        children: impl Fn(&[Ordinal]) -> Children + Send + Sync + 'static,
        tag: Option<StructureTag>,
    ) -> Self {
        LazyTree { member: Arc::new(member), children: Arc::new(children), tag }
    }

    pub fn minimal_tree(xi: Ordinal) -> Self {
        let x1 = xi.clone();
        let x2 = xi.clone();
        LazyTree::new(
            move |s| !s.is_empty() && mt_member(&x1, s),
            move |s| {
                let eta = mt_residual(&x2, s);
                match eta.classify() {
                    Kind::Zero => Children::Finite(Vec::new()),
                    Kind::Successor(_) => Children::Finite(vec![eta]),
                    Kind::Limit => Children::Infinite,
                }
            },
            Some(StructureTag::MinimalTree(xi)),
        )
    }

    pub fn truncated_minimal_tree(xi: Ordinal, width: u64) -> Self {
        let x1 = xi.clone();
        let x2 = xi.clone();
        let member = move |s: &[Ordinal]| -> bool {
            if s.is_empty() || !mt_member(&x1, s) {
                return false;
            }
            let mut eta = x1.clone();
            for l in s {
                if eta.is_limit() && !(1..=width).any(|n| eta.fundamental(n).as_ref() == Ok(l)) {
                    return false;
                }
                eta = l.predecessor().expect("successor label");
            }
            true
        };
        let children = move |s: &[Ordinal]| -> Children {
            let eta = mt_residual(&x2, s);
            match eta.classify() {
                Kind::Zero => Children::Finite(Vec::new()),
                Kind::Successor(_) => Children::Finite(vec![eta]),
                Kind::Limit => Children::Finite(
                    (1..=width).map(|n| eta.fundamental(n).expect("limit")).collect(),
                ),
            }
        };
        LazyTree::new(member, children, Some(StructureTag::Truncation { xi, width }))
    }

    pub fn tag(&self) -> Option<&StructureTag> {
        self.tag.as_ref()
    }

    pub fn contains(&self, s: &[Ordinal]) -> bool {
        (self.member)(s)
    }

    pub fn children(&self, s: &[Ordinal]) -> Children {
        (self.children)(s)
    }

    /// Materializes the tree by breadth-first expansion; fails on infinite
    /// branching or when more than `max_nodes` nodes would be produced.
    pub fn materialize(&self, max_nodes: usize) -> Result<FiniteTree<Ordinal>, TreeError> {
        let mut nodes = BTreeSet::new();
        let mut frontier = vec![Vec::new()];
        while let Some(s) = frontier.pop() {
            match self.children(&s) {
                Children::Infinite => return Err(TreeError::TooLarge(max_nodes)),
                Children::Finite(ls) => {
                    for l in ls {
                        let mut t = s.clone();
                        t.push(l);
                        if !self.contains(&t) {
                            continue;
                        }
                        if nodes.len() >= max_nodes {
                            return Err(TreeError::TooLarge(max_nodes));
                        }
                        nodes.insert(t.clone());
                        frontier.push(t);
                    }
                }
            }
        }
        Ok(FiniteTree { nodes, root_included: false })
    }

    /// The order of a tagged lazy tree: `ξ` for `T_ξ`, and the computed rank
    /// of the materialized tree for truncations.
    pub fn symbolic_rank(&self, max_nodes: usize) -> Result<Rank, TreeError> {
        match &self.tag {
            Some(StructureTag::MinimalTree(xi)) => Ok(Rank::Ordinal(xi.clone())),
            Some(StructureTag::Truncation { .. }) => Ok(Rank::Ordinal(self.materialize(max_nodes)?.rank())),
            None => Err(TreeError::UnrecognizedTag),
        }
    }
}

/// A map `f : T_ξ → Λ` sending every branch of `T_ξ` to a node of the target,
/// listed as `(node of T_ξ, label)` pairs.
pub type EmbeddingWitness<L> = Vec<(Vec<Ordinal>, L)>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EmbeddingResult<L> {
    Found(EmbeddingWitness<L>),
    NotFound,
}

/// Searches for `f : T_ξ → Λ` with `(f(t|_1), …, f(t|_k)) ∈ t` for every
/// node of `T_ξ`.
///
/// The target is read as a tree: a B-tree input gets the empty sequence
/// added, so a witness exists iff `o(target ∪ {∅}) > ξ`. For infinite `ξ`
/// the minimal tree contains chains of every finite length, which no finite
/// tree accommodates, so the answer is `NotFound` without search.
pub fn monotone_embedding_search<L: Ord + Clone + fmt::Debug>(
    xi: &Ordinal,
    target: &FiniteTree<L>,
    budget: u64,
) -> Result<EmbeddingResult<L>, TreeError> {
    let Some(depth) = xi.as_finite() else {
        return Ok(EmbeddingResult::NotFound);
    };
    let mut expansions = 0u64;
    let mut path: Vec<L> = Vec::new();
    fn go<L: Ord + Clone + fmt::Debug>(
        target: &FiniteTree<L>,
        path: &mut Vec<L>,
        remaining: u64,
        expansions: &mut u64,
        budget: u64,
    ) -> Result<bool, TreeError> {
        if remaining == 0 {
            return Ok(true);
        }
        *expansions += 1;
        if *expansions > budget {
            return Err(TreeError::BudgetExhausted(budget));
        }
        for c in target.children(path) {
            path.push(c);
            if go(target, path, remaining - 1, expansions, budget)? {
                return Ok(true);
            }
            path.pop();
        }
        Ok(false)
    }
    if target.root_included() && target.is_empty() {
        return Ok(EmbeddingResult::NotFound);
    }
    if !go(target, &mut path, depth, &mut expansions, budget)? {
        return Ok(EmbeddingResult::NotFound);
    }
    // T_n for finite n is the single chain (n), (n, n-1), …, (n, …, 1).
    let mut witness = Vec::with_capacity(path.len());
    let mut node = Vec::new();
    for (i, label) in path.into_iter().enumerate() {
        node.push(Ordinal::from(depth - i as u64));
        witness.push((node.clone(), label));
    }
    Ok(EmbeddingResult::Found(witness))
}

/// Checks that every branch image of a witness is a node of the target.
pub fn validate_embedding<L: Ord + Clone + fmt::Debug>(
    xi: &Ordinal,
    target: &FiniteTree<L>,
    witness: &EmbeddingWitness<L>,
) -> bool {
    let lookup = |t: &[Ordinal]| witness.iter().find(|(n, _)| n.as_slice() == t).map(|(_, l)| l.clone());
    witness.iter().all(|(node, _)| {
        if !(minimal_tree_member(xi, node) == Ok(true)) {
            return false;
        }
        let image: Option<Vec<L>> = (1..=node.len()).map(|i| lookup(&node[..i])).collect();
        image.is_some_and(|img| target.contains(&img))
    }) && match xi.as_finite() {
        Some(n) => witness.len() as u64 == n,
        None => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn o(s: &str) -> Ordinal {
        s.parse().unwrap()
    }

    fn chain(n: u32, root: bool) -> FiniteTree<u32> {
        FiniteTree::closure([vec![1; n as usize]], root)
    }

    fn full_binary(depth: usize, root: bool) -> FiniteTree<u32> {
        let mut leaves = vec![Vec::new()];
        for _ in 0..depth {
            leaves = leaves
                .into_iter()
                .flat_map(|s: Vec<u32>| {
                    let mut a = s.clone();
                    a.push(0);
                    let mut b = s;
                    b.push(1);
                    [a, b]
                })
                .collect();
        }
        FiniteTree::closure(leaves, root)
    }

    fn seq(xs: &[u64]) -> Vec<Ordinal> {
        xs.iter().map(|&x| Ordinal::from(x)).collect()
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(chain(3, true).derivative(), chain(2, true));
        let root_only = FiniteTree::<u32>::closure([vec![]], true);
        assert!(root_only.derivative().is_empty());
        assert_eq!(full_binary(2, true).derivative(), full_binary(1, true));
    }

    #[test]
    fn rank_examples() {
        let root_only = FiniteTree::<u32>::closure([vec![]], true);
        assert_eq!(root_only.rank(), Ordinal::one());
        let t5 = FiniteTree::closure([seq(&[5, 4, 3, 2, 1])], false);
        assert_eq!(t5.rank(), Ordinal::from(5));
        for d in 0..6 {
            let t = full_binary(d, true);
            assert_eq!(t.rank_recursive(), d + 1);
            assert_eq!(t.rank_by_derivative(), d + 1);
        }
    }

    #[test]
    fn rejects_non_closed() {
        assert!(matches!(
            FiniteTree::new([vec![], vec![1u32, 2]], true),
            Err(TreeError::NotDownwardClosed(..))
        ));
        assert_eq!(FiniteTree::new([vec![]], false), Err::<FiniteTree<u32>, _>(TreeError::EmptyInBTree));
    }

    #[test]
    fn minimal_tree_membership() {
        assert!(minimal_tree_member(&o("3"), &seq(&[3, 2])).unwrap());
        assert!(!minimal_tree_member(&o("3"), &seq(&[2, 1])).unwrap());
        assert!(minimal_tree_member(&o("w"), &seq(&[5, 4, 3, 2, 1])).unwrap());
        assert!(!minimal_tree_member(&o("w"), &seq(&[5, 3])).unwrap());
        assert!(!minimal_tree_member(&o("3"), &[]).unwrap());
        assert_eq!(minimal_tree_member(&o("0"), &seq(&[1])), Err(TreeError::ZeroMinimalTree));
        assert!(minimal_tree_member(&o("w+1"), &[o("w+1"), o("4")]).unwrap());
        assert!(!minimal_tree_member(&o("w+1"), &[o("w"), o("4")]).unwrap());
        assert!(!minimal_tree_member(&o("w^2"), &[o("w*3+2"), o("w*3+1"), o("w*3"), o("7")]).unwrap());
        assert!(minimal_tree_member(&o("w^2"), &[o("w*3+2"), o("w*3+1"), o("w*2+5")]).unwrap());
    }

    #[test]
    fn symbolic_ranks() {
        assert_eq!(LazyTree::minimal_tree(o("w^2")).symbolic_rank(100).unwrap(), Rank::Ordinal(o("w^2")));
        assert_eq!(LazyTree::minimal_tree(o("7")).symbolic_rank(100).unwrap(), Rank::Ordinal(o("7")));
        let tr = LazyTree::truncated_minimal_tree(o("w"), 4);
        assert_eq!(tr.symbolic_rank(100).unwrap(), Rank::Ordinal(o("4")));
        let untagged = LazyTree::new(|_| true, |_| Children::Infinite, None);
        assert_eq!(untagged.symbolic_rank(10), Err(TreeError::UnrecognizedTag));
    }

    #[test]
    fn materialized_minimal_tree_matches_membership() {
        let t = LazyTree::minimal_tree(o("6")).materialize(100).unwrap();
        assert_eq!(t.len(), 6);
        assert!(t.nodes().all(|s| minimal_tree_member(&o("6"), s).unwrap()));
        assert!(LazyTree::minimal_tree(o("w")).materialize(100).is_err());
        let tr = LazyTree::truncated_minimal_tree(o("w"), 3).materialize(100).unwrap();
        assert_eq!(tr.len(), 1 + 2 + 3);
    }

    #[test]
    fn embedding_examples() {
        let c3 = chain(3, false);
        assert!(matches!(monotone_embedding_search(&o("2"), &c3, 1000), Ok(EmbeddingResult::Found(_))));
        // As a tree, the chain of length 3 has order 4 > 3.
        assert!(matches!(monotone_embedding_search(&o("3"), &c3, 1000), Ok(EmbeddingResult::Found(_))));
        assert_eq!(monotone_embedding_search(&o("4"), &c3, 1000), Ok(EmbeddingResult::NotFound));
        let b3 = full_binary(3, false);
        match monotone_embedding_search(&o("2"), &b3, 1000).unwrap() {
            EmbeddingResult::Found(w) => assert!(validate_embedding(&o("2"), &b3, &w)),
            EmbeddingResult::NotFound => panic!("expected a witness"),
        }
        assert_eq!(monotone_embedding_search(&o("w"), &b3, 1000), Ok(EmbeddingResult::NotFound));
        assert_eq!(monotone_embedding_search(&o("3"), &b3, 1), Err(TreeError::BudgetExhausted(1)));
    }

    #[test]
    fn json_round_trip() {
        let t = FiniteTree::closure([vec![o("w+1"), o("3")], vec![o("2")]], true);
        let js = serde_json::to_string(&t).unwrap();
        assert_eq!(js, r#"[[],["2"],["w + 1"],["w + 1","3"]]"#);
        let back: FiniteTree<Ordinal> = serde_json::from_str(&js).unwrap();
        assert_eq!(back, t);
    }
}
