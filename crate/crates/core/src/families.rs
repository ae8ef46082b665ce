//! Regular families of finite subsets of ℕ: the Schreier hierarchy, the
//! families `A_k`, and composition `F[G]`.
//!
//! Limit Schreier families use the canonical fundamental sequences from
//! [`crate::ordinal`] and test every `n ≤ min E`. `F[G]` membership splits a
//! set into successive blocks; the greedy split into maximal initial
//! `G`-blocks is tried first, with an exhaustive split search behind it.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::ordinal::{Kind, Ordinal, OrdinalError};

/// Largest ground set `{1..n}` accepted by [`restrict`].
pub const DEFAULT_RESTRICT_N: u32 = 24;
/// Largest number of members [`restrict`] will enumerate.
pub const DEFAULT_MEMBER_CAP: usize = 1 << 20;
/// Sets up to this size get an exhaustive second opinion when greedy fails.
pub const EXHAUSTIVE_FALLBACK_LEN: usize = 12;
/// Node expansions allowed to [`gasparis_prefix_search`] by default.
pub const DEFAULT_PREFIX_BUDGET: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FamilyError {
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error(transparent)]
    Ordinal(#[from] OrdinalError),
    #[error("invalid set: {0}")]
    InvalidSet(String),
    #[error("ground set {{1..{n}}} exceeds the limit {limit}")]
    GroundSetTooLarge { n: u32, limit: u32 },
    #[error("more than {0} members")]
    TooManyMembers(usize),
    #[error("the index of S_w1 is w1, which is not below epsilon_0")]
    Uncountable,
    #[error("search budget of {0} node expansions exhausted")]
    BudgetExhausted(u64),
}

/// A finite subset of ℕ = {1, 2, …}, kept as a strictly increasing list.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct FinSet(Vec<u32>);

impl FinSet {
    pub fn new(mut elems: Vec<u32>) -> Result<Self, FamilyError> {
        if elems.contains(&0) {
            return Err(FamilyError::InvalidSet("elements must be positive".into()));
        }
        elems.sort_unstable();
        elems.dedup();
        Ok(FinSet(elems))
    }

    pub fn empty() -> Self {
        FinSet(Vec::new())
    }

    pub fn elems(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn min_elem(&self) -> Option<u32> {
        self.0.first().copied()
    }

    pub fn max_elem(&self) -> Option<u32> {
        self.0.last().copied()
    }

    /// Bit `i − 1` stands for the element `i`.
    pub fn to_mask(&self) -> u32 {
        self.0.iter().fold(0, |m, &i| m | 1 << (i - 1))
    }

    pub fn from_mask(mask: u32) -> Self {
        FinSet((1..=32).filter(|i| mask >> (i - 1) & 1 == 1).collect())
    }

    /// `M(E) = (m_i : i ∈ E)`.
    pub fn image(&self, m: &[u32]) -> Option<FinSet> {
        self.0.iter().map(|&i| m.get(i as usize - 1).copied()).collect::<Option<Vec<_>>>().map(FinSet)
    }
}

impl fmt::Display for FinSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "}}")
    }
}

impl FromStr for FinSet {
    type Err = FamilyError;

    /// `{2,3}`, `[2, 3]`, `{}` or a bare comma list.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let inner = t
            .strip_prefix('{')
            .and_then(|r| r.strip_suffix('}'))
            .or_else(|| t.strip_prefix('[').and_then(|r| r.strip_suffix(']')))
            .unwrap_or(t);
        let mut v = Vec::new();
        for part in inner.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            v.push(part.parse::<u32>().map_err(|_| FamilyError::InvalidSet(format!("bad element `{part}`")))?);
        }
        let sorted = v.windows(2).all(|w| w[0] < w[1]);
        if !sorted {
            return Err(FamilyError::InvalidSet("elements must be strictly increasing".into()));
        }
        FinSet::new(v)
    }
}

impl Serialize for FinSet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for FinSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        FinSet::new(Vec::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum FamilyExpr {
    S0,
    Schreier(Ordinal),
    Ak(u32),
    Compose(Box<FamilyExpr>, Box<FamilyExpr>),
    /// `S_{ω₁}`: every finite set.
    All,
}

impl FamilyExpr {
    pub fn schreier(xi: Ordinal) -> Self {
        if xi.is_zero() {
            FamilyExpr::S0
        } else {
            FamilyExpr::Schreier(xi)
        }
    }

    pub fn compose(outer: FamilyExpr, inner: FamilyExpr) -> Self {
        FamilyExpr::Compose(Box::new(outer), Box::new(inner))
    }

    pub fn depth(&self) -> usize {
        match self {
            FamilyExpr::Compose(f, g) => 1 + f.depth().max(g.depth()),
            _ => 1,
        }
    }
}

impl fmt::Display for FamilyExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyExpr::S0 => write!(f, "S0"),
            FamilyExpr::Schreier(x) => write!(f, "S({x})"),
            FamilyExpr::Ak(k) => write!(f, "A({k})"),
            FamilyExpr::Compose(a, b) => write!(f, "{a}[{b}]"),
            FamilyExpr::All => write!(f, "ALL"),
        }
    }
}

impl FromStr for FamilyExpr {
    type Err = FamilyError;

    /// Grammar: `S0`, `S(<ordinal>)`, `A(<k>)`, `ALL`, and postfix
    /// composition `F[G]`, e.g. `S(1)[A(2)[S(w)]]`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let src = s.as_bytes();
        let mut pos = 0;
        let e = parse_family(src, &mut pos)?;
        skip_ws(src, &mut pos);
        if pos != src.len() {
            return Err(FamilyError::Parse { pos, msg: "unexpected trailing input".into() });
        }
        Ok(e)
    }
}

fn skip_ws(src: &[u8], pos: &mut usize) {
    while *pos < src.len() && src[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
}

fn parse_family(src: &[u8], pos: &mut usize) -> Result<FamilyExpr, FamilyError> {
    skip_ws(src, pos);
    let rest = &src[*pos..];
    let err = |pos: usize, msg: &str| FamilyError::Parse { pos, msg: msg.into() };
    let mut acc = if rest.starts_with(b"ALL") {
        *pos += 3;
        FamilyExpr::All
    } else if rest.starts_with(b"S0") {
        *pos += 2;
        FamilyExpr::S0
    } else if rest.starts_with(b"S(") || rest.starts_with(b"A(") {
        let is_s = rest[0] == b'S';
        *pos += 2;
        let start = *pos;
        let mut depth = 1;
        while *pos < src.len() {
            match src[*pos] {
                b'(' => depth += 1,
                b')' => {
                    depth -= 1;
                    if depth == 0 {
                        break;
                    }
                }
                _ => {}
            }
            *pos += 1;
        }
        if *pos >= src.len() {
            return Err(err(*pos, "expected `)`"));
        }
        let arg = std::str::from_utf8(&src[start..*pos]).map_err(|_| err(start, "invalid utf-8"))?;
        *pos += 1;
        if is_s {
            FamilyExpr::schreier(arg.parse()?)
        } else {
            let k: u32 = arg.trim().parse().map_err(|_| err(start, "expected a positive integer"))?;
            if k == 0 {
                return Err(err(start, "A(k) needs k >= 1"));
            }
            FamilyExpr::Ak(k)
        }
    } else {
        return Err(err(*pos, "expected `S0`, `S(..)`, `A(..)` or `ALL`"));
    };
    loop {
        skip_ws(src, pos);
        if *pos < src.len() && src[*pos] == b'[' {
            *pos += 1;
            let inner = parse_family(src, pos)?;
            skip_ws(src, pos);
            if *pos >= src.len() || src[*pos] != b']' {
                return Err(err(*pos, "expected `]`"));
            }
            *pos += 1;
            acc = FamilyExpr::compose(acc, inner);
        } else {
            return Ok(acc);
        }
    }
}

/// How `F[G]` splits are searched.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    Greedy,
    Exhaustive,
    /// Greedy, then exhaustive on sets of size at most
    /// [`EXHAUSTIVE_FALLBACK_LEN`] when greedy fails.
    GreedyThenExhaustive,
}

fn schreier_as_compose(xi: &Ordinal) -> Option<(FamilyExpr, FamilyExpr)> {
    match xi.classify() {
        Kind::Successor(pred) if !pred.is_zero() => {
            Some((FamilyExpr::Schreier(Ordinal::one()), FamilyExpr::schreier(pred)))
        }
        _ => None,
    }
}

fn member_slice(f: &FamilyExpr, e: &[u32], strat: Strategy) -> bool {
    if e.is_empty() {
        return true;
    }
    match f {
        FamilyExpr::All => true,
        FamilyExpr::S0 => e.len() <= 1,
        FamilyExpr::Ak(k) => e.len() <= *k as usize,
        FamilyExpr::Schreier(xi) => match xi.classify() {
            Kind::Zero => e.len() <= 1,
            Kind::Successor(pred) if pred.is_zero() => e.len() as u64 <= e[0] as u64,
            Kind::Successor(_) => {
                let (outer, inner) = schreier_as_compose(xi).expect("successor above one");
                compose_member(&outer, &inner, e, strat)
            }
            Kind::Limit => (1..=e[0] as u64).any(|n| {
                let xn = xi.fundamental(n).expect("limit");
                member_slice(&FamilyExpr::Schreier(xn), e, strat)
            }),
        },
        FamilyExpr::Compose(outer, inner) => compose_member(outer, inner, e, strat),
    }
}

fn compose_member(outer: &FamilyExpr, inner: &FamilyExpr, e: &[u32], strat: Strategy) -> bool {
    match strat {
        Strategy::Greedy => compose_greedy(outer, inner, e, strat),
        Strategy::Exhaustive => compose_exhaustive(outer, inner, e, &mut Vec::new()),
        Strategy::GreedyThenExhaustive => {
            compose_greedy(outer, inner, e, strat)
                || (e.len() <= EXHAUSTIVE_FALLBACK_LEN && compose_exhaustive(outer, inner, e, &mut Vec::new()))
        }
    }
}

/// Splits `e` into maximal initial blocks lying in `inner`, then tests the
/// block minima against `outer`.
fn compose_greedy(outer: &FamilyExpr, inner: &FamilyExpr, e: &[u32], strat: Strategy) -> bool {
    let mut mins = Vec::new();
    let mut i = 0;
    while i < e.len() {
        let mut j = i + 1;
        while j < e.len() && member_slice(inner, &e[i..=j], strat) {
            j += 1;
        }
        if !member_slice(inner, &e[i..j], strat) {
            return false;
        }
        mins.push(e[i]);
        i = j;
    }
    member_slice(outer, &mins, strat)
}

fn compose_exhaustive(outer: &FamilyExpr, inner: &FamilyExpr, e: &[u32], mins: &mut Vec<u32>) -> bool {
    if e.is_empty() {
        return member_slice(outer, mins, Strategy::Exhaustive);
    }
    for j in 1..=e.len() {
        if member_slice(inner, &e[..j], Strategy::Exhaustive) {
            mins.push(e[0]);
            let ok = compose_exhaustive(outer, inner, &e[j..], mins);
            mins.pop();
            if ok {
                return true;
            }
        }
    }
    false
}

/// Decides `e ∈ S_ξ`.
pub fn member_schreier(xi: &Ordinal, e: &FinSet) -> bool {
    member_slice(&FamilyExpr::schreier(xi.clone()), e.elems(), Strategy::GreedyThenExhaustive)
}

/// Decides `e ∈ f`.
pub fn member_expr(f: &FamilyExpr, e: &FinSet) -> bool {
    member_slice(f, e.elems(), Strategy::GreedyThenExhaustive)
}

/// Decides `e ∈ f` with a fixed split strategy.
pub fn member_with(f: &FamilyExpr, e: &FinSet, strategy: Strategy) -> bool {
    member_slice(f, e.elems(), strategy)
}

/// Members of a family inside `{1..n}`, stored as bit masks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RestrictedFamily {
    source: Option<FamilyExpr>,
    n: u32,
    members: Vec<u32>,
}

impl RestrictedFamily {
    /// A hand-made family on `{1..n}`.
    pub fn from_sets(n: u32, sets: impl IntoIterator<Item = FinSet>) -> Result<Self, FamilyError> {
        if n > 32 {
            return Err(FamilyError::GroundSetTooLarge { n, limit: 32 });
        }
        let mut members = BTreeSet::new();
        for s in sets {
            if s.max_elem().is_some_and(|m| m > n) {
                return Err(FamilyError::InvalidSet(format!("{s} is not inside {{1..{n}}}")));
            }
            members.insert(s.to_mask());
        }
        Ok(RestrictedFamily { source: None, n, members: members.into_iter().collect() })
    }

    pub fn source(&self) -> Option<&FamilyExpr> {
        self.source.as_ref()
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, e: &FinSet) -> bool {
        e.max_elem().is_none_or(|m| m <= self.n) && self.members.binary_search(&e.to_mask()).is_ok()
    }

    fn contains_mask(&self, m: u32) -> bool {
        self.members.binary_search(&m).is_ok()
    }

    /// Members in lexicographic order of their increasing enumerations.
    pub fn sets(&self) -> Vec<FinSet> {
        let mut v: Vec<FinSet> = self.members.iter().map(|&m| FinSet::from_mask(m)).collect();
        v.sort();
        v
    }

    /// Every member minus one element is again a member.
    pub fn is_hereditary(&self) -> bool {
        self.members.iter().all(|&m| {
            let mut rest = m;
            while rest != 0 {
                let bit = rest & rest.wrapping_neg();
                if !self.contains_mask(m & !bit) {
                    return false;
                }
                rest &= !bit;
            }
            true
        })
    }
}

impl Serialize for RestrictedFamily {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.sets().serialize(s)
    }
}

/// Enumerates `f ∩ P({1..n})` by depth-first extension of members, which is
/// complete for hereditary families.
pub fn restrict(f: &FamilyExpr, n: u32) -> Result<RestrictedFamily, FamilyError> {
    restrict_with_limits(f, n, DEFAULT_RESTRICT_N, DEFAULT_MEMBER_CAP)
}

pub fn restrict_with_limits(f: &FamilyExpr, n: u32, max_n: u32, cap: usize) -> Result<RestrictedFamily, FamilyError> {
    if n > max_n.min(32) {
        return Err(FamilyError::GroundSetTooLarge { n, limit: max_n.min(32) });
    }
    let mut members = vec![0u32];
    let mut stack: Vec<Vec<u32>> = vec![Vec::new()];
    while let Some(e) = stack.pop() {
        let start = e.last().map_or(1, |&m| m + 1);
        for k in start..=n {
            let mut next = e.clone();
            next.push(k);
            if member_slice(f, &next, Strategy::GreedyThenExhaustive) {
                if members.len() >= cap {
                    return Err(FamilyError::TooManyMembers(cap));
                }
                members.push(next.iter().fold(0, |m, &i| m | 1 << (i - 1)));
                stack.push(next);
            }
        }
    }
    members.sort_unstable();
    Ok(RestrictedFamily { source: Some(f.clone()), n, members })
}

/// Number of tree derivatives of the restricted family (as a tree of
/// increasing sequences) until at most the empty set survives.
pub fn cb_index_restricted(r: &RestrictedFamily) -> usize {
    // Each pass removes the current maximal members; a member is maximal
    // once no live member extends it by a larger element.
    let parent = |m: u32| -> u32 {
        let top = 31 - m.leading_zeros();
        m & !(1 << top)
    };
    let idx = |m: u32| r.members.binary_search(&m).ok();
    let mut live_children = vec![0usize; r.members.len()];
    for &m in &r.members {
        if m != 0 {
            if let Some(p) = idx(parent(m)) {
                live_children[p] += 1;
            }
        }
    }
    let mut alive = vec![true; r.members.len()];
    let mut remaining = r.members.len();
    let only_empty = |remaining: usize, alive: &[bool]| {
        remaining == 0 || (remaining == 1 && idx(0).is_some_and(|i| alive[i]))
    };
    let mut passes = 0;
    while !only_empty(remaining, &alive) {
        let leaves: Vec<usize> = (0..r.members.len()).filter(|&i| alive[i] && live_children[i] == 0).collect();
        for &i in &leaves {
            alive[i] = false;
            remaining -= 1;
            let m = r.members[i];
            if m != 0 {
                if let Some(p) = idx(parent(m)) {
                    live_children[p] -= 1;
                }
            }
        }
        passes += 1;
    }
    passes
}

/// `ι(S₀) = 1`, `ι(A_k) = k`, `ι(S_ξ) = ω^ξ`, `ι(F[G]) = ι(G)·ι(F)`.
pub fn iota_symbolic(f: &FamilyExpr) -> Result<Ordinal, FamilyError> {
    Ok(match f {
        FamilyExpr::S0 => Ordinal::one(),
        FamilyExpr::Ak(k) => Ordinal::from(*k as u64),
        FamilyExpr::Schreier(xi) => Ordinal::omega_pow(xi.clone()),
        FamilyExpr::Compose(a, b) => &iota_symbolic(b)? * &iota_symbolic(a)?,
        FamilyExpr::All => return Err(FamilyError::Uncountable),
    })
}

/// A member and one of its spreads that is missing from the family.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpreadingViolation {
    pub member: FinSet,
    pub spread: FinSet,
}

/// Checks that every spread inside `{1..n}` of every member is a member.
/// Members are visited largest first, and spreads in decreasing
/// lexicographic order.
pub fn is_spreading_restricted(r: &RestrictedFamily) -> Result<(), SpreadingViolation> {
    let mut sets = r.sets();
    sets.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
    for e in &sets {
        let mut buf = Vec::with_capacity(e.len());
        if let Some(bad) = find_bad_spread(r, e.elems(), 0, &mut buf) {
            return Err(SpreadingViolation { member: e.clone(), spread: FinSet(bad) });
        }
    }
    Ok(())
}

fn find_bad_spread(r: &RestrictedFamily, e: &[u32], i: usize, buf: &mut Vec<u32>) -> Option<Vec<u32>> {
    if i == e.len() {
        let m = buf.iter().fold(0, |m, &x| m | 1 << (x - 1));
        return (!r.contains_mask(m)).then(|| buf.clone());
    }
    let lo = buf.last().map_or(e[i], |&p| e[i].max(p + 1));
    // Leave room for the remaining elements.
    let hi = r.n.saturating_sub((e.len() - i - 1) as u32);
    for v in (lo..=hi).rev() {
        buf.push(v);
        let found = find_bad_spread(r, e, i + 1, buf);
        buf.pop();
        if found.is_some() {
            return found;
        }
    }
    None
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum PrefixSearch {
    Found(Vec<u32>),
    NotFound,
}

/// Backtracking search for `m₁ < … < m_depth ≤ value_cap` with
/// `M(E) ∈ g` for every `E ∈ f` inside `{1..depth}`.
pub fn gasparis_prefix_search(
    f: &FamilyExpr,
    g: &FamilyExpr,
    depth: u32,
    value_cap: u32,
    budget: u64,
) -> Result<PrefixSearch, FamilyError> {
    let pool: Vec<u32> = (1..=value_cap).collect();
    gasparis_prefix_search_in(f, g, depth, &pool, budget)
}

/// As [`gasparis_prefix_search`], with the values drawn from `pool`.
pub fn gasparis_prefix_search_in(
    f: &FamilyExpr,
    g: &FamilyExpr,
    depth: u32,
    pool: &[u32],
    budget: u64,
) -> Result<PrefixSearch, FamilyError> {
    let mut pool: Vec<u32> = pool.iter().copied().filter(|&v| v > 0).collect();
    pool.sort_unstable();
    pool.dedup();
    let fam = restrict(f, depth)?;
    // Members grouped by their largest element, checked once that value is placed.
    let mut by_max: Vec<Vec<FinSet>> = vec![Vec::new(); depth as usize + 1];
    for e in fam.sets() {
        if let Some(m) = e.max_elem() {
            by_max[m as usize].push(e);
        }
    }
    let mut chosen = Vec::with_capacity(depth as usize);
    let mut expansions = 0u64;
    let ok = prefix_dfs(g, &pool, 0, depth as usize, &by_max, &mut chosen, &mut expansions, budget)?;
    Ok(if ok { PrefixSearch::Found(chosen) } else { PrefixSearch::NotFound })
}

#[allow(clippy::too_many_arguments)]
fn prefix_dfs(
    g: &FamilyExpr,
    pool: &[u32],
    from: usize,
    depth: usize,
    by_max: &[Vec<FinSet>],
    chosen: &mut Vec<u32>,
    expansions: &mut u64,
    budget: u64,
) -> Result<bool, FamilyError> {
    let j = chosen.len();
    if j == depth {
        return Ok(true);
    }
    if pool.len() - from < depth - j {
        return Ok(false);
    }
    for idx in from..pool.len() {
        *expansions += 1;
        if *expansions > budget {
            return Err(FamilyError::BudgetExhausted(budget));
        }
        chosen.push(pool[idx]);
        let fits = by_max[j + 1].iter().all(|e| {
            let img = e.image(chosen).expect("indices within prefix");
            member_expr(g, &img)
        });
        if fits && prefix_dfs(g, pool, idx + 1, depth, by_max, chosen, expansions, budget)? {
            return Ok(true);
        }
        chosen.pop();
    }
    Ok(false)
}

/// Re-checks a prefix against every member of `f` inside `{1..len}`.
pub fn validate_prefix(f: &FamilyExpr, g: &FamilyExpr, prefix: &[u32]) -> Result<bool, FamilyError> {
    if prefix.windows(2).any(|w| w[0] >= w[1]) {
        return Ok(false);
    }
    let fam = restrict(f, prefix.len() as u32)?;
    Ok(fam.sets().iter().all(|e| member_expr(g, &e.image(prefix).expect("inside prefix"))))
}
