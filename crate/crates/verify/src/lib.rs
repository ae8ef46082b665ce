//! Acceptance suites for opindex, each criterion checked against an
//! independent oracle and a wall-clock limit.

pub mod criteria;
pub mod oracles;

use std::fmt;

use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Outcome {
    pub id: u8,
    pub title: &'static str,
    pub checks: Vec<Check>,
    pub elapsed_ms: u128,
    pub limit_ms: u128,
}

impl Outcome {
    pub fn within_limit(&self) -> bool {
        self.elapsed_ms <= self.limit_ms
    }

    pub fn passed(&self) -> bool {
        self.within_limit() && self.checks.iter().all(|c| c.passed)
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        write!(f, "{status} {:>2} {} ({} ms, limit {} ms)", self.id, self.title, self.elapsed_ms, self.limit_ms)?;
        for c in self.failed_checks() {
            write!(f, "\n       failed: {}: {}", c.name, c.detail)?;
        }
        if !self.within_limit() {
            write!(f, "\n       failed: over the time limit")?;
        }
        Ok(())
    }
}

/// Checks whose literal statement is false for the mathematics being checked.
/// They are run as stated and reported as failures; each entry names the
/// check and the reason.
pub const UNATTAINABLE: &[(u8, &str, &str)] = &[
    (
        5,
        "cb(S_1, n) strictly increasing, 2 <= n <= 16",
        "the largest member of S_1 inside {1..n} has ceil(n/2) elements, so the index is ceil(n/2) and repeats on {2k-1, 2k}",
    ),
    (
        7,
        "(S_1, A_2) depth 3 cap 30 yields NotFound",
        "every member of S_1 inside {1,2,3} has at most two elements, so (1,2,3) already maps S_1 into A_2",
    ),
];

pub fn is_unattainable(id: u8, check: &str) -> bool {
    UNATTAINABLE.iter().any(|(i, name, _)| *i == id && *name == check)
}

type Criterion = fn() -> Outcome;

/// `(suite, criterion)` pairs in criterion order.
pub const CRITERIA: [(&str, Criterion); 13] = [
    ("ordinal", criteria::ordinal_laws),
    ("ordinal", criteria::order_type_oracle),
    ("trees", criteria::minimal_tree_ranks),
    ("trees", criteria::derivative_identities),
    ("families", criteria::family_index_convergence),
    ("families", criteria::spreading_and_hereditary),
    ("families", criteria::gasparis_search),
    ("spaces", criteria::norm_oracles),
    ("domination", criteria::domination_exactness),
    ("indices", criteria::finite_rank_index),
    ("indices", criteria::perturbation_stability),
    ("indices", criteria::spreading_certificates),
    ("spaces", criteria::w_space_truncation),
];

pub fn suite_names() -> Vec<&'static str> {
    let mut names: Vec<&str> = CRITERIA.iter().map(|(s, _)| *s).collect();
    names.dedup();
    names.sort_unstable();
    names.dedup();
    names
}

/// Runs `all`, a suite name, or a criterion number.
pub fn run(selector: &str) -> Option<Vec<Outcome>> {
    let picked: Vec<Criterion> = match selector {
        "all" => CRITERIA.iter().map(|(_, c)| *c).collect(),
        s => match s.parse::<usize>() {
            Ok(k) if (1..=CRITERIA.len()).contains(&k) => vec![CRITERIA[k - 1].1],
            _ => CRITERIA.iter().filter(|(name, _)| *name == s).map(|(_, c)| *c).collect(),
        },
    };
    if picked.is_empty() {
        return None;
    }
    Some(picked.into_iter().map(|c| c()).collect())
}
