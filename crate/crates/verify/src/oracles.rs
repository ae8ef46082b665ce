//! Brute-force reference computations. Nothing here calls into the engine
//! under test except for constructing the values it compares against.

use opindex::ordinal::Ordinal;

// ---------------------------------------------------------------------------
// Ordinals below ω^ω as block words

/// A well-order written left to right as a concatenation of blocks `ω^d`.
pub type BlockWord = Vec<u32>;

/// The block word of a Cantor normal form below `ω^ω`.
pub fn word_of(a: &Ordinal) -> Option<BlockWord> {
    let mut w = Vec::new();
    for t in a.terms() {
        let d = t.exponent.as_finite()? as u32;
        w.extend(std::iter::repeat_n(d, t.coefficient as usize));
    }
    Some(w)
}

/// Order type of a block word: a block followed anywhere later by a strictly
/// larger block is swallowed by it (`ω^i + ω^j = ω^j` for `i < j`).
pub fn order_type(w: &[u32]) -> Ordinal {
    let mut kept = Vec::new();
    let mut right_max = 0;
    for &d in w.iter().rev() {
        if d >= right_max {
            kept.push(d);
            right_max = d;
        }
    }
    let mut terms: Vec<(Ordinal, u64)> = Vec::new();
    for &d in kept.iter().rev() {
        match terms.last_mut() {
            Some((e, c)) if e.as_finite() == Some(d as u64) => *c += 1,
            _ => terms.push((Ordinal::from(d as u64), 1)),
        }
    }
    Ordinal::from_terms(terms).expect("kept blocks are non-increasing")
}

/// `α + β`: the blocks of `α` followed by those of `β`.
pub fn concat(a: &[u32], b: &[u32]) -> BlockWord {
    a.iter().chain(b).copied().collect()
}

/// `α · β`: one copy of `α` for each point of `β`, in the order of `β`.
/// A block `ω^d` of `β` with `d ≥ 1` indexes an `ω^d`-sequence of copies of
/// `α`, whose blocks of size `ω^e` (`e` the largest in `α`) are cofinal at
/// every level, giving a single block `ω^(e+d)`.
pub fn product(a: &[u32], b: &[u32]) -> BlockWord {
    let Some(&e) = a.iter().max() else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for &d in b {
        if d == 0 {
            out.extend_from_slice(a);
        } else {
            out.push(e + d);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Schreier families by direct recursion

/// `E ∈ S_k` for finite `k`: `S_0` is sets of size at most one, and
/// `S_{k+1}` is unions of at most `min E` successive members of `S_k`.
pub fn schreier_member(k: u32, e: &[u32]) -> bool {
    if e.is_empty() {
        return true;
    }
    if k == 0 {
        return e.len() == 1;
    }
    fn split(k: u32, e: &[u32], pieces_left: usize) -> bool {
        if e.is_empty() {
            return true;
        }
        if pieces_left == 0 {
            return false;
        }
        (1..=e.len()).any(|cut| schreier_member(k - 1, &e[..cut]) && split(k, &e[cut..], pieces_left - 1))
    }
    split(k, e, e[0] as usize)
}

/// All non-empty subsets of `{1..n}`, as increasing sequences.
pub fn subsets(n: u32) -> Vec<Vec<u32>> {
    (1u32..1 << n).map(|m| (1..=n).filter(|i| m >> (i - 1) & 1 == 1).collect()).collect()
}

// ---------------------------------------------------------------------------
// Norms by exhaustive enumeration (exact rationals where possible)

pub fn schreier_norm(k: u32, x: &[f64]) -> f64 {
    subsets(x.len() as u32)
        .iter()
        .filter(|e| schreier_member(k, e))
        .map(|e| e.iter().map(|&i| x[i as usize - 1].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Best `Σ_j (Σ_{i∈E_j} |x_i|)²` over successive `S_k` sets `E_1 < E_2 < …`.
pub fn xxi2_norm_sq(k: u32, x: &[f64]) -> f64 {
    let members: Vec<Vec<u32>> = subsets(x.len() as u32).into_iter().filter(|e| schreier_member(k, e)).collect();
    fn go(members: &[Vec<u32>], x: &[f64], floor: u32) -> f64 {
        members
            .iter()
            .filter(|e| e[0] > floor)
            .map(|e| {
                let s: f64 = e.iter().map(|&i| x[i as usize - 1].abs()).sum();
                s * s + go(members, x, *e.last().expect("non-empty"))
            })
            .fold(0.0, f64::max)
    }
    go(&members, x, 0)
}

/// Best `Σ_j (Σ_{s∈I_j} |x_s|)²` over families of pairwise disjoint segments
/// of the tree `nodes`, coordinates indexed like `nodes`.
pub fn z12_norm_sq(nodes: &[Vec<u32>], x: &[f64]) -> f64 {
    let mut segs: Vec<Vec<usize>> = Vec::new();
    for t in nodes {
        for k in 0..=t.len() {
            segs.push((k..=t.len()).map(|j| nodes.iter().position(|s| s[..] == t[..j]).expect("closed")).collect());
        }
    }
    fn go(segs: &[Vec<usize>], used: &mut [bool], from: usize, x: &[f64]) -> f64 {
        let mut best = 0.0f64;
        for (k, seg) in segs.iter().enumerate().skip(from) {
            if seg.iter().any(|&i| used[i]) {
                continue;
            }
            let m: f64 = seg.iter().map(|&i| x[i].abs()).sum();
            seg.iter().for_each(|&i| used[i] = true);
            best = best.max(m * m + go(segs, used, k + 1, x));
            seg.iter().for_each(|&i| used[i] = false);
        }
        best
    }
    go(&segs, &mut vec![false; nodes.len()], 0, x)
}

pub fn summing_norm(x: &[f64]) -> f64 {
    let mut s = 0.0;
    let mut best = 0.0f64;
    for v in x {
        s += v;
        best = best.max(s.abs());
    }
    best
}

// ---------------------------------------------------------------------------
// Grid maximization of domination ratios

/// The four polyhedral test norms, by direct formulas.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolyNorm {
    L1,
    LInf,
    Schreier1,
    Summing,
}

impl PolyNorm {
    pub const ALL: [PolyNorm; 4] = [PolyNorm::L1, PolyNorm::LInf, PolyNorm::Schreier1, PolyNorm::Summing];

    pub fn descriptor(&self, n: usize) -> String {
        match self {
            PolyNorm::L1 => format!("lp(1,{n})"),
            PolyNorm::LInf => format!("lp(inf,{n})"),
            PolyNorm::Schreier1 => format!("schreier(1,{n})"),
            PolyNorm::Summing => format!("summing({n})"),
        }
    }
}

/// A norm evaluator with any enumeration done up front.
pub struct FastNorm {
    kind: PolyNorm,
    sets: Vec<Vec<usize>>,
}

impl FastNorm {
    pub fn new(kind: PolyNorm, n: usize) -> Self {
        let sets = if kind == PolyNorm::Schreier1 {
            subsets(n as u32)
                .into_iter()
                .filter(|e| schreier_member(1, e))
                .map(|e| e.iter().map(|&i| i as usize - 1).collect())
                .collect()
        } else {
            Vec::new()
        };
        FastNorm { kind, sets }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self.kind {
            PolyNorm::L1 => x.iter().map(|v| v.abs()).sum(),
            PolyNorm::LInf => x.iter().fold(0.0, |m, v| m.max(v.abs())),
            PolyNorm::Summing => summing_norm(x),
            PolyNorm::Schreier1 => {
                self.sets.iter().map(|e| e.iter().map(|&i| x[i].abs()).sum::<f64>()).fold(0.0, f64::max)
            }
        }
    }
}

/// Columns-as-vectors system: `combine(vs, a) = Σ a_i vs[i]`.
pub fn combine(vs: &[Vec<f64>], a: &[f64], out: &mut [f64]) {
    out.iter_mut().for_each(|o| *o = 0.0);
    for (v, &c) in vs.iter().zip(a) {
        for (o, x) in out.iter_mut().zip(v) {
            *o += c * x;
        }
    }
}

/// Maximum of `‖Σ a_i x_i‖ / ‖Σ a_i y_i‖` over `a` on the boundary of the
/// cube `[-1, 1]^n` with grid step `1/steps`. By symmetry under `a ↦ -a`
/// only the faces `a_i = 1` are scanned.
pub fn grid_max(xs: &[Vec<f64>], x: &FastNorm, ys: &[Vec<f64>], y: &FastNorm, steps: i64) -> f64 {
    let n = xs.len();
    let dim_x = xs[0].len();
    let dim_y = ys[0].len();
    let mut bx = vec![0.0; dim_x];
    let mut by = vec![0.0; dim_y];
    let mut best = 0.0f64;
    for face in 0..n {
        let free: Vec<usize> = (0..n).filter(|&i| i != face).collect();
        let mut idx = vec![-steps; free.len()];
        let mut a = vec![0.0; n];
        a[face] = 1.0;
        loop {
            for (k, &i) in free.iter().enumerate() {
                a[i] = idx[k] as f64 / steps as f64;
            }
            combine(ys, &a, &mut by);
            let den = y.eval(&by);
            if den > 0.0 {
                combine(xs, &a, &mut bx);
                best = best.max(x.eval(&bx) / den);
            }
            let mut k = 0;
            loop {
                if k == idx.len() {
                    break;
                }
                idx[k] += 1;
                if idx[k] <= steps {
                    break;
                }
                idx[k] = -steps;
                k += 1;
            }
            if k == idx.len() {
                break;
            }
        }
    }
    best
}

/// `Σ ‖v_i‖`, a Lipschitz constant of `a ↦ ‖Σ a_i v_i‖` in the sup norm of `a`.
pub fn lipschitz(vs: &[Vec<f64>], norm: &FastNorm) -> f64 {
    vs.iter().map(|v| norm.eval(v)).sum()
}

// ---------------------------------------------------------------------------
// Trees

/// Height of a finite tree given as its node list: the longest node.
pub fn height<L>(nodes: impl IntoIterator<Item = Vec<L>>) -> usize {
    nodes.into_iter().map(|s| s.len()).max().unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_words() {
        // (ω + 1) + ω = ω·2, 2·ω = ω, ω·2 = ω + ω
        assert_eq!(order_type(&concat(&[1, 0], &[1])), "w*2".parse().unwrap());
        assert_eq!(order_type(&product(&[0, 0], &[1])), Ordinal::omega());
        assert_eq!(order_type(&product(&[1], &[0, 0])), "w*2".parse().unwrap());
        assert_eq!(order_type(&product(&[1, 0], &[1])), "w^(2)".parse().unwrap());
    }

    #[test]
    fn schreier_membership() {
        assert!(schreier_member(1, &[2, 3]));
        assert!(!schreier_member(1, &[1, 2]));
        assert!(schreier_member(2, &[2, 3, 4, 5, 6]));
        // {2,3} then {4,..,7}; an eighth element needs a third piece.
        assert!(schreier_member(2, &[2, 3, 4, 5, 6, 7]));
        assert!(!schreier_member(2, &[2, 3, 4, 5, 6, 7, 8]));
        assert!(schreier_member(2, &[3, 4, 5, 6, 7, 8, 9, 10, 11]));
    }

    #[test]
    fn enumerated_norms() {
        assert_eq!(schreier_norm(1, &[1.0, 1.0, 1.0, 1.0]), 2.0);
        assert_eq!(xxi2_norm_sq(1, &[0.0, 1.0, 1.0, 0.0]), 4.0);
        let chain: Vec<Vec<u32>> = (0..4).map(|k| vec![0; k]).collect();
        assert_eq!(z12_norm_sq(&chain, &[1.0; 4]), 16.0);
        assert_eq!(summing_norm(&[1.0, -1.0, 1.0]), 1.0);
    }

    #[test]
    fn grid_finds_sqrt_two_below() {
        let e = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let l1 = FastNorm::new(PolyNorm::L1, 2);
        let linf = FastNorm::new(PolyNorm::LInf, 2);
        assert_eq!(grid_max(&e, &l1, &e, &linf, 8), 2.0);
        assert_eq!(grid_max(&e, &linf, &e, &l1, 8), 1.0);
    }
}
