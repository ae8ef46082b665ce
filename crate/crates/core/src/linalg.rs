//! Exact rational linear algebra on small dense matrices (row-major).

use num_traits::{One, Signed, Zero};

use crate::exact::Rational;

pub type Matrix = Vec<Vec<Rational>>;

/// Reduced row echelon form and the pivot column of each non-zero row.
pub fn rref(m: &Matrix) -> (Matrix, Vec<usize>) {
    let mut a = m.clone();
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let inv = a[r][c].recip();
        for x in a[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                let (src, dst) = if i < r {
                    let (lo, hi) = a.split_at_mut(r);
                    (&hi[0], &mut lo[i])
                } else {
                    let (lo, hi) = a.split_at_mut(i);
                    (&lo[r], &mut hi[0])
                };
                for (d, s) in dst.iter_mut().zip(src.iter()) {
                    *d -= &f * s;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (a, pivots)
}

pub fn rank(m: &Matrix) -> usize {
    rref(m).1.len()
}

/// Pivot columns: a lexicographically first set of columns spanning the column space.
pub fn pivot_columns(m: &Matrix) -> Vec<usize> {
    rref(m).1
}

/// A basis of `{x : m x = 0}`, each vector scaled so its first non-zero
/// entry is positive.
pub fn nullspace(m: &Matrix, cols: usize) -> Vec<Vec<Rational>> {
    let (r, pivots) = rref(m);
    let mut out = Vec::new();
    for free in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![Rational::zero(); cols];
        v[free] = Rational::one();
        for (row, &pc) in pivots.iter().enumerate() {
            v[pc] = -r[row][free].clone();
        }
        if let Some(first) = v.iter().find(|x| !x.is_zero()) {
            if first.is_negative() {
                for x in v.iter_mut() {
                    *x = -x.clone();
                }
            }
        }
        out.push(v);
    }
    out
}

pub fn transpose(m: &Matrix) -> Matrix {
    let cols = m.first().map_or(0, Vec::len);
    (0..cols).map(|j| m.iter().map(|r| r[j].clone()).collect()).collect()
}

pub fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|r| {
            (0..cols)
                .map(|j| (0..inner).fold(Rational::zero(), |acc, k| acc + &r[k] * &b[k][j]))
                .collect()
        })
        .collect()
}

pub fn mat_vec(a: &Matrix, x: &[Rational]) -> Vec<Rational> {
    a.iter().map(|r| dot(r, x)).collect()
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

/// Inverse of a square matrix, if it is non-singular.
pub fn inverse(m: &Matrix) -> Option<Matrix> {
    let n = m.len();
    let aug: Matrix = m
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            row
        })
        .collect();
    let (r, pivots) = rref(&aug);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return None;
    }
    Some(r.into_iter().map(|row| row[n..].to_vec()).collect())
}

pub fn det(m: &Matrix) -> Rational {
    let n = m.len();
    let mut a = m.clone();
    let mut d = Rational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else {
            return Rational::zero();
        };
        if p != c {
            a.swap(p, c);
            d = -d;
        }
        d *= &a[c][c];
        let prow = a[c].clone();
        for row in a.iter_mut().skip(c + 1) {
            if !row[c].is_zero() {
                let f = &row[c] / &prow[c];
                for (x, p) in row.iter_mut().zip(&prow).skip(c) {
                    *x -= &f * p;
                }
            }
        }
    }
    d
}

/// Positive semidefiniteness of a symmetric matrix, exactly, via symmetric
/// Gaussian elimination with the zero-pivot rule.
pub fn is_psd(m: &Matrix) -> bool {
    let n = m.len();
    let mut a = m.clone();
    let mut alive: Vec<bool> = vec![true; n];
    for _ in 0..n {
        let Some(k) = (0..n).find(|&i| alive[i] && !a[i][i].is_zero()) else {
            // Every remaining diagonal entry is zero: PSD iff the rest vanishes.
            return (0..n).all(|i| !alive[i] || (0..n).all(|j| !alive[j] || a[i][j].is_zero()));
        };
        if a[k][k].is_negative() {
            return false;
        }
        // A zero diagonal entry with a non-zero off-diagonal entry is indefinite.
        for i in 0..n {
            if alive[i] && i != k && a[i][i].is_zero() && (0..n).any(|j| alive[j] && !a[i][j].is_zero()) {
                return false;
            }
        }
        alive[k] = false;
        let piv = a[k][k].clone();
        let row_k = a[k].clone();
        for i in 0..n {
            if !alive[i] || row_k[i].is_zero() {
                continue;
            }
            let f = &row_k[i] / &piv;
            for j in 0..n {
                if alive[j] {
                    let s = &f * &row_k[j];
                    a[i][j] -= s;
                }
            }
        }
    }
    true
}

/// Solves `m x = b` for square non-singular `m`.
pub fn solve(m: &Matrix, b: &[Rational]) -> Option<Vec<Rational>> {
    inverse(m).map(|inv| mat_vec(&inv, b))
}
