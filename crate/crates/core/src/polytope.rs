//! Vertex enumeration for bounded polytopes `{a : c·a ≤ 1}` containing the
//! origin in their interior, by the double-description method over integers.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::exact::Rational;
use crate::linalg;

/// Default cap on intermediate rays.
pub const DEFAULT_VERTEX_CAP: usize = 50_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolytopeError {
    #[error("vertex enumeration exceeded {0} rays")]
    TooManyVertices(usize),
    #[error("constraint system does not bound a full-dimensional polytope")]
    Degenerate,
}

fn to_integer_row(c: &[Rational]) -> Vec<BigInt> {
    let l = c.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    c.iter().map(|x| x.numer() * (&l / x.denom())).collect()
}

fn primitive(v: &mut [BigInt]) {
    let g = v.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if !g.is_zero() && !g.is_one() {
        for x in v.iter_mut() {
            *x /= &g;
        }
    }
}

fn eval(row: &[BigInt], ray: &[BigInt]) -> BigInt {
    row.iter().zip(ray).fold(BigInt::zero(), |acc, (a, b)| acc + a * b)
}

#[derive(Clone)]
struct Ray {
    v: Vec<BigInt>,
    zeros: Vec<u64>,
}

fn set_bit(bits: &mut [u64], i: usize) {
    bits[i / 64] |= 1 << (i % 64);
}

fn subset(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x & !y == 0)
}

/// Vertices of `{a ∈ R^r : c_i·a ≤ 1 for all i}`, which must be bounded.
pub fn vertices(constraints: &[Vec<Rational>], r: usize, cap: usize) -> Result<Vec<Vec<Rational>>, PolytopeError> {
    // Homogenize: (a, t) with t - c·a ≥ 0 and t ≥ 0.
    let mut rows: Vec<Vec<BigInt>> = Vec::with_capacity(constraints.len() + 1);
    for c in constraints {
        if c.iter().all(Zero::is_zero) {
            continue;
        }
        // t·L - (L c)·a ≥ 0 with L the common denominator.
        let ic = to_integer_row(c);
        let l = c.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        let mut row: Vec<BigInt> = ic.iter().map(|x| -x).collect();
        row.push(l);
        primitive(&mut row);
        rows.push(row);
    }
    rows.sort();
    rows.dedup();
    let mut t_row = vec![BigInt::zero(); r + 1];
    t_row[r] = BigInt::one();
    rows.push(t_row);
    let m = rows.len();
    let words = m.div_ceil(64);

    // Initial cone from r+1 independent rows.
    let rat_rows: linalg::Matrix = rows.iter().map(|row| row.iter().map(|x| Rational::from_integer(x.clone())).collect()).collect();
    let basis = linalg::pivot_columns(&linalg::transpose(&rat_rows));
    if basis.len() < r + 1 {
        return Err(PolytopeError::Degenerate);
    }
    let b: linalg::Matrix = basis.iter().map(|&i| rat_rows[i].clone()).collect();
    let inv = linalg::inverse(&b).ok_or(PolytopeError::Degenerate)?;
    let mut rays: Vec<Ray> = (0..=r)
        .map(|j| {
            let col: Vec<Rational> = inv.iter().map(|row| row[j].clone()).collect();
            let mut v = to_integer_row(&col);
            primitive(&mut v);
            Ray { v, zeros: vec![0; words] }
        })
        .collect();
    for &i in &basis {
        for ray in rays.iter_mut() {
            if eval(&rows[i], &ray.v).is_zero() {
                set_bit(&mut ray.zeros, i);
            }
        }
    }

    for (i, row) in rows.iter().enumerate() {
        if basis.contains(&i) {
            continue;
        }
        let vals: Vec<BigInt> = rays.iter().map(|ray| eval(row, &ray.v)).collect();
        let pos: Vec<usize> = (0..rays.len()).filter(|&k| vals[k].is_positive()).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&k| vals[k].is_negative()).collect();
        let mut next: Vec<Ray> = Vec::new();
        for (k, ray) in rays.iter().enumerate() {
            if !vals[k].is_negative() {
                let mut ray = ray.clone();
                if vals[k].is_zero() {
                    set_bit(&mut ray.zeros, i);
                }
                next.push(ray);
            }
        }
        for &p in &pos {
            for &q in &neg {
                let common: Vec<u64> = rays[p].zeros.iter().zip(&rays[q].zeros).map(|(a, b)| a & b).collect();
                let n_common: u32 = common.iter().map(|w| w.count_ones()).sum();
                if (n_common as usize) + 2 < r + 1 {
                    continue;
                }
                let adjacent = rays
                    .iter()
                    .enumerate()
                    .all(|(k, other)| k == p || k == q || !subset(&common, &other.zeros));
                if !adjacent {
                    continue;
                }
                let mut v: Vec<BigInt> = rays[p]
                    .v
                    .iter()
                    .zip(&rays[q].v)
                    .map(|(a, b)| &vals[p] * b - &vals[q] * a)
                    .collect();
                primitive(&mut v);
                let mut zeros = common;
                set_bit(&mut zeros, i);
                next.push(Ray { v, zeros });
                if next.len() > cap {
                    return Err(PolytopeError::TooManyVertices(cap));
                }
            }
        }
        rays = next;
    }

    let mut out = Vec::new();
    for ray in rays {
        let t = &ray.v[r];
        if !t.is_positive() {
            return Err(PolytopeError::Degenerate);
        }
        out.push(ray.v[..r].iter().map(|x| Rational::new(x.clone(), t.clone())).collect());
    }
    out.sort();
    out.dedup();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, rat};

    fn cross(r: usize) -> Vec<Vec<Rational>> {
        // ℓ_∞ ball described as ±e_i·a ≤ 1.
        let mut c = Vec::new();
        for i in 0..r {
            for s in [1, -1] {
                let mut row = vec![int(0); r];
                row[i] = int(s);
                c.push(row);
            }
        }
        c
    }

    #[test]
    fn cube_has_two_to_the_r_vertices() {
        for r in 1..=4 {
            let v = vertices(&cross(r), r, DEFAULT_VERTEX_CAP).unwrap();
            assert_eq!(v.len(), 1 << r);
            assert!(v.iter().all(|x| x.iter().all(|c| c.abs() == int(1))));
        }
    }

    #[test]
    fn l1_ball_vertices() {
        let mut c = Vec::new();
        for signs in 0..8u32 {
            c.push((0..3).map(|i| if signs >> i & 1 == 1 { int(-1) } else { int(1) }).collect());
        }
        let v = vertices(&c, 3, DEFAULT_VERTEX_CAP).unwrap();
        assert_eq!(v.len(), 6);
    }

    #[test]
    fn scaled_and_redundant_constraints() {
        let mut c = cross(2);
        c.push(vec![rat(1, 2), rat(1, 2)]);
        c.push(vec![int(0), int(0)]);
        let v = vertices(&c, 2, DEFAULT_VERTEX_CAP).unwrap();
        assert_eq!(v.len(), 4);
        assert!(v.contains(&vec![int(1), int(1)]));
        let mut tight = cross(2);
        tight.push(vec![int(1), int(1)]);
        let v = vertices(&tight, 2, DEFAULT_VERTEX_CAP).unwrap();
        assert_eq!(v.len(), 5);
        assert!(v.contains(&vec![int(0), int(1)]) && v.contains(&vec![int(1), int(0)]));
    }

    #[test]
    fn unbounded_is_degenerate() {
        let c = vec![vec![int(1), int(0)], vec![int(-1), int(0)]];
        assert_eq!(vertices(&c, 2, DEFAULT_VERTEX_CAP), Err(PolytopeError::Degenerate));
    }

    #[test]
    fn cap_is_enforced() {
        assert_eq!(vertices(&cross(4), 4, 3), Err(PolytopeError::TooManyVertices(3)));
    }
}
