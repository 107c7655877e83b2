//! Exact linear algebra over the rationals: nullspaces by reduced row echelon
//! form, square solves and determinants by fraction-free (Bareiss)
//! elimination.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::rational::{common_denominator, Q};

/// Basis of the right nullspace of `rows` (each row has `ncols` entries).
/// Basis vectors are indexed by free columns in increasing order, each with
/// a 1 in its own free column.
pub fn nullspace(rows: &[Vec<Q>], ncols: usize) -> Vec<Vec<Q>> {
    let mut m: Vec<Vec<Q>> = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in c..ncols {
                    let sub = &f * &m[r][j];
                    m[i][j] -= sub;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Q::zero(); ncols];
            v[f] = Q::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -m[row][f].clone();
            }
            v
        })
        .collect()
}

fn integer_rows(a: &[Vec<Q>], b: Option<&[Q]>) -> Vec<Vec<BigInt>> {
    a.iter()
        .enumerate()
        .map(|(i, row)| {
            let extra = b.map(|b| &b[i]);
            let den = common_denominator(row.iter().chain(extra));
            let den = Q::from_integer(den);
            row.iter().chain(extra).map(|x| (x * &den).to_integer()).collect()
        })
        .collect()
}

/// Solves the square system `a·x = b` by Bareiss elimination. Returns `None`
/// when `a` is singular.
pub fn solve(a: &[Vec<Q>], b: &[Q]) -> Option<Vec<Q>> {
    let n = a.len();
    assert_eq!(b.len(), n);
    if n == 0 {
        return Some(Vec::new());
    }
    let mut m = integer_rows(a, Some(b));
    let mut prev = BigInt::one();
    for k in 0..n {
        let p = (k..n).find(|&i| !m[i][k].is_zero())?;
        m.swap(k, p);
        for i in k + 1..n {
            for j in k + 1..=n {
                let v = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &prev;
                m[i][j] = v;
            }
            m[i][k] = BigInt::zero();
        }
        prev = m[k][k].clone();
    }
    let mut x = vec![Q::zero(); n];
    for i in (0..n).rev() {
        let mut acc = Q::from_integer(m[i][n].clone());
        for j in i + 1..n {
            acc -= Q::from_integer(m[i][j].clone()) * &x[j];
        }
        x[i] = acc / Q::from_integer(m[i][i].clone());
    }
    Some(x)
}

/// Determinant of a square rational matrix.
pub fn determinant(a: &[Vec<Q>]) -> Q {
    let n = a.len();
    if n == 0 {
        return Q::one();
    }
    // Row scaling by denominators is undone at the end.
    let scale = a.iter().fold(Q::one(), |acc, row| acc * Q::from_integer(common_denominator(row)));
    let mut m = integer_rows(a, None);
    let mut prev = BigInt::one();
    let mut sign = BigInt::one();
    for k in 0..n {
        let Some(p) = (k..n).find(|&i| !m[i][k].is_zero()) else {
            return Q::zero();
        };
        if p != k {
            m.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &prev;
                m[i][j] = v;
            }
            m[i][k] = BigInt::zero();
        }
        prev = m[k][k].clone();
    }
    Q::from_integer(sign * &m[n - 1][n - 1]) / scale
}

/// Sylvester's criterion on `-a`.
pub fn is_negative_definite(a: &[Vec<Q>]) -> bool {
    let n = a.len();
    (1..=n).all(|k| {
        let minor: Vec<Vec<Q>> = a[..k].iter().map(|row| row[..k].iter().map(|x| -x).collect()).collect();
        determinant(&minor).is_positive()
    })
}
