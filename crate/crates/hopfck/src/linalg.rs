//! Exact rational linear solves (the systems here are tiny).

use num_traits::Zero;

use crate::rational::Q;

/// Solves `A x = b` exactly by Gauss-Jordan elimination.
///
/// Returns `None` when the system is inconsistent. Under-determined systems
/// are solved with free variables set to zero.
#[allow(clippy::needless_range_loop)]
pub fn solve(a: &[Vec<Q>], b: &[Q]) -> Option<Vec<Q>> {
    assert_eq!(a.len(), b.len());
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut m: Vec<Vec<Q>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let mut pivot_col: Vec<usize> = Vec::new();
    let mut r = 0usize;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].clone();
        for x in m[r].iter_mut() {
            *x /= inv.clone();
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for c2 in 0..=cols {
                    let delta = &f * &m[r][c2];
                    m[i][c2] -= delta;
                }
            }
        }
        pivot_col.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    // inconsistency: a zero row with nonzero rhs
    for i in r..rows {
        if !m[i][cols].is_zero() {
            return None;
        }
    }
    let mut x = vec![Q::zero(); cols];
    for (row, &c) in pivot_col.iter().enumerate() {
        x[c] = m[row][cols].clone();
    }
    Some(x)
}
