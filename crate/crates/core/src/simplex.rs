//! Dense tableau simplex in exact rationals with Bland's rule.
//!
//! Solves `max cᵀx  s.t.  Ax ≤ b, x ≥ 0` for `b ≥ 0`, starting from the slack
//! basis. Duals are read off the objective row under the slack columns.

use num_traits::{Signed, Zero};

use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpSolution {
    pub x: Vec<Rational>,
    pub value: Rational,
    /// One multiplier per row of `A`.
    pub dual: Vec<Rational>,
    pub pivots: usize,
}

/// `None` when the LP is unbounded.
pub fn maximize(c: &[Rational], a: &[Vec<Rational>], b: &[Rational]) -> Option<LpSolution> {
    let m = a.len();
    let n = c.len();
    assert_eq!(b.len(), m, "one right-hand side per row");
    assert!(b.iter().all(|v| !v.is_negative()), "slack basis needs b ≥ 0");
    let width = n + m + 1;

    // Row m is the objective row `z − cᵀx = 0`.
    let mut t: Vec<Vec<Rational>> = Vec::with_capacity(m + 1);
    for (i, row) in a.iter().enumerate() {
        assert_eq!(row.len(), n, "row {i} has wrong length");
        let mut r = vec![Rational::zero(); width];
        r[..n].clone_from_slice(row);
        r[n + i] = Rational::from_integer(1.into());
        r[width - 1] = b[i].clone();
        t.push(r);
    }
    let mut obj = vec![Rational::zero(); width];
    for (j, cj) in c.iter().enumerate() {
        obj[j] = -cj;
    }
    t.push(obj);
    let mut basis: Vec<usize> = (n..n + m).collect();

    let mut pivots = 0;
    // Bland: lowest-index improving column, then lowest-index leaving variable.
    while let Some(col) = (0..n + m).find(|&j| t[m][j].is_negative()) {
        let mut leave: Option<(usize, Rational)> = None;
        for i in 0..m {
            if t[i][col].is_positive() {
                let ratio = &t[i][width - 1] / &t[i][col];
                let better = match &leave {
                    None => true,
                    Some((r, best)) => ratio < *best || (ratio == *best && basis[i] < basis[*r]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let (row, _) = leave?;
        pivot(&mut t, row, col);
        basis[row] = col;
        pivots += 1;
    }

    let mut x = vec![Rational::zero(); n];
    for (i, &var) in basis.iter().enumerate() {
        if var < n {
            x[var] = t[i][width - 1].clone();
        }
    }
    let dual = (0..m).map(|i| t[m][n + i].clone()).collect();
    Some(LpSolution { x, value: t[m][width - 1].clone(), dual, pivots })
}

fn pivot(t: &mut [Vec<Rational>], row: usize, col: usize) {
    let inv = t[row][col].recip();
    let nonzero: Vec<usize> = (0..t[row].len()).filter(|&k| !t[row][k].is_zero()).collect();
    for &k in &nonzero {
        t[row][k] *= &inv;
    }
    let pivot_row = t[row].clone();
    for (i, r) in t.iter_mut().enumerate() {
        if i == row || r[col].is_zero() {
            continue;
        }
        let f = r[col].clone();
        for &k in &nonzero {
            let delta = &f * &pivot_row[k];
            r[k] -= delta;
        }
    }
}
