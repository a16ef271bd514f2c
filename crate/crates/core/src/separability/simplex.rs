//! Dense tableau simplex for `max c·x  s.t.  A x ≤ b, x ≥ 0` with `b ≥ 0`,
//! so the all-slack basis is feasible and no phase I is needed.

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-11;
const COST_TOL: f64 = 1e-11;
/// Consecutive degenerate pivots tolerated before switching to Bland's rule.
const DEGENERATE_LIMIT: usize = 50;

#[derive(Clone, Debug, Default)]
pub(crate) struct Lp {
    pub objective: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
}

impl Lp {
    pub fn new(num_vars: usize) -> Self {
        Self {
            objective: vec![0.0; num_vars],
            rows: Vec::new(),
            rhs: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    /// Adds `Σ coeffs·x ≤ rhs` from sparse `(var, coeff)` pairs.
    pub fn le(&mut self, terms: &[(usize, f64)], rhs: f64) {
        let mut row = vec![0.0; self.num_vars()];
        for &(v, c) in terms {
            row[v] += c;
        }
        self.rows.push(row);
        self.rhs.push(rhs);
    }
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Unbounded,
}

pub(crate) fn solve(lp: &Lp) -> Result<LpOutcome> {
    let m = lp.rows.len();
    let n = lp.num_vars();
    if lp.rhs.iter().any(|&b| b < 0.0 || !b.is_finite()) {
        return Err(Error::Internal("simplex requires a nonnegative right-hand side".into()));
    }
    let width = n + m + 1;
    // rows 0..m constraints, row m the reduced-cost row
    let mut t = vec![0.0; (m + 1) * width];
    for (i, (row, &b)) in lp.rows.iter().zip(&lp.rhs).enumerate() {
        t[i * width..i * width + n].copy_from_slice(row);
        t[i * width + n + i] = 1.0;
        t[i * width + width - 1] = b;
    }
    for (j, &c) in lp.objective.iter().enumerate() {
        t[m * width + j] = -c;
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    let max_iter = 50 * (n + m) + 1000;
    let mut degenerate = 0;
    for _ in 0..max_iter {
        let cost = &t[m * width..m * width + n + m];
        let entering = if degenerate < DEGENERATE_LIMIT {
            cost.iter()
                .enumerate()
                .filter(|(_, &r)| r < -COST_TOL)
                .min_by(|a, b| a.1.total_cmp(b.1))
                .map(|(j, _)| j)
        } else {
            cost.iter().position(|&r| r < -COST_TOL)
        };
        let Some(col) = entering else {
            let mut x = vec![0.0; n];
            for (i, &bv) in basis.iter().enumerate() {
                if bv < n {
                    x[bv] = t[i * width + width - 1];
                }
            }
            let value = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
            return Ok(LpOutcome::Optimal { x, value });
        };

        let mut leaving: Option<(usize, f64)> = None;
        for i in 0..m {
            let a = t[i * width + col];
            if a > PIVOT_TOL {
                let ratio = t[i * width + width - 1] / a;
                let better = match leaving {
                    None => true,
                    Some((k, best)) => {
                        ratio < best - 1e-13 || (ratio <= best + 1e-13 && basis[i] < basis[k])
                    }
                };
                if better {
                    leaving = Some((i, ratio));
                }
            }
        }
        let Some((row, ratio)) = leaving else {
            return Ok(LpOutcome::Unbounded);
        };
        degenerate = if ratio <= 1e-13 { degenerate + 1 } else { 0 };
        pivot(&mut t, width, m + 1, row, col);
        basis[row] = col;
    }
    Err(Error::Internal(format!(
        "simplex did not converge within {max_iter} pivots"
    )))
}

fn pivot(t: &mut [f64], width: usize, rows: usize, row: usize, col: usize) {
    let p = t[row * width + col];
    for v in &mut t[row * width..(row + 1) * width] {
        *v /= p;
    }
    let pivot_row: Vec<f64> = t[row * width..(row + 1) * width].to_vec();
    for r in 0..rows {
        if r == row {
            continue;
        }
        let f = t[r * width + col];
        if f == 0.0 {
            continue;
        }
        for (v, &pv) in t[r * width..(r + 1) * width].iter_mut().zip(&pivot_row) {
            *v -= f * pv;
        }
        t[r * width + col] = 0.0;
    }
}
