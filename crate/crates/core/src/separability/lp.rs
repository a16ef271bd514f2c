//! Degree of separability by linear programming.
//!
//! Writing `u_g(z | j_g) = w_g·P_g(z | j_g)` makes the problem linear:
//! maximize `Σ_g w_g` subject to `Σ_g u_g(z | j_g) ≤ P(z | j)` for every
//! cell, with the rows of each `u_g` summing to the same `w_g`. The sign of
//! each `w_g` fixes the sign of its `u_g` cells, so one LP is solved per sign
//! pattern over nonnegative variables `v_g = ±u_g`.

use super::simplex::{solve, Lp, LpOutcome};
use super::{assemble, Grouping, Layout, SeparableDecomposition};
use crate::error::{Error, Result};
use crate::prob::Cpd;

/// Largest number of parent groups accepted.
pub const MAX_GROUPS: usize = 4;

/// A pattern must beat the all-nonnegative one by more than this to be chosen.
const PREFERENCE_TOL: f64 = 1e-9;

struct PatternSolution {
    alpha: f64,
    parts: Vec<Vec<f64>>,
}

fn solve_pattern(cpd: &Cpd, layout: &Layout, negative: &[bool]) -> Result<PatternSolution> {
    let n = layout.child_size;
    let sizes = layout.group_sizes();
    let mut offsets = Vec::with_capacity(sizes.len());
    let mut total = 0;
    for &s in &sizes {
        offsets.push(total);
        total += s * n;
    }
    let sign: Vec<f64> = negative.iter().map(|&neg| if neg { -1.0 } else { 1.0 }).collect();
    let var = |g: usize, jg: usize, z: usize| offsets[g] + jg * n + z;

    let mut lp = Lp::new(total);
    for g in 0..sizes.len() {
        for z in 0..n {
            lp.objective[var(g, 0, z)] = sign[g];
        }
    }
    let mut terms = Vec::with_capacity(2 * n);
    for r in 0..layout.num_rows {
        for z in 0..n {
            terms.clear();
            for g in 0..sizes.len() {
                terms.push((var(g, layout.row_group[g][r], z), sign[g]));
            }
            lp.le(&terms, cpd.prob(r, z));
        }
    }
    // every row of v_g has the same total as row 0
    for (g, &size) in sizes.iter().enumerate() {
        for jg in 1..size {
            terms.clear();
            for z in 0..n {
                terms.push((var(g, jg, z), 1.0));
                terms.push((var(g, 0, z), -1.0));
            }
            lp.le(&terms, 0.0);
            for t in terms.iter_mut() {
                t.1 = -t.1;
            }
            lp.le(&terms, 0.0);
        }
    }

    match solve(&lp)? {
        LpOutcome::Optimal { x, value } => {
            let parts = (0..sizes.len())
                .map(|g| {
                    x[offsets[g]..offsets[g] + sizes[g] * n]
                        .iter()
                        .map(|v| sign[g] * v)
                        .collect()
                })
                .collect();
            Ok(PatternSolution { alpha: value, parts })
        }
        LpOutcome::Unbounded => Err(Error::Internal(
            "separability program reported unbounded".into(),
        )),
    }
}

fn best_pattern(cpd: &Cpd, grouping: &Grouping) -> Result<(Layout, PatternSolution, bool)> {
    let layout = Layout::new(cpd, grouping)?;
    let m = grouping.len();
    if m > MAX_GROUPS {
        return Err(Error::UnsupportedArity {
            groups: m,
            max: MAX_GROUPS,
        });
    }
    let all_negative = (1usize << m) - 1;
    let mut nonneg: Option<PatternSolution> = None;
    let mut best: Option<PatternSolution> = None;
    for mask in 0..all_negative {
        let negative: Vec<bool> = (0..m).map(|g| mask >> g & 1 == 1).collect();
        let sol = solve_pattern(cpd, &layout, &negative)?;
        if mask == 0 {
            nonneg = Some(sol);
        } else if best.as_ref().is_none_or(|b| sol.alpha > b.alpha) {
            best = Some(sol);
        }
    }
    let nonneg = nonneg.expect("pattern 0 always solved");
    match best {
        Some(b) if b.alpha > nonneg.alpha + PREFERENCE_TOL => Ok((layout, b, false)),
        _ => Ok((layout, nonneg, true)),
    }
}

/// Maximal decomposition over all sign patterns of the group weights.
pub fn degree_lp(cpd: &Cpd, grouping: &Grouping) -> Result<SeparableDecomposition> {
    let (layout, sol, unit) = best_pattern(cpd, grouping)?;
    let mut d = assemble(cpd, grouping, &layout, &sol.parts, unit)?;
    d.alpha = sol.alpha.clamp(0.0, 1.0);
    Ok(d)
}

/// Degree of separability alone.
pub fn degree(cpd: &Cpd, grouping: &Grouping) -> Result<f64> {
    let (_, sol, _) = best_pattern(cpd, grouping)?;
    Ok(sol.alpha.clamp(0.0, 1.0))
}
