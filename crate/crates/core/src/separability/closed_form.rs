//! Closed forms for small shapes. `z1` is the child's first value; `x1, x2`
//! and `y1, …` are the assignments of the first and second group in order.

use serde::Serialize;

use super::{from_residual, Grouping, Layout, SeparableDecomposition};
use crate::error::{Error, Result};
use crate::prob::Cpd;

/// Intermediate quantities of a closed-form computation.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ClosedFormTrace {
    pub case: u8,
    /// Interaction deviations, one per child value (cases 1–2) or per
    /// adjacent pair of second-group values (case 3).
    pub deviations: Vec<f64>,
    /// Running sums of the deviations (case 3).
    pub partial_sums: Vec<f64>,
    pub c_star: Option<f64>,
    pub c_substar: Option<f64>,
    /// Sum of the positive deviations (cases 1–2).
    pub g: Option<f64>,
    /// Differences of the residual's first-value probability across the
    /// binary group, one per second-group value (case 3).
    pub b_values: Vec<f64>,
}

/// Below this, deviations count as zero and the table as fully separable.
const ZERO_DEVIATION: f64 = 1e-15;

fn shape_error(method: &'static str, reason: impl Into<String>) -> Error {
    Error::UnsupportedShape {
        method,
        reason: reason.into(),
    }
}

fn binary_pair(cpd: &Cpd, grouping: &Grouping, method: &'static str) -> Result<Layout> {
    let layout = Layout::new(cpd, grouping)?;
    if layout.group_sizes() != [2, 2] {
        return Err(shape_error(
            method,
            format!("needs two binary parent groups, found sizes {:?}", layout.group_sizes()),
        ));
    }
    Ok(layout)
}

fn interaction(
    cpd: &Cpd,
    grouping: &Grouping,
    layout: &Layout,
    case: u8,
) -> Result<(SeparableDecomposition, ClosedFormTrace)> {
    let n = layout.child_size;
    let rows = layout.pair_rows();
    let (r11, r12, r21, r22) = (rows[0][0], rows[0][1], rows[1][0], rows[1][1]);
    let deviations: Vec<f64> = (0..n)
        .map(|z| cpd.prob(r22, z) - cpd.prob(r21, z) - cpd.prob(r12, z) + cpd.prob(r11, z))
        .collect();
    let g: f64 = deviations.iter().filter(|&&a| a > 0.0).sum();
    let trace = ClosedFormTrace {
        case,
        deviations: deviations.clone(),
        g: Some(g),
        ..Default::default()
    };
    if g <= ZERO_DEVIATION {
        return Ok((from_residual(cpd, grouping, layout, 1.0, None)?, trace));
    }
    let alpha = 1.0 - g / 2.0;
    // the negative deviations sum to −G up to rounding
    let g_neg: f64 = -deviations.iter().filter(|&&a| a < 0.0).sum::<f64>();
    let mut residual = vec![0.0; cpd.values().len()];
    for (z, &a) in deviations.iter().enumerate() {
        if a > 0.0 {
            residual[r11 * n + z] = a / g;
            residual[r22 * n + z] = a / g;
        } else if a < 0.0 {
            residual[r12 * n + z] = -a / g_neg;
            residual[r21 * n + z] = -a / g_neg;
        }
    }
    let d = from_residual(cpd, grouping, layout, alpha, Some(&residual))?;
    Ok((d, trace))
}

/// Binary child with two binary parent groups: `α = 1 − |A|/2`, residual an
/// equality test (`A > 0`) or exclusive-or (`A < 0`).
pub fn degree_case1(cpd: &Cpd, grouping: &Grouping) -> Result<(SeparableDecomposition, ClosedFormTrace)> {
    let layout = binary_pair(cpd, grouping, "case1")?;
    if layout.child_size != 2 {
        return Err(shape_error("case1", "needs a binary child"));
    }
    interaction(cpd, grouping, &layout, 1)
}

/// Two binary parent groups, child of any cardinality: `α = 1 − G/2` with
/// `G` the sum of the positive deviations.
pub fn degree_case2(cpd: &Cpd, grouping: &Grouping) -> Result<(SeparableDecomposition, ClosedFormTrace)> {
    let layout = binary_pair(cpd, grouping, "case2")?;
    interaction(cpd, grouping, &layout, 2)
}

/// Binary child, one binary parent group and one of any size:
/// `α = 1 − (C* + C_*)/2` from the extreme running sums of the deviations.
pub fn degree_case3(cpd: &Cpd, grouping: &Grouping) -> Result<(SeparableDecomposition, ClosedFormTrace)> {
    let layout = Layout::new(cpd, grouping)?;
    let sizes = layout.group_sizes();
    if layout.child_size != 2 {
        return Err(shape_error("case3", "needs a binary child"));
    }
    if sizes.len() != 2 || !sizes.contains(&2) {
        return Err(shape_error(
            "case3",
            format!("needs one binary parent group out of two, found sizes {sizes:?}"),
        ));
    }
    let pairs = layout.pair_rows();
    let x_first = sizes[0] == 2;
    let ny = if x_first { sizes[1] } else { sizes[0] };
    let row = |x: usize, k: usize| if x_first { pairs[x][k] } else { pairs[k][x] };
    let p1 = |x: usize, k: usize| cpd.prob(row(x, k), 0);

    let deviations: Vec<f64> = (0..ny - 1)
        .map(|k| p1(1, k + 1) - p1(1, k) - p1(0, k + 1) + p1(0, k))
        .collect();
    let partial_sums: Vec<f64> = deviations
        .iter()
        .scan(0.0, |acc, a| {
            *acc += a;
            Some(*acc)
        })
        .collect();
    let c_star = partial_sums.iter().copied().fold(0.0, f64::max);
    let c_substar = -partial_sums.iter().copied().fold(0.0, f64::min);
    let mut trace = ClosedFormTrace {
        case: 3,
        deviations: deviations.clone(),
        partial_sums,
        c_star: Some(c_star),
        c_substar: Some(c_substar),
        ..Default::default()
    };
    let spread = c_star + c_substar;
    if spread <= ZERO_DEVIATION {
        trace.b_values = vec![0.0; ny];
        return Ok((from_residual(cpd, grouping, &layout, 1.0, None)?, trace));
    }
    let alpha = 1.0 - spread / 2.0;
    let mut b = Vec::with_capacity(ny);
    b.push((c_star - c_substar) / spread);
    for a in &deviations {
        let last = *b.last().expect("nonempty");
        b.push((last - a / (1.0 - alpha)).clamp(-1.0, 1.0));
    }
    let mut residual = vec![0.0; cpd.values().len()];
    for (k, &bk) in b.iter().enumerate() {
        let hi = row(0, k);
        let lo = row(1, k);
        residual[hi * 2] = bk.max(0.0);
        residual[hi * 2 + 1] = 1.0 - bk.max(0.0);
        residual[lo * 2] = (-bk).max(0.0);
        residual[lo * 2 + 1] = 1.0 - (-bk).max(0.0);
    }
    trace.b_values = b;
    let d = from_residual(cpd, grouping, &layout, alpha, Some(&residual))?;
    Ok((d, trace))
}
