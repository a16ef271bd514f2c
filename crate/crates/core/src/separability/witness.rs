use serde::Serialize;

use super::{Grouping, Layout};
use crate::error::{Error, Result};
use crate::prob::{Categorical, Cpd};

/// Two parent joints with identical group marginals but different child
/// distributions, showing the groups are not sufficient for the child.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    #[serde(skip)]
    pub pi1: Categorical,
    #[serde(skip)]
    pub pi2: Categorical,
    /// Child distribution under `pi1`.
    pub phi1: Vec<f64>,
    /// Child distribution under `pi2`.
    pub phi2: Vec<f64>,
    pub max_difference: f64,
}

/// Contrasts below this count as zero.
const CONTRAST_TOL: f64 = 1e-9;

/// Searches every 2×2 block of group values. On a block, moving mass from the
/// uniform joint onto the matched diagonal keeps both marginals and changes
/// the child distribution by a quarter of the block's interaction contrast.
/// All contrasts vanish exactly when the table is additive.
pub fn sufficiency_witness(cpd: &Cpd, grouping: &Grouping) -> Result<Option<Witness>> {
    let layout = Layout::new(cpd, grouping)?;
    if grouping.len() != 2 {
        return Err(Error::UnsupportedShape {
            method: "sufficiency witness",
            reason: format!("needs two parent groups, found {}", grouping.len()),
        });
    }
    let n = layout.child_size;
    let sizes = layout.group_sizes();
    let rows = layout.pair_rows();
    let mut best: Option<(f64, [usize; 4])> = None;
    for x in 0..sizes[0] {
        for x2 in x + 1..sizes[0] {
            for y in 0..sizes[1] {
                for y2 in y + 1..sizes[1] {
                    let cells = [rows[x][y], rows[x][y2], rows[x2][y], rows[x2][y2]];
                    let contrast = (0..n)
                        .map(|z| {
                            (cpd.prob(cells[3], z) - cpd.prob(cells[2], z) - cpd.prob(cells[1], z)
                                + cpd.prob(cells[0], z))
                                .abs()
                        })
                        .fold(0.0, f64::max);
                    if best.is_none_or(|(c, _)| contrast > c) {
                        best = Some((contrast, cells));
                    }
                }
            }
        }
    }
    let Some((contrast, cells)) = best else {
        return Ok(None);
    };
    if contrast <= CONTRAST_TOL {
        return Ok(None);
    }
    let size = cpd.parents().size();
    let mut w1 = vec![0.0; size];
    let mut w2 = vec![0.0; size];
    for &c in &cells {
        w1[c] = 0.25;
    }
    w2[cells[0]] = 0.5;
    w2[cells[3]] = 0.5;
    let phi = |w: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|z| w.iter().enumerate().map(|(r, p)| p * cpd.prob(r, z)).sum())
            .collect()
    };
    let phi1 = phi(&w1);
    let phi2 = phi(&w2);
    let max_difference = phi1
        .iter()
        .zip(&phi2)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(Some(Witness {
        pi1: Categorical::new(cpd.parents().clone(), w1)?,
        pi2: Categorical::new(cpd.parents().clone(), w2)?,
        phi1,
        phi2,
        max_difference,
    }))
}
