use serde::Serialize;

use crate::error::{Error, Result};
use crate::prob::{linf_values, Cpd, Scope};

/// `P = κ·I + (1 − κ)·R` where `I` copies the previous value of the child.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PersistenceResult {
    pub kappa: f64,
    #[serde(skip)]
    pub identity: Cpd,
    /// Absent when `κ = 1`.
    #[serde(skip)]
    pub residual: Option<Cpd>,
}

impl PersistenceResult {
    /// Max-norm distance between `κ·I + (1 − κ)·R` and `cpd`.
    pub fn reconstruction_error(&self, cpd: &Cpd) -> Result<f64> {
        let own = previous_position(cpd)?;
        let n = cpd.child_size();
        let mut out = Vec::with_capacity(cpd.values().len());
        for r in 0..cpd.num_rows() {
            let prev = cpd.parents().assignment(r)[own];
            for z in 0..n {
                let mut v = self.kappa * self.identity.prob(prev, z);
                if let Some(res) = &self.residual {
                    v += (1.0 - self.kappa) * res.prob(r, z);
                }
                out.push(v);
            }
        }
        Ok(linf_values(&out, cpd.values()))
    }
}

fn previous_position(cpd: &Cpd) -> Result<usize> {
    let child = &cpd.child()[0];
    let name = format!("{}-", child.name);
    let reason = |r: String| Error::UnsupportedShape {
        method: "persistence",
        reason: r,
    };
    if cpd.child().len() != 1 {
        return Err(reason("needs a single child variable".into()));
    }
    let pos = cpd
        .parents()
        .position(&name)
        .ok_or_else(|| reason(format!("`{name}` is not a parent")))?;
    if cpd.parents()[pos].card != child.card {
        return Err(reason(format!(
            "`{name}` has {} values but `{}` has {}",
            cpd.parents()[pos].card,
            child.name,
            child.card
        )));
    }
    Ok(pos)
}

/// Largest `κ` with `P(x | x⁻, …) ≥ κ` whenever `x = x⁻`, and the matching residual.
pub fn persistence(cpd: &Cpd) -> Result<PersistenceResult> {
    let own = previous_position(cpd)?;
    let n = cpd.child_size();
    let prev_of: Vec<usize> = (0..cpd.num_rows())
        .map(|r| cpd.parents().assignment(r)[own])
        .collect();
    let kappa = prev_of
        .iter()
        .enumerate()
        .map(|(r, &p)| cpd.prob(r, p))
        .fold(f64::INFINITY, f64::min);

    let identity = Cpd::new(
        cpd.child().clone(),
        Scope::new(vec![cpd.parents()[own].clone()])?,
        (0..n).map(|p| (0..n).map(|x| f64::from(u8::from(x == p))).collect()).collect(),
    )?;
    let residual = if 1.0 - kappa <= 1e-12 {
        None
    } else {
        let rows = prev_of
            .iter()
            .enumerate()
            .map(|(r, &p)| {
                (0..n)
                    .map(|x| {
                        let v = cpd.prob(r, x) - if x == p { kappa } else { 0.0 };
                        (v / (1.0 - kappa)).max(0.0)
                    })
                    .collect()
            })
            .collect();
        Some(Cpd::new(cpd.child().clone(), cpd.parents().clone(), rows)?)
    };
    Ok(PersistenceResult {
        kappa,
        identity,
        residual,
    })
}
