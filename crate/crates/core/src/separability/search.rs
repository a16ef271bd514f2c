//! Self-sufficiency checks and exhaustive factorization search.

use std::collections::HashMap;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::Serialize;

use super::{degree, Grouping, MAX_GROUPS};
use crate::error::{Error, Result};
use crate::model::{factor_transition_cpd, DbnModel, Factorization};

/// Largest model accepted by [`search_factorization`].
pub const MAX_SEARCH_VARIABLES: usize = 10;

/// Which CPDs are scored for a factorization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Granularity {
    /// The joint transition CPD of each factor (the condition for exact
    /// factored prediction).
    Factor,
    /// Each state variable's own transition CPD, with parents grouped by the
    /// factor they belong to.
    Variable,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SelfSufficiency {
    /// One degree per factor.
    pub degrees: Vec<f64>,
    pub self_sufficient: bool,
}

fn factor_groups(model: &DbnModel, f: &Factorization, i: usize) -> Vec<Vec<String>> {
    model
        .referenced_factors(f, i)
        .into_iter()
        .map(|g| {
            f.factors()[g]
                .iter()
                .map(|&v| model.state()[v].previous().name)
                .collect()
        })
        .collect()
}

fn variable_groups(model: &DbnModel, f: &Factorization, v: usize) -> Vec<Vec<String>> {
    let cpd = &model.transitions()[v];
    let mut groups: Vec<(usize, Vec<String>)> = Vec::new();
    for (p, name) in model.parent_indices(v).into_iter().zip(cpd.parents().names()) {
        let k = f.factor_of(p);
        match groups.iter_mut().find(|(g, _)| *g == k) {
            Some((_, names)) => names.push(name.to_string()),
            None => groups.push((k, vec![name.to_string()])),
        }
    }
    groups.sort_by_key(|(k, _)| *k);
    groups.into_iter().map(|(_, g)| g).collect()
}

fn grouped_degree(cpd: &crate::prob::Cpd, groups: Vec<Vec<String>>) -> Result<f64> {
    if groups.len() < 2 {
        return Ok(1.0);
    }
    if groups.len() > MAX_GROUPS {
        return Err(Error::UnsupportedArity {
            groups: groups.len(),
            max: MAX_GROUPS,
        });
    }
    degree(cpd, &Grouping::new(groups))
}

fn factor_degree(model: &DbnModel, f: &Factorization, i: usize) -> Result<f64> {
    let groups = factor_groups(model, f, i);
    if groups.len() < 2 {
        return Ok(1.0);
    }
    grouped_degree(&factor_transition_cpd(model, f, i)?, groups)
}

/// Degree of each factor's joint transition CPD with parents grouped by
/// previous-slice factor.
pub fn is_self_sufficient(model: &DbnModel, factorization: &Factorization, tol: f64) -> Result<SelfSufficiency> {
    let degrees = (0..factorization.len())
        .map(|i| factor_degree(model, factorization, i))
        .collect::<Result<Vec<_>>>()?;
    let self_sufficient = degrees.iter().all(|&d| d >= 1.0 - tol);
    Ok(SelfSufficiency {
        degrees,
        self_sufficient,
    })
}

/// Degree of each state variable's transition CPD with parents grouped by
/// the factor they belong to.
pub fn variable_degrees(model: &DbnModel, factorization: &Factorization) -> Result<Vec<f64>> {
    (0..model.state().len())
        .map(|v| grouped_degree(&model.transitions()[v], variable_groups(model, factorization, v)))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankedFactorization {
    #[serde(skip)]
    pub factorization: Factorization,
    pub label: String,
    pub degrees: Vec<f64>,
    pub min_degree: f64,
    pub mean_degree: f64,
}

/// Set partitions of `0..n` with parts of at most `max` elements, blocks
/// ordered by their smallest element.
fn partitions(n: usize, max: usize) -> Vec<Vec<Vec<usize>>> {
    fn go(i: usize, n: usize, max: usize, blocks: &mut Vec<Vec<usize>>, out: &mut Vec<Vec<Vec<usize>>>) {
        if i == n {
            out.push(blocks.clone());
            return;
        }
        for b in 0..blocks.len() {
            if blocks[b].len() < max {
                blocks[b].push(i);
                go(i + 1, n, max, blocks, out);
                blocks[b].pop();
            }
        }
        blocks.push(vec![i]);
        go(i + 1, n, max, blocks, out);
        blocks.pop();
    }
    let mut out = Vec::new();
    go(0, n, max.max(1), &mut Vec::new(), &mut out);
    out
}

/// Scores every partition of the state variables with parts of at most
/// `max_factor_size` and returns them best first: by minimum degree, then
/// mean degree, then more factors. Partitions with a CPD of more than
/// [`MAX_GROUPS`] parent groups are skipped.
pub fn search_factorization(
    model: &DbnModel,
    max_factor_size: usize,
    granularity: Granularity,
) -> Result<Vec<RankedFactorization>> {
    let n = model.state().len();
    if n > MAX_SEARCH_VARIABLES {
        return Err(Error::EnumerationGuard(format!(
            "the model has {n} state variables but factorization search supports at most \
             {MAX_SEARCH_VARIABLES}; split the model or search a sub-model"
        )));
    }
    let cache: Mutex<HashMap<(usize, Vec<Vec<String>>), f64>> = Mutex::new(HashMap::new());
    let lookup = |key: (usize, Vec<Vec<String>>), compute: &dyn Fn() -> Result<f64>| -> Result<f64> {
        if let Some(&d) = cache.lock().expect("cache lock").get(&key) {
            return Ok(d);
        }
        let d = compute()?;
        cache.lock().expect("cache lock").insert(key, d);
        Ok(d)
    };

    let scored: Vec<Option<RankedFactorization>> = partitions(n, max_factor_size)
        .into_par_iter()
        .map(|blocks| -> Result<Option<RankedFactorization>> {
            let f = Factorization::new(n, blocks)?;
            let degrees: Result<Vec<f64>> = match granularity {
                Granularity::Factor => (0..f.len())
                    .map(|i| {
                        let groups = factor_groups(model, &f, i);
                        // keyed by the factor's first member, its size and the parent groups
                        let mut key_groups = groups.clone();
                        key_groups.push(f.factors()[i].iter().map(|v| v.to_string()).collect());
                        lookup((f.factors()[i][0], key_groups), &|| factor_degree(model, &f, i))
                    })
                    .collect(),
                Granularity::Variable => (0..n)
                    .map(|v| {
                        let groups = variable_groups(model, &f, v);
                        lookup((v, groups.clone()), &|| {
                            grouped_degree(&model.transitions()[v], groups.clone())
                        })
                    })
                    .collect(),
            };
            let degrees = match degrees {
                Ok(d) => d,
                Err(Error::UnsupportedArity { .. }) => return Ok(None),
                Err(e) => return Err(e),
            };
            let min_degree = degrees.iter().copied().fold(f64::INFINITY, f64::min);
            let mean_degree = degrees.iter().sum::<f64>() / degrees.len() as f64;
            Ok(Some(RankedFactorization {
                label: f.display(model.state()),
                factorization: f,
                degrees,
                min_degree,
                mean_degree,
            }))
        })
        .collect::<Result<_>>()?;

    let mut ranked: Vec<RankedFactorization> = scored.into_iter().flatten().collect();
    // degrees within solver noise count as ties
    let q = |x: f64| (x * 1e9).round() as i64;
    ranked.sort_by(|a, b| {
        q(b.min_degree)
            .cmp(&q(a.min_degree))
            .then(q(b.mean_degree).cmp(&q(a.mean_degree)))
            .then(b.factorization.len().cmp(&a.factorization.len()))
            .then(a.label.cmp(&b.label))
    });
    Ok(ranked)
}
