//! Degree of separability of conditional probability tables.
//!
//! A CPD `P(Z | parents)` with parents partitioned into groups is
//! `α`-separable when
//!
//! ```text
//! P = Σ_g w_g · P_g(Z | group g) + (1 − α) · R(Z | parents),   Σ_g w_g = α,
//! ```
//!
//! with every `P_g` and `R` a valid CPD. Group weights may be negative; only
//! the residual weight `1 − α` is constrained to be nonnegative. The degree
//! of separability is the largest such `α`.

mod closed_form;
mod lp;
mod persistence;
pub(crate) mod simplex;
mod search;
mod witness;

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::prob::{Cpd, Scope};

pub use closed_form::{degree_case1, degree_case2, degree_case3, ClosedFormTrace};
pub use lp::{degree, degree_lp, MAX_GROUPS};
pub use persistence::{persistence, PersistenceResult};
pub use search::{
    is_self_sufficient, search_factorization, variable_degrees, Granularity, RankedFactorization,
    SelfSufficiency, MAX_SEARCH_VARIABLES,
};
pub use witness::{sufficiency_witness, Witness};

/// Residual weights below this are treated as zero.
pub(crate) const RESIDUAL_TOL: f64 = 1e-9;

/// Ordered partition of a CPD's parents.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Grouping {
    groups: Vec<Vec<String>>,
}

impl Grouping {
    pub fn new<S: Into<String>>(groups: Vec<Vec<S>>) -> Self {
        Self {
            groups: groups
                .into_iter()
                .map(|g| g.into_iter().map(Into::into).collect())
                .collect(),
        }
    }

    /// Each parent in its own group.
    pub fn singletons(parents: &Scope) -> Self {
        Self::new(parents.iter().map(|v| vec![v.name.clone()]).collect())
    }

    /// Parses `"X-,W-|Y-,Z-"` against a parent scope. Names resolve exactly
    /// first, then with the trailing `-` removed or added.
    pub fn parse(text: &str, parents: &Scope) -> Result<Self> {
        let mut groups = Vec::new();
        for part in text.split('|') {
            let mut group = Vec::new();
            for token in part.split(',').map(str::trim) {
                if token.is_empty() {
                    return Err(Error::InvalidGrouping(format!("empty name in `{text}`")));
                }
                group.push(resolve(token, parents)?);
            }
            groups.push(group);
        }
        let g = Self { groups };
        g.validate(parents)?;
        Ok(g)
    }

    pub fn groups(&self) -> &[Vec<String>] {
        &self.groups
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn swapped(&self) -> Self {
        let mut groups = self.groups.clone();
        groups.reverse();
        Self { groups }
    }

    /// Checks that the groups partition `parents` into at least two parts.
    pub fn validate(&self, parents: &Scope) -> Result<()> {
        if self.groups.len() < 2 {
            return Err(Error::InvalidGrouping(
                "at least two parent groups are required".into(),
            ));
        }
        let mut seen = vec![false; parents.len()];
        for g in &self.groups {
            if g.is_empty() {
                return Err(Error::InvalidGrouping("empty group".into()));
            }
            for name in g {
                let p = parents
                    .position(name)
                    .ok_or_else(|| Error::UnknownVariable(name.clone()))?;
                if std::mem::replace(&mut seen[p], true) {
                    return Err(Error::InvalidGrouping(format!(
                        "`{name}` appears in more than one group"
                    )));
                }
            }
        }
        if let Some(p) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidGrouping(format!(
                "parent `{}` is not in any group",
                parents[p].name
            )));
        }
        Ok(())
    }
}

impl fmt::Display for Grouping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.groups.iter().map(|g| g.join(",")).collect();
        write!(f, "{}", parts.join("|"))
    }
}

fn resolve(token: &str, parents: &Scope) -> Result<String> {
    if parents.position(token).is_some() {
        return Ok(token.to_string());
    }
    let alternative = match token.strip_suffix('-') {
        Some(stripped) => stripped.to_string(),
        None => format!("{token}-"),
    };
    if parents.position(&alternative).is_some() {
        return Ok(alternative);
    }
    Err(Error::UnknownVariable(token.to_string()))
}

/// Index bookkeeping for a CPD under a grouping.
#[derive(Clone, Debug)]
pub(crate) struct Layout {
    pub child_size: usize,
    pub num_rows: usize,
    pub group_scopes: Vec<Scope>,
    /// `[g][row]`: index of the group-`g` assignment within parent row `row`
    pub row_group: Vec<Vec<usize>>,
}

impl Layout {
    pub fn new(cpd: &Cpd, grouping: &Grouping) -> Result<Self> {
        grouping.validate(cpd.parents())?;
        let parents = cpd.parents();
        let mut group_scopes = Vec::new();
        let mut row_group = Vec::new();
        for g in grouping.groups() {
            let positions: Vec<usize> = g
                .iter()
                .map(|n| parents.position(n).expect("validated"))
                .collect();
            group_scopes.push(parents.select(g)?);
            row_group.push(parents.projection_map(&positions));
        }
        Ok(Self {
            child_size: cpd.child_size(),
            num_rows: cpd.num_rows(),
            group_scopes,
            row_group,
        })
    }

    pub fn group_sizes(&self) -> Vec<usize> {
        self.group_scopes.iter().map(Scope::size).collect()
    }

    /// For two groups, the parent row of each `(x, y)` group pair.
    pub fn pair_rows(&self) -> Vec<Vec<usize>> {
        let sizes = self.group_sizes();
        let mut out = vec![vec![0; sizes[1]]; sizes[0]];
        for r in 0..self.num_rows {
            out[self.row_group[0][r]][self.row_group[1][r]] = r;
        }
        out
    }
}

/// A decomposition `P = Σ_g w_g·P_g + (1 − α)·R`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeparableDecomposition {
    pub alpha: f64,
    #[serde(skip)]
    pub grouping: Grouping,
    pub group_weights: Vec<f64>,
    #[serde(skip)]
    pub components: Vec<Cpd>,
    pub residual_weight: f64,
    #[serde(skip)]
    pub residual: Option<Cpd>,
    /// Whether the maximum is attained with every group weight nonnegative,
    /// i.e. with a mixing coefficient inside `[0, 1]`.
    pub unit_weights: bool,
}

impl SeparableDecomposition {
    /// `w_1 / α` for two groups.
    pub fn gamma(&self) -> Option<f64> {
        (self.group_weights.len() == 2 && self.alpha > 0.0).then(|| self.group_weights[0] / self.alpha)
    }

    /// Cellwise `Σ_g w_g·P_g + (1 − α)·R` laid out like `cpd`.
    pub fn recombine(&self, cpd: &Cpd) -> Result<Vec<f64>> {
        let layout = Layout::new(cpd, &self.grouping)?;
        let n = layout.child_size;
        let mut out = vec![0.0; cpd.values().len()];
        for r in 0..layout.num_rows {
            for z in 0..n {
                let mut v: f64 = self
                    .components
                    .iter()
                    .zip(&self.group_weights)
                    .zip(&layout.row_group)
                    .map(|((c, w), map)| w * c.prob(map[r], z))
                    .sum();
                if let Some(res) = &self.residual {
                    v += self.residual_weight * res.prob(r, z);
                }
                out[r * n + z] = v;
            }
        }
        Ok(out)
    }

    /// Max-norm distance between the recombination and `cpd`.
    pub fn recombination_error(&self, cpd: &Cpd) -> Result<f64> {
        Ok(crate::prob::linf_values(&self.recombine(cpd)?, cpd.values()))
    }
}

/// Builds a decomposition from the separable parts `u[g][jg·n + z] = w_g·P_g(z | jg)`.
pub(crate) fn assemble(
    cpd: &Cpd,
    grouping: &Grouping,
    layout: &Layout,
    parts: &[Vec<f64>],
    unit_weights: bool,
) -> Result<SeparableDecomposition> {
    let n = layout.child_size;
    let group_weights: Vec<f64> = parts.iter().map(|u| u[..n].iter().sum()).collect();
    let alpha: f64 = group_weights.iter().sum();
    let residual_weight = 1.0 - alpha;
    if residual_weight < -1e-9 {
        return Err(Error::Internal(format!("separable weight {alpha} exceeds one")));
    }

    let components = parts
        .iter()
        .zip(&group_weights)
        .zip(&layout.group_scopes)
        .map(|((u, &w), scope)| {
            let rows = u
                .chunks(n)
                .map(|row| {
                    if w.abs() < 1e-12 {
                        return vec![1.0 / n as f64; n];
                    }
                    normalize_row(row.iter().map(|v| v / w).collect())
                })
                .collect();
            Cpd::new(cpd.child().clone(), scope.clone(), rows)
        })
        .collect::<Result<Vec<_>>>()?;

    let residual = if residual_weight < RESIDUAL_TOL {
        None
    } else {
        let rows = (0..layout.num_rows)
            .map(|r| {
                let row = (0..n)
                    .map(|z| {
                        let sep: f64 = parts
                            .iter()
                            .zip(&layout.row_group)
                            .map(|(u, map)| u[map[r] * n + z])
                            .sum();
                        (cpd.prob(r, z) - sep) / residual_weight
                    })
                    .collect();
                normalize_row(row)
            })
            .collect();
        Some(Cpd::new(cpd.child().clone(), cpd.parents().clone(), rows)?)
    };

    Ok(SeparableDecomposition {
        alpha,
        grouping: grouping.clone(),
        group_weights,
        components,
        residual_weight: residual_weight.max(0.0),
        residual,
        unit_weights,
    })
}

/// Clamps solver noise below zero and renormalizes.
fn normalize_row(mut row: Vec<f64>) -> Vec<f64> {
    row.iter_mut().for_each(|v| *v = v.max(0.0));
    let total: f64 = row.iter().sum();
    if total <= 0.0 {
        let n = row.len();
        return vec![1.0 / n as f64; n];
    }
    row.iter_mut().for_each(|v| *v /= total);
    row
}

/// Splits an additive two-group table `s(z | x, y)` (rows summing to one) into
/// `γ·p(z | x) + (1 − γ)·q(z | y)` with `p`, `q` valid. Returns
/// `(γ, p, q, convex)` where `convex` means `γ ∈ [0, 1]`.
pub(crate) fn split_additive(s: &[Vec<Vec<f64>>]) -> (f64, Vec<Vec<f64>>, Vec<Vec<f64>>, bool) {
    let nx = s.len();
    let ny = s[0].len();
    let nz = s[0][0].len();
    let col = |z: usize| -> (f64, f64, f64, f64) {
        let min_x = (0..nx).map(|x| s[x][0][z]).fold(f64::INFINITY, f64::min);
        let min_y = (0..ny).map(|y| s[0][y][z]).fold(f64::INFINITY, f64::min);
        let max_y = (0..ny).map(|y| s[0][y][z]).fold(f64::NEG_INFINITY, f64::max);
        (min_x, min_y, max_y, s[0][0][z])
    };
    let convex = s.iter().flatten().flatten().all(|&v| v >= -1e-12);
    let c: Vec<f64> = if convex {
        // a group with no effect gets zero weight
        let range = |vals: &mut dyn Iterator<Item = f64>| {
            let v: Vec<f64> = vals.collect();
            v.iter().copied().fold(f64::NEG_INFINITY, f64::max) - v.iter().copied().fold(f64::INFINITY, f64::min)
        };
        let rx: f64 = (0..nz).map(|z| range(&mut (0..nx).map(|x| s[x][0][z]))).sum();
        let ry: f64 = (0..nz).map(|z| range(&mut (0..ny).map(|y| s[0][y][z]))).sum();
        let t = if rx + ry <= 1e-15 { 0.5 } else { ry / (rx + ry) };
        (0..nz)
            .map(|z| {
                let (min_x, min_y, _, base) = col(z);
                let lo = base - min_y;
                let hi = min_x;
                lo + t * (hi - lo).max(0.0)
            })
            .collect()
    } else {
        // γ > 1: p ≥ 0 needs c ≤ min_x; q ≤ 0 needs c ≤ base − max_y; Σc < 0
        let bounds: Vec<f64> = (0..nz)
            .map(|z| {
                let (min_x, _, max_y, base) = col(z);
                min_x.min(base - max_y)
            })
            .collect();
        let shift = (bounds.iter().sum::<f64>() / nz as f64).max(0.0) + 0.5;
        bounds.iter().map(|b| b - shift).collect()
    };
    let gamma = 1.0 - c.iter().sum::<f64>();
    let scale = |v: Vec<f64>, w: f64| -> Vec<f64> {
        if w.abs() < 1e-12 {
            vec![1.0 / nz as f64; nz]
        } else {
            normalize_row(v.into_iter().map(|a| a / w).collect())
        }
    };
    let p = (0..nx)
        .map(|x| scale((0..nz).map(|z| s[x][0][z] - c[z]).collect(), gamma))
        .collect();
    let q = (0..ny)
        .map(|y| scale((0..nz).map(|z| s[0][y][z] - s[0][0][z] + c[z]).collect(), 1.0 - gamma))
        .collect();
    (gamma, p, q, convex)
}

/// Decomposition for two groups given the residual table `r[row·n + z]`
/// (a valid CPD) and its weight `1 − α`.
pub(crate) fn from_residual(
    cpd: &Cpd,
    grouping: &Grouping,
    layout: &Layout,
    alpha: f64,
    residual: Option<&[f64]>,
) -> Result<SeparableDecomposition> {
    let n = layout.child_size;
    let sizes = layout.group_sizes();
    let pairs = layout.pair_rows();
    let sep = |r: usize, z: usize| -> f64 {
        let res = residual.map_or(0.0, |t| t[r * n + z]);
        cpd.prob(r, z) - (1.0 - alpha) * res
    };
    let parts = if alpha <= 1e-12 {
        vec![vec![0.0; sizes[0] * n], vec![0.0; sizes[1] * n]]
    } else {
        let s: Vec<Vec<Vec<f64>>> = pairs
            .iter()
            .map(|ys| ys.iter().map(|&r| (0..n).map(|z| sep(r, z) / alpha).collect()).collect())
            .collect();
        let (gamma, p, q, _) = split_additive(&s);
        let flat = |rows: Vec<Vec<f64>>, w: f64| -> Vec<f64> {
            rows.into_iter().flatten().map(|v| v * w).collect()
        };
        vec![flat(p, alpha * gamma), flat(q, alpha * (1.0 - gamma))]
    };
    let unit = parts.iter().all(|u| u[..n].iter().sum::<f64>() >= -1e-12);
    let mut d = assemble(cpd, grouping, layout, &parts, unit)?;
    // keep the closed-form residual exactly rather than the reconstructed one
    if let (Some(t), Some(_)) = (residual, &d.residual) {
        d.residual = Some(Cpd::new(
            cpd.child().clone(),
            cpd.parents().clone(),
            t.chunks(n).map(<[f64]>::to_vec).collect(),
        )?);
        d.residual_weight = 1.0 - alpha;
    }
    d.alpha = alpha;
    Ok(d)
}

/// Which algorithm computes the degree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Method {
    Auto,
    Lp,
    Case1,
    Case2,
    Case3,
    Persistence,
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "auto" => Method::Auto,
            "lp" => Method::Lp,
            "case1" => Method::Case1,
            "case2" => Method::Case2,
            "case3" => Method::Case3,
            "persistence" => Method::Persistence,
            _ => return Err(Error::InvalidArgument(format!("unknown method `{s}`"))),
        })
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Auto => "auto",
            Method::Lp => "lp",
            Method::Case1 => "case1",
            Method::Case2 => "case2",
            Method::Case3 => "case3",
            Method::Persistence => "persistence",
        })
    }
}

/// The closed form matching the shape of `cpd` under `grouping`, if any.
pub fn closed_form_for(cpd: &Cpd, grouping: &Grouping) -> Option<Method> {
    let layout = Layout::new(cpd, grouping).ok()?;
    let sizes = layout.group_sizes();
    if sizes.len() != 2 {
        return None;
    }
    let binary_groups = sizes.iter().filter(|&&s| s == 2).count();
    match (layout.child_size, binary_groups) {
        (2, 2) => Some(Method::Case1),
        (_, 2) => Some(Method::Case2),
        (2, 1) => Some(Method::Case3),
        _ => None,
    }
}

/// Result of [`analyze`].
#[derive(Clone, Debug)]
pub struct Analysis {
    /// The method actually used.
    pub method: Method,
    pub decomposition: Option<SeparableDecomposition>,
    pub trace: Option<ClosedFormTrace>,
    pub persistence: Option<PersistenceResult>,
    /// Degree found by the linear program when cross-checking a closed form.
    pub lp_alpha: Option<f64>,
}

impl Analysis {
    pub fn alpha(&self) -> Option<f64> {
        self.decomposition.as_ref().map(|d| d.alpha)
    }

    /// `|α_closed − α_LP|` when both were computed.
    pub fn discrepancy(&self) -> Option<f64> {
        Some((self.alpha()? - self.lp_alpha?).abs())
    }
}

/// Runs `method` (dispatching `Auto` to a closed form when the shape fits,
/// else the LP). With `verify`, closed forms are cross-checked by the LP.
pub fn analyze(cpd: &Cpd, grouping: Option<&Grouping>, method: Method, verify: bool) -> Result<Analysis> {
    if method == Method::Persistence {
        let p = persistence(cpd)?;
        let lp_alpha = match (verify, grouping) {
            (true, Some(g)) => Some(degree(cpd, g)?),
            _ => None,
        };
        return Ok(Analysis {
            method,
            decomposition: None,
            trace: None,
            persistence: Some(p),
            lp_alpha,
        });
    }
    let default;
    let grouping = match grouping {
        Some(g) => g,
        None => {
            default = Grouping::singletons(cpd.parents());
            &default
        }
    };
    let resolved = match method {
        Method::Auto => closed_form_for(cpd, grouping).unwrap_or(Method::Lp),
        m => m,
    };
    let (decomposition, trace) = match resolved {
        Method::Lp => (degree_lp(cpd, grouping)?, None),
        Method::Case1 => {
            let (d, t) = degree_case1(cpd, grouping)?;
            (d, Some(t))
        }
        Method::Case2 => {
            let (d, t) = degree_case2(cpd, grouping)?;
            (d, Some(t))
        }
        Method::Case3 => {
            let (d, t) = degree_case3(cpd, grouping)?;
            (d, Some(t))
        }
        Method::Auto | Method::Persistence => unreachable!("resolved above"),
    };
    let lp_alpha = if verify && resolved != Method::Lp {
        Some(degree(cpd, grouping)?)
    } else {
        None
    };
    Ok(Analysis {
        method: resolved,
        decomposition: Some(decomposition),
        trace,
        persistence: None,
        lp_alpha,
    })
}
