//! Exact discrete-probability kernel.
//!
//! Tables are flat arrays indexed lexicographically over an ordered scope,
//! with the last variable varying fastest. Every [`Categorical`] produced here
//! is nonnegative and sums to one within [`NORMALIZATION_TOL`].

use std::fmt;
use std::ops::Deref;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the total mass of a normalized table.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Rounding error of a sum of `n` normalized entries.
fn rounding_slack(n: usize) -> f64 {
    n as f64 * f64::EPSILON
}

/// A discrete variable with a fixed number of values.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub card: usize,
}

impl Variable {
    pub fn new(name: impl Into<String>, card: usize) -> Result<Self> {
        let name = name.into();
        if name.is_empty() {
            return Err(Error::InvalidVariable {
                name,
                reason: "empty name".into(),
            });
        }
        if card < 2 {
            return Err(Error::InvalidVariable {
                name,
                reason: format!("cardinality {card} < 2"),
            });
        }
        Ok(Self { name, card })
    }

    pub fn binary(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            card: 2,
        }
    }

    /// The previous-slice copy of this variable (`X` becomes `X-`).
    pub fn previous(&self) -> Self {
        Self {
            name: format!("{}-", self.name),
            card: self.card,
        }
    }
}

/// An ordered list of distinct variables. Cheap to clone.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Scope(Arc<[Variable]>);

impl Scope {
    pub fn new(vars: Vec<Variable>) -> Result<Self> {
        for (i, v) in vars.iter().enumerate() {
            if v.card < 2 {
                return Err(Error::InvalidVariable {
                    name: v.name.clone(),
                    reason: format!("cardinality {} < 2", v.card),
                });
            }
            if vars[..i].iter().any(|w| w.name == v.name) {
                return Err(Error::DuplicateVariable(v.name.clone()));
            }
        }
        Ok(Self(vars.into()))
    }

    pub fn empty() -> Self {
        Self(Vec::new().into())
    }

    pub fn vars(&self) -> &[Variable] {
        &self.0
    }

    /// Number of joint assignments.
    pub fn size(&self) -> usize {
        self.0.iter().map(|v| v.card).product()
    }

    pub fn cards(&self) -> Vec<usize> {
        self.0.iter().map(|v| v.card).collect()
    }

    pub fn names(&self) -> Vec<&str> {
        self.0.iter().map(|v| v.name.as_str()).collect()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.0.iter().position(|v| v.name == name)
    }

    pub fn get(&self, name: &str) -> Option<&Variable> {
        self.0.iter().find(|v| v.name == name)
    }

    /// Row-major strides (last variable has stride 1).
    pub fn strides(&self) -> Vec<usize> {
        strides(&self.cards())
    }

    pub fn index_of(&self, assignment: &[usize]) -> usize {
        debug_assert_eq!(assignment.len(), self.len());
        assignment
            .iter()
            .zip(self.0.iter())
            .fold(0, |acc, (&a, v)| acc * v.card + a)
    }

    pub fn assignment(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.len()];
        for (slot, v) in out.iter_mut().zip(self.0.iter()).rev() {
            *slot = index % v.card;
            index /= v.card;
        }
        out
    }

    /// Concatenation of two disjoint scopes.
    pub fn concat(&self, other: &Scope) -> Result<Scope> {
        if let Some(v) = other.0.iter().find(|v| self.position(&v.name).is_some()) {
            return Err(Error::OverlappingScopes(v.name.clone()));
        }
        let mut vars = self.0.to_vec();
        vars.extend(other.0.iter().cloned());
        Ok(Scope(vars.into()))
    }

    /// Sub-scope made of the named variables, in the order given.
    pub fn select<S: AsRef<str>>(&self, names: &[S]) -> Result<Scope> {
        let vars = names
            .iter()
            .map(|n| {
                self.get(n.as_ref())
                    .cloned()
                    .ok_or_else(|| Error::UnknownVariable(n.as_ref().to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        Scope::new(vars)
    }

    /// For every flat index of `self`, the flat index of the restriction of
    /// that assignment to the variables at `positions` (in that order).
    pub fn projection_map(&self, positions: &[usize]) -> Vec<usize> {
        let cards = self.cards();
        let sub_strides = strides(&positions.iter().map(|&p| cards[p]).collect::<Vec<_>>());
        // stride of each full-scope variable inside the sub-scope (0 if absent)
        let mut weight = vec![0; cards.len()];
        for (k, &p) in positions.iter().enumerate() {
            weight[p] = sub_strides[k];
        }
        let mut out = Vec::with_capacity(self.size());
        let mut digits = vec![0usize; cards.len()];
        let mut current = 0usize;
        for _ in 0..self.size() {
            out.push(current);
            // odometer increment, last variable fastest
            for d in (0..cards.len()).rev() {
                digits[d] += 1;
                current += weight[d];
                if digits[d] < cards[d] {
                    break;
                }
                current -= weight[d] * cards[d];
                digits[d] = 0;
            }
        }
        out
    }

    fn describe(&self) -> String {
        self.0
            .iter()
            .map(|v| format!("{}:{}", v.name, v.card))
            .collect::<Vec<_>>()
            .join(", ")
    }
}

impl Deref for Scope {
    type Target = [Variable];
    fn deref(&self) -> &[Variable] {
        &self.0
    }
}

impl fmt::Debug for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Scope[{}]", self.describe())
    }
}

pub(crate) fn strides(cards: &[usize]) -> Vec<usize> {
    let mut s = vec![1; cards.len()];
    for i in (0..cards.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * cards[i + 1];
    }
    s
}

fn scope_mismatch(expected: &Scope, found: &Scope) -> Error {
    Error::ScopeMismatch {
        expected: expected.describe(),
        found: found.describe(),
    }
}

/// Shared read access to scoped tables.
pub trait Table {
    fn scope(&self) -> &Scope;
    fn values(&self) -> &[f64];
}

/// A normalized probability table over an ordered scope.
#[derive(Clone, Debug, PartialEq)]
pub struct Categorical {
    scope: Scope,
    values: Vec<f64>,
}

impl Table for Categorical {
    fn scope(&self) -> &Scope {
        &self.scope
    }
    fn values(&self) -> &[f64] {
        &self.values
    }
}

impl Categorical {
    /// Validates a table. Totals within [`NORMALIZATION_TOL`] of one are
    /// renormalized; anything further off is rejected.
    pub fn new(scope: Scope, values: Vec<f64>) -> Result<Self> {
        if values.len() != scope.size() {
            return Err(Error::LengthMismatch {
                expected: scope.size(),
                found: values.len(),
            });
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0 || **v > 1.0 + NORMALIZATION_TOL)
        {
            return Err(Error::InvalidDistribution(format!(
                "entry {i} = {v} outside [0, 1]"
            )));
        }
        let total: f64 = values.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidDistribution(format!(
                "entries sum to {total}"
            )));
        }
        let slack = rounding_slack(values.len());
        let mut out = Self { scope, values };
        if (total - 1.0).abs() > slack {
            out.values.iter_mut().for_each(|v| *v /= total);
        }
        Ok(out)
    }

    /// Normalizes nonnegative weights.
    pub fn from_weights(scope: Scope, mut weights: Vec<f64>) -> Result<Self> {
        if weights.len() != scope.size() {
            return Err(Error::LengthMismatch {
                expected: scope.size(),
                found: weights.len(),
            });
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidDistribution(
                "weights must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::ZeroNormalizer);
        }
        weights.iter_mut().for_each(|w| *w /= total);
        Ok(Self {
            scope,
            values: weights,
        })
    }

    pub fn uniform(scope: Scope) -> Self {
        let n = scope.size();
        Self {
            scope,
            values: vec![1.0 / n as f64; n],
        }
    }

    pub fn point_mass(scope: Scope, assignment: &[usize]) -> Result<Self> {
        if assignment.len() != scope.len()
            || assignment.iter().zip(scope.iter()).any(|(&a, v)| a >= v.card)
        {
            return Err(Error::InvalidArgument(format!(
                "assignment {assignment:?} is not valid for {scope:?}"
            )));
        }
        let mut values = vec![0.0; scope.size()];
        values[scope.index_of(assignment)] = 1.0;
        Ok(Self { scope, values })
    }

    pub fn scope(&self) -> &Scope {
        &self.scope
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn prob(&self, assignment: &[usize]) -> f64 {
        self.values[self.scope.index_of(assignment)]
    }

    /// Product distribution over the concatenated scope.
    pub fn product(&self, other: &Categorical) -> Result<Categorical> {
        let scope = self.scope.concat(&other.scope)?;
        let mut values = Vec::with_capacity(scope.size());
        for &a in &self.values {
            values.extend(other.values.iter().map(|&b| a * b));
        }
        Ok(Self::renormalized(scope, values))
    }

    /// Sums out every variable not named in `keep`; the result follows
    /// the order of `keep`.
    pub fn marginalize<S: AsRef<str>>(&self, keep: &[S]) -> Result<Categorical> {
        let positions = keep
            .iter()
            .map(|n| {
                self.scope
                    .position(n.as_ref())
                    .ok_or_else(|| Error::UnknownVariable(n.as_ref().to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        let sub = self.scope.select(keep)?;
        Ok(Self::renormalized(
            sub.clone(),
            marginal_values(&self.values, &self.scope.projection_map(&positions), sub.size()),
        ))
    }

    /// Bayes update on the observation `obs_cpd.child = observed`.
    pub fn condition(&self, obs_cpd: &Cpd, observed: usize) -> Result<Categorical> {
        if obs_cpd.child.len() != 1 {
            return Err(Error::InvalidArgument(
                "observation CPD must have a single child".into(),
            ));
        }
        if observed >= obs_cpd.child_size() {
            return Err(Error::InvalidArgument(format!(
                "observed value {observed} out of range for `{}`",
                obs_cpd.child[0].name
            )));
        }
        let positions = obs_cpd
            .parents
            .iter()
            .map(|p| match self.scope.get(&p.name) {
                Some(v) if v.card == p.card => Ok(self.scope.position(&p.name).unwrap()),
                Some(_) => Err(scope_mismatch(&obs_cpd.parents, &self.scope)),
                None => Err(Error::UnknownVariable(p.name.clone())),
            })
            .collect::<Result<Vec<_>>>()?;
        let map = self.scope.projection_map(&positions);
        let weights: Vec<f64> = self
            .values
            .iter()
            .zip(&map)
            .map(|(&v, &row)| v * obs_cpd.prob(row, observed))
            .collect();
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::ZeroNormalizer);
        }
        Ok(Self {
            scope: self.scope.clone(),
            values: weights.into_iter().map(|w| w / total).collect(),
        })
    }

    /// Joint minus the product of its group marginals.
    pub fn dependence<S: AsRef<str>>(&self, grouping: &[Vec<S>]) -> Result<SignedTable> {
        let mut seen = vec![false; self.scope.len()];
        let mut maps = Vec::with_capacity(grouping.len());
        let mut marginals = Vec::with_capacity(grouping.len());
        for group in grouping {
            let mut positions = Vec::with_capacity(group.len());
            for name in group {
                let p = self
                    .scope
                    .position(name.as_ref())
                    .ok_or_else(|| Error::UnknownVariable(name.as_ref().to_string()))?;
                if seen[p] {
                    return Err(Error::InvalidGrouping(format!(
                        "`{}` appears in more than one group",
                        name.as_ref()
                    )));
                }
                seen[p] = true;
                positions.push(p);
            }
            let map = self.scope.projection_map(&positions);
            let size = positions.iter().map(|&p| self.scope[p].card).product();
            marginals.push(marginal_values(&self.values, &map, size));
            maps.push(map);
        }
        if let Some(p) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidGrouping(format!(
                "`{}` is not covered by the grouping",
                self.scope[p].name
            )));
        }
        let values = (0..self.values.len())
            .map(|i| {
                let prod: f64 = maps.iter().zip(&marginals).map(|(m, g)| g[m[i]]).product();
                self.values[i] - prod
            })
            .collect();
        Ok(SignedTable {
            scope: self.scope.clone(),
            values,
        })
    }

    pub(crate) fn renormalized(scope: Scope, mut values: Vec<f64>) -> Self {
        let total: f64 = values.iter().sum();
        if total != 1.0 && total > 0.0 {
            values.iter_mut().for_each(|v| *v /= total);
        }
        Self { scope, values }
    }
}

pub(crate) fn marginal_values(values: &[f64], map: &[usize], size: usize) -> Vec<f64> {
    let mut out = vec![0.0; size];
    for (&v, &m) in values.iter().zip(map) {
        out[m] += v;
    }
    out
}

/// A table of signed entries, e.g. the difference of two distributions.
#[derive(Clone, Debug, PartialEq)]
pub struct SignedTable {
    scope: Scope,
    values: Vec<f64>,
}

impl Table for SignedTable {
    fn scope(&self) -> &Scope {
        &self.scope
    }
    fn values(&self) -> &[f64] {
        &self.values
    }
}

impl SignedTable {
    pub fn difference(a: &Categorical, b: &Categorical) -> Result<Self> {
        if a.scope != b.scope {
            return Err(scope_mismatch(&a.scope, &b.scope));
        }
        Ok(Self {
            scope: a.scope.clone(),
            values: a.values.iter().zip(&b.values).map(|(x, y)| x - y).collect(),
        })
    }

    pub fn scope(&self) -> &Scope {
        &self.scope
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// Conditional probability table `P(child | parents)`.
///
/// Rows follow the lexicographic order of parent assignments (last parent
/// fastest); each row is a distribution over the child scope.
#[derive(Clone, Debug, PartialEq)]
pub struct Cpd {
    child: Scope,
    parents: Scope,
    values: Vec<f64>,
}

impl Cpd {
    pub fn new(child: Scope, parents: Scope, rows: Vec<Vec<f64>>) -> Result<Self> {
        let width = child.size();
        if rows.len() != parents.size() {
            return Err(Error::LengthMismatch {
                expected: parents.size(),
                found: rows.len(),
            });
        }
        let mut values = Vec::with_capacity(rows.len() * width);
        for row in rows {
            if row.len() != width {
                return Err(Error::LengthMismatch {
                    expected: width,
                    found: row.len(),
                });
            }
            values.extend(row);
        }
        Self::from_flat(child, parents, values)
    }

    /// Builds from row-major values; rows within [`NORMALIZATION_TOL`] of
    /// unit mass are renormalized.
    pub fn from_flat(child: Scope, parents: Scope, mut values: Vec<f64>) -> Result<Self> {
        let width = child.size();
        let expected = width * parents.size();
        if values.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                found: values.len(),
            });
        }
        let child_name = child.names().join(",");
        for (r, row) in values.chunks_mut(width).enumerate() {
            if row.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::InvalidDistribution(format!(
                    "row {r} of the table for `{child_name}` has an entry outside [0, 1]"
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > NORMALIZATION_TOL {
                return Err(Error::RowSum {
                    child: child_name,
                    row: r,
                    sum,
                });
            }
            if (sum - 1.0).abs() > rounding_slack(width) {
                row.iter_mut().for_each(|v| *v /= sum);
            }
        }
        Ok(Self {
            child,
            parents,
            values,
        })
    }

    /// Every row equal to `dist`.
    pub fn constant(child: Scope, parents: Scope, dist: &[f64]) -> Result<Self> {
        let rows = vec![dist.to_vec(); parents.size()];
        Self::new(child, parents, rows)
    }

    pub fn child(&self) -> &Scope {
        &self.child
    }

    pub fn parents(&self) -> &Scope {
        &self.parents
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn child_size(&self) -> usize {
        self.child.size()
    }

    pub fn num_rows(&self) -> usize {
        self.parents.size()
    }

    pub fn row(&self, parent_index: usize) -> &[f64] {
        let w = self.child_size();
        &self.values[parent_index * w..(parent_index + 1) * w]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks(self.child_size())
    }

    pub fn prob(&self, parent_index: usize, child_index: usize) -> f64 {
        self.values[parent_index * self.child_size() + child_index]
    }

    /// The same table with every variable renamed by `f`.
    pub fn renamed(&self, f: impl Fn(&str) -> String) -> Result<Cpd> {
        let rename = |s: &Scope| {
            Scope::new(
                s.iter()
                    .map(|v| Variable {
                        name: f(&v.name),
                        card: v.card,
                    })
                    .collect(),
            )
        };
        Ok(Cpd {
            child: rename(&self.child)?,
            parents: rename(&self.parents)?,
            values: self.values.clone(),
        })
    }

    /// `Φ(π) = Σ π(pa) P(child | pa)`.
    pub fn apply(&self, pi: &Categorical) -> Result<Categorical> {
        if pi.scope() != &self.parents {
            return Err(scope_mismatch(&self.parents, pi.scope()));
        }
        let w = self.child_size();
        let mut out = vec![0.0; w];
        for (row, &p) in self.rows().zip(pi.values()) {
            if p == 0.0 {
                continue;
            }
            for (o, &r) in out.iter_mut().zip(row) {
                *o += p * r;
            }
        }
        Ok(Categorical::renormalized(self.child.clone(), out))
    }

    /// Cellwise maximum absolute difference with another table of the same shape.
    pub fn max_abs_diff(&self, other: &Cpd) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Product distribution `a × b`.
pub fn product(a: &Categorical, b: &Categorical) -> Result<Categorical> {
    a.product(b)
}

pub fn marginalize<S: AsRef<str>>(t: &Categorical, keep: &[S]) -> Result<Categorical> {
    t.marginalize(keep)
}

pub fn apply_cpd(cpd: &Cpd, pi: &Categorical) -> Result<Categorical> {
    cpd.apply(pi)
}

pub fn condition(joint: &Categorical, obs_cpd: &Cpd, observed: usize) -> Result<Categorical> {
    joint.condition(obs_cpd, observed)
}

pub fn dependence<S: AsRef<str>>(joint: &Categorical, grouping: &[Vec<S>]) -> Result<SignedTable> {
    joint.dependence(grouping)
}

/// `KL(p ‖ q)` in nats. Cells with `p = 0` contribute nothing.
pub fn kl(p: &Categorical, q: &Categorical) -> Result<f64> {
    if p.scope() != q.scope() {
        return Err(scope_mismatch(p.scope(), q.scope()));
    }
    kl_values(p.values(), q.values())
}

pub(crate) fn kl_values(p: &[f64], q: &[f64]) -> Result<f64> {
    let mut total = 0.0;
    for (i, (&pi, &qi)) in p.iter().zip(q).enumerate() {
        if pi > 0.0 {
            if qi <= 0.0 {
                return Err(Error::AbsoluteContinuity { index: i, p: pi });
            }
            total += pi * (pi / qi).ln();
        }
    }
    // rounding can leave a tiny negative total when p ≈ q
    Ok(total.max(0.0))
}

/// Max-norm distance between two tables over the same scope.
pub fn linf<A: Table, B: Table>(p: &A, q: &B) -> Result<f64> {
    if p.scope() != q.scope() {
        return Err(scope_mismatch(p.scope(), q.scope()));
    }
    Ok(linf_values(p.values(), q.values()))
}

pub(crate) fn linf_values(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}
