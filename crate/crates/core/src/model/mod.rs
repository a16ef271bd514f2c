//! Two-slice dynamic Bayesian networks.
//!
//! State variables carry transition CPDs whose parents live in the previous
//! slice (named with a trailing `-`, e.g. `X-`). Observation variables depend
//! on current-slice state variables only. There are no arcs between state
//! variables within a slice.

mod format;
mod generators;

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::prob::{Categorical, Cpd, Scope};

pub use format::{parse_document, parse_model, parse_table, table_to_json, to_json, Document};
pub use generators::{
    generate_six_variable_model, generate_mixing_model, generate_two_chain_system, SixVariableModel,
    MixingConfig, TwoChainConfig, TwoChainSystem,
};

/// Ordered partition of the state variables into factors, stored as indices
/// into the model's state scope.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Factorization {
    factors: Vec<Vec<usize>>,
}

impl Factorization {
    pub fn new(num_vars: usize, factors: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; num_vars];
        for f in &factors {
            if f.is_empty() {
                return Err(Error::InvalidModel("empty factor".into()));
            }
            for &v in f {
                if v >= num_vars {
                    return Err(Error::InvalidModel(format!(
                        "factor refers to variable index {v}"
                    )));
                }
                if seen[v] {
                    return Err(Error::InvalidModel(format!(
                        "variable index {v} appears in two factors"
                    )));
                }
                seen[v] = true;
            }
        }
        if let Some(v) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidModel(format!(
                "variable index {v} is not covered by the factorization"
            )));
        }
        Ok(Self { factors })
    }

    pub fn from_names<S: AsRef<str>>(state: &Scope, factors: &[Vec<S>]) -> Result<Self> {
        let factors = factors
            .iter()
            .map(|f| {
                f.iter()
                    .map(|n| {
                        state
                            .position(n.as_ref())
                            .ok_or_else(|| Error::UnknownVariable(n.as_ref().to_string()))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(state.len(), factors)
    }

    pub fn single(num_vars: usize) -> Self {
        Self {
            factors: vec![(0..num_vars).collect()],
        }
    }

    pub fn singletons(num_vars: usize) -> Self {
        Self {
            factors: (0..num_vars).map(|v| vec![v]).collect(),
        }
    }

    pub fn factors(&self) -> &[Vec<usize>] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// Index of the factor containing state variable `var`.
    pub fn factor_of(&self, var: usize) -> usize {
        self.factors
            .iter()
            .position(|f| f.contains(&var))
            .expect("factorization covers every variable")
    }

    pub fn factor_scope(&self, state: &Scope, i: usize) -> Scope {
        Scope::new(self.factors[i].iter().map(|&v| state[v].clone()).collect())
            .expect("factor variables are distinct")
    }

    pub fn names(&self, state: &Scope) -> Vec<Vec<String>> {
        self.factors
            .iter()
            .map(|f| f.iter().map(|&v| state[v].name.clone()).collect())
            .collect()
    }

    /// Compact rendering such as `{UV, WX, YZ}` (names joined with `,`
    /// inside a factor when any name is longer than one character).
    pub fn display(&self, state: &Scope) -> String {
        let compact = state.iter().all(|v| v.name.chars().count() == 1);
        let sep = if compact { "" } else { "," };
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|f| {
                f.iter()
                    .map(|&v| state[v].name.as_str())
                    .collect::<Vec<_>>()
                    .join(sep)
            })
            .collect();
        format!("{{{}}}", parts.join(", "))
    }
}

/// Initial belief over the state variables.
#[derive(Clone, Debug, PartialEq)]
pub enum Prior {
    /// One table per factor of the model's factorization, in factor order.
    Product(Vec<Categorical>),
    /// A joint table over the state scope.
    Joint(Categorical),
}

/// A validated two-slice model.
#[derive(Clone, Debug, PartialEq)]
pub struct DbnModel {
    state: Scope,
    transitions: Vec<Cpd>,
    observations: Vec<Cpd>,
    prior: Prior,
    factorization: Factorization,
}

impl DbnModel {
    /// `transitions[i]` is the CPD of `state[i]` with previous-slice parents
    /// (named `<var>-`). Each observation CPD has a single child and
    /// current-slice state parents.
    pub fn new(
        state: Scope,
        transitions: Vec<Cpd>,
        observations: Vec<Cpd>,
        prior: Prior,
        factorization: Factorization,
    ) -> Result<Self> {
        if transitions.len() != state.len() {
            return Err(Error::InvalidModel(format!(
                "{} transition CPDs for {} state variables",
                transitions.len(),
                state.len()
            )));
        }
        for (v, cpd) in state.iter().zip(&transitions) {
            if cpd.child().len() != 1 || cpd.child()[0] != *v {
                return Err(Error::InvalidModel(format!(
                    "transition CPD for `{}` has child [{}]",
                    v.name,
                    cpd.child().names().join(", ")
                )));
            }
            for p in cpd.parents().iter() {
                let base = p.name.strip_suffix('-').ok_or_else(|| {
                    Error::InvalidModel(format!(
                        "transition parent `{}` of `{}` is not a previous-slice variable",
                        p.name, v.name
                    ))
                })?;
                match state.get(base) {
                    Some(s) if s.card == p.card => {}
                    Some(_) => {
                        return Err(Error::InvalidModel(format!(
                            "cardinality mismatch for parent `{}` of `{}`",
                            p.name, v.name
                        )))
                    }
                    None => return Err(Error::UnknownVariable(base.to_string())),
                }
            }
        }
        let mut obs_names = BTreeSet::new();
        for cpd in &observations {
            if cpd.child().len() != 1 {
                return Err(Error::InvalidModel(
                    "observation CPDs must have a single child".into(),
                ));
            }
            let name = &cpd.child()[0].name;
            if state.position(name).is_some() || !obs_names.insert(name.clone()) {
                return Err(Error::DuplicateVariable(name.clone()));
            }
            for p in cpd.parents().iter() {
                match state.get(&p.name) {
                    Some(s) if s.card == p.card => {}
                    Some(_) => {
                        return Err(Error::InvalidModel(format!(
                            "cardinality mismatch for parent `{}` of observation `{name}`",
                            p.name
                        )))
                    }
                    None => return Err(Error::UnknownVariable(p.name.clone())),
                }
            }
        }
        if factorization
            .factors()
            .iter()
            .flatten()
            .any(|&v| v >= state.len())
            || factorization.factors().iter().map(Vec::len).sum::<usize>() != state.len()
        {
            return Err(Error::InvalidModel(
                "factorization does not partition the state variables".into(),
            ));
        }
        match &prior {
            Prior::Product(tables) => {
                if tables.len() != factorization.len() {
                    return Err(Error::InvalidModel(format!(
                        "{} prior tables for {} factors",
                        tables.len(),
                        factorization.len()
                    )));
                }
                for (i, t) in tables.iter().enumerate() {
                    if *t.scope() != factorization.factor_scope(&state, i) {
                        return Err(Error::InvalidModel(format!(
                            "prior table {i} does not match factor {i}"
                        )));
                    }
                }
            }
            Prior::Joint(t) => {
                if *t.scope() != state {
                    return Err(Error::InvalidModel(
                        "joint prior scope differs from the state variables".into(),
                    ));
                }
            }
        }
        Ok(Self {
            state,
            transitions,
            observations,
            prior,
            factorization,
        })
    }

    /// Independent uniform prior per factor.
    pub fn uniform_prior(state: &Scope, factorization: &Factorization) -> Prior {
        Prior::Product(
            (0..factorization.len())
                .map(|i| Categorical::uniform(factorization.factor_scope(state, i)))
                .collect(),
        )
    }

    pub fn state(&self) -> &Scope {
        &self.state
    }

    pub fn transitions(&self) -> &[Cpd] {
        &self.transitions
    }

    pub fn transition(&self, name: &str) -> Option<&Cpd> {
        self.state.position(name).map(|i| &self.transitions[i])
    }

    pub fn observations(&self) -> &[Cpd] {
        &self.observations
    }

    pub fn observation_scope(&self) -> Scope {
        Scope::new(
            self.observations
                .iter()
                .map(|c| c.child()[0].clone())
                .collect(),
        )
        .expect("observation names validated")
    }

    pub fn prior(&self) -> &Prior {
        &self.prior
    }

    pub fn factorization(&self) -> &Factorization {
        &self.factorization
    }

    /// State indices of the previous-slice parents of transition `i`.
    pub fn parent_indices(&self, i: usize) -> Vec<usize> {
        self.transitions[i]
            .parents()
            .iter()
            .map(|p| {
                self.state
                    .position(p.name.strip_suffix('-').expect("validated"))
                    .expect("validated")
            })
            .collect()
    }

    /// State indices of the parents of observation `o`.
    pub fn observation_parent_indices(&self, o: usize) -> Vec<usize> {
        self.observations[o]
            .parents()
            .iter()
            .map(|p| self.state.position(&p.name).expect("validated"))
            .collect()
    }

    /// The prior as a joint table over the state scope.
    pub fn prior_joint(&self) -> Categorical {
        match &self.prior {
            Prior::Joint(t) => t.clone(),
            Prior::Product(tables) => {
                let mut joint = tables[0].clone();
                for t in &tables[1..] {
                    joint = joint.product(t).expect("factor scopes are disjoint");
                }
                let names = self.state.names();
                joint.marginalize(&names).expect("prior covers the state")
            }
        }
    }

    /// The same dynamics tracked with another factorization. A product prior
    /// that does not match the new factors is converted to a joint prior.
    pub fn with_factorization(&self, factorization: Factorization) -> Result<DbnModel> {
        let prior = match &self.prior {
            Prior::Product(_) if factorization == self.factorization => self.prior.clone(),
            Prior::Product(_) => {
                let joint = self.prior_joint();
                let tables = (0..factorization.len())
                    .map(|i| {
                        let names = factorization.factor_scope(&self.state, i);
                        joint.marginalize(&names.names())
                    })
                    .collect::<Result<Vec<_>>>()?;
                // keep the product form when the prior factorizes over the new factors
                let mut product = tables[0].clone();
                for t in &tables[1..] {
                    product = product.product(t)?;
                }
                let product = product.marginalize(&self.state.names())?;
                if crate::prob::linf(&product, &joint)? <= 1e-14 {
                    Prior::Product(tables)
                } else {
                    Prior::Joint(joint)
                }
            }
            Prior::Joint(_) => self.prior.clone(),
        };
        DbnModel::new(
            self.state.clone(),
            self.transitions.clone(),
            self.observations.clone(),
            prior,
            factorization,
        )
    }

    /// Replaces the observation model.
    pub fn with_observations(&self, observations: Vec<Cpd>) -> Result<DbnModel> {
        DbnModel::new(
            self.state.clone(),
            self.transitions.clone(),
            observations,
            self.prior.clone(),
            self.factorization.clone(),
        )
    }

    /// Previous-slice factors (under `f`) referenced by the members of factor `i`,
    /// in ascending factor order.
    pub fn referenced_factors(&self, f: &Factorization, i: usize) -> Vec<usize> {
        let mut refs = BTreeSet::new();
        for &v in &f.factors()[i] {
            for p in self.parent_indices(v) {
                refs.insert(f.factor_of(p));
            }
        }
        refs.into_iter().collect()
    }
}

impl fmt::Display for DbnModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "DBN with state [{}], observations [{}], factorization {}",
            self.state.names().join(", "),
            self.observation_scope().names().join(", "),
            self.factorization.display(&self.state)
        )
    }
}

/// Joint transition CPD of factor `i` under `f`.
///
/// The child scope is the factor's variables; the parent scope is the ordered
/// union of the previous-slice factors that any member references. Each row is
/// the product of the member variables' rows.
pub fn factor_transition_cpd(model: &DbnModel, f: &Factorization, i: usize) -> Result<Cpd> {
    if i >= f.len() {
        return Err(Error::InvalidArgument(format!(
            "factor index {i} out of range ({} factors)",
            f.len()
        )));
    }
    if f.factors().iter().map(Vec::len).sum::<usize>() != model.state().len() {
        return Err(Error::InvalidArgument(
            "factorization does not match the model".into(),
        ));
    }
    let state = model.state();
    let members = &f.factors()[i];
    let child = f.factor_scope(state, i);
    let parent_vars: Vec<usize> = model
        .referenced_factors(f, i)
        .into_iter()
        .flat_map(|g| f.factors()[g].iter().copied())
        .collect();
    let parents = Scope::new(parent_vars.iter().map(|&v| state[v].previous()).collect())?;

    // for each member: positions of its own parents inside the widened parent scope
    let member_maps: Vec<Vec<usize>> = members
        .iter()
        .map(|&v| {
            let positions: Vec<usize> = model
                .parent_indices(v)
                .iter()
                .map(|p| parent_vars.iter().position(|q| q == p).expect("referenced"))
                .collect();
            parents.projection_map(&positions)
        })
        .collect();
    let child_assignments: Vec<Vec<usize>> =
        (0..child.size()).map(|c| child.assignment(c)).collect();

    let mut values = Vec::with_capacity(parents.size() * child.size());
    for row in 0..parents.size() {
        for assignment in &child_assignments {
            let p: f64 = members
                .iter()
                .zip(&member_maps)
                .zip(assignment)
                .map(|((&v, map), &x)| model.transitions()[v].prob(map[row], x))
                .product();
            values.push(p);
        }
    }
    Cpd::from_flat(child, parents, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::Variable;

    fn two_chains() -> DbnModel {
        let state = Scope::new(vec![Variable::binary("A"), Variable::binary("B")]).unwrap();
        let a = Cpd::new(
            Scope::new(vec![Variable::binary("A")]).unwrap(),
            Scope::new(vec![Variable::binary("A-")]).unwrap(),
            vec![vec![0.9, 0.1], vec![0.3, 0.7]],
        )
        .unwrap();
        let b = Cpd::new(
            Scope::new(vec![Variable::binary("B")]).unwrap(),
            Scope::new(vec![Variable::binary("B-")]).unwrap(),
            vec![vec![0.6, 0.4], vec![0.2, 0.8]],
        )
        .unwrap();
        let f = Factorization::singletons(2);
        let prior = DbnModel::uniform_prior(&state, &f);
        DbnModel::new(state, vec![a, b], vec![], prior, f).unwrap()
    }

    #[test]
    fn factorization_validation() {
        assert!(Factorization::new(3, vec![vec![0, 1], vec![2]]).is_ok());
        assert!(Factorization::new(3, vec![vec![0, 1], vec![1, 2]]).is_err());
        assert!(Factorization::new(3, vec![vec![0, 1]]).is_err());
        assert!(Factorization::new(3, vec![vec![0, 1, 2], vec![]]).is_err());
    }

    #[test]
    fn single_variable_factor_cpd_is_member_cpd() {
        let m = two_chains();
        let f = Factorization::singletons(2);
        let c = factor_transition_cpd(&m, &f, 0).unwrap();
        assert_eq!(c.values(), m.transitions()[0].values());
        assert_eq!(c.parents().names(), vec!["A-"]);
    }

    #[test]
    fn grouped_independent_chains_are_block_structured() {
        let m = two_chains();
        let f = Factorization::single(2);
        let c = factor_transition_cpd(&m, &f, 0).unwrap();
        assert_eq!(c.parents().names(), vec!["A-", "B-"]);
        // row (A-=1, B-=0): P(A,B) = (0.3, 0.7) x (0.6, 0.4)
        let expected = [0.18, 0.12, 0.42, 0.28];
        for (x, y) in c.row(2).iter().zip(expected) {
            assert!((x - y).abs() < 1e-15);
        }
        assert!(factor_transition_cpd(&m, &f, 1).is_err());
    }

    #[test]
    fn rejects_bad_transition_parent() {
        let state = Scope::new(vec![Variable::binary("A")]).unwrap();
        let a = Cpd::new(
            Scope::new(vec![Variable::binary("A")]).unwrap(),
            Scope::new(vec![Variable::binary("Q-")]).unwrap(),
            vec![vec![0.9, 0.1], vec![0.3, 0.7]],
        )
        .unwrap();
        let f = Factorization::single(1);
        let prior = DbnModel::uniform_prior(&state, &f);
        assert!(matches!(
            DbnModel::new(state, vec![a], vec![], prior, f),
            Err(Error::UnknownVariable(_))
        ));
    }

    #[test]
    fn refactorizing_keeps_product_prior_when_possible() {
        let m = two_chains();
        let joint = m.prior_joint();
        let m2 = m.with_factorization(Factorization::single(2)).unwrap();
        assert!(matches!(m2.prior(), Prior::Product(_)));
        assert_eq!(m2.prior_joint(), joint);
        assert_eq!(m.factorization().display(m.state()), "{A, B}");
    }
}
