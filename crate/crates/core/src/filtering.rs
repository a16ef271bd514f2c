//! Exact joint filtering and the factored approximation.
//!
//! Both filters enumerate the two-slice model directly. A [`Filter`] compiles
//! the index bookkeeping once per model; the free functions are convenience
//! wrappers that compile on every call.

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{DbnModel, Factorization};
use crate::prob::{kl_values, linf_values, marginal_values, Categorical, Scope};

/// Whether observations are conditioned on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Mode {
    Prediction,
    Monitoring,
}

/// Per-factor marginals, aligned with a factorization.
#[derive(Clone, Debug, PartialEq)]
pub struct FactoredBelief {
    marginals: Vec<Categorical>,
}

impl FactoredBelief {
    pub fn new(state: &Scope, factorization: &Factorization, marginals: Vec<Categorical>) -> Result<Self> {
        if marginals.len() != factorization.len() {
            return Err(Error::LengthMismatch {
                expected: factorization.len(),
                found: marginals.len(),
            });
        }
        for (i, m) in marginals.iter().enumerate() {
            let expected = factorization.factor_scope(state, i);
            if m.scope() != &expected {
                return Err(Error::ScopeMismatch {
                    expected: format!("{expected:?}"),
                    found: format!("{:?}", m.scope()),
                });
            }
        }
        Ok(Self { marginals })
    }

    /// Projects a joint onto the factors of `factorization`.
    pub fn from_joint(joint: &Categorical, factorization: &Factorization) -> Result<Self> {
        let marginals = factorization
            .factors()
            .iter()
            .map(|f| {
                let names: Vec<&str> = f.iter().map(|&v| joint.scope()[v].name.as_str()).collect();
                joint.marginalize(&names)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { marginals })
    }

    pub fn marginals(&self) -> &[Categorical] {
        &self.marginals
    }

    pub fn into_marginals(self) -> Vec<Categorical> {
        self.marginals
    }
}

/// A sampled run: initial state, then `T` steps of states and observations.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Trajectory {
    pub initial: Vec<usize>,
    pub states: Vec<Vec<usize>>,
    pub observations: Vec<Vec<usize>>,
    pub seed: u64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// Errors of the factored filter against the exact filter at one step.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepErrors {
    /// `KL(exact ‖ factored)` on each factor marginal.
    pub kl_factor: Vec<f64>,
    /// `KL(exact ‖ factored)` on each state variable's marginal.
    pub kl_var: Vec<f64>,
    /// `|P_exact(v = last) − P_factored(v = last)|` per state variable.
    pub abs_error: Vec<f64>,
    /// Max-norm error on each factor marginal.
    pub marginal_linf: Vec<f64>,
    /// Max-norm distance between the exact joint and the product of its own factor marginals.
    pub delta_true: f64,
    /// Max-norm distance between the exact joint and the product of the factored marginals.
    pub delta_bk: f64,
    /// `KL(exact joint ‖ product of its factor marginals)`.
    pub dependence_kl: f64,
}

/// One [`StepErrors`] per step `t = 1..=T`.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ErrorSeries {
    pub steps: Vec<StepErrors>,
}

impl ErrorSeries {
    /// Mean over steps of `f`.
    pub fn time_average(&self, f: impl Fn(&StepErrors) -> f64) -> f64 {
        if self.steps.is_empty() {
            return 0.0;
        }
        self.steps.iter().map(f).sum::<f64>() / self.steps.len() as f64
    }

    pub fn last(&self) -> Option<&StepErrors> {
        self.steps.last()
    }
}

/// Index tables for enumerating one model under one factorization.
#[derive(Clone, Debug)]
pub struct Filter<'a> {
    model: &'a DbnModel,
    factorization: Factorization,
    size: usize,
    /// per state variable, the transition row selected by each previous joint state
    parent_rows: Vec<Vec<usize>>,
    /// per observation, the row selected by each current joint state
    obs_rows: Vec<Vec<usize>>,
    /// per factor, the factor index of each joint state
    factor_maps: Vec<Vec<usize>>,
    factor_scopes: Vec<Scope>,
    /// per state variable, its value in each joint state
    var_maps: Vec<Vec<usize>>,
}

impl<'a> Filter<'a> {
    /// Compiles `model` under its own factorization.
    pub fn new(model: &'a DbnModel) -> Self {
        Self::with_factorization(model, model.factorization().clone())
    }

    pub fn with_factorization(model: &'a DbnModel, factorization: Factorization) -> Self {
        let state = model.state();
        let parent_rows = (0..state.len())
            .map(|i| state.projection_map(&model.parent_indices(i)))
            .collect();
        let obs_rows = (0..model.observations().len())
            .map(|o| state.projection_map(&model.observation_parent_indices(o)))
            .collect();
        let factor_maps = factorization
            .factors()
            .iter()
            .map(|f| state.projection_map(f))
            .collect();
        let factor_scopes = (0..factorization.len())
            .map(|i| factorization.factor_scope(state, i))
            .collect();
        let var_maps = (0..state.len()).map(|i| state.projection_map(&[i])).collect();
        Self {
            model,
            factorization,
            size: state.size(),
            parent_rows,
            obs_rows,
            factor_maps,
            factor_scopes,
            var_maps,
        }
    }

    pub fn model(&self) -> &DbnModel {
        self.model
    }

    pub fn factorization(&self) -> &Factorization {
        &self.factorization
    }

    /// `P(x | prev)` for every current joint state `x`, written into `out`.
    pub fn transition_row(&self, prev: usize, out: &mut [f64]) {
        out[0] = 1.0;
        let mut len = 1;
        for (cpd, rows) in self.model.transitions().iter().zip(&self.parent_rows) {
            let row = cpd.row(rows[prev]);
            let card = row.len();
            for k in (0..len).rev() {
                let v = out[k];
                for (c, &p) in row.iter().enumerate() {
                    out[k * card + c] = v * p;
                }
            }
            len *= card;
        }
    }

    /// `Σ_prev P(x | prev)·belief(prev)`.
    pub fn predict_values(&self, belief: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.size];
        let mut row = vec![0.0; self.size];
        for (prev, &w) in belief.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            self.transition_row(prev, &mut row);
            for (o, r) in out.iter_mut().zip(&row) {
                *o += w * r;
            }
        }
        out
    }

    /// `∏_o P(obs_o | x)` for joint state `x`.
    pub fn likelihood(&self, x: usize, obs: &[usize]) -> f64 {
        self.model
            .observations()
            .iter()
            .zip(&self.obs_rows)
            .zip(obs)
            .map(|((cpd, rows), &o)| cpd.prob(rows[x], o))
            .product()
    }

    /// Multiplies in the observation likelihood and normalizes; returns the
    /// normalizer `P(obs | belief)`.
    pub fn condition_values(&self, values: &mut [f64], obs: &[usize]) -> Result<f64> {
        self.check_obs(obs)?;
        let mut total = 0.0;
        for (x, v) in values.iter_mut().enumerate() {
            *v *= self.likelihood(x, obs);
            total += *v;
        }
        if total <= 0.0 {
            return Err(Error::ZeroNormalizer);
        }
        values.iter_mut().for_each(|v| *v /= total);
        Ok(total)
    }

    fn check_obs(&self, obs: &[usize]) -> Result<()> {
        let cpds = self.model.observations();
        if obs.len() != cpds.len() {
            return Err(Error::LengthMismatch {
                expected: cpds.len(),
                found: obs.len(),
            });
        }
        if let Some((cpd, &o)) = cpds.iter().zip(obs).find(|(c, &o)| o >= c.child_size()) {
            return Err(Error::InvalidArgument(format!(
                "observed value {o} out of range for `{}`",
                cpd.child()[0].name
            )));
        }
        Ok(())
    }

    fn check_joint(&self, belief: &Categorical) -> Result<()> {
        if belief.scope() != self.model.state() {
            return Err(Error::ScopeMismatch {
                expected: format!("{:?}", self.model.state()),
                found: format!("{:?}", belief.scope()),
            });
        }
        Ok(())
    }

    /// Factor marginals of a joint, each renormalized so that rounding
    /// drift cannot compound through repeated products.
    pub fn project_values(&self, joint: &[f64]) -> Vec<Vec<f64>> {
        self.factor_maps
            .iter()
            .zip(&self.factor_scopes)
            .map(|(map, s)| {
                let mut m = marginal_values(joint, map, s.size());
                let total: f64 = m.iter().sum();
                if total > 0.0 {
                    m.iter_mut().for_each(|v| *v /= total);
                }
                m
            })
            .collect()
    }

    /// Product of factor marginals as a joint.
    pub fn product_values(&self, marginals: &[Vec<f64>]) -> Vec<f64> {
        (0..self.size)
            .map(|x| {
                marginals
                    .iter()
                    .zip(&self.factor_maps)
                    .map(|(m, map)| m[map[x]])
                    .product()
            })
            .collect()
    }

    /// Marginal of state variable `i` from a joint.
    pub fn var_marginal(&self, joint: &[f64], i: usize) -> Vec<f64> {
        marginal_values(joint, &self.var_maps[i], self.model.state()[i].card)
    }

    pub fn joint(&self, values: Vec<f64>) -> Categorical {
        Categorical::renormalized(self.model.state().clone(), values)
    }

    pub fn factored(&self, marginals: Vec<Vec<f64>>) -> FactoredBelief {
        FactoredBelief {
            marginals: marginals
                .into_iter()
                .zip(&self.factor_scopes)
                .map(|(m, s)| Categorical::renormalized(s.clone(), m))
                .collect(),
        }
    }

    fn factored_values(&self, fb: &FactoredBelief) -> Result<Vec<Vec<f64>>> {
        if fb.marginals.len() != self.factor_scopes.len()
            || fb.marginals.iter().zip(&self.factor_scopes).any(|(m, s)| m.scope() != s)
        {
            return Err(Error::InvalidArgument(
                "factored belief is not aligned with the factorization".into(),
            ));
        }
        Ok(fb.marginals.iter().map(|m| m.values().to_vec()).collect())
    }

    pub fn exact_predict(&self, belief: &Categorical) -> Result<Categorical> {
        self.check_joint(belief)?;
        Ok(self.joint(self.predict_values(belief.values())))
    }

    pub fn exact_filter(&self, belief: &Categorical, obs: &[usize]) -> Result<Categorical> {
        self.check_joint(belief)?;
        let mut v = self.predict_values(belief.values());
        self.condition_values(&mut v, obs)?;
        Ok(self.joint(v))
    }

    pub fn bk_predict(&self, fb: &FactoredBelief) -> Result<FactoredBelief> {
        let prior = self.product_values(&self.factored_values(fb)?);
        let joint = self.predict_values(&prior);
        Ok(self.factored(self.project_values(&joint)))
    }

    pub fn bk_filter(&self, fb: &FactoredBelief, obs: &[usize]) -> Result<FactoredBelief> {
        let prior = self.product_values(&self.factored_values(fb)?);
        let mut joint = self.predict_values(&prior);
        self.condition_values(&mut joint, obs)?;
        Ok(self.factored(self.project_values(&joint)))
    }

    /// Compares both filters along a trajectory.
    pub fn compare(&self, trajectory: &Trajectory, mode: Mode) -> Result<ErrorSeries> {
        let mut exact = self.model.prior_joint().into_values();
        let mut approx = self.project_values(&exact);
        let mut steps = Vec::with_capacity(trajectory.len());
        for (t, obs) in trajectory.observations.iter().enumerate() {
            exact = self.predict_values(&exact);
            let mut joint = self.predict_values(&self.product_values(&approx));
            if mode == Mode::Monitoring {
                self.condition_values(&mut exact, obs).map_err(|e| match e {
                    Error::ZeroNormalizer => Error::ImpossibleEvidence { step: t + 1 },
                    e => e,
                })?;
                self.condition_values(&mut joint, obs)?;
            }
            approx = self.project_values(&joint);
            steps.push(self.step_errors(&exact, &approx)?);
        }
        Ok(ErrorSeries { steps })
    }

    /// Error metrics of factor marginals `approx` against the exact joint.
    pub fn step_errors(&self, exact: &[f64], approx: &[Vec<f64>]) -> Result<StepErrors> {
        let true_marginals = self.project_values(exact);
        let true_product = self.product_values(&true_marginals);
        let approx_product = self.product_values(approx);
        let kl_factor = true_marginals
            .iter()
            .zip(approx)
            .map(|(p, q)| kl_values(p, q))
            .collect::<Result<Vec<_>>>()?;
        let marginal_linf = true_marginals
            .iter()
            .zip(approx)
            .map(|(p, q)| linf_values(p, q))
            .collect();
        let n = self.model.state().len();
        let mut kl_var = Vec::with_capacity(n);
        let mut abs_error = Vec::with_capacity(n);
        for i in 0..n {
            let p = self.var_marginal(exact, i);
            let q = self.var_marginal(&approx_product, i);
            let last = p.len() - 1;
            abs_error.push((p[last] - q[last]).abs());
            kl_var.push(kl_values(&p, &q)?);
        }
        Ok(StepErrors {
            kl_factor,
            kl_var,
            abs_error,
            marginal_linf,
            delta_true: linf_values(exact, &true_product),
            delta_bk: linf_values(exact, &approx_product),
            dependence_kl: kl_values(exact, &true_product)?,
        })
    }
}

pub fn exact_predict_step(model: &DbnModel, belief: &Categorical) -> Result<Categorical> {
    Filter::new(model).exact_predict(belief)
}

pub fn exact_filter_step(model: &DbnModel, belief: &Categorical, obs: &[usize]) -> Result<Categorical> {
    Filter::new(model).exact_filter(belief, obs)
}

pub fn bk_predict_step(model: &DbnModel, fb: &FactoredBelief) -> Result<FactoredBelief> {
    Filter::new(model).bk_predict(fb)
}

pub fn bk_step(model: &DbnModel, fb: &FactoredBelief, obs: &[usize]) -> Result<FactoredBelief> {
    Filter::new(model).bk_filter(fb, obs)
}

pub fn run_comparison(model: &DbnModel, trajectory: &Trajectory, mode: Mode) -> Result<ErrorSeries> {
    Filter::new(model).compare(trajectory, mode)
}

fn draw(rng: &mut ChaCha8Rng, weights: &[f64]) -> usize {
    WeightedIndex::new(weights)
        .expect("validated distributions have positive mass")
        .sample(rng)
}

/// Ancestral sampling of `steps` transitions with observations.
pub fn sample_trajectory(model: &DbnModel, steps: usize, seed: u64) -> Result<Trajectory> {
    if steps == 0 {
        return Err(Error::InvalidArgument("trajectory needs at least one step".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let state = model.state();
    let prior = model.prior_joint();
    let initial = state.assignment(draw(&mut rng, prior.values()));
    let parents: Vec<Vec<usize>> = (0..state.len()).map(|i| model.parent_indices(i)).collect();
    let obs_parents: Vec<Vec<usize>> = (0..model.observations().len())
        .map(|o| model.observation_parent_indices(o))
        .collect();
    let row_of = |cpd: &crate::prob::Cpd, idx: &[usize], x: &[usize]| {
        let a: Vec<usize> = idx.iter().map(|&p| x[p]).collect();
        cpd.parents().index_of(&a)
    };

    let mut states = Vec::with_capacity(steps);
    let mut observations = Vec::with_capacity(steps);
    let mut prev = initial.clone();
    for _ in 0..steps {
        let next: Vec<usize> = model
            .transitions()
            .iter()
            .zip(&parents)
            .map(|(cpd, idx)| draw(&mut rng, cpd.row(row_of(cpd, idx, &prev))))
            .collect();
        let obs: Vec<usize> = model
            .observations()
            .iter()
            .zip(&obs_parents)
            .map(|(cpd, idx)| draw(&mut rng, cpd.row(row_of(cpd, idx, &next))))
            .collect();
        states.push(next.clone());
        observations.push(obs);
        prev = next;
    }
    Ok(Trajectory {
        initial,
        states,
        observations,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{generate_mixing_model, MixingConfig, Prior};
    use crate::prob::{Cpd, Variable};

    fn bin(names: &[&str]) -> Scope {
        Scope::new(names.iter().map(|n| Variable::binary(*n)).collect()).unwrap()
    }

    fn chain(stay: f64, accuracy: Option<f64>) -> DbnModel {
        let state = bin(&["S"]);
        let t = Cpd::new(bin(&["S"]), bin(&["S-"]), vec![vec![stay, 1.0 - stay], vec![1.0 - stay, stay]]).unwrap();
        let obs = accuracy
            .map(|a| vec![Cpd::new(bin(&["O"]), bin(&["S"]), vec![vec![a, 1.0 - a], vec![1.0 - a, a]]).unwrap()])
            .unwrap_or_default();
        let f = Factorization::single(1);
        let prior = DbnModel::uniform_prior(&state, &f);
        DbnModel::new(state, vec![t], obs, prior, f).unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    fn independent_chains() -> DbnModel {
        let state = bin(&["A", "B"]);
        let ta = Cpd::new(bin(&["A"]), bin(&["A-"]), vec![vec![0.8, 0.2], vec![0.3, 0.7]]).unwrap();
        let tb = Cpd::new(bin(&["B"]), bin(&["B-"]), vec![vec![0.6, 0.4], vec![0.1, 0.9]]).unwrap();
        let oa = Cpd::new(bin(&["OA"]), bin(&["A"]), vec![vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap();
        let ob = Cpd::new(bin(&["OB"]), bin(&["B"]), vec![vec![0.7, 0.3], vec![0.4, 0.6]]).unwrap();
        let f = Factorization::singletons(2);
        let prior = DbnModel::uniform_prior(&state, &f);
        DbnModel::new(state, vec![ta, tb], vec![oa, ob], prior, f).unwrap()
    }

    #[test]
    fn predict_single_chain() {
        let m = chain(0.9, None);
        let b = Categorical::point_mass(bin(&["S"]), &[0]).unwrap();
        let out = exact_predict_step(&m, &b).unwrap();
        assert!(close(out.values(), &[0.9, 0.1], 1e-15));
    }

    #[test]
    fn identity_and_uniform_transitions() {
        let m = chain(1.0, None);
        let b = Categorical::new(bin(&["S"]), vec![0.3, 0.7]).unwrap();
        assert_eq!(exact_predict_step(&m, &b).unwrap(), b);
        let m = chain(0.5, None);
        assert!(close(exact_predict_step(&m, &b).unwrap().values(), &[0.5, 0.5], 1e-15));
    }

    #[test]
    fn filter_single_chain_by_hand() {
        let m = chain(0.9, Some(0.8));
        let b = Categorical::uniform(bin(&["S"]));
        assert!(close(exact_predict_step(&m, &b).unwrap().values(), &[0.5, 0.5], 1e-15));
        // observing value 0 with accuracy 0.8
        let post = exact_filter_step(&m, &b, &[0]).unwrap();
        assert!(close(post.values(), &[0.8, 0.2], 1e-12));
    }

    #[test]
    fn uninformative_and_impossible_observations() {
        let m = chain(0.9, Some(0.5));
        let b = Categorical::new(bin(&["S"]), vec![0.3, 0.7]).unwrap();
        let p = exact_predict_step(&m, &b).unwrap();
        assert!(close(exact_filter_step(&m, &b, &[1]).unwrap().values(), p.values(), 1e-15));

        let m = chain(1.0, Some(1.0));
        let b = Categorical::point_mass(bin(&["S"]), &[0]).unwrap();
        assert!(matches!(exact_filter_step(&m, &b, &[1]), Err(Error::ZeroNormalizer)));
        assert!(exact_filter_step(&m, &b, &[2]).is_err());
        assert!(exact_filter_step(&m, &b, &[]).is_err());
    }

    #[test]
    fn bk_without_observations_equals_bk_predict() {
        let m = generate_mixing_model(0.4, 2, &MixingConfig::default())
            .unwrap()
            .with_observations(vec![])
            .unwrap();
        let fb = FactoredBelief::from_joint(&m.prior_joint(), m.factorization()).unwrap();
        assert_eq!(bk_step(&m, &fb, &[]).unwrap(), bk_predict_step(&m, &fb).unwrap());
    }

    #[test]
    fn independent_chains_are_exact() {
        let m = independent_chains();
        let traj = sample_trajectory(&m, 30, 9).unwrap();
        for mode in [Mode::Prediction, Mode::Monitoring] {
            let s = run_comparison(&m, &traj, mode).unwrap();
            for st in &s.steps {
                assert!(st.kl_factor.iter().all(|&k| k < 1e-12));
                assert!(st.marginal_linf.iter().all(|&k| k < 1e-12), "{st:?}");
                assert!(st.delta_bk < 1e-12, "{st:?}");
            }
        }
    }

    #[test]
    fn single_factor_agrees_with_exact() {
        let m = generate_mixing_model(0.0, 5, &MixingConfig::default()).unwrap();
        let m = m.with_factorization(Factorization::single(2)).unwrap();
        let traj = sample_trajectory(&m, 20, 1).unwrap();
        let s = run_comparison(&m, &traj, Mode::Monitoring).unwrap();
        assert!(s.steps.iter().all(|st| st.marginal_linf[0] <= 1e-12));
    }

    #[test]
    fn mixing_nonseparable_has_error() {
        let m = generate_mixing_model(0.0, 4, &MixingConfig::default()).unwrap();
        let traj = sample_trajectory(&m, 10, 3).unwrap();
        let s = run_comparison(&m, &traj, Mode::Prediction).unwrap();
        assert!(s.steps.iter().any(|st| st.kl_factor[0] > 1e-3));
    }

    #[test]
    fn mixing_separable_prediction_is_exact() {
        let m = generate_mixing_model(1.0, 4, &MixingConfig::default()).unwrap();
        let traj = sample_trajectory(&m, 25, 3).unwrap();
        let s = run_comparison(&m, &traj, Mode::Prediction).unwrap();
        assert!(s.steps.iter().all(|st| st.kl_factor.iter().all(|&k| k < 1e-12)));
        let mon = run_comparison(&m, &traj, Mode::Monitoring).unwrap();
        assert!(mon.time_average(|st| st.kl_factor[0]) < 0.05);
    }

    #[test]
    fn product_projection_is_idempotent() {
        let m = independent_chains();
        let f = Filter::new(&m);
        let marg = vec![vec![0.3, 0.7], vec![0.45, 0.55]];
        let joint = f.product_values(&marg);
        assert!(close(&f.project_values(&joint)[0], &marg[0], 1e-15));
        assert!(close(&f.project_values(&joint)[1], &marg[1], 1e-15));
    }

    #[test]
    fn sampling_is_deterministic() {
        let m = generate_mixing_model(0.5, 1, &MixingConfig::default()).unwrap();
        assert_eq!(sample_trajectory(&m, 40, 17).unwrap(), sample_trajectory(&m, 40, 17).unwrap());
        assert_ne!(sample_trajectory(&m, 40, 17).unwrap(), sample_trajectory(&m, 40, 18).unwrap());
        assert!(sample_trajectory(&m, 0, 17).is_err());
    }

    #[test]
    fn deterministic_model_has_unique_trajectory() {
        let state = bin(&["S"]);
        let t = Cpd::new(bin(&["S"]), bin(&["S-"]), vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let f = Factorization::single(1);
        let prior = Prior::Joint(Categorical::point_mass(state.clone(), &[0]).unwrap());
        let m = DbnModel::new(state, vec![t], vec![], prior, f).unwrap();
        let a = sample_trajectory(&m, 8, 1).unwrap();
        let b = sample_trajectory(&m, 8, 2).unwrap();
        assert_eq!(a.states, b.states);
        assert_eq!(a.states[0], vec![1]);
        assert_eq!(a.states[1], vec![0]);
    }

    #[test]
    fn empirical_frequencies_match_stationary() {
        let state = bin(&["S"]);
        let t = Cpd::new(bin(&["S"]), bin(&["S-"]), vec![vec![0.9, 0.1], vec![0.3, 0.7]]).unwrap();
        let f = Factorization::single(1);
        let prior = DbnModel::uniform_prior(&state, &f);
        let m = DbnModel::new(state, vec![t], vec![], prior, f).unwrap();
        let traj = sample_trajectory(&m, 100_000, 5).unwrap();
        let ones = traj.states.iter().filter(|s| s[0] == 1).count() as f64 / 1e5;
        // stationary P(S=1) = 0.1 / (0.1 + 0.3)
        assert!((ones - 0.25).abs() < 0.01, "{ones}");
    }
}
