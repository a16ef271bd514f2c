//! Expected-error bound for separable two-chain systems, and processes that
//! isolate the two sources of factored-filtering error.
//!
//! The *propagation* error comes from pushing a product of marginals through
//! the dynamics instead of the dependent joint. The *conditioning* error comes
//! from conditioning on evidence with only the dependence created by the last
//! transition. Each isolation process suffers from exactly one of them.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::filtering::{sample_trajectory, Filter, Mode, Trajectory};
use crate::model::{DbnModel, TwoChainSystem};
use crate::prob::{kl_values, linf_values, Cpd};

/// Reading of the two bound quantities whose printed form is ambiguous.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub enum TypoReading {
    /// Literal formulas: the `Y` retention term repeats `λ_Y^Y`.
    #[default]
    AsPrinted,
    /// Mirror of the `X` formulas: the `Y` retention term uses `λ_X^Y`.
    Symmetric,
}

impl FromStr for TypoReading {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "as-printed" => Ok(Self::AsPrinted),
            "symmetric" => Ok(Self::Symmetric),
            _ => Err(Error::InvalidArgument(format!(
                "unknown reading `{s}` (expected as-printed or symmetric)"
            ))),
        }
    }
}

impl fmt::Display for TypoReading {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::AsPrinted => "as-printed",
            Self::Symmetric => "symmetric",
        })
    }
}

/// Influence strengths and derived terms of a two-chain system.
///
/// Binary values are indexed `0 = F`, `1 = T`; every influence is the absolute
/// change in `P(child = T)` when the parent flips from `F` to `T`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundQuantities {
    pub reading: TypoReading,
    pub gamma_x: f64,
    pub gamma_y: f64,
    /// `λ_X^X`: influence of `X-` on `X`.
    pub x_on_x: f64,
    /// `λ_X^Y`: influence of `Y-` on `X`.
    pub y_on_x: f64,
    /// `λ_Y^X`: influence of `X-` on `Y`.
    pub x_on_y: f64,
    /// `λ_Y^Y`: influence of `Y-` on `Y`.
    pub y_on_y: f64,
    /// `λ_Z`: informativeness of the evidence.
    pub evidence: f64,
    /// `λ_XY^X`: influence of `X-` on the event `X = T, Y = T`.
    pub x_on_both: f64,
    /// `λ_XY^Y`: influence of `Y-` on the event `X = T, Y = T`.
    pub y_on_both: f64,
    /// `ζ^X`
    pub x_retention: f64,
    /// `ζ^Y`
    pub y_retention: f64,
    /// `L`: weight of moves where both children share a parent.
    pub shared_moves: f64,
    /// `M`: weight of moves where the children have crossed parents.
    pub crossed_moves: f64,
    /// `N`
    pub denominator: f64,
    /// `O`
    pub x_carry: f64,
    /// `P`
    pub y_carry: f64,
}

/// Upper bounds on the expected joint error and marginal errors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ErrorBound {
    /// `H`, on the distance between the true joint and its marginal product.
    pub joint: f64,
    /// `J`, on the `X` marginal error.
    pub x_marginal: f64,
    /// `K`, on the `Y` marginal error.
    pub y_marginal: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum BoundOutcome {
    Applicable(ErrorBound),
    /// A denominator of the bound is not positive.
    Inapplicable(String),
}

impl BoundOutcome {
    pub fn bound(&self) -> Option<ErrorBound> {
        match self {
            Self::Applicable(b) => Some(*b),
            Self::Inapplicable(_) => None,
        }
    }
}

fn p_true(cpd: &Cpd, row: usize) -> f64 {
    cpd.prob(row, 1)
}

fn influence(cpd: &Cpd) -> f64 {
    (p_true(cpd, 1) - p_true(cpd, 0)).abs()
}

fn joint_influence(a: &Cpd, b: &Cpd) -> f64 {
    (p_true(a, 1) * p_true(b, 1) - p_true(a, 0) * p_true(b, 0)).abs()
}

pub fn bound_quantities(sys: &TwoChainSystem, reading: TypoReading) -> BoundQuantities {
    let (gx, gy) = (sys.gamma_x, sys.gamma_y);
    let x_on_x = influence(&sys.p_x_x);
    let y_on_x = influence(&sys.p_x_y);
    let x_on_y = influence(&sys.p_y_x);
    let y_on_y = influence(&sys.p_y_y);
    let evidence = influence(&sys.p_z);
    let x_on_both = joint_influence(&sys.p_x_x, &sys.p_y_x);
    let y_on_both = joint_influence(&sys.p_x_y, &sys.p_y_y);
    let x_retention = x_on_x.max(evidence * (x_on_x - 2.0 * x_on_both + 2.0 * x_on_y));
    let last = match reading {
        TypoReading::AsPrinted => y_on_y,
        TypoReading::Symmetric => y_on_x,
    };
    let y_retention = y_on_y.max(evidence * (y_on_y - 2.0 * y_on_both + 2.0 * last));
    let shared_moves = gx * gy * x_on_x * x_on_y + (1.0 - gx) * (1.0 - gy) * y_on_x * y_on_y;
    let crossed_moves = gx * (1.0 - gy) * x_on_x * y_on_y + (1.0 - gx) * gy * y_on_x * x_on_y;
    let x_carry = gy * x_retention + (1.0 - gy) * x_on_x;
    let y_carry = gy * y_on_x + (1.0 - gy) * y_retention;
    let denominator =
        (1.0 - (1.0 - gy) * y_on_y) * (1.0 - gx * x_carry) - (1.0 - gx) * gy * x_on_y * y_carry;
    BoundQuantities {
        reading,
        gamma_x: gx,
        gamma_y: gy,
        x_on_x,
        y_on_x,
        x_on_y,
        y_on_y,
        evidence,
        x_on_both,
        y_on_both,
        x_retention,
        y_retention,
        shared_moves,
        crossed_moves,
        denominator,
        x_carry,
        y_carry,
    }
}

/// Bounds on the expected errors at every time step, valid when the
/// filters start from the same product prior.
pub fn error_bound(q: &BoundQuantities) -> BoundOutcome {
    let blur = 1.0 - q.evidence * q.evidence;
    let joint_den = 1.0 - blur * q.crossed_moves;
    if joint_den <= 0.0 {
        return BoundOutcome::Inapplicable(format!("joint denominator {joint_den} is not positive"));
    }
    if q.denominator <= 0.0 {
        return BoundOutcome::Inapplicable(format!("marginal denominator {} is not positive", q.denominator));
    }
    let joint = blur * q.shared_moves / (4.0 * joint_den);
    let scale = 2.0 * joint * q.evidence * q.crossed_moves / q.denominator;
    BoundOutcome::Applicable(ErrorBound {
        joint,
        x_marginal: scale * (1.0 - (1.0 - q.gamma_y) * q.y_on_y),
        y_marginal: scale * q.gamma_y * q.x_on_y,
    })
}

/// Per-step expectations of the joint error and the two marginal errors.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpectedErrors {
    pub joint: Vec<f64>,
    pub x_marginal: Vec<f64>,
    pub y_marginal: Vec<f64>,
    /// Standard error of each `x_marginal` entry (zero when exact).
    pub x_marginal_se: Vec<f64>,
    /// Standard error of the time average of `x_marginal`, treating each
    /// sequence's time average as one sample.
    pub x_average_se: f64,
}

impl ExpectedErrors {
    pub fn x_average(&self) -> f64 {
        mean(&self.x_marginal)
    }

    pub fn x_max(&self) -> f64 {
        self.x_marginal.iter().copied().fold(0.0, f64::max)
    }
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

/// Estimates the expected errors of factored monitoring by sampling
/// `sequences` trajectories of `steps` transitions.
pub fn expected_errors_sampled(model: &DbnModel, steps: usize, sequences: usize, seed: u64) -> Result<ExpectedErrors> {
    if sequences < 2 {
        return Err(Error::InvalidArgument("at least two sequences are needed".into()));
    }
    let filter = Filter::new(model);
    let mut seeds = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = vec![[0.0; 3]; steps];
    let mut sq_x = vec![0.0; steps];
    let mut avg = Vec::with_capacity(sequences);
    for _ in 0..sequences {
        let traj = sample_trajectory(model, steps, rand::Rng::gen(&mut seeds))?;
        let series = filter.compare(&traj, Mode::Monitoring)?;
        for (acc, (s, e)) in sum.iter_mut().zip(sq_x.iter_mut().zip(&series.steps)) {
            acc[0] += e.delta_true;
            acc[1] += e.marginal_linf[0];
            acc[2] += e.marginal_linf.get(1).copied().unwrap_or(0.0);
            *s += e.marginal_linf[0] * e.marginal_linf[0];
        }
        avg.push(series.time_average(|e| e.marginal_linf[0]));
    }
    let n = sequences as f64;
    let column = |k: usize| sum.iter().map(|a| a[k] / n).collect::<Vec<_>>();
    let x_marginal = column(1);
    let x_marginal_se = sq_x
        .iter()
        .zip(&x_marginal)
        .map(|(s, m)| ((s / n - m * m).max(0.0) * n / (n - 1.0) / n).sqrt())
        .collect();
    let avg_mean = mean(&avg);
    let avg_var = avg.iter().map(|a| (a - avg_mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(ExpectedErrors {
        joint: column(0),
        x_marginal,
        y_marginal: column(2),
        x_marginal_se,
        x_average_se: (avg_var / n).sqrt(),
    })
}

/// Longest horizon accepted by [`expected_errors_exact`].
pub const MAX_EXACT_STEPS: usize = 8;

/// Exact expected errors of factored monitoring, summing over every
/// observation sequence weighted by its probability.
pub fn expected_errors_exact(model: &DbnModel, steps: usize) -> Result<ExpectedErrors> {
    if steps > MAX_EXACT_STEPS {
        return Err(Error::EnumerationGuard(format!(
            "exact expectation enumerates every observation sequence; use at most {MAX_EXACT_STEPS} steps \
             or the sampled estimate"
        )));
    }
    let filter = Filter::new(model);
    let cards: Vec<usize> = model.observations().iter().map(|c| c.child_size()).collect();
    let outcomes: usize = cards.iter().product();
    let mut sums = vec![[0.0; 3]; steps];

    struct Node {
        exact: Vec<f64>,
        approx: Vec<Vec<f64>>,
        weight: f64,
    }
    let prior = model.prior_joint().into_values();
    let mut stack = vec![(
        0usize,
        Node {
            approx: filter.project_values(&prior),
            exact: prior,
            weight: 1.0,
        },
    )];
    while let Some((t, node)) = stack.pop() {
        if t == steps {
            continue;
        }
        let predicted = filter.predict_values(&node.exact);
        let approx_prior = filter.predict_values(&filter.product_values(&node.approx));
        for o in 0..outcomes {
            let mut obs = Vec::with_capacity(cards.len());
            let mut rest = o;
            for &c in cards.iter().rev() {
                obs.push(rest % c);
                rest /= c;
            }
            obs.reverse();
            let mut exact = predicted.clone();
            let p_obs = match filter.condition_values(&mut exact, &obs) {
                Ok(p) => p,
                Err(Error::ZeroNormalizer) => continue,
                Err(e) => return Err(e),
            };
            let mut joint = approx_prior.clone();
            filter.condition_values(&mut joint, &obs)?;
            let approx = filter.project_values(&joint);
            let e = filter.step_errors(&exact, &approx)?;
            let w = node.weight * p_obs;
            sums[t][0] += w * e.delta_true;
            sums[t][1] += w * e.marginal_linf[0];
            sums[t][2] += w * e.marginal_linf.get(1).copied().unwrap_or(0.0);
            stack.push((t + 1, Node { exact, approx, weight: w }));
        }
    }
    let column = |k: usize| sums.iter().map(|a| a[k]).collect::<Vec<_>>();
    Ok(ExpectedErrors {
        joint: column(0),
        x_marginal: column(1),
        y_marginal: column(2),
        x_marginal_se: vec![0.0; steps],
        x_average_se: 0.0,
    })
}

/// Negative cells removed when a corrected joint is clamped.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct IncidentLog {
    pub count: usize,
    pub max_magnitude: f64,
}

impl IncidentLog {
    pub fn merge(&mut self, other: &IncidentLog) {
        self.count += other.count;
        self.max_magnitude = self.max_magnitude.max(other.max_magnitude);
    }
}

/// Cells more negative than this are logged as incidents; smaller ones are
/// rounding noise and are clamped silently.
pub const INCIDENT_TOL: f64 = 1e-12;

fn clamp_normalize(values: &mut [f64], log: &mut IncidentLog) {
    for v in values.iter_mut() {
        if *v < 0.0 {
            if *v < -INCIDENT_TOL {
                log.count += 1;
                log.max_magnitude = log.max_magnitude.max(-*v);
            }
            *v = 0.0;
        }
    }
    let total: f64 = values.iter().sum();
    values.iter_mut().for_each(|v| *v /= total);
}

/// `a + (b − c)` cellwise.
fn add_dependence(base: &[f64], with: &[f64], without: &[f64]) -> Vec<f64> {
    base.iter().zip(with).zip(without).map(|((a, b), c)| a + (b - c)).collect()
}

/// Exact posterior advanced in lockstep with an isolation process's factor
/// marginals.
#[derive(Clone, Debug, PartialEq)]
pub struct IsolationState {
    exact: Vec<f64>,
    process: Vec<Vec<f64>>,
    incidents: IncidentLog,
}

impl IsolationState {
    /// Both sides start from the model's prior.
    pub fn initial(filter: &Filter<'_>) -> Self {
        let exact = filter.model().prior_joint().into_values();
        Self {
            process: filter.project_values(&exact),
            exact,
            incidents: IncidentLog::default(),
        }
    }

    /// Exact posterior over joint states.
    pub fn exact(&self) -> &[f64] {
        &self.exact
    }

    /// Factor marginals maintained by the process.
    pub fn process(&self) -> &[Vec<f64>] {
        &self.process
    }

    pub fn incidents(&self) -> IncidentLog {
        self.incidents
    }
}

fn exact_advance(filter: &Filter<'_>, exact: &[f64], obs: &[usize]) -> Result<(Vec<f64>, Vec<f64>)> {
    let prior = filter.predict_values(exact);
    let mut posterior = prior.clone();
    filter.condition_values(&mut posterior, obs)?;
    Ok((prior, posterior))
}

fn first_factor_kl(filter: &Filter<'_>, exact: &[f64], process: &[Vec<f64>]) -> Result<f64> {
    kl_values(&filter.project_values(exact)[0], &process[0])
}

/// One step of the process that only ignores old dependence while
/// propagating. Returns the new state and the KL error on the first factor.
pub fn propagation_error_step(filter: &Filter<'_>, state: &IsolationState, obs: &[usize]) -> Result<(IsolationState, f64)> {
    let (true_prior, posterior) = exact_advance(filter, &state.exact, obs)?;
    let true_product = filter.product_values(&filter.project_values(&true_prior));
    let independent_prior = filter.predict_values(&filter.product_values(&state.process));
    let mut incidents = state.incidents;
    // wrong prior marginals, true prior dependence
    let mut corrected = add_dependence(
        &filter.product_values(&filter.project_values(&independent_prior)),
        &true_prior,
        &true_product,
    );
    clamp_normalize(&mut corrected, &mut incidents);
    filter.condition_values(&mut corrected, obs)?;
    let process = filter.project_values(&corrected);
    let err = first_factor_kl(filter, &posterior, &process)?;
    Ok((
        IsolationState {
            exact: posterior,
            process,
            incidents,
        },
        err,
    ))
}

/// One step of the process that only ignores old dependence while
/// conditioning. Returns the new state and the KL error on the first factor.
pub fn conditioning_error_step(filter: &Filter<'_>, state: &IsolationState, obs: &[usize]) -> Result<(IsolationState, f64)> {
    let (_, posterior) = exact_advance(filter, &state.exact, obs)?;
    let mut incidents = state.incidents;
    let old_product = filter.product_values(&filter.project_values(&state.exact));
    let process_product = filter.product_values(&state.process);
    // dependence created by one transition from independent factors
    let independent_prior = filter.predict_values(&process_product);
    let independent_product = filter.product_values(&filter.project_values(&independent_prior));
    // process marginals with the true old dependence, propagated
    let mut previous = add_dependence(&process_product, &state.exact, &old_product);
    clamp_normalize(&mut previous, &mut incidents);
    let prior = filter.predict_values(&previous);
    let mut corrected = add_dependence(
        &filter.product_values(&filter.project_values(&prior)),
        &independent_prior,
        &independent_product,
    );
    clamp_normalize(&mut corrected, &mut incidents);
    filter.condition_values(&mut corrected, obs)?;
    let process = filter.project_values(&corrected);
    let err = first_factor_kl(filter, &posterior, &process)?;
    Ok((
        IsolationState {
            exact: posterior,
            process,
            incidents,
        },
        err,
    ))
}

/// First-factor KL errors of plain factored monitoring and of the two
/// isolation processes at one step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ErrorSources {
    pub total: f64,
    pub propagation: f64,
    pub conditioning: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorDecomposition {
    pub steps: Vec<ErrorSources>,
    pub propagation_incidents: IncidentLog,
    pub conditioning_incidents: IncidentLog,
}

impl ErrorDecomposition {
    pub fn time_average(&self, f: impl Fn(&ErrorSources) -> f64) -> f64 {
        if self.steps.is_empty() {
            return 0.0;
        }
        self.steps.iter().map(f).sum::<f64>() / self.steps.len() as f64
    }
}

/// Runs the exact filter, factored monitoring and both isolation processes
/// on the same observations.
pub fn run_error_decomposition(model: &DbnModel, trajectory: &Trajectory) -> Result<ErrorDecomposition> {
    let filter = Filter::new(model);
    if filter.factorization().len() < 2 {
        return Err(Error::InvalidArgument("error sources need at least two factors".into()));
    }
    let total = filter.compare(trajectory, Mode::Monitoring)?;
    let mut a = IsolationState::initial(&filter);
    let mut b = a.clone();
    let mut steps = Vec::with_capacity(trajectory.len());
    for (t, obs) in trajectory.observations.iter().enumerate() {
        let wrap = |e: Error| match e {
            Error::ZeroNormalizer => Error::ImpossibleEvidence { step: t + 1 },
            e => e,
        };
        let (next_a, ea) = propagation_error_step(&filter, &a, obs).map_err(wrap)?;
        let (next_b, eb) = conditioning_error_step(&filter, &b, obs).map_err(wrap)?;
        a = next_a;
        b = next_b;
        steps.push(ErrorSources {
            total: total.steps[t].kl_factor[0],
            propagation: ea,
            conditioning: eb,
        });
    }
    Ok(ErrorDecomposition {
        steps,
        propagation_incidents: a.incidents,
        conditioning_incidents: b.incidents,
    })
}

/// `ℓ∞` distance between an exact joint and the product of its factor marginals.
pub fn joint_dependence(filter: &Filter<'_>, exact: &[f64]) -> f64 {
    linf_values(exact, &filter.product_values(&filter.project_values(exact)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{generate_mixing_model, generate_two_chain_system, MixingConfig, TwoChainConfig};

    fn system() -> TwoChainSystem {
        TwoChainSystem::from_params(0.7, 0.4, [0.2, 0.9], [0.3, 0.6], [0.1, 0.5], [0.8, 0.35], [0.25, 0.85]).unwrap()
    }

    #[test]
    fn influences_are_row_differences() {
        let q = bound_quantities(&system(), TypoReading::AsPrinted);
        assert!((q.x_on_x - 0.7).abs() < 1e-12);
        assert!((q.y_on_x - 0.3).abs() < 1e-12);
        assert!((q.x_on_y - 0.4).abs() < 1e-12);
        assert!((q.y_on_y - 0.45).abs() < 1e-12);
        assert!((q.evidence - 0.6).abs() < 1e-12);
        assert!((q.x_on_both - (0.9 * 0.5 - 0.2 * 0.1)).abs() < 1e-12);
        assert!((q.y_on_both - (0.6 * 0.35 - 0.3 * 0.8f64).abs()).abs() < 1e-12);
    }

    #[test]
    fn readings_differ_only_in_y_retention() {
        let a = bound_quantities(&system(), TypoReading::AsPrinted);
        let b = bound_quantities(&system(), TypoReading::Symmetric);
        assert_eq!(a.x_retention, b.x_retention);
        assert_eq!(a.y_on_both, b.y_on_both);
        let inner = |last: f64| a.evidence * (a.y_on_y - 2.0 * a.y_on_both + 2.0 * last);
        assert_eq!(a.y_retention, a.y_on_y.max(inner(a.y_on_y)));
        assert_eq!(b.y_retention, b.y_on_y.max(inner(b.y_on_x)));
    }

    #[test]
    fn constant_rows_give_zero_influence() {
        let sys = TwoChainSystem::from_params(0.5, 0.5, [0.3, 0.3], [0.6, 0.6], [0.2, 0.2], [0.9, 0.9], [0.4, 0.7]).unwrap();
        let q = bound_quantities(&sys, TypoReading::AsPrinted);
        for v in [q.x_on_x, q.y_on_x, q.x_on_y, q.y_on_y, q.x_retention, q.y_retention] {
            assert_eq!(v, 0.0);
        }
        let b = error_bound(&q).bound().unwrap();
        assert_eq!((b.joint, b.x_marginal, b.y_marginal), (0.0, 0.0, 0.0));
    }

    #[test]
    fn deterministic_evidence_gives_zero_bound() {
        let sys = TwoChainSystem::from_params(0.7, 0.4, [0.2, 0.9], [0.3, 0.6], [0.1, 0.5], [0.8, 0.35], [0.0, 1.0]).unwrap();
        let q = bound_quantities(&sys, TypoReading::AsPrinted);
        assert_eq!(q.evidence, 1.0);
        let b = error_bound(&q).bound().unwrap();
        assert_eq!((b.joint, b.x_marginal, b.y_marginal), (0.0, 0.0, 0.0));
    }

    #[test]
    fn bound_formula_by_hand() {
        let q = bound_quantities(&system(), TypoReading::AsPrinted);
        let blur = 1.0 - 0.36;
        let l = 0.7 * 0.4 * 0.7 * 0.4 + 0.3 * 0.6 * 0.3 * 0.45;
        let m = 0.7 * 0.6 * 0.7 * 0.45 + 0.3 * 0.4 * 0.3 * 0.4;
        assert!((q.shared_moves - l).abs() < 1e-12 && (q.crossed_moves - m).abs() < 1e-12);
        let h = blur * l / (4.0 * (1.0 - blur * m));
        let b = error_bound(&q).bound().unwrap();
        assert!((b.joint - h).abs() < 1e-12);
        let j = 2.0 * h * (1.0 - 0.6 * 0.45) * 0.6 * m / q.denominator;
        assert!((b.x_marginal - j).abs() < 1e-12);
    }

    #[test]
    fn exact_expectation_matches_sampling() {
        let (_, model) = generate_two_chain_system(3, &TwoChainConfig::default()).unwrap();
        let exact = expected_errors_exact(&model, 6).unwrap();
        let sampled = expected_errors_sampled(&model, 6, 4000, 9).unwrap();
        for t in 0..6 {
            let se = sampled.x_marginal_se[t].max(1e-12);
            assert!((exact.x_marginal[t] - sampled.x_marginal[t]).abs() <= 4.0 * se, "step {t}");
        }
        assert!(expected_errors_exact(&model, 9).is_err());
    }

    #[test]
    fn separable_model_has_no_propagation_error() {
        let m = generate_mixing_model(1.0, 3, &MixingConfig::default()).unwrap();
        let traj = sample_trajectory(&m, 25, 4).unwrap();
        let d = run_error_decomposition(&m, &traj).unwrap();
        assert!(d.steps.iter().all(|s| s.propagation < 1e-9));
        assert_eq!(d.propagation_incidents.count, 0);
    }

    #[test]
    fn exact_side_matches_standalone_filter() {
        let m = generate_mixing_model(0.3, 8, &MixingConfig::default()).unwrap();
        let traj = sample_trajectory(&m, 10, 2).unwrap();
        let filter = Filter::new(&m);
        let mut exact = m.prior_joint().into_values();
        let mut a = IsolationState::initial(&filter);
        let mut b = a.clone();
        for obs in &traj.observations {
            exact = filter.predict_values(&exact);
            filter.condition_values(&mut exact, obs).unwrap();
            a = propagation_error_step(&filter, &a, obs).unwrap().0;
            b = conditioning_error_step(&filter, &b, obs).unwrap().0;
            assert_eq!(a.exact(), exact.as_slice());
            assert_eq!(b.exact(), exact.as_slice());
        }
    }

    #[test]
    fn uninformative_evidence_has_no_conditioning_error() {
        let m = generate_mixing_model(0.2, 5, &MixingConfig { obs_accuracy: (0.5, 0.5) }).unwrap();
        let traj = sample_trajectory(&m, 25, 1).unwrap();
        let d = run_error_decomposition(&m, &traj).unwrap();
        assert!(d.steps.iter().all(|s| s.conditioning < 1e-12), "{:?}", d.steps);
    }

    #[test]
    fn parsing_readings() {
        assert_eq!("symmetric".parse::<TypoReading>().unwrap(), TypoReading::Symmetric);
        assert_eq!(TypoReading::AsPrinted.to_string(), "as-printed");
        assert!("other".parse::<TypoReading>().is_err());
    }
}
