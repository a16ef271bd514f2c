//! Benchmark models: the two-factor mixing model, the six-variable
//! factorization example, and separable two-chain systems.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{DbnModel, Factorization};
use crate::error::{Error, Result};
use crate::prob::{Cpd, Scope, Variable};

fn scope(names: &[&str]) -> Scope {
    Scope::new(names.iter().map(|n| Variable::binary(*n)).collect()).expect("distinct names")
}

/// Binary CPD from `P(child = T | row)` values.
fn binary_cpd(child: &str, parents: &[&str], p_true: &[f64]) -> Result<Cpd> {
    Cpd::new(
        scope(&[child]),
        scope(parents),
        p_true.iter().map(|&p| vec![1.0 - p, p]).collect(),
    )
}

/// Configuration of [`generate_mixing_model`].
#[derive(Clone, Debug, PartialEq)]
pub struct MixingConfig {
    /// Range of `P(Z = y | Y = y)`.
    pub obs_accuracy: (f64, f64),
}

impl Default for MixingConfig {
    fn default() -> Self {
        Self {
            obs_accuracy: (0.6, 0.95),
        }
    }
}

/// Two binary chains `X`, `Y` with a noisy observation `Z` of `Y`.
///
/// Each transition CPD is `α·(γ·P_a(·|X-) + (1−γ)·P_b(·|Y-)) + (1−α)·XOR`,
/// where the XOR table sets the child true exactly when `X- ≠ Y-`. Because
/// XOR is the extremal binary residual, the degree of separability of each
/// transition is exactly `alpha`.
pub fn generate_mixing_model(alpha: f64, seed: u64, config: &MixingConfig) -> Result<DbnModel> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidArgument(format!("alpha {alpha} outside [0, 1]")));
    }
    let (lo, hi) = config.obs_accuracy;
    if !(0.0..=1.0).contains(&lo) || !(lo..=1.0).contains(&hi) {
        return Err(Error::InvalidArgument(format!(
            "observation accuracy range ({lo}, {hi}) invalid"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut transition = |child: &str| -> Result<Cpd> {
        let gamma: f64 = rng.gen();
        let pa: [f64; 2] = [rng.gen(), rng.gen()];
        let pb: [f64; 2] = [rng.gen(), rng.gen()];
        // rows (X-, Y-) in lexicographic order
        let p_true: Vec<f64> = (0..4)
            .map(|r| {
                let (x, y) = (r / 2, r % 2);
                let separable = gamma * pa[x] + (1.0 - gamma) * pb[y];
                let xor = if x != y { 1.0 } else { 0.0 };
                alpha * separable + (1.0 - alpha) * xor
            })
            .collect();
        binary_cpd(child, &["X-", "Y-"], &p_true)
    };
    let tx = transition("X")?;
    let ty = transition("Y")?;
    let accuracy = if hi > lo { rng.gen_range(lo..hi) } else { lo };
    let z = binary_cpd("Z", &["Y"], &[1.0 - accuracy, accuracy])?;
    let state = scope(&["X", "Y"]);
    let f = Factorization::singletons(2);
    let prior = DbnModel::uniform_prior(&state, &f);
    DbnModel::new(state, vec![tx, ty], vec![z], prior, f)
}

/// The six-variable model with its two candidate factorizations.
#[derive(Clone, Debug)]
pub struct SixVariableModel {
    /// Factorized as `{UVW, XYZ}`.
    pub model: DbnModel,
    /// `{UVW, XYZ}`, suggested by the graph structure.
    pub structural: Factorization,
    /// `{UV, WX, YZ}`, suggested by separability.
    pub separable: Factorization,
}

/// `P(X = F | X-, Y-, Z-, W-)`, rows with `W-` fastest.
pub const SIX_VARIABLE_X_FALSE: [f64; 16] = [
    0.9, 0.5, 0.7, 0.3, 0.7, 0.3, 0.5, 0.1, 0.5, 0.9, 0.3, 0.7, 0.3, 0.7, 0.1, 0.5,
];

/// Six binary state variables `U, V, W, X, Y, Z`; `Z` is observed exactly
/// through `Zobs`.
///
/// `X` uses the fixed 16-row table, `0.4·[X- ≠ W-] + 0.1 + 0.2·Y- + 0.2·Z-`
/// for `P(X = T)`. `W` reuses it verbatim with parents `(W-, U-, V-, X-)`, i.e.
/// the roles of `X-`/`W-` swapped and `(Y-, Z-)` replaced by `(U-, V-)`.
/// `U, V` and `Y, Z` follow the same pattern: a 0.4 interaction inside the
/// own pair plus `0.1 + 0.4` times the coupled variable. Every single-variable
/// CPD is therefore separable over `{UV, WX, YZ}`.
pub fn generate_six_variable_model() -> Result<SixVariableModel> {
    let names = ["U", "V", "W", "X", "Y", "Z"];
    let state = scope(&names);

    let x_true: Vec<f64> = SIX_VARIABLE_X_FALSE.iter().map(|p| 1.0 - p).collect();
    let x = binary_cpd("X", &["X-", "Y-", "Z-", "W-"], &x_true)?;
    let w = binary_cpd("W", &["W-", "U-", "V-", "X-"], &x_true)?;

    // rows (a-, b-, c-) with c- fastest; `pair` interacts a- with b-
    let triple = |child: &str, parents: [&str; 3], differ: bool| -> Result<Cpd> {
        let p_true: Vec<f64> = (0..8)
            .map(|r: usize| {
                let (a, b, c) = (r >> 2 & 1, r >> 1 & 1, r & 1);
                let pair = if (a != b) == differ { 1.0 } else { 0.0 };
                0.4 * pair + 0.1 + 0.4 * c as f64
            })
            .collect();
        binary_cpd(child, &parents, &p_true)
    };
    let u = triple("U", ["U-", "V-", "W-"], true)?;
    let v = triple("V", ["U-", "V-", "W-"], false)?;
    let y = triple("Y", ["Y-", "Z-", "X-"], true)?;
    let z = triple("Z", ["Y-", "Z-", "X-"], false)?;

    let zobs = binary_cpd("Zobs", &["Z"], &[0.0, 1.0])?;

    let structural = Factorization::new(6, vec![vec![0, 1, 2], vec![3, 4, 5]])?;
    let separable = Factorization::new(6, vec![vec![0, 1], vec![2, 3], vec![4, 5]])?;
    let prior = DbnModel::uniform_prior(&state, &structural);
    let model = DbnModel::new(state, vec![u, v, w, x, y, z], vec![zobs], prior, structural.clone())?;
    Ok(SixVariableModel {
        model,
        structural,
        separable,
    })
}

/// Two binary chains with separable transitions and an observation of `Y`:
///
/// `P(X | X- Y-) = γ_X·P_X^X(X | X-) + (1 − γ_X)·P_X^Y(X | Y-)`,
/// `P(Y | X- Y-) = γ_Y·P_Y^X(Y | X-) + (1 − γ_Y)·P_Y^Y(Y | Y-)`,
/// `P(Z | Y) = P_Z(Z | Y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoChainSystem {
    pub gamma_x: f64,
    pub gamma_y: f64,
    /// `P_X^X(X | X-)`
    pub p_x_x: Cpd,
    /// `P_X^Y(X | Y-)`
    pub p_x_y: Cpd,
    /// `P_Y^X(Y | X-)`
    pub p_y_x: Cpd,
    /// `P_Y^Y(Y | Y-)`
    pub p_y_y: Cpd,
    /// `P_Z(Z | Y)`
    pub p_z: Cpd,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TwoChainConfig {}

impl TwoChainSystem {
    /// Builds a system from `P(second value | parent)` pairs for each component.
    pub fn from_params(
        gamma_x: f64,
        gamma_y: f64,
        p_x_x: [f64; 2],
        p_x_y: [f64; 2],
        p_y_x: [f64; 2],
        p_y_y: [f64; 2],
        p_z: [f64; 2],
    ) -> Result<Self> {
        Ok(Self {
            gamma_x,
            gamma_y,
            p_x_x: binary_cpd("X", &["X-"], &p_x_x)?,
            p_x_y: binary_cpd("X", &["Y-"], &p_x_y)?,
            p_y_x: binary_cpd("Y", &["X-"], &p_y_x)?,
            p_y_y: binary_cpd("Y", &["Y-"], &p_y_y)?,
            p_z: binary_cpd("Z", &["Y"], &p_z)?,
        })
    }

    /// Flat transition CPDs `P(X | X- Y-)` and `P(Y | X- Y-)`.
    pub fn transition_cpds(&self) -> Result<(Cpd, Cpd)> {
        let mix = |gamma: f64, a: &Cpd, b: &Cpd, child: &str| -> Result<Cpd> {
            let mut values = Vec::with_capacity(8);
            for r in 0..4 {
                let (x, y) = (r / 2, r % 2);
                for c in 0..2 {
                    values.push(gamma * a.prob(x, c) + (1.0 - gamma) * b.prob(y, c));
                }
            }
            Cpd::from_flat(scope(&[child]), scope(&["X-", "Y-"]), values)
        };
        Ok((
            mix(self.gamma_x, &self.p_x_x, &self.p_x_y, "X")?,
            mix(self.gamma_y, &self.p_y_x, &self.p_y_y, "Y")?,
        ))
    }

    /// The induced model, factorized as `{X}, {Y}` with a uniform prior.
    pub fn to_model(&self) -> Result<DbnModel> {
        let (tx, ty) = self.transition_cpds()?;
        let state = scope(&["X", "Y"]);
        let f = Factorization::singletons(2);
        let prior = DbnModel::uniform_prior(&state, &f);
        DbnModel::new(state, vec![tx, ty], vec![self.p_z.clone()], prior, f)
    }
}

/// Samples `γ_X, γ_Y ~ U[0,1]` and every component row uniformly.
pub fn generate_two_chain_system(seed: u64, _config: &TwoChainConfig) -> Result<(TwoChainSystem, DbnModel)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gamma_x: f64 = rng.gen();
    let gamma_y: f64 = rng.gen();
    let mut pair = || -> [f64; 2] { [rng.gen(), rng.gen()] };
    let sys = TwoChainSystem::from_params(gamma_x, gamma_y, pair(), pair(), pair(), pair(), pair())?;
    let model = sys.to_model()?;
    Ok((sys, model))
}
