//! Reproducible Monte-Carlo experiments emitting CSV rows.
//!
//! Every run draws its randomness from a seed that is a pure function of the
//! master seed, the experiment, the grid index and the run index, so results
//! do not depend on scheduling. Rows are sorted before emission.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::error_analysis::{
    bound_quantities, error_bound, expected_errors_sampled, run_error_decomposition, TypoReading,
};
use crate::filtering::{sample_trajectory, ErrorSeries, Filter, Mode};
use crate::model::{
    generate_mixing_model, generate_six_variable_model, generate_two_chain_system, MixingConfig,
    TwoChainConfig,
};
use crate::separability::{is_self_sufficient, variable_degrees};

/// CSV header shared by every experiment.
pub const CSV_HEADER: &str = "experiment,alpha,run,step,metric,value,incidents";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Experiment {
    /// Factored-filter error and factor dependence against degree of separability.
    SeparabilitySweep,
    /// Total error split into propagation and conditioning sources.
    ErrorSources,
    /// Two factorizations of the six-variable model.
    Factorization,
    /// Expected-error bound against sampled errors on two-chain systems.
    ErrorBound,
}

impl Experiment {
    pub const ALL: [Experiment; 4] = [
        Experiment::SeparabilitySweep,
        Experiment::ErrorSources,
        Experiment::Factorization,
        Experiment::ErrorBound,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Experiment::SeparabilitySweep => "separability-sweep",
            Experiment::ErrorSources => "error-sources",
            Experiment::Factorization => "factorization",
            Experiment::ErrorBound => "error-bound",
        }
    }

    fn seed_tag(self) -> u64 {
        self as u64 + 1
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Experiment {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.id() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown experiment `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub runs: usize,
    pub steps: usize,
    pub alpha_grid: Vec<f64>,
    pub master_seed: u64,
    /// Range of the observation accuracy in the mixing model.
    pub obs_accuracy: (f64, f64),
    /// Reading used for the headline bound; both are always emitted.
    pub reading: TypoReading,
    /// Observation sequences sampled per system by the bound experiment.
    pub sequences: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            runs: 1000,
            steps: 25,
            alpha_grid: (0..=10).map(|i| i as f64 / 10.0).collect(),
            master_seed: 0,
            obs_accuracy: MixingConfig::default().obs_accuracy,
            reading: TypoReading::AsPrinted,
            sequences: 200,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::InvalidArgument("runs must be at least 1".into()));
        }
        if self.steps == 0 {
            return Err(Error::InvalidArgument("steps must be at least 1".into()));
        }
        if self.alpha_grid.is_empty() || self.alpha_grid.iter().any(|a| !(0.0..=1.0).contains(a)) {
            return Err(Error::InvalidArgument("alpha grid values must lie in [0, 1]".into()));
        }
        if self.sequences < 2 {
            return Err(Error::InvalidArgument("sequences must be at least 2".into()));
        }
        let (lo, hi) = self.obs_accuracy;
        if !(0.0..=1.0).contains(&lo) || !(lo..=1.0).contains(&hi) {
            return Err(Error::InvalidArgument(format!("observation accuracy range ({lo}, {hi}) invalid")));
        }
        Ok(())
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of one run.
pub fn run_seed(master: u64, experiment: Experiment, grid_index: usize, run: usize) -> u64 {
    [experiment.seed_tag(), grid_index as u64, run as u64]
        .into_iter()
        .fold(splitmix(master), |h, v| splitmix(h ^ splitmix(v)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultRow {
    pub experiment: Experiment,
    pub alpha: Option<f64>,
    /// `-1` on aggregate rows.
    pub run: i64,
    /// `0` for time averages, the final step for final-step values, `-1` on
    /// aggregate rows.
    pub step: i64,
    pub metric: String,
    pub value: f64,
    pub incidents: usize,
}

impl ResultRow {
    fn key(&self) -> (Experiment, i64, i64, i64, &str) {
        // alpha grid values are in [0, 1]; order them by their bit pattern
        let a = self.alpha.map_or(-1, |a| a.to_bits() as i64);
        (self.experiment, a, self.run, self.step, self.metric.as_str())
    }

    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.experiment,
            self.alpha.map(|a| a.to_string()).unwrap_or_default(),
            self.run,
            self.step,
            self.metric,
            self.value,
            self.incidents
        )
    }
}

/// Rows of one experiment plus aggregate lookups.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub experiment: Experiment,
    pub config: ExperimentConfig,
    pub rows: Vec<ResultRow>,
}

impl ExperimentReport {
    /// The aggregate value of `metric`, for `alpha` when the experiment has a grid.
    pub fn aggregate(&self, metric: &str, alpha: Option<f64>) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.run == -1 && r.metric == metric && r.alpha == alpha)
            .map(|r| r.value)
    }

    /// Aggregates of `metric` along the alpha grid.
    pub fn curve(&self, metric: &str) -> Vec<(f64, f64)> {
        self.config
            .alpha_grid
            .iter()
            .filter_map(|&a| self.aggregate(metric, Some(a)).map(|v| (a, v)))
            .collect()
    }

    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        self.write_rows(out)
    }

    pub fn write_rows<W: Write>(&self, out: &mut W) -> Result<()> {
        for r in &self.rows {
            writeln!(out, "{}", r.to_csv())?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }

    /// Human-readable digest of the aggregates.
    pub fn summary(&self) -> String {
        let mut s = format!(
            "{}: runs {}, steps {}, seed {}\n",
            self.experiment, self.config.runs, self.config.steps, self.config.master_seed
        );
        let mut metrics: Vec<&str> = Vec::new();
        for r in self.rows.iter().filter(|r| r.run == -1) {
            if !metrics.contains(&r.metric.as_str()) {
                metrics.push(&r.metric);
            }
        }
        for m in metrics {
            let values: Vec<String> = self
                .rows
                .iter()
                .filter(|r| r.run == -1 && r.metric == m)
                .map(|r| match r.alpha {
                    Some(a) => format!("{a:.1}:{:.3e}", r.value),
                    None => format!("{:.6e}", r.value),
                })
                .collect();
            s.push_str(&format!("  {m:<28} {}\n", values.join(" ")));
        }
        s
    }
}

/// Writes the rows of several reports under one header.
pub fn write_combined<W: Write>(reports: &[ExperimentReport], out: &mut W) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in reports {
        r.write_rows(out)?;
    }
    Ok(())
}

pub fn run_experiment(experiment: Experiment, config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let rows = match experiment {
        Experiment::SeparabilitySweep => separability_sweep(config)?,
        Experiment::ErrorSources => error_sources(config)?,
        Experiment::Factorization => factorization(config)?,
        Experiment::ErrorBound => bound_check(config)?,
    };
    Ok(ExperimentReport {
        experiment,
        config: config.clone(),
        rows: finish(rows),
    })
}

/// Per-run rows: `(alpha, run, step, metric, value, incidents)`.
type RunRows = Vec<(Option<f64>, usize, i64, String, f64, usize)>;

fn finish_with(experiment: Experiment, runs: Vec<RunRows>) -> Vec<ResultRow> {
    runs.into_iter()
        .flatten()
        .map(|(alpha, run, step, metric, value, incidents)| ResultRow {
            experiment,
            alpha,
            run: run as i64,
            step,
            metric,
            value,
            incidents,
        })
        .collect()
}

/// Sorts rows and appends the mean of every per-run metric.
fn finish(mut rows: Vec<ResultRow>) -> Vec<ResultRow> {
    rows.sort_by(|a, b| a.key().cmp(&b.key()));
    let mut aggregates: Vec<ResultRow> = Vec::new();
    let mut groups: Vec<((Experiment, Option<u64>, String), Vec<&ResultRow>)> = Vec::new();
    for r in rows.iter().filter(|r| r.run >= 0) {
        let key = (r.experiment, r.alpha.map(f64::to_bits), r.metric.clone());
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(r),
            None => groups.push((key, vec![r])),
        }
    }
    for ((experiment, alpha, metric), members) in groups {
        let value = members.iter().map(|r| r.value).sum::<f64>() / members.len() as f64;
        aggregates.push(ResultRow {
            experiment,
            alpha: alpha.map(f64::from_bits),
            run: -1,
            step: -1,
            metric,
            value,
            incidents: members.iter().map(|r| r.incidents).sum(),
        });
    }
    rows.extend(aggregates);
    rows.sort_by(|a, b| a.key().cmp(&b.key()));
    rows
}

fn grid_jobs(config: &ExperimentConfig) -> Vec<(usize, f64, usize)> {
    config
        .alpha_grid
        .iter()
        .enumerate()
        .flat_map(|(i, &a)| (0..config.runs).map(move |r| (i, a, r)))
        .collect()
}

fn averaged(series: &ErrorSeries, f: impl Fn(&crate::filtering::StepErrors) -> f64) -> (f64, f64) {
    (series.time_average(&f), series.last().map(&f).unwrap_or(0.0))
}

fn push_pair(rows: &mut RunRows, alpha: Option<f64>, run: usize, steps: usize, metric: &str, (avg, last): (f64, f64), incidents: usize) {
    rows.push((alpha, run, 0, metric.to_string(), avg, incidents));
    rows.push((alpha, run, steps as i64, format!("{metric}_final"), last, incidents));
}

fn separability_sweep(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let exp = Experiment::SeparabilitySweep;
    let model_config = MixingConfig {
        obs_accuracy: config.obs_accuracy,
    };
    let runs = grid_jobs(config)
        .into_par_iter()
        .map(|(i, alpha, run)| -> Result<RunRows> {
            let seed = run_seed(config.master_seed, exp, i, run);
            let model = generate_mixing_model(alpha, seed, &model_config)?;
            let traj = sample_trajectory(&model, config.steps, splitmix(seed))?;
            let filter = Filter::new(&model);
            let pred = filter.compare(&traj, Mode::Prediction)?;
            let mon = filter.compare(&traj, Mode::Monitoring)?;
            let mut rows = RunRows::new();
            let a = Some(alpha);
            push_pair(&mut rows, a, run, config.steps, "prediction_kl", averaged(&pred, |e| e.kl_factor[0]), 0);
            push_pair(&mut rows, a, run, config.steps, "monitoring_kl", averaged(&mon, |e| e.kl_factor[0]), 0);
            push_pair(&mut rows, a, run, config.steps, "dependence_kl", averaged(&mon, |e| e.dependence_kl), 0);
            push_pair(&mut rows, a, run, config.steps, "prediction_dependence_kl", averaged(&pred, |e| e.dependence_kl), 0);
            Ok(rows)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(finish_with(exp, runs))
}

fn error_sources(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let exp = Experiment::ErrorSources;
    let model_config = MixingConfig {
        obs_accuracy: config.obs_accuracy,
    };
    let runs = grid_jobs(config)
        .into_par_iter()
        .map(|(i, alpha, run)| -> Result<RunRows> {
            let seed = run_seed(config.master_seed, exp, i, run);
            let model = generate_mixing_model(alpha, seed, &model_config)?;
            let traj = sample_trajectory(&model, config.steps, splitmix(seed))?;
            let d = run_error_decomposition(&model, &traj)?;
            let last = d.steps.last().copied();
            let mut rows = RunRows::new();
            let a = Some(alpha);
            let pa = d.propagation_incidents.count;
            let pb = d.conditioning_incidents.count;
            push_pair(&mut rows, a, run, config.steps, "total_kl", (d.time_average(|s| s.total), last.map_or(0.0, |s| s.total)), 0);
            push_pair(&mut rows, a, run, config.steps, "propagation_kl", (d.time_average(|s| s.propagation), last.map_or(0.0, |s| s.propagation)), pa);
            push_pair(&mut rows, a, run, config.steps, "conditioning_kl", (d.time_average(|s| s.conditioning), last.map_or(0.0, |s| s.conditioning)), pb);
            Ok(rows)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(finish_with(exp, runs))
}

/// Metric prefixes of the two compared factorizations.
pub const STRUCTURAL: &str = "structural";
pub const SEPARABLE: &str = "separable";

fn factorization(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let exp = Experiment::Factorization;
    let six = generate_six_variable_model()?;
    let model = &six.model;
    let target = model
        .state()
        .position("U")
        .ok_or_else(|| Error::Internal("six-variable model lacks U".into()))?;

    let mut rows = RunRows::new();
    for (name, f) in [(STRUCTURAL, &six.structural), (SEPARABLE, &six.separable)] {
        let degrees = variable_degrees(model, f)?;
        let min = degrees.iter().copied().fold(1.0, f64::min);
        rows.push((None, 0, -2, format!("{name}_min_variable_degree"), min, 0));
        let factor_level = is_self_sufficient(model, f, 1e-9)?;
        let fmin = factor_level.degrees.iter().copied().fold(1.0, f64::min);
        rows.push((None, 0, -2, format!("{name}_min_factor_degree"), fmin, 0));
    }
    let mut runs = (0..config.runs)
        .into_par_iter()
        .map(|run| -> Result<RunRows> {
            let seed = run_seed(config.master_seed, exp, 0, run);
            let traj = sample_trajectory(model, config.steps, seed)?;
            let mut rows = RunRows::new();
            for (name, f) in [(STRUCTURAL, &six.structural), (SEPARABLE, &six.separable)] {
                let series = Filter::with_factorization(model, f.clone()).compare(&traj, Mode::Monitoring)?;
                push_pair(&mut rows, None, run, config.steps, &format!("{name}_abs_error"), averaged(&series, |e| e.abs_error[target]), 0);
                push_pair(&mut rows, None, run, config.steps, &format!("{name}_kl"), averaged(&series, |e| e.kl_var[target]), 0);
            }
            Ok(rows)
        })
        .collect::<Result<Vec<_>>>()?;
    // the structural checks are properties of the model, reported once as aggregates
    let checks: Vec<ResultRow> = rows
        .into_iter()
        .map(|(alpha, _, _, metric, value, incidents)| ResultRow {
            experiment: exp,
            alpha,
            run: -1,
            step: -1,
            metric,
            value,
            incidents,
        })
        .collect();
    let mut out = finish_with(exp, std::mem::take(&mut runs));
    out.extend(checks);
    Ok(out)
}

fn bound_check(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let exp = Experiment::ErrorBound;
    let runs = (0..config.runs)
        .into_par_iter()
        .map(|run| -> Result<RunRows> {
            let seed = run_seed(config.master_seed, exp, 0, run);
            let (sys, model) = generate_two_chain_system(seed, &TwoChainConfig::default())?;
            let expected = expected_errors_sampled(&model, config.steps, config.sequences, splitmix(seed))?;
            let actual = expected.x_average();
            let mut rows = RunRows::new();
            rows.push((None, run, 0, "actual_x".into(), actual, 0));
            rows.push((None, run, 0, "actual_x_se".into(), expected.x_average_se, 0));
            rows.push((None, run, 0, "actual_x_max_step".into(), expected.x_max(), 0));
            for reading in [TypoReading::AsPrinted, TypoReading::Symmetric] {
                let q = bound_quantities(&sys, reading);
                let outcome = error_bound(&q);
                let tag = reading.to_string().replace('-', "_");
                rows.push((None, run, 0, format!("applicable_{tag}"), f64::from(u8::from(outcome.bound().is_some())), 0));
                if let Some(b) = outcome.bound() {
                    rows.push((None, run, 0, format!("bound_x_{tag}"), b.x_marginal, 0));
                    rows.push((None, run, 0, format!("dominated_{tag}"), f64::from(u8::from(b.x_marginal >= actual)), 0));
                    rows.push((None, run, 0, format!("actual_x_applicable_{tag}"), actual, 0));
                }
            }
            Ok(rows)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(finish_with(exp, runs))
}

/// Spearman rank correlation of two equally long samples (average ranks for ties).
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for k in i..=j {
                r[idx[k]] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (ra, rb) = (ranks(a), ranks(b));
    let n = a.len() as f64;
    let (ma, mb) = (ra.iter().sum::<f64>() / n, rb.iter().sum::<f64>() / n);
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    if va == 0.0 || vb == 0.0 {
        return 0.0;
    }
    cov / (va * vb).sqrt()
}
