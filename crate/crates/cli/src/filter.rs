use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail};
use clap::ValueEnum;
use dbnsep::filtering::{sample_trajectory, Filter, Trajectory};
use dbnsep::model::{parse_model, DbnModel};
use dbnsep::Error;

use crate::read_input;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FilterMode {
    Exact,
    Bk,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Task {
    /// Ignore the observations.
    Predict,
    /// Condition on the observations.
    Monitor,
}

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Model document.
    model: PathBuf,
    /// Observation CSV: a header of observation variable names, then one row
    /// of value indices per step.
    #[arg(long, conflicts_with = "sample")]
    obs: Option<PathBuf>,
    /// Sample a trajectory of this many steps from the model.
    #[arg(long, value_name = "T")]
    sample: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = FilterMode::Both)]
    mode: FilterMode,
    #[arg(long, value_enum, default_value_t = Task::Monitor)]
    task: Task,
}

fn invalid(msg: String) -> anyhow::Error {
    anyhow!(Error::InvalidArgument(msg))
}

/// Reads an observation CSV whose columns may appear in any order.
fn parse_observations(model: &DbnModel, text: &str) -> anyhow::Result<Vec<Vec<usize>>> {
    let scope = model.observation_scope();
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines.next().ok_or_else(|| invalid("observation file is empty".into()))?;
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    let mut order = Vec::with_capacity(columns.len());
    for c in &columns {
        let pos = scope
            .position(c)
            .ok_or_else(|| anyhow!(Error::UnknownVariable(c.to_string())))?;
        if order.contains(&pos) {
            return Err(anyhow!(Error::DuplicateVariable(c.to_string())));
        }
        order.push(pos);
    }
    if let Some(missing) = scope.names().iter().find(|n| !columns.contains(n)) {
        bail!(invalid(format!("observation file has no column for `{missing}`")));
    }
    let cards = scope.cards();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let step = i + 1;
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != order.len() {
            bail!(invalid(format!(
                "step {step}: expected {} values, found {}",
                order.len(),
                cells.len()
            )));
        }
        let mut obs = vec![0; order.len()];
        for (cell, &pos) in cells.iter().zip(&order) {
            let v: usize = cell
                .parse()
                .map_err(|_| invalid(format!("step {step}: `{cell}` is not a value index")))?;
            if v >= cards[pos] {
                bail!(invalid(format!(
                    "step {step}: value {v} out of range for `{}` (cardinality {})",
                    scope.names()[pos],
                    cards[pos]
                )));
            }
            obs[pos] = v;
        }
        rows.push(obs);
    }
    if rows.is_empty() {
        bail!(invalid("observation file has no steps".into()));
    }
    Ok(rows)
}

fn observations(args: &Args, model: &DbnModel) -> anyhow::Result<Vec<Vec<usize>>> {
    match (&args.obs, args.sample) {
        (Some(path), _) => parse_observations(model, &read_input(path)?),
        (None, Some(t)) => {
            let Trajectory { observations, .. } = sample_trajectory(model, t, args.seed)?;
            Ok(observations)
        }
        (None, None) => bail!(invalid("give --obs FILE or --sample T".into())),
    }
}

fn impossible(e: Error, step: usize) -> Error {
    match e {
        Error::ZeroNormalizer => Error::ImpossibleEvidence { step },
        e => e,
    }
}

/// Writes `step,filter,quantity,value` rows: the probability of each state
/// variable's last value per filter, and error metrics when both run.
pub fn run(args: &Args, out: &mut dyn Write) -> anyhow::Result<ExitCode> {
    let model = parse_model(&read_input(&args.model)?)?;
    let obs = observations(args, &model)?;
    let filter = Filter::new(&model);
    let names: Vec<String> = model.state().names().iter().map(|s| s.to_string()).collect();
    let run_exact = args.mode != FilterMode::Bk;
    let run_bk = args.mode != FilterMode::Exact;
    let monitor = args.task == Task::Monitor;

    let mut exact = model.prior_joint().into_values();
    let mut approx = filter.project_values(&exact);
    writeln!(out, "step,filter,quantity,value")?;
    for (t, o) in obs.iter().enumerate() {
        let step = t + 1;
        if run_exact {
            exact = filter.predict_values(&exact);
            if monitor {
                filter.condition_values(&mut exact, o).map_err(|e| impossible(e, step))?;
            }
            write_marginals(&filter, &names, step, "exact", &exact, out)?;
        }
        if run_bk {
            let mut joint = filter.predict_values(&filter.product_values(&approx));
            if monitor {
                filter.condition_values(&mut joint, o).map_err(|e| impossible(e, step))?;
            }
            approx = filter.project_values(&joint);
            write_marginals(&filter, &names, step, "bk", &filter.product_values(&approx), out)?;
        }
        if run_exact && run_bk {
            let e = filter.step_errors(&exact, &approx)?;
            for (i, kl) in e.kl_factor.iter().enumerate() {
                writeln!(out, "{step},error,kl_factor_{i},{kl}")?;
            }
            writeln!(out, "{step},error,delta_bk,{}", e.delta_bk)?;
            writeln!(out, "{step},error,delta_true,{}", e.delta_true)?;
            writeln!(out, "{step},error,dependence_kl,{}", e.dependence_kl)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn write_marginals(
    filter: &Filter,
    names: &[String],
    step: usize,
    label: &str,
    joint: &[f64],
    out: &mut dyn Write,
) -> std::io::Result<()> {
    for (i, name) in names.iter().enumerate() {
        let m = filter.var_marginal(joint, i);
        writeln!(out, "{step},{label},p_{name},{}", m[m.len() - 1])?;
    }
    Ok(())
}
