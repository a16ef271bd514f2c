use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use dbnsep::error_analysis::TypoReading;
use dbnsep::experiments::{run_experiment, write_combined, Experiment, ExperimentConfig};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Experiment id (separability-sweep, error-sources, factorization,
    /// error-bound) or `all`.
    #[arg(value_parser = parse_selection)]
    experiment: Selection,
    #[arg(long, default_value_t = 1000)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 25)]
    steps: usize,
    /// Worker threads (0 uses every core).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Observation sequences per system for the bound experiment.
    #[arg(long, default_value_t = 200)]
    sequences: usize,
    /// Reading of the ambiguous bound term used in the summary.
    #[arg(long, default_value = "as-printed", value_parser = parse_reading)]
    reading: TypoReading,
    /// Output directory for the CSV files and summary.
    #[arg(long, env = "DBNSEP_OUT_DIR", default_value = "results")]
    out: PathBuf,
}

#[derive(Clone, Debug)]
pub enum Selection {
    All,
    One(Experiment),
}

fn parse_selection(s: &str) -> Result<Selection, String> {
    if s == "all" {
        return Ok(Selection::All);
    }
    s.parse().map(Selection::One).map_err(|e: dbnsep::Error| e.to_string())
}

fn parse_reading(s: &str) -> Result<TypoReading, String> {
    s.parse().map_err(|e: dbnsep::Error| e.to_string())
}

pub fn run(args: &Args, out: &mut dyn Write) -> anyhow::Result<ExitCode> {
    let config = ExperimentConfig {
        runs: args.runs,
        steps: args.steps,
        master_seed: args.seed,
        sequences: args.sequences,
        reading: args.reading,
        ..ExperimentConfig::default()
    };
    config.validate()?;
    let experiments = match &args.experiment {
        Selection::All => Experiment::ALL.to_vec(),
        Selection::One(e) => vec![*e],
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()
        .context("cannot start worker threads")?;
    fs::create_dir_all(&args.out).with_context(|| format!("cannot create `{}`", args.out.display()))?;

    let mut reports = Vec::with_capacity(experiments.len());
    for e in experiments {
        let report = pool.install(|| run_experiment(e, &config))?;
        let path = args.out.join(format!("{}.csv", e.id()));
        let mut w = BufWriter::new(File::create(&path).with_context(|| format!("cannot write `{}`", path.display()))?);
        report.write_csv(&mut w)?;
        w.flush()?;
        write!(out, "{}", report.summary())?;
        writeln!(out, "  wrote {}", path.display())?;
        reports.push(report);
    }

    let combined = args.out.join("combined.csv");
    let mut w = BufWriter::new(File::create(&combined).with_context(|| format!("cannot write `{}`", combined.display()))?);
    write_combined(&reports, &mut w)?;
    w.flush()?;
    let summary: String = reports.iter().map(|r| r.summary()).collect();
    let summary_path = args.out.join("summary.txt");
    fs::write(&summary_path, summary).with_context(|| format!("cannot write `{}`", summary_path.display()))?;
    writeln!(out, "wrote {} and {}", combined.display(), summary_path.display())?;
    Ok(ExitCode::SUCCESS)
}
