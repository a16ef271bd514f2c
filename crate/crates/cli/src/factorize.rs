use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::ValueEnum;
use dbnsep::model::parse_model;
use dbnsep::separability::{search_factorization, Granularity};

use crate::{read_input, Format};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Level {
    /// Score each factor's joint transition table.
    Factor,
    /// Score each variable's own table with parents grouped by factor.
    Variable,
}

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Model document.
    model: PathBuf,
    #[arg(long, default_value_t = 2)]
    max_factor_size: usize,
    #[arg(long, value_enum, default_value_t = Level::Variable)]
    granularity: Level,
    /// Number of ranked factorizations to print (0 prints all).
    #[arg(long, default_value_t = 10)]
    top: usize,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

pub fn run(args: &Args, out: &mut dyn Write) -> anyhow::Result<ExitCode> {
    let model = parse_model(&read_input(&args.model)?)?;
    let granularity = match args.granularity {
        Level::Factor => Granularity::Factor,
        Level::Variable => Granularity::Variable,
    };
    let ranked = search_factorization(&model, args.max_factor_size, granularity)?;
    let shown = if args.top == 0 { ranked.len() } else { args.top.min(ranked.len()) };
    match args.format {
        Format::Text => {
            writeln!(out, "{} candidate factorizations", ranked.len())?;
            for (i, r) in ranked.iter().take(shown).enumerate() {
                let degrees: Vec<String> = r.degrees.iter().map(|d| format!("{d:.4}")).collect();
                writeln!(
                    out,
                    "{:>3}. {:<32} min {:.6}  mean {:.6}  [{}]",
                    i + 1,
                    r.label,
                    r.min_degree,
                    r.mean_degree,
                    degrees.join(" ")
                )?;
            }
        }
        Format::Csv => {
            writeln!(out, "rank,factorization,min_degree,mean_degree,degrees")?;
            for (i, r) in ranked.iter().take(shown).enumerate() {
                let degrees: Vec<String> = r.degrees.iter().map(f64::to_string).collect();
                writeln!(
                    out,
                    "{},\"{}\",{},{},{}",
                    i + 1,
                    r.label,
                    r.min_degree,
                    r.mean_degree,
                    degrees.join(";")
                )?;
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
