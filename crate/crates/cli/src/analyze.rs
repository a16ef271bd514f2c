use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail};
use dbnsep::model::{parse_document, Document};
use dbnsep::prob::Cpd;
use dbnsep::separability::{analyze, Analysis, Grouping, Method};

use crate::{read_input, Format};

/// Largest tolerated gap between a closed form and the LP under `--verify`.
const VERIFY_TOL: f64 = 1e-6;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Table document or model document.
    input: PathBuf,
    /// Child whose transition table is analyzed (model documents only).
    #[arg(long)]
    child: Option<String>,
    /// Parent groups: groups separated by `|`, variables by `,`
    /// (e.g. "X-,W-|Y-,Z-"). Defaults to one group per parent.
    #[arg(long)]
    grouping: Option<String>,
    #[arg(long, default_value = "auto", value_parser = parse_method)]
    method: Method,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
    /// Cross-check a closed form against the linear program.
    #[arg(long)]
    verify: bool,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: dbnsep::Error| e.to_string())
}

fn load_table(args: &Args) -> anyhow::Result<Cpd> {
    match parse_document(&read_input(&args.input)?)? {
        Document::Table(cpd) => {
            if args.child.is_some() {
                bail!(dbnsep::Error::InvalidArgument("--child applies to model documents only".into()));
            }
            Ok(cpd)
        }
        Document::Model(model) => {
            let names = model.state().names().join(", ");
            let child = args.child.as_deref().ok_or_else(|| {
                anyhow!(dbnsep::Error::InvalidArgument(format!(
                    "model documents need --child (one of {names})"
                )))
            })?;
            model
                .transition(child)
                .cloned()
                .ok_or_else(|| anyhow!(dbnsep::Error::UnknownVariable(child.to_string())))
        }
    }
}

pub fn run(args: &Args, out: &mut dyn Write) -> anyhow::Result<ExitCode> {
    let cpd = load_table(args)?;
    let grouping = args
        .grouping
        .as_deref()
        .map(|g| Grouping::parse(g, cpd.parents()))
        .transpose()?;
    let analysis = analyze(&cpd, grouping.as_ref(), args.method, args.verify)?;
    match args.format {
        Format::Text => write_text(&cpd, &analysis, out)?,
        Format::Csv => write_csv(&analysis, out)?,
    }
    if let Some(gap) = analysis.discrepancy() {
        if gap > VERIFY_TOL {
            eprintln!("verify: {} and lp disagree by {gap:e}", analysis.method);
            return Ok(ExitCode::FAILURE);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn row_text(row: &[f64]) -> String {
    row.iter().map(|v| format!("{v:.6}")).collect::<Vec<_>>().join(" ")
}

fn write_table(cpd: &Cpd, indent: &str, out: &mut dyn Write) -> std::io::Result<()> {
    let parents = cpd.parents();
    for r in 0..cpd.num_rows() {
        let label: Vec<String> = parents
            .names()
            .iter()
            .zip(parents.assignment(r))
            .map(|(n, v)| format!("{n}={v}"))
            .collect();
        writeln!(out, "{indent}{:<24} {}", label.join(" "), row_text(cpd.row(r)))?;
    }
    Ok(())
}

fn write_text(cpd: &Cpd, a: &Analysis, out: &mut dyn Write) -> anyhow::Result<()> {
    writeln!(out, "child: {}", cpd.child()[0].name)?;
    writeln!(out, "parents: {}", cpd.parents().names().join(", "))?;
    writeln!(out, "method: {}", a.method)?;
    if let Some(p) = &a.persistence {
        writeln!(out, "kappa = {:.6}", p.kappa)?;
        if let Some(r) = &p.residual {
            writeln!(out, "residual (weight {:.6}):", 1.0 - p.kappa)?;
            write_table(r, "  ", out)?;
        }
    }
    if let Some(d) = &a.decomposition {
        writeln!(out, "grouping: {}", d.grouping)?;
        writeln!(out, "alpha = {:.6}", d.alpha)?;
        for ((g, w), c) in d.grouping.groups().iter().zip(&d.group_weights).zip(&d.components) {
            writeln!(out, "component {} (weight {:.6}):", g.join(","), w)?;
            write_table(c, "  ", out)?;
        }
        if let Some(gamma) = d.gamma() {
            writeln!(out, "gamma = {gamma:.6}")?;
        }
        writeln!(out, "unit weights: {}", if d.unit_weights { "yes" } else { "no" })?;
        match &d.residual {
            Some(r) => {
                writeln!(out, "residual (weight {:.6}):", d.residual_weight)?;
                write_table(r, "  ", out)?;
            }
            None => writeln!(out, "residual: none")?,
        }
        writeln!(out, "recombination error = {:e}", d.recombination_error(cpd)?)?;
    }
    if let Some(t) = &a.trace {
        writeln!(out, "deviations: {}", row_text(&t.deviations))?;
        if let Some(g) = t.g {
            writeln!(out, "positive deviation sum = {g:.6}")?;
        }
        if !t.partial_sums.is_empty() {
            writeln!(out, "partial sums: {}", row_text(&t.partial_sums))?;
        }
        if let (Some(hi), Some(lo)) = (t.c_star, t.c_substar) {
            writeln!(out, "largest partial sum = {hi:.6}")?;
            writeln!(out, "most negative partial sum = {:.6}", -lo)?;
        }
        if !t.b_values.is_empty() {
            writeln!(out, "residual contrasts: {}", row_text(&t.b_values))?;
        }
    }
    if let Some(lp) = a.lp_alpha {
        writeln!(out, "lp alpha = {lp:.6}")?;
    }
    Ok(())
}

/// `quantity,value` rows.
fn write_csv(a: &Analysis, out: &mut dyn Write) -> anyhow::Result<()> {
    writeln!(out, "quantity,value")?;
    writeln!(out, "method,{}", a.method)?;
    if let Some(p) = &a.persistence {
        writeln!(out, "kappa,{}", p.kappa)?;
    }
    if let Some(d) = &a.decomposition {
        writeln!(out, "alpha,{}", d.alpha)?;
        for (g, w) in d.grouping.groups().iter().zip(&d.group_weights) {
            writeln!(out, "weight:{},{}", g.join(" "), w)?;
        }
        writeln!(out, "residual_weight,{}", d.residual_weight)?;
        writeln!(out, "unit_weights,{}", u8::from(d.unit_weights))?;
    }
    if let Some(lp) = a.lp_alpha {
        writeln!(out, "lp_alpha,{lp}")?;
    }
    Ok(())
}
