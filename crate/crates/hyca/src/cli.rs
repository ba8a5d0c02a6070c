//! Command-line front end.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use hyca_core::embed::{check_expanded_invariance, verify_unique_applicability};
use hyca_core::engine::{compare_with_reference, run_hca};
use hyca_core::{build_region, embed, init_configuration, yellow_trace, Construction, GridKind, Region};

use crate::formats::{self, Roles, Snapshot, TraceFile, VerifyReport};
use crate::render::{self, RenderSpec};

#[derive(Debug, Parser)]
#[command(name = "hyca", version, about = "One-dimensional cellular automata on hyperbolic grids")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the hyperbolic automaton simulating a 1D rule.
    Transform(TransformArgs),
    /// Run an automaton from a word and write the guideline trace.
    Simulate(SimulateArgs),
    /// Check rotation invariance and unique applicability.
    Verify(VerifyArgs),
    /// Draw a region or a configuration snapshot as SVG.
    Render(RenderArgs),
    /// Export a region as JSON.
    Region(RegionArgs),
    /// List the 60 rotations of the dodecahedron.
    Motions {
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    /// `elementary:N` or a rule file.
    #[arg(long)]
    pub rule: String,
    #[arg(long, default_value = "t1")]
    pub theorem: Construction,
    #[arg(long, default_value = "pentagrid")]
    pub grid: GridKind,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub automaton: PathBuf,
    /// Digits (`1011`) or comma-separated states.
    #[arg(long, default_value = "1")]
    pub word: String,
    #[arg(long)]
    pub steps: u32,
    #[arg(long)]
    pub radius: u32,
    /// Guideline cells on each side of the central cell.
    #[arg(long)]
    pub halfwidth: Option<u32>,
    /// Compare the trace with the 1D simulator.
    #[arg(long)]
    pub check_oracle: bool,
    /// Directory receiving one SVG per step.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Render settings for `--svg`.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Where to write the last configuration.
    #[arg(long)]
    pub snapshot: Option<PathBuf>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub automaton: PathBuf,
    #[arg(long, default_value_t = 3)]
    pub radius: u32,
    #[arg(long, default_value_t = 10)]
    pub horizon: u32,
    #[arg(long)]
    pub halfwidth: Option<u32>,
    #[arg(long, default_value = "1")]
    pub word: String,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RegionSize {
    #[arg(long, default_value = "pentagrid")]
    pub grid: GridKind,
    #[arg(long, default_value_t = 4)]
    pub radius: u32,
    #[arg(long)]
    pub halfwidth: Option<u32>,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// A snapshot written by `simulate`; without it a blank region is drawn.
    #[arg(long)]
    pub snapshot: Option<PathBuf>,
    #[command(flatten)]
    pub size: RegionSize,
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub depth: Option<u32>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RegionArgs {
    #[command(flatten)]
    pub size: RegionSize,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

/// What a successful command found.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Clean,
    Violations,
}

fn emit(output: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<()> {
    match output {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => Ok(out.write_all(text.as_bytes())?),
    }
}

/// Messages go to `out` when the payload goes to a file, to stderr
/// otherwise.
fn note(output: Option<&Path>, out: &mut dyn Write, msg: &str) -> Result<()> {
    if output.is_some() {
        writeln!(out, "{msg}")?;
    } else {
        eprintln!("{msg}");
    }
    Ok(())
}

fn read_spec(path: Option<&Path>) -> Result<RenderSpec> {
    path.map_or_else(|| Ok(RenderSpec::default()), formats::read_json)
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<Outcome> {
    match cli.command {
        Command::Transform(a) => transform(a, out),
        Command::Simulate(a) => simulate(a, out),
        Command::Verify(a) => verify(a, out),
        Command::Render(a) => render_cmd(a, out),
        Command::Region(a) => {
            let region = build_region(a.size.grid, a.size.radius, a.size.halfwidth.unwrap_or(a.size.radius))?;
            emit(a.output.as_deref(), &formats::to_json(&formats::export_region(&region)), out)?;
            Ok(Outcome::Clean)
        }
        Command::Motions { output } => {
            emit(output.as_deref(), &formats::motion_table(), out)?;
            Ok(Outcome::Clean)
        }
    }
}

fn transform(a: TransformArgs, out: &mut dyn Write) -> Result<Outcome> {
    let rule = formats::parse_rule(&a.rule)?;
    let b = embed(&rule, a.theorem, a.grid)?;
    let output = a.output.as_deref();
    emit(output, &formats::to_json(b.parts()), out)?;
    let witness = match rule.fixability() {
        Some(w) => format!("fixable with q = {}, u = {}", w.q, w.u),
        None => "not fixable".into(),
    };
    note(output, out, &format!("{} on the {}: {} -> {} states; source {witness}", a.theorem, a.grid, rule.states(), b.n_states()))?;
    Ok(Outcome::Clean)
}

fn simulate(a: SimulateArgs, out: &mut dyn Write) -> Result<Outcome> {
    let b = formats::read_automaton(&a.automaton)?;
    let word = formats::parse_word(&a.word)?;
    let halfwidth = a.halfwidth.unwrap_or_else(|| (word.len() as u32 / 2 + a.steps).min(a.radius));
    let region = build_region(b.grid(), a.radius, halfwidth)?;
    let init = init_configuration(&region, &b, &word)?;
    let run = run_hca(&b, &region, &init, a.steps)?;
    let oracle = if a.check_oracle { Some(compare_with_reference(b.source(), &b, &region, &word, &run)?) } else { None };
    if let Some(dir) = &a.svg {
        let spec = read_spec(a.spec.as_deref())?;
        fs::create_dir_all(dir)?;
        for cfg in &run {
            let snap = Snapshot::new(&region, Roles::of(&b), cfg.clone());
            let svg = render::render(&region, Some(&snap), &spec)?;
            fs::write(dir.join(format!("step_{:03}.svg", cfg.time)), svg)?;
        }
    }
    if let Some(path) = &a.snapshot {
        let last = run.last().expect("non-empty").clone();
        fs::write(path, formats::to_json(&Snapshot::new(&region, Roles::of(&b), last)))?;
    }
    let outcome = match &oracle {
        Some(r) if !r.is_ok() => Outcome::Violations,
        _ => Outcome::Clean,
    };
    let trace = TraceFile { grid: b.grid(), radius: a.radius, halfwidth, word, rows: yellow_trace(&b, &region, &run), oracle };
    let output = a.output.as_deref();
    emit(output, &formats::to_json(&trace), out)?;
    if let Some(r) = &trace.oracle {
        let verdict = match &r.divergence {
            _ if r.is_ok() => "ok".to_string(),
            Some(d) => format!("divergence at time {} position {}: expected {}, got {}", d.time, d.position, d.expected, d.got),
            None => format!("{} off-line changes", r.stability_violation_count),
        };
        note(output, out, &format!("oracle: {verdict}"))?;
    }
    Ok(outcome)
}

fn verify(a: VerifyArgs, out: &mut dyn Write) -> Result<Outcome> {
    let b = formats::read_automaton(&a.automaton)?;
    let word = formats::parse_word(&a.word)?;
    let region = build_region(b.grid(), a.radius, a.halfwidth.unwrap_or(a.radius))?;
    let init = init_configuration(&region, &b, &word)?;
    let report = VerifyReport {
        grid: b.grid(),
        radius: a.radius,
        horizon: a.horizon,
        invariance: check_expanded_invariance(&b, &region, &init, a.horizon),
        uniqueness: verify_unique_applicability(&b, &region, &init, a.horizon),
        word,
    };
    let output = a.output.as_deref();
    emit(output, &formats::to_json(&report), out)?;
    note(
        output,
        out,
        &format!(
            "invariance: {} rules, {} classes, {} conflicts; uniqueness: {} contexts, {} violations",
            report.invariance.rules_checked,
            report.invariance.classes,
            report.invariance.conflicts.len(),
            report.uniqueness.contexts_checked,
            report.uniqueness.violations.len()
        ),
    )?;
    Ok(if report.is_ok() { Outcome::Clean } else { Outcome::Violations })
}

fn render_cmd(a: RenderArgs, out: &mut dyn Write) -> Result<Outcome> {
    let mut spec = read_spec(a.spec.as_deref())?;
    if a.depth.is_some() {
        spec.depth = a.depth;
    }
    let (region, snapshot): (Region, Option<Snapshot>) = match &a.snapshot {
        Some(path) => {
            let snap: Snapshot = formats::read_json(path)?;
            (build_region(snap.grid, snap.radius, snap.halfwidth)?, Some(snap))
        }
        None => (build_region(a.size.grid, a.size.radius, a.size.halfwidth.unwrap_or(a.size.radius))?, None),
    };
    let svg = render::render(&region, snapshot.as_ref(), &spec)?;
    emit(a.output.as_deref(), &svg, out)?;
    Ok(Outcome::Clean)
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let stdout = std::io::stdout();
    match run(cli, &mut stdout.lock()) {
        Ok(Outcome::Clean) => 0,
        Ok(Outcome::Violations) => 1,
        Err(e) => {
            eprintln!("error: {e:#}");
            2
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn command_definition_is_valid() {
        Cli::command().debug_assert();
    }

    #[test]
    fn theorem_and_grid_parse() {
        let cli = Cli::try_parse_from(["hyca", "transform", "--rule", "elementary:110", "--theorem", "t3", "--grid", "heptagrid"]).unwrap();
        let Command::Transform(a) = cli.command else { panic!() };
        assert_eq!((a.theorem, a.grid), (Construction::T3, GridKind::Heptagrid));
        assert!(Cli::try_parse_from(["hyca", "transform", "--rule", "x", "--grid", "square"]).is_err());
    }
}
