//! Subcommands. Each returns its process exit code and writes to the given
//! streams, so tests can drive them without spawning the binary.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use dbu_core::engine::apply_sequence_inspect;
use dbu_core::kripke::{evaluate_pointed, FrameReport, RelationFlags};
use dbu_core::reductions::{equivalence_harness, exhaustive_suite};
use dbu_core::{extract_parameters, parse_qbf, reduce_tqbf_to_dbu, world_bound, DbuInstance};
use serde_json::json;

use crate::format::{load_path, save_string, to_json, Loaded};
use crate::random::{random_suite, QbfShape};
use crate::report::{json_line, ParamsJson};

pub const EXIT_TRUE: i32 = 0;
pub const EXIT_FALSE: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "dbu", version, about = "Dynamic belief update: product updates, model checking and the TQBF reduction")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Apply the actions and evaluate the query. Exits 0 for TRUE, 1 for FALSE, 2 on error.
    Check(CheckArgs),
    /// Print the parameter vector of an instance.
    Params(ParamsArgs),
    /// Write the DBU instance reduced from a QBF such as "E x1 A x2 . (x1 | x2)".
    GenTqbf(GenArgs),
    /// Compare brute-force QBF truth with the verdict on the reduced instance.
    Harness(HarnessArgs),
    /// Report structural violations and frame properties.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    pub path: PathBuf,
    /// Print the world count and designated worlds after each step.
    #[arg(long)]
    pub trace: bool,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct ParamsArgs {
    pub path: PathBuf,
    #[arg(long)]
    pub json: bool,
    /// Note the small-model regime when both e and u are below this value.
    #[arg(long, default_value_t = 10)]
    pub fpt_threshold: usize,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    pub qbf: String,
    /// Output file; stdout when omitted.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct HarnessArgs {
    /// Largest number of variables.
    #[arg(long, default_value_t = 3)]
    pub max_m: usize,
    /// Largest number of clauses (default 3 exhaustive, 5 random).
    #[arg(long)]
    pub max_clauses: Option<usize>,
    /// Largest clause width (default 2 exhaustive, 3 random).
    #[arg(long)]
    pub max_width: Option<usize>,
    /// Check this many seeded random QBFs instead of the exhaustive suite.
    #[arg(long)]
    pub random: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write one JSON record per instance to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    pub path: PathBuf,
}

pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match cli.command {
        Command::Check(args) => check(&args, out, err),
        Command::Params(args) => params(&args, out, err),
        Command::GenTqbf(args) => gen_tqbf(&args, out),
        Command::Harness(args) => harness(&args, out, err),
        Command::Validate(args) => validate(&args, out),
    };
    result.unwrap_or_else(|e| {
        let _ = writeln!(err, "error: {e:#}");
        EXIT_ERROR
    })
}

/// Loads an instance and refuses it when anything is wrong with it.
fn load_valid(path: &Path, err: &mut dyn Write) -> anyhow::Result<Option<DbuInstance>> {
    let Loaded { instance, issues } = load_path(path)?;
    let violations: Vec<String> = issues
        .into_iter()
        .chain(instance.validate().iter().map(ToString::to_string))
        .collect();
    if violations.is_empty() {
        return Ok(Some(instance));
    }
    for v in &violations {
        writeln!(err, "violation: {v}")?;
    }
    writeln!(err, "error: {} is not a valid instance", path.display())?;
    Ok(None)
}

fn designated_names(state: &dbu_core::EpistemicState) -> Vec<String> {
    state.designated_ids().map(ToString::to_string).collect()
}

pub fn check(args: &CheckArgs, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<i32> {
    let Some(inst) = load_valid(&args.path, err)? else {
        return Ok(EXIT_ERROR);
    };
    let w0 = inst.initial.model.len();
    let e = extract_parameters(&inst).e;
    let mut steps = Vec::new();
    let last = apply_sequence_inspect(&inst.initial, &inst.actions, |i, s| {
        steps.push((i, s.model.len(), world_bound(w0, e, i), designated_names(s)));
    });
    let last = match last {
        Ok(last) => last,
        Err(e) => {
            if args.trace && !args.json {
                write_steps(out, &steps)?;
            }
            writeln!(err, "error: {e}")?;
            return Ok(EXIT_ERROR);
        }
    };
    let verdict = evaluate_pointed(&last, &inst.query)?;
    if args.json {
        let mut value = json!({ "verdict": verdict, "worlds_final": last.model.len() });
        if args.trace {
            value["steps"] = steps
                .iter()
                .map(|(i, n, b, d)| json!({ "step": i, "worlds": n, "bound": u64::try_from(*b).unwrap_or(u64::MAX), "designated": d }))
                .collect();
        }
        out.write_all(to_json(&value).as_bytes())?;
    } else {
        if args.trace {
            write_steps(out, &steps)?;
        }
        writeln!(out, "{}", if verdict { "TRUE" } else { "FALSE" })?;
    }
    Ok(if verdict { EXIT_TRUE } else { EXIT_FALSE })
}

fn write_steps(out: &mut dyn Write, steps: &[(usize, usize, u128, Vec<String>)]) -> std::io::Result<()> {
    for (i, n, bound, designated) in steps {
        writeln!(out, "step {i}: {n} worlds (bound {bound}), designated {}", designated.join(", "))?;
    }
    Ok(())
}

pub fn params(args: &ParamsArgs, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<i32> {
    let Some(inst) = load_valid(&args.path, err)? else {
        return Ok(EXIT_ERROR);
    };
    let p = extract_parameters(&inst);
    let bound = world_bound(inst.initial.model.len(), p.e, p.u);
    let small = p.e < args.fpt_threshold && p.u < args.fpt_threshold;
    if args.json {
        let value = json!({
            "params": ParamsJson::from(p),
            "initial_worlds": inst.initial.model.len(),
            "world_bound": u64::try_from(bound).unwrap_or(u64::MAX),
            "small_e_u": small,
        });
        out.write_all(to_json(&value).as_bytes())?;
    } else {
        writeln!(out, "{p}")?;
        if small {
            writeln!(
                out,
                "note: e and u are below {}, so the final model has at most |W0| * e^u = {} * {}^{} = {} worlds",
                args.fpt_threshold,
                inst.initial.model.len(),
                p.e,
                p.u,
                bound
            )?;
        }
    }
    Ok(0)
}

pub fn gen_tqbf(args: &GenArgs, out: &mut dyn Write) -> anyhow::Result<i32> {
    let q = parse_qbf(&args.qbf).context("cannot parse QBF")?;
    let text = save_string(&reduce_tqbf_to_dbu(&q));
    match &args.out {
        Some(path) => fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(0)
}

pub fn harness(args: &HarnessArgs, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<i32> {
    let suite = match args.random {
        Some(count) => {
            let shape = QbfShape {
                max_vars: args.max_m,
                max_clauses: args.max_clauses.unwrap_or(5),
                max_width: args.max_width.unwrap_or(3),
            };
            if args.max_m == 0 {
                Vec::new()
            } else {
                random_suite(args.seed, count, shape)
            }
        }
        None => exhaustive_suite(args.max_m, args.max_clauses.unwrap_or(3), args.max_width.unwrap_or(2)),
    };
    let report = equivalence_harness(&suite)?;
    if let Some(path) = &args.out {
        let lines: String = report.records.iter().map(json_line).collect();
        fs::write(path, lines).with_context(|| format!("cannot write {}", path.display()))?;
    }
    for r in report.records.iter().filter(|r| !r.agree()) {
        writeln!(err, "disagreement: {} (oracle {}, dbu {})", r.qbf, r.oracle, r.dbu)?;
    }
    for r in report.records.iter().filter(|r| !r.within_bound) {
        writeln!(err, "size bound exceeded: {}", r.qbf)?;
    }
    write!(out, "{} instances, {} disagreements", report.records.len(), report.disagreements())?;
    if report.bound_failures() > 0 {
        write!(out, ", {} size bound failures", report.bound_failures())?;
    }
    writeln!(out)?;
    Ok(if report.is_clean() { 0 } else { 1 })
}

fn flag_line(flags: &RelationFlags) -> String {
    let names = [
        ("serial", flags.serial),
        ("reflexive", flags.reflexive),
        ("symmetric", flags.symmetric),
        ("transitive", flags.transitive),
        ("euclidean", flags.euclidean),
    ];
    names
        .iter()
        .map(|(n, b)| format!("{n}={}", if *b { "yes" } else { "no" }))
        .collect::<Vec<_>>()
        .join(" ")
}

fn write_frames(out: &mut dyn Write, title: &str, report: &FrameReport) -> std::io::Result<()> {
    writeln!(out, "{title}: frame {}", report.class())?;
    for (agent, flags) in &report.agents {
        writeln!(out, "  {agent}: {}", flag_line(flags))?;
    }
    Ok(())
}

/// Exits 0 when the instance is well formed, 1 when it has violations.
pub fn validate(args: &ValidateArgs, out: &mut dyn Write) -> anyhow::Result<i32> {
    let Loaded { instance, issues } = load_path(&args.path)?;
    let violations: Vec<String> = issues
        .into_iter()
        .chain(instance.validate().iter().map(ToString::to_string))
        .collect();
    let initial = instance.initial.model.frame_report();
    if violations.is_empty() {
        writeln!(out, "OK; frame: {}", initial.class())?;
    } else {
        for v in &violations {
            writeln!(out, "violation: {v}")?;
        }
    }
    write_frames(out, "initial state", &initial)?;
    for (i, action) in instance.actions.iter().enumerate() {
        write_frames(out, &format!("action {}", i + 1), &action.model.frame_report())?;
    }
    Ok(if violations.is_empty() { 0 } else { 1 })
}
