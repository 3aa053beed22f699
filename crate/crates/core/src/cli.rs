//! Command-line front end.
//!
//! Exit codes: 0 when every assertion holds (or the command succeeded),
//! 1 when some assertion fails, 2 on usage, file, parse or engine errors.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::alloy;
use crate::ast::{Assignment, Model};
use crate::checker::{self, check, explain, CheckReport, Verdict, DEFAULT_LIMIT};
use crate::engine::{self, run_trace_with, EngineConfig};
use crate::integra::{apply, compose, parse_integra, TransformProgram};
use crate::parser::parse_model_bytes;
use crate::print;
use crate::render;

#[derive(Debug, Parser)]
#[command(name = "maestro", version, about = "Event-based modeling and checking of microarchitectural defenses")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TraceFormat {
    Text,
    Json,
    Tree,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check every assertion over all admitted initial assignments.
    Check {
        model: PathBuf,
        #[arg(long)]
        json: bool,
        /// Maximum number of enumerated initial assignments.
        #[arg(long, env = "MAESTRO_LIMIT", default_value_t = DEFAULT_LIMIT)]
        limit: u64,
        /// Write the first witness trace here (JSON if the path ends in `.json`).
        #[arg(long)]
        trace_out: Option<PathBuf>,
        /// Print the first counterexample as annotated event trees.
        #[arg(long)]
        explain: bool,
    },
    /// Apply transform programs to a base model.
    Compose {
        base: PathBuf,
        transforms: Vec<PathBuf>,
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// A comma-separated transform set to compose and check; repeatable.
        #[arg(long, value_name = "SET")]
        matrix: Vec<String>,
        #[arg(long, env = "MAESTRO_LIMIT", default_value_t = DEFAULT_LIMIT)]
        limit: u64,
    },
    /// Execute one trace and render it.
    Trace {
        model: PathBuf,
        #[arg(long)]
        steps: Option<u32>,
        /// Pin a state field, as `inst.field=value`; repeatable.
        #[arg(long = "set", value_name = "INST.FIELD=V")]
        set: Vec<String>,
        #[arg(long, value_enum, default_value_t = TraceFormat::Text)]
        format: TraceFormat,
        /// Stop at the first quiescent step.
        #[arg(long)]
        no_stutter: bool,
        #[arg(long, env = "MAESTRO_LIMIT", default_value_t = DEFAULT_LIMIT)]
        limit: u64,
    },
    /// Emit the model as Alloy source.
    EmitAlloy {
        model: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = alloy::DEFAULT_BITVECTOR_LIB)]
        bitvector_lib: String,
    },
}

/// Reported on stderr; always exit code 2.
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

type Outcome = Result<i32, Failure>;

/// Parses `args` (including the program name) and runs the command.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli, out, err),
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                2
            } else {
                let _ = write!(out, "{}", e.render());
                0
            }
        }
    }
}

pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let res = match cli.command {
        Command::Check {
            model,
            json,
            limit,
            trace_out,
            explain,
        } => cmd_check(&model, json, limit, trace_out.as_deref(), explain, out, err),
        Command::Compose {
            base,
            transforms,
            out: dest,
            matrix,
            limit,
        } => cmd_compose(&base, &transforms, dest.as_deref(), &matrix, limit, out, err),
        Command::Trace {
            model,
            steps,
            set,
            format,
            no_stutter,
            limit,
        } => cmd_trace(&model, steps, &set, format, no_stutter, limit, out),
        Command::EmitAlloy {
            model,
            out: dest,
            bitvector_lib,
        } => cmd_emit_alloy(&model, dest.as_deref(), &bitvector_lib, out, err),
    };
    match res {
        Ok(code) => code,
        Err(Failure(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
    }
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    std::fs::read(path).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn load_model(path: &Path, err: &mut dyn Write) -> Result<Model, Failure> {
    let parsed = parse_model_bytes(&read(path)?, &path.display().to_string())?;
    for w in &parsed.warnings {
        writeln!(err, "{w}")?;
    }
    Ok(parsed.model)
}

fn load_program(path: &Path) -> Result<TransformProgram, Failure> {
    let bytes = read(path)?;
    let text = String::from_utf8(bytes).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    parse_integra(&text, &name).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn write_to(dest: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<(), Failure> {
    match dest {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure(format!("{}: {e}", p.display()))),
        None => Ok(out.write_all(text.as_bytes())?),
    }
}

fn exit_code(report: &CheckReport) -> i32 {
    if report.all_hold() {
        0
    } else {
        1
    }
}

fn cmd_check(
    path: &Path,
    json: bool,
    limit: u64,
    trace_out: Option<&Path>,
    explain_witness: bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Outcome {
    let model = load_model(path, err)?;
    let report = check(&model, limit)?;
    out.write_all(if json { report.to_json() + "\n" } else { report.to_text() }.as_bytes())?;
    if explain_witness {
        out.write_all(explain(&report).as_bytes())?;
    }
    if let (Some(dest), Some(r)) = (trace_out, report.first_failure()) {
        if let Verdict::Fails { witness, .. } = &r.verdict {
            let text = if dest.extension().is_some_and(|e| e == "json") {
                render::trace_json(witness)
            } else {
                render::trace_text(witness)
            };
            write_to(Some(dest), &text, out)?;
        }
    }
    Ok(exit_code(&report))
}

fn compose_set(base: &Model, paths: &[PathBuf]) -> Result<Model, Failure> {
    let progs = paths.iter().map(|p| load_program(p)).collect::<Result<Vec<_>, _>>()?;
    Ok(apply(base, &compose(&progs)?)?)
}

fn cmd_compose(
    base: &Path,
    common: &[PathBuf],
    dest: Option<&Path>,
    matrix: &[String],
    limit: u64,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Outcome {
    let model = load_model(base, err)?;
    if matrix.is_empty() {
        let composed = compose_set(&model, common)?;
        write_to(dest, &print::model_yaml(&composed), out)?;
        return Ok(0);
    }
    let sets: Vec<Vec<PathBuf>> = matrix
        .iter()
        .map(|s| {
            common
                .iter()
                .cloned()
                .chain(s.split(',').map(str::trim).filter(|p| !p.is_empty()).map(PathBuf::from))
                .collect()
        })
        .collect();
    let rows: Vec<Result<(String, CheckReport), Failure>> = sets
        .par_iter()
        .map(|set| {
            let label = set
                .iter()
                .map(|p| p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default())
                .collect::<Vec<_>>()
                .join("+");
            let m = compose_set(&model, set)?;
            Ok((label, check(&m, limit)?))
        })
        .collect();
    let mut code = 0;
    for row in rows {
        let (label, report) = row?;
        let verdict = match report.first_failure() {
            None => "holds".to_string(),
            Some(r) => match &r.verdict {
                Verdict::Fails { step, time, .. } => format!("FAILS {} at step {step} (time {time})", r.name),
                Verdict::Holds { .. } => unreachable!("first_failure returns failures"),
            },
        };
        writeln!(out, "{label:<32} {verdict}")?;
        code = code.max(exit_code(&report));
    }
    Ok(code)
}

fn parse_set(s: &str) -> Result<(String, String, u64), Failure> {
    let bad = || Failure(format!("--set expects inst.field=value, got `{s}`"));
    let (lhs, v) = s.split_once('=').ok_or_else(bad)?;
    let (inst, field) = lhs.trim().split_once('.').ok_or_else(bad)?;
    let v = v.trim().parse::<u64>().map_err(|_| bad())?;
    Ok((inst.to_string(), field.to_string(), v))
}

/// The full assignment when every field is pinned, otherwise the first
/// admitted assignment agreeing with the pins.
fn choose_assignment(model: &Model, pins: &[(String, String, u64)], limit: u64) -> Result<Assignment, Failure> {
    let triples: Vec<(&str, &str, u64)> = pins.iter().map(|(i, f, v)| (i.as_str(), f.as_str(), *v)).collect();
    if let Ok(a) = engine::assignment(model, &triples) {
        return Ok(a);
    }
    checker::admitted(model, limit)?
        .into_iter()
        .find(|a| {
            pins.iter().all(|(i, f, v)| {
                a.iter()
                    .any(|b| b.instance == *i && b.field == *f && b.value.bits() == *v)
            })
        })
        .ok_or_else(|| Failure("no admitted initial assignment matches the pinned fields".into()))
}

fn cmd_trace(
    path: &Path,
    steps: Option<u32>,
    set: &[String],
    format: TraceFormat,
    no_stutter: bool,
    limit: u64,
    out: &mut dyn Write,
) -> Outcome {
    let model = load_model(path, &mut std::io::sink())?;
    let pins = set.iter().map(|s| parse_set(s)).collect::<Result<Vec<_>, _>>()?;
    let a = choose_assignment(&model, &pins, limit)?;
    let mut cfg = EngineConfig::for_model(&model);
    if let Some(n) = steps {
        cfg.max_steps = n;
    }
    cfg.stutter_to_max = !no_stutter;
    let t = run_trace_with(&model, &a, &cfg)?;
    let text = match format {
        TraceFormat::Text => render::trace_text(&t),
        TraceFormat::Json => render::trace_json(&t) + "\n",
        TraceFormat::Tree => render::event_tree(&t),
    };
    out.write_all(text.as_bytes())?;
    Ok(0)
}

fn cmd_emit_alloy(path: &Path, dest: Option<&Path>, lib: &str, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let model = load_model(path, err)?;
    let emitted = alloy::emit(&model, lib);
    for d in &emitted.diagnostics {
        writeln!(err, "{d}")?;
    }
    write_to(dest, &emitted.text, out)?;
    Ok(0)
}
