//! Command-line front end: generate instances, run the pipeline stages and
//! re-verify stored terms.
//!
//! Every subcommand writes one JSON document to standard output (or `--out`)
//! and exits with status 0 when its checks pass, 1 when they fail and 2 on
//! usage or I/O errors. Diagnostics go to standard error; set `RUST_LOG` for
//! more detail.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use clonecover::decompose::{hereditary_decompose, verify_decomposition};
use clonecover::synth::end_to_end_synthesize;
use clonecover::workbench::{
    check_admissibility, from_json, generate_instance, run_pipeline, to_json, verify_term, GenParams, Instance, Kind,
    PipelineOptions, Profile,
};

#[derive(Parser)]
#[command(
    name = "clonecover",
    version,
    about = "Term synthesis over ideal clones on grid fragments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance.
    Gen(Source),
    /// Check an instance's admissibility metadata.
    Check(Source),
    /// Decompose g and verify the trace.
    Decompose(Source),
    /// Synthesize a term for g and verify it.
    Synth {
        #[command(flatten)]
        source: Source,
        /// Also write the full synthesis bundle here.
        #[arg(long)]
        bundle: Option<PathBuf>,
    },
    /// Re-verify a stored term against a stored instance.
    Verify {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        term: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate an instance, run the whole pipeline and print the report.
    Demo {
        #[command(flatten)]
        source: Source,
        /// Record per-stage wall-clock times in the report.
        #[arg(long)]
        timing: bool,
    },
}

/// Where an instance comes from: a file, or the generator.
#[derive(Args)]
struct Source {
    /// Read the instance from this file instead of generating one.
    #[arg(long, conflicts_with_all = ["m", "horizon", "theta", "profile", "f_arity"])]
    instance: Option<PathBuf>,
    #[arg(long, env = "CLONECOVER_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2)]
    m: usize,
    /// The horizon N.
    #[arg(long, default_value_t = 16)]
    horizon: u64,
    /// Thrifty threshold; defaults to ⌈N/2⌉.
    #[arg(long)]
    theta: Option<u64>,
    #[arg(long, default_value_t = Profile::Mixed)]
    profile: Profile,
    /// Arity of f (1 or 2); drawn from the seed when omitted.
    #[arg(long)]
    f_arity: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Source {
    fn load(&self) -> Result<Instance> {
        match &self.instance {
            Some(path) => read_doc(Kind::Instance, path),
            None => {
                let params = GenParams {
                    m: self.m,
                    horizon: self.horizon,
                    theta: self.theta,
                    seed: self.seed,
                    profile: self.profile,
                    f_arity: self.f_arity,
                };
                log::info!("generating m={} N={} seed={}", params.m, params.horizon, params.seed);
                Ok(generate_instance(&params)?)
            }
        }
    }
}

fn read_doc<T: serde::de::DeserializeOwned>(kind: Kind, path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    from_json(kind, &text).with_context(|| format!("parsing {}", path.display()))
}

fn emit<T: Serialize>(kind: Kind, body: &T, out: Option<&Path>) -> Result<()> {
    let text = to_json(kind, body);
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(command: Command) -> Result<bool> {
    match command {
        Command::Gen(source) => {
            let inst = source.load()?;
            emit(Kind::Instance, &inst, source.out.as_deref())?;
            Ok(true)
        }
        Command::Check(source) => {
            let report = check_admissibility(&source.load()?);
            for c in report.checks.iter().filter(|c| !c.pass) {
                log::warn!("{} failed: {}", c.name, c.detail.as_deref().unwrap_or(""));
            }
            emit(Kind::Report, &report, source.out.as_deref())?;
            Ok(report.pass)
        }
        Command::Decompose(source) => {
            let inst = source.load()?;
            let trace = hereditary_decompose(&inst.g, inst.theta)?;
            let report = verify_decomposition(&inst.g, &trace);
            log::info!(
                "{} stages, {} nontrivial, {} failures",
                report.stages_checked,
                trace.nontrivial_stages(),
                report.failures.len()
            );
            emit(Kind::Trace, &trace, source.out.as_deref())?;
            Ok(report.passed)
        }
        Command::Synth { source, bundle } => {
            let inst = source.load()?;
            let syn = end_to_end_synthesize(&inst.g, &inst.f, &inst.candidates, inst.theta, inst.horizon)?;
            let check = verify_term(&inst, &syn.term);
            let stats = syn.term.stats();
            log::info!(
                "term size {}, depth {}, {} mismatches",
                stats.size,
                stats.depth,
                check.equality.mismatch_count
            );
            emit(Kind::Term, &syn.term, source.out.as_deref())?;
            if let Some(path) = bundle {
                emit(Kind::Synthesis, &syn, Some(&path))?;
            }
            Ok(check.pass)
        }
        Command::Verify { instance, term, out } => {
            let inst: Instance = read_doc(Kind::Instance, &instance)?;
            let term = read_doc(Kind::Term, &term)?;
            let check = verify_term(&inst, &term);
            if !check.equality.pass {
                log::warn!(
                    "{} of {} tuples disagree",
                    check.equality.mismatch_count,
                    check.equality.checked
                );
            }
            emit(Kind::Verification, &check, out.as_deref())?;
            Ok(check.pass)
        }
        Command::Demo { source, timing } => {
            let inst = source.load()?;
            let opts = PipelineOptions {
                timing,
                ..PipelineOptions::default()
            };
            let report = run_pipeline(&inst, &opts);
            emit(Kind::Report, &report, source.out.as_deref())?;
            Ok(report.pass)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse().command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
