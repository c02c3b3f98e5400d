use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use vqss_harness::acceptance;
use vqss_harness::analytic::{analytic_detection_rate, AttackKind};
use vqss_harness::report::{Rate, RunReport};
use vqss_harness::runner::run_scenario_with;
use vqss_harness::scenario::{AttackConfig, Checks, Scenario, Secret};
use vqss_harness::transcript::{read_transcript, write_transcript};
use vqss_harness::HarnessError;

#[derive(Parser)]
#[command(name = "vqss", version, about = "Verifiable threshold quantum secret sharing simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario (TOML file and/or flags) and print the aggregates.
    Run(Box<RunArgs>),
    /// Run the acceptance suite.
    Verify,
    /// Re-aggregate a saved transcript.
    Report {
        transcript: PathBuf,
        /// Write the full report here instead of printing the aggregates.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file; flags override its fields.
    scenario: Option<PathBuf>,
    #[arg(long)]
    d: Option<u64>,
    #[arg(long)]
    t: Option<usize>,
    #[arg(long)]
    h: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    /// "random" or a value in 0..d.
    #[arg(long)]
    secret: Option<Secret>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    /// e.g. intercept:2, forge:2:dp=1:dq=0, wrong-broadcast:2=+1, conspiracy:1,2,3
    #[arg(long)]
    attack: Option<AttackConfig>,
    /// "random:k", "none", or positions like "1,3".
    #[arg(long)]
    check: Option<Checks>,
    #[arg(long)]
    repeats: Option<u32>,
    /// Write the JSON-lines transcript here.
    #[arg(long)]
    transcript: Option<PathBuf>,
    /// Write the full JSON report here.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Run trials on one thread.
    #[arg(long)]
    serial: bool,
}

impl RunArgs {
    fn scenario(&self) -> anyhow::Result<Scenario> {
        let mut s = match &self.scenario {
            Some(path) => Scenario::load(path)?,
            None => Scenario::default(),
        };
        macro_rules! over {
            ($($f:ident => $g:ident),*) => { $( if let Some(v) = self.$f.clone() { s.$g = v; } )* };
        }
        over!(d => d, t => t, h => h, n => n, m => m, secret => secret, seed => seed, trials => trials,
              attack => attack, check => checks, repeats => localization_repeats);
        Ok(s)
    }
}

fn show_rate(name: &str, r: &Rate) {
    match (r.rate, r.ci3) {
        (Some(p), Some(ci)) => println!("{name:<24} {p:.4} +/- {ci:.4} ({}/{})", r.count, r.total),
        _ => println!("{name:<24} n/a (0 samples)"),
    }
}

fn summarize(report: &RunReport) {
    let a = &report.aggregates;
    if let Some(cfg) = &report.config {
        println!(
            "scenario                 d={} t={} h={} n={} m={} attack={} trials={} seed={}",
            cfg.d, cfg.t, cfg.h, cfg.n, cfg.m, cfg.attack, cfg.trials, cfg.seed
        );
        if let Ok(rate) = analytic_detection_rate(cfg.d, AttackKind::of(&cfg.attack)) {
            println!("{:<24} {rate:.4}", "analytic detection");
        }
    }
    show_rate("detection", &a.detection);
    show_rate("reconstruction success", &a.reconstruction_success);
    if a.eve_basis_match.total > 0 {
        show_rate("eve basis match", &a.eve_basis_match);
        show_rate("eve value match", &a.eve_value_match);
    }
    for (k, v) in &a.localized {
        println!("{:<24} bob-{k}: {v}", "localized");
    }
    for (k, v) in &a.flagged {
        println!("{:<24} bob-{k}: {v}", "flagged");
    }
    if a.refused + a.unresolved > 0 {
        println!("{:<24} refused {} unresolved {}", "walk", a.refused, a.unresolved);
    }
    for (size, v) in &a.coalition_feasible {
        println!("{:<24} {size} secrets feasible: {v} trials", "coalition");
    }
}

fn run(args: Box<RunArgs>) -> anyhow::Result<()> {
    let scenario = args.scenario()?;
    let keep = args.transcript.is_some();
    let run = run_scenario_with(&scenario, !args.serial, keep)?;
    if let Some(path) = &args.transcript {
        write_transcript(path, &run.transcript)?;
    }
    if let Some(path) = &args.report {
        run.report.write(path)?;
    }
    summarize(&run.report);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => run(args),
        Command::Verify => {
            let results = acceptance::run_all();
            for r in &results {
                println!("{r}");
            }
            let failed = results.iter().filter(|r| !r.passed).count();
            println!("{} of {} criteria passed", results.len() - failed, results.len());
            if failed > 0 {
                return ExitCode::FAILURE;
            }
            Ok(())
        }
        Command::Report { transcript, out } => (|| {
            let lines = read_transcript(&transcript)?;
            let report = RunReport::from_transcript(&lines)
                .map_err(HarnessError::Transcript)
                .with_context(|| format!("re-aggregating {}", transcript.display()))?;
            match out {
                Some(path) => report.write(&path)?,
                None => summarize(&report),
            }
            Ok(())
        })(),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
