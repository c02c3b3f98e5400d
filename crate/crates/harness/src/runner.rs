//! Monte Carlo runner.
//!
//! Seed splitting: trial `i` of a run with seed `s` uses
//! `ChaCha8Rng::seed_from_u64(s)` switched to stream `i`. ChaCha streams
//! under one key are disjoint keystreams, so trials never share randomness,
//! and a trial's randomness does not depend on how many trials run or in
//! which order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use vqss_core::adversary::{conspiracy_reconstruction_attempt, AttackSpec, CoalitionView};
use vqss_core::protocol::{Chain, Engine, RunOutcome};
use vqss_core::vss::deal;
use vqss_core::Fe;

use crate::error::{HarnessError, Result};
use crate::report::{RunReport, TrialRecord};
use crate::scenario::{Scenario, Secret};
use crate::transcript::{lines_for, TranscriptLine};

pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// One trial: its record and its transcript lines.
#[derive(Clone, Debug)]
pub struct TrialRun {
    pub record: TrialRecord,
    pub lines: Vec<TranscriptLine>,
    pub outcome: RunOutcome,
}

/// Deals fresh shares to ids `1..=n`, takes the first `m` as the chain and
/// runs the protocol once. The scenario must already be validated.
pub fn run_trial(s: &Scenario, trial: u64) -> Result<TrialRun> {
    let field = s.field()?;
    let mut rng = trial_rng(s.seed, trial);
    let ids: Vec<Fe> = (1..=s.n as u64).map(|i| field.elem(i)).collect();
    let (material, shares) = deal(field, s.params()?, &ids, &mut rng)?;
    let chain = Chain::new(field, &shares[..s.m])?;
    let secret = match s.secret {
        Secret::Random => field.random(&mut rng),
        Secret::Value(v) => field.elem(v),
    };
    let spec = s.attack.to_spec(field)?;
    let adversary = spec.bind(&chain)?;
    let outcome = Engine::new(&material, chain.clone(), secret, s.protocol_config(), adversary, &mut rng)?.run()?;
    let lines = lines_for(trial, &outcome.transcript);
    let mut record = TrialRecord::from_lines(trial, &lines).map_err(HarnessError::Transcript)?;
    if let AttackSpec::Conspiracy { members } = &spec {
        let view = CoalitionView::from_transcript(&chain, members, &outcome.transcript, false)?;
        record.coalition_feasible = Some(conspiracy_reconstruction_attempt(&view).len());
    }
    Ok(TrialRun { record, lines, outcome })
}

/// A finished run plus, when requested, the concatenated transcript.
#[derive(Clone, Debug)]
pub struct ScenarioRun {
    pub report: RunReport,
    pub transcript: Vec<TranscriptLine>,
}

pub fn run_scenario_with(s: &Scenario, parallel: bool, keep_transcript: bool) -> Result<ScenarioRun> {
    s.validate()?;
    let one = |i: u64| {
        run_trial(s, i).map(|run| {
            let lines = if keep_transcript { run.lines } else { Vec::new() };
            (run.record, lines)
        })
    };
    let runs: Vec<(TrialRecord, Vec<TranscriptLine>)> = if parallel {
        (0..s.trials).into_par_iter().map(one).collect::<Result<_>>()?
    } else {
        (0..s.trials).map(one).collect::<Result<_>>()?
    };
    let mut records = Vec::with_capacity(runs.len());
    let mut transcript = Vec::new();
    for (record, lines) in runs {
        records.push(record);
        transcript.extend(lines);
    }
    Ok(ScenarioRun { report: RunReport::new(Some(s.clone()), records), transcript })
}

/// Runs all trials in parallel.
pub fn run_scenario(s: &Scenario) -> Result<RunReport> {
    Ok(run_scenario_with(s, true, false)?.report)
}

pub fn run_scenario_serial(s: &Scenario) -> Result<RunReport> {
    Ok(run_scenario_with(s, false, false)?.report)
}
