//! Per-trial records and aggregate statistics.
//!
//! A [`TrialRecord`] is derived from a trial's transcript lines alone, so a
//! saved transcript can be re-aggregated into the same numbers.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{io_err, HarnessError, Result};
use crate::scenario::Scenario;
use crate::transcript::{InterceptRecord, TranscriptLine, VerdictRecord};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum Outcome {
    Reconstructed { value: u64, secret: u64 },
    FraudLocalized { cheater: usize },
    LocalizationRefused { party: usize },
    Unresolved { lo: usize, hi: usize },
    BroadcastRejected { flagged: Vec<usize> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub party: usize,
    pub clean: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecheckRecord {
    pub party: usize,
    pub passes: u32,
    pub repeats: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub outcome: Outcome,
    pub checks: Vec<CheckRecord>,
    pub rechecks: Vec<RecheckRecord>,
    pub interceptions: Vec<InterceptRecord>,
    /// Size of the secret set consistent with a conspiring coalition's view
    /// before the public rounds. Not recoverable from a transcript.
    pub coalition_feasible: Option<usize>,
}

impl TrialRecord {
    pub fn from_lines(trial: u64, lines: &[TranscriptLine]) -> std::result::Result<Self, String> {
        let mut checks = Vec::new();
        let mut rechecks = Vec::new();
        let mut interceptions = Vec::new();
        let mut outcome = None;
        for line in lines {
            if let Some(i) = line.intercept {
                interceptions.push(i);
            }
            let Some(v) = &line.verdict else { continue };
            let end = match v {
                VerdictRecord::CheckClean { party, .. } => {
                    checks.push(CheckRecord { party: *party, clean: true });
                    None
                }
                VerdictRecord::CheckFailed { party, .. } => {
                    checks.push(CheckRecord { party: *party, clean: false });
                    None
                }
                VerdictRecord::Recheck { party, passes, repeats } => {
                    rechecks.push(RecheckRecord { party: *party, passes: *passes, repeats: *repeats });
                    None
                }
                VerdictRecord::Localized { cheater } => Some(Outcome::FraudLocalized { cheater: *cheater }),
                VerdictRecord::Refused { party } => Some(Outcome::LocalizationRefused { party: *party }),
                VerdictRecord::Unresolved { lo, hi } => Some(Outcome::Unresolved { lo: *lo, hi: *hi }),
                VerdictRecord::BroadcastRejected { flagged } => {
                    Some(Outcome::BroadcastRejected { flagged: flagged.clone() })
                }
                VerdictRecord::Reconstructed { value, secret } => {
                    Some(Outcome::Reconstructed { value: *value, secret: *secret })
                }
            };
            if let Some(end) = end {
                if outcome.is_some() {
                    return Err(format!("trial {trial}: more than one final verdict"));
                }
                outcome = Some(end);
            }
        }
        let outcome = outcome.ok_or_else(|| format!("trial {trial}: no final verdict"))?;
        Ok(TrialRecord { trial, outcome, checks, rechecks, interceptions, coalition_feasible: None })
    }

    pub fn detected(&self) -> bool {
        !matches!(self.outcome, Outcome::Reconstructed { .. })
    }

    pub fn succeeded(&self) -> bool {
        matches!(self.outcome, Outcome::Reconstructed { value, secret } if value == secret)
    }

    pub fn flagged(&self) -> Vec<usize> {
        match &self.outcome {
            Outcome::FraudLocalized { cheater } => vec![*cheater],
            Outcome::LocalizationRefused { party } => vec![*party],
            Outcome::BroadcastRejected { flagged } => flagged.clone(),
            _ => Vec::new(),
        }
    }
}

/// Width of every reported confidence band, in binomial standard deviations.
pub const CI_SIGMAS: f64 = 3.0;

/// A binomial frequency with its normal-approximation 3-sigma half-width.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rate {
    pub count: u64,
    pub total: u64,
    pub rate: Option<f64>,
    pub ci3: Option<f64>,
}

impl Rate {
    pub fn new(count: u64, total: u64) -> Self {
        if total == 0 {
            return Rate { count, total, rate: None, ci3: None };
        }
        let p = count as f64 / total as f64;
        Rate { count, total, rate: Some(p), ci3: Some(CI_SIGMAS * (p * (1.0 - p) / total as f64).sqrt()) }
    }

    /// Whether `expected` lies within 3 binomial standard deviations of the
    /// observed rate, with sigma computed at `expected`.
    pub fn within_3sigma_of(&self, expected: f64) -> bool {
        match self.rate {
            None => false,
            Some(p) => (p - expected).abs() <= CI_SIGMAS * (expected * (1.0 - expected) / self.total as f64).sqrt(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub trials: u64,
    pub detection: Rate,
    pub reconstruction_success: Rate,
    /// Over all interceptions: Eve guessed the true basis.
    pub eve_basis_match: Rate,
    /// Over all interceptions: Eve's recorded value equals the true prefix sum.
    pub eve_value_match: Rate,
    pub localized: BTreeMap<usize, u64>,
    pub flagged: BTreeMap<usize, u64>,
    pub refused: u64,
    pub unresolved: u64,
    pub coalition_feasible: BTreeMap<usize, u64>,
}

impl Aggregates {
    pub fn from_trials(records: &[TrialRecord]) -> Self {
        let trials = records.len() as u64;
        let count = |f: &dyn Fn(&TrialRecord) -> bool| records.iter().filter(|r| f(r)).count() as u64;
        let intercepts: Vec<&InterceptRecord> = records.iter().flat_map(|r| &r.interceptions).collect();
        let n_int = intercepts.len() as u64;
        let mut localized = BTreeMap::new();
        let mut flagged = BTreeMap::new();
        let mut coalition_feasible = BTreeMap::new();
        for r in records {
            if let Outcome::FraudLocalized { cheater } = r.outcome {
                *localized.entry(cheater).or_insert(0) += 1;
            }
            for k in r.flagged() {
                *flagged.entry(k).or_insert(0) += 1;
            }
            if let Some(size) = r.coalition_feasible {
                *coalition_feasible.entry(size).or_insert(0) += 1;
            }
        }
        Aggregates {
            trials,
            detection: Rate::new(count(&|r| r.detected()), trials),
            reconstruction_success: Rate::new(count(&|r| r.succeeded()), trials),
            eve_basis_match: Rate::new(intercepts.iter().filter(|i| i.basis_matched()).count() as u64, n_int),
            eve_value_match: Rate::new(intercepts.iter().filter(|i| i.value_matched()).count() as u64, n_int),
            localized,
            flagged,
            refused: count(&|r| matches!(r.outcome, Outcome::LocalizationRefused { .. })),
            unresolved: count(&|r| matches!(r.outcome, Outcome::Unresolved { .. })),
            coalition_feasible,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    /// The scenario that produced the run; absent when re-aggregated from a transcript.
    pub config: Option<Scenario>,
    pub seed: Option<u64>,
    pub trials: Vec<TrialRecord>,
    pub aggregates: Aggregates,
}

impl RunReport {
    pub fn new(config: Option<Scenario>, trials: Vec<TrialRecord>) -> Self {
        let aggregates = Aggregates::from_trials(&trials);
        RunReport { seed: config.as_ref().map(|c| c.seed), config, trials, aggregates }
    }

    /// Groups transcript lines by trial (in order of first appearance) and
    /// rebuilds the records and aggregates.
    pub fn from_transcript(lines: &[TranscriptLine]) -> std::result::Result<Self, String> {
        let mut groups: Vec<(u64, Vec<TranscriptLine>)> = Vec::new();
        for line in lines {
            match groups.last_mut() {
                Some((t, g)) if *t == line.trial => g.push(line.clone()),
                _ => {
                    if groups.iter().any(|(t, _)| *t == line.trial) {
                        return Err(format!("trial {} is not contiguous in the transcript", line.trial));
                    }
                    groups.push((line.trial, vec![line.clone()]));
                }
            }
        }
        let trials = groups
            .iter()
            .map(|(t, g)| TrialRecord::from_lines(*t, g))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(RunReport::new(None, trials))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(io_err(path))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        serde_json::from_str(&text).map_err(|e| HarnessError::Parse { path: path.into(), reason: e.to_string() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_basics() {
        let r = Rate::new(64, 100);
        assert_eq!(r.rate, Some(0.64));
        assert!((r.ci3.unwrap() - 3.0 * (0.64f64 * 0.36 / 100.0).sqrt()).abs() < 1e-15);
        assert!(r.within_3sigma_of(0.6));
        assert!(!r.within_3sigma_of(0.3));
        let empty = Rate::new(0, 0);
        assert_eq!(empty.rate, None);
        assert!(!empty.within_3sigma_of(0.5));
    }

    #[test]
    fn empty_report_is_valid() {
        let r = RunReport::new(Some(Scenario::default()), Vec::new());
        assert_eq!(r.aggregates.trials, 0);
        assert_eq!(RunReport::from_json(&r.to_json()).unwrap(), r);
    }
}
