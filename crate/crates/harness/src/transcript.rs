//! Line-delimited JSON transcripts.
//!
//! One object per delivered message, in delivery order:
//!
//! | field       | type              | meaning                                             |
//! |-------------|-------------------|-----------------------------------------------------|
//! | `trial`     | integer           | trial index within the run                          |
//! | `round`     | integer           | protocol round; broadcasts share one round          |
//! | `kind`      | string            | `qudit-pass`, `check-request`, `check-response`, `final-basis`, `final-result`, `share-value`, `verdict`, `intercept` |
//! | `sender`    | string            | `dealer`, `bob-K`, or `eve`                         |
//! | `receivers` | array of strings  | same naming as `sender`                             |
//! | `written`   | array of integers | ciphertext per receiver, as sent                    |
//! | `decrypted` | array of integers | what each receiver decrypted (analysis only)        |
//! | `verdict`   | object or null    | dealer announcement, tagged by `verdict`            |
//! | `intercept` | object or null    | Eve's basis, outcome, and the true basis and value  |

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use vqss_core::protocol::{Interception, Message, Payload, Transcript, Verdict};

use crate::error::{io_err, HarnessError, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum VerdictRecord {
    CheckClean { party: usize, outcome: u64 },
    CheckFailed { party: usize, outcome: u64, expected: u64 },
    Recheck { party: usize, passes: u32, repeats: u32 },
    Localized { cheater: usize },
    Refused { party: usize },
    Unresolved { lo: usize, hi: usize },
    BroadcastRejected { flagged: Vec<usize> },
    Reconstructed { value: u64, secret: u64 },
}

impl From<&Verdict> for VerdictRecord {
    fn from(v: &Verdict) -> Self {
        match v {
            Verdict::CheckClean { party, outcome } => VerdictRecord::CheckClean { party: *party, outcome: outcome.value() },
            Verdict::CheckFailed { party, outcome, expected } => VerdictRecord::CheckFailed {
                party: *party,
                outcome: outcome.value(),
                expected: expected.value(),
            },
            Verdict::Recheck { party, passes, repeats } => {
                VerdictRecord::Recheck { party: *party, passes: *passes, repeats: *repeats }
            }
            Verdict::Localized { cheater } => VerdictRecord::Localized { cheater: *cheater },
            Verdict::Refused { party } => VerdictRecord::Refused { party: *party },
            Verdict::Unresolved { lo, hi } => VerdictRecord::Unresolved { lo: *lo, hi: *hi },
            Verdict::BroadcastRejected { flagged } => VerdictRecord::BroadcastRejected { flagged: flagged.clone() },
            Verdict::Reconstructed { value, secret } => {
                VerdictRecord::Reconstructed { value: value.value(), secret: secret.value() }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterceptRecord {
    pub gap: usize,
    pub basis_guess: u64,
    pub outcome: u64,
    pub true_basis: u64,
    pub true_value: u64,
}

impl InterceptRecord {
    pub fn basis_matched(&self) -> bool {
        self.basis_guess == self.true_basis
    }

    pub fn value_matched(&self) -> bool {
        self.outcome == self.true_value
    }
}

impl From<&Interception> for InterceptRecord {
    fn from(i: &Interception) -> Self {
        InterceptRecord {
            gap: i.gap,
            basis_guess: i.basis_guess.value(),
            outcome: i.outcome.value(),
            true_basis: i.true_basis.value(),
            true_value: i.true_value.value(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptLine {
    pub trial: u64,
    pub round: u32,
    pub kind: String,
    pub sender: String,
    pub receivers: Vec<String>,
    pub written: Vec<u64>,
    pub decrypted: Vec<u64>,
    pub verdict: Option<VerdictRecord>,
    pub intercept: Option<InterceptRecord>,
}

impl TranscriptLine {
    pub fn from_message(trial: u64, m: &Message) -> Self {
        let (mut written, mut decrypted, mut verdict, mut intercept) = (Vec::new(), Vec::new(), None, None);
        match &m.payload {
            Payload::Qudit => {}
            Payload::Classical { written: w, decrypted: p } => {
                written = w.iter().map(|x| x.value()).collect();
                decrypted = p.iter().map(|x| x.value()).collect();
            }
            Payload::Verdict(v) => verdict = Some(v.into()),
            Payload::Intercept(i) => intercept = Some(i.into()),
        }
        TranscriptLine {
            trial,
            round: m.round,
            kind: m.kind.as_str().to_string(),
            sender: m.sender.to_string(),
            receivers: m.receivers.iter().map(ToString::to_string).collect(),
            written,
            decrypted,
            verdict,
            intercept,
        }
    }
}

pub fn lines_for(trial: u64, transcript: &Transcript) -> Vec<TranscriptLine> {
    transcript.messages().iter().map(|m| TranscriptLine::from_message(trial, m)).collect()
}

pub fn to_jsonl(lines: &[TranscriptLine]) -> String {
    let mut out = String::new();
    for line in lines {
        out.push_str(&serde_json::to_string(line).expect("transcript line serializes"));
        out.push('\n');
    }
    out
}

pub fn parse_jsonl(text: &str) -> std::result::Result<Vec<TranscriptLine>, String> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(k, l)| serde_json::from_str(l).map_err(|e| format!("line {}: {e}", k + 1)))
        .collect()
}

pub fn write_transcript(path: &Path, lines: &[TranscriptLine]) -> Result<()> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path).map_err(io_err(path))?);
    file.write_all(to_jsonl(lines).as_bytes()).map_err(io_err(path))?;
    file.flush().map_err(io_err(path))
}

pub fn read_transcript(path: &Path) -> Result<Vec<TranscriptLine>> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    parse_jsonl(&text).map_err(|reason| HarnessError::Parse { path: path.into(), reason })
}
