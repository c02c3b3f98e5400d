use alloc::vec::Vec;
use core::fmt;

use crate::field::Fe;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PartyId {
    Dealer,
    /// `Bob_position`, 1-based chain position.
    Bob(usize),
    /// External eavesdropper; only appears as the sender of interception records.
    Eve,
}

impl fmt::Display for PartyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PartyId::Dealer => write!(f, "dealer"),
            PartyId::Bob(k) => write!(f, "bob-{k}"),
            PartyId::Eve => write!(f, "eve"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MessageKind {
    QuditPass,
    CheckRequest,
    CheckResponse,
    FinalBasis,
    FinalResult,
    ShareValue,
    Verdict,
    Intercept,
}

impl MessageKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MessageKind::QuditPass => "qudit-pass",
            MessageKind::CheckRequest => "check-request",
            MessageKind::CheckResponse => "check-response",
            MessageKind::FinalBasis => "final-basis",
            MessageKind::FinalResult => "final-result",
            MessageKind::ShareValue => "share-value",
            MessageKind::Verdict => "verdict",
            MessageKind::Intercept => "intercept",
        }
    }

    /// Kinds sent in simultaneous public rounds.
    pub fn is_broadcast(self) -> bool {
        matches!(self, MessageKind::FinalResult | MessageKind::ShareValue)
    }
}

/// Dealer announcements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    CheckClean { party: usize, outcome: Fe },
    CheckFailed { party: usize, outcome: Fe, expected: Fe },
    /// A re-check during localization; `party == 0` is the dealer herself.
    Recheck { party: usize, passes: u32, repeats: u32 },
    Localized { cheater: usize },
    Refused { party: usize },
    /// The walk reached the dealer; the fault lies after position `lo` and
    /// at or before position `hi`.
    Unresolved { lo: usize, hi: usize },
    BroadcastRejected { flagged: Vec<usize> },
    /// `secret` is recorded for post-hoc analysis only.
    Reconstructed { value: Fe, secret: Fe },
}

/// What an eavesdropper did at a gap, with the ground truth she could not see.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Interception {
    pub gap: usize,
    pub basis_guess: Fe,
    pub outcome: Fe,
    pub true_basis: Fe,
    pub true_value: Fe,
}

impl Interception {
    pub fn basis_matched(&self) -> bool {
        self.basis_guess == self.true_basis
    }

    pub fn value_matched(&self) -> bool {
        self.outcome == self.true_value
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Payload {
    /// The qudit handle moves with the message.
    Qudit,
    /// One ciphertext per receiver, and what each receiver decrypted.
    Classical { written: Vec<Fe>, decrypted: Vec<Fe> },
    Verdict(Verdict),
    Intercept(Interception),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Message {
    pub round: u32,
    pub kind: MessageKind,
    pub sender: PartyId,
    pub receivers: Vec<PartyId>,
    pub payload: Payload,
}

/// Ordered log of every delivered message.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Transcript {
    messages: Vec<Message>,
}

impl Transcript {
    pub fn messages(&self) -> &[Message] {
        &self.messages
    }

    pub fn len(&self) -> usize {
        self.messages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }

    pub fn verdicts(&self) -> impl Iterator<Item = &Verdict> {
        self.messages.iter().filter_map(|m| match &m.payload {
            Payload::Verdict(v) => Some(v),
            _ => None,
        })
    }

    pub(crate) fn extend(&mut self, batch: Vec<Message>) {
        self.messages.extend(batch);
    }
}

/// Staging area for one round: messages are committed first and only
/// become visible (delivered into the transcript) together.
#[derive(Debug, Default)]
pub(crate) struct Bus {
    pending: Vec<Message>,
}

impl Bus {
    pub fn commit(&mut self, message: Message) {
        self.pending.push(message);
    }

    pub fn deliver(&mut self) -> Vec<Message> {
        core::mem::take(&mut self.pending)
    }
}
