use alloc::vec;
use alloc::vec::Vec;

use rand::RngCore;

use super::message::Bus;
use super::{
    dealer_init, participant_step, reconstruct, Adversary, Chain, DealerSecretState, Interception,
    Message, MessageKind, PartyId, PartyRef, Payload, ProtocolConfig, Qudit, Transcript, Verdict,
};
use crate::error::{Error, Result};
use crate::field::{BivariatePoly, Fe};
use crate::qudit::{Basis, QuditState};
use crate::vss::{otp_decrypt, otp_encrypt, DealerKeyMaterial};

/// Result of one dealer check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CheckVerdict {
    pub party: usize,
    pub outcome: Fe,
    pub expected: Fe,
    pub clean: bool,
}

/// Result of the upward localization walk.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Localization {
    /// The re-check after `cheater`'s inverse passed `passes` of `repeats` times.
    Identified { cheater: usize, passes: u32, repeats: u32 },
    /// `party` declined to invert.
    Refused { party: usize },
    /// Every re-check failed down to the dealer. The disturbance happened after
    /// position `lo` (the last clean check, or the dealer) and no later than `hi`.
    Unresolved { lo: usize, hi: usize },
}

/// How a run ended.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Termination {
    Reconstructed { value: Fe },
    FraudLocalized { cheater: usize },
    LocalizationRefused { party: usize },
    Unresolved { lo: usize, hi: usize },
    BroadcastRejected { flagged: Vec<usize> },
}

impl From<Localization> for Termination {
    fn from(loc: Localization) -> Self {
        match loc {
            Localization::Identified { cheater, .. } => Termination::FraudLocalized { cheater },
            Localization::Refused { party } => Termination::LocalizationRefused { party },
            Localization::Unresolved { lo, hi } => Termination::Unresolved { lo, hi },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunOutcome {
    pub secret: Fe,
    pub q0: Fe,
    pub check_positions: Vec<usize>,
    pub checks: Vec<CheckVerdict>,
    pub localization: Option<Localization>,
    pub interceptions: Vec<Interception>,
    pub termination: Termination,
    pub transcript: Transcript,
}

impl RunOutcome {
    /// The dealer stopped the run for any reason.
    pub fn detected(&self) -> bool {
        !matches!(self.termination, Termination::Reconstructed { .. })
    }

    pub fn reconstructed(&self) -> Option<Fe> {
        match self.termination {
            Termination::Reconstructed { value } => Some(value),
            _ => None,
        }
    }

    /// Chain positions the dealer blamed.
    pub fn flagged(&self) -> Vec<usize> {
        match &self.termination {
            Termination::FraudLocalized { cheater } => vec![*cheater],
            Termination::LocalizationRefused { party } => vec![*party],
            Termination::BroadcastRejected { flagged } => flagged.clone(),
            _ => Vec::new(),
        }
    }
}

/// A single protocol run, steppable for inspection or driven by [`run`](Engine::run).
///
/// `holder` names who has the qudit; `applied` counts how many participants
/// have applied their step to the state currently in flight, so `Bob_j`
/// holding with `applied == j` has finished his step.
pub struct Engine<A, R> {
    chain: Chain,
    poly: BivariatePoly,
    dealer: DealerSecretState,
    config: ProtocolConfig,
    positions: Vec<usize>,
    adversary: A,
    rng: R,
    qudit: Option<Qudit>,
    holder: PartyId,
    applied: usize,
    applied_ops: Vec<(Fe, Fe)>,
    round: u32,
    bus: Bus,
    transcript: Transcript,
    checks: Vec<CheckVerdict>,
    interceptions: Vec<Interception>,
    terminated: bool,
}

impl<A: Adversary, R: RngCore> Engine<A, R> {
    /// Draws `q0` and the check positions from `rng`, prepares `|phi_S^(q0)>`
    /// and leaves it with the dealer.
    pub fn new(
        material: &DealerKeyMaterial,
        chain: Chain,
        secret: Fe,
        config: ProtocolConfig,
        adversary: A,
        mut rng: R,
    ) -> Result<Self> {
        let field = material.field();
        if chain.field() != field {
            return Err(Error::ModulusMismatch { left: field.order(), right: chain.field().order() });
        }
        let q0 = field.random(&mut rng);
        let positions = config.checks.resolve(chain.len(), &mut rng)?;
        let ids: Vec<Fe> = chain.iter().map(|p| p.id()).collect();
        let dealer = DealerSecretState::new(material, &ids, secret, q0)?;
        let qudit = Qudit::new(dealer_init(secret, q0)?);
        let m = chain.len();
        Ok(Engine {
            chain,
            poly: material.poly().clone(),
            dealer,
            config,
            positions,
            adversary,
            rng,
            qudit: Some(qudit),
            holder: PartyId::Dealer,
            applied: 0,
            applied_ops: vec![(field.zero(), field.zero()); m],
            round: 0,
            bus: Bus::default(),
            transcript: Transcript::default(),
            checks: Vec::new(),
            interceptions: Vec::new(),
            terminated: false,
        })
    }

    pub fn chain(&self) -> &Chain {
        &self.chain
    }

    pub fn dealer(&self) -> &DealerSecretState {
        &self.dealer
    }

    pub fn holder(&self) -> PartyId {
        self.holder
    }

    pub fn check_positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    /// Read-only view of the qudit, for analysis.
    pub fn qudit_state(&self) -> Option<&QuditState> {
        self.qudit.as_ref().map(Qudit::peek)
    }

    fn m(&self) -> usize {
        self.chain.len()
    }

    fn next_round(&mut self) -> u32 {
        self.round += 1;
        self.round
    }

    fn all_bobs(&self) -> Vec<PartyId> {
        (1..=self.m()).map(PartyId::Bob).collect()
    }

    /// Point-to-point message, delivered in its own round.
    fn send(&mut self, kind: MessageKind, sender: PartyId, receivers: Vec<PartyId>, payload: Payload) {
        let round = self.next_round();
        self.bus.commit(Message { round, kind, sender, receivers, payload });
        let delivered = self.bus.deliver();
        self.transcript.extend(delivered);
    }

    fn announce(&mut self, verdict: Verdict) {
        let receivers = self.all_bobs();
        self.send(MessageKind::Verdict, PartyId::Dealer, receivers, Payload::Verdict(verdict));
    }

    fn take_qudit(&mut self) -> Result<Qudit> {
        self.qudit.take().ok_or(Error::InvalidPhase("no qudit in play"))
    }

    fn ensure_live(&self) -> Result<()> {
        if self.terminated {
            return Err(Error::InvalidPhase("run already terminated"));
        }
        Ok(())
    }

    /// Hands the qudit to the next participant. Forward passes between two
    /// participants go through the adversary's channel tap.
    pub fn forward(&mut self) -> Result<()> {
        self.ensure_live()?;
        let m = self.m();
        let (from, to) = match self.holder {
            PartyId::Dealer if self.applied == 0 => (0, 1),
            PartyId::Bob(j) if j < m && self.applied == j => (j, j + 1),
            _ => return Err(Error::InvalidPhase("holder cannot forward now")),
        };
        let mut qudit = self.take_qudit()?;
        if from >= 1 {
            let (resent, record) = self.adversary.intercept(from, qudit, &mut self.rng)?;
            qudit = resent;
            if let Some((basis_guess, outcome)) = record {
                let record = Interception {
                    gap: from,
                    basis_guess,
                    outcome,
                    true_basis: self.dealer.prefix_q(from),
                    true_value: self.dealer.prefix_p(from),
                };
                self.interceptions.push(record);
                self.send(MessageKind::Intercept, PartyId::Eve, Vec::new(), Payload::Intercept(record));
            }
        }
        let sender = if from == 0 { PartyId::Dealer } else { PartyId::Bob(from) };
        self.send(MessageKind::QuditPass, sender, vec![PartyId::Bob(to)], Payload::Qudit);
        self.qudit = Some(qudit);
        self.holder = PartyId::Bob(to);
        Ok(())
    }

    /// The current holder applies his encoding step.
    pub fn apply(&mut self) -> Result<()> {
        self.ensure_live()?;
        let j = match self.holder {
            PartyId::Bob(j) if self.applied + 1 == j => j,
            _ => return Err(Error::InvalidPhase("holder cannot apply now")),
        };
        let part = self.chain.get(j)?;
        let who = PartyRef { position: j, id: part.id() };
        let (p, q) = self.adversary.unitary(who, (part.p, part.q));
        let qudit = self.take_qudit()?;
        self.qudit = Some(qudit.map(|s| participant_step(s, p, q))?);
        self.applied_ops[j - 1] = (p, q);
        self.applied = j;
        Ok(())
    }

    /// Dealer sends `Q_u` to `Bob_u`, who measures and returns the outcome.
    fn check_exchange(&mut self, u: usize) -> Result<Fe> {
        let part = self.chain.get(u)?.clone();
        let zero = self.chain.field().zero();

        let basis = self.dealer.prefix_q(u);
        let cipher = otp_encrypt(basis, self.poly.eval(part.id(), zero)?)?;
        let received = otp_decrypt(cipher, part.key_from_dealer()?)?;
        self.send(
            MessageKind::CheckRequest,
            PartyId::Dealer,
            vec![PartyId::Bob(u)],
            Payload::Classical { written: vec![cipher], decrypted: vec![received] },
        );

        let qudit = self.take_qudit()?;
        let (outcome, post) = qudit.peek().measure(Basis::Phase(received), &mut self.rng)?;
        self.qudit = Some(Qudit::new(post));

        let cipher = otp_encrypt(outcome, part.key_to_dealer()?)?;
        let received = otp_decrypt(cipher, self.poly.eval(zero, part.id())?)?;
        self.send(
            MessageKind::CheckResponse,
            PartyId::Bob(u),
            vec![PartyId::Dealer],
            Payload::Classical { written: vec![cipher], decrypted: vec![received] },
        );
        Ok(received)
    }

    /// Random check of `Bob_u`, who must hold the qudit after his own step.
    pub fn check(&mut self, u: usize) -> Result<CheckVerdict> {
        self.ensure_live()?;
        self.chain.get(u)?;
        if self.holder != PartyId::Bob(u) || self.applied != u {
            return Err(Error::NotHolder { expected: u });
        }
        let outcome = self.check_exchange(u)?;
        let expected = self.dealer.prefix_p(u);
        let clean = outcome == expected;
        self.announce(if clean {
            Verdict::CheckClean { party: u, outcome }
        } else {
            Verdict::CheckFailed { party: u, outcome, expected }
        });
        let verdict = CheckVerdict { party: u, outcome, expected, clean };
        self.checks.push(verdict);
        Ok(verdict)
    }

    /// Walks upward from a failed check at `u`: each participant inverts his
    /// step and passes the qudit back, and the dealer re-checks the previous
    /// position. The first participant whose inverse makes the re-check pass
    /// is declared the cheater. Terminates the run.
    pub fn localize(&mut self, u: usize) -> Result<Localization> {
        self.ensure_live()?;
        match self.checks.last() {
            Some(c) if c.party == u && !c.clean => {}
            _ => return Err(Error::InvalidPhase("localization needs a failed check at this position")),
        }
        if self.holder != PartyId::Bob(u) || self.applied != u {
            return Err(Error::NotHolder { expected: u });
        }
        let lo = self.checks.iter().filter(|c| c.clean && c.party < u).map(|c| c.party).max().unwrap_or(0);
        let repeats = self.config.localization_repeats.max(1);

        let mut v = u;
        loop {
            let part = self.chain.get(v)?;
            let who = PartyRef { position: v, id: part.id() };
            let honest = (part.p, part.q);
            let Some((p, q)) = self.adversary.inverse(who, honest, self.applied_ops[v - 1]) else {
                self.announce(Verdict::Refused { party: v });
                self.terminated = true;
                return Ok(Localization::Refused { party: v });
            };
            let qudit = self.take_qudit()?;
            self.qudit = Some(qudit.map(|s| s.apply_u_inverse(p, q))?);
            let w = v - 1;
            let to = if w == 0 { PartyId::Dealer } else { PartyId::Bob(w) };
            self.send(MessageKind::QuditPass, PartyId::Bob(v), vec![to], Payload::Qudit);
            self.holder = to;
            self.applied = w;

            let mut passes = 0;
            for _ in 0..repeats {
                let outcome = if w == 0 {
                    let basis = Basis::Phase(self.dealer.q0());
                    let qudit = self.take_qudit()?;
                    let (outcome, post) = qudit.peek().measure(basis, &mut self.rng)?;
                    self.qudit = Some(Qudit::new(post));
                    outcome
                } else {
                    self.check_exchange(w)?
                };
                if outcome == self.dealer.prefix_p(w) {
                    passes += 1;
                }
            }
            self.announce(Verdict::Recheck { party: w, passes, repeats });
            if passes == repeats {
                self.announce(Verdict::Localized { cheater: v });
                self.terminated = true;
                return Ok(Localization::Identified { cheater: v, passes, repeats });
            }
            if w == 0 {
                self.announce(Verdict::Unresolved { lo, hi: u });
                self.terminated = true;
                return Ok(Localization::Unresolved { lo, hi: u });
            }
            v = w;
        }
    }

    /// Final measurement by `Bob_m`, the two simultaneous broadcast rounds,
    /// the dealer's verification, and reconstruction. Terminates the run.
    pub fn final_round(&mut self) -> Result<Termination> {
        self.ensure_live()?;
        let m = self.m();
        if self.holder != PartyId::Bob(m) || self.applied != m {
            return Err(Error::NotHolder { expected: m });
        }
        let field = self.chain.field();
        let zero = field.zero();
        let last = self.chain.get(m)?.clone();

        // basis announcement, same channel as a check request
        let basis = self.dealer.prefix_q(m);
        let cipher = otp_encrypt(basis, self.poly.eval(last.id(), zero)?)?;
        let received_basis = otp_decrypt(cipher, last.key_from_dealer()?)?;
        self.send(
            MessageKind::FinalBasis,
            PartyId::Dealer,
            vec![PartyId::Bob(m)],
            Payload::Classical { written: vec![cipher], decrypted: vec![received_basis] },
        );
        let qudit = self.take_qudit()?;
        let (measured, post) = qudit.peek().measure(Basis::Phase(received_basis), &mut self.rng)?;
        self.qudit = Some(Qudit::new(post));
        let announced = self.adversary.final_result(PartyRef { position: m, id: last.id() }, measured);

        // received_r[i] is what Bob_i holds as R; index 0 is the dealer
        let mut received_r = vec![zero; m + 1];
        received_r[m] = announced;
        let mut receivers = vec![PartyId::Dealer];
        let mut written = vec![otp_encrypt(announced, last.key_to_dealer()?)?];
        let mut decrypted = vec![otp_decrypt(written[0], self.poly.eval(zero, last.id())?)?];
        received_r[0] = decrypted[0];
        for bob in self.chain.iter().filter(|b| b.position != m) {
            let c = otp_encrypt(announced, last.key_from(bob.id())?)?;
            let plain = otp_decrypt(c, bob.key_to(last.id())?)?;
            receivers.push(PartyId::Bob(bob.position));
            written.push(c);
            decrypted.push(plain);
            received_r[bob.position] = plain;
        }
        let round = self.next_round();
        self.bus.commit(Message {
            round,
            kind: MessageKind::FinalResult,
            sender: PartyId::Bob(m),
            receivers,
            payload: Payload::Classical { written, decrypted },
        });
        let delivered = self.bus.deliver();
        self.transcript.extend(delivered);

        // received_p[i][j]: p_j as seen by Bob_i (row 0 is the dealer)
        let mut received_p = vec![vec![zero; m + 1]; m + 1];
        let round = self.next_round();
        let bobs: Vec<_> = self.chain.iter().cloned().collect();
        for sender in &bobs {
            let j = sender.position;
            let value = self.adversary.broadcast(PartyRef { position: j, id: sender.id() }, sender.p);
            let mut receivers = vec![PartyId::Dealer];
            let mut written = vec![otp_encrypt(value, sender.key_to_dealer()?)?];
            let mut decrypted = vec![otp_decrypt(written[0], self.poly.eval(zero, sender.id())?)?];
            received_p[0][j] = decrypted[0];
            for bob in bobs.iter().filter(|b| b.position != j) {
                let c = otp_encrypt(value, sender.key_to(bob.id())?)?;
                let plain = otp_decrypt(c, bob.key_from(sender.id())?)?;
                receivers.push(PartyId::Bob(bob.position));
                written.push(c);
                decrypted.push(plain);
                received_p[bob.position][j] = plain;
            }
            self.bus.commit(Message {
                round,
                kind: MessageKind::ShareValue,
                sender: PartyId::Bob(j),
                receivers,
                payload: Payload::Classical { written, decrypted },
            });
        }
        let delivered = self.bus.deliver();
        self.transcript.extend(delivered);

        let mut flagged = Vec::new();
        for (j, &seen) in received_p[0].iter().enumerate().skip(1) {
            let wrong_p = seen != self.dealer.p(j);
            let wrong_r = j == m && received_r[0] != self.dealer.prefix_p(m);
            if wrong_p || wrong_r {
                flagged.push(j);
            }
        }
        self.terminated = true;
        if !flagged.is_empty() {
            self.announce(Verdict::BroadcastRejected { flagged: flagged.clone() });
            return Ok(Termination::BroadcastRejected { flagged });
        }

        let mut values = Vec::with_capacity(m);
        for bob in &bobs {
            let i = bob.position;
            let ps: Vec<Fe> = (1..=m).map(|j| if j == i { bob.p } else { received_p[i][j] }).collect();
            values.push(reconstruct(received_r[i], &ps)?);
        }
        let value = values[0];
        debug_assert!(values.iter().all(|&v| v == value), "participants disagree on the secret");
        self.announce(Verdict::Reconstructed { value, secret: self.dealer.secret() });
        Ok(Termination::Reconstructed { value })
    }

    /// Drives the whole run: forward, apply, scheduled checks (localizing on
    /// the first failure), then the final round.
    pub fn run(mut self) -> Result<RunOutcome> {
        let m = self.m();
        for j in 1..=m {
            self.forward()?;
            self.apply()?;
            let due = self.positions.iter().filter(|&&u| u == j).count();
            for _ in 0..due {
                if !self.check(j)?.clean {
                    let loc = self.localize(j)?;
                    return Ok(self.finish(loc.into(), Some(loc)));
                }
            }
        }
        let termination = self.final_round()?;
        Ok(self.finish(termination, None))
    }

    fn finish(self, termination: Termination, localization: Option<Localization>) -> RunOutcome {
        RunOutcome {
            secret: self.dealer.secret(),
            q0: self.dealer.q0(),
            check_positions: self.positions,
            checks: self.checks,
            localization,
            interceptions: self.interceptions,
            termination,
            transcript: self.transcript,
        }
    }
}
