//! The dealer/participant state machine.
//!
//! The dealer prepares `|phi_S^(q0)>` and hands the qudit down the chain
//! `Bob_1 .. Bob_m`; each participant applies `U_{p_j, q_j}` with
//! `p_j = F(x_j, x_{j+1})`, `q_j = F(x_{j+1}, x_j)` (the chain closes
//! cyclically, so `Bob_m` uses `x_1` as successor). After `j` honest steps the
//! qudit is `|phi_{P_j}^(Q_j)>` where `P_j, Q_j` are prefix sums including
//! `p_0 = S` and `q_0`.
//!
//! The dealer may check `Bob_u` by sending him `Q_u`; he measures in that
//! basis and the dealer compares the outcome with `P_u`. A failed check
//! starts an upward walk of inverse operations until a re-check passes.
//! Finally `Bob_m` measures in basis `Q_m`, the result `R` and every `p_j`
//! are broadcast in simultaneous rounds, the dealer verifies them against
//! `F`, and each participant reconstructs `S = R - sum p_j`.

mod engine;
mod message;
mod session;

pub use engine::{CheckVerdict, Engine, Localization, RunOutcome, Termination};
pub use message::{Interception, Message, MessageKind, PartyId, Payload, Transcript, Verdict};
pub use session::Session;

use alloc::vec::Vec;

use rand::{Rng, RngCore};

use crate::error::{Error, Result};
use crate::field::{Fe, Field};
use crate::qudit::{MubLabel, QuditState};
use crate::vss::{DealerKeyMaterial, ShareSet};

/// `U_{S, q0} |phi_0^(0)> = |phi_S^(q0)>`.
pub fn dealer_init(secret: Fe, q0: Fe) -> Result<QuditState> {
    let field = secret.field();
    QuditState::mub(MubLabel::phase(field.zero(), field.zero()))?.apply_u(secret, q0)
}

/// One participant's encoding step.
pub fn participant_step(state: &QuditState, p: Fe, q: Fe) -> Result<QuditState> {
    state.apply_u(p, q)
}

/// `S = R - sum p_j`.
pub fn reconstruct(result: Fe, ps: &[Fe]) -> Result<Fe> {
    ps.iter().try_fold(result, |acc, &p| acc.try_sub(p))
}

/// The qudit in flight. Not `Clone`: it can only be moved between holders.
#[derive(Debug)]
pub struct Qudit(QuditState);

impl Qudit {
    pub fn new(state: QuditState) -> Self {
        Qudit(state)
    }

    /// Read-only view for post-hoc analysis.
    pub fn peek(&self) -> &QuditState {
        &self.0
    }

    pub fn into_state(self) -> QuditState {
        self.0
    }

    fn map(self, f: impl FnOnce(&QuditState) -> Result<QuditState>) -> Result<Qudit> {
        Ok(Qudit(f(&self.0)?))
    }
}

/// A participant as seen by the engine: identity, shares, and the exponents
/// derived from those shares alone.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Participant {
    pub position: usize,
    pub share: ShareSet,
    pub successor: Fe,
    pub p: Fe,
    pub q: Fe,
}

impl Participant {
    pub fn id(&self) -> Fe {
        self.share.owner
    }

    /// `F(x, 0)`: key for dealer-to-participant messages.
    fn key_from_dealer(&self) -> Result<Fe> {
        self.share.s1.eval(self.id().field().zero())
    }

    /// `F(0, x)`: key for participant-to-dealer messages.
    fn key_to_dealer(&self) -> Result<Fe> {
        self.share.s2.eval(self.id().field().zero())
    }

    /// `F(self, other)`.
    fn key_to(&self, other: Fe) -> Result<Fe> {
        self.share.s1.eval(other)
    }

    /// `F(other, self)`.
    fn key_from(&self, other: Fe) -> Result<Fe> {
        self.share.s2.eval(other)
    }
}

/// The ordered participants `Bob_1 .. Bob_m` of one sharing round.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chain {
    field: Field,
    participants: Vec<Participant>,
}

impl Chain {
    /// Builds the chain in the given order from the participants' shares.
    pub fn new(field: Field, shares: &[ShareSet]) -> Result<Self> {
        let m = shares.len();
        if m == 0 {
            return Err(Error::InvalidChain { m, n: 0 });
        }
        let participants = shares
            .iter()
            .enumerate()
            .map(|(k, share)| {
                field.check(share.owner)?;
                let successor = shares[(k + 1) % m].owner;
                Ok(Participant {
                    position: k + 1,
                    share: share.clone(),
                    successor,
                    p: share.s1.eval(successor)?,
                    q: share.s2.eval(successor)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Chain { field, participants })
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn len(&self) -> usize {
        self.participants.len()
    }

    pub fn is_empty(&self) -> bool {
        self.participants.is_empty()
    }

    /// `Bob_position`, 1-based.
    pub fn get(&self, position: usize) -> Result<&Participant> {
        position
            .checked_sub(1)
            .and_then(|k| self.participants.get(k))
            .ok_or(Error::PartyOutOfRange { index: position, m: self.len() })
    }

    pub fn iter(&self) -> impl Iterator<Item = &Participant> {
        self.participants.iter()
    }
}

/// What the dealer knows: the secret, `q0`, and every exponent recomputed
/// directly from `F` (independently of the participants' shares).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DealerSecretState {
    secret: Fe,
    q0: Fe,
    ids: Vec<Fe>,
    /// `p_0 .. p_m`, with `p_0 = S`.
    p: Vec<Fe>,
    /// `q_0 .. q_m`.
    q: Vec<Fe>,
    prefix_p: Vec<Fe>,
    prefix_q: Vec<Fe>,
}

impl DealerSecretState {
    pub fn new(material: &DealerKeyMaterial, chain_ids: &[Fe], secret: Fe, q0: Fe) -> Result<Self> {
        let field = material.field();
        field.check(secret)?;
        field.check(q0)?;
        let f = material.poly();
        let m = chain_ids.len();
        let mut p = alloc::vec![secret];
        let mut q = alloc::vec![q0];
        for k in 0..m {
            let (x, next) = (chain_ids[k], chain_ids[(k + 1) % m]);
            p.push(f.eval(x, next)?);
            q.push(f.eval(next, x)?);
        }
        let prefix = |v: &[Fe]| {
            let mut acc = field.zero();
            v.iter().map(|&x| {
                acc = acc + x;
                acc
            }).collect::<Vec<_>>()
        };
        Ok(DealerSecretState {
            secret,
            q0,
            ids: chain_ids.to_vec(),
            prefix_p: prefix(&p),
            prefix_q: prefix(&q),
            p,
            q,
        })
    }

    pub fn secret(&self) -> Fe {
        self.secret
    }

    pub fn q0(&self) -> Fe {
        self.q0
    }

    /// `p_j` as the dealer computes it, `j = 0..=m`.
    pub fn p(&self, j: usize) -> Fe {
        self.p[j]
    }

    pub fn q(&self, j: usize) -> Fe {
        self.q[j]
    }

    /// `sum_{i<=u} p_i`.
    pub fn prefix_p(&self, u: usize) -> Fe {
        self.prefix_p[u]
    }

    /// `sum_{i<=u} q_i`.
    pub fn prefix_q(&self, u: usize) -> Fe {
        self.prefix_q[u]
    }

    pub fn m(&self) -> usize {
        self.ids.len()
    }
}

/// When the dealer checks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CheckSchedule {
    /// Explicit positions in `1..=m`, visited in increasing order.
    Fixed(Vec<usize>),
    /// `k` positions drawn uniformly (with replacement) from `1..=m`.
    Random(usize),
}

impl Default for CheckSchedule {
    fn default() -> Self {
        CheckSchedule::Random(1)
    }
}

impl CheckSchedule {
    /// Concrete sorted positions for a chain of length `m`.
    pub fn resolve<R: Rng + ?Sized>(&self, m: usize, rng: &mut R) -> Result<Vec<usize>> {
        let mut positions = match self {
            CheckSchedule::Fixed(v) => {
                for &u in v {
                    if u == 0 || u > m {
                        return Err(Error::PartyOutOfRange { index: u, m });
                    }
                }
                v.clone()
            }
            CheckSchedule::Random(k) => (0..*k).map(|_| rng.gen_range(1..=m)).collect(),
        };
        positions.sort_unstable();
        Ok(positions)
    }
}

/// Per-run configuration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProtocolConfig {
    pub checks: CheckSchedule,
    /// Measurements per re-check during localization.
    pub localization_repeats: u32,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig { checks: CheckSchedule::default(), localization_repeats: 1 }
    }
}

/// Who a behavior hook is being asked about.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PartyRef {
    pub position: usize,
    pub id: Fe,
}

/// Hooks through which attacks alter a run. Every default is honest.
pub trait Adversary {
    /// Exponents `Bob_position` actually applies.
    fn unitary(&mut self, _party: PartyRef, honest: (Fe, Fe)) -> (Fe, Fe) {
        honest
    }

    /// Exponents inverted during the localization walk; `None` refuses.
    fn inverse(&mut self, _party: PartyRef, _honest: (Fe, Fe), applied: (Fe, Fe)) -> Option<(Fe, Fe)> {
        Some(applied)
    }

    /// Tap on the forward pass from `Bob_gap` to `Bob_{gap+1}`.
    fn intercept(&mut self, _gap: usize, qudit: Qudit, _rng: &mut dyn RngCore) -> Result<(Qudit, Option<(Fe, Fe)>)> {
        Ok((qudit, None))
    }

    /// The value broadcast in place of `p_j`.
    fn broadcast(&mut self, _party: PartyRef, honest: Fe) -> Fe {
        honest
    }

    /// The value `Bob_m` announces in place of his measured `R`.
    fn final_result(&mut self, _party: PartyRef, honest: Fe) -> Fe {
        honest
    }
}

/// Everyone follows the protocol.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Honest;

impl Adversary for Honest {}

impl<A: Adversary + ?Sized> Adversary for &mut A {
    fn unitary(&mut self, party: PartyRef, honest: (Fe, Fe)) -> (Fe, Fe) {
        (**self).unitary(party, honest)
    }

    fn inverse(&mut self, party: PartyRef, honest: (Fe, Fe), applied: (Fe, Fe)) -> Option<(Fe, Fe)> {
        (**self).inverse(party, honest, applied)
    }

    fn intercept(&mut self, gap: usize, qudit: Qudit, rng: &mut dyn RngCore) -> Result<(Qudit, Option<(Fe, Fe)>)> {
        (**self).intercept(gap, qudit, rng)
    }

    fn broadcast(&mut self, party: PartyRef, honest: Fe) -> Fe {
        (**self).broadcast(party, honest)
    }

    fn final_result(&mut self, party: PartyRef, honest: Fe) -> Fe {
        (**self).final_result(party, honest)
    }
}

#[cfg(test)]
mod tests;
