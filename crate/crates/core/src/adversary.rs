//! Attack strategies that plug into a protocol run through [`Adversary`].

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use rand::RngCore;

use crate::error::{Error, Result};
use crate::field::{Fe, Field};
use crate::protocol::{Adversary, Chain, MessageKind, PartyId, PartyRef, Payload, Qudit, Transcript};
use crate::qudit::Basis;
use crate::vss::ORACLE_LIMIT;

/// How Eve picks the basis she measures an intercepted qudit in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisGuess {
    /// Uniform over the `d` phase bases.
    Uniform,
    Fixed(Fe),
}

/// What a forger does when the localization walk asks him to invert.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CheaterInverse {
    /// Inverts the operation he really applied.
    #[default]
    UndoApplied,
    /// Inverts the honest `U_{p_j, q_j}`, as if he had never forged.
    InvertDeclared,
    Refuse,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FakeValue {
    /// Broadcast `p_j + offset`; the offset must be nonzero.
    Offset(Fe),
    /// Broadcast this value; must differ from `p_j`.
    Fixed(Fe),
}

/// Immutable description of an attack.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum AttackSpec {
    #[default]
    None,
    /// Eve taps the pass from `Bob_gap` to `Bob_{gap+1}`.
    InterceptResend { gap: usize, guess: BasisGuess },
    /// `Bob_party` applies `U_{p+delta_p, q+delta_q}`.
    ForgedUnitary { party: usize, delta_p: Fe, delta_q: Fe, inverse: CheaterInverse },
    /// Each listed participant broadcasts a wrong `p_j`.
    WrongBroadcast { fakes: Vec<(usize, FakeValue)> },
    /// The listed participants pool what they see; they follow the protocol.
    Conspiracy { members: Vec<usize> },
}

impl AttackSpec {
    pub fn intercept_resend(gap: usize, guess: BasisGuess) -> Self {
        AttackSpec::InterceptResend { gap, guess }
    }

    pub fn forged_unitary(party: usize, delta_p: Fe, delta_q: Fe, inverse: CheaterInverse) -> Result<Self> {
        if delta_p.modulus() != delta_q.modulus() {
            return Err(Error::ModulusMismatch { left: delta_p.modulus(), right: delta_q.modulus() });
        }
        if delta_p.is_zero() && delta_q.is_zero() {
            return Err(Error::InvalidAttack("forgery offsets are both zero"));
        }
        Ok(AttackSpec::ForgedUnitary { party, delta_p, delta_q, inverse })
    }

    pub fn wrong_broadcast(fakes: Vec<(usize, FakeValue)>) -> Result<Self> {
        for &(_, fake) in &fakes {
            if let FakeValue::Offset(o) = fake {
                if o.is_zero() {
                    return Err(Error::InvalidAttack("broadcast offset is zero"));
                }
            }
        }
        Ok(AttackSpec::WrongBroadcast { fakes })
    }

    pub fn conspiracy(members: Vec<usize>) -> Self {
        AttackSpec::Conspiracy { members }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            AttackSpec::None => "none",
            AttackSpec::InterceptResend { .. } => "intercept-resend",
            AttackSpec::ForgedUnitary { .. } => "forged-unitary",
            AttackSpec::WrongBroadcast { .. } => "wrong-broadcast",
            AttackSpec::Conspiracy { .. } => "conspiracy",
        }
    }

    /// Checks positions against a chain of length `m`. Coalitions must leave
    /// at least one participant honest.
    pub fn validate(&self, m: usize) -> Result<()> {
        let in_chain = |k: usize| {
            if k == 0 || k > m {
                Err(Error::PartyOutOfRange { index: k, m })
            } else {
                Ok(())
            }
        };
        let coalition = |parties: &mut dyn Iterator<Item = usize>| -> Result<()> {
            let mut seen = BTreeSet::new();
            for k in parties {
                in_chain(k)?;
                if !seen.insert(k) {
                    return Err(Error::InvalidAttack("participant listed twice"));
                }
            }
            if seen.is_empty() {
                return Err(Error::InvalidAttack("empty coalition"));
            }
            if seen.len() >= m {
                return Err(Error::InvalidAttack("coalition must leave one participant honest"));
            }
            Ok(())
        };
        match self {
            AttackSpec::None => Ok(()),
            AttackSpec::InterceptResend { gap, .. } => {
                if *gap == 0 || *gap >= m {
                    return Err(Error::InvalidAttack("intercept gap must lie between two participants"));
                }
                Ok(())
            }
            AttackSpec::ForgedUnitary { party, .. } => in_chain(*party),
            AttackSpec::WrongBroadcast { fakes } => coalition(&mut fakes.iter().map(|f| f.0)),
            AttackSpec::Conspiracy { members } => coalition(&mut members.iter().copied()),
        }
    }

    /// Validates against a concrete chain and produces the behavior override.
    pub fn bind(&self, chain: &Chain) -> Result<Attack> {
        self.validate(chain.len())?;
        let field = chain.field();
        let check = |x: Fe| field.check(x).map(|_| ());
        let mut broadcasts = BTreeMap::new();
        match self {
            AttackSpec::InterceptResend { guess: BasisGuess::Fixed(j), .. } => check(*j)?,
            AttackSpec::ForgedUnitary { delta_p, delta_q, .. } => {
                check(*delta_p)?;
                check(*delta_q)?;
            }
            AttackSpec::WrongBroadcast { fakes } => {
                for &(k, fake) in fakes {
                    let honest = chain.get(k)?.p;
                    let value = match fake {
                        FakeValue::Offset(o) => honest.try_add(o)?,
                        FakeValue::Fixed(v) => field.check(v)?,
                    };
                    if value == honest {
                        return Err(Error::InvalidAttack("fake broadcast equals the honest value"));
                    }
                    broadcasts.insert(k, value);
                }
            }
            _ => {}
        }
        Ok(Attack { spec: self.clone(), field, broadcasts })
    }
}

/// An [`AttackSpec`] installed on one run.
#[derive(Clone, Debug)]
pub struct Attack {
    spec: AttackSpec,
    field: Field,
    broadcasts: BTreeMap<usize, Fe>,
}

impl Attack {
    pub fn spec(&self) -> &AttackSpec {
        &self.spec
    }
}

impl Adversary for Attack {
    fn unitary(&mut self, party: PartyRef, honest: (Fe, Fe)) -> (Fe, Fe) {
        match self.spec {
            AttackSpec::ForgedUnitary { party: c, delta_p, delta_q, .. } if c == party.position => {
                (honest.0 + delta_p, honest.1 + delta_q)
            }
            _ => honest,
        }
    }

    fn inverse(&mut self, party: PartyRef, honest: (Fe, Fe), applied: (Fe, Fe)) -> Option<(Fe, Fe)> {
        match self.spec {
            AttackSpec::ForgedUnitary { party: c, inverse, .. } if c == party.position => match inverse {
                CheaterInverse::UndoApplied => Some(applied),
                CheaterInverse::InvertDeclared => Some(honest),
                CheaterInverse::Refuse => None,
            },
            _ => Some(applied),
        }
    }

    fn intercept(&mut self, gap: usize, qudit: Qudit, rng: &mut dyn RngCore) -> Result<(Qudit, Option<(Fe, Fe)>)> {
        match self.spec {
            AttackSpec::InterceptResend { gap: g, guess } if g == gap => {
                let (guess, outcome, qudit) = intercept_resend(qudit, guess, self.field, rng)?;
                Ok((qudit, Some((guess, outcome))))
            }
            _ => Ok((qudit, None)),
        }
    }

    fn broadcast(&mut self, party: PartyRef, honest: Fe) -> Fe {
        self.broadcasts.get(&party.position).copied().unwrap_or(honest)
    }
}

/// Measures the qudit in a guessed phase basis and resends the collapsed
/// state. Returns the basis, the outcome, and the resent qudit.
pub fn intercept_resend<R: RngCore + ?Sized>(
    qudit: Qudit,
    guess: BasisGuess,
    field: Field,
    rng: &mut R,
) -> Result<(Fe, Fe, Qudit)> {
    let basis = match guess {
        BasisGuess::Uniform => field.random(rng),
        BasisGuess::Fixed(j) => field.check(j)?,
    };
    let (outcome, post) = qudit.into_state().measure(Basis::Phase(basis), rng)?;
    Ok((basis, outcome, Qudit::new(post)))
}

/// What a coalition of participants knows at the end of a run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoalitionView {
    pub field: Field,
    pub m: usize,
    pub members: BTreeSet<usize>,
    /// `p_j` values known to the coalition, by position.
    pub known_p: BTreeMap<usize, Fe>,
    /// The final measurement result, if any member saw it.
    pub result: Option<Fe>,
}

impl CoalitionView {
    /// Members' own `p_j` plus everything delivered to a member. With
    /// `include_broadcasts == false` only the members' own public messages
    /// count (so a member `Bob_m` still knows `R`).
    pub fn from_transcript(chain: &Chain, members: &[usize], transcript: &Transcript, include_broadcasts: bool) -> Result<Self> {
        let mut set = BTreeSet::new();
        let mut known_p = BTreeMap::new();
        for &k in members {
            known_p.insert(k, chain.get(k)?.p);
            set.insert(k);
        }
        let mut result = None;
        for msg in transcript.messages() {
            let Payload::Classical { decrypted, .. } = &msg.payload else { continue };
            let sender_in = matches!(msg.sender, PartyId::Bob(k) if set.contains(&k));
            if msg.kind.is_broadcast() && !include_broadcasts && !sender_in {
                continue;
            }
            let seen = msg
                .receivers
                .iter()
                .zip(decrypted)
                .find(|(r, _)| matches!(r, PartyId::Bob(k) if set.contains(k)))
                .map(|(_, &v)| v)
                .or(if sender_in { decrypted.first().copied() } else { None });
            let Some(value) = seen else { continue };
            match (msg.kind, msg.sender) {
                (MessageKind::FinalResult, _) => result = Some(value),
                (MessageKind::ShareValue, PartyId::Bob(j)) => {
                    known_p.entry(j).or_insert(value);
                }
                _ => {}
            }
        }
        Ok(CoalitionView { field: chain.field(), m: chain.len(), members: set, known_p, result })
    }

    /// Number of values the coalition would need but does not have.
    pub fn unknowns(&self) -> usize {
        let missing_p = (1..=self.m).filter(|j| !self.known_p.contains_key(j)).count();
        missing_p + usize::from(self.result.is_none())
    }
}

/// Every secret consistent with the view, by enumerating all assignments of
/// the unknown values. Refuses when `d^unknowns` exceeds `limit`.
pub fn feasible_secrets_enumerated(view: &CoalitionView, limit: u128) -> Result<BTreeSet<Fe>> {
    let d = view.field.order();
    let k = view.unknowns();
    let size = (d as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    if size > limit {
        return Err(Error::SearchTooLarge { size, limit });
    }
    let mut out = BTreeSet::new();
    let mut digits = alloc::vec![0u64; k];
    loop {
        let mut next = digits.iter().map(|&v| view.field.elem(v));
        let r = match view.result {
            Some(r) => r,
            None => next.next().unwrap_or(view.field.zero()),
        };
        let mut s = r;
        for j in 1..=view.m {
            let p = match view.known_p.get(&j) {
                Some(&p) => p,
                None => next.next().unwrap_or(view.field.zero()),
            };
            s = s - p;
        }
        out.insert(s);
        // odometer
        let mut i = 0;
        while i < k {
            digits[i] += 1;
            if digits[i] < d {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
        if i == k {
            break;
        }
    }
    Ok(out)
}

/// Closed form: any unknown value is a uniform shift of `S`, so the whole
/// field is feasible; with nothing unknown the secret is determined.
pub fn feasible_secrets_analytic(view: &CoalitionView) -> BTreeSet<Fe> {
    if view.unknowns() > 0 {
        return view.field.elements().collect();
    }
    let r = view.result.unwrap_or(view.field.zero());
    let s = view.known_p.values().fold(r, |acc, &p| acc - p);
    core::iter::once(s).collect()
}

/// Feasible secret set for a coalition: enumeration when small enough,
/// the closed form otherwise.
pub fn conspiracy_reconstruction_attempt(view: &CoalitionView) -> BTreeSet<Fe> {
    feasible_secrets_enumerated(view, ORACLE_LIMIT).unwrap_or_else(|_| feasible_secrets_analytic(view))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;

    fn view(d: u64, m: usize, known: &[(usize, u64)], result: Option<u64>) -> CoalitionView {
        let field = Field::new(d).unwrap();
        CoalitionView {
            field,
            m,
            members: known.iter().map(|k| k.0).collect(),
            known_p: known.iter().map(|&(j, v)| (j, field.elem(v))).collect(),
            result: result.map(|r| field.elem(r)),
        }
    }

    #[test]
    fn missing_one_share_and_result_leaves_everything_open() {
        let v = view(3, 3, &[(2, 1), (3, 2)], None);
        let all: BTreeSet<Fe> = v.field.elements().collect();
        assert_eq!(feasible_secrets_enumerated(&v, 1 << 10).unwrap(), all);
        assert_eq!(feasible_secrets_analytic(&v), all);
    }

    #[test]
    fn missing_only_result_leaves_everything_open() {
        let v = view(3, 2, &[(1, 1), (2, 2)], None);
        assert_eq!(feasible_secrets_enumerated(&v, 1 << 10).unwrap().len(), 3);
    }

    #[test]
    fn full_information_is_a_singleton() {
        // R = 2, p = (1, 2) over Z_5: S = 2 - 3 = 4
        let v = view(5, 2, &[(1, 1), (2, 2)], Some(2));
        let f = v.field;
        let expect: BTreeSet<Fe> = [f.elem(4)].into_iter().collect();
        assert_eq!(feasible_secrets_enumerated(&v, 1 << 10).unwrap(), expect);
        assert_eq!(feasible_secrets_analytic(&v), expect);
    }

    #[test]
    fn enumeration_refuses_large_searches() {
        let v = view(7, 20, &[], None);
        assert!(matches!(feasible_secrets_enumerated(&v, 1 << 10), Err(Error::SearchTooLarge { .. })));
        assert_eq!(conspiracy_reconstruction_attempt(&v).len(), 7);
    }

    #[test]
    fn spec_validation() {
        let f = Field::new(5).unwrap();
        assert!(AttackSpec::forged_unitary(1, f.zero(), f.zero(), CheaterInverse::UndoApplied).is_err());
        assert!(AttackSpec::intercept_resend(0, BasisGuess::Uniform).validate(4).is_err());
        assert!(AttackSpec::intercept_resend(4, BasisGuess::Uniform).validate(4).is_err());
        assert!(AttackSpec::intercept_resend(3, BasisGuess::Uniform).validate(4).is_ok());
        assert!(AttackSpec::conspiracy(alloc::vec![1, 2, 3, 4]).validate(4).is_err());
        assert!(AttackSpec::conspiracy(alloc::vec![1, 1]).validate(4).is_err());
        assert!(AttackSpec::conspiracy(alloc::vec![1, 2, 3]).validate(4).is_ok());
        assert!(AttackSpec::wrong_broadcast(alloc::vec![(1, FakeValue::Offset(f.zero()))]).is_err());
        assert!(AttackSpec::None.validate(1).is_ok());
    }
}
