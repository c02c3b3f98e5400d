use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::RngCore;

use super::{Adversary, Chain, Engine, ProtocolConfig, RunOutcome, Termination};
use crate::error::{Error, Result};
use crate::field::Fe;
use crate::vss::{DealerKeyMaterial, ShareSet};

/// Strikes above which a participant is removed.
pub const STRIKE_LIMIT: u32 = 2;

/// Repeated sharing attempts over a shrinking set of participants.
///
/// A participant the localization walk identifies (or who refuses to take
/// part in it) is removed at once. A participant whose broadcast the dealer
/// rejects gets a strike and is removed after more than [`STRIKE_LIMIT`].
#[derive(Clone, Debug)]
pub struct Session {
    material: DealerKeyMaterial,
    active: Vec<ShareSet>,
    strikes: BTreeMap<Fe, u32>,
    removed: Vec<Fe>,
    attempts: u32,
}

impl Session {
    /// The chain for every attempt is the still-active subset of `shares`, in order.
    pub fn new(material: DealerKeyMaterial, shares: Vec<ShareSet>) -> Result<Self> {
        if shares.is_empty() {
            return Err(Error::InvalidChain { m: 0, n: material.ids().len() });
        }
        for (k, s) in shares.iter().enumerate() {
            if !material.ids().contains(&s.owner) {
                return Err(Error::Unsupported("share owner was not dealt by this material"));
            }
            if shares[..k].iter().any(|o| o.owner == s.owner) {
                return Err(Error::DuplicateId(s.owner.value()));
            }
        }
        Ok(Session { material, active: shares, strikes: BTreeMap::new(), removed: Vec::new(), attempts: 0 })
    }

    pub fn active_ids(&self) -> Vec<Fe> {
        self.active.iter().map(|s| s.owner).collect()
    }

    pub fn strikes(&self, id: Fe) -> u32 {
        self.strikes.get(&id).copied().unwrap_or(0)
    }

    pub fn removed(&self) -> &[Fe] {
        &self.removed
    }

    pub fn attempts(&self) -> u32 {
        self.attempts
    }

    /// One full run over the active chain, then bookkeeping on its verdict.
    pub fn attempt<A: Adversary, R: RngCore>(
        &mut self,
        secret: Fe,
        config: &ProtocolConfig,
        adversary: A,
        rng: R,
    ) -> Result<RunOutcome> {
        if self.active.is_empty() {
            return Err(Error::InvalidChain { m: 0, n: self.material.ids().len() });
        }
        let chain = Chain::new(self.material.field(), &self.active)?;
        let outcome = Engine::new(&self.material, chain, secret, config.clone(), adversary, rng)?.run()?;
        self.attempts += 1;

        let ids = self.active_ids();
        let mut expel = Vec::new();
        match &outcome.termination {
            Termination::FraudLocalized { cheater } => expel.push(ids[cheater - 1]),
            Termination::LocalizationRefused { party } => expel.push(ids[party - 1]),
            Termination::BroadcastRejected { flagged } => {
                for &pos in flagged {
                    let id = ids[pos - 1];
                    let count = self.strikes.entry(id).or_insert(0);
                    *count += 1;
                    if *count > STRIKE_LIMIT {
                        expel.push(id);
                    }
                }
            }
            Termination::Reconstructed { .. } | Termination::Unresolved { .. } => {}
        }
        self.active.retain(|s| !expel.contains(&s.owner));
        self.removed.extend(expel);
        Ok(outcome)
    }
}
