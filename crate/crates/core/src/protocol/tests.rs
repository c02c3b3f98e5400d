use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::qudit::NORM_TOLERANCE;
use crate::vss::{deal, ThresholdParams};

fn setup(d: u64, n: usize, m: usize, seed: u64) -> (DealerKeyMaterial, Chain, ChaCha8Rng) {
    let field = Field::new(d).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ids: Vec<Fe> = (1..=n as u64).map(|i| field.elem(i)).collect();
    let (material, shares) = deal(field, ThresholdParams::new(2, 3).unwrap(), &ids, &mut rng).unwrap();
    let chain = Chain::new(field, &shares[..m]).unwrap();
    (material, chain, rng)
}

fn fixed(positions: Vec<usize>) -> ProtocolConfig {
    ProtocolConfig { checks: CheckSchedule::Fixed(positions), localization_repeats: 1 }
}

struct Forge {
    party: usize,
    dp: u64,
    undo: bool,
}

impl Adversary for Forge {
    fn unitary(&mut self, party: PartyRef, honest: (Fe, Fe)) -> (Fe, Fe) {
        if party.position == self.party {
            (honest.0 + honest.0.field().elem(self.dp), honest.1)
        } else {
            honest
        }
    }

    fn inverse(&mut self, party: PartyRef, honest: (Fe, Fe), applied: (Fe, Fe)) -> Option<(Fe, Fe)> {
        if party.position == self.party && !self.undo {
            Some(honest)
        } else {
            Some(applied)
        }
    }
}

#[test]
fn participant_exponents_match_dealer_view() {
    let (material, chain, _) = setup(7, 5, 4, 1);
    let ids: Vec<Fe> = chain.iter().map(|p| p.id()).collect();
    let f = chain.field();
    let dealer = DealerSecretState::new(&material, &ids, f.elem(3), f.elem(2)).unwrap();
    for bob in chain.iter() {
        assert_eq!(bob.p, dealer.p(bob.position));
        assert_eq!(bob.q, dealer.q(bob.position));
    }
    // cyclic closure
    let last = chain.get(4).unwrap();
    assert_eq!(last.successor, ids[0]);
}

#[test]
fn state_tracks_prefix_sums() {
    let (material, chain, rng) = setup(5, 4, 4, 2);
    let f = chain.field();
    let mut e = Engine::new(&material, chain, f.elem(4), fixed(vec![]), Honest, rng).unwrap();
    for j in 1..=4 {
        e.forward().unwrap();
        e.apply().unwrap();
        let want = QuditState::mub(MubLabel::phase(e.dealer().prefix_q(j), e.dealer().prefix_p(j))).unwrap();
        assert!(e.qudit_state().unwrap().max_deviation(&want).unwrap() < NORM_TOLERANCE);
    }
}

#[test]
fn honest_run_reconstructs() {
    for seed in 0..20 {
        let (material, chain, rng) = setup(5, 4, 4, seed);
        let s = chain.field().elem(seed % 5);
        let out = Engine::new(&material, chain, s, ProtocolConfig::default(), Honest, rng).unwrap().run().unwrap();
        assert_eq!(out.termination, Termination::Reconstructed { value: s });
        assert!(out.checks.iter().all(|c| c.clean));
    }
}

#[test]
fn single_participant_chain() {
    let (material, chain, rng) = setup(3, 2, 1, 5);
    let s = chain.field().elem(2);
    let p = chain.get(1).unwrap();
    assert_eq!(p.p, p.q);
    let out = Engine::new(&material, chain, s, fixed(vec![1]), Honest, rng).unwrap().run().unwrap();
    assert_eq!(out.reconstructed(), Some(s));
}

#[test]
fn check_requires_the_holder() {
    let (material, chain, rng) = setup(5, 4, 3, 3);
    let f = chain.field();
    let mut e = Engine::new(&material, chain, f.elem(1), fixed(vec![]), Honest, rng).unwrap();
    assert!(matches!(e.check(1), Err(Error::NotHolder { expected: 1 })));
    e.forward().unwrap();
    assert!(matches!(e.check(1), Err(Error::NotHolder { expected: 1 })));
    e.apply().unwrap();
    assert!(matches!(e.check(2), Err(Error::NotHolder { expected: 2 })));
    assert!(matches!(e.check(9), Err(Error::PartyOutOfRange { .. })));
    assert!(e.check(1).unwrap().clean);
    assert!(e.final_round().is_err());
    assert!(e.localize(1).is_err());
}

#[test]
fn check_leaves_state_unchanged() {
    let (material, chain, rng) = setup(7, 5, 4, 4);
    let f = chain.field();
    let mut e = Engine::new(&material, chain, f.elem(6), fixed(vec![]), Honest, rng).unwrap();
    e.forward().unwrap();
    e.apply().unwrap();
    e.forward().unwrap();
    e.apply().unwrap();
    let before = e.qudit_state().unwrap().clone();
    assert!(e.check(2).unwrap().clean);
    assert!((e.qudit_state().unwrap().fidelity(&before).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn forged_shift_is_localized() {
    for c in 1..=4 {
        for u in c..=4 {
            let (material, chain, rng) = setup(5, 4, 4, (c * 10 + u) as u64);
            let f = chain.field();
            let adv = Forge { party: c, dp: 2, undo: true };
            let out = Engine::new(&material, chain, f.elem(1), fixed(vec![u]), adv, rng).unwrap().run().unwrap();
            assert_eq!(out.termination, Termination::FraudLocalized { cheater: c }, "c={c} u={u}");
        }
    }
}

#[test]
fn declared_inverse_does_not_localize() {
    let (material, chain, rng) = setup(5, 4, 4, 9);
    let f = chain.field();
    let adv = Forge { party: 2, dp: 1, undo: false };
    let out = Engine::new(&material, chain, f.elem(0), fixed(vec![3]), adv, rng).unwrap().run().unwrap();
    assert_eq!(out.termination, Termination::Unresolved { lo: 0, hi: 3 });
}

#[test]
fn forgery_without_check_is_caught_at_the_end() {
    let (material, chain, rng) = setup(5, 4, 4, 11);
    let f = chain.field();
    let adv = Forge { party: 3, dp: 4, undo: true };
    let out = Engine::new(&material, chain, f.elem(0), fixed(vec![]), adv, rng).unwrap().run().unwrap();
    assert_eq!(out.termination, Termination::BroadcastRejected { flagged: vec![4] });
}

#[test]
fn broadcasts_share_one_round() {
    let (material, chain, rng) = setup(5, 4, 4, 12);
    let f = chain.field();
    let out = Engine::new(&material, chain, f.elem(3), ProtocolConfig::default(), Honest, rng).unwrap().run().unwrap();
    let msgs = out.transcript.messages();
    let rounds: Vec<u32> = msgs.iter().filter(|m| m.kind == MessageKind::ShareValue).map(|m| m.round).collect();
    assert_eq!(rounds.len(), 4);
    assert!(rounds.iter().all(|&r| r == rounds[0]));
    let result_round = msgs.iter().find(|m| m.kind == MessageKind::FinalResult).unwrap().round;
    assert!(result_round < rounds[0]);
    assert!(msgs.windows(2).all(|w| w[0].round <= w[1].round));
    for m in msgs {
        if let Payload::Classical { written, decrypted } = &m.payload {
            assert_eq!(written.len(), m.receivers.len());
            assert_eq!(decrypted.len(), m.receivers.len());
        }
    }
}

#[test]
fn session_removes_repeat_offenders() {
    struct Liar;
    impl Adversary for Liar {
        fn broadcast(&mut self, party: PartyRef, honest: Fe) -> Fe {
            if party.id.value() == 2 {
                honest + honest.field().one()
            } else {
                honest
            }
        }
    }
    let field = Field::new(5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    let ids: Vec<Fe> = (1..=4).map(|i| field.elem(i)).collect();
    let (material, shares) = deal(field, ThresholdParams::new(2, 3).unwrap(), &ids, &mut rng).unwrap();
    let mut session = Session::new(material, shares[..4].to_vec()).unwrap();
    let liar_id = field.elem(2);
    for strike in 1..=3 {
        let out = session.attempt(field.elem(1), &fixed(vec![]), Liar, &mut rng).unwrap();
        assert_eq!(out.termination, Termination::BroadcastRejected { flagged: vec![2] });
        assert_eq!(session.strikes(liar_id), strike);
    }
    assert_eq!(session.removed(), &[liar_id]);
    assert_eq!(session.active_ids().len(), 3);
    let out = session.attempt(field.elem(1), &fixed(vec![]), Liar, &mut rng).unwrap();
    assert_eq!(out.reconstructed(), Some(field.elem(1)));
}

#[test]
fn session_expels_localized_forger() {
    let field = Field::new(5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let ids: Vec<Fe> = (1..=4).map(|i| field.elem(i)).collect();
    let (material, shares) = deal(field, ThresholdParams::new(2, 3).unwrap(), &ids, &mut rng).unwrap();
    let mut session = Session::new(material, shares).unwrap();
    let out = session.attempt(field.elem(2), &fixed(vec![4]), Forge { party: 3, dp: 1, undo: true }, &mut rng).unwrap();
    assert_eq!(out.termination, Termination::FraudLocalized { cheater: 3 });
    assert_eq!(session.removed(), &[field.elem(3)]);
}
