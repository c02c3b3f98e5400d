//! The acceptance suite: one function per criterion, each returning a
//! pass/fail line. Used by `vqss verify` and by the `acceptance` test target.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vqss_core::protocol::{Chain, Engine, Honest, ProtocolConfig};
use vqss_core::qudit::{Basis, MubLabel, QuditState};
use vqss_core::vss::{
    coefficient_count_condition, deal, degree_condition, threshold_secrecy_oracle, Knowledge, ThresholdParams,
    ORACLE_LIMIT,
};
use vqss_core::{Fe, Field};

use crate::analytic::{analytic_detection_rate, enumerate_intercept_detection, AttackKind};
use crate::report::Outcome;
use crate::runner::{run_scenario, run_scenario_serial, run_scenario_with};
use crate::scenario::{AttackConfig, Checks, Scenario, Secret};
use crate::transcript::to_jsonl;

/// Overlap and Gram-matrix tolerance.
pub const MUB_TOLERANCE: f64 = 1e-10;
/// Amplitude-wise tolerance for the index-shift identities.
pub const SHIFT_TOLERANCE: f64 = 1e-12;
/// Fidelity tolerance for the non-destructive check.
pub const FIDELITY_TOLERANCE: f64 = 1e-12;
pub const MONTE_CARLO_TRIALS: u64 = 10_000;
pub const LOCALIZATION_TRIALS: u64 = 500;
pub const BROADCAST_TRIALS: u64 = 1_000;
pub const HONEST_SEEDS: u64 = 50;
pub const CHECK_INSTANCES: u64 = 1_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{mark}] criterion {:>2} {}: {}", self.id, self.name, self.detail)
    }
}

fn result(id: u8, name: &'static str, outcome: Result<String, String>) -> CriterionResult {
    match outcome {
        Ok(detail) => CriterionResult { id, name, passed: true, detail },
        Err(detail) => CriterionResult { id, name, passed: false, detail },
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: fmt::Display>(e: E) -> String {
    e.to_string()
}

pub type Criterion = fn() -> CriterionResult;

pub const ALL: [Criterion; 10] = [
    mub_unbiasedness,
    index_shift_identities,
    honest_reconstruction,
    check_non_destructive,
    eve_success_bound,
    intercept_detection_rate,
    fraud_localization,
    wrong_broadcast_detection,
    threshold_secrecy,
    determinism,
];

pub fn run_all() -> Vec<CriterionResult> {
    ALL.iter().map(|c| c()).collect()
}

fn all_bases(field: Field) -> Vec<Basis> {
    field.elements().map(Basis::Phase).chain(std::iter::once(Basis::Computational)).collect()
}

fn basis_vectors(field: Field, basis: Basis) -> Result<Vec<QuditState>, String> {
    field.elements().map(|l| QuditState::mub(MubLabel { basis, index: l }).map_err(err)).collect()
}

/// Cross-basis overlaps are `1/sqrt(d)` and each basis is orthonormal.
pub fn mub_unbiasedness() -> CriterionResult {
    let run = || -> Result<String, String> {
        let mut worst = 0.0f64;
        for d in [3, 5, 7] {
            let field = Field::new(d).map_err(err)?;
            let sets = all_bases(field)
                .into_iter()
                .map(|b| basis_vectors(field, b))
                .collect::<Result<Vec<_>, _>>()?;
            let unbiased = 1.0 / (d as f64).sqrt();
            for (a, va) in sets.iter().enumerate() {
                for (b, vb) in sets.iter().enumerate() {
                    for (i, x) in va.iter().enumerate() {
                        for (k, y) in vb.iter().enumerate() {
                            let dev = if a == b {
                                let want = if i == k { 1.0 } else { 0.0 };
                                let ip = x.inner(y).map_err(err)?;
                                (ip.re - want).abs().max(ip.im.abs())
                            } else {
                                (x.overlap(y).map_err(err)? - unbiased).abs()
                            };
                            worst = worst.max(dev);
                        }
                    }
                }
            }
        }
        ensure(worst <= MUB_TOLERANCE, || format!("max deviation {worst:.3e} > {MUB_TOLERANCE:e}"))?;
        Ok(format!("d in {{3,5,7}}, d+1 bases, max deviation {worst:.3e} <= {MUB_TOLERANCE:e}"))
    };
    result(1, "mub-unbiasedness", run())
}

/// `X^x` shifts the index by `x`, `Y^y` shifts the basis by `y`.
pub fn index_shift_identities() -> CriterionResult {
    let run = || -> Result<String, String> {
        let mut worst = 0.0f64;
        let mut cases = 0u64;
        for d in [3, 5, 7] {
            let field = Field::new(d).map_err(err)?;
            for j in field.elements() {
                for l in field.elements() {
                    let state = QuditState::mub(MubLabel::phase(j, l)).map_err(err)?;
                    for s in field.elements() {
                        let xs = state.apply_x(s).map_err(err)?;
                        let want = QuditState::mub(MubLabel::phase(j, l + s)).map_err(err)?;
                        worst = worst.max(xs.max_deviation(&want).map_err(err)?);
                        let ys = state.apply_y(s).map_err(err)?;
                        let want = QuditState::mub(MubLabel::phase(j + s, l)).map_err(err)?;
                        worst = worst.max(ys.max_deviation(&want).map_err(err)?);
                        cases += 2;
                    }
                }
            }
        }
        ensure(worst <= SHIFT_TOLERANCE, || format!("max deviation {worst:.3e} > {SHIFT_TOLERANCE:e}"))?;
        Ok(format!("{cases} shifts, max amplitude deviation {worst:.3e} <= {SHIFT_TOLERANCE:e}"))
    };
    result(2, "index-shift-identities", run())
}

/// Every secret is reconstructed in honest runs. Grid points that need more
/// distinct nonzero ids than `Z_d` has are reported and must be rejected by
/// scenario validation.
pub fn honest_reconstruction() -> CriterionResult {
    let run = || -> Result<String, String> {
        let mut runs = 0u64;
        let mut skipped = Vec::new();
        for d in [3u64, 5] {
            for m in [1usize, 2, 4] {
                let n = m.max(d as usize - 1);
                let base = Scenario { d, n, m, trials: 1, ..Scenario::default() };
                if m as u64 > d - 1 {
                    let e = base.validate().err().ok_or_else(|| format!("d={d} m={m} was not rejected"))?;
                    ensure(e.to_string().contains("nonzero elements of Z_d"), || {
                        format!("d={d} m={m} rejected for the wrong reason: {e}")
                    })?;
                    skipped.push(format!("d={d},m={m}"));
                    continue;
                }
                for secret in 0..d {
                    for seed in 0..HONEST_SEEDS {
                        let s = Scenario { secret: Secret::Value(secret), seed, ..base.clone() };
                        let report = run_scenario_serial(&s).map_err(err)?;
                        for t in &report.trials {
                            ensure(t.outcome == Outcome::Reconstructed { value: secret, secret }, || {
                                format!("d={d} m={m} S={secret} seed={seed}: {:?}", t.outcome)
                            })?;
                        }
                        runs += report.trials.len() as u64;
                    }
                }
            }
        }
        Ok(format!(
            "{runs}/{runs} runs reconstructed S; infeasible (more participants than nonzero ids in Z_d), rejected by validation: {}",
            skipped.join(" ")
        ))
    };
    result(3, "honest-reconstruction", run())
}

/// A clean check leaves the qudit unchanged.
pub fn check_non_destructive() -> CriterionResult {
    let run = || -> Result<String, String> {
        let mut rng = ChaCha8Rng::seed_from_u64(404);
        let mut worst = 0.0f64;
        for _ in 0..CHECK_INSTANCES {
            let d = [3u64, 5, 7][rng.gen_range(0..3)];
            let field = Field::new(d).map_err(err)?;
            let m = rng.gen_range(1..d as usize);
            let u = rng.gen_range(1..=m);
            let ids: Vec<Fe> = (1..d).map(|i| field.elem(i)).collect();
            let params = ThresholdParams::new(2, 3).map_err(err)?;
            let (material, shares) = deal(field, params, &ids, &mut rng).map_err(err)?;
            let chain = Chain::new(field, &shares[..m]).map_err(err)?;
            let secret = field.random(&mut rng);
            let config = ProtocolConfig::default();
            let mut engine = Engine::new(&material, chain, secret, config, Honest, &mut rng).map_err(err)?;
            for _ in 0..u {
                engine.forward().map_err(err)?;
                engine.apply().map_err(err)?;
            }
            let before = engine.qudit_state().cloned().ok_or("no qudit")?;
            let verdict = engine.check(u).map_err(err)?;
            ensure(verdict.clean, || format!("d={d} m={m} u={u}: check failed"))?;
            let after = engine.qudit_state().ok_or("no qudit")?;
            worst = worst.max((1.0 - after.fidelity(&before).map_err(err)?).abs());
        }
        ensure(worst <= FIDELITY_TOLERANCE, || format!("fidelity deviation {worst:.3e}"))?;
        Ok(format!("{CHECK_INSTANCES} instances clean, max |1 - fidelity| = {worst:.3e}"))
    };
    result(4, "check-non-destructive", run())
}

/// Intercept at the middle gap with a check right after it.
pub fn intercept_scenario(d: u64, seed: u64) -> Scenario {
    let m = if d == 3 { 2 } else { 4 };
    let gap = m / 2;
    Scenario {
        d,
        n: m,
        m,
        checks: Checks::Fixed(vec![gap + 1]),
        attack: AttackConfig::Intercept { gap, basis: None },
        trials: MONTE_CARLO_TRIALS,
        seed,
        ..Scenario::default()
    }
}

/// Eve's basis guess is right with frequency `1/d`; in exactly those trials
/// her recorded value is the true prefix sum. Her literal value-match
/// frequency also counts lucky outcomes in a wrong basis and is checked
/// against `1/d + (1 - 1/d)/d`.
pub fn eve_success_bound() -> CriterionResult {
    let run = || -> Result<String, String> {
        let mut parts = Vec::new();
        for d in [3u64, 5, 7] {
            let report = run_scenario(&intercept_scenario(d, 500 + d)).map_err(err)?;
            let agg = &report.aggregates;
            let basis = 1.0 / d as f64;
            let value = (2 * d - 1) as f64 / (d * d) as f64;
            let br = agg.eve_basis_match.rate.unwrap_or(f64::NAN);
            let vr = agg.eve_value_match.rate.unwrap_or(f64::NAN);
            ensure(agg.eve_basis_match.total == MONTE_CARLO_TRIALS, || format!("d={d}: missing interceptions"))?;
            let exact = report
                .trials
                .iter()
                .flat_map(|t| &t.interceptions)
                .filter(|i| i.basis_matched())
                .all(|i| i.value_matched());
            ensure(exact, || format!("d={d}: a right-basis guess recorded a wrong value"))?;
            ensure(agg.eve_basis_match.within_3sigma_of(basis), || {
                format!("d={d}: basis-match {br:.4} outside 3 sigma of {basis:.4}")
            })?;
            ensure(agg.eve_value_match.within_3sigma_of(value), || {
                format!("d={d}: value-match {vr:.4} outside 3 sigma of {value:.4}")
            })?;
            parts.push(format!("d={d} basis {br:.4} vs {basis:.4}, value {vr:.4} vs {value:.4}"));
        }
        Ok(format!("{MONTE_CARLO_TRIALS} trials each; {}", parts.join("; ")))
    };
    result(5, "eve-success-bound", run())
}

pub fn intercept_detection_rate() -> CriterionResult {
    let run = || -> Result<String, String> {
        let mut parts = Vec::new();
        for d in [3u64, 5, 7] {
            let report = run_scenario(&intercept_scenario(d, 600 + d)).map_err(err)?;
            let want = analytic_detection_rate(d, AttackKind::InterceptResend).map_err(err)?;
            let det = report.aggregates.detection;
            let got = det.rate.unwrap_or(f64::NAN);
            ensure(det.within_3sigma_of(want), || format!("d={d}: detection {got:.4} outside 3 sigma of {want:.4}"))?;
            parts.push(format!("d={d} {got:.4} +/- {:.4} vs {want:.4}", det.ci3.unwrap_or(0.0)));
        }
        let enumerated = enumerate_intercept_detection(3).map_err(err)?;
        ensure((enumerated - 4.0 / 9.0).abs() < SHIFT_TOLERANCE, || {
            format!("enumeration at d=3 gives {enumerated}, expected 4/9")
        })?;
        Ok(format!("{}; enumeration at d=3 = {enumerated:.12} (4/9)", parts.join("; ")))
    };
    result(6, "intercept-detection-rate", run())
}

pub fn fraud_localization() -> CriterionResult {
    use vqss_core::adversary::CheaterInverse;
    let run = || -> Result<String, String> {
        let mut declared = Vec::new();
        for c in 1..=4usize {
            let base = Scenario {
                d: 5,
                n: 4,
                m: 4,
                checks: Checks::Fixed(vec![4]),
                trials: LOCALIZATION_TRIALS,
                seed: 700 + c as u64,
                attack: AttackConfig::Forge { party: c, dp: 2, dq: 0, inverse: CheaterInverse::UndoApplied },
                ..Scenario::default()
            };
            let report = run_scenario(&base).map_err(err)?;
            let hits = report.aggregates.localized.get(&c).copied().unwrap_or(0);
            ensure(hits == LOCALIZATION_TRIALS, || format!("c={c}: identified in {hits}/{LOCALIZATION_TRIALS}"))?;
            let other = Scenario {
                attack: AttackConfig::Forge { party: c, dp: 2, dq: 0, inverse: CheaterInverse::InvertDeclared },
                ..base
            };
            let report = run_scenario(&other).map_err(err)?;
            let hits = report.aggregates.localized.get(&c).copied().unwrap_or(0);
            declared.push(format!("c={c} {hits}/{LOCALIZATION_TRIALS}"));
        }
        Ok(format!(
            "cooperative inverse: {LOCALIZATION_TRIALS}/{LOCALIZATION_TRIALS} at every c in 1..=4 (m=4, d=5); \
             honest-exponent inverse, reported only: {}",
            declared.join(", ")
        ))
    };
    result(7, "fraud-localization", run())
}

pub fn wrong_broadcast_detection() -> CriterionResult {
    use crate::scenario::Fake;
    let run = || -> Result<String, String> {
        let mut parts = Vec::new();
        for coalition in [vec![3], vec![1, 4], vec![1, 2, 3]] {
            let fakes = coalition.iter().map(|&k| (k, Fake::Offset(k as u64))).collect();
            let s = Scenario {
                d: 5,
                n: 4,
                m: 4,
                attack: AttackConfig::WrongBroadcast(fakes),
                trials: BROADCAST_TRIALS,
                seed: 800 + coalition.len() as u64,
                ..Scenario::default()
            };
            let report = run_scenario(&s).map_err(err)?;
            let exact = report.trials.iter().all(|t| t.flagged() == coalition);
            let det = report.aggregates.detection;
            ensure(det.count == BROADCAST_TRIALS && exact, || {
                format!("coalition {coalition:?}: detected {}/{BROADCAST_TRIALS}, exact flags: {exact}", det.count)
            })?;
            parts.push(format!("size {} {}/{}", coalition.len(), det.count, det.total));
        }
        Ok(format!("detection 1.0 with every liar flagged: {}", parts.join(", ")))
    };
    result(8, "wrong-broadcast-detection", run())
}

pub fn threshold_secrecy() -> CriterionResult {
    let run = || -> Result<String, String> {
        let field = Field::new(3).map_err(err)?;
        let params = ThresholdParams::new(2, 3).map_err(err)?;
        let ids = [field.elem(1), field.elem(2)];
        let mut rng = ChaCha8Rng::seed_from_u64(900);
        let mut smallest = usize::MAX;
        let mut probes = 0;
        for _ in 0..5 {
            let (_, shares) = deal(field, params, &ids, &mut rng).map_err(err)?;
            let known = [Knowledge::Share(shares[0].clone())];
            // keys whose two endpoints both differ from the holder's id
            for a in [0u64, 2] {
                for b in [0u64, 2] {
                    let target = (field.elem(a), field.elem(b));
                    let report = threshold_secrecy_oracle(field, params, &known, target, ORACLE_LIMIT).map_err(err)?;
                    smallest = smallest.min(report.feasible.len());
                    probes += 1;
                }
            }
        }
        ensure(smallest >= 2, || format!("an unheld key had only {smallest} feasible value(s)"))?;
        let mut mismatches = Vec::new();
        for t in 2..=12 {
            for h in 2..=12 {
                if degree_condition(t, h) != coefficient_count_condition(t, h) {
                    mismatches.push((t, h));
                }
            }
        }
        ensure(mismatches.is_empty(), || format!("inequalities disagree at {mismatches:?}"))?;
        Ok(format!(
            "{probes} unheld keys with one share known: at least {smallest} feasible values each; \
             inequality equivalence holds on [2,12]^2"
        ))
    };
    result(9, "threshold-secrecy", run())
}

pub fn determinism() -> CriterionResult {
    let run = || -> Result<String, String> {
        let scenarios = [
            Scenario { trials: 300, seed: 42, attack: AttackConfig::Intercept { gap: 2, basis: None }, ..Scenario::default() },
            Scenario {
                trials: 300,
                seed: 43,
                checks: Checks::Random(2),
                attack: "forge:2:dp=1:dq=3:inverse=undo".parse().map_err(err)?,
                ..Scenario::default()
            },
        ];
        for s in &scenarios {
            let a = run_scenario_with(s, true, true).map_err(err)?;
            let b = run_scenario_with(s, true, true).map_err(err)?;
            ensure(to_jsonl(&a.transcript) == to_jsonl(&b.transcript), || format!("{}: transcripts differ", s.attack))?;
            let serial = run_scenario_with(s, false, false).map_err(err)?;
            ensure(a.report.to_json() == serial.report.to_json(), || {
                format!("{}: parallel and serial reports differ", s.attack)
            })?;
        }
        Ok(format!("{} scenarios: byte-identical transcripts and parallel == serial reports", scenarios.len()))
    };
    result(10, "determinism", run())
}
