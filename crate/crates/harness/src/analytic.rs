//! Closed-form detection rates and brute-force cross-checks.
//!
//! A run counts as detected when it does not end in a verified
//! reconstruction. The dealer verifies `R` and every `p_j` at the end, so an
//! attack that slips past the checks is still caught there; the rates below
//! therefore hold for any check placement.

use vqss_core::qudit::{MubLabel, QuditState};
use vqss_core::{Error, Field};

use crate::error::Result;
use crate::scenario::AttackConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AttackKind {
    Honest,
    InterceptResend,
    WrongBroadcast,
    /// Forgery with `delta_q = 0`: the index shifts, the basis does not.
    ForgeIndexShift,
    /// Forgery with `delta_q != 0`.
    ForgeBasisShift,
    Conspiracy,
}

impl AttackKind {
    pub fn of(attack: &AttackConfig) -> Self {
        match attack {
            AttackConfig::None => AttackKind::Honest,
            AttackConfig::Intercept { .. } => AttackKind::InterceptResend,
            AttackConfig::Forge { dq: 0, .. } => AttackKind::ForgeIndexShift,
            AttackConfig::Forge { .. } => AttackKind::ForgeBasisShift,
            AttackConfig::WrongBroadcast(_) => AttackKind::WrongBroadcast,
            AttackConfig::Conspiracy(_) => AttackKind::Conspiracy,
        }
    }
}

/// Probability that a run under `kind` is stopped by the dealer.
///
/// Eve measures in a wrong basis with probability `(d-1)/d`, after which the
/// next measurement in the true basis is uniform and misses with probability
/// `(d-1)/d`. A basis-shifting forgery is caught by the same mismatch. Index
/// shifts and wrong broadcasts are caught with certainty.
pub fn analytic_detection_rate(d: u64, kind: AttackKind) -> Result<f64> {
    let d = Field::new(d)?.order() as f64;
    let miss = (d - 1.0) / d;
    Ok(match kind {
        AttackKind::Honest => 0.0,
        AttackKind::InterceptResend => miss * miss,
        AttackKind::ForgeBasisShift => miss,
        AttackKind::ForgeIndexShift | AttackKind::WrongBroadcast => 1.0,
        AttackKind::Conspiracy => {
            return Err(Error::Unsupported("a conspiracy that follows the protocol is not detectable").into())
        }
    })
}

fn phi(j: u64, l: u64, field: Field) -> Result<QuditState> {
    Ok(QuditState::mub(MubLabel::phase(field.elem(j), field.elem(l)))?)
}

/// Intercept-resend detection averaged over every true state
/// `|phi_P^(Q)>`, every downstream honest step `U_{a,b}`, every basis Eve
/// can guess and every outcome she can see, using the state vectors
/// directly: `sum 1/d * |<phi_o^(j')|phi_P^(Q)>|^2 * (1 - |<phi_{P+a}^(Q+b)| U_{a,b} |phi_o^(j')>|^2)`.
pub fn enumerate_intercept_detection(d: u64) -> Result<f64> {
    let field = Field::new(d)?;
    let mut total = 0.0;
    let mut cases = 0u64;
    for q in 0..d {
        for p in 0..d {
            let sent = phi(q, p, field)?;
            for b in 0..d {
                for a in 0..d {
                    let expected = phi((q + b) % d, (p + a) % d, field)?;
                    let mut detect = 0.0;
                    for guess in 0..d {
                        for o in 0..d {
                            let seen = phi(guess, o, field)?;
                            let p_outcome = sent.overlap(&seen)?.powi(2);
                            let forwarded = seen.apply_u(field.elem(a), field.elem(b))?;
                            let p_pass = forwarded.overlap(&expected)?.powi(2);
                            detect += p_outcome * (1.0 - p_pass) / d as f64;
                        }
                    }
                    total += detect;
                    cases += 1;
                }
            }
        }
    }
    Ok(total / cases as f64)
}

/// Basis-shifting forgery: `|phi_P^(Q+delta)>` measured in basis `Q`,
/// averaged over all `P, Q` and `delta != 0`.
pub fn enumerate_basis_forgery_detection(d: u64) -> Result<f64> {
    let field = Field::new(d)?;
    let mut total = 0.0;
    let mut cases = 0u64;
    for q in 0..d {
        for p in 0..d {
            let expected = phi(q, p, field)?;
            for delta in 1..d {
                let forged = phi((q + delta) % d, p, field)?;
                total += 1.0 - forged.overlap(&expected)?.powi(2);
                cases += 1;
            }
        }
    }
    Ok(total / cases as f64)
}
