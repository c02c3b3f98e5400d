//! Classical share distribution from an asymmetric bivariate polynomial.
//!
//! Participant `x_i` receives `s1_i(y) = F(x_i, y)` and `s2_i(x) = F(x, x_i)`.
//! Any two participants then share the ordered keys `k_ij = F(x_i, x_j)` and
//! `k_ji = F(x_j, x_i)`, each computable from either endpoint's shares.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::field::{BivariatePoly, Fe, Field, UnivariatePoly};

/// `h > t(t - 1)`.
pub fn degree_condition(t: usize, h: usize) -> bool {
    h > t * t.saturating_sub(1)
}

/// `th > (t + h)(t - 1)`: more unknown coefficients than independent
/// equations available to `t - 1` pooled shareholders.
pub fn coefficient_count_condition(t: usize, h: usize) -> bool {
    t * h > (t + h) * t.saturating_sub(1)
}

/// Degree bounds of the dealer polynomial: `t - 1` in `x`, `h - 1` in `y`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ThresholdParams {
    t: usize,
    h: usize,
}

impl ThresholdParams {
    pub fn new(t: usize, h: usize) -> Result<Self> {
        if t == 0 || h == 0 || !degree_condition(t, h) {
            return Err(Error::ThresholdViolated { t, h });
        }
        Ok(ThresholdParams { t, h })
    }

    pub fn t(self) -> usize {
        self.t
    }

    pub fn h(self) -> usize {
        self.h
    }
}

/// Draws `F` uniformly among tables satisfying the asymmetry constraint.
///
/// Each constrained pair `(a_ij, a_ji)` is drawn uniformly among ordered
/// pairs of distinct values, every other entry uniformly from `Z_d`. This
/// is the distribution rejection sampling would produce, without the
/// rejection loop.
pub fn sample_asymmetric<R: Rng + ?Sized>(field: Field, params: ThresholdParams, rng: &mut R) -> BivariatePoly {
    let (t, h) = (params.t, params.h);
    let k = t.min(h);
    let mut coeffs: Vec<Fe> = (0..t * h).map(|_| field.random(rng)).collect();
    for i in 0..k {
        for j in 0..i {
            // a[i][j] uniform over Z_d \ {a[j][i]}
            let other = coeffs[j * h + i].value();
            let mut v = rng.gen_range(0..field.order() - 1);
            if v >= other {
                v += 1;
            }
            coeffs[i * h + j] = field.elem(v);
        }
    }
    BivariatePoly::new(field, t, h, coeffs).expect("sampled table is asymmetric by construction")
}

/// What the dealer keeps: the polynomial and the public identities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DealerKeyMaterial {
    poly: BivariatePoly,
    params: ThresholdParams,
    ids: Vec<Fe>,
}

impl DealerKeyMaterial {
    pub fn new(poly: BivariatePoly, ids: Vec<Fe>) -> Result<Self> {
        let params = ThresholdParams::new(poly.t(), poly.h())?;
        validate_ids(poly.field(), &ids)?;
        Ok(DealerKeyMaterial { poly, params, ids })
    }

    pub fn poly(&self) -> &BivariatePoly {
        &self.poly
    }

    pub fn params(&self) -> ThresholdParams {
        self.params
    }

    pub fn field(&self) -> Field {
        self.poly.field()
    }

    pub fn ids(&self) -> &[Fe] {
        &self.ids
    }

    /// The share pair of participant `id`.
    pub fn share_for(&self, id: Fe) -> Result<ShareSet> {
        Ok(ShareSet { owner: id, s1: self.poly.restrict_x(id)?, s2: self.poly.restrict_y(id)? })
    }

    /// Both directed keys between `a` and `b`, straight from `F`.
    pub fn pairwise_key(&self, a: Fe, b: Fe) -> Result<PairwiseKey> {
        if a == b {
            return Err(Error::SelfKey(a.value()));
        }
        Ok(PairwiseKey {
            endpoints: (a, b),
            forward: self.poly.eval(a, b)?,
            backward: self.poly.eval(b, a)?,
        })
    }
}

fn validate_ids(field: Field, ids: &[Fe]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for &id in ids {
        field.check(id)?;
        if id.is_zero() {
            return Err(Error::ZeroId);
        }
        if !seen.insert(id) {
            return Err(Error::DuplicateId(id.value()));
        }
    }
    Ok(())
}

/// `k_forward = F(a, b)` and `k_backward = F(b, a)` for endpoints `(a, b)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PairwiseKey {
    pub endpoints: (Fe, Fe),
    pub forward: Fe,
    pub backward: Fe,
}

/// A participant's share pair.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ShareSet {
    pub owner: Fe,
    /// `F(owner, y)`, `h` coefficients.
    pub s1: UnivariatePoly,
    /// `F(x, owner)`, `t` coefficients.
    pub s2: UnivariatePoly,
}

impl ShareSet {
    /// `(F(owner, other), F(other, owner))`, computed from this share alone.
    pub fn pairwise_key(&self, other: Fe) -> Result<(Fe, Fe)> {
        if other == self.owner {
            return Err(Error::SelfKey(other.value()));
        }
        Ok((self.s1.eval(other)?, self.s2.eval(other)?))
    }
}

/// Samples `F` and cuts one share pair per participant id.
pub fn deal<R: Rng + ?Sized>(
    field: Field,
    params: ThresholdParams,
    ids: &[Fe],
    rng: &mut R,
) -> Result<(DealerKeyMaterial, Vec<ShareSet>)> {
    validate_ids(field, ids)?;
    let poly = sample_asymmetric(field, params, rng);
    let material = DealerKeyMaterial { poly, params, ids: ids.to_vec() };
    let shares = ids.iter().map(|&id| material.share_for(id)).collect::<Result<Vec<_>>>()?;
    Ok((material, shares))
}

/// Additive one-time pad over `Z_d`.
pub fn otp_encrypt(value: Fe, key: Fe) -> Result<Fe> {
    value.try_add(key)
}

pub fn otp_decrypt(cipher: Fe, key: Fe) -> Result<Fe> {
    cipher.try_sub(key)
}

/// A piece of information held by the party probing secrecy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Knowledge {
    Share(ShareSet),
    Polynomial(BivariatePoly),
}

/// Outcome of [`threshold_secrecy_oracle`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SecrecyReport {
    /// Asymmetric tables consistent with everything known.
    pub consistent: u64,
    /// Values those tables take at the target point.
    pub feasible: BTreeSet<Fe>,
}

/// Default budget for [`threshold_secrecy_oracle`].
pub const ORACLE_LIMIT: u128 = 1 << 22;

/// Enumerates every asymmetric `t x h` table over `Z_d`, keeps those that
/// reproduce all `known` information, and collects `F(target)`.
///
/// Only feasible for tiny parameters; refuses when `d^(th)` exceeds `limit`.
pub fn threshold_secrecy_oracle(
    field: Field,
    params: ThresholdParams,
    known: &[Knowledge],
    target: (Fe, Fe),
    limit: u128,
) -> Result<SecrecyReport> {
    let (t, h) = (params.t, params.h);
    let d = field.order();
    let cells = (t * h) as u32;
    let size = (d as u128).checked_pow(cells).unwrap_or(u128::MAX);
    if size > limit {
        return Err(Error::SearchTooLarge { size, limit });
    }
    field.check(target.0)?;
    field.check(target.1)?;

    let mut digits = alloc::vec![0u64; t * h];
    let mut consistent = 0u64;
    let mut feasible = BTreeSet::new();
    for _ in 0..size {
        let table = BivariatePoly::new_unchecked(field, t, h, digits.iter().map(|&v| field.elem(v)).collect())?;
        if table.is_asymmetric() && matches_all(&table, known)? {
            consistent += 1;
            feasible.insert(table.eval(target.0, target.1)?);
        }
        // odometer increment
        for digit in digits.iter_mut() {
            *digit += 1;
            if *digit < d {
                break;
            }
            *digit = 0;
        }
    }
    Ok(SecrecyReport { consistent, feasible })
}

fn matches_all(table: &BivariatePoly, known: &[Knowledge]) -> Result<bool> {
    for k in known {
        let ok = match k {
            Knowledge::Polynomial(f) => f == table,
            Knowledge::Share(share) => {
                table.restrict_x(share.owner)? == share.s1 && table.restrict_y(share.owner)? == share.s2
            }
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}
