//! Dense state vectors for a single `d`-level system, the mutually unbiased
//! bases of prime dimension, and the diagonal phase operators that move
//! between them.
//!
//! The phase bases are `|phi_l^(j)> = d^(-1/2) sum_k w^(k(l + jk)) |k>` with
//! `w = exp(2 pi i / d)`, for `j, l` in `Z_d`; together with the
//! computational basis they form `d + 1` mutually unbiased bases.
//!
//! `X^x` multiplies amplitude `n` by `w^(xn)` and shifts the vector index
//! `l -> l + x`; `Y^y` multiplies by `w^(y n^2)` and shifts the basis index
//! `j -> j + y`. Both are diagonal, so they are applied in `O(d)` and commute.
//! Phase exponents are reduced modulo `d` in integer arithmetic before any
//! floating point is involved, which keeps the index shifts exact up to
//! rounding in a single `sin`/`cos` evaluation.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::field::Fe;

/// Tolerance on `sum |a_k|^2 = 1` for externally supplied amplitudes.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// One of the `d + 1` measurement bases.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Basis {
    /// Phase basis `B_j`.
    Phase(Fe),
    /// The computational basis `{|0>, ..., |d-1>}`.
    Computational,
}

impl Basis {
    fn check_dim(self, d: usize) -> Result<()> {
        match self {
            Basis::Phase(j) if j.modulus() as usize != d => {
                Err(Error::DimensionMismatch { left: d, right: j.modulus() as usize })
            }
            _ => Ok(()),
        }
    }
}

/// Basis and vector index of a basis state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MubLabel {
    pub basis: Basis,
    pub index: Fe,
}

impl MubLabel {
    pub fn phase(j: Fe, l: Fe) -> Self {
        MubLabel { basis: Basis::Phase(j), index: l }
    }

    pub fn computational(l: Fe) -> Self {
        MubLabel { basis: Basis::Computational, index: l }
    }
}

/// `w^e` for `w = exp(2 pi i / d)`, with `e` already reduced.
fn root_of_unity(d: u64, e: u64) -> Complex64 {
    let theta = 2.0 * PI * (e % d) as f64 / d as f64;
    Complex64::new(libm::cos(theta), libm::sin(theta))
}

/// A unit vector in `C^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuditState {
    amps: Vec<Complex64>,
}

impl QuditState {
    /// Wraps amplitudes after checking the norm.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if amps.is_empty() || (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidPhase("amplitudes are not normalized"));
        }
        Ok(QuditState { amps })
    }

    /// The basis state named by `label`.
    pub fn mub(label: MubLabel) -> Result<Self> {
        let d = label.index.modulus();
        label.basis.check_dim(d as usize)?;
        let amps = match label.basis {
            Basis::Computational => (0..d)
                .map(|k| if k == label.index.value() { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) })
                .collect(),
            Basis::Phase(j) => {
                let scale = 1.0 / libm::sqrt(d as f64);
                let (l, j) = (label.index.value(), j.value());
                (0..d)
                    .map(|k| {
                        // k(l + jk) mod d
                        let e = k * ((l + j * k % d) % d) % d;
                        root_of_unity(d, e) * scale
                    })
                    .collect()
            }
        };
        Ok(QuditState { amps })
    }

    pub fn dimension(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.amps.iter().map(|a| a.norm_sqr()).sum())
    }

    fn check_scalar(&self, x: Fe) -> Result<u64> {
        let d = self.amps.len();
        if x.modulus() as usize != d {
            return Err(Error::DimensionMismatch { left: d, right: x.modulus() as usize });
        }
        Ok(d as u64)
    }

    fn check_state(&self, other: &QuditState) -> Result<()> {
        if self.amps.len() != other.amps.len() {
            return Err(Error::DimensionMismatch { left: self.amps.len(), right: other.amps.len() });
        }
        Ok(())
    }

    fn apply_phase(&self, exponent: impl Fn(u64) -> u64) -> QuditState {
        let d = self.amps.len() as u64;
        let amps = self
            .amps
            .iter()
            .enumerate()
            .map(|(n, a)| a * root_of_unity(d, exponent(n as u64)))
            .collect();
        QuditState { amps }
    }

    /// `X^x`: amplitude `n` picks up `w^(xn)`.
    pub fn apply_x(&self, x: Fe) -> Result<QuditState> {
        let d = self.check_scalar(x)?;
        Ok(self.apply_phase(|n| x.value() * n % d))
    }

    /// `Y^y`: amplitude `n` picks up `w^(y n^2)`.
    pub fn apply_y(&self, y: Fe) -> Result<QuditState> {
        let d = self.check_scalar(y)?;
        Ok(self.apply_phase(|n| y.value() * (n * n % d) % d))
    }

    /// `U_{x,y} = X^x Y^y`, mapping `|phi_l^(j)>` to `|phi_{l+x}^(j+y)>`.
    pub fn apply_u(&self, x: Fe, y: Fe) -> Result<QuditState> {
        let d = self.check_scalar(x)?;
        self.check_scalar(y)?;
        Ok(self.apply_phase(|n| (x.value() * n % d + y.value() * (n * n % d) % d) % d))
    }

    /// `U_{-x,-y}`, the inverse of [`apply_u`](Self::apply_u).
    pub fn apply_u_inverse(&self, x: Fe, y: Fe) -> Result<QuditState> {
        self.apply_u(-x, -y)
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &QuditState) -> Result<Complex64> {
        self.check_state(other)?;
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    /// `|<self|other>|`.
    pub fn overlap(&self, other: &QuditState) -> Result<f64> {
        Ok(self.inner(other)?.norm())
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &QuditState) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Largest entrywise deviation; no global phase is factored out.
    pub fn max_deviation(&self, other: &QuditState) -> Result<f64> {
        self.check_state(other)?;
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }

    /// Born probabilities of the `d` outcomes in `basis`.
    pub fn probabilities(&self, basis: Basis) -> Result<Vec<f64>> {
        let d = self.amps.len();
        basis.check_dim(d)?;
        match basis {
            Basis::Computational => Ok(self.amps.iter().map(|a| a.norm_sqr()).collect()),
            Basis::Phase(j) => {
                let field = j.field();
                field
                    .elements()
                    .map(|l| Ok(QuditState::mub(MubLabel::phase(j, l))?.inner(self)?.norm_sqr()))
                    .collect()
            }
        }
    }

    /// Projective measurement in `basis`. Samples an outcome by inverse CDF
    /// over the Born probabilities and returns it together with the collapsed
    /// basis state.
    pub fn measure<R: Rng + ?Sized>(&self, basis: Basis, rng: &mut R) -> Result<(Fe, QuditState)> {
        let d = self.amps.len();
        let probs = self.probabilities(basis)?;
        let u: f64 = rng.gen();
        let mut cum = 0.0;
        let mut outcome = None;
        for (l, p) in probs.iter().enumerate() {
            cum += p;
            if u < cum {
                outcome = Some(l);
                break;
            }
        }
        // roundoff can leave the total a hair under 1
        let outcome = outcome.unwrap_or_else(|| {
            probs.iter().rposition(|&p| p > 0.0).unwrap_or(d - 1)
        });
        let field = crate::field::Field::new(d as u64)?;
        let l = field.elem(outcome as u64);
        let post = QuditState::mub(MubLabel { basis, index: l })?;
        Ok((l, post))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn phi(d: u64, j: u64, l: u64) -> QuditState {
        let f = Field::new(d).unwrap();
        QuditState::mub(MubLabel::phase(f.elem(j), f.elem(l))).unwrap()
    }

    /// Independent oracle: the basis formula evaluated with a real-valued
    /// exponent, without any modular reduction.
    fn phi_oracle(d: u64, j: u64, l: u64) -> Vec<Complex64> {
        let w = 2.0 * PI / d as f64;
        (0..d)
            .map(|k| {
                let e = (k * (l + j * k)) as f64;
                Complex64::from_polar(1.0 / (d as f64).sqrt(), w * e)
            })
            .collect()
    }

    fn assert_close(a: &QuditState, b: &QuditState, tol: f64) {
        let dev = a.max_deviation(b).unwrap();
        assert!(dev <= tol, "deviation {dev}");
    }

    #[test]
    fn basis_vectors_match_formula() {
        for d in [3u64, 5, 7] {
            for j in 0..d {
                for l in 0..d {
                    let s = phi(d, j, l);
                    for (a, b) in s.amplitudes().iter().zip(phi_oracle(d, j, l)) {
                        assert!((a - b).norm() < 1e-12);
                    }
                }
            }
        }
        let s = phi(3, 0, 0);
        for a in s.amplitudes() {
            assert!((a - Complex64::new(1.0 / 3f64.sqrt(), 0.0)).norm() < 1e-12);
        }
        let w = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
        let s = phi(3, 0, 1);
        let expected = [Complex64::new(1.0, 0.0), w, w * w];
        for (a, b) in s.amplitudes().iter().zip(expected) {
            assert!((a - b / 3f64.sqrt()).norm() < 1e-12);
        }
        let f3 = Field::new(3).unwrap();
        let e2 = QuditState::mub(MubLabel::computational(f3.elem(2))).unwrap();
        assert_eq!(e2.amplitudes()[2], Complex64::new(1.0, 0.0));
        assert_eq!(e2.amplitudes()[0], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn label_dimension_checked() {
        let f3 = Field::new(3).unwrap();
        let f5 = Field::new(5).unwrap();
        assert!(QuditState::mub(MubLabel::phase(f5.elem(1), f3.elem(1))).is_err());
        let s = phi(3, 0, 0);
        assert_eq!(s.apply_x(f5.elem(1)), Err(Error::DimensionMismatch { left: 3, right: 5 }));
        assert!(s.overlap(&phi(5, 0, 0)).is_err());
        assert!(s.probabilities(Basis::Phase(f5.elem(0))).is_err());
    }

    #[test]
    fn phase_shift_examples() {
        let f5 = Field::new(5).unwrap();
        assert_close(&phi(5, 0, 1).apply_x(f5.elem(2)).unwrap(), &phi(5, 0, 3), 1e-12);
        assert_close(&phi(5, 2, 4).apply_x(f5.elem(3)).unwrap(), &phi(5, 2, 2), 1e-12);
        assert_close(&phi(5, 2, 1).apply_y(f5.elem(3)).unwrap(), &phi(5, 0, 1), 1e-12);
        let f3 = Field::new(3).unwrap();
        assert_close(&phi(3, 0, 0).apply_y(f3.elem(1)).unwrap(), &phi(3, 1, 0), 1e-12);
        assert_close(&phi(5, 0, 0).apply_u(f5.elem(2), f5.elem(3)).unwrap(), &phi(5, 3, 2), 1e-12);
        assert_close(&phi(5, 4, 3).apply_u_inverse(f5.elem(1), f5.elem(2)).unwrap(), &phi(5, 2, 2), 1e-12);
        let s = phi(5, 3, 1);
        assert_close(&s.apply_x(f5.zero()).unwrap(), &s, 0.0);
        assert_close(&s.apply_y(f5.zero()).unwrap(), &s, 0.0);
        assert_close(&s.apply_u(f5.zero(), f5.zero()).unwrap(), &s, 0.0);
        assert_close(&s.apply_u_inverse(f5.zero(), f5.zero()).unwrap(), &s, 0.0);
    }

    #[test]
    fn overlaps() {
        let s = phi(3, 1, 2);
        assert!((s.overlap(&s).unwrap() - 1.0).abs() < 1e-12);
        let o = phi(3, 0, 0).overlap(&phi(3, 2, 1)).unwrap();
        assert!((o - 1.0 / 3f64.sqrt()).abs() < 1e-10);
        assert!(phi(3, 1, 0).overlap(&phi(3, 1, 2)).unwrap() < 1e-10);
    }

    #[test]
    fn eigenstate_measurement_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let f5 = Field::new(5).unwrap();
        let s = phi(5, 4, 2);
        for _ in 0..50 {
            let (l, post) = s.measure(Basis::Phase(f5.elem(4)), &mut rng).unwrap();
            assert_eq!(l, f5.elem(2));
            assert!(post.fidelity(&s).unwrap() > 1.0 - 1e-12);
        }
        let f3 = Field::new(3).unwrap();
        let e1 = QuditState::mub(MubLabel::computational(f3.elem(1))).unwrap();
        let (l, _) = e1.measure(Basis::Computational, &mut rng).unwrap();
        assert_eq!(l, f3.elem(1));
    }

    #[test]
    fn mismatched_basis_probabilities_are_uniform() {
        let f3 = Field::new(3).unwrap();
        let p = phi(3, 0, 0).probabilities(Basis::Phase(f3.elem(1))).unwrap();
        for x in p {
            assert!((x - 1.0 / 3.0).abs() < 1e-10);
        }
    }

    #[test]
    fn measurement_frequencies_follow_born_rule() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let f5 = Field::new(5).unwrap();
        // a non-uniform state: superposition of two vectors of the same basis
        let a = phi(5, 1, 0);
        let b = phi(5, 1, 3);
        let amps: Vec<Complex64> = a
            .amplitudes()
            .iter()
            .zip(b.amplitudes())
            .map(|(x, y)| x * 0.8 + y * 0.6)
            .collect();
        let s = QuditState::from_amplitudes(amps).unwrap();
        for basis in [Basis::Phase(f5.elem(1)), Basis::Phase(f5.elem(3)), Basis::Computational] {
            let probs = s.probabilities(basis).unwrap();
            assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-10);
            let n = 20_000;
            let mut counts = [0usize; 5];
            for _ in 0..n {
                counts[s.measure(basis, &mut rng).unwrap().0.value() as usize] += 1;
            }
            for (c, p) in counts.iter().zip(&probs) {
                let sigma = (n as f64 * p * (1.0 - p)).sqrt();
                assert!((*c as f64 - n as f64 * p).abs() <= 3.0 * sigma + 1e-9, "{counts:?} {probs:?}");
            }
        }
    }
}
