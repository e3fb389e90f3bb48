//! Classical post-processing shared by the protocols, plus a bit-level model
//! of single BB84-style qubits.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::CodeCatalog;
use crate::css::CssCode;
use crate::error::{Error, Result};
use crate::gf2::BitString;
use crate::pauli::Pauli;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    /// Computational basis `{|0⟩, |1⟩}`.
    Z,
    /// Hadamard basis `{|+⟩, |−⟩}`; bit 0 is `|+⟩`.
    X,
}

impl Basis {
    pub fn from_bit(hadamard: bool) -> Basis {
        if hadamard {
            Basis::X
        } else {
            Basis::Z
        }
    }

    pub fn is_hadamard(self) -> bool {
        self == Basis::X
    }
}

/// A qubit that is always one of the four BB84 states.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BbQubit {
    pub basis: Basis,
    pub bit: bool,
}

impl BbQubit {
    pub fn new(basis: Basis, bit: bool) -> Self {
        BbQubit { basis, bit }
    }

    /// Applies a Pauli; only the component that flips this basis matters.
    pub fn apply(&mut self, p: Pauli) {
        let (x, z) = p.bits();
        let flips = match self.basis {
            Basis::Z => x,
            Basis::X => z,
        };
        self.bit ^= flips;
    }

    /// Measures in `basis` and collapses. Draws exactly one uniform, and a
    /// mismatched basis yields 1 when it is at least ½, as the quantum
    /// backends do.
    pub fn measure<R: Rng + ?Sized>(&mut self, basis: Basis, rng: &mut R) -> bool {
        let u: f64 = rng.gen();
        if basis != self.basis {
            *self = BbQubit::new(basis, u >= 0.5);
        }
        self.bit
    }
}

/// Eve measures in a uniformly random basis and resends what she saw.
/// Returns her basis and bit.
pub fn attack_intercept_resend<R: Rng + ?Sized>(qubit: &mut BbQubit, rng: &mut R) -> (Basis, bool) {
    let basis = Basis::from_bit(rng.gen());
    let bit = qubit.measure(basis, rng);
    (basis, bit)
}

/// Positions where every receiver chose Alice's basis.
pub fn sift(alice: &BitString, receivers: &[BitString]) -> Result<Vec<usize>> {
    for r in receivers {
        if r.len() != alice.len() {
            return Err(Error::Dimension {
                expected: alice.len(),
                found: r.len(),
            });
        }
    }
    Ok((0..alice.len())
        .filter(|&j| receivers.iter().all(|r| r.get(j) == alice.get(j)))
        .collect())
}

/// Error-estimation rule. The prepare-and-measure protocol doubles the
/// observed weight because a mismatch on a check bit can come from either
/// the sender's or the receiver's side of a single link.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ThresholdVariant {
    Entangled,
    PrepareMeasure,
}

impl ThresholdVariant {
    fn multiplier(self) -> f64 {
        match self {
            ThresholdVariant::Entangled => 1.0,
            ThresholdVariant::PrepareMeasure => 2.0,
        }
    }
}

/// Threshold `t = max(0, ⌈m·wt(w) + c·n − 1⌉)`.
pub fn threshold(wt_w: usize, n: usize, c: f64, variant: ThresholdVariant) -> usize {
    // Products like 0.07·100 land just above an integer in floating point.
    let raw = variant.multiplier() * wt_w as f64 + c * n as f64 - 1.0;
    let t = (raw - 1e-9).ceil();
    if t <= 0.0 {
        0
    } else {
        t as usize
    }
}

/// Combines every receiver's check bits with Alice's: `w` is set wherever
/// any receiver disagrees. Returns `(w, t)`.
pub fn estimate_error(
    alice: &BitString,
    receivers: &[BitString],
    c: f64,
    variant: ThresholdVariant,
) -> Result<(BitString, usize)> {
    let mut w = BitString::zeros(alice.len());
    for r in receivers {
        w = w.or(&alice.try_xor(r)?);
    }
    let t = threshold(w.weight(), alice.len(), c, variant);
    Ok((w, t))
}

/// Shortest catalog code correcting `t` errors with length at most `max_len`.
pub fn choose_code(catalog: &CodeCatalog, t: usize, max_len: usize) -> Option<&CssCode> {
    catalog.choose_fitting(t, max_len)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2::bits;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn threshold_examples() {
        assert_eq!(threshold(0, 100, 0.01, ThresholdVariant::Entangled), 0);
        assert_eq!(threshold(0, 100, 0.07, ThresholdVariant::Entangled), 6);
        assert_eq!(threshold(3, 10, 0.0, ThresholdVariant::Entangled), 2);
        assert_eq!(threshold(3, 10, 0.0, ThresholdVariant::PrepareMeasure), 5);
        assert_eq!(threshold(1, 10, 0.15, ThresholdVariant::Entangled), 2);
    }

    #[test]
    fn w_is_the_union_of_disagreements() {
        let a = bits("0000");
        let (w, t) = estimate_error(&a, &[bits("1000"), bits("1010")], 0.0, ThresholdVariant::Entangled).unwrap();
        assert_eq!(w, bits("1010"));
        assert_eq!(t, 1);
    }

    #[test]
    fn sift_keeps_unanimous_positions() {
        let s = sift(&bits("0110"), &[bits("0100"), bits("0111")]).unwrap();
        assert_eq!(s, vec![0, 1]);
        assert!(sift(&bits("01"), &[bits("0")]).is_err());
    }

    #[test]
    fn bb_qubit_pauli_action() {
        let mut q = BbQubit::new(Basis::Z, false);
        q.apply(Pauli::Z);
        assert!(!q.bit);
        q.apply(Pauli::Y);
        assert!(q.bit);
        let mut q = BbQubit::new(Basis::X, false);
        q.apply(Pauli::X);
        assert!(!q.bit);
        q.apply(Pauli::Z);
        assert!(q.bit);
    }

    #[test]
    fn mismatched_measurement_is_fair() {
        let mut r = ChaCha8Rng::seed_from_u64(1);
        let ones = (0..4000)
            .filter(|_| BbQubit::new(Basis::Z, false).measure(Basis::X, &mut r))
            .count();
        assert!((ones as f64 - 2000.0).abs() < 4.0 * 31.7);
        let mut q = BbQubit::new(Basis::X, true);
        assert!(q.measure(Basis::X, &mut r));
    }

    #[test]
    fn catalog_choice() {
        let cat = CodeCatalog::steane();
        assert_eq!(choose_code(&cat, 0, 10).unwrap().n(), 1);
        assert_eq!(choose_code(&cat, 1, 10).unwrap().n(), 7);
        assert!(choose_code(&cat, 1, 6).is_none());
        assert!(choose_code(&cat, 2, 100).is_none());
    }
}
