use num_complex::Complex64;
use rand::Rng;

use super::{MeasurementRecord, Observable, QuantumState};
use crate::error::{Error, Result};
use crate::gf2::BitString;
use crate::pauli::PauliProduct;

/// Largest register the dense backend will allocate (16M amplitudes).
pub const DENSE_QUBIT_LIMIT: usize = 20;

const DETERMINISTIC_EPS: f64 = 1e-12;

/// State vector over `n` qubits. Qubit 0 is the most significant bit of the
/// basis index, so `|q₀ q₁ … q_{n−1}⟩` reads left to right.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseState {
    n: usize,
    amps: Vec<Complex64>,
}

impl DenseState {
    pub fn zero(n: usize) -> Result<Self> {
        if n > DENSE_QUBIT_LIMIT {
            return Err(Error::BackendLimit {
                qubits: n,
                limit: DENSE_QUBIT_LIMIT,
            });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(DenseState { n, amps })
    }

    /// Computational basis state `|bits⟩`.
    pub fn from_bits(bits: &BitString) -> Result<Self> {
        let mut s = Self::zero(bits.len())?;
        s.amps[0] = Complex64::new(0.0, 0.0);
        let i = s.index_of(bits);
        s.amps[i] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    pub fn from_amplitudes(n: usize, amps: Vec<Complex64>) -> Result<Self> {
        if n > DENSE_QUBIT_LIMIT {
            return Err(Error::BackendLimit {
                qubits: n,
                limit: DENSE_QUBIT_LIMIT,
            });
        }
        if amps.len() != 1 << n {
            return Err(Error::Dimension {
                expected: 1 << n,
                found: amps.len(),
            });
        }
        let s = DenseState { n, amps };
        if (s.norm_sqr() - 1.0).abs() > 1e-10 {
            return Err(Error::Domain(format!("state is not normalized (norm² = {})", s.norm_sqr())));
        }
        Ok(s)
    }

    /// Normalizes `amps` before building the state.
    pub fn from_unnormalized(n: usize, mut amps: Vec<Complex64>) -> Result<Self> {
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-15 {
            return Err(Error::Domain("zero vector cannot be normalized".into()));
        }
        for a in amps.iter_mut() {
            *a /= norm;
        }
        Self::from_amplitudes(n, amps)
    }

    pub(crate) fn set_amplitudes_sparse(&mut self, entries: &[(&BitString, Complex64)]) {
        self.amps.iter_mut().for_each(|a| *a = Complex64::new(0.0, 0.0));
        for (bits, a) in entries {
            let i = self.index_of(bits);
            self.amps[i] = *a;
        }
    }

    /// Unchecked constructor for amplitude scratch vectors.
    pub(crate) fn from_raw(n: usize, amps: Vec<Complex64>) -> DenseState {
        debug_assert_eq!(amps.len(), 1 << n);
        DenseState { n, amps }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn index_of(&self, bits: &BitString) -> usize {
        assert_eq!(bits.len(), self.n, "basis label length");
        bits.iter().fold(0usize, |acc, b| (acc << 1) | b as usize)
    }

    pub fn bits_of(&self, index: usize) -> BitString {
        BitString::from_bits((0..self.n).map(|q| (index >> (self.n - 1 - q)) & 1 == 1))
    }

    pub fn amplitude_of(&self, bits: &BitString) -> Complex64 {
        self.amps[self.index_of(bits)]
    }

    #[inline]
    fn qubit_mask(&self, q: usize) -> usize {
        assert!(q < self.n, "qubit {q} out of range for {} qubits", self.n);
        1 << (self.n - 1 - q)
    }

    fn index_mask(&self, bits: &BitString) -> usize {
        bits.ones_positions().fold(0, |acc, q| acc | self.qubit_mask(q))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn check_dims(&self, other: &DenseState) -> Result<()> {
        if self.n != other.n {
            return Err(Error::Dimension {
                expected: self.n,
                found: other.n,
            });
        }
        Ok(())
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &DenseState) -> Result<Complex64> {
        self.check_dims(other)?;
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn fidelity(&self, other: &DenseState) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr().clamp(0.0, 1.0))
    }

    /// `self ⊗ other`, with `self` on the leading qubits.
    pub fn tensor(&self, other: &DenseState) -> Result<DenseState> {
        let n = self.n + other.n;
        if n > DENSE_QUBIT_LIMIT {
            return Err(Error::BackendLimit {
                qubits: n,
                limit: DENSE_QUBIT_LIMIT,
            });
        }
        let mut amps = Vec::with_capacity(1 << n);
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Ok(DenseState { n, amps })
    }

    /// Normalized `α·self + β·other`.
    pub fn add_scaled(&self, other: &DenseState, alpha: Complex64, beta: Complex64) -> Result<DenseState> {
        self.check_dims(other)?;
        let amps = self.amps.iter().zip(&other.amps).map(|(a, b)| alpha * a + beta * b).collect();
        DenseState::from_unnormalized(self.n, amps)
    }

    /// `P|ψ⟩` without normalization concerns (Paulis are unitary).
    pub fn pauli_image(&self, p: &PauliProduct) -> DenseState {
        assert_eq!(p.num_qubits(), self.n, "Pauli width");
        let xm = self.index_mask(p.x_mask());
        let zm = self.index_mask(p.z_mask());
        let num_y = p.x_mask().and(p.z_mask()).weight();
        // Y = iXZ on each Y position.
        let mut global = match num_y % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        if p.is_negative() {
            global = -global;
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (i, a) in self.amps.iter().enumerate() {
            let sign = if (i & zm).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            out[i ^ xm] = global * a * sign;
        }
        DenseState { n: self.n, amps: out }
    }

    /// `⟨ψ|P|ψ⟩`, real for Hermitian `P`.
    pub fn expectation(&self, p: &PauliProduct) -> f64 {
        let img = self.pauli_image(p);
        self.inner(&img).expect("same width").re
    }

    /// Applies `(I + λP)/2` and returns the squared norm of the result
    /// (the probability of outcome `λ`). The state is left unnormalized.
    pub fn project_unnormalized(&mut self, p: &PauliProduct, eigenvalue: i8) -> f64 {
        let img = self.pauli_image(p);
        let lam = eigenvalue as f64;
        for (a, b) in self.amps.iter_mut().zip(&img.amps) {
            *a = (*a + b * lam) * 0.5;
        }
        self.norm_sqr()
    }

    pub fn normalize(&mut self) {
        let norm = self.norm_sqr().sqrt();
        if norm > 0.0 {
            for a in self.amps.iter_mut() {
                *a /= norm;
            }
        }
    }

    /// Probability that measuring every qubit gives `bits`.
    pub fn probability_of(&self, bits: &BitString) -> f64 {
        self.amplitude_of(bits).norm_sqr()
    }
}

impl QuantumState for DenseState {
    fn new_zero(n: usize) -> Result<Self> {
        DenseState::zero(n)
    }

    fn num_qubits(&self) -> usize {
        self.n
    }

    fn h(&mut self, q: usize) {
        let m = self.qubit_mask(q);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        for i in 0..self.amps.len() {
            if i & m == 0 {
                let (a, b) = (self.amps[i], self.amps[i | m]);
                self.amps[i] = (a + b) * r;
                self.amps[i | m] = (a - b) * r;
            }
        }
    }

    fn s(&mut self, q: usize) {
        let m = self.qubit_mask(q);
        let i_unit = Complex64::new(0.0, 1.0);
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & m != 0 {
                *a *= i_unit;
            }
        }
    }

    fn cx(&mut self, control: usize, target: usize) {
        assert_ne!(control, target, "CNOT needs distinct qubits");
        let c = self.qubit_mask(control);
        let t = self.qubit_mask(target);
        for i in 0..self.amps.len() {
            if i & c != 0 && i & t == 0 {
                self.amps.swap(i, i | t);
            }
        }
    }

    fn apply_pauli(&mut self, p: &PauliProduct) {
        *self = self.pauli_image(p);
    }

    fn measure_pauli<R: Rng + ?Sized>(&mut self, op: &PauliProduct, rng: &mut R) -> MeasurementRecord {
        let u: f64 = rng.gen();
        let p_plus = ((1.0 + self.expectation(op)) / 2.0).clamp(0.0, 1.0);
        let deterministic = !(DETERMINISTIC_EPS..=1.0 - DETERMINISTIC_EPS).contains(&p_plus);
        let eigenvalue: i8 = if u < p_plus { 1 } else { -1 };
        self.project_unnormalized(op, eigenvalue);
        self.normalize();
        MeasurementRecord {
            observable: Observable::Pauli(op.clone()),
            eigenvalue,
            deterministic,
        }
    }

    fn measure_qubit<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> MeasurementRecord {
        let u: f64 = rng.gen();
        let m = self.qubit_mask(q);
        let p_zero: f64 = self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & m == 0)
            .map(|(_, a)| a.norm_sqr())
            .sum::<f64>()
            .clamp(0.0, 1.0);
        let deterministic = !(DETERMINISTIC_EPS..=1.0 - DETERMINISTIC_EPS).contains(&p_zero);
        let one = u >= p_zero;
        let keep_norm = if one { 1.0 - p_zero } else { p_zero }.sqrt();
        for (i, a) in self.amps.iter_mut().enumerate() {
            if ((i & m) != 0) == one {
                *a /= keep_norm;
            } else {
                *a = Complex64::new(0.0, 0.0);
            }
        }
        MeasurementRecord {
            observable: Observable::Qubit(q),
            eigenvalue: if one { -1 } else { 1 },
            deterministic,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2::bits;
    use crate::pauli::pauli;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn basis_ordering_is_big_endian() {
        let s = DenseState::from_bits(&bits("001")).unwrap();
        assert_eq!(s.amplitudes()[1].re, 1.0);
        assert_eq!(s.bits_of(6), bits("110"));
    }

    #[test]
    fn y_acts_as_i_x_z() {
        let mut s = DenseState::zero(1).unwrap();
        s.y(0);
        // Y|0⟩ = i|1⟩
        assert!((s.amplitudes()[1] - Complex64::new(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn normalization_preserved_through_gates() {
        let mut r = ChaCha8Rng::seed_from_u64(2);
        let mut s = DenseState::zero(5).unwrap();
        for step in 0..200 {
            let q = step % 5;
            match step % 4 {
                0 => s.h(q),
                1 => s.s(q),
                2 => s.cx(q, (q + 2) % 5),
                _ => {
                    s.measure_pauli(&pauli("XZIYZ"), &mut r);
                }
            }
            assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn limits_and_validation() {
        assert!(matches!(DenseState::zero(21), Err(Error::BackendLimit { .. })));
        assert!(DenseState::from_amplitudes(1, vec![Complex64::new(1.0, 0.0); 2]).is_err());
        assert!(DenseState::from_amplitudes(1, vec![Complex64::new(1.0, 0.0); 3]).is_err());
    }
}
