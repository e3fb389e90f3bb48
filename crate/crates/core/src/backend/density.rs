use num_complex::Complex64;

use super::DenseState;
use crate::error::{Error, Result};
use crate::gf2::BitString;
use crate::pauli::PauliProduct;

/// Dense density operators are only built by the oracles; `4¹²` entries is
/// the ceiling.
pub const DENSITY_QUBIT_LIMIT: usize = 12;

/// Row-major `2ⁿ × 2ⁿ` density operator, same qubit ordering as
/// [`DenseState`].
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    dim: usize,
    data: Vec<Complex64>,
}

impl DensityMatrix {
    pub fn zeros(n: usize) -> Result<Self> {
        if n > DENSITY_QUBIT_LIMIT {
            return Err(Error::BackendLimit {
                qubits: n,
                limit: DENSITY_QUBIT_LIMIT,
            });
        }
        let dim = 1 << n;
        Ok(DensityMatrix {
            n,
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        })
    }

    pub fn from_pure(state: &DenseState) -> Self {
        let mut rho = Self::zeros(state.num_qubits()).expect("pure state within density limit");
        rho.add_pure(state, 1.0);
        rho
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    /// `ρ += w |ψ⟩⟨ψ|`.
    pub fn add_pure(&mut self, state: &DenseState, weight: f64) {
        assert_eq!(state.num_qubits(), self.n);
        let a = state.amplitudes();
        for (i, ai) in a.iter().enumerate() {
            if ai.norm_sqr() == 0.0 {
                continue;
            }
            let row = &mut self.data[i * self.dim..(i + 1) * self.dim];
            for (j, aj) in a.iter().enumerate() {
                row[j] += ai * aj.conj() * weight;
            }
        }
    }

    /// `ρ += w |b⟩⟨b|` for a computational basis label.
    pub fn add_basis_projector(&mut self, bits: &BitString, weight: f64) {
        assert_eq!(bits.len(), self.n);
        let i = bits.iter().fold(0usize, |acc, b| (acc << 1) | b as usize);
        self.data[i * self.dim + i] += weight;
    }

    pub fn scale(&mut self, factor: f64) {
        for x in self.data.iter_mut() {
            *x *= factor;
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.entry(i, i)).sum()
    }

    pub fn max_abs_diff(&self, other: &DensityMatrix) -> Result<f64> {
        if self.n != other.n {
            return Err(Error::Dimension {
                expected: self.n,
                found: other.n,
            });
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// `P ρ P†` for a Pauli product.
    pub fn conjugate_by_pauli(&self, p: &PauliProduct) -> DensityMatrix {
        // Columns of ρ transformed by P, then rows via (P (P ρ)†)†.
        let left = self.left_mul_pauli(p);
        left.adjoint().left_mul_pauli(p).adjoint()
    }

    fn adjoint(&self) -> DensityMatrix {
        let mut out = self.clone();
        for i in 0..self.dim {
            for j in 0..self.dim {
                out.data[i * self.dim + j] = self.data[j * self.dim + i].conj();
            }
        }
        out
    }

    /// `P ρ`.
    pub fn left_mul_pauli(&self, p: &PauliProduct) -> DensityMatrix {
        let mut out = self.clone();
        let mut column = vec![Complex64::new(0.0, 0.0); self.dim];
        for j in 0..self.dim {
            for (i, c) in column.iter_mut().enumerate() {
                *c = self.entry(i, j);
            }
            // Column vectors need not be normalized; DenseState is only used
            // as an amplitude container here.
            let col_state = DenseState::from_raw(self.n, column.clone());
            let img = col_state.pauli_image(p);
            for (i, v) in img.amplitudes().iter().enumerate() {
                out.data[i * self.dim + j] = *v;
            }
        }
        out
    }

    /// `Tr(P ρ)`.
    pub fn expectation(&self, p: &PauliProduct) -> f64 {
        self.left_mul_pauli(p).trace().re
    }

    /// Traces out the last qubit.
    pub fn partial_trace_last(&self) -> DensityMatrix {
        assert!(self.n >= 1);
        let mut out = DensityMatrix::zeros(self.n - 1).expect("smaller than input");
        for i in 0..out.dim {
            for j in 0..out.dim {
                let mut acc = Complex64::new(0.0, 0.0);
                for b in 0..2 {
                    acc += self.entry(2 * i + b, 2 * j + b);
                }
                out.data[i * out.dim + j] = acc;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::QuantumState;
    use crate::pauli::pauli;

    #[test]
    fn pure_state_trace_and_conjugation() {
        let mut s = DenseState::zero(2).unwrap();
        s.h(0);
        s.cx(0, 1);
        let rho = DensityMatrix::from_pure(&s);
        assert!((rho.trace().re - 1.0).abs() < 1e-12);
        // XX stabilizes the Bell state, so conjugation leaves ρ unchanged.
        let conj = rho.conjugate_by_pauli(&pauli("XX"));
        assert!(conj.max_abs_diff(&rho).unwrap() < 1e-12);
        assert!((rho.expectation(&pauli("ZZ")) - 1.0).abs() < 1e-12);
        let flipped = rho.conjugate_by_pauli(&pauli("XI"));
        assert!((flipped.expectation(&pauli("ZZ")) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn limit() {
        assert!(DensityMatrix::zeros(13).is_err());
    }
}
