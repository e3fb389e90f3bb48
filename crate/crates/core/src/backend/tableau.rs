use rand::Rng;

use super::{DenseState, MeasurementRecord, Observable, QuantumState};
use crate::error::{Error, Result};
use crate::gf2::{BinaryMatrix, BitString, RowSolver};
use crate::pauli::{Pauli, PauliProduct};

/// Stabilizer tableau in the Aaronson–Gottesman layout: rows `0..n` are
/// destabilizers, rows `n..2n` stabilizers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tableau {
    n: usize,
    rows: Vec<PauliProduct>,
}

impl Tableau {
    pub fn zero(n: usize) -> Self {
        let mut rows = Vec::with_capacity(2 * n);
        rows.extend((0..n).map(|q| PauliProduct::single(n, q, Pauli::X)));
        rows.extend((0..n).map(|q| PauliProduct::single(n, q, Pauli::Z)));
        Tableau { n, rows }
    }

    pub fn stabilizers(&self) -> &[PauliProduct] {
        &self.rows[self.n..]
    }

    pub fn destabilizers(&self) -> &[PauliProduct] {
        &self.rows[..self.n]
    }

    /// Reduced generating set, unique for a given stabilizer group.
    ///
    /// Row reduction over the symplectic vectors with columns ordered
    /// `x₀ … x_{n−1} z₀ … z_{n−1}`; signs are tracked through the products.
    pub fn canonical_stabilizers(&self) -> Vec<PauliProduct> {
        let n = self.n;
        let mut gens: Vec<PauliProduct> = self.stabilizers().to_vec();
        let bit = |p: &PauliProduct, col: usize| {
            if col < n {
                p.x_mask().get(col)
            } else {
                p.z_mask().get(col - n)
            }
        };
        let mut pivot_row = 0;
        for col in 0..2 * n {
            let Some(found) = (pivot_row..n).find(|&r| bit(&gens[r], col)) else {
                continue;
            };
            gens.swap(pivot_row, found);
            let pivot = gens[pivot_row].clone();
            for (r, g) in gens.iter_mut().enumerate() {
                if r != pivot_row && bit(g, col) {
                    *g = g.compose(&pivot);
                }
            }
            pivot_row += 1;
            if pivot_row == n {
                break;
            }
        }
        gens
    }

    /// Expected value of a Pauli observable: `±1` when it (or its negation)
    /// is in the stabilizer group, otherwise 0.
    pub fn expectation(&self, op: &PauliProduct) -> i8 {
        if self.stabilizers().iter().any(|s| s.anticommutes(op)) {
            return 0;
        }
        if self.product_for(op).is_negative() == op.is_negative() {
            1
        } else {
            -1
        }
    }

    /// Product of the stabilizers whose destabilizer partners anticommute
    /// with `op`; equals `±op` whenever `op` commutes with every stabilizer.
    fn product_for(&self, op: &PauliProduct) -> PauliProduct {
        let mut acc = PauliProduct::identity(self.n);
        for i in 0..self.n {
            if self.rows[i].anticommutes(op) {
                acc = acc.compose(&self.rows[self.n + i]);
            }
        }
        acc
    }

    /// State vector of the stabilizer state, up to a global phase.
    pub fn to_dense(&self) -> Result<DenseState> {
        let n = self.n;
        // A basis state with non-zero overlap satisfies every Z-only
        // generator of the canonical form.
        let z_only: Vec<PauliProduct> = self
            .canonical_stabilizers()
            .into_iter()
            .filter(|g| g.x_mask().is_zero())
            .collect();
        let start = if z_only.is_empty() {
            BitString::zeros(n)
        } else {
            let m = BinaryMatrix::from_rows(n, z_only.iter().map(|g| g.z_mask().clone()).collect())?;
            let rhs = BitString::from_bits(z_only.iter().map(|g| g.is_negative()));
            RowSolver::new(&m.transpose())
                .coordinates(&rhs)
                .ok_or_else(|| Error::Divergence("inconsistent Z stabilizers".into()))?
        };
        let mut state = DenseState::from_bits(&start)?;
        for g in self.stabilizers() {
            let p = state.project_unnormalized(g, 1);
            if p < 1e-12 {
                return Err(Error::Divergence(format!("stabilizer {g} annihilates the seed state")));
            }
            state.normalize();
        }
        Ok(state)
    }

    fn check_qubit(&self, q: usize) {
        assert!(q < self.n, "qubit {q} out of range for {} qubits", self.n);
    }
}

impl QuantumState for Tableau {
    fn new_zero(n: usize) -> Result<Self> {
        Ok(Tableau::zero(n))
    }

    fn num_qubits(&self) -> usize {
        self.n
    }

    fn h(&mut self, q: usize) {
        self.check_qubit(q);
        for row in self.rows.iter_mut() {
            let (x, z) = row.get(q).bits();
            if x && z {
                row.set_negative(!row.is_negative());
            }
            row.set(q, Pauli::from_bits(z, x));
        }
    }

    fn s(&mut self, q: usize) {
        self.check_qubit(q);
        for row in self.rows.iter_mut() {
            let (x, z) = row.get(q).bits();
            if x && z {
                row.set_negative(!row.is_negative());
            }
            row.set(q, Pauli::from_bits(x, z ^ x));
        }
    }

    fn cx(&mut self, a: usize, b: usize) {
        self.check_qubit(a);
        self.check_qubit(b);
        assert_ne!(a, b, "CNOT needs distinct qubits");
        for row in self.rows.iter_mut() {
            let (xa, za) = row.get(a).bits();
            let (xb, zb) = row.get(b).bits();
            if xa && zb && (xb ^ za ^ true) {
                row.set_negative(!row.is_negative());
            }
            row.set(b, Pauli::from_bits(xb ^ xa, zb));
            row.set(a, Pauli::from_bits(xa, za ^ zb));
        }
    }

    fn apply_pauli(&mut self, p: &PauliProduct) {
        assert_eq!(p.num_qubits(), self.n, "Pauli width");
        for row in self.rows.iter_mut() {
            if row.anticommutes(p) {
                row.set_negative(!row.is_negative());
            }
        }
    }

    fn measure_pauli<R: Rng + ?Sized>(&mut self, op: &PauliProduct, rng: &mut R) -> MeasurementRecord {
        assert_eq!(op.num_qubits(), self.n, "Pauli width");
        let u: f64 = rng.gen();
        let n = self.n;
        let pivot = (n..2 * n).find(|&i| self.rows[i].anticommutes(op));
        let (eigenvalue, deterministic) = match pivot {
            Some(p) => {
                let pivot_row = self.rows[p].clone();
                for i in 0..2 * n {
                    if i != p && i != p - n && self.rows[i].anticommutes(op) {
                        self.rows[i] = self.rows[i].compose(&pivot_row);
                    }
                }
                let eigenvalue: i8 = if u < 0.5 { 1 } else { -1 };
                self.rows[p - n] = pivot_row;
                self.rows[p] = op.clone().with_sign(op.is_negative() ^ (eigenvalue < 0));
                (eigenvalue, false)
            }
            None => {
                let acc = self.product_for(op);
                (if acc.is_negative() == op.is_negative() { 1 } else { -1 }, true)
            }
        };
        MeasurementRecord {
            observable: Observable::Pauli(op.clone()),
            eigenvalue,
            deterministic,
        }
    }
}
