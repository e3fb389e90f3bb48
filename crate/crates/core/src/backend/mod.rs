//! Qubit simulation backends.
//!
//! [`DenseState`] stores all `2ⁿ` amplitudes and serves as the oracle;
//! [`Tableau`] is a stabilizer tableau that scales to many qubits but only
//! supports Clifford operations. Both implement [`QuantumState`], so protocol
//! code is written once and run on either.
//!
//! Every measurement draws exactly one uniform `f64` from the generator,
//! whether or not the outcome is random. Two backends fed the same seed and
//! the same program therefore consume randomness in lockstep.

mod dense;
mod density;
mod tableau;

pub mod crosscheck;

pub use dense::{DenseState, DENSE_QUBIT_LIMIT};
pub use density::{DensityMatrix, DENSITY_QUBIT_LIMIT};
pub use tableau::Tableau;

use std::f64::consts::FRAC_PI_4;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::BitString;
use crate::pauli::{Pauli, PauliProduct};

/// What a measurement looked at.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Observable {
    Qubit(usize),
    Pauli(PauliProduct),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub observable: Observable,
    /// `+1` or `-1`. For a computational measurement, `-1` is the bit `1`.
    pub eigenvalue: i8,
    pub deterministic: bool,
}

impl MeasurementRecord {
    pub fn bit(&self) -> bool {
        self.eigenvalue < 0
    }
}

/// Common interface over the dense and tableau backends.
pub trait QuantumState: Clone + Send + Sync + Sized {
    /// `|0…0⟩` on `n` qubits.
    fn new_zero(n: usize) -> Result<Self>;

    fn num_qubits(&self) -> usize;

    fn h(&mut self, q: usize);

    fn s(&mut self, q: usize);

    fn cx(&mut self, control: usize, target: usize);

    fn apply_pauli(&mut self, p: &PauliProduct);

    /// Born-rule measurement of a Pauli observable; the state collapses.
    fn measure_pauli<R: Rng + ?Sized>(&mut self, op: &PauliProduct, rng: &mut R) -> MeasurementRecord;

    fn measure_qubit<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> MeasurementRecord {
        let z = PauliProduct::single(self.num_qubits(), q, Pauli::Z);
        let mut rec = self.measure_pauli(&z, rng);
        rec.observable = Observable::Qubit(q);
        rec
    }

    fn x(&mut self, q: usize) {
        let n = self.num_qubits();
        self.apply_pauli(&PauliProduct::single(n, q, Pauli::X));
    }

    fn y(&mut self, q: usize) {
        let n = self.num_qubits();
        self.apply_pauli(&PauliProduct::single(n, q, Pauli::Y));
    }

    fn z(&mut self, q: usize) {
        let n = self.num_qubits();
        self.apply_pauli(&PauliProduct::single(n, q, Pauli::Z));
    }

    fn apply_single(&mut self, q: usize, p: Pauli) {
        match p {
            Pauli::I => {}
            Pauli::X => self.x(q),
            Pauli::Y => self.y(q),
            Pauli::Z => self.z(q),
        }
    }
}

/// `(|0…0⟩ + |1…1⟩)/√2` on `num_parties` qubits.
pub fn prepare_ghz<S: QuantumState>(num_parties: usize) -> Result<S> {
    if num_parties < 2 {
        return Err(Error::Domain(format!("GHZ state needs at least 2 qubits, got {num_parties}")));
    }
    let mut s = S::new_zero(num_parties)?;
    s.h(0);
    for q in 1..num_parties {
        s.cx(0, q);
    }
    Ok(s)
}

/// `count` independent GHZ blocks of `num_parties` qubits in party-major
/// order: party `p`'s share of block `j` is qubit `p·count + j`.
pub fn prepare_ghz_blocks<S: QuantumState>(num_parties: usize, count: usize) -> Result<S> {
    if num_parties < 2 {
        return Err(Error::Domain(format!("GHZ state needs at least 2 qubits, got {num_parties}")));
    }
    let mut s = S::new_zero(num_parties * count)?;
    for j in 0..count {
        s.h(j);
        for p in 1..num_parties {
            s.cx(j, p * count + j);
        }
    }
    Ok(s)
}

/// Hadamard on every qubit whose mask bit is set.
pub fn apply_hadamard_mask<S: QuantumState>(state: &mut S, mask: &BitString) -> Result<()> {
    if mask.len() != state.num_qubits() {
        return Err(Error::Dimension {
            expected: state.num_qubits(),
            found: mask.len(),
        });
    }
    for q in mask.ones_positions() {
        state.h(q);
    }
    Ok(())
}

/// Probabilities of a single-qubit Pauli channel.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PauliChannel {
    pub p_x: f64,
    pub p_y: f64,
    pub p_z: f64,
}

impl PauliChannel {
    pub const NOISELESS: PauliChannel = PauliChannel {
        p_x: 0.0,
        p_y: 0.0,
        p_z: 0.0,
    };

    pub fn new(p_x: f64, p_y: f64, p_z: f64) -> Result<Self> {
        let c = PauliChannel { p_x, p_y, p_z };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let ps = [self.p_x, self.p_y, self.p_z];
        if ps.iter().any(|p| !(0.0..=1.0).contains(p) || p.is_nan()) {
            return Err(Error::Domain(format!("channel probabilities out of range: {ps:?}")));
        }
        if ps.iter().sum::<f64>() > 1.0 + 1e-12 {
            return Err(Error::Domain(format!("channel probabilities sum above 1: {ps:?}")));
        }
        Ok(())
    }

    pub fn is_noiseless(&self) -> bool {
        self.p_x == 0.0 && self.p_y == 0.0 && self.p_z == 0.0
    }

    /// Draws one Pauli; always consumes exactly one uniform.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Pauli {
        let u: f64 = rng.gen();
        if u < self.p_x {
            Pauli::X
        } else if u < self.p_x + self.p_y {
            Pauli::Y
        } else if u < self.p_x + self.p_y + self.p_z {
            Pauli::Z
        } else {
            Pauli::I
        }
    }
}

/// Samples `I/X/Y/Z` with probabilities `(1−Σp, p_x, p_y, p_z)`, applies it to
/// `qubit` and returns the applied label.
pub fn apply_pauli_channel<S: QuantumState, R: Rng + ?Sized>(
    state: &mut S,
    qubit: usize,
    p_x: f64,
    p_y: f64,
    p_z: f64,
    rng: &mut R,
) -> Result<Pauli> {
    let channel = PauliChannel::new(p_x, p_y, p_z)?;
    let p = channel.sample(rng);
    state.apply_single(qubit, p);
    Ok(p)
}

/// Computational-basis measurement of the listed qubits, in order.
pub fn measure_computational<S: QuantumState, R: Rng + ?Sized>(
    state: &mut S,
    qubits: &[usize],
    rng: &mut R,
) -> BitString {
    BitString::from_bits(qubits.iter().map(|&q| state.measure_qubit(q, rng).bit()))
}

/// `|⟨a|b⟩|²`.
pub fn fidelity(a: &DenseState, b: &DenseState) -> Result<f64> {
    a.fidelity(b)
}

/// The GHZ-basis state whose generators `X^⊗N, Z₁Z₂, …, Z_{N−1}Z_N` have
/// eigenvalues `signs`.
///
/// With `x` the `N`-bit string starting at 0 whose neighbouring bits differ
/// exactly where the corresponding `Z Z` sign is `−1`, the state is
/// `cos θ|x⟩ + sin θ|x̄⟩` for a `+` X-sign and `sin θ|x⟩ − cos θ|x̄⟩` for a `−`
/// X-sign. Arbitrary `θ` is accepted for three qubits only; larger registers
/// require `θ = π/4`.
pub fn ghz_basis_state(signs: &[i8], theta: f64) -> Result<DenseState> {
    let n = signs.len();
    if n < 2 {
        return Err(Error::Domain("GHZ basis needs at least 2 qubits".into()));
    }
    if signs.iter().any(|&s| s != 1 && s != -1) {
        return Err(Error::Domain(format!("signs must be ±1, got {signs:?}")));
    }
    if !(theta > 0.0 && theta < std::f64::consts::FRAC_PI_2) {
        return Err(Error::Domain(format!("theta = {theta} outside (0, π/2)")));
    }
    if n != 3 && (theta - FRAC_PI_4).abs() > 1e-12 {
        return Err(Error::Domain("general theta is only defined for three qubits".into()));
    }
    let mut low = BitString::zeros(n);
    for i in 1..n {
        let flip = signs[i] == -1;
        low.set(i, low.get(i - 1) ^ flip);
    }
    let high = low.xor(&BitString::ones(n));
    let (c, s) = (theta.cos(), theta.sin());
    let (a_low, a_high) = if signs[0] == 1 { (c, s) } else { (s, -c) };
    let mut state = DenseState::zero(n)?;
    state.set_amplitudes_sparse(&[(&low, Complex64::new(a_low, 0.0)), (&high, Complex64::new(a_high, 0.0))]);
    Ok(state)
}
