//! Signed Pauli products in symplectic form.
//!
//! A product is stored as an X mask, a Z mask and a sign. Position `j`
//! carries `I`, `X`, `Z` or `Y` for mask bits `(0,0)`, `(1,0)`, `(0,1)`,
//! `(1,1)`; a position with both bits set denotes the Hermitian `Y`, so
//! every product is an observable with eigenvalues `±1`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::BitString;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn from_bits(x: bool, z: bool) -> Pauli {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Exponent of `i` picked up when multiplying single-qubit Paulis
/// `(x1,z1)·(x2,z2)`, in `{-1, 0, 1}`.
#[inline]
pub(crate) fn phase_exponent(x1: bool, z1: bool, x2: bool, z2: bool) -> i32 {
    let (x2i, z2i) = (x2 as i32, z2 as i32);
    match (x1, z1) {
        (false, false) => 0,
        (true, true) => z2i - x2i,
        (true, false) => z2i * (2 * x2i - 1),
        (false, true) => x2i * (1 - 2 * z2i),
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliProduct {
    x: BitString,
    z: BitString,
    negative: bool,
}

impl PauliProduct {
    pub fn identity(n: usize) -> Self {
        PauliProduct {
            x: BitString::zeros(n),
            z: BitString::zeros(n),
            negative: false,
        }
    }

    pub fn from_masks(x: BitString, z: BitString, negative: bool) -> Result<Self> {
        if x.len() != z.len() {
            return Err(Error::Dimension {
                expected: x.len(),
                found: z.len(),
            });
        }
        Ok(PauliProduct { x, z, negative })
    }

    pub fn single(n: usize, qubit: usize, p: Pauli) -> Self {
        let mut out = Self::identity(n);
        out.set(qubit, p);
        out
    }

    /// `Π X^{mask}` with the given sign.
    pub fn x_type(mask: BitString, negative: bool) -> Self {
        let n = mask.len();
        PauliProduct {
            x: mask,
            z: BitString::zeros(n),
            negative,
        }
    }

    /// `Π Z^{mask}` with the given sign.
    pub fn z_type(mask: BitString, negative: bool) -> Self {
        let n = mask.len();
        PauliProduct {
            x: BitString::zeros(n),
            z: mask,
            negative,
        }
    }

    /// The same Pauli letter on every listed qubit.
    pub fn on(n: usize, qubits: &[usize], p: Pauli) -> Self {
        let mut out = Self::identity(n);
        for &q in qubits {
            out.set(q, p);
        }
        out
    }

    pub fn num_qubits(&self) -> usize {
        self.x.len()
    }

    pub fn x_mask(&self) -> &BitString {
        &self.x
    }

    pub fn z_mask(&self) -> &BitString {
        &self.z
    }

    pub fn is_negative(&self) -> bool {
        self.negative
    }

    /// `+1` or `-1`.
    pub fn sign(&self) -> i8 {
        if self.negative {
            -1
        } else {
            1
        }
    }

    pub fn with_sign(mut self, negative: bool) -> Self {
        self.negative = negative;
        self
    }

    pub(crate) fn set_negative(&mut self, negative: bool) {
        self.negative = negative;
    }

    pub fn negated(mut self) -> Self {
        self.negative = !self.negative;
        self
    }

    pub fn get(&self, q: usize) -> Pauli {
        Pauli::from_bits(self.x.get(q), self.z.get(q))
    }

    pub fn set(&mut self, q: usize, p: Pauli) {
        let (x, z) = p.bits();
        self.x.set(q, x);
        self.z.set(q, z);
    }

    pub fn weight(&self) -> usize {
        self.x.or(&self.z).weight()
    }

    pub fn is_identity(&self) -> bool {
        self.x.is_zero() && self.z.is_zero()
    }

    /// Symplectic inner product; `true` when the two anticommute.
    pub fn anticommutes(&self, other: &PauliProduct) -> bool {
        self.x.dot(&other.z) ^ self.z.dot(&other.x)
    }

    pub fn commutes_with(&self, other: &PauliProduct) -> bool {
        !self.anticommutes(other)
    }

    /// `self · other = i^{imag} · result`. The returned flag is `true` when a
    /// factor of `i` remains, which happens exactly for anticommuting pairs.
    pub fn mul(&self, other: &PauliProduct) -> (PauliProduct, bool) {
        assert_eq!(self.num_qubits(), other.num_qubits());
        let mut exponent: i32 = 2 * (self.negative as i32) + 2 * (other.negative as i32);
        for q in 0..self.num_qubits() {
            exponent += phase_exponent(self.x.get(q), self.z.get(q), other.x.get(q), other.z.get(q));
        }
        let e = exponent.rem_euclid(4);
        (
            PauliProduct {
                x: self.x.xor(&other.x),
                z: self.z.xor(&other.z),
                negative: e >= 2,
            },
            e % 2 == 1,
        )
    }

    /// Product of commuting operators; panics if a factor of `i` would remain.
    pub fn compose(&self, other: &PauliProduct) -> PauliProduct {
        let (p, imag) = self.mul(other);
        assert!(!imag, "composition of anticommuting Paulis is not Hermitian");
        p
    }

    /// Embeds into a larger register at the given qubit positions.
    pub fn embed(&self, n: usize, positions: &[usize]) -> PauliProduct {
        assert_eq!(positions.len(), self.num_qubits());
        let mut out = PauliProduct::identity(n).with_sign(self.negative);
        for (j, &q) in positions.iter().enumerate() {
            out.set(q, self.get(j));
        }
        out
    }
}

impl fmt::Display for PauliProduct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.negative { "-" } else { "+" })?;
        for q in 0..self.num_qubits() {
            write!(f, "{}", self.get(q).symbol())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliProduct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliProduct({self})")
    }
}

impl FromStr for PauliProduct {
    type Err = Error;

    /// Parses `"+XZI"`, `"-YY"` or an unsigned `"XX"`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (negative, body) = match s.chars().next() {
            Some('-') => (true, &s[1..]),
            Some('+') => (false, &s[1..]),
            _ => (false, s),
        };
        let letters: Vec<Pauli> = body
            .chars()
            .map(|c| match c {
                'I' | '_' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(Error::Parse(format!("invalid Pauli letter {other:?}"))),
            })
            .collect::<Result<_>>()?;
        let mut p = PauliProduct::identity(letters.len()).with_sign(negative);
        for (q, l) in letters.into_iter().enumerate() {
            p.set(q, l);
        }
        Ok(p)
    }
}

/// Literal helper for tests: `pauli("+XXX")`.
pub fn pauli(s: &str) -> PauliProduct {
    s.parse().expect("invalid Pauli literal")
}
