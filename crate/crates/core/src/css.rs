//! CSS codes built from nested classical pairs `C2 ⊂ C1`.
//!
//! `Q_{x,z}(v) = |C2|^{-1/2} Σ_{w∈C2} (−1)^{w·z} |v + w + x⟩`. Bit errors are
//! detected by the rows of `H1` as Z-type generators and phase errors by the
//! rows of `G2` as X-type generators; the latter are decoded in `C2⊥`.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::backend::{DenseState, DensityMatrix, QuantumState, DENSITY_QUBIT_LIMIT};
use crate::codes::{catalog, validate_nested, CosetLabeler, LinearCode, SyndromeTable};
use crate::error::{Error, Result};
use crate::gf2::{BinaryMatrix, BitString, RowSolver};
use crate::pauli::PauliProduct;

#[derive(Clone, Debug)]
pub struct CssCode {
    name: String,
    c1: LinearCode,
    c2: LinearCode,
    c2_dual: LinearCode,
    k: usize,
    t: usize,
    labeler: CosetLabeler,
    bit_table: SyndromeTable,
    phase_table: SyndromeTable,
}

/// Bit-error key `x` and phase-error key `z` of `Q_{x,z}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CssParameters {
    pub x: BitString,
    pub z: BitString,
}

impl CssParameters {
    pub fn zero(n: usize) -> Self {
        CssParameters {
            x: BitString::zeros(n),
            z: BitString::zeros(n),
        }
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        CssParameters {
            x: BitString::random(n, rng),
            z: BitString::random(n, rng),
        }
    }
}

pub fn css_from_pair(c1: LinearCode, c2: LinearCode) -> Result<CssCode> {
    CssCode::new("custom", c1, c2)
}

impl CssCode {
    pub fn new(name: &str, c1: LinearCode, c2: LinearCode) -> Result<Self> {
        let nesting = validate_nested(&c1, &c2)?;
        if !nesting.subset {
            return Err(Error::Construction("C2 is not a subcode of C1".into()));
        }
        if !nesting.strict {
            return Err(Error::Construction(format!(
                "k = k1 − k2 = {} − {} must be at least 1",
                c1.k(),
                c2.k()
            )));
        }
        let c2_dual = c2.dual();
        let t = c1.t().min(c2_dual.t());
        let labeler = CosetLabeler::new(&c1, &c2)?;
        let bit_table = c1.syndrome_table();
        let phase_table = c2_dual.syndrome_table();
        Ok(CssCode {
            name: name.to_string(),
            k: c1.k() - c2.k(),
            t,
            c1,
            c2,
            c2_dual,
            labeler,
            bit_table,
            phase_table,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.c1.n()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// `min(t1, t2)` with `t2` the radius of `C2⊥`.
    pub fn t(&self) -> usize {
        self.t
    }

    pub fn c1(&self) -> &LinearCode {
        &self.c1
    }

    pub fn c2(&self) -> &LinearCode {
        &self.c2
    }

    pub fn c2_dual(&self) -> &LinearCode {
        &self.c2_dual
    }

    pub fn labeler(&self) -> &CosetLabeler {
        &self.labeler
    }

    pub fn bit_table(&self) -> &SyndromeTable {
        &self.bit_table
    }

    pub fn phase_table(&self) -> &SyndromeTable {
        &self.phase_table
    }

    /// Coset label of `u ∈ C1`; this is the key carried by a block.
    pub fn key_of(&self, u: &BitString) -> Result<BitString> {
        self.labeler.label(u)
    }

    /// Canonical `C1` element whose coset is labelled `key`.
    pub fn representative(&self, key: &BitString) -> Result<BitString> {
        if key.len() != self.k {
            return Err(Error::Dimension {
                expected: self.k,
                found: key.len(),
            });
        }
        self.labeler.representative(key)
    }

    /// Every coset representative, in label order.
    pub fn coset_representatives(&self) -> Vec<BitString> {
        (0..1u64 << self.k)
            .map(|m| self.labeler.representative(&BitString::from_u64(self.k, m)).expect("label length k"))
            .collect()
    }

    /// One `x` per syndrome of `H1`: representatives of `F₂ⁿ / C1`.
    pub fn bit_shift_representatives(&self) -> Vec<BitString> {
        shift_representatives(self.c1.parity_check())
    }

    /// One `z` per syndrome of `G2`: representatives of `F₂ⁿ / C2⊥`.
    pub fn phase_shift_representatives(&self) -> Vec<BitString> {
        shift_representatives(self.c2.generator())
    }

    fn check_len(&self, v: &BitString) -> Result<()> {
        if v.len() != self.n() {
            return Err(Error::Dimension {
                expected: self.n(),
                found: v.len(),
            });
        }
        Ok(())
    }

    fn check_member(&self, v: &BitString) -> Result<()> {
        self.check_len(v)?;
        if !self.c1.contains(v)? {
            return Err(Error::Membership(format!("{v} is not a codeword of C1")));
        }
        Ok(())
    }

    /// `|C2|^{-1/2} Σ_{c∈C2} |d ⊕ c⟩`.
    pub fn codeword_amplitudes(&self, d: &BitString) -> Result<DenseState> {
        self.parameterized_codeword(d, &CssParameters::zero(self.n()))
    }

    /// `|C2|^{-1/2} Σ_{w∈C2} (−1)^{w·z} |v + w + x⟩`.
    pub fn parameterized_codeword(&self, v: &BitString, params: &CssParameters) -> Result<DenseState> {
        self.check_member(v)?;
        self.check_len(&params.x)?;
        self.check_len(&params.z)?;
        let n = self.n();
        let amp = (self.c2.codewords().count() as f64).sqrt().recip();
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        for w in self.c2.codewords() {
            let sign = if w.dot(&params.z) { -amp } else { amp };
            let idx = basis_index(&v.xor(&w).xor(&params.x));
            amps[idx] = Complex64::new(sign, 0.0);
        }
        DenseState::from_amplitudes(n, amps)
    }

    /// `H1` rows as Z-type generators with signs `(−1)^{h·x}`, followed by
    /// `G2` rows as X-type generators with signs `(−1)^{g·z}`.
    pub fn stabilizer_generators(&self, params: &CssParameters) -> Vec<PauliProduct> {
        let mut out = Vec::with_capacity(self.n() - self.k);
        for h in self.c1.parity_check().rows() {
            out.push(PauliProduct::z_type(h.clone(), h.dot(&params.x)));
        }
        for g in self.c2.generator().rows() {
            out.push(PauliProduct::x_type(g.clone(), g.dot(&params.z)));
        }
        out
    }

    /// Number of Z-type generators at the front of
    /// [`stabilizer_generators`](Self::stabilizer_generators).
    pub fn num_z_generators(&self) -> usize {
        self.c1.parity_check().num_rows()
    }

    /// Correction for the given relative syndromes: the X part comes from
    /// `C1`'s table and the Z part from `C2⊥`'s table.
    pub fn correct(&self, bit_syndrome: &BitString, phase_syndrome: &BitString) -> Result<PauliProduct> {
        let x = self.bit_table.lookup(bit_syndrome)?.clone();
        let z = self.phase_table.lookup(phase_syndrome)?.clone();
        PauliProduct::from_masks(x, z, false)
    }

    /// Measures every signed generator on `qubits` of `state`. A bit is set
    /// where the outcome is `−1`, so a clean code state gives zero syndromes.
    pub fn measure_syndromes<S: QuantumState, R: Rng + ?Sized>(
        &self,
        state: &mut S,
        qubits: &[usize],
        params: &CssParameters,
        rng: &mut R,
    ) -> (BitString, BitString) {
        let total = state.num_qubits();
        let gens = self.stabilizer_generators(params);
        let outcomes: Vec<bool> = gens
            .iter()
            .map(|g| state.measure_pauli(&g.embed(total, qubits), rng).bit())
            .collect();
        let r = self.num_z_generators();
        (BitString::from_bits(outcomes[..r].iter().copied()), BitString::from_bits(outcomes[r..].iter().copied()))
    }

    /// Prepares `Q_{x,z}(v)` (up to a global sign) on `qubits` of a state
    /// that holds `|0⟩` there, using only Clifford gates.
    pub fn prepare<S: QuantumState>(
        &self,
        state: &mut S,
        qubits: &[usize],
        v: &BitString,
        params: &CssParameters,
    ) -> Result<()> {
        self.check_member(v)?;
        if qubits.len() != self.n() {
            return Err(Error::Dimension {
                expected: self.n(),
                found: qubits.len(),
            });
        }
        let (reduced, pivots) = self.c2.generator().rref();
        for (row, &p) in reduced.rows().iter().zip(&pivots) {
            state.h(qubits[p]);
            for j in row.ones_positions().filter(|&j| j != p) {
                state.cx(qubits[p], qubits[j]);
            }
        }
        for j in v.xor(&params.x).ones_positions() {
            state.x(qubits[j]);
        }
        for j in params.z.ones_positions() {
            state.z(qubits[j]);
        }
        Ok(())
    }

    /// `(1/2ⁿ) Σ_z |ψ_{x,z}⟩⟨ψ_{x,z}|` for `ψ_{x,z} = Q_{x,z}(k′)`, computed
    /// as a literal average over `z` and as the classical mixture
    /// `(1/|C2|) Σ_{w∈C2} |k′+w+x⟩⟨k′+w+x|`.
    pub fn dephase_average(&self, k_prime: &BitString, x: &BitString) -> Result<DephaseReport> {
        let n = self.n();
        if n > DENSITY_QUBIT_LIMIT {
            return Err(Error::BackendLimit {
                qubits: n,
                limit: DENSITY_QUBIT_LIMIT,
            });
        }
        self.check_member(k_prime)?;
        self.check_len(x)?;
        let mut averaged = DensityMatrix::zeros(n)?;
        let weight = 1.0 / (1u64 << n) as f64;
        for zi in 0..1u64 << n {
            let params = CssParameters {
                x: x.clone(),
                z: BitString::from_u64(n, zi),
            };
            averaged.add_pure(&self.parameterized_codeword(k_prime, &params)?, weight);
        }
        let mut mixture = DensityMatrix::zeros(n)?;
        let c2_words: Vec<BitString> = self.c2.codewords().collect();
        let w_weight = 1.0 / c2_words.len() as f64;
        for w in &c2_words {
            mixture.add_basis_projector(&k_prime.xor(w).xor(x), w_weight);
        }
        let max_abs_diff = averaged.max_abs_diff(&mixture)?;
        let report = DephaseReport {
            averaged,
            mixture,
            max_abs_diff,
        };
        if max_abs_diff > DEPHASE_TOLERANCE {
            return Err(Error::Divergence(format!(
                "dephased average and classical mixture differ by {max_abs_diff:e}"
            )));
        }
        Ok(report)
    }
}

pub const DEPHASE_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct DephaseReport {
    pub averaged: DensityMatrix,
    pub mixture: DensityMatrix,
    pub max_abs_diff: f64,
}

/// `Σ_{z∈F₂ⁿ} (−1)^{x·z}` by enumeration.
pub fn phase_sum(x: &BitString) -> i64 {
    let n = x.len();
    assert!(n <= 24, "enumeration over 2^{n} strings");
    (0..1u64 << n)
        .map(|zi| if x.dot(&BitString::from_u64(n, zi)) { -1 } else { 1 })
        .sum()
}

fn basis_index(bits: &BitString) -> usize {
    bits.iter().fold(0usize, |acc, b| (acc << 1) | b as usize)
}

/// For a full-rank `r × n` matrix `M`, one `x` with `M xᵀ = s` for every
/// `s ∈ F₂ʳ`, in syndrome order.
fn shift_representatives(m: &BinaryMatrix) -> Vec<BitString> {
    let r = m.num_rows();
    let solver = RowSolver::new(&m.transpose());
    (0..1u64 << r)
        .map(|s| {
            solver
                .coordinates(&BitString::from_u64(r, s))
                .expect("full-rank matrix reaches every syndrome")
        })
        .collect()
}

/// Steane `[[7,1,3]]`: Hamming `[7,4,3]` over its `[7,3,4]` simplex subcode.
pub fn steane() -> CssCode {
    CssCode::new("steane", catalog::hamming74(), catalog::simplex73()).expect("Steane pair is nested")
}

/// Length-`n` code with `C1 = F₂ⁿ` and `C2` the zero code: no protection,
/// every bit is key.
pub fn trivial(n: usize) -> CssCode {
    CssCode::new(&format!("trivial{n}"), catalog::full_space(n), catalog::zero_code(n)).expect("strictly nested")
}

/// `[[3,1]]` bit-flip code: repetition `[3,1,3]` over the zero code. Corrects
/// one bit error but no phase errors.
pub fn repetition3() -> CssCode {
    CssCode::new("repetition3", catalog::repetition3(), catalog::zero_code(3)).expect("strictly nested")
}

pub fn by_name(name: &str) -> Option<CssCode> {
    match name {
        "steane" => Some(steane()),
        "repetition3" => Some(repetition3()),
        _ => name
            .strip_prefix("trivial")
            .and_then(|s| s.parse().ok())
            .filter(|&n: &usize| n >= 1)
            .map(trivial),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::Tableau;
    use crate::gf2::bits;
    use crate::pauli::Pauli;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const S2: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn rep2_pair() -> CssCode {
        let c1 = catalog::full_space(2);
        let c2 = LinearCode::from_generator(BinaryMatrix::from_strs(2, &["11"]).unwrap(), None).unwrap();
        css_from_pair(c1, c2).unwrap()
    }

    #[test]
    fn steane_parameters() {
        let s = steane();
        assert_eq!((s.n(), s.k(), s.t()), (7, 1, 1));
        assert_eq!(s.stabilizer_generators(&CssParameters::zero(7)).len(), 6);
        assert!(css_from_pair(catalog::hamming74(), catalog::hamming74()).is_err());
        assert!(css_from_pair(catalog::repetition3(), catalog::even_weight(3)).is_err());
    }

    #[test]
    fn ghz_form_and_phase_sign() {
        let c = css_from_pair(catalog::repetition3(), catalog::zero_code(3));
        assert!(c.is_ok());
        let c2 = LinearCode::from_generator(BinaryMatrix::from_strs(3, &["111"]).unwrap(), None).unwrap();
        let c = css_from_pair(catalog::full_space(3), c2).unwrap();
        let s = c.codeword_amplitudes(&bits("000")).unwrap();
        assert!((s.amplitude_of(&bits("000")).re - S2).abs() < 1e-12);
        assert!((s.amplitude_of(&bits("111")).re - S2).abs() < 1e-12);

        let r = rep2_pair();
        let p = CssParameters {
            x: bits("00"),
            z: bits("01"),
        };
        let s = r.parameterized_codeword(&bits("00"), &p).unwrap();
        assert!((s.amplitude_of(&bits("00")).re - S2).abs() < 1e-12);
        assert!((s.amplitude_of(&bits("11")).re + S2).abs() < 1e-12);
    }

    #[test]
    fn membership_is_checked() {
        let r = repetition3();
        assert!(matches!(r.codeword_amplitudes(&bits("100")), Err(Error::Membership(_))));
    }

    #[test]
    fn generators_commute_and_stabilize() {
        let s = steane();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let p = CssParameters::random(7, &mut rng);
            let v = s.c1().random_codeword(&mut rng);
            let state = s.parameterized_codeword(&v, &p).unwrap();
            let gens = s.stabilizer_generators(&p);
            for (i, a) in gens.iter().enumerate() {
                for b in &gens[i + 1..] {
                    assert!(a.commutes_with(b));
                }
                assert!((state.expectation(a) - 1.0).abs() < 1e-10, "{a}");
            }
        }
    }

    #[test]
    fn clifford_preparation_matches_dense_construction() {
        let s = steane();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..8 {
            let p = CssParameters::random(7, &mut rng);
            let v = s.c1().random_codeword(&mut rng);
            let expected = s.parameterized_codeword(&v, &p).unwrap();
            let qubits: Vec<usize> = (0..7).collect();
            let mut d = DenseState::zero(7).unwrap();
            s.prepare(&mut d, &qubits, &v, &p).unwrap();
            assert!((d.fidelity(&expected).unwrap() - 1.0).abs() < 1e-10);
            let mut t = Tableau::zero(7);
            s.prepare(&mut t, &qubits, &v, &p).unwrap();
            assert!((t.to_dense().unwrap().fidelity(&expected).unwrap() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn correction_examples() {
        let s = steane();
        let zero3 = BitString::zeros(3);
        assert!(s.correct(&zero3, &zero3).unwrap().is_identity());
        let mut e = BitString::zeros(7);
        e.set(3, true);
        let syn = s.c1().syndrome(&e).unwrap();
        let c = s.correct(&syn, &zero3).unwrap();
        assert_eq!(c.x_mask(), &e);
        assert!(c.z_mask().is_zero());
        let zsyn = s.c2_dual().syndrome(&e).unwrap();
        let c = s.correct(&syn, &zsyn).unwrap();
        assert_eq!(c.get(3), Pauli::Y);
        assert_eq!(c.weight(), 1);
    }

    #[test]
    fn shift_representatives_hit_every_syndrome() {
        let s = steane();
        let xs = s.bit_shift_representatives();
        assert_eq!(xs.len(), 8);
        for (i, x) in xs.iter().enumerate() {
            assert_eq!(s.c1().syndrome(x).unwrap().to_u64(), i as u64);
        }
        assert_eq!(s.phase_shift_representatives().len(), 8);
    }

    #[test]
    fn dephase_small_example() {
        let r = rep2_pair();
        let rep = r.dephase_average(&bits("00"), &bits("00")).unwrap();
        assert!(rep.max_abs_diff < 1e-12);
        assert!((rep.averaged.entry(0, 0).re - 0.5).abs() < 1e-12);
        assert!((rep.averaged.entry(3, 3).re - 0.5).abs() < 1e-12);
        assert!(rep.averaged.entry(0, 3).norm() < 1e-12);
        assert_eq!(phase_sum(&bits("000")), 8);
        assert_eq!(phase_sum(&bits("1")), 0);
    }

    #[test]
    fn catalog_names() {
        assert_eq!(by_name("steane").unwrap().n(), 7);
        assert_eq!(by_name("trivial4").unwrap().k(), 4);
        assert!(by_name("trivial0").is_none());
        assert!(by_name("nope").is_none());
        assert_eq!(repetition3().t(), 0);
    }
}
