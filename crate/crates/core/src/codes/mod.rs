//! Binary linear `[n, k, d]` codes: encoding, syndromes, table decoding,
//! duals, nesting checks and coset labels.

pub mod catalog;
pub mod file;

use std::collections::HashMap;
use std::fmt;

use rand::{Rng, SeedableRng};

use crate::error::{Error, Result};
use crate::gf2::{BinaryMatrix, BitString, RowSolver};

/// Largest dimension for which the minimum distance is found by enumerating
/// every codeword.
pub const EXACT_DISTANCE_MAX_K: usize = 20;

const DISTANCE_SAMPLES: usize = 4096;

/// An `[n, k, d]` binary linear code with generator and parity-check matrices.
#[derive(Clone)]
pub struct LinearCode {
    n: usize,
    k: usize,
    d: Option<usize>,
    t: usize,
    generator: BinaryMatrix,
    parity_check: BinaryMatrix,
    solver: RowSolver,
}

impl LinearCode {
    /// Builds a code from generator rows, deriving the parity check by
    /// elimination. Rows must be independent.
    pub fn from_generator(generator: BinaryMatrix, declared_d: Option<usize>) -> Result<Self> {
        let parity_check = generator.null_space();
        Self::with_parity_check(generator, parity_check, declared_d)
    }

    /// Builds a code from explicit generator and parity-check matrices,
    /// checking `G·Hᵀ = 0` and that the ranks add up to `n`.
    pub fn with_parity_check(
        generator: BinaryMatrix,
        parity_check: BinaryMatrix,
        declared_d: Option<usize>,
    ) -> Result<Self> {
        let n = generator.num_cols();
        if n == 0 {
            return Err(Error::Construction("code length must be positive".into()));
        }
        if parity_check.num_cols() != n {
            return Err(Error::Dimension {
                expected: n,
                found: parity_check.num_cols(),
            });
        }
        let k = generator.num_rows();
        if generator.rank() != k {
            return Err(Error::Construction(format!(
                "generator rows are dependent (rank {} < {k})",
                generator.rank()
            )));
        }
        if parity_check.num_rows() != n - k || parity_check.rank() != n - k {
            return Err(Error::Construction(format!(
                "parity check must have {} independent rows, has {} rows of rank {}",
                n - k,
                parity_check.num_rows(),
                parity_check.rank()
            )));
        }
        if !generator.mul_transpose(&parity_check)?.is_zero() {
            return Err(Error::Construction("generator and parity check are not orthogonal".into()));
        }
        let solver = RowSolver::new(&generator);
        let mut code = LinearCode {
            n,
            k,
            d: None,
            t: 0,
            generator,
            parity_check,
            solver,
        };
        code.d = code.resolve_distance(declared_d)?;
        code.t = code.d.map_or(0, |d| d.saturating_sub(1) / 2);
        Ok(code)
    }

    fn resolve_distance(&self, declared: Option<usize>) -> Result<Option<usize>> {
        if self.k == 0 {
            return Ok(None);
        }
        if self.k <= EXACT_DISTANCE_MAX_K {
            let exact = self.brute_force_distance();
            if let Some(d) = declared {
                if d != exact {
                    return Err(Error::Construction(format!(
                        "declared distance {d} but the code has minimum distance {exact}"
                    )));
                }
            }
            return Ok(Some(exact));
        }
        // Unknown distance means radius 0 until one is declared.
        let Some(d) = declared else {
            return Ok(None);
        };
        // Probabilistic sanity check only; exact distance is out of reach.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
        for _ in 0..DISTANCE_SAMPLES {
            let c = self.random_codeword(&mut rng);
            if !c.is_zero() && c.weight() < d {
                return Err(Error::Construction(format!(
                    "found codeword of weight {} below declared distance {d}",
                    c.weight()
                )));
            }
        }
        Ok(Some(d))
    }

    fn brute_force_distance(&self) -> usize {
        (1u64..(1u64 << self.k))
            .map(|m| {
                self.generator
                    .vec_mul(&BitString::from_u64(self.k, m))
                    .expect("message length matches k")
                    .weight()
            })
            .min()
            .unwrap_or(self.n + 1)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Minimum distance; `None` for the zero code or an undeclared large code.
    pub fn d(&self) -> Option<usize> {
        self.d
    }

    /// Bit-flip correction radius `⌊(d−1)/2⌋`.
    pub fn t(&self) -> usize {
        self.t
    }

    pub fn generator(&self) -> &BinaryMatrix {
        &self.generator
    }

    pub fn parity_check(&self) -> &BinaryMatrix {
        &self.parity_check
    }

    pub fn encode(&self, message: &BitString) -> Result<BitString> {
        if message.len() != self.k {
            return Err(Error::Dimension {
                expected: self.k,
                found: message.len(),
            });
        }
        self.generator.vec_mul(message)
    }

    /// The message that encodes to `codeword`, if it is one.
    pub fn unencode(&self, codeword: &BitString) -> Result<BitString> {
        self.check_len(codeword)?;
        self.solver
            .coordinates(codeword)
            .ok_or_else(|| Error::Membership(codeword.to_string()))
    }

    pub fn syndrome(&self, word: &BitString) -> Result<BitString> {
        self.check_len(word)?;
        self.parity_check.mul_vec(word)
    }

    pub fn contains(&self, word: &BitString) -> Result<bool> {
        Ok(self.syndrome(word)?.is_zero())
    }

    fn check_len(&self, word: &BitString) -> Result<()> {
        if word.len() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                found: word.len(),
            });
        }
        Ok(())
    }

    /// Dual code: generator `H`, parity check `G`.
    pub fn dual(&self) -> LinearCode {
        LinearCode::with_parity_check(self.parity_check.clone(), self.generator.clone(), None)
            .expect("dual of a valid code is valid")
    }

    /// Uniform codeword: a uniform message pushed through the generator.
    pub fn random_codeword<R: Rng + ?Sized>(&self, rng: &mut R) -> BitString {
        let m = BitString::random(self.k, rng);
        self.generator.vec_mul(&m).expect("message length matches k")
    }

    /// Every codeword in message order. Only sensible for small `k`.
    pub fn codewords(&self) -> impl Iterator<Item = BitString> + '_ {
        assert!(self.k <= EXACT_DISTANCE_MAX_K, "refusing to enumerate 2^{} codewords", self.k);
        (0u64..(1u64 << self.k)).map(move |m| {
            self.generator
                .vec_mul(&BitString::from_u64(self.k, m))
                .expect("message length matches k")
        })
    }

    /// Same set of codewords, regardless of basis.
    pub fn same_code(&self, other: &LinearCode) -> bool {
        self.n == other.n
            && self.k == other.k
            && other
                .generator
                .rows()
                .iter()
                .all(|r| self.contains(r).unwrap_or(false))
    }

    pub fn syndrome_table(&self) -> SyndromeTable {
        SyndromeTable::build(self)
    }

    /// Syndrome decoding against a table built for this code.
    pub fn decode(&self, table: &SyndromeTable, word: &BitString) -> Result<(BitString, BitString)> {
        let s = self.syndrome(word)?;
        let error = table.lookup(&s)?.clone();
        Ok((word.xor(&error), error))
    }
}

impl fmt::Debug for LinearCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LinearCode[{}, {}", self.n, self.k)?;
        if let Some(d) = self.d {
            write!(f, ", {d}")?;
        }
        write!(f, "]")
    }
}

/// Map from syndrome to the minimum-weight error producing it, for every
/// error of weight at most the code's radius.
#[derive(Clone, Debug)]
pub struct SyndromeTable {
    radius: usize,
    entries: HashMap<BitString, BitString>,
}

impl SyndromeTable {
    fn build(code: &LinearCode) -> Self {
        let n = code.n();
        let radius = code.t();
        let mut entries = HashMap::new();
        for weight in 0..=radius.min(n) {
            for_each_combination(n, weight, &mut |positions| {
                let mut e = BitString::zeros(n);
                for &p in positions {
                    e.set(p, true);
                }
                let s = code.syndrome(&e).expect("length matches");
                entries.entry(s).or_insert(e);
            });
        }
        SyndromeTable { radius, entries }
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn lookup(&self, syndrome: &BitString) -> Result<&BitString> {
        self.entries.get(syndrome).ok_or_else(|| Error::DecodeFailure {
            syndrome: syndrome.to_string(),
            radius: self.radius,
        })
    }
}

/// Calls `f` with every sorted `k`-subset of `0..n`.
pub(crate) fn for_each_combination(n: usize, k: usize, f: &mut dyn FnMut(&[usize])) {
    fn rec(start: usize, n: usize, k: usize, acc: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if acc.len() == k {
            f(acc);
            return;
        }
        let remaining = k - acc.len();
        for i in start..=n.saturating_sub(remaining) {
            if n - i < remaining {
                break;
            }
            acc.push(i);
            rec(i + 1, n, k, acc, f);
            acc.pop();
        }
    }
    if k > n {
        return;
    }
    rec(0, n, k, &mut Vec::with_capacity(k), f);
}

/// Outcome of a nesting check `C2 ⊆ C1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Nesting {
    pub subset: bool,
    pub strict: bool,
}

impl Nesting {
    pub fn is_strict_subset(&self) -> bool {
        self.subset && self.strict
    }
}

/// Checks that every generator row of `c2` has zero syndrome under `c1`.
pub fn validate_nested(c1: &LinearCode, c2: &LinearCode) -> Result<Nesting> {
    if c1.n() != c2.n() {
        return Err(Error::Dimension {
            expected: c1.n(),
            found: c2.n(),
        });
    }
    let mut subset = true;
    for row in c2.generator().rows() {
        if !c1.contains(row)? {
            subset = false;
            break;
        }
    }
    Ok(Nesting {
        subset,
        strict: subset && c2.k() < c1.k(),
    })
}

/// Canonical labels for the cosets of `C2` inside `C1`.
///
/// The coset basis is built by walking the rows of `G1` in order and keeping
/// each row that is independent of `G2` plus the rows kept so far. A label is
/// the coordinate vector of `u` along that basis, after discarding the `C2`
/// component.
#[derive(Clone, Debug)]
pub struct CosetLabeler {
    n: usize,
    k2: usize,
    coset_basis: BinaryMatrix,
    solver: RowSolver,
}

impl CosetLabeler {
    pub fn new(c1: &LinearCode, c2: &LinearCode) -> Result<Self> {
        let nesting = validate_nested(c1, c2)?;
        if !nesting.subset {
            return Err(Error::Nesting("C2 is not contained in C1".into()));
        }
        let n = c1.n();
        let mut stacked: Vec<BitString> = c2.generator().rows().to_vec();
        let mut rank = stacked.len();
        let mut coset_rows = Vec::new();
        for row in c1.generator().rows() {
            let mut candidate = stacked.clone();
            candidate.push(row.clone());
            let m = BinaryMatrix::from_rows(n, candidate.clone())?;
            if m.rank() > rank {
                stacked = candidate;
                rank += 1;
                coset_rows.push(row.clone());
            }
        }
        let solver = RowSolver::new(&BinaryMatrix::from_rows(n, stacked)?);
        Ok(CosetLabeler {
            n,
            k2: c2.k(),
            coset_basis: BinaryMatrix::from_rows(n, coset_rows)?,
            solver,
        })
    }

    /// Number of label bits, `k1 − k2`.
    pub fn label_len(&self) -> usize {
        self.coset_basis.num_rows()
    }

    pub fn coset_basis(&self) -> &BinaryMatrix {
        &self.coset_basis
    }

    pub fn label(&self, u: &BitString) -> Result<BitString> {
        if u.len() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                found: u.len(),
            });
        }
        let coords = self
            .solver
            .coordinates(u)
            .ok_or_else(|| Error::Membership(u.to_string()))?;
        Ok(coords.slice(self.k2, self.label_len()))
    }

    /// The coset representative `label · basis`.
    pub fn representative(&self, label: &BitString) -> Result<BitString> {
        self.coset_basis.vec_mul(label)
    }
}

/// One-shot coset label of `u ∈ C1` in `C1/C2`.
pub fn coset_label(c1: &LinearCode, c2: &LinearCode, u: &BitString) -> Result<BitString> {
    CosetLabeler::new(c1, c2)?.label(u)
}

#[cfg(test)]
mod tests {
    use super::catalog;
    use super::*;
    use crate::gf2::bits;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn repetition_encode() {
        let rep = catalog::repetition3();
        assert_eq!(rep.encode(&bits("1")).unwrap(), bits("111"));
        assert_eq!(rep.encode(&bits("0")).unwrap(), bits("000"));
        assert!(matches!(rep.encode(&bits("10")), Err(Error::Dimension { .. })));
    }

    #[test]
    fn hamming_first_generator_row() {
        let h = catalog::hamming74();
        assert_eq!(h.encode(&bits("1000")).unwrap(), h.generator().row(0).clone());
        assert_eq!(h.encode(&bits("1000")).unwrap(), bits("1000110"));
        assert_eq!((h.n(), h.k(), h.d(), h.t()), (7, 4, Some(3), 1));
    }

    #[test]
    fn repetition_syndrome_of_110_is_nonzero() {
        let rep = catalog::repetition3();
        // H = ((1 1 0), (0 1 1)) gives (0, 1) for 110.
        assert_eq!(rep.syndrome(&bits("110")).unwrap(), bits("01"));
        assert!(rep.syndrome(&bits("1101")).is_err());
    }

    #[test]
    fn hamming_weight_one_syndromes_distinct() {
        let h = catalog::hamming74();
        let mut seen = std::collections::HashSet::new();
        for i in 0..7 {
            let s = h.syndrome(&BitString::unit(7, i)).unwrap();
            assert!(!s.is_zero());
            assert!(seen.insert(s));
        }
        assert_eq!(seen.len(), 7);
    }

    #[test]
    fn repetition_decodes_011() {
        let rep = catalog::repetition3();
        let table = rep.syndrome_table();
        let (c, e) = rep.decode(&table, &bits("011")).unwrap();
        assert_eq!(c, bits("111"));
        assert_eq!(e, bits("100"));
        let (c, e) = rep.decode(&table, &bits("000")).unwrap();
        assert_eq!((c, e), (bits("000"), bits("000")));
    }

    #[test]
    fn hamming_exhaustive_single_flip_decode() {
        let h = catalog::hamming74();
        let table = h.syndrome_table();
        for c in h.codewords() {
            for i in 0..7 {
                let word = c.xor(&BitString::unit(7, i));
                let (dec, err) = h.decode(&table, &word).unwrap();
                assert_eq!(dec, c);
                assert_eq!(err, BitString::unit(7, i));
            }
        }
    }

    #[test]
    fn decode_failure_outside_table() {
        // [4,1,4] repetition: t = 1, syndromes of weight-2 errors are not in the table.
        let rep4 = catalog::repetition(4);
        let table = rep4.syndrome_table();
        assert_eq!(table.len(), 5);
        let err = rep4.decode(&table, &bits("1100")).unwrap_err();
        assert!(matches!(err, Error::DecodeFailure { .. }));
    }

    #[test]
    fn duals() {
        let rep = catalog::repetition3();
        let dual = rep.dual();
        assert_eq!((dual.n(), dual.k()), (3, 2));
        assert!(dual.same_code(&catalog::even_weight(3)));
        assert!(dual.dual().same_code(&rep));
        let h = catalog::hamming74();
        let simplex = h.dual();
        assert!(simplex.same_code(&catalog::simplex73()));
        assert_eq!(simplex.d(), Some(4));
        assert!(h.generator().mul_transpose(simplex.generator()).unwrap().is_zero());
    }

    #[test]
    fn nesting_checks() {
        let h = catalog::hamming74();
        let s = catalog::simplex73();
        assert_eq!(validate_nested(&h, &s).unwrap(), Nesting { subset: true, strict: true });
        let same = validate_nested(&h, &h).unwrap();
        assert!(same.subset && !same.strict);
        let zero = catalog::zero_code(7);
        let z = validate_nested(&h, &zero).unwrap();
        assert!(z.subset && z.strict);
        assert!(!validate_nested(&s, &h).unwrap().subset);
        assert!(validate_nested(&h, &catalog::repetition3()).is_err());
    }

    #[test]
    fn coset_labels_small_pair() {
        // C1 = span{111, 011} = {000, 111, 011, 100}; C2 = repetition.
        let c1 = LinearCode::from_generator(BinaryMatrix::from_strs(3, &["111", "011"]).unwrap(), None).unwrap();
        let c2 = catalog::repetition3();
        let labeler = CosetLabeler::new(&c1, &c2).unwrap();
        assert_eq!(labeler.label_len(), 1);
        let label = |s: &str| labeler.label(&bits(s)).unwrap();
        assert_eq!(label("000"), bits("0"));
        assert_eq!(label("111"), bits("0"));
        assert_eq!(label("011"), bits("1"));
        assert_eq!(label("100"), bits("1"));
        assert!(matches!(labeler.label(&bits("110")), Err(Error::Membership(_))));
        assert!(matches!(
            CosetLabeler::new(&c2, &c1),
            Err(Error::Nesting(_))
        ));
    }

    #[test]
    fn random_codeword_determinism_and_support() {
        let rep = catalog::repetition3();
        let mut a = ChaCha8Rng::seed_from_u64(3);
        let mut b = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let x = rep.random_codeword(&mut a);
            assert!(x == bits("000") || x == bits("111"));
            assert_eq!(x, rep.random_codeword(&mut b));
        }
    }

    #[test]
    fn random_codeword_uniform_chi_square() {
        // 16 cells, 10^4 draws; chi-square mean 15, sd sqrt(30).
        let h = catalog::hamming74();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut counts = HashMap::new();
        let draws = 10_000;
        for _ in 0..draws {
            *counts.entry(h.random_codeword(&mut rng)).or_insert(0usize) += 1;
        }
        assert_eq!(counts.len(), 16);
        let expected = draws as f64 / 16.0;
        let chi2: f64 = counts.values().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        assert!(chi2 < 15.0 + 5.0 * 30f64.sqrt(), "chi2 = {chi2}");
    }

    #[test]
    fn rejects_bad_constructions() {
        let dep = BinaryMatrix::from_strs(3, &["110", "110"]).unwrap();
        assert!(LinearCode::from_generator(dep, None).is_err());
        let g = BinaryMatrix::from_strs(3, &["111"]).unwrap();
        assert!(LinearCode::from_generator(g.clone(), Some(2)).is_err());
        let bad_h = BinaryMatrix::from_strs(3, &["100", "010"]).unwrap();
        assert!(LinearCode::with_parity_check(g, bad_h, None).is_err());
    }

    #[test]
    fn combinations_count() {
        let mut count = 0;
        for_each_combination(7, 3, &mut |_| count += 1);
        assert_eq!(count, 35);
        let mut zero = 0;
        for_each_combination(4, 0, &mut |c| {
            assert!(c.is_empty());
            zero += 1
        });
        assert_eq!(zero, 1);
    }
}
