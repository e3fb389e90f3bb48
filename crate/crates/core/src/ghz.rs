//! GHZ-basis labels and the random-hashing verification game.
//!
//! Each GHZ block of `N` qubits is labelled by the eigenvalues of
//! `X^⊗N, Z₁Z₂, …, Z_{N−1}Z_N`; label bit `i` is 1 exactly when the `i`-th
//! sign is `+1`, so the perfect GHZ state is `1…1`. With `n` blocks, party
//! `p` holds qubit `p·n + j` of block `j`.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::backend::{DenseState, QuantumState};
use crate::error::{Error, Result};
use crate::gf2::BitString;
use crate::pauli::{Pauli, PauliProduct};

/// Sign pattern to label: `+1 ↦ 1`, `−1 ↦ 0`.
pub fn bdsw_encode(signs: &[i8]) -> Result<BitString> {
    if signs.iter().any(|&s| s != 1 && s != -1) {
        return Err(Error::Domain(format!("signs must be ±1, got {signs:?}")));
    }
    Ok(BitString::from_bits(signs.iter().map(|&s| s == 1)))
}

pub fn bdsw_decode(label: &BitString) -> Vec<i8> {
    label.iter().map(|b| if b { 1 } else { -1 }).collect()
}

/// `X^⊗N` followed by the nearest-neighbour `Z Z` checks.
pub fn ghz_generators(parties: usize) -> Vec<PauliProduct> {
    let mut out = vec![PauliProduct::on(parties, &(0..parties).collect::<Vec<_>>(), Pauli::X)];
    for i in 0..parties.saturating_sub(1) {
        out.push(PauliProduct::on(parties, &[i, i + 1], Pauli::Z));
    }
    out
}

/// Qubit indices of block `j` in party-major order.
pub fn block_qubits(parties: usize, blocks: usize, j: usize) -> Vec<usize> {
    (0..parties).map(|p| p * blocks + j).collect()
}

/// Concatenated labels of `blocks` GHZ blocks.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BdswString {
    parties: usize,
    bits: BitString,
}

impl BdswString {
    pub fn new(parties: usize, bits: BitString) -> Result<Self> {
        if parties < 2 || !bits.len().is_multiple_of(parties) {
            return Err(Error::Dimension {
                expected: parties,
                found: bits.len(),
            });
        }
        Ok(BdswString { parties, bits })
    }

    pub fn from_blocks(parties: usize, labels: &[BitString]) -> Result<Self> {
        let bits = labels
            .iter()
            .fold(BitString::zeros(0), |acc, l| acc.concat(l));
        Self::new(parties, bits)
    }

    /// All blocks perfect.
    pub fn perfect(parties: usize, blocks: usize) -> Self {
        BdswString {
            parties,
            bits: BitString::ones(parties * blocks),
        }
    }

    pub fn parties(&self) -> usize {
        self.parties
    }

    pub fn num_blocks(&self) -> usize {
        self.bits.len() / self.parties
    }

    pub fn bits(&self) -> &BitString {
        &self.bits
    }

    pub fn block(&self, j: usize) -> BitString {
        self.bits.slice(j * self.parties, self.parties)
    }

    pub fn is_perfect(&self) -> bool {
        self.bits.weight() == self.bits.len()
    }
}

impl fmt::Display for BdswString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for j in 0..self.num_blocks() {
            if j > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}", self.block(j))?;
        }
        Ok(())
    }
}

impl fmt::Debug for BdswString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BdswString({self})")
    }
}

/// Measures every block in the GHZ basis. Qubits past `parties · blocks`
/// are left alone (an adversary's ancilla, for instance).
pub fn measure_r<S: QuantumState, R: Rng + ?Sized>(
    state: &mut S,
    parties: usize,
    blocks: usize,
    rng: &mut R,
) -> Result<BdswString> {
    let total = state.num_qubits();
    if parties < 2 || parties * blocks > total {
        return Err(Error::Dimension {
            expected: parties * blocks,
            found: total,
        });
    }
    let gens = ghz_generators(parties);
    let mut labels = Vec::with_capacity(blocks);
    for j in 0..blocks {
        let qubits = block_qubits(parties, blocks, j);
        let signs: Vec<i8> = gens
            .iter()
            .map(|g| state.measure_pauli(&g.embed(total, &qubits), rng).eigenvalue)
            .collect();
        labels.push(bdsw_encode(&signs)?);
    }
    BdswString::from_blocks(parties, &labels)
}

/// `s · r mod 2`.
pub fn parity_answer(r: &BdswString, s: &BitString) -> Result<bool> {
    r.bits.try_dot(s)
}

/// How parity questions are drawn.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum QuestionDistribution {
    /// Every index string, the empty subset included. A wrong label then
    /// survives each question with probability exactly ½.
    #[default]
    Uniform,
    /// Non-zero index strings only.
    NonZero,
}

impl QuestionDistribution {
    pub fn sample<R: Rng + ?Sized>(&self, len: usize, rng: &mut R) -> BitString {
        loop {
            let s = BitString::random(len, rng);
            if *self == QuestionDistribution::Uniform || !s.is_zero() || len == 0 {
                return s;
            }
        }
    }

    fn admits(&self, s: &BitString) -> bool {
        *self == QuestionDistribution::Uniform || !s.is_zero()
    }
}

/// What the adversary hands over for verification.
#[derive(Clone, Debug)]
pub enum AdversaryStrategy {
    Honest { parties: usize, blocks: usize },
    FixedString(BdswString),
    /// Weighted labels; weights must sum to 1.
    ClassicalMixture(Vec<(f64, BdswString)>),
    /// Arbitrary pure state on `parties · blocks` qubits plus any number of
    /// trailing ancilla qubits.
    GeneralState {
        parties: usize,
        blocks: usize,
        state: DenseState,
    },
}

impl AdversaryStrategy {
    pub fn dims(&self) -> (usize, usize) {
        match self {
            AdversaryStrategy::Honest { parties, blocks } => (*parties, *blocks),
            AdversaryStrategy::FixedString(r) => (r.parties(), r.num_blocks()),
            AdversaryStrategy::ClassicalMixture(m) => m.first().map_or((0, 0), |(_, r)| (r.parties(), r.num_blocks())),
            AdversaryStrategy::GeneralState { parties, blocks, .. } => (*parties, *blocks),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (parties, blocks) = self.dims();
        if parties < 2 || blocks == 0 {
            return Err(Error::Domain("strategy needs at least two parties and one block".into()));
        }
        match self {
            AdversaryStrategy::ClassicalMixture(m) => {
                let total: f64 = m.iter().map(|(w, _)| *w).sum();
                if m.iter().any(|(w, _)| *w < 0.0) || (total - 1.0).abs() > 1e-9 {
                    return Err(Error::Domain(format!("mixture weights must be a distribution (sum {total})")));
                }
                if m.iter().any(|(_, r)| (r.parties(), r.num_blocks()) != (parties, blocks)) {
                    return Err(Error::Domain("mixture labels differ in shape".into()));
                }
            }
            AdversaryStrategy::GeneralState { state, .. } => {
                if state.num_qubits() < parties * blocks {
                    return Err(Error::Dimension {
                        expected: parties * blocks,
                        found: state.num_qubits(),
                    });
                }
                if (state.norm_sqr() - 1.0).abs() > 1e-10 {
                    return Err(Error::Domain("general state is not normalized".into()));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// The label the verifier sees: sampled from a mixture, or obtained by
    /// measuring a general state in the GHZ basis.
    pub fn reveal<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<BdswString> {
        match self {
            AdversaryStrategy::Honest { parties, blocks } => Ok(BdswString::perfect(*parties, *blocks)),
            AdversaryStrategy::FixedString(r) => Ok(r.clone()),
            AdversaryStrategy::ClassicalMixture(m) => {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                for (w, r) in m {
                    acc += w;
                    if u < acc {
                        return Ok(r.clone());
                    }
                }
                Ok(m.last().expect("non-empty mixture").1.clone())
            }
            AdversaryStrategy::GeneralState { parties, blocks, state } => {
                let mut s = state.clone();
                measure_r(&mut s, *parties, *blocks, rng)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameOutcome {
    pub accepted: bool,
    /// Accepted although the label is not all-ones.
    pub cheated: bool,
    pub label: BdswString,
}

/// Asks `m` parity questions about the revealed label and accepts iff every
/// answer equals the parity of the all-ones string.
pub fn run_verification_game<R: Rng + ?Sized>(
    strategy: &AdversaryStrategy,
    m: usize,
    distribution: QuestionDistribution,
    rng: &mut R,
) -> Result<GameOutcome> {
    if m == 0 {
        return Err(Error::Domain("at least one question is required".into()));
    }
    strategy.validate()?;
    let label = strategy.reveal(rng)?;
    let len = label.bits().len();
    let reference = BitString::ones(len);
    let mut accepted = true;
    for _ in 0..m {
        let s = distribution.sample(len, rng);
        if parity_answer(&label, &s)? != reference.dot(&s) {
            accepted = false;
        }
    }
    Ok(GameOutcome {
        accepted,
        cheated: accepted && !label.is_perfect(),
        label,
    })
}

/// Probability that `label` survives one question, by enumerating every
/// admissible index string.
pub fn single_question_survival(label: &BdswString, distribution: QuestionDistribution) -> f64 {
    let len = label.bits().len();
    assert!(len <= 24, "enumeration over 2^{len} index strings");
    let diff = label.bits().xor(&BitString::ones(len));
    let (mut pass, mut total) = (0u64, 0u64);
    for si in 0..1u64 << len {
        let s = BitString::from_u64(len, si);
        if !distribution.admits(&s) {
            continue;
        }
        total += 1;
        if !diff.dot(&s) {
            pass += 1;
        }
    }
    pass as f64 / total as f64
}

/// Exact acceptance probability after `m` independent questions.
pub fn exact_survival(label: &BdswString, m: usize, distribution: QuestionDistribution) -> f64 {
    single_question_survival(label, distribution).powi(m as i32)
}

/// Exact probability distribution of the GHZ-basis label of a dense state,
/// obtained by undoing the GHZ preparation circuit on every block and
/// reading computational-basis probabilities (ancilla summed out).
pub fn collapse_distribution(state: &DenseState, parties: usize, blocks: usize) -> Result<Vec<(f64, BdswString)>> {
    let total = state.num_qubits();
    if parties < 2 || parties * blocks > total {
        return Err(Error::Dimension {
            expected: parties * blocks,
            found: total,
        });
    }
    let mut s = state.clone();
    for j in 0..blocks {
        let q = block_qubits(parties, blocks, j);
        for p in (1..parties).rev() {
            s.cx(q[0], q[p]);
        }
        s.h(q[0]);
    }
    let len = parties * blocks;
    let mut probs = vec![0.0; 1 << len];
    for (idx, a) in s.amplitudes().iter().enumerate() {
        let bits = s.bits_of(idx);
        let mut key = 0usize;
        for j in 0..blocks {
            let q = block_qubits(parties, blocks, j);
            // Qubit 0 holds the X sign; the rest hold the low GHZ string.
            let mut signs = vec![if bits.get(q[0]) { -1 } else { 1 }];
            let mut prev = false;
            for &qq in &q[1..] {
                let cur = bits.get(qq);
                signs.push(if cur ^ prev { -1 } else { 1 });
                prev = cur;
            }
            for (i, sgn) in signs.into_iter().enumerate() {
                if sgn == 1 {
                    key |= 1 << (j * parties + i);
                }
            }
        }
        probs[key] += a.norm_sqr();
    }
    Ok(probs
        .into_iter()
        .enumerate()
        .filter(|(_, p)| *p > 1e-15)
        .map(|(k, p)| {
            (
                p,
                BdswString::new(parties, BitString::from_u64(len, k as u64)).expect("shape checked"),
            )
        })
        .collect())
}

/// `⟨ψ|𝒫|ψ⟩` with `𝒫` the projector onto the all-perfect GHZ product,
/// computed by projecting onto each generator's `+1` eigenspace.
pub fn ghz_overlap(state: &DenseState, parties: usize, blocks: usize) -> Result<f64> {
    let total = state.num_qubits();
    if parties < 2 || parties * blocks > total {
        return Err(Error::Dimension {
            expected: parties * blocks,
            found: total,
        });
    }
    let gens = ghz_generators(parties);
    let mut s = state.clone();
    for j in 0..blocks {
        let q = block_qubits(parties, blocks, j);
        for g in &gens {
            s.project_unnormalized(&g.embed(total, &q), 1);
        }
    }
    Ok(s.norm_sqr())
}

/// Overlap of a weighted ensemble of pure states.
pub fn ghz_overlap_mixture(ensemble: &[(f64, DenseState)], parties: usize, blocks: usize) -> Result<f64> {
    ensemble
        .iter()
        .map(|(w, s)| ghz_overlap(s, parties, blocks).map(|o| w * o))
        .sum()
}

/// `⟨𝒮_s⟩ = Pr[s·r = 1]`, computed without measuring: `(−1)^{s·r}` is the
/// product of `−g` over the generators selected by `s`.
pub fn parity_expectation(state: &DenseState, parties: usize, blocks: usize, s: &BitString) -> Result<f64> {
    let total = state.num_qubits();
    if s.len() != parties * blocks {
        return Err(Error::Dimension {
            expected: parties * blocks,
            found: s.len(),
        });
    }
    let gens = ghz_generators(parties);
    let mut product = PauliProduct::identity(total);
    for b in s.ones_positions() {
        let (j, i) = (b / parties, b % parties);
        let g = gens[i].embed(total, &block_qubits(parties, blocks, j));
        product = product.compose(&g);
    }
    let sign = if s.weight() % 2 == 1 { -1.0 } else { 1.0 };
    Ok((1.0 - sign * state.expectation(&product)) / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::{ghz_basis_state, prepare_ghz_blocks};
    use crate::gf2::bits;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn table_rows() {
        assert_eq!(bdsw_encode(&[1, 1, 1]).unwrap(), bits("111"));
        assert_eq!(bdsw_encode(&[-1, 1, -1]).unwrap(), bits("010"));
        assert_eq!(bdsw_encode(&[-1, -1, -1]).unwrap(), bits("000"));
        assert!(bdsw_encode(&[1, 0, 1]).is_err());
        for n in 2..=5 {
            for v in 0..1u64 << n {
                let l = BitString::from_u64(n, v);
                assert_eq!(bdsw_encode(&bdsw_decode(&l)).unwrap(), l);
            }
        }
    }

    #[test]
    fn parity_example() {
        let r = BdswString::new(7, bits("1101001")).unwrap();
        assert!(parity_answer(&r, &bits("0001100")).unwrap());
        assert!(!parity_answer(&r, &bits("0000000")).unwrap());
        assert!(parity_answer(&r, &bits("01")).is_err());
    }

    #[test]
    fn perfect_blocks_measure_all_ones() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut s: DenseState = prepare_ghz_blocks(3, 2).unwrap();
        let r = measure_r(&mut s, 3, 2, &mut rng).unwrap();
        assert!(r.is_perfect());
        assert!((ghz_overlap(&prepare_ghz_blocks(3, 2).unwrap(), 3, 2).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn x_error_flips_adjacent_checks() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut s: DenseState = prepare_ghz_blocks(3, 1).unwrap();
        s.x(1);
        let r = measure_r(&mut s, 3, 1, &mut rng).unwrap();
        assert_eq!(r.bits(), &bits("100"));
    }

    #[test]
    fn collapse_of_basis_states_is_a_point_mass() {
        for v in 0..8u64 {
            let label = BitString::from_u64(3, v);
            let state = ghz_basis_state(&bdsw_decode(&label), FRAC_PI_4).unwrap();
            let dist = collapse_distribution(&state, 3, 1).unwrap();
            assert_eq!(dist.len(), 1);
            assert!((dist[0].0 - 1.0).abs() < 1e-12);
            assert_eq!(dist[0].1.bits(), &label);
        }
    }

    #[test]
    fn survival_exact() {
        let wrong = BdswString::new(3, bits("110111")).unwrap();
        assert!((exact_survival(&wrong, 4, QuestionDistribution::Uniform) - 1.0 / 16.0).abs() < 1e-15);
        let honest = BdswString::perfect(3, 2);
        assert_eq!(exact_survival(&honest, 4, QuestionDistribution::NonZero), 1.0);
        // 31 of 63 non-zero strings miss a single wrong bit.
        let p = single_question_survival(&wrong, QuestionDistribution::NonZero);
        assert!((p - 31.0 / 63.0).abs() < 1e-15);
    }

    #[test]
    fn honest_game_always_accepts() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = AdversaryStrategy::Honest { parties: 4, blocks: 2 };
        for _ in 0..100 {
            let o = run_verification_game(&h, 5, QuestionDistribution::Uniform, &mut rng).unwrap();
            assert!(o.accepted && !o.cheated);
        }
        assert!(run_verification_game(&h, 0, QuestionDistribution::Uniform, &mut rng).is_err());
    }

    #[test]
    fn overlap_of_orthogonal_block_and_mixture() {
        let good: DenseState = prepare_ghz_blocks(3, 1).unwrap();
        let bad = ghz_basis_state(&[1, -1, 1], FRAC_PI_4).unwrap();
        assert!(ghz_overlap(&bad, 3, 1).unwrap() < 1e-12);
        let q = 0.3;
        let o = ghz_overlap_mixture(&[(q, good), (1.0 - q, bad)], 3, 1).unwrap();
        assert!((o - q).abs() < 1e-12);
    }
}
