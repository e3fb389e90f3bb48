//! What a receiver holds in the CSS protocol, once `z` is averaged out, is
//! the classical mixture the prepare-and-measure protocol sends. This
//! module checks that on explicit density matrices and on sampled keys.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::backend::{DensityMatrix, QuantumState};
use crate::css::{CssCode, CssParameters, DEPHASE_TOLERANCE};
use crate::error::{Error, Result};
use crate::gf2::BitString;
use crate::pauli::PauliProduct;

#[derive(Clone, Debug)]
pub struct EquivalenceConfig {
    pub code: CssCode,
    pub key: BitString,
    pub x: BitString,
    /// Channel error applied to the codeword before the receiver acts.
    pub error: PauliProduct,
    pub seed: u64,
    /// Shift the classical mixture by one bit, which must break agreement.
    pub mutate: bool,
}

impl EquivalenceConfig {
    pub fn new(code: CssCode, key: BitString, x: BitString) -> Self {
        let n = code.n();
        EquivalenceConfig {
            code,
            key,
            x,
            error: PauliProduct::identity(n),
            seed: 0,
            mutate: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub max_abs_diff: f64,
    pub css_key: BitString,
    pub pm_key: BitString,
    pub keys_equal: bool,
    /// Density matrices agree within tolerance and the keys match.
    pub passed: bool,
}

pub fn compare_protocol_equivalence(config: &EquivalenceConfig) -> Result<EquivalenceReport> {
    let code = &config.code;
    let n = code.n();
    if n > 6 {
        return Err(Error::Domain(format!("equivalence check supports n ≤ 6, got {n}")));
    }
    if config.x.len() != n || config.error.num_qubits() != n {
        return Err(Error::Dimension {
            expected: n,
            found: if config.x.len() != n { config.x.len() } else { config.error.num_qubits() },
        });
    }
    let v = code.representative(&config.key)?;

    let mut averaged = DensityMatrix::zeros(n)?;
    let weight = 1.0 / (1u64 << n) as f64;
    for zi in 0..1u64 << n {
        let params = CssParameters {
            x: config.x.clone(),
            z: BitString::from_u64(n, zi),
        };
        let state = code.parameterized_codeword(&v, &params)?.pauli_image(&config.error);
        averaged.add_pure(&state, weight);
    }

    let mut shift = config.x.xor(config.error.x_mask());
    if config.mutate {
        shift.flip(0);
    }
    let words: Vec<BitString> = code.c2().codewords().collect();
    let mut mixture = DensityMatrix::zeros(n)?;
    for w in &words {
        mixture.add_basis_projector(&v.xor(w).xor(&shift), 1.0 / words.len() as f64);
    }
    let max_abs_diff = averaged.max_abs_diff(&mixture)?;

    let css_key = css_route_key(config, &v)?;
    let pm_key = pm_route_key(config, &v)?;
    let keys_equal = css_key == pm_key;
    Ok(EquivalenceReport {
        max_abs_diff,
        passed: max_abs_diff <= DEPHASE_TOLERANCE && keys_equal,
        css_key,
        pm_key,
        keys_equal,
    })
}

/// Receiver of the CSS protocol with `z` withheld, which is the setting in
/// which the two protocols coincide: bit syndromes, X correction, readout.
fn css_route_key(config: &EquivalenceConfig, v: &BitString) -> Result<BitString> {
    let code = &config.code;
    let n = code.n();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let params = CssParameters {
        x: config.x.clone(),
        z: BitString::random(n, &mut rng),
    };
    let mut state = code.parameterized_codeword(v, &params)?;
    state.apply_pauli(&config.error);
    let gens = code.stabilizer_generators(&params);
    let bit = BitString::from_bits(
        gens[..code.num_z_generators()]
            .iter()
            .map(|g| state.measure_pauli(g, &mut rng).bit()),
    );
    let fix = code.bit_table().lookup(&bit)?.clone();
    state.apply_pauli(&PauliProduct::x_type(fix, false));
    let y = BitString::from_bits((0..n).map(|q| state.measure_qubit(q, &mut rng).bit()));
    code.key_of(&y.xor(&config.x))
}

/// Receiver of the prepare-and-measure protocol: Alice's raw string is
/// `v + w + x` for a uniform `w ∈ C2`, so `u = v + w` and the announced
/// offset is `x`.
fn pm_route_key(config: &EquivalenceConfig, v: &BitString) -> Result<BitString> {
    let code = &config.code;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let _z = BitString::random(code.n(), &mut rng);
    let w = code.c2().random_codeword(&mut rng);
    let received = v.xor(&w).xor(&config.x).xor(config.error.x_mask());
    let (decoded, _) = code.c1().decode(code.bit_table(), &received.xor(&config.x))?;
    code.key_of(&decoded)
}

/// Runs the comparison for every key and every `x`, with each given error.
pub fn equivalence_sweep(code: &CssCode, errors: &[PauliProduct], seed: u64) -> Result<Vec<EquivalenceReport>> {
    let n = code.n();
    let mut out = Vec::new();
    for ki in 0..1u64 << code.k() {
        for xi in 0..1u64 << n {
            for (e_idx, e) in errors.iter().enumerate() {
                let mut cfg = EquivalenceConfig::new(code.clone(), BitString::from_u64(code.k(), ki), BitString::from_u64(n, xi));
                cfg.error = e.clone();
                cfg.seed = seed ^ (ki << 40) ^ (xi << 20) ^ e_idx as u64;
                out.push(compare_protocol_equivalence(&cfg)?);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::catalog;
    use crate::css;
    use crate::gf2::bits;
    use crate::pauli::{pauli, Pauli};

    fn small_code() -> CssCode {
        CssCode::new("even4", catalog::even_weight(4), catalog::repetition(4)).unwrap()
    }

    #[test]
    fn routes_agree_without_errors() {
        let reports = equivalence_sweep(&css::repetition3(), &[PauliProduct::identity(3)], 1).unwrap();
        assert_eq!(reports.len(), 2 * 8);
        assert!(reports.iter().all(|r| r.passed));
    }

    #[test]
    fn routes_agree_under_correctable_errors() {
        let code = css::repetition3();
        let errors: Vec<PauliProduct> = (0..3)
            .flat_map(|q| [Pauli::X, Pauli::Y, Pauli::Z].map(|p| PauliProduct::single(3, q, p)))
            .collect();
        for r in equivalence_sweep(&code, &errors, 2).unwrap() {
            assert!(r.max_abs_diff < 1e-10);
            assert!(r.keys_equal);
        }
    }

    #[test]
    fn density_routes_agree_for_a_two_bit_key() {
        let code = small_code();
        let mut cfg = EquivalenceConfig::new(code, bits("10"), bits("0110"));
        cfg.error = pauli("IZII");
        let r = compare_protocol_equivalence(&cfg).unwrap();
        assert!(r.max_abs_diff < 1e-10);
    }

    #[test]
    fn mutation_is_caught() {
        let mut cfg = EquivalenceConfig::new(css::repetition3(), bits("1"), bits("010"));
        cfg.mutate = true;
        let r = compare_protocol_equivalence(&cfg).unwrap();
        assert!(r.max_abs_diff > 0.1);
        assert!(!r.passed);
    }

    #[test]
    fn large_codes_are_rejected() {
        let cfg = EquivalenceConfig::new(css::steane(), bits("0"), BitString::zeros(7));
        assert!(compare_protocol_equivalence(&cfg).is_err());
    }
}
