//! Dense-versus-tableau agreement checks on Clifford programs.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{DenseState, QuantumState, Tableau};
use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliProduct};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CliffordOp {
    H(usize),
    S(usize),
    Cx(usize, usize),
    X(usize),
    Y(usize),
    Z(usize),
    MeasureZ(usize),
    MeasurePauli(PauliProduct),
}

impl CliffordOp {
    pub fn apply<S: QuantumState, R: Rng + ?Sized>(&self, state: &mut S, rng: &mut R) -> Option<i8> {
        match self {
            CliffordOp::H(q) => state.h(*q),
            CliffordOp::S(q) => state.s(*q),
            CliffordOp::Cx(a, b) => state.cx(*a, *b),
            CliffordOp::X(q) => state.x(*q),
            CliffordOp::Y(q) => state.y(*q),
            CliffordOp::Z(q) => state.z(*q),
            CliffordOp::MeasureZ(q) => return Some(state.measure_qubit(*q, rng).eigenvalue),
            CliffordOp::MeasurePauli(p) => return Some(state.measure_pauli(p, rng).eigenvalue),
        }
        None
    }
}

/// Random unitary Clifford gates followed by a Z measurement of every qubit.
pub fn random_program<R: Rng + ?Sized>(n: usize, gates: usize, rng: &mut R) -> Vec<CliffordOp> {
    assert!(n >= 1);
    let mut ops = Vec::with_capacity(gates + n);
    for _ in 0..gates {
        let q = rng.gen_range(0..n);
        let op = match rng.gen_range(0..7) {
            0 | 1 => CliffordOp::H(q),
            2 | 3 => CliffordOp::S(q),
            4 if n > 1 => {
                let mut t = rng.gen_range(0..n - 1);
                if t >= q {
                    t += 1;
                }
                CliffordOp::Cx(q, t)
            }
            5 => CliffordOp::MeasurePauli(random_pauli(n, rng)),
            _ => match rng.gen_range(0..3) {
                0 => CliffordOp::X(q),
                1 => CliffordOp::Y(q),
                _ => CliffordOp::Z(q),
            },
        };
        ops.push(op);
    }
    ops.extend((0..n).map(CliffordOp::MeasureZ));
    ops
}

fn random_pauli<R: Rng + ?Sized>(n: usize, rng: &mut R) -> PauliProduct {
    let mut p = PauliProduct::identity(n).with_sign(rng.gen());
    for q in 0..n {
        let letter = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][rng.gen_range(0..4)];
        p.set(q, letter);
    }
    p
}

/// Runs a program from `|0…0⟩` and returns every measurement outcome in order.
pub fn run_program<S: QuantumState, R: Rng + ?Sized>(n: usize, program: &[CliffordOp], rng: &mut R) -> Result<Vec<i8>> {
    let mut state = S::new_zero(n)?;
    Ok(program.iter().filter_map(|op| op.apply(&mut state, rng)).collect())
}

/// Both backends driven by identically seeded generators must report the
/// same outcomes, since each measurement consumes one uniform draw and a
/// random outcome has probability exactly ½ on both.
pub fn matched_run(n: usize, program: &[CliffordOp], seed: u64) -> Result<Vec<i8>> {
    let dense = run_program::<DenseState, _>(n, program, &mut ChaCha8Rng::seed_from_u64(seed))?;
    let tab = run_program::<Tableau, _>(n, program, &mut ChaCha8Rng::seed_from_u64(seed))?;
    if dense != tab {
        return Err(Error::Divergence(format!("matched-seed outcomes differ: dense {dense:?}, tableau {tab:?}")));
    }
    Ok(dense)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossCheckReport {
    pub shots: usize,
    pub cells: usize,
    pub chi_square: f64,
    pub dof: usize,
    /// Wilson–Hilferty normal approximation of the chi-square statistic.
    pub z_score: f64,
    pub passed: bool,
}

/// Two-sample chi-square statistic for equal sample sizes:
/// `Σ (a−b)²/(a+b)` over non-empty cells. Returns `(χ², dof)`.
pub fn two_sample_chi_square<K: Ord>(a: &BTreeMap<K, usize>, b: &BTreeMap<K, usize>) -> (f64, usize) {
    let mut keys: Vec<&K> = a.keys().chain(b.keys()).collect();
    keys.sort();
    keys.dedup();
    let mut chi = 0.0;
    for k in &keys {
        let x = *a.get(k).unwrap_or(&0) as f64;
        let y = *b.get(k).unwrap_or(&0) as f64;
        if x + y > 0.0 {
            chi += (x - y).powi(2) / (x + y);
        }
    }
    (chi, keys.len().saturating_sub(1))
}

/// `(χ²/k)^{1/3}` is approximately normal with mean `1 − 2/(9k)` and
/// variance `2/(9k)`.
pub fn wilson_hilferty(chi_square: f64, dof: usize) -> f64 {
    if dof == 0 {
        return 0.0;
    }
    let k = dof as f64;
    let v = 2.0 / (9.0 * k);
    ((chi_square / k).cbrt() - (1.0 - v)) / v.sqrt()
}

/// Outcome histograms of `shots` independent runs on each backend, drawn
/// from separate streams, compared at the 3σ level.
pub fn distribution_check(n: usize, program: &[CliffordOp], shots: usize, seed: u64) -> Result<CrossCheckReport> {
    let mut dense_rng = ChaCha8Rng::seed_from_u64(seed);
    dense_rng.set_stream(1);
    let mut tab_rng = ChaCha8Rng::seed_from_u64(seed);
    tab_rng.set_stream(2);
    let mut dense_hist = BTreeMap::new();
    let mut tab_hist = BTreeMap::new();
    for _ in 0..shots {
        *dense_hist
            .entry(run_program::<DenseState, _>(n, program, &mut dense_rng)?)
            .or_insert(0) += 1;
        *tab_hist.entry(run_program::<Tableau, _>(n, program, &mut tab_rng)?).or_insert(0) += 1;
    }
    let (chi_square, dof) = two_sample_chi_square(&dense_hist, &tab_hist);
    let z_score = wilson_hilferty(chi_square, dof);
    Ok(CrossCheckReport {
        shots,
        cells: dof + 1,
        chi_square,
        dof,
        z_score,
        passed: z_score <= 3.0,
    })
}

/// Like [`distribution_check`] but turns a failure into
/// [`Error::Divergence`].
pub fn crosscheck(n: usize, program: &[CliffordOp], shots: usize, seed: u64) -> Result<CrossCheckReport> {
    let report = distribution_check(n, program, shots, seed)?;
    if !report.passed {
        return Err(Error::Divergence(format!(
            "outcome distributions differ: χ² = {:.2} on {} dof (z = {:.2})",
            report.chi_square, report.dof, report.z_score
        )));
    }
    matched_run(n, program, seed)?;
    Ok(report)
}
