//! Built-in codes.

use crate::gf2::{BinaryMatrix, BitString};

use super::LinearCode;

/// `[3, 1, 3]` repetition code with `H = ((1 1 0), (0 1 1))`.
pub fn repetition3() -> LinearCode {
    LinearCode::with_parity_check(
        BinaryMatrix::from_strs(3, &["111"]).unwrap(),
        BinaryMatrix::from_strs(3, &["110", "011"]).unwrap(),
        Some(3),
    )
    .unwrap()
}

/// `[n, 1, n]` repetition code with adjacent-pair parity checks.
pub fn repetition(n: usize) -> LinearCode {
    assert!(n >= 1);
    let checks = (0..n - 1)
        .map(|i| {
            let mut r = BitString::zeros(n);
            r.set(i, true);
            r.set(i + 1, true);
            r
        })
        .collect();
    LinearCode::with_parity_check(
        BinaryMatrix::from_rows(n, vec![BitString::ones(n)]).unwrap(),
        BinaryMatrix::from_rows(n, checks).unwrap(),
        Some(n),
    )
    .unwrap()
}

/// `[n, n−1, 2]` even-weight code.
pub fn even_weight(n: usize) -> LinearCode {
    repetition(n).dual()
}

/// Standard-form `[7, 4, 3]` Hamming code, `G = [I | P]`.
pub fn hamming74() -> LinearCode {
    LinearCode::from_generator(
        BinaryMatrix::from_strs(7, &["1000110", "0100101", "0010011", "0001111"]).unwrap(),
        Some(3),
    )
    .unwrap()
}

/// `[7, 3, 4]` simplex code, the dual of [`hamming74`]. Its rows are the
/// Hamming parity checks, so it sits inside the Hamming code.
pub fn simplex73() -> LinearCode {
    LinearCode::from_generator(
        BinaryMatrix::from_strs(7, &["1101100", "1011010", "0111001"]).unwrap(),
        Some(4),
    )
    .unwrap()
}

/// The whole space `F₂ⁿ` (`k = n`, `d = 1`).
pub fn full_space(n: usize) -> LinearCode {
    LinearCode::from_generator(BinaryMatrix::identity(n), Some(1)).unwrap()
}

/// The zero code `{0ⁿ}`.
pub fn zero_code(n: usize) -> LinearCode {
    LinearCode::with_parity_check(BinaryMatrix::zeros(0, n), BinaryMatrix::identity(n), None).unwrap()
}

/// Looks up a classical code by its catalog name.
pub fn by_name(name: &str) -> Option<LinearCode> {
    match name {
        "repetition3" => Some(repetition3()),
        "hamming74" => Some(hamming74()),
        "simplex73" => Some(simplex73()),
        _ => None,
    }
}
