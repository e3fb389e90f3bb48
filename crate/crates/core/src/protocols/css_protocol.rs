//! Key distribution with CSS codewords.
//!
//! Alice encodes random keys as `Q_{x,z}(k)` on the key slots, fills the
//! check slots with random computational states, scrambles everything with
//! a random Hadamard mask and sends a copy to every receiver. After the
//! check comparison each receiver corrects with the announced `x` (and `z`,
//! if revealed), measures and reads the coset label.

use super::{
    check_quantum_backend, qber, record_key_errors, register_backend, transmit, AbortReason, Announcement,
    Backend, ProtocolConfig, ProtocolKind, SessionResult, SessionRng, SlotLayout,
};
use crate::backend::{DenseState, QuantumState, Tableau};
use crate::css::{CssCode, CssParameters};
use crate::error::Result;
use crate::gf2::BitString;
use crate::pauli::PauliProduct;
use crate::protocols::classical::{estimate_error, ThresholdVariant};

pub fn run_css_protocol(config: &ProtocolConfig) -> Result<SessionResult> {
    config.validate()?;
    check_quantum_backend(config.backend, 2 * config.n * config.parties)?;
    let result = SessionResult::start(ProtocolKind::Css, config);
    let Some(code) = config.catalog.strongest_fitting(config.n).cloned() else {
        return Ok(result.abort_with(AbortReason::NoCode { t: 0 }));
    };
    match register_backend(config.backend, code.n()) {
        Backend::Tableau => run::<Tableau>(config, code, result),
        _ => run::<DenseState>(config, code, result),
    }
}

struct Block<S> {
    state: S,
    params: CssParameters,
}

fn run<S: QuantumState>(config: &ProtocolConfig, code: CssCode, mut result: SessionResult) -> Result<SessionResult> {
    let n = config.n;
    let nc = code.n();
    let blocks = n / nc;
    let mut rngs = SessionRng::new(config.seed);

    let layout = SlotLayout::random(n, config.extra_shuffle, &mut rngs.choices);
    let hadamard = BitString::random(2 * n, &mut rngs.choices);
    let check_bits = BitString::random(n, &mut rngs.choices);
    let mut alice_key = BitString::zeros(0);
    let mut plans = Vec::with_capacity(blocks);
    for _ in 0..blocks {
        let key = BitString::random(code.k(), &mut rngs.choices);
        let params = CssParameters::random(nc, &mut rngs.choices);
        alice_key = alice_key.concat(&key);
        plans.push((code.representative(&key)?, params));
    }

    result.code = Some(code.name().to_string());
    result.transcript.push(Announcement::Code {
        name: code.name().to_string(),
        n: nc,
        k: code.k(),
        radius: code.t(),
        blocks,
    });

    // Transmission of every receiver's copy, then the check measurements.
    let mut received: Vec<Vec<Block<S>>> = Vec::with_capacity(config.parties - 1);
    let mut disturbed = vec![vec![false; blocks * nc]; config.parties - 1];
    let mut checks = vec![check_bits.clone()];
    for r in config.receivers() {
        let mut bits = BitString::zeros(n);
        for (i, &slot) in layout.check_slots.iter().enumerate() {
            let mut q = S::new_zero(1)?;
            if check_bits.get(i) {
                q.x(0);
            }
            send(config, &mut q, 0, r, slot, &hadamard, &layout, &mut rngs, &mut result);
            bits.set(i, q.measure_qubit(0, &mut rngs.measure).bit());
        }
        checks.push(bits);

        let mut copies = Vec::with_capacity(blocks);
        for (b, (v, params)) in plans.iter().enumerate() {
            let mut state = S::new_zero(nc)?;
            code.prepare(&mut state, &(0..nc).collect::<Vec<_>>(), v, params)?;
            for j in 0..nc {
                let slot = layout.key_slots[b * nc + j];
                disturbed[r - 1][b * nc + j] = send(config, &mut state, j, r, slot, &hadamard, &layout, &mut rngs, &mut result);
            }
            copies.push(Block {
                state,
                params: params.clone(),
            });
        }
        received.push(copies);
    }
    record_key_errors(&mut result.ground_truth, &disturbed, blocks, nc, code.t());

    result.transcript.push(Announcement::Permutation { perm: layout.perm.clone() });
    result.transcript.push(Announcement::Bases { party: 0, bases: hadamard.clone() });
    result.transcript.push(Announcement::CheckPositions { slots: layout.check_slots.clone() });
    for (p, bits) in checks.iter().enumerate() {
        result.transcript.push(Announcement::CheckBits { party: p, bits: bits.clone() });
    }
    let (w, t) = estimate_error(&checks[0], &checks[1..], config.c, ThresholdVariant::Entangled)?;
    result.wt_w = w.weight();
    result.t = t;
    result.qber = qber(&checks[0], &checks[1..]);
    result.transcript.push(Announcement::Threshold { wt_w: result.wt_w, t });
    if t > code.t() {
        return Ok(result.abort_with(AbortReason::Threshold { t, radius: code.t() }));
    }
    for (b, (_, params)) in plans.iter().enumerate() {
        result.transcript.push(Announcement::ShiftKeys {
            block: b,
            x: params.x.clone(),
            z: config.reveal_z.then(|| params.z.clone()),
        });
    }

    let mut keys = vec![alice_key];
    for (r, copies) in config.receivers().zip(received) {
        let mut key = BitString::zeros(0);
        for (b, mut block) in copies.into_iter().enumerate() {
            match decode_block(&code, &mut block, config.reveal_z, &mut rngs)? {
                Some(k) => key = key.concat(&k),
                None => return Ok(result.abort_with(AbortReason::DecodeFailure { receiver: r, block: b })),
            }
        }
        keys.push(key);
    }
    result.keys = Some(keys);
    Ok(result)
}

/// Hadamard on, channel, Hadamard off.
#[allow(clippy::too_many_arguments)]
fn send<S: QuantumState>(
    config: &ProtocolConfig,
    state: &mut S,
    q: usize,
    receiver: usize,
    slot: usize,
    hadamard: &BitString,
    layout: &SlotLayout,
    rngs: &mut SessionRng,
    result: &mut SessionResult,
) -> bool {
    let h = hadamard.get(slot);
    if h {
        state.h(q);
    }
    let injected = config.injection_at(receiver, slot, layout);
    let disturbed = transmit(config, state, q, receiver, injected, rngs, &mut result.ground_truth);
    if h {
        state.h(q);
    }
    disturbed
}

/// Syndrome measurement, correction and readout of one received block.
/// `None` when a syndrome is outside the decoding tables.
fn decode_block<S: QuantumState>(
    code: &CssCode,
    block: &mut Block<S>,
    reveal_z: bool,
    rngs: &mut SessionRng,
) -> Result<Option<BitString>> {
    let nc = code.n();
    let qubits: Vec<usize> = (0..nc).collect();
    let (bit, phase) = if reveal_z {
        let (b, p) = code.measure_syndromes(&mut block.state, &qubits, &block.params, &mut rngs.measure);
        (b, Some(p))
    } else {
        let gens = code.stabilizer_generators(&block.params);
        let bit = BitString::from_bits(
            gens[..code.num_z_generators()]
                .iter()
                .map(|g| block.state.measure_pauli(g, &mut rngs.measure).bit()),
        );
        (bit, None)
    };
    let Ok(x_fix) = code.bit_table().lookup(&bit) else {
        return Ok(None);
    };
    let z_fix = match phase {
        Some(p) => match code.phase_table().lookup(&p) {
            Ok(z) => z.clone(),
            Err(_) => return Ok(None),
        },
        None => BitString::zeros(nc),
    };
    block.state.apply_pauli(&PauliProduct::from_masks(x_fix.clone(), z_fix, false)?);
    let y = BitString::from_bits(qubits.iter().map(|&q| block.state.measure_qubit(q, &mut rngs.measure).bit()));
    Ok(Some(code.key_of(&y.xor(&block.params.x))?))
}
