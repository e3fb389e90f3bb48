//! GHZ-based key distribution.
//!
//! Alice prepares `2n` GHZ blocks and sends qubit `i` of each to receiver
//! `i`. Half are measured in the computational basis to estimate errors.
//! The rest are grouped into code blocks, error-corrected with a CSS code
//! and measured; each party's key is the coset label of its outcome.
//!
//! Blocks are independent, so each test block and each code-block group is
//! simulated as its own register.

use super::{
    check_quantum_backend, qber, record_key_errors, register_backend, shift_for, transmit, AbortReason,
    Announcement, Backend, ProtocolConfig, ProtocolKind, SessionResult, SessionRng, SlotLayout,
};
use crate::backend::{prepare_ghz, prepare_ghz_blocks, DenseState, QuantumState, Tableau};
use crate::css::{CssCode, CssParameters};
use crate::error::Result;
use crate::gf2::BitString;
use crate::protocols::classical::{estimate_error, ThresholdVariant};

pub fn run_entangled_based(config: &ProtocolConfig) -> Result<SessionResult> {
    config.validate()?;
    check_quantum_backend(config.backend, 2 * config.n * config.parties)?;
    let n = config.n;
    let parties = config.parties;
    let mut rngs = SessionRng::new(config.seed);
    let mut result = SessionResult::start(ProtocolKind::Entangled, config);

    let layout = SlotLayout::random(n, config.extra_shuffle, &mut rngs.choices);
    let hadamard = BitString::random(2 * n, &mut rngs.choices);

    // Test blocks.
    let mut checks = vec![BitString::zeros(n); parties];
    for (i, &slot) in layout.check_slots.iter().enumerate() {
        let outcome = match register_backend(config.backend, parties) {
            Backend::Tableau => test_block::<Tableau>(config, slot, hadamard.get(slot), &layout, &mut rngs, &mut result)?,
            _ => test_block::<DenseState>(config, slot, hadamard.get(slot), &layout, &mut rngs, &mut result)?,
        };
        for (p, bit) in outcome.into_iter().enumerate() {
            checks[p].set(i, bit);
        }
    }
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

    let Some(code) = config.catalog.choose_fitting(t, n).cloned() else {
        return Ok(result.abort_with(AbortReason::NoCode { t }));
    };
    let nc = code.n();
    let blocks = n / nc;
    result.code = Some(code.name().to_string());
    result.transcript.push(Announcement::Code {
        name: code.name().to_string(),
        n: nc,
        k: code.k(),
        radius: code.t(),
        blocks,
    });

    let mut keys = vec![BitString::zeros(0); parties];
    let mut disturbed = vec![Vec::with_capacity(blocks * nc); parties - 1];
    for b in 0..blocks {
        let slots = &layout.key_slots[b * nc..(b + 1) * nc];
        let outcome = match register_backend(config.backend, parties * nc) {
            Backend::Tableau => key_group::<Tableau>(config, &code, b, slots, &hadamard, &layout, &mut rngs, &mut result)?,
            _ => key_group::<DenseState>(config, &code, b, slots, &hadamard, &layout, &mut rngs, &mut result)?,
        };
        match outcome {
            Ok((group_keys, group_disturbed)) => {
                for (k, g) in keys.iter_mut().zip(group_keys) {
                    *k = k.concat(&g);
                }
                for (d, g) in disturbed.iter_mut().zip(group_disturbed) {
                    d.extend(g);
                }
            }
            Err(reason) => {
                record_key_errors(&mut result.ground_truth, &disturbed, b, nc, code.t());
                return Ok(result.abort_with(reason));
            }
        }
    }
    record_key_errors(&mut result.ground_truth, &disturbed, blocks, nc, code.t());
    result.keys = Some(keys);
    Ok(result)
}

/// Sends one GHZ block through the links, undoes the basis scrambling and
/// returns every party's computational outcome.
fn test_block<S: QuantumState>(
    config: &ProtocolConfig,
    slot: usize,
    hadamard: bool,
    layout: &SlotLayout,
    rngs: &mut SessionRng,
    result: &mut SessionResult,
) -> Result<Vec<bool>> {
    let parties = config.parties;
    let mut state: S = prepare_ghz(parties)?;
    for r in config.receivers() {
        if hadamard {
            state.h(r);
        }
        let injected = config.injection_at(r, slot, layout);
        transmit(config, &mut state, r, r, injected, rngs, &mut result.ground_truth);
        if hadamard {
            state.h(r);
        }
    }
    Ok((0..parties).map(|q| state.measure_qubit(q, &mut rngs.measure).bit()).collect())
}

type GroupOutcome = std::result::Result<(Vec<BitString>, Vec<Vec<bool>>), AbortReason>;

/// Distributes one code block's worth of GHZ blocks, corrects the
/// receivers against Alice and returns each party's key for the block
/// together with which receiver qubits were disturbed.
#[allow(clippy::too_many_arguments)]
fn key_group<S: QuantumState>(
    config: &ProtocolConfig,
    code: &CssCode,
    block: usize,
    slots: &[usize],
    hadamard: &BitString,
    layout: &SlotLayout,
    rngs: &mut SessionRng,
    result: &mut SessionResult,
) -> Result<GroupOutcome> {
    let parties = config.parties;
    let nc = code.n();
    let mut state: S = prepare_ghz_blocks(parties, nc)?;
    let qubits_of = |p: usize| -> Vec<usize> { (0..nc).map(|j| p * nc + j).collect() };

    let mut disturbed = vec![vec![false; nc]; parties - 1];
    for r in config.receivers() {
        for (j, &slot) in slots.iter().enumerate() {
            let q = r * nc + j;
            let h = hadamard.get(slot);
            if h {
                state.h(q);
            }
            let injected = config.injection_at(r, slot, layout);
            disturbed[r - 1][j] = transmit(config, &mut state, q, r, injected, rngs, &mut result.ground_truth);
            if h {
                state.h(q);
            }
        }
    }

    let params = CssParameters::zero(nc);
    let mut bit_syn = Vec::with_capacity(parties);
    let mut phase_total = BitString::zeros(code.c2().k());
    for p in 0..parties {
        let (bit, phase) = code.measure_syndromes(&mut state, &qubits_of(p), &params, &mut rngs.measure);
        result.transcript.push(Announcement::Syndromes {
            party: p,
            block,
            bit: bit.clone(),
            phase: Some(phase.clone()),
        });
        phase_total.xor_assign(&phase);
        bit_syn.push(bit);
    }

    for r in config.receivers() {
        let relative = bit_syn[r].xor(&bit_syn[0]);
        let Ok(fix) = code.bit_table().lookup(&relative) else {
            return Ok(Err(AbortReason::DecodeFailure { receiver: r, block }));
        };
        for j in fix.ones_positions() {
            state.x(r * nc + j);
        }
    }
    let Ok(phase_fix) = code.phase_table().lookup(&phase_total) else {
        return Ok(Err(AbortReason::DecodeFailure { receiver: 0, block }));
    };
    for j in phase_fix.ones_positions() {
        state.z(j);
    }

    let leader = shift_for(&code.bit_shift_representatives(), &bit_syn[0]);
    let mut keys = Vec::with_capacity(parties);
    for p in 0..parties {
        let y = BitString::from_bits(qubits_of(p).into_iter().map(|q| state.measure_qubit(q, &mut rngs.measure).bit()));
        keys.push(code.key_of(&y.xor(&leader))?);
    }
    Ok(Ok((keys, disturbed)))
}
