//! Prepare-and-measure key distribution.
//!
//! Alice sends `m = 2^{N+1}·n` random BB84 states to every receiver per
//! round. Positions where all receivers guessed her basis are sifted; the
//! first `2n` of them are split into key and check halves. Error
//! correction is classical: Alice announces `v + u` for a random `u ∈ C1`
//! and each receiver decodes its own copy of `v` against it.

use rand::Rng;

use super::{
    qber, record_key_errors, transmit, transmit_classical, AbortReason, Announcement, Backend, GroundTruth,
    ProtocolConfig, ProtocolKind, SessionResult, SessionRng, SlotLayout,
};
use crate::backend::{DenseState, QuantumState, Tableau};
use crate::error::{Error, Result};
use crate::gf2::BitString;
use crate::pauli::Pauli;
use crate::protocols::classical::{estimate_error, sift, BbQubit, Basis, ThresholdVariant};

/// Something that can carry one BB84 state over a link.
trait Carrier: Sized {
    fn prepare(basis: Basis, bit: bool) -> Result<Self>;
    fn send(
        &mut self,
        config: &ProtocolConfig,
        receiver: usize,
        injected: Option<Pauli>,
        rngs: &mut SessionRng,
        truth: &mut GroundTruth,
    );
    /// Consumes exactly one uniform from `rng`.
    fn measure<R: Rng + ?Sized>(&mut self, basis: Basis, rng: &mut R) -> bool;
}

impl Carrier for BbQubit {
    fn prepare(basis: Basis, bit: bool) -> Result<Self> {
        Ok(BbQubit::new(basis, bit))
    }

    fn send(
        &mut self,
        config: &ProtocolConfig,
        receiver: usize,
        injected: Option<Pauli>,
        rngs: &mut SessionRng,
        truth: &mut GroundTruth,
    ) {
        transmit_classical(config, self, receiver, injected, rngs, truth);
    }

    fn measure<R: Rng + ?Sized>(&mut self, basis: Basis, rng: &mut R) -> bool {
        BbQubit::measure(self, basis, rng)
    }
}

/// A one-qubit register of a quantum backend.
struct Register<S>(S);

impl<S: QuantumState> Carrier for Register<S> {
    fn prepare(basis: Basis, bit: bool) -> Result<Self> {
        let mut s = S::new_zero(1)?;
        if bit {
            s.x(0);
        }
        if basis.is_hadamard() {
            s.h(0);
        }
        Ok(Register(s))
    }

    fn send(
        &mut self,
        config: &ProtocolConfig,
        receiver: usize,
        injected: Option<Pauli>,
        rngs: &mut SessionRng,
        truth: &mut GroundTruth,
    ) {
        transmit(config, &mut self.0, 0, receiver, injected, rngs, truth);
    }

    fn measure<R: Rng + ?Sized>(&mut self, basis: Basis, rng: &mut R) -> bool {
        if basis.is_hadamard() {
            self.0.h(0);
        }
        let bit = self.0.measure_qubit(0, rng).bit();
        if basis.is_hadamard() {
            self.0.h(0);
        }
        bit
    }
}

pub fn run_prepare_measure(config: &ProtocolConfig) -> Result<SessionResult> {
    config.validate()?;
    match config.backend {
        Backend::Auto | Backend::Classical => run::<BbQubit>(config),
        Backend::Dense => run::<Register<DenseState>>(config),
        Backend::Tableau => run::<Register<Tableau>>(config),
    }
}

/// Qubits Alice sends to each receiver per round.
pub fn round_size(parties: usize, n: usize) -> Result<usize> {
    1usize
        .checked_shl(parties as u32 + 1)
        .and_then(|p| p.checked_mul(n))
        .filter(|&m| m <= 1 << 26)
        .ok_or_else(|| Error::Domain(format!("round size 2^{}·{n} is too large", parties + 1)))
}

struct Round {
    bits: BitString,
    bases: BitString,
    receiver_bases: Vec<BitString>,
}

fn run<C: Carrier>(config: &ProtocolConfig) -> Result<SessionResult> {
    let n = config.n;
    let parties = config.parties;
    let m = round_size(parties, n)?;
    let mut rngs = SessionRng::new(config.seed);
    let mut result = SessionResult::start(ProtocolKind::PrepareMeasure, config);
    result.round_size = m;

    // Every party's choices come first; they fix which positions survive.
    let mut rounds = Vec::new();
    let mut sifted: Vec<(usize, usize)> = Vec::new();
    while rounds.len() < config.sift_rounds && sifted.len() < 2 * n {
        let round = Round {
            bits: BitString::random(m, &mut rngs.choices),
            bases: BitString::random(m, &mut rngs.choices),
            receiver_bases: config.receivers().map(|_| BitString::random(m, &mut rngs.choices)).collect(),
        };
        let kept = sift(&round.bases, &round.receiver_bases)?;
        if rounds.is_empty() {
            result.first_round_sifted = kept.len();
        }
        sifted.extend(kept.into_iter().map(|j| (rounds.len(), j)));
        rounds.push(round);
    }
    result.sifted_count = sifted.len();
    for (i, round) in rounds.iter().enumerate() {
        result.transcript.push(Announcement::Bases {
            party: 0,
            bases: round.bases.clone(),
        });
        for (r, b) in round.receiver_bases.iter().enumerate() {
            result.transcript.push(Announcement::Bases { party: r + 1, bases: b.clone() });
        }
        let positions = sifted.iter().filter(|(k, _)| *k == i).map(|&(_, j)| i * m + j).collect();
        result.transcript.push(Announcement::Sifted { positions });
    }
    if sifted.len() < 2 * n {
        let reason = AbortReason::InsufficientSift {
            sifted: sifted.len(),
            needed: 2 * n,
        };
        return Ok(result.abort_with(reason));
    }
    sifted.truncate(2 * n);
    let layout = SlotLayout::random(n, config.extra_shuffle, &mut rngs.choices);

    // Transmission and measurement of every qubit of every round.
    let mut slot_of = vec![vec![None; m]; rounds.len()];
    for (slot, &(k, j)) in sifted.iter().enumerate() {
        slot_of[k][j] = Some(slot);
    }
    let mut received = vec![BitString::zeros(2 * n); parties - 1];
    for r in config.receivers() {
        for (k, round) in rounds.iter().enumerate() {
            for j in 0..m {
                let mut q = C::prepare(Basis::from_bit(round.bases.get(j)), round.bits.get(j))?;
                let injected = slot_of[k][j].and_then(|s| config.injection_at(r, s, &layout));
                q.send(config, r, injected, &mut rngs, &mut result.ground_truth);
                let bit = q.measure(Basis::from_bit(round.receiver_bases[r - 1].get(j)), &mut rngs.measure);
                if let Some(s) = slot_of[k][j] {
                    received[r - 1].set(s, bit);
                }
            }
        }
    }
    let alice: BitString = BitString::from_bits(sifted.iter().map(|&(k, j)| rounds[k].bits.get(j)));

    result.transcript.push(Announcement::Permutation { perm: layout.perm.clone() });
    result.transcript.push(Announcement::CheckPositions { slots: layout.check_slots.clone() });
    let check_alice = alice.select(&layout.check_slots);
    let check_recv: Vec<BitString> = received.iter().map(|b| b.select(&layout.check_slots)).collect();
    result.transcript.push(Announcement::CheckBits { party: 0, bits: check_alice.clone() });
    for (r, bits) in check_recv.iter().enumerate() {
        result.transcript.push(Announcement::CheckBits { party: r + 1, bits: bits.clone() });
    }
    let (w, t) = estimate_error(&check_alice, &check_recv, config.c, ThresholdVariant::PrepareMeasure)?;
    result.wt_w = w.weight();
    result.t = t;
    result.qber = qber(&check_alice, &check_recv);
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

    let key_alice = alice.select(&layout.key_slots);
    let key_recv: Vec<BitString> = received.iter().map(|b| b.select(&layout.key_slots)).collect();
    let disturbed: Vec<Vec<bool>> = key_recv
        .iter()
        .map(|k| (0..n).map(|i| k.get(i) != key_alice.get(i)).collect())
        .collect();
    record_key_errors(&mut result.ground_truth, &disturbed, blocks, nc, code.t());

    let mut keys = vec![BitString::zeros(0); parties];
    for b in 0..blocks {
        let v = key_alice.slice(b * nc, nc);
        result.transcript.push(Announcement::BitSyndrome {
            party: 0,
            block: b,
            s_x: code.c1().syndrome(&v)?,
        });
        for (r, k) in key_recv.iter().enumerate() {
            result.transcript.push(Announcement::BitSyndrome {
                party: r + 1,
                block: b,
                s_x: code.c1().syndrome(&k.slice(b * nc, nc))?,
            });
        }
        let u = code.c1().random_codeword(&mut rngs.choices);
        let offset = v.xor(&u);
        result.transcript.push(Announcement::Offset {
            block: b,
            v_plus_u: offset.clone(),
        });
        keys[0] = keys[0].concat(&code.key_of(&u)?);
        for (r, k) in key_recv.iter().enumerate() {
            let noisy = k.slice(b * nc, nc).xor(&offset);
            let Ok((decoded, _)) = code.c1().decode(code.bit_table(), &noisy) else {
                return Ok(result.abort_with(AbortReason::DecodeFailure { receiver: r + 1, block: b }));
            };
            keys[r + 1] = keys[r + 1].concat(&code.key_of(&decoded)?);
        }
    }
    result.keys = Some(keys);
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::PauliChannel;
    use crate::protocols::{Adversary, InjectedError, InjectionTarget, LinkSet};

    #[test]
    fn noiseless_sessions_agree() {
        for (parties, n) in [(3, 1), (4, 2), (5, 3), (3, 10)] {
            for seed in 0..10 {
                let r = run_prepare_measure(&ProtocolConfig::new(parties, n).with_seed(seed)).unwrap();
                assert!(!r.aborted(), "{parties} {n} {seed}: {:?}", r.abort);
                assert!(r.keys_equal());
                assert_eq!(r.round_size, (1 << (parties + 1)) * n);
            }
        }
    }

    #[test]
    fn one_round_can_fall_short() {
        let mut short = 0;
        for seed in 0..200 {
            let mut cfg = ProtocolConfig::new(5, 1).with_seed(seed);
            cfg.sift_rounds = 1;
            let r = run_prepare_measure(&cfg).unwrap();
            if r.aborted() {
                assert_eq!(r.abort.as_ref().unwrap().as_str(), "insufficient_sift");
                short += 1;
            }
        }
        assert!(short > 0);
    }

    #[test]
    fn classical_and_dense_match_on_matched_seeds() {
        let mut cfg = ProtocolConfig::new(3, 8).with_seed(12);
        cfg.channel = PauliChannel::new(0.03, 0.01, 0.03).unwrap();
        cfg.adversary = Adversary::InterceptResend {
            links: LinkSet::Only(vec![2]),
        };
        cfg.c = 1.0;
        let a = run_prepare_measure(&cfg).unwrap();
        cfg.backend = Backend::Dense;
        let b = run_prepare_measure(&cfg).unwrap();
        cfg.backend = Backend::Tableau;
        let c = run_prepare_measure(&cfg).unwrap();
        assert_eq!(a.transcript, b.transcript);
        assert_eq!(a.transcript, c.transcript);
        assert_eq!(a.keys, b.keys);
    }

    #[test]
    fn single_key_flip_is_corrected_by_steane() {
        let mut cfg = ProtocolConfig::new(3, 7).with_seed(2);
        cfg.c = 0.2;
        cfg.injected.push(InjectedError {
            receiver: 1,
            target: InjectionTarget::Key(5),
            pauli: Pauli::Y,
        });
        let r = run_prepare_measure(&cfg).unwrap();
        assert_eq!(r.code.as_deref(), Some("steane"));
        assert!(r.keys_equal());
        assert_eq!(r.ground_truth.key_block_errors[0], vec![1]);
    }

    #[test]
    fn intercept_resend_raises_qber() {
        let mut cfg = ProtocolConfig::new(3, 32).with_seed(4);
        cfg.c = 0.0;
        cfg.adversary = Adversary::InterceptResend { links: LinkSet::All };
        let r = run_prepare_measure(&cfg).unwrap();
        assert!(r.aborted());
        assert!(r.qber > 0.1);
    }
}
