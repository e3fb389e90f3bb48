//! The three key-distribution protocols and their shared plumbing.
//!
//! Party 0 is Alice; receivers are numbered `1..N`. Every protocol works on
//! `2n` slots split by a public permutation into `n` key slots (the first
//! half) and `n` check slots (the second half).

pub mod classical;
mod css_protocol;
mod entangled;
pub mod equivalence;
mod prepare_measure;

use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::backend::{PauliChannel, QuantumState, DENSE_QUBIT_LIMIT};
use crate::css::{self, CssCode};
use crate::error::{Error, Result};
use crate::gf2::BitString;
use crate::pauli::{Pauli, PauliProduct};

pub use classical::{choose_code, estimate_error, sift, threshold, BbQubit, Basis, ThresholdVariant};
pub use css_protocol::run_css_protocol;
pub use entangled::run_entangled_based;
pub use equivalence::{compare_protocol_equivalence, equivalence_sweep, EquivalenceConfig, EquivalenceReport};
pub use prepare_measure::run_prepare_measure;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolKind {
    Entangled,
    Css,
    PrepareMeasure,
}

impl ProtocolKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ProtocolKind::Entangled => "entangled",
            ProtocolKind::Css => "css",
            ProtocolKind::PrepareMeasure => "pm",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    /// Dense when the largest simulated register fits, tableau otherwise;
    /// classical bits for prepare-and-measure.
    #[default]
    Auto,
    Dense,
    Tableau,
    Classical,
}

/// Receiver links an adversary acts on.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum LinkSet {
    #[default]
    All,
    Only(Vec<usize>),
}

impl LinkSet {
    pub fn contains(&self, receiver: usize) -> bool {
        match self {
            LinkSet::All => true,
            LinkSet::Only(v) => v.contains(&receiver),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub enum Adversary {
    #[default]
    None,
    /// Measure every transiting qubit in a random basis and resend it.
    InterceptResend { links: LinkSet },
    /// Extra Pauli noise on the chosen links.
    Pauli { links: LinkSet, channel: PauliChannel },
}

/// Where a deliberately injected error lands.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum InjectionTarget {
    /// Slot before permutation. For prepare-and-measure this is the
    /// `i`-th retained sifted position.
    Slot(usize),
    /// `i`-th check slot.
    Check(usize),
    /// `i`-th key slot.
    Key(usize),
}

/// A Pauli applied to one receiver's copy of a slot during transmission,
/// on top of the channel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InjectedError {
    pub receiver: usize,
    pub target: InjectionTarget,
    pub pauli: Pauli,
}

/// Ordered list of CSS codes the parties may agree on.
#[derive(Clone, Debug)]
pub struct CodeCatalog {
    name: String,
    entries: Vec<CssCode>,
}

impl CodeCatalog {
    pub fn new(name: &str, entries: Vec<CssCode>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Domain("code catalog is empty".into()));
        }
        Ok(CodeCatalog {
            name: name.to_string(),
            entries,
        })
    }

    /// The unprotected one-qubit code and Steane `[[7,1]]`.
    pub fn steane() -> Self {
        CodeCatalog::new("steane", vec![css::trivial(1), css::steane()]).expect("non-empty")
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "steane" => Some(Self::steane()),
            "trivial" => Some(CodeCatalog::new("trivial", vec![css::trivial(1)]).expect("non-empty")),
            "repetition" => Some(
                CodeCatalog::new("repetition", vec![css::trivial(1), css::repetition3()]).expect("non-empty"),
            ),
            _ => None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn entries(&self) -> &[CssCode] {
        &self.entries
    }

    /// Smallest-length entry with radius at least `t` and length at most
    /// `max_len`.
    pub fn choose_fitting(&self, t: usize, max_len: usize) -> Option<&CssCode> {
        self.entries
            .iter()
            .filter(|c| c.t() >= t && c.n() <= max_len)
            .min_by_key(|c| c.n())
    }

    /// Largest-radius entry of length at most `max_len`, shortest on ties.
    pub fn strongest_fitting(&self, max_len: usize) -> Option<&CssCode> {
        self.entries
            .iter()
            .filter(|c| c.n() <= max_len)
            .min_by_key(|c| (std::cmp::Reverse(c.t()), c.n()))
    }
}

#[derive(Clone, Debug)]
pub struct ProtocolConfig {
    pub parties: usize,
    pub n: usize,
    pub c: f64,
    pub catalog: CodeCatalog,
    pub channel: PauliChannel,
    pub adversary: Adversary,
    pub backend: Backend,
    pub seed: u64,
    /// Prepare-and-measure transmission rounds allowed to reach `2n` sifted
    /// positions; 1 aborts as soon as the first round falls short.
    pub sift_rounds: usize,
    /// CSS protocol: whether Alice announces `z`.
    pub reveal_z: bool,
    /// Compose the public permutation with one more uniform permutation.
    pub extra_shuffle: bool,
    pub injected: Vec<InjectedError>,
}

impl ProtocolConfig {
    pub fn new(parties: usize, n: usize) -> Self {
        ProtocolConfig {
            parties,
            n,
            c: 0.01,
            catalog: CodeCatalog::steane(),
            channel: PauliChannel::NOISELESS,
            adversary: Adversary::None,
            backend: Backend::Auto,
            seed: 0,
            sift_rounds: 8,
            reveal_z: true,
            extra_shuffle: false,
            injected: Vec::new(),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn receivers(&self) -> std::ops::Range<usize> {
        1..self.parties
    }

    pub fn validate(&self) -> Result<()> {
        if self.parties < 3 {
            return Err(Error::Domain(format!("at least 3 parties are required, got {}", self.parties)));
        }
        if self.n == 0 {
            return Err(Error::Domain("n must be at least 1".into()));
        }
        if !(self.c >= 0.0 && self.c.is_finite()) {
            return Err(Error::Domain(format!("confidence factor c = {} must be a finite value ≥ 0", self.c)));
        }
        if self.sift_rounds == 0 {
            return Err(Error::Domain("sift_rounds must be at least 1".into()));
        }
        self.channel.validate()?;
        let links = match &self.adversary {
            Adversary::None => None,
            Adversary::InterceptResend { links } => Some(links),
            Adversary::Pauli { links, channel } => {
                channel.validate()?;
                Some(links)
            }
        };
        if let Some(LinkSet::Only(v)) = links {
            if let Some(bad) = v.iter().find(|&&r| r == 0 || r >= self.parties) {
                return Err(Error::Domain(format!(
                    "link {bad} is not a receiver (receivers are 1..{})",
                    self.parties - 1
                )));
            }
        }
        for e in &self.injected {
            if e.receiver == 0 || e.receiver >= self.parties {
                return Err(Error::Domain(format!("injection receiver {} out of range", e.receiver)));
            }
            let (idx, bound) = match e.target {
                InjectionTarget::Slot(i) => (i, 2 * self.n),
                InjectionTarget::Check(i) | InjectionTarget::Key(i) => (i, self.n),
            };
            if idx >= bound {
                return Err(Error::Domain(format!("injection target {:?} out of range", e.target)));
            }
        }
        Ok(())
    }

    pub(crate) fn injection_at(&self, receiver: usize, slot: usize, layout: &SlotLayout) -> Option<Pauli> {
        let mut acc: Option<PauliProduct> = None;
        for e in self.injected.iter().filter(|e| e.receiver == receiver) {
            let hit = match e.target {
                InjectionTarget::Slot(i) => i == slot,
                InjectionTarget::Check(i) => layout.check_slots[i] == slot,
                InjectionTarget::Key(i) => layout.key_slots[i] == slot,
            };
            if hit {
                let p = PauliProduct::single(1, 0, e.pauli);
                acc = Some(match acc {
                    Some(a) => a.mul(&p).0,
                    None => p,
                });
            }
        }
        acc.map(|p| p.get(0))
    }
}

/// Why a session stopped without a key.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AbortReason {
    /// Estimated error exceeds the fixed code's radius.
    Threshold { t: usize, radius: usize },
    /// No catalog code of usable length has radius `t`.
    NoCode { t: usize },
    InsufficientSift { sifted: usize, needed: usize },
    DecodeFailure { receiver: usize, block: usize },
}

impl AbortReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            AbortReason::Threshold { .. } => "threshold",
            AbortReason::NoCode { .. } => "no_code",
            AbortReason::InsufficientSift { .. } => "insufficient_sift",
            AbortReason::DecodeFailure { .. } => "decode_failure",
        }
    }
}

impl fmt::Display for AbortReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AbortReason::Threshold { t, radius } => write!(f, "threshold {t} exceeds code radius {radius}"),
            AbortReason::NoCode { t } => write!(f, "no code corrects {t} errors"),
            AbortReason::InsufficientSift { sifted, needed } => {
                write!(f, "only {sifted} sifted positions, {needed} needed")
            }
            AbortReason::DecodeFailure { receiver, block } => {
                write!(f, "receiver {receiver} failed to decode block {block}")
            }
        }
    }
}

/// Public classical messages, in the order they are sent.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "msg", rename_all = "snake_case")]
pub enum Announcement {
    Seed { seed: u64 },
    Bases { party: usize, bases: BitString },
    Sifted { positions: Vec<usize> },
    Permutation { perm: Vec<usize> },
    CheckPositions { slots: Vec<usize> },
    CheckBits { party: usize, bits: BitString },
    Threshold { wt_w: usize, t: usize },
    Code { name: String, n: usize, k: usize, radius: usize, blocks: usize },
    ShiftKeys { block: usize, x: BitString, z: Option<BitString> },
    Syndromes { party: usize, block: usize, bit: BitString, phase: Option<BitString> },
    BitSyndrome { party: usize, block: usize, s_x: BitString },
    Offset { block: usize, v_plus_u: BitString },
    Abort { reason: AbortReason },
}

/// Append-only record of [`Announcement`]s.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    entries: Vec<Announcement>,
}

impl Transcript {
    pub fn push(&mut self, a: Announcement) {
        self.entries.push(a);
    }

    pub fn entries(&self) -> &[Announcement] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Simulator-side facts no party sees.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    /// Per receiver, per code block: key-slot positions that were disturbed.
    pub key_block_errors: Vec<Vec<usize>>,
    /// Some block carried more disturbances than the code's radius.
    pub exceeds_radius: bool,
    /// Bits Eve obtained by intercepting.
    pub eve_measurements: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SessionResult {
    pub protocol: ProtocolKind,
    pub seed: u64,
    pub parties: usize,
    pub n: usize,
    /// One key per party, Alice first; `None` on abort.
    pub keys: Option<Vec<BitString>>,
    pub abort: Option<AbortReason>,
    pub qber: f64,
    pub wt_w: usize,
    pub t: usize,
    pub sifted_count: usize,
    /// Prepare-and-measure: sifted positions produced by the first round.
    pub first_round_sifted: usize,
    /// Prepare-and-measure: qubits sent per round.
    pub round_size: usize,
    pub code: Option<String>,
    pub transcript: Transcript,
    pub ground_truth: GroundTruth,
}

impl SessionResult {
    pub fn aborted(&self) -> bool {
        self.abort.is_some()
    }

    pub fn key_len(&self) -> usize {
        self.keys.as_ref().and_then(|k| k.first()).map_or(0, |k| k.len())
    }

    /// All parties hold the same key; `false` on abort.
    pub fn keys_equal(&self) -> bool {
        match &self.keys {
            Some(keys) => keys.windows(2).all(|w| w[0] == w[1]),
            None => false,
        }
    }
}

/// Runs one session of the given protocol.
pub fn run_session(kind: ProtocolKind, config: &ProtocolConfig) -> Result<SessionResult> {
    match kind {
        ProtocolKind::Entangled => run_entangled_based(config),
        ProtocolKind::Css => run_css_protocol(config),
        ProtocolKind::PrepareMeasure => run_prepare_measure(config),
    }
}

/// Independent generator streams of one session, so that e.g. channel noise
/// is unaffected by how many measurements a receiver performs.
pub(crate) struct SessionRng {
    pub choices: ChaCha8Rng,
    pub channel: ChaCha8Rng,
    pub measure: ChaCha8Rng,
    pub adversary: ChaCha8Rng,
}

impl SessionRng {
    pub fn new(seed: u64) -> Self {
        let stream = |s: u64| {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            r.set_stream(s);
            r
        };
        SessionRng {
            choices: stream(0),
            channel: stream(1),
            measure: stream(2),
            adversary: stream(3),
        }
    }
}

/// Which physical slots carry key and check material.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct SlotLayout {
    pub perm: Vec<usize>,
    pub key_slots: Vec<usize>,
    pub check_slots: Vec<usize>,
}

impl SlotLayout {
    pub fn random<R: Rng + ?Sized>(n: usize, extra_shuffle: bool, rng: &mut R) -> Self {
        let mut perm: Vec<usize> = (0..2 * n).collect();
        perm.shuffle(rng);
        if extra_shuffle {
            let mut second: Vec<usize> = (0..2 * n).collect();
            second.shuffle(rng);
            perm = second.iter().map(|&i| perm[i]).collect();
        }
        SlotLayout {
            key_slots: perm[..n].to_vec(),
            check_slots: perm[n..].to_vec(),
            perm,
        }
    }
}

/// Sends qubit `q` of `state` over receiver `receiver`'s link: channel
/// noise, then the adversary, then any injected error. Returns whether the
/// qubit may have been disturbed.
pub(crate) fn transmit<S: QuantumState>(
    config: &ProtocolConfig,
    state: &mut S,
    q: usize,
    receiver: usize,
    injected: Option<Pauli>,
    rngs: &mut SessionRng,
    truth: &mut GroundTruth,
) -> bool {
    let n = state.num_qubits();
    let p = config.channel.sample(&mut rngs.channel);
    state.apply_single(q, p);
    let mut disturbed = p != Pauli::I;
    match &config.adversary {
        Adversary::InterceptResend { links } if links.contains(receiver) => {
            let letter = if rngs.adversary.gen::<bool>() { Pauli::X } else { Pauli::Z };
            state.measure_pauli(&PauliProduct::single(n, q, letter), &mut rngs.adversary);
            truth.eve_measurements += 1;
            disturbed = true;
        }
        Adversary::Pauli { links, channel } if links.contains(receiver) => {
            let p = channel.sample(&mut rngs.adversary);
            state.apply_single(q, p);
            disturbed |= p != Pauli::I;
        }
        _ => {}
    }
    if let Some(p) = injected {
        state.apply_single(q, p);
        disturbed |= p != Pauli::I;
    }
    disturbed
}

/// Classical counterpart of [`transmit`] with identical generator use.
pub(crate) fn transmit_classical(
    config: &ProtocolConfig,
    qubit: &mut BbQubit,
    receiver: usize,
    injected: Option<Pauli>,
    rngs: &mut SessionRng,
    truth: &mut GroundTruth,
) -> bool {
    let p = config.channel.sample(&mut rngs.channel);
    qubit.apply(p);
    let mut disturbed = p != Pauli::I;
    match &config.adversary {
        Adversary::InterceptResend { links } if links.contains(receiver) => {
            classical::attack_intercept_resend(qubit, &mut rngs.adversary);
            truth.eve_measurements += 1;
            disturbed = true;
        }
        Adversary::Pauli { links, channel } if links.contains(receiver) => {
            let p = channel.sample(&mut rngs.adversary);
            qubit.apply(p);
            disturbed |= p != Pauli::I;
        }
        _ => {}
    }
    if let Some(p) = injected {
        qubit.apply(p);
        disturbed |= p != Pauli::I;
    }
    disturbed
}

/// Rejects backend requests a quantum protocol cannot honour. A forced
/// dense run must fit the whole session, `dense_total` qubits, under the
/// dense limit.
pub(crate) fn check_quantum_backend(requested: Backend, dense_total: usize) -> Result<()> {
    match requested {
        Backend::Classical => Err(Error::Domain(
            "the classical backend only applies to the prepare-and-measure protocol".into(),
        )),
        Backend::Dense if dense_total > DENSE_QUBIT_LIMIT => Err(Error::BackendLimit {
            qubits: dense_total,
            limit: DENSE_QUBIT_LIMIT,
        }),
        _ => Ok(()),
    }
}

/// `disagreements / (n · receivers)`.
pub(crate) fn qber(check_alice: &BitString, check_parties: &[BitString]) -> f64 {
    let total: usize = check_parties.iter().map(|c| c.xor(check_alice).weight()).sum();
    let denom = check_alice.len() * check_parties.len();
    if denom == 0 {
        0.0
    } else {
        total as f64 / denom as f64
    }
}

/// Groups key slots into code blocks and records which blocks carry more
/// disturbances than `radius`.
pub(crate) fn record_key_errors(
    truth: &mut GroundTruth,
    disturbed: &[Vec<bool>],
    blocks: usize,
    block_len: usize,
    radius: usize,
) {
    truth.key_block_errors = disturbed
        .iter()
        .map(|per_slot| {
            (0..blocks)
                .map(|b| per_slot[b * block_len..(b + 1) * block_len].iter().filter(|&&d| d).count())
                .collect()
        })
        .collect();
    truth.exceeds_radius = truth.key_block_errors.iter().flatten().any(|&w| w > radius);
}

impl SessionResult {
    pub(crate) fn start(kind: ProtocolKind, config: &ProtocolConfig) -> Self {
        let mut transcript = Transcript::default();
        transcript.push(Announcement::Seed { seed: config.seed });
        SessionResult {
            protocol: kind,
            seed: config.seed,
            parties: config.parties,
            n: config.n,
            keys: None,
            abort: None,
            qber: 0.0,
            wt_w: 0,
            t: 0,
            sifted_count: 2 * config.n,
            first_round_sifted: 0,
            round_size: 0,
            code: None,
            transcript,
            ground_truth: GroundTruth::default(),
        }
    }

    pub(crate) fn abort_with(mut self, reason: AbortReason) -> Self {
        self.transcript.push(Announcement::Abort { reason: reason.clone() });
        self.abort = Some(reason);
        self.keys = None;
        self
    }
}

/// Concrete backend for one register of `qubits` qubits.
pub(crate) fn register_backend(requested: Backend, qubits: usize) -> Backend {
    match requested {
        Backend::Auto | Backend::Classical => {
            if qubits <= DENSE_QUBIT_LIMIT {
                Backend::Dense
            } else {
                Backend::Tableau
            }
        }
        other => other,
    }
}

/// `x` with `H·x = syndrome`, from a table indexed by the syndrome value.
pub(crate) fn shift_for(reps: &[BitString], syndrome: &BitString) -> BitString {
    reps[syndrome.to_u64() as usize].clone()
}
