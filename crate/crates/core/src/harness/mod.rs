//! Batch experiments: many seeded sessions, one JSON record per line and a
//! summary line at the end.

mod config;

pub use config::{parse_adversary, parse_channel, parse_config, ExperimentKind, ExperimentSpec, GameStrategy};

use std::io::Write;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ghz::{run_verification_game, AdversaryStrategy, BdswString};
use crate::gf2::BitString;
use crate::pauli::{Pauli, PauliProduct};
use crate::protocols::equivalence::{compare_protocol_equivalence, EquivalenceConfig};
use crate::protocols::{run_session, ProtocolKind};

/// Environment variable that replaces the master seed.
pub const SEED_ENV: &str = "MPQKD_SEED";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub session_index: usize,
    pub seed: u64,
    pub aborted: bool,
    pub abort_reason: Option<String>,
    pub qber: f64,
    pub wt_w: usize,
    pub t: usize,
    pub sifted_count: usize,
    pub key_len: usize,
    pub keys_equal: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub round_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_round_sifted: Option<usize>,
    /// Set when the session could not run at all, e.g. a backend limit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl SessionRecord {
    fn empty(session_index: usize, seed: u64) -> Self {
        SessionRecord {
            session_index,
            seed,
            aborted: false,
            abort_reason: None,
            qber: 0.0,
            wt_w: 0,
            t: 0,
            sifted_count: 0,
            key_len: 0,
            keys_equal: false,
            round_size: None,
            first_round_sifted: None,
            error: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub protocol: String,
    pub master_seed: u64,
    pub sessions: usize,
    pub errors: usize,
    pub abort_rate: f64,
    pub mean_qber: f64,
    /// Over non-aborted sessions only; `None` when every session aborted.
    pub key_agreement_rate: Option<f64>,
    pub mean_key_length: f64,
    /// Mean fraction of first-round positions surviving sifting
    /// (prepare-and-measure only).
    pub sift_retention: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AggregateReport {
    pub summary: Summary,
    pub records: Vec<SessionRecord>,
}

impl AggregateReport {
    pub fn sessions(&self) -> usize {
        self.summary.sessions
    }

    pub fn abort_rate(&self) -> f64 {
        self.summary.abort_rate
    }

    pub fn key_agreement_rate(&self) -> Option<f64> {
        self.summary.key_agreement_rate
    }

    /// One record per line, then `{"summary": …}`.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("records serialize"));
            out.push('\n');
        }
        out.push_str(&serde_json::to_string(&SummaryLine { summary: &self.summary }).expect("summary serializes"));
        out.push('\n');
        out
    }

    /// Parses output written by [`to_json_lines`](Self::to_json_lines) and
    /// checks the summary against statistics recomputed from the records.
    pub fn from_json_lines(text: &str) -> Result<Self> {
        let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
        let (last, body) = lines.split_last().ok_or_else(|| Error::Parse("empty report".into()))?;
        let records = body
            .iter()
            .map(|l| serde_json::from_str(l).map_err(|e| Error::Parse(format!("bad record: {e}"))))
            .collect::<Result<Vec<SessionRecord>>>()?;
        let stored: OwnedSummaryLine =
            serde_json::from_str(last).map_err(|e| Error::Parse(format!("bad summary: {e}")))?;
        let recomputed = summarize(&stored.summary.protocol, stored.summary.master_seed, &records);
        if !summaries_match(&recomputed, &stored.summary) {
            return Err(Error::Parse(format!(
                "summary does not match records: stored {:?}, recomputed {:?}",
                stored.summary, recomputed
            )));
        }
        Ok(AggregateReport {
            summary: stored.summary,
            records,
        })
    }
}

#[derive(Serialize)]
struct SummaryLine<'a> {
    summary: &'a Summary,
}

#[derive(Deserialize)]
struct OwnedSummaryLine {
    summary: Summary,
}

fn summaries_match(a: &Summary, b: &Summary) -> bool {
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-9 * (1.0 + x.abs());
    let close_opt = |x: Option<f64>, y: Option<f64>| match (x, y) {
        (Some(x), Some(y)) => close(x, y),
        (None, None) => true,
        _ => false,
    };
    a.protocol == b.protocol
        && a.sessions == b.sessions
        && a.errors == b.errors
        && close(a.abort_rate, b.abort_rate)
        && close(a.mean_qber, b.mean_qber)
        && close_opt(a.key_agreement_rate, b.key_agreement_rate)
        && close(a.mean_key_length, b.mean_key_length)
        && close_opt(a.sift_retention, b.sift_retention)
}

/// Session `i`'s seed: the first word of stream `i` of the master generator.
pub fn session_seed(master: u64, index: usize) -> u64 {
    let mut r = ChaCha8Rng::seed_from_u64(master);
    r.set_stream(index as u64);
    r.next_u64()
}

/// Master seed after applying the environment override.
pub fn effective_master_seed(configured: u64) -> Result<u64> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("{SEED_ENV}=`{v}` is not an unsigned integer"))),
        Err(_) => Ok(configured),
    }
}

/// Runs every session and aggregates the results. Sessions run on a pool of
/// `spec.workers` threads; records come back in index order regardless.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<AggregateReport> {
    spec.validate()?;
    let master = spec.master_seed();
    let run_all = || -> Vec<SessionRecord> {
        (0..spec.trials)
            .into_par_iter()
            .map(|i| run_one(spec, i, session_seed(master, i)))
            .collect()
    };
    let records = match spec.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::Domain(format!("cannot start {w} workers: {e}")))?
            .install(run_all),
        None => run_all(),
    };
    Ok(AggregateReport {
        summary: summarize(spec.kind.as_str(), master, &records),
        records,
    })
}

/// Runs the experiment and writes its JSON lines to `spec.output`, if set.
pub fn run_and_write(spec: &ExperimentSpec) -> Result<AggregateReport> {
    let report = run_experiment(spec)?;
    if let Some(path) = &spec.output {
        let mut f = std::fs::File::create(path)?;
        f.write_all(report.to_json_lines().as_bytes())?;
    }
    Ok(report)
}

fn run_one(spec: &ExperimentSpec, index: usize, seed: u64) -> SessionRecord {
    let mut rec = SessionRecord::empty(index, seed);
    let outcome = match spec.kind {
        ExperimentKind::Protocol(kind) => protocol_record(spec, kind, seed, &mut rec),
        ExperimentKind::Equivalence => equivalence_record(spec, seed, &mut rec),
        ExperimentKind::VerificationGame => game_record(spec, seed, &mut rec),
    };
    if let Err(e) = outcome {
        rec = SessionRecord::empty(index, seed);
        rec.error = Some(e.to_string());
    }
    rec
}

fn protocol_record(spec: &ExperimentSpec, kind: ProtocolKind, seed: u64, rec: &mut SessionRecord) -> Result<()> {
    let mut cfg = spec.config.clone();
    cfg.seed = seed;
    let r = run_session(kind, &cfg)?;
    rec.aborted = r.aborted();
    rec.abort_reason = r.abort.as_ref().map(|a| a.as_str().to_string());
    rec.qber = r.qber;
    rec.wt_w = r.wt_w;
    rec.t = r.t;
    rec.sifted_count = r.sifted_count;
    rec.key_len = r.key_len();
    rec.keys_equal = r.keys_equal();
    if kind == ProtocolKind::PrepareMeasure {
        rec.round_size = Some(r.round_size);
        rec.first_round_sifted = Some(r.first_round_sifted);
    }
    Ok(())
}

/// One random key, shift and single-qubit error on the smallest catalog
/// code, compared across the two protocols.
fn equivalence_record(spec: &ExperimentSpec, seed: u64, rec: &mut SessionRecord) -> Result<()> {
    let code = spec
        .config
        .catalog
        .entries()
        .iter()
        .filter(|c| c.n() <= 6)
        .max_by_key(|c| (c.t(), c.n()))
        .ok_or_else(|| Error::Domain("the catalog has no code of length ≤ 6".into()))?
        .clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = code.n();
    let key = BitString::random(code.k(), &mut rng);
    let x = BitString::random(n, &mut rng);
    let letter = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][rng.gen_range(0..4)];
    let error = PauliProduct::single(n, rng.gen_range(0..n), letter);
    let mut cfg = EquivalenceConfig::new(code, key, x);
    cfg.error = error;
    cfg.seed = rng.gen();
    let r = compare_protocol_equivalence(&cfg)?;
    rec.aborted = false;
    rec.key_len = r.css_key.len();
    rec.keys_equal = r.passed;
    Ok(())
}

/// A rejected game counts as an abort.
fn game_record(spec: &ExperimentSpec, seed: u64, rec: &mut SessionRecord) -> Result<()> {
    let parties = spec.config.parties;
    let blocks = spec.config.n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let strategy = match spec.strategy {
        GameStrategy::Honest => AdversaryStrategy::Honest { parties, blocks },
        GameStrategy::RandomWrong => {
            let len = parties * blocks;
            let ones = BitString::ones(len);
            let label = loop {
                let b = BitString::random(len, &mut rng);
                if b != ones {
                    break b;
                }
            };
            AdversaryStrategy::FixedString(BdswString::new(parties, label)?)
        }
    };
    let out = run_verification_game(&strategy, spec.questions, spec.distribution, &mut rng)?;
    rec.aborted = !out.accepted;
    rec.abort_reason = (!out.accepted).then(|| "rejected".to_string());
    rec.keys_equal = out.accepted && !out.cheated;
    Ok(())
}

fn summarize(protocol: &str, master_seed: u64, records: &[SessionRecord]) -> Summary {
    let ok: Vec<&SessionRecord> = records.iter().filter(|r| r.error.is_none()).collect();
    let completed: Vec<&&SessionRecord> = ok.iter().filter(|r| !r.aborted).collect();
    let mean = |xs: &mut dyn Iterator<Item = f64>, count: usize| {
        if count == 0 {
            0.0
        } else {
            xs.sum::<f64>() / count as f64
        }
    };
    let abort_rate = mean(&mut ok.iter().map(|r| r.aborted as u8 as f64), ok.len());
    let mean_qber = mean(&mut ok.iter().map(|r| r.qber), ok.len());
    let key_agreement_rate =
        (!completed.is_empty()).then(|| mean(&mut completed.iter().map(|r| r.keys_equal as u8 as f64), completed.len()));
    let mean_key_length = mean(&mut completed.iter().map(|r| r.key_len as f64), completed.len());
    let sifted: Vec<f64> = ok
        .iter()
        .filter_map(|r| match (r.first_round_sifted, r.round_size) {
            (Some(s), Some(m)) if m > 0 => Some(s as f64 / m as f64),
            _ => None,
        })
        .collect();
    let sift_retention = (!sifted.is_empty()).then(|| sifted.iter().sum::<f64>() / sifted.len() as f64);
    Summary {
        protocol: protocol.to_string(),
        master_seed,
        sessions: records.len(),
        errors: records.len() - ok.len(),
        abort_rate,
        mean_qber,
        key_agreement_rate,
        mean_key_length,
        sift_retention,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn session_seeds_differ() {
        let a: Vec<u64> = (0..100).map(|i| session_seed(7, i)).collect();
        let mut b = a.clone();
        b.sort();
        b.dedup();
        assert_eq!(b.len(), 100);
        assert_eq!(session_seed(7, 3), a[3]);
    }

    #[test]
    fn noiseless_pm_batch() {
        let mut spec = parse_config("protocol = pm\nparties = 3\nn = 4\ntrials = 20").unwrap();
        spec.workers = Some(2);
        let rep = run_experiment(&spec).unwrap();
        assert_eq!(rep.sessions(), 20);
        assert_eq!(rep.abort_rate(), 0.0);
        assert_eq!(rep.key_agreement_rate(), Some(1.0));
        assert!(rep.summary.sift_retention.unwrap() > 0.15);
    }

    #[test]
    fn report_round_trips_and_detects_tampering() {
        let spec = parse_config("protocol = entangled\nn = 2\ntrials = 5\nseed = 3").unwrap();
        let text = run_experiment(&spec).unwrap().to_json_lines();
        let back = AggregateReport::from_json_lines(&text).unwrap();
        assert_eq!(back.records.len(), 5);
        let tampered = text.replacen("\"keys_equal\":true", "\"keys_equal\":false", 1);
        assert!(AggregateReport::from_json_lines(&tampered).is_err());
    }

    #[test]
    fn output_is_independent_of_worker_count() {
        let mut spec = parse_config("protocol = css\nn = 7\ntrials = 12\nchannel = px=0.05\nseed = 9").unwrap();
        spec.workers = Some(1);
        let a = run_experiment(&spec).unwrap().to_json_lines();
        spec.workers = Some(4);
        let b = run_experiment(&spec).unwrap().to_json_lines();
        assert_eq!(a, b);
    }

    #[test]
    fn backend_overflow_becomes_an_error_record() {
        let spec = parse_config("protocol = entangled\nn = 4\nbackend = dense\ntrials = 2").unwrap();
        let rep = run_experiment(&spec).unwrap();
        assert!(rep.records.iter().all(|r| r.error.is_some()));
        assert_eq!(rep.summary.errors, 2);
    }

    #[test]
    fn games_and_equivalence_run() {
        let spec = parse_config("protocol = verification_game\nn = 2\nm = 10\nstrategy = random_wrong\ntrials = 50").unwrap();
        let rep = run_experiment(&spec).unwrap();
        assert!(rep.abort_rate() > 0.9);
        let spec = parse_config("protocol = equivalence\ncss = repetition\ntrials = 10").unwrap();
        let rep = run_experiment(&spec).unwrap();
        assert_eq!(rep.key_agreement_rate(), Some(1.0));
    }
}
