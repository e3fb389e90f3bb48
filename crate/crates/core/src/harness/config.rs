//! `key = value` experiment files.
//!
//! ```text
//! # three parties, eight key bits
//! protocol = pm
//! parties = 3
//! n = 8
//! channel = px=0.01 pz=0.01
//! adversary = intercept_resend links=2
//! ```

use std::path::PathBuf;

use crate::backend::PauliChannel;
use crate::error::{Error, Result};
use crate::ghz::QuestionDistribution;
use crate::protocols::{Adversary, Backend, CodeCatalog, LinkSet, ProtocolConfig, ProtocolKind};

/// What an experiment runs per session.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentKind {
    Protocol(ProtocolKind),
    Equivalence,
    VerificationGame,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::Protocol(p) => p.as_str(),
            ExperimentKind::Equivalence => "equivalence",
            ExperimentKind::VerificationGame => "verification_game",
        }
    }
}

/// Label the cheating side of the verification game hands over.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum GameStrategy {
    #[default]
    Honest,
    /// A uniformly random label other than the all-ones string.
    RandomWrong,
}

#[derive(Clone, Debug)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    /// Session template; its seed is the master seed.
    pub config: ProtocolConfig,
    pub trials: usize,
    pub output: Option<PathBuf>,
    pub workers: Option<usize>,
    /// Questions per verification game.
    pub questions: usize,
    pub distribution: QuestionDistribution,
    pub strategy: GameStrategy,
}

impl ExperimentSpec {
    pub fn new(kind: ExperimentKind, config: ProtocolConfig) -> Self {
        ExperimentSpec {
            kind,
            config,
            trials: 100,
            output: None,
            workers: None,
            questions: 10,
            distribution: QuestionDistribution::Uniform,
            strategy: GameStrategy::Honest,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.config.seed
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Domain("trials must be at least 1".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::Domain("workers must be at least 1".into()));
        }
        if self.kind == ExperimentKind::VerificationGame && self.questions == 0 {
            return Err(Error::Domain("m must be at least 1".into()));
        }
        self.config.validate()
    }
}

/// Parses and validates a configuration file.
pub fn parse_config(text: &str) -> Result<ExperimentSpec> {
    let mut kind = None;
    let mut spec = ExperimentSpec::new(ExperimentKind::Equivalence, ProtocolConfig::new(3, 8));
    let mut seen: Vec<String> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(Error::Config {
                line,
                key: content.to_string(),
                message: "expected `key = value`".into(),
            });
        };
        let key = key.trim();
        let value = value.trim();
        let fail = |message: String| Error::Config {
            line,
            key: key.to_string(),
            message,
        };
        if seen.iter().any(|k| k == key) {
            return Err(fail("duplicate key".into()));
        }
        seen.push(key.to_string());
        let cfg = &mut spec.config;
        match key {
            "protocol" => {
                kind = Some(match value {
                    "entangled" => ExperimentKind::Protocol(ProtocolKind::Entangled),
                    "css" => ExperimentKind::Protocol(ProtocolKind::Css),
                    "pm" => ExperimentKind::Protocol(ProtocolKind::PrepareMeasure),
                    "equivalence" => ExperimentKind::Equivalence,
                    "verification_game" => ExperimentKind::VerificationGame,
                    other => return Err(fail(format!("unknown protocol `{other}`"))),
                })
            }
            "parties" => {
                cfg.parties = parse_num(value).map_err(&fail)?;
                if cfg.parties < 3 {
                    return Err(fail("at least 3 parties are required".into()));
                }
            }
            "n" => {
                cfg.n = parse_num(value).map_err(&fail)?;
                if cfg.n == 0 {
                    return Err(fail("n must be at least 1".into()));
                }
            }
            "c" => {
                let c: f64 = value.parse().map_err(|_| fail(format!("`{value}` is not a number")))?;
                if !(c >= 0.0 && c.is_finite()) {
                    return Err(fail(format!("c = {value} is out of range (must be ≥ 0)")));
                }
                cfg.c = c;
            }
            "css" => {
                cfg.catalog = CodeCatalog::by_name(value).ok_or_else(|| fail(format!("unknown code catalog `{value}`")))?
            }
            "channel" => cfg.channel = parse_channel(value).map_err(&fail)?,
            "adversary" => cfg.adversary = parse_adversary(value).map_err(&fail)?,
            "backend" => {
                cfg.backend = match value {
                    "auto" => Backend::Auto,
                    "dense" => Backend::Dense,
                    "tableau" => Backend::Tableau,
                    "classical" => Backend::Classical,
                    other => return Err(fail(format!("unknown backend `{other}`"))),
                }
            }
            "seed" => cfg.seed = parse_num(value).map_err(&fail)?,
            "trials" => {
                spec.trials = parse_num(value).map_err(&fail)?;
                if spec.trials == 0 {
                    return Err(fail("trials must be at least 1".into()));
                }
            }
            "out" => spec.output = Some(PathBuf::from(value)),
            "m" => {
                spec.questions = parse_num(value).map_err(&fail)?;
                if spec.questions == 0 {
                    return Err(fail("m must be at least 1".into()));
                }
            }
            "workers" => {
                let w: usize = parse_num(value).map_err(&fail)?;
                if w == 0 {
                    return Err(fail("workers must be at least 1".into()));
                }
                spec.workers = Some(w);
            }
            "sift_rounds" => {
                cfg.sift_rounds = parse_num(value).map_err(&fail)?;
                if cfg.sift_rounds == 0 {
                    return Err(fail("sift_rounds must be at least 1".into()));
                }
            }
            "reveal_z" => cfg.reveal_z = parse_bool(value).map_err(&fail)?,
            "extra_shuffle" => cfg.extra_shuffle = parse_bool(value).map_err(&fail)?,
            "questions" => {
                spec.distribution = match value {
                    "uniform" => QuestionDistribution::Uniform,
                    "nonzero" => QuestionDistribution::NonZero,
                    other => return Err(fail(format!("unknown question distribution `{other}`"))),
                }
            }
            "strategy" => {
                spec.strategy = match value {
                    "honest" => GameStrategy::Honest,
                    "random_wrong" => GameStrategy::RandomWrong,
                    other => return Err(fail(format!("unknown strategy `{other}`"))),
                }
            }
            other => return Err(fail(format!("unknown key `{other}`"))),
        }
    }
    spec.kind = kind.ok_or_else(|| Error::Config {
        line: 0,
        key: "protocol".into(),
        message: "missing required key".into(),
    })?;
    spec.validate().map_err(|e| Error::Config {
        line: 0,
        key: "config".into(),
        message: e.to_string(),
    })?;
    Ok(spec)
}

fn parse_num<T: std::str::FromStr>(value: &str) -> std::result::Result<T, String> {
    value.parse().map_err(|_| format!("`{value}` is not a non-negative integer"))
}

fn parse_bool(value: &str) -> std::result::Result<bool, String> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("`{value}` is not a boolean")),
    }
}

/// `noiseless` or any of `px=…`, `py=…`, `pz=…`.
pub fn parse_channel(value: &str) -> std::result::Result<PauliChannel, String> {
    if value == "noiseless" {
        return Ok(PauliChannel::NOISELESS);
    }
    channel_from_tokens(value.split_whitespace())
}

fn channel_from_tokens<'a>(tokens: impl Iterator<Item = &'a str>) -> std::result::Result<PauliChannel, String> {
    let mut ch = PauliChannel::NOISELESS;
    for tok in tokens {
        let (k, v) = tok.split_once('=').ok_or_else(|| format!("expected `px=…`, got `{tok}`"))?;
        let p: f64 = v.parse().map_err(|_| format!("`{v}` is not a probability"))?;
        match k {
            "px" => ch.p_x = p,
            "py" => ch.p_y = p,
            "pz" => ch.p_z = p,
            _ => return Err(format!("unknown channel parameter `{k}`")),
        }
    }
    ch.validate().map_err(|e| e.to_string())?;
    Ok(ch)
}

/// `none`, `intercept_resend [links=…]` or `pauli [links=…] px=… py=… pz=…`,
/// where links is `all` or a comma-separated list of receivers.
pub fn parse_adversary(value: &str) -> std::result::Result<Adversary, String> {
    let mut tokens = value.split_whitespace();
    let head = tokens.next().unwrap_or("");
    let mut links = LinkSet::All;
    let mut rest = Vec::new();
    for tok in tokens {
        match tok.strip_prefix("links=") {
            Some("all") => links = LinkSet::All,
            Some(list) => {
                let parsed: std::result::Result<Vec<usize>, _> = list.split(',').map(str::parse).collect();
                links = LinkSet::Only(parsed.map_err(|_| format!("bad link list `{list}`"))?);
            }
            None => rest.push(tok),
        }
    }
    match head {
        "none" if rest.is_empty() => Ok(Adversary::None),
        "intercept_resend" if rest.is_empty() => Ok(Adversary::InterceptResend { links }),
        "pauli" => Ok(Adversary::Pauli {
            links,
            channel: channel_from_tokens(rest.into_iter())?,
        }),
        "none" | "intercept_resend" => Err(format!("unexpected parameters {rest:?}")),
        other => Err(format!("unknown adversary `{other}`")),
    }
}
