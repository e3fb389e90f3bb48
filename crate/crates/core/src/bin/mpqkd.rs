use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use mpqkd::codes::{catalog, file::read_codes, LinearCode};
use mpqkd::css;
use mpqkd::ghz::{exact_survival, run_verification_game, AdversaryStrategy, BdswString, QuestionDistribution};
use mpqkd::gf2::BitString;
use mpqkd::harness::{effective_master_seed, parse_config, run_and_write};
use mpqkd::pauli::{Pauli, PauliProduct};
use mpqkd::protocols::equivalence_sweep;
use mpqkd::{Error, Result};

#[derive(Parser)]
#[command(name = "mpqkd", version, about = "Multiparty quantum key distribution simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a batch experiment described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Print parameters of built-in codes or validate a code file.
    Codes {
        /// Code definition file to validate.
        #[arg(long)]
        file: Option<PathBuf>,
    },
    /// Play the GHZ verification game.
    Game {
        #[arg(long, default_value_t = 3)]
        parties: usize,
        #[arg(long, default_value_t = 2)]
        blocks: usize,
        #[arg(short, long, default_value_t = 10)]
        m: usize,
        #[arg(long, value_enum, default_value_t = Strategy::Honest)]
        strategy: Strategy,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        nonzero: bool,
    },
    /// Dephasing and protocol-equivalence checks over every key and shift.
    Oracle {
        /// `steane`, `repetition3` or `trivialN`.
        #[arg(long, default_value = "repetition3")]
        code: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Strategy {
    Honest,
    /// A fixed label with one wrong bit.
    OneWrong,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            config,
            seed,
            trials,
            out,
            workers,
        } => {
            let text = std::fs::read_to_string(&config).map_err(|e| Error::Io(format!("{}: {e}", config.display())))?;
            let mut spec = parse_config(&text)?;
            spec.config.seed = effective_master_seed(spec.config.seed)?;
            if let Some(s) = seed {
                spec.config.seed = s;
            }
            if let Some(t) = trials {
                spec.trials = t;
            }
            if out.is_some() {
                spec.output = out;
            }
            if workers.is_some() {
                spec.workers = workers;
            }
            let report = run_and_write(&spec)?;
            if spec.output.is_none() {
                print!("{}", report.to_json_lines());
            } else {
                println!("{}", serde_json::to_string(&report.summary).expect("summary serializes"));
            }
            Ok(())
        }
        Command::Codes { file } => {
            let codes: Vec<(String, LinearCode)> = match file {
                Some(path) => read_codes(&path)?
                    .into_iter()
                    .enumerate()
                    .map(|(i, c)| (format!("{}#{i}", path.display()), c))
                    .collect(),
                None => ["repetition3", "hamming74", "simplex73"]
                    .iter()
                    .map(|n| (n.to_string(), catalog::by_name(n).expect("built in")))
                    .collect(),
            };
            for (name, c) in &codes {
                let d = c.d().map_or("?".to_string(), |d| d.to_string());
                println!("{name}: [{}, {}, {d}] corrects {}", c.n(), c.k(), c.t());
            }
            if codes.is_empty() {
                println!("no codes");
            }
            for name in ["trivial1", "repetition3", "steane"] {
                let q = css::by_name(name).expect("built in");
                println!("css {name}: [[{}, {}]] corrects {}", q.n(), q.k(), q.t());
            }
            Ok(())
        }
        Command::Game {
            parties,
            blocks,
            m,
            strategy,
            trials,
            seed,
            nonzero,
        } => {
            let dist = if nonzero {
                QuestionDistribution::NonZero
            } else {
                QuestionDistribution::Uniform
            };
            let strat = match strategy {
                Strategy::Honest => AdversaryStrategy::Honest { parties, blocks },
                Strategy::OneWrong => {
                    let mut bits = BitString::ones(parties * blocks);
                    bits.flip(0);
                    AdversaryStrategy::FixedString(BdswString::new(parties, bits)?)
                }
            };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut accepted = 0usize;
            for _ in 0..trials {
                accepted += run_verification_game(&strat, m, dist, &mut rng)?.accepted as usize;
            }
            let label = strat.reveal(&mut rng)?;
            println!(
                "accepted {accepted}/{trials} ({:.4}); exact acceptance {:.6}",
                accepted as f64 / trials.max(1) as f64,
                exact_survival(&label, m, dist)
            );
            Ok(())
        }
        Command::Oracle { code, seed } => {
            let q = css::by_name(&code).ok_or_else(|| Error::Domain(format!("unknown code `{code}`")))?;
            let n = q.n();
            let mut worst_dephase: f64 = 0.0;
            for k in q.coset_representatives() {
                for xi in 0..1u64 << n {
                    let r = q.dephase_average(&k, &BitString::from_u64(n, xi))?;
                    worst_dephase = worst_dephase.max(r.max_abs_diff);
                }
            }
            let mut errors = vec![PauliProduct::identity(n)];
            for j in 0..n {
                for p in [Pauli::X, Pauli::Y, Pauli::Z] {
                    errors.push(PauliProduct::single(n, j, p));
                }
            }
            let reports = equivalence_sweep(&q, &errors, seed)?;
            let worst = reports.iter().map(|r| r.max_abs_diff).fold(0.0, f64::max);
            let key_mismatch = reports.iter().filter(|r| !r.keys_equal).count();
            println!("dephasing: max |Δρ| = {worst_dephase:.3e}");
            println!(
                "equivalence: {} cases, max |Δρ| = {worst:.3e}, key mismatches {key_mismatch}",
                reports.len()
            );
            if worst > 1e-10 {
                return Err(Error::Divergence(format!("density matrices differ by {worst:e}")));
            }
            Ok(())
        }
    }
}
