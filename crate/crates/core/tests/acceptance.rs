//! Acceptance suite. Prints one `PASS`/`FAIL` line per criterion and exits
//! non-zero if any criterion fails.

use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mpqkd::backend::crosscheck::{distribution_check, random_program};
use mpqkd::backend::{ghz_basis_state, DenseState, QuantumState, Tableau};
use mpqkd::codes::{catalog, LinearCode};
use mpqkd::css::{self, CssCode, CssParameters};
use mpqkd::ghz::{
    bdsw_decode, bdsw_encode, collapse_distribution, exact_survival, ghz_generators, run_verification_game,
    AdversaryStrategy, BdswString, QuestionDistribution,
};
use mpqkd::gf2::{bits, BinaryMatrix, BitString};
use mpqkd::harness::{run_experiment, ExperimentKind, ExperimentSpec};
use mpqkd::pauli::{Pauli, PauliProduct};
use mpqkd::protocols::{
    compare_protocol_equivalence, equivalence_sweep, run_session, Adversary, EquivalenceConfig, LinkSet,
    ProtocolConfig, ProtocolKind,
};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check, Duration);

/// Rows as printed: computational pair, relative sign, then the signs of
/// `X₁X₂X₃`, `Z₁Z₂`, `Z₂Z₃`.
const TABLE_1: [(&str, i8, [i8; 3]); 8] = [
    ("000", 1, [1, 1, 1]),
    ("001", 1, [1, 1, -1]),
    ("011", 1, [1, -1, 1]),
    ("010", 1, [1, -1, -1]),
    ("000", -1, [-1, 1, 1]),
    ("001", -1, [-1, 1, -1]),
    ("011", -1, [-1, -1, 1]),
    ("010", -1, [-1, -1, -1]),
];

const TABLE_2: [&str; 8] = ["111", "110", "101", "100", "011", "010", "001", "000"];

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e2s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// `(|a⟩ + sign·|ā⟩)/√2` built directly from basis states.
fn literal_pair(a: &str, sign: i8) -> DenseState {
    let low = bits(a);
    let high = low.xor(&BitString::ones(low.len()));
    let r = std::f64::consts::FRAC_1_SQRT_2;
    DenseState::from_bits(&low)
        .unwrap()
        .add_scaled(
            &DenseState::from_bits(&high).unwrap(),
            Complex64::new(r, 0.0),
            Complex64::new(r * sign as f64, 0.0),
        )
        .unwrap()
}

fn table_1() -> Check {
    let gens = ghz_generators(3);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for (a, sign, expected) in TABLE_1 {
        let literal = literal_pair(a, sign);
        let built = ghz_basis_state(&expected, std::f64::consts::FRAC_PI_4).map_err(e2s)?;
        let f = literal.fidelity(&built).map_err(e2s)?;
        ensure((f - 1.0).abs() < 1e-12, || format!("{a}{sign:+}: basis state fidelity {f}"))?;

        let mut tab = Tableau::zero(3);
        tab.h(0);
        tab.cx(0, 1);
        tab.cx(0, 2);
        for (q, c) in a.chars().enumerate() {
            if c == '1' {
                tab.x(q);
            }
        }
        if sign == -1 {
            tab.z(0);
        }
        let f = tab.to_dense().map_err(e2s)?.fidelity(&literal).map_err(e2s)?;
        ensure((f - 1.0).abs() < 1e-12, || format!("{a}{sign:+}: tableau state fidelity {f}"))?;

        for (g, want) in gens.iter().zip(expected) {
            for _ in 0..4 {
                let mut d = literal.clone();
                let mut t = tab.clone();
                let dv = d.measure_pauli(g, &mut rng).eigenvalue;
                let tv = t.measure_pauli(g, &mut rng).eigenvalue;
                ensure(dv == want && tv == want, || {
                    format!("{a}{sign:+} {g}: dense {dv}, tableau {tv}, table {want}")
                })?;
            }
        }
    }
    Ok("8 states, 3 observables, dense and tableau".into())
}

fn table_2() -> Check {
    for ((_, _, signs), label) in TABLE_1.iter().zip(TABLE_2) {
        let enc = bdsw_encode(signs).map_err(e2s)?;
        ensure(enc == bits(label), || format!("{signs:?} encodes to {enc}, table {label}"))?;
        let dec = bdsw_decode(&bits(label));
        ensure(dec == signs.to_vec(), || format!("{label} decodes to {dec:?}"))?;
    }
    Ok("8 rows".into())
}

/// A random `[n, k1]` code and the subcode spanned by its first `k2` rows.
fn random_nested_pair(n: usize, k1: usize, k2: usize, seed: u64) -> CssCode {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let rows: Vec<BitString> = (0..k1).map(|_| BitString::random(n, &mut rng)).collect();
        let g1 = BinaryMatrix::from_rows(n, rows.clone()).unwrap();
        if g1.rank() != k1 {
            continue;
        }
        let g2 = BinaryMatrix::from_rows(n, rows[..k2].to_vec()).unwrap();
        let c1 = LinearCode::from_generator(g1, None).unwrap();
        let c2 = LinearCode::from_generator(g2, None).unwrap();
        return CssCode::new("random", c1, c2).unwrap();
    }
}

fn coset_states(code: &CssCode) -> Result<usize, String> {
    let words: Vec<BitString> = code.c1().codewords().collect();
    let states: Vec<DenseState> = words
        .iter()
        .map(|v| code.codeword_amplitudes(v))
        .collect::<mpqkd::Result<_>>()
        .map_err(e2s)?;
    let g2 = code.c2().generator();
    let mut pairs = 0;
    for (v, a) in words.iter().zip(&states) {
        for (w, b) in words.iter().zip(&states) {
            let same = g2.row_space_contains(&v.xor(w));
            let overlap = a.inner(b).map_err(e2s)?.norm();
            let want = if same { 1.0 } else { 0.0 };
            ensure((overlap - want).abs() < 1e-10, || {
                format!("{}: |⟨{v}|{w}⟩| = {overlap}, same coset {same}", code.name())
            })?;
            pairs += 1;
        }
    }
    Ok(pairs)
}

fn coset_equality() -> Check {
    let steane = coset_states(&css::steane())?;
    let random = coset_states(&random_nested_pair(10, 5, 2, 3))?;
    Ok(format!("{steane} Steane pairs, {random} pairs on a random [10,5]/[10,2] pair"))
}

fn steane_single_errors() -> Check {
    let code = css::steane();
    let n = code.n();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for v in code.coset_representatives() {
        let params = CssParameters::random(n, &mut rng);
        let clean = code.parameterized_codeword(&v, &params).map_err(e2s)?;
        for q in 0..n {
            for p in [Pauli::X, Pauli::Y, Pauli::Z] {
                let mut state = clean.clone();
                state.apply_pauli(&PauliProduct::single(n, q, p));
                let qubits: Vec<usize> = (0..n).collect();
                let (bit, phase) = code.measure_syndromes(&mut state, &qubits, &params, &mut rng);
                state.apply_pauli(&code.correct(&bit, &phase).map_err(e2s)?);
                let f = state.fidelity(&clean).map_err(e2s)?;
                worst = worst.max((f - 1.0).abs());
                cases += 1;
            }
        }
    }
    ensure(worst <= 1e-10, || format!("worst |F − 1| = {worst:e}"))?;
    Ok(format!("{cases} cases (21 errors × 2 keys), worst |F − 1| = {worst:.1e}"))
}

/// `[6, 2]` code spanned by `111000`, `000111`, over the repetition code.
fn two_coset_code() -> CssCode {
    CssCode::new(
        "rep6",
        LinearCode::from_generator(BinaryMatrix::from_strs(6, &["111000", "000111"]).unwrap(), None).unwrap(),
        catalog::repetition(6),
    )
    .unwrap()
}

fn dephasing() -> Check {
    let mut cases = 0;
    for code in [css::repetition3(), two_coset_code()] {
        let n = code.n();
        ensure(code.k() == 1, || format!("{} has {} cosets", code.name(), 1 << code.k()))?;
        let c2: Vec<BitString> = code.c2().codewords().collect();
        let probe = DenseState::zero(n).map_err(e2s)?;
        for k in code.c1().codewords() {
            for xi in 0..1u64 << n {
                let x = BitString::from_u64(n, xi);
                let report = code.dephase_average(&k, &x).map_err(e2s)?;
                // Independent diagonal: weight 1/|C2| on each k + w + x.
                let mut diag = vec![0.0; 1 << n];
                for w in &c2 {
                    diag[probe.index_of(&k.xor(w).xor(&x))] += 1.0 / c2.len() as f64;
                }
                for (r, &d) in diag.iter().enumerate() {
                    for c in 0..1usize << n {
                        let want = if r == c { d } else { 0.0 };
                        let got = report.averaged.entry(r, c);
                        ensure((got - want).norm() <= 1e-10, || {
                            format!("{} k'={k} x={x}: ρ[{r},{c}] = {got}, expected {want}", code.name())
                        })?;
                    }
                }
                cases += 1;
            }
        }
    }
    for n in 1..=6 {
        for xi in 0..1u64 << n {
            let x = BitString::from_u64(n, xi);
            let direct: i64 = (0..1u64 << n)
                .map(|zi| if (xi & zi).count_ones() % 2 == 1 { -1 } else { 1 })
                .sum();
            let want = if xi == 0 { 1i64 << n } else { 0 };
            ensure(direct == want && css::phase_sum(&x) == want, || {
                format!("phase sum for x = {x}: {} (direct {direct})", css::phase_sum(&x))
            })?;
        }
    }
    Ok(format!("{cases} (k', x) pairs on n = 3 and n = 6; phase sums for n ≤ 6"))
}

fn sigma_check(hits: usize, trials: usize, p: f64) -> (f64, bool) {
    let observed = hits as f64 / trials as f64;
    let sigma = (p * (1.0 - p) / trials as f64).sqrt();
    let z = (observed - p) / sigma;
    (z, z.abs() <= 3.0)
}

fn verification_game() -> Check {
    // Exact survival against an independent count of agreeing questions.
    for blocks in 1..=2 {
        let len = 3 * blocks;
        for li in 0..1u64 << len {
            let label = BitString::from_u64(len, li);
            if label == BitString::ones(len) {
                continue;
            }
            let diff = li ^ ((1u64 << len) - 1);
            let agree = (0..1u64 << len).filter(|s| (diff & s).count_ones().is_multiple_of(2)).count();
            ensure(agree * 2 == 1 << len, || format!("{label}: {agree} agreeing questions"))?;
            let r = BdswString::new(3, label.clone()).map_err(e2s)?;
            for m in 1..=12 {
                let p = exact_survival(&r, m, QuestionDistribution::Uniform);
                ensure(p == 0.5f64.powi(m as i32), || format!("{label}, m = {m}: survival {p}"))?;
            }
        }
    }

    let trials = 100_000;
    let m = 10;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst_z: f64 = 0.0;
    for label in ["011111", "101010", "000000"] {
        let strategy = AdversaryStrategy::FixedString(BdswString::new(3, bits(label)).map_err(e2s)?);
        let mut hits = 0;
        for _ in 0..trials {
            hits += run_verification_game(&strategy, m, QuestionDistribution::Uniform, &mut rng)
                .map_err(e2s)?
                .accepted as usize;
        }
        let (z, ok) = sigma_check(hits, trials, 0.5f64.powi(m as i32));
        ensure(ok, || format!("{label}: {hits}/{trials} accepted, z = {z:.2}"))?;
        worst_z = worst_z.max(z.abs());
    }

    // A random state with one ancilla against the mixture it collapses to.
    let m = 2;
    let (parties, blocks) = (3, 1);
    let qubits = parties * blocks + 1;
    let amps: Vec<Complex64> = (0..1 << qubits)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let state = DenseState::from_unnormalized(qubits, amps).map_err(e2s)?;
    let mixture = collapse_distribution(&state, parties, blocks).map_err(e2s)?;
    let exact: f64 = mixture
        .iter()
        .map(|(w, r)| w * exact_survival(r, m, QuestionDistribution::Uniform))
        .sum();
    let general = AdversaryStrategy::GeneralState { parties, blocks, state };
    let collapsed = AdversaryStrategy::ClassicalMixture(mixture);
    let mut rates = Vec::new();
    for strategy in [&general, &collapsed] {
        let mut hits = 0;
        for _ in 0..trials {
            hits += run_verification_game(strategy, m, QuestionDistribution::Uniform, &mut rng)
                .map_err(e2s)?
                .accepted as usize;
        }
        let (z, ok) = sigma_check(hits, trials, exact);
        ensure(ok, || format!("{hits}/{trials} accepted against exact {exact:.4}, z = {z:.2}"))?;
        worst_z = worst_z.max(z.abs());
        rates.push(hits as f64 / trials as f64);
    }
    Ok(format!(
        "exact 2^-m for all wrong labels (L ≤ 6, m ≤ 12); Monte Carlo m = 10 worst |z| = {worst_z:.2}; \
         general state {:.4} vs mixture {:.4} (exact {exact:.4})",
        rates[0], rates[1]
    ))
}

fn end_to_end() -> Check {
    let mut runs = 0;
    for kind in [ProtocolKind::Entangled, ProtocolKind::Css, ProtocolKind::PrepareMeasure] {
        for parties in 3..=5 {
            for n in 1..=3 {
                let mut config = ProtocolConfig::new(parties, n);
                config.seed = (parties * 10 + n) as u64;
                let mut spec = ExperimentSpec::new(ExperimentKind::Protocol(kind), config);
                spec.trials = 100;
                let report = run_experiment(&spec).map_err(e2s)?;
                let s = &report.summary;
                ensure(
                    s.errors == 0 && s.abort_rate == 0.0 && s.key_agreement_rate == Some(1.0) && s.mean_key_length > 0.0,
                    || format!("{} N={parties} n={n}: {s:?}", kind.as_str()),
                )?;
                runs += s.sessions;
            }
        }
    }
    Ok(format!("{runs} sessions, agreement 1.0, abort rate 0.0"))
}

fn equivalence() -> Check {
    let singles = |n: usize, letters: &[Pauli]| -> Vec<PauliProduct> {
        let mut out = vec![PauliProduct::identity(n)];
        for q in 0..n {
            out.extend(letters.iter().map(|&p| PauliProduct::single(n, q, p)));
        }
        out
    };
    let all = [Pauli::X, Pauli::Y, Pauli::Z];
    let even4 = CssCode::new("even4", catalog::even_weight(4), catalog::repetition(4)).map_err(e2s)?;
    let cases = [
        (css::repetition3(), singles(3, &all)),
        (even4, singles(4, &[Pauli::Z])),
        (two_coset_code(), singles(6, &all)),
    ];
    let mut total = 0;
    let mut worst: f64 = 0.0;
    for (code, errors) in &cases {
        for r in equivalence_sweep(code, errors, 8).map_err(e2s)? {
            ensure(r.passed, || format!("{}: Δρ = {:e}, keys {} vs {}", code.name(), r.max_abs_diff, r.css_key, r.pm_key))?;
            worst = worst.max(r.max_abs_diff);
            total += 1;
        }
    }
    let mut cfg = EquivalenceConfig::new(two_coset_code(), bits("1"), bits("010011"));
    cfg.mutate = true;
    let mutated = compare_protocol_equivalence(&cfg).map_err(e2s)?;
    ensure(!mutated.passed && mutated.max_abs_diff > 0.1, || {
        format!("mutated mixture not detected: Δρ = {}", mutated.max_abs_diff)
    })?;
    Ok(format!("{total} cases, max Δρ = {worst:.1e}; mutated mixture rejected (Δρ = {:.2})", mutated.max_abs_diff))
}

fn intercept_resend() -> Check {
    let sessions = 200;
    let mut aborted = 0;
    let mut check_bits = 0usize;
    let mut errors = 0.0;
    for i in 0..sessions {
        let mut config = ProtocolConfig::new(3, 32).with_seed(1000 + i);
        config.c = 0.0;
        config.adversary = Adversary::InterceptResend { links: LinkSet::All };
        let r = run_session(ProtocolKind::PrepareMeasure, &config).map_err(e2s)?;
        let bits_here = config.n * (config.parties - 1);
        check_bits += bits_here;
        errors += r.qber * bits_here as f64;
        aborted += r.aborted() as usize;
    }
    let qber = errors / check_bits as f64;
    let abort_rate = aborted as f64 / sessions as f64;
    ensure(check_bits >= 10_000, || format!("only {check_bits} check bits"))?;
    ensure((qber - 0.25).abs() <= 0.02, || format!("QBER {qber:.4}"))?;
    ensure(abort_rate > 0.99, || format!("abort rate {abort_rate:.3}"))?;
    Ok(format!("QBER {qber:.4} over {check_bits} check bits, abort rate {abort_rate:.3}"))
}

/// `P(Bin(trials, p) ≥ k)`.
fn binomial_tail(trials: usize, p: f64, k: usize) -> f64 {
    let mut log_pmf = trials as f64 * (1.0 - p).ln();
    let mut below = 0.0;
    for j in 0..k.min(trials + 1) {
        below += log_pmf.exp();
        log_pmf += ((trials - j) as f64 / (j + 1) as f64).ln() + (p / (1.0 - p)).ln();
    }
    1.0 - below
}

fn sifting() -> Check {
    let mut notes = Vec::new();
    for parties in 3..=5 {
        let p = 0.5f64.powi(parties as i32 - 1);
        let n = 16;
        let (mut positions, mut kept, mut enough, mut sessions) = (0usize, 0usize, 0usize, 0usize);
        while positions < 10_000 || sessions < 100 {
            let config = ProtocolConfig::new(parties, n).with_seed(5000 + sessions as u64);
            let r = run_session(ProtocolKind::PrepareMeasure, &config).map_err(e2s)?;
            positions += r.round_size;
            kept += r.first_round_sifted;
            enough += (r.first_round_sifted >= 2 * n) as usize;
            sessions += 1;
        }
        let (z, ok) = sigma_check(kept, positions, p);
        let rate = kept as f64 / positions as f64;
        ensure(ok, || format!("N={parties}: retention {rate:.4} vs {p:.4}, z = {z:.2}"))?;
        let sufficient = enough as f64 / sessions as f64;
        ensure(sufficient >= 0.95, || format!("N={parties}: 2n reached in {sufficient:.3} of sessions"))?;
        let alt = binomial_tail(n * (1 + (1 << parties)), p, 2 * n);
        notes.push(format!(
            "N={parties}: retention {rate:.4} (expected {p:.4}, z = {z:+.2}, {positions} positions); \
             2^(N+1)n budget gives ≥ 2n in {:.1}% of sessions; an n(1+2^N) budget would in {:.1}%",
            100.0 * sufficient,
            100.0 * alt
        ));
    }
    Ok(notes.join("; "))
}

fn backend_crosscheck() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = f64::NEG_INFINITY;
    let mut programs = 0;
    for n in 1..=5 {
        for _ in 0..4 {
            let program = random_program(n, 6 * n, &mut rng);
            let report = distribution_check(n, &program, 10_000, rng.gen()).map_err(e2s)?;
            ensure(report.passed, || format!("n={n}: χ² = {:.1} on {} dof, z = {:.2}", report.chi_square, report.dof, report.z_score))?;
            worst = worst.max(report.z_score);
            programs += 1;
        }
    }
    Ok(format!("{programs} programs × 10^4 shots, worst Wilson–Hilferty z = {worst:.2}"))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("table 1 GHZ signs", table_1, Duration::from_secs(1)),
        ("table 2 labels", table_2, Duration::from_secs(1)),
        ("coset equality", coset_equality, Duration::from_secs(10)),
        ("single-qubit errors on Steane", steane_single_errors, Duration::from_secs(30)),
        ("dephasing", dephasing, Duration::from_secs(60)),
        ("verification game", verification_game, Duration::from_secs(300)),
        ("end-to-end noiseless", end_to_end, Duration::from_secs(300)),
        ("protocol equivalence", equivalence, Duration::from_secs(120)),
        ("intercept-resend detection", intercept_resend, Duration::from_secs(120)),
        ("sifting statistics", sifting, Duration::from_secs(300)),
        ("backend cross-check", backend_crosscheck, Duration::from_secs(120)),
    ];
    let mut failed = 0;
    for (i, (name, check, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let (status, detail) = match outcome {
            Ok(d) if elapsed <= *budget => ("PASS", d),
            Ok(d) => ("FAIL", format!("{d}; took {elapsed:.2?}, budget {budget:?}")),
            Err(e) => ("FAIL", e),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!("{status} [{:>2}] {name} ({elapsed:.2?}): {detail}", i + 1);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
