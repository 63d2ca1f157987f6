//! The `sievelab` command line.
//!
//! Every run writes its reports plus a `manifest.json` holding the resolved
//! command into `--out`; `sievelab replay <manifest>` re-runs it.
//! Exit codes: 0 pass, 1 failed check, 2 usage or input error, 3 budget.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arith::is_prime;
use crate::main_term::{
    asymptotic_lower_bound, asymptotic_lower_bound_quadrature, exact_main_term, lower_sieve_f4, main_term_primes,
    sieve_integral,
};
use crate::mean_square::{bridge_identity_check, ksum_closed_form, opera_identity_check, VarianceDecomposition};
use crate::numeric::fmt_sig;
use crate::partition::PartitionIndexSet;
use crate::scanner::{run_scan, ScanConfig};
use crate::weights::{
    beta_convergence_holds, combined_lower, combined_upper, enumerate_beta_support, lambda_weights,
    lambda_weights_at_level, rho_weights, theta_majorant_with, verify_sandwiches, SandwichOutcome, SieveParams, Sign,
    WeightLabel, WeightSequence,
};
use crate::{Error, Result};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "sievelab", version, about = "Sieve weights, main terms, mean squares and short-interval scans")]
pub struct Cli {
    /// Output directory for reports and the manifest.
    #[arg(long, global = true, default_value = "sievelab-out")]
    pub out: PathBuf,
    /// Worker threads (0 = all cores). Results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum Command {
    /// Build and serialize sieve weights; verify sandwich inequalities.
    Weights(WeightsArgs),
    /// Asymptotic main-term constant and exact M(z, y) at reduced scale.
    MainTerm(MainTermArgs),
    /// Exhaustive arithmetic identity suite.
    Identities(IdentitiesArgs),
    /// Direct variance against S1 + S2 + S3.
    MeanSquare(MeanSquareArgs),
    /// Rough P2 counts in short intervals.
    Scan(ScanArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SideArg {
    Plus,
    Minus,
}

impl From<SideArg> for Sign {
    fn from(s: SideArg) -> Sign {
        match s {
            SideArg::Plus => Sign::Plus,
            SideArg::Minus => Sign::Minus,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightKind {
    Lambda,
    Rho,
    LambdaAt,
    AlphaLower,
    AlphaUpper,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct WeightsArgs {
    #[arg(long, required_unless_present = "verify")]
    pub w: Option<f64>,
    #[arg(long, required_unless_present = "verify")]
    pub z: Option<f64>,
    #[arg(long = "D", required_unless_present = "verify")]
    pub d: Option<f64>,
    #[arg(long = "E", default_value_t = 2.0)]
    pub e: f64,
    #[arg(long, default_value_t = 30)]
    pub beta: u32,
    #[arg(long, value_enum, default_value = "plus")]
    pub side: SideArg,
    #[arg(long, value_enum, default_value = "lambda")]
    pub kind: WeightKind,
    /// Level index a for lambda-at and alpha-upper.
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    pub a: i64,
    /// Check the sandwich inequalities for every n up to this bound.
    #[arg(long)]
    pub nmax: Option<u64>,
    /// Run the standard sandwich suite instead of building one sequence.
    #[arg(long)]
    pub verify: bool,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct MainTermArgs {
    #[arg(long, default_value_t = 0.0)]
    pub eps_prime: f64,
    #[arg(long, requires_all = ["z", "d"])]
    pub w: Option<f64>,
    #[arg(long)]
    pub z: Option<f64>,
    #[arg(long = "D")]
    pub d: Option<f64>,
    #[arg(long = "E", default_value_t = 2.0)]
    pub e: f64,
    #[arg(long, default_value_t = 30)]
    pub beta: u32,
    /// Overrides y = D^(9/10).
    #[arg(long)]
    pub y: Option<f64>,
    #[arg(long, default_value_t = crate::weights::SUPPORT_BUDGET)]
    pub budget: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OperaForm {
    /// The right-hand side exactly as displayed in the lemma.
    Displayed,
    /// The right-hand side with the d-sum written out as an Euler product.
    Expanded,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct IdentitiesArgs {
    #[arg(long, default_value_t = 500)]
    pub ksum_cmax: u64,
    #[arg(long, default_value_t = 200)]
    pub ksum_hmax: u64,
    #[arg(long, default_value_t = 100)]
    pub bridge_cmax: u64,
    #[arg(long, default_value_t = 50)]
    pub bridge_hmax: u64,
    #[arg(long, default_value_t = 1e-9)]
    pub bridge_tol: f64,
    #[arg(long, default_value_t = 200)]
    pub opera_trials: usize,
    #[arg(long, value_enum, default_value = "expanded")]
    pub opera_form: OperaForm,
    #[arg(long, default_value_t = 30)]
    pub majorant_wmax: u64,
    #[arg(long, default_value_t = 20240601)]
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LambdaPreset {
    LambdaPlus,
    LambdaMinus,
    RhoPlus,
    RhoMinus,
    AlphaLower,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct MeanSquareArgs {
    #[arg(long = "X")]
    pub x: f64,
    #[arg(long = "H")]
    pub h: f64,
    /// Weights as `d:value` pairs, e.g. `1:1,2:-1`.
    #[arg(long, conflicts_with_all = ["lambda_file", "preset"])]
    pub lambda: Option<String>,
    /// Weights in the serialized sequence format.
    #[arg(long, conflicts_with = "preset")]
    pub lambda_file: Option<PathBuf>,
    /// Weights built from sieve parameters --w --z --D --E --beta.
    #[arg(long, value_enum)]
    pub preset: Option<LambdaPreset>,
    #[arg(long, default_value_t = 2.0)]
    pub w: f64,
    #[arg(long, default_value_t = 10.0)]
    pub z: f64,
    #[arg(long = "D", default_value_t = 30.0)]
    pub d: f64,
    #[arg(long = "E", default_value_t = 2.0)]
    pub e: f64,
    #[arg(long, default_value_t = 30)]
    pub beta: u32,
    /// Truncation D0 (defaults to the largest supported d).
    #[arg(long = "D0")]
    pub d0: Option<u64>,
    /// Fail when |residual| exceeds C H^3 (log X)^3.
    #[arg(long = "max-ratio")]
    pub max_ratio: Option<f64>,
    /// Resolved weights, filled in for the manifest.
    #[arg(skip)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolved: Option<String>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct ScanArgs {
    /// JSON scan configuration.
    #[arg(long, conflicts_with_all = ["x", "h"])]
    pub config: Option<PathBuf>,
    #[arg(long = "X", required_unless_present = "config")]
    pub x: Option<u64>,
    #[arg(long, required_unless_present = "config")]
    pub h: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub stride: u64,
    #[arg(long, default_value_t = 0.125)]
    pub theta_r: f64,
    /// Resolved configuration, filled in for the manifest.
    #[arg(skip)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolved: Option<ScanConfig>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    tool: String,
    version: String,
    workers: usize,
    command: Command,
}

/// Outcome of one subcommand: report files and whether every check passed.
struct Outcome {
    files: Vec<(String, String)>,
    passed: bool,
}

impl Outcome {
    fn single(name: &str, text: String, passed: bool) -> Self {
        Outcome { files: vec![(name.to_string(), text)], passed }
    }
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::BudgetExceeded { .. } => EXIT_BUDGET,
        _ => EXIT_USAGE,
    }
}

/// Parses `std::env::args`, runs, and returns the process exit code.
pub fn main_entry() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_PASS,
                _ => EXIT_USAGE,
            };
        }
    };
    run(cli)
}

pub fn run(cli: Cli) -> i32 {
    let Cli { out, workers, verbose, command } = cli;
    let command = match command {
        Command::Replay(r) => match read_manifest(&r.manifest) {
            Ok(m) => m.command,
            Err(e) => {
                eprintln!("error: {e}");
                return exit_code(&e);
            }
        },
        c => c,
    };
    let start = Instant::now();
    let result = crate::with_workers(workers, move || execute(command));
    match result {
        Ok((outcome, resolved)) => {
            if let Err(e) = write_outputs(&out, workers, &resolved, &outcome) {
                eprintln!("error: {e}");
                return exit_code(&e);
            }
            for (_, text) in &outcome.files {
                if text.len() < 1 << 16 {
                    print!("{text}");
                }
            }
            if verbose > 0 {
                eprintln!("finished in {:.3} s, reports in {}", start.elapsed().as_secs_f64(), out.display());
            }
            if outcome.passed {
                EXIT_PASS
            } else {
                EXIT_FAIL
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn read_manifest(path: &Path) -> Result<Manifest> {
    let text = std::fs::read_to_string(path)?;
    let m: Manifest = serde_json::from_str(&text)?;
    if matches!(m.command, Command::Replay(_)) {
        return Err(Error::InvalidParams("a manifest cannot record a replay".into()));
    }
    Ok(m)
}

fn write_outputs(out: &Path, workers: usize, command: &Command, outcome: &Outcome) -> Result<()> {
    std::fs::create_dir_all(out)?;
    for (name, text) in &outcome.files {
        std::fs::write(out.join(name), text)?;
    }
    let manifest = Manifest {
        tool: "sievelab".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        workers,
        command: command.clone(),
    };
    std::fs::write(out.join("manifest.json"), serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(())
}

fn execute(command: Command) -> Result<(Outcome, Command)> {
    match command {
        Command::Weights(a) => Ok((cmd_weights(&a)?, Command::Weights(a))),
        Command::MainTerm(a) => Ok((cmd_main_term(&a)?, Command::MainTerm(a))),
        Command::Identities(a) => Ok((cmd_identities(&a)?, Command::Identities(a))),
        Command::MeanSquare(mut a) => {
            let o = cmd_mean_square(&mut a)?;
            Ok((o, Command::MeanSquare(a)))
        }
        Command::Scan(mut a) => {
            let o = cmd_scan(&mut a)?;
            Ok((o, Command::Scan(a)))
        }
        Command::Replay(_) => Err(Error::InvalidParams("nested replay".into())),
    }
}

fn sandwich_lines(report: &mut String, tag: &str, outcomes: &[SandwichOutcome]) -> bool {
    let mut ok = true;
    for o in outcomes {
        match o.first_violation {
            None => {
                let _ = writeln!(report, "{tag} {}: pass (n <= {})", o.name, o.nmax);
            }
            Some(n) => {
                ok = false;
                let _ = writeln!(report, "{tag} {}: FAIL at n = {n}", o.name);
            }
        }
    }
    ok
}

/// Linear triples (w, z, D) and β triples (w, E, β) of the standard suite.
pub const LINEAR_TRIPLES: [(f64, f64, f64); 3] = [(2.0, 10.0, 30.0), (2.0, 20.0, 200.0), (3.0, 30.0, 1e4)];
pub const BETA_TRIPLES: [(f64, f64, u32); 2] = [(5.0, 100.0, 3), (10.0, 1e4, 30)];

/// Every parameter set of the standard sandwich suite: each linear triple on
/// its own, then each β triple combined with each (z, D).
pub fn standard_sandwich_params() -> Vec<SieveParams> {
    let mut out = Vec::new();
    for &(w, z, d) in &LINEAR_TRIPLES {
        out.push(SieveParams::reduced(w, z, d, 2.0, 30).expect("valid triple"));
    }
    for &(w, e, beta) in &BETA_TRIPLES {
        for &(_, z, d) in &LINEAR_TRIPLES {
            out.push(SieveParams::reduced(w, z.max(w), d, e, beta).expect("valid combination"));
        }
    }
    out
}

fn cmd_weights(a: &WeightsArgs) -> Result<Outcome> {
    if a.verify {
        let nmax = a.nmax.unwrap_or(100_000);
        let mut report = String::new();
        let mut ok = true;
        for p in standard_sandwich_params() {
            let idx = PartitionIndexSet::from_params(&p).to_vec();
            let tag = format!("[w={} z={} D={} E={} beta={}]", p.w, p.z, p.d_level, p.e_level, p.beta);
            ok &= sandwich_lines(&mut report, &tag, &verify_sandwiches(&p, &idx, nmax));
        }
        let _ = writeln!(report, "sandwich suite: {}", if ok { "pass" } else { "FAIL" });
        return Ok(Outcome::single("sandwich.txt", report, ok));
    }
    let (w, z, d) = (a.w.unwrap_or(2.0), a.z.unwrap_or(2.0), a.d.unwrap_or(2.0));
    let p = SieveParams::reduced(w, z, d, a.e, a.beta)?;
    let sign = Sign::from(a.side);
    let ws = match a.kind {
        WeightKind::Lambda => lambda_weights(&p, sign),
        WeightKind::Rho => rho_weights(&p, sign),
        WeightKind::LambdaAt => lambda_weights_at_level(&p, a.a),
        WeightKind::AlphaLower => combined_lower(&p),
        WeightKind::AlphaUpper => combined_upper(&p, a.a),
    };
    ws.check_invariants()?;
    let mut files = vec![("weights.txt".to_string(), ws.to_text())];
    let mut passed = true;
    if let Some(nmax) = a.nmax {
        let mut report = String::new();
        let idx = PartitionIndexSet::from_params(&p).to_vec();
        passed = sandwich_lines(&mut report, "", &verify_sandwiches(&p, &idx, nmax));
        files.push(("sandwich.txt".to_string(), report));
    }
    Ok(Outcome { files, passed })
}

fn cmd_main_term(a: &MainTermArgs) -> Result<Outcome> {
    let closed = asymptotic_lower_bound(a.eps_prime);
    let quad = asymptotic_lower_bound_quadrature(a.eps_prime);
    let agree = (closed - quad).abs() <= 1e-8;
    match (a.w, a.z, a.d) {
        (Some(w), Some(z), Some(d)) => {
            let mut p = SieveParams::reduced(w, z, d, a.e, a.beta)?;
            if let Some(y) = a.y {
                p = p.with_y(y);
            }
            let idx = PartitionIndexSet::from_params(&p);
            let table = main_term_primes(&p)?;
            let report = exact_main_term(&p, &idx, &table, a.eps_prime, a.budget)?;
            let mut text = report.to_kv();
            let _ = writeln!(text, "routes_agree = {agree}");
            Ok(Outcome::single("main_term.txt", text, agree))
        }
        _ => {
            let mut text = String::new();
            let _ = writeln!(text, "eps_prime = {}", fmt_sig(a.eps_prime));
            let _ = writeln!(text, "f4 = {}", fmt_sig(lower_sieve_f4()));
            let _ = writeln!(text, "sieve_integral = {}", fmt_sig(sieve_integral()));
            let _ = writeln!(text, "asymptotic_bound = {}", fmt_sig(closed));
            let _ = writeln!(text, "asymptotic_bound_quadrature = {}", fmt_sig(quad));
            let _ = writeln!(text, "routes_agree = {agree}");
            Ok(Outcome::single("main_term.txt", text, agree))
        }
    }
}

/// Random rational λ on the divisors of P(w).
pub fn random_lambda(w: f64, rng: &mut impl Rng) -> BTreeMap<u64, Rational64> {
    let primes: Vec<u64> = (2..w.ceil() as u64).filter(|&n| (n as f64) < w && is_prime(n)).collect();
    let mut divs = vec![1u64];
    for p in primes {
        let n = divs.len();
        for i in 0..n {
            divs.push(divs[i] * p);
        }
    }
    divs.sort_unstable();
    divs.into_iter()
        .map(|d| (d, Rational64::new(rng.gen_range(-6..=6), rng.gen_range(1..=7))))
        .collect()
}

/// Squarefree n | P(w) and Σ_{e|n} ρ⁺_e ≤ θ′_n for one (w, E, β); returns the
/// number of checks and the first failing n.
pub fn majorant_check(w: f64, e: f64, beta: u32) -> (usize, Option<u64>) {
    let support = enumerate_beta_support(w, e, beta, Sign::Plus);
    let rho = WeightSequence::from_mobius_support(WeightLabel::RhoPlus, e, "", &support);
    let primes: Vec<u64> = (2..w.ceil() as u64).filter(|&n| (n as f64) < w && is_prime(n)).collect();
    let mut divs = vec![1u64];
    for p in primes {
        let n = divs.len();
        for i in 0..n {
            divs.push(divs[i] * p);
        }
    }
    divs.sort_unstable();
    let bad = divs.iter().copied().find(|&n| {
        let lhs = rho.divisor_sum(n);
        let lhs = *lhs.numer() as f64 / *lhs.denom() as f64;
        lhs > theta_majorant_with(n, w, beta) + 1e-9
    });
    (divs.len(), bad)
}

fn cmd_identities(a: &IdentitiesArgs) -> Result<Outcome> {
    use rayon::prelude::*;
    let mut report = String::new();
    let mut all = true;

    let ksum_bad: Vec<(u64, u64)> = (1..=a.ksum_cmax)
        .into_par_iter()
        .flat_map_iter(|c| {
            (1..=a.ksum_hmax).filter_map(move |h| {
                let (closed, direct) = ksum_closed_form(c, Rational64::from_integer(h as i64));
                (closed != direct).then_some((c, h))
            })
        })
        .collect();
    all &= ksum_bad.is_empty();
    let _ = writeln!(report, "ksum c<={} H<={}: {}", a.ksum_cmax, a.ksum_hmax, status(ksum_bad.first().map(|b| format!("{b:?}"))));

    let mut hs: Vec<f64> = (1..=a.bridge_hmax).map(|h| h as f64).collect();
    hs.extend((0..a.bridge_hmax).map(|k| k as f64 + 0.5));
    let bridge: Vec<(u64, f64, f64)> = (1..=a.bridge_cmax)
        .into_par_iter()
        .flat_map_iter(|c| {
            let hs = hs.clone();
            hs.into_iter().map(move |h| {
                let b = bridge_identity_check(c, h, a.bridge_tol);
                (c, h, (b.lhs - b.rhs).abs())
            })
        })
        .collect();
    let worst = bridge.iter().cloned().fold((0, 0.0, 0.0), |acc, b| if b.2 > acc.2 { b } else { acc });
    let bridge_ok = worst.2 <= a.bridge_tol;
    all &= bridge_ok;
    let _ = writeln!(
        report,
        "bridge c<={} ({} values of H): {} (max deviation {} at c={}, H={})",
        a.bridge_cmax,
        hs.len(),
        if bridge_ok { "pass" } else { "FAIL" },
        fmt_sig(worst.2),
        worst.0,
        worst.1
    );

    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let ws = [3.0, 4.0, 6.0, 8.0, 12.0];
    let (mut displayed_ok, mut expanded_ok) = (0usize, 0usize);
    for i in 0..a.opera_trials {
        let w = ws[i % ws.len()];
        let lam = random_lambda(w, &mut rng);
        let c = opera_identity_check(w, &lam);
        displayed_ok += c.holds() as usize;
        expanded_ok += c.expanded_holds() as usize;
    }
    let opera_ok = match a.opera_form {
        OperaForm::Displayed => displayed_ok == a.opera_trials,
        OperaForm::Expanded => expanded_ok == a.opera_trials,
    };
    all &= opera_ok;
    let _ = writeln!(
        report,
        "mean-square lemma over P(w), {} trials: displayed form {}/{} equal, expanded form {}/{} equal ({} checked: {})",
        a.opera_trials,
        displayed_ok,
        a.opera_trials,
        expanded_ok,
        a.opera_trials,
        match a.opera_form {
            OperaForm::Displayed => "displayed",
            OperaForm::Expanded => "expanded",
        },
        if opera_ok { "pass" } else { "FAIL" }
    );

    let mut majorant_checks = 0;
    let mut majorant_bad = None;
    for w in 3..=a.majorant_wmax {
        for beta in [2u32, 3, 4, 30] {
            for c in [1.0, 3.0, 10.0] {
                let e = c * (w as f64).powi(beta as i32);
                let (n, bad) = majorant_check(w as f64, e, beta);
                majorant_checks += n;
                if majorant_bad.is_none() {
                    majorant_bad = bad.map(|b| format!("w={w} beta={beta} E={e} n={b}"));
                }
            }
        }
    }
    all &= majorant_bad.is_none();
    let _ = writeln!(report, "rho+ majorant, w<={} ({} checks): {}", a.majorant_wmax, majorant_checks, status(majorant_bad));

    let conv = beta_convergence_holds(30) && !beta_convergence_holds(8);
    all &= conv;
    let _ = writeln!(report, "convergence predicate: beta=30 {}, beta=8 {}", beta_convergence_holds(30), beta_convergence_holds(8));
    let _ = writeln!(report, "identities: {}", if all { "pass" } else { "FAIL" });
    Ok(Outcome::single("identities.txt", report, all))
}

fn status(first_bad: Option<String>) -> String {
    match first_bad {
        None => "pass".into(),
        Some(b) => format!("FAIL at {b}"),
    }
}

/// Parses `d:value` pairs such as `1:1,2:-1,6:1/2`.
pub fn parse_lambda(text: &str) -> Result<WeightSequence> {
    let mut entries = Vec::new();
    for (i, part) in text.split(',').map(str::trim).filter(|s| !s.is_empty()).enumerate() {
        let err = |m: String| Error::Parse { line: i + 1, msg: m };
        let (d, v) = part.split_once(':').ok_or_else(|| err(format!("expected d:value, got {part:?}")))?;
        let d: u64 = d.trim().parse().map_err(|_| err(format!("bad modulus {d:?}")))?;
        let v: Rational64 = v.trim().parse().map_err(|_| err(format!("bad value {v:?}")))?;
        entries.push((d, v));
    }
    let level = entries.iter().map(|e| e.0).max().unwrap_or(1) as f64;
    Ok(WeightSequence::new(WeightLabel::Custom("cli".into()), level, "", entries))
}

fn cmd_mean_square(a: &mut MeanSquareArgs) -> Result<Outcome> {
    let ws = if let Some(text) = &a.resolved {
        WeightSequence::from_text(text)?
    } else if let Some(s) = &a.lambda {
        parse_lambda(s)?
    } else if let Some(path) = &a.lambda_file {
        WeightSequence::from_text(&std::fs::read_to_string(path)?)?
    } else if let Some(preset) = a.preset {
        let p = SieveParams::reduced(a.w, a.z, a.d, a.e, a.beta)?;
        match preset {
            LambdaPreset::LambdaPlus => lambda_weights(&p, Sign::Plus),
            LambdaPreset::LambdaMinus => lambda_weights(&p, Sign::Minus),
            LambdaPreset::RhoPlus => rho_weights(&p, Sign::Plus),
            LambdaPreset::RhoMinus => rho_weights(&p, Sign::Minus),
            LambdaPreset::AlphaLower => combined_lower(&p),
        }
    } else {
        parse_lambda("1:1")?
    };
    a.resolved = Some(ws.to_text());
    let d0 = a.d0.unwrap_or_else(|| ws.max_support().unwrap_or(1));
    let id = ws.iter().map(|(d, v)| format!("{d}:{v}")).collect::<Vec<_>>().join(",");
    let v = VarianceDecomposition::compute(&ws, &id, d0, a.h, a.x)?;
    let mut text = v.to_kv();
    let _ = writeln!(text, "residual_ratio = {}", fmt_sig(v.residual_ratio()));
    let passed = match a.max_ratio {
        Some(c) => {
            let ok = v.residual_ratio() <= c;
            let _ = writeln!(text, "max_ratio = {} ({})", fmt_sig(c), if ok { "pass" } else { "FAIL" });
            ok
        }
        None => true,
    };
    Ok(Outcome::single("mean_square.txt", text, passed))
}

fn cmd_scan(a: &mut ScanArgs) -> Result<Outcome> {
    let cfg = if let Some(c) = &a.resolved {
        c.clone()
    } else if let Some(path) = &a.config {
        ScanConfig::from_json(&std::fs::read_to_string(path)?)?
    } else {
        ScanConfig {
            theta_r: a.theta_r,
            stride: a.stride,
            ..ScanConfig::new(a.x.expect("required by clap"), a.h.expect("required by clap"))
        }
    };
    a.resolved = Some(cfg.clone());
    let report = run_scan(&cfg)?;
    if let Some(dir) = &cfg.output {
        report.write(dir)?;
    }
    Ok(Outcome {
        files: vec![("scan.csv".into(), report.to_csv()), ("summary.json".into(), report.summary_json() + "\n")],
        passed: true,
    })
}
