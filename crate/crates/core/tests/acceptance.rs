//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Failing criteria are reported, not hidden; the process exits 0 so the rest
//! of the workspace test run still completes. A malformed run (panic) exits
//! nonzero as usual.

use std::collections::BTreeMap;
use std::time::Instant;

use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sievelab::arith::{factor_trial, is_prime};
use sievelab::main_term::{asymptotic_lower_bound, asymptotic_lower_bound_quadrature};
use sievelab::mean_square::{bridge_identity_check, ksum_closed_form, opera_identity_check, VarianceDecomposition};
use sievelab::numeric::exp_euler_gamma;
use sievelab::scanner::{brute_force_count, run_scan, square_divisor_count, ScanConfig};
use sievelab::weights::{
    beta_convergence_holds, enumerate_beta_support, lambda_weights, theta_majorant_with, verify_sandwiches,
};
use sievelab::{with_workers, PartitionIndexSet, SieveParams, Sign, WeightLabel, WeightSequence};

const GOLDEN_BOUND: f64 = 0.03700761837312507;

struct Verdict {
    id: &'static str,
    title: &'static str,
    pass: bool,
    secs: f64,
    detail: Vec<String>,
}

fn timed(id: &'static str, title: &'static str, limit: f64, f: impl FnOnce(&mut Vec<String>) -> bool) -> Verdict {
    let t = Instant::now();
    let mut detail = Vec::new();
    let ok = f(&mut detail);
    let secs = t.elapsed().as_secs_f64();
    if secs >= limit {
        detail.push(format!("runtime {secs:.2} s exceeds {limit} s"));
    }
    Verdict { id, title, pass: ok && secs < limit, secs, detail }
}

fn primes_below(w: u64) -> Vec<u64> {
    (2..w).filter(|&n| is_prime(n)).collect()
}

fn squarefree_divisors_of_primorial(w: u64) -> Vec<u64> {
    let mut divs = vec![1u64];
    for p in primes_below(w) {
        let n = divs.len();
        for i in 0..n {
            divs.push(divs[i] * p);
        }
    }
    divs.sort_unstable();
    divs
}

fn criterion_1(detail: &mut Vec<String>) -> bool {
    let linear = [(2.0, 10.0, 30.0), (2.0, 20.0, 200.0), (3.0, 30.0, 1e4)];
    let betas = [(5.0, 100.0, 3u32), (10.0, 1e4, 30u32)];
    let mut params = Vec::new();
    for &(w, z, d) in &linear {
        params.push(SieveParams::reduced(w, z, d, 2.0, 30).unwrap());
    }
    for &(w, e, beta) in &betas {
        for &(_, z, d) in &linear {
            params.push(SieveParams::reduced(w, f64::max(z, w), d, e, beta).unwrap());
        }
    }
    let mut checks = 0;
    let mut ok = true;
    for p in &params {
        let levels = PartitionIndexSet::from_params(p).to_vec();
        for o in verify_sandwiches(p, &levels, 100_000) {
            checks += 1;
            if let Some(n) = o.first_violation {
                ok = false;
                detail.push(format!("w={} z={} D={} E={} beta={}: {} fails at n={n}", p.w, p.z, p.d_level, p.e_level, p.beta, o.name));
            }
        }
    }
    detail.push(format!("{} parameter sets, {checks} inequality families, n <= 100000", params.len()));
    ok
}

fn criterion_2(detail: &mut Vec<String>) -> bool {
    let mut bad = None;
    'outer: for c in 1..=500u64 {
        for h in 1..=200i64 {
            let (closed, direct) = ksum_closed_form(c, Rational64::from_integer(h));
            if closed != direct {
                bad = Some((c, h));
                break 'outer;
            }
        }
    }
    detail.push(match bad {
        None => "100000 exact equalities".into(),
        Some((c, h)) => format!("first mismatch at c={c}, H={h}"),
    });
    bad.is_none()
}

fn criterion_3(detail: &mut Vec<String>) -> bool {
    let mut hs: Vec<f64> = (1..=50).map(f64::from).collect();
    hs.extend((0..50).map(|k| k as f64 + 0.5));
    let mut worst = (0.0f64, 0u64, 0.0f64);
    for c in 1..=100u64 {
        for &h in &hs {
            let b = bridge_identity_check(c, h, 1e-9);
            let dev = (b.lhs - b.rhs).abs();
            if dev > worst.0 {
                worst = (dev, c, h);
            }
        }
    }
    detail.push(format!("max |lhs - rhs| = {:.3e} at c={}, H={}", worst.0, worst.1, worst.2));
    worst.0 <= 1e-9
}

fn random_lambdas() -> Vec<(f64, BTreeMap<u64, Rational64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0004);
    let ws = [3u64, 4, 6, 8, 12];
    (0..200)
        .map(|i| {
            let w = ws[i % ws.len()];
            let lam = squarefree_divisors_of_primorial(w)
                .into_iter()
                .map(|d| (d, Rational64::new(rng.gen_range(-9..=9), rng.gen_range(1..=9))))
                .collect();
            (w as f64, lam)
        })
        .collect()
}

fn criterion_4(detail: &mut Vec<String>) -> bool {
    let mut equal = 0;
    let mut first = None;
    for (w, lam) in random_lambdas() {
        let c = opera_identity_check(w, &lam);
        if c.holds() {
            equal += 1;
        } else if first.is_none() {
            first = Some(format!("w={w}: lhs={} rhs={}", c.lhs, c.rhs));
        }
    }
    detail.push(format!("{equal}/200 exact equalities"));
    if let Some(f) = first {
        detail.push(format!("first mismatch {f}"));
    }
    equal == 200
}

fn criterion_4b(detail: &mut Vec<String>) -> bool {
    let equal = random_lambdas().into_iter().filter(|(w, lam)| opera_identity_check(*w, lam).expanded_holds()).count();
    detail.push(format!("{equal}/200 exact equalities with the d-sum expanded as an Euler product"));
    equal == 200
}

fn criterion_5(detail: &mut Vec<String>) -> bool {
    let l3 = 3f64.ln();
    let closed_literal = exp_euler_gamma() / 2.0 * l3 * (1.0 - (27f64.ln() - 10.0 / 9.0 * 7.5f64.ln()) / l3);
    let closed = asymptotic_lower_bound(0.0);
    let quad = asymptotic_lower_bound_quadrature(0.0);
    detail.push(format!("closed {closed:.15} quadrature {quad:.15} golden {GOLDEN_BOUND:.15}"));
    (closed - quad).abs() <= 1e-8
        && (closed_literal - quad).abs() <= 1e-8
        && (closed - GOLDEN_BOUND).abs() <= 1e-12
        && closed > 0.03
}

fn criterion_6_reports() -> Vec<VarianceDecomposition> {
    let mobius = WeightSequence::from_integers(WeightLabel::Custom("mu6".into()), 6.0, &[(1, 1), (2, -1), (3, -1), (6, 1)]);
    let lam_minus = lambda_weights(&SieveParams::reduced(2.0, 10.0, 30.0, 2.0, 30).unwrap(), Sign::Minus);
    let one = WeightSequence::from_integers(WeightLabel::Custom("one".into()), 1.0, &[(1, 1)]);
    vec![
        VarianceDecomposition::compute(&mobius, "{1:1,2:-1,3:-1,6:1}", 6, 5.0, 1e4).unwrap(),
        VarianceDecomposition::compute(&lam_minus, "lambda- (2,10,30)", 30, 10.0, 1e5).unwrap(),
        VarianceDecomposition::compute(&one, "{1:1}", 1, 20.0, 1e5).unwrap(),
    ]
}

fn criterion_6(detail: &mut Vec<String>) -> bool {
    let reports = criterion_6_reports();
    let c = reports[2].residual_ratio();
    detail.push(format!("calibrated C = {c:.3e} on {{1:1}} (X=1e5, H=20, S = {:.6e})", reports[2].s_direct));
    let mut ok = c <= 1.0;
    for r in &reports {
        // one rounding of slack so the calibration instance meets its own bound
        let bound = c * r.h.powi(3) * r.x.ln().powi(3) * (1.0 + 4.0 * f64::EPSILON);
        let holds = r.residual.abs() <= bound;
        ok &= holds;
        detail.push(format!(
            "X={:e} H={} {}: S={:.6e} residual={:.3e} ratio={:.3e} bound={:.3e} {}",
            r.x,
            r.h,
            r.lambda_id,
            r.s_direct,
            r.residual,
            r.residual_ratio(),
            bound,
            if holds { "ok" } else { "exceeds" }
        ));
    }
    ok
}

fn criterion_7(detail: &mut Vec<String>) -> bool {
    let mut checks = 0usize;
    let mut bad = None;
    for w in 3..=30u64 {
        let divs = squarefree_divisors_of_primorial(w);
        for beta in [2u32, 3, 4, 30] {
            for c in [1.0, 3.0, 10.0] {
                let e = c * (w as f64).powi(beta as i32);
                let support = enumerate_beta_support(w as f64, e, beta, Sign::Plus);
                for &n in &divs {
                    let sum: Rational64 = support
                        .iter()
                        .filter(|&&d| n % d == 0)
                        .map(|&d| Rational64::from_integer(factor_trial(d).mobius() as i64))
                        .sum();
                    let lhs = *sum.numer() as f64 / *sum.denom() as f64;
                    checks += 1;
                    if lhs > theta_majorant_with(n, w as f64, beta) + 1e-12 && bad.is_none() {
                        bad = Some(format!("w={w} beta={beta} E={e} n={n}"));
                    }
                }
            }
        }
    }
    let pred = beta_convergence_holds(30) && !beta_convergence_holds(8);
    detail.push(format!("{checks} majorant checks; (30/29)^16 < 2: {}, (8/7)^16 < 2: {}", beta_convergence_holds(30), beta_convergence_holds(8)));
    if let Some(b) = &bad {
        detail.push(format!("majorant fails at {b}"));
    }
    bad.is_none() && pred
}

const SCAN_HS: [f64; 4] = [5.0, 10.0, 20.0, 40.0];

fn criterion_8_reports() -> Vec<sievelab::ScanReport> {
    SCAN_HS.iter().map(|&h| run_scan(&ScanConfig::new(1_000_000, h)).unwrap()).collect()
}

fn criterion_8(detail: &mut Vec<String>) -> bool {
    let reports = criterion_8_reports();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0008);
    let mut recount_ok = true;
    for (r, &h) in reports.iter().zip(&SCAN_HS) {
        let cfg = ScanConfig::new(1_000_000, h);
        for _ in 0..100 {
            let i = rng.gen_range(0..r.rows.len());
            let row = r.rows[i];
            if brute_force_count(row.x, &cfg) != row.count {
                recount_ok = false;
                detail.push(format!("(a) recount mismatch at h={h}, x={}", row.x));
            }
        }
    }
    let means: Vec<f64> = reports.iter().map(|r| r.summary.mean_count).collect();
    let ratios: Vec<f64> = reports.iter().map(|r| r.summary.mean_over_h).collect();
    let nondecreasing = means.windows(2).all(|m| m[0] <= m[1]);
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
    let band = hi <= 3.0 * lo;
    let exc5 = reports[0].summary.exceptional_fraction;
    let exc40 = reports[3].summary.exceptional_fraction;
    let shrinks = exc40 < exc5;
    detail.push(format!("(a) brute-force recount at 400 random x: {}", if recount_ok { "ok" } else { "mismatch" }));
    for r in &reports {
        let s = &r.summary;
        detail.push(format!(
            "h={:>2}: mean={:.4} mean/h={:.4} min={} exceptional={}",
            s.h, s.mean_count, s.mean_over_h, s.min_count, s.exceptional_fraction
        ));
    }
    detail.push(format!("(b) nondecreasing {nondecreasing}, mean/h band {:.4}..{:.4} {}", lo, hi, if band { "ok" } else { "too wide" }));
    detail.push(format!("(c) exceptional fraction h=40 ({exc40}) < h=5 ({exc5}): {shrinks}"));
    recount_ok && nondecreasing && band && shrinks
}

fn criterion_9(detail: &mut Vec<String>) -> bool {
    let x = 1_000_000u64;
    let z = (x as f64).powf(0.125);
    let sd = square_divisor_count(x, z).unwrap();
    let brute = (x / 2 + 1..=x)
        .filter(|&n| {
            let f = factor_trial(n);
            f.primes().all(|p| p as f64 >= z) && f.big_omega() > 2 && f.small_omega() <= 2
        })
        .count() as u64;
    detail.push(format!(
        "z = X^(1/8) = {z:.4}: count {} (brute force {brute}), sum X/p^2 = {:.1}, X/z = {:.1}",
        sd.count, sd.prime_square_sum, sd.x_over_z
    ));
    sd.count == brute && (sd.count as f64) <= sd.x_over_z
}

fn criterion_10(detail: &mut Vec<String>) -> bool {
    let render = || {
        let mut s = String::new();
        for r in criterion_6_reports() {
            s.push_str(&r.to_kv());
        }
        for r in criterion_8_reports() {
            s.push_str(&r.summary_json());
            s.push_str(&r.to_csv());
        }
        s
    };
    let runs: Vec<(usize, String)> = [1usize, 4, 16].into_iter().map(|w| (w, with_workers(w, render))).collect();
    let same = runs.iter().all(|(_, s)| *s == runs[0].1);
    detail.push(format!("report size {} bytes at workers 1, 4, 16: {}", runs[0].1.len(), if same { "identical" } else { "differ" }));
    same
}

fn main() {
    let verdicts = vec![
        timed("1", "sieve sandwich suite", 60.0, criterion_1),
        timed("2", "k-sum closed form", 30.0, criterion_2),
        timed("3", "bridge identity", 60.0, criterion_3),
        timed("4", "mean-square lemma, displayed form", 30.0, criterion_4),
        timed("4b", "mean-square lemma, expanded form", 30.0, criterion_4b),
        timed("5", "main-term constant", 1.0, criterion_5),
        timed("6", "variance decomposition residual", 600.0, criterion_6),
        timed("7", "theta majorant and convergence predicate", 10.0, criterion_7),
        timed("8", "scanner statistics", 300.0, criterion_8),
        timed("9", "square-divisor count", 60.0, criterion_9),
        timed("10", "determinism across worker counts", f64::INFINITY, criterion_10),
    ];
    println!();
    for v in &verdicts {
        println!("{} {:>3}  {}  ({:.2} s)", if v.pass { "PASS" } else { "FAIL" }, v.id, v.title, v.secs);
        for d in &v.detail {
            println!("          {d}");
        }
    }
    let passed = verdicts.iter().filter(|v| v.pass).count();
    println!("\nacceptance: {passed}/{} criteria pass", verdicts.len());
}
