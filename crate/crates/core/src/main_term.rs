//! Main term of the weighted sieve.
//!
//! The asymptotic side uses the linear-sieve values F(s) = 2e^γ/s on (0, 3]
//! and f(4) = 2e^γ log 3/4. The finite side evaluates
//!
//! M(z, y) = Σ_d α⁻_d/d − Σ_{a∈𝓘} Σ_p σ(p/√2^a)(1 − log p/log y) Σ_d α⁺_{d,a}/(dp)
//!
//! from explicitly constructed weights. Weight sums are exact; the σ and
//! logarithm factors are floating point.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::PrimeTable;
use crate::numeric::{csum, exp_euler_gamma, fmt_sig, sqrt2_pow, Compensated};
use crate::partition::{sigma, PartitionIndexSet};
use crate::quad::integrate;
use crate::weights::{
    combine_lower, combine_upper, try_enumerate_beta_support, try_enumerate_linear_support, SieveParams, Sign,
    WeightLabel, WeightSequence,
};
use crate::{Error, Result};

/// F(s) = 2e^γ/s for 0 < s ≤ 3.
pub fn upper_sieve_function(s: f64) -> Result<f64> {
    if !(s > 0.0 && s <= 3.0) {
        return Err(Error::Domain(format!("F(s) is only available for 0 < s <= 3, got {s}")));
    }
    Ok(2.0 * exp_euler_gamma() / s)
}

/// f(4) = 2e^γ log 3/4.
pub fn lower_sieve_f4() -> f64 {
    2.0 * exp_euler_gamma() * 3f64.ln() / 4.0
}

/// V(z) = Π_{p<z} (1 − 1/p).
pub fn mertens_product(z: f64, table: &PrimeTable) -> Result<f64> {
    if (table.limit() as f64) < z.ceil() - 1.0 {
        return Err(Error::InvalidParams(format!("prime table up to {} does not reach z = {z}", table.limit())));
    }
    Ok(table.below(z).iter().map(|&p| 1.0 - 1.0 / p as f64).product())
}

/// (1 − 10α/9)/(4(1 − α)α)
pub fn sieve_integrand(alpha: f64) -> f64 {
    (1.0 - 10.0 * alpha / 9.0) / (4.0 * (1.0 - alpha) * alpha)
}

/// ∫_{1/4}^{9/10} (1 − 10α/9)/(4(1 − α)) dα/α by adaptive quadrature.
pub fn sieve_integral() -> f64 {
    integrate(sieve_integrand, 0.25, 0.9, 1e-10).value
}

/// Closed-form value of the same integral, (log 3.6 − log 7.5/9)/4.
pub fn sieve_integral_closed_form() -> f64 {
    (3.6f64.ln() - 7.5f64.ln() / 9.0) / 4.0
}

/// (e^γ/2) log 3 (1 − (log 27 − (10/9) log(15/2))/log 3) − 200ε′.
pub fn asymptotic_lower_bound(eps_prime: f64) -> f64 {
    let l3 = 3f64.ln();
    exp_euler_gamma() / 2.0 * l3 * (1.0 - (27f64.ln() - 10.0 / 9.0 * 7.5f64.ln()) / l3) - 200.0 * eps_prime
}

/// The same bound assembled as f(4) − 2e^γ·I − 200ε′ with I from quadrature.
pub fn asymptotic_lower_bound_quadrature(eps_prime: f64) -> f64 {
    lower_sieve_f4() - 2.0 * exp_euler_gamma() * sieve_integral() - 200.0 * eps_prime
}

/// Σ_d weight(d)/d, exact.
pub fn weighted_reciprocal_sum(ws: &WeightSequence) -> BigRational {
    let mut acc = BigRational::zero();
    for (d, v) in ws.iter() {
        acc += BigRational::new(BigInt::from(*v.numer()), BigInt::from(*v.denom()) * BigInt::from(d));
    }
    acc
}

/// Σ_d weight(d)/d for integer weights on divisors of `modulus`, using the
/// common denominator `modulus`.
fn reciprocal_sum_over(ws: &WeightSequence, modulus: &BigInt) -> BigRational {
    if ws.iter().any(|(_, v)| !v.is_integer()) {
        return weighted_reciprocal_sum(ws);
    }
    let mut num = BigInt::zero();
    for (d, v) in ws.iter() {
        num += modulus / BigInt::from(d) * BigInt::from(*v.numer());
    }
    BigRational::new(num, modulus.clone())
}

fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Diagnostic evaluation of M(z, y) for one parameter set.
#[derive(Clone, Debug, Serialize)]
pub struct MainTermReport {
    pub params: SieveParams,
    pub index_set: PartitionIndexSet,
    pub eps_prime: f64,
    pub alpha_minus_support: usize,
    pub alpha_plus_support: usize,
    /// Σ α⁻_d/d as "numerator/denominator".
    pub first_sum_exact: String,
    pub first_sum: f64,
    pub second_sum: f64,
    /// Contribution of each a ∈ 𝓘 to the second sum.
    pub per_level: Vec<(i64, f64)>,
    pub m_value: f64,
    pub sieve_integral: f64,
    pub asymptotic_bound: f64,
    pub asymptotic_bound_quadrature: f64,
}

impl MainTermReport {
    /// `key = value` lines, floats to 12 significant digits.
    pub fn to_kv(&self) -> String {
        let p = &self.params;
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("mode", format!("{:?}", p.mode).to_lowercase());
        kv("X", fmt_sig(p.x));
        kv("delta", fmt_sig(p.delta));
        kv("beta", p.beta.to_string());
        kv("w", fmt_sig(p.w));
        kv("z", fmt_sig(p.z));
        kv("D", fmt_sig(p.d_level));
        kv("y", fmt_sig(p.y));
        kv("E", fmt_sig(p.e_level));
        kv("eps_prime", fmt_sig(self.eps_prime));
        kv("index_lower", self.index_set.lower.to_string());
        kv("index_upper", self.index_set.upper.to_string());
        kv("alpha_minus_support", self.alpha_minus_support.to_string());
        kv("alpha_plus_support", self.alpha_plus_support.to_string());
        kv("first_sum_exact", self.first_sum_exact.clone());
        kv("first_sum", fmt_sig(self.first_sum));
        kv("second_sum", fmt_sig(self.second_sum));
        for (a, v) in &self.per_level {
            kv(&format!("level[{a}]"), fmt_sig(*v));
        }
        kv("M", fmt_sig(self.m_value));
        kv("sieve_integral", fmt_sig(self.sieve_integral));
        kv("asymptotic_bound", fmt_sig(self.asymptotic_bound));
        kv("asymptotic_bound_quadrature", fmt_sig(self.asymptotic_bound_quadrature));
        s
    }
}

/// Parses `key = value` lines into a map.
pub fn parse_kv(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (k, v) = line.split_once(" = ").ok_or_else(|| Error::Parse { line: i + 1, msg: format!("expected 'key = value', got {line:?}") })?;
        out.insert(k.to_string(), v.to_string());
    }
    Ok(out)
}

fn mobius_sequence(label: WeightLabel, level: f64, support: Result<Vec<u64>>) -> Result<WeightSequence> {
    Ok(WeightSequence::from_mobius_support(label, level, "", &support?))
}

fn check_product(what: &str, a: usize, b: usize, budget: usize) -> Result<()> {
    let needed = a.saturating_mul(b);
    if needed > budget {
        return Err(Error::BudgetExceeded { what: what.to_string(), needed: needed as u64, budget: budget as u64 });
    }
    Ok(())
}

/// Largest prime table [`main_term_primes`] will sieve.
pub const PRIME_TABLE_BUDGET: u64 = 200_000_000;

/// Primes up to max(z, 2y), the reach [`exact_main_term`] needs.
pub fn main_term_primes(params: &SieveParams) -> Result<PrimeTable> {
    let reach = (2.0 * params.y).max(params.z).ceil() + 1.0;
    if !(reach <= PRIME_TABLE_BUDGET as f64) {
        return Err(Error::BudgetExceeded {
            what: "prime table up to 2y".into(),
            needed: reach.min(u64::MAX as f64) as u64,
            budget: PRIME_TABLE_BUDGET,
        });
    }
    crate::arith::sieve_primes(reach as u64)
}

/// Evaluates M(z, y) from weights built for `params`.
///
/// Every support (and every product of a λ and a ρ support) must stay within
/// `budget` elements. `table` must reach 2y.
pub fn exact_main_term(
    params: &SieveParams,
    index_set: &PartitionIndexSet,
    table: &PrimeTable,
    eps_prime: f64,
    budget: usize,
) -> Result<MainTermReport> {
    let reach = if index_set.is_empty() { params.z } else { sqrt2_pow(index_set.upper + 2) };
    if (table.limit() as f64) < reach.min(2.0 * params.y).max(params.z) {
        return Err(Error::InvalidParams(format!("prime table up to {} does not reach 2y = {}", table.limit(), 2.0 * params.y)));
    }
    let desc = params.describe();
    let lp = mobius_sequence(WeightLabel::LambdaPlus, params.d_level, try_enumerate_linear_support(params.w, params.z, params.d_level, Sign::Plus, budget))?;
    let lm = mobius_sequence(WeightLabel::LambdaMinus, params.d_level, try_enumerate_linear_support(params.w, params.z, params.d_level, Sign::Minus, budget))?;
    let rp = mobius_sequence(WeightLabel::RhoPlus, params.e_level, try_enumerate_beta_support(params.w, params.e_level, params.beta, Sign::Plus, budget))?;
    let rm = mobius_sequence(WeightLabel::RhoMinus, params.e_level, try_enumerate_beta_support(params.w, params.e_level, params.beta, Sign::Minus, budget))?;
    check_product("lower vector-sieve support", lp.len().max(lm.len()), rp.len().max(rm.len()), budget)?;
    let alpha_minus = combine_lower(&lp, &lm, &rp, &rm, desc.clone());

    let primorial: BigInt = table.below(params.z).iter().fold(BigInt::from(1u32), |acc, &p| acc * BigInt::from(p));
    let first_exact = reciprocal_sum_over(&alpha_minus, &primorial);
    let first_sum = to_f64(&first_exact);

    let log_y = params.y.ln();
    let levels: Vec<i64> = index_set.indices().collect();
    let per_level: Vec<Result<(i64, f64, usize)>> = levels
        .par_iter()
        .map(|&a| {
            let level = params.level_at(a);
            let la = mobius_sequence(WeightLabel::LambdaPlusAt(a), level, try_enumerate_linear_support(params.w, params.z, level, Sign::Plus, budget))?;
            check_product("upper vector-sieve support", la.len(), rp.len(), budget)?;
            let alpha_plus = combine_upper(&la, &rp, a, desc.clone());
            let inner = to_f64(&reciprocal_sum_over(&alpha_plus, &primorial));
            let base = sqrt2_pow(a);
            let primes = table.range(base.ceil() as u64, (base * 2.0).floor() as u64);
            let prime_sum = csum(primes.iter().map(|&p| {
                let pf = p as f64;
                sigma(pf / base) * (1.0 - pf.ln() / log_y) / pf
            }));
            Ok((a, inner * prime_sum, alpha_plus.len()))
        })
        .collect();
    let mut per = Vec::with_capacity(per_level.len());
    let mut second = Compensated::new();
    let mut alpha_plus_support = 0;
    for r in per_level {
        let (a, v, n) = r?;
        second.add(v);
        alpha_plus_support = alpha_plus_support.max(n);
        per.push((a, v));
    }
    let second_sum = second.value();
    Ok(MainTermReport {
        params: params.clone(),
        index_set: *index_set,
        eps_prime,
        alpha_minus_support: alpha_minus.len(),
        alpha_plus_support,
        first_sum_exact: format!("{}/{}", first_exact.numer(), first_exact.denom()),
        first_sum,
        second_sum,
        per_level: per,
        m_value: first_sum - second_sum,
        sieve_integral: sieve_integral(),
        asymptotic_bound: asymptotic_lower_bound(eps_prime),
        asymptotic_bound_quadrature: asymptotic_lower_bound_quadrature(eps_prime),
    })
}
