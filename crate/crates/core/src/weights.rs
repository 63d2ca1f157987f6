//! Combinatorial sieve supports and weights.
//!
//! The linear sieve sifts the primes in `[w, z)` at level `D`, the β-sieve
//! sifts the primes below `w` at level `E`. A support is the set of
//! squarefree `d = p₁p₂⋯p_r` with `p₁ > p₂ > ⋯ > p_r` in the sifting range
//! such that `p₁⋯p_m·p_m^κ < bound` for every odd `m` (upper sieve) or every
//! even `m` (lower sieve), with `κ = 2` for the linear sieve and `κ = β` for
//! the β-sieve. Weights are `μ(d)` on the support and are stored as exact
//! rationals so every sandwich inequality is checked without rounding.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_rational::Rational64;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{factor_trial, sieve_primes};
use crate::numeric::sqrt2_pow;
use crate::{Error, Result};

/// Default cap on the number of elements in an enumerated support.
pub const SUPPORT_BUDGET: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    /// Whether the `m`-th prime of a chain (1-based) is constrained.
    fn constrains(self, m: usize) -> bool {
        match self {
            Sign::Plus => m % 2 == 1,
            Sign::Minus => m % 2 == 0,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

impl FromStr for Sign {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+" | "plus" | "upper" => Ok(Sign::Plus),
            "-" | "minus" | "lower" => Ok(Sign::Minus),
            _ => Err(Error::InvalidParams(format!("unknown sign {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamMode {
    /// All parameters derived from X and δ.
    Scale,
    /// (w, z, D, E, β) set directly so supports stay enumerable.
    Reduced,
}

/// Global sieve parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SieveParams {
    pub x: f64,
    pub delta: f64,
    pub beta: u32,
    pub w: f64,
    pub z: f64,
    /// Linear sieve level D.
    pub d_level: f64,
    pub y: f64,
    /// β-sieve level E.
    pub e_level: f64,
    pub mode: ParamMode,
}

impl SieveParams {
    pub const DEFAULT_BETA: u32 = 30;

    /// D = X^{5/9}, z = D^{1/4}, y = D^{9/10}, w = X^δ, E = X^{1/1000}, β = 30.
    pub fn from_scale(x: f64, delta: f64) -> Result<Self> {
        if !(x > 1.0) || !(delta > 0.0) {
            return Err(Error::InvalidParams(format!("need X > 1 and delta > 0, got X={x}, delta={delta}")));
        }
        let d_level = x.powf(5.0 / 9.0);
        let p = SieveParams {
            x,
            delta,
            beta: Self::DEFAULT_BETA,
            w: x.powf(delta),
            z: d_level.powf(0.25),
            d_level,
            y: d_level.powf(0.9),
            e_level: x.powf(1.0 / 1000.0),
            mode: ParamMode::Scale,
        };
        p.validate()?;
        Ok(p)
    }

    /// Direct choice of (w, z, D, E, β); y defaults to D^{9/10} and X to D^{9/5}.
    pub fn reduced(w: f64, z: f64, d_level: f64, e_level: f64, beta: u32) -> Result<Self> {
        let x = d_level.powf(9.0 / 5.0);
        let p = SieveParams {
            x,
            delta: if x > 1.0 { w.ln() / x.ln() } else { 0.0 },
            beta,
            w,
            z,
            d_level,
            y: d_level.powf(0.9),
            e_level,
            mode: ParamMode::Reduced,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_y(mut self, y: f64) -> Self {
        self.y = y;
        self
    }

    pub fn with_beta(mut self, beta: u32) -> Result<Self> {
        self.beta = beta;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        if !(self.w >= 2.0) {
            return bad(format!("w = {} < 2", self.w));
        }
        if !(self.w <= self.z && self.z <= self.d_level) {
            return bad(format!("need w <= z <= D, got w={}, z={}, D={}", self.w, self.z, self.d_level));
        }
        if !(self.e_level >= 2.0) {
            return bad(format!("E = {} < 2", self.e_level));
        }
        if self.beta < 2 {
            return bad(format!("beta = {} < 2", self.beta));
        }
        Ok(())
    }

    /// D_a = D/√2^{a+2}
    pub fn level_at(&self, a: i64) -> f64 {
        self.d_level / sqrt2_pow(a + 2)
    }

    pub fn describe(&self) -> String {
        format!(
            "mode={} X={} delta={} w={} z={} D={} y={} E={} beta={}",
            match self.mode {
                ParamMode::Scale => "scale",
                ParamMode::Reduced => "reduced",
            },
            self.x,
            self.delta,
            self.w,
            self.z,
            self.d_level,
            self.y,
            self.e_level,
            self.beta
        )
    }
}

/// Which weight family a sequence represents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WeightLabel {
    LambdaPlus,
    LambdaMinus,
    RhoPlus,
    RhoMinus,
    LambdaPlusAt(i64),
    AlphaMinus,
    AlphaPlusAt(i64),
    Custom(String),
}

impl WeightLabel {
    /// λ and ρ families carry μ(d) on a support.
    fn is_mobius_family(&self) -> bool {
        matches!(
            self,
            WeightLabel::LambdaPlus
                | WeightLabel::LambdaMinus
                | WeightLabel::RhoPlus
                | WeightLabel::RhoMinus
                | WeightLabel::LambdaPlusAt(_)
        )
    }
}

impl fmt::Display for WeightLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightLabel::LambdaPlus => f.write_str("lambda+"),
            WeightLabel::LambdaMinus => f.write_str("lambda-"),
            WeightLabel::RhoPlus => f.write_str("rho+"),
            WeightLabel::RhoMinus => f.write_str("rho-"),
            WeightLabel::LambdaPlusAt(a) => write!(f, "lambda+@{a}"),
            WeightLabel::AlphaMinus => f.write_str("alpha-"),
            WeightLabel::AlphaPlusAt(a) => write!(f, "alpha+@{a}"),
            WeightLabel::Custom(s) => write!(f, "custom:{s}"),
        }
    }
}

impl FromStr for WeightLabel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let level = |rest: &str| {
            rest.parse::<i64>()
                .map_err(|_| Error::InvalidParams(format!("bad level index in label {s:?}")))
        };
        Ok(match s {
            "lambda+" => WeightLabel::LambdaPlus,
            "lambda-" => WeightLabel::LambdaMinus,
            "rho+" => WeightLabel::RhoPlus,
            "rho-" => WeightLabel::RhoMinus,
            "alpha-" => WeightLabel::AlphaMinus,
            _ => {
                if let Some(rest) = s.strip_prefix("lambda+@") {
                    WeightLabel::LambdaPlusAt(level(rest)?)
                } else if let Some(rest) = s.strip_prefix("alpha+@") {
                    WeightLabel::AlphaPlusAt(level(rest)?)
                } else if let Some(rest) = s.strip_prefix("custom:") {
                    WeightLabel::Custom(rest.to_string())
                } else {
                    return Err(Error::InvalidParams(format!("unknown weight label {s:?}")));
                }
            }
        })
    }
}

/// A finitely supported map `d ↦ weight` with a declared level.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightSequence {
    entries: BTreeMap<u64, Rational64>,
    level: f64,
    label: WeightLabel,
    params: String,
}

impl WeightSequence {
    /// Builds a sequence, dropping zero weights.
    pub fn new(
        label: WeightLabel,
        level: f64,
        params: impl Into<String>,
        entries: impl IntoIterator<Item = (u64, Rational64)>,
    ) -> Self {
        WeightSequence {
            entries: entries.into_iter().filter(|(_, v)| !v.is_zero()).collect(),
            level,
            label,
            params: params.into(),
        }
    }

    /// Weight μ(d) on every `d` of `support`.
    pub fn from_mobius_support(
        label: WeightLabel,
        level: f64,
        params: impl Into<String>,
        support: &[u64],
    ) -> Self {
        let entries = support
            .iter()
            .map(|&d| (d, Rational64::from_integer(factor_trial(d).mobius() as i64)));
        Self::new(label, level, params, entries)
    }

    /// Integer weights given as `(d, weight)` pairs.
    pub fn from_integers(label: WeightLabel, level: f64, pairs: &[(u64, i64)]) -> Self {
        Self::new(label, level, "", pairs.iter().map(|&(d, v)| (d, Rational64::from_integer(v))))
    }

    pub fn label(&self) -> &WeightLabel {
        &self.label
    }

    pub fn level(&self) -> f64 {
        self.level
    }

    pub fn params(&self) -> &str {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, d: u64) -> Rational64 {
        self.entries.get(&d).copied().unwrap_or_else(Rational64::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, Rational64)> + '_ {
        self.entries.iter().map(|(&d, &v)| (d, v))
    }

    pub fn support(&self) -> impl Iterator<Item = u64> + '_ {
        self.entries.keys().copied()
    }

    pub fn max_support(&self) -> Option<u64> {
        self.entries.keys().next_back().copied()
    }

    /// Restriction to `d <= bound`.
    pub fn truncated(&self, bound: u64) -> Self {
        WeightSequence {
            entries: self.entries.range(..=bound).map(|(&d, &v)| (d, v)).collect(),
            ..self.clone()
        }
    }

    /// Checks: every `d` squarefree and `<= level`; μ-families have weights in [−1, 1].
    pub fn check_invariants(&self) -> Result<()> {
        for (&d, v) in &self.entries {
            if d == 0 || !factor_trial(d).is_squarefree() {
                return Err(Error::Domain(format!("{}: support element {d} is not squarefree", self.label)));
            }
            if d as f64 > self.level && !(d == 1 && self.level < 1.0) {
                return Err(Error::Domain(format!("{}: support element {d} exceeds level {}", self.label, self.level)));
            }
            if self.label.is_mobius_family() && v.abs() > Rational64::one() {
                return Err(Error::Domain(format!("{}: weight {v} at {d} outside [-1, 1]", self.label)));
            }
        }
        Ok(())
    }

    /// Σ_{d | n} weight(d), exact.
    pub fn divisor_sum(&self, n: u64) -> Rational64 {
        assert!(n >= 1);
        let mut acc = Rational64::zero();
        for d in factor_trial(n).divisors() {
            if let Some(v) = self.entries.get(&d) {
                acc += v;
            }
        }
        acc
    }

    /// Common denominator of all weights.
    pub fn common_denominator(&self) -> i64 {
        self.entries
            .values()
            .fold(1i64, |acc, v| num_integer::lcm(acc, *v.denom()))
    }

    /// `Σ_{d | n} weight(d) · L` for all `n <= nmax` (index 0 unused), with
    /// `L` = [`Self::common_denominator`].
    pub fn scaled_divisor_sums_upto(&self, nmax: u64) -> (Vec<i64>, i64) {
        let l = self.common_denominator();
        let mut out = vec![0i64; nmax as usize + 1];
        for (&d, v) in self.entries.range(..=nmax) {
            let scaled = v.numer() * (l / v.denom());
            let mut m = d;
            while m <= nmax {
                out[m as usize] += scaled;
                m += d;
            }
        }
        (out, l)
    }

    /// Line-oriented text form: `#`-prefixed header then `d<TAB>num/den` rows.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("# label: {}\n", self.label));
        s.push_str(&format!("# level: {}\n", self.level));
        s.push_str(&format!("# params: {}\n", self.params));
        for (d, v) in &self.entries {
            s.push_str(&format!("{d}\t{}/{}\n", v.numer(), v.denom()));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut label = None;
        let mut level = None;
        let mut params = None;
        let mut entries = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            let perr = |msg: String| Error::Parse { line: lineno, msg };
            if let Some(h) = line.strip_prefix("# ") {
                let (key, val) = h.split_once(": ").or_else(|| h.split_once(':').map(|(k, _)| (k, ""))).ok_or_else(|| perr(format!("bad header {h:?}")))?;
                match key {
                    "label" => label = Some(val.parse::<WeightLabel>().map_err(|e| perr(e.to_string()))?),
                    "level" => level = Some(val.parse::<f64>().map_err(|e| perr(e.to_string()))?),
                    "params" => params = Some(val.to_string()),
                    _ => return Err(perr(format!("unknown header key {key:?}"))),
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let (d, frac) = line.split_once('\t').ok_or_else(|| perr("missing tab".into()))?;
            let d: u64 = d.parse().map_err(|_| perr(format!("bad modulus {d:?}")))?;
            let (num, den) = frac.split_once('/').ok_or_else(|| perr("missing '/'".into()))?;
            let num: i64 = num.parse().map_err(|_| perr(format!("bad numerator {num:?}")))?;
            let den: i64 = den.parse().map_err(|_| perr(format!("bad denominator {den:?}")))?;
            if den == 0 {
                return Err(perr("zero denominator".into()));
            }
            if entries.insert(d, Rational64::new(num, den)).is_some() {
                return Err(perr(format!("duplicate modulus {d}")));
            }
        }
        let missing = |k: &str| Error::Parse { line: 0, msg: format!("missing header {k}") };
        Ok(WeightSequence {
            entries,
            level: level.ok_or_else(|| missing("level"))?,
            label: label.ok_or_else(|| missing("label"))?,
            params: params.ok_or_else(|| missing("params"))?,
        })
    }
}

fn below_bound(prod: u128, bound: f64) -> bool {
    (prod as f64) < bound
}

/// Depth-first enumeration of chains over `primes` (ascending), taking primes
/// in decreasing order. Returns `None` once more than `cap` elements appear.
fn enumerate_chains(primes: &[u64], kappa: u32, bound: f64, sign: Sign, cap: usize) -> Option<Vec<u64>> {
    let mut out = vec![1u64];
    // (product, exclusive upper index for the next prime, chain length)
    let mut stack: Vec<(u64, usize, usize)> = vec![(1, primes.len(), 0)];
    while let Some((prod, upper, depth)) = stack.pop() {
        let m = depth + 1;
        for i in (0..upper).rev() {
            let p = primes[i];
            let next = prod as u128 * p as u128;
            if sign.constrains(m) {
                let test = (0..kappa).fold(next, |acc, _| acc.saturating_mul(p as u128));
                if !below_bound(test, bound) {
                    continue;
                }
            }
            let next = u64::try_from(next).ok()?;
            out.push(next);
            if out.len() > cap {
                return None;
            }
            stack.push((next, i, m));
        }
    }
    out.sort_unstable();
    Some(out)
}

fn primes_in(lo: f64, hi: f64) -> Vec<u64> {
    if hi <= 2.0 {
        return Vec::new();
    }
    let limit = hi.ceil() as u64;
    match sieve_primes(limit.max(2)) {
        Ok(t) => t.between(lo, hi).to_vec(),
        Err(_) => Vec::new(),
    }
}

/// 𝒟± for primes in `[w, z)` at level `d_level`.
pub fn enumerate_linear_support(w: f64, z: f64, d_level: f64, sign: Sign) -> Vec<u64> {
    enumerate_chains(&primes_in(w, z), 2, d_level, sign, usize::MAX).expect("uncapped")
}

/// 𝓔± for primes below `w` at level `e_level`.
pub fn enumerate_beta_support(w: f64, e_level: f64, beta: u32, sign: Sign) -> Vec<u64> {
    enumerate_chains(&primes_in(2.0, w), beta, e_level, sign, usize::MAX).expect("uncapped")
}

/// [`enumerate_linear_support`] failing with [`Error::BudgetExceeded`] above `cap` elements.
pub fn try_enumerate_linear_support(w: f64, z: f64, d_level: f64, sign: Sign, cap: usize) -> Result<Vec<u64>> {
    enumerate_chains(&primes_in(w, z), 2, d_level, sign, cap).ok_or_else(|| Error::BudgetExceeded {
        what: format!("linear support w={w} z={z} D={d_level} {sign}"),
        needed: cap as u64 + 1,
        budget: cap as u64,
    })
}

pub fn try_enumerate_beta_support(w: f64, e_level: f64, beta: u32, sign: Sign, cap: usize) -> Result<Vec<u64>> {
    enumerate_chains(&primes_in(2.0, w), beta, e_level, sign, cap).ok_or_else(|| Error::BudgetExceeded {
        what: format!("beta support w={w} E={e_level} beta={beta} {sign}"),
        needed: cap as u64 + 1,
        budget: cap as u64,
    })
}

/// λ± = μ·1_{𝒟±}, level D.
pub fn lambda_weights(params: &SieveParams, sign: Sign) -> WeightSequence {
    let support = enumerate_linear_support(params.w, params.z, params.d_level, sign);
    let label = match sign {
        Sign::Plus => WeightLabel::LambdaPlus,
        Sign::Minus => WeightLabel::LambdaMinus,
    };
    WeightSequence::from_mobius_support(label, params.d_level, params.describe(), &support)
}

/// ρ± = μ·1_{𝓔±}, level E.
pub fn rho_weights(params: &SieveParams, sign: Sign) -> WeightSequence {
    let support = enumerate_beta_support(params.w, params.e_level, params.beta, sign);
    let label = match sign {
        Sign::Plus => WeightLabel::RhoPlus,
        Sign::Minus => WeightLabel::RhoMinus,
    };
    WeightSequence::from_mobius_support(label, params.e_level, params.describe(), &support)
}

/// λ⁺_{·,a} = μ·1_{𝒟⁺_a}, level D_a.
pub fn lambda_weights_at_level(params: &SieveParams, a: i64) -> WeightSequence {
    let level = params.level_at(a);
    let support = enumerate_linear_support(params.w, params.z, level, Sign::Plus);
    WeightSequence::from_mobius_support(WeightLabel::LambdaPlusAt(a), level, params.describe(), &support)
}

/// Vector-sieve lower weights α⁻_k for k = k₁k₂, k₁ | P(w, z), k₂ | P(w):
/// λ⁺(k₁)ρ⁻(k₂) + λ⁻(k₁)ρ⁺(k₂) − λ⁺(k₁)ρ⁺(k₂).
pub fn combine_lower(
    lambda_plus: &WeightSequence,
    lambda_minus: &WeightSequence,
    rho_plus: &WeightSequence,
    rho_minus: &WeightSequence,
    params: impl Into<String>,
) -> WeightSequence {
    let mut k1s: Vec<u64> = lambda_plus.support().chain(lambda_minus.support()).collect();
    k1s.sort_unstable();
    k1s.dedup();
    let mut k2s: Vec<u64> = rho_plus.support().chain(rho_minus.support()).collect();
    k2s.sort_unstable();
    k2s.dedup();
    let mut entries = Vec::new();
    for &k1 in &k1s {
        let (lp, lm) = (lambda_plus.get(k1), lambda_minus.get(k1));
        for &k2 in &k2s {
            let (rp, rm) = (rho_plus.get(k2), rho_minus.get(k2));
            let v = lp * rm + lm * rp - lp * rp;
            if !v.is_zero() {
                entries.push((k1 * k2, v));
            }
        }
    }
    WeightSequence::new(
        WeightLabel::AlphaMinus,
        lambda_plus.level().max(lambda_minus.level()) * rho_plus.level().max(rho_minus.level()),
        params,
        entries,
    )
}

/// Vector-sieve upper weights α⁺_{k,a} = λ⁺_{k₁,a}·ρ⁺_{k₂}.
pub fn combine_upper(lambda_plus_at: &WeightSequence, rho_plus: &WeightSequence, a: i64, params: impl Into<String>) -> WeightSequence {
    let mut entries = Vec::with_capacity(lambda_plus_at.len() * rho_plus.len());
    for (k1, l) in lambda_plus_at.iter() {
        for (k2, r) in rho_plus.iter() {
            entries.push((k1 * k2, l * r));
        }
    }
    WeightSequence::new(WeightLabel::AlphaPlusAt(a), lambda_plus_at.level() * rho_plus.level(), params, entries)
}

/// α⁻ from `params`.
pub fn combined_lower(params: &SieveParams) -> WeightSequence {
    combine_lower(
        &lambda_weights(params, Sign::Plus),
        &lambda_weights(params, Sign::Minus),
        &rho_weights(params, Sign::Plus),
        &rho_weights(params, Sign::Minus),
        params.describe(),
    )
}

/// α⁺_{·,a} from `params`.
pub fn combined_upper(params: &SieveParams, a: i64) -> WeightSequence {
    combine_upper(&lambda_weights_at_level(params, a), &rho_weights(params, Sign::Plus), a, params.describe())
}

/// Σ_{d | n} ws(d).
pub fn divisor_sum(n: u64, ws: &WeightSequence) -> Rational64 {
    ws.divisor_sum(n)
}

/// w_r = w^{((β−1)/β)^r}
pub fn chain_floor(w: f64, beta: u32, r: u32) -> f64 {
    if r == 0 {
        return w;
    }
    let ratio = (beta as f64 - 1.0) / beta as f64;
    w.powf(ratio.powi(r as i32))
}

/// g_r(n): multiplicative over the distinct primes of `n`, with g_r(p) = 4
/// for p ≥ w_r and 0 below.
pub fn g_r_value(n: u64, r: u32, params: &SieveParams) -> u64 {
    g_r(n, r, params.w, params.beta)
}

fn g_r(n: u64, r: u32, w: f64, beta: u32) -> u64 {
    let floor = chain_floor(w, beta, r);
    let f = factor_trial(n);
    if f.primes().all(|p| p as f64 >= floor) {
        4u64.pow(f.small_omega())
    } else {
        0
    }
}

/// θ′_n = Σ_{r≥0} 2^{−r} g_r(n).
///
/// The series is summed term by term until the first `r` with `w_r <= 2`.
/// From there on every prime is at least `w_r`, so `g_r(n) = 4^{ω(n)}` for
/// all remaining `r` and the tail is added in closed form as `4^{ω(n)}·2^{1−r}`.
pub fn theta_majorant(n: u64, params: &SieveParams) -> f64 {
    theta_majorant_with(n, params.w, params.beta)
}

pub fn theta_majorant_with(n: u64, w: f64, beta: u32) -> f64 {
    let omega = factor_trial(n).small_omega();
    let stable = 4f64.powi(omega as i32);
    let mut total = 0.0;
    let mut r = 0u32;
    loop {
        if chain_floor(w, beta, r) <= 2.0 {
            return total + stable * 2f64.powi(1 - r as i32);
        }
        total += g_r(n, r, w, beta) as f64 * 2f64.powi(-(r as i32));
        r += 1;
    }
}

/// Count of admissible decompositions in V_r(n, w), plus how many violated
/// the chain floor p_r ≥ w_r.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VrCount {
    pub count: u64,
    pub floor_violations: u64,
}

/// V_r(n, w): decompositions n = p₁⋯p_r·d with p_r < ⋯ < p₁ < w, every prime
/// of d at least p_r, p₁⋯p_r·p_r^β ≥ E and p₁⋯p_h·p_h^β < E for odd h < r.
pub fn v_r_count(n: u64, w: f64, beta: u32, e_level: f64, r: u32) -> VrCount {
    let f = factor_trial(n);
    let mut small: Vec<u64> = f.primes().filter(|&p| (p as f64) < w).collect();
    small.sort_unstable_by(|a, b| b.cmp(a));
    let all_primes: Vec<u64> = f.primes().collect();
    let floor = chain_floor(w, beta, r);
    let mut result = VrCount { count: 0, floor_violations: 0 };
    let mut chosen = Vec::with_capacity(r as usize);
    fn rec(
        small: &[u64],
        start: usize,
        r: usize,
        chosen: &mut Vec<u64>,
        all_primes: &[u64],
        beta: u32,
        e_level: f64,
        floor: f64,
        out: &mut VrCount,
    ) {
        if chosen.len() == r {
            let pr = *chosen.last().expect("r >= 1");
            // primes of n not chosen must be >= p_r
            if all_primes.iter().any(|p| !chosen.contains(p) && *p < pr) {
                return;
            }
            let mut prefix = 1u128;
            for (h, &p) in chosen.iter().enumerate() {
                prefix *= p as u128;
                let test = (0..beta).fold(prefix, |acc, _| acc.saturating_mul(p as u128));
                let hh = h + 1;
                if hh == r {
                    if below_bound(test, e_level) {
                        return;
                    }
                } else if hh % 2 == 1 && !below_bound(test, e_level) {
                    return;
                }
            }
            out.count += 1;
            if (pr as f64) < floor {
                out.floor_violations += 1;
            }
            return;
        }
        for i in start..small.len() {
            chosen.push(small[i]);
            rec(small, i + 1, r, chosen, all_primes, beta, e_level, floor, out);
            chosen.pop();
        }
    }
    if r >= 1 {
        rec(&small, 0, r as usize, &mut chosen, &all_primes, beta, e_level, floor, &mut result);
    }
    result
}

/// (β/(β−1))^16 < 2, decided exactly.
pub fn beta_convergence_holds(beta: u32) -> bool {
    if beta < 2 {
        return false;
    }
    let b = BigUint::from(beta);
    let b1 = BigUint::from(beta - 1);
    b.pow(16) < BigUint::from(2u32) * b1.pow(16)
}

/// `flags[n]` is true iff n has no prime factor in `primes` (n ≤ nmax).
pub fn coprime_flags(primes: &[u64], nmax: u64) -> Vec<bool> {
    let mut flags = vec![true; nmax as usize + 1];
    for &p in primes {
        let mut m = p;
        while m <= nmax {
            flags[m as usize] = false;
            m += p;
        }
    }
    flags
}

/// Outcome of one pointwise inequality family over `1..=nmax`.
#[derive(Clone, Debug)]
pub struct SandwichOutcome {
    pub name: String,
    pub nmax: u64,
    /// Smallest violating n, if any.
    pub first_violation: Option<u64>,
}

impl SandwichOutcome {
    pub fn passed(&self) -> bool {
        self.first_violation.is_none()
    }
}

#[derive(Clone, Copy)]
enum Side {
    /// Σ weights ≤ indicator
    Below,
    /// indicator ≤ Σ weights
    Above,
}

fn check_side(name: String, ws: &WeightSequence, flags: &[bool], side: Side) -> SandwichOutcome {
    let nmax = flags.len() as u64 - 1;
    let (sums, l) = ws.scaled_divisor_sums_upto(nmax);
    let first_violation = (1..=nmax).find(|&n| {
        let ind = if flags[n as usize] { l } else { 0 };
        let s = sums[n as usize];
        match side {
            Side::Below => s > ind,
            Side::Above => s < ind,
        }
    });
    SandwichOutcome { name, nmax, first_violation }
}

/// All sandwich inequalities for `params` over `n <= nmax`:
/// the linear pair on P(w, z), the β pair on P(w), the vector-sieve lower
/// bound on P(z), and the upper bound on P(z) for every `a` in `levels`
/// (together with the linear upper sandwich at each level D_a).
pub fn verify_sandwiches(params: &SieveParams, levels: &[i64], nmax: u64) -> Vec<SandwichOutcome> {
    let lin_primes = primes_in(params.w, params.z);
    let beta_primes = primes_in(2.0, params.w);
    let all_primes = primes_in(2.0, params.z);
    let flags_wz = coprime_flags(&lin_primes, nmax);
    let flags_w = coprime_flags(&beta_primes, nmax);
    let flags_z = coprime_flags(&all_primes, nmax);

    let lp = lambda_weights(params, Sign::Plus);
    let lm = lambda_weights(params, Sign::Minus);
    let rp = rho_weights(params, Sign::Plus);
    let rm = rho_weights(params, Sign::Minus);
    let alpha_minus = combine_lower(&lp, &lm, &rp, &rm, params.describe());

    let mut jobs: Vec<(String, WeightSequence, &[bool], Side)> = vec![
        ("lambda- <= 1_(n,P(w,z))=1".into(), lm, &flags_wz, Side::Below),
        ("1_(n,P(w,z))=1 <= lambda+".into(), lp, &flags_wz, Side::Above),
        ("rho- <= 1_(n,P(w))=1".into(), rm, &flags_w, Side::Below),
        ("1_(n,P(w))=1 <= rho+".into(), rp.clone(), &flags_w, Side::Above),
        ("alpha- <= 1_(n,P(z))=1".into(), alpha_minus, &flags_z, Side::Below),
    ];
    for &a in levels {
        let la = lambda_weights_at_level(params, a);
        let alpha_plus = combine_upper(&la, &rp, a, params.describe());
        jobs.push((format!("1_(n,P(w,z))=1 <= lambda+@{a}"), la, &flags_wz, Side::Above));
        jobs.push((format!("1_(n,P(z))=1 <= alpha+@{a}"), alpha_plus, &flags_z, Side::Above));
    }
    jobs.into_par_iter()
        .map(|(name, ws, flags, side)| check_side(name, &ws, flags, side))
        .collect()
}
