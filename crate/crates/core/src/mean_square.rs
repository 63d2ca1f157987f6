//! Mean square of type I sums in short intervals.
//!
//! For weights λ on d ≤ D₀ the quantity of interest is
//!
//! S = ∫ g(y/X) (Σ_{d≤D₀, y−H<dm≤y} λ_d − H Σ_d λ_d/d)² dy,
//!
//! which splits as S₁ + S₂ + S₃ up to a small error. This module evaluates S
//! directly and each S_j by its own formula, together with the arithmetic
//! identities behind the split: the k-sum closed form, the Fourier bridge
//! Σ_{d|c} γ_{d,H} = c²θ(1−θ)/2 and the mean-square lemma over divisors of P(w).

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{factor_trial, sieve_primes};
use crate::numeric::{fmt_sig, trigamma, Compensated};
use crate::partition::smooth_transition;
use crate::quad::{gk15, integrate};
use crate::weights::{theta_majorant, SieveParams, Sign, WeightSequence};
use crate::{Error, Result};

/// Largest X accepted by the direct evaluations.
pub const X_BUDGET: f64 = 1e6;
/// Largest H accepted by the direct evaluations.
pub const H_BUDGET: f64 = 1e3;
/// Cap on the number of terms of a directly summed γ series.
pub const GAMMA_DIRECT_CAP: u64 = 4_000_000;

/// Smooth window g: 0 outside [1/4, 2], 1 on [1/2, 1], built from the same
/// `exp(−1/t)` transition as the partition of unity.
#[derive(Clone, Copy, Debug, Default)]
pub struct SmoothWindow;

impl SmoothWindow {
    pub fn new() -> Self {
        SmoothWindow
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= 0.25 || x >= 2.0 {
            0.0
        } else if x < 0.5 {
            smooth_transition((x - 0.25) * 4.0)
        } else if x <= 1.0 {
            1.0
        } else {
            1.0 - smooth_transition(x - 1.0)
        }
    }

    /// ĝ(0) = ∫ g = 1/8 + 1/2 + 1/2, exact because B(t) + B(1 − t) = 1.
    pub fn ghat0(&self) -> f64 {
        1.125
    }

    /// ∫ g by adaptive quadrature, for cross-checking [`Self::ghat0`].
    pub fn ghat0_quadrature(&self) -> f64 {
        let f = |x: f64| self.eval(x);
        integrate(f, 0.25, 0.5, 1e-15).value + 0.5 + integrate(f, 1.0, 2.0, 1e-15).value
    }

    /// ∫_{y0}^{y1} g(y/X) dy for a short span, exact on the plateau.
    pub fn span_integral(&self, y0: f64, y1: f64, x: f64) -> f64 {
        let seams = [0.25 * x, 0.5 * x, x, 2.0 * x];
        let mut acc = 0.0;
        let mut a = y0;
        for &s in seams.iter().chain(std::iter::once(&f64::INFINITY)) {
            if s <= a {
                continue;
            }
            let b = s.min(y1);
            if b > a {
                acc += self.piece(a, b, x);
            }
            a = b;
            if a >= y1 {
                break;
            }
        }
        acc
    }

    fn piece(&self, a: f64, b: f64, x: f64) -> f64 {
        let mid = 0.5 * (a + b) / x;
        if mid <= 0.25 || mid >= 2.0 {
            0.0
        } else if (0.5..=1.0).contains(&mid) {
            b - a
        } else {
            let f = |y: f64| self.eval(y / x);
            if b - a <= 1e-3 * x {
                gk15(&f, a, b).0
            } else {
                integrate(f, a, b, 1e-14 * (b - a)).value
            }
        }
    }
}

/// The one-periodic function equal to x(1 − x) on [0, 1].
pub fn bridge(x: f64) -> f64 {
    let t = x - x.floor();
    t * (1.0 - t)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaMethod {
    /// Partial sum over m ≤ M with the tail bound d²/(π²M).
    Direct,
    /// H = a/b rational: the summand is periodic in m modulo bd, and each
    /// residue class sums to a trigamma value.
    ResidueClasses,
}

/// γ_{d,H} = Σ_{m≥1,(m,d)=1} (d/(πm))² sin²(πmH/d), with its error certificate.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct GammaSeries {
    pub d: u64,
    pub h: f64,
    pub value: f64,
    /// Number of terms summed (direct method only).
    pub truncation: Option<u64>,
    pub tail_bound: f64,
    pub method: GammaMethod,
}

/// H as a/b with b ≤ 64, if it is such a fraction exactly.
fn small_fraction(h: f64) -> Option<(u64, u64)> {
    for b in 1..=64u64 {
        let t = h * b as f64;
        if t == t.round() && t.abs() < 4.5e15 {
            let a = t as u64;
            let g = a.gcd(&b);
            return Some((a / g, b / g));
        }
    }
    None
}

/// sin²(πk/q) with the argument reduced to the first half-period.
fn sin2_frac(k: u64, q: u64) -> f64 {
    let k = k % q;
    let k = k.min(q - k);
    let s = (PI * k as f64 / q as f64).sin();
    s * s
}

pub fn gamma_dh(d: u64, h: f64, abs_tol: f64) -> GammaSeries {
    assert!(d >= 1 && h > 0.0 && abs_tol > 0.0);
    let df = d as f64;
    let scale = df * df / (PI * PI);
    let needed = (scale / abs_tol).ceil();
    if needed > GAMMA_DIRECT_CAP as f64 {
        if let Some((a, b)) = small_fraction(h) {
            // Σ_{m ≡ r (q)} 1/m² = ψ₁(r/q)/q²
            let q = b * d;
            let qf = q as f64;
            let mut acc = Compensated::new();
            for r in 1..=q {
                if r.gcd(&d) != 1 {
                    continue;
                }
                let s2 = sin2_frac(r * a % q, q);
                if s2 != 0.0 {
                    acc.add(s2 * trigamma(r as f64 / qf));
                }
            }
            return GammaSeries {
                d,
                h,
                value: scale * acc.value() / (qf * qf),
                truncation: None,
                tail_bound: 0.0,
                method: GammaMethod::ResidueClasses,
            };
        }
    }
    let m_max = (needed as u64).clamp(1, GAMMA_DIRECT_CAP);
    let mut acc = Compensated::new();
    let rational = small_fraction(h);
    for m in 1..=m_max {
        if m.gcd(&d) != 1 {
            continue;
        }
        let s2 = match rational {
            Some((a, b)) => sin2_frac(m * a % (b * d), b * d),
            None => {
                let s = (PI * m as f64 * h / df).sin();
                s * s
            }
        };
        let mf = m as f64;
        acc.add(s2 / (mf * mf));
    }
    GammaSeries {
        d,
        h,
        value: scale * acc.value(),
        truncation: Some(m_max),
        tail_bound: scale / m_max as f64,
        method: GammaMethod::Direct,
    }
}

/// (closed, direct) for Σ_{|k|≤H, c|k} (H − |k|): closed = H²/c + cθ(1−θ)
/// with θ = {H/c}, direct by enumeration.
pub fn ksum_closed_form(c: u64, h: Rational64) -> (Rational64, Rational64) {
    assert!(c >= 1);
    let cr = Rational64::from_integer(c as i64);
    let ratio = h / cr;
    let theta = ratio - ratio.floor();
    let closed = h * h / cr + cr * theta * (Rational64::one() - theta);
    let mut direct = Rational64::zero();
    let kmax = h.floor().to_integer();
    for k in -kmax..=kmax {
        if k.rem_euclid(c as i64) == 0 {
            direct += h - Rational64::from_integer(k.abs());
        }
    }
    (closed, direct)
}

/// Both sides of Σ_{d|c} γ_{d,H} = c²θ(1−θ)/2.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BridgeCheck {
    pub c: u64,
    pub h: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

pub fn bridge_identity_check(c: u64, h: f64, tol: f64) -> BridgeCheck {
    let divisors = factor_trial(c).divisors();
    let per = tol / (2.0 * divisors.len() as f64);
    let lhs: f64 = divisors.iter().map(|&d| gamma_dh(d, h, per).value).collect::<Compensated>().value();
    let cf = c as f64;
    let theta = h.rem_euclid(cf) / cf;
    let rhs = cf * cf * theta * (1.0 - theta) / 2.0;
    BridgeCheck { c, h, lhs, rhs, holds: (lhs - rhs).abs() <= tol }
}

fn check_instance(lambda: &WeightSequence, h: f64, x: f64) -> Result<Vec<(u64, f64)>> {
    if !(x > 0.0 && x <= X_BUDGET) {
        return Err(Error::BudgetExceeded { what: "X for direct mean-square evaluation".into(), needed: x as u64, budget: X_BUDGET as u64 });
    }
    if !(h >= 0.0) || h > H_BUDGET {
        return Err(Error::BudgetExceeded { what: "H for direct mean-square evaluation".into(), needed: h as u64, budget: H_BUDGET as u64 });
    }
    let mut out = Vec::with_capacity(lambda.len());
    for (d, v) in lambda.iter() {
        if v.abs() > Rational64::one() {
            return Err(Error::Domain(format!("weights must satisfy |lambda_d| <= 1, got {v} at {d}")));
        }
        out.push((d, *v.numer() as f64 / *v.denom() as f64));
    }
    if let Some(&(dmax, _)) = out.last() {
        if 0.25 * x <= h + dmax as f64 {
            return Err(Error::InvalidParams(format!("X = {x} too small for H = {h} and D0 = {dmax}")));
        }
    }
    Ok(out)
}

/// S₁ = 2ĝ(0)X Σ_d γ_{d,H} (Σ_{m≡0 (d)} λ_m/m)².
pub fn s1(lambda: &WeightSequence, d0: u64, h: f64, x: f64, g: &SmoothWindow) -> Result<f64> {
    let lam = check_instance(&lambda.truncated(d0), h, x)?;
    let mut ds: Vec<u64> = lam.iter().flat_map(|&(m, _)| factor_trial(m).divisors()).collect();
    ds.sort_unstable();
    ds.dedup();
    let terms: Vec<f64> = ds
        .par_iter()
        .map(|&d| {
            let inner: f64 = lam.iter().filter(|(m, _)| m % d == 0).map(|&(m, v)| v / m as f64).sum();
            if inner == 0.0 {
                return 0.0;
            }
            let df = d as f64;
            gamma_dh(d, h, 1e-12 * df * df).value * inner * inner
        })
        .collect();
    Ok(2.0 * g.ghat0() * x * terms.into_iter().collect::<Compensated>().value())
}

fn crt_start(d1: u64, d2: u64, k: i64, lo: u64) -> Option<(u64, u64)> {
    // n ≡ 0 (d1), n ≡ k (d2); returns the least such n ≥ lo and the modulus.
    let g = d1.gcd(&d2);
    if k.rem_euclid(g as i64) != 0 {
        return None;
    }
    let l = d1 / g * d2;
    let kk = k.rem_euclid(d2 as i64) as u64;
    let n0 = (0..d2 / g).map(|t| t * d1).find(|&n| n % d2 == kk)?;
    let first = if lo <= n0 { n0 } else { n0 + (lo - n0).div_ceil(l) * l };
    Some((first, l))
}

/// S₂ by enumeration over k, (d₁, d₂) and the progression d₁m₁ = d₂m₂ + k.
pub fn s2_direct(lambda: &WeightSequence, d0: u64, h: f64, x: f64, g: &SmoothWindow) -> Result<f64> {
    let lam = check_instance(&lambda.truncated(d0), h, x)?;
    let kmax = h.floor() as i64;
    let ks: Vec<i64> = (-kmax..=kmax).filter(|&k| k != 0).collect();
    let lo = (0.25 * x).floor() as u64 + 1;
    let hi = (2.0 * x).ceil() as u64;
    let ghat = g.ghat0();
    let per_k: Vec<f64> = ks
        .par_iter()
        .map(|&k| {
            let mut acc = Compensated::new();
            for &(d1, l1) in &lam {
                for &(d2, l2) in &lam {
                    let Some((first, l)) = crt_start(d1, d2, k, lo.max(d1)) else { continue };
                    let mut inner = Compensated::new();
                    let mut n = first;
                    while n < hi {
                        // m₂ = (n − k)/d₂ ≥ 1 holds since n > X/4 > H + D₀
                        inner.add(g.eval(n as f64 / x));
                        n += l;
                    }
                    inner.add(-ghat * x / l as f64);
                    acc.add(l1 * l2 * inner.value());
                }
            }
            (h - k.abs() as f64) * acc.value()
        })
        .collect();
    Ok(per_k.into_iter().collect::<Compensated>().value())
}

/// S₃ = H Σ_n g(n/X) θ_n² − ĝ(0)HX Σ λ_{d₁}λ_{d₂}/[d₁, d₂].
pub fn s3(lambda: &WeightSequence, d0: u64, h: f64, x: f64, g: &SmoothWindow) -> Result<f64> {
    let lam = check_instance(&lambda.truncated(d0), h, x)?;
    let lo = (0.25 * x).floor() as u64 + 1;
    let hi = (2.0 * x).ceil() as u64;
    let len = (hi - lo) as usize;
    let mut theta = vec![0f64; len];
    for &(d, v) in &lam {
        let mut n = lo.div_ceil(d) * d;
        while n < hi {
            theta[(n - lo) as usize] += v;
            n += d;
        }
    }
    let mut first = Compensated::new();
    for (i, t) in theta.iter().enumerate() {
        if *t != 0.0 {
            first.add(g.eval((lo + i as u64) as f64 / x) * t * t);
        }
    }
    let mut density = Compensated::new();
    for &(d1, l1) in &lam {
        for &(d2, l2) in &lam {
            density.add(l1 * l2 / d1.lcm(&d2) as f64);
        }
    }
    Ok(h * first.value() - g.ghat0() * h * x * density.value())
}

const SPAN_BLOCK: f64 = 4096.0;

/// S by integrating between consecutive breakpoints dm, dm + H, on each of
/// which the count is constant. Counts and the centring term are exact
/// rationals; only g and its span integrals are floating point.
pub fn variance_direct(lambda: &WeightSequence, d0: u64, h: f64, x: f64, g: &SmoothWindow) -> Result<f64> {
    let trunc = lambda.truncated(d0);
    check_instance(&trunc, h, x)?;
    let lam: Vec<(u64, BigRational)> = trunc
        .iter()
        .map(|(d, v)| (d, BigRational::new(BigInt::from(*v.numer()), BigInt::from(*v.denom()))))
        .collect();
    let h_exact = BigRational::from_float(h).ok_or_else(|| Error::Domain(format!("H = {h} is not finite")))?;
    let centre: BigRational = lam.iter().map(|(d, v)| v / BigInt::from(*d)).sum::<BigRational>() * &h_exact;

    let (y_lo, y_hi) = (0.25 * x, 2.0 * x);
    let nblocks = ((y_hi - y_lo) / SPAN_BLOCK).ceil() as usize;
    let blocks: Vec<f64> = (0..nblocks)
        .into_par_iter()
        .map(|b| {
            let b0 = y_lo + b as f64 * SPAN_BLOCK;
            let b1 = (b0 + SPAN_BLOCK).min(y_hi);
            let mut cuts = vec![b0, b1];
            for (d, _) in &lam {
                let df = *d as f64;
                for shift in [0.0, h] {
                    // dm + shift in (b0, b1)
                    let mut m = ((b0 - shift) / df).floor() as i64;
                    loop {
                        let t = df * m as f64 + shift;
                        if t >= b1 {
                            break;
                        }
                        if t > b0 {
                            cuts.push(t);
                        }
                        m += 1;
                    }
                }
            }
            cuts.sort_by(f64::total_cmp);
            cuts.dedup();
            let mut acc = Compensated::new();
            for w in cuts.windows(2) {
                let (t0, t1) = (w[0], w[1]);
                let mut count = BigRational::zero();
                for (d, v) in &lam {
                    let df = *d as f64;
                    let c = (t0 / df).floor() - ((t0 - h) / df).floor();
                    if c != 0.0 {
                        count += v * BigInt::from(c as i64);
                    }
                }
                let dev = count - &centre;
                if dev.is_zero() {
                    continue;
                }
                let dev2 = (&dev * &dev).to_f64().unwrap_or(f64::NAN);
                acc.add(dev2 * g.span_integral(t0, t1, x));
            }
            acc.value()
        })
        .collect();
    Ok(blocks.into_iter().collect::<Compensated>().value())
}

/// Direct S next to S₁, S₂, S₃ for one instance.
#[derive(Clone, Debug, Serialize)]
pub struct VarianceDecomposition {
    pub x: f64,
    pub h: f64,
    pub d0: u64,
    pub lambda_id: String,
    pub s_direct: f64,
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
    pub residual: f64,
}

impl VarianceDecomposition {
    pub fn compute(lambda: &WeightSequence, lambda_id: &str, d0: u64, h: f64, x: f64) -> Result<Self> {
        let g = SmoothWindow::new();
        let s_direct = variance_direct(lambda, d0, h, x, &g)?;
        let v1 = s1(lambda, d0, h, x, &g)?;
        let v2 = s2_direct(lambda, d0, h, x, &g)?;
        let v3 = s3(lambda, d0, h, x, &g)?;
        Ok(VarianceDecomposition {
            x,
            h,
            d0,
            lambda_id: lambda_id.to_string(),
            s_direct,
            s1: v1,
            s2: v2,
            s3: v3,
            residual: s_direct - (v1 + v2 + v3),
        })
    }

    /// |residual| / (H³ (log X)³)
    pub fn residual_ratio(&self) -> f64 {
        self.residual.abs() / (self.h.powi(3) * self.x.ln().powi(3))
    }

    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "X = {}", fmt_sig(self.x));
        let _ = writeln!(s, "H = {}", fmt_sig(self.h));
        let _ = writeln!(s, "D0 = {}", self.d0);
        let _ = writeln!(s, "lambda = {}", self.lambda_id);
        let _ = writeln!(s, "S = {}", fmt_sig(self.s_direct));
        let _ = writeln!(s, "S1 = {}", fmt_sig(self.s1));
        let _ = writeln!(s, "S2 = {}", fmt_sig(self.s2));
        let _ = writeln!(s, "S3 = {}", fmt_sig(self.s3));
        let _ = writeln!(s, "residual = {}", fmt_sig(self.residual));
        s
    }
}

fn big(r: Rational64) -> BigRational {
    BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

fn primes_below(w: f64) -> Vec<u64> {
    if w <= 2.0 {
        return Vec::new();
    }
    sieve_primes(w.ceil() as u64).map(|t| t.between(2.0, w).to_vec()).unwrap_or_default()
}

fn subset_products(primes: &[u64]) -> Vec<u64> {
    let mut out = vec![1u64];
    for &p in primes {
        let n = out.len();
        for i in 0..n {
            out.push(out[i] * p);
        }
    }
    out.sort_unstable();
    out
}

/// Both sides of the divisor mean-square lemma over P(w), in exact arithmetic.
#[derive(Clone, Debug)]
pub struct OperaCheck {
    /// Σ_{d|P(w)} d (Σ_{m|P(w), d|m} λ_m/m)²
    pub lhs: BigRational,
    /// Π(1 − 1/p) Σ_b b/φ(b)² Σ_{(e₁,e₂)=1,(e₁e₂,b)=1} θ_{be₁}θ_{be₂}/(e₁e₂φ(e₁e₂)), as displayed
    pub rhs: BigRational,
    /// Π(1 − 1/p)² Σ_{b,e₁,e₂} θ_{be₁}θ_{be₂}/(φ(be₁)φ(be₂)) · Π_p c_p, the
    /// form obtained from Möbius inversion with the d-sum evaluated as an
    /// Euler product: c_p = 1 + p/(p−1)² off be₁e₂, 1 + p on b, 1 − p/(p−1) on e₁e₂.
    pub expanded_rhs: BigRational,
}

impl OperaCheck {
    pub fn holds(&self) -> bool {
        self.lhs == self.rhs
    }

    pub fn expanded_holds(&self) -> bool {
        self.lhs == self.expanded_rhs
    }
}

pub fn opera_identity_check(w: f64, lambda: &BTreeMap<u64, Rational64>) -> OperaCheck {
    let primes = primes_below(w);
    let divs = subset_products(&primes);
    let lam = |m: u64| lambda.get(&m).copied().map(big).unwrap_or_else(BigRational::zero);
    let theta: BTreeMap<u64, BigRational> = divs
        .iter()
        .map(|&n| {
            let s = factor_trial(n).divisors().into_iter().map(lam).fold(BigRational::zero(), |a, b| a + b);
            (n, s)
        })
        .collect();
    let phi = |n: u64| BigInt::from(factor_trial(n).euler_phi());
    let r = |n: u64| BigRational::from_integer(BigInt::from(n));

    let mut lhs = BigRational::zero();
    for &d in &divs {
        let inner = divs
            .iter()
            .filter(|&&m| m % d == 0)
            .fold(BigRational::zero(), |acc, &m| acc + lam(m) / BigInt::from(m));
        lhs += &inner * &inner * BigInt::from(d);
    }

    let v: BigRational = primes.iter().fold(BigRational::one(), |acc, &p| acc * BigRational::new(BigInt::from(p - 1), BigInt::from(p)));

    // Each prime goes to none, b, e₁ or e₂.
    let k = primes.len();
    let mut displayed = BigRational::zero();
    let mut expanded = BigRational::zero();
    for code in 0..4u64.pow(k as u32) {
        let (mut b, mut e1, mut e2) = (1u64, 1u64, 1u64);
        let mut euler = BigRational::one();
        let mut c = code;
        for &p in &primes {
            let pb = BigInt::from(p);
            let pm1 = BigInt::from(p - 1);
            match c % 4 {
                0 => euler *= BigRational::one() + BigRational::new(pb.clone(), &pm1 * &pm1),
                1 => {
                    b *= p;
                    euler *= BigRational::from_integer(pb + 1);
                }
                2 => {
                    e1 *= p;
                    euler *= BigRational::one() - BigRational::new(pb, pm1);
                }
                _ => {
                    e2 *= p;
                    euler *= BigRational::one() - BigRational::new(pb, pm1);
                }
            }
            c /= 4;
        }
        let tt = &theta[&(b * e1)] * &theta[&(b * e2)];
        if tt.is_zero() {
            continue;
        }
        let pb = phi(b);
        displayed += r(b) / (&pb * &pb) * &tt / (BigInt::from(e1 * e2) * phi(e1 * e2));
        expanded += &tt / (phi(b * e1) * phi(b * e2)) * euler;
    }
    OperaCheck { lhs, rhs: &v * displayed, expanded_rhs: &v * &v * expanded }
}

/// Σ_{d|P(w)} d (Σ_{m|P(w), d|m} ρ^±_m/m)² for both signs, with the
/// θ′-majorant route Π(1 − 1/p) Σ_b bθ′_b²/φ(b)² and 1/log X for scale.
#[derive(Clone, Debug, Serialize)]
pub struct RhoMeanSquare {
    pub plus_exact: String,
    pub minus_exact: String,
    pub plus: f64,
    pub minus: f64,
    pub majorant: f64,
    pub inv_log_x: f64,
}

/// Largest number of primes below w accepted (2^k divisors).
pub const RHO_MS_MAX_PRIMES: usize = 16;

pub fn rho_mean_square_bound(params: &SieveParams) -> Result<RhoMeanSquare> {
    let primes = primes_below(params.w);
    if primes.len() > RHO_MS_MAX_PRIMES {
        return Err(Error::BudgetExceeded { what: "divisors of P(w)".into(), needed: 1 << primes.len(), budget: 1 << RHO_MS_MAX_PRIMES });
    }
    let divs = subset_products(&primes);
    let side = |sign: Sign| -> BigRational {
        let rho = crate::weights::rho_weights(params, sign);
        let mut total = BigRational::zero();
        for &d in &divs {
            let inner = rho
                .iter()
                .filter(|(m, _)| m % d == 0)
                .fold(BigRational::zero(), |acc, (m, v)| acc + big(v) / BigInt::from(m));
            total += &inner * &inner * BigInt::from(d);
        }
        total
    };
    let plus = side(Sign::Plus);
    let minus = side(Sign::Minus);
    let v: f64 = primes.iter().map(|&p| 1.0 - 1.0 / p as f64).product();
    let majorant = v * divs
        .iter()
        .map(|&b| {
            let t = theta_majorant(b, params);
            let phi = factor_trial(b).euler_phi() as f64;
            b as f64 * t * t / (phi * phi)
        })
        .collect::<Compensated>()
        .value();
    let fmt = |r: &BigRational| format!("{}/{}", r.numer(), r.denom());
    Ok(RhoMeanSquare {
        plus_exact: fmt(&plus),
        minus_exact: fmt(&minus),
        plus: plus.to_f64().unwrap_or(f64::NAN),
        minus: minus.to_f64().unwrap_or(f64::NAN),
        majorant,
        inv_log_x: 1.0 / params.x.ln(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::WeightLabel;

    fn lam(pairs: &[(u64, i64)]) -> WeightSequence {
        WeightSequence::from_integers(WeightLabel::Custom("test".into()), 100.0, pairs)
    }

    fn rmap(pairs: &[(u64, i64)]) -> BTreeMap<u64, Rational64> {
        pairs.iter().map(|&(d, v)| (d, Rational64::from_integer(v))).collect()
    }

    /// γ_{c,H} = Σ_{d|c} μ(c/d) d² {H/d}(1 − {H/d})/2, by Möbius inversion of
    /// the bridge identity; used only as an oracle.
    fn gamma_oracle(c: u64, h: f64) -> f64 {
        factor_trial(c)
            .divisors()
            .into_iter()
            .map(|d| {
                let df = d as f64;
                crate::arith::mobius(c / d) as f64 * df * df * bridge(h / df) / 2.0
            })
            .sum()
    }

    #[test]
    fn window_shape() {
        let g = SmoothWindow::new();
        assert_eq!(g.eval(0.2), 0.0);
        assert_eq!(g.eval(0.25), 0.0);
        assert_eq!(g.eval(0.5), 1.0);
        assert_eq!(g.eval(0.75), 1.0);
        assert_eq!(g.eval(1.0), 1.0);
        assert_eq!(g.eval(2.0), 0.0);
        for i in 0..1000 {
            let v = g.eval(i as f64 * 0.0025);
            assert!((0.0..=1.0).contains(&v));
        }
        assert!((g.ghat0_quadrature() - 1.125).abs() < 1e-13);
    }

    #[test]
    fn span_integral_matches_quadrature() {
        let g = SmoothWindow::new();
        let x = 1000.0;
        for &(a, b) in &[(240.0, 260.0), (499.0, 501.5), (990.0, 1010.0), (600.0, 650.0), (1990.0, 2010.0)] {
            let reference = integrate(|y: f64| g.eval(y / x), a, b, 1e-14).value;
            assert!((g.span_integral(a, b, x) - reference).abs() < 1e-12);
        }
    }

    #[test]
    fn bridge_function() {
        assert_eq!(bridge(0.0), 0.0);
        assert_eq!(bridge(3.0), 0.0);
        assert_eq!(bridge(0.5), 0.25);
        assert_eq!(bridge(7.5), 0.25);
        assert!((bridge(1.3) - bridge(0.3)).abs() < 1e-15);
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma_dh(1, 5.0, 1e-12).value.abs() < 1e-20, true);
        assert!((gamma_dh(2, 5.0, 1e-12).value - 0.5).abs() < 1e-12);
        assert!((gamma_dh(3, 5.0, 1e-12).value - 1.0).abs() < 1e-12);
        assert!((gamma_dh(1, 1.5, 1e-12).value - 0.125).abs() < 1e-12);
        assert!((gamma_dh(2, 1.5, 1e-12).value - 0.25).abs() < 1e-12);
        for d in 1..=12u64 {
            assert!(gamma_dh(d, 2.0 * d as f64, 1e-12).value.abs() < 1e-12);
        }
    }

    #[test]
    fn gamma_methods_agree() {
        for &(d, h) in &[(5u64, 2.5), (7, 3.0), (12, 7.0), (9, 0.25)] {
            let direct = gamma_dh(d, h, 1e-5);
            assert_eq!(direct.method, GammaMethod::Direct);
            assert!(direct.tail_bound <= (d * d) as f64 / (PI * PI * direct.truncation.unwrap() as f64) + 1e-18);
            let residue = gamma_dh(d, h, 1e-13);
            assert_eq!(residue.method, GammaMethod::ResidueClasses);
            assert!((direct.value - residue.value).abs() <= direct.tail_bound + 1e-12);
            assert!((residue.value - gamma_oracle(d, h)).abs() < 1e-11);
        }
    }

    #[test]
    fn gamma_irrational_h() {
        let h = 2f64.sqrt();
        let gs = gamma_dh(3, h, 1e-6);
        assert_eq!(gs.method, GammaMethod::Direct);
        assert!(gs.tail_bound <= 1e-6);
        assert!((gs.value - gamma_oracle(3, h)).abs() <= gs.tail_bound + 1e-12);
    }

    #[test]
    fn ksum_examples() {
        let r = Rational64::from_integer;
        assert_eq!(ksum_closed_form(2, r(5)), (r(13), r(13)));
        assert_eq!(ksum_closed_form(1, r(7)), (r(49), r(49)));
        assert_eq!(ksum_closed_form(11, r(7)), (r(7), r(7)));
        let (a, b) = ksum_closed_form(3, Rational64::new(7, 2));
        assert_eq!(a, b);
    }

    #[test]
    fn bridge_examples() {
        assert!(bridge_identity_check(1, 4.0, 1e-12).holds);
        let b = bridge_identity_check(3, 5.0, 1e-12);
        assert!((b.rhs - 1.0).abs() < 1e-15 && b.holds);
        assert!(bridge_identity_check(12, 7.0, 1e-9).holds);
    }

    #[test]
    fn s1_examples() {
        let g = SmoothWindow::new();
        assert!(s1(&lam(&[(1, 1)]), 1, 4.0, 1e4, &g).unwrap().abs() < 1e-12);
        // λ = {1: 1, 2: −1}, H = 3/2: inner sums 1/2 (d = 1) and −1/2 (d = 2),
        // γ = 1/8 and 1/4, so S₁ = 2ĝX(1/32 + 1/16) = (3/16)ĝX.
        let x = 1e4;
        let v = s1(&lam(&[(1, 1), (2, -1)]), 2, 1.5, x, &g).unwrap();
        assert!((v - 3.0 / 16.0 * 1.125 * x).abs() < 1e-9);
        let v2 = s1(&lam(&[(1, 1), (2, -1)]), 2, 1.5, 2.0 * x, &g).unwrap();
        assert!((v2 - 2.0 * v).abs() < 1e-9);
    }

    #[test]
    fn s2_s3_trivial_weights() {
        let g = SmoothWindow::new();
        let one = lam(&[(1, 1)]);
        let x = 2e4;
        assert_eq!(s2_direct(&one, 1, 0.0, x, &g).unwrap(), 0.0);
        assert_eq!(s3(&one, 1, 0.0, x, &g).unwrap(), 0.0);
        let h = 6.0;
        assert!(s2_direct(&one, 1, h, x, &g).unwrap().abs() < h * h * 1e-9);
        assert!(s3(&one, 1, h, x, &g).unwrap().abs() < h * 1e-9);
    }

    #[test]
    fn variance_trivial_weights() {
        let g = SmoothWindow::new();
        assert_eq!(variance_direct(&lam(&[]), 1, 5.0, 1e4, &g).unwrap(), 0.0);
        // the window always holds exactly H integers
        assert_eq!(variance_direct(&lam(&[(1, 1)]), 1, 5.0, 1e4, &g).unwrap(), 0.0);
        // H = 5/2: the count alternates between 2 and 3 on unit halves
        let v = variance_direct(&lam(&[(1, 1)]), 1, 2.5, 1e4, &g).unwrap();
        assert!((v - 0.25 * 1.125 * 1e4).abs() < 1e-8);
    }

    /// Direct variance against a fine Riemann sum of the raw integrand.
    #[test]
    fn variance_against_riemann_sum() {
        let g = SmoothWindow::new();
        let weights = lam(&[(1, 1), (2, -1), (3, -1), (6, 1)]);
        let (x, h) = (400.0, 3.0);
        let direct = variance_direct(&weights, 6, h, x, &g).unwrap();
        let centre = h * (1.0 - 0.5 - 1.0 / 3.0 + 1.0 / 6.0);
        let steps = 2_000_000usize;
        let (a, b) = (100.0, 800.0);
        let dy = (b - a) / steps as f64;
        let mut acc = Compensated::new();
        for i in 0..steps {
            let y = a + (i as f64 + 0.5) * dy;
            let n_hi = y.floor() as i64;
            let count = ((y - h).floor() as i64 + 1..=n_hi).filter(|n| n % 2 != 0 && n % 3 != 0).count() as f64;
            let v = count - centre;
            acc.add(g.eval(y / x) * v * v * dy);
        }
        assert!((direct - acc.value()).abs() < 1e-3 * direct.abs().max(1.0), "{direct} vs {}", acc.value());
    }

    #[test]
    fn variance_budget() {
        let g = SmoothWindow::new();
        assert!(matches!(variance_direct(&lam(&[(1, 1)]), 1, 5.0, 2e6, &g), Err(Error::BudgetExceeded { .. })));
        assert!(matches!(variance_direct(&lam(&[(1, 1)]), 1, 2e3, 1e5, &g), Err(Error::BudgetExceeded { .. })));
        assert!(matches!(s1(&lam(&[(1, 2)]), 1, 2.0, 1e4, &g), Err(Error::Domain(_))));
    }

    #[test]
    fn opera_displayed_examples() {
        // The displayed right-hand side differs from the left; the expanded
        // form agrees.
        let c = opera_identity_check(3.0, &rmap(&[(1, 1)]));
        assert_eq!(c.lhs, BigRational::one());
        assert_eq!(c.rhs, BigRational::from_integer(2.into()));
        assert!(c.expanded_holds());
        let c = opera_identity_check(4.0, &rmap(&[(1, 1), (2, -1), (3, -1), (6, 1)]));
        assert_eq!(c.lhs, BigRational::new(7.into(), 12.into()));
        assert_eq!(c.rhs, BigRational::new(1.into(), 3.into()));
        assert!(c.expanded_holds());
        let c = opera_identity_check(12.0, &BTreeMap::new());
        assert!(c.lhs.is_zero() && c.rhs.is_zero() && c.expanded_rhs.is_zero());
    }

    #[test]
    fn rho_mean_square_examples() {
        let p = SieveParams::reduced(2.0, 10.0, 30.0, 100.0, 3).unwrap();
        let r = rho_mean_square_bound(&p).unwrap();
        assert_eq!(r.plus_exact, "1/1");
        assert_eq!(r.minus, 1.0);
        let p = SieveParams::reduced(4.0, 10.0, 30.0, 100.0, 3).unwrap();
        let r = rho_mean_square_bound(&p).unwrap();
        assert!(r.plus.is_finite() && r.plus > 0.0);
        assert!(r.majorant > 0.0);
    }
}
