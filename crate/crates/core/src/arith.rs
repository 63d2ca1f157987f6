//! Prime tables, factorization and the classical multiplicative functions.

use crate::{Error, Result};

/// Entries per segment of the segmented sieve.
pub const SEGMENT_LEN: usize = 1 << 20;

/// All primes up to `limit`, in increasing order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimeTable {
    limit: u64,
    primes: Vec<u64>,
}

impl PrimeTable {
    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    /// Membership for `p <= limit`.
    pub fn contains(&self, p: u64) -> bool {
        self.primes.binary_search(&p).is_ok()
    }

    /// Primes `p` with `lo <= p <= hi`.
    pub fn range(&self, lo: u64, hi: u64) -> &[u64] {
        let a = self.primes.partition_point(|&p| p < lo);
        let b = self.primes.partition_point(|&p| p <= hi);
        if a >= b {
            &[]
        } else {
            &self.primes[a..b]
        }
    }

    /// Primes `p < x` for real `x`.
    pub fn below(&self, x: f64) -> &[u64] {
        let b = self.primes.partition_point(|&p| (p as f64) < x);
        &self.primes[..b]
    }

    /// Primes `p` with `lo <= p < hi` for real bounds.
    pub fn between(&self, lo: f64, hi: f64) -> &[u64] {
        let a = self.primes.partition_point(|&p| (p as f64) < lo);
        let b = self.primes.partition_point(|&p| (p as f64) < hi);
        if a >= b {
            &[]
        } else {
            &self.primes[a..b]
        }
    }
}

fn small_sieve(limit: usize) -> Vec<u64> {
    let mut composite = vec![false; limit + 1];
    let mut out = Vec::new();
    for i in 2..=limit {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= limit {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Segmented sieve of Eratosthenes: every prime `<= limit`.
///
/// Memory per segment is [`SEGMENT_LEN`] bytes plus the base primes up to √limit.
pub fn sieve_primes(limit: u64) -> Result<PrimeTable> {
    if limit < 2 {
        return Err(Error::EmptyRange(format!("no primes below {limit}")));
    }
    let root = isqrt(limit) as usize;
    let base = small_sieve(root.max(2));
    let mut primes = Vec::new();
    let mut seg = vec![false; SEGMENT_LEN];
    let mut lo: u64 = 2;
    while lo <= limit {
        let hi = (lo + SEGMENT_LEN as u64 - 1).min(limit);
        let len = (hi - lo + 1) as usize;
        seg[..len].fill(false);
        for &p in &base {
            if p * p > hi {
                break;
            }
            let mut start = (p * p).max(lo.div_ceil(p) * p);
            while start <= hi {
                seg[(start - lo) as usize] = true;
                start += p;
            }
        }
        primes.extend(
            seg[..len]
                .iter()
                .enumerate()
                .filter(|(_, &c)| !c)
                .map(|(i, _)| lo + i as u64),
        );
        lo = hi + 1;
    }
    Ok(PrimeTable { limit, primes })
}

/// ⌊√n⌋.
pub fn isqrt(n: u64) -> u64 {
    let mut r = ((n as f64).sqrt() as u64).min(u32::MAX as u64);
    while r * r > n {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|s| s <= n) {
        r += 1;
    }
    r
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller–Rabin; the first twelve prime bases are exact below 3.3·10²⁴.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &BASES {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Prime factorization `n = Π p^e`, primes increasing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    pub n: u64,
    pub factors: Vec<(u64, u32)>,
}

impl Factorization {
    /// Ω(n)
    pub fn big_omega(&self) -> u32 {
        self.factors.iter().map(|&(_, e)| e).sum()
    }

    /// ω(n)
    pub fn small_omega(&self) -> u32 {
        self.factors.len() as u32
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }

    pub fn mobius(&self) -> i8 {
        if !self.is_squarefree() {
            0
        } else if self.factors.len() % 2 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    pub fn recompose(&self) -> u64 {
        self.factors.iter().map(|&(p, e)| p.pow(e)).product()
    }

    /// All divisors in increasing order.
    pub fn divisors(&self) -> Vec<u64> {
        let mut out = vec![1u64];
        for &(p, e) in &self.factors {
            let len = out.len();
            let mut pk = 1;
            for _ in 0..e {
                pk *= p;
                for i in 0..len {
                    out.push(out[i] * pk);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// φ(n)
    pub fn euler_phi(&self) -> u64 {
        self.factors.iter().map(|&(p, e)| (p - 1) * p.pow(e - 1)).product()
    }
}

/// Factors `n` by trial division with `table`; a cofactor above the table
/// is accepted as prime after a Miller–Rabin check.
pub fn factor(n: u64, table: &PrimeTable) -> Result<Factorization> {
    if n == 0 {
        return Err(Error::Domain("cannot factor 0".into()));
    }
    let mut m = n;
    let mut factors = Vec::new();
    for &p in table.primes() {
        if p * p > m {
            break;
        }
        if m % p == 0 {
            let mut e = 0;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            factors.push((p, e));
        }
    }
    if m > 1 {
        let covered = table.limit().checked_mul(table.limit()).is_none_or(|sq| sq >= m);
        if !covered && !is_prime(m) {
            return Err(Error::InsufficientTable { n, limit: table.limit(), cofactor: m });
        }
        factors.push((m, 1));
    }
    Ok(Factorization { n, factors })
}

/// Trial-division factorization without a table.
pub fn factor_trial(n: u64) -> Factorization {
    assert!(n >= 1, "factor_trial(0)");
    let mut m = n;
    let mut factors = Vec::new();
    let mut d = 2u64;
    while d * d <= m {
        if m % d == 0 {
            let mut e = 0;
            while m % d == 0 {
                m /= d;
                e += 1;
            }
            factors.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if m > 1 {
        factors.push((m, 1));
    }
    Factorization { n, factors }
}

/// Ω(n), total number of prime factors.
pub fn big_omega(n: u64) -> u32 {
    factor_trial(n).big_omega()
}

/// ω(n), number of distinct prime factors.
pub fn small_omega(n: u64) -> u32 {
    factor_trial(n).small_omega()
}

/// True iff every prime factor of `n` is at least `z`, i.e. `(n, P(z)) = 1`.
pub fn is_rough(n: u64, z: f64) -> bool {
    assert!(n >= 1);
    let mut d = 2u64;
    while (d as f64) < z {
        if d.saturating_mul(d) > n {
            // n is 1 or prime
            return n == 1 || (n as f64) >= z;
        }
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Möbius function μ(n).
pub fn mobius(n: u64) -> i8 {
    factor_trial(n).mobius()
}

/// von Mangoldt function Λ(n).
pub fn von_mangoldt(n: u64) -> f64 {
    let f = factor_trial(n);
    match f.factors.as_slice() {
        [(p, _)] => (*p as f64).ln(),
        _ => 0.0,
    }
}

/// Both sides of Vaughan's identity for Λ(n) with truncations y = z = V.
#[derive(Clone, Debug)]
pub struct VaughanCheck {
    pub lambda: f64,
    /// Λ(n)·1_{n ≤ V}
    pub small_part: f64,
    /// Σ_{bc = n, b ≤ V} μ(b) log c
    pub type_i_log: f64,
    /// −Σ_{bcd = n, b ≤ V, c ≤ V} μ(b) Λ(c)
    pub type_i_lambda: f64,
    /// Σ_{bcd = n, b > V, c > V} μ(b) Λ(c)
    pub type_ii: f64,
    pub holds: bool,
}

impl VaughanCheck {
    pub fn rhs(&self) -> f64 {
        self.small_part + self.type_i_log + self.type_i_lambda + self.type_ii
    }
}

pub const VAUGHAN_REL_TOL: f64 = 1e-9;

/// Evaluates both sides of Vaughan's identity by direct divisor summation.
///
/// Agreement is measured relative to `max(1, Σ|pieces|)` since Λ(n) is
/// frequently zero.
pub fn vaughan_check(n: u64, v: u64) -> Result<VaughanCheck> {
    if v < 2 || v.checked_mul(v).is_none_or(|vv| vv > n) {
        return Err(Error::Domain(format!("Vaughan check needs 2 <= V^2 <= n, got n={n}, V={v}")));
    }
    let f = factor_trial(n);
    let divs = f.divisors();
    let lambda = von_mangoldt(n);
    let small_part = if n <= v { lambda } else { 0.0 };
    let mut type_i_log = 0.0;
    let mut type_i_lambda = 0.0;
    let mut type_ii = 0.0;
    for &b in &divs {
        let mu_b = mobius(b) as f64;
        if mu_b == 0.0 {
            continue;
        }
        if b <= v {
            type_i_log += mu_b * ((n / b) as f64).ln();
        }
        let rest = n / b;
        for c in factor_trial(rest).divisors() {
            let lam_c = von_mangoldt(c);
            if lam_c == 0.0 {
                continue;
            }
            if b <= v && c <= v {
                type_i_lambda -= mu_b * lam_c;
            } else if b > v && c > v {
                type_ii += mu_b * lam_c;
            }
        }
    }
    let mut out = VaughanCheck {
        lambda,
        small_part,
        type_i_log,
        type_i_lambda,
        type_ii,
        holds: false,
    };
    let scale = (small_part.abs() + type_i_log.abs() + type_i_lambda.abs() + type_ii.abs()).max(1.0);
    out.holds = (out.rhs() - lambda).abs() <= VAUGHAN_REL_TOL * scale;
    Ok(out)
}

/// φ(n) by trial division.
pub fn euler_phi(n: u64) -> u64 {
    factor_trial(n).euler_phi()
}
