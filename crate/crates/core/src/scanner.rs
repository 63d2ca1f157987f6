//! Rough P₂ numbers in short intervals.
//!
//! For a scale X the scanner lists every n with Ω(n) ≤ 2 whose prime factors
//! all exceed X^{θ_r}, then slides the window (x − h log X, x] over a grid of
//! x in (X/2, X]. Alongside the plain count it accumulates the Richert weights
//! w_n = 1 − Σ_{p|n, z≤p<2y} (1 − log p/log y) over z-rough n, with
//! z = X^{5/36} and y = X^{1/2}.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{factor_trial, isqrt, sieve_primes, PrimeTable};
use crate::numeric::{fmt_sig, round_sig, Compensated};
use crate::{Error, Result};

/// Largest X the scanner accepts.
pub const X_BUDGET: u64 = 1_000_000_000;
const CHUNK: u64 = 1 << 16;

fn default_theta_r() -> f64 {
    0.125
}

fn default_stride() -> u64 {
    1
}

/// Scan parameters, read from JSON with unknown keys rejected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    #[serde(rename = "X")]
    pub x: u64,
    pub h: f64,
    #[serde(default = "default_theta_r")]
    pub theta_r: f64,
    /// Every `stride`-th integer of (X/2, X].
    #[serde(default = "default_stride")]
    pub stride: u64,
    /// Explicit grid; overrides `stride` when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<u64>>,
    /// Enforce h ≤ X^{1/100}.
    #[serde(default)]
    pub strict_range: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl ScanConfig {
    pub fn new(x: u64, h: f64) -> Self {
        ScanConfig { x, h, theta_r: default_theta_r(), stride: 1, grid: None, strict_range: false, output: None }
    }

    pub fn with_stride(mut self, stride: u64) -> Self {
        self.stride = stride;
        self
    }

    pub fn window_len(&self) -> f64 {
        self.h * (self.x as f64).ln()
    }

    pub fn validate(&self) -> Result<()> {
        if self.x > X_BUDGET {
            return Err(Error::BudgetExceeded { what: "scan range X".into(), needed: self.x, budget: X_BUDGET });
        }
        if self.x < 16 {
            return Err(Error::InvalidParams(format!("X = {} too small", self.x)));
        }
        if !(self.h >= 2.0) {
            return Err(Error::InvalidParams(format!("h = {} < 2", self.h)));
        }
        if self.strict_range && self.h > (self.x as f64).powf(0.01) {
            return Err(Error::InvalidParams(format!("h = {} exceeds X^(1/100)", self.h)));
        }
        if self.window_len() >= self.x as f64 / 4.0 {
            return Err(Error::InvalidParams(format!("window h log X = {} is not below X/4", self.window_len())));
        }
        if !(self.theta_r > 0.0 && self.theta_r < 0.5) {
            return Err(Error::InvalidParams(format!("theta_r = {} outside (0, 1/2)", self.theta_r)));
        }
        if self.stride == 0 {
            return Err(Error::InvalidParams("stride must be positive".into()));
        }
        if let Some(grid) = &self.grid {
            if let Some(&bad) = grid.iter().find(|&&g| 2 * g <= self.x || g > self.x) {
                return Err(Error::InvalidParams(format!("grid point {bad} outside (X/2, X]")));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ScanConfig = serde_json::from_str(text)?;
        Ok(cfg)
    }

    /// Grid points in increasing order.
    pub fn grid_points(&self) -> Vec<u64> {
        match &self.grid {
            Some(g) => {
                let mut g = g.clone();
                g.sort_unstable();
                g
            }
            None => (self.x / 2 + 1..=self.x).step_by(self.stride.max(1) as usize).collect(),
        }
    }
}

/// Per-n data produced by one sieve pass over a range.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RangeData {
    /// n with Ω(n) ≤ 2 and every prime factor > threshold.
    pub rough_p2: Vec<u64>,
    /// z-rough n with their Richert weights.
    pub weighted: Vec<(u64, f64)>,
}

struct Thresholds {
    theta: f64,
    z: f64,
    two_y: f64,
    log_y: f64,
}

fn sieve_chunk(a: u64, b: u64, primes: &[u64], t: &Thresholds) -> RangeData {
    let len = (b - a + 1) as usize;
    let mut rem: Vec<u64> = (a..=b).collect();
    let mut omega = vec![0u8; len];
    let mut theta_ok = vec![true; len];
    let mut z_ok = vec![true; len];
    let mut wsum = vec![0f64; len];
    let root = isqrt(b);
    for &p in primes {
        if p > root {
            break;
        }
        let pf = p as f64;
        let term = if pf >= t.z && pf < t.two_y { 1.0 - pf.ln() / t.log_y } else { 0.0 };
        let mut n = a.div_ceil(p) * p;
        while n <= b {
            let i = (n - a) as usize;
            if pf <= t.theta {
                theta_ok[i] = false;
            }
            if pf < t.z {
                z_ok[i] = false;
            }
            wsum[i] += term;
            while rem[i] % p == 0 {
                rem[i] /= p;
                omega[i] = omega[i].saturating_add(1);
            }
            n += p;
        }
    }
    let mut out = RangeData::default();
    for i in 0..len {
        let n = a + i as u64;
        if n < 2 {
            continue;
        }
        let r = rem[i];
        if r > 1 {
            let rf = r as f64;
            omega[i] = omega[i].saturating_add(1);
            if rf <= t.theta {
                theta_ok[i] = false;
            }
            if rf < t.z {
                z_ok[i] = false;
            }
            if rf >= t.z && rf < t.two_y {
                wsum[i] += 1.0 - rf.ln() / t.log_y;
            }
        }
        if theta_ok[i] && omega[i] <= 2 {
            out.rough_p2.push(n);
        }
        if z_ok[i] {
            out.weighted.push((n, 1.0 - wsum[i]));
        }
    }
    out
}

/// Sieve pass over [lo, hi]. `table` must reach √hi.
pub fn sieve_range(lo: u64, hi: u64, theta_threshold: f64, z: f64, y: f64, table: &PrimeTable) -> Result<RangeData> {
    if hi > X_BUDGET {
        return Err(Error::BudgetExceeded { what: "sieve range".into(), needed: hi, budget: X_BUDGET });
    }
    if table.limit() < isqrt(hi) {
        return Err(Error::InvalidParams(format!("prime table up to {} does not reach sqrt({hi})", table.limit())));
    }
    let lo = lo.max(1);
    if lo > hi {
        return Ok(RangeData::default());
    }
    let t = Thresholds { theta: theta_threshold, z, two_y: 2.0 * y, log_y: y.ln() };
    let starts: Vec<u64> = (lo..=hi).step_by(CHUNK as usize).collect();
    let parts: Vec<RangeData> = starts
        .par_iter()
        .map(|&a| sieve_chunk(a, (a + CHUNK - 1).min(hi), table.primes(), &t))
        .collect();
    let mut out = RangeData::default();
    for p in parts {
        out.rough_p2.extend(p.rough_p2);
        out.weighted.extend(p.weighted);
    }
    Ok(out)
}

/// All n ∈ (X/2, X] with Ω(n) ≤ 2 and every prime factor > X^{θ_r}.
pub fn enumerate_rough_p2(x: u64, theta_r: f64, table: &PrimeTable) -> Result<Vec<u64>> {
    let xf = x as f64;
    Ok(sieve_range(x / 2 + 1, x, xf.powf(theta_r), xf.powf(5.0 / 36.0), xf.sqrt(), table)?.rough_p2)
}

/// w_n = 1 − Σ_{p|n, z≤p<2y} (1 − log p/log y), over distinct primes.
pub fn richert_weight(n: u64, z: f64, y: f64) -> f64 {
    let log_y = y.ln();
    let s: f64 = factor_trial(n)
        .primes()
        .map(|p| p as f64)
        .filter(|&p| p >= z && p < 2.0 * y)
        .map(|p| 1.0 - p.ln() / log_y)
        .sum();
    1.0 - s
}

/// w′_n ≤ 3 − ω(n) ≤ 2·1_{ω(n)≤2} and w_n ≤ w′_n, where w′_n drops the
/// restriction z ≤ p < 2y.
pub fn pointwise_chain_check(n: u64, x: u64, z: f64, y: f64) -> Result<bool> {
    if n < 2 || n > x || !crate::arith::is_rough(n, z) {
        return Err(Error::Domain(format!("need 2 <= n <= X and n z-rough, got n = {n}")));
    }
    let f = factor_trial(n);
    let log_y = y.ln();
    let w_full = 1.0 - f.primes().map(|p| 1.0 - (p as f64).ln() / log_y).sum::<f64>();
    let omega = f.small_omega() as f64;
    let eps = 1e-12;
    let indicator = if omega <= 2.0 { 2.0 } else { 0.0 };
    Ok(w_full <= 3.0 - omega + eps && 3.0 - omega <= indicator && richert_weight(n, z, y) <= w_full + eps)
}

/// Count of n ∈ (X/2, X] with (n, P(z)) = 1, Ω(n) > 2 and ω(n) ≤ 2, next to
/// Σ_{z<p} X/p² (over primes up to √X) and X/z.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SquareDivisorCount {
    pub count: u64,
    pub prime_square_sum: f64,
    pub x_over_z: f64,
}

pub fn square_divisor_count(x: u64, z: f64) -> Result<SquareDivisorCount> {
    if x > X_BUDGET {
        return Err(Error::BudgetExceeded { what: "square-divisor count".into(), needed: x, budget: X_BUDGET });
    }
    let table = sieve_primes(isqrt(x).max(2))?;
    let starts: Vec<u64> = (x / 2 + 1..=x).step_by(CHUNK as usize).collect();
    let count: u64 = starts
        .par_iter()
        .map(|&a| {
            let b = (a + CHUNK - 1).min(x);
            let mut rem: Vec<u64> = (a..=b).collect();
            let mut big = vec![0u32; rem.len()];
            let mut small = vec![0u32; rem.len()];
            let mut rough = vec![true; rem.len()];
            for &p in table.primes() {
                let mut n = a.div_ceil(p) * p;
                while n <= b {
                    let i = (n - a) as usize;
                    if (p as f64) < z {
                        rough[i] = false;
                    }
                    small[i] += 1;
                    while rem[i] % p == 0 {
                        rem[i] /= p;
                        big[i] += 1;
                    }
                    n += p;
                }
            }
            (0..rem.len())
                .filter(|&i| {
                    let (mut bo, mut so) = (big[i], small[i]);
                    if rem[i] > 1 {
                        bo += 1;
                        so += 1;
                        if (rem[i] as f64) < z {
                            return false;
                        }
                    }
                    rough[i] && bo > 2 && so <= 2
                })
                .count() as u64
        })
        .sum();
    let prime_square_sum = table
        .primes()
        .iter()
        .filter(|&&p| p as f64 > z)
        .map(|&p| x as f64 / (p as f64 * p as f64))
        .collect::<Compensated>()
        .value();
    Ok(SquareDivisorCount { count, prime_square_sum, x_over_z: x as f64 / z })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanRow {
    pub x: u64,
    pub count: u64,
    pub weighted_sum: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanSummary {
    #[serde(rename = "X")]
    pub x: u64,
    pub h: f64,
    pub theta_r: f64,
    pub grid_stride: Option<u64>,
    pub grid_size: u64,
    pub mean_count: f64,
    pub std_count: f64,
    pub mean_over_h: f64,
    pub exceptional_fraction: f64,
    pub min_count: u64,
    pub max_count: u64,
    pub min_weighted_sum: f64,
    pub mean_weighted_sum: f64,
    pub histogram: BTreeMap<u64, u64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanReport {
    pub rows: Vec<ScanRow>,
    pub summary: ScanSummary,
}

impl ScanReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,count,weighted_sum\n");
        for r in &self.rows {
            let _ = writeln!(s, "{},{},{}", r.x, r.count, fmt_sig(r.weighted_sum));
        }
        s
    }

    /// Summary as pretty JSON, floats rounded to 12 significant digits.
    pub fn summary_json(&self) -> String {
        let mut s = self.summary.clone();
        for v in [&mut s.h, &mut s.theta_r, &mut s.mean_count, &mut s.std_count, &mut s.mean_over_h, &mut s.exceptional_fraction, &mut s.min_weighted_sum, &mut s.mean_weighted_sum] {
            *v = round_sig(*v);
        }
        serde_json::to_string_pretty(&s).expect("summary serializes")
    }

    /// Writes `scan.csv` and `summary.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("scan.csv"), self.to_csv())?;
        std::fs::write(dir.join("summary.json"), self.summary_json() + "\n")?;
        Ok(())
    }
}

fn window_start(x: u64, len: f64) -> u64 {
    // least integer n with n > x − len
    let t = x as f64 - len;
    if t < 0.0 {
        0
    } else {
        t.floor() as u64 + 1
    }
}

/// Counts roughs in (x − h log X, x] for every grid point, together with the
/// Richert-weighted sum over the z-rough entries of `data`.
pub fn scan_intervals(config: &ScanConfig, data: &RangeData) -> ScanReport {
    let len = config.window_len();
    let grid = config.grid_points();
    let rows: Vec<ScanRow> = grid
        .par_iter()
        .map(|&x| {
            let lo = window_start(x, len);
            let count = data.rough_p2.partition_point(|&n| n <= x) - data.rough_p2.partition_point(|&n| n < lo);
            let a = data.weighted.partition_point(|&(n, _)| n < lo);
            let b = data.weighted.partition_point(|&(n, _)| n <= x);
            let weighted_sum = data.weighted[a..b].iter().map(|&(_, w)| w).collect::<Compensated>().value();
            ScanRow { x, count: count as u64, weighted_sum }
        })
        .collect();
    let summary = summarize(config, &rows);
    ScanReport { rows, summary }
}

fn summarize(config: &ScanConfig, rows: &[ScanRow]) -> ScanSummary {
    let n = rows.len().max(1) as f64;
    let mean = rows.iter().map(|r| r.count as f64).collect::<Compensated>().value() / n;
    let var = rows.iter().map(|r| (r.count as f64 - mean).powi(2)).collect::<Compensated>().value() / (n - 1.0).max(1.0);
    let mut histogram = BTreeMap::new();
    for r in rows {
        *histogram.entry(r.count).or_insert(0u64) += 1;
    }
    let exceptional = rows.iter().filter(|r| r.count == 0).count() as f64 / n;
    ScanSummary {
        x: config.x,
        h: config.h,
        theta_r: config.theta_r,
        grid_stride: if config.grid.is_some() { None } else { Some(config.stride) },
        grid_size: rows.len() as u64,
        mean_count: mean,
        std_count: var.sqrt(),
        mean_over_h: mean / config.h,
        exceptional_fraction: exceptional,
        min_count: rows.iter().map(|r| r.count).min().unwrap_or(0),
        max_count: rows.iter().map(|r| r.count).max().unwrap_or(0),
        min_weighted_sum: rows.iter().map(|r| r.weighted_sum).fold(f64::INFINITY, f64::min),
        mean_weighted_sum: rows.iter().map(|r| r.weighted_sum).collect::<Compensated>().value() / n,
        histogram,
    }
}

/// Sieve data for every n that some window of `config` can reach.
pub fn prepare(config: &ScanConfig) -> Result<RangeData> {
    config.validate()?;
    let xf = config.x as f64;
    let table = sieve_primes(isqrt(config.x).max(2))?;
    let grid = config.grid_points();
    let lo = grid.first().map_or(config.x / 2 + 1, |&g| window_start(g, config.window_len()));
    sieve_range(lo, config.x, xf.powf(config.theta_r), xf.powf(5.0 / 36.0), xf.sqrt(), &table)
}

/// Validates, sieves and scans.
pub fn run_scan(config: &ScanConfig) -> Result<ScanReport> {
    let data = prepare(config)?;
    Ok(scan_intervals(config, &data))
}

/// Recount for one x by factoring every n of the window.
pub fn brute_force_count(x: u64, config: &ScanConfig) -> u64 {
    let threshold = (config.x as f64).powf(config.theta_r);
    (window_start(x, config.window_len())..=x)
        .filter(|&n| {
            if n < 2 {
                return false;
            }
            let f = factor_trial(n);
            f.big_omega() <= 2 && f.primes().all(|p| p as f64 > threshold)
        })
        .count() as u64
}
