//! Smooth dyadic partition of unity in steps of √2.
//!
//! ψ rises from 0 at x = 1 to 1 at x = √2 through the usual `exp(−1/t)`
//! bump construction. σ(x) = ψ(x) below √2 and 1 − ψ(x/√2) above, so σ lives
//! on [1, 2] and Σ_a σ(x/√2^a) telescopes to 1.

use std::f64::consts::SQRT_2;

use serde::Serialize;

use crate::numeric::sqrt2_pow;
use crate::weights::SieveParams;
use crate::{Error, Result};

/// B(t) = b(t)/(b(t) + b(1−t)) with b(t) = e^{−1/t} for t > 0.
pub fn smooth_transition(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        1.0 / (1.0 + (1.0 / t - 1.0 / (1.0 - t)).exp())
    }
}

fn psi_raw(x: f64) -> f64 {
    smooth_transition((x - 1.0) / (SQRT_2 - 1.0))
}

/// ψ(x) = B((x − 1)/(√2 − 1)).
pub fn psi(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("psi needs x > 0, got {x}")));
    }
    Ok(psi_raw(x))
}

/// σ(x) = ψ(x) for x ≤ √2, 1 − ψ(x/√2) otherwise; zero for x ≤ 0.
pub fn sigma(x: f64) -> f64 {
    if !(x > 0.0) {
        0.0
    } else if x <= SQRT_2 {
        psi_raw(x)
    } else {
        1.0 - psi_raw(x / SQRT_2)
    }
}

/// Indices a with σ(x/√2^a) ≠ 0, as an inclusive range.
fn active_indices(x: f64) -> (i64, i64) {
    let c = (2.0 * x.log2()).floor() as i64;
    let active: Vec<i64> = (c - 3..=c + 2).filter(|&a| sigma(x / sqrt2_pow(a)) != 0.0).collect();
    match (active.first(), active.last()) {
        (Some(&lo), Some(&hi)) => (lo, hi),
        _ => (c, c - 1),
    }
}

/// Σ_{lower ≤ a ≤ upper} σ(x/√2^a); fails unless the range holds every
/// index with a nonzero term.
pub fn partition_sum(x: f64, lower: i64, upper: i64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("partition_sum needs x > 0, got {x}")));
    }
    let (lo, hi) = active_indices(x);
    if lo <= hi && (lo < lower || hi > upper) {
        return Err(Error::IncompleteCover { x, lower, upper });
    }
    Ok((lo.max(lower)..=hi.min(upper)).map(|a| sigma(x / sqrt2_pow(a))).sum())
}

/// The index set 𝓘 = [⌊log z/log √2⌋ − 2, ⌊log y/log √2⌋] ∩ ℕ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PartitionIndexSet {
    pub lower: i64,
    pub upper: i64,
}

/// ⌊log x / log √2⌋, corrected so that √2^k ≤ x < √2^{k+1} holds exactly.
fn floor_log_sqrt2(x: f64) -> i64 {
    let mut k = (2.0 * x.log2()).floor() as i64;
    while sqrt2_pow(k) > x {
        k -= 1;
    }
    while sqrt2_pow(k + 1) <= x {
        k += 1;
    }
    k
}

impl PartitionIndexSet {
    pub fn new(z: f64, y: f64) -> Self {
        PartitionIndexSet {
            lower: (floor_log_sqrt2(z) - 2).max(0),
            upper: floor_log_sqrt2(y),
        }
    }

    pub fn from_params(params: &SieveParams) -> Self {
        Self::new(params.z, params.y)
    }

    /// Explicit bounds, e.g. an empty set via `upper < lower`.
    pub fn with_bounds(lower: i64, upper: i64) -> Self {
        PartitionIndexSet { lower, upper }
    }

    pub fn is_empty(&self) -> bool {
        self.upper < self.lower
    }

    pub fn len(&self) -> usize {
        if self.is_empty() {
            0
        } else {
            (self.upper - self.lower + 1) as usize
        }
    }

    pub fn contains(&self, a: i64) -> bool {
        self.lower <= a && a <= self.upper
    }

    pub fn indices(&self) -> impl Iterator<Item = i64> {
        self.lower..=self.upper
    }

    pub fn to_vec(&self) -> Vec<i64> {
        self.indices().collect()
    }

    /// Σ_{a∈𝓘} σ(x/√2^a), without any coverage requirement.
    pub fn weight(&self, x: f64) -> f64 {
        let (lo, hi) = active_indices(x);
        (lo.max(self.lower)..=hi.min(self.upper)).map(|a| sigma(x / sqrt2_pow(a))).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CoverCase {
    One,
    Zero,
    Partial,
}

/// Classifies p by position relative to [z, y) and [z/4, 2y], together with
/// the computed Σ_{a∈𝓘} σ(p/√2^a).
pub fn prime_cover_case(p: u64, z: f64, y: f64, index_set: &PartitionIndexSet) -> (CoverCase, f64) {
    let x = p as f64;
    let sum = index_set.weight(x);
    let case = if z <= x && x < y {
        CoverCase::One
    } else if x < z / 4.0 || x > 2.0 * y {
        CoverCase::Zero
    } else {
        CoverCase::Partial
    };
    (case, sum)
}
