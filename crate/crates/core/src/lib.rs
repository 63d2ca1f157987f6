//! A desk-scale laboratory for the sieve machinery behind almost-primes in
//! almost all short intervals.
//!
//! The crate builds the combinatorial sieve weights (linear sieve and
//! β-sieve), combines them into vector-sieve weights, evaluates the main term
//! of Richert's weighted sieve, decomposes the mean square of type I sums in
//! short intervals, and scans concrete ranges for rough P₂ numbers. Every
//! identity that can be checked at finite scale has a brute-force counterpart
//! in the tests.
//!
//! Module map:
//!
//! * [`arith`]: prime tables, factorization, μ, Λ, roughness, Vaughan's identity.
//! * [`weights`]: sieve supports, λ±/ρ±/α± weight sequences, θ′ majorant, V_r.
//! * [`partition`]: smooth step ψ, partition function σ and the index set 𝓘.
//! * [`main_term`]: F, f, Mertens products, the asymptotic constant, exact M(z, y).
//! * [`mean_square`]: γ_{d,H}, the k-sum and bridge identities, S₁/S₂/S₃, direct variance.
//! * [`scanner`]: rough P₂ enumeration and short-interval statistics.
//! * [`cli`]: the `sievelab` command line.

pub mod arith;
pub mod cli;
mod error;
pub mod main_term;
pub mod mean_square;
pub mod numeric;
pub mod partition;
pub mod quad;
pub mod scanner;
pub mod weights;

pub use error::{Error, Result};

pub use arith::{Factorization, PrimeTable};
pub use main_term::MainTermReport;
pub use mean_square::{GammaSeries, SmoothWindow, VarianceDecomposition};
pub use partition::PartitionIndexSet;
pub use scanner::{ScanConfig, ScanReport};
pub use weights::{SieveParams, Sign, WeightLabel, WeightSequence};

/// Runs `f` on a dedicated rayon pool with `workers` threads (0 = rayon default).
///
/// Every parallel computation in the crate splits its work into units that do
/// not depend on the pool size and combines them in a fixed order, so the
/// result of `f` is the same for any worker count.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> T {
    if workers == 0 {
        return f();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}
