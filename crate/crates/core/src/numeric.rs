//! Small floating-point helpers shared across modules.

/// Euler–Mascheroni constant to 30 significant digits.
pub const EULER_GAMMA_30: &str = "0.577215664901532860606512090082";

/// γ as an `f64`, parsed from [`EULER_GAMMA_30`].
pub fn euler_gamma() -> f64 {
    EULER_GAMMA_30.parse().expect("constant parses")
}

/// e^γ.
pub fn exp_euler_gamma() -> f64 {
    euler_gamma().exp()
}

/// Neumaier compensated summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct Compensated {
    sum: f64,
    comp: f64,
}

impl Compensated {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl std::iter::FromIterator<f64> for Compensated {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut c = Compensated::new();
        for v in iter {
            c.add(v);
        }
        c
    }
}

/// Compensated sum of an iterator.
pub fn csum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<Compensated>().value()
}

/// Formats `v` with 12 significant digits in scientific notation.
pub fn fmt_sig(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    format!("{v:.11e}")
}

/// Rounds `v` to 12 significant digits.
pub fn round_sig(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    fmt_sig(v).parse().unwrap_or(v)
}

/// √2^a, exact in binary for even `a`.
pub fn sqrt2_pow(a: i64) -> f64 {
    let half = a.div_euclid(2) as i32;
    let base = 2f64.powi(half);
    if a.rem_euclid(2) == 0 {
        base
    } else {
        base * std::f64::consts::SQRT_2
    }
}

/// Trigamma function ψ₁(x) = Σ_{k≥0} 1/(x+k)² for x > 0.
///
/// Shifts the argument above 20 with the recurrence and finishes with the
/// asymptotic series; relative error is below 1e-16 on (0, ∞).
pub fn trigamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let mut acc = Compensated::new();
    let mut t = x;
    while t < 20.0 {
        acc.add(1.0 / (t * t));
        t += 1.0;
    }
    let inv = 1.0 / t;
    let inv2 = inv * inv;
    // 1/t + 1/(2t²) + Σ B_{2k}/t^{2k+1}
    let series = inv
        + 0.5 * inv2
        + inv
            * inv2
            * (1.0 / 6.0
                + inv2
                    * (-1.0 / 30.0
                        + inv2 * (1.0 / 42.0 + inv2 * (-1.0 / 30.0 + inv2 * (5.0 / 66.0)))));
    acc.add(series);
    acc.value()
}
