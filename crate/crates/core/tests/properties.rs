use num_rational::Rational64;
use num_traits::Signed;
use proptest::prelude::*;

use sievelab::arith::{factor, factor_trial, is_prime, sieve_primes};
use sievelab::main_term::upper_sieve_function;
use sievelab::mean_square::{bridge, bridge_identity_check, gamma_dh, ksum_closed_form, GammaMethod};
use sievelab::numeric::sqrt2_pow;
use sievelab::partition::{partition_sum, psi, PartitionIndexSet};
use sievelab::scanner::{brute_force_count, prepare, scan_intervals, ScanConfig};
use sievelab::weights::{lambda_weights, rho_weights, verify_sandwiches};
use sievelab::{SieveParams, Sign, SmoothWindow, WeightSequence};

fn small_params() -> impl Strategy<Value = SieveParams> {
    (2u32..6, 0u32..4, 1.0f64..6.0, 2u32..6, 0.0f64..3.0).prop_map(|(w, dz, dd, beta, ee)| {
        let w = w as f64;
        let z = w + dz as f64 * 3.0;
        let d = z * dd;
        let e = w.powi(beta as i32) * (1.0 + ee);
        SieveParams::reduced(w, z, d, e, beta).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn prime_table_matches_trial_division(limit in 2u64..10_000) {
        let t = sieve_primes(limit).unwrap();
        prop_assert!(t.primes().windows(2).all(|w| w[0] < w[1]));
        let brute: Vec<u64> = (2..=limit).filter(|&n| (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0)).collect();
        prop_assert_eq!(t.primes(), &brute[..]);
    }

    #[test]
    fn factorization_recomposes(n in 1u64..10_000_000) {
        let t = sieve_primes(4000).unwrap();
        let f = factor(n, &t).unwrap();
        prop_assert_eq!(f.recompose(), n);
        prop_assert!(f.primes().all(is_prime));
        prop_assert_eq!(f, factor_trial(n));
    }

    #[test]
    fn weights_are_squarefree_and_bounded(p in small_params(), plus in any::<bool>()) {
        let sign = if plus { Sign::Plus } else { Sign::Minus };
        for ws in [lambda_weights(&p, sign), rho_weights(&p, sign)] {
            for (d, v) in ws.iter() {
                prop_assert!(factor_trial(d).is_squarefree());
                prop_assert!(d as f64 <= ws.level());
                prop_assert!(v.abs() <= Rational64::from_integer(1));
            }
        }
    }

    #[test]
    fn weight_text_round_trip(p in small_params(), plus in any::<bool>()) {
        let sign = if plus { Sign::Plus } else { Sign::Minus };
        let ws = lambda_weights(&p, sign);
        let back = WeightSequence::from_text(&ws.to_text()).unwrap();
        prop_assert_eq!(back.to_text(), ws.to_text());
        prop_assert_eq!(back.iter().collect::<Vec<_>>(), ws.iter().collect::<Vec<_>>());
    }

    #[test]
    fn level_decreases_in_a(p in small_params(), a in 0i64..40) {
        prop_assert!(p.level_at(a) < p.d_level);
        prop_assert!(p.level_at(a + 1) < p.level_at(a));
    }

    #[test]
    fn sandwiches_hold(p in small_params()) {
        let levels = PartitionIndexSet::from_params(&p).to_vec();
        for o in verify_sandwiches(&p, &levels, 3000) {
            prop_assert!(o.passed(), "{} fails at {:?}", o.name, o.first_violation);
        }
    }

    #[test]
    fn partition_of_unity(x in 1.0f64..1e9) {
        let s = partition_sum(x, -2, 70).unwrap();
        prop_assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn psi_monotone(a in 0.5f64..2.0, b in 0.5f64..2.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(psi(lo).unwrap() <= psi(hi).unwrap());
    }

    #[test]
    fn index_set_support_in_fringe(z in 2.0f64..1e4, r in 1.0f64..1e4) {
        let y = z * r;
        let s = PartitionIndexSet::new(z, y);
        for a in s.indices() {
            prop_assert!(sqrt2_pow(a) >= z / 4.0 * (1.0 - 1e-12));
            prop_assert!(sqrt2_pow(a + 2) <= 2.0 * y * (1.0 + 1e-12));
        }
    }

    #[test]
    fn upper_sieve_function_decreasing(s in 0.01f64..2.99, ds in 0.0f64..0.01) {
        prop_assert!(upper_sieve_function(s + ds).unwrap() <= upper_sieve_function(s).unwrap());
    }

    #[test]
    fn smooth_window_shape(x in -1.0f64..3.0) {
        let g = SmoothWindow::new();
        let v = g.eval(x);
        prop_assert!((0.0..=1.0).contains(&v));
        if !(0.25..=2.0).contains(&x) {
            prop_assert_eq!(v, 0.0);
        }
        if (0.5..=1.0).contains(&x) {
            prop_assert_eq!(v, 1.0);
        }
    }

    #[test]
    fn bridge_shape(x in -50.0f64..50.0) {
        prop_assert!((bridge(x + 1.0) - bridge(x)).abs() < 1e-12);
        prop_assert!((0.0..=0.25).contains(&bridge(x)));
    }

    #[test]
    fn gamma_series_certificate(d in 1u64..200, h in 0.1f64..60.0) {
        let g = gamma_dh(d, h, 1e-6);
        prop_assert!(g.value >= 0.0);
        if let (GammaMethod::Direct, Some(m)) = (g.method, g.truncation) {
            let df = d as f64;
            prop_assert!(g.tail_bound <= df * df / (std::f64::consts::PI.powi(2) * m as f64) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn ksum_identity(c in 1u64..300, num in 1i64..400, den in 1i64..8) {
        let (closed, direct) = ksum_closed_form(c, Rational64::new(num, den));
        prop_assert_eq!(closed, direct);
    }

    #[test]
    fn bridge_identity(c in 1u64..60, h2 in 2u32..80) {
        let b = bridge_identity_check(c, h2 as f64 / 2.0, 1e-10);
        prop_assert!((b.lhs - b.rhs).abs() <= 1e-9, "c={} H={}: {} vs {}", c, h2 as f64 / 2.0, b.lhs, b.rhs);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn scan_counts_match_second_pass(x in 20_000u64..200_000, h in 2.0f64..12.0, stride in 50u64..400) {
        let cfg = ScanConfig::new(x, h).with_stride(stride);
        let data = prepare(&cfg).unwrap();
        let report = scan_intervals(&cfg, &data);
        prop_assert!((0.0..=1.0).contains(&report.summary.exceptional_fraction));
        let mut total = 0u64;
        for row in &report.rows {
            let brute = brute_force_count(row.x, &cfg);
            prop_assert_eq!(row.count, brute);
            total += brute;
        }
        let mean = total as f64 / report.rows.len() as f64;
        prop_assert!((mean - report.summary.mean_count).abs() <= 1e-9 * mean.max(1.0));
    }
}
