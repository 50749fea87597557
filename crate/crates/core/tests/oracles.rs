//! Checks against independently computed reference values.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use signal_analysis::stats::{five_number, pairwise_z_matrix, two_tailed_p, z_test};

/// Two-tailed normal p-value by a separate route: the power series of erf
/// for small |z| and a Lentz continued fraction for the Mills ratio in the
/// tail.
fn reference_two_tailed(z: f64) -> f64 {
    let x = z.abs() / std::f64::consts::SQRT_2;
    if x < 2.0 {
        // erf(x) = 2/sqrt(pi) * sum (-1)^n x^(2n+1) / (n! (2n+1))
        let mut term = x;
        let mut sum = x;
        for n in 1..200 {
            term *= -x * x / n as f64;
            let add = term / (2 * n + 1) as f64;
            sum += add;
            if add.abs() < 1e-18 {
                break;
            }
        }
        1.0 - 2.0 / std::f64::consts::PI.sqrt() * sum
    } else {
        // erfc(x) = exp(-x^2)/sqrt(pi) * 1/(x + 1/2/(x + 1/(x + 3/2/(x + ...))))
        let tiny = 1e-300;
        let mut f = x;
        let mut c = x;
        let mut d = 0.0;
        for n in 1..500 {
            let a = n as f64 / 2.0;
            d = x + a * d;
            if d.abs() < tiny {
                d = tiny;
            }
            c = x + a / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = c * d;
            f *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                break;
            }
        }
        (-x * x).exp() / std::f64::consts::PI.sqrt() / f
    }
}

/// `n` values with exactly the given mean and sample variance.
fn standardized(n: usize, mean: f64, variance: f64) -> Vec<f64> {
    assert!(n.is_multiple_of(2));
    let delta = (variance * (n - 1) as f64 / n as f64).sqrt();
    (0..n)
        .map(|i| {
            if i.is_multiple_of(2) {
                mean + delta
            } else {
                mean - delta
            }
        })
        .collect()
}

#[test]
fn tail_probability_matches_reference() {
    for i in 0..=380 {
        let z = i as f64 * 0.1;
        let p = two_tailed_p(z);
        let r = reference_two_tailed(z);
        if r > 1e-300 {
            assert!((p - r).abs() <= 1e-9 * r, "z={z}: {p:e} vs {r:e}");
        }
        assert_eq!(two_tailed_p(-z), p);
    }
}

#[test]
fn far_separated_samples() {
    // se = sqrt(25/50 + 25/50) = 1, so z = -7.07
    let a = standardized(50, 100.0, 25.0);
    let b = standardized(50, 107.07, 25.0);
    let r = z_test(&a, &b).unwrap();
    assert!((r.z_statistic + 7.07).abs() < 1e-9, "{}", r.z_statistic);
    assert!(r.p_value < 1e-11);
    let expected = reference_two_tailed(7.07);
    assert!((r.p_value - expected).abs() <= 1e-9 * expected);
}

#[test]
fn pairwise_matrix_is_lower_triangular() {
    let groups = BTreeMap::from([
        ("SR1".to_string(), standardized(20, 150.0, 16.0)),
        ("SR2".to_string(), standardized(20, 152.0, 9.0)),
        ("SR3".to_string(), standardized(20, 120.0, 25.0)),
    ]);
    let m = pairwise_z_matrix(&groups).unwrap();
    assert_eq!(m.entries.len(), 3);
    for e in &m.entries {
        assert!(e.row > e.col);
        assert_eq!(m.p_value(&e.row, &e.col), m.p_value(&e.col, &e.row));
    }
    assert!(m.p_value("SR1", "SR3").unwrap() < 1e-4);
    assert!(m.p_value("SR1", "SR2").unwrap() > 0.05);
}

#[test]
fn quartiles_of_uniform_draws() {
    let grid: Vec<f64> = (0..=100).map(f64::from).collect();
    let s = five_number(&grid).unwrap();
    assert_eq!(
        (s.min, s.q1, s.median, s.q3, s.max),
        (0.0, 25.0, 50.0, 75.0, 100.0)
    );

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let draws: Vec<f64> = (0..20_000).map(|_| rng.gen::<f64>()).collect();
    let s = five_number(&draws).unwrap();
    // standard error of a uniform quartile at n = 20000 is about 0.003
    assert!((s.q1 - 0.25).abs() < 0.015);
    assert!((s.median - 0.5).abs() < 0.015);
    assert!((s.q3 - 0.75).abs() < 0.015);
    assert!(s.min >= 0.0 && s.max < 1.0);
}
