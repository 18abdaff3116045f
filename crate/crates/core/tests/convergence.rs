//! Rates behind the limit and finite-difference checks.

use ces_demand::demand;
use ces_demand::lr::{self, Exponent, PositiveVector};
use ces_demand::oracle::{self, OracleConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Central differences are second order once the step is large enough for
/// truncation to dominate rounding.
#[test]
fn shephard_differences_converge_at_second_order() {
    let cfg = OracleConfig::default()
        .with_seed(11)
        .with_samples(60)
        .with_zero_band(0.05);
    let mut log_ratios = Vec::new();
    for i in 0..60 {
        let inst = oracle::random_demand_instance(&cfg, i);
        let tree = inst.validated().unwrap();
        let p = inst.price_vector().unwrap();
        let e = demand::expenditure(&tree, inst.u, &p).unwrap();
        let x = demand::hicksian_demand(&tree, inst.u, &p)
            .unwrap()
            .quantities;
        let err = |h: f64| {
            let g = oracle::finite_diff_gradient(|q| demand::expenditure(&tree, inst.u, q), &p, h)
                .unwrap();
            g.iter()
                .zip(x.as_slice())
                .zip(p.as_slice())
                .map(|((a, b), pi)| pi * (a - b).abs() / e)
                .fold(0.0, f64::max)
        };
        log_ratios.push((err(1e-3) / err(0.5e-3)).ln());
    }
    let ratio = (log_ratios.iter().sum::<f64>() / log_ratios.len() as f64).exp();
    assert!((3.5..=4.5).contains(&ratio), "{ratio}");
}

/// `ln(‖x‖_{r,θ} / Π x^θ) = r κ₂/2 + r² κ₃/6 + O(r³)`, with `κ` the
/// cumulants of `ln x` under `θ`.
#[test]
fn weighted_ces_approaches_cobb_douglas_linearly_in_r() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..200 {
        let n = rng.gen_range(2..=8);
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..=2.0)).collect();
        let theta = oracle::random_weights(&mut rng, n);
        let t = theta.as_slice();
        let mean: f64 = x.iter().zip(t).map(|(v, w)| w * v.ln()).sum();
        let var: f64 = x
            .iter()
            .zip(t)
            .map(|(v, w)| w * (v.ln() - mean).powi(2))
            .sum();
        let k3: f64 = x
            .iter()
            .zip(t)
            .map(|(v, w)| w * (v.ln() - mean).powi(3))
            .sum();
        let x = PositiveVector::quantities(x).unwrap();
        let cd = lr::weighted_norm(&x, &theta, Exponent::CobbDouglas).unwrap();
        for r in [1e-4, -1e-4, 1e-6] {
            let v = lr::weighted_norm(&x, &theta, Exponent::Finite(r)).unwrap();
            let predicted = r * var / 2.0 + r * r * k3 / 6.0;
            assert!(
                ((v / cd).ln() - predicted).abs() <= r.abs().powi(3) + 1e-14,
                "r={r}"
            );
        }
        let v = lr::weighted_norm(&x, &theta, Exponent::Finite(1e-8)).unwrap();
        assert!((v / cd - 1.0).abs() <= 1e-8);
    }
}

/// `min ≥ ‖x‖_r ≥ n^{1/r} min` for `r < 0`.
#[test]
fn negative_r_norm_is_within_n_to_the_one_over_r_of_the_minimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..500 {
        let n = rng.gen_range(2..=8);
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..=2.0)).collect();
        let min = x.iter().copied().fold(f64::INFINITY, f64::min);
        let x = PositiveVector::quantities(x).unwrap();
        for r in [-40.0, -400.0, -4000.0] {
            let v = lr::lr_norm(&x, Exponent::Finite(r)).unwrap();
            assert!(v <= min * (1.0 + 1e-15));
            assert!(v >= min * (n as f64).powf(1.0 / r) * (1.0 - 1e-15));
        }
        let v = lr::lr_norm(&x, Exponent::Finite(-1e7)).unwrap();
        assert!((v / min - 1.0).abs() <= 1e-6);
    }
    // a single dominant minimum is reached quickly
    let x = PositiveVector::quantities(vec![0.5, 2.0, 1.5]).unwrap();
    let v = lr::lr_norm(&x, Exponent::Finite(-40.0)).unwrap();
    assert!((v / 0.5 - 1.0).abs() <= 1e-6);
}
