//! The sliding-window CDF against a direct simulation of one window.

use dfrelay_core::expsum::sliding_window_cdf;
use dfrelay_core::model::exponential;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// First-hop SNR picked by `argmax_i min(γ_{1i}, max_j γ_{ij})`, unit mean.
fn simulate(m: usize, samples: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|_| {
            let mut best = (f64::NEG_INFINITY, 0.0);
            for _ in 0..m {
                let first = exponential(&mut rng, 1.0);
                let onward = (0..m)
                    .map(|_| exponential(&mut rng, 1.0))
                    .fold(0.0, f64::max);
                let score = first.min(onward);
                if score > best.0 {
                    best = (score, first);
                }
            }
            best.1
        })
        .collect()
}

fn ks_distance(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(k, &x)| {
            let f = cdf(x);
            (f - k as f64 / n).abs().max((f - (k + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn window_cdf_matches_simulation() {
    for (m, seed) in [(2usize, 11u64), (3, 12)] {
        let f = sliding_window_cdf::<f64>(m).unwrap();
        assert!(f.eval(0.0).abs() < 1e-12);
        assert!((f.eval(60.0) - 1.0).abs() < 1e-12);
        let d = ks_distance(simulate(m, 1_000_000, seed), |x| f.eval(x));
        assert!(d < 3e-3, "M={m}: KS distance {d}");
    }
}
