//! Seeded, parallel Monte Carlo estimates of achievable rates.
//!
//! Trial `k` draws its trellis from ChaCha8 seeded with `seed` on stream
//! `k`, so every trial sees the same network no matter which worker runs it
//! or which strategy is evaluated. Per-trial rates are collected in trial
//! order and reduced sequentially, which makes results bit-identical across
//! thread counts. Two estimates with the same seed are paired trial by
//! trial.

use dfrelay_core::model::{path_bottleneck, rate_of_snr, NetworkConfig, SnrTrellis};
use dfrelay_core::strategies::{sliding_unchecked, Strategy, BRUTE_FORCE_LIMIT};
use dfrelay_core::{Error, Result};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Sample mean of per-trial rates with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEstimate {
    pub mean: f64,
    /// Sample standard deviation over `√trials`.
    pub stderr: f64,
    pub trials: u64,
    pub seed: u64,
    pub strategy: Strategy,
}

impl RateEstimate {
    pub fn window(&self) -> Option<usize> {
        self.strategy.window()
    }
}

/// Random stream of trial `trial`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Neumaier-compensated sum, in slice order.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut carry = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

/// Mean and standard error of `samples` (`n − 1` in the variance).
pub fn summarize(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = compensated_sum(samples.iter().copied()) / n;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let ss = compensated_sum(samples.iter().map(|&x| (x - mean) * (x - mean)));
    (mean, (ss / (n - 1.0) / n).sqrt())
}

fn check_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        return Err(Error::Parameter("trials must be at least 1".into()));
    }
    Ok(())
}

fn check_strategy(config: &NetworkConfig, strategy: Strategy) -> Result<()> {
    strategy.validate(config.hops())?;
    if strategy == Strategy::BruteForce {
        let count = config.path_count().unwrap_or(u128::MAX);
        if count > BRUTE_FORCE_LIMIT {
            return Err(Error::SearchSpace {
                count,
                limit: BRUTE_FORCE_LIMIT,
            });
        }
    }
    Ok(())
}

/// Rate achieved by `strategy` on one trellis.
pub fn trial_rate(trellis: &SnrTrellis, strategy: Strategy) -> Result<f64> {
    rate_of_snr(path_bottleneck(trellis, &strategy.select(trellis)?)?)
}

/// Per-trial rates, `columns` per trial in trial order.
fn paired_rates<F>(
    config: &NetworkConfig,
    trials: u64,
    seed: u64,
    columns: usize,
    eval: F,
) -> Result<Vec<f64>>
where
    F: Fn(&SnrTrellis, &mut [f64]) -> Result<()> + Sync,
{
    let rows: Vec<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let trellis = SnrTrellis::sample(config, &mut trial_rng(seed, trial));
            let mut row = vec![0.0; columns];
            eval(&trellis, &mut row)?;
            Ok(row)
        })
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().flatten().collect())
}

fn column(rates: &[f64], columns: usize, k: usize) -> Vec<f64> {
    rates.iter().skip(k).step_by(columns).copied().collect()
}

/// Monte Carlo rate of one strategy.
pub fn estimate_rate(
    config: &NetworkConfig,
    strategy: Strategy,
    trials: u64,
    seed: u64,
) -> Result<RateEstimate> {
    Ok(estimate_rates(config, &[strategy], trials, seed)?.remove(0))
}

/// Rates of several strategies over one shared trellis stream.
pub fn estimate_rates(
    config: &NetworkConfig,
    strategies: &[Strategy],
    trials: u64,
    seed: u64,
) -> Result<Vec<RateEstimate>> {
    check_trials(trials)?;
    for &s in strategies {
        check_strategy(config, s)?;
    }
    let k = strategies.len();
    let rates = paired_rates(config, trials, seed, k, |t, row| {
        for (slot, &s) in row.iter_mut().zip(strategies) {
            *slot = trial_rate(t, s)?;
        }
        Ok(())
    })?;
    Ok(strategies
        .iter()
        .enumerate()
        .map(|(c, &strategy)| {
            let (mean, stderr) = summarize(&column(&rates, k, c));
            RateEstimate {
                mean,
                stderr,
                trials,
                seed,
                strategy,
            }
        })
        .collect())
}

/// Sliding-window mean rate as a percentage of the optimal mean rate, for
/// each window size in `windows`, over one shared trellis stream.
///
/// `w = 1` is hop-by-hop selection; `w = L` is the optimal path, giving
/// exactly `100`.
pub fn effectiveness_row(
    config: &NetworkConfig,
    windows: &[usize],
    trials: u64,
    seed: u64,
) -> Result<Vec<f64>> {
    check_trials(trials)?;
    let hops = config.hops();
    if let Some(&w) = windows.iter().find(|&&w| w == 0 || w > hops) {
        return Err(Error::Parameter(format!(
            "window must be in 1..={hops}, got {w}"
        )));
    }
    let k = windows.len() + 1;
    let rates = paired_rates(config, trials, seed, k, |t, row| {
        row[0] = trial_rate(t, Strategy::Optimal)?;
        for (slot, &w) in row[1..].iter_mut().zip(windows) {
            *slot = rate_of_snr(path_bottleneck(t, &sliding_unchecked(t, w))?)?;
        }
        Ok(())
    })?;
    let optimal = compensated_sum(column(&rates, k, 0));
    Ok((1..k)
        .map(|c| 100.0 * compensated_sum(column(&rates, k, c)) / optimal)
        .collect())
}

/// Effectiveness of one window size; see [`effectiveness_row`].
pub fn effectiveness(config: &NetworkConfig, w: usize, trials: u64, seed: u64) -> Result<f64> {
    Ok(effectiveness_row(config, &[w], trials, seed)?[0])
}

/// Sum rate of `users` users in a noise-limited network: each trial draws
/// one independent trellis per user, in user order, from the trial stream.
pub fn estimate_sum_rate_multiuser(
    config: &NetworkConfig,
    users: usize,
    strategy: Strategy,
    trials: u64,
    seed: u64,
) -> Result<RateEstimate> {
    if users == 0 || users > config.relays() {
        return Err(Error::Parameter(format!(
            "user count must be in 1..={}, got {users}",
            config.relays()
        )));
    }
    check_trials(trials)?;
    check_strategy(config, strategy)?;
    let rates: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(seed, trial);
            let mut total = 0.0;
            for _ in 0..users {
                let trellis = SnrTrellis::sample(config, &mut rng);
                total += trial_rate(&trellis, strategy)?;
            }
            Ok(total)
        })
        .collect::<Result<_>>()?;
    let (mean, stderr) = summarize(&rates);
    Ok(RateEstimate {
        mean,
        stderr,
        trials,
        seed,
        strategy,
    })
}
