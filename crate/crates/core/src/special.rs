//! Exponentially scaled exponential integral.

use alloc::format;

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `g(y) = e^y·E₁(y) = −e^y·Ei(−y)` for `y > 0`.
///
/// Every rate formula in this crate is a sum of `c·g(b/σ²)` terms. At low
/// SNR `y` is huge, `e^y` overflows and `E₁(y)` underflows, so the product is
/// evaluated as one quantity: a power series for `y < 1` and the modified
/// Lentz continued fraction for `y ≥ 1`, which yields `g` directly.
pub fn exp_scaled_e1(y: f64) -> Result<f64> {
    if y.is_nan() || y <= 0.0 {
        return Err(Error::Domain(format!(
            "scaled exponential integral needs y > 0, got {y}"
        )));
    }
    if y.is_infinite() {
        return Ok(0.0);
    }
    Ok(if y < 1.0 {
        series(y)
    } else {
        continued_fraction(y)
    })
}

fn series(y: f64) -> f64 {
    // E₁(y) = −γ − ln y − Σ_{k≥1} (−y)^k / (k·k!)
    let mut sum = 0.0;
    let mut term = 1.0;
    for k in 1..100 {
        term *= -y / k as f64;
        let contrib = term / k as f64;
        sum += contrib;
        if contrib.abs() < sum.abs() * 1e-17 {
            break;
        }
    }
    libm::exp(y) * (-EULER_GAMMA - libm::log(y) - sum)
}

fn continued_fraction(y: f64) -> f64 {
    // E₁(y)·e^y = 1/(y+1− 1²/(y+3− 2²/(y+5− …)))
    const TINY: f64 = 1e-300;
    let mut b = y + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let delta = c * d;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}
