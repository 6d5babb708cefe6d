//! Achievable rates from survival functions.
//!
//! For a strategy whose end-to-end SNR has survival `S(x) = Σ c·e^{−b·x/σ²}`
//! the ergodic rate is
//!
//! ```text
//! R = (1/ln 2)·∫₀^∞ S(x)/(1+x) dx = (1/ln 2)·Σ c·g(b/σ²),   g(y) = e^y·E₁(y).
//! ```
//!
//! Each strategy has two routes to its rate: the survival pipeline
//! ([`rate_from_survival`] over an [`expsum`](crate::expsum) expansion) and a
//! direct coefficient sum (`*_coefficient_sum`, `indep_binomial_sum`) enumerating the
//! multinomial expansion with exact integer coefficients. The public
//! `rate_*` functions use the pipeline; when its alternating coefficients
//! would cancel catastrophically they integrate the factored survival
//! numerically instead and report [`RateMethod::Quadrature`].

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::LN_2;
use core::fmt;

use crate::combinatorics::{binomial, composition_count, for_each_composition, multinomial};
use crate::error::{Error, Result};
use crate::expsum::{self, ExpPoly, DEFAULT_TERM_CAP, MAX_SLIDING_RELAYS};
use crate::quadrature::{integrate_half_line, Tolerance};
use crate::special::exp_scaled_e1;

/// Largest `Σ|c·g| / |Σ c·g|` accepted from a closed-form sum.
pub const CONDITION_LIMIT: f64 = 1e6;

/// Largest decay an exponentially growing expansion may reach before the
/// pipeline switches to quadrature without building it.
pub const EXPANSION_DECAY_LIMIT: u128 = 20_000;

/// How a [`RateValue`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RateMethod {
    /// Independent-path approximation of the optimal rate.
    IndepApprox,
    /// Optimal rate with stage values treated as independent.
    DpApprox,
    Hop,
    AdHoc,
    Block,
    /// Independent-window approximation, `w = 2`.
    Sliding,
    /// Numerical integration of the factored survival function.
    Quadrature,
}

impl RateMethod {
    pub fn name(&self) -> &'static str {
        match self {
            RateMethod::IndepApprox => "indep_approx",
            RateMethod::DpApprox => "dp_approx",
            RateMethod::Hop => "hop",
            RateMethod::AdHoc => "adhoc",
            RateMethod::Block => "block",
            RateMethod::Sliding => "sliding",
            RateMethod::Quadrature => "quadrature",
        }
    }
}

impl fmt::Display for RateMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// An achievable rate in bits/s/Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateValue {
    pub rate: f64,
    pub method: RateMethod,
}

fn check_scale(snr_scale: f64) -> Result<()> {
    if !(snr_scale.is_finite() && snr_scale > 0.0) {
        return Err(Error::Parameter(format!(
            "snr scale must be positive and finite, got {snr_scale}"
        )));
    }
    Ok(())
}

fn check_shape(m: usize, l: usize, snr_scale: f64) -> Result<()> {
    if m == 0 {
        return Err(Error::Parameter("relays per hop must be at least 1".into()));
    }
    if l < 2 {
        return Err(Error::Parameter(format!(
            "hops must be at least 2, got {l}"
        )));
    }
    check_scale(snr_scale)
}

/// `Σ c·g(b/σ²)` over pure-exponential terms, with `Σ |c·g(b/σ²)|`.
fn exponential_sum(s: &ExpPoly, snr_scale: f64) -> Result<(f64, f64)> {
    let tolerance = 1e-12 * s.abs_coefficient_sum().max(1.0);
    let mut value = 0.0;
    let mut magnitude = 0.0;
    for t in s.terms() {
        if t.decay == 0 {
            if t.coeff.abs() > tolerance {
                return Err(Error::Divergent(t.coeff));
            }
            continue;
        }
        debug_assert_eq!(t.power, 0);
        let g = exp_scaled_e1(f64::from(t.decay) / snr_scale)?;
        value += t.coeff * g;
        magnitude += (t.coeff * g).abs();
    }
    Ok((value, magnitude))
}

/// `(1/ln 2)·∫₀^∞ S(x)/(1+x) dx` for a survival `S` in normalized units.
///
/// Pure-exponential terms use the closed form; terms with `power > 0` are
/// integrated numerically. A nonzero zero-decay term makes the integral
/// diverge.
pub fn rate_from_survival(s: &ExpPoly, snr_scale: f64) -> Result<f64> {
    check_scale(snr_scale)?;
    let at_zero = s.eval(0.0);
    if (at_zero - 1.0).abs() > 1e-9 + 1e-15 * s.abs_coefficient_sum() {
        return Err(Error::Parameter(format!(
            "survival must equal 1 at zero, got {at_zero}"
        )));
    }
    let (pure, residual) = s.split_pure();
    let (value, _) = exponential_sum(&pure, snr_scale)?;
    let mut rate = value;
    if !residual.is_empty() {
        if let Some(t) = residual.terms().iter().find(|t| t.decay == 0) {
            return Err(Error::Divergent(t.coeff));
        }
        rate += integral(|u| residual.eval(u), snr_scale)?;
    }
    Ok(rate / LN_2)
}

fn integral<F: Fn(f64) -> f64>(survival: F, snr_scale: f64) -> Result<f64> {
    let tol = Tolerance {
        abs: 1e-300,
        rel: 1e-13,
        max_intervals: 20_000,
    };
    let e = integrate_half_line(
        |x| survival(x / snr_scale) / (1.0 + x),
        snr_scale.max(1e-3),
        tol,
    );
    if !e.value.is_finite() {
        return Err(Error::Consistency(
            "rate quadrature did not converge".into(),
        ));
    }
    Ok(e.value)
}

/// `(1/ln 2)·∫₀^∞ S(x/σ²)/(1+x) dx` by adaptive quadrature, `S` given in
/// normalized units.
pub fn quadrature_rate<F: Fn(f64) -> f64>(survival: F, snr_scale: f64) -> Result<f64> {
    check_scale(snr_scale)?;
    Ok(integral(survival, snr_scale)? / LN_2)
}

/// `Σ|c·g(b/σ²)| / Σ c·g(b/σ²)` of a pure-exponential survival, the factor
/// by which rounding in `g` is amplified in the closed form. `None` when the
/// survival has `power > 0` terms or a nonpositive closed-form sum.
pub fn closed_form_condition(s: &ExpPoly, snr_scale: f64) -> Result<Option<f64>> {
    check_scale(snr_scale)?;
    if !s.is_pure_exponential() {
        return Ok(None);
    }
    let (value, magnitude) = exponential_sum(s, snr_scale)?;
    Ok((value > 0.0).then(|| magnitude / value))
}

/// Closed form from an expansion when it is well conditioned, quadrature of
/// the factored survival otherwise.
fn pipeline<B, F>(build: B, factored: F, snr_scale: f64, method: RateMethod) -> Result<RateValue>
where
    B: FnOnce() -> Result<ExpPoly>,
    F: Fn(f64) -> f64,
{
    match build() {
        Ok(s) => {
            if closed_form_condition(&s, snr_scale)?.is_some_and(|c| c <= CONDITION_LIMIT) {
                let (value, _) = exponential_sum(&s, snr_scale)?;
                return Ok(RateValue {
                    rate: value / LN_2,
                    method,
                });
            }
        }
        Err(e) if e.is_resource() => {}
        Err(e) => return Err(e),
    }
    Ok(RateValue {
        rate: quadrature_rate(factored, snr_scale)?,
        method: RateMethod::Quadrature,
    })
}

/// Factored survivals in normalized units, accurate in both tails.
pub mod factored {
    use libm::{exp, expm1, log1p, pow};

    /// `1 − (1 − e^{−b·u})^m`
    pub fn best_of(m: f64, decay: f64, u: f64) -> f64 {
        -expm1(m * log1p(-exp(-decay * u)))
    }

    pub fn hop(m: usize, l: usize, u: f64) -> f64 {
        exp(-u) * pow(best_of(m as f64, 1.0, u), (l - 1) as f64)
    }

    pub fn adhoc(m: usize, l: usize, u: f64) -> f64 {
        best_of(m as f64, 2.0, u) * pow(best_of(m as f64, 1.0, u), (l - 2) as f64)
    }

    pub fn block(m: usize, l: usize, u: f64) -> f64 {
        let mf = m as f64;
        let via_relay = exp(-u) * best_of(mf, 1.0, u);
        let block = -expm1(mf * log1p(-via_relay));
        best_of(mf, 2.0, u) * pow(block, (l / 2 - 1) as f64)
    }

    pub fn dp(m: usize, l: usize, u: f64) -> f64 {
        let mf = m as f64;
        let mut survival = exp(-u);
        for _ in 1..l {
            survival = -expm1(mf * log1p(-exp(-u) * survival));
        }
        survival
    }

    pub fn indep(m: usize, l: usize, u: f64) -> f64 {
        let paths = pow(m as f64, (l - 1) as f64);
        best_of(paths, l as f64, u)
    }
}

fn decay_estimate(m: usize, l: usize, paths_only: bool) -> u128 {
    let m = m as u128;
    let mut total: u128 = 0;
    let mut power: u128 = 1;
    for _ in 1..l {
        power = power.saturating_mul(m);
    }
    if paths_only {
        return power.saturating_mul(l as u128);
    }
    // 2M^{L−1} + Σ_{l=1}^{L−2} M^l
    let mut p: u128 = 1;
    for _ in 1..l.saturating_sub(1) {
        p = p.saturating_mul(m);
        total = total.saturating_add(p);
    }
    total.saturating_add(power.saturating_mul(2))
}

fn too_large() -> Error {
    Error::TermCap {
        count: usize::MAX,
        cap: DEFAULT_TERM_CAP,
    }
}

/// Optimal rate under the independent-path approximation.
pub fn rate_optimal_indep(m: usize, l: usize, snr_scale: f64) -> Result<RateValue> {
    check_shape(m, l, snr_scale)?;
    pipeline(
        || {
            if decay_estimate(m, l, true) > EXPANSION_DECAY_LIMIT {
                return Err(too_large());
            }
            expsum::survival_optimal_indep(m, l)
        },
        |u| factored::indep(m, l, u),
        snr_scale,
        RateMethod::IndepApprox,
    )
}

/// Optimal rate with the DP stage values treated as independent.
pub fn rate_optimal_dp(m: usize, l: usize, snr_scale: f64) -> Result<RateValue> {
    check_shape(m, l, snr_scale)?;
    pipeline(
        || {
            if decay_estimate(m, l, false) > EXPANSION_DECAY_LIMIT {
                return Err(too_large());
            }
            expsum::survival_dp(m, l)
        },
        |u| factored::dp(m, l, u),
        snr_scale,
        RateMethod::DpApprox,
    )
}

/// Exact rate of hop-by-hop selection.
pub fn rate_hop(m: usize, l: usize, snr_scale: f64) -> Result<RateValue> {
    check_shape(m, l, snr_scale)?;
    pipeline(
        || expsum::survival_hop(m, l),
        |u| factored::hop(m, l, u),
        snr_scale,
        RateMethod::Hop,
    )
}

/// Exact rate of ad-hoc selection.
pub fn rate_adhoc(m: usize, l: usize, snr_scale: f64) -> Result<RateValue> {
    check_shape(m, l, snr_scale)?;
    pipeline(
        || expsum::survival_adhoc(m, l),
        |u| factored::adhoc(m, l, u),
        snr_scale,
        RateMethod::AdHoc,
    )
}

/// Exact rate of block-by-block selection with two-hop blocks (`L` even).
pub fn rate_block(m: usize, l: usize, snr_scale: f64) -> Result<RateValue> {
    check_shape(m, l, snr_scale)?;
    if !l.is_multiple_of(2) {
        return Err(Error::Parameter(format!(
            "two-hop blocks need an even hop count, got {l}"
        )));
    }
    pipeline(
        || expsum::survival_block(m, l),
        |u| factored::block(m, l, u),
        snr_scale,
        RateMethod::Block,
    )
}

/// Sliding-window rate (`w = 2`) under the independent-window approximation.
pub fn rate_sliding(m: usize, l: usize, snr_scale: f64) -> Result<RateValue> {
    check_shape(m, l, snr_scale)?;
    if m > MAX_SLIDING_RELAYS {
        return Err(Error::Parameter(format!(
            "sliding-window rate supports at most {MAX_SLIDING_RELAYS} relays, got {m}"
        )));
    }
    let window = expsum::survival_window::<f64>(m)?;
    pipeline(
        || expsum::survival_sliding(m, l),
        |u| factored::best_of(m as f64, 2.0, u) * libm::pow(window.eval(u), (l - 2) as f64),
        snr_scale,
        RateMethod::Sliding,
    )
}

/// Sum rate of `n` users in a noise-limited network: `n` times the
/// single-user rate.
pub fn sum_rate_multiuser(n: usize, base: RateValue) -> Result<RateValue> {
    if n == 0 {
        return Err(Error::Parameter("user count must be at least 1".into()));
    }
    Ok(RateValue {
        rate: n as f64 * base.rate,
        method: base.method,
    })
}

fn to_f64(v: i128) -> f64 {
    v as f64
}

fn overflow(what: &str) -> Error {
    Error::Overflow(format!("{what} does not fit in 128 bits"))
}

fn check_compositions(total: u32, parts: usize) -> Result<()> {
    let count = composition_count(total, parts).unwrap_or(u128::MAX);
    if count > DEFAULT_TERM_CAP as u128 {
        return Err(Error::TermCap {
            count: usize::try_from(count).unwrap_or(usize::MAX),
            cap: DEFAULT_TERM_CAP,
        });
    }
    Ok(())
}

fn g(decay: i128, snr_scale: f64) -> Result<f64> {
    exp_scaled_e1(decay as f64 / snr_scale)
}

fn sign(exponent: i128) -> i128 {
    if exponent % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Product `Π C(M, j)^{l_j}` over `j = 1..=M`, where `parts[j − offset]`
/// holds `l_j`.
fn binomial_powers(m: u64, parts: &[u32], offset: usize) -> Option<i128> {
    let mut acc: i128 = 1;
    for (k, &lj) in parts.iter().enumerate() {
        let j = (k + offset) as u64;
        if j == 0 || lj == 0 {
            continue;
        }
        acc = acc.checked_mul(binomial(m, j)?.checked_pow(lj)?)?;
    }
    Some(acc)
}

/// Independent-path optimal rate as a binomial sum:
/// `(1/ln 2)·Σ_{q=1}^{Q} C(Q,q)·(−1)^{q+1}·g(Lq/σ²)`, `Q = M^{L−1}`.
pub fn indep_binomial_sum(m: usize, l: usize, snr_scale: f64) -> Result<f64> {
    check_shape(m, l, snr_scale)?;
    let q_total = (m as u64)
        .checked_pow((l - 1) as u32)
        .filter(|&q| q <= DEFAULT_TERM_CAP as u64)
        .ok_or_else(too_large)?;
    let mut sum = 0.0;
    for q in 1..=q_total {
        let c = binomial(q_total, q).ok_or_else(|| overflow("binomial coefficient"))?;
        let decay = (l as i128) * q as i128;
        sum += to_f64(c * sign(q as i128 + 1)) * g(decay, snr_scale)?;
    }
    Ok(sum / LN_2)
}

/// Hop-by-hop rate as the multinomial sum over `l₁ + … + l_M = L − 1`:
/// `A = (L−1; l)·Π C(M,j)^{l_j}·(−1)^{Σ(j−1)l_j}`, `β = 1 + Σ j·l_j`,
/// `R = (1/ln 2)·Σ A·g(β/σ²)`.
pub fn hop_coefficient_sum(m: usize, l: usize, snr_scale: f64) -> Result<f64> {
    check_shape(m, l, snr_scale)?;
    let total = (l - 1) as u32;
    check_compositions(total, m)?;
    let mut sum = 0.0;
    let mut failure = None;
    for_each_composition(total, m, |parts| {
        if failure.is_some() {
            return;
        }
        let term = (|| -> Result<f64> {
            let mut exponent: i128 = 0;
            let mut beta: i128 = 1;
            for (k, &lj) in parts.iter().enumerate() {
                let j = (k + 1) as i128;
                exponent += (j - 1) * i128::from(lj);
                beta += j * i128::from(lj);
            }
            let a = multinomial(parts)
                .and_then(|c| c.checked_mul(binomial_powers(m as u64, parts, 1)?))
                .ok_or_else(|| overflow("coefficient"))?;
            Ok(to_f64(a * sign(exponent)) * g(beta, snr_scale)?)
        })();
        match term {
            Ok(v) => sum += v,
            Err(e) => failure = Some(e),
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(sum / LN_2),
    }
}

/// Ad-hoc rate as the sum over `i = 1..=M` and `l₁ + … + l_M = L − 2`:
/// `A(i) = C(M,i)·(L−2; l)·Π C(M,j)^{l_j}·(−1)^{i−1+Σ(j−1)l_j}`,
/// `β(i) = 2i + Σ j·l_j`, `R = (1/ln 2)·Σ A·g(β/σ²)`.
pub fn adhoc_coefficient_sum(m: usize, l: usize, snr_scale: f64) -> Result<f64> {
    check_shape(m, l, snr_scale)?;
    let total = (l - 2) as u32;
    check_compositions(total, m)?;
    let comps = collect_compositions(total, m);
    let mut sum = 0.0;
    for i in 1..=m as i128 {
        let ci = binomial(m as u64, i as u64).ok_or_else(|| overflow("binomial"))?;
        for parts in &comps {
            let mut exponent: i128 = i - 1;
            let mut beta: i128 = 2 * i;
            for (k, &lj) in parts.iter().enumerate() {
                let j = (k + 1) as i128;
                exponent += (j - 1) * i128::from(lj);
                beta += j * i128::from(lj);
            }
            let a = multinomial(parts)
                .and_then(|c| {
                    c.checked_mul(ci)?
                        .checked_mul(binomial_powers(m as u64, parts, 1)?)
                })
                .ok_or_else(|| overflow("coefficient"))?;
            sum += to_f64(a * sign(exponent)) * g(beta, snr_scale)?;
        }
    }
    Ok(sum / LN_2)
}

fn collect_compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for_each_composition(total, parts, |c| out.push(c.to_vec()));
    out
}

/// Block-by-block rate (`w = 2`, `L` even, `T = L/2`) as the sum over
/// `i = 1..=M`, `t = 1..T−1` and `l₀ + … + l_M = Mt`:
/// `A(i,t) = C(M,i)·C(T−1,t)·(Mt; l)·Π C(M,j)^{l_j}·(−1)^{i+t+Σ j·l_j}`,
/// `β(i) = 2i + Σ (j+1)·l_j`, and
/// `R = −(1/ln 2)·Σ_i [Σ_t Σ_l A·g(β/σ²) + C(M,i)·(−1)^i·g(2i/σ²)]`.
pub fn block_coefficient_sum(m: usize, l: usize, snr_scale: f64) -> Result<f64> {
    check_shape(m, l, snr_scale)?;
    if !l.is_multiple_of(2) {
        return Err(Error::Parameter(format!(
            "two-hop blocks need an even hop count, got {l}"
        )));
    }
    let blocks = (l / 2) as u64;
    let mut tables = Vec::new();
    for t in 1..blocks {
        let total = u32::try_from(m as u64 * t).map_err(|_| overflow("composition total"))?;
        check_compositions(total, m + 1)?;
        tables.push((t, collect_compositions(total, m + 1)));
    }
    let mut sum = 0.0;
    for i in 1..=m as i128 {
        let ci = binomial(m as u64, i as u64).ok_or_else(|| overflow("binomial"))?;
        for (t, comps) in &tables {
            let ct = binomial(blocks - 1, *t).ok_or_else(|| overflow("binomial"))?;
            for parts in comps {
                let mut exponent: i128 = i + i128::from(*t);
                let mut beta: i128 = 2 * i;
                for (j, &lj) in parts.iter().enumerate().skip(1) {
                    exponent += j as i128 * i128::from(lj);
                    beta += (j as i128 + 1) * i128::from(lj);
                }
                let a = multinomial(parts)
                    .and_then(|c| {
                        c.checked_mul(ci)?
                            .checked_mul(ct)?
                            .checked_mul(binomial_powers(m as u64, parts, 0)?)
                    })
                    .ok_or_else(|| overflow("coefficient"))?;
                sum += to_f64(a * sign(exponent)) * g(beta, snr_scale)?;
            }
        }
        sum += to_f64(ci * sign(i)) * g(2 * i, snr_scale)?;
    }
    Ok(-sum / LN_2)
}

/// Sliding-window rate (`w = 2`) as the multinomial sum over the window
/// survival `Σ_q a_q·e^{−b_q·u}`: with `l₁ + … + l_n = L − 2`,
/// `A(i) = C(M,i)·(L−2; l)·Π a_q^{l_q}·(−1)^i`, `β(i) = 2i + Σ b_q·l_q`,
/// `R = −(1/ln 2)·Σ A·g(β/σ²)`.
pub fn sliding_coefficient_sum(m: usize, l: usize, snr_scale: f64) -> Result<f64> {
    check_shape(m, l, snr_scale)?;
    let window = expsum::survival_window::<f64>(m)?;
    let terms = window.terms();
    let total = (l - 2) as u32;
    check_compositions(total, terms.len())?;
    let comps = collect_compositions(total, terms.len());
    let mut sum = 0.0;
    for i in 1..=m as i128 {
        let ci = binomial(m as u64, i as u64).ok_or_else(|| overflow("binomial"))?;
        for parts in &comps {
            let mut beta: i128 = 2 * i;
            let mut product = 1.0;
            for (term, &lq) in terms.iter().zip(parts.iter()) {
                beta += i128::from(term.decay) * i128::from(lq);
                product *= libm::pow(term.coeff, f64::from(lq));
            }
            let c = multinomial(parts)
                .and_then(|c| c.checked_mul(ci))
                .ok_or_else(|| overflow("coefficient"))?;
            sum += to_f64(c * sign(i)) * product * g(beta, snr_scale)?;
        }
    }
    Ok(-sum / LN_2)
}

/// Rate of a single `L`-hop chain (`M = 1`): `g(L/σ²)/ln 2`.
pub fn chain_rate(l: usize, snr_scale: f64) -> Result<f64> {
    check_scale(snr_scale)?;
    Ok(exp_scaled_e1(l as f64 / snr_scale)? / LN_2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expsum::Term;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    const SCALES: [f64; 4] = [0.1, 1.0, 10.0, 100.0];

    #[test]
    fn survival_examples() {
        let e = ExpPoly::exp_neg(1);
        // g(1)/ln 2 with g from 30-digit mpmath
        #[allow(clippy::excessive_precision)]
        let want = 0.860_347_382_270_885_95;
        assert!(rel(rate_from_survival(&e, 1.0).unwrap(), want) < 1e-13);
        let q = quadrature_rate(|u| libm::exp(-u), 1.0).unwrap();
        assert!(rel(q, want) < 1e-12);
        let s = ExpPoly::from_terms([
            Term {
                coeff: 2.0,
                power: 0,
                decay: 1,
            },
            Term {
                coeff: -1.0,
                power: 0,
                decay: 2,
            },
        ]);
        let want = (2.0 * 0.596_347_362_323_194_1 - 0.361_328_616_888_222_6) / LN_2;
        assert!(rel(rate_from_survival(&s, 1.0).unwrap(), want) < 1e-13);
        assert!((want - 1.199_407_760_825_865).abs() < 1e-13);
    }

    #[test]
    fn vanishing_snr() {
        let s = expsum::survival_hop::<f64>(2, 3).unwrap();
        let mut prev = f64::INFINITY;
        for scale in [1.0, 0.1, 0.01, 1e-3, 1e-4] {
            let r = rate_from_survival(&s, scale).unwrap();
            assert!(r < prev && r > 0.0);
            prev = r;
        }
        assert!(prev < 1e-4);
    }

    #[test]
    fn divergent_and_invalid_survivals() {
        let s = ExpPoly::from_terms([
            Term {
                coeff: 0.5,
                power: 0,
                decay: 0,
            },
            Term {
                coeff: 0.5,
                power: 0,
                decay: 1,
            },
        ]);
        assert!(matches!(
            rate_from_survival(&s, 1.0),
            Err(Error::Divergent(_))
        ));
        assert!(rate_from_survival(&ExpPoly::exp_neg(1), 0.0).is_err());
        assert!(rate_from_survival(&ExpPoly::exp_neg(1).scale(&2.0), 1.0).is_err());
    }

    #[test]
    fn residual_power_terms_use_quadrature() {
        // S(u) = (1 + u)e^{−u}, the survival of a Gamma(2, 1) variable
        let s = ExpPoly::from_terms([
            Term {
                coeff: 1.0,
                power: 0,
                decay: 1,
            },
            Term {
                coeff: 1.0,
                power: 1,
                decay: 1,
            },
        ]);
        for scale in SCALES {
            let want = quadrature_rate(|u| (1.0 + u) * libm::exp(-u), scale).unwrap();
            assert!(rel(rate_from_survival(&s, scale).unwrap(), want) < 1e-10);
        }
    }

    #[test]
    fn single_relay_reduces_to_chain() {
        for l in 2..=6 {
            for scale in SCALES {
                let chain = chain_rate(l, scale).unwrap();
                let mut all = alloc::vec![
                    rate_hop(1, l, scale).unwrap().rate,
                    rate_adhoc(1, l, scale).unwrap().rate,
                    rate_sliding(1, l, scale).unwrap().rate,
                    rate_optimal_indep(1, l, scale).unwrap().rate,
                    rate_optimal_dp(1, l, scale).unwrap().rate,
                ];
                if l % 2 == 0 {
                    all.push(rate_block(1, l, scale).unwrap().rate);
                }
                for r in all {
                    assert!(rel(r, chain) < 1e-12, "L={l} σ²={scale}: {r} vs {chain}");
                }
            }
        }
    }

    #[test]
    fn coefficient_sums_match_pipeline() {
        for m in 1..=3 {
            for l in 2..=6 {
                for scale in SCALES {
                    let hop = rate_hop(m, l, scale).unwrap();
                    assert_eq!(hop.method, RateMethod::Hop);
                    assert!(rel(hop_coefficient_sum(m, l, scale).unwrap(), hop.rate) < 1e-9);
                    let adhoc = rate_adhoc(m, l, scale).unwrap().rate;
                    assert!(rel(adhoc_coefficient_sum(m, l, scale).unwrap(), adhoc) < 1e-9);
                    if l % 2 == 0 {
                        let block = rate_block(m, l, scale).unwrap().rate;
                        assert!(rel(block_coefficient_sum(m, l, scale).unwrap(), block) < 1e-9);
                    }
                    // window coefficients are themselves rounded; the sum
                    // amplifies that by its condition number
                    let sliding = rate_sliding(m, l, scale).unwrap().rate;
                    let tol = if m < 3 { 1e-9 } else { 1e-7 };
                    assert!(rel(sliding_coefficient_sum(m, l, scale).unwrap(), sliding) < tol);
                }
            }
        }
    }

    #[test]
    fn binomial_sum_matches_pipeline() {
        for (m, l) in [(1, 4), (2, 2), (2, 3), (2, 5), (3, 3)] {
            for scale in SCALES {
                let pipe = rate_optimal_indep(m, l, scale).unwrap().rate;
                assert!(rel(indep_binomial_sum(m, l, scale).unwrap(), pipe) < 1e-9);
            }
        }
    }

    #[test]
    fn two_hop_identities() {
        for m in 1..=4 {
            for scale in SCALES {
                let adhoc = rate_adhoc(m, 2, scale).unwrap().rate;
                assert!(rel(rate_sliding(m, 2, scale).unwrap().rate, adhoc) < 1e-14);
                assert!(rel(rate_block(m, 2, scale).unwrap().rate, adhoc) < 1e-14);
                let dp = rate_optimal_dp(m, 2, scale).unwrap().rate;
                let indep = rate_optimal_indep(m, 2, scale).unwrap().rate;
                assert!(rel(dp, indep) < 1e-12);
            }
        }
    }

    #[test]
    fn pipeline_matches_quadrature() {
        for m in 1..=3 {
            for l in 2..=6 {
                for scale in SCALES {
                    let q = |f: &dyn Fn(f64) -> f64| quadrature_rate(f, scale).unwrap();
                    let hop = q(&|u| factored::hop(m, l, u));
                    assert!(rel(rate_hop(m, l, scale).unwrap().rate, hop) < 1e-8);
                    let adhoc = q(&|u| factored::adhoc(m, l, u));
                    assert!(rel(rate_adhoc(m, l, scale).unwrap().rate, adhoc) < 1e-8);
                    let dp = q(&|u| factored::dp(m, l, u));
                    assert!(rel(rate_optimal_dp(m, l, scale).unwrap().rate, dp) < 1e-8);
                    let indep = q(&|u| factored::indep(m, l, u));
                    assert!(rel(rate_optimal_indep(m, l, scale).unwrap().rate, indep) < 1e-8);
                    if l % 2 == 0 {
                        let block = q(&|u| factored::block(m, l, u));
                        assert!(rel(rate_block(m, l, scale).unwrap().rate, block) < 1e-8);
                    }
                }
            }
        }
    }

    #[test]
    fn condition_of_closed_forms() {
        let single = ExpPoly::exp_neg(1);
        assert!((closed_form_condition(&single, 1.0).unwrap().unwrap() - 1.0).abs() < 1e-15);
        let mixed = ExpPoly::from_terms([Term {
            coeff: 1.0,
            power: 1,
            decay: 1,
        }]);
        assert_eq!(closed_form_condition(&mixed, 1.0).unwrap(), None);
        let hop = expsum::survival_hop::<f64>(10, 6).unwrap();
        assert!(closed_form_condition(&hop, 10.0)
            .unwrap()
            .is_none_or(|c| c > CONDITION_LIMIT));
    }

    #[test]
    fn ill_conditioned_expansions_fall_back() {
        let r = rate_hop(10, 6, 10.0).unwrap();
        let q = quadrature_rate(|u| factored::hop(10, 6, u), 10.0).unwrap();
        assert!(rel(r.rate, q) < 1e-8);
        let dp = rate_optimal_dp(10, 6, 10.0).unwrap();
        assert_eq!(dp.method, RateMethod::Quadrature);
        let indep = rate_optimal_indep(10, 6, 10.0).unwrap();
        assert_eq!(indep.method, RateMethod::Quadrature);
        assert!(indep.rate > dp.rate);
    }

    #[test]
    fn ordering_and_monotonicity() {
        for scale in [1.0, 10.0] {
            for l in 3..=6 {
                assert!(
                    rate_adhoc(2, l, scale).unwrap().rate >= rate_hop(2, l, scale).unwrap().rate
                );
            }
        }
        for m in 1..=3 {
            let mut prev = f64::INFINITY;
            for l in 2..=6 {
                let r = rate_hop(m, l, 10.0).unwrap().rate;
                assert!(r < prev);
                prev = r;
            }
            let mut prev = 0.0;
            for scale in [0.1, 0.5, 1.0, 5.0, 10.0, 100.0] {
                let r = rate_sliding(m, 4, scale).unwrap().rate;
                assert!(r > prev);
                prev = r;
            }
        }
    }

    #[test]
    fn factored_survivals_are_valid() {
        let window: alloc::vec::Vec<ExpPoly> = (1..=MAX_SLIDING_RELAYS)
            .map(|m| expsum::survival_window(m).unwrap())
            .collect();
        for m in 1..=6usize {
            for l in 2..=6usize {
                let mut all: alloc::vec::Vec<alloc::boxed::Box<dyn Fn(f64) -> f64>> = alloc::vec![
                    alloc::boxed::Box::new(move |u| factored::hop(m, l, u)),
                    alloc::boxed::Box::new(move |u| factored::adhoc(m, l, u)),
                    alloc::boxed::Box::new(move |u| factored::dp(m, l, u)),
                    alloc::boxed::Box::new(move |u| factored::indep(m, l, u)),
                ];
                if l % 2 == 0 {
                    all.push(alloc::boxed::Box::new(move |u| factored::block(m, l, u)));
                }
                if m <= MAX_SLIDING_RELAYS {
                    let w = window[m - 1].clone();
                    all.push(alloc::boxed::Box::new(move |u| {
                        factored::best_of(m as f64, 2.0, u) * libm::pow(w.eval(u), (l - 2) as f64)
                    }));
                }
                // the window polynomial carries rounding from its own expansion
                let mass = window.get(m - 1).map_or(0.0, |w| w.abs_coefficient_sum());
                let slack = 1e-9 + 8.0 * f64::EPSILON * mass * l as f64;
                for s in &all {
                    assert!((s(0.0) - 1.0).abs() < slack, "M={m} L={l}");
                    let mut prev = f64::INFINITY;
                    for k in 0..1000 {
                        let v = s(20.0 * k as f64 / 999.0);
                        assert!(v <= prev + slack, "M={m} L={l}");
                        prev = v;
                    }
                    assert!(s(20.0) < 1e-4);
                }
            }
        }
    }

    #[test]
    fn parameter_errors() {
        assert!(rate_block(2, 5, 1.0).is_err());
        assert!(block_coefficient_sum(2, 5, 1.0).is_err());
        assert!(rate_sliding(6, 4, 1.0).is_err());
        assert!(rate_hop(0, 4, 1.0).is_err());
        assert!(rate_hop(2, 1, 1.0).is_err());
        assert!(rate_hop(2, 4, -1.0).is_err());
        let base = RateValue {
            rate: 0.5,
            method: RateMethod::Hop,
        };
        assert_eq!(sum_rate_multiuser(3, base).unwrap().rate, 1.5);
        assert_eq!(sum_rate_multiuser(1, base).unwrap(), base);
        assert!(sum_rate_multiuser(0, base).is_err());
    }
}
