//! Exponential polynomials `f(u) = Σ c·uᵖ·e^{−b·u}` in the normalized SNR
//! `u = x/σ²`, with integer powers `p ≥ 0` and integer decays `b ≥ 0`.
//!
//! The class is closed under addition, multiplication, integer powers and
//! integration from zero, which is all that is needed to expand the CDF and
//! survival function of every relay-selection strategy. Working in
//! normalized units keeps every decay a small exact integer; the SNR scale
//! only enters when a survival function is turned into a rate.
//!
//! Coefficients are generic over [`Coefficient`]. `f64` is the working
//! type; with the `exact` feature, `BigRational` gives exact expansions for
//! auditing coefficients and cancellations.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;
use core::fmt::Debug;
use core::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Default limit on the number of merged terms an expansion may hold.
pub const DEFAULT_TERM_CAP: usize = 1_000_000;

/// Terms with `|c| < PRUNE_RELATIVE·max|c|` are dropped from `f64` expansions.
pub const PRUNE_RELATIVE: f64 = 1e-14;

/// Largest relay count supported by the sliding-window CDF construction.
pub const MAX_SLIDING_RELAYS: usize = 5;

/// Coefficient ring for [`ExpPoly`].
pub trait Coefficient:
    Clone
    + Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn from_int(v: i64) -> Self;
    /// `num / den`.
    fn ratio(num: i64, den: i64) -> Self;
    fn to_f64(&self) -> f64;
    fn is_zero(&self) -> bool;
    fn is_finite(&self) -> bool;
    /// Whether this coefficient may be dropped next to one of magnitude
    /// `largest`.
    fn negligible(&self, largest: f64) -> bool;

    fn one() -> Self {
        Self::from_int(1)
    }
}

impl Coefficient for f64 {
    fn zero() -> Self {
        0.0
    }
    fn from_int(v: i64) -> Self {
        v as f64
    }
    fn ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
    fn negligible(&self, largest: f64) -> bool {
        self.abs() < PRUNE_RELATIVE * largest
    }
}

#[cfg(feature = "exact")]
mod exact {
    use super::Coefficient;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use num_traits::{ToPrimitive, Zero};

    impl Coefficient for BigRational {
        fn zero() -> Self {
            Zero::zero()
        }
        fn from_int(v: i64) -> Self {
            BigRational::from_integer(BigInt::from(v))
        }
        fn ratio(num: i64, den: i64) -> Self {
            BigRational::new(BigInt::from(num), BigInt::from(den))
        }
        fn to_f64(&self) -> f64 {
            ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
        }
        fn is_zero(&self) -> bool {
            Zero::is_zero(self)
        }
        fn is_finite(&self) -> bool {
            true
        }
        fn negligible(&self, _largest: f64) -> bool {
            Zero::is_zero(self)
        }
    }
}

/// One term `coeff·u^power·e^{−decay·u}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Term<C = f64> {
    pub coeff: C,
    pub power: u32,
    pub decay: u32,
}

/// A normalized exponential polynomial: terms sorted by `(decay, power)`,
/// like terms merged, negligible terms removed.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpPoly<C = f64> {
    terms: Vec<Term<C>>,
}

impl<C: Coefficient> Default for ExpPoly<C> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<C: Coefficient> ExpPoly<C> {
    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn constant(c: C) -> Self {
        Self::term(c, 0, 0)
    }

    pub fn one() -> Self {
        Self::constant(C::one())
    }

    pub fn term(coeff: C, power: u32, decay: u32) -> Self {
        Self::from_terms([Term {
            coeff,
            power,
            decay,
        }])
    }

    /// `e^{−decay·u}`
    pub fn exp_neg(decay: u32) -> Self {
        Self::term(C::one(), 0, decay)
    }

    /// `1 − e^{−decay·u}`, the CDF of an exponential with rate `decay`.
    pub fn one_minus_exp(decay: u32) -> Self {
        Self::from_terms([
            Term {
                coeff: C::one(),
                power: 0,
                decay: 0,
            },
            Term {
                coeff: -C::one(),
                power: 0,
                decay,
            },
        ])
    }

    pub fn from_terms<I: IntoIterator<Item = Term<C>>>(terms: I) -> Self {
        let mut merged: BTreeMap<(u32, u32), C> = BTreeMap::new();
        for t in terms {
            accumulate(&mut merged, (t.decay, t.power), t.coeff);
        }
        Self::from_map(merged)
    }

    fn from_map(merged: BTreeMap<(u32, u32), C>) -> Self {
        let largest = merged
            .values()
            .map(|c| c.to_f64().abs())
            .fold(0.0, f64::max);
        let terms = merged
            .into_iter()
            .filter(|(_, c)| !c.is_zero() && !c.negligible(largest))
            .map(|((decay, power), coeff)| Term {
                coeff,
                power,
                decay,
            })
            .collect();
        Self { terms }
    }

    pub fn terms(&self) -> &[Term<C>] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_decay(&self) -> Option<u32> {
        self.terms.iter().map(|t| t.decay).max()
    }

    pub fn max_power(&self) -> Option<u32> {
        self.terms.iter().map(|t| t.power).max()
    }

    /// True when every term has `power == 0`.
    pub fn is_pure_exponential(&self) -> bool {
        self.terms.iter().all(|t| t.power == 0)
    }

    /// Coefficient of the `(power, decay)` term, zero if absent.
    pub fn coefficient(&self, power: u32, decay: u32) -> C {
        self.terms
            .iter()
            .find(|t| t.power == power && t.decay == decay)
            .map(|t| t.coeff.clone())
            .unwrap_or_else(C::zero)
    }

    pub fn scale(&self, k: &C) -> Self {
        Self::from_terms(self.terms.iter().map(|t| Term {
            coeff: t.coeff.clone() * k.clone(),
            ..t.clone()
        }))
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.try_mul_capped(other, DEFAULT_TERM_CAP)
    }

    pub fn try_mul_capped(&self, other: &Self, cap: usize) -> Result<Self> {
        let mut merged: BTreeMap<(u32, u32), C> = BTreeMap::new();
        for a in &self.terms {
            for b in &other.terms {
                accumulate(
                    &mut merged,
                    (a.decay + b.decay, a.power + b.power),
                    a.coeff.clone() * b.coeff.clone(),
                );
                if merged.len() > cap {
                    return Err(Error::TermCap {
                        count: merged.len(),
                        cap,
                    });
                }
            }
        }
        Self::from_map(merged).finite()
    }

    /// `self^n` by repeated squaring, normalizing after every product.
    pub fn try_pow(&self, n: u64) -> Result<Self> {
        self.try_pow_capped(n, DEFAULT_TERM_CAP)
    }

    pub fn try_pow_capped(&self, mut n: u64, cap: usize) -> Result<Self> {
        let mut result = Self::one();
        let mut base = self.clone();
        while n > 0 {
            if n & 1 == 1 {
                result = result.try_mul_capped(&base, cap)?;
            }
            n >>= 1;
            if n > 0 {
                base = base.try_mul_capped(&base, cap)?;
            }
        }
        Ok(result)
    }

    fn finite(self) -> Result<Self> {
        match self.terms.iter().find(|t| !t.coeff.is_finite()) {
            Some(t) => Err(Error::Overflow(format!(
                "coefficient of u^{}·e^(-{}u) is not finite",
                t.power, t.decay
            ))),
            None => Ok(self),
        }
    }

    /// `F(x) = ∫₀ˣ f(u) du`, again an exponential polynomial in `x`.
    ///
    /// A zero-decay term `c·uᵖ` integrates to `c·x^{p+1}/(p+1)`; for `b > 0`,
    /// `∫₀ˣ uᵖe^{−bu}du = p!/b^{p+1} − e^{−bx}·Σ_{k≤p} p!/(k!·b^{p−k+1})·xᵏ`.
    pub fn integrate_from_zero(&self) -> Self {
        let mut out = Vec::with_capacity(self.terms.len() * 2);
        for t in &self.terms {
            if t.decay == 0 {
                out.push(Term {
                    coeff: t.coeff.clone() * C::ratio(1, i64::from(t.power) + 1),
                    power: t.power + 1,
                    decay: 0,
                });
                continue;
            }
            let b = i64::from(t.decay);
            // c_k = c·p!/(k!·b^{p−k+1}), built downward from c_p = c/b.
            let mut ck = t.coeff.clone() * C::ratio(1, b);
            for k in (0..=t.power).rev() {
                out.push(Term {
                    coeff: -ck.clone(),
                    power: k,
                    decay: t.decay,
                });
                if k == 0 {
                    out.push(Term {
                        coeff: ck.clone(),
                        power: 0,
                        decay: 0,
                    });
                } else {
                    ck = ck * C::ratio(i64::from(k), b);
                }
            }
        }
        Self::from_terms(out)
    }

    /// Splits into the pure-exponential part and the `power > 0` residual.
    pub fn split_pure(&self) -> (Self, Self) {
        let (pure, residual): (Vec<_>, Vec<_>) =
            self.terms.iter().cloned().partition(|t| t.power == 0);
        (Self { terms: pure }, Self { terms: residual })
    }

    /// Converts coefficients to `f64` (exact expansions to working precision).
    pub fn to_f64(&self) -> ExpPoly<f64> {
        ExpPoly::from_terms(self.terms.iter().map(|t| Term {
            coeff: t.coeff.to_f64(),
            power: t.power,
            decay: t.decay,
        }))
    }

    /// Evaluates at `u ≥ 0`, Horner in `u` within each decay group.
    pub fn eval(&self, u: f64) -> f64 {
        let mut total = 0.0;
        let mut k = 0;
        while k < self.terms.len() {
            let decay = self.terms[k].decay;
            let mut end = k;
            while end < self.terms.len() && self.terms[end].decay == decay {
                end += 1;
            }
            // Powers ascend within the group; walk them from the top.
            let mut acc = 0.0;
            let mut power = self.terms[end - 1].power;
            for t in self.terms[k..end].iter().rev() {
                while power > t.power {
                    acc *= u;
                    power -= 1;
                }
                acc += t.coeff.to_f64();
            }
            for _ in 0..power {
                acc *= u;
            }
            let weight = if decay == 0 {
                1.0
            } else {
                libm::exp(-(decay as f64) * u)
            };
            total += acc * weight;
            k = end;
        }
        total
    }

    /// `Σ |c|` over all terms, a scale for cancellation error in [`eval`](Self::eval).
    pub fn abs_coefficient_sum(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.to_f64().abs()).sum()
    }
}

fn accumulate<C: Coefficient>(map: &mut BTreeMap<(u32, u32), C>, key: (u32, u32), c: C) {
    match map.get_mut(&key) {
        Some(slot) => {
            let prev = core::mem::replace(slot, C::zero());
            *slot = prev + c;
        }
        None => {
            map.insert(key, c);
        }
    }
}

impl<C: Coefficient> Add for &ExpPoly<C> {
    type Output = ExpPoly<C>;
    fn add(self, rhs: Self) -> ExpPoly<C> {
        ExpPoly::from_terms(self.terms.iter().chain(&rhs.terms).cloned())
    }
}

impl<C: Coefficient> Sub for &ExpPoly<C> {
    type Output = ExpPoly<C>;
    fn sub(self, rhs: Self) -> ExpPoly<C> {
        self + &(-rhs)
    }
}

impl<C: Coefficient> Neg for &ExpPoly<C> {
    type Output = ExpPoly<C>;
    fn neg(self) -> ExpPoly<C> {
        ExpPoly {
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    coeff: -t.coeff.clone(),
                    ..t.clone()
                })
                .collect(),
        }
    }
}

/// `∫_{0 < s₁ < … < sₙ < x} f₁(s₁)·…·fₙ(sₙ) ds` as a polynomial in `x`.
///
/// Integrates the innermost variable from zero up to the next one and
/// repeats, so each step is a single [`ExpPoly::integrate_from_zero`].
pub fn ordered_integral<C: Coefficient>(factors: &[ExpPoly<C>]) -> Result<ExpPoly<C>> {
    let mut acc = ExpPoly::one();
    for f in factors {
        acc = acc.try_mul(f)?.integrate_from_zero();
    }
    Ok(acc)
}

fn check_shape(m: usize, l: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::Parameter("relays per hop must be at least 1".into()));
    }
    if l < 2 {
        return Err(Error::Parameter(format!(
            "hops must be at least 2, got {l}"
        )));
    }
    Ok(())
}

fn int(v: usize) -> Result<u64> {
    u64::try_from(v).map_err(|_| Error::Parameter(format!("{v} is too large")))
}

/// `1 − (1 − e^{−b·u})^M`: survival of the best of `M` exponentials with rate `b`.
fn best_of_survival<C: Coefficient>(m: usize, decay: u32) -> Result<ExpPoly<C>> {
    Ok(&ExpPoly::one() - &ExpPoly::one_minus_exp(decay).try_pow(int(m)?)?)
}

/// Survival of the end-to-end SNR under hop-by-hop selection:
/// `e^{−u}·(1 − (1 − e^{−u})^M)^{L−1}`.
pub fn survival_hop<C: Coefficient>(m: usize, l: usize) -> Result<ExpPoly<C>> {
    check_shape(m, l)?;
    let per_hop = best_of_survival::<C>(m, 1)?;
    ExpPoly::exp_neg(1).try_mul(&per_hop.try_pow(int(l - 1)?)?)
}

/// Survival under ad-hoc selection:
/// `(1 − (1 − e^{−2u})^M)·(1 − (1 − e^{−u})^M)^{L−2}`.
pub fn survival_adhoc<C: Coefficient>(m: usize, l: usize) -> Result<ExpPoly<C>> {
    check_shape(m, l)?;
    let joined = best_of_survival::<C>(m, 2)?;
    let per_hop = best_of_survival::<C>(m, 1)?;
    joined.try_mul(&per_hop.try_pow(int(l - 2)?)?)
}

/// Survival under block-by-block selection with two-hop blocks (`L` even):
/// `(1 − (1 − e^{−2u})^M)·(1 − (1 − e^{−u}(1 − (1 − e^{−u})^M))^M)^{T−1}`,
/// `T = L/2`.
pub fn survival_block<C: Coefficient>(m: usize, l: usize) -> Result<ExpPoly<C>> {
    check_shape(m, l)?;
    if !l.is_multiple_of(2) {
        return Err(Error::Parameter(format!(
            "two-hop blocks need an even hop count, got {l}"
        )));
    }
    let blocks = l / 2;
    let joined = best_of_survival::<C>(m, 2)?;
    // per relay i: min(γ_{s,i}, max_j γ_{ij}) has survival e^{−u}(1 − (1 − e^{−u})^M)
    let via_relay = ExpPoly::exp_neg(1).try_mul(&best_of_survival::<C>(m, 1)?)?;
    let block_cdf = (&ExpPoly::one() - &via_relay).try_pow(int(m)?)?;
    let block_survival = &ExpPoly::one() - &block_cdf;
    joined.try_mul(&block_survival.try_pow(int(blocks - 1)?)?)
}

/// CDF of the DP value `V(1, L)` when the stage values are treated as
/// independent: `F₁ = 1 − e^{−u}`, `F_l = (1 − e^{−u}(1 − F_{l−1}))^M`.
///
/// The largest decay of the result is `2M^{L−1} + Σ_{l=1}^{L−2} M^l`.
pub fn dp_cdf<C: Coefficient>(m: usize, l: usize) -> Result<ExpPoly<C>> {
    check_shape(m, l)?;
    let mut cdf = ExpPoly::one_minus_exp(1);
    for _ in 1..l {
        let inner = ExpPoly::exp_neg(1).try_mul(&(&ExpPoly::one() - &cdf))?;
        cdf = (&ExpPoly::one() - &inner).try_pow(int(m)?)?;
    }
    Ok(cdf)
}

/// `1 − dp_cdf(M, L)`.
pub fn survival_dp<C: Coefficient>(m: usize, l: usize) -> Result<ExpPoly<C>> {
    Ok(&ExpPoly::one() - &dp_cdf::<C>(m, l)?)
}

/// Survival of the best of `Q = M^{L−1}` independent `L`-hop paths:
/// `1 − (1 − e^{−L·u})^Q`.
pub fn survival_optimal_indep<C: Coefficient>(m: usize, l: usize) -> Result<ExpPoly<C>> {
    check_shape(m, l)?;
    let q = (m as u128)
        .checked_pow(u32::try_from(l - 1).unwrap_or(u32::MAX))
        .filter(|&q| q < DEFAULT_TERM_CAP as u128)
        .ok_or(Error::TermCap {
            count: usize::MAX,
            cap: DEFAULT_TERM_CAP,
        })?;
    let decay = u32::try_from(l).map_err(|_| Error::Parameter("too many hops".into()))?;
    best_of_survival::<C>(q as usize, decay)
}

/// CDF of the first-hop SNR chosen by one two-hop sliding window.
///
/// From entry node, relay `k` is chosen to maximize
/// `min(γ_{1k}, max_j γ_{kj})`; the returned polynomial is the CDF of the
/// chosen `γ_{1k}`. It is assembled as
/// `(1−e^{−u})^M + Σ_{N=1}^{M−1} P(M,N)·e^{−(M−N)u}·I_N(u)`, where `I_N` is
/// the integral over the ordered region `γ₁ < … < γ_N ≤ u` of
/// `Σ_k P(choice = k)·e^{−γ₁}…e^{−γ_N}` and
/// `P(choice = k) = (M−N)/(M−k)·G(γ_k)^{M−k} − (M−N)/(M−k+1)·G(γ_k)^{M−k+1}`
/// with `G(γ) = (1−e^{−γ})^M`.
pub fn sliding_window_cdf<C: Coefficient>(m: usize) -> Result<ExpPoly<C>> {
    if m == 0 || m > MAX_SLIDING_RELAYS {
        return Err(Error::Parameter(format!(
            "sliding-window CDF supports 1..={MAX_SLIDING_RELAYS} relays, got {m}"
        )));
    }
    let mi = m as i64;
    let mu = m as u64;
    let below = ExpPoly::<C>::one_minus_exp(1);
    let weight = ExpPoly::<C>::exp_neg(1);
    let mut cdf = below.try_pow(mu)?;
    let mut arrangements: i64 = 1;
    for n in 1..m {
        // P(M, N) = M!/(M−N)!
        arrangements *= mi - n as i64 + 1;
        let ni = n as i64;
        let mut region = ExpPoly::zero();
        for k in 1..=n {
            let ki = k as i64;
            let hi = below
                .try_pow(mu * (mu - k as u64))?
                .scale(&C::ratio(mi - ni, mi - ki));
            let lo = below
                .try_pow(mu * (mu - k as u64 + 1))?
                .scale(&C::ratio(mi - ni, mi - ki + 1));
            let choice = (&hi - &lo).try_mul(&weight)?;
            let factors: Vec<ExpPoly<C>> = (1..=n)
                .map(|pos| {
                    if pos == k {
                        choice.clone()
                    } else {
                        weight.clone()
                    }
                })
                .collect();
            region = &region + &ordered_integral(&factors)?;
        }
        let above = ExpPoly::<C>::exp_neg((m - n) as u32).scale(&C::from_int(arrangements));
        cdf = &cdf + &above.try_mul(&region)?;
    }
    Ok(cdf)
}

/// `1 − sliding_window_cdf(M)`, checked to be a pure exponential sum with
/// no constant term.
pub fn survival_window<C: Coefficient>(m: usize) -> Result<ExpPoly<C>> {
    let survival = &ExpPoly::one() - &sliding_window_cdf::<C>(m)?;
    let tolerance = 1e-10 * survival.abs_coefficient_sum().max(1.0);
    let mut kept = Vec::with_capacity(survival.len());
    for t in survival.terms() {
        let magnitude = t.coeff.to_f64().abs();
        if t.power > 0 || t.decay == 0 {
            if magnitude > tolerance {
                return Err(Error::Consistency(format!(
                    "window survival keeps u^{}·e^(-{}u) with coefficient {magnitude:e}",
                    t.power, t.decay
                )));
            }
            continue;
        }
        kept.push(t.clone());
    }
    Ok(ExpPoly::from_terms(kept))
}

/// Survival under sliding-window selection (`w = 2`) with independent
/// windows: `(1 − (1 − e^{−2u})^M)·S_w(u)^{L−2}`.
pub fn survival_sliding<C: Coefficient>(m: usize, l: usize) -> Result<ExpPoly<C>> {
    check_shape(m, l)?;
    let joined = best_of_survival::<C>(m, 2)?;
    if l == 2 {
        return Ok(joined);
    }
    joined.try_mul(&survival_window::<C>(m)?.try_pow(int(l - 2)?)?)
}
