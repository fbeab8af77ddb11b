//! Truncated formal power series over pluggable coefficient rings, the
//! series square root, and expansion of the closed-form generating functions
//!
//! ```text
//! alt: G(t) = (1 - 2(1-u)t - sqrt(4(1-u^2)t^2 - 4t + 1)) / (2ut)
//! inc: G(t) = (1 - (u-1)t - sqrt((u-1)^2 t^2 - 2(u+1)t + 1)) / (2t)
//! ```
//!
//! with `u = e^lambda`. Over the polynomial ring in `u` the coefficient of
//! `t^n` is the count polynomial of the matching recurrence.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// A commutative coefficient ring with exact (checked) division.
pub trait Ring: Clone + PartialEq + fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn is_zero(&self) -> bool;
    fn plus(&self, other: &Self) -> Self;
    fn minus(&self, other: &Self) -> Self;
    fn times(&self, other: &Self) -> Self;
    fn negated(&self) -> Self;
    /// `self / other` when the quotient exists in the ring.
    fn checked_div(&self, other: &Self) -> Option<Self>;
}

impl Ring for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn minus(&self, other: &Self) -> Self {
        self - other
    }
    fn times(&self, other: &Self) -> Self {
        self * other
    }
    fn negated(&self) -> Self {
        -self
    }
    fn checked_div(&self, other: &Self) -> Option<Self> {
        (*other != 0.0).then(|| self / other)
    }
}

impl Ring for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn minus(&self, other: &Self) -> Self {
        self - other
    }
    fn times(&self, other: &Self) -> Self {
        self * other
    }
    fn negated(&self) -> Self {
        -self
    }
    fn checked_div(&self, other: &Self) -> Option<Self> {
        (!Zero::is_zero(other)).then(|| self / other)
    }
}

/// A polynomial in `u` with rational coefficients, lowest degree first and
/// no trailing zeros.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct UPoly(Vec<BigRational>);

impl UPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        UPoly(coeffs)
    }

    /// The indeterminate `u`.
    pub fn u() -> Self {
        UPoly::from_ints(&[0, 1])
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        UPoly::new(coeffs.iter().map(|&c| BigRational::from_i64(c)).collect())
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.0
    }

    /// Degree, with `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn coeff(&self, k: usize) -> BigRational {
        self.0.get(k).cloned().unwrap_or_else(Zero::zero)
    }

    /// Substitutes a rational value for `u`.
    pub fn eval(&self, u: &BigRational) -> BigRational {
        self.0.iter().rev().fold(Zero::zero(), |acc: BigRational, c| acc * u + c)
    }

    pub fn eval_f64(&self, u: f64) -> f64 {
        self.0
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * u + c.to_f64().unwrap_or(f64::NAN))
    }

    /// Integer coefficients, if every coefficient is an integer.
    pub fn integer_coeffs(&self) -> Option<Vec<BigInt>> {
        self.0.iter().map(|c| c.is_integer().then(|| c.to_integer())).collect()
    }

    fn long_division(&self, divisor: &UPoly) -> Option<(UPoly, UPoly)> {
        let dd = divisor.degree()?;
        let lead = &divisor.0[dd];
        let mut rem = self.0.clone();
        if rem.len() <= dd {
            return Some((UPoly::default(), self.clone()));
        }
        let mut quot = vec![<BigRational as Zero>::zero(); rem.len() - dd];
        for i in (0..quot.len()).rev() {
            let c = &rem[i + dd] / lead;
            if !Zero::is_zero(&c) {
                for (j, d) in divisor.0.iter().enumerate() {
                    rem[i + j] -= &c * d;
                }
            }
            quot[i] = c;
        }
        Some((UPoly::new(quot), UPoly::new(rem)))
    }
}

impl fmt::Debug for UPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// `c0+c1*u+c2*u^2+...`, zero terms omitted; the zero polynomial prints `0`.
impl fmt::Display for UPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.0.iter().enumerate() {
            if Zero::is_zero(c) {
                continue;
            }
            if !first {
                f.write_str("+")?;
            }
            first = false;
            match k {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}*u")?,
                _ => write!(f, "{c}*u^{k}")?,
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

impl Ring for UPoly {
    fn zero() -> Self {
        UPoly(Vec::new())
    }
    fn one() -> Self {
        UPoly::from_ints(&[1])
    }
    fn from_i64(v: i64) -> Self {
        UPoly::from_ints(&[v])
    }
    fn is_zero(&self) -> bool {
        self.0.is_empty()
    }
    fn plus(&self, other: &Self) -> Self {
        let (long, short) = if self.0.len() >= other.0.len() { (self, other) } else { (other, self) };
        let mut out = long.0.clone();
        for (o, s) in out.iter_mut().zip(&short.0) {
            *o += s;
        }
        UPoly::new(out)
    }
    fn minus(&self, other: &Self) -> Self {
        self.plus(&other.negated())
    }
    fn times(&self, other: &Self) -> Self {
        if self.0.is_empty() || other.0.is_empty() {
            return UPoly::zero();
        }
        let mut out = vec![<BigRational as Zero>::zero(); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            if Zero::is_zero(a) {
                continue;
            }
            for (j, b) in other.0.iter().enumerate() {
                if !Zero::is_zero(b) {
                    out[i + j] += a * b;
                }
            }
        }
        UPoly::new(out)
    }
    fn negated(&self) -> Self {
        UPoly(self.0.iter().map(|c| -c).collect())
    }
    fn checked_div(&self, other: &Self) -> Option<Self> {
        let (q, r) = self.long_division(other)?;
        r.0.is_empty().then_some(q)
    }
}

/// A power series `a_0 + a_1 t + ... + a_N t^N + O(t^{N+1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSeries<R: Ring> {
    coeffs: Vec<R>,
}

impl<R: Ring> PowerSeries<R> {
    /// Pads or truncates `coeffs` to order `order`.
    pub fn new(mut coeffs: Vec<R>, order: usize) -> Self {
        coeffs.resize(order + 1, R::zero());
        PowerSeries { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[R] {
        &self.coeffs
    }

    pub fn coeff(&self, n: usize) -> &R {
        &self.coeffs[n]
    }

    pub fn into_coeffs(self) -> Vec<R> {
        self.coeffs
    }

    pub fn truncate(&self, order: usize) -> Self {
        PowerSeries::new(self.coeffs[..=order.min(self.order())].to_vec(), order)
    }

    pub fn map<S: Ring>(&self, f: impl Fn(&R) -> S) -> PowerSeries<S> {
        PowerSeries {
            coeffs: self.coeffs.iter().map(f).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let order = self.order().min(other.order());
        PowerSeries::new((0..=order).map(|k| self.coeffs[k].plus(&other.coeffs[k])).collect(), order)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let order = self.order().min(other.order());
        PowerSeries::new((0..=order).map(|k| self.coeffs[k].minus(&other.coeffs[k])).collect(), order)
    }

    pub fn scale(&self, c: &R) -> Self {
        PowerSeries {
            coeffs: self.coeffs.iter().map(|a| a.times(c)).collect(),
        }
    }

    /// Divides every coefficient exactly by `c`.
    pub fn div_exact(&self, c: &R) -> Result<Self> {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, a)| {
                a.checked_div(c)
                    .ok_or_else(|| Error::Internal(format!("coefficient of t^{k} ({a:?}) is not divisible by {c:?}")))
            })
            .collect::<Result<Vec<R>>>()?;
        Ok(PowerSeries { coeffs })
    }

    /// Divides by `t`; the constant term must vanish. The order drops by one.
    pub fn div_t(&self) -> Result<Self> {
        if !self.coeffs[0].is_zero() {
            return Err(Error::Internal(format!(
                "constant term {:?} must vanish before dividing by t",
                self.coeffs[0]
            )));
        }
        if self.order() == 0 {
            return invalid("cannot divide an order-0 series by t");
        }
        Ok(PowerSeries {
            coeffs: self.coeffs[1..].to_vec(),
        })
    }
}

/// Cauchy product truncated at the smaller of the two orders.
pub fn series_mul<R: Ring>(a: &PowerSeries<R>, b: &PowerSeries<R>) -> PowerSeries<R> {
    let order = a.order().min(b.order());
    let coeffs = (0..=order)
        .map(|n| {
            (0..=n).fold(R::zero(), |acc, k| {
                if a.coeffs[k].is_zero() || b.coeffs[n - k].is_zero() {
                    acc
                } else {
                    acc.plus(&a.coeffs[k].times(&b.coeffs[n - k]))
                }
            })
        })
        .collect();
    PowerSeries { coeffs }
}

/// The unique `s` with `s^2 = p` and `s_0 = 1`:
/// `s_n = (p_n - sum_{k=1}^{n-1} s_k s_{n-k}) / 2`.
pub fn sqrt_series<R: Ring>(p: &PowerSeries<R>) -> Result<PowerSeries<R>> {
    if p.coeffs[0] != R::one() {
        return invalid(format!("sqrt_series needs constant term 1, got {:?}", p.coeffs[0]));
    }
    let two = R::from_i64(2);
    let mut s: Vec<R> = Vec::with_capacity(p.coeffs.len());
    s.push(R::one());
    for n in 1..=p.order() {
        // sum_{k=1}^{n-1} s_k s_{n-k} = 2 * sum_{k < n-k} + middle term
        let mut half = R::zero();
        let mut k = 1;
        while 2 * k < n {
            if !s[k].is_zero() && !s[n - k].is_zero() {
                half = half.plus(&s[k].times(&s[n - k]));
            }
            k += 1;
        }
        let mut cross = half.plus(&half);
        if n % 2 == 0 && n >= 2 {
            cross = cross.plus(&s[n / 2].times(&s[n / 2]));
        }
        let num = p.coeffs[n].minus(&cross);
        let next = num
            .checked_div(&two)
            .ok_or_else(|| Error::InvalidArgument("coefficient ring does not support division by 2".into()))?;
        s.push(next);
    }
    Ok(PowerSeries { coeffs: s })
}

/// The generating-function families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// `A_n^{+,-}` and the alternating rate function.
    Alt,
    /// `L_n` and the increasing rate function.
    Inc,
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alt" => Ok(Family::Alt),
            "inc" => Ok(Family::Inc),
            _ => Err(Error::Parse(format!("unknown family {s:?}"))),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Alt => "alt",
            Family::Inc => "inc",
        })
    }
}

/// The quadratic under the square root, as a polynomial in `t` with
/// coefficients in the ring, at `u`.
pub fn radicand<R: Ring>(family: Family, u: &R, order: usize) -> PowerSeries<R> {
    let one = R::one();
    let coeffs = match family {
        // 1 - 4t + 4(1-u^2)t^2
        Family::Alt => vec![
            one.clone(),
            R::from_i64(-4),
            R::from_i64(4).times(&one.minus(&u.times(u))),
        ],
        // 1 - 2(u+1)t + (u-1)^2 t^2
        Family::Inc => {
            let um1 = u.minus(&one);
            vec![one.clone(), R::from_i64(-2).times(&u.plus(&one)), um1.times(&um1)]
        }
    };
    PowerSeries::new(coeffs, order)
}

/// Coefficients `t^0..t^order` of the alternating-family generating function.
pub fn expand_g_alt<R: Ring>(order: usize, u: &R) -> Result<PowerSeries<R>> {
    let root = sqrt_series(&radicand(Family::Alt, u, order + 1))?;
    // 1 - 2(1-u)t
    let lin = PowerSeries::new(vec![R::one(), R::from_i64(-2).times(&R::one().minus(u))], order + 1);
    let numerator = lin.sub(&root);
    let two_u = R::from_i64(2).times(u);
    numerator.div_t()?.div_exact(&two_u)
}

/// Coefficients `t^0..t^order` of the increasing-family generating function.
pub fn expand_g_inc<R: Ring>(order: usize, u: &R) -> Result<PowerSeries<R>> {
    let root = sqrt_series(&radicand(Family::Inc, u, order + 1))?;
    // 1 - (u-1)t
    let lin = PowerSeries::new(vec![R::one(), u.minus(&R::one()).negated()], order + 1);
    let numerator = lin.sub(&root);
    numerator.div_t()?.div_exact(&R::from_i64(2))
}

pub fn expand_g<R: Ring>(family: Family, order: usize, u: &R) -> Result<PowerSeries<R>> {
    match family {
        Family::Alt => expand_g_alt(order, u),
        Family::Inc => expand_g_inc(order, u),
    }
}

/// Roots of the radicand at `u = e^lambda`; `r1` is the one of smaller
/// modulus and equals the radius of convergence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadraticRootPair {
    pub family: Family,
    pub lambda: f64,
    pub r1: f64,
    /// `None` at `lambda = 0`, where the quadratic degenerates to `1 - 4t`.
    pub r2: Option<f64>,
}

impl QuadraticRootPair {
    pub fn radius(&self) -> f64 {
        self.r1.abs()
    }
}

/// Roots in cancellation-free form:
///
/// * alt: `1/(2(u+1))` and `1/(2(1-u))`
/// * inc: `1/(sqrt(u)+1)^2` and `1/(sqrt(u)-1)^2`, equal to
///   `(sqrt(u) -/+ 1)^2 / (u-1)^2`.
pub fn quadratic_roots(family: Family, lambda: f64) -> Result<QuadraticRootPair> {
    if !lambda.is_finite() {
        return invalid(format!("lambda must be finite, got {lambda}"));
    }
    let u = lambda.exp();
    let (r1, r2) = match family {
        Family::Alt => (1.0 / (2.0 * (u + 1.0)), 1.0 / (2.0 * (1.0 - u))),
        Family::Inc => {
            let s = (lambda / 2.0).exp();
            (1.0 / ((s + 1.0) * (s + 1.0)), 1.0 / ((s - 1.0) * (s - 1.0)))
        }
    };
    Ok(QuadraticRootPair {
        family,
        lambda,
        r1,
        r2: (lambda != 0.0).then_some(r2),
    })
}

fn last_quartile_start(len: usize) -> Result<usize> {
    if len < 16 {
        return invalid(format!("growth_rate needs at least 16 coefficients, got {len}"));
    }
    Ok(len - len / 4 - 1)
}

fn median(mut v: Vec<f64>) -> Result<f64> {
    if v.is_empty() {
        return Err(Error::UndefinedGrowth("coefficient tail is zero".into()));
    }
    v.sort_by(|a, b| a.total_cmp(b));
    let m = v.len();
    Ok(if m % 2 == 1 { v[m / 2] } else { 0.5 * (v[m / 2 - 1] + v[m / 2]) })
}

fn ratio(coeffs: &[f64], n: usize) -> Option<f64> {
    let (prev, cur) = (coeffs[n - 1], coeffs[n]);
    (prev != 0.0 && prev.is_finite() && cur.is_finite()).then(|| (cur / prev).abs())
}

/// Median of the plain ratios `|a_n / a_{n-1}|` over the last quarter of the
/// sequence. Under a `n^{-3/2}` prefactor the ratios sit at
/// `rho (1 - 3/(2n))`, so this is biased low by about `1.5 rho / n`.
pub fn ratio_median(coeffs: &[f64]) -> Result<f64> {
    let start = last_quartile_start(coeffs.len())?;
    median((start + 1..coeffs.len()).filter_map(|n| ratio(coeffs, n)).collect())
}

/// Estimates `lim |a_n|^{1/n}` from the last quarter of the sequence.
///
/// Each ratio `r_n = |a_n / a_{n-1}|` behaves like `rho (1 - c/n + O(n^-2))`;
/// the linear extrapolation `n r_n - (n-1) r_{n-1}` removes the `1/n` term,
/// and the median of these over the window is returned. Ratios are used
/// rather than `n`-th roots because the latter carry a `(3/2) ln(n) / n`
/// bias from the polynomial prefactor.
pub fn growth_rate(coeffs: &[f64]) -> Result<f64> {
    let start = last_quartile_start(coeffs.len())?;
    let estimates: Vec<f64> = (start + 2..coeffs.len())
        .filter_map(|n| {
            let (r, rp) = (ratio(coeffs, n)?, ratio(coeffs, n - 1)?);
            Some(n as f64 * r - (n - 1) as f64 * rp)
        })
        .collect();
    median(estimates)
}

/// Coefficients of the radicand's square root at `u = e^lambda`, computed
/// for the rescaled variable `t = scale * s` so that they stay inside the
/// double range. Returns `a_n scale^n`.
pub fn scaled_sqrt_coefficients(family: Family, lambda: f64, order: usize, scale: f64) -> Result<Vec<f64>> {
    let u = lambda.exp();
    let p = radicand(family, &u, order);
    let scaled: Vec<f64> = p.coeffs().iter().enumerate().map(|(k, c)| c * scale.powi(k as i32)).collect();
    Ok(sqrt_series(&PowerSeries::new(scaled, order))?.into_coeffs())
}

/// `growth_rate` of the unscaled sequence, from scaled coefficients.
pub fn growth_rate_scaled(scaled: &[f64], scale: f64) -> Result<f64> {
    Ok(growth_rate(scaled)? / scale)
}
