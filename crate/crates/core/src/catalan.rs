//! Catalan numbers: exact values, logarithms, the asymptotic law and the law
//! of the position of the maximum in a uniform 231-avoider.

use std::f64::consts::PI;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use once_cell::sync::Lazy;
use parking_lot::RwLock;

use crate::error::{invalid, Result};

/// Beyond this index `ln_catalan` switches from exact values to log-gamma.
pub const EXACT_LOG_LIMIT: usize = 8192;

/// Memoized exact Catalan numbers and their natural logarithms.
#[derive(Debug)]
pub struct CatalanCache {
    exact: Vec<BigUint>,
    logs: Vec<f64>,
}

impl Default for CatalanCache {
    fn default() -> Self {
        Self::new()
    }
}

impl CatalanCache {
    pub fn new() -> Self {
        CatalanCache {
            exact: vec![BigUint::one()],
            logs: vec![0.0],
        }
    }

    pub fn len(&self) -> usize {
        self.exact.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Extends the cache through index `n` using
    /// `C_{k+1} = C_k * 2(2k+1) / (k+2)`, which divides exactly.
    pub fn grow_to(&mut self, n: usize) {
        while self.exact.len() <= n {
            let k = self.exact.len() - 1;
            let next = &self.exact[k] * BigUint::from(2 * (2 * k as u64 + 1)) / BigUint::from(k as u64 + 2);
            self.logs.push(ln_biguint(&next));
            self.exact.push(next);
        }
    }

    pub fn get(&self, n: usize) -> Option<&BigUint> {
        self.exact.get(n)
    }

    pub fn ln(&self, n: usize) -> Option<f64> {
        self.logs.get(n).copied()
    }
}

static CACHE: Lazy<RwLock<CatalanCache>> = Lazy::new(|| RwLock::new(CatalanCache::new()));

fn ensure(n: usize) {
    if CACHE.read().len() > n {
        return;
    }
    CACHE.write().grow_to(n);
}

/// The exact Catalan number `C_n`.
pub fn catalan(n: usize) -> BigUint {
    ensure(n);
    CACHE.read().exact[n].clone()
}

/// `C_0..=C_n` in one read.
pub fn catalan_table(n: usize) -> Vec<BigUint> {
    ensure(n);
    CACHE.read().exact[..=n].to_vec()
}

/// `ln C_n`, from the exact value up to [`EXACT_LOG_LIMIT`], log-gamma beyond.
pub fn ln_catalan(n: usize) -> f64 {
    if n <= EXACT_LOG_LIMIT {
        ensure(n);
        CACHE.read().logs[n]
    } else {
        ln_catalan_gamma(n)
    }
}

/// `ln C_n = lnΓ(2n+1) - 2 lnΓ(n+1) - ln(n+1)`.
pub fn ln_catalan_gamma(n: usize) -> f64 {
    let x = n as f64;
    libm::lgamma(2.0 * x + 1.0) - 2.0 * libm::lgamma(x + 1.0) - (x + 1.0).ln()
}

/// Natural logarithm of a big unsigned integer, accurate to double precision.
pub fn ln_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().map(f64::ln).unwrap_or(f64::NEG_INFINITY);
    }
    let shift = bits - 64;
    let top: BigUint = x >> shift;
    top.to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

/// The asymptotic law `4^n / (sqrt(pi) n^{3/2})`, carried in both log and
/// linear form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatalanAsymptotic {
    pub ln_value: f64,
    /// `None` when the value overflows a double.
    pub value: Option<f64>,
}

pub fn catalan_asymptotic(n: usize) -> Result<CatalanAsymptotic> {
    if n == 0 {
        return invalid("catalan_asymptotic requires n >= 1");
    }
    let x = n as f64;
    let ln_value = x * 4f64.ln() - 0.5 * PI.ln() - 1.5 * x.ln();
    let linear = ln_value.exp();
    Ok(CatalanAsymptotic {
        ln_value,
        value: linear.is_finite().then_some(linear),
    })
}

/// `P(sigma_j = n) = C_{j-1} C_{n-j} / C_n` for a uniform 231-avoider of
/// length `n`.
pub fn split_probability(j: usize, n: usize) -> Result<BigRational> {
    if j == 0 || j > n {
        return invalid(format!("split position j = {j} must lie in 1..={n}"));
    }
    let c = catalan_table(n);
    let num = &c[j - 1] * &c[n - j];
    Ok(BigRational::new(num.into(), c[n].clone().into()))
}

pub fn split_probability_f64(j: usize, n: usize) -> Result<f64> {
    if j == 0 || j > n {
        return invalid(format!("split position j = {j} must lie in 1..={n}"));
    }
    Ok((ln_catalan(j - 1) + ln_catalan(n - j) - ln_catalan(n)).exp())
}
