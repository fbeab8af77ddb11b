//! Scaled cumulant limits, closed-form rate functions, the numeric
//! Legendre-Fenchel transform and finite-n slope comparisons.
//!
//! ```text
//! Lambda_alt(l) = ln(e^l + 1) - ln 2        I_alt(x) = x ln x + (1-x) ln(1-x) + ln 2
//! Lambda_inc(l) = 2 ln(e^{l/2} + 1) - ln 4  I_inc(x) = 2 I_alt(x),  I_inc(1) = ln 4
//! ```

use std::f64::consts::LN_2;

use serde::{Serialize, Serializer};

use crate::distribution::{tail_probability, Side, Table};
use crate::error::{invalid, Error, Result};
use crate::permutation::StatisticId;
pub use crate::series::Family;

/// Lower and upper ends of the golden-section bracket.
pub const LAMBDA_BRACKET: (f64, f64) = (-40.0, 40.0);
pub const GOLDEN_ITERATIONS: usize = 200;
/// Required agreement between the stationary-point and search values.
pub const LFT_AGREEMENT: f64 = 1e-9;

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn xlogx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// `lim (1/n) ln M_n(lambda)` for the family.
pub fn scaled_cumulant(family: Family, lambda: f64) -> f64 {
    match family {
        Family::Alt => softplus(lambda) - LN_2,
        Family::Inc => 2.0 * softplus(lambda / 2.0) - 2.0 * LN_2,
    }
}

fn check_unit(x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return invalid(format!("x = {x} must lie in [0, 1]"));
    }
    Ok(())
}

/// `x ln x + (1-x) ln(1-x) + ln 2`, extended continuously by `ln 2` at the
/// endpoints.
pub fn i_alt(x: f64) -> Result<f64> {
    check_unit(x)?;
    Ok(xlogx(x) + xlogx(1.0 - x) + LN_2)
}

/// `2 I_alt(x)` on `(0, 1)`, `ln 4` at `x = 1`.
pub fn i_inc(x: f64) -> Result<f64> {
    check_unit(x)?;
    if x == 1.0 {
        return Ok(4f64.ln());
    }
    Ok(2.0 * i_alt(x)?)
}

pub fn rate_closed_form(family: Family, x: f64) -> Result<f64> {
    match family {
        Family::Alt => i_alt(x),
        Family::Inc => i_inc(x),
    }
}

/// Where `d/dl (l x - Lambda(l))` vanishes: `ln(x/(1-x))` for alt and twice
/// that for inc.
pub fn stationary_lambda(family: Family, x: f64) -> f64 {
    let logit = x.ln() - (1.0 - x).ln();
    match family {
        Family::Alt => logit,
        Family::Inc => 2.0 * logit,
    }
}

/// Result of the numeric Legendre-Fenchel transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LftResult {
    /// `sup_l (l x - Lambda(l))` evaluated at the stationary point.
    pub value: f64,
    pub lambda_star: f64,
    /// The same supremum found by golden-section search.
    pub search_value: f64,
    pub search_lambda: f64,
}

fn golden_section_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64, iterations: usize) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iterations {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// `sup_l (l x - Lambda(l))` two ways: at the closed-form stationary point,
/// and by golden-section search over [`LAMBDA_BRACKET`]. The two must agree
/// to [`LFT_AGREEMENT`].
pub fn lft_numeric(family: Family, x: f64) -> Result<LftResult> {
    if !(x > 0.0 && x < 1.0) {
        return invalid(format!("x = {x} must lie in (0, 1)"));
    }
    let objective = |l: f64| l * x - scaled_cumulant(family, l);
    let (lo, hi) = LAMBDA_BRACKET;
    let lambda_star = stationary_lambda(family, x);
    if !(lo..=hi).contains(&lambda_star) {
        let edge = lambda_star.clamp(lo, hi);
        return Err(Error::Saturated {
            lambda: edge,
            boundary_value: objective(edge),
        });
    }
    let search_lambda = golden_section_max(objective, lo, hi, GOLDEN_ITERATIONS);
    let result = LftResult {
        value: objective(lambda_star),
        lambda_star,
        search_value: objective(search_lambda),
        search_lambda,
    };
    if (result.value - result.search_value).abs() > LFT_AGREEMENT {
        return Err(Error::Internal(format!(
            "Legendre-Fenchel paths disagree at x = {x}: {} vs {}",
            result.value, result.search_value
        )));
    }
    Ok(result)
}

/// Relative entropy of the tilted law against the centred one:
///
/// * alt: `H(Bernoulli(x) | Bernoulli(1/2))`
/// * inc: `H(nu_x | nu_{1/2})` with `nu_p` the law of the mean of two
///   independent Bernoulli(p), supported on `{0, 1/2, 1}`.
pub fn relative_entropy_form(family: Family, x: f64) -> Result<f64> {
    check_unit(x)?;
    let kl = |p: &[f64], q: &[f64]| -> f64 {
        p.iter()
            .zip(q)
            .map(|(&a, &b)| if a == 0.0 { 0.0 } else { a * (a / b).ln() })
            .sum()
    };
    Ok(match family {
        Family::Alt => kl(&[1.0 - x, x], &[0.5, 0.5]),
        Family::Inc => kl(
            &[(1.0 - x) * (1.0 - x), 2.0 * x * (1.0 - x), x * x],
            &[0.25, 0.5, 0.25],
        ),
    })
}

pub fn family_of(stat: StatisticId) -> Family {
    match stat {
        StatisticId::Alt | StatisticId::AltPm | StatisticId::AltDown => Family::Alt,
        StatisticId::Lis => Family::Inc,
    }
}

fn serialize_extended<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

/// Finite-n slope `-(1/n) ln P(tail)` against the closed-form rate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LdpReport {
    pub family: Family,
    pub statistic: StatisticId,
    pub x: f64,
    pub n: usize,
    pub side: Side,
    #[serde(serialize_with = "serialize_extended")]
    pub exact_slope: f64,
    pub closed_form: f64,
    #[serde(serialize_with = "serialize_extended")]
    pub gap: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

pub fn ldp_slope_exact(table: &Table, x: f64, side: Side) -> Result<LdpReport> {
    let stat = table.statistic();
    let family = family_of(stat);
    let n = table.n();
    if n == 0 {
        return invalid("ldp_slope_exact requires n >= 1");
    }
    let endpoint = x == 1.0 && stat == StatisticId::Lis && side == Side::Ge;
    if !(x > 0.0 && x < 1.0) && !endpoint {
        return invalid(format!(
            "x = {x} must lie in (0, 1); x = 1 is allowed only for the LIS upper tail with side ge"
        ));
    }
    let closed_form = rate_closed_form(family, x)?;
    let tail = tail_probability(table, x, side)?;
    let ln_p = tail.ln();
    let (exact_slope, diagnostic) = if ln_p == f64::NEG_INFINITY {
        (
            f64::INFINITY,
            Some(format!("empty tail: no value is {side} {}", n as f64 * x)),
        )
    } else {
        (-ln_p / n as f64, None)
    };
    Ok(LdpReport {
        family,
        statistic: stat,
        x,
        n,
        side,
        exact_slope,
        closed_form,
        gap: (exact_slope - closed_form).abs(),
        diagnostic,
    })
}

/// `(1/n) ln #{sigma : stat(sigma) >= (1 - eps) n}`.
pub fn counting_exponent(table: &Table, eps: f64) -> Result<f64> {
    let n = table.n();
    let tail = tail_probability(table, 1.0 - eps, Side::Ge)?.ln();
    Ok((tail + crate::catalan::ln_catalan(n)) / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::{alt_pm_counts, lis_counts, Mode};

    const LN4: f64 = 1.386_294_361_119_890_6;

    fn grid() -> Vec<f64> {
        (1..100).map(|i| i as f64 / 100.0).collect()
    }

    // Independent check of the closed forms: evaluate
    // sup_l (l x - Lambda(l)) by brute grid search with local refinement.
    fn brute_sup(family: Family, x: f64) -> f64 {
        let f = |l: f64| l * x - scaled_cumulant(family, l);
        let mut best = (f64::NEG_INFINITY, 0.0);
        let mut l = -30.0;
        while l <= 30.0 {
            if f(l) > best.0 {
                best = (f(l), l);
            }
            l += 1e-3;
        }
        let (mut lo, mut hi) = (best.1 - 1e-3, best.1 + 1e-3);
        for _ in 0..100 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if f(m1) < f(m2) {
                lo = m1;
            } else {
                hi = m2;
            }
        }
        f(0.5 * (lo + hi))
    }

    #[test]
    fn cumulants_vanish_at_zero() {
        assert_eq!(scaled_cumulant(Family::Alt, 0.0), 0.0);
        assert!(scaled_cumulant(Family::Inc, 0.0).abs() < 1e-15);
        assert!((scaled_cumulant(Family::Alt, 800.0) - (800.0 - LN_2)).abs() < 1e-9);
    }

    #[test]
    fn closed_form_values() {
        assert!(i_alt(0.5).unwrap().abs() < 1e-16);
        assert!((i_alt(0.75).unwrap() - 0.130_812).abs() < 1e-6);
        assert!((i_inc(0.75).unwrap() - 0.261_624).abs() < 1e-6);
        assert_eq!(i_inc(1.0).unwrap(), LN4);
        assert!(i_inc(0.5).unwrap().abs() < 1e-16);
        assert_eq!(i_alt(0.0).unwrap(), LN_2);
        assert_eq!(i_alt(1.0).unwrap(), LN_2);
        assert!(i_alt(-0.1).is_err());
        assert!(i_inc(1.1).is_err());
        for x in grid() {
            assert!((i_alt(x).unwrap() - i_alt(1.0 - x).unwrap()).abs() < 1e-15);
            assert!((i_inc(x).unwrap() - 2.0 * i_alt(x).unwrap()).abs() < 1e-12);
            assert!((i_alt(x).unwrap() - brute_sup(Family::Alt, x)).abs() < 1e-9, "x={x}");
            assert!((i_inc(x).unwrap() - brute_sup(Family::Inc, x)).abs() < 1e-9, "x={x}");
        }
    }

    #[test]
    fn rate_functions_are_convex_with_unique_zero() {
        for family in [Family::Alt, Family::Inc] {
            let g: Vec<f64> = (0..=1000).map(|i| i as f64 / 1000.0).collect();
            let v: Vec<f64> = g.iter().map(|&x| rate_closed_form(family, x).unwrap()).collect();
            for w in v.windows(3) {
                assert!(w[0] - 2.0 * w[1] + w[2] >= -1e-10);
            }
            let (argmin, _) = v
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(b.1))
                .unwrap();
            assert_eq!(argmin, 500);
            assert!(v.iter().all(|&y| y >= 0.0));
        }
        assert!((i_alt(1e-12).unwrap() - LN_2).abs() < 1e-9);
        assert!((i_inc(1.0 - 1e-12).unwrap() - LN4).abs() < 1e-9);
    }

    #[test]
    fn legendre_fenchel() {
        let r = lft_numeric(Family::Alt, 0.5).unwrap();
        assert!(r.value.abs() < 1e-15 && r.lambda_star.abs() < 1e-15);
        let r = lft_numeric(Family::Inc, 0.75).unwrap();
        assert!((r.lambda_star - 2.0 * 3f64.ln()).abs() < 1e-12);
        assert!((r.lambda_star - 2.197_22).abs() < 1e-5);
        for i in 1..=9 {
            let x = i as f64 / 10.0;
            for family in [Family::Alt, Family::Inc] {
                let r = lft_numeric(family, x).unwrap();
                let closed = rate_closed_form(family, x).unwrap();
                assert!((r.value - closed).abs() < 1e-9);
                assert!((r.search_value - closed).abs() < 1e-9);
                assert!((r.search_lambda - r.lambda_star).abs() < 1e-6);
            }
        }
        assert!(lft_numeric(Family::Alt, 0.0).is_err());
        assert!(lft_numeric(Family::Alt, 1.0).is_err());
        match lft_numeric(Family::Inc, 1e-12) {
            Err(Error::Saturated { lambda, boundary_value }) => {
                assert_eq!(lambda, -40.0);
                assert!(boundary_value < LN4);
            }
            other => panic!("expected saturation, got {other:?}"),
        }
    }

    #[test]
    fn relative_entropy() {
        assert!(relative_entropy_form(Family::Alt, 0.5).unwrap().abs() < 1e-16);
        for x in grid() {
            let a = relative_entropy_form(Family::Alt, x).unwrap();
            let i = relative_entropy_form(Family::Inc, x).unwrap();
            assert!((a - i_alt(x).unwrap()).abs() < 1e-12);
            assert!((i - i_inc(x).unwrap()).abs() < 1e-12);
        }
        let v = relative_entropy_form(Family::Inc, 0.75).unwrap();
        assert!((v - i_inc(0.75).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn slope_at_the_lis_endpoint() {
        let t = lis_counts(6, Mode::Exact).unwrap();
        let r = ldp_slope_exact(&t, 1.0, Side::Ge).unwrap();
        assert!((r.exact_slope - 132f64.ln() / 6.0).abs() < 1e-12);
        assert_eq!(r.closed_form, LN4);
        assert!(ldp_slope_exact(&t, 1.0, Side::Gt).is_err());
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["family"], "inc");
        assert_eq!(json["side"], "ge");
    }

    #[test]
    fn empty_tail_is_flagged() {
        let t = alt_pm_counts(4, Mode::Exact).unwrap();
        // A^{+,-} <= 3 < 0.9 * 4
        let r = ldp_slope_exact(&t, 0.9, Side::Ge).unwrap();
        assert_eq!(r.exact_slope, f64::INFINITY);
        assert!(r.diagnostic.is_some());
        assert_eq!(serde_json::to_value(&r).unwrap()["exact_slope"], "inf");
    }

    #[test]
    fn slopes_at_moderate_n() {
        let t = alt_pm_counts(512, Mode::LogFloat).unwrap();
        let up = ldp_slope_exact(&t, 0.7, Side::Ge).unwrap();
        let down = ldp_slope_exact(&t, 0.3, Side::Le).unwrap();
        assert!(up.gap <= 0.05, "{up:?}");
        assert!(down.gap <= 0.05, "{down:?}");
        assert!((up.closed_form - down.closed_form).abs() < 1e-12);
    }

    #[test]
    fn counting_corollary() {
        let t = alt_pm_counts(256, Mode::Exact).unwrap();
        let v = counting_exponent(&t, 0.05).unwrap();
        let limit = LN4 - i_alt(0.95).unwrap();
        assert!((v - limit).abs() < 0.1, "{v} vs {limit}");
        let small = [1e-2, 1e-4, 1e-8].map(|e| LN4 - i_alt(1.0 - e).unwrap());
        assert!(small.windows(2).all(|w| (w[1] - LN_2).abs() < (w[0] - LN_2).abs()));
        assert!((small[2] - LN_2).abs() < 1e-6);
    }
}
