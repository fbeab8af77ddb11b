//! End-to-end checks that chain several modules together.

use avoider_core::catalan::{catalan, ln_catalan};
use avoider_core::distribution::{
    alt_pm_counts, counts, lis_counts, ln_mgf, tail_probability, Caps, CountTable, Mode, Side, Table,
};
use avoider_core::enumeration::brute_distribution;
use avoider_core::permutation::{PatternId, StatisticId};
use avoider_core::rate::{ldp_slope_exact, rate_closed_form, scaled_cumulant, Family};
use avoider_core::sampler::{chi_square_p_value, statistic_histogram, SamplerConfig};
use avoider_core::series::expand_g;
use num_traits::ToPrimitive;
use proptest::prelude::*;

#[test]
fn generating_function_evaluates_the_mgf() {
    // [t^n] G(e^l, t) = C_n M_n(l)
    for (family, stat) in [(Family::Alt, StatisticId::AltPm), (Family::Inc, StatisticId::Lis)] {
        for lambda in [-1.5, 0.3, 2.0] {
            let g = expand_g(family, 60, &f64::exp(lambda)).unwrap();
            for n in [10, 30, 60] {
                let t = counts(stat, n, Mode::Exact, Caps::default()).unwrap();
                let lhs = g.coeff(n).ln();
                let rhs = ln_mgf(&t, lambda).unwrap() + ln_catalan(n);
                assert!((lhs - rhs).abs() < 1e-9, "{family:?} l={lambda} n={n}");
            }
        }
    }
}

#[test]
fn exact_and_logfloat_tables_agree_through_json() {
    let exact = alt_pm_counts(150, Mode::Exact).unwrap();
    let Table::Exact(ct) = &exact else { panic!() };
    let back = CountTable::from_json(&ct.to_json()).unwrap();
    assert_eq!(&back, ct);
    let back = CountTable::from_csv(150, StatisticId::AltPm, PatternId::P231, &ct.to_csv()).unwrap();
    assert_eq!(&back, ct);
    let float = alt_pm_counts(150, Mode::LogFloat).unwrap();
    for (x, side) in [(0.6, Side::Ge), (0.4, Side::Lt)] {
        let a = tail_probability(&exact, x, side).unwrap().ln();
        let b = tail_probability(&float, x, side).unwrap().ln();
        assert!((a - b).abs() < 1e-9);
    }
}

#[test]
fn sampler_reproduces_the_exact_laws() {
    for stat in [StatisticId::AltPm, StatisticId::Lis] {
        let table = counts(stat, 12, Mode::Exact, Caps::default()).unwrap();
        let Table::Exact(t) = table else { panic!() };
        let total = t.total().to_f64().unwrap();
        let probs: Vec<f64> = (0..=12).map(|k| t.get(k).to_f64().unwrap() / total).collect();
        for pattern in [PatternId::P231, PatternId::P312] {
            if stat == StatisticId::AltPm && pattern != PatternId::P231 {
                continue;
            }
            let hist = statistic_histogram(&SamplerConfig::new(pattern, 12, 31, 60_000), stat).unwrap();
            assert!(chi_square_p_value(&hist, &probs).unwrap() > 1e-3, "{stat} {pattern}");
        }
    }
}

#[test]
fn slopes_approach_the_rate_function() {
    let mut prev = f64::INFINITY;
    for n in [128, 256, 512] {
        let t = lis_counts(n, Mode::LogFloat).unwrap();
        let r = ldp_slope_exact(&t, 0.7, Side::Ge).unwrap();
        assert!(r.gap < prev);
        prev = r.gap;
    }
    assert!(prev < 0.05);
    assert_eq!(rate_closed_form(Family::Inc, 0.7).unwrap(), 2.0 * rate_closed_form(Family::Alt, 0.7).unwrap());
}

#[test]
fn mgf_limit_is_the_scaled_cumulant() {
    let t = lis_counts(1024, Mode::LogFloat).unwrap();
    for lambda in [-1.0, 1.0] {
        let v = ln_mgf(&t, lambda).unwrap() / 1024.0;
        assert!((v - scaled_cumulant(Family::Inc, lambda)).abs() < 0.01);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn brute_tables_are_normalized(n in 0usize..=8, p in 0usize..6, s in 0usize..4) {
        let stat = [StatisticId::Alt, StatisticId::AltPm, StatisticId::Lis, StatisticId::AltDown][s];
        let t = brute_distribution(n, PatternId::ALL[p], stat).unwrap();
        prop_assert_eq!(t.total(), catalan(n));
    }

    #[test]
    fn complementary_tails_sum_to_one(n in 1usize..=120, x in 0.0f64..1.0) {
        let t = lis_counts(n, Mode::Exact).unwrap();
        let up = tail_probability(&t, x, Side::Ge).unwrap().to_f64();
        let down = tail_probability(&t, x, Side::Lt).unwrap().to_f64();
        prop_assert!((up + down - 1.0).abs() < 1e-12);
    }

    #[test]
    fn seeded_runs_repeat(seed in any::<u64>(), n in 1usize..40) {
        let cfg = SamplerConfig::new(PatternId::P132, n, seed, 200);
        prop_assert_eq!(
            statistic_histogram(&cfg, StatisticId::Alt).unwrap(),
            statistic_histogram(&cfg, StatisticId::Alt).unwrap()
        );
    }
}
