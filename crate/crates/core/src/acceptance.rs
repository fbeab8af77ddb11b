//! The acceptance suite: ten numbered checks, each reporting a measured
//! value, the tolerance it was held to, and its wall time against a budget.
//! `Level::Quick` halves the size caps and divides Monte-Carlo reps by ten.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;

use crate::catalan::{catalan, ln_catalan, split_probability_f64};
use crate::distribution::{
    exact_tables_upto, logfloat_tables_upto, mean_variance, ratio_limit_estimate, tail_probability, Caps, Side,
    Table, TailProbability,
};
use crate::enumeration::{brute_distribution, enumerate_avoiders};
use crate::error::{Error, Result};
use crate::permutation::{PatternId, StatisticId};
use crate::rate::{ldp_slope_exact, lft_numeric, rate_closed_form, relative_entropy_form, scaled_cumulant};
use crate::sampler::{chi_square_p_value, estimate_tail, sample_many, sample_variance_check, SamplerConfig};
use crate::series::{expand_g, Family, UPoly};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Quick,
    Full,
}

impl Level {
    fn n(self, full: usize) -> usize {
        match self {
            Level::Quick => full / 2,
            Level::Full => full,
        }
    }

    fn reps(self, full: usize) -> usize {
        match self {
            Level::Quick => full / 10,
            Level::Full => full,
        }
    }
}

impl FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quick" => Ok(Level::Quick),
            "full" => Ok(Level::Full),
            _ => Err(Error::Parse(format!("unknown level {s:?} (expected quick or full)"))),
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::Quick => "quick",
            Level::Full => "full",
        })
    }
}

pub const CRITERIA: [(u8, &str, u64); 10] = [
    (1, "counting", 30),
    (2, "oracle-equivalence", 120),
    (3, "generating-function-identity", 60),
    (4, "exact-mean", 60),
    (5, "scaled-cumulant-limits", 300),
    (6, "legendre-fenchel", 1),
    (7, "ldp-slopes", 600),
    (8, "endpoint-identity", 30),
    (9, "sampler-correctness", 300),
    (10, "mean-variance-asymptotics", 300),
];

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub measured: String,
    pub tolerance: String,
    pub seconds: f64,
    pub budget_seconds: u64,
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] criterion {:>2} {:<28} measured: {}; tolerance: {}; {:.2}s of {}s",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.measured,
            self.tolerance,
            self.seconds,
            self.budget_seconds
        )
    }
}

struct Outcome {
    ok: bool,
    measured: String,
    tolerance: String,
}

fn outcome(ok: bool, measured: impl Into<String>, tolerance: impl Into<String>) -> Outcome {
    Outcome {
        ok,
        measured: measured.into(),
        tolerance: tolerance.into(),
    }
}

pub fn run_criterion(id: u8, level: Level) -> Result<CriterionResult> {
    let &(id, name, budget) = CRITERIA
        .iter()
        .find(|c| c.0 == id)
        .ok_or_else(|| Error::InvalidArgument(format!("no acceptance criterion {id}")))?;
    let start = Instant::now();
    let out = match id {
        1 => counting(level),
        2 => oracle_equivalence(level),
        3 => gf_identity(level),
        4 => exact_mean(level),
        5 => cumulant_limits(level),
        6 => legendre_fenchel(),
        7 => ldp_slopes(level),
        8 => endpoint_identity(level),
        9 => sampler_correctness(level),
        _ => mean_variance_mc(level),
    }
    .unwrap_or_else(|e| outcome(false, format!("error: {e}"), "-"));
    let elapsed = start.elapsed();
    Ok(CriterionResult {
        id,
        name,
        passed: out.ok && elapsed <= Duration::from_secs(budget),
        measured: out.measured,
        tolerance: out.tolerance,
        seconds: elapsed.as_secs_f64(),
        budget_seconds: budget,
    })
}

pub fn run_all(level: Level) -> Vec<CriterionResult> {
    CRITERIA
        .iter()
        .map(|&(id, ..)| run_criterion(id, level).expect("known id"))
        .collect()
}

fn counting(level: Level) -> Result<Outcome> {
    let max_n = level.n(10);
    for pat in PatternId::ALL {
        for n in 0..=max_n {
            let got = enumerate_avoiders(n, pat)?.count();
            if BigUint::from(got) != catalan(n) {
                return Ok(outcome(false, format!("|av_{n}({pat})| = {got}"), "exact"));
            }
        }
    }
    Ok(outcome(true, format!("six classes equal C_n for n <= {max_n}"), "exact"))
}

fn oracle_equivalence(level: Level) -> Result<Outcome> {
    let max_n = level.n(10);
    let caps = Caps::default();
    let alt_pm = exact_tables_upto(StatisticId::AltPm, max_n, caps)?;
    let lis = exact_tables_upto(StatisticId::Lis, max_n, caps)?;
    for n in 0..=max_n {
        let checks = [
            ("alt_pm recurrence vs av(231)", alt_pm[n].dense() == brute_distribution(n, PatternId::P231, StatisticId::AltPm)?.dense()),
            ("lis recurrence vs av(231)", lis[n].dense() == brute_distribution(n, PatternId::P231, StatisticId::Lis)?.dense()),
            (
                "lis av(312) vs av(231)",
                brute_distribution(n, PatternId::P312, StatisticId::Lis)?.dense() == lis[n].dense(),
            ),
            (
                "initially descending alt av(231) vs av(321)",
                brute_distribution(n, PatternId::P231, StatisticId::AltDown)?.dense()
                    == brute_distribution(n, PatternId::P321, StatisticId::AltDown)?.dense(),
            ),
        ];
        if let Some((what, _)) = checks.iter().find(|c| !c.1) {
            return Ok(outcome(false, format!("{what} differs at n = {n}"), "exact"));
        }
    }
    Ok(outcome(true, format!("4 identities hold for n <= {max_n}"), "exact"))
}

fn as_poly(t: &crate::distribution::CountTable) -> UPoly {
    UPoly::new(t.dense().iter().map(|c| BigRational::from_integer(c.clone().into())).collect())
}

fn gf_identity(level: Level) -> Result<Outcome> {
    let max_n = level.n(64);
    let u = UPoly::u();
    for (family, stat) in [(Family::Alt, StatisticId::AltPm), (Family::Inc, StatisticId::Lis)] {
        let g = expand_g(family, max_n, &u)?;
        let tables = exact_tables_upto(stat, max_n, Caps::default())?;
        for (n, t) in tables.iter().enumerate() {
            if *g.coeff(n) != as_poly(t) {
                return Ok(outcome(false, format!("{family:?} coefficient of t^{n} differs"), "exact"));
            }
        }
    }
    Ok(outcome(true, format!("both families agree for n <= {max_n}"), "exact"))
}

fn exact_mean(level: Level) -> Result<Outcome> {
    let max_n = level.n(128);
    for t in exact_tables_upto(StatisticId::Lis, max_n, Caps::default())?.iter().skip(1) {
        let n = t.n;
        let expected = BigRational::new((n as u64 + 1).into(), 2u64.into());
        let got = mean_variance(t).mean;
        if got != expected {
            return Ok(outcome(false, format!("E L_{n} = {got}"), "exact"));
        }
    }
    Ok(outcome(true, format!("E L_n = (n+1)/2 for 1 <= n <= {max_n}"), "exact"))
}

const LAMBDAS: [f64; 5] = [-2.0, -1.0, 0.5, 1.0, 2.0];

fn cumulant_limits(level: Level) -> Result<Outcome> {
    let n = level.n(512);
    let mut worst = 0.0f64;
    for (stat, family) in [(StatisticId::AltPm, Family::Alt), (StatisticId::Lis, Family::Inc)] {
        for lambda in LAMBDAS {
            let est = ratio_limit_estimate(stat, lambda, n)?;
            let target = 4f64.ln() + scaled_cumulant(family, lambda);
            worst = worst.max((est - target).abs());
        }
    }
    Ok(outcome(worst <= 0.01, format!("max |error| = {worst:.5} at n = {n}"), "0.01"))
}

fn legendre_fenchel() -> Result<Outcome> {
    let (mut lft, mut entropy) = (0.0f64, 0.0f64);
    for i in 1..=9 {
        let x = i as f64 / 10.0;
        for family in [Family::Alt, Family::Inc] {
            let closed = rate_closed_form(family, x)?;
            let r = lft_numeric(family, x)?;
            lft = lft.max((r.value - closed).abs()).max((r.search_value - closed).abs());
            entropy = entropy.max((relative_entropy_form(family, x)? - closed).abs());
        }
    }
    Ok(outcome(
        lft <= 1e-9 && entropy <= 1e-12,
        format!("lft {lft:.2e}, relative entropy {entropy:.2e}"),
        "1e-9, 1e-12",
    ))
}

fn ldp_slopes(level: Level) -> Result<Outcome> {
    // the shrinkage grid is fixed; quick mode drops the sizes above its cap
    let cap = level.n(512);
    let sizes: Vec<usize> = [128, 256, 512].into_iter().filter(|&n| n <= cap).collect();
    let top = *sizes.last().unwrap();
    let caps = Caps::default();
    let checks = [(0.7, Side::Ge), (0.3, Side::Le)];
    let mut worst = 0.0f64;
    let mut monotone = true;
    for stat in [StatisticId::AltPm, StatisticId::Lis] {
        let tables = logfloat_tables_upto(stat, top, caps)?;
        for (x, side) in checks {
            let gaps: Vec<f64> = sizes
                .iter()
                .map(|&n| ldp_slope_exact(&Table::LogFloat(tables[n].clone()), x, side).map(|r| r.gap))
                .collect::<Result<_>>()?;
            worst = worst.max(*gaps.last().unwrap());
            monotone &= gaps.windows(2).all(|w| w[1] < w[0]);
        }
    }
    Ok(outcome(
        worst <= 0.05 && monotone,
        format!(
            "max gap {worst:.4} at n = {top}; gaps {} across n = {sizes:?}",
            if monotone { "shrink" } else { "do not shrink" }
        ),
        "0.05, strictly shrinking",
    ))
}

fn endpoint_identity(level: Level) -> Result<Outcome> {
    let max_n = level.n(128);
    for t in exact_tables_upto(StatisticId::Lis, max_n, Caps::default())?.into_iter().skip(1) {
        let n = t.n;
        let expected = BigRational::new(BigUint::one().into(), catalan(n).into());
        match tail_probability(&Table::Exact(t), 1.0, Side::Ge)? {
            TailProbability::Exact(p) if p == expected => {}
            other => return Ok(outcome(false, format!("P(L_{n} >= {n}) = {other:?}"), "exact")),
        }
    }
    let big = level.n(2048);
    let gap = (ln_catalan(big) / big as f64 - 4f64.ln()).abs();
    Ok(outcome(
        gap <= 0.02,
        format!("exact for n <= {max_n}; |(1/n) ln C_n - ln 4| = {gap:.5} at n = {big}"),
        "exact, 0.02",
    ))
}

fn sampler_correctness(level: Level) -> Result<Outcome> {
    let alpha = 1e-3;
    let mut worst_p = 1.0f64;
    let max_n = level.n(6);
    for (k, pat) in [PatternId::P231, PatternId::P132, PatternId::P213, PatternId::P312].into_iter().enumerate() {
        for n in 2..=max_n {
            let class: Vec<Vec<u32>> = enumerate_avoiders(n, pat)?.to_vec().into_iter().map(|p| p.into_values()).collect();
            let reps = level.reps(1000 * class.len()).max(50 * class.len());
            let seed = 0xACCE_0000 + 16 * k as u64 + n as u64;
            let mut obs = vec![0u64; class.len()];
            for s in sample_many(&SamplerConfig::new(pat, n, seed, reps))? {
                match class.binary_search_by(|c| c.as_slice().cmp(s.values())) {
                    Ok(i) => obs[i] += 1,
                    Err(_) => return Ok(outcome(false, format!("{pat} sample {s} is outside the class"), "-")),
                }
            }
            worst_p = worst_p.min(chi_square_p_value(&obs, &vec![1.0 / class.len() as f64; class.len()])?);
        }
    }

    let reps = level.reps(200_000);
    let mut split = vec![0u64; 10];
    for s in sample_many(&SamplerConfig::new(PatternId::P231, 10, 0x5B17, reps))? {
        split[s.values().iter().position(|&v| v == 10).unwrap()] += 1;
    }
    let probs: Vec<f64> = (1..=10).map(|j| split_probability_f64(j, 10)).collect::<Result<_>>()?;
    let split_p = chi_square_p_value(&split, &probs)?;

    let n = level.n(64);
    let cfg = SamplerConfig::new(PatternId::P231, n, 0x7A11, level.reps(100_000));
    let est = estimate_tail(&cfg, StatisticId::AltPm, 0.6, Side::Ge)?;
    let table = Table::Exact(exact_tables_upto(StatisticId::AltPm, n, Caps::default())?.pop().unwrap());
    let exact = tail_probability(&table, 0.6, Side::Ge)?.to_f64();
    let z = (est.p_hat - exact).abs() / (exact * (1.0 - exact) / cfg.reps as f64).sqrt();

    Ok(outcome(
        worst_p > alpha && split_p > alpha && z <= 4.0,
        format!("min uniformity p = {worst_p:.4}, split-law p = {split_p:.4}, tail z = {z:.2} at n = {n}"),
        "p > 1e-3, |z| <= 4",
    ))
}

fn mean_variance_mc(level: Level) -> Result<Outcome> {
    let n = level.n(400);
    let cfg = SamplerConfig::new(PatternId::P231, n, 0x3EA7, level.reps(100_000));
    let m = sample_variance_check(&cfg, StatisticId::Alt)?;
    let (mean, var) = (m.mean / n as f64, m.variance / n as f64);
    Ok(outcome(
        (0.48..=0.52).contains(&mean) && (0.2..=0.3).contains(&var),
        format!("mean/n = {mean:.4}, variance/n = {var:.4} at n = {n}"),
        "[0.48, 0.52], [0.2, 0.3]",
    ))
}

pub fn all_passed(results: &[CriterionResult]) -> bool {
    results.iter().all(|r| r.passed)
}
