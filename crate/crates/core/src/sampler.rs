//! Exact uniform sampling of 231-avoiders through the Catalan split law,
//! transported to 132, 213 and 312 by the dihedral symmetries, plus
//! seeded Monte-Carlo estimators built on top.
//!
//! In a 231-avoider the entries left of `n` are all smaller than those to
//! its right, and `n` sits at position `j` with probability
//! `C_{j-1} C_{n-j} / C_n`. Both blocks are again uniform avoiders.

use num_bigint::{BigUint, RandBigInt};
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::catalan::{catalan_table, ln_catalan};
use crate::distribution::Side;
use crate::error::{invalid, Error, Result};
use crate::permutation::{complement, reverse, reverse_complement, PatternId, Permutation, StatisticId};

/// Largest block size whose split law is drawn with exact big integers.
pub const EXACT_SPLIT_LIMIT: usize = 256;
pub const DEFAULT_SAMPLER_CAP: usize = 1 << 20;
pub const MIN_TAIL_REPS: usize = 100;
pub const MIN_MOMENT_REPS: usize = 10_000;

/// Precomputed split law for every block size up to `n`.
#[derive(Debug, Clone)]
pub struct SplitLaw {
    small: Vec<u128>,
    big: Vec<BigUint>,
    ln: Vec<f64>,
}

impl SplitLaw {
    pub fn new(n: usize) -> Self {
        let big = catalan_table(n.min(EXACT_SPLIT_LIMIT));
        let small = big.iter().map_while(|c| c.to_u128()).collect();
        let ln = (0..=n).map(ln_catalan).collect();
        SplitLaw { small, big, ln }
    }

    pub fn max_n(&self) -> usize {
        self.ln.len() - 1
    }

    /// Position (1-based) of the largest value in a uniform `m`-avoider.
    pub fn draw<R: Rng + ?Sized>(&self, m: usize, rng: &mut R) -> usize {
        debug_assert!(m >= 1 && m <= self.max_n());
        if m < self.small.len() {
            let c = &self.small;
            let mut r = rng.gen_range(0..c[m]);
            return scan(m, |j| {
                let w = c[j - 1] * c[m - j];
                if r < w {
                    true
                } else {
                    r -= w;
                    false
                }
            });
        }
        if m < self.big.len() {
            let c = &self.big;
            let mut r = rng.gen_biguint_below(&c[m]);
            return scan(m, |j| {
                let w = &c[j - 1] * &c[m - j];
                if r < w {
                    true
                } else {
                    r -= w;
                    false
                }
            });
        }
        let ln = &self.ln;
        let mut u: f64 = rng.gen();
        scan(m, |j| {
            let w = (ln[j - 1] + ln[m - j] - ln[m]).exp();
            if u < w {
                true
            } else {
                u -= w;
                false
            }
        })
    }
}

/// Visits `1, m, 2, m-1, ...` until `hit` accepts; the last candidate is
/// returned if rounding leaves residual mass.
fn scan(m: usize, mut hit: impl FnMut(usize) -> bool) -> usize {
    let (mut lo, mut hi) = (1, m);
    loop {
        if lo == hi || hit(lo) {
            return lo;
        }
        lo += 1;
        if lo == hi || hit(hi) {
            return hi;
        }
        hi -= 1;
    }
}

/// Fills `out` with a uniform 231-avoider of length `out.len()`.
pub fn sample_231_with<R: Rng + ?Sized>(law: &SplitLaw, out: &mut [u32], rng: &mut R) {
    let mut stack = vec![(0usize, out.len(), 0u32)];
    while let Some((pos, m, offset)) = stack.pop() {
        match m {
            0 => {}
            1 => out[pos] = offset + 1,
            _ => {
                let j = law.draw(m, rng);
                out[pos + j - 1] = offset + m as u32;
                stack.push((pos + j, m - j, offset + j as u32 - 1));
                stack.push((pos, j - 1, offset));
            }
        }
    }
}

pub fn sample_231<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Permutation {
    let law = SplitLaw::new(n);
    let mut out = vec![0; n];
    sample_231_with(&law, &mut out, rng);
    Permutation::from_vec_unchecked(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SamplerConfig {
    pub pattern: PatternId,
    pub n: usize,
    pub seed: u64,
    pub reps: usize,
}

impl SamplerConfig {
    pub fn new(pattern: PatternId, n: usize, seed: u64, reps: usize) -> Self {
        SamplerConfig { pattern, n, seed, reps }
    }

    pub fn validate(&self) -> Result<()> {
        check_pattern(self.pattern)?;
        if self.n == 0 {
            return invalid("sampler requires n >= 1");
        }
        if self.n > DEFAULT_SAMPLER_CAP {
            return Err(Error::ResourceLimit {
                what: "sampler",
                n: self.n,
                cap: DEFAULT_SAMPLER_CAP,
                hint: "",
            });
        }
        if self.reps == 0 {
            return invalid("reps must be >= 1");
        }
        Ok(())
    }
}

fn check_pattern(pattern: PatternId) -> Result<()> {
    match pattern {
        PatternId::P123 | PatternId::P321 => Err(Error::UnsupportedPattern(pattern.to_string())),
        _ => Ok(()),
    }
}

/// Uniform avoider of `pattern` from a 231 sample.
pub struct AvoiderSampler {
    pattern: PatternId,
    law: SplitLaw,
}

impl AvoiderSampler {
    pub fn new(pattern: PatternId, n: usize) -> Result<Self> {
        check_pattern(pattern)?;
        Ok(AvoiderSampler { pattern, law: SplitLaw::new(n) })
    }

    pub fn sample_into<R: Rng + ?Sized>(&self, out: &mut Vec<u32>, n: usize, rng: &mut R) {
        out.clear();
        out.resize(n, 0);
        sample_231_with(&self.law, out, rng);
        match self.pattern {
            PatternId::P132 => out.reverse(),
            PatternId::P213 => *out = complement(out),
            PatternId::P312 => *out = reverse_complement(out),
            _ => {}
        }
    }
}

pub fn sample_avoider<R: Rng + ?Sized>(config: &SamplerConfig, rng: &mut R) -> Result<Permutation> {
    config.validate()?;
    let mut p = sample_231(config.n, rng).into_values();
    p = match config.pattern {
        PatternId::P132 => reverse(&p),
        PatternId::P213 => complement(&p),
        PatternId::P312 => reverse_complement(&p),
        _ => p,
    };
    Ok(Permutation::from_vec_unchecked(p))
}

/// SplitMix64 output for `seed + (rep + 1) * golden`; the per-rep stream
/// is `ChaCha8Rng::seed_from_u64` of this value.
pub fn rep_seed(seed: u64, rep: u64) -> u64 {
    let mut z = seed.wrapping_add(rep.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn rep_rng(seed: u64, rep: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(rep_seed(seed, rep))
}

/// All `reps` samples in rep order.
pub fn sample_many(config: &SamplerConfig) -> Result<Vec<Permutation>> {
    config.validate()?;
    let sampler = AvoiderSampler::new(config.pattern, config.n)?;
    Ok((0..config.reps as u64)
        .into_par_iter()
        .map_init(Vec::new, |buf, rep| {
            sampler.sample_into(buf, config.n, &mut rep_rng(config.seed, rep));
            Permutation::from_vec_unchecked(buf.clone())
        })
        .collect())
}

/// `hist[k]` = number of reps whose statistic equals `k`. Bit-identical for
/// any thread count.
pub fn statistic_histogram(config: &SamplerConfig, stat: StatisticId) -> Result<Vec<u64>> {
    config.validate()?;
    let sampler = AvoiderSampler::new(config.pattern, config.n)?;
    let n = config.n;
    Ok((0..config.reps as u64)
        .into_par_iter()
        .fold(
            || (vec![0u64; n + 1], Vec::new()),
            |(mut hist, mut buf), rep| {
                sampler.sample_into(&mut buf, n, &mut rep_rng(config.seed, rep));
                hist[stat.eval(&buf)] += 1;
                (hist, buf)
            },
        )
        .map(|(h, _)| h)
        .reduce(
            || vec![0u64; n + 1],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentEstimate {
    pub statistic: StatisticId,
    pub reps: usize,
    pub mean: f64,
    pub variance: f64,
    pub std_error: f64,
}

pub fn moments_from_histogram(stat: StatisticId, hist: &[u64]) -> MomentEstimate {
    let (mut n, mut s1, mut s2) = (0u128, 0u128, 0u128);
    for (k, &c) in hist.iter().enumerate() {
        let (k, c) = (k as u128, c as u128);
        n += c;
        s1 += c * k;
        s2 += c * k * k;
    }
    let reps = n as f64;
    let mean = s1 as f64 / reps;
    // n * s2 - s1^2 is exact in integers
    let variance = if n > 1 {
        (n * s2 - s1 * s1) as f64 / (reps * (reps - 1.0))
    } else {
        0.0
    };
    MomentEstimate {
        statistic: stat,
        reps: n as usize,
        mean,
        variance,
        std_error: (variance / reps).sqrt(),
    }
}

pub fn sample_variance_check(config: &SamplerConfig, stat: StatisticId) -> Result<MomentEstimate> {
    if config.reps < MIN_MOMENT_REPS {
        return invalid(format!("moment estimation needs reps >= {MIN_MOMENT_REPS}"));
    }
    Ok(moments_from_histogram(stat, &statistic_histogram(config, stat)?))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailEstimate {
    pub statistic: StatisticId,
    pub pattern: PatternId,
    pub n: usize,
    pub x: f64,
    pub side: Side,
    pub reps: usize,
    pub hits: u64,
    pub p_hat: f64,
    /// Half-width of the 95% normal-approximation interval.
    pub ci_radius: f64,
    pub slope_hat: Option<f64>,
    pub below_resolution: bool,
    /// One-sided bound `3 / reps` reported when no rep hit the tail.
    pub upper_bound: Option<f64>,
}

impl TailEstimate {
    pub fn std_error(&self) -> f64 {
        (self.p_hat * (1.0 - self.p_hat) / self.reps as f64).sqrt()
    }
}

pub fn tail_from_histogram(config: &SamplerConfig, stat: StatisticId, x: f64, side: Side, hist: &[u64]) -> TailEstimate {
    let threshold = config.n as f64 * x;
    let hits: u64 = hist
        .iter()
        .enumerate()
        .filter(|&(k, _)| side.admits(k, threshold))
        .map(|(_, &c)| c)
        .sum();
    let reps = config.reps;
    let p_hat = hits as f64 / reps as f64;
    let below = hits == 0;
    TailEstimate {
        statistic: stat,
        pattern: config.pattern,
        n: config.n,
        x,
        side,
        reps,
        hits,
        p_hat,
        ci_radius: 1.96 * (p_hat * (1.0 - p_hat) / reps as f64).sqrt(),
        slope_hat: (!below).then(|| -p_hat.ln() / config.n as f64),
        below_resolution: below,
        upper_bound: below.then(|| 3.0 / reps as f64),
    }
}

pub fn estimate_tail(config: &SamplerConfig, stat: StatisticId, x: f64, side: Side) -> Result<TailEstimate> {
    if config.reps < MIN_TAIL_REPS {
        return invalid(format!("tail estimation needs reps >= {MIN_TAIL_REPS}"));
    }
    if !x.is_finite() {
        return invalid("x must be finite");
    }
    let hist = statistic_histogram(config, stat)?;
    Ok(tail_from_histogram(config, stat, x, side, &hist))
}

/// Pearson goodness-of-fit p-value of `observed` against `probs`.
pub fn chi_square_p_value(observed: &[u64], probs: &[f64]) -> Result<f64> {
    if observed.len() != probs.len() || observed.len() < 2 {
        return invalid("chi-square needs matching vectors of length >= 2");
    }
    let total: u64 = observed.iter().sum();
    let mut stat = 0.0;
    let mut cells = 0usize;
    for (&o, &p) in observed.iter().zip(probs) {
        if p <= 0.0 {
            if o > 0 {
                return Ok(0.0);
            }
            continue;
        }
        let e = p * total as f64;
        stat += (o as f64 - e).powi(2) / e;
        cells += 1;
    }
    if cells < 2 {
        return Ok(1.0);
    }
    let dist = ChiSquared::new((cells - 1) as f64).map_err(|e| Error::Internal(e.to_string()))?;
    Ok(dist.sf(stat))
}
