//! Exact distributions of `A_n^{+,-}` and `L_n` over uniform 231-avoiders,
//! built from the count-level recurrences obtained by conditioning on the
//! position of the maximum.
//!
//! A table for index `n` stores the coefficients of the count polynomial
//! `P_n(u) = sum_k N_n(k) u^k = C_n M_n(lambda)` at `u = e^lambda`.
//!
//! * `A_n^{+,-}`: `P_0 = 1`, `P_1 = u`, `P_2 = 2u`, and for `n >= 3`
//!   `P_n = u * sum_{j=2}^{n-1} P_{j-1} P_{n-j} + 2 P_{n-1}`.
//! * `L_n`: `Q_0 = 1`, `Q_1 = u`, and for `n >= 2`
//!   `Q_n = sum_{j=1}^{n-1} Q_{j-1} Q_{n-j} + u Q_{n-1}`.
//!
//! The same `L_n` recurrence holds for 312-avoiders.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::catalan::{catalan, ln_biguint, ln_catalan};
use crate::error::{invalid, Error, Result};
use crate::logspace::{log_add, log_convolve, log_sum_exp};
use crate::permutation::{PatternId, StatisticId};

pub const DEFAULT_EXACT_CAP: usize = 256;
pub const DEFAULT_LOGFLOAT_CAP: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    LogFloat,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exact" => Ok(Mode::Exact),
            "logfloat" | "log" => Ok(Mode::LogFloat),
            _ => Err(Error::Parse(format!("unknown mode {s:?}"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Exact => "exact",
            Mode::LogFloat => "logfloat",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    pub exact: usize,
    pub logfloat: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            exact: DEFAULT_EXACT_CAP,
            logfloat: DEFAULT_LOGFLOAT_CAP,
        }
    }
}

/// Which side of the threshold `n x` a tail event lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Ge,
    Gt,
    Le,
    Lt,
}

impl Side {
    pub fn complement(self) -> Side {
        match self {
            Side::Ge => Side::Lt,
            Side::Gt => Side::Le,
            Side::Le => Side::Gt,
            Side::Lt => Side::Ge,
        }
    }

    pub fn is_upper(self) -> bool {
        matches!(self, Side::Ge | Side::Gt)
    }

    /// Does value `k` lie in the tail `{k (side) threshold}`? Thresholds
    /// within `1e-9` of an integer are snapped to it so that `n * 0.7` at
    /// `n = 10` behaves as `7`.
    pub fn admits(self, k: usize, threshold: f64) -> bool {
        let snapped = if (threshold - threshold.round()).abs() < 1e-9 {
            threshold.round()
        } else {
            threshold
        };
        let k = k as f64;
        match self {
            Side::Ge => k >= snapped,
            Side::Gt => k > snapped,
            Side::Le => k <= snapped,
            Side::Lt => k < snapped,
        }
    }
}

impl FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ge" | ">=" => Ok(Side::Ge),
            "gt" | ">" => Ok(Side::Gt),
            "le" | "<=" => Ok(Side::Le),
            "lt" | "<" => Ok(Side::Lt),
            _ => Err(Error::Parse(format!("unknown side {s:?}"))),
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Ge => "ge",
            Side::Gt => "gt",
            Side::Le => "le",
            Side::Lt => "lt",
        })
    }
}

/// Exact counts `N_n(k)` of avoiders with statistic value `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountTable {
    pub n: usize,
    pub statistic: StatisticId,
    pub pattern: PatternId,
    /// Dense by value: `counts[k] = N_n(k)`.
    counts: Vec<BigUint>,
}

impl CountTable {
    pub fn new(n: usize, statistic: StatisticId, pattern: Option<PatternId>, sparse: BTreeMap<usize, BigUint>) -> Self {
        let len = sparse.keys().next_back().map_or(1, |&k| k + 1);
        let mut counts = vec![BigUint::zero(); len];
        for (k, c) in sparse {
            counts[k] = c;
        }
        CountTable {
            n,
            statistic,
            pattern: pattern.unwrap_or(PatternId::P231),
            counts,
        }
    }

    fn from_dense(n: usize, statistic: StatisticId, mut counts: Vec<BigUint>) -> Self {
        while counts.len() > 1 && counts.last().is_some_and(Zero::is_zero) {
            counts.pop();
        }
        CountTable {
            n,
            statistic,
            pattern: PatternId::P231,
            counts,
        }
    }

    /// Nonzero `(value, count)` pairs in increasing value order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, &BigUint)> {
        self.counts.iter().enumerate().filter(|(_, c)| !c.is_zero())
    }

    pub fn get(&self, k: usize) -> BigUint {
        self.counts.get(k).cloned().unwrap_or_default()
    }

    pub fn dense(&self) -> &[BigUint] {
        &self.counts
    }

    pub fn total(&self) -> BigUint {
        self.counts.iter().sum()
    }

    pub fn counts_u64(&self) -> Vec<(usize, u64)> {
        self.iter().map(|(k, c)| (k, c.to_u64().expect("count fits u64"))).collect()
    }

    pub fn to_logfloat(&self) -> LogFloatTable {
        LogFloatTable {
            n: self.n,
            statistic: self.statistic,
            log_counts: self.counts.iter().map(ln_biguint).collect(),
        }
    }

    pub fn to_json(&self) -> Value {
        let counts: serde_json::Map<String, Value> =
            self.iter().map(|(k, c)| (k.to_string(), Value::String(c.to_string()))).collect();
        json!({
            "n": self.n,
            "pattern": self.pattern.to_string(),
            "statistic": self.statistic.name(),
            "mode": "exact",
            "counts": counts,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |what: &str| Error::Parse(format!("count table JSON: {what}"));
        let n = v["n"].as_u64().ok_or_else(|| bad("n"))? as usize;
        let pattern: PatternId = v["pattern"].as_str().ok_or_else(|| bad("pattern"))?.parse()?;
        let statistic: StatisticId = v["statistic"].as_str().ok_or_else(|| bad("statistic"))?.parse()?;
        let obj = v["counts"].as_object().ok_or_else(|| bad("counts"))?;
        let mut sparse = BTreeMap::new();
        for (k, c) in obj {
            let k: usize = k.parse().map_err(|_| bad("count key"))?;
            let c: BigUint = c.as_str().ok_or_else(|| bad("count value"))?.parse().map_err(|_| bad("count value"))?;
            sparse.insert(k, c);
        }
        Ok(CountTable::new(n, statistic, Some(pattern), sparse))
    }

    /// `value,count` rows sorted by value.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("value,count\n");
        for (k, c) in self.iter() {
            out.push_str(&format!("{k},{c}\n"));
        }
        out
    }

    pub fn from_csv(n: usize, statistic: StatisticId, pattern: PatternId, csv: &str) -> Result<Self> {
        let mut lines = csv.lines();
        if lines.next().map(str::trim) != Some("value,count") {
            return Err(Error::Parse("missing `value,count` header".into()));
        }
        let mut sparse = BTreeMap::new();
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let (k, c) = line.split_once(',').ok_or_else(|| Error::Parse(format!("bad row {line:?}")))?;
            let k: usize = k.trim().parse().map_err(|_| Error::Parse(format!("bad value {k:?}")))?;
            let c: BigUint = c.trim().parse().map_err(|_| Error::Parse(format!("bad count {c:?}")))?;
            sparse.insert(k, c);
        }
        Ok(CountTable::new(n, statistic, Some(pattern), sparse))
    }
}

/// Natural logarithms of the counts; `-inf` marks a zero count.
#[derive(Debug, Clone, PartialEq)]
pub struct LogFloatTable {
    pub n: usize,
    pub statistic: StatisticId,
    pub log_counts: Vec<f64>,
}

impl LogFloatTable {
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.log_counts
            .iter()
            .copied()
            .enumerate()
            .filter(|(_, l)| *l > f64::NEG_INFINITY)
    }

    pub fn ln_total(&self) -> f64 {
        log_sum_exp(self.log_counts.iter().copied())
    }

    pub fn to_json(&self) -> Value {
        let counts: serde_json::Map<String, Value> =
            self.iter().map(|(k, l)| (k.to_string(), json!(l))).collect();
        json!({
            "n": self.n,
            "pattern": "231",
            "statistic": self.statistic.name(),
            "mode": "logfloat",
            "log_counts": counts,
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("value,log_count\n");
        for (k, l) in self.iter() {
            out.push_str(&format!("{k},{l:e}\n"));
        }
        out
    }
}

/// Either representation; every evaluation routine accepts both.
#[derive(Debug, Clone, PartialEq)]
pub enum Table {
    Exact(CountTable),
    LogFloat(LogFloatTable),
}

impl Table {
    pub fn n(&self) -> usize {
        match self {
            Table::Exact(t) => t.n,
            Table::LogFloat(t) => t.n,
        }
    }

    pub fn statistic(&self) -> StatisticId {
        match self {
            Table::Exact(t) => t.statistic,
            Table::LogFloat(t) => t.statistic,
        }
    }

    /// `(k, ln N_n(k))` over the support.
    pub fn log_weights(&self) -> Vec<(usize, f64)> {
        match self {
            Table::Exact(t) => t.iter().map(|(k, c)| (k, ln_biguint(c))).collect(),
            Table::LogFloat(t) => t.iter().collect(),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Table::Exact(t) => t.to_json(),
            Table::LogFloat(t) => t.to_json(),
        }
    }

    pub fn to_csv(&self) -> String {
        match self {
            Table::Exact(t) => t.to_csv(),
            Table::LogFloat(t) => t.to_csv(),
        }
    }
}

impl From<CountTable> for Table {
    fn from(t: CountTable) -> Self {
        Table::Exact(t)
    }
}

impl From<LogFloatTable> for Table {
    fn from(t: LogFloatTable) -> Self {
        Table::LogFloat(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Family {
    AltPm,
    Lis,
}

impl Family {
    fn of(stat: StatisticId) -> Result<Family> {
        match stat {
            StatisticId::AltPm => Ok(Family::AltPm),
            StatisticId::Lis => Ok(Family::Lis),
            StatisticId::Alt | StatisticId::AltDown => {
                invalid("no recurrence is available for A_n; use alt_pm or enumeration")
            }
        }
    }

    fn stat(self) -> StatisticId {
        match self {
            Family::AltPm => StatisticId::AltPm,
            Family::Lis => StatisticId::Lis,
        }
    }
}

fn cap_error(n: usize, cap: usize, mode: Mode) -> Error {
    Error::ResourceLimit {
        what: match mode {
            Mode::Exact => "exact recurrence",
            Mode::LogFloat => "logfloat recurrence",
        },
        n,
        cap,
        hint: match mode {
            Mode::Exact => "; use --mode logfloat for larger n",
            Mode::LogFloat => "",
        },
    }
}

// ---------------------------------------------------------------------------
// exact recurrence

fn mul_add_into(acc: &mut [BigUint], a: &[BigUint], b: &[BigUint]) {
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if y.is_zero() {
                continue;
            }
            acc[i + j] += x * y;
        }
    }
}

/// `sum_{a=lo}^{m-lo} T_a T_{m-a}` using the symmetry of the sum.
fn symmetric_convolution_sum(tables: &[Vec<BigUint>], m: usize, lo: usize, len: usize) -> Vec<BigUint> {
    if m < 2 * lo {
        return vec![BigUint::zero(); len];
    }
    let half = m / 2;
    let parts: Vec<Vec<BigUint>> = (lo..=half)
        .into_par_iter()
        .map(|a| {
            let mut acc = vec![BigUint::zero(); len];
            mul_add_into(&mut acc, &tables[a], &tables[m - a]);
            if 2 * a != m {
                for c in acc.iter_mut() {
                    *c <<= 1;
                }
            }
            acc
        })
        .collect();
    let mut total = vec![BigUint::zero(); len];
    for part in parts {
        for (t, p) in total.iter_mut().zip(part) {
            *t += p;
        }
    }
    total
}

fn exact_tables(family: Family, n: usize, cap: usize) -> Result<Vec<CountTable>> {
    if n > cap {
        return Err(cap_error(n, cap, Mode::Exact));
    }
    let mut polys: Vec<Vec<BigUint>> = Vec::with_capacity(n + 1);
    let unit = |k: usize, c: u32| {
        let mut v = vec![BigUint::zero(); k + 1];
        v[k] = BigUint::from(c);
        v
    };
    for m in 0..=n {
        let next = match (family, m) {
            (_, 0) => unit(0, 1),
            (_, 1) => unit(1, 1),
            (Family::AltPm, 2) => unit(1, 2),
            (Family::AltPm, _) => {
                // pairs (j-1, n-j) for j = 2..n-1 are (a, m-1-a), a = 1..m-2
                let mut out = vec![BigUint::zero(); m + 1];
                let conv = symmetric_convolution_sum(&polys, m - 1, 1, m);
                for (k, c) in conv.into_iter().enumerate() {
                    out[k + 1] += c;
                }
                for (k, c) in polys[m - 1].iter().enumerate() {
                    out[k] += c << 1;
                }
                out
            }
            (Family::Lis, _) => {
                // pairs (j-1, n-j) for j = 1..n-1: the a = 0 end term plus
                // the symmetric middle a = 1..m-2
                let mut out = vec![BigUint::zero(); m + 1];
                let conv = symmetric_convolution_sum(&polys, m - 1, 1, m);
                for (k, c) in conv.into_iter().enumerate() {
                    out[k] += c;
                }
                for (k, c) in polys[m - 1].iter().enumerate() {
                    out[k] += c;
                    out[k + 1] += c;
                }
                out
            }
        };
        polys.push(next);
    }
    Ok(polys
        .into_iter()
        .enumerate()
        .map(|(m, p)| CountTable::from_dense(m, family.stat(), p))
        .collect())
}

// ---------------------------------------------------------------------------
// log-float recurrence

fn symmetric_log_convolution_sum(tables: &[Vec<f64>], m: usize, lo: usize, len: usize) -> Vec<f64> {
    let mut total = vec![f64::NEG_INFINITY; len];
    if m < 2 * lo {
        return total;
    }
    let half = m / 2;
    let parts: Vec<Vec<f64>> = (lo..=half)
        .into_par_iter()
        .map(|a| {
            let mut conv = log_convolve(&tables[a], &tables[m - a]);
            if 2 * a != m {
                for c in conv.iter_mut() {
                    *c += std::f64::consts::LN_2;
                }
            }
            conv
        })
        .collect();
    // Fixed merge order keeps the result independent of the thread count.
    for part in parts {
        for (t, p) in total.iter_mut().zip(part) {
            *t = log_add(*t, p);
        }
    }
    total
}

fn logfloat_tables(family: Family, n: usize, cap: usize) -> Result<Vec<LogFloatTable>> {
    if n > cap {
        return Err(cap_error(n, cap, Mode::LogFloat));
    }
    let neg = f64::NEG_INFINITY;
    let unit = |k: usize, c: f64| {
        let mut v = vec![neg; k + 1];
        v[k] = c.ln();
        v
    };
    let mut polys: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    for m in 0..=n {
        let next = match (family, m) {
            (_, 0) => unit(0, 1.0),
            (_, 1) => unit(1, 1.0),
            (Family::AltPm, 2) => unit(1, 2.0),
            (Family::AltPm, _) => {
                let mut out = vec![neg; m + 1];
                let conv = symmetric_log_convolution_sum(&polys, m - 1, 1, m);
                for (k, c) in conv.into_iter().enumerate() {
                    out[k + 1] = log_add(out[k + 1], c);
                }
                for (k, &c) in polys[m - 1].iter().enumerate() {
                    out[k] = log_add(out[k], c + std::f64::consts::LN_2);
                }
                out
            }
            (Family::Lis, _) => {
                let mut out = vec![neg; m + 1];
                let conv = symmetric_log_convolution_sum(&polys, m - 1, 1, m);
                for (k, c) in conv.into_iter().enumerate() {
                    out[k] = log_add(out[k], c);
                }
                for (k, &c) in polys[m - 1].iter().enumerate() {
                    out[k] = log_add(out[k], c);
                    out[k + 1] = log_add(out[k + 1], c);
                }
                out
            }
        };
        polys.push(next);
    }
    Ok(polys
        .into_iter()
        .enumerate()
        .map(|(m, mut log_counts)| {
            while log_counts.len() > 1 && log_counts.last() == Some(&neg) {
                log_counts.pop();
            }
            LogFloatTable {
                n: m,
                statistic: family.stat(),
                log_counts,
            }
        })
        .collect())
}

/// Exact tables for `0..=n`, built in one pass.
pub fn exact_tables_upto(stat: StatisticId, n: usize, caps: Caps) -> Result<Vec<CountTable>> {
    exact_tables(Family::of(stat)?, n, caps.exact)
}

/// Log-float tables for `0..=n`, built in one pass.
pub fn logfloat_tables_upto(stat: StatisticId, n: usize, caps: Caps) -> Result<Vec<LogFloatTable>> {
    logfloat_tables(Family::of(stat)?, n, caps.logfloat)
}

pub fn counts(stat: StatisticId, n: usize, mode: Mode, caps: Caps) -> Result<Table> {
    Ok(match mode {
        Mode::Exact => Table::Exact(exact_tables_upto(stat, n, caps)?.pop().unwrap()),
        Mode::LogFloat => Table::LogFloat(logfloat_tables_upto(stat, n, caps)?.pop().unwrap()),
    })
}

/// Distribution of `A_n^{+,-}` under the uniform 231-avoider law.
pub fn alt_pm_counts(n: usize, mode: Mode) -> Result<Table> {
    counts(StatisticId::AltPm, n, mode, Caps::default())
}

/// Distribution of `L_n` under the uniform 231-avoider (equivalently
/// 312-avoider) law.
pub fn lis_counts(n: usize, mode: Mode) -> Result<Table> {
    counts(StatisticId::Lis, n, mode, Caps::default())
}

pub fn alt_pm_exact(n: usize) -> Result<CountTable> {
    Ok(exact_tables_upto(StatisticId::AltPm, n, Caps::default())?.pop().unwrap())
}

pub fn lis_exact(n: usize) -> Result<CountTable> {
    Ok(exact_tables_upto(StatisticId::Lis, n, Caps::default())?.pop().unwrap())
}

// ---------------------------------------------------------------------------
// evaluation

fn check_lambda(lambda: f64) -> Result<()> {
    if !lambda.is_finite() {
        return invalid(format!("lambda must be finite, got {lambda}"));
    }
    Ok(())
}

/// `ln M_n(lambda) = ln sum_k N_n(k) e^{lambda k} - ln C_n`.
pub fn ln_mgf(table: &Table, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    let w = table.log_weights();
    if w.is_empty() {
        return invalid("empty table");
    }
    let ln_total = log_sum_exp(w.iter().map(|&(_, l)| l));
    Ok(log_sum_exp(w.iter().map(|&(k, l)| l + lambda * k as f64)) - ln_total)
}

pub fn mgf(table: &Table, lambda: f64) -> Result<f64> {
    ln_mgf(table, lambda).map(f64::exp)
}

/// `(1/n) ln M_n(lambda)`.
pub fn scaled_log_mgf(table: &Table, lambda: f64) -> Result<f64> {
    let n = table.n();
    if n == 0 {
        return invalid("scaled_log_mgf requires n >= 1");
    }
    Ok(ln_mgf(table, lambda)? / n as f64)
}

/// `ln T_k` for `k = 0..=n`, where `T_k = C_k M_k(lambda)` is the count
/// polynomial evaluated at `u = e^lambda`, computed by the scalar form of
/// the recurrence.
pub fn ln_transform_sequence(stat: StatisticId, lambda: f64, n: usize) -> Result<Vec<f64>> {
    check_lambda(lambda)?;
    let family = Family::of(stat)?;
    let mut t: Vec<f64> = Vec::with_capacity(n + 1);
    for m in 0..=n {
        let v = match (family, m) {
            (_, 0) => 0.0,
            (_, 1) => lambda,
            (Family::AltPm, 2) => lambda + std::f64::consts::LN_2,
            (Family::AltPm, _) => {
                let conv = log_sum_exp((1..=m - 2).map(|a| t[a] + t[m - 1 - a]));
                log_add(lambda + conv, std::f64::consts::LN_2 + t[m - 1])
            }
            (Family::Lis, _) => {
                let conv = log_sum_exp((0..=m - 2).map(|a| t[a] + t[m - 1 - a]));
                log_add(conv, lambda + t[m - 1])
            }
        };
        t.push(v);
    }
    Ok(t)
}

/// `ln(T_n / T_{n-1})`, an `O(1/n)` estimate of the exponential growth rate
/// of `C_n M_n(lambda)`; subtracting `ln 4` estimates the scaled cumulant
/// limit.
pub fn ratio_limit_estimate(stat: StatisticId, lambda: f64, n: usize) -> Result<f64> {
    if n < 2 {
        return invalid("ratio_limit_estimate requires n >= 2");
    }
    let t = ln_transform_sequence(stat, lambda, n)?;
    Ok(t[n] - t[n - 1])
}

/// Exact first two moments of an exact table.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactMoments {
    pub mean: BigRational,
    pub variance: BigRational,
}

pub fn mean_variance(table: &CountTable) -> ExactMoments {
    let total = BigInt::from(table.total());
    let (mut s1, mut s2) = (BigInt::zero(), BigInt::zero());
    for (k, c) in table.iter() {
        let c = BigInt::from(c.clone());
        let k = BigInt::from(k);
        s1 += &c * &k;
        s2 += &c * &k * &k;
    }
    let mean = BigRational::new(s1, total.clone());
    let second = BigRational::new(s2, total);
    let variance = &second - &mean * &mean;
    ExactMoments { mean, variance }
}

/// Float moments for either representation. For log-float tables the
/// relative precision is that of the stored logs (about 1e-12 per entry).
pub fn mean_variance_f64(table: &Table) -> (f64, f64) {
    let w = table.log_weights();
    let ln_total = log_sum_exp(w.iter().map(|&(_, l)| l));
    let (mut m1, mut m2) = (0.0, 0.0);
    for &(k, l) in &w {
        let p = (l - ln_total).exp();
        m1 += p * k as f64;
        m2 += p * (k * k) as f64;
    }
    (m1, m2 - m1 * m1)
}

/// A tail probability in exact or log form.
#[derive(Debug, Clone, PartialEq)]
pub enum TailProbability {
    Exact(BigRational),
    /// Natural log; `-inf` for an empty tail.
    Log(f64),
}

impl TailProbability {
    pub fn ln(&self) -> f64 {
        match self {
            TailProbability::Exact(r) => {
                if r.is_zero() {
                    f64::NEG_INFINITY
                } else {
                    ln_biguint(r.numer().magnitude()) - ln_biguint(r.denom().magnitude())
                }
            }
            TailProbability::Log(l) => *l,
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.ln().exp()
    }

    pub fn is_zero(&self) -> bool {
        self.ln() == f64::NEG_INFINITY
    }
}

/// `P(stat (side) n x)`.
pub fn tail_probability(table: &Table, x: f64, side: Side) -> Result<TailProbability> {
    if !x.is_finite() || x < 0.0 {
        return invalid(format!("threshold fraction x = {x} must be a finite nonnegative number"));
    }
    let threshold = table.n() as f64 * x;
    match table {
        Table::Exact(t) => {
            let mut num = BigUint::zero();
            for (k, c) in t.iter() {
                if side.admits(k, threshold) {
                    num += c;
                }
            }
            Ok(TailProbability::Exact(BigRational::new(num.into(), t.total().into())))
        }
        Table::LogFloat(t) => {
            let tail = log_sum_exp(t.iter().filter(|&(k, _)| side.admits(k, threshold)).map(|(_, l)| l));
            Ok(TailProbability::Log(tail - t.ln_total()))
        }
    }
}

/// Confirms `sum_k N_n(k) = C_n`.
pub fn check_normalization(table: &CountTable) -> Result<()> {
    let c = catalan(table.n);
    if table.total() != c {
        return Err(Error::Internal(format!(
            "table for n = {} sums to {} instead of C_n = {c}",
            table.n,
            table.total()
        )));
    }
    Ok(())
}

/// Relative error of the log-sum-exp total against `ln C_n`.
pub fn logfloat_normalization_error(table: &LogFloatTable) -> f64 {
    let c = ln_catalan(table.n);
    let t = table.ln_total();
    if c == 0.0 {
        (t - c).abs()
    } else {
        ((t - c) / c).abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumeration::brute_distribution;

    fn r(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    fn exact(t: Table) -> CountTable {
        match t {
            Table::Exact(t) => t,
            _ => panic!("expected exact table"),
        }
    }

    #[test]
    fn alt_pm_examples() {
        assert_eq!(alt_pm_exact(0).unwrap().counts_u64(), vec![(0, 1)]);
        assert_eq!(alt_pm_exact(1).unwrap().counts_u64(), vec![(1, 1)]);
        assert_eq!(alt_pm_exact(2).unwrap().counts_u64(), vec![(1, 2)]);
        assert_eq!(alt_pm_exact(3).unwrap().counts_u64(), vec![(1, 4), (3, 1)]);
    }

    #[test]
    fn lis_examples() {
        assert_eq!(lis_exact(2).unwrap().counts_u64(), vec![(1, 1), (2, 1)]);
        assert_eq!(lis_exact(3).unwrap().counts_u64(), vec![(1, 1), (2, 3), (3, 1)]);
        for t in exact_tables_upto(StatisticId::Lis, 128, Caps::default()).unwrap().iter().skip(1) {
            assert_eq!(t.get(t.n), BigUint::from(1u32));
        }
    }

    #[test]
    fn recurrences_match_enumeration() {
        let alt = exact_tables_upto(StatisticId::AltPm, 9, Caps::default()).unwrap();
        let lis = exact_tables_upto(StatisticId::Lis, 9, Caps::default()).unwrap();
        for n in 0..=9 {
            assert_eq!(alt[n], brute_distribution(n, PatternId::P231, StatisticId::AltPm).unwrap());
            assert_eq!(lis[n], brute_distribution(n, PatternId::P231, StatisticId::Lis).unwrap());
        }
    }

    #[test]
    fn normalization_and_support() {
        for t in exact_tables_upto(StatisticId::AltPm, 96, Caps::default()).unwrap() {
            check_normalization(&t).unwrap();
            for (k, _) in t.iter() {
                assert!(t.n == 0 || k % 2 == 1);
            }
        }
        for t in exact_tables_upto(StatisticId::Lis, 96, Caps::default()).unwrap() {
            check_normalization(&t).unwrap();
            for (k, _) in t.iter() {
                assert!(t.n == 0 || (1..=t.n).contains(&k));
            }
        }
    }

    #[test]
    fn caps_are_enforced() {
        let caps = Caps { exact: 10, logfloat: 20 };
        let err = exact_tables_upto(StatisticId::Lis, 11, caps).unwrap_err();
        assert!(matches!(err, Error::ResourceLimit { cap: 10, .. }));
        assert!(err.to_string().contains("logfloat"));
        assert!(logfloat_tables_upto(StatisticId::Lis, 21, caps).is_err());
        assert!(exact_tables_upto(StatisticId::Alt, 3, caps).is_err());
    }

    #[test]
    fn logfloat_agrees_with_exact() {
        for stat in [StatisticId::AltPm, StatisticId::Lis] {
            let ex = exact_tables_upto(stat, 128, Caps::default()).unwrap();
            let lf = logfloat_tables_upto(stat, 128, Caps::default()).unwrap();
            for (e, l) in ex.iter().zip(&lf) {
                assert_eq!(e.dense().len(), l.log_counts.len());
                for (c, &lc) in e.dense().iter().zip(&l.log_counts) {
                    if c.is_zero() {
                        assert_eq!(lc, f64::NEG_INFINITY);
                    } else {
                        let rel = (lc - ln_biguint(c)).exp_m1().abs();
                        assert!(rel < 1e-9, "{stat} n={} rel={rel}", e.n);
                    }
                }
                assert!(logfloat_normalization_error(l) < 1e-9);
            }
        }
    }

    #[test]
    fn mgf_values() {
        let t: Table = alt_pm_exact(3).unwrap().into();
        assert!((mgf(&t, 0.0).unwrap() - 1.0).abs() < 1e-15);
        let e = 1f64.exp();
        let expected = (4.0 * e + e.powi(3)) / 5.0;
        assert!((mgf(&t, 1.0).unwrap() - expected).abs() < 1e-12 * expected);
        assert!(mgf(&t, f64::NAN).is_err());
        assert!(mgf(&t, f64::INFINITY).is_err());
    }

    #[test]
    fn scaled_log_mgf_limit() {
        let t = alt_pm_counts(512, Mode::LogFloat).unwrap();
        let v = scaled_log_mgf(&t, 1.0).unwrap();
        let limit = (1f64.exp() + 1.0).ln() - 2f64.ln();
        assert!((v - limit).abs() < 0.02, "{v} vs {limit}");
    }

    #[test]
    fn scaled_log_mgf_is_convex() {
        let t = lis_counts(60, Mode::Exact).unwrap();
        let grid: Vec<f64> = (-40..=40).map(|i| i as f64 * 0.1).collect();
        let vals: Vec<f64> = grid.iter().map(|&l| scaled_log_mgf(&t, l).unwrap()).collect();
        for w in vals.windows(3) {
            assert!(w[0] - 2.0 * w[1] + w[2] >= -1e-12);
        }
    }

    #[test]
    fn ratio_estimates() {
        let ln4 = 4f64.ln();
        let v = ratio_limit_estimate(StatisticId::AltPm, 0.0, 512).unwrap();
        assert!((v - ln4).abs() < 0.01);
        let v = ratio_limit_estimate(StatisticId::AltPm, 1.0, 512).unwrap();
        assert!((v - (2.0 * (1f64.exp() + 1.0)).ln()).abs() < 0.01);
        let v = ratio_limit_estimate(StatisticId::Lis, 1.0, 512).unwrap();
        assert!((v - 2.0 * (0.5f64.exp() + 1.0).ln()).abs() < 0.01);
        assert!(ratio_limit_estimate(StatisticId::Lis, 1.0, 1).is_err());
    }

    #[test]
    fn scalar_recurrence_matches_tables() {
        for stat in [StatisticId::AltPm, StatisticId::Lis] {
            let seq = ln_transform_sequence(stat, 0.7, 40).unwrap();
            let tables = exact_tables_upto(stat, 40, Caps::default()).unwrap();
            for (m, t) in tables.into_iter().enumerate() {
                let direct = ln_mgf(&t.into(), 0.7).unwrap() + ln_catalan(m);
                assert!((direct - seq[m]).abs() < 1e-10 * seq[m].abs().max(1.0));
            }
        }
    }

    #[test]
    fn moments() {
        assert_eq!(mean_variance(&lis_exact(3).unwrap()).mean, r(2, 1));
        assert_eq!(mean_variance(&alt_pm_exact(1).unwrap()).variance, r(0, 1));
        assert_eq!(mean_variance(&lis_exact(128).unwrap()).mean, r(129, 2));
        let t = lis_exact(40).unwrap();
        let ex = mean_variance(&t);
        let (m, v) = mean_variance_f64(&Table::LogFloat(t.to_logfloat()));
        assert!((m - ex.mean.to_f64().unwrap()).abs() < 1e-10);
        assert!((v - ex.variance.to_f64().unwrap()).abs() < 1e-8);
    }

    #[test]
    fn tails() {
        let lis6: Table = lis_exact(6).unwrap().into();
        assert_eq!(tail_probability(&lis6, 1.0, Side::Ge).unwrap(), TailProbability::Exact(r(1, 132)));
        let alt3: Table = alt_pm_exact(3).unwrap().into();
        assert_eq!(tail_probability(&alt3, 0.9, Side::Ge).unwrap(), TailProbability::Exact(r(1, 5)));
        // n x = 3 exactly: >= includes it, > does not
        assert_eq!(tail_probability(&alt3, 1.0, Side::Gt).unwrap(), TailProbability::Exact(r(0, 1)));
        assert!(tail_probability(&alt3, 1.0, Side::Gt).unwrap().is_zero());
        let lis10: Table = lis_exact(10).unwrap().into();
        for x in [0.1, 0.3, 0.5, 0.7, 0.95] {
            for side in [Side::Ge, Side::Gt, Side::Le, Side::Lt] {
                let a = tail_probability(&lis10, x, side).unwrap();
                let b = tail_probability(&lis10, x, side.complement()).unwrap();
                match (a, b) {
                    (TailProbability::Exact(a), TailProbability::Exact(b)) => assert_eq!(a + b, r(1, 1)),
                    _ => unreachable!(),
                }
            }
        }
        let lf = Table::LogFloat(exact(lis10.clone()).to_logfloat());
        let a = tail_probability(&lf, 0.7, Side::Ge).unwrap().to_f64();
        let b = tail_probability(&lis10, 0.7, Side::Ge).unwrap().to_f64();
        assert!((a - b).abs() < 1e-12);
        assert_eq!(
            tail_probability(&Table::LogFloat(exact(alt3).to_logfloat()), 1.0, Side::Gt).unwrap(),
            TailProbability::Log(f64::NEG_INFINITY)
        );
    }

    #[test]
    fn lattice_threshold_snapping() {
        // 10 * 0.7 is not exactly 7 in binary floating point
        assert!(Side::Ge.admits(7, 10.0 * 0.7));
        assert!(!Side::Gt.admits(7, 10.0 * 0.7));
    }

    #[test]
    fn json_and_csv_roundtrip() {
        let t = lis_exact(12).unwrap();
        let back = CountTable::from_json(&t.to_json()).unwrap();
        assert_eq!(back, t);
        let back = CountTable::from_csv(12, StatisticId::Lis, PatternId::P231, &t.to_csv()).unwrap();
        assert_eq!(back, t);
        let lis3 = lis_exact(3).unwrap();
        assert_eq!(lis3.to_csv(), "value,count\n1,1\n2,3\n3,1\n");
        let big = lis_exact(200).unwrap().to_json();
        assert!(big["counts"]["100"].is_string());
    }
}
