//! Permutations in one-line notation, length-3 pattern containment, the
//! dihedral symmetries and the three subsequence statistics.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A permutation of `1..=n` in one-line notation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Permutation(Vec<u32>);

impl Permutation {
    /// Validates that `values` is a rearrangement of `1..=n`.
    pub fn new(values: Vec<u32>) -> Result<Self> {
        let n = values.len();
        let mut seen = vec![false; n];
        for &v in &values {
            let idx = v as usize;
            if idx == 0 || idx > n || seen[idx - 1] {
                return Err(Error::InvalidArgument(format!(
                    "{values:?} is not a permutation of 1..={n}"
                )));
            }
            seen[idx - 1] = true;
        }
        Ok(Permutation(values))
    }

    /// Wraps values that the caller guarantees form a permutation.
    pub(crate) fn from_vec_unchecked(values: Vec<u32>) -> Self {
        debug_assert!(Permutation::new(values.clone()).is_ok());
        Permutation(values)
    }

    pub fn identity(n: usize) -> Self {
        Permutation((1..=n as u32).collect())
    }

    pub fn empty() -> Self {
        Permutation(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[u32] {
        &self.0
    }

    pub fn into_values(self) -> Vec<u32> {
        self.0
    }

    pub fn reverse(&self) -> Self {
        Permutation(reverse(&self.0))
    }

    pub fn complement(&self) -> Self {
        Permutation(complement(&self.0))
    }

    pub fn reverse_complement(&self) -> Self {
        Permutation(reverse_complement(&self.0))
    }

    pub fn contains(&self, pattern: &Permutation) -> bool {
        contains_pattern(&self.0, &pattern.0)
    }

    pub fn avoids(&self, pattern: PatternId) -> bool {
        !contains_pattern3(&self.0, pattern)
    }

    pub fn statistic(&self, stat: StatisticId) -> usize {
        stat.eval(&self.0)
    }
}

/// One-line notation, comma separated: `2,3,1`. The empty permutation is the
/// empty string.
impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for v in &self.0 {
            if !first {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
            first = false;
        }
        Ok(())
    }
}

impl FromStr for Permutation {
    type Err = Error;

    /// Accepts comma-separated values. A string of bare digits (`"1423"`) is
    /// also accepted as shorthand when every value is a single digit.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(Permutation::empty());
        }
        let values: Vec<u32> = if s.contains(',') {
            s.split(',')
                .map(|t| {
                    t.trim()
                        .parse::<u32>()
                        .map_err(|e| Error::Parse(format!("{t:?}: {e}")))
                })
                .collect::<Result<_>>()?
        } else {
            s.chars()
                .map(|c| {
                    c.to_digit(10)
                        .ok_or_else(|| Error::Parse(format!("unexpected character {c:?}")))
                })
                .collect::<Result<_>>()?
        };
        Permutation::new(values)
    }
}

/// The six patterns of length three.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PatternId {
    #[serde(rename = "123")]
    P123,
    #[serde(rename = "132")]
    P132,
    #[serde(rename = "213")]
    P213,
    #[serde(rename = "231")]
    P231,
    #[serde(rename = "312")]
    P312,
    #[serde(rename = "321")]
    P321,
}

impl PatternId {
    pub const ALL: [PatternId; 6] = [
        PatternId::P123,
        PatternId::P132,
        PatternId::P213,
        PatternId::P231,
        PatternId::P312,
        PatternId::P321,
    ];

    pub fn values(self) -> [u32; 3] {
        match self {
            PatternId::P123 => [1, 2, 3],
            PatternId::P132 => [1, 3, 2],
            PatternId::P213 => [2, 1, 3],
            PatternId::P231 => [2, 3, 1],
            PatternId::P312 => [3, 1, 2],
            PatternId::P321 => [3, 2, 1],
        }
    }

    pub fn as_permutation(self) -> Permutation {
        Permutation(self.values().to_vec())
    }

    pub fn from_values(v: &[u32]) -> Option<Self> {
        PatternId::ALL.into_iter().find(|p| p.values() == v)
    }
}

impl fmt::Display for PatternId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = self.values();
        write!(f, "{a}{b}{c}")
    }
}

impl FromStr for PatternId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let p: Permutation = s.parse()?;
        PatternId::from_values(p.values())
            .ok_or_else(|| Error::Parse(format!("{s:?} is not a length-3 pattern")))
    }
}

/// The permutation statistics under study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StatisticId {
    /// Longest alternating subsequence, either initial direction.
    Alt,
    /// Longest alternating subsequence that starts with an ascent and ends
    /// with a descent.
    AltPm,
    /// Longest increasing subsequence.
    Lis,
    /// Longest alternating subsequence of shape `a > b < c > ...`.
    AltDown,
}

impl StatisticId {
    pub fn eval(self, perm: &[u32]) -> usize {
        match self {
            StatisticId::Alt => stat_alt(perm),
            StatisticId::AltPm => stat_alt_pm(perm),
            StatisticId::Lis => stat_lis(perm),
            StatisticId::AltDown => stat_alt_down(perm),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            StatisticId::Alt => "alt",
            StatisticId::AltPm => "altpm",
            StatisticId::Lis => "lis",
            StatisticId::AltDown => "altdown",
        }
    }
}

impl fmt::Display for StatisticId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StatisticId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "alt" => Ok(StatisticId::Alt),
            "altpm" | "alt_pm" | "alt-pm" => Ok(StatisticId::AltPm),
            "lis" => Ok(StatisticId::Lis),
            "altdown" | "alt_down" | "alt-down" => Ok(StatisticId::AltDown),
            _ => Err(Error::Parse(format!("unknown statistic {s:?}"))),
        }
    }
}

pub fn reverse(perm: &[u32]) -> Vec<u32> {
    perm.iter().rev().copied().collect()
}

pub fn complement(perm: &[u32]) -> Vec<u32> {
    let n1 = perm.len() as u32 + 1;
    perm.iter().map(|&v| n1 - v).collect()
}

pub fn reverse_complement(perm: &[u32]) -> Vec<u32> {
    let n1 = perm.len() as u32 + 1;
    perm.iter().rev().map(|&v| n1 - v).collect()
}

/// Does `perm` contain `pattern`? Patterns longer than `perm` are never
/// contained. Length-3 patterns take the quadratic path; anything else is
/// searched by backtracking.
pub fn contains_pattern(perm: &[u32], pattern: &[u32]) -> bool {
    if pattern.len() > perm.len() {
        return false;
    }
    if let Some(p) = PatternId::from_values(pattern) {
        return contains_pattern3(perm, p);
    }
    let mut chosen = Vec::with_capacity(pattern.len());
    backtrack(perm, pattern, 0, &mut chosen)
}

fn backtrack(perm: &[u32], pattern: &[u32], start: usize, chosen: &mut Vec<u32>) -> bool {
    let m = chosen.len();
    if m == pattern.len() {
        return true;
    }
    if perm.len() - start < pattern.len() - m {
        return false;
    }
    for i in start..perm.len() {
        let v = perm[i];
        let consistent = chosen
            .iter()
            .zip(pattern)
            .all(|(&c, &p)| (c < v) == (p < pattern[m]));
        if consistent {
            chosen.push(v);
            if backtrack(perm, pattern, i + 1, chosen) {
                return true;
            }
            chosen.pop();
        }
    }
    false
}

/// Quadratic scan over the middle index. For each middle position the
/// extremal admissible left value is found by one prefix pass, then the
/// suffix is scanned for a matching right value.
pub fn contains_pattern3(perm: &[u32], pattern: PatternId) -> bool {
    let n = perm.len();
    if n < 3 {
        return false;
    }
    let [a, b, c] = pattern.values();
    let first_below_mid = a < b;
    let last_below_mid = c < b;
    let first_below_last = a < c;
    for j in 1..n - 1 {
        let mid = perm[j];
        // Keep the left value that leaves the most room for the right one.
        let mut best: Option<u32> = None;
        for &v in &perm[..j] {
            if (v < mid) != first_below_mid {
                continue;
            }
            best = Some(match best {
                None => v,
                Some(b) if first_below_last => b.min(v),
                Some(b) => b.max(v),
            });
        }
        let Some(left) = best else { continue };
        let found = perm[j + 1..]
            .iter()
            .any(|&w| (w < mid) == last_below_mid && (left < w) == first_below_last);
        if found {
            return true;
        }
    }
    false
}

/// Longest alternating subsequence in either initial direction. A single
/// element counts as length 1; the empty permutation gives 0.
pub fn stat_alt(perm: &[u32]) -> usize {
    if perm.is_empty() {
        return 0;
    }
    // up: best length ending with an ascent; down: ending with a descent.
    let (mut up, mut down) = (1usize, 1usize);
    for w in perm.windows(2) {
        if w[1] > w[0] {
            up = up.max(down + 1);
        } else {
            down = down.max(up + 1);
        }
    }
    up.max(down)
}

/// Longest alternating subsequence of shape `a < b > c < ... > z`
/// (odd length, first step up, last step down), or 1 if there is none.
/// The empty permutation gives 0.
///
/// Two-state dynamic program: `odd` is the best length of a subsequence
/// that starts with an ascent and currently ends on a descent (or is a single
/// element), `even` the best that currently ends on an ascent. Scanning
/// adjacent pairs suffices because replacing the last chosen element by a
/// later, more extreme one never shortens an alternating subsequence.
pub fn stat_alt_pm(perm: &[u32]) -> usize {
    if perm.is_empty() {
        return 0;
    }
    let mut odd = 1usize;
    let mut even = 0usize;
    for w in perm.windows(2) {
        if w[1] > w[0] {
            even = even.max(odd + 1);
        } else if even > 0 {
            odd = odd.max(even + 1);
        }
    }
    odd
}

/// Longest alternating subsequence that starts with a descent
/// (`a > b < c > ...`); a single element has length 1.
pub fn stat_alt_down(perm: &[u32]) -> usize {
    if perm.is_empty() {
        return 0;
    }
    // odd: next step must be a descent; even: next step must be an ascent
    let (mut odd, mut even) = (1usize, 0usize);
    for w in perm.windows(2) {
        if w[1] < w[0] {
            even = even.max(odd + 1);
        } else if even > 0 {
            odd = odd.max(even + 1);
        }
    }
    odd.max(even)
}

/// Longest strictly increasing subsequence by patience sorting.
pub fn stat_lis(perm: &[u32]) -> usize {
    let mut tops: Vec<u32> = Vec::with_capacity(perm.len());
    for &v in perm {
        let pos = tops.partition_point(|&t| t < v);
        if pos == tops.len() {
            tops.push(v);
        } else {
            tops[pos] = v;
        }
    }
    tops.len()
}

/// Advances `perm` to the next permutation in lexicographic order; returns
/// false (leaving `perm` untouched) when it is already the last one.
pub fn next_permutation(perm: &mut [u32]) -> bool {
    let n = perm.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

/// All permutations of `1..=n` in lexicographic order.
pub fn all_permutations(n: usize) -> impl Iterator<Item = Vec<u32>> {
    let mut current: Option<Vec<u32>> = Some((1..=n as u32).collect());
    std::iter::from_fn(move || {
        let out = current.take()?;
        let mut next = out.clone();
        if next_permutation(&mut next) {
            current = Some(next);
        }
        Some(out)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Vec<u32> {
        s.parse::<Permutation>().unwrap().into_values()
    }

    // Exponential oracle: scan every index subset once and record the three
    // statistics straight from their definitions.
    fn oracle(perm: &[u32]) -> (usize, usize, usize, usize) {
        let n = perm.len();
        if n == 0 {
            return (0, 0, 0, 0);
        }
        let (mut alt, mut alt_pm, mut lis, mut alt_down) = (1, 1, 1, 1);
        for mask in 1u32..(1 << n) {
            let sub: Vec<u32> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| perm[i]).collect();
            let k = sub.len();
            if k < 2 {
                continue;
            }
            if sub.windows(2).all(|w| w[0] < w[1]) {
                lis = lis.max(k);
            }
            let alternating = sub
                .windows(3)
                .all(|w| (w[0] < w[1]) != (w[1] < w[2]));
            if alternating {
                alt = alt.max(k);
                if sub[0] < sub[1] && sub[k - 2] > sub[k - 1] {
                    alt_pm = alt_pm.max(k);
                }
                if sub[0] > sub[1] {
                    alt_down = alt_down.max(k);
                }
            }
        }
        (alt, alt_pm, lis, alt_down)
    }

    fn brute_contains(perm: &[u32], pattern: &[u32]) -> bool {
        let n = perm.len();
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    let t = [perm[i], perm[j], perm[k]];
                    let ok = (0..3).all(|x| (0..3).all(|y| (t[x] < t[y]) == (pattern[x] < pattern[y])));
                    if ok {
                        return true;
                    }
                }
            }
        }
        false
    }

    #[test]
    fn containment_examples() {
        assert!(contains_pattern(&p("231"), &p("231")));
        assert!(!contains_pattern(&p("123"), &p("321")));
        assert!(!contains_pattern(&p("1423"), &p("231")));
        assert!(!contains_pattern(&p("12"), &p("231")));
    }

    #[test]
    fn containment_matches_triple_scan() {
        for n in 0..=7 {
            for perm in all_permutations(n) {
                for pat in PatternId::ALL {
                    assert_eq!(
                        contains_pattern3(&perm, pat),
                        brute_contains(&perm, &pat.values()),
                        "{perm:?} {pat}"
                    );
                }
            }
        }
    }

    #[test]
    fn backtracking_handles_longer_patterns() {
        let pattern = p("2413");
        assert!(contains_pattern(&p("25314"), &pattern)); // 2,5,1,4
        assert!(!contains_pattern(&p("12345"), &pattern));
        assert!(contains_pattern(&p("21"), &p("21")));
        assert!(!contains_pattern(&p("12"), &p("21")));
    }

    #[test]
    fn symmetry_examples() {
        assert_eq!(reverse(&p("132")), p("231"));
        assert_eq!(complement(&p("231")), p("213"));
        assert_eq!(reverse_complement(&p("231")), p("312"));
        assert_eq!(reverse(&[]), Vec::<u32>::new());
        assert_eq!(complement(&reverse(&p("2413"))), reverse(&complement(&p("2413"))));
    }

    #[test]
    fn statistic_examples() {
        assert_eq!(stat_alt(&p("123")), 2);
        assert_eq!(stat_alt(&p("132")), 3);
        assert_eq!(stat_alt(&p("21")), 2);
        assert_eq!(stat_alt(&p("1")), 1);
        assert_eq!(stat_alt(&[]), 0);
        assert_eq!(stat_alt_pm(&p("132")), 3);
        assert_eq!(stat_alt_pm(&p("123")), 1);
        assert_eq!(stat_alt_pm(&p("21")), 1);
        assert_eq!(stat_alt_pm(&[]), 0);
        assert_eq!(stat_lis(&p("321")), 1);
        assert_eq!(stat_lis(&p("123")), 3);
        assert_eq!(stat_lis(&p("1423")), 3);
        assert_eq!(stat_lis(&[]), 0);
        assert_eq!(stat_alt_down(&p("123")), 1);
        assert_eq!(stat_alt_down(&p("21")), 2);
        assert_eq!(stat_alt_down(&p("2143")), 4);
        assert_eq!(stat_alt_down(&[]), 0);
        assert_eq!("altdown".parse::<StatisticId>().unwrap(), StatisticId::AltDown);
    }

    #[test]
    fn statistics_match_exponential_oracle() {
        for n in 0..=9 {
            for perm in all_permutations(n) {
                let (alt, alt_pm, lis, alt_down) = oracle(&perm);
                assert_eq!(stat_alt_down(&perm), alt_down, "alt_down {perm:?}");
                assert_eq!(stat_alt(&perm), alt, "alt {perm:?}");
                assert_eq!(stat_alt_pm(&perm), alt_pm, "alt_pm {perm:?}");
                assert_eq!(stat_lis(&perm), lis, "lis {perm:?}");
            }
        }
    }

    #[test]
    fn statistic_invariants_exhaustive() {
        // Records which symmetries preserve A_n: all three do.
        for n in 1..=9 {
            for perm in all_permutations(n) {
                let a = stat_alt(&perm);
                assert_eq!(a, stat_alt(&reverse(&perm)));
                assert_eq!(a, stat_alt(&complement(&perm)));
                assert_eq!(a, stat_alt(&reverse_complement(&perm)));
                let d = a - stat_alt_pm(&perm);
                assert!(d <= 2, "{perm:?}");
                assert_eq!(stat_lis(&perm), stat_lis(&reverse_complement(&perm)));
                let pm = stat_alt_pm(&perm);
                assert!(pm % 2 == 1);
                assert!((1..=n).contains(&stat_lis(&perm)));
            }
        }
    }

    #[test]
    fn symmetries_are_involutions() {
        for perm in all_permutations(6) {
            assert_eq!(reverse(&reverse(&perm)), perm);
            assert_eq!(complement(&complement(&perm)), perm);
            assert_eq!(reverse_complement(&reverse_complement(&perm)), perm);
        }
    }

    #[test]
    fn symmetries_transport_avoider_classes() {
        use PatternId::*;
        for n in 0..=8 {
            let class = |pat: PatternId| -> Vec<Vec<u32>> {
                all_permutations(n).filter(|q| !contains_pattern3(q, pat)).collect()
            };
            let base = class(P231);
            let mut rev: Vec<_> = base.iter().map(|q| reverse(q)).collect();
            let mut com: Vec<_> = base.iter().map(|q| complement(q)).collect();
            let mut rc: Vec<_> = base.iter().map(|q| reverse_complement(q)).collect();
            rev.sort();
            com.sort();
            rc.sort();
            assert_eq!(rev, class(P132));
            assert_eq!(com, class(P213));
            assert_eq!(rc, class(P312));
        }
    }

    #[test]
    fn parse_and_display() {
        let q: Permutation = "2,3,1".parse().unwrap();
        assert_eq!(q.to_string(), "2,3,1");
        assert_eq!("".parse::<Permutation>().unwrap(), Permutation::empty());
        assert!("1,1".parse::<Permutation>().is_err());
        assert!("0,1".parse::<Permutation>().is_err());
        assert_eq!("312".parse::<PatternId>().unwrap(), PatternId::P312);
        assert!("1234".parse::<PatternId>().is_err());
        assert_eq!("altpm".parse::<StatisticId>().unwrap(), StatisticId::AltPm);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn perm_strategy() -> impl Strategy<Value = Vec<u32>> {
            (0usize..40).prop_flat_map(|n| Just((1..=n as u32).collect::<Vec<_>>()).prop_shuffle())
        }

        proptest! {
            #[test]
            fn display_parse_roundtrip(v in perm_strategy()) {
                let q = Permutation::new(v).unwrap();
                let back: Permutation = q.to_string().parse().unwrap();
                prop_assert_eq!(back, q);
            }

            #[test]
            fn alt_gap_bounded(v in perm_strategy()) {
                let gap = stat_alt(&v) as i64 - stat_alt_pm(&v) as i64;
                if v.is_empty() { prop_assert_eq!(gap, 0); } else { prop_assert!((0..=2).contains(&gap)); }
            }
        }
    }
}
