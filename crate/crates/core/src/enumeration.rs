//! Brute-force generation of the avoider classes and exact distributions of
//! any statistic over them. This is the ground truth the recurrences are
//! checked against.

use std::collections::BTreeMap;

use num_bigint::BigUint;

use crate::distribution::CountTable;
use crate::error::{Error, Result};
use crate::permutation::{PatternId, Permutation, StatisticId};

pub const DEFAULT_ENUMERATION_CAP: usize = 12;

/// The avoiders of `pattern` in `S_n`, produced lazily in lexicographic order.
#[derive(Debug, Clone, Copy)]
pub struct AvoiderSet {
    pub n: usize,
    pub pattern: PatternId,
}

/// Checks the cap and returns the (lazy) avoider set.
pub fn enumerate_avoiders(n: usize, pattern: PatternId) -> Result<AvoiderSet> {
    enumerate_avoiders_capped(n, pattern, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_avoiders_capped(n: usize, pattern: PatternId, cap: usize) -> Result<AvoiderSet> {
    if n > cap {
        return Err(Error::ResourceLimit {
            what: "enumeration",
            n,
            cap,
            hint: "",
        });
    }
    Ok(AvoiderSet { n, pattern })
}

impl AvoiderSet {
    /// Calls `visit` on every avoider. Prefixes are extended depth first and
    /// pruned as soon as the newly placed value completes an occurrence.
    pub fn for_each<F: FnMut(&[u32])>(&self, mut visit: F) {
        let n = self.n;
        let mut prefix = Vec::with_capacity(n);
        let mut used = vec![false; n + 1];
        extend(n, self.pattern.values(), &mut prefix, &mut used, &mut visit);
    }

    pub fn count(&self) -> u64 {
        let mut c = 0;
        self.for_each(|_| c += 1);
        c
    }

    pub fn to_vec(&self) -> Vec<Permutation> {
        let mut out = Vec::new();
        self.for_each(|p| out.push(Permutation::from_vec_unchecked(p.to_vec())));
        out
    }
}

fn extend<F: FnMut(&[u32])>(
    n: usize,
    pattern: [u32; 3],
    prefix: &mut Vec<u32>,
    used: &mut [bool],
    visit: &mut F,
) {
    if prefix.len() == n {
        visit(prefix);
        return;
    }
    for v in 1..=n as u32 {
        if used[v as usize] {
            continue;
        }
        if completes_occurrence(prefix, v, pattern) {
            continue;
        }
        used[v as usize] = true;
        prefix.push(v);
        extend(n, pattern, prefix, used, visit);
        prefix.pop();
        used[v as usize] = false;
    }
}

/// Would appending `last` to `prefix` create an occurrence of `pattern` that
/// ends at the new element? Earlier occurrences were already excluded.
fn completes_occurrence(prefix: &[u32], last: u32, pattern: [u32; 3]) -> bool {
    let [a, b, c] = pattern;
    let k = prefix.len();
    for j in 1..k {
        let y = prefix[j];
        if (y < last) != (b < c) {
            continue;
        }
        for &x in &prefix[..j] {
            if (x < y) == (a < b) && (x < last) == (a < c) {
                return true;
            }
        }
    }
    false
}

/// Exact distribution of `stat` over the avoiders of `pattern`, by
/// enumeration.
pub fn brute_distribution(n: usize, pattern: PatternId, stat: StatisticId) -> Result<CountTable> {
    let set = enumerate_avoiders(n, pattern)?;
    let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
    set.for_each(|p| *counts.entry(stat.eval(p)).or_insert(0) += 1);
    let counts = counts.into_iter().map(|(k, c)| (k, BigUint::from(c))).collect();
    Ok(CountTable::new(n, stat, Some(pattern), counts))
}
