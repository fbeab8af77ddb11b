//! Arithmetic on nonnegative numbers stored as natural logarithms.

/// Widest log-range allowed inside one block, so that products of two
/// blocks stay well inside the normal range of `f64`.
const BLOCK_LOG_RANGE: f64 = 300.0;

#[inline]
pub fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

pub fn log_sum_exp<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let values: Vec<f64> = values.into_iter().collect();
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// A run of consecutive entries rescaled by a common log offset.
struct Block {
    start: usize,
    shift: f64,
    mantissas: Vec<f64>,
}

fn blocks(logs: &[f64]) -> Vec<Block> {
    let mut out: Vec<Block> = Vec::new();
    let mut start = 0;
    while start < logs.len() {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        let mut end = start;
        while end < logs.len() {
            let v = logs[end];
            if v > f64::NEG_INFINITY {
                let (nlo, nhi) = (lo.min(v), hi.max(v));
                if nhi - nlo > BLOCK_LOG_RANGE {
                    break;
                }
                lo = nlo;
                hi = nhi;
            }
            end += 1;
        }
        let shift = if hi == f64::NEG_INFINITY { 0.0 } else { hi };
        let mantissas = logs[start..end]
            .iter()
            .map(|&v| if v == f64::NEG_INFINITY { 0.0 } else { (v - shift).exp() })
            .collect();
        out.push(Block { start, shift, mantissas });
        start = end;
    }
    out
}

/// Cauchy product of two log-coefficient vectors. Each input is cut into
/// blocks of bounded dynamic range; block pairs are multiplied in linear
/// space and merged into the output in log space.
pub fn log_convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![f64::NEG_INFINITY; a.len() + b.len() - 1];
    let (ba, bb) = (blocks(a), blocks(b));
    let mut scratch: Vec<f64> = Vec::new();
    for x in &ba {
        for y in &bb {
            let len = x.mantissas.len() + y.mantissas.len() - 1;
            scratch.clear();
            scratch.resize(len, 0.0);
            for (i, &mx) in x.mantissas.iter().enumerate() {
                if mx == 0.0 {
                    continue;
                }
                let row = &mut scratch[i..i + y.mantissas.len()];
                for (s, &my) in row.iter_mut().zip(&y.mantissas) {
                    *s += mx * my;
                }
            }
            let shift = x.shift + y.shift;
            let base = x.start + y.start;
            for (k, &s) in scratch.iter().enumerate() {
                if s > 0.0 {
                    out[base + k] = log_add(out[base + k], s.ln() + shift);
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_and_sum() {
        assert!((log_add(2f64.ln(), 3f64.ln()) - 5f64.ln()).abs() < 1e-15);
        assert_eq!(log_add(f64::NEG_INFINITY, 1.0), 1.0);
        assert_eq!(log_sum_exp(Vec::<f64>::new()), f64::NEG_INFINITY);
        let v = log_sum_exp([1000.0, 1000.0]);
        assert!((v - 1000.0 - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn convolution_small() {
        let a: Vec<f64> = [1.0, 2.0, 3.0].iter().map(|v: &f64| v.ln()).collect();
        let b: Vec<f64> = [4.0, 0.0, 5.0].iter().map(|v: &f64| v.ln()).collect();
        let c: Vec<f64> = log_convolve(&a, &b).into_iter().map(f64::exp).collect();
        let expected = [4.0, 8.0, 17.0, 10.0, 15.0];
        for (x, y) in c.iter().zip(expected) {
            assert!((x - y).abs() < 1e-12 * y);
        }
    }

    #[test]
    fn convolution_wide_dynamic_range() {
        // Entries spanning e^{-2000}..e^{2000} cannot share a single scale.
        let a: Vec<f64> = (0..50).map(|i| i as f64 * 80.0 - 2000.0).collect();
        let b: Vec<f64> = (0..30).map(|i| -(i as f64) * 70.0).collect();
        let c = log_convolve(&a, &b);
        for (k, &ck) in c.iter().enumerate() {
            let terms = (0..a.len())
                .filter(|&i| k >= i && k - i < b.len())
                .map(|i| a[i] + b[k - i]);
            let expected = log_sum_exp(terms);
            assert!((ck - expected).abs() < 1e-12 * expected.abs().max(1.0), "k={k}");
        }
    }
}
