//! Small statistical helpers shared by tests and the experiment harness.

use std::collections::HashMap;
use std::hash::Hash;

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Total variation distance between the empirical law of `counts` and the
/// exact law `exact` (keys missing from either side count as zero).
pub fn tv_distance<K: Eq + Hash>(counts: &HashMap<K, u64>, exact: &HashMap<K, f64>) -> f64 {
    let total: u64 = counts.values().sum();
    let total = total.max(1) as f64;
    let mut d = 0.0;
    for (k, &p) in exact {
        let q = counts.get(k).copied().unwrap_or(0) as f64 / total;
        d += (p - q).abs();
    }
    for (k, &c) in counts {
        if !exact.contains_key(k) {
            d += c as f64 / total;
        }
    }
    d / 2.0
}

/// Pearson statistic against the uniform law on `cells` outcomes, and its
/// p-value.
pub fn chi_square_uniform<K: Eq + Hash>(counts: &HashMap<K, u64>, cells: usize) -> (f64, f64) {
    let total: u64 = counts.values().sum();
    let e = total as f64 / cells as f64;
    let seen: f64 = counts.values().map(|&c| (c as f64 - e).powi(2) / e).sum();
    let unseen = (cells - counts.len().min(cells)) as f64 * e;
    let stat = seen + unseen;
    let p = ChiSquared::new((cells - 1) as f64)
        .map(|c| c.sf(stat))
        .unwrap_or(f64::NAN);
    (stat, p)
}

/// Wilson score interval at 95% for `k` successes out of `n`.
pub fn wilson(k: u64, n: u64) -> (f64, f64) {
    let z = 1.959_963_984_540_054_f64;
    let n = n as f64;
    let p = k as f64 / n;
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    let lo = if k == 0 {
        0.0
    } else {
        (centre - half).max(0.0)
    };
    let hi = if k as f64 == n {
        1.0
    } else {
        (centre + half).min(1.0)
    };
    (lo, hi)
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v: Vec<f64> = xs.iter().copied().filter(|x| !x.is_nan()).collect();
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tv_of_identical_laws_is_zero() {
        let counts: HashMap<u8, u64> = [(0, 50), (1, 50)].into();
        let exact: HashMap<u8, f64> = [(0, 0.5), (1, 0.5)].into();
        assert_eq!(tv_distance(&counts, &exact), 0.0);
        let exact: HashMap<u8, f64> = [(0, 1.0)].into();
        assert!((tv_distance(&counts, &exact) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn chi_square_counts_missing_cells() {
        let counts: HashMap<u8, u64> = [(0, 10)].into();
        let (stat, p) = chi_square_uniform(&counts, 2);
        assert!((stat - 10.0).abs() < 1e-12);
        assert!(p < 0.01);
    }

    #[test]
    fn wilson_brackets_the_estimate() {
        let (lo, hi) = wilson(90, 100);
        assert!(lo < 0.9 && 0.9 < hi);
        assert_eq!(wilson(10, 10).1, 1.0);
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
