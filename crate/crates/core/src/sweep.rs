//! Integer-mean sweeps and the large-λ median/mode formulas.
//!
//! Pinning the mean to an integer `n` (so `λ = n/κ`), the median is
//! `n − ⌊(k+4)/8⌋` for `n ≥ κ` and the mode is `n − ⌊(3k+5)/8⌋` for
//! `n ≥ 2κ`. Below `κ` the first formula is used as a reference line
//! ("base median") and the deviation `(ν_base − ν)/k` is recorded as a
//! function of `n/k`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::{self, kappa, OrderKParams};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::solver::{solve_lambda_star, MedianSolveResult};

/// `n − ⌊(k+4)/8⌋`. Negative for small `n`.
pub fn base_median(n: u64, k: u64) -> i64 {
    n as i64 - ((k + 4) / 8) as i64
}

/// `n − ⌊(3k+5)/8⌋`, only claimed for `n ≥ 2κ`.
pub fn mode_conjecture(n: u64, k: u64) -> Result<u64> {
    if k == 0 {
        return Err(Error::InvalidParams("order k must be at least 1".into()));
    }
    let two_kappa = 2 * kappa(k);
    if n < two_kappa {
        return Err(Error::Domain(format!(
            "mode formula is only claimed for n >= 2*kappa = {two_kappa}, got n = {n}"
        )));
    }
    Ok(n - (3 * k + 5) / 8)
}

/// The rate `n/κ` that pins the mean to `n`.
pub fn rate_for_mean<T: Scalar>(n: u64, k: u64) -> T {
    T::from_count(n) / T::from_count(kappa(k))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord<T> {
    pub k: u64,
    /// Pinned mean; `λ = n/κ`.
    pub n: u64,
    pub median: u64,
    pub base_median: i64,
    /// `(ν_base − ν)/k`
    pub scaled_diff: T,
    /// `n/k`
    pub scaled_mean: T,
}

impl<T> SweepRecord<T> {
    /// `ν_base − ν`. Nonnegative for `n ≥ κ`; can dip below zero just
    /// above the left edge for moderate `k`.
    pub fn gap(&self) -> i64 {
        self.base_median - self.median as i64
    }
}

/// Records whose base median falls below the computed median.
pub fn sweep_violations<T: Copy>(records: &[SweepRecord<T>]) -> Vec<SweepRecord<T>> {
    records.iter().filter(|r| r.gap() < 0).copied().collect()
}

/// Smallest integer mean with a nonzero median, `⌈(k+1) ln2 / 2⌉`.
pub fn default_n_lo(k: u64) -> u64 {
    ((k + 1) as f64 * std::f64::consts::LN_2 / 2.0).ceil() as u64
}

/// One [`SweepRecord`] for every integer mean in `n_lo..=n_hi`
/// (`n_lo` defaults to [`default_n_lo`]). Records are in ascending `n`.
pub fn sweep_base_median_diff<T: Scalar>(
    k: u64,
    n_lo: Option<u64>,
    n_hi: u64,
) -> Result<Vec<SweepRecord<T>>> {
    if k == 0 {
        return Err(Error::InvalidParams("order k must be at least 1".into()));
    }
    let first = default_n_lo(k);
    let n_lo = n_lo.unwrap_or(first);
    if n_lo < first {
        return Err(Error::Domain(format!(
            "n_lo = {n_lo} is below {first}, where the median is still zero"
        )));
    }
    if n_hi < n_lo {
        return Err(Error::Domain(format!("empty sweep: n_hi = {n_hi} < n_lo = {n_lo}")));
    }
    (n_lo..=n_hi)
        .into_par_iter()
        .map(|n| sweep_point(k, n))
        .collect()
}

fn sweep_point<T: Scalar>(k: u64, n: u64) -> Result<SweepRecord<T>> {
    let params = OrderKParams::new(k, rate_for_mean::<T>(n, k))?;
    let median = dist::median(&params);
    let base = base_median(n, k);
    let kf = T::from_count(k);
    let diff = T::from_i64(base - median as i64).expect("small integer");
    Ok(SweepRecord {
        k,
        n,
        median,
        base_median: base,
        scaled_diff: diff / kf,
        scaled_mean: T::from_count(n) / kf,
    })
}

/// Boundary solutions for `ν = 0..=nu_hi` at fixed `k`, ascending in `ν`.
pub fn sweep_nu_mu<T: Scalar>(k: u64, nu_hi: u64) -> Result<Vec<MedianSolveResult<T>>> {
    (0..=nu_hi)
        .into_par_iter()
        .map(|nu| solve_lambda_star::<T>(k, nu))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_median_examples() {
        assert_eq!(base_median(30, 5), 29);
        assert_eq!(base_median(0, 1), 0);
        assert_eq!(base_median(100, 20), 97);
        assert_eq!(base_median(0, 4), -1);
    }

    #[test]
    fn mode_conjecture_examples() {
        assert_eq!(mode_conjecture(30, 5).unwrap(), 28);
        assert_eq!(mode_conjecture(12, 2).unwrap(), 11);
        assert_eq!(mode_conjecture(42, 6).unwrap(), 40);
        assert!(matches!(mode_conjecture(29, 5), Err(Error::Domain(_))));
    }

    #[test]
    fn mode_conjecture_matches_argmax() {
        let params = OrderKParams::new(6, 42.0 / 21.0).unwrap();
        assert!(dist::mode(&params).contains(40));
    }

    #[test]
    fn sweep_at_lambda_two_is_exact() {
        let r = sweep_base_median_diff::<f64>(5, Some(30), 30).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].median, 29);
        assert_eq!(r[0].scaled_diff, 0.0);
        assert_eq!(r[0].scaled_mean, 6.0);
    }

    #[test]
    fn sweep_default_start_has_nonzero_median() {
        for k in [1, 2, 7, 100, 333] {
            let n = default_n_lo(k);
            let r = sweep_base_median_diff::<f64>(k, None, n).unwrap();
            assert!(r[0].median >= 1, "k={k}");
            if n > 1 {
                let below = OrderKParams::new(k, rate_for_mean::<f64>(n - 1, k)).unwrap();
                assert_eq!(dist::median(&below), 0, "k={k}");
            }
        }
    }

    #[test]
    fn sweep_rejects_bad_ranges() {
        assert!(sweep_base_median_diff::<f64>(100, Some(3), 50).is_err());
        assert!(sweep_base_median_diff::<f64>(100, None, 10).is_err());
    }

    #[test]
    fn sweep_is_ordered_and_gap_nonnegative() {
        let r = sweep_base_median_diff::<f64>(30, None, 2 * kappa(30)).unwrap();
        assert!(r.windows(2).all(|w| w[1].n == w[0].n + 1));
        let bad = sweep_violations(&r);
        assert!(bad.iter().all(|v| v.n < kappa(30)), "{bad:?}");
        // ν = 17 at n = 20 (checked with 50-digit arithmetic), one above base.
        assert!(bad.iter().any(|v| v.n == 20 && v.median == 17));
        assert!(r.windows(2).all(|w| w[1].median >= w[0].median));
    }

    #[test]
    fn nu_mu_sweep_starts_at_exact_value() {
        let s = sweep_nu_mu::<f64>(20, 40).unwrap();
        assert_eq!(s.len(), 41);
        assert!((s[0].mu_star - 21.0 * std::f64::consts::LN_2 / 2.0).abs() < 1e-12);
        assert!((s[0].mu_star - 7.27805).abs() < 1e-5);
        assert!(s.windows(2).all(|w| w[1].mu_star > w[0].mu_star));
    }
}
