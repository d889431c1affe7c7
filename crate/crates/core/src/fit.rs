//! Empirical parameterizations of the boundary mean `μ_{ν,*}`.
//!
//! Two models are fitted by unweighted least squares:
//!
//! * the gap at `ν = k`, `μ_{k,*} − k ≈ s·k + c + d/k` ([`DeltaFit`]);
//! * the scaled mean for `ν ∈ [0, k]`,
//!   `μ_{ν,*}/(k+1) ≈ a₀ + a₁x + a₂x² + a₃x³` with `x = ν/k`,
//!   `a₀ = ln 2 / 2` fixed and `aᵢ = αᵢ + βᵢ/(k+1)` ([`SeriesFit`]).

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lstsq;
use crate::scalar::{CompensatedSum, Scalar};
use crate::solver::{solve_lambda_star, MedianSolveResult};

/// One solved boundary point `(k, ν, μ_{ν,*})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MuSample<T> {
    pub k: u64,
    pub nu: u64,
    pub mu_star: T,
}

impl<T: Copy> From<&MedianSolveResult<T>> for MuSample<T> {
    fn from(r: &MedianSolveResult<T>) -> Self {
        Self {
            k: r.k,
            nu: r.nu,
            mu_star: r.mu_star,
        }
    }
}

/// `Δ_k = slope·k + intercept + inv_k_coefficient/k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaFit<T> {
    pub slope: T,
    pub intercept: T,
    pub inv_k_coefficient: T,
}

impl<T: Scalar> DeltaFit<T> {
    /// The published coefficients `0.155752 k + 0.57765625 − 1/(16k)`.
    pub fn published() -> Self {
        Self {
            slope: T::lit(0.155752),
            intercept: T::lit(0.57765625),
            inv_k_coefficient: T::lit(-1.0 / 16.0),
        }
    }

    pub fn zero() -> Self {
        Self {
            slope: T::zero(),
            intercept: T::zero(),
            inv_k_coefficient: T::zero(),
        }
    }
}

/// A series coefficient `constant + inv_k1/(k+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesCoefficient<T> {
    pub constant: T,
    pub inv_k1: T,
}

impl<T: Scalar> SeriesCoefficient<T> {
    pub fn new(constant: f64, inv_k1: f64) -> Self {
        Self {
            constant: T::lit(constant),
            inv_k1: T::lit(inv_k1),
        }
    }

    pub fn at(&self, k: u64) -> T {
        self.constant + self.inv_k1 / T::from_count(k + 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesFit<T> {
    /// Always `ln 2 / 2`.
    pub a0: T,
    pub a1: SeriesCoefficient<T>,
    pub a2: SeriesCoefficient<T>,
    pub a3: SeriesCoefficient<T>,
}

impl<T: Scalar> SeriesFit<T> {
    /// `a₁ ≈ 0.335 − 0.014/(k+1)`, `a₂ ≈ 0.356 + 0.055/(k+1)`,
    /// `a₃ ≈ 0.123 − 0.7/(k+1)`.
    pub fn published() -> Self {
        Self::from_coefficients([(0.335, -0.014), (0.356, 0.055), (0.123, -0.7)])
    }

    pub fn from_coefficients(c: [(f64, f64); 3]) -> Self {
        Self {
            a0: pinned_a0(),
            a1: SeriesCoefficient::new(c[0].0, c[0].1),
            a2: SeriesCoefficient::new(c[1].0, c[1].1),
            a3: SeriesCoefficient::new(c[2].0, c[2].1),
        }
    }

    /// `μ/(k+1)` predicted at `x = ν/k`.
    pub fn scaled_mean(&self, k: u64, nu: u64) -> T {
        let x = T::from_count(nu) / T::from_count(k);
        self.a0 + x * (self.a1.at(k) + x * (self.a2.at(k) + x * self.a3.at(k)))
    }
}

fn pinned_a0<T: Scalar>() -> T {
    T::LN_2() / T::lit(2.0)
}

pub fn delta_k_eval<T: Scalar>(fit: &DeltaFit<T>, k: u64) -> T {
    let k = T::from_count(k);
    fit.slope * k + fit.intercept + fit.inv_k_coefficient / k
}

/// Least-squares fit of `μ − k` on `{k, 1, 1/k}` from `(k, μ_{k,*})` pairs.
pub fn fit_delta_k<T: Scalar>(samples: &[(u64, T)]) -> Result<DeltaFit<T>> {
    let distinct: HashSet<u64> = samples.iter().map(|s| s.0).collect();
    if distinct.len() < 3 {
        return Err(Error::SingularSystem(format!(
            "need at least 3 distinct k values, got {}",
            distinct.len()
        )));
    }
    if distinct.contains(&0) {
        return Err(Error::InvalidParams("k must be positive".into()));
    }
    let rows: Vec<Vec<T>> = samples
        .iter()
        .map(|&(k, _)| {
            let k = T::from_count(k);
            vec![k, T::one(), k.recip()]
        })
        .collect();
    let rhs: Vec<T> = samples.iter().map(|&(k, mu)| mu - T::from_count(k)).collect();
    let c = lstsq::solve(&rows, &rhs)?;
    Ok(DeltaFit {
        slope: c[0],
        intercept: c[1],
        inv_k_coefficient: c[2],
    })
}

/// `(k+1)·(a₀ + a₁x + a₂x² + a₃x³)`, the unscaled mean prediction.
pub fn mu_series_eval<T: Scalar>(fit: &SeriesFit<T>, k: u64, nu: u64) -> T {
    T::from_count(k + 1) * fit.scaled_mean(k, nu)
}

/// Least squares of `μ/(k+1) − ln2/2` on
/// `{x, x², x³, x/(k+1), x²/(k+1), x³/(k+1)}`, `x = ν/k`.
pub fn fit_mu_series<T: Scalar>(samples: &[MuSample<T>]) -> Result<SeriesFit<T>> {
    if samples.iter().any(|s| s.k == 0) {
        return Err(Error::InvalidParams("k must be positive".into()));
    }
    let ks: HashSet<u64> = samples.iter().map(|s| s.k).collect();
    if ks.len() < 2 {
        return Err(Error::SingularSystem(
            "a single k cannot separate constant and 1/(k+1) terms".into(),
        ));
    }
    let ratios: HashSet<(u64, u64)> = samples
        .iter()
        .map(|s| {
            let g = gcd(s.nu, s.k);
            (s.nu / g, s.k / g)
        })
        .collect();
    if ratios.len() < 4 {
        return Err(Error::SingularSystem(format!(
            "need at least 4 distinct nu/k values, got {}",
            ratios.len()
        )));
    }

    let a0 = pinned_a0::<T>();
    let rows: Vec<Vec<T>> = samples
        .iter()
        .map(|s| {
            let x = T::from_count(s.nu) / T::from_count(s.k);
            let w = T::from_count(s.k + 1).recip();
            let (x2, x3) = (x * x, x * x * x);
            vec![x, x2, x3, x * w, x2 * w, x3 * w]
        })
        .collect();
    let rhs: Vec<T> = samples
        .iter()
        .map(|s| s.mu_star / T::from_count(s.k + 1) - a0)
        .collect();
    let c = lstsq::solve(&rows, &rhs)?;
    Ok(SeriesFit {
        a0,
        a1: SeriesCoefficient {
            constant: c[0],
            inv_k1: c[3],
        },
        a2: SeriesCoefficient {
            constant: c[1],
            inv_k1: c[4],
        },
        a3: SeriesCoefficient {
            constant: c[2],
            inv_k1: c[5],
        },
    })
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a.max(1)
    } else {
        gcd(b, a % b)
    }
}

/// A fitted model whose residuals are to be reported.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FitModel<T> {
    /// Residual `μ − k − Δ_k(k)` against `k`.
    DeltaK(DeltaFit<T>),
    /// Residual `μ/(k+1) − series(ν/k)` against `ν/k`.
    MuSeries(SeriesFit<T>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport<T> {
    /// `(abscissa, residual)`
    pub points: Vec<(T, T)>,
    pub max_abs: T,
    /// Mean residual.
    pub bias: T,
}

impl<T: Scalar> ResidualReport<T> {
    pub fn from_points(points: Vec<(T, T)>) -> Self {
        let max_abs = points.iter().map(|p| p.1.abs()).fold(T::zero(), T::max);
        let sum: CompensatedSum<T> = points.iter().map(|p| p.1).collect();
        let bias = if points.is_empty() {
            T::zero()
        } else {
            sum.value() / T::from_count(points.len() as u64)
        };
        Self {
            points,
            max_abs,
            bias,
        }
    }
}

pub fn residual_report<T: Scalar>(model: &FitModel<T>, samples: &[MuSample<T>]) -> ResidualReport<T> {
    let points = samples
        .iter()
        .map(|s| match model {
            FitModel::DeltaK(fit) => {
                let k = T::from_count(s.k);
                (k, s.mu_star - k - delta_k_eval(fit, s.k))
            }
            FitModel::MuSeries(fit) => {
                let x = T::from_count(s.nu) / T::from_count(s.k);
                (x, s.mu_star / T::from_count(s.k + 1) - fit.scaled_mean(s.k, s.nu))
            }
        })
        .collect();
    ResidualReport::from_points(points)
}

/// `(k, μ_{k,*})` for each `k`, solved in parallel.
pub fn delta_samples<T: Scalar>(ks: &[u64]) -> Result<Vec<MuSample<T>>> {
    ks.par_iter()
        .map(|&k| solve_lambda_star::<T>(k, k).map(|r| MuSample::from(&r)))
        .collect()
}

/// Solver samples at `ν = round(k·i/(points−1))`, `i = 0..points`, for each
/// `k` (duplicates removed).
pub fn series_samples<T: Scalar>(ks: &[u64], points: usize) -> Result<Vec<MuSample<T>>> {
    let mut grid = Vec::new();
    for &k in ks {
        let mut nus: Vec<u64> = (0..points)
            .map(|i| {
                let denom = (points.max(2) - 1) as u64;
                (k * i as u64 * 2 + denom) / (2 * denom)
            })
            .collect();
        nus.dedup();
        grid.extend(nus.into_iter().map(|nu| (k, nu)));
    }
    grid.par_iter()
        .map(|&(k, nu)| solve_lambda_star::<T>(k, nu).map(|r| MuSample::from(&r)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    #[test]
    fn published_delta_values() {
        let fit = DeltaFit::<f64>::published();
        assert!((delta_k_eval(&fit, 2) - 0.85791).abs() < 1e-5);
        assert!((delta_k_eval(&fit, 20) - 3.68957125).abs() < 1e-10);
        assert_eq!(delta_k_eval(&DeltaFit::<f64>::zero(), 17), 0.0);
    }

    #[test]
    fn delta_round_trip() {
        let truth = DeltaFit::<f64>::published();
        let samples: Vec<(u64, f64)> = (2..60)
            .map(|k| (k, k as f64 + delta_k_eval(&truth, k)))
            .collect();
        let fit = fit_delta_k(&samples).unwrap();
        assert!((fit.slope - truth.slope).abs() < 1e-10);
        assert!((fit.intercept - truth.intercept).abs() < 1e-10);
        assert!((fit.inv_k_coefficient - truth.inv_k_coefficient).abs() < 1e-10);
    }

    #[test]
    fn delta_needs_three_k() {
        let s = vec![(2, 3.0), (3, 4.0), (2, 3.1)];
        assert!(matches!(fit_delta_k(&s), Err(Error::SingularSystem(_))));
    }

    #[test]
    fn series_nu_zero_is_exact() {
        let fit = SeriesFit::<f64>::published();
        for k in [2, 10, 1000] {
            let v = mu_series_eval(&fit, k, 0);
            assert!((v - (k + 1) as f64 * LN_2 / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn truncated_series_is_flat() {
        let fit = SeriesFit::<f64>::from_coefficients([(0.0, 0.0); 3]);
        assert_eq!(mu_series_eval(&fit, 40, 40), 41.0 * LN_2 / 2.0);
    }

    #[test]
    fn series_round_trip() {
        let truth = SeriesFit::<f64>::published();
        let mut samples = Vec::new();
        for k in [20, 50, 100] {
            for nu in (0..=k).step_by(5) {
                samples.push(MuSample {
                    k,
                    nu,
                    mu_star: mu_series_eval(&truth, k, nu),
                });
            }
        }
        let fit = fit_mu_series(&samples).unwrap();
        for (a, b) in [(fit.a1, truth.a1), (fit.a2, truth.a2), (fit.a3, truth.a3)] {
            assert!((a.constant - b.constant).abs() < 1e-10);
            assert!((a.inv_k1 - b.inv_k1).abs() < 1e-10);
        }
        assert_eq!(fit.a0, LN_2 / 2.0);
    }

    #[test]
    fn series_single_k_is_singular() {
        let samples: Vec<MuSample<f64>> = (0..=10)
            .map(|nu| MuSample { k: 10, nu, mu_star: 1.0 + nu as f64 })
            .collect();
        assert!(matches!(fit_mu_series(&samples), Err(Error::SingularSystem(_))));
    }

    #[test]
    fn residuals_of_perfect_data() {
        let truth = DeltaFit::<f64>::published();
        let samples: Vec<MuSample<f64>> = (2..10)
            .map(|k| MuSample { k, nu: k, mu_star: k as f64 + delta_k_eval(&truth, k) })
            .collect();
        let r = residual_report(&FitModel::DeltaK(truth), &samples);
        assert!(r.max_abs < 1e-14);
        assert!(r.bias.abs() < 1e-14);
        assert_eq!(r.points.len(), 8);
    }

    #[test]
    fn series_grid_positions() {
        let s = series_samples::<f64>(&[20], 21).unwrap();
        let nus: Vec<u64> = s.iter().map(|m| m.nu).collect();
        assert_eq!(nus, (0..=20).collect::<Vec<_>>());
        let s = series_samples::<f64>(&[10], 21).unwrap();
        assert_eq!(s.len(), 11);
    }
}
