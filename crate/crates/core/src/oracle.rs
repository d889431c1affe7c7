//! Ground truth that shares no code path with [`crate::dist`]: the pmf by
//! direct power-series exponentiation of the generating function, and a
//! seeded Monte Carlo sampler built from `Y = Σ_{i=1}^{k} i·N_i`,
//! `N_i ~ Poisson(λ)` independent.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::dist::{OrderKParams, PmfTable};
use crate::error::{Error, Result};
use crate::scalar::{CompensatedSum, Scalar};

/// Largest `kλ` the convolution oracle accepts.
pub const ORACLE_MAX_K_LAMBDA: f64 = 50.0;
/// Largest table length index the convolution oracle accepts.
pub const ORACLE_MAX_N: u64 = 5000;

/// Coefficients of `e^{-kλ} · exp(λ(x + … + x^k))` through `x^{n_max}`.
///
/// `exp(P) = Σ_m P^m/m!` with `P^m/m!` built by repeated truncated Cauchy
/// products. `P^m` has no terms below degree `m`, so summing `m ≤ n_max`
/// is exact in the truncated ring; there is no further series truncation.
pub fn pmf_by_convolution<T: Scalar>(params: &OrderKParams<T>, n_max: u64) -> Result<PmfTable<T>> {
    if params.k_lambda() > T::lit(ORACLE_MAX_K_LAMBDA) || n_max > ORACLE_MAX_N {
        return Err(Error::GuardExceeded(format!(
            "convolution oracle limited to k*lambda <= {ORACLE_MAX_K_LAMBDA} and n_max <= {ORACLE_MAX_N}"
        )));
    }
    let len = n_max as usize + 1;
    let k = params.k() as usize;
    let lambda = params.lambda();

    let mut total: Vec<CompensatedSum<T>> = vec![CompensatedSum::new(); len];
    total[0].add(T::one());
    // term = P^m / m!, nonzero from degree m on
    let mut term = vec![T::zero(); len];
    term[0] = T::one();
    for m in 1..len {
        let inv_m = T::from_count(m as u64).recip();
        let mut next = vec![T::zero(); len];
        for (d, slot) in next.iter_mut().enumerate().skip(m) {
            let lo = d.saturating_sub(k).max(m - 1);
            let acc: T = term[lo..d].iter().copied().sum();
            *slot = acc * lambda * inv_m;
        }
        term = next;
        if term.iter().all(|v| *v == T::zero()) {
            break;
        }
        for (t, v) in total.iter_mut().zip(&term).skip(m) {
            t.add(*v);
        }
    }
    let mantissas = total.into_iter().map(|c| c.value()).collect();
    Ok(PmfTable::from_mantissas(*params, mantissas, -params.k_lambda()))
}

/// Independent draws of `Y` from a seeded generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch<T> {
    pub params: OrderKParams<T>,
    pub seed: u64,
    pub values: Vec<u64>,
    pub count: usize,
}

/// `count` draws of `Σ i·N_i`; identical `(params, seed, count)` give
/// identical values.
pub fn sample<T: Scalar>(params: &OrderKParams<T>, seed: u64, count: usize) -> Result<SampleBatch<T>> {
    if count == 0 {
        return Err(Error::InvalidParams("sample count must be at least 1".into()));
    }
    let lambda = params.lambda().to_f64().expect("finite rate");
    let poisson = Poisson::new(lambda)
        .map_err(|e| Error::InvalidParams(format!("poisson rate {lambda}: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..count)
        .map(|_| {
            (1..=params.k())
                .map(|i| i * poisson.sample(&mut rng) as u64)
                .sum()
        })
        .collect();
    Ok(SampleBatch {
        params: *params,
        seed,
        values,
        count,
    })
}

/// Fraction of draws `≤ n`; `0` for any `n < 0`.
pub fn empirical_cdf<T>(batch: &SampleBatch<T>, n: i64) -> f64 {
    if n < 0 || batch.values.is_empty() {
        return 0.0;
    }
    let below = batch.values.iter().filter(|&&v| v <= n as u64).count();
    below as f64 / batch.values.len() as f64
}

/// Smallest `n` with empirical cdf `≥ ½`.
pub fn empirical_median<T>(batch: &SampleBatch<T>) -> u64 {
    let mut sorted = batch.values.clone();
    sorted.sort_unstable();
    // smallest v with #{x ≤ v} ≥ len/2
    let need = sorted.len().div_ceil(2);
    sorted[need.max(1) - 1]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquaredOutcome {
    pub statistic: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
}

/// Minimum expected count per pooled bin.
const MIN_EXPECTED: f64 = 5.0;

/// Pearson goodness-of-fit of a sample against a pmf table.
///
/// Adjacent indices are pooled until each bin expects at least five draws;
/// the last bin absorbs the whole upper tail, including mass beyond the
/// table.
pub fn chi_squared_gof<T: Scalar>(batch: &SampleBatch<T>, table: &PmfTable<T>) -> ChiSquaredOutcome {
    let total = batch.values.len() as f64;
    let n_max = table.n_max() as usize;
    let mut observed = vec![0u64; n_max + 2];
    for &v in &batch.values {
        observed[(v as usize).min(n_max + 1)] += 1;
    }
    let probs: Vec<f64> = table
        .probabilities()
        .into_iter()
        .map(|p| p.to_f64().unwrap_or(0.0))
        .collect();

    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut exp_acc, mut obs_acc) = (0.0, 0.0);
    let mut mass_used = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        exp_acc += total * p;
        obs_acc += observed[i] as f64;
        mass_used += p;
        if exp_acc >= MIN_EXPECTED && total * (1.0 - mass_used) >= MIN_EXPECTED {
            bins.push((exp_acc, obs_acc));
            exp_acc = 0.0;
            obs_acc = 0.0;
        }
    }
    // upper tail
    exp_acc += total * (1.0 - mass_used).max(0.0);
    obs_acc += observed[n_max + 1] as f64;
    bins.push((exp_acc, obs_acc));

    let statistic: f64 = bins.iter().map(|(e, o)| (o - e) * (o - e) / e).sum();
    let dof = bins.len().saturating_sub(1).max(1);
    let p_value = ChiSquared::new(dof as f64)
        .map(|d| d.sf(statistic))
        .unwrap_or(0.0);
    ChiSquaredOutcome {
        statistic,
        degrees_of_freedom: dof,
        p_value,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{mean, pmf_combinatorial, variance};

    fn p(k: u64, lambda: f64) -> OrderKParams<f64> {
        OrderKParams::new(k, lambda).unwrap()
    }

    #[test]
    fn standard_poisson_coefficients() {
        let t = pmf_by_convolution(&p(1, 1.0), 5).unwrap();
        let e = (-1.0f64).exp();
        let expected = [e, e, e / 2.0, e / 6.0, e / 24.0, e / 120.0];
        for (n, want) in expected.iter().enumerate() {
            assert!((t.probability(n as u64).unwrap() - want).abs() < 1e-16);
        }
    }

    #[test]
    fn constant_term_only() {
        let t = pmf_by_convolution(&p(3, 0.2), 0).unwrap();
        assert_eq!(t.n_max(), 0);
        assert!((t.probability(0).unwrap() - (-0.6f64).exp()).abs() < 1e-16);
    }

    #[test]
    fn agrees_with_closed_form_small() {
        let params = p(2, 0.5);
        let t = pmf_by_convolution(&params, 4).unwrap();
        for n in 0..=4 {
            let a = t.probability(n).unwrap();
            let b = pmf_combinatorial(&params, n).unwrap();
            assert!((a - b).abs() <= 1e-13 * b, "n={n}");
        }
    }

    #[test]
    fn guard() {
        assert!(pmf_by_convolution(&p(10, 5.1), 10).is_err());
        assert!(pmf_by_convolution(&p(10, 1.0), 5001).is_err());
    }

    #[test]
    fn sampling_is_reproducible() {
        let params = p(4, 0.8);
        let a = sample(&params, 42, 1000).unwrap();
        let b = sample(&params, 42, 1000).unwrap();
        let c = sample(&params, 43, 1000).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.values, c.values);
        assert_eq!(a.count, 1000);
        assert!(sample(&params, 1, 0).is_err());
    }

    #[test]
    fn sample_moments() {
        let params = p(5, 0.4);
        let n = 1_000_000;
        let batch = sample(&params, 7, n).unwrap();
        let xs: Vec<f64> = batch.values.iter().map(|&v| v as f64).collect();
        let m = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64;
        let mu = mean(&params);
        let sigma2 = variance(&params);
        assert!((m - mu).abs() < 3.0 * (sigma2 / n as f64).sqrt(), "mean {m}");
        // Var(s²) ≈ (μ₄ − σ⁴)/n; μ₄ = 3σ⁴ + κ₄ with κ₄ = λ Σ i⁴.
        let kappa4 = 0.4 * (1..=5).map(|i: u64| (i * i * i * i) as f64).sum::<f64>();
        let se = ((2.0 * sigma2 * sigma2 + kappa4) / n as f64).sqrt();
        assert!((var - sigma2).abs() < 5.0 * se, "variance {var}");
    }

    #[test]
    fn empirical_cdf_edges() {
        let batch = sample(&p(3, 1.0), 1, 500).unwrap();
        let max = *batch.values.iter().max().unwrap() as i64;
        assert_eq!(empirical_cdf(&batch, max), 1.0);
        assert_eq!(empirical_cdf(&batch, -1), 0.0);
    }

    #[test]
    fn empirical_median_of_known_values() {
        let mut batch = sample(&p(1, 1.0), 1, 4).unwrap();
        batch.values = vec![5, 1, 3, 9];
        assert_eq!(empirical_median(&batch), 3);
        batch.values = vec![5, 1, 3];
        assert_eq!(empirical_median(&batch), 3);
    }
}
