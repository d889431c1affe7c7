//! Boundary rates `λ_{ν,*}` at which `P(Y ≤ ν) = ½`.
//!
//! For `ν ≤ k` only the `n = 0` and `1 ≤ n ≤ k` pmf cases contribute to
//! `P(Y ≤ ν)`, and the double sum telescopes to
//!
//! ```text
//! e^{kλ} / 2 = Σ_{j=0}^{ν} C(ν, j) λ^j / j!
//! ```
//!
//! which is solved here in log form, `kλ − ln 2 − ln Σ = 0`. Above `k` the
//! solver falls back to root-finding on the cdf itself.

use serde::{Deserialize, Serialize};

use crate::dist::{self, kappa, CdfWalker, OrderKParams};
use crate::error::{Error, Result};
use crate::roots::find_increasing_root;
use crate::scalar::{CompensatedSum, Scalar};

/// Which equation produced a [`MedianSolveResult`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    /// The closed-form boundary equation (`ν ≤ k`).
    MedianEquation,
    /// Root of `−ln(2·P(Y ≤ ν))` computed from the recurrence.
    CdfBisection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MedianSolveResult<T> {
    pub k: u64,
    pub nu: u64,
    pub lambda_star: T,
    /// `κ · λ_{ν,*}`
    pub mu_star: T,
    /// Value of the solved equation at `lambda_star`.
    pub residual: T,
    pub iterations: u32,
    pub bracket: (T, T),
    pub method: SolveMethod,
}

/// `Σ_{j=0}^{ν} C(ν, j) λ^j / j!`, built from the term ratio
/// `λ(ν−j)/(j+1)²`.
pub fn median_equation_sum<T: Scalar>(nu: u64, lambda: T) -> T {
    let mut term = T::one();
    let mut acc = CompensatedSum::new();
    acc.add(term);
    for j in 0..nu {
        let j1 = T::from_count(j + 1);
        term = term * lambda * T::from_count(nu - j) / (j1 * j1);
        acc.add(term);
    }
    acc.value()
}

/// `1 + Σ_{s=1}^{ν} Σ_{j=1}^{s} C(s−1, j−1) λ^j / j!`: the scaled cumulative
/// mass `e^{kλ} P(Y ≤ ν)` summed pmf by pmf, before telescoping.
pub fn head_mass_by_pmf_sums<T: Scalar>(nu: u64, lambda: T) -> T {
    let mut acc = CompensatedSum::new();
    acc.add(T::one());
    for s in 1..=nu {
        // j = 1: C(s-1, 0) λ
        let mut term = lambda;
        acc.add(term);
        for j in 1..s {
            term = term * lambda * T::from_count(s - j) / T::from_count(j * (j + 1));
            acc.add(term);
        }
    }
    acc.value()
}

/// Log-form residual `kλ − ln 2 − ln Σ_{j=0}^{ν} C(ν,j) λ^j/j!`.
///
/// Increasing in `λ`; zero exactly at `λ_{ν,*}`. Only defined for `ν ≤ k`.
pub fn median_equation_gap<T: Scalar>(k: u64, nu: u64, lambda: T) -> Result<T> {
    if nu > k {
        return Err(Error::Domain(format!(
            "boundary equation holds only for nu <= k (nu = {nu}, k = {k})"
        )));
    }
    OrderKParams::new(k, lambda)?;
    Ok(gap_unchecked(k, nu, lambda))
}

fn gap_unchecked<T: Scalar>(k: u64, nu: u64, lambda: T) -> T {
    T::from_count(k) * lambda - T::LN_2() - median_equation_sum(nu, lambda).ln()
}

/// `−ln(2 · P(Y ≤ ν))` at rate `lambda`; same root as
/// [`median_equation_gap`] but valid for every `ν`.
pub fn cdf_gap<T: Scalar>(k: u64, nu: u64, lambda: T) -> Result<T> {
    let params = OrderKParams::new(k, lambda)?;
    Ok(cdf_gap_unchecked(&params, nu))
}

fn cdf_gap_unchecked<T: Scalar>(params: &OrderKParams<T>, nu: u64) -> T {
    let mut walker = CdfWalker::new(params);
    -(T::LN_2() + walker.ln_cdf_at(nu))
}

fn initial_bracket<T: Scalar>(k: u64, nu: u64) -> (T, T) {
    let ln2 = T::LN_2();
    let lo = ln2 / T::from_count(k);
    let a = T::lit(2.0) * ln2 / T::from_count(k.saturating_sub(nu).max(1));
    let b = T::lit(4.0) * T::from_count(nu + 1) / T::from_count(kappa(k));
    (lo, a.max(b))
}

fn validate_order(k: u64) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidParams("order k must be at least 1".into()));
    }
    Ok(())
}

/// `λ_{ν,*}` for any `ν ≥ 0`: the closed-form equation for `ν ≤ k`, cdf
/// root-finding above.
pub fn solve_lambda_star<T: Scalar>(k: u64, nu: u64) -> Result<MedianSolveResult<T>> {
    validate_order(k)?;
    if nu > k {
        return solve_lambda_star_by_cdf(k, nu);
    }
    let (lo, hi) = initial_bracket::<T>(k, nu);
    let tol = T::solver_tolerance() * (T::from_count(k) * lo).max(T::one());
    let root = find_increasing_root(|x| gap_unchecked(k, nu, x), lo, hi, tol)?;
    Ok(package(k, nu, root, SolveMethod::MedianEquation))
}

/// `λ_{ν,*}` from the cdf alone, for any `ν`. Independent of the
/// closed-form equation; used for `ν > k` and as its cross-check.
pub fn solve_lambda_star_by_cdf<T: Scalar>(k: u64, nu: u64) -> Result<MedianSolveResult<T>> {
    validate_order(k)?;
    let (lo, hi) = initial_bracket::<T>(k, nu);
    let tol = T::solver_tolerance() * (T::from_count(k) * lo).max(T::one());
    let root = find_increasing_root(
        |x| {
            let params = OrderKParams::new(k, x).expect("bracket stays positive");
            cdf_gap_unchecked(&params, nu)
        },
        lo,
        hi,
        tol,
    )?;
    Ok(package(k, nu, root, SolveMethod::CdfBisection))
}

fn package<T: Scalar>(
    k: u64,
    nu: u64,
    root: crate::roots::Root<T>,
    method: SolveMethod,
) -> MedianSolveResult<T> {
    MedianSolveResult {
        k,
        nu,
        lambda_star: root.x,
        mu_star: T::from_count(kappa(k)) * root.x,
        residual: root.fx,
        iterations: root.iterations,
        bracket: root.bracket,
        method,
    }
}

/// Iterated small-λ approximation of `λ_{ν,*}` for `ν < k`.
///
/// Rearranging the boundary equation gives
/// `λ = [ln 2 + (ln Σ(λ) − νλ)] / (k − ν)`; the bracket is small for large
/// `k`. Order 1 drops it (`ln 2/(k−ν)`), orders 2 and 3 substitute the
/// order-1 value into its Taylor expansion truncated at `λ²` and `λ³`. For
/// `ν = 1` this reproduces
/// `ln2/(k−1) − (ln2)²/(2(k−1)³) + (ln2)³/(3(k−1)⁴)`.
pub fn lambda_star_approx<T: Scalar>(k: u64, nu: u64, order: u32) -> Result<T> {
    if nu >= k {
        return Err(Error::Domain(format!(
            "iterated approximation needs nu < k (nu = {nu}, k = {k})"
        )));
    }
    if !(1..=3).contains(&order) {
        return Err(Error::Domain(format!("order must be 1, 2 or 3, got {order}")));
    }
    let gap = T::from_count(k - nu);
    let seed = T::LN_2() / gap;
    if order == 1 {
        return Ok(seed);
    }
    // Taylor coefficients of ln Σ(λ) = νλ + c2 λ² + c3 λ³ + …
    let v = T::from_count(nu);
    let s1 = v;
    let s2 = v * (v - T::one()) / T::lit(4.0);
    let s3 = v * (v - T::one()) * (v - T::lit(2.0)) / T::lit(36.0);
    let c2 = s2 - s1 * s1 / T::lit(2.0);
    let c3 = s3 - s1 * s2 + s1 * s1 * s1 / T::lit(3.0);

    let mut correction = c2 * seed * seed;
    if order == 3 {
        correction = correction + c3 * seed * seed * seed;
    }
    Ok(seed + correction / gap)
}

/// Relative offset used by [`verify_boundary`] to probe either side of
/// `λ_{ν,*}`.
pub const BOUNDARY_PROBE: f64 = 1e-9;

/// True iff `P(Y ≤ ν) = ½` within 10⁻⁹ at `lambda_star` and the median
/// steps from `ν` to `ν + 1` across `lambda_star ± 10⁻⁹·max(1, λ)`.
pub fn verify_boundary<T: Scalar>(result: &MedianSolveResult<T>) -> bool {
    let probe = |lambda: T| OrderKParams::new(result.k, lambda).ok();
    let Some(at) = probe(result.lambda_star) else {
        return false;
    };
    let mut walker = CdfWalker::new(&at);
    let cdf = walker.ln_cdf_at(result.nu).exp();
    if (cdf - T::lit(0.5)).abs() > T::lit(1e-9) {
        return false;
    }
    let delta = T::lit(BOUNDARY_PROBE) * result.lambda_star.max(T::one());
    let below_ok = match probe(result.lambda_star - delta) {
        Some(p) => dist::median(&p) == result.nu,
        None => true,
    };
    let above_ok = match probe(result.lambda_star + delta) {
        Some(p) => dist::median(&p) == result.nu + 1,
        None => false,
    };
    below_ok && above_ok
}
