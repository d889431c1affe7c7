//! Poisson distribution of order `k`.
//!
//! The order-`k` distribution is the compound Poisson law with generating
//! function `exp(-kλ)·exp(λ(x + … + x^k))`: `Y = Σ_{i=1}^{k} i·N_i` with
//! independent `N_i ~ Poisson(λ)`. Its mean is `κλ` with `κ = k(k+1)/2`.
//!
//! The crate provides
//!
//! * [`dist`]: pmf (recurrence and closed form), cdf, moments, median, mode;
//! * [`solver`]: the rates `λ_{ν,*}` at which the median steps from `ν` to
//!   `ν + 1`, with iterated closed-form approximations;
//! * [`fit`] and [`sweep`]: least-squares scaling laws for `μ_{ν,*}` and
//!   the integer-mean sweeps behind them;
//! * [`oracle`]: an independent convolution pmf and Monte Carlo sampler.
//!
//! All numerics are generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix `f64`.
//!
//! ```
//! use poik::{dist, solver, Params};
//!
//! let params = Params::new(5, 2.0).unwrap();
//! assert_eq!(dist::median(&params), 29);
//!
//! let boundary = solver::solve_lambda_star::<f64>(5, 0).unwrap();
//! assert!((boundary.lambda_star - std::f64::consts::LN_2 / 5.0).abs() < 1e-15);
//! ```

pub mod dist;
pub mod error;
pub mod fit;
pub mod lstsq;
pub mod oracle;
pub mod roots;
pub mod scalar;
pub mod solver;
pub mod sweep;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Params = dist::OrderKParams<f64>;
pub type Table = dist::PmfTable<f64>;
pub type Modes = dist::ModeSet<f64>;
pub type SolveResult = solver::MedianSolveResult<f64>;
pub type Delta = fit::DeltaFit<f64>;
pub type Series = fit::SeriesFit<f64>;
pub type Residuals = fit::ResidualReport<f64>;
pub type Record = sweep::SweepRecord<f64>;
pub type Batch = oracle::SampleBatch<f64>;
