//! Dense least squares for the handful-of-columns fits in [`crate::fit`].

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Columns whose singular value falls below this fraction of the largest
/// one (after normalization) are treated as linearly dependent.
const RANK_TOLERANCE: f64 = 1e-10;

/// Minimizes `‖A x − b‖₂` for row-major `rows` (each of length `cols`).
///
/// Columns are normalized to unit norm before the SVD so that the rank
/// test is scale-free. The decomposition runs in `f64` whatever `T` is.
pub fn solve<T: Scalar>(rows: &[Vec<T>], rhs: &[T]) -> Result<Vec<T>> {
    let m = rows.len();
    let n = rows.first().map_or(0, Vec::len);
    if m != rhs.len() {
        return Err(Error::SingularSystem(format!(
            "{m} rows but {} right-hand sides",
            rhs.len()
        )));
    }
    if n == 0 || m < n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::SingularSystem(format!(
            "{m} observations for {n} unknowns"
        )));
    }

    let to_f64 = |v: T| v.to_f64().unwrap_or(f64::NAN);
    let mut a = DMatrix::from_fn(m, n, |i, j| to_f64(rows[i][j]));
    let b = DVector::from_iterator(m, rhs.iter().map(|&v| to_f64(v)));
    let mut norms = Vec::with_capacity(n);
    for mut col in a.column_iter_mut() {
        let norm = col.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::SingularSystem("zero or non-finite column in design matrix".into()));
        }
        col /= norm;
        norms.push(norm);
    }

    let svd = a.svd(true, true);
    let max_sv = svd.singular_values.max();
    if svd.singular_values.min() <= RANK_TOLERANCE * max_sv {
        return Err(Error::SingularSystem(
            "design matrix is (numerically) rank deficient".into(),
        ));
    }
    let x = svd
        .solve(&b, 0.0)
        .map_err(|e| Error::SingularSystem(e.to_string()))?;
    Ok(x.iter().zip(norms).map(|(&xi, s)| T::lit(xi / s)).collect())
}
