//! Bracketed scalar root finding: geometric bracket expansion, bisection to
//! a coarse relative width, then Brent's method.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Maximum number of times the upper end of a bracket is doubled.
pub const MAX_EXPANSIONS: u32 = 60;

/// Relative bracket width at which bisection hands over to Brent.
const BISECTION_HANDOVER: f64 = 1e-3;

const MAX_ITERATIONS: u32 = 500;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root<T> {
    pub x: T,
    pub fx: T,
    /// Function evaluations spent after the bracket was established.
    pub iterations: u32,
    /// Initial sign-change bracket.
    pub bracket: (T, T),
}

/// Finds a root of an increasing-through-zero `f` on `(lo, ∞)`.
///
/// `f(lo)` must be `≤ 0`, or within `tol` of zero, in which case `lo` is
/// returned. The upper end starts at `hi` and is doubled until
/// `f(hi) > 0`. Iteration stops once `|f(x)| ≤ tol` or the bracket shrinks
/// to a few ulps.
pub fn find_increasing_root<T, F>(mut f: F, lo: T, hi: T, tol: T) -> Result<Root<T>>
where
    T: Scalar,
    F: FnMut(T) -> T,
{
    let f_lo = f(lo);
    if f_lo.abs() <= tol {
        return Ok(Root {
            x: lo,
            fx: f_lo,
            iterations: 0,
            bracket: (lo, lo),
        });
    }
    let failure = |lo: T, hi: T, expansions| Error::BracketFailure {
        expansions,
        lo: lo.to_f64().unwrap_or(f64::NAN),
        hi: hi.to_f64().unwrap_or(f64::NAN),
    };
    if !(f_lo < T::zero()) {
        return Err(failure(lo, hi, 0));
    }

    let mut hi = hi.max(lo);
    let mut f_hi = f(hi);
    let mut expansions = 0;
    while !(f_hi > T::zero()) {
        if expansions == MAX_EXPANSIONS || !hi.is_finite() {
            return Err(failure(lo, hi, expansions));
        }
        hi = hi * T::lit(2.0);
        f_hi = f(hi);
        expansions += 1;
    }
    if f_hi <= tol {
        // Landed within tolerance on the doubling grid.
        return Ok(Root {
            x: hi,
            fx: f_hi,
            iterations: 0,
            bracket: (lo, hi),
        });
    }

    let bracket = (lo, hi);
    let (mut a, mut b, mut fa, mut fb) = (lo, hi, f_lo, f_hi);
    let mut iterations = 0;

    while b - a > T::lit(BISECTION_HANDOVER) * b && iterations < MAX_ITERATIONS {
        let mid = a + (b - a) / T::lit(2.0);
        let fm = f(mid);
        iterations += 1;
        if fm.abs() <= tol {
            return Ok(Root {
                x: mid,
                fx: fm,
                iterations,
                bracket,
            });
        }
        if fm < T::zero() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
            fb = fm;
        }
    }

    let (x, fx, brent_iterations) = brent(&mut f, a, b, fa, fb, tol, MAX_ITERATIONS - iterations);
    Ok(Root {
        x,
        fx,
        iterations: iterations + brent_iterations,
        bracket,
    })
}

/// Brent's method on a bracket with `fa·fb < 0`.
fn brent<T, F>(f: &mut F, a: T, b: T, fa: T, fb: T, tol: T, max_iter: u32) -> (T, T, u32)
where
    T: Scalar,
    F: FnMut(T) -> T,
{
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let half = T::lit(0.5);
    let eps = T::epsilon();

    let (mut a, mut b, mut fa, mut fb) = (a, b, fa, fb);
    let (mut c, mut fc) = (b, fb);
    let mut d = b - a;
    let mut e = d;

    for iter in 1..=max_iter {
        if (fb > T::zero()) == (fc > T::zero()) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol_x = two * eps * b.abs();
        let xm = half * (c - b);
        if fb.abs() <= tol || xm.abs() <= tol_x {
            return (b, fb, iter);
        }
        if e.abs() >= tol_x && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = two * xm * s;
                q = T::one() - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (two * xm * qq * (qq - r) - (b - a) * (r - T::one()));
                q = (qq - T::one()) * (r - T::one()) * (s - T::one());
            }
            if p > T::zero() {
                q = -q;
            }
            p = p.abs();
            let min1 = three * xm * q - (tol_x * q).abs();
            let min2 = (e * q).abs();
            if two * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b = if d.abs() > tol_x {
            b + d
        } else {
            b + tol_x.copysign(xm)
        };
        fb = f(b);
    }
    (b, fb, max_iter)
}
