//! Real roots of a scalar function by sign-change scanning and bisection.

use crate::error::{Error, Result};

/// Bisects a bracket `[lo, hi]` with `f(lo)·f(hi) ≤ 0` down to width `tol`.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut f_lo = f(lo);
    if f_lo == 0.0 {
        return lo;
    }
    if f(hi) == 0.0 {
        return hi;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// All roots of `f` on `[lo, hi]` detected as sign changes on a uniform grid of `intervals`
/// cells, each refined by bisection to `tol`. Roots are returned in increasing order.
pub fn scan_roots<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    intervals: usize,
    tol: f64,
) -> Result<Vec<f64>> {
    if lo >= hi || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "empty search interval [{lo}, {hi}]"
        )));
    }
    if intervals == 0 {
        return Err(Error::InvalidArgument(
            "scan needs at least one interval".into(),
        ));
    }
    let width = (hi - lo) / intervals as f64;
    let node = |i: usize| {
        if i == intervals {
            hi
        } else {
            lo + i as f64 * width
        }
    };

    let mut roots = Vec::new();
    let mut x0 = node(0);
    let mut f0 = f(x0);
    if f0 == 0.0 {
        roots.push(x0);
    }
    for i in 1..=intervals {
        let x1 = node(i);
        let f1 = f(x1);
        if f1 == 0.0 {
            roots.push(x1);
        } else if f0 != 0.0 && f0.is_finite() && f1.is_finite() && (f0 < 0.0) != (f1 < 0.0) {
            roots.push(bisect(&f, x0, x1, tol));
        }
        x0 = x1;
        f0 = f1;
    }
    Ok(roots)
}
