//! One-dimensional search primitives and finite differences.

use crate::Scalar;

/// `n` evenly spaced points on `[lo, hi]`; a single point returns `lo`.
pub fn linspace<S: Scalar>(lo: S, hi: S, n: usize) -> Vec<S> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / S::lit((n - 1) as f64);
            (0..n)
                .map(|i| if i + 1 == n { hi } else { lo + step * S::lit(i as f64) })
                .collect()
        }
    }
}

/// Width of one cell of an `n`-point grid on `[lo, hi]`.
pub fn grid_cell<S: Scalar>(lo: S, hi: S, n: usize) -> S {
    if n < 2 {
        S::zero()
    } else {
        (hi - lo) / S::lit((n - 1) as f64)
    }
}

/// Result of an exhaustive grid scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridMin<S> {
    pub index: usize,
    pub x: S,
    pub value: S,
    /// A grid point not adjacent to `index` attains the minimum within `tie_tol`.
    pub tie: bool,
}

/// Grid argmin with ties resolved toward the smallest abscissa.
pub fn grid_argmin<S: Scalar>(grid: &[S], values: &[S], tie_tol: S) -> GridMin<S> {
    assert!(!grid.is_empty() && grid.len() == values.len());
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        // strict comparison keeps the first (smallest) point on exact ties
        if v < values[best] || values[best].is_nan() {
            best = i;
        }
    }
    let vmin = values[best];
    let tie = values.iter().enumerate().any(|(i, &v)| {
        (i + 1 < best || i > best + 1) && v <= vmin + tie_tol
    });
    GridMin {
        index: best,
        x: grid[best],
        value: vmin,
        tie,
    }
}

/// Golden-section search for a minimum of `f` on `[lo, hi]`.
/// Returns `(x, f(x), iterations)`.
pub fn golden_section<S: Scalar, F: FnMut(S) -> S>(
    mut f: F,
    mut lo: S,
    mut hi: S,
    tol: S,
    max_iter: usize,
) -> (S, S, usize) {
    let inv_phi = (S::lit(5.0).sqrt() - S::one()) / S::two();
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut it = 0;
    while hi - lo > tol && it < max_iter {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
        it += 1;
    }
    if f1 <= f2 {
        (x1, f1, it)
    } else {
        (x2, f2, it)
    }
}

/// Bisection for a sign change of `g` on `[lo, hi]` with `g(lo) < 0 < g(hi)`
/// or the reverse. Stops when the bracket is narrower than `tol`.
pub fn bisect<S: Scalar, G: FnMut(S) -> S>(
    mut g: G,
    mut lo: S,
    mut hi: S,
    tol: S,
    max_iter: usize,
) -> (S, usize) {
    let mut g_lo = g(lo);
    let mut it = 0;
    while hi - lo > tol && it < max_iter {
        let mid = lo + (hi - lo) * S::half();
        if mid <= lo || mid >= hi {
            break;
        }
        let g_mid = g(mid);
        if g_mid == S::zero() {
            return (mid, it + 1);
        }
        if (g_mid < S::zero()) == (g_lo < S::zero()) {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
        it += 1;
    }
    (lo + (hi - lo) * S::half(), it)
}

/// Central first difference.
#[inline]
pub fn central_diff<S: Scalar, F: FnMut(S) -> S>(mut f: F, x: S, h: S) -> S {
    (f(x + h) - f(x - h)) / (S::two() * h)
}

/// Central second difference.
#[inline]
pub fn second_diff<S: Scalar, F: FnMut(S) -> S>(mut f: F, x: S, h: S) -> S {
    (f(x + h) - S::two() * f(x) + f(x - h)) / (h * h)
}

/// Smallest eigenvalue of the symmetric 2x2 matrix `[[a, b], [b, d]]`.
pub fn min_eigen_sym2<S: Scalar>(a: S, b: S, d: S) -> S {
    let mean = (a + d) * S::half();
    let half_diff = (a - d) * S::half();
    mean - (half_diff * half_diff + b * b).sqrt()
}
