//! Scalar minimisation used by follower and leader problems.

use crate::error::{Error, Result};
use crate::numeric::{bisect, golden_section, grid_argmin, grid_cell, linspace};
use crate::Scalar;

/// A one-dimensional minimiser.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Optimum<S> {
    pub x: S,
    pub value: S,
    /// The optimum sits at (or within one scan cell of) a search bound.
    pub boundary: bool,
    /// `|f'(x)|` for interior optima.
    pub residual: S,
    pub evaluations: usize,
    /// Leader scans only: the objective was flat over non-adjacent grid points.
    pub tie: bool,
}

fn sign_changes<S: Scalar>(slopes: &[S]) -> (usize, Option<usize>, bool) {
    // (count, index i of the first change between i and the next nonzero, first change is - to +)
    let mut count = 0;
    let mut first = None;
    let mut rising = false;
    let mut prev: Option<(usize, bool)> = None;
    for (i, &d) in slopes.iter().enumerate() {
        if d == S::zero() || d.is_nan() {
            continue;
        }
        let pos = d > S::zero();
        if let Some((j, was_pos)) = prev {
            if pos != was_pos {
                count += 1;
                if first.is_none() {
                    first = Some(j);
                    rising = pos;
                }
            }
        }
        prev = Some((i, pos));
    }
    (count, first, rising)
}

/// Minimises a smooth function whose slope is available in closed form.
///
/// The slope is scanned on `n` points; one falling-to-rising sign change is
/// refined by bisection on the first-order condition. No sign change falls back
/// to golden-section search and flags a boundary optimum. Any other pattern is
/// reported as a non-unimodal objective.
pub fn minimize_by_slope<S: Scalar, F: Fn(S) -> (S, S)>(
    which: &'static str,
    value_and_slope: F,
    lo: S,
    hi: S,
    n: usize,
    root_tol: S,
) -> Result<Optimum<S>> {
    let grid = linspace(lo, hi, n);
    let slopes: Vec<S> = grid.iter().map(|&x| value_and_slope(x).1).collect();
    let mut evaluations = n;
    let (changes, first, rising) = sign_changes(&slopes);
    match (changes, first) {
        (0, _) => {
            let (x, value, it) =
                golden_section(|x| value_and_slope(x).0, lo, hi, root_tol.max(S::epsilon()), 300);
            Ok(Optimum {
                x,
                value,
                boundary: true,
                residual: value_and_slope(x).1.abs(),
                evaluations: evaluations + it + 3,
                tie: false,
            })
        }
        (1, Some(i)) if rising => {
            // bracket from the last negative slope to the next grid point
            let mut j = i + 1;
            while slopes[j] == S::zero() && j + 1 < n {
                j += 1;
            }
            let (x, it) = bisect(|x| value_and_slope(x).1, grid[i], grid[j], root_tol, 200);
            evaluations += it + 1;
            let (value, slope) = value_and_slope(x);
            let cell = grid_cell(lo, hi, n);
            Ok(Optimum {
                x,
                value,
                boundary: x - lo < cell || hi - x < cell,
                residual: slope.abs(),
                evaluations,
                tie: false,
            })
        }
        (c, _) => Err(Error::NonUnimodal {
            which,
            sign_changes: c,
        }),
    }
}

/// Minimises an objective known only through evaluations: grid scan followed
/// by local refinement around the best grid point.
///
/// Refinement runs golden-section search on the two cells around the grid
/// argmin and then polishes with bisection on a central-difference slope when
/// that slope brackets a root.
pub fn minimize_scanned<S: Scalar, F: FnMut(S) -> Result<S>>(
    mut f: F,
    lo: S,
    hi: S,
    n: usize,
    tol: S,
) -> Result<Optimum<S>> {
    let grid = linspace(lo, hi, n);
    let mut values = Vec::with_capacity(n);
    for &x in &grid {
        values.push(f(x)?);
    }
    let mut evaluations = n;
    let scan_min = values
        .iter()
        .copied()
        .fold(S::infinity(), |a: S, b| a.min(b));
    let tie_tol = S::lit(1e-12) * S::one().max(scan_min.abs());
    let best = grid_argmin(&grid, &values, tie_tol);
    if n == 1 {
        return Ok(Optimum {
            x: best.x,
            value: best.value,
            boundary: true,
            residual: S::zero(),
            evaluations,
            tie: false,
        });
    }
    let a = grid[best.index.saturating_sub(1)];
    let b = grid[(best.index + 1).min(n - 1)];

    // golden section; errors inside the closure are surfaced afterwards
    let mut failure = None;
    let (mut x, mut value, it) = golden_section(
        |x| match f(x) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                S::infinity()
            }
        },
        a,
        b,
        tol,
        300,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    evaluations += it + 2;
    if value > best.value {
        x = best.x;
        value = best.value;
    }

    let h = S::lit(1e-6) * S::one().max(x.abs());
    let mut residual = S::zero();
    if x - h > lo && x + h < hi {
        let span = grid_cell(lo, hi, n).min(S::lit(1e-5).max(S::lit(64.0) * tol));
        let (l, r) = ((x - span).max(lo + h), (x + span).min(hi - h));
        let sl = fd_slope(&mut f, l, h)?;
        let sr = fd_slope(&mut f, r, h)?;
        evaluations += 4;
        if sl < S::zero() && sr > S::zero() {
            let mut failure = None;
            let (root, it) = bisect(
                |x| match fd_slope(&mut f, x, h) {
                    Ok(v) => v,
                    Err(e) => {
                        failure.get_or_insert(e);
                        S::zero()
                    }
                },
                l,
                r,
                tol * S::lit(1e-6),
                200,
            );
            if let Some(e) = failure {
                return Err(e);
            }
            evaluations += 2 * it;
            let v = f(root)?;
            evaluations += 1;
            if v <= value + tie_tol {
                x = root;
                value = v;
            }
        }
        residual = fd_slope(&mut f, x, h)?.abs();
        evaluations += 2;
    }
    let cell = grid_cell(lo, hi, n);
    Ok(Optimum {
        x,
        value,
        boundary: x - lo < cell || hi - x < cell,
        residual,
        evaluations,
        tie: best.tie,
    })
}

fn fd_slope<S: Scalar, F: FnMut(S) -> Result<S>>(f: &mut F, x: S, h: S) -> Result<S> {
    Ok((f(x + h)? - f(x - h)?) / (S::two() * h))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_search_interior() {
        let f = |x: f64| ((x - 0.7).powi(2), 2.0 * (x - 0.7));
        let o = minimize_by_slope("q", f, 0.0, 2.0, 101, 1e-14).unwrap();
        assert!((o.x - 0.7).abs() < 1e-12);
        assert!(!o.boundary);
    }

    #[test]
    fn slope_search_boundary() {
        let f = |x: f64| (x, 1.0);
        let o = minimize_by_slope("lin", f, 0.1, 2.0, 101, 1e-12).unwrap();
        assert!(o.boundary);
        assert!((o.x - 0.1).abs() < 1e-9);
    }

    #[test]
    fn slope_search_rejects_multimodal() {
        let f = |x: f64| ((3.0 * x).cos(), -3.0 * (3.0 * x).sin());
        let e = minimize_by_slope("cos", f, 0.0, 10.0, 400, 1e-12).unwrap_err();
        assert!(matches!(e, Error::NonUnimodal { sign_changes, .. } if sign_changes > 1));
    }

    #[test]
    fn scanned_search() {
        let o = minimize_scanned(|x: f64| Ok((x - 1.234567).powi(2) + 3.0), 0.0, 2.5, 200, 1e-10)
            .unwrap();
        assert!((o.x - 1.234567).abs() < 1e-8);
        assert!(!o.tie);
    }

    #[test]
    fn scanned_flat_objective_ties_to_smallest() {
        let o = minimize_scanned(|_x: f64| Ok(1.0), 0.0, 1.0, 100, 1e-10).unwrap();
        assert!(o.tie);
        assert!(o.x < 0.02);
    }
}
