//! Small numeric utilities: bracketed root finding, golden-section
//! minimization, Gauss-Legendre nodes, and grid/percentile helpers.

use crate::error::{Error, Result};

/// Root of a monotone increasing function `f` on `[lo, hi]` with
/// `f(lo) <= target <= f(hi)` (values may be supplied to avoid
/// re-evaluation). Illinois-damped regula falsi with bisection fallback.
#[allow(clippy::too_many_arguments)]
pub(crate) fn solve_monotone(
    mut f: impl FnMut(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    mut flo: f64,
    mut fhi: f64,
    target: f64,
    xtol: f64,
    ftol: f64,
    max_iter: usize,
) -> Result<f64> {
    flo -= target;
    fhi -= target;
    if flo > 0.0 || fhi < 0.0 {
        return Err(Error::numeric(
            "solve_monotone",
            format!("bracket does not contain target: f({lo})-t={flo}, f({hi})-t={fhi}"),
        ));
    }
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    // Side trackers for the Illinois modification.
    let mut last_side = 0i8;
    let mut x = 0.5 * (lo + hi);
    for iter in 0..max_iter {
        // Secant point of the current bracket; fall back to bisection when
        // the secant degenerates or progress stalls (every 8th iteration).
        let secant_ok = (fhi - flo).abs() > 0.0;
        x = if secant_ok && iter % 8 != 7 {
            lo - flo * (hi - lo) / (fhi - flo)
        } else {
            0.5 * (lo + hi)
        };
        if !(x > lo && x < hi) {
            x = 0.5 * (lo + hi);
        }
        let fx = f(x) - target;
        if fx.abs() <= ftol || (hi - lo) <= xtol * (1.0 + x.abs()) {
            return Ok(x);
        }
        if fx < 0.0 {
            lo = x;
            flo = fx;
            if last_side == -1 {
                fhi *= 0.5; // Illinois damping
            }
            last_side = -1;
        } else {
            hi = x;
            fhi = fx;
            if last_side == 1 {
                flo *= 0.5;
            }
            last_side = 1;
        }
    }
    Ok(x)
}

/// Golden-section minimization of a unimodal function on `[lo, hi]`.
/// Returns `(x_min, f(x_min))` once the interval is below `xtol`.
pub(crate) fn golden_section_min(
    mut f: impl FnMut(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    xtol: f64,
    max_iter: usize,
) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut b = hi - INV_PHI * (hi - lo);
    let mut c = lo + INV_PHI * (hi - lo);
    let mut fb = f(b);
    let mut fc = f(c);
    let mut iter = 0;
    while (hi - lo).abs() > xtol && iter < max_iter {
        iter += 1;
        if fb < fc {
            hi = c;
            c = b;
            fc = fb;
            b = hi - INV_PHI * (hi - lo);
            fb = f(b);
        } else {
            lo = b;
            b = c;
            fb = fc;
            c = lo + INV_PHI * (hi - lo);
            fc = f(c);
        }
    }
    let x = 0.5 * (lo + hi);
    let fx = f(x);
    if fb < fc && fb < fx {
        (b, fb)
    } else if fc < fx {
        (c, fc)
    } else {
        (x, fx)
    }
}

/// Coarse-scan a function on `points` evenly spaced values in `[lo, hi]`,
/// then golden-section refine inside the bracket around the best point.
pub(crate) fn scan_then_golden(
    mut f: impl FnMut(f64) -> f64,
    lo: f64,
    hi: f64,
    points: usize,
    xtol: f64,
) -> (f64, f64) {
    debug_assert!(points >= 3);
    let grid = linspace(lo, hi, points);
    let mut best_idx = 0;
    let mut best_val = f64::INFINITY;
    let values: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    for (i, &v) in values.iter().enumerate() {
        if v < best_val {
            best_val = v;
            best_idx = i;
        }
    }
    let left = if best_idx == 0 { grid[0] } else { grid[best_idx - 1] };
    let right = if best_idx + 1 == grid.len() {
        grid[grid.len() - 1]
    } else {
        grid[best_idx + 1]
    };
    if left == right {
        return (left, best_val);
    }
    let (x, fx) = golden_section_min(&mut f, left, right, xtol, 200);
    if fx <= best_val {
        (x, fx)
    } else {
        (grid[best_idx], best_val)
    }
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let step = (hi - lo) / (n as f64 - 1.0);
    (0..n).map(|i| lo + step * i as f64).collect()
}

/// `n` geometrically spaced points from `lo` to `hi` inclusive (both > 0).
pub fn geomspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    linspace(lo.ln(), hi.ln(), n).into_iter().map(f64::exp).collect()
}

/// Gauss-Legendre nodes and weights on [-1, 1], computed by Newton
/// iteration on the Legendre recurrence.
pub(crate) fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-based initial guess for the i-th positive root.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre P_n(x) and its derivative by upward recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Percentile in [0, 100] of unsorted data by linear interpolation
/// between order statistics.
pub fn percentile(data: &[f64], pct: f64) -> f64 {
    assert!(!data.is_empty(), "percentile of empty slice");
    let mut sorted = data.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("non-NaN data"));
    let rank = pct / 100.0 * (sorted.len() as f64 - 1.0);
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let frac = rank - lo as f64;
        sorted[lo] * (1.0 - frac) + sorted[hi] * frac
    }
}

/// Mean of a slice.
pub fn mean(data: &[f64]) -> f64 {
    assert!(!data.is_empty(), "mean of empty slice");
    data.iter().sum::<f64>() / data.len() as f64
}
