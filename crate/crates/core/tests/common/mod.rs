//! Shared oracle machinery for the integration tests: adaptive
//! quadrature over densities, bisection quantile inversion, and pilot
//! simulation helpers. Everything here is independent of the library's
//! implementation paths (series/continued fractions, Newton inversion),
//! so it can serve as a reference for them.

#![allow(dead_code)]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution};

/// Adaptive Simpson quadrature with Richardson stopping.
pub fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &impl Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &impl Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        m: f64,
        fm: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (left, lm, flm) = simpson(f, a, fa, m, fm);
        let (right, rm, frm) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, fa, m, fm, left, lm, flm, 0.5 * tol, depth - 1)
                + recurse(f, m, fm, b, fb, right, rm, frm, 0.5 * tol, depth - 1)
        }
    }
    let fa = f(a);
    let fb = f(b);
    let (whole, m, fm) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, whole, m, fm, tol, 48)
}

/// Reference standard normal CDF by quadrature of the density from 0.
pub fn normal_cdf_oracle(z: f64) -> f64 {
    let density = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
    if z >= 0.0 {
        0.5 + adaptive_simpson(&density, 0.0, z, 1e-13)
    } else {
        0.5 - adaptive_simpson(&density, z, 0.0, 1e-13)
    }
}

/// Reference chi-squared CDF by quadrature of the density.
pub fn chi2_cdf_oracle(x: f64, nu: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let a = 0.5 * nu;
    let ln_norm = powerplan::special::ln_gamma(a) + a * std::f64::consts::LN_2;
    let density = move |t: f64| {
        if t <= 0.0 {
            0.0
        } else {
            ((a - 1.0) * t.ln() - 0.5 * t - ln_norm).exp()
        }
    };
    // split at the mode to keep the integrand well-behaved
    let mode = (nu - 2.0).max(1e-3);
    if x <= mode {
        adaptive_simpson(&density, 0.0, x, 1e-12)
    } else {
        adaptive_simpson(&density, 0.0, mode, 1e-12) + adaptive_simpson(&density, mode, x, 1e-12)
    }
}

/// Bisection inversion of an arbitrary increasing function; the oracle
/// counterpart of the library's Newton quantiles.
pub fn bisect_quantile(f: &impl Fn(f64) -> f64, target: f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) <= 1e-14 * (1.0 + mid.abs()) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Deterministic rng for test draws.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Draw a pilot standard deviation (the oracle-side duplicate of the
/// harness sampler, kept separate on purpose).
pub fn draw_pilot_sd(sigma: f64, epsilon: u32, r: &mut ChaCha8Rng) -> f64 {
    let nu = f64::from(epsilon - 1);
    let chi = ChiSquared::new(nu).unwrap();
    sigma * (chi.sample(r) / nu).sqrt()
}

/// Uniform draw in [lo, hi].
pub fn uniform(r: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    use rand::Rng;
    r.random_range(lo..=hi)
}
