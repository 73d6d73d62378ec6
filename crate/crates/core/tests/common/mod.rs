//! Independent reference computations for the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

/// Adaptive Simpson quadrature of `f` over `[a, b]`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Integral over the plane of `min(exp(-m(x)/2), level)` with `m` the
/// squared Mahalanobis distance for `mean` and 2x2 `spread` (row-major).
///
/// Iterated adaptive Simpson. Each vertical slice is a 1-D Gaussian ridge in
/// y; it is integrated piecewise between its peak and the points where it
/// crosses the level, and the outer integral is split where slices start to
/// touch the plateau.
pub fn poured_mass_2d(mean: [f64; 2], spread: [f64; 4], level: f64) -> f64 {
    let [pxx, pxy, _, pyy] = spread;
    let det = pxx * pyy - pxy * pxy;
    let (ixx, ixy, iyy) = (pyy / det, -pxy / det, pxx / det);
    let r2 = -2.0 * level.ln();
    let width = 14.0 + r2.sqrt();
    let slice = |x: f64| {
        let dx = x - mean[0];
        // m(y) = iyy (y - c)^2 + b
        let c = mean[1] - ixy / iyy * dx;
        let b = dx * dx * (ixx - ixy * ixy / iyy);
        let g = |y: f64| (-0.5 * (iyy * (y - c).powi(2) + b)).exp().min(level);
        let half = width / iyy.sqrt();
        let mut cuts = vec![c - half, c, c + half];
        if b < r2 {
            let e = ((r2 - b) / iyy).sqrt();
            cuts.extend([c - e, c + e]);
        }
        cuts.sort_by(f64::total_cmp);
        cuts.windows(2)
            .map(|w| adaptive_simpson(&g, w[0], w[1], 1e-14))
            .sum::<f64>()
    };
    let half = width * pxx.sqrt();
    let edge = r2.sqrt() * pxx.sqrt();
    let mut cuts = [
        mean[0] - half,
        mean[0] - edge,
        mean[0],
        mean[0] + edge,
        mean[0] + half,
    ];
    cuts.sort_by(f64::total_cmp);
    cuts.windows(2)
        .map(|w| adaptive_simpson(&slice, w[0], w[1], 1e-12))
        .sum()
}

/// Standard normal CDF via the error function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// CDF of the 1-D density `min(exp(-(x-mu)^2 / (2 s2)), level)`, written
/// out piecewise: left Gaussian tail, flat plateau, right Gaussian tail.
pub fn poured_cdf_1d(mu: f64, s2: f64, level: f64, x: f64) -> f64 {
    let s = s2.sqrt();
    let r = (-2.0 * level.ln()).max(0.0).sqrt();
    let g = |t: f64| s * (2.0 * PI).sqrt() * normal_cdf(t);
    let t = (x - mu) / s;
    if t <= -r {
        g(t)
    } else if t <= r {
        g(-r) + level * s * (t + r)
    } else {
        g(-r) + level * s * 2.0 * r + (g(t) - g(r))
    }
}

/// One-sample Kolmogorov–Smirnov statistic.
pub fn ks_statistic<F: Fn(f64) -> f64>(mut xs: Vec<f64>, cdf: F) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = cdf(x);
            (c - i as f64 / n).abs().max(((i + 1) as f64 / n - c).abs())
        })
        .fold(0.0, f64::max)
}

/// 1% critical value of the KS statistic for large samples.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.627_6 / (n as f64).sqrt()
}

/// Level `lambda` with `sum min(w, lambda) = 1`, by bisection.
pub fn discrete_level_bisection(w: &[f64]) -> f64 {
    let mass = |l: f64| w.iter().map(|v| v.min(l)).sum::<f64>();
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mass(mid) < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Maximum-entropy pmf with `p_i <= w_i`, found by pairwise mass transfers
/// from the feasible start `w / sum(w)`.
///
/// Each move maximises entropy over one pair with everything else fixed;
/// for a concave objective with one linear constraint this converges to the
/// global optimum.
pub fn max_entropy_search(w: &[f64]) -> Vec<f64> {
    let total: f64 = w.iter().sum();
    let mut p: Vec<f64> = w.iter().map(|v| v / total).collect();
    for _ in 0..10_000 {
        let mut moved = 0.0f64;
        for i in 0..p.len() {
            for j in i + 1..p.len() {
                let s = p[i] + p[j];
                // equalise, then respect the caps
                let mut pi = 0.5 * s;
                if pi > w[i] {
                    pi = w[i];
                }
                if s - pi > w[j] {
                    pi = s - w[j];
                }
                moved = moved.max((pi - p[i]).abs());
                p[i] = pi;
                p[j] = s - pi;
            }
        }
        if moved < 1e-15 {
            break;
        }
    }
    p
}

pub fn entropy(p: &[f64]) -> f64 {
    p.iter().filter(|v| **v > 0.0).map(|v| -v * v.ln()).sum()
}

/// Scalar Kalman filter for `x_k = x_{k-1} + v`, `z_k = x_k + w`.
/// Returns posterior means and variances after each measurement.
pub fn kalman_1d(m0: f64, p0: f64, q: f64, r: f64, zs: &[f64]) -> Vec<(f64, f64)> {
    let (mut m, mut p) = (m0, p0);
    zs.iter()
        .map(|z| {
            p += q;
            let k = p / (p + r);
            m += k * (z - m);
            p *= 1.0 - k;
            (m, p)
        })
        .collect()
}
