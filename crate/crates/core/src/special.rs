//! Chi-squared tail functions for integer degrees of freedom.

use std::f64::consts::PI;

/// Volume of the unit ball in `d` dimensions.
pub fn unit_ball_volume(d: usize) -> f64 {
    let h = d as f64 / 2.0;
    (h * PI.ln() - libm::lgamma(h + 1.0)).exp()
}

/// `ln Pr[chi2_d > x]` for `x >= 0`.
pub fn chi2_ln_survival(d: usize, x: f64) -> f64 {
    assert!(d >= 1, "chi-squared needs at least one degree of freedom");
    let x = x.max(0.0);
    let h = 0.5 * x;
    if d.is_multiple_of(2) {
        // exp(-h) * sum_{i < d/2} h^i / i!
        let mut term = 1.0;
        let mut sum = 1.0;
        for i in 1..d / 2 {
            term *= h / i as f64;
            sum += term;
        }
        -h + sum.ln()
    } else {
        // erfc(sqrt h) + exp(-h) * sum_{i < (d-1)/2} h^(i+1/2) / Gamma(i + 3/2)
        let mut series = 0.0;
        if d > 1 {
            let mut term = h.sqrt() / libm::tgamma(1.5);
            series += term;
            for i in 1..(d - 1) / 2 {
                term *= h / (i as f64 + 0.5);
                series += term;
            }
        }
        let head = libm::erfc(h.sqrt());
        if head > 0.0 {
            (head + (-h).exp() * series).ln()
        } else {
            // erfc underflowed; fall back on its asymptotic form
            let s = h.sqrt();
            let ln_erfc = -h - s.ln() - 0.5 * PI.ln();
            let ln_series = if series > 0.0 {
                -h + series.ln()
            } else {
                f64::NEG_INFINITY
            };
            ln_add(ln_erfc, ln_series)
        }
    }
}

pub fn chi2_survival(d: usize, x: f64) -> f64 {
    chi2_ln_survival(d, x).exp()
}

/// `ln` of the chi-squared density.
pub fn chi2_ln_pdf(d: usize, x: f64) -> f64 {
    let k = d as f64 / 2.0;
    if x <= 0.0 {
        return if d == 2 {
            -(2.0f64.ln())
        } else if d == 1 {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        };
    }
    (k - 1.0) * x.ln() - 0.5 * x - k * 2.0f64.ln() - libm::lgamma(k)
}

/// Solves `ln Pr[chi2_d > s] = target` for `s >= lower`, given that the
/// survival at `lower` is at least `exp(target)`.
///
/// Newton steps in log-survival space, safeguarded by a bracket.
pub fn chi2_inverse_ln_survival(d: usize, target: f64, lower: f64) -> f64 {
    let g = |s: f64| chi2_ln_survival(d, s) - target;
    let mut lo = lower.max(0.0);
    if g(lo) <= 0.0 {
        return lo;
    }
    let mut hi = lo.max(1.0);
    while g(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    let mut s = 0.5 * (lo + hi);
    for _ in 0..200 {
        let gs = g(s);
        if gs == 0.0 {
            return s;
        }
        if gs > 0.0 {
            lo = s;
        } else {
            hi = s;
        }
        // d/ds ln S = -pdf / S
        let slope = -(chi2_ln_pdf(d, s) - chi2_ln_survival(d, s)).exp();
        let mut next = s - gs / slope;
        if !next.is_finite() || next <= lo || next >= hi {
            next = 0.5 * (lo + hi);
        }
        if (next - s).abs() <= 1e-14 * s.max(1.0) || hi - lo <= 1e-14 * hi.max(1.0) {
            return next;
        }
        s = next;
    }
    s
}

fn ln_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}
