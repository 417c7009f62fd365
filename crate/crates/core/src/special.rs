//! Special functions backing every density in the crate: the generalized
//! (three-parameter) Mittag-Leffler function, modified Bessel functions of
//! orders 0 and 1, and the log-gamma function.
//!
//! All gamma/factorial ratios are assembled in log space and exponentiated
//! once, so densities stay finite for switch counts in the hundreds.

#[cfg(not(feature = "std"))]
use num_traits::Float as _;

use crate::{Error, Result};

/// Relative tolerance for series evaluation.
pub const TOL_ML: f64 = 1e-13;
/// Series term cap before reporting non-convergence.
pub const MAX_TERMS: usize = 10_000;

const LN_SQRT_TWO_PI: f64 = 0.918_938_533_204_672_74;

// Lanczos (g = 7, n = 9).
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x < 0.5 {
        // Reflection: ln Γ(x) = ln π - ln sin(πx) - ln Γ(1 - x).
        core::f64::consts::PI.ln()
            - (core::f64::consts::PI * x).sin().ln()
            - ln_gamma(1.0 - x)
    } else {
        let z = x - 1.0;
        let mut a = LANCZOS[0];
        for (i, c) in LANCZOS.iter().enumerate().skip(1) {
            a += c / (z + i as f64);
        }
        let t = z + 7.5;
        LN_SQRT_TWO_PI + (z + 0.5) * t.ln() - t + a.ln()
    }
}

/// Parameters of the generalized Mittag-Leffler function
/// `E^gamma_{nu,delta}(x) = sum_j Γ(gamma+j) x^j / (Γ(gamma) j! Γ(nu j + delta))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MLParams {
    /// Series exponent `nu > 0` (always 1 in the laws of this crate).
    pub nu: f64,
    /// Offset `delta > 0`.
    pub delta: f64,
    /// Weight `gamma > 0`.
    pub gamma: f64,
}

impl MLParams {
    pub fn new(nu: f64, delta: f64, gamma: f64) -> Result<Self> {
        if !(nu > 0.0) || !(delta > 0.0) || !(gamma > 0.0) {
            return Err(Error::Domain("MLParams requires nu, delta, gamma > 0"));
        }
        Ok(Self { nu, delta, gamma })
    }
}

/// `ln E^gamma_{1,delta}(x)` for `gamma >= 0`, `delta > 0`.
///
/// Negative arguments are routed through the reflection identity
/// `E^g1_{1,g1+g2}(-y) = e^{-y} E^g2_{1,g1+g2}(y)` whenever `delta > gamma`,
/// which holds for every formula in this crate; the reflected series has
/// positive terms, so the log is well defined and free of cancellation.
pub fn ln_ml1(gamma: f64, delta: f64, x: f64) -> f64 {
    debug_assert!(gamma >= 0.0 && delta > 0.0);
    if gamma == 0.0 || x == 0.0 {
        // Only the j = 0 term survives: E = 1/Γ(delta).
        return -ln_gamma(delta);
    }
    if gamma == delta {
        // Γ(gamma+j)/Γ(j+delta) cancels termwise: E^g_{1,g}(x) = e^x.
        return x;
    }
    if x < 0.0 {
        debug_assert!(
            delta > gamma,
            "reflection pairing unavailable: delta <= gamma with negative argument"
        );
        return x + ln_ml1(delta - gamma, delta, -x);
    }
    // Stream the positive-term series in log space with a running rescale.
    let ln_x = x.ln();
    let mut ln_term = -ln_gamma(delta);
    let mut max_ln = ln_term;
    let mut scaled_sum = 1.0f64;
    let mut j = 0usize;
    loop {
        let jf = j as f64;
        ln_term += ((gamma + jf) / ((jf + 1.0) * (jf + delta))).ln() + ln_x;
        j += 1;
        if ln_term > max_ln {
            scaled_sum = scaled_sum * (max_ln - ln_term).exp() + 1.0;
            max_ln = ln_term;
        } else {
            scaled_sum += (ln_term - max_ln).exp();
        }
        let decreasing = (gamma + jf) * x < (jf + 1.0) * (jf + delta);
        if decreasing && ln_term - max_ln < TOL_ML.ln() - scaled_sum.ln() {
            break;
        }
        if j >= MAX_TERMS {
            // Cannot happen for finite positive x (ratio ~ x/j), but cap anyway.
            break;
        }
    }
    max_ln + scaled_sum.ln()
}

/// `E^gamma_{1,delta}(x)`, the `nu = 1` workhorse.
pub fn ml1(gamma: f64, delta: f64, x: f64) -> f64 {
    ln_ml1(gamma, delta, x).exp()
}

/// Generalized Mittag-Leffler function at real `x`.
///
/// For `nu = 1` the evaluation goes through [`ln_ml1`] (reflection for
/// negative arguments when the pairing `delta > gamma` applies); otherwise
/// the series is summed directly with Kahan compensation.
pub fn mittag_leffler(params: MLParams, x: f64) -> Result<f64> {
    let MLParams { nu, delta, gamma } = params;
    if nu == 1.0 && (x >= 0.0 || delta > gamma) {
        return Ok(ml1(gamma, delta, x));
    }
    // Generic series, log-space terms, compensated accumulation.
    let ln_gamma_gamma = ln_gamma(gamma);
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    let ln_ax = x.abs().ln();
    for j in 0..MAX_TERMS {
        let jf = j as f64;
        let ln_mag = ln_gamma(gamma + jf) - ln_gamma_gamma - ln_gamma(jf + 1.0)
            - ln_gamma(nu * jf + delta)
            + if j == 0 { 0.0 } else { jf * ln_ax };
        let term = if x < 0.0 && j % 2 == 1 {
            -ln_mag.exp()
        } else {
            ln_mag.exp()
        };
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        if !sum.is_finite() {
            return Err(Error::NonConvergence { partial: sum, terms: j + 1 });
        }
        if j > 4 && term.abs() < TOL_ML * sum.abs() && jf > x.abs() * nu.recip() {
            return Ok(sum);
        }
    }
    Err(Error::NonConvergence { partial: sum, terms: MAX_TERMS })
}

/// Both sides of the reflection identity
/// `E^g1_{1,g1+g2}(y-x) = e^{y-x} E^g2_{1,g1+g2}(x-y)`.
pub fn reflection_identity(gamma1: u32, gamma2: u32, y_minus_x: f64) -> (f64, f64) {
    debug_assert!(gamma1 >= 1 && gamma2 >= 1);
    let delta = (gamma1 + gamma2) as f64;
    let lhs = ml1(gamma1 as f64, delta, y_minus_x);
    let rhs = (y_minus_x + ln_ml1(gamma2 as f64, delta, -y_minus_x)).exp();
    (lhs, rhs)
}

// Crossover between the power series and the large-argument expansion.
const BESSEL_SERIES_MAX: f64 = 20.0;

fn bessel_series(order: u32, x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = if order == 0 { 1.0 } else { 0.5 * x };
    let mut sum = term;
    let mut k = 0.0f64;
    loop {
        term *= q / ((k + 1.0) * (k + 1.0 + order as f64));
        sum += term;
        k += 1.0;
        if term < f64::EPSILON * sum {
            return sum;
        }
    }
}

/// `e^{-x} I_order(x)` via the asymptotic expansion, valid for large `x`.
fn bessel_asymptotic_scaled(order: u32, x: f64) -> f64 {
    let mu = 4.0 * (order * order) as f64;
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut k = 1.0f64;
    loop {
        let next = -term * (mu - (2.0 * k - 1.0) * (2.0 * k - 1.0)) / (8.0 * k * x);
        if next.abs() >= term.abs() || next.abs() < f64::EPSILON * sum.abs() {
            sum += next;
            break;
        }
        term = next;
        sum += term;
        k += 1.0;
    }
    sum / (2.0 * core::f64::consts::PI * x).sqrt()
}

/// Modified Bessel function `I_order(x)` for `order` in `{0, 1}`, `x >= 0`.
///
/// Overflows to `+inf` past `x ~ 713`; the densities in this crate combine
/// the scaled variants with their exponential prefactors instead.
pub fn bessel_i(order: u32, x: f64) -> f64 {
    debug_assert!(order <= 1 && x >= 0.0);
    if x <= BESSEL_SERIES_MAX {
        bessel_series(order, x)
    } else {
        x.exp() * bessel_asymptotic_scaled(order, x)
    }
}

/// `e^{-x} I_0(x)`, safe for arbitrarily large `x`.
pub fn bessel_i0_scaled(x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    if x <= BESSEL_SERIES_MAX {
        (-x).exp() * bessel_series(0, x)
    } else {
        bessel_asymptotic_scaled(0, x)
    }
}

/// `e^{-x} I_1(x)`, safe for arbitrarily large `x`.
pub fn bessel_i1_scaled(x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    if x <= BESSEL_SERIES_MAX {
        (-x).exp() * bessel_series(1, x)
    } else {
        bessel_asymptotic_scaled(1, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_gamma_trivial_points() {
        assert!(ln_gamma(1.0).abs() < 1e-14);
        assert!(ln_gamma(2.0).abs() < 1e-14);
        // Γ(5) = 24
        assert!((ln_gamma(5.0) - 24f64.ln()).abs() < 1e-13);
    }

    #[test]
    fn ml_at_zero_is_inverse_gamma() {
        let p = MLParams::new(1.0, 5.0, 2.0).unwrap();
        let v = mittag_leffler(p, 0.0).unwrap();
        assert!((v - 1.0 / 24.0).abs() < 1e-14 / 24.0);
    }

    #[test]
    fn ml_111_is_exp() {
        let p = MLParams::new(1.0, 1.0, 1.0).unwrap();
        let v = mittag_leffler(p, 1.0).unwrap();
        assert!((v - 1f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(MLParams::new(0.0, 1.0, 1.0).is_err());
        assert!(MLParams::new(1.0, -2.0, 1.0).is_err());
    }

    #[test]
    fn reflection_no_overflow_deep_negative() {
        let (lhs, rhs) = reflection_identity(1, 1, -40.0);
        assert!(lhs.is_finite() && rhs.is_finite());
        assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs());
    }

    #[test]
    fn bessel_at_zero() {
        assert_eq!(bessel_i(0, 0.0), 1.0);
        assert_eq!(bessel_i(1, 0.0), 0.0);
    }

    #[test]
    fn bessel_scaled_consistent_with_plain() {
        for &x in &[0.5, 3.0, 19.9, 20.1, 60.0] {
            let rel = (bessel_i0_scaled(x) - (-x).exp() * bessel_i(0, x)).abs()
                / bessel_i0_scaled(x);
            assert!(rel < 1e-13, "x={x} rel={rel}");
        }
    }
}
