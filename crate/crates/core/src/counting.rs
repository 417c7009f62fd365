//! The switching process `N`: a Poisson-type counter whose i.i.d.
//! exponential waiting times alternate between two rates, `lambda1` for
//! odd-indexed gaps and `lambda2` for even-indexed gaps.
//!
//! Provides the pmf, the conditional arrival-time laws, the laws and moments
//! of the alternating sums `S_n(t) = sum_i T_i (-1)^{i-1}`, closed-form
//! maximum-likelihood rate estimators, and exact simulation.

#[cfg(not(feature = "std"))]
use num_traits::Float as _;

use alloc::vec::Vec;

use crate::rng::Stream;
use crate::special::{ln_gamma, ln_ml1};
use crate::{Error, Result};

/// The two alternation rates. `lambda1` governs the first waiting time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RatePair {
    pub lambda1: f64,
    pub lambda2: f64,
}

impl RatePair {
    pub fn new(lambda1: f64, lambda2: f64) -> Result<Self> {
        if !(lambda1 > 0.0) || !(lambda2 > 0.0) {
            return Err(Error::Domain("rates must be positive"));
        }
        Ok(Self { lambda1, lambda2 })
    }

    /// The rates in reversed alternation order.
    pub fn swapped(self) -> Self {
        RatePair { lambda1: self.lambda2, lambda2: self.lambda1 }
    }

    pub fn equal(self) -> bool {
        self.lambda1 == self.lambda2
    }
}

/// Parity of a switch count.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(n: u32) -> Self {
        if n % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

/// The switches observed on `[0, t]`: the horizon and the ordered arrival
/// times inside `(0, t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SwitchRecord {
    horizon: f64,
    arrivals: Vec<f64>,
}

impl SwitchRecord {
    pub fn new(horizon: f64, arrivals: Vec<f64>) -> Result<Self> {
        if !(horizon > 0.0) {
            return Err(Error::Domain("horizon must be positive"));
        }
        let ordered = arrivals.windows(2).all(|w| w[0] < w[1]);
        let in_range = arrivals.iter().all(|&a| 0.0 < a && a < horizon);
        if !ordered || !in_range {
            return Err(Error::Domain("arrivals must be strictly increasing inside (0, t)"));
        }
        Ok(Self { horizon, arrivals })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn arrivals(&self) -> &[f64] {
        &self.arrivals
    }

    pub fn count(&self) -> usize {
        self.arrivals.len()
    }

    /// `S_{N(t)}(t) = T_1 - T_2 + T_3 - ...`
    pub fn alt_sum(&self) -> f64 {
        alt_sum_of(&self.arrivals)
    }
}

fn alt_sum_of(arrivals: &[f64]) -> f64 {
    let mut s = 0.0;
    let mut sign = 1.0;
    for &a in arrivals {
        s += sign * a;
        sign = -sign;
    }
    s
}

/// An alternating sum together with the parity of its term count.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AltSum {
    pub value: f64,
    pub parity: Parity,
}

impl AltSum {
    /// The alternating sum of all arrivals of a record (`None` when empty).
    pub fn from_record(record: &SwitchRecord) -> Option<Self> {
        if record.count() == 0 {
            return None;
        }
        Some(AltSum {
            value: record.alt_sum(),
            parity: Parity::of(record.count() as u32),
        })
    }
}

/// `k * ln(base)` with the `0^0 = 1` convention.
#[inline]
pub(crate) fn pow_ln(base: f64, k: f64) -> f64 {
    if k == 0.0 {
        0.0
    } else {
        k * base.ln()
    }
}

/// `P{N(t) = n}` for the alternating process started on rate `lambda1`.
pub fn pmf(rates: RatePair, t: f64, n: u32) -> f64 {
    debug_assert!(t > 0.0);
    let RatePair { lambda1: l1, lambda2: l2 } = rates;
    let d = (l1 - l2) * t;
    let ln_p = if n % 2 == 0 {
        let k = f64::from(n / 2);
        pow_ln(l1 * t, k) + pow_ln(l2 * t, k) - l1 * t + ln_ml1(k, 2.0 * k + 1.0, d)
    } else {
        let k = f64::from((n - 1) / 2);
        pow_ln(l1 * t, k + 1.0) + pow_ln(l2 * t, k) - l1 * t + ln_ml1(k + 1.0, 2.0 * k + 2.0, d)
    };
    ln_p.exp()
}

/// Conditional joint density of `(T_l, T_m)` given `N(t) = n`, for
/// `1 <= l < m <= n`. Zero outside the simplex `0 < t_l < t_m < t`.
pub fn arrival_pair_density(
    rates: RatePair,
    t: f64,
    n: u32,
    l: u32,
    m: u32,
    t_l: f64,
    t_m: f64,
) -> f64 {
    debug_assert!(l >= 1 && m > l && n >= m);
    if !(0.0 < t_l && t_l < t_m && t_m < t) {
        return 0.0;
    }
    let d = rates.lambda1 - rates.lambda2;
    let (lf, mf, nf) = (f64::from(l), f64::from(m), f64::from(n));
    let g1 = f64::from(l / 2);
    let g2 = f64::from(m / 2 - l / 2);
    let g3 = f64::from((n + 1) / 2 - m / 2);
    let ln_v = pow_ln(t_l, lf - 1.0)
        + pow_ln(t_m - t_l, mf - lf - 1.0)
        + pow_ln(t - t_m, nf - mf)
        - nf * t.ln()
        + ln_ml1(g1, lf, t_l * d)
        + ln_ml1(g2, mf - lf, (t_m - t_l) * d)
        + ln_ml1(g3, nf + 1.0 - mf, (t - t_m) * d)
        - ln_ml1(f64::from((n + 1) / 2), nf + 1.0, t * d)
        + ln_gamma(nf + 1.0)
        - ln_gamma(lf)
        - ln_gamma(mf - lf)
        - ln_gamma(nf + 1.0 - mf);
    ln_v.exp()
}

/// Conditional density of the single arrival `T_l` given `N(t) = n`.
///
/// Marginalizing `arrival_pair_density` over the second coordinate yields
/// exactly this expression; the unit tests assert that consistency.
pub fn arrival_time_density(rates: RatePair, t: f64, n: u32, l: u32, t_l: f64) -> f64 {
    debug_assert!(l >= 1 && n >= l);
    if !(0.0 < t_l && t_l < t) {
        return 0.0;
    }
    let d = rates.lambda1 - rates.lambda2;
    let (lf, nf) = (f64::from(l), f64::from(n));
    let g1 = f64::from(l / 2);
    let g2 = f64::from((n + 1) / 2 - l / 2);
    let ln_v = pow_ln(t_l, lf - 1.0) + pow_ln(t - t_l, nf - lf) - nf * t.ln()
        + ln_ml1(g1, lf, t_l * d)
        + ln_ml1(g2, nf + 1.0 - lf, (t - t_l) * d)
        - ln_ml1(f64::from((n + 1) / 2), nf + 1.0, t * d)
        + ln_gamma(nf + 1.0)
        - ln_gamma(lf)
        - ln_gamma(nf + 1.0 - lf);
    ln_v.exp()
}

/// Conditional density of `S_n(t)` given `N(t) = n`.
///
/// Supported on `(-t, 0)` for even `n` and on `(0, t)` for odd `n`; zero
/// elsewhere (boundary points included).
pub fn alt_sum_density(rates: RatePair, t: f64, n: u32, s: f64) -> f64 {
    debug_assert!(n >= 1);
    let d = rates.lambda1 - rates.lambda2;
    if n % 2 == 0 {
        if !(-t < s && s < 0.0) {
            return 0.0;
        }
        let k = f64::from(n / 2);
        let ln_v = -d * s + pow_ln(-s, k - 1.0) + pow_ln(t + s, k)
            - ln_ml1(k, 2.0 * k + 1.0, d * t)
            - ln_gamma(k + 1.0)
            - ln_gamma(k)
            - 2.0 * k * t.ln();
        ln_v.exp()
    } else {
        if !(0.0 < s && s < t) {
            return 0.0;
        }
        let k = f64::from((n - 1) / 2);
        let ln_v = d * (t - s) + pow_ln(s, k) + pow_ln(t - s, k)
            - ln_ml1(k + 1.0, 2.0 * k + 2.0, d * t)
            - 2.0 * ln_gamma(k + 1.0)
            - (2.0 * k + 1.0) * t.ln();
        ln_v.exp()
    }
}

/// `E[S_n(t)^m | N(t) = n]`.
///
/// Even parity requires integer `m` (the support is negative, so fractional
/// powers leave the reals) and `m > -n/2`; odd parity allows any real
/// `m > -(n+1)/2`.
pub fn alt_sum_moment(rates: RatePair, t: f64, n: u32, m: f64) -> Result<f64> {
    debug_assert!(n >= 1);
    let d = (rates.lambda1 - rates.lambda2) * t;
    if n % 2 == 0 {
        let k = f64::from(n / 2);
        if m <= -k {
            return Err(Error::Domain("moment order must exceed -n/2 for even n"));
        }
        if m != m.round() {
            return Err(Error::Domain(
                "fractional moments of the even-parity (negative) sum are not real",
            ));
        }
        let sign = if (m.round() as i64).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        let ln_v = m * t.ln() + ln_gamma(k + m) - ln_gamma(k)
            + ln_ml1(k + m, 2.0 * k + 1.0 + m, d)
            - ln_ml1(k, 2.0 * k + 1.0, d);
        Ok(sign * ln_v.exp())
    } else {
        let k = f64::from((n - 1) / 2);
        if m <= -k - 1.0 {
            return Err(Error::Domain("moment order must exceed -(n+1)/2 for odd n"));
        }
        let ln_v = m * t.ln() + ln_gamma(k + m + 1.0) - ln_gamma(k + 1.0)
            + ln_ml1(k + 1.0, 2.0 * k + 2.0 + m, d)
            - ln_ml1(k + 1.0, 2.0 * k + 2.0, d);
        Ok(ln_v.exp())
    }
}

/// Closed-form maximum-likelihood estimates of the alternation rates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateMle {
    pub lambda1: f64,
    pub lambda2: f64,
    /// With a single switch the `lambda2` estimate is a 0/0 form that the
    /// indicator formula resolves to 0; flagged so callers can ignore it.
    pub degenerate: bool,
    /// Which indicator branch produced the estimates.
    pub branch: Parity,
}

/// Rate MLE from an observed switch record.
pub fn mle_rates(record: &SwitchRecord) -> Result<RateMle> {
    let n = record.count() as f64;
    if record.count() == 0 {
        return Err(Error::Estimation("no events observed"));
    }
    let t = record.horizon();
    let s = record.alt_sum();
    if record.count() % 2 == 0 {
        Ok(RateMle {
            lambda1: (n / 2.0) / (t + s),
            lambda2: (n / 2.0) / (-s),
            degenerate: false,
            branch: Parity::Even,
        })
    } else {
        Ok(RateMle {
            lambda1: (n + 1.0) / (2.0 * s),
            lambda2: (n - 1.0) / (2.0 * (t - s)),
            degenerate: record.count() == 1,
            branch: Parity::Odd,
        })
    }
}

/// Log-likelihood of `(lambda1, lambda2)` on a record: the product of the
/// completed alternating exponential waiting-time densities times the
/// survival of the censored final gap.
pub fn rate_log_likelihood(record: &SwitchRecord, lambda1: f64, lambda2: f64) -> f64 {
    let n = record.count() as f64;
    let t = record.horizon();
    let s = record.alt_sum();
    // Exposure at each rate follows from the alternating-sum identity:
    // odd count: time on rate 1 is S; even count: t + S.
    let (n1, tau1, n2, tau2) = if record.count() % 2 == 0 {
        (n / 2.0, t + s, n / 2.0, -s)
    } else {
        ((n + 1.0) / 2.0, s, (n - 1.0) / 2.0, t - s)
    };
    n1 * lambda1.ln() - lambda1 * tau1 + n2 * lambda2.ln() - lambda2 * tau2
}

/// Draw a switch record on `[0, t]` with waiting times alternating
/// `Exp(lambda1), Exp(lambda2), ...`. The first arrival past `t` is
/// discarded; memorylessness makes the truncation exact.
pub fn simulate_switches(rates: RatePair, t: f64, rng: &mut Stream) -> SwitchRecord {
    let mut record = SwitchRecord { horizon: t, arrivals: Vec::new() };
    simulate_switches_into(rates, t, rng, &mut record);
    record
}

/// Same as [`simulate_switches`], reusing the record's allocation.
pub fn simulate_switches_into(
    rates: RatePair,
    t: f64,
    rng: &mut Stream,
    record: &mut SwitchRecord,
) {
    record.horizon = t;
    record.arrivals.clear();
    let mut clock = 0.0;
    let mut on_first_rate = true;
    loop {
        let rate = if on_first_rate { rates.lambda1 } else { rates.lambda2 };
        clock += rng.exponential(rate);
        if clock > t {
            return;
        }
        record.arrivals.push(clock);
        on_first_rate = !on_first_rate;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poisson_pmf(lambda: f64, t: f64, n: u32) -> f64 {
        ((f64::from(n)) * (lambda * t).ln() - lambda * t - ln_gamma(f64::from(n) + 1.0)).exp()
    }

    #[test]
    fn pmf_reduces_to_poisson_for_equal_rates() {
        let rates = RatePair::new(1.3, 1.3).unwrap();
        for n in 0..=20 {
            let p = pmf(rates, 0.9, n);
            let q = poisson_pmf(1.3, 0.9, n);
            assert!((p - q).abs() <= 1e-12 * q, "n={n} p={p} q={q}");
        }
    }

    #[test]
    fn pmf_normalizes() {
        let rates = RatePair::new(2.0, 1.0).unwrap();
        let total: f64 = (0..60).map(|n| pmf(rates, 1.0, n)).sum();
        assert!((total - 1.0).abs() < 1e-10, "total={total}");
    }

    #[test]
    fn alt_sum_density_parity_support() {
        let rates = RatePair::new(2.0, 1.0).unwrap();
        assert_eq!(alt_sum_density(rates, 1.0, 2, 0.3), 0.0);
        assert_eq!(alt_sum_density(rates, 1.0, 2, 0.0), 0.0);
        assert_eq!(alt_sum_density(rates, 1.0, 3, -0.3), 0.0);
        assert!(alt_sum_density(rates, 1.0, 2, -0.3) > 0.0);
        assert!(alt_sum_density(rates, 1.0, 3, 0.3) > 0.0);
    }

    #[test]
    fn single_switch_equal_rates_is_uniform() {
        let rates = RatePair::new(1.7, 1.7).unwrap();
        for &s in &[0.1, 0.5, 0.9] {
            let v = alt_sum_density(rates, 1.0, 1, s);
            assert!((v - 1.0).abs() < 1e-13, "s={s} v={v}");
        }
    }

    #[test]
    fn zeroth_moment_is_one() {
        let rates = RatePair::new(2.0, 1.0).unwrap();
        for n in 1..=9 {
            let v = alt_sum_moment(rates, 1.0, n, 0.0).unwrap();
            assert!((v - 1.0).abs() < 1e-13, "n={n} v={v}");
        }
    }

    #[test]
    fn uniform_mean_for_single_switch() {
        let rates = RatePair::new(1.0, 1.0).unwrap();
        let v = alt_sum_moment(rates, 2.0, 1, 1.0).unwrap();
        assert!((v - 1.0).abs() < 1e-13);
    }

    #[test]
    fn moment_domain_errors() {
        let rates = RatePair::new(2.0, 1.0).unwrap();
        assert!(alt_sum_moment(rates, 1.0, 4, -2.0).is_err());
        assert!(alt_sum_moment(rates, 1.0, 4, 0.5).is_err());
        assert!(alt_sum_moment(rates, 1.0, 3, -1.5).is_ok());
    }

    #[test]
    fn mle_worked_examples() {
        let rec = SwitchRecord::new(1.0, alloc::vec![0.25, 0.75]).unwrap();
        let est = mle_rates(&rec).unwrap();
        assert!((est.lambda1 - 2.0).abs() < 1e-12);
        assert!((est.lambda2 - 2.0).abs() < 1e-12);
        assert_eq!(est.branch, Parity::Even);
        assert!(!est.degenerate);

        let rec = SwitchRecord::new(1.0, alloc::vec![0.5, 0.6, 0.9]).unwrap();
        let est = mle_rates(&rec).unwrap();
        assert!((est.lambda1 - 2.5).abs() < 1e-12);
        assert!((est.lambda2 - 10.0).abs() < 1e-12);
        assert_eq!(est.branch, Parity::Odd);
    }

    #[test]
    fn mle_degenerate_cases() {
        let rec = SwitchRecord::new(1.0, alloc::vec![]).unwrap();
        assert!(matches!(mle_rates(&rec), Err(Error::Estimation(_))));
        let rec = SwitchRecord::new(1.0, alloc::vec![0.4]).unwrap();
        let est = mle_rates(&rec).unwrap();
        assert!(est.degenerate);
        assert_eq!(est.lambda2, 0.0);
    }

    #[test]
    fn record_validation() {
        assert!(SwitchRecord::new(1.0, alloc::vec![0.5, 0.4]).is_err());
        assert!(SwitchRecord::new(1.0, alloc::vec![0.5, 1.2]).is_err());
        assert!(SwitchRecord::new(-1.0, alloc::vec![]).is_err());
    }

    #[test]
    fn simulation_is_deterministic_per_stream() {
        let rates = RatePair::new(2.0, 1.0).unwrap();
        let a = simulate_switches(rates, 5.0, &mut Stream::for_path(9, 4));
        let b = simulate_switches(rates, 5.0, &mut Stream::for_path(9, 4));
        assert_eq!(a, b);
    }

    #[test]
    fn huge_second_rate_collapses_even_gaps() {
        let rates = RatePair::new(1.0, 1e6).unwrap();
        let mut rng = Stream::for_path(11, 0);
        for _ in 0..50 {
            let rec = simulate_switches(rates, 10.0, &mut rng);
            for pair in rec.arrivals().chunks_exact(2) {
                assert!(pair[1] - pair[0] < 1e-4);
            }
        }
    }
}
