//! Joint laws of (position, running minimum, running maximum) for the
//! symmetric motion (velocities `±c`), conditioned on the switch count and
//! started upward, split by which barrier is crossed first.
//!
//! Densities are per unit of the terminal position `x`, for the event
//! `{T(t) in dx, m(t) < -alpha, M(t) > beta}` with the requested crossing
//! order, under `P^+_n` (started at `+c`, `N(t) = n`). For equal rates those
//! conditioned laws are rate-free; the recurrence kernel is parameterized by
//! the rate pair and also covers two distinct rates for `n <= 3`.
//!
//! Only the non-trivial region is evaluated: queries with `x` outside
//! `[-alpha, beta]` reduce to single-barrier laws and report `trivial`.

#[cfg(not(feature = "std"))]
use num_traits::Float as _;

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::cell::{Cell, RefCell};

use crate::counting::{arrival_pair_density, arrival_time_density, pow_ln, RatePair};
use crate::quad::adaptive_quad;
use crate::special::ln_gamma;
use crate::{Error, Result};

/// Which barrier is crossed first.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CrossingOrder {
    /// The upper barrier `beta` first (`F_beta < F_{-alpha}`).
    MaxFirst,
    /// The lower barrier `-alpha` first.
    MinFirst,
    /// Either order: the sum of the two split densities.
    Either,
}

/// A two-barrier query for the symmetric motion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtremesQuery {
    pub c: f64,
    pub t: f64,
    pub n: u32,
    pub alpha: f64,
    pub beta: f64,
    pub x: f64,
    pub order: CrossingOrder,
}

impl ExtremesQuery {
    pub fn new(
        c: f64,
        t: f64,
        n: u32,
        alpha: f64,
        beta: f64,
        x: f64,
        order: CrossingOrder,
    ) -> Result<Self> {
        if !(c > 0.0 && t > 0.0) {
            return Err(Error::Domain("need c > 0 and t > 0"));
        }
        if n < 2 {
            return Err(Error::Domain("two-barrier events need n >= 2"));
        }
        if !(0.0..c * t).contains(&alpha) || !(0.0..c * t).contains(&beta) {
            return Err(Error::Domain("barriers must satisfy 0 <= alpha, beta < c t"));
        }
        Ok(Self { c, t, n, alpha, beta, x, order })
    }
}

/// Membership report for the two support sets.
#[derive(Clone, Debug, PartialEq)]
pub struct SupportClass {
    /// Inside the max-first support set (needs `n >= 2`).
    pub in_max_first: bool,
    /// Inside the min-first support set (needs `n >= 3`).
    pub in_min_first: bool,
    /// Which of the three printed max-first branches matched (1-based).
    pub branch_max: Option<u8>,
    /// Which of the three printed min-first branches matched (1-based).
    pub branch_min: Option<u8>,
    /// Position outside `[-alpha, beta]`: the query reduces to known
    /// single-barrier laws and is not covered here.
    pub trivial: bool,
    /// Closed inequalities of the matched branches that hold with equality.
    pub tight: Vec<&'static str>,
}

struct Geometry {
    branch: Option<u8>,
    tight: Vec<&'static str>,
}

fn max_first_geometry(ct: f64, alpha: f64, beta: f64, x: f64) -> Geometry {
    let ma = -alpha;
    let mut tight = Vec::new();
    // Branch 1: beta in [0, ct/3), -alpha in ((3 beta - ct)/2, 0], x in [-alpha, beta]
    if (0.0..ct / 3.0).contains(&beta)
        && (3.0 * beta - ct) / 2.0 < ma
        && ma <= 0.0
        && (-alpha..=beta).contains(&x)
    {
        if beta == 0.0 {
            tight.push("max_first branch 1: beta == 0");
        }
        if ma == 0.0 {
            tight.push("max_first branch 1: alpha == 0");
        }
        if x == -alpha {
            tight.push("max_first branch 1: x == -alpha");
        }
        if x == beta {
            tight.push("max_first branch 1: x == beta");
        }
        return Geometry { branch: Some(1), tight };
    }
    // Branch 2: beta in [0, ct/3), -alpha in (2 beta - ct, (3 beta - ct)/2],
    //           x in [-alpha, ct - 2 alpha - 2 beta]
    if (0.0..ct / 3.0).contains(&beta)
        && 2.0 * beta - ct < ma
        && ma <= (3.0 * beta - ct) / 2.0
        && (-alpha..=ct - 2.0 * alpha - 2.0 * beta).contains(&x)
    {
        if ma == (3.0 * beta - ct) / 2.0 {
            tight.push("max_first branch 2: -alpha == (3 beta - ct)/2");
        }
        if x == -alpha {
            tight.push("max_first branch 2: x == -alpha");
        }
        if x == ct - 2.0 * alpha - 2.0 * beta {
            tight.push("max_first branch 2: x == ct - 2 alpha - 2 beta");
        }
        return Geometry { branch: Some(2), tight };
    }
    // Branch 3: beta in [ct/3, ct/2), -alpha in (2 beta - ct, 0],
    //           x in [-alpha, ct - 2 alpha - 2 beta]
    if (ct / 3.0..ct / 2.0).contains(&beta)
        && 2.0 * beta - ct < ma
        && ma <= 0.0
        && (-alpha..=ct - 2.0 * alpha - 2.0 * beta).contains(&x)
    {
        if beta == ct / 3.0 {
            tight.push("max_first branch 3: beta == ct/3");
        }
        if ma == 0.0 {
            tight.push("max_first branch 3: alpha == 0");
        }
        if x == -alpha {
            tight.push("max_first branch 3: x == -alpha");
        }
        if x == ct - 2.0 * alpha - 2.0 * beta {
            tight.push("max_first branch 3: x == ct - 2 alpha - 2 beta");
        }
        return Geometry { branch: Some(3), tight };
    }
    Geometry { branch: None, tight }
}

fn min_first_geometry(ct: f64, alpha: f64, beta: f64, x: f64) -> Geometry {
    let ma = -alpha;
    let mut tight = Vec::new();
    // Branch 1: beta in [0, ct/2), -alpha in ((2 beta - ct)/3, 0], x in [-alpha, beta]
    if (0.0..ct / 2.0).contains(&beta)
        && (2.0 * beta - ct) / 3.0 < ma
        && ma <= 0.0
        && (-alpha..=beta).contains(&x)
    {
        if ma == 0.0 {
            tight.push("min_first branch 1: alpha == 0");
        }
        if x == -alpha {
            tight.push("min_first branch 1: x == -alpha");
        }
        if x == beta {
            tight.push("min_first branch 1: x == beta");
        }
        return Geometry { branch: Some(1), tight };
    }
    // Branch 2: beta in [0, ct/2), -alpha in ((beta - ct)/2, (2 beta - ct)/3),
    //           x in [2 alpha + 2 beta - ct, beta]  (rate window open at both
    //           ends as printed)
    if (0.0..ct / 2.0).contains(&beta)
        && (beta - ct) / 2.0 < ma
        && ma < (2.0 * beta - ct) / 3.0
        && (2.0 * alpha + 2.0 * beta - ct..=beta).contains(&x)
    {
        if x == 2.0 * alpha + 2.0 * beta - ct {
            tight.push("min_first branch 2: x == 2 alpha + 2 beta - ct");
        }
        if x == beta {
            tight.push("min_first branch 2: x == beta");
        }
        return Geometry { branch: Some(2), tight };
    }
    // Branch 3: beta in [ct/2, ct), -alpha in ((beta - ct)/2, 0],
    //           x in [2 alpha + 2 beta - ct, beta]
    if (ct / 2.0..ct).contains(&beta)
        && (beta - ct) / 2.0 < ma
        && ma <= 0.0
        && (2.0 * alpha + 2.0 * beta - ct..=beta).contains(&x)
    {
        if beta == ct / 2.0 {
            tight.push("min_first branch 3: beta == ct/2");
        }
        if ma == 0.0 {
            tight.push("min_first branch 3: alpha == 0");
        }
        if x == 2.0 * alpha + 2.0 * beta - ct {
            tight.push("min_first branch 3: x == 2 alpha + 2 beta - ct");
        }
        if x == beta {
            tight.push("min_first branch 3: x == beta");
        }
        return Geometry { branch: Some(3), tight };
    }
    Geometry { branch: None, tight }
}

/// Classify a query against the two support sets exactly as printed.
pub fn classify_support(q: &ExtremesQuery) -> SupportClass {
    let trivial = !(-q.alpha..=q.beta).contains(&q.x);
    let gm = max_first_geometry(q.c * q.t, q.alpha, q.beta, q.x);
    let gmin = min_first_geometry(q.c * q.t, q.alpha, q.beta, q.x);
    let mut tight = gm.tight;
    tight.extend(gmin.tight);
    SupportClass {
        in_max_first: gm.branch.is_some() && q.n >= 2,
        in_min_first: gmin.branch.is_some() && q.n >= 3,
        branch_max: gm.branch,
        branch_min: gmin.branch,
        trivial,
        tight,
    }
}

/// Whether the min-first integral takes `beta/c` as its upper limit.
pub fn in_reduction_region(c: f64, t: f64, alpha: f64, beta: f64, x: f64) -> bool {
    let ct = c * t;
    (0.0..=ct / 3.0).contains(&beta)
        && ((3.0 * beta - ct) / 2.0..=0.0).contains(&(-alpha))
        && ((-alpha).max(2.0 * alpha + 4.0 * beta - ct)..=beta).contains(&x)
}

/// Whether the closed reflection form applies:
/// `(ct - 4 alpha - 2 beta - x)/(2c) <= 0 <= beta/c`.
pub fn in_reflection_regime(q: &ExtremesQuery) -> bool {
    q.c * q.t - 4.0 * q.alpha - 2.0 * q.beta - q.x <= 0.0
}

fn binom_ln(n: f64, k1: f64, k2: f64) -> f64 {
    ln_gamma(n + 1.0) - ln_gamma(k1) - ln_gamma(k2)
}

/// Shared shape of the first-term and reflection closed forms: the even
/// case pairs exponents `(k-1, k)`, the odd case `(k-1, k+1)`.
fn barrier_closed_form(ct: f64, n: u32, up: f64, down: f64) -> f64 {
    if up < 0.0 || down < 0.0 {
        return 0.0;
    }
    let nf = f64::from(n);
    if n % 2 == 0 {
        let k = f64::from(n / 2);
        (binom_ln(nf, k, k + 1.0) + pow_ln(up, k - 1.0) + pow_ln(down, k)
            - 2.0 * k * (2.0 * ct).ln())
        .exp()
    } else {
        let k = f64::from((n - 1) / 2);
        if k < 1.0 {
            return 0.0;
        }
        (binom_ln(nf, k, k + 2.0) + pow_ln(up, k - 1.0) + pow_ln(down, k + 1.0)
            - (2.0 * k + 1.0) * (2.0 * ct).ln())
        .exp()
    }
}

fn first_term_closed(ct: f64, n: u32, alpha: f64, beta: f64, x: f64) -> f64 {
    barrier_closed_form(ct, n, ct + 2.0 * alpha + x, ct - 2.0 * alpha - 2.0 * beta - x)
}

/// The contribution of paths that cross `beta` during the first
/// displacement (closed form, equal rates). Zero outside the max-first
/// support.
pub fn first_term_density(q: &ExtremesQuery) -> f64 {
    let ct = q.c * q.t;
    if max_first_geometry(ct, q.alpha, q.beta, q.x).branch.is_none() || q.n < 2 {
        return 0.0;
    }
    first_term_closed(ct, q.n, q.alpha, q.beta, q.x)
}

/// Closed form of the max-first density in the reflection regime, where the
/// motion cannot reach `-alpha` before crossing `beta`: the negatively
/// reflected single-barrier law, which for even counts coincides with the
/// free density at the shifted position `2 alpha + 2 beta + x`.
pub fn reflection_closed_form(q: &ExtremesQuery) -> Result<f64> {
    if !in_reflection_regime(q) {
        return Err(Error::Domain("outside the reflection regime"));
    }
    let ct = q.c * q.t;
    if max_first_geometry(ct, q.alpha, q.beta, q.x).branch.is_none() || q.n < 2 {
        return Ok(0.0);
    }
    Ok(barrier_closed_form(
        ct,
        q.n,
        ct + 2.0 * q.alpha + 2.0 * q.beta + q.x,
        ct - 2.0 * q.alpha - 2.0 * q.beta - q.x,
    ))
}

/// Recursion cap: deeper queries should fall back to simulation.
pub const N_MAX: u32 = 10;

type CacheKey = (u32, i64, i64, i64, i64);

fn quantize(v: f64) -> i64 {
    (v * 1e12).round() as i64
}

/// Recursive evaluator for the two-barrier densities.
///
/// Holds the rate pair of the recurrence kernel, the quadrature tolerances,
/// and a memo cache keyed on the transformed query rounded to 1e-12. The
/// cache is private to the evaluator; concurrent use means one evaluator
/// per thread (values are deterministic, duplicated work is acceptable).
pub struct ExtremesEvaluator {
    rates: RatePair,
    outer_tol: f64,
    inner_tol: f64,
    n_max: u32,
    cache: RefCell<BTreeMap<CacheKey, f64>>,
    quad_failure: Cell<Option<Error>>,
}

impl Default for ExtremesEvaluator {
    fn default() -> Self {
        Self::new()
    }
}

/// A query rescaled to `c = 1` by measuring time in units of `1/c`:
/// positions are unchanged, the horizon becomes `c t`, rates divide by `c`.
/// Densities per unit position are invariant under this rescaling.
struct Normalized {
    t: f64,
    rates: RatePair,
}

impl ExtremesEvaluator {
    /// Evaluator for the symmetric process (conditioned laws are rate-free).
    pub fn new() -> Self {
        Self::with_rates(RatePair { lambda1: 1.0, lambda2: 1.0 })
    }

    /// Evaluator with an alternating-rate kernel (`lambda1` active at `+c`).
    pub fn with_rates(rates: RatePair) -> Self {
        Self {
            rates,
            outer_tol: 1e-7,
            inner_tol: 1e-8,
            n_max: N_MAX,
            cache: RefCell::new(BTreeMap::new()),
            quad_failure: Cell::new(None),
        }
    }

    fn normalize(&self, q: &ExtremesQuery) -> Result<Normalized> {
        self.check_size(q.n)?;
        Ok(Normalized {
            t: q.c * q.t,
            rates: RatePair {
                lambda1: self.rates.lambda1 / q.c,
                lambda2: self.rates.lambda2 / q.c,
            },
        })
    }

    fn check_size(&self, n: u32) -> Result<()> {
        if n > self.n_max {
            return Err(Error::Capability(
                "recursion depth beyond N_MAX; use the Monte Carlo oracle instead",
            ));
        }
        if !self.rates.equal() && n > 3 {
            return Err(Error::Capability(
                "two-rate two-barrier densities are available for n <= 3 only",
            ));
        }
        Ok(())
    }

    fn take_failure(&self, value: f64) -> Result<f64> {
        match self.quad_failure.take() {
            Some(err) => Err(err),
            None => Ok(value),
        }
    }

    /// Density of `{T(t) in dx, m < -alpha, M > beta, upper barrier first}`
    /// under `P^+_n`.
    pub fn max_then_min_density(&self, q: &ExtremesQuery) -> Result<f64> {
        let norm = self.normalize(q)?;
        let v = self.p_max_first(&norm.rates, norm.t, q.n, q.alpha, q.beta, q.x, 0);
        self.take_failure(v)
    }

    /// Density of `{T(t) in dx, m < -alpha, M > beta, lower barrier first}`
    /// under `P^+_n` (equal rates only).
    pub fn min_then_max_density(&self, q: &ExtremesQuery) -> Result<f64> {
        let norm = self.normalize(q)?;
        if !self.rates.equal() {
            return Err(Error::Capability(
                "the min-first reduction is implemented for equal rates only",
            ));
        }
        let t = norm.t;
        if q.n < 3 || min_first_geometry(t, q.alpha, q.beta, q.x).branch.is_none() {
            return Ok(0.0);
        }
        let limit = q.beta.min((t - 2.0 * q.alpha - 2.0 * q.beta + q.x) / 2.0);
        debug_assert!({
            let by_indicator = if in_reduction_region(1.0, t, q.alpha, q.beta, q.x) {
                q.beta
            } else {
                (t - 2.0 * q.alpha - 2.0 * q.beta + q.x) / 2.0
            };
            (limit - by_indicator).abs() < 1e-12
        });
        if limit <= 0.0 {
            return Ok(0.0);
        }
        let integrand = |t1: f64| {
            arrival_time_density(norm.rates, t, q.n, 1, t1)
                * self.p_max_first(
                    &norm.rates,
                    t - t1,
                    q.n - 1,
                    q.beta - t1,
                    q.alpha + t1,
                    t1 - q.x,
                    1,
                )
        };
        let v = self.quad(&integrand, 0.0, limit, self.outer_tol);
        self.take_failure(v)
    }

    /// Two-barrier density for the order requested by the query.
    pub fn joint_density(&self, q: &ExtremesQuery) -> Result<f64> {
        match q.order {
            CrossingOrder::MaxFirst => self.max_then_min_density(q),
            CrossingOrder::MinFirst => self.min_then_max_density(q),
            CrossingOrder::Either => {
                let a = self.max_then_min_density(q)?;
                let b = if q.n >= 3 { self.min_then_max_density(q)? } else { 0.0 };
                Ok(a + b)
            }
        }
    }

    fn quad(&self, f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> f64 {
        if lo >= hi {
            return 0.0;
        }
        match adaptive_quad(f, lo, hi, tol, 20_000) {
            Ok(r) => r.value,
            Err(e) => {
                self.quad_failure.set(Some(e));
                0.0
            }
        }
    }

    /// `P^+_n{T(t) in dx, m < -alpha, M > beta, F_beta < F_{-alpha}} / dx`
    /// in `c = 1` units: first-displacement term plus the recursion over the
    /// first two switch times. Memoized.
    fn p_max_first(
        &self,
        rates: &RatePair,
        t: f64,
        n: u32,
        alpha: f64,
        beta: f64,
        x: f64,
        depth: u32,
    ) -> f64 {
        if n < 2 {
            return 0.0;
        }
        if max_first_geometry(t, alpha, beta, x).branch.is_none() {
            return 0.0;
        }
        let key: CacheKey = (n, quantize(t), quantize(alpha), quantize(beta), quantize(x));
        if let Some(&hit) = self.cache.borrow().get(&key) {
            return hit;
        }
        let first = if rates.equal() {
            first_term_closed(t, n, alpha, beta, x)
        } else {
            self.first_term_by_quadrature(rates, t, n, alpha, beta, x)
        };
        let second =
            if n >= 4 { self.second_term(rates, t, n, alpha, beta, x, depth) } else { 0.0 };
        let v = first + second;
        self.cache.borrow_mut().insert(key, v);
        v
    }

    /// The double integral over the first two switch times, with the upper
    /// `t2` limit split into the three realizability cases.
    fn second_term(
        &self,
        rates: &RatePair,
        t: f64,
        n: u32,
        alpha: f64,
        beta: f64,
        x: f64,
        depth: u32,
    ) -> f64 {
        let a = (t - 4.0 * alpha - 2.0 * beta - x) / 2.0;
        let b = beta;
        let d = (t - 2.0 * alpha - 2.0 * beta - x) / 2.0;
        let tol = if depth == 0 { self.outer_tol } else { self.inner_tol };
        let inner = |t1: f64, hi: f64| -> f64 {
            self.quad(
                &|t2| {
                    arrival_pair_density(*rates, t, n, 1, 2, t1, t2)
                        * self.p_max_first(
                            rates,
                            t - t2,
                            n - 2,
                            alpha + 2.0 * t1 - t2,
                            beta - 2.0 * t1 + t2,
                            x - 2.0 * t1 + t2,
                            depth + 1,
                        )
                },
                t1,
                hi,
                self.inner_tol,
            )
        };
        if a <= 0.0 {
            self.quad(&|t1| inner(t1, d + t1), 0.0, b, tol)
        } else if a <= b {
            self.quad(&|t1| inner(t1, 2.0 * t1 + alpha), 0.0, a, tol)
                + self.quad(&|t1| inner(t1, d + t1), a, b, tol)
        } else {
            self.quad(&|t1| inner(t1, 2.0 * t1 + alpha), 0.0, b, tol)
        }
    }

    /// First term for distinct rates: integrate the single-barrier law of
    /// the remaining motion (started downward) against the conditional law
    /// of the first switch time.
    fn first_term_by_quadrature(
        &self,
        rates: &RatePair,
        t: f64,
        n: u32,
        alpha: f64,
        beta: f64,
        x: f64,
    ) -> f64 {
        let lo = beta;
        let hi = (t - 2.0 * alpha - x) / 2.0;
        self.quad(
            &|t1| {
                arrival_time_density(*rates, t, n, 1, t1)
                    * self.min_law_started_down(rates, t - t1, n - 1, x - t1, alpha + t1)
            },
            lo,
            hi,
            self.inner_tol,
        )
    }

    /// `P^-_j{T(tau) in dz, m(tau) < -h} / dz` for `j in {1, 2}` and
    /// `z >= -h` (the only case the first-term kernel needs), with the rate
    /// alternation seen from a motion started downward.
    fn min_law_started_down(&self, rates: &RatePair, tau: f64, j: u32, z: f64, h: f64) -> f64 {
        debug_assert!(z + h >= -1e-12);
        let swapped = rates.swapped();
        match j {
            1 => {
                // One switch: T(tau) = tau - 2 T1, minimum -T1.
                let t1 = (tau - z) / 2.0;
                if !(0.0 < t1 && t1 < tau) || t1 <= h {
                    return 0.0;
                }
                arrival_time_density(swapped, tau, 1, 1, t1) / 2.0
            }
            2 => {
                // Two switches: T(tau) = 2(T2 - T1) - tau, minimum -T1.
                let w = (z + tau) / 2.0;
                if !(0.0 < w && w < tau) {
                    return 0.0;
                }
                let lo = h.max(0.0);
                let hi = tau - w;
                self.quad(
                    &|t1| arrival_pair_density(swapped, tau, 2, 1, 2, t1, t1 + w),
                    lo,
                    hi,
                    self.inner_tol,
                ) / 2.0
            }
            _ => unreachable!("single-barrier kernel only needed for j <= 2"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(t: f64, n: u32, alpha: f64, beta: f64, x: f64) -> ExtremesQuery {
        ExtremesQuery::new(1.0, t, n, alpha, beta, x, CrossingOrder::MaxFirst).unwrap()
    }

    #[test]
    fn classify_worked_examples() {
        // Boundary case: all levels zero.
        let c = classify_support(&q(1.0, 2, 0.0, 0.0, 0.0));
        assert!(c.in_max_first);
        assert_eq!(c.branch_max, Some(1));
        assert!(!c.tight.is_empty());

        // Branch 2 membership: -alpha = -0.5 in (-0.8, -0.35], x in [-0.5, -0.2].
        let c = classify_support(&q(1.0, 2, 0.5, 0.1, -0.3));
        assert!(c.in_max_first);
        assert_eq!(c.branch_max, Some(2));
        assert!(!c.trivial);

        // x = 0 fails the min-first branch-3 window [0.4, 0.6].
        let mut query = q(1.0, 3, 0.1, 0.6, 0.0);
        query.order = CrossingOrder::MinFirst;
        let c = classify_support(&query);
        assert!(!c.in_min_first);
        assert!(!c.trivial);
    }

    #[test]
    fn first_term_worked_point() {
        let v = first_term_density(&q(1.0, 2, 0.5, 0.1, -0.3));
        assert!((v - 0.05).abs() < 1e-14, "v={v}");
    }

    #[test]
    fn first_term_vanishing_edge() {
        // x = ct - 2 alpha - 2 beta makes the even-order factor vanish.
        let v = first_term_density(&q(1.0, 2, 0.4, 0.1, 0.0));
        assert_eq!(v, 0.0);
    }

    #[test]
    fn reflection_worked_point() {
        let v = reflection_closed_form(&q(1.0, 2, 0.5, 0.1, -0.3)).unwrap();
        assert!((v - 0.05).abs() < 1e-14, "v={v}");
        assert!(reflection_closed_form(&q(1.0, 2, 0.05, 0.1, 0.0)).is_err());
    }

    #[test]
    fn small_counts_reduce_to_first_term() {
        let ev = ExtremesEvaluator::new();
        for n in [2, 3] {
            let query = q(1.0, n, 0.5, 0.1, -0.3);
            let rec = ev.max_then_min_density(&query).unwrap();
            let ft = first_term_density(&query);
            assert!((rec - ft).abs() < 1e-14, "n={n}");
        }
    }

    #[test]
    fn velocity_rescaling_is_noop_on_densities() {
        let ev = ExtremesEvaluator::new();
        let base = q(1.0, 4, 0.5, 0.1, -0.3);
        let scaled = ExtremesQuery::new(2.0, 0.5, 4, 0.5, 0.1, -0.3, CrossingOrder::MaxFirst)
            .unwrap();
        let a = ev.max_then_min_density(&base).unwrap();
        let b = ev.max_then_min_density(&scaled).unwrap();
        assert!((a - b).abs() < 1e-12, "a={a} b={b}");
    }

    #[test]
    fn capability_errors() {
        let ev = ExtremesEvaluator::new();
        let query = q(1.0, 12, 0.2, 0.1, 0.0);
        assert!(matches!(ev.max_then_min_density(&query), Err(Error::Capability(_))));
        let two_rate = ExtremesEvaluator::with_rates(RatePair { lambda1: 2.0, lambda2: 1.0 });
        assert!(matches!(
            two_rate.max_then_min_density(&q(1.0, 4, 0.5, 0.1, -0.3)),
            Err(Error::Capability(_))
        ));
    }

    #[test]
    fn reduction_region_example() {
        assert!(in_reduction_region(1.0, 1.0, 0.1, 0.2, 0.0));
        let mut query = q(1.0, 3, 0.1, 0.2, 0.0);
        query.order = CrossingOrder::MinFirst;
        let c = classify_support(&query);
        assert!(c.in_min_first);
    }
}
