//! The telegraph process: a particle starting at the origin whose velocity
//! alternates between `a1` and `a2 < a1` at the events of the alternating
//! switching process. While moving at `a1` the switch rate is `lambda1`, at
//! `a2` it is `lambda2`.
//!
//! Besides exact path simulation, the module evaluates the position laws:
//! conditional on switch count and starting velocity, conditional on the
//! starting velocity alone (atom plus Bessel-form density), unconditional,
//! and the posterior of the starting velocity given the position.

#[cfg(not(feature = "std"))]
use num_traits::Float as _;

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::counting::{pow_ln, RatePair, SwitchRecord};
use crate::quad::{adaptive_quad, MAX_SUBDIVISIONS};
use crate::rng::Stream;
use crate::special::{bessel_i0_scaled, bessel_i1_scaled, ln_gamma, ln_ml1};
use crate::{counting, Error, Result};

/// Which of the two velocities the motion currently has.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Velocity {
    /// Moving at `a1`.
    Upper,
    /// Moving at `a2`.
    Lower,
}

impl Velocity {
    pub fn other(self) -> Self {
        match self {
            Velocity::Upper => Velocity::Lower,
            Velocity::Lower => Velocity::Upper,
        }
    }
}

/// Velocities and switch rates of the motion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProcessParams {
    pub a1: f64,
    pub a2: f64,
    pub rates: RatePair,
}

impl ProcessParams {
    pub fn new(a1: f64, a2: f64, rates: RatePair) -> Result<Self> {
        if !(a1 > a2) || !a1.is_finite() || !a2.is_finite() {
            return Err(Error::Domain("velocities must satisfy a1 > a2"));
        }
        Ok(Self { a1, a2, rates })
    }

    pub fn speed(&self, v: Velocity) -> f64 {
        match v {
            Velocity::Upper => self.a1,
            Velocity::Lower => self.a2,
        }
    }

    /// Switch rate active while moving at `v`.
    pub fn rate(&self, v: Velocity) -> f64 {
        match v {
            Velocity::Upper => self.rates.lambda1,
            Velocity::Lower => self.rates.lambda2,
        }
    }

    /// Rates in the alternation order seen from a motion starting at `v0`.
    pub fn rates_from(&self, v0: Velocity) -> RatePair {
        match v0 {
            Velocity::Upper => self.rates,
            Velocity::Lower => self.rates.swapped(),
        }
    }

    /// Same reversal rate in both directions.
    pub fn equal_rates(&self) -> bool {
        self.rates.equal()
    }

    /// Equal rates and opposite velocities `a1 = -a2 > 0`.
    pub fn is_symmetric(&self) -> bool {
        self.equal_rates() && self.a1 > 0.0 && self.a1 == -self.a2
    }
}

/// One simulated trajectory over `[0, t]`.
#[derive(Clone, Debug)]
pub struct PathSample {
    params: ProcessParams,
    v0: Velocity,
    switches: SwitchRecord,
}

/// Single-pass summary of a path.
#[derive(Clone, Copy, Debug)]
pub struct PathStats {
    pub position: f64,
    pub min: f64,
    pub max: f64,
    pub count: u32,
    pub alt_sum: f64,
}

impl PathSample {
    pub fn v0(&self) -> Velocity {
        self.v0
    }

    pub fn switches(&self) -> &SwitchRecord {
        &self.switches
    }

    pub fn horizon(&self) -> f64 {
        self.switches.horizon()
    }

    pub fn params(&self) -> &ProcessParams {
        &self.params
    }

    /// Switch count on `[0, s]`.
    pub fn count_up_to(&self, s: f64) -> u32 {
        self.switches.arrivals().iter().take_while(|&&a| a <= s).count() as u32
    }

    /// Velocity right after time `s`.
    pub fn velocity_at(&self, s: f64) -> Velocity {
        if self.count_up_to(s) % 2 == 0 {
            self.v0
        } else {
            self.v0.other()
        }
    }

    fn segments(&self) -> SegmentIter<'_> {
        SegmentIter {
            arrivals: self.switches.arrivals(),
            idx: 0,
            clock: 0.0,
            position: 0.0,
            speed: self.params.speed(self.v0),
            flip: self.params.speed(self.v0.other()),
            horizon: self.horizon(),
            done: false,
        }
    }

    /// Position at time `s` (0 <= s <= horizon).
    pub fn position(&self, s: f64) -> f64 {
        debug_assert!((0.0..=self.horizon()).contains(&s));
        for seg in self.segments() {
            if s <= seg.end {
                return seg.start_pos + seg.speed * (s - seg.start);
            }
        }
        // s == horizon handled by the last segment; unreachable otherwise.
        unreachable!("position query beyond horizon")
    }

    /// Running minimum over `[0, s]`.
    pub fn min_up_to(&self, s: f64) -> f64 {
        let mut min = 0.0f64;
        for seg in self.segments() {
            let end = if s <= seg.end { s } else { seg.end };
            min = min.min(seg.start_pos + seg.speed * (end - seg.start));
            if s <= seg.end {
                break;
            }
        }
        min
    }

    /// Running maximum over `[0, s]`.
    pub fn max_up_to(&self, s: f64) -> f64 {
        let mut max = 0.0f64;
        for seg in self.segments() {
            let end = if s <= seg.end { s } else { seg.end };
            max = max.max(seg.start_pos + seg.speed * (end - seg.start));
            if s <= seg.end {
                break;
            }
        }
        max
    }

    /// First time the path is strictly above `level`, if any.
    pub fn first_entry_above(&self, level: f64) -> Option<f64> {
        if 0.0 > level {
            return Some(0.0);
        }
        for seg in self.segments() {
            let end_pos = seg.start_pos + seg.speed * (seg.end - seg.start);
            if end_pos > level {
                // Entered during this segment; slope must be positive.
                return Some(seg.start + (level - seg.start_pos) / seg.speed);
            }
        }
        None
    }

    /// First time the path is strictly below `level`, if any.
    pub fn first_entry_below(&self, level: f64) -> Option<f64> {
        if 0.0 < level {
            return Some(0.0);
        }
        for seg in self.segments() {
            let end_pos = seg.start_pos + seg.speed * (seg.end - seg.start);
            if end_pos < level {
                return Some(seg.start + (level - seg.start_pos) / seg.speed);
            }
        }
        None
    }

    /// Position, running extremes, switch count and alternating sum in one
    /// sweep.
    pub fn stats(&self) -> PathStats {
        let mut min = 0.0f64;
        let mut max = 0.0f64;
        let mut position = 0.0f64;
        for seg in self.segments() {
            position = seg.start_pos + seg.speed * (seg.end - seg.start);
            min = min.min(position);
            max = max.max(position);
        }
        PathStats {
            position,
            min,
            max,
            count: self.switches.count() as u32,
            alt_sum: self.switches.alt_sum(),
        }
    }
}

struct Segment {
    start: f64,
    end: f64,
    start_pos: f64,
    speed: f64,
}

struct SegmentIter<'a> {
    arrivals: &'a [f64],
    idx: usize,
    clock: f64,
    position: f64,
    speed: f64,
    flip: f64,
    horizon: f64,
    done: bool,
}

impl Iterator for SegmentIter<'_> {
    type Item = Segment;

    fn next(&mut self) -> Option<Segment> {
        if self.done {
            return None;
        }
        let end = if self.idx < self.arrivals.len() {
            self.arrivals[self.idx]
        } else {
            self.done = true;
            self.horizon
        };
        let seg = Segment {
            start: self.clock,
            end,
            start_pos: self.position,
            speed: self.speed,
        };
        self.position += self.speed * (end - self.clock);
        self.clock = end;
        core::mem::swap(&mut self.speed, &mut self.flip);
        self.idx += 1;
        Some(seg)
    }
}

/// Simulate one path started at velocity `v0` over `[0, t]`.
pub fn simulate_path(
    params: ProcessParams,
    v0: Velocity,
    t: f64,
    rng: &mut Stream,
) -> PathSample {
    let switches = counting::simulate_switches(params.rates_from(v0), t, rng);
    PathSample { params, v0, switches }
}

/// Refill an existing sample in place, reusing its arrival buffer.
pub fn simulate_path_into(
    params: ProcessParams,
    v0: Velocity,
    t: f64,
    rng: &mut Stream,
    path: &mut PathSample,
) {
    path.params = params;
    path.v0 = v0;
    counting::simulate_switches_into(params.rates_from(v0), t, rng, &mut path.switches);
}

/// An empty path placeholder for buffer reuse.
pub fn empty_path(params: ProcessParams, v0: Velocity, t: f64) -> PathSample {
    PathSample {
        params,
        v0,
        switches: SwitchRecord::new(t, Vec::new()).expect("valid empty record"),
    }
}

/// Unconditional atom mass `P{T(t) = a_i t} = e^{-lambda_i t} / 2`.
pub fn atom_mass(params: ProcessParams, which: Velocity, t: f64) -> f64 {
    0.5 * (-params.rate(which) * t).exp()
}

/// Atom mass given the starting velocity: `e^{-lambda_i t}` at the matching
/// endpoint, zero at the other.
pub fn atom_mass_given_v(params: ProcessParams, v0: Velocity, which: Velocity, t: f64) -> f64 {
    if v0 == which {
        (-params.rate(which) * t).exp()
    } else {
        0.0
    }
}

/// Density of `T(t)` given `N(t) = n >= 1` and `V(0) = v0`, on the open
/// interval `(a2 t, a1 t)`. The odd case does not depend on `v0`.
pub fn density_given_n_v(params: ProcessParams, t: f64, n: u32, v0: Velocity, x: f64) -> f64 {
    debug_assert!(n >= 1 && t > 0.0);
    let ProcessParams { a1, a2, rates } = params;
    if !(a2 * t < x && x < a1 * t) {
        return 0.0;
    }
    let d = rates.lambda1 - rates.lambda2;
    let span = (a1 - a2) * t;
    let up = a1 * t - x;
    let down = x - a2 * t;
    let drift = d * up / (a1 - a2);
    let ln_v = if n % 2 == 1 {
        let k = f64::from((n - 1) / 2);
        drift - ln_ml1(k + 1.0, 2.0 * k + 2.0, d * t) + pow_ln(up, k) + pow_ln(down, k)
            - 2.0 * ln_gamma(k + 1.0)
            - (2.0 * k + 1.0) * span.ln()
    } else {
        let k = f64::from(n / 2);
        let base = -ln_gamma(k + 1.0) - ln_gamma(k) - 2.0 * k * span.ln();
        match v0 {
            Velocity::Upper => {
                drift - ln_ml1(k, 2.0 * k + 1.0, d * t)
                    + pow_ln(up, k - 1.0)
                    + pow_ln(down, k)
                    + base
            }
            Velocity::Lower => {
                drift - ln_ml1(k + 1.0, 2.0 * k + 1.0, d * t)
                    + pow_ln(up, k)
                    + pow_ln(down, k - 1.0)
                    + base
            }
        }
    };
    ln_v.exp()
}

/// Absolutely continuous density of `T(t)` given `V(0) = v0` on
/// `(a2 t, a1 t)`.
///
/// At exactly `x = v0 t` the printed formula is a `0 * inf` form whose
/// directional limit is finite but which the evaluator flags with `+inf`;
/// quadrature never places nodes on interval endpoints.
pub fn density_given_v(params: ProcessParams, t: f64, v0: Velocity, x: f64) -> f64 {
    let ProcessParams { a1, a2, rates } = params;
    let RatePair { lambda1: l1, lambda2: l2 } = rates;
    if x == params.speed(v0) * t {
        return f64::INFINITY;
    }
    if !(a2 * t < x && x < a1 * t) {
        return 0.0;
    }
    let up = a1 * t - x;
    let down = x - a2 * t;
    let width = a1 - a2;
    let z = 2.0 * (l1 * l2).sqrt() * (up * down).sqrt() / width;
    let exponent = -(l1 * down + l2 * up) / width + z;
    let lam_h = params.rate(v0);
    let v0t = params.speed(v0) * t;
    let v1t = params.speed(v0.other()) * t;
    let ratio = ((v1t - x).abs() / (v0t - x).abs()).sqrt();
    exponent.exp() * (lam_h * bessel_i0_scaled(z) + (l1 * l2).sqrt() * ratio * bessel_i1_scaled(z))
        / width
}

/// Unconditional absolutely continuous density: the uniform mixture of
/// [`density_given_v`] over the two starting velocities.
pub fn density_unconditional(params: ProcessParams, t: f64, x: f64) -> f64 {
    0.5 * (density_given_v(params, t, Velocity::Upper, x)
        + density_given_v(params, t, Velocity::Lower, x))
}

/// Posterior probability of the starting velocity given position and switch
/// count, `P{V(0) = v0 | T(t) = x, N(t) = n}`.
///
/// Odd `n` gives 1/2 for any rates; the even case is stated for equal rates
/// only and is rejected otherwise.
pub fn velocity_posterior(
    params: ProcessParams,
    t: f64,
    n: u32,
    v0: Velocity,
    x: f64,
) -> Result<f64> {
    let ProcessParams { a1, a2, .. } = params;
    if n == 0 {
        return Err(Error::Domain("posterior needs at least one switch"));
    }
    if !(a2 * t < x && x < a1 * t) {
        return Err(Error::Domain("position outside the open support"));
    }
    if n % 2 == 1 {
        return Ok(0.5);
    }
    if !params.equal_rates() {
        return Err(Error::PaperScope(
            "even-count velocity posterior is stated for equal rates only",
        ));
    }
    let v1t = params.speed(v0.other()) * t;
    Ok((v1t - x).abs() / ((a1 - a2) * t))
}

/// A point mass of a mixed law.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MassPoint {
    pub location: f64,
    pub mass: f64,
}

/// A distribution made of finitely many atoms plus an absolutely continuous
/// density supported on an open interval.
pub struct MixedLaw {
    atoms: Vec<MassPoint>,
    support: (f64, f64),
    density: Box<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl MixedLaw {
    pub fn new(
        atoms: Vec<MassPoint>,
        support: (f64, f64),
        density: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    ) -> Self {
        debug_assert!(support.0 < support.1);
        Self { atoms, support, density }
    }

    pub fn atoms(&self) -> &[MassPoint] {
        &self.atoms
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    /// Absolutely continuous density at `y` (zero outside the support).
    pub fn density(&self, y: f64) -> f64 {
        if y <= self.support.0 || y >= self.support.1 {
            return 0.0;
        }
        (self.density)(y)
    }

    /// Mass of the atom exactly at `y`, if any.
    pub fn atom_at(&self, y: f64) -> f64 {
        self.atoms
            .iter()
            .find(|a| a.location == y)
            .map(|a| a.mass)
            .unwrap_or(0.0)
    }

    /// Atom masses plus the integral of the density.
    pub fn total_mass(&self, tol: f64) -> Result<f64> {
        let atom_total: f64 = self.atoms.iter().map(|a| a.mass).sum();
        let q = adaptive_quad(
            |y| self.density(y),
            self.support.0,
            self.support.1,
            tol,
            MAX_SUBDIVISIONS,
        )?;
        Ok(atom_total + q.value)
    }

    /// Right-continuous CDF at `y`.
    pub fn cdf(&self, y: f64, tol: f64) -> Result<f64> {
        let atom_total: f64 = self
            .atoms
            .iter()
            .filter(|a| a.location <= y)
            .map(|a| a.mass)
            .sum();
        let hi = y.min(self.support.1);
        let ac = if hi <= self.support.0 {
            0.0
        } else {
            adaptive_quad(|u| self.density(u), self.support.0, hi, tol, MAX_SUBDIVISIONS)?.value
        };
        Ok(atom_total + ac)
    }
}

impl core::fmt::Debug for MixedLaw {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("MixedLaw")
            .field("atoms", &self.atoms)
            .field("support", &self.support)
            .finish_non_exhaustive()
    }
}

/// The full law of `T(t)` given `V(0) = v0`: one atom at `v0 t` plus the
/// Bessel-form density.
pub fn law_given_v(params: ProcessParams, v0: Velocity, t: f64) -> MixedLaw {
    let atom = MassPoint {
        location: params.speed(v0) * t,
        mass: atom_mass_given_v(params, v0, v0, t),
    };
    MixedLaw::new(
        alloc::vec![atom],
        (params.a2 * t, params.a1 * t),
        Box::new(move |x| density_given_v(params, t, v0, x)),
    )
}

/// The unconditional law of `T(t)` (starting velocity uniform on the pair):
/// atoms `e^{-lambda_i t}/2` at `a_i t` plus the mixture density.
pub fn law_unconditional(params: ProcessParams, t: f64) -> MixedLaw {
    let atoms = alloc::vec![
        MassPoint {
            location: params.a2 * t,
            mass: atom_mass(params, Velocity::Lower, t),
        },
        MassPoint {
            location: params.a1 * t,
            mass: atom_mass(params, Velocity::Upper, t),
        },
    ];
    MixedLaw::new(
        atoms,
        (params.a2 * t, params.a1 * t),
        Box::new(move |x| density_unconditional(params, t, x)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(a1: f64, a2: f64, l1: f64, l2: f64) -> ProcessParams {
        ProcessParams::new(a1, a2, RatePair::new(l1, l2).unwrap()).unwrap()
    }

    #[test]
    fn zero_switches_moves_at_v0() {
        let p = params(1.0, -1.0, 2.0, 1.0);
        let path = PathSample {
            params: p,
            v0: Velocity::Upper,
            switches: SwitchRecord::new(2.0, alloc::vec![]).unwrap(),
        };
        assert_eq!(path.position(2.0), 2.0);
        assert_eq!(path.max_up_to(2.0), 2.0);
        assert_eq!(path.min_up_to(2.0), 0.0);
    }

    #[test]
    fn position_is_piecewise_linear() {
        let p = params(1.0, -1.0, 1.0, 1.0);
        let path = PathSample {
            params: p,
            v0: Velocity::Upper,
            switches: SwitchRecord::new(1.0, alloc::vec![0.25, 0.75]).unwrap(),
        };
        assert!((path.position(0.25) - 0.25).abs() < 1e-15);
        assert!((path.position(0.75) - (-0.25)).abs() < 1e-15);
        assert!((path.position(1.0) - 0.0).abs() < 1e-15);
        assert!((path.min_up_to(1.0) - (-0.25)).abs() < 1e-15);
        assert!((path.max_up_to(1.0) - 0.25).abs() < 1e-15);
        assert_eq!(path.velocity_at(0.5), Velocity::Lower);
        assert_eq!(path.velocity_at(0.9), Velocity::Upper);
    }

    #[test]
    fn entry_times_respect_strictness() {
        let p = params(1.0, -1.0, 1.0, 1.0);
        let path = PathSample {
            params: p,
            v0: Velocity::Upper,
            switches: SwitchRecord::new(1.0, alloc::vec![0.5]).unwrap(),
        };
        assert_eq!(path.first_entry_above(0.0), Some(0.0));
        assert_eq!(path.first_entry_above(0.3), Some(0.3));
        assert_eq!(path.first_entry_above(0.5), None);
        // Comes back down to 0 at t = 1 but never goes strictly below.
        assert_eq!(path.first_entry_below(0.0), None);
    }

    #[test]
    fn atom_masses() {
        let p = params(1.0, -1.0, 2.0, 1.0);
        assert!((atom_mass(p, Velocity::Upper, 1.0) - 0.5 * (-2.0f64).exp()).abs() < 1e-16);
        // t = 0 limit: one half.
        assert!((atom_mass(p, Velocity::Upper, 0.0) - 0.5).abs() < 1e-16);
        assert_eq!(atom_mass_given_v(p, Velocity::Upper, Velocity::Lower, 1.0), 0.0);
    }

    #[test]
    fn single_switch_equal_rates_is_uniform() {
        let p = params(1.0, -1.0, 1.5, 1.5);
        for &x in &[-0.9, -0.2, 0.4, 0.8] {
            let v = density_given_n_v(p, 1.0, 1, Velocity::Upper, x);
            assert!((v - 0.5).abs() < 1e-13, "x={x} v={v}");
        }
    }

    #[test]
    fn density_given_v_boundary_markers() {
        let p = params(1.0, -1.0, 2.0, 1.0);
        assert_eq!(density_given_v(p, 1.0, Velocity::Upper, 1.0), f64::INFINITY);
        assert_eq!(density_given_v(p, 1.0, Velocity::Upper, -1.0), 0.0);
        assert_eq!(density_given_v(p, 1.0, Velocity::Upper, 1.5), 0.0);
    }

    #[test]
    fn posterior_cases() {
        let p = params(1.0, -1.0, 1.0, 1.0);
        assert_eq!(velocity_posterior(p, 1.0, 3, Velocity::Upper, 0.4).unwrap(), 0.5);
        // Midpoint threshold: both velocities equally likely.
        let mid = velocity_posterior(p, 1.0, 2, Velocity::Upper, 0.0).unwrap();
        assert!((mid - 0.5).abs() < 1e-15);
        // Positive position favors the positive start.
        let up = velocity_posterior(p, 1.0, 2, Velocity::Upper, 0.6).unwrap();
        let down = velocity_posterior(p, 1.0, 2, Velocity::Lower, 0.6).unwrap();
        assert!(up > 0.5 && down < 0.5);
        assert!((up + down - 1.0).abs() < 1e-15);
        // Two-rate even case is out of the paper's statement.
        let q = params(1.0, -1.0, 2.0, 1.0);
        assert!(matches!(
            velocity_posterior(q, 1.0, 2, Velocity::Upper, 0.1),
            Err(Error::PaperScope(_))
        ));
    }

    #[test]
    fn law_given_v_masses_sum_to_one() {
        let p = params(1.5, -0.3, 2.0, 1.0);
        for v0 in [Velocity::Upper, Velocity::Lower] {
            let law = law_given_v(p, v0, 0.8);
            let total = law.total_mass(1e-10).unwrap();
            assert!((total - 1.0).abs() < 1e-8, "v0={v0:?} total={total}");
        }
    }
}
