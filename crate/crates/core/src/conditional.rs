//! Laws of the position `T(t)` conditioned on the position at an earlier
//! time `s`, `T(s) = x`, optionally together with switch-count information
//! on `[0, s]`.
//!
//! The count-and-velocity law and the odd-parity law hold for two distinct
//! rates. The even-parity and position-only laws are stated for equal rates
//! (`lambda1 = lambda2`) only; requests outside that scope are rejected
//! rather than extrapolated.

#[cfg(not(feature = "std"))]
use num_traits::Float as _;

use alloc::boxed::Box;

use crate::special::{bessel_i0_scaled, bessel_i1_scaled};
use crate::telegraph::{
    atom_mass_given_v, density_given_v, density_unconditional, MassPoint, MixedLaw,
    ProcessParams, Velocity,
};
use crate::counting::Parity;
use crate::{Error, Result};

/// What is known about the motion at the earlier time `s`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Known {
    /// Only the position.
    PosOnly,
    /// Position and the parity of the switch count.
    PosParity(Parity),
    /// Position, exact switch count, and starting velocity.
    PosCountVel { k: u32, v0: Velocity },
}

/// Conditioning data: `T(s) = x` with `0 < s < t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConditioningContext {
    pub s: f64,
    pub t: f64,
    pub x: f64,
    pub known: Known,
}

impl ConditioningContext {
    pub fn new(params: &ProcessParams, s: f64, t: f64, x: f64, known: Known) -> Result<Self> {
        if !(0.0 < s && s < t) {
            return Err(Error::Domain("need 0 < s < t"));
        }
        let interior = params.a2 * s < x && x < params.a1 * s;
        match known {
            Known::PosCountVel { k: 0, v0 } => {
                // Zero switches pin the position to the endpoint v0 * s.
                if x != params.speed(v0) * s {
                    return Err(Error::Domain("k = 0 requires x = v0 * s"));
                }
            }
            _ => {
                if !interior {
                    return Err(Error::Domain(
                        "conditioning position must lie strictly inside (a2 s, a1 s)",
                    ));
                }
            }
        }
        Ok(Self { s, t, x, known })
    }
}

/// Velocity after the `k`-th switch for a motion started at `v0`.
pub fn v_after_k(v0: Velocity, k: u32) -> Velocity {
    if k % 2 == 0 {
        v0
    } else {
        v0.other()
    }
}

/// Law of `T(t)` given `T(s) = x`, `N(s) = k`, `V(0) = v0`: the motion
/// restarts from `x` at the speed reached after `k` switches. Valid for two
/// distinct rates.
pub fn law_given_pos_count_vel(
    params: ProcessParams,
    ctx: &ConditioningContext,
    k: u32,
    v0: Velocity,
) -> Result<MixedLaw> {
    let dt = ctx.t - ctx.s;
    let x = ctx.x;
    let vk = v_after_k(v0, k);
    let atom = MassPoint {
        location: x + params.speed(vk) * dt,
        mass: atom_mass_given_v(params, vk, vk, dt),
    };
    let support = (x + params.a2 * dt, x + params.a1 * dt);
    Ok(MixedLaw::new(
        alloc::vec![atom],
        support,
        Box::new(move |y| density_given_v(params, dt, vk, y - x)),
    ))
}

/// The correction term added to the unconditional density when the switch
/// count at time `s` is known to be even (equal rates). May be negative;
/// integrates to zero over the displacement support.
pub fn g_term(lambda: f64, a1: f64, a2: f64, s: f64, dt: f64, x: f64, u: f64) -> f64 {
    let p = (a1 * dt - u) * (u - a2 * dt);
    if p <= 0.0 {
        return 0.0;
    }
    let root = p.sqrt();
    let z = 2.0 * lambda * root / (a1 - a2);
    let bracket =
        4.0 * x * u + (a1 + a2) * ((a1 + a2) * s * dt - 2.0 * s * u - 2.0 * dt * x);
    // e^{-lambda dt} I_1(z) = e^{z - lambda dt} (e^{-z} I_1(z)), and
    // z <= lambda dt by AM-GM, so the exponent never overflows.
    (z - lambda * dt).exp() * bessel_i1_scaled(z) / root * lambda
        / (2.0 * (a1 - a2) * (a1 - a2) * s)
        * bracket
}

/// `P{N(s) even | T(s) = x}` for the equal-rate motion, `x` strictly inside
/// `(a2 s, a1 s)`.
pub fn parity_posterior(lambda: f64, a1: f64, a2: f64, s: f64, x: f64) -> f64 {
    debug_assert!(a2 * s < x && x < a1 * s);
    let a = ((a1 * s - x) * (x - a2 * s)).sqrt();
    let zeta = 2.0 * lambda * a / (a1 - a2);
    let i0 = bessel_i0_scaled(zeta);
    let i1 = bessel_i1_scaled(zeta);
    let weighted = (a1 - a2) * s * i1;
    weighted / (2.0 * a * i0 + weighted)
}

fn require_equal_rates(params: &ProcessParams, what: &'static str) -> Result<f64> {
    if !params.equal_rates() {
        let _ = what;
        return Err(Error::PaperScope(
            "this conditional law is stated for equal rates only",
        ));
    }
    Ok(params.rates.lambda1)
}

/// Posterior weight of the upper starting velocity given an even switch
/// count at `s`.
fn even_weight_upper(params: &ProcessParams, s: f64, x: f64) -> f64 {
    (x - params.a2 * s) / ((params.a1 - params.a2) * s)
}

/// Law of `T(t)` given `T(s) = x` and the parity of `N(s)`.
///
/// Odd parity holds for two distinct rates and equals the unconditional law
/// of the increment. Even parity (equal rates only) adds the [`g_term`]
/// correction to the density and weighs the endpoint atoms by the posterior
/// of the starting velocity.
pub fn law_given_pos_parity(
    params: ProcessParams,
    ctx: &ConditioningContext,
    parity: Parity,
) -> Result<MixedLaw> {
    let dt = ctx.t - ctx.s;
    let s = ctx.s;
    let x = ctx.x;
    let support = (x + params.a2 * dt, x + params.a1 * dt);
    match parity {
        Parity::Odd => {
            let atoms = alloc::vec![
                MassPoint {
                    location: x + params.a2 * dt,
                    mass: 0.5 * (-params.rates.lambda2 * dt).exp(),
                },
                MassPoint {
                    location: x + params.a1 * dt,
                    mass: 0.5 * (-params.rates.lambda1 * dt).exp(),
                },
            ];
            Ok(MixedLaw::new(
                atoms,
                support,
                Box::new(move |y| density_unconditional(params, dt, y - x)),
            ))
        }
        Parity::Even => {
            let lambda = require_equal_rates(&params, "even parity")?;
            let q_up = even_weight_upper(&params, s, x);
            let no_switch = (-lambda * dt).exp();
            let atoms = alloc::vec![
                MassPoint {
                    location: x + params.a2 * dt,
                    mass: (1.0 - q_up) * no_switch,
                },
                MassPoint {
                    location: x + params.a1 * dt,
                    mass: q_up * no_switch,
                },
            ];
            let (a1, a2) = (params.a1, params.a2);
            Ok(MixedLaw::new(
                atoms,
                support,
                Box::new(move |y| {
                    density_unconditional(params, dt, y - x)
                        + g_term(lambda, a1, a2, s, dt, x, y - x)
                }),
            ))
        }
    }
}

/// Law of `T(t)` given only `T(s) = x` (equal rates): the parity mixture of
/// the even and odd laws, with the even weight given by
/// [`parity_posterior`].
pub fn law_given_pos(params: ProcessParams, ctx: &ConditioningContext) -> Result<MixedLaw> {
    let lambda = require_equal_rates(&params, "position-only")?;
    let dt = ctx.t - ctx.s;
    let s = ctx.s;
    let x = ctx.x;
    let p_even = parity_posterior(lambda, params.a1, params.a2, s, x);
    let q_up = even_weight_upper(&params, s, x);
    let no_switch = (-lambda * dt).exp();
    let odd_half = 0.5 * (1.0 - p_even);
    let atoms = alloc::vec![
        MassPoint {
            location: x + params.a2 * dt,
            mass: no_switch * (p_even * (1.0 - q_up) + odd_half),
        },
        MassPoint {
            location: x + params.a1 * dt,
            mass: no_switch * (p_even * q_up + odd_half),
        },
    ];
    let (a1, a2) = (params.a1, params.a2);
    Ok(MixedLaw::new(
        atoms,
        (x + a2 * dt, x + a1 * dt),
        Box::new(move |y| {
            density_unconditional(params, dt, y - x)
                + p_even * g_term(lambda, a1, a2, s, dt, x, y - x)
        }),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::RatePair;

    fn params(a1: f64, a2: f64, l1: f64, l2: f64) -> ProcessParams {
        ProcessParams::new(a1, a2, RatePair::new(l1, l2).unwrap()).unwrap()
    }

    #[test]
    fn velocity_after_k_alternates() {
        assert_eq!(v_after_k(Velocity::Upper, 0), Velocity::Upper);
        assert_eq!(v_after_k(Velocity::Upper, 1), Velocity::Lower);
        assert_eq!(v_after_k(Velocity::Lower, 4), Velocity::Lower);
    }

    #[test]
    fn context_validation() {
        let p = params(1.0, -1.0, 1.0, 1.0);
        assert!(ConditioningContext::new(&p, 0.5, 1.0, 0.1, Known::PosOnly).is_ok());
        assert!(ConditioningContext::new(&p, 0.5, 1.0, 0.5, Known::PosOnly).is_err());
        assert!(ConditioningContext::new(&p, 1.0, 0.5, 0.1, Known::PosOnly).is_err());
        // k = 0 pins the position to the endpoint.
        let known = Known::PosCountVel { k: 0, v0: Velocity::Upper };
        assert!(ConditioningContext::new(&p, 0.5, 1.0, 0.5, known).is_ok());
        assert!(ConditioningContext::new(&p, 0.5, 1.0, 0.1, known).is_err());
    }

    #[test]
    fn g_vanishes_at_the_centered_position() {
        let (a1, a2, lam, s, dt) = (1.5, -0.3, 1.2, 0.5, 0.5);
        let x = (a1 + a2) * s / 2.0;
        for i in 0..50 {
            let u = a2 * dt + (a1 - a2) * dt * (i as f64 + 0.5) / 50.0;
            assert_eq!(g_term(lam, a1, a2, s, dt, x, u), 0.0);
        }
    }

    #[test]
    fn g_matches_derivative_form() {
        let (a1, a2, lam, s, dt, x) = (1.5, -0.3, 1.2, 0.5, 0.5, 0.2);
        for i in 1..40 {
            let u = a2 * dt + (a1 - a2) * dt * i as f64 / 40.0;
            let p = (a1 * dt - u) * (u - a2 * dt);
            let z = 2.0 * lam / (a1 - a2) * p.sqrt();
            let dz = lam * ((a1 + a2) * dt - 2.0 * u) / ((a1 - a2) * p.sqrt());
            let deriv_form = (z - lam * dt).exp()
                * ((a1 + a2) * s - 2.0 * x)
                / (2.0 * (a1 - a2) * s)
                * bessel_i1_scaled(z)
                * dz;
            let g = g_term(lam, a1, a2, s, dt, x, u);
            assert!(
                (g - deriv_form).abs() <= 1e-10 * g.abs().max(1e-3),
                "u={u} g={g} deriv={deriv_form}"
            );
        }
    }

    #[test]
    fn g_sign_structure_symmetric_case() {
        // For the symmetric motion g = x * u * f with f > 0.
        let (c, lam, s, dt, x) = (1.0, 1.2, 0.5, 0.5, 0.2);
        for i in 1..40 {
            let u = -c * dt + 2.0 * c * dt * i as f64 / 40.0;
            if u == 0.0 {
                continue;
            }
            let g = g_term(lam, c, -c, s, dt, x, u);
            assert_eq!(g > 0.0, x * u > 0.0, "u={u} g={g}");
        }
    }

    #[test]
    fn even_parity_needs_equal_rates() {
        let p = params(1.0, -1.0, 2.0, 1.0);
        let ctx = ConditioningContext::new(&p, 0.5, 1.0, 0.1, Known::PosParity(Parity::Even))
            .unwrap();
        assert!(matches!(
            law_given_pos_parity(p, &ctx, Parity::Even),
            Err(Error::PaperScope(_))
        ));
        // Odd parity is fine with two rates.
        assert!(law_given_pos_parity(p, &ctx, Parity::Odd).is_ok());
    }

    #[test]
    fn restart_law_total_mass() {
        let p = params(1.0, -1.0, 2.0, 1.0);
        let known = Known::PosCountVel { k: 1, v0: Velocity::Upper };
        let ctx = ConditioningContext::new(&p, 0.5, 1.0, 0.1, known).unwrap();
        let law = law_given_pos_count_vel(p, &ctx, 1, Velocity::Upper).unwrap();
        let total = law.total_mass(1e-10).unwrap();
        assert!((total - 1.0).abs() < 1e-8, "total={total}");
        // Atom sits at x + v1 (t - s) since one switch flipped the speed.
        assert_eq!(law.atoms()[0].location, 0.1 + (-1.0) * 0.5);
    }

    #[test]
    fn parity_mixture_identity() {
        let p = params(1.0, -1.0, 1.2, 1.2);
        let ctx = ConditioningContext::new(&p, 0.5, 1.0, 0.1, Known::PosOnly).unwrap();
        let pos_only = law_given_pos(p, &ctx).unwrap();
        let even = law_given_pos_parity(p, &ctx, Parity::Even).unwrap();
        let odd = law_given_pos_parity(p, &ctx, Parity::Odd).unwrap();
        let pe = parity_posterior(1.2, 1.0, -1.0, 0.5, 0.1);
        for i in 1..60 {
            let y = 0.1 - 0.5 + i as f64 / 60.0;
            let mix = pe * even.density(y) + (1.0 - pe) * odd.density(y);
            let lhs = pos_only.density(y);
            assert!((lhs - mix).abs() <= 1e-10 * lhs.abs().max(1e-12), "y={y}");
        }
        for (a, e, o) in
            pos_only.atoms().iter().zip(even.atoms()).zip(odd.atoms()).map(|((a, e), o)| (a, e, o))
        {
            let mix = pe * e.mass + (1.0 - pe) * o.mass;
            assert!((a.mass - mix).abs() < 1e-15);
        }
    }
}
