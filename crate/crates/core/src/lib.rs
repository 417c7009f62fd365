//! Exact probability laws of the telegraph process with two velocities
//! `a1 > a2` and two alternating reversal rates `lambda1, lambda2 > 0`,
//! together with the Monte Carlo machinery used to cross-validate them.
//!
//! The crate is `no_std`-compatible (with `alloc`); everything that touches
//! the operating system (threads, files, CLI) lives in the companion
//! `telegraph-kit` crate.
//!
//! Modules follow the structure of the problem:
//!
//! * [`special`] — generalized Mittag-Leffler function, modified Bessel
//!   functions `I0`/`I1`, log-gamma.
//! * [`counting`] — the alternating-rate switching process: pmf, arrival-time
//!   laws, alternating-sum laws, moments, rate MLE, simulation.
//! * [`telegraph`] — path simulation and the position laws of the motion.
//! * [`conditional`] — laws of the position at time `t` given the position at
//!   an earlier time `s`, with or without switch-count information.
//! * [`extremes`] — joint laws of (position, running minimum, running
//!   maximum) for the symmetric motion, split by barrier-crossing order.
//! * [`montecarlo`] — batch path simulation, histograms and goodness-of-fit
//!   statistics used as the independent oracle for every analytic law.
//! * [`quad`] — adaptive Gauss-Kronrod quadrature.
//! * [`rng`] — counter-seeded streams for reproducible parallel simulation.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod conditional;
pub mod counting;
mod error;
pub mod extremes;
pub mod montecarlo;
pub mod quad;
pub mod rng;
pub mod special;
pub mod telegraph;

pub use error::Error;

/// Result alias for fallible evaluations.
pub type Result<T> = core::result::Result<T, Error>;
