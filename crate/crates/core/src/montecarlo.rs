//! Batch path simulation and the empirical summaries used to cross-check
//! every analytic law in the crate.
//!
//! Paths are simulated from per-index streams (see [`crate::rng`]) and
//! consumed chunk by chunk; merging per-chunk collectors in chunk order
//! makes results identical no matter how chunks are distributed over
//! workers. The serial driver here follows the same chunked schedule as the
//! parallel driver in the companion crate, so both produce bit-identical
//! summaries for a given seed.

#[cfg(not(feature = "std"))]
use num_traits::Float as _;

use alloc::vec;
use alloc::vec::Vec;

use crate::extremes::CrossingOrder;
use crate::rng::Stream;
use crate::telegraph::{
    empty_path, simulate_path_into, MassPoint, PathSample, ProcessParams, Velocity,
};
use crate::{Error, Result};

/// Paths per scheduling chunk; fixed so that worker count cannot influence
/// merge order or stream assignment.
pub const CHUNK_SIZE: u64 = 8192;

/// Default sample size for unconditional law checks.
pub const UNCONDITIONAL_SAMPLES: u64 = 1_000_000;
/// Default sample size for conditioned law checks.
pub const CONDITIONED_SAMPLES: u64 = 10_000_000;
/// Minimum acceptance probability for conditional histograms.
pub const ACCEPTANCE_FLOOR: f64 = 1e-6;

/// Starting velocity of each simulated path.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StartVelocity {
    Fixed(Velocity),
    /// Uniform draw between the two velocities, per path.
    Mixture,
}

/// One batch of paths: parameters, horizon, path count and seed.
#[derive(Clone, Copy, Debug)]
pub struct BatchConfig {
    pub params: ProcessParams,
    pub start: StartVelocity,
    pub horizon: f64,
    pub count: u64,
    pub seed: u64,
}

/// Anything that folds paths into a summary and merges associatively.
pub trait Collector {
    fn observe(&mut self, path: &PathSample);
    fn merge(&mut self, other: Self);
}

/// Simulate the path with the given global index into `path`.
pub fn simulate_indexed(cfg: &BatchConfig, index: u64, path: &mut PathSample) {
    let mut stream = Stream::for_path(cfg.seed, index);
    let v0 = match cfg.start {
        StartVelocity::Fixed(v) => v,
        StartVelocity::Mixture => {
            if stream.coin() {
                Velocity::Upper
            } else {
                Velocity::Lower
            }
        }
    };
    simulate_path_into(cfg.params, v0, cfg.horizon, &mut stream, path);
}

/// Feed one chunk of paths into a collector.
pub fn run_chunk<C: Collector>(cfg: &BatchConfig, chunk: u64, out: &mut C) {
    let lo = chunk * CHUNK_SIZE;
    let hi = ((chunk + 1) * CHUNK_SIZE).min(cfg.count);
    let mut path = empty_path(cfg.params, Velocity::Upper, cfg.horizon);
    for index in lo..hi {
        simulate_indexed(cfg, index, &mut path);
        out.observe(&path);
    }
}

/// Number of chunks a batch splits into.
pub fn chunk_count(cfg: &BatchConfig) -> u64 {
    cfg.count.div_ceil(CHUNK_SIZE)
}

/// Run the whole batch serially, merging per-chunk collectors in order.
pub fn run_batch<C: Collector, F: Fn() -> C>(cfg: &BatchConfig, factory: F) -> C {
    let mut acc = factory();
    for chunk in 0..chunk_count(cfg) {
        let mut part = factory();
        run_chunk(cfg, chunk, &mut part);
        acc.merge(part);
    }
    acc
}

/// A single accepted observation: either a continuous value or the index of
/// a registered atom.
#[derive(Clone, Copy, Debug)]
pub struct Observation {
    pub value: f64,
    pub atom: Option<usize>,
}

/// Histogram collector over an extractor/predicate closure. Returning
/// `None` rejects the path (the conditioning event failed).
#[derive(Clone)]
pub struct HistogramCollector<F> {
    extract: F,
    lo: f64,
    hi: f64,
    counts: Vec<u64>,
    below: u64,
    above: u64,
    atom_locations: Vec<f64>,
    atom_counts: Vec<u64>,
    attempted: u64,
    accepted: u64,
    samples: Option<Vec<f64>>,
}

impl<F: Fn(&PathSample) -> Option<Observation>> HistogramCollector<F> {
    pub fn new(
        extract: F,
        lo: f64,
        hi: f64,
        bins: usize,
        atom_locations: Vec<f64>,
        keep_samples: bool,
    ) -> Self {
        debug_assert!(lo < hi && bins > 0);
        let atom_counts = vec![0; atom_locations.len()];
        Self {
            extract,
            lo,
            hi,
            counts: vec![0; bins],
            below: 0,
            above: 0,
            atom_locations,
            atom_counts,
            attempted: 0,
            accepted: 0,
            samples: if keep_samples { Some(Vec::new()) } else { None },
        }
    }

    pub fn accepted(&self) -> u64 {
        self.accepted
    }

    pub fn attempted(&self) -> u64 {
        self.attempted
    }

    /// Convert the counts into masses and standard errors.
    pub fn summary(&self) -> EmpiricalSummary {
        let n = self.accepted.max(1) as f64;
        let bins = self.counts.len();
        let width = (self.hi - self.lo) / bins as f64;
        let bin_edges: Vec<f64> =
            (0..=bins).map(|i| self.lo + width * i as f64).collect();
        let bin_masses: Vec<f64> = self.counts.iter().map(|&c| c as f64 / n).collect();
        let standard_errors: Vec<f64> = bin_masses
            .iter()
            .map(|&p| (p * (1.0 - p) / n).sqrt())
            .collect();
        let atom_masses: Vec<MassPoint> = self
            .atom_locations
            .iter()
            .zip(&self.atom_counts)
            .map(|(&location, &c)| MassPoint { location, mass: c as f64 / n })
            .collect();
        EmpiricalSummary {
            sample_count: self.accepted,
            attempted: self.attempted,
            bin_edges,
            bin_masses,
            standard_errors,
            atom_masses,
            below_mass: self.below as f64 / n,
            above_mass: self.above as f64 / n,
            samples: self.samples.clone(),
        }
    }
}

impl<F: Fn(&PathSample) -> Option<Observation>> Collector for HistogramCollector<F> {
    fn observe(&mut self, path: &PathSample) {
        self.attempted += 1;
        let Some(obs) = (self.extract)(path) else {
            return;
        };
        self.accepted += 1;
        if let Some(samples) = &mut self.samples {
            samples.push(obs.value);
        }
        if let Some(i) = obs.atom {
            self.atom_counts[i] += 1;
            return;
        }
        if obs.value < self.lo {
            self.below += 1;
        } else if obs.value >= self.hi {
            self.above += 1;
        } else {
            let bins = self.counts.len();
            let idx = ((obs.value - self.lo) / (self.hi - self.lo) * bins as f64) as usize;
            let idx = idx.min(bins - 1);
            self.counts[idx] += 1;
        }
    }

    fn merge(&mut self, other: Self) {
        debug_assert_eq!(self.counts.len(), other.counts.len());
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        for (a, b) in self.atom_counts.iter_mut().zip(&other.atom_counts) {
            *a += b;
        }
        self.below += other.below;
        self.above += other.above;
        self.attempted += other.attempted;
        self.accepted += other.accepted;
        if let (Some(mine), Some(theirs)) = (&mut self.samples, other.samples) {
            mine.extend(theirs);
        }
    }
}

/// Monte Carlo sample statistics for one law: binned masses with standard
/// errors, atom masses, and (optionally) the raw sample values.
#[derive(Clone, Debug)]
pub struct EmpiricalSummary {
    pub sample_count: u64,
    pub attempted: u64,
    pub bin_edges: Vec<f64>,
    pub bin_masses: Vec<f64>,
    pub standard_errors: Vec<f64>,
    pub atom_masses: Vec<MassPoint>,
    pub below_mass: f64,
    pub above_mass: f64,
    pub samples: Option<Vec<f64>>,
}

impl EmpiricalSummary {
    pub fn bin_width(&self) -> f64 {
        self.bin_edges[1] - self.bin_edges[0]
    }

    pub fn bin_center(&self, i: usize) -> f64 {
        0.5 * (self.bin_edges[i] + self.bin_edges[i + 1])
    }

    /// Empirical density estimate for bin `i`.
    pub fn bin_density(&self, i: usize) -> f64 {
        self.bin_masses[i] / self.bin_width()
    }

    /// `z`-score of an analytic bin mass against the empirical one.
    pub fn z_score(&self, i: usize, analytic_mass: f64) -> f64 {
        let n = self.sample_count.max(1) as f64;
        let se = (analytic_mass * (1.0 - analytic_mass) / n).sqrt();
        if se == 0.0 {
            return if self.bin_masses[i] == analytic_mass { 0.0 } else { f64::INFINITY };
        }
        (self.bin_masses[i] - analytic_mass) / se
    }

    /// Everything accounted for: bins + atoms + out-of-range mass.
    pub fn total_mass(&self) -> f64 {
        self.bin_masses.iter().sum::<f64>()
            + self.atom_masses.iter().map(|a| a.mass).sum::<f64>()
            + self.below_mass
            + self.above_mass
    }
}

/// Kolmogorov-Smirnov sup-distance between the summary and a
/// right-continuous CDF.
///
/// With retained samples the statistic is exact: atoms among the registered
/// locations are handled through the left limit `F(x-) = F(x) - jump(x)`.
/// Without samples the comparison falls back to the bin edges.
pub fn ks_distance(summary: &EmpiricalSummary, cdf: impl Fn(f64) -> f64) -> f64 {
    if let Some(samples) = &summary.samples {
        let mut sorted = samples.clone();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len() as f64;
        let mut d = 0.0f64;
        for (i, &x) in sorted.iter().enumerate() {
            let f = cdf(x);
            let f_left = f - analytic_jump(summary, x);
            d = d.max((f - (i as f64 + 1.0) / n).abs());
            d = d.max((f_left - i as f64 / n).abs());
        }
        d
    } else {
        let mut cum = summary.below_mass;
        let mut d = 0.0f64;
        for (i, &edge) in summary.bin_edges.iter().enumerate() {
            let atoms_below: f64 = summary
                .atom_masses
                .iter()
                .filter(|a| a.location <= edge)
                .map(|a| a.mass)
                .sum();
            d = d.max((cdf(edge) - (cum + atoms_below)).abs());
            if i < summary.bin_masses.len() {
                cum += summary.bin_masses[i];
            }
        }
        d
    }
}

// The analytic jump at exactly a registered atom location. Registered
// locations are the only candidates; elsewhere the law is continuous.
fn analytic_jump(summary: &EmpiricalSummary, x: f64) -> f64 {
    summary
        .atom_masses
        .iter()
        .find(|a| a.location == x)
        .map(|a| a.mass)
        .unwrap_or(0.0)
}

/// Conditional histogram with a pilot acceptance check: rejects the run if
/// the estimated acceptance probability is below [`ACCEPTANCE_FLOOR`].
pub fn conditional_histogram<F>(
    cfg: &BatchConfig,
    extract: F,
    lo: f64,
    hi: f64,
    bins: usize,
    atom_locations: Vec<f64>,
) -> Result<EmpiricalSummary>
where
    F: Fn(&PathSample) -> Option<Observation> + Clone,
{
    let pilot_count = cfg.count.min(100_000);
    let pilot_cfg = BatchConfig { count: pilot_count, ..*cfg };
    let pilot = run_batch(&pilot_cfg, || {
        HistogramCollector::new(extract.clone(), lo, hi, bins, atom_locations.clone(), false)
    });
    let estimated = (pilot.accepted().max(1)) as f64 / pilot_count as f64;
    if pilot.accepted() == 0 || estimated < ACCEPTANCE_FLOOR {
        return Err(Error::LowAcceptance { estimated, floor: ACCEPTANCE_FLOOR });
    }
    let full = run_batch(cfg, || {
        HistogramCollector::new(extract.clone(), lo, hi, bins, atom_locations.clone(), false)
    });
    Ok(full.summary())
}

/// Counter of two-barrier crossing events for extremes checks.
#[derive(Clone, Debug)]
pub struct EventCollector {
    pub alpha: f64,
    pub beta: f64,
    pub x: f64,
    pub half_width: f64,
    pub order: Option<CrossingOrder>,
    pub require_n: Option<u32>,
    pub require_v0: Option<Velocity>,
    pub attempted: u64,
    pub accepted: u64,
    pub hits: u64,
}

impl EventCollector {
    pub fn new(alpha: f64, beta: f64, x: f64, half_width: f64, order: Option<CrossingOrder>) -> Self {
        Self {
            alpha,
            beta,
            x,
            half_width,
            order,
            require_n: None,
            require_v0: None,
            attempted: 0,
            accepted: 0,
            hits: 0,
        }
    }

    pub fn conditioned_on(mut self, n: u32, v0: Velocity) -> Self {
        self.require_n = Some(n);
        self.require_v0 = Some(v0);
        self
    }

    /// Empirical density of the event per unit position, with its SE.
    pub fn density_estimate(&self) -> (f64, f64) {
        let n = self.accepted.max(1) as f64;
        let p = self.hits as f64 / n;
        let width = 2.0 * self.half_width;
        (p / width, (p * (1.0 - p) / n).sqrt() / width)
    }
}

impl Collector for EventCollector {
    fn observe(&mut self, path: &PathSample) {
        self.attempted += 1;
        if let Some(n) = self.require_n {
            if path.switches().count() as u32 != n {
                return;
            }
        }
        if let Some(v0) = self.require_v0 {
            if path.v0() != v0 {
                return;
            }
        }
        self.accepted += 1;
        let stats = path.stats();
        if (stats.position - self.x).abs() >= self.half_width {
            return;
        }
        if !(stats.min < -self.alpha && stats.max > self.beta) {
            return;
        }
        let ordered = match self.order {
            None | Some(CrossingOrder::Either) => true,
            Some(CrossingOrder::MaxFirst) => {
                match (path.first_entry_above(self.beta), path.first_entry_below(-self.alpha)) {
                    (Some(up), Some(down)) => up < down,
                    _ => false,
                }
            }
            Some(CrossingOrder::MinFirst) => {
                match (path.first_entry_above(self.beta), path.first_entry_below(-self.alpha)) {
                    (Some(up), Some(down)) => down < up,
                    _ => false,
                }
            }
        };
        if ordered {
            self.hits += 1;
        }
    }

    fn merge(&mut self, other: Self) {
        self.attempted += other.attempted;
        self.accepted += other.accepted;
        self.hits += other.hits;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::RatePair;

    fn cfg(count: u64, seed: u64) -> BatchConfig {
        let params = ProcessParams::new(
            1.0,
            -1.0,
            RatePair::new(1.0, 1.0).unwrap(),
        )
        .unwrap();
        BatchConfig {
            params,
            start: StartVelocity::Mixture,
            horizon: 1.0,
            count,
            seed,
        }
    }

    fn position_extractor(path: &PathSample) -> Option<Observation> {
        let stats = path.stats();
        let atom = if stats.count == 0 {
            Some(if path.v0() == Velocity::Lower { 0 } else { 1 })
        } else {
            None
        };
        Some(Observation { value: stats.position, atom })
    }

    #[test]
    fn same_seed_identical_summaries() {
        let c = cfg(20_000, 42);
        let mk = || {
            HistogramCollector::new(
                position_extractor,
                -1.0,
                1.0,
                40,
                vec![-1.0, 1.0],
                false,
            )
        };
        let a = run_batch(&c, mk).summary();
        let b = run_batch(&c, mk).summary();
        assert_eq!(a.bin_masses, b.bin_masses);
        assert_eq!(a.atom_masses, b.atom_masses);
    }

    #[test]
    fn summary_masses_account_for_everything() {
        let c = cfg(30_000, 7);
        let s = run_batch(&c, || {
            HistogramCollector::new(position_extractor, -1.0, 1.0, 40, vec![-1.0, 1.0], false)
        })
        .summary();
        assert!((s.total_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn extremes_are_ordered_on_every_path() {
        let c = cfg(5_000, 3);
        struct Check {
            ok: bool,
        }
        impl Collector for Check {
            fn observe(&mut self, path: &PathSample) {
                let stats = path.stats();
                self.ok &= stats.min <= stats.position && stats.position <= stats.max;
                self.ok &= stats.min <= 0.0 && stats.max >= 0.0;
            }
            fn merge(&mut self, other: Self) {
                self.ok &= other.ok;
            }
        }
        let out = run_batch(&c, || Check { ok: true });
        assert!(out.ok);
    }

    #[test]
    fn ks_of_summary_against_itself_is_zero_at_edges() {
        let c = cfg(10_000, 5);
        let s = run_batch(&c, || {
            HistogramCollector::new(position_extractor, -1.0, 1.0, 20, vec![-1.0, 1.0], false)
        })
        .summary();
        // Build the empirical step CDF from the summary itself.
        let edges = s.bin_edges.clone();
        let masses = s.bin_masses.clone();
        let atoms = s.atom_masses.clone();
        let below = s.below_mass;
        let ecdf = move |x: f64| -> f64 {
            let mut v = below;
            for a in &atoms {
                if a.location <= x {
                    v += a.mass;
                }
            }
            for i in 0..masses.len() {
                if edges[i + 1] <= x {
                    v += masses[i];
                }
            }
            v
        };
        let d = ks_distance(&s, ecdf);
        assert!(d < 1e-12, "d={d}");
    }

    #[test]
    fn low_acceptance_is_reported() {
        let c = cfg(200_000, 9);
        let err = conditional_histogram(
            &c,
            |path| {
                let stats = path.stats();
                // Impossible event: position beyond the speed bound.
                (stats.position > 2.0).then_some(Observation { value: 0.0, atom: None })
            },
            -1.0,
            1.0,
            10,
            vec![],
        );
        assert!(matches!(err, Err(Error::LowAcceptance { .. })));
    }
}
