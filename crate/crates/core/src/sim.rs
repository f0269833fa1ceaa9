//! Monte Carlo Galton-Watson trajectories and goodness-of-fit checks.
//!
//! Replica `i` draws from `ChaCha8Rng::seed_from_u64(master_seed)` on
//! stream `i`, so every replica is reproducible on its own and results do
//! not depend on how rayon schedules them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::law::{OffspringFamily, OffspringLaw};
use crate::rational::ExactRational;
use crate::series::PowerSeries;
use crate::sibuya::{sibuya_gf, EventSampler, SibuyaError, SibuyaParams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error(
        "offspring law has tail mass {0:e} beyond its known order; at most 1e-12 can be sampled"
    )]
    TailTooHeavy(f64),
    #[error("need at least {needed} samples for a comparison, got {got}")]
    InsufficientSamples { needed: u64, got: u64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Sibuya(#[from] SibuyaError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GWConfig {
    pub master_seed: u64,
    pub max_generations: u64,
    /// Census cap on the running total.
    pub max_total: u64,
    pub replicas: u64,
}

impl Default for GWConfig {
    fn default() -> Self {
        GWConfig {
            master_seed: 0,
            max_generations: 100_000,
            max_total: 10_000_000,
            replicas: 10_000,
        }
    }
}

impl GWConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.max_generations == 0 || self.max_total == 0 || self.replicas == 0 {
            return Err(SimError::InvalidConfig(
                "max_generations, max_total and replicas must all be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// The RNG owned by replica `index`.
pub fn replica_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GWResult {
    /// `Z_0 = 1, Z_1, ...`; the last entry is 0 unless censored.
    pub trajectory: Vec<u64>,
    pub total: u64,
    pub censored: bool,
}

/// Largest tail mass a truncated table may leave unaccounted for.
pub const TAIL_BUDGET: f64 = 1e-12;

/// Draws from an offspring law.
#[derive(Debug, Clone)]
pub enum OffspringSampler {
    /// Inverse CDF of `Pr(X >= n) = alpha^n`.
    Geometric { ln_alpha: f64 },
    /// `h_b` for `1 < b <= 2` as `X = Z_1 + ... + Z_K`, with
    /// `Pr(K = k) = (1/b)(1-1/b)^k` and `Z_i ~ s_{b,1}` drawn by events.
    SibuyaCompound {
        ln_continue: f64,
        events: EventSampler,
    },
    /// Inverse CDF over a Kahan-summed table. Draws past the table extend
    /// it from the family when there is one, else redraw.
    Table {
        cdf: Vec<f64>,
        law: Option<OffspringLaw>,
    },
}

fn kahan_cdf(masses: &[ExactRational]) -> Vec<f64> {
    let mut cdf = Vec::with_capacity(masses.len());
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for m in masses {
        let y = m.to_f64() - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        cdf.push(sum);
    }
    cdf
}

fn geometric_draw<R: Rng + ?Sized>(ln_alpha: f64, rng: &mut R) -> u64 {
    let u: f64 = rng.random();
    let x = (1.0 - u).ln() / ln_alpha;
    if x >= EventSampler::MAX_VALUE as f64 {
        EventSampler::MAX_VALUE
    } else {
        x as u64
    }
}

impl OffspringSampler {
    pub fn for_law(p: &OffspringLaw) -> Result<Self, SimError> {
        match p.family() {
            Some(OffspringFamily::Geometric { alpha }) => Ok(OffspringSampler::Geometric {
                ln_alpha: alpha.to_f64().ln(),
            }),
            Some(OffspringFamily::SibuyaOffspring { b, r }) if r.is_one() => {
                let b = b.to_f64();
                Ok(OffspringSampler::SibuyaCompound {
                    ln_continue: (1.0 - 1.0 / b).ln(),
                    events: EventSampler::new(b, 1.0),
                })
            }
            Some(_) => {
                let mut law = p.clone();
                let mut order = p.order().max(64);
                loop {
                    law = law
                        .at_order(order)
                        .expect("families regenerate at any order");
                    if law.tail_mass().to_f64() <= TAIL_BUDGET {
                        break;
                    }
                    if order >= 1 << 14 {
                        return Err(SimError::TailTooHeavy(law.tail_mass().to_f64()));
                    }
                    order *= 2;
                }
                Ok(OffspringSampler::Table {
                    cdf: kahan_cdf(&law.series().coeffs()),
                    law: Some(law),
                })
            }
            None => {
                let tail = p.tail_mass();
                if !tail.is_zero() && tail.to_f64() > TAIL_BUDGET {
                    return Err(SimError::TailTooHeavy(tail.to_f64()));
                }
                Ok(OffspringSampler::Table {
                    cdf: kahan_cdf(&p.series().coeffs()),
                    law: None,
                })
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match self {
            OffspringSampler::Geometric { ln_alpha } => geometric_draw(*ln_alpha, rng),
            OffspringSampler::SibuyaCompound {
                ln_continue,
                events,
            } => {
                let k = geometric_draw(*ln_continue, rng);
                let mut total = 0u64;
                for _ in 0..k {
                    // an overflowing draw exceeds any census cap
                    let z = events.sample(rng).unwrap_or(EventSampler::MAX_VALUE);
                    total = total.saturating_add(z);
                }
                total
            }
            OffspringSampler::Table { cdf, law } => loop {
                let u: f64 = rng.random();
                let idx = cdf.partition_point(|&c| c <= u);
                if idx < cdf.len() {
                    return idx as u64;
                }
                if let Some(law) = law {
                    if let Some(x) = Self::extended_lookup(law, u) {
                        return x;
                    }
                }
            },
        }
    }

    /// Looks `u` up in ever longer tables of the family.
    fn extended_lookup(law: &OffspringLaw, u: f64) -> Option<u64> {
        let mut order = law.order() * 2;
        while order <= 1 << 20 {
            let cdf = kahan_cdf(&law.at_order(order).ok()?.series().coeffs());
            let idx = cdf.partition_point(|&c| c <= u);
            if idx < cdf.len() {
                return Some(idx as u64);
            }
            order *= 2;
        }
        None
    }
}

fn run_replica(sampler: &OffspringSampler, cfg: &GWConfig, index: u64, record: bool) -> GWResult {
    let mut rng = replica_rng(cfg.master_seed, index);
    let mut trajectory = vec![1u64];
    let mut z = 1u64;
    let mut total = 1u64;
    let mut generation = 0u64;
    while z > 0 {
        if generation >= cfg.max_generations {
            return GWResult {
                trajectory,
                total,
                censored: true,
            };
        }
        let mut next = 0u64;
        for _ in 0..z {
            let x = sampler.sample(&mut rng);
            next = next.saturating_add(x);
            total = total.saturating_add(x);
            if total > cfg.max_total {
                if record {
                    trajectory.push(next);
                }
                return GWResult {
                    trajectory,
                    total,
                    censored: true,
                };
            }
        }
        if record {
            trajectory.push(next);
        }
        z = next;
        generation += 1;
    }
    if !record {
        trajectory.push(0);
    }
    GWResult {
        trajectory,
        total,
        censored: false,
    }
}

/// `cfg.replicas` independent trajectories, in replica order.
pub fn simulate(p: &OffspringLaw, cfg: &GWConfig) -> Result<Vec<GWResult>, SimError> {
    cfg.validate()?;
    let sampler = OffspringSampler::for_law(p)?;
    Ok((0..cfg.replicas)
        .into_par_iter()
        .map(|i| run_replica(&sampler, cfg, i, true))
        .collect())
}

/// Counts on `0..=k_max` plus one lumped cell for everything above.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Histogram {
    pub counts: Vec<u64>,
    pub tail: u64,
}

impl Histogram {
    pub fn new(k_max: usize) -> Self {
        Histogram {
            counts: vec![0; k_max + 1],
            tail: 0,
        }
    }

    pub fn k_max(&self) -> usize {
        self.counts.len() - 1
    }

    pub fn record(&mut self, value: u64) {
        match usize::try_from(value)
            .ok()
            .and_then(|v| self.counts.get_mut(v))
        {
            Some(c) => *c += 1,
            None => self.tail += 1,
        }
    }

    pub fn record_tail(&mut self) {
        self.tail += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.tail
    }

    pub fn merge(mut self, other: Histogram) -> Histogram {
        for (a, b) in self.counts.iter_mut().zip(other.counts) {
            *a += b;
        }
        self.tail += other.tail;
        self
    }

    pub fn from_values(values: impl IntoIterator<Item = u64>, k_max: usize) -> Self {
        let mut h = Histogram::new(k_max);
        values.into_iter().for_each(|v| h.record(v));
        h
    }
}

/// Aggregate of a run that keeps no trajectories.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimSummary {
    pub replicas: u64,
    pub censored: u64,
    pub censored_fraction: f64,
    /// Totals; censored replicas land in the tail cell.
    pub histogram: Histogram,
    /// Mean total over uncensored replicas.
    pub mean_total: f64,
    /// Standard error of `mean_total`.
    pub mean_total_se: f64,
}

#[derive(Debug, Clone)]
struct Accumulator {
    hist: Histogram,
    censored: u64,
    n: u64,
    sum: f64,
    sum_sq: f64,
}

impl Accumulator {
    fn new(k_max: usize) -> Self {
        Accumulator {
            hist: Histogram::new(k_max),
            censored: 0,
            n: 0,
            sum: 0.0,
            sum_sq: 0.0,
        }
    }

    fn push(mut self, r: GWResult) -> Self {
        if r.censored {
            self.censored += 1;
            self.hist.record_tail();
        } else {
            self.hist.record(r.total);
            let t = r.total as f64;
            self.n += 1;
            self.sum += t;
            self.sum_sq += t * t;
        }
        self
    }

    fn merge(self, o: Self) -> Self {
        Accumulator {
            hist: self.hist.merge(o.hist),
            censored: self.censored + o.censored,
            n: self.n + o.n,
            sum: self.sum + o.sum,
            sum_sq: self.sum_sq + o.sum_sq,
        }
    }
}

/// Like [`simulate`] but only the total-progeny histogram and moments are
/// kept. Integer counts are order-independent; the float moments are summed
/// per rayon split, so they may differ in the last bits between machines.
pub fn simulate_summary(
    p: &OffspringLaw,
    cfg: &GWConfig,
    k_max: usize,
) -> Result<SimSummary, SimError> {
    cfg.validate()?;
    let sampler = OffspringSampler::for_law(p)?;
    let acc = (0..cfg.replicas)
        .into_par_iter()
        .fold(
            || Accumulator::new(k_max),
            |acc, i| acc.push(run_replica(&sampler, cfg, i, false)),
        )
        .reduce(|| Accumulator::new(k_max), Accumulator::merge);
    let n = acc.n as f64;
    let mean = if acc.n > 0 { acc.sum / n } else { f64::NAN };
    let var = if acc.n > 1 {
        (acc.sum_sq - n * mean * mean) / (n - 1.0)
    } else {
        f64::NAN
    };
    Ok(SimSummary {
        replicas: cfg.replicas,
        censored: acc.censored,
        censored_fraction: acc.censored as f64 / cfg.replicas as f64,
        histogram: acc.hist,
        mean_total: mean,
        mean_total_se: (var / n).sqrt(),
    })
}

/// Histogram of `replicas` draws of `draw`, one RNG stream per draw.
pub fn empirical_histogram<F>(replicas: u64, master_seed: u64, k_max: usize, draw: F) -> Histogram
where
    F: Fn(&mut ChaCha8Rng) -> Option<u64> + Sync,
{
    (0..replicas)
        .into_par_iter()
        .fold(
            || Histogram::new(k_max),
            |mut h, i| {
                match draw(&mut replica_rng(master_seed, i)) {
                    Some(v) => h.record(v),
                    None => h.record_tail(),
                }
                h
            },
        )
        .reduce(|| Histogram::new(k_max), Histogram::merge)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub tv_distance: f64,
    pub chi_square: f64,
    pub degrees_of_freedom: usize,
    pub samples: u64,
    pub threshold: f64,
    pub pass: bool,
}

pub const MIN_SAMPLES: u64 = 10_000;
pub const DEFAULT_TV_THRESHOLD: f64 = 0.005;

/// Total variation and chi-square between a histogram and exact masses on
/// `0..=k_max`, with the remaining exact mass as the tail cell.
pub fn compare(
    empirical: &Histogram,
    exact: &[ExactRational],
    threshold: f64,
) -> Result<Comparison, SimError> {
    let k_max = empirical.k_max();
    if exact.len() != k_max + 1 {
        return Err(SimError::InvalidConfig(format!(
            "exact pmf has {} cells, histogram has {}",
            exact.len(),
            k_max + 1
        )));
    }
    let samples = empirical.total();
    if samples < MIN_SAMPLES {
        return Err(SimError::InsufficientSamples {
            needed: MIN_SAMPLES,
            got: samples,
        });
    }
    let tail_exact = ExactRational::one() - exact.iter().sum::<ExactRational>();
    let n = samples as f64;
    let cells = empirical
        .counts
        .iter()
        .zip(exact.iter())
        .map(|(&c, e)| (c, e.to_f64()))
        .chain(std::iter::once((empirical.tail, tail_exact.to_f64())));
    let (mut tv, mut chi) = (0.0, 0.0);
    let mut used = 0usize;
    for (count, mass) in cells {
        let observed = count as f64 / n;
        tv += (observed - mass).abs();
        if mass > 0.0 {
            let expected = mass * n;
            chi += (count as f64 - expected).powi(2) / expected;
            used += 1;
        } else if count > 0 {
            chi = f64::INFINITY;
        }
    }
    let tv = tv / 2.0;
    Ok(Comparison {
        tv_distance: tv,
        chi_square: chi,
        degrees_of_freedom: used.saturating_sub(1),
        samples,
        threshold,
        pass: tv < threshold,
    })
}

/// Result of checking that `Z_n ~ s_{a^n}` when the offspring law is `s_a`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenerationReport {
    pub a: ExactRational,
    pub generation: u32,
    pub order: usize,
    /// `n`-fold composition of `f_{s_a}` equals `f_{s_{a^n}}` to `order`.
    pub exact_match: bool,
    pub comparison: Comparison,
}

/// Exact `n`-fold iterate of a series with zero constant term, or
/// `z` for `n = 0`.
pub fn iterate(f: &PowerSeries, n: u32) -> Result<PowerSeries, crate::series::SeriesError> {
    let mut g = PowerSeries::variable(f.order());
    for _ in 0..n {
        g = f.compose(&g)?;
    }
    Ok(g)
}

/// Exact and empirical check of the generation law under `s_a` offspring.
///
/// Empirically `Z_n` is built by summing `s_a` draws generation by
/// generation; since every draw is at least 1, `Z` never decreases, so a
/// replica is lumped into the tail as soon as it passes `k_max`.
pub fn generation_law_check(
    a: &ExactRational,
    n: u32,
    order: usize,
    k_max: usize,
    cfg: &GWConfig,
) -> Result<GenerationReport, SimError> {
    cfg.validate()?;
    let params = SibuyaParams::plain(a.clone())?;
    // Z_0 = 1, so generation 0 has law delta_1 with gf z
    let target_gf = |order: usize| -> Result<PowerSeries, SimError> {
        if n == 0 {
            return Ok(PowerSeries::variable(order));
        }
        Ok(sibuya_gf(&SibuyaParams::plain(a.powi(n as i32))?, order)?)
    };
    let f = sibuya_gf(&params, order)?;
    let exact_match =
        iterate(&f, n).map_err(|e| SimError::InvalidConfig(e.to_string()))? == target_gf(order)?;

    let sampler = EventSampler::new(a.to_f64(), 0.0);
    let hist = empirical_histogram(cfg.replicas, cfg.master_seed, k_max, |rng| {
        let mut z = 1u64;
        for _ in 0..n {
            let mut next = 0u64;
            for _ in 0..z {
                next += sampler.sample(rng).ok()?;
                if next > k_max as u64 {
                    return None;
                }
            }
            z = next;
        }
        Some(z)
    });
    let exact = target_gf(k_max)?.coeffs();
    let comparison = compare(&hist, &exact, DEFAULT_TV_THRESHOLD)?;
    Ok(GenerationReport {
        a: a.clone(),
        generation: n,
        order,
        exact_match,
        comparison,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn small_cfg(replicas: u64) -> GWConfig {
        GWConfig {
            replicas,
            max_total: 10_000,
            max_generations: 10_000,
            master_seed: 7,
        }
    }

    #[test]
    fn delta0_dies_immediately() {
        let res = simulate(&OffspringLaw::delta0(), &small_cfg(50)).unwrap();
        assert!(res
            .iter()
            .all(|r| r.trajectory == vec![1, 0] && r.total == 1 && !r.censored));
    }

    #[test]
    fn deterministic_under_seed() {
        let p = OffspringLaw::geometric(rat(2, 5), 8).unwrap();
        let a = simulate(&p, &small_cfg(500)).unwrap();
        let b = simulate(&p, &small_cfg(500)).unwrap();
        assert_eq!(a, b);
        let mut other = small_cfg(500);
        other.master_seed = 8;
        assert_ne!(a, simulate(&p, &other).unwrap());
    }

    #[test]
    fn trajectory_invariants() {
        let p = OffspringLaw::geometric(rat(1, 2), 8).unwrap();
        let cfg = GWConfig {
            max_total: 1_000,
            ..small_cfg(2_000)
        };
        let res = simulate(&p, &cfg).unwrap();
        for r in &res {
            assert_eq!(r.trajectory[0], 1);
            if !r.censored {
                assert_eq!(*r.trajectory.last().unwrap(), 0);
                assert_eq!(r.trajectory.iter().sum::<u64>(), r.total);
            }
        }
        let censored = res.iter().filter(|r| r.censored).count();
        assert!(censored > 0 && censored < res.len() / 10);
    }

    #[test]
    fn raising_caps_keeps_uncensored_results() {
        let p = OffspringLaw::geometric(rat(1, 2), 8).unwrap();
        let low = simulate(
            &p,
            &GWConfig {
                max_total: 200,
                ..small_cfg(1_000)
            },
        )
        .unwrap();
        let high = simulate(
            &p,
            &GWConfig {
                max_total: 20_000,
                ..small_cfg(1_000)
            },
        )
        .unwrap();
        for (l, h) in low.iter().zip(&high) {
            if !l.censored {
                assert_eq!(l, h);
            }
        }
    }

    #[test]
    fn compound_sampler_matches_hb() {
        let p = OffspringLaw::sibuya_offspring(rat(3, 2), 30).unwrap();
        let sampler = OffspringSampler::for_law(&p).unwrap();
        let hist = empirical_histogram(200_000, 3, 30, |rng| Some(sampler.sample(rng)));
        let cmp = compare(&hist, &p.series().coeffs(), 0.01).unwrap();
        assert!(cmp.pass, "{cmp:?}");
    }

    #[test]
    fn table_sampler_for_tilted_family() {
        let p = OffspringLaw::tilted_sibuya_offspring(rat(2, 1), rat(1, 2), 10).unwrap();
        let sampler = OffspringSampler::for_law(&p).unwrap();
        assert!(matches!(sampler, OffspringSampler::Table { .. }));
        let hist = empirical_histogram(100_000, 5, 10, |rng| Some(sampler.sample(rng)));
        assert!(compare(&hist, &p.series().coeffs(), 0.01).unwrap().pass);
    }

    #[test]
    fn truncated_heavy_tail_refused() {
        let p = OffspringLaw::from_masses(&[rat(1, 2), rat(1, 4)]).unwrap();
        assert!(matches!(
            OffspringSampler::for_law(&p),
            Err(SimError::TailTooHeavy(_))
        ));
    }

    #[test]
    fn compare_needs_samples() {
        let h = Histogram::from_values([1, 2, 3], 3);
        let exact = vec![rat(0, 1), rat(1, 3), rat(1, 3), rat(1, 3)];
        assert!(matches!(
            compare(&h, &exact, 0.01),
            Err(SimError::InsufficientSamples { .. })
        ));
    }

    #[test]
    fn histogram_cells() {
        let h = Histogram::from_values([0, 1, 1, 5, 9], 5);
        assert_eq!(h.counts, vec![1, 2, 0, 0, 0, 1]);
        assert_eq!(h.tail, 1);
        assert_eq!(h.total(), 5);
    }

    #[test]
    fn generation_zero_is_delta_one() {
        let r = generation_law_check(&rat(7, 10), 0, 20, 10, &small_cfg(10_000)).unwrap();
        assert!(r.exact_match);
        assert_eq!(r.comparison.tv_distance, 0.0);
    }
}
