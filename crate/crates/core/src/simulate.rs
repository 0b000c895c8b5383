//! Monte Carlo engines: the coupled urn process and the M/M/∞ hitting time.
//!
//! Sample `i` of a batch always draws from stream `i` of the master seed, and
//! batches are cut into fixed-size chunks merged in index order, so results do
//! not depend on the number of worker threads.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{gumbel_quantile, Regime};
use crate::error::{Error, Result};
use crate::params::ModelParams;

/// Trajectories longer than this are abandoned with [`Error::StepCap`].
pub const STEP_CAP: u64 = 1_000_000_000;

/// Largest batch for which raw samples are retained.
pub const RETAIN_LIMIT: usize = 20_000_000;

const CHUNK: usize = 512;

/// Independent random stream `stream_index` derived from `master_seed`.
#[derive(Debug, Clone)]
pub struct RngStream {
    master_seed: u64,
    stream_index: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(stream_index);
        RngStream { master_seed, stream_index, rng }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    /// Uniform on `(0, 1]`.
    pub fn open_unit(&mut self) -> f64 {
        1.0 - self.rng.random::<f64>()
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// One trajectory of the coupling: `T_{m,0}` and `T_{m,p}` on the same draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoupledSample {
    pub t_classical: u64,
    pub t_clumsy: u64,
}

impl CoupledSample {
    pub fn difference(&self) -> u64 {
        self.t_clumsy - self.t_classical
    }
}

const SEEN: u8 = 1;
const GOOD: u8 = 2;

/// Runs the coupled process: each day a uniform type is updated, and the
/// update is clumsy with probability `p`. `t_classical` is the first day all
/// types have been seen, `t_clumsy` the first day every type's most recent
/// update was non-clumsy.
pub fn simulate_coupled(params: &ModelParams, rng: &mut RngStream) -> Result<CoupledSample> {
    let m = params.m() as usize;
    let p = params.p();
    let mut state = vec![0u8; m];
    let mut seen = 0usize;
    let mut good = 0usize;
    let mut t_classical = 0u64;
    let mut n = 0u64;
    while n < STEP_CAP {
        n += 1;
        let c = rng.random_range(0..m);
        let clumsy = p > 0.0 && rng.random::<f64>() < p;
        let s = state[c];
        if s & SEEN == 0 {
            seen += 1;
            if seen == m {
                t_classical = n;
            }
        }
        match (s & GOOD != 0, clumsy) {
            (false, false) => good += 1,
            (true, true) => good -= 1,
            _ => {}
        }
        state[c] = SEEN | if clumsy { 0 } else { GOOD };
        if good == m {
            return Ok(CoupledSample { t_classical, t_clumsy: n });
        }
    }
    Err(Error::StepCap(STEP_CAP))
}

/// Mean and variance accumulator with a deterministic merge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunningStats {
    pub n: u64,
    pub mean: f64,
    m2: f64,
    pub min: f64,
    pub max: f64,
}

impl Default for RunningStats {
    fn default() -> Self {
        RunningStats { n: 0, mean: 0.0, m2: 0.0, min: f64::INFINITY, max: f64::NEG_INFINITY }
    }
}

impl RunningStats {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
        self.min = self.min.min(x);
        self.max = self.max.max(x);
    }

    pub fn merge(&mut self, other: &RunningStats) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        self.mean += d * other.n as f64 / n as f64;
        self.m2 += other.m2 + d * d * (self.n as f64 * other.n as f64 / n as f64);
        self.n = n;
        self.min = self.min.min(other.min);
        self.max = self.max.max(other.max);
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.m2 / (self.n - 1) as f64).max(0.0)
        }
    }
}

/// Summary of a Monte Carlo batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSummary {
    pub n: u64,
    pub mean: f64,
    pub variance: f64,
    pub min: f64,
    pub max: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sorted_samples: Option<Vec<f64>>,
    pub master_seed: u64,
    pub first_stream: u64,
}

impl SampleSummary {
    pub fn from_stats(stats: &RunningStats, master_seed: u64, first_stream: u64) -> Self {
        SampleSummary {
            n: stats.n,
            mean: stats.mean,
            variance: stats.variance(),
            min: stats.min,
            max: stats.max,
            sorted_samples: None,
            master_seed,
            first_stream,
        }
    }

    /// Summarizes `values` (in stream order), optionally keeping them sorted.
    pub fn from_values(values: &[f64], retain: bool, master_seed: u64, first_stream: u64) -> Self {
        let mut stats = RunningStats::default();
        for chunk in values.chunks(CHUNK) {
            let mut s = RunningStats::default();
            chunk.iter().for_each(|&x| s.push(x));
            stats.merge(&s);
        }
        let mut summary = Self::from_stats(&stats, master_seed, first_stream);
        if retain {
            let mut sorted = values.to_vec();
            sorted.sort_by(f64::total_cmp);
            summary.sorted_samples = Some(sorted);
        }
        summary
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        (self.variance / self.n as f64).sqrt()
    }
}

/// Batch result for the coupled process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoupledBatch {
    pub clumsy: SampleSummary,
    pub classical: SampleSummary,
    pub difference: SampleSummary,
}

/// Runs `f` on streams `0..n` in parallel; output is in stream order.
fn map_streams<T, F>(n: usize, master_seed: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut RngStream) -> Result<T> + Sync,
{
    let chunks: Vec<Result<Vec<T>>> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(n);
            (lo..hi)
                .map(|i| f(&mut RngStream::new(master_seed, i as u64)))
                .collect()
        })
        .collect();
    let mut out = Vec::with_capacity(n);
    for chunk in chunks {
        out.extend(chunk?);
    }
    Ok(out)
}

/// `n_samples` coupled trajectories on streams `0..n_samples`, in order.
pub fn simulate_pairs(params: &ModelParams, n_samples: usize, master_seed: u64) -> Result<Vec<CoupledSample>> {
    if n_samples == 0 {
        return Err(Error::EmptySample);
    }
    map_streams(n_samples, master_seed, |rng| simulate_coupled(params, rng))
}

/// Summaries of `T_{m,p}`, `T_{m,0}` and their difference over a batch.
pub fn simulate_batch(
    params: &ModelParams,
    n_samples: usize,
    master_seed: u64,
    retain: bool,
) -> Result<CoupledBatch> {
    if n_samples == 0 {
        return Err(Error::EmptySample);
    }
    if retain && n_samples > RETAIN_LIMIT {
        return Err(Error::MemoryCap { requested: n_samples as u64, limit: RETAIN_LIMIT as u64 });
    }
    if retain {
        let pairs = simulate_pairs(params, n_samples, master_seed)?;
        let pick = |f: fn(&CoupledSample) -> u64| -> Vec<f64> {
            pairs.iter().map(|s| f(s) as f64).collect()
        };
        return Ok(CoupledBatch {
            clumsy: SampleSummary::from_values(&pick(|s| s.t_clumsy), true, master_seed, 0),
            classical: SampleSummary::from_values(&pick(|s| s.t_classical), true, master_seed, 0),
            difference: SampleSummary::from_values(&pick(CoupledSample::difference), true, master_seed, 0),
        });
    }
    // streaming: per-chunk statistics merged in chunk order
    let chunks: Vec<Result<[RunningStats; 3]>> = (0..n_samples.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(n_samples);
            let mut stats = [RunningStats::default(); 3];
            for i in lo..hi {
                let s = simulate_coupled(params, &mut RngStream::new(master_seed, i as u64))?;
                stats[0].push(s.t_clumsy as f64);
                stats[1].push(s.t_classical as f64);
                stats[2].push(s.difference() as f64);
            }
            Ok(stats)
        })
        .collect();
    let mut total = [RunningStats::default(); 3];
    for chunk in chunks {
        let chunk = chunk?;
        for k in 0..3 {
            total[k].merge(&chunk[k]);
        }
    }
    Ok(CoupledBatch {
        clumsy: SampleSummary::from_stats(&total[0], master_seed, 0),
        classical: SampleSummary::from_stats(&total[1], master_seed, 0),
        difference: SampleSummary::from_stats(&total[2], master_seed, 0),
    })
}

/// M/M/∞ queue with arrival rate `c`, unit service rate per customer, and a
/// Poisson(`c`) initial state unless overridden.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BirthDeathSpec {
    pub c: f64,
    pub q0_override: Option<u64>,
}

impl BirthDeathSpec {
    pub fn new(c: f64) -> Result<Self> {
        if c > 0.0 && c.is_finite() {
            Ok(BirthDeathSpec { c, q0_override: None })
        } else {
            Err(Error::InvalidParams(format!("birth-death rate c must be positive, got {c}")))
        }
    }

    pub fn starting_at(self, q0: u64) -> Self {
        BirthDeathSpec { q0_override: Some(q0), ..self }
    }
}

/// First time the queue is empty, by exact event-driven simulation.
pub fn simulate_tau_c(spec: &BirthDeathSpec, rng: &mut RngStream) -> Result<f64> {
    let c = spec.c;
    if !(c > 0.0) {
        return Err(Error::InvalidParams(format!("birth-death rate c must be positive, got {c}")));
    }
    let mut n = match spec.q0_override {
        Some(q0) => q0,
        None => {
            let poisson = Poisson::new(c).map_err(|e| Error::InvalidParams(e.to_string()))?;
            poisson.sample(rng) as u64
        }
    };
    let mut t = 0.0;
    let mut steps = 0u64;
    while n > 0 {
        steps += 1;
        if steps > STEP_CAP {
            return Err(Error::StepCap(STEP_CAP));
        }
        let rate = c + n as f64;
        t += -rng.open_unit().ln() / rate;
        if rng.random::<f64>() * rate < c {
            n += 1;
        } else {
            n -= 1;
        }
    }
    Ok(t)
}

/// `n` hitting times on streams `0..n`, in order.
pub fn simulate_tau_batch(spec: &BirthDeathSpec, n: usize, master_seed: u64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::EmptySample);
    }
    map_streams(n, master_seed, |rng| simulate_tau_c(spec, rng))
}

/// Draws `n` samples of the limit law of a regime: Gumbel (subcritical),
/// Exp(1) (supercritical or fixed `p`), or Gumbel plus an independent `τ_c`
/// (critical). Samples are retained sorted.
pub fn sample_limit_law(regime: Regime, n: usize, seed: u64) -> Result<SampleSummary> {
    if n == 0 {
        return Err(Error::EmptySample);
    }
    if n > RETAIN_LIMIT {
        return Err(Error::MemoryCap { requested: n as u64, limit: RETAIN_LIMIT as u64 });
    }
    let values = match regime {
        Regime::Subcritical => map_streams(n, seed, |rng| Ok(gumbel_draw(rng)))?,
        Regime::Supercritical | Regime::FixedP => {
            map_streams(n, seed, |rng| Ok(-rng.open_unit().ln()))?
        }
        Regime::Critical { c } => {
            if c.is_nan() {
                return Err(Error::MissingParameter("c"));
            }
            let spec = BirthDeathSpec::new(c)?;
            map_streams(n, seed, |rng| {
                let g = gumbel_draw(rng);
                Ok(g + simulate_tau_c(&spec, rng)?)
            })?
        }
    };
    Ok(SampleSummary::from_values(&values, true, seed, 0))
}

fn gumbel_draw(rng: &mut RngStream) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return gumbel_quantile(u);
        }
    }
}
