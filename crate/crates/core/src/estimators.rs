//! Monte Carlo estimators.
//!
//! Sample `k` of an estimate with base stream `rng` draws everything from
//! `rng.substream(k)`. Samples are processed in fixed chunks whose partial sums
//! are integers, so an estimate is bit-identical for any number of threads.
//!
//! Because colours and noise are keyed by position (see [`crate::sampling`]),
//! one sample can be evaluated on a whole ladder of nested regions and a whole
//! grid of noise levels; these are the common-random-number variants below.

use std::collections::BTreeMap;
use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::connectivity::{Crossing, Event, Scratch};
use crate::error::{param, Error, Result};
use crate::rng::RngStream;
use crate::sampling::{check_prob, half_step, noise_hetero, sample_into, Configuration, GridNoise, NoiseSpec};

const CHUNK: u64 = 256;

mod lanes {
    pub const INDEPENDENT: u64 = 21;
    pub const FIRST: u64 = 22;
    pub const SECOND: u64 = 23;
}

/// Mean, standard error (sample standard deviation over `sqrt(samples)`), sample count and seed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: u64,
    pub seed: u64,
}

impl Estimate {
    /// From the sum and sum of squares of `n` observations.
    pub fn from_moments(sum: f64, sum_sq: f64, n: u64, seed: u64) -> Self {
        let nf = n as f64;
        let mean = if n > 0 { sum / nf } else { 0.0 };
        let var = if n > 1 { ((sum_sq - sum * mean) / (nf - 1.0)).max(0.0) } else { 0.0 };
        Estimate { mean, stderr: (var / nf.max(1.0)).sqrt(), samples: n, seed }
    }

    /// From integer moments of observations `value / scale`.
    pub fn from_int_moments(sum: i128, sum_sq: i128, n: u64, scale: f64, seed: u64) -> Self {
        let nf = n as f64;
        let mean = if n > 0 { sum as f64 / nf } else { 0.0 };
        let var = if n > 1 {
            // exact centred sum of squares: (n * sum_sq - sum^2) / n
            let centred = (n as i128 * sum_sq - sum * sum) as f64 / nf;
            (centred / (nf - 1.0)).max(0.0)
        } else {
            0.0
        };
        Estimate { mean: mean / scale, stderr: (var / nf.max(1.0)).sqrt() / scale, samples: n, seed }
    }

    /// Frequency estimate from `hits` successes in `n` trials.
    pub fn from_count(hits: u64, n: u64, seed: u64) -> Self {
        Self::from_int_moments(hits as i128, hits as i128, n, 1.0, seed)
    }

    pub fn exact(value: f64) -> Self {
        Estimate { mean: value, stderr: 0.0, samples: 0, seed: 0 }
    }

    /// `sqrt(se_a^2 + se_b^2)`.
    pub fn combined_stderr(&self, other: &Estimate) -> f64 {
        self.stderr.hypot(other.stderr)
    }

    /// `|mean - value|` in units of `stderr` (0 when both vanish).
    pub fn z(&self, value: f64) -> f64 {
        let d = (self.mean - value).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.stderr
        }
    }
}

/// Integer accumulator of one observable.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub(crate) struct Acc {
    pub sum: i128,
    pub sum_sq: i128,
}

impl Acc {
    #[inline]
    pub fn push(&mut self, v: i64) {
        self.sum += v as i128;
        self.sum_sq += (v as i128) * (v as i128);
    }

    fn merge(&mut self, o: &Acc) {
        self.sum += o.sum;
        self.sum_sq += o.sum_sq;
    }

    pub fn estimate(&self, n: u64, scale: f64, seed: u64) -> Estimate {
        Estimate::from_int_moments(self.sum, self.sum_sq, n, scale, seed)
    }
}

/// Run `per_chunk` over fixed sample ranges in parallel and merge the accumulators.
pub(crate) fn run_chunks<F>(n: u64, width: usize, per_chunk: F) -> Vec<Acc>
where
    F: Fn(Range<u64>, &mut [Acc]) + Sync,
{
    let chunks: Vec<Range<u64>> = (0..n.div_ceil(CHUNK)).map(|c| c * CHUNK..((c + 1) * CHUNK).min(n)).collect();
    let parts: Vec<Vec<Acc>> = chunks
        .into_par_iter()
        .map(|r| {
            let mut acc = vec![Acc::default(); width];
            per_chunk(r, &mut acc);
            acc
        })
        .collect();
    let mut total = vec![Acc::default(); width];
    for p in &parts {
        for (t, a) in total.iter_mut().zip(p) {
            t.merge(a);
        }
    }
    total
}

fn check_n(n: u64) -> Result<()> {
    if n == 0 {
        Err(param("sample count must be >= 1"))
    } else {
        Ok(())
    }
}

/// Frequency of `event` under i.i.d. Bernoulli(`p`) colouring.
pub fn estimate_event(event: &dyn Event, p: f64, n: u64, rng: &RngStream) -> Result<Estimate> {
    check_n(n)?;
    check_prob(p, "density")?;
    let region = event.region();
    let acc = run_chunks(n, 1, |range, acc| {
        let mut s = Scratch::new();
        let mut x = Configuration::zeros(region);
        for k in range {
            sample_into(region, p, &rng.substream(k), &mut x).expect("validated density");
            acc[0].push(event.eval(&x, &mut s) as i64);
        }
    });
    Ok(acc[0].estimate(n, 1.0, rng.seed()))
}

/// `Q_t(f) = E[f(X) f(Y)]` under the noise `spec` (critical colouring).
pub fn estimate_qt(event: &dyn Event, spec: &NoiseSpec, n: u64, rng: &RngStream) -> Result<Estimate> {
    check_n(n)?;
    let region = event.region();
    let rates = spec.rates(region)?;
    let acc = run_chunks(n, 1, |range, acc| {
        let mut s = Scratch::new();
        let mut x = Configuration::zeros(region);
        for k in range {
            let r = rng.substream(k);
            sample_into(region, 0.5, &r, &mut x).expect("valid density");
            let v = event.eval(&x, &mut s) && {
                let y = noise_hetero(region, &x, &rates, &r).expect("validated rates");
                event.eval(&y, &mut s)
            };
            acc[0].push(v as i64);
        }
    });
    Ok(acc[0].estimate(n, 1.0, rng.seed()))
}

/// `Q_t(f)` on a grid of uniform noise levels with common random numbers.
pub fn estimate_qt_grid(event: &dyn Event, ts: &[f64], n: u64, rng: &RngStream) -> Result<Vec<Estimate>> {
    Ok(estimate_ladder(&[event], 0.5, Some(ts), n, rng)?.remove(0))
}

/// Estimates for a ladder of events that is decreasing along the list (for
/// example arm events from a fixed inner radius to growing outer radii).
///
/// Returns one row per event: `[alpha]` when `ts` is `None`, else one `Q_t` per noise level.
/// Once an event fails for a sample, larger events are not evaluated, which is
/// exact by the decreasing property and is what makes large ladders cheap.
/// Events that do not nest (see [`Event::nests`]) are evaluated without exiting.
pub fn estimate_ladder(
    events: &[&dyn Event],
    p: f64,
    ts: Option<&[f64]>,
    n: u64,
    rng: &RngStream,
) -> Result<Vec<Vec<Estimate>>> {
    check_n(n)?;
    check_prob(p, "density")?;
    if ts.is_some() && p != 0.5 {
        return Err(param("noised quantities are defined at the critical density 1/2"));
    }
    if events.is_empty() {
        return Err(param("empty ladder"));
    }
    if let Some(ts) = ts {
        for &t in ts {
            check_prob(t, "noise level")?;
        }
    }
    let nt = ts.map_or(0, |t| t.len());
    let width = events.len() * (nt.max(1));
    let acc = run_chunks(n, width, |range, acc| {
        let mut s = Scratch::new();
        let mut x = Configuration::zeros(events[0].region());
        let mut y = x.clone();
        let mut grid = GridNoise::new(ts.unwrap_or(&[]));
        let mut alive = vec![true; nt];
        for k in range {
            let r = rng.substream(k);
            alive.iter_mut().for_each(|a| *a = true);
            for (e, ev) in events.iter().enumerate() {
                let nests = ev.nests();
                let region = ev.region();
                sample_into(region, p, &r, &mut x).expect("valid density");
                if !ev.eval(&x, &mut s) {
                    if nests {
                        break;
                    }
                    continue;
                }
                if ts.is_none() {
                    acc[e].push(1);
                    continue;
                }
                grid.prepare(region, &r);
                y.clone_from(&x);
                let mut any = false;
                for (pos, &ti) in grid.order().iter().enumerate() {
                    grid.apply(pos, &mut y);
                    if alive[ti] || !nests {
                        let v = ev.eval(&y, &mut s);
                        if nests {
                            alive[ti] = v;
                        }
                        any |= v;
                        if v {
                            acc[e * nt + ti].push(1);
                        }
                    }
                }
                if nests && !any {
                    break;
                }
            }
        }
    });
    let seed = rng.seed();
    Ok((0..events.len())
        .map(|e| (0..nt.max(1)).map(|ti| acc[e * nt.max(1) + ti].estimate(n, 1.0, seed)).collect())
        .collect())
}

/// `COV_t(g) = Cov(g(X), g(Y))` on a grid of noise levels.
///
/// Per sample, a centre `W` is drawn and two copies `x, y` are resampled from it
/// independently at level `s` with `1 - t = (1 - s)^2`, so `(x, y)` has the law of
/// `(X, noise(X, t))`; `v` is an independent colouring. The observable
/// `g(x) g(y) - (g(x) + g(y)) g(v) / 2` is unbiased for `Q_t - Q_1`.
/// `W`, `v` and the noise variables are shared across the grid.
pub fn estimate_cov_grid(event: &dyn Event, ts: &[f64], n: u64, rng: &RngStream) -> Result<Vec<Estimate>> {
    check_n(n)?;
    for &t in ts {
        check_prob(t, "noise level")?;
    }
    let region = event.region();
    let acc = run_chunks(n, ts.len(), |range, acc| {
        let mut s = Scratch::new();
        let mut w = Configuration::zeros(region);
        let mut v = w.clone();
        let mut x = w.clone();
        let mut y = w.clone();
        let halves: Vec<f64> = ts.iter().map(|&t| half_step(t)).collect();
        let (mut g1, mut g2) = (GridNoise::new(&halves), GridNoise::new(&halves));
        for k in range {
            let r = rng.substream(k);
            sample_into(region, 0.5, &r, &mut w).expect("valid density");
            sample_into(region, 0.5, &r.substream(lanes::INDEPENDENT), &mut v).expect("valid density");
            let gv = event.eval(&v, &mut s) as i64;
            let (r1, r2) = (r.substream(lanes::FIRST), r.substream(lanes::SECOND));
            g1.prepare(region, &r1);
            g2.prepare(region, &r2);
            x.clone_from(&w);
            y.clone_from(&w);
            for (pos, &ti) in g1.order().iter().enumerate() {
                g1.apply(pos, &mut x);
                g2.apply(pos, &mut y);
                let gx = event.eval(&x, &mut s) as i64;
                let gy = event.eval(&y, &mut s) as i64;
                acc[ti].push(2 * gx * gy - (gx + gy) * gv);
            }
        }
    });
    Ok(acc.iter().map(|a| a.estimate(n, 2.0, rng.seed())).collect())
}

/// Single-level form of [`estimate_cov_grid`].
pub fn estimate_cov(event: &dyn Event, t: f64, n: u64, rng: &RngStream) -> Result<Estimate> {
    Ok(estimate_cov_grid(event, &[t], n, rng)?[0])
}

/// `1/4 sum_i Q_t(i pivotal for the crossing)` on a grid of noise levels.
pub fn pivotal_sum_grid(crossing: &Crossing, ts: &[f64], n: u64, rng: &RngStream) -> Result<Vec<Estimate>> {
    check_n(n)?;
    for &t in ts {
        check_prob(t, "noise level")?;
    }
    let region = crossing.region();
    let acc = run_chunks(n, ts.len(), |range, acc| {
        let mut s = Scratch::new();
        let mut x = Configuration::zeros(region);
        let mut y = x.clone();
        let (mut px, mut py) = (Vec::new(), Vec::new());
        let mut grid = GridNoise::new(ts);
        for k in range {
            let r = rng.substream(k);
            sample_into(region, 0.5, &r, &mut x).expect("valid density");
            crossing.pivotal_mask(&x, &mut s, &mut px);
            grid.prepare(region, &r);
            y.clone_from(&x);
            for (pos, &ti) in grid.order().iter().enumerate() {
                grid.apply(pos, &mut y);
                crossing.pivotal_mask(&y, &mut s, &mut py);
                let both = px.iter().zip(&py).filter(|(a, b)| **a && **b).count();
                acc[ti].push(both as i64);
            }
        }
    });
    Ok(acc.iter().map(|a| a.estimate(n, 4.0, rng.seed())).collect())
}

/// Single-level form of [`pivotal_sum_grid`].
pub fn pivotal_sum(crossing: &Crossing, t: f64, n: u64, rng: &RngStream) -> Result<Estimate> {
    Ok(pivotal_sum_grid(crossing, &[t], n, rng)?[0])
}

/// Result of inverting `n^2 alpha_n >= 1/t` on a finite table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Ell {
    At(u32),
    BeyondTable,
}

impl Ell {
    pub fn scale(self) -> Option<u32> {
        match self {
            Ell::At(n) => Some(n),
            Ell::BeyondTable => None,
        }
    }
}

/// Raw estimates of `alpha_n` with their running-minimum envelope.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct AlphaTable {
    entries: BTreeMap<u32, Estimate>,
    regularized: BTreeMap<u32, f64>,
}

impl AlphaTable {
    pub fn new(entries: impl IntoIterator<Item = (u32, Estimate)>) -> Result<Self> {
        let entries: BTreeMap<u32, Estimate> = entries.into_iter().collect();
        if entries.is_empty() {
            return Err(Error::Insufficient("empty alpha table".into()));
        }
        if entries.keys().any(|&n| n == 0) {
            return Err(param("table scales must be >= 1"));
        }
        let mut regularized = BTreeMap::new();
        let mut running = f64::INFINITY;
        for (&n, e) in &entries {
            running = running.min(e.mean);
            regularized.insert(n, running);
        }
        Ok(AlphaTable { entries, regularized })
    }

    /// Table with the conventional anchors `alpha_n = 1` for `n < j` added.
    pub fn with_anchors(entries: impl IntoIterator<Item = (u32, Estimate)>, j: u32) -> Result<Self> {
        let mut all: BTreeMap<u32, Estimate> = entries.into_iter().collect();
        for n in 1..j {
            all.entry(n).or_insert(Estimate::exact(1.0));
        }
        Self::new(all)
    }

    pub fn scales(&self) -> impl Iterator<Item = u32> + '_ {
        self.entries.keys().copied()
    }

    pub fn raw(&self, n: u32) -> Option<&Estimate> {
        self.entries.get(&n)
    }

    pub fn regularized(&self, n: u32) -> Option<f64> {
        self.regularized.get(&n).copied()
    }

    /// `epsilon_n = 1 / (n^2 alpha_n)` from the envelope.
    pub fn eps(&self, n: u32) -> Option<f64> {
        self.regularized(n).map(|a| 1.0 / ((n as f64).powi(2) * a))
    }

    pub fn sensitivity_length(&self, t: f64) -> Result<Ell> {
        sensitivity_length(self, t)
    }
}

/// `l(t) = min { n in table : n^2 alpha_n >= 1/t }` on the regularized envelope.
pub fn sensitivity_length(table: &AlphaTable, t: f64) -> Result<Ell> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(param(format!("noise level must lie in (0,1], got {t}")));
    }
    if table.regularized.is_empty() {
        return Err(Error::Insufficient("empty alpha table".into()));
    }
    Ok(table
        .regularized
        .iter()
        .find(|(&n, &a)| (n as f64).powi(2) * a * t >= 1.0)
        .map_or(Ell::BeyondTable, |(&n, _)| Ell::At(n)))
}

/// Sensitivity lengths on a grid of noise levels together with `epsilon_n`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SensitivityProfile {
    pub t_grid: Vec<f64>,
    pub ell: Vec<Ell>,
    pub eps: BTreeMap<u32, f64>,
}

impl SensitivityProfile {
    pub fn build(table: &AlphaTable, t_grid: &[f64]) -> Result<Self> {
        let ell = t_grid.iter().map(|&t| sensitivity_length(table, t)).collect::<Result<Vec<_>>>()?;
        let eps = table.scales().filter_map(|n| table.eps(n).map(|e| (n, e))).collect();
        Ok(SensitivityProfile { t_grid: t_grid.to_vec(), ell, eps })
    }

    pub fn ell_at(&self, t: f64) -> Option<Ell> {
        self.t_grid.iter().position(|&u| u == t).map(|i| self.ell[i])
    }
}
