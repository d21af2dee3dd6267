//! Continuous-time dynamical percolation.
//!
//! Every cell carries a rate-1 Poisson clock and is resampled (fresh fair bit)
//! when it rings. The superposition of the clocks is simulated directly: gaps are
//! Exponential(|cells|) and the ringing cell is uniform. Null resamplings are kept.
//!
//! Event indicators are piecewise constant between ringing times, so evaluating
//! after each non-null event gives the indicator at every time. Each evaluation is
//! a full rescan; dynamic connectivity would only matter far beyond desk scale.

use std::io::{Read, Write};

use rayon::prelude::*;

use crate::connectivity::{Event, Scratch};
use crate::error::{param, Error, Result};
use crate::estimators::{run_chunks, Estimate};
use crate::lattice::{CellIndex, Region};
use crate::rng::RngStream;
use crate::sampling::{sample_into, Configuration};

const LANE_CLOCK: u64 = 31;

/// One resampling: at `time`, `cell` receives `bit`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Resample {
    pub time: f64,
    pub cell: CellIndex,
    pub bit: bool,
}

/// A simulated path `omega(t)`, `t` in `[0, horizon]`.
#[derive(Clone, Debug)]
pub struct Trajectory {
    region: Region,
    initial: Configuration,
    events: Vec<Resample>,
    horizon: f64,
}

/// Lazily generated resampling events of one trajectory.
struct Clock {
    seq: crate::rng::Sequence,
    rate: f64,
    cells: u64,
    time: f64,
}

impl Clock {
    fn new(region: &Region, rng: &RngStream) -> Self {
        Clock { seq: rng.sequence(LANE_CLOCK), rate: region.len() as f64, cells: region.len() as u64, time: 0.0 }
    }

    fn next(&mut self, horizon: f64) -> Option<Resample> {
        if self.cells == 0 {
            return None;
        }
        self.time += self.seq.exponential(self.rate);
        if self.time > horizon {
            return None;
        }
        let cell = CellIndex(self.seq.below(self.cells) as u32);
        Some(Resample { time: self.time, cell, bit: self.seq.next_bool() })
    }
}

fn check_horizon(horizon: f64) -> Result<()> {
    if horizon.is_finite() && horizon >= 0.0 {
        Ok(())
    } else {
        Err(param(format!("horizon must be finite and >= 0, got {horizon}")))
    }
}

/// Simulate on `[0, horizon]`; `omega(0)` is a critical colouring drawn from `rng`.
pub fn simulate(region: &Region, horizon: f64, rng: &RngStream) -> Result<Trajectory> {
    check_horizon(horizon)?;
    if horizon == 0.0 {
        return Err(param("horizon must be > 0"));
    }
    let mut initial = Configuration::zeros(region);
    sample_into(region, 0.5, rng, &mut initial)?;
    let mut clock = Clock::new(region, rng);
    let mut events = Vec::with_capacity((region.len() as f64 * horizon * 1.1) as usize + 16);
    while let Some(e) = clock.next(horizon) {
        events.push(e);
    }
    Ok(Trajectory { region: region.clone(), initial, events, horizon })
}

impl Trajectory {
    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn initial(&self) -> &Configuration {
        &self.initial
    }

    pub fn events(&self) -> &[Resample] {
        &self.events
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// `omega(t)`, right-continuous.
    pub fn state_at(&self, t: f64) -> Result<Configuration> {
        if !(0.0..=self.horizon).contains(&t) {
            return Err(param(format!("time {t} outside [0, {}]", self.horizon)));
        }
        let mut x = self.initial.clone();
        for e in self.events.iter().take_while(|e| e.time <= t) {
            x.set_bit(e.cell.get(), e.bit);
        }
        Ok(x)
    }

    /// Indicator path of `event` along the trajectory.
    pub fn indicator(&self, event: &dyn Event) -> Result<IndicatorPath> {
        if event.region().id() != self.region.id() {
            return Err(param("event and trajectory live on different regions"));
        }
        let mut s = Scratch::new();
        let mut x = self.initial.clone();
        let mut path = IndicatorPath::start(event.eval(&x, &mut s), self.horizon);
        for e in &self.events {
            if x.bit(e.cell.get()) == e.bit {
                continue;
            }
            x.set_bit(e.cell.get(), e.bit);
            path.record(e.time, event.eval(&x, &mut s));
        }
        Ok(path)
    }

    /// Binary event log: `horizon` and `initial` header, then one record per
    /// event (little-endian `f64` time, `u32` cell, `u8` bit).
    pub fn write_log<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&self.horizon.to_le_bytes())?;
        w.write_all(&(self.initial.len() as u32).to_le_bytes())?;
        for i in 0..self.initial.len() {
            w.write_all(&[self.initial.bit(i) as u8])?;
        }
        w.write_all(&(self.events.len() as u64).to_le_bytes())?;
        for e in &self.events {
            w.write_all(&e.time.to_le_bytes())?;
            w.write_all(&(e.cell.get() as u32).to_le_bytes())?;
            w.write_all(&[e.bit as u8])?;
        }
        Ok(())
    }

    pub fn read_log<R: Read>(region: &Region, mut r: R) -> Result<Self> {
        let mut b8 = [0u8; 8];
        let mut b4 = [0u8; 4];
        let mut b1 = [0u8; 1];
        r.read_exact(&mut b8)?;
        let horizon = f64::from_le_bytes(b8);
        check_horizon(horizon)?;
        r.read_exact(&mut b4)?;
        if u32::from_le_bytes(b4) as usize != region.len() {
            return Err(param("event log does not match region size"));
        }
        let mut initial = Configuration::zeros(region);
        for i in 0..region.len() {
            r.read_exact(&mut b1)?;
            initial.set_bit(i, b1[0] != 0);
        }
        r.read_exact(&mut b8)?;
        let count = u64::from_le_bytes(b8);
        let mut events = Vec::new();
        let mut last = 0.0;
        for _ in 0..count {
            r.read_exact(&mut b8)?;
            let time = f64::from_le_bytes(b8);
            r.read_exact(&mut b4)?;
            let cell = u32::from_le_bytes(b4) as usize;
            r.read_exact(&mut b1)?;
            if !(time > last && time <= horizon) || cell >= region.len() {
                return Err(param("corrupt event log"));
            }
            last = time;
            events.push(Resample { time, cell: CellIndex(cell as u32), bit: b1[0] != 0 });
        }
        Ok(Trajectory { region: region.clone(), initial, events, horizon })
    }
}

/// A piecewise-constant indicator on `[0, horizon]` given by its change points.
#[derive(Clone, Debug, PartialEq)]
pub struct IndicatorPath {
    initial: bool,
    changes: Vec<f64>,
    horizon: f64,
}

impl IndicatorPath {
    fn start(initial: bool, horizon: f64) -> Self {
        IndicatorPath { initial, changes: Vec::new(), horizon }
    }

    fn current(&self) -> bool {
        self.initial ^ (self.changes.len() % 2 == 1)
    }

    fn record(&mut self, time: f64, value: bool) {
        if value != self.current() {
            self.changes.push(time);
        }
    }

    pub fn value_at(&self, t: f64) -> bool {
        let flips = self.changes.partition_point(|&c| c <= t);
        self.initial ^ (flips % 2 == 1)
    }

    /// Maximal intervals `[a, b)` on which the indicator is 1.
    pub fn on_intervals(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        let mut on = self.initial;
        let mut since = 0.0;
        for &c in &self.changes {
            if on {
                out.push((since, c));
            }
            on = !on;
            since = c;
        }
        if on {
            out.push((since, self.horizon));
        }
        out
    }

    /// `int_a^b 1[f(s)] 1[f(s + lag)] ds`.
    pub fn overlap(&self, lag: f64, a: f64, b: f64) -> f64 {
        let on = self.on_intervals();
        let mut total = 0.0;
        let mut j = 0;
        for &(s0, s1) in &on {
            let (s0, s1) = (s0.max(a), s1.min(b));
            if s0 >= s1 {
                continue;
            }
            while j < on.len() && on[j].1 - lag <= s0 {
                j += 1;
            }
            let mut k = j;
            while k < on.len() && on[k].0 - lag < s1 {
                let lo = s0.max(on[k].0 - lag);
                let hi = s1.min(on[k].1 - lag);
                if hi > lo {
                    total += hi - lo;
                }
                k += 1;
            }
        }
        total
    }

    /// Time-average of `f(s) f(s + lag)` over `s` in `[0, horizon - lag]`, with a
    /// batch-means standard error over `batches` equal windows.
    pub fn correlation(&self, lag: f64, batches: usize) -> Result<Estimate> {
        if !(lag >= 0.0 && lag <= self.horizon) {
            return Err(param(format!("lag {lag} exceeds horizon {}", self.horizon)));
        }
        let span = self.horizon - lag;
        if span <= 0.0 || batches == 0 {
            return Err(Error::Insufficient("no time left after the lag".into()));
        }
        let w = span / batches as f64;
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        for b in 0..batches {
            let v = self.overlap(lag, b as f64 * w, (b + 1) as f64 * w) / w;
            sum += v;
            sum_sq += v * v;
        }
        Ok(Estimate::from_moments(sum, sum_sq, batches as u64, 0))
    }
}

/// Single-trajectory form: the time-averaged two-time correlation at `lag`.
pub fn correlation(traj: &Trajectory, event: &dyn Event, lag: f64) -> Result<Estimate> {
    let est = traj.indicator(event)?.correlation(lag, 20)?;
    Ok(est)
}

/// Two-time correlations on a lag grid from `replicas` independent trajectories
/// of length `horizon`; the standard error comes from the spread across replicas.
pub fn correlation_replicas(
    event: &dyn Event,
    lags: &[f64],
    horizon: f64,
    replicas: u64,
    rng: &RngStream,
) -> Result<Vec<Estimate>> {
    check_horizon(horizon)?;
    if replicas < 2 {
        return Err(param("at least two replicas are needed"));
    }
    if let Some(&bad) = lags.iter().find(|&&l| !(l >= 0.0 && l < horizon)) {
        return Err(param(format!("lag {bad} must lie in [0, horizon)")));
    }
    let region = event.region();
    let per: Vec<Vec<f64>> = (0..replicas)
        .into_par_iter()
        .map(|k| {
            let traj = simulate(region, horizon, &rng.substream(k)).expect("validated horizon");
            let path = traj.indicator(event).expect("same region");
            lags.iter().map(|&l| path.overlap(l, 0.0, horizon - l) / (horizon - l)).collect()
        })
        .collect();
    Ok((0..lags.len())
        .map(|i| {
            let (s, s2) = per.iter().fold((0.0, 0.0), |(a, b), v| (a + v[i], b + v[i] * v[i]));
            Estimate::from_moments(s, s2, replicas, rng.seed())
        })
        .collect())
}

/// Fraction of trajectories on which `event` holds at some time in `[0, horizon]`.
pub fn exceptional_probability(event: &dyn Event, horizon: f64, n: u64, rng: &RngStream) -> Result<Estimate> {
    check_horizon(horizon)?;
    if n == 0 {
        return Err(param("sample count must be >= 1"));
    }
    let region = event.region();
    let acc = run_chunks(n, 1, |range, acc| {
        let mut s = Scratch::new();
        let mut x = Configuration::zeros(region);
        for k in range {
            let r = rng.substream(k);
            sample_into(region, 0.5, &r, &mut x).expect("valid density");
            let mut hit = event.eval(&x, &mut s);
            let mut clock = Clock::new(region, &r);
            while !hit {
                let Some(e) = clock.next(horizon) else { break };
                let i = e.cell.get();
                if x.bit(i) == e.bit {
                    continue;
                }
                x.set_bit(i, e.bit);
                hit = event.eval(&x, &mut s);
            }
            acc[0].push(hit as i64);
        }
    });
    Ok(acc[0].estimate(n, 1.0, rng.seed()))
}

/// Result of a Frostman correlation integral.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrostmanIntegral {
    pub value: f64,
    /// Fewer than 8 grid points per decade of `t`.
    pub coarse: bool,
}

/// `int_0^1 t^{-gamma} pi(t) / alpha^2 dt` from estimates of `pi` on a grid.
///
/// The integrand is linearly interpolated in `t` and integrated exactly against
/// `t^{-gamma}`. The boundary values `pi(0) = alpha` and `pi(1) = alpha^2` are used
/// where the grid does not reach the endpoints.
pub fn correlation_integral(alpha: f64, gamma: f64, grid: &[(f64, f64)]) -> Result<FrostmanIntegral> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(param(format!("gamma must lie in [0,1), got {gamma}")));
    }
    if alpha.is_nan() || alpha <= 0.0 {
        return Err(Error::Insufficient("alpha estimate is zero".into()));
    }
    let mut pts: Vec<(f64, f64)> = grid.to_vec();
    if pts.iter().any(|&(t, _)| !(0.0..=1.0).contains(&t)) {
        return Err(param("grid points must lie in [0,1]"));
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts.dedup_by(|a, b| a.0 == b.0);
    if pts.first().is_none_or(|p| p.0 > 0.0) {
        pts.insert(0, (0.0, alpha));
    }
    if pts.last().is_some_and(|p| p.0 < 1.0) {
        pts.push((1.0, alpha * alpha));
    }
    let a2 = alpha * alpha;
    let (e1, e2) = (1.0 - gamma, 2.0 - gamma);
    let mut value = 0.0;
    for w in pts.windows(2) {
        let ((t0, p0), (t1, p1)) = (w[0], w[1]);
        let slope = (p1 - p0) / (t1 - t0) / a2;
        let c0 = p0 / a2 - slope * t0;
        value += c0 * (t1.powf(e1) - t0.powf(e1)) / e1 + slope * (t1.powf(e2) - t0.powf(e2)) / e2;
    }
    Ok(FrostmanIntegral { value, coarse: is_coarse(grid) })
}

fn is_coarse(grid: &[(f64, f64)]) -> bool {
    let pos: Vec<f64> = grid.iter().map(|p| p.0).filter(|&t| t > 0.0).collect();
    if pos.len() < 2 {
        return true;
    }
    let lo = pos.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = pos.iter().copied().fold(0.0, f64::max);
    let decades = (hi / lo).log10();
    decades > 0.0 && (pos.len() as f64) < 8.0 * decades
}
