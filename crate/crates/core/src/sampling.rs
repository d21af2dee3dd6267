//! Configurations, critical sampling and the resampling noise.
//!
//! Randomness is keyed by cell position rather than by cell index: the colour of
//! the cell at `(row, col)` under a given [`RngStream`] is the same in every
//! region containing it. Nested boxes and annuli sampled from one stream are
//! therefore restrictions of a single infinite-volume configuration, and the
//! same holds for the noise (selection uniforms and fresh bits), which gives
//! common random numbers across scales and across noise levels.
//!
//! Resampling draws a fresh fair bit, so a selected bit keeps its value with
//! probability 1/2; this has the same law as flipping with probability `t/2`.

use crate::error::{param, Error, Result};
use crate::lattice::{Cell, CellIndex, Region};
use crate::rng::{Lane, RngStream};

pub(crate) mod lanes {
    pub const COLOR_PACKED: u64 = 1;
    pub const COLOR_UNIFORM: u64 = 2;
    pub const SELECT: u64 = 3;
    pub const FRESH: u64 = 4;
    pub const TWO_STEP_FIRST: u64 = 11;
    pub const TWO_STEP_SECOND: u64 = 12;
}

/// A colouring of a region's cells; bit `i` is the colour of cell `i` (1 = black/open).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Configuration {
    words: Vec<u64>,
    len: usize,
    region_id: u64,
}

impl Configuration {
    pub fn zeros(region: &Region) -> Self {
        Configuration { words: vec![0; region.len().div_ceil(64)], len: region.len(), region_id: region.id() }
    }

    pub fn ones(region: &Region) -> Self {
        let mut c = Self::zeros(region);
        for i in 0..c.len {
            c.set_bit(i, true);
        }
        c
    }

    pub fn from_bits(region: &Region, bits: &[bool]) -> Result<Self> {
        if bits.len() != region.len() {
            return Err(param(format!("{} bits given for a region of {} cells", bits.len(), region.len())));
        }
        let mut c = Self::zeros(region);
        for (i, &b) in bits.iter().enumerate() {
            c.set_bit(i, b);
        }
        Ok(c)
    }

    /// Configuration whose bit `i` is bit `i` of `index` (regions of at most 64 cells).
    pub fn from_index(region: &Region, index: u64) -> Result<Self> {
        if region.len() > 64 {
            return Err(Error::SizeLimit { bits: region.len(), limit: 64 });
        }
        let mut c = Self::zeros(region);
        if c.len > 0 {
            let mask = if c.len == 64 { u64::MAX } else { (1u64 << c.len) - 1 };
            c.words[0] = index & mask;
        }
        Ok(c)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn region_id(&self) -> u64 {
        self.region_id
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn bit(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i >> 6] >> (i & 63)) & 1 == 1
    }

    #[inline]
    pub fn get(&self, c: CellIndex) -> bool {
        self.bit(c.get())
    }

    #[inline]
    pub fn set_bit(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let m = 1u64 << (i & 63);
        if value {
            self.words[i >> 6] |= m;
        } else {
            self.words[i >> 6] &= !m;
        }
    }

    pub fn set(&mut self, c: CellIndex, value: bool) -> Result<()> {
        self.check(c)?;
        self.set_bit(c.get(), value);
        Ok(())
    }

    /// Copy with cell `c` flipped.
    pub fn flip(&self, c: CellIndex) -> Result<Self> {
        let mut y = self.clone();
        y.flip_in_place(c)?;
        Ok(y)
    }

    /// Flip cell `c` in place; calling it again undoes the flip.
    pub fn flip_in_place(&mut self, c: CellIndex) -> Result<()> {
        self.check(c)?;
        self.words[c.get() >> 6] ^= 1u64 << (c.get() & 63);
        Ok(())
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn hamming(&self, other: &Configuration) -> usize {
        self.words.iter().zip(&other.words).map(|(a, b)| (a ^ b).count_ones() as usize).sum()
    }

    /// Bitwise complement (colour swap).
    pub fn complement(&self) -> Self {
        let mut c = self.clone();
        for i in 0..c.len {
            c.set_bit(i, !self.bit(i));
        }
        c
    }

    /// Coordinatewise order `self <= other`.
    pub fn le(&self, other: &Configuration) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    fn check(&self, c: CellIndex) -> Result<()> {
        if c.get() < self.len {
            Ok(())
        } else {
            Err(param(format!("cell index {} out of range for {} cells", c.0, self.len)))
        }
    }

    pub(crate) fn check_region(&self, region: &Region) -> Result<()> {
        if self.len != region.len() || self.region_id != region.id() {
            return Err(param(format!("configuration does not belong to {}", region.shape())));
        }
        Ok(())
    }

    pub(crate) fn reset_for(&mut self, region: &Region) {
        self.len = region.len();
        self.region_id = region.id();
        self.words.clear();
        self.words.resize(region.len().div_ceil(64), 0);
    }
}

/// Noise parameter: resample with probability `t` inside `subset` and with probability 1 outside it.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseSpec {
    pub t: f64,
    pub subset: Option<Vec<CellIndex>>,
}

impl NoiseSpec {
    pub fn uniform(t: f64) -> Self {
        NoiseSpec { t, subset: None }
    }

    pub fn on_subset(t: f64, subset: Vec<CellIndex>) -> Self {
        NoiseSpec { t, subset: Some(subset) }
    }

    /// Per-cell resampling probabilities.
    pub fn rates(&self, region: &Region) -> Result<Vec<f64>> {
        check_prob(self.t, "noise level")?;
        match &self.subset {
            None => Ok(vec![self.t; region.len()]),
            Some(s) => {
                let mut r = vec![1.0; region.len()];
                for &c in s {
                    region.check(c)?;
                    r[c.get()] = self.t;
                }
                Ok(r)
            }
        }
    }
}

pub(crate) fn check_prob(p: f64, what: &str) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(param(format!("{what} must lie in [0,1], got {p}")))
    }
}

#[inline]
fn uniform_counter(c: Cell) -> u64 {
    ((c.row as u32 as u64) << 32) | c.col as u32 as u64
}

#[inline]
fn packed_counter(c: Cell) -> u64 {
    ((c.row as u32 as u64) << 32) | (c.col >> 6) as u32 as u64
}

/// Fair bits keyed by position, caching the word shared by 64 consecutive columns.
pub(crate) struct PackedBits {
    lane: Lane,
    key: u64,
    word: u64,
}

impl PackedBits {
    pub(crate) fn new(rng: &RngStream, lane: u64) -> Self {
        // Primed with a real word: any sentinel key is also the key of some cell.
        let lane = rng.lane(lane);
        PackedBits { word: lane.word(0), lane, key: 0 }
    }

    #[inline]
    pub(crate) fn bit(&mut self, c: Cell) -> bool {
        let k = packed_counter(c);
        if k != self.key {
            self.key = k;
            self.word = self.lane.word(k);
        }
        (self.word >> (c.col & 63)) & 1 == 1
    }
}

/// Position-keyed uniform in `[0,1)`.
#[inline]
pub(crate) fn cell_uniform(lane: &Lane, c: Cell) -> f64 {
    lane.uniform(uniform_counter(c))
}

/// i.i.d. Bernoulli(`p`) colouring.
pub fn sample(region: &Region, p: f64, rng: &RngStream) -> Result<Configuration> {
    let mut x = Configuration::zeros(region);
    sample_into(region, p, rng, &mut x)?;
    Ok(x)
}

/// As [`sample`], reusing the storage of `out`.
pub fn sample_into(region: &Region, p: f64, rng: &RngStream, out: &mut Configuration) -> Result<()> {
    check_prob(p, "density")?;
    out.reset_for(region);
    if p == 0.5 {
        let mut bits = PackedBits::new(rng, lanes::COLOR_PACKED);
        for (i, &c) in region.cells().iter().enumerate() {
            if bits.bit(c) {
                out.set_bit(i, true);
            }
        }
    } else {
        let lane = rng.lane(lanes::COLOR_UNIFORM);
        for (i, &c) in region.cells().iter().enumerate() {
            if cell_uniform(&lane, c) < p {
                out.set_bit(i, true);
            }
        }
    }
    Ok(())
}

/// Resample `x` according to `spec`; selected cells receive a fresh fair bit.
pub fn noise(region: &Region, x: &Configuration, spec: &NoiseSpec, rng: &RngStream) -> Result<Configuration> {
    let rates = spec.rates(region)?;
    noise_hetero(region, x, &rates, rng)
}

/// Resample cell `i` with probability `rates[i]`.
pub fn noise_hetero(region: &Region, x: &Configuration, rates: &[f64], rng: &RngStream) -> Result<Configuration> {
    x.check_region(region)?;
    if rates.len() != region.len() {
        return Err(param("one rate per cell required"));
    }
    for &t in rates {
        check_prob(t, "noise level")?;
    }
    let mut y = x.clone();
    let mut fresh = PackedBits::new(rng, lanes::FRESH);
    let select = rng.lane(lanes::SELECT);
    for (i, &c) in region.cells().iter().enumerate() {
        let t = rates[i];
        if t > 0.0 && cell_uniform(&select, c) < t {
            y.set_bit(i, fresh.bit(c));
        }
    }
    Ok(y)
}

/// Uniform-rate noise written into `out`; reference for [`GridNoise`].
#[cfg(test)]
pub(crate) fn noise_uniform_into(region: &Region, x: &Configuration, t: f64, rng: &RngStream, out: &mut Configuration) {
    out.clone_from(x);
    if t <= 0.0 {
        return;
    }
    let mut fresh = PackedBits::new(rng, lanes::FRESH);
    let select = rng.lane(lanes::SELECT);
    for (i, &c) in region.cells().iter().enumerate() {
        if t >= 1.0 || cell_uniform(&select, c) < t {
            out.set_bit(i, fresh.bit(c));
        }
    }
}

/// Uniform-rate noise on a whole grid of levels sharing the same selection
/// uniforms and fresh bits. `Y_t` for the `k`-th smallest level is `x` with the
/// first `k + 1` buckets applied; the result equals [`noise_uniform_into`] at that level.
pub(crate) struct GridNoise {
    order: Vec<usize>,
    sorted: Vec<f64>,
    start: Vec<usize>,
    cells: Vec<u32>,
    bucket: Vec<u16>,
    fresh: Configuration,
}

impl GridNoise {
    pub(crate) fn new(ts: &[f64]) -> Self {
        let mut order: Vec<usize> = (0..ts.len()).collect();
        order.sort_by(|&a, &b| ts[a].total_cmp(&ts[b]));
        let sorted = order.iter().map(|&i| ts[i]).collect();
        GridNoise {
            order,
            sorted,
            start: Vec::new(),
            cells: Vec::new(),
            bucket: Vec::new(),
            fresh: Configuration { words: Vec::new(), len: 0, region_id: 0 },
        }
    }

    /// Indices into the original grid, by increasing level.
    pub(crate) fn order(&self) -> &[usize] {
        &self.order
    }

    pub(crate) fn prepare(&mut self, region: &Region, rng: &RngStream) {
        let levels = self.sorted.len();
        self.fresh.reset_for(region);
        self.bucket.clear();
        self.start.clear();
        self.start.resize(levels + 2, 0);
        let mut bits = PackedBits::new(rng, lanes::FRESH);
        let select = rng.lane(lanes::SELECT);
        for (i, &c) in region.cells().iter().enumerate() {
            let u = cell_uniform(&select, c);
            let k = self.sorted.partition_point(|&t| t <= u);
            self.bucket.push(k as u16);
            self.start[k + 1] += 1;
            if k < levels && bits.bit(c) {
                self.fresh.set_bit(i, true);
            }
        }
        for k in 0..=levels {
            self.start[k + 1] += self.start[k];
        }
        self.cells.clear();
        self.cells.resize(region.len(), 0);
        let mut fill = self.start.clone();
        for (i, &k) in self.bucket.iter().enumerate() {
            self.cells[fill[k as usize]] = i as u32;
            fill[k as usize] += 1;
        }
    }

    /// Advance `y` from level `k - 1` to level `k` of the sorted grid.
    pub(crate) fn apply(&self, k: usize, y: &mut Configuration) {
        for &i in &self.cells[self.start[k]..self.start[k + 1]] {
            y.set_bit(i as usize, self.fresh.bit(i as usize));
        }
    }
}

/// The level `s` with `1 - t = (1 - s)^2`.
pub fn half_step(t: f64) -> f64 {
    1.0 - (1.0 - t).sqrt()
}

/// Two-step coupling: `w = noise(x, s)`, `y = noise(w, s)` with `1 - t = (1 - s)^2`,
/// using independent sub-streams for the two steps.
pub fn two_step_coupling(
    region: &Region,
    x: &Configuration,
    t: f64,
    rng: &RngStream,
) -> Result<(Configuration, Configuration)> {
    check_prob(t, "noise level")?;
    let s = half_step(t);
    let w = noise(region, x, &NoiseSpec::uniform(s), &rng.substream(lanes::TWO_STEP_FIRST))?;
    let y = noise(region, &w, &NoiseSpec::uniform(s), &rng.substream(lanes::TWO_STEP_SECOND))?;
    Ok((w, y))
}

/// `x` with cell `i` flipped.
pub fn flip(x: &Configuration, i: CellIndex) -> Result<Configuration> {
    x.flip(i)
}
