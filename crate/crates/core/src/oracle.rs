//! Exact noised second moments on enumerable instances.
//!
//! Two independent routes compute `Q_t(f) = E[f(X) f(Y)]` for a heterogeneous
//! resampling vector `t`:
//!
//! * the direct route applies the one-coordinate kernel
//!   `[[1 - t_i/2, t_i/2], [t_i/2, 1 - t_i/2]]` to the table of `f` along each
//!   coordinate in turn and takes `2^-n <f, K f>`;
//! * the transform route computes the Walsh spectrum and sums
//!   `f^(A)^2 * prod_{i in A} (1 - t_i)`.
//!
//! The transform is only a verification device for the direct route. Both are
//! generic over [`Scalar`], so running them with [`crate::Exact`] gives exact
//! rational answers.

use serde::Serialize;

use crate::connectivity::{ArmEvent, ArmType, Crossing, Event, Scratch};
use crate::error::{param, Error, Result};
use crate::lattice::{LatticeKind, Region, Shape};
use crate::rng::RngStream;
use crate::sampling::Configuration;
use crate::scalar::Scalar;

/// Largest table handled by the direct route.
pub const DIRECT_MAX_BITS: usize = 20;

/// Default largest table handled by the transform route.
pub const TRANSFORM_MAX_BITS: usize = 22;

/// A Boolean function on `{0,1}^n_bits`, stored as a bitset over inputs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruthTable {
    n_bits: usize,
    values: Vec<u64>,
}

fn check_bits(n_bits: usize, limit: usize) -> Result<()> {
    if n_bits > limit {
        Err(Error::SizeLimit { bits: n_bits, limit })
    } else {
        Ok(())
    }
}

impl TruthTable {
    pub fn from_fn(n_bits: usize, mut f: impl FnMut(u64) -> bool) -> Result<Self> {
        check_bits(n_bits, TRANSFORM_MAX_BITS)?;
        let size = 1usize << n_bits;
        let mut values = vec![0u64; size.div_ceil(64)];
        for x in 0..size {
            if f(x as u64) {
                values[x >> 6] |= 1 << (x & 63);
            }
        }
        Ok(TruthTable { n_bits, values })
    }

    /// Table of an event; input bit `i` is the colour of cell `i` of the event's region.
    pub fn from_event(event: &dyn Event) -> Result<Self> {
        let region = event.region();
        check_bits(region.len(), TRANSFORM_MAX_BITS)?;
        let mut scratch = Scratch::new();
        let mut x = Configuration::zeros(region);
        Self::from_fn(region.len(), |idx| {
            for i in 0..region.len() {
                x.set_bit(i, (idx >> i) & 1 == 1);
            }
            event.eval(&x, &mut scratch)
        })
    }

    pub fn constant(n_bits: usize, value: bool) -> Result<Self> {
        Self::from_fn(n_bits, |_| value)
    }

    pub fn dictator(n_bits: usize, i: usize) -> Result<Self> {
        if i >= n_bits {
            return Err(param("dictator coordinate out of range"));
        }
        Self::from_fn(n_bits, |x| (x >> i) & 1 == 1)
    }

    pub fn and(n_bits: usize) -> Result<Self> {
        let all = if n_bits == 64 { u64::MAX } else { (1u64 << n_bits) - 1 };
        Self::from_fn(n_bits, |x| x & all == all)
    }

    pub fn parity(n_bits: usize) -> Result<Self> {
        Self::from_fn(n_bits, |x| x.count_ones() % 2 == 1)
    }

    pub fn majority(n_bits: usize) -> Result<Self> {
        Self::from_fn(n_bits, |x| 2 * x.count_ones() as usize > n_bits)
    }

    pub fn n_bits(&self) -> usize {
        self.n_bits
    }

    #[inline]
    pub fn get(&self, x: u64) -> bool {
        (self.values[(x >> 6) as usize] >> (x & 63)) & 1 == 1
    }

    pub fn is_monotone(&self) -> bool {
        let size = 1u64 << self.n_bits;
        (0..size).all(|x| (0..self.n_bits).all(|i| (x >> i) & 1 == 1 || !self.get(x) || self.get(x | 1 << i)))
    }

    /// Indicator that coordinate `i` is pivotal.
    pub fn pivotal(&self, i: usize) -> Result<Self> {
        if i >= self.n_bits {
            return Err(param("coordinate out of range"));
        }
        Self::from_fn(self.n_bits, |x| self.get(x) != self.get(x ^ (1 << i)))
    }

    /// `grad_i f = (f(x with x_i = 1) - f(x with x_i = 0)) / 2` as a real table.
    pub fn gradient<S: Scalar>(&self, i: usize) -> Result<Vec<S>> {
        if i >= self.n_bits {
            return Err(param("coordinate out of range"));
        }
        let size = 1u64 << self.n_bits;
        Ok((0..size)
            .map(|x| {
                let hi = self.get(x | 1 << i);
                let lo = self.get(x & !(1 << i));
                match (hi, lo) {
                    (true, false) => S::half(),
                    (false, true) => -S::half(),
                    _ => S::zero(),
                }
            })
            .collect())
    }

    pub fn values<S: Scalar>(&self) -> Vec<S> {
        (0..1u64 << self.n_bits).map(|x| if self.get(x) { S::one() } else { S::zero() }).collect()
    }

    pub fn mean<S: Scalar>(&self) -> S {
        let ones: u64 = self.values.iter().map(|w| w.count_ones() as u64).sum();
        S::from_u64(ones).unwrap() / pow2::<S>(self.n_bits)
    }
}

fn pow2<S: Scalar>(n: usize) -> S {
    let two = S::one() + S::one();
    (0..n).fold(S::one(), |acc, _| acc * two.clone())
}

/// Rate vector: `t` on `subset` (all coordinates when `None`) and 1 elsewhere.
pub fn rates<S: Scalar>(n_bits: usize, t: S, subset: Option<&[usize]>) -> Result<Vec<S>> {
    if t < S::zero() || t > S::one() {
        return Err(param("noise level must lie in [0,1]"));
    }
    match subset {
        None => Ok(vec![t; n_bits]),
        Some(s) => {
            let mut r = vec![S::one(); n_bits];
            for &i in s {
                if i >= n_bits {
                    return Err(param("subset coordinate out of range"));
                }
                r[i] = t.clone();
            }
            Ok(r)
        }
    }
}

fn check_rates<S: Scalar>(n_bits: usize, rates: &[S]) -> Result<()> {
    if rates.len() != n_bits {
        return Err(param(format!("{} rates for {} bits", rates.len(), n_bits)));
    }
    if rates.iter().any(|t| *t < S::zero() || *t > S::one()) {
        return Err(param("noise levels must lie in [0,1]"));
    }
    Ok(())
}

/// Direct route for a real-valued table `h`: `2^-n * sum_x h(x) (K h)(x)`.
pub fn qt_of_values<S: Scalar>(h: &[S], rates: &[S]) -> Result<S> {
    let n_bits = rates.len();
    if h.len() != 1 << n_bits {
        return Err(param("table length must be 2^n"));
    }
    check_bits(n_bits, DIRECT_MAX_BITS)?;
    check_rates(n_bits, rates)?;
    let mut k = h.to_vec();
    for (i, t) in rates.iter().enumerate() {
        let stay = S::one() - t.clone() * S::half();
        let move_ = t.clone() * S::half();
        let bit = 1usize << i;
        for x in 0..k.len() {
            if x & bit == 0 {
                let a = k[x].clone();
                let b = k[x | bit].clone();
                k[x] = stay.clone() * a.clone() + move_.clone() * b.clone();
                k[x | bit] = move_.clone() * a + stay.clone() * b;
            }
        }
    }
    let total = h.iter().zip(&k).fold(S::zero(), |acc, (a, b)| acc + a.clone() * b.clone());
    Ok(total / pow2::<S>(n_bits))
}

/// `Q_t(f)` by the direct route.
pub fn exact_qt<S: Scalar>(f: &TruthTable, rates: &[S]) -> Result<S> {
    check_bits(f.n_bits, DIRECT_MAX_BITS)?;
    qt_of_values(&f.values::<S>(), rates)
}

/// Walsh coefficients `f^(A) = 2^-n sum_x f(x) (-1)^{|A ∩ x|}`, indexed by the bitmask of `A`.
pub fn walsh_spectrum<S: Scalar>(f: &TruthTable, limit: usize) -> Result<Vec<S>> {
    check_bits(f.n_bits, limit)?;
    let mut a = f.values::<S>();
    let mut h = 1;
    while h < a.len() {
        for x in 0..a.len() {
            if x & h == 0 {
                let u = a[x].clone();
                let v = a[x | h].clone();
                a[x] = u.clone() + v.clone();
                a[x | h] = u - v;
            }
        }
        h <<= 1;
    }
    let norm = pow2::<S>(f.n_bits);
    Ok(a.into_iter().map(|c| c / norm.clone()).collect())
}

/// `Q_t(f)` by the transform route.
pub fn exact_qt_transform<S: Scalar>(f: &TruthTable, rates: &[S], limit: usize) -> Result<S> {
    check_rates(f.n_bits, rates)?;
    let spec = walsh_spectrum::<S>(f, limit)?;
    // rho(A) = prod_{i in A} (1 - t_i), built incrementally over the lowest set bit
    let mut rho = vec![S::one(); spec.len()];
    let mut total = S::zero();
    for a in 0..spec.len() {
        if a > 0 {
            let low = a.trailing_zeros() as usize;
            rho[a] = rho[a & (a - 1)].clone() * (S::one() - rates[low].clone());
        }
        total = total + spec[a].clone() * spec[a].clone() * rho[a].clone();
    }
    Ok(total)
}

/// `COV_t(f) = Q_t(f) - Q_1(f)` for uniform noise.
pub fn exact_cov<S: Scalar>(f: &TruthTable, t: S) -> Result<S> {
    let q = exact_qt(f, &rates(f.n_bits, t, None)?)?;
    let q1 = exact_qt(f, &rates(f.n_bits, S::one(), None)?)?;
    Ok(q - q1)
}

/// Both sides of `-d/dt_i E[f(X) f(Y)] = E[grad_i f(X) grad_i f(Y)]`.
///
/// `Q` is affine in `t_i`, so the left side is `Q(t_i = 0) - Q(t_i = 1)`; the
/// right side is the direct route applied to the gradient table.
pub fn gradient_identity<S: Scalar>(f: &TruthTable, i: usize, rates: &[S]) -> Result<(S, S)> {
    check_bits(f.n_bits, DIRECT_MAX_BITS)?;
    check_rates(f.n_bits, rates)?;
    if i >= f.n_bits {
        return Err(param("coordinate out of range"));
    }
    let mut r0 = rates.to_vec();
    r0[i] = S::zero();
    let mut r1 = rates.to_vec();
    r1[i] = S::one();
    let lhs = exact_qt(f, &r0)? - exact_qt(f, &r1)?;
    let rhs = qt_of_values(&f.gradient::<S>(i)?, rates)?;
    Ok((lhs, rhs))
}

/// `(-d/dt Q_t^S(f), 1/4 sum_{i in S} Q_t^S(i pivotal))`.
pub fn russo<S: Scalar>(f: &TruthTable, t: S, subset: Option<&[usize]>) -> Result<(S, S)> {
    let r = rates(f.n_bits, t, subset)?;
    let coords: Vec<usize> = match subset {
        None => (0..f.n_bits).collect(),
        Some(s) => s.to_vec(),
    };
    let mut derivative = S::zero();
    let mut bound = S::zero();
    for &i in &coords {
        let (lhs, _) = gradient_identity(f, i, &r)?;
        derivative = derivative + lhs;
        bound = bound + exact_qt(&f.pivotal(i)?, &r)?;
    }
    Ok((derivative, bound * S::quarter()))
}

/// `1/4 sum_i Q_t(i pivotal)` for uniform noise.
pub fn exact_pivotal_sum<S: Scalar>(f: &TruthTable, t: S) -> Result<S> {
    Ok(russo(f, t, None)?.1)
}

/// Exact `pi(t) = Q_t(f)` for an arm event, with the scale conventions applied.
pub fn exact_arm_probability<S: Scalar>(kind: LatticeKind, shape: Shape, arm: &ArmType, t: S) -> Result<S> {
    let ev = ArmEvent::new(kind, shape, arm.clone())?;
    if ev.is_certain() {
        return Ok(S::one());
    }
    check_bits(ev.region().len(), DIRECT_MAX_BITS)?;
    let f = TruthTable::from_event(&ev)?;
    let n = f.n_bits;
    exact_qt(&f, &rates(n, t, None)?)
}

/// Brute-force arm detection: search for `j` pairwise disjoint monochromatic
/// paths from the inner to the outer boundary whose start positions, read along
/// the inner boundary slots, carry the colours of `arm` (cyclically in the plane).
///
/// Only chordless paths whose sole inner-boundary cell is their first cell and
/// whose sole outer-boundary cell is their last are enumerated; every arm
/// contains such a sub-path. Exponential; regions of at most 128 cells.
pub fn brute_arm_event(x: &Configuration, region: &Region, arm: &ArmType) -> Result<bool> {
    if region.len() > 128 {
        return Err(Error::SizeLimit { bits: region.len(), limit: 128 });
    }
    if !region.shape().is_annular() || arm.half_plane() != region.shape().is_half() {
        return Err(param("arm type does not match region"));
    }
    x.check_region(region)?;
    let fl = region.flags();
    // (slot position, colour, cell mask) of every trimmed path
    let mut paths: Vec<(usize, bool, u128)> = Vec::new();
    let mut started = vec![false; region.len()];
    for (k, slot) in region.inner_slots().iter().enumerate() {
        for &start in &slot.cells {
            let color = x.get(start);
            let inner = crate::lattice::flags::inner_for(color);
            let outer = crate::lattice::flags::outer_for(color);
            if fl[start.get()] & inner == 0 || (!color && slot.black_only) || started[start.get()] {
                continue;
            }
            started[start.get()] = true;
            let adj = region.adjacency(crate::lattice::Color::from_bit(color));
            let mut stack = vec![(start.get(), 1u128 << start.get())];
            while let Some((at, mask)) = stack.pop() {
                if fl[at] & outer != 0 {
                    paths.push((k, color, mask));
                    continue;
                }
                for &nb in adj.of(at) {
                    let j = nb.get();
                    // chordless paths suffice: any arm contains one with the same endpoints
                    let chord = adj.of(j).iter().any(|&c| c.get() != at && mask >> c.get() & 1 == 1);
                    if mask >> j & 1 == 0 && x.bit(j) == color && fl[j] & inner == 0 && !chord {
                        stack.push((j, mask | 1 << j));
                    }
                }
            }
        }
    }
    paths.sort_unstable();
    paths.dedup();
    let sigma = arm.sigma();
    let j = sigma.len();
    let rotations = if arm.half_plane() { 1 } else { j };
    for r in 0..rotations {
        let target: Vec<bool> = (0..j).map(|k| sigma[(k + r) % j]).collect();
        if search(&paths, &target, 0, 0, 0) {
            return Ok(true);
        }
    }
    Ok(false)
}

fn search(paths: &[(usize, bool, u128)], target: &[bool], depth: usize, from: usize, used: u128) -> bool {
    if depth == target.len() {
        return true;
    }
    (from..paths.len()).any(|k| {
        let (_, color, mask) = paths[k];
        color == target[depth] && mask & used == 0 && search(paths, target, depth + 1, k + 1, used | mask)
    })
}

/// Largest table in the identity corpus.
pub const CORPUS_MAX_BITS: usize = 13;

/// Small Boolean functions on which the exact identities are checked: classic
/// examples, crossings of small boxes and the non-trivial arm events that fit.
pub fn identity_corpus() -> Result<Vec<(String, TruthTable)>> {
    let mut out = vec![
        ("const0".to_string(), TruthTable::constant(3, false)?),
        ("const1".into(), TruthTable::constant(3, true)?),
        ("dictator3".into(), TruthTable::dictator(3, 1)?),
        ("and2".into(), TruthTable::and(2)?),
        ("and4".into(), TruthTable::and(4)?),
        ("parity2".into(), TruthTable::parity(2)?),
        ("parity5".into(), TruthTable::parity(5)?),
        ("majority3".into(), TruthTable::majority(3)?),
        ("majority5".into(), TruthTable::majority(5)?),
    ];
    let rng = RngStream::new(0x5eed, 0);
    out.push(("random7".into(), TruthTable::from_fn(7, |x| rng.word(0, x) & 1 == 1)?));
    for kind in [LatticeKind::TriangularSite, LatticeKind::SquareBond] {
        for n in 1..=3 {
            let g = Crossing::new(kind, n)?;
            if g.region().len() <= CORPUS_MAX_BITS {
                out.push((format!("crossing_{}_{n}", kind.tag()), TruthTable::from_event(&g)?));
            }
        }
        let arms = [
            (Shape::HalfAnnulus { m: 1, n: 2 }, "1+"),
            (Shape::HalfAnnulus { m: 1, n: 2 }, "01+"),
            (Shape::HalfAnnulus { m: 1, n: 3 }, "1+"),
            (Shape::Annulus { m: 1, n: 2 }, "1"),
            (Shape::Annulus { m: 1, n: 2 }, "01"),
            (Shape::Annulus { m: 1, n: 1 }, "1"),
            (Shape::Annulus { m: 1, n: 1 }, "01"),
        ];
        for (shape, arm) in arms {
            let Ok(ev) = ArmEvent::new(kind, shape, arm.parse()?) else { continue };
            if !ev.is_certain() && ev.region().len() <= CORPUS_MAX_BITS {
                out.push((format!("arm_{}_{}_{}", kind.tag(), arm, shape), TruthTable::from_event(&ev)?));
            }
        }
    }
    Ok(out)
}

/// Worst deviations of the exact identities on one table.
#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub name: String,
    pub n_bits: usize,
    pub monotone: bool,
    /// `max |lhs - rhs|` of the gradient identity.
    pub gradient_gap: f64,
    /// `min rhs` of the gradient identity (must be non-negative).
    pub gradient_min_rhs: f64,
    /// `max(-derivative, derivative - bound)` in the Russo inequality.
    pub russo_violation: f64,
    /// `max |derivative - bound|`, which must vanish for monotone functions.
    pub russo_gap: f64,
    /// `max (Q_u - Q_t)` over `t < u`.
    pub t_monotone_violation: f64,
    /// `max (Q^S - Q^S')` over `S ⊂ S'`.
    pub subset_monotone_violation: f64,
}

impl IdentityReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.gradient_gap <= tol
            && self.gradient_min_rhs >= -tol
            && self.russo_violation <= tol
            && (!self.monotone || self.russo_gap <= tol)
            && self.t_monotone_violation <= tol
            && self.subset_monotone_violation <= tol
    }
}

/// Run every identity on `f` over the noise grid `ts`, plus `random_vectors`
/// heterogeneous rate vectors for the gradient identity.
pub fn identity_report(name: &str, f: &TruthTable, ts: &[f64], random_vectors: u64) -> Result<IdentityReport> {
    let n = f.n_bits();
    let mut rep = IdentityReport {
        name: name.into(),
        n_bits: n,
        monotone: f.is_monotone(),
        gradient_gap: 0.0,
        gradient_min_rhs: f64::INFINITY,
        russo_violation: f64::NEG_INFINITY,
        russo_gap: 0.0,
        t_monotone_violation: f64::NEG_INFINITY,
        subset_monotone_violation: f64::NEG_INFINITY,
    };
    let rng = RngStream::new(0x1de, n as u64);
    let mut vectors: Vec<Vec<f64>> = ts.iter().map(|&t| vec![t; n]).collect();
    for v in 0..random_vectors {
        vectors.push((0..n as u64).map(|i| rng.uniform(v, i)).collect());
    }
    for r in &vectors {
        for i in 0..n {
            let (lhs, rhs) = gradient_identity(f, i, r)?;
            rep.gradient_gap = rep.gradient_gap.max((lhs - rhs).abs());
            rep.gradient_min_rhs = rep.gradient_min_rhs.min(rhs);
        }
    }
    let mut prev: Option<f64> = None;
    let mut sorted = ts.to_vec();
    sorted.sort_by(f64::total_cmp);
    for &t in &sorted {
        let q = exact_qt(f, &rates(n, t, None)?)?;
        if let Some(p) = prev {
            rep.t_monotone_violation = rep.t_monotone_violation.max(q - p);
        }
        prev = Some(q);
        let subsets: Vec<Vec<usize>> = (0..=n).map(|k| (0..k).collect()).collect();
        let mut last: Option<f64> = None;
        for s in &subsets {
            let (d, b) = russo(f, t, Some(s))?;
            rep.russo_violation = rep.russo_violation.max(-d).max(d - b);
            rep.russo_gap = rep.russo_gap.max((d - b).abs());
            let q = exact_qt(f, &rates(n, t, Some(s))?)?;
            if let Some(l) = last {
                rep.subset_monotone_violation = rep.subset_monotone_violation.max(l - q);
            }
            last = Some(q);
        }
    }
    Ok(rep)
}
