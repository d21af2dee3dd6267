//! Exponent fits and verdicts over result tables.
//!
//! Every check is a pure function of estimates (usually loaded from CSV) and
//! returns a [`Verdict`] that carries the measured constants and the thresholds
//! used, so a failed check can be inspected without rerunning anything.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{sensitivity_length, AlphaTable, Ell, Estimate};

/// One row of the common results schema.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub quantity: String,
    pub star: String,
    pub lattice: String,
    pub m: u32,
    pub n: u32,
    pub t: Option<f64>,
    pub mean: f64,
    pub stderr: f64,
    pub samples: u64,
    pub seed: u64,
    pub version: String,
}

impl Row {
    pub fn estimate(&self) -> Estimate {
        Estimate { mean: self.mean, stderr: self.stderr, samples: self.samples, seed: self.seed }
    }
}

pub fn write_rows<W: Write>(w: W, rows: &[Row]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_rows<R: Read>(r: R) -> Result<Vec<Row>> {
    csv::Reader::from_reader(r).deserialize().map(|r| r.map_err(Error::from)).collect()
}

fn tkey(t: Option<f64>) -> u64 {
    t.map_or(u64::MAX, f64::to_bits)
}

/// Rows indexed by `(quantity, star, lattice, m, n, t)`.
#[derive(Clone, Debug, Default)]
pub struct ResultTable {
    index: BTreeMap<(String, String, String, u32, u32, u64), Row>,
}

impl ResultTable {
    pub fn new(rows: impl IntoIterator<Item = Row>) -> Self {
        let index = rows
            .into_iter()
            .map(|r| ((r.quantity.clone(), r.star.clone(), r.lattice.clone(), r.m, r.n, tkey(r.t)), r))
            .collect();
        ResultTable { index }
    }

    pub fn get(&self, quantity: &str, star: &str, lattice: &str, m: u32, n: u32, t: Option<f64>) -> Option<Estimate> {
        self.index.get(&(quantity.into(), star.into(), lattice.into(), m, n, tkey(t))).map(Row::estimate)
    }

    pub fn rows(&self) -> impl Iterator<Item = &Row> {
        self.index.values()
    }

    pub fn select<'a>(&'a self, quantity: &'a str, star: &'a str, lattice: &'a str) -> impl Iterator<Item = &'a Row> {
        self.rows().filter(move |r| r.quantity == quantity && r.star == star && r.lattice == lattice)
    }

    /// Four-arm table `alpha_{1,n}` with the small-scale anchors.
    pub fn alpha_table(&self, lattice: &str) -> Result<AlphaTable> {
        let entries: Vec<(u32, Estimate)> =
            self.select("alpha", "0101", lattice).filter(|r| r.m == 1).map(|r| (r.n, r.estimate())).collect();
        AlphaTable::with_anchors(entries, 4)
    }
}

/// Result of a weighted least-squares fit of `ln y = a + b ln x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PowerFit<F> {
    pub slope: F,
    pub intercept: F,
    pub slope_stderr: F,
    /// 95% interval for the slope.
    pub ci: (F, F),
    /// Largest absolute residual in `ln y`.
    pub max_residual: F,
    pub points: usize,
    pub dropped: usize,
}

/// Fit an exponent to `(scale, mean, stderr)` points.
///
/// Weights are `(mean / stderr)^2` (delta method for the log); if every stderr is
/// zero the fit is unweighted. The slope covariance is inflated by the reduced
/// chi-square when that exceeds 1. Points with non-positive mean are dropped.
pub fn fit_power<F: Float>(points: &[(F, F, F)]) -> Result<PowerFit<F>> {
    let usable: Vec<(F, F, F)> = points.iter().copied().filter(|&(x, y, _)| x > F::zero() && y > F::zero()).collect();
    let dropped = points.len() - usable.len();
    if usable.len() < 3 {
        return Err(Error::Insufficient(format!("{} usable points, need 3", usable.len())));
    }
    let rel: Vec<F> = usable.iter().map(|&(_, y, s)| s / y).collect();
    let floor = rel.iter().copied().filter(|r| *r > F::zero()).fold(F::infinity(), F::min);
    let weighted = floor.is_finite();
    let w: Vec<F> = rel.iter().map(|&r| if !weighted { F::one() } else { (F::one() / r.max(floor)).powi(2) }).collect();
    let xs: Vec<F> = usable.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<F> = usable.iter().map(|p| p.1.ln()).collect();
    let sum = |f: &dyn Fn(usize) -> F| (0..xs.len()).fold(F::zero(), |a, i| a + f(i));
    let sw = sum(&|i| w[i]);
    let mx = sum(&|i| w[i] * xs[i]) / sw;
    let my = sum(&|i| w[i] * ys[i]) / sw;
    let sxx = sum(&|i| w[i] * (xs[i] - mx).powi(2));
    let sxy = sum(&|i| w[i] * (xs[i] - mx) * (ys[i] - my));
    if sxx <= F::zero() {
        return Err(Error::Insufficient("all scales coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let resid: Vec<F> = (0..xs.len()).map(|i| ys[i] - intercept - slope * xs[i]).collect();
    let chi2 = sum(&|i| w[i] * resid[i].powi(2));
    let dof = F::from(xs.len() - 2).expect("small integer");
    let var = if weighted { (F::one() / sxx) * (chi2 / dof).max(F::one()) } else { chi2 / dof / sxx };
    let se = var.sqrt();
    let z = F::from(1.96).expect("constant");
    Ok(PowerFit {
        slope,
        intercept,
        slope_stderr: se,
        ci: (slope - z * se, slope + z * se),
        max_residual: resid.iter().fold(F::zero(), |a, r| a.max(r.abs())),
        points: xs.len(),
        dropped,
    })
}

/// [`fit_power`] on `(scale, Estimate)` points.
pub fn fit_exponent(points: &[(f64, Estimate)]) -> Result<PowerFit<f64>> {
    let pts: Vec<(f64, f64, f64)> = points.iter().map(|(x, e)| (*x, e.mean, e.stderr)).collect();
    fit_power(&pts)
}

/// Outcome of one check, serialized as the JSON verdict schema.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Verdict {
    pub check: String,
    pub params: BTreeMap<String, serde_json::Value>,
    pub measured_constants: BTreeMap<String, f64>,
    pub pass: bool,
    pub thresholds: BTreeMap<String, f64>,
    /// Plot-ready series, written as two-column files next to the report.
    #[serde(skip)]
    pub series: BTreeMap<String, Vec<(f64, f64)>>,
}

impl Verdict {
    pub fn new(check: &str) -> Self {
        Verdict { check: check.into(), ..Default::default() }
    }

    pub fn param(mut self, key: &str, value: impl Serialize) -> Self {
        self.params.insert(key.into(), serde_json::to_value(value).expect("serializable"));
        self
    }

    pub fn measured(&mut self, key: &str, value: f64) {
        self.measured_constants.insert(key.into(), value);
    }

    pub fn threshold(&mut self, key: &str, value: f64) {
        self.thresholds.insert(key.into(), value);
    }

    /// `check: PASS|FAIL key=value ...` for terminal output.
    pub fn summary(&self) -> String {
        let consts: Vec<String> = self.measured_constants.iter().map(|(k, v)| format!("{k}={v:.4}")).collect();
        format!("{}: {} {}", self.check, if self.pass { "PASS" } else { "FAIL" }, consts.join(" "))
    }
}

/// Ratio `a / b` with a delta-method error treating the inputs as independent
/// (conservative for positively correlated common-random-number estimates).
pub fn ratio(a: &Estimate, b: &Estimate) -> (f64, f64) {
    let r = a.mean / b.mean;
    let rel = ((a.stderr / a.mean).powi(2) + (b.stderr / b.mean).powi(2)).sqrt();
    (r, (r * rel).abs())
}

/// Dynamical arm probabilities `pi_{m,n}(t)` and static `alpha_{m,n}` for one arm type.
#[derive(Clone, Debug, Default)]
pub struct PiSurface {
    pub star: String,
    pi: BTreeMap<(u32, u32, u64), (f64, Estimate)>,
    alpha: BTreeMap<(u32, u32), Estimate>,
}

impl PiSurface {
    pub fn new(star: &str) -> Self {
        PiSurface { star: star.into(), ..Default::default() }
    }

    pub fn from_table(table: &ResultTable, star: &str, lattice: &str) -> Self {
        let mut s = Self::new(star);
        for r in table.select("pi", star, lattice) {
            if let Some(t) = r.t {
                s.insert_pi(r.m, r.n, t, r.estimate());
            }
        }
        for r in table.select("alpha", star, lattice) {
            s.insert_alpha(r.m, r.n, r.estimate());
        }
        s
    }

    pub fn insert_pi(&mut self, m: u32, n: u32, t: f64, e: Estimate) {
        self.pi.insert((m, n, t.to_bits()), (t, e));
    }

    pub fn insert_alpha(&mut self, m: u32, n: u32, e: Estimate) {
        self.alpha.insert((m, n), e);
    }

    pub fn pi(&self, m: u32, n: u32, t: f64) -> Option<&Estimate> {
        self.pi.get(&(m, n, t.to_bits())).map(|p| &p.1)
    }

    pub fn alpha(&self, m: u32, n: u32) -> Option<&Estimate> {
        self.alpha.get(&(m, n))
    }

    /// All `(m, n, t, pi)` entries.
    pub fn points(&self) -> impl Iterator<Item = (u32, u32, f64, &Estimate)> {
        self.pi.iter().map(|(&(m, n, _), (t, e))| (m, n, *t, e))
    }

    pub fn t_grid(&self, m: u32, n: u32) -> Vec<f64> {
        let mut ts: Vec<f64> = self.points().filter(|p| p.0 == m && p.1 == n).map(|p| p.2).collect();
        ts.sort_by(f64::total_cmp);
        ts
    }
}

fn ell_at_least(ell: Ell, n: u32) -> bool {
    match ell {
        Ell::At(l) => l >= n,
        Ell::BeyondTable => true,
    }
}

fn ell_at_most(ell: Ell, m: u32) -> bool {
    match ell {
        Ell::At(l) => l <= m,
        Ell::BeyondTable => false,
    }
}

fn ell_of(table: &AlphaTable, t: f64) -> Ell {
    if t <= 0.0 {
        Ell::BeyondTable
    } else {
        sensitivity_length(table, t).expect("t in (0,1] and table non-empty")
    }
}

/// Region checks share this shape: ratios on a set of `(m, n, t)` pairs against `[floor, 1 + 3 sigma]`.
fn window_check(mut v: Verdict, ratios: &[(u32, u32, f64, f64, f64)], floor: f64) -> Result<Verdict> {
    if ratios.is_empty() {
        return Err(Error::Insufficient(format!("{}: no grid points in the region", v.check)));
    }
    let min = ratios.iter().map(|r| r.3).fold(f64::INFINITY, f64::min);
    let max = ratios.iter().map(|r| r.3).fold(0.0, f64::max);
    let excess =
        ratios.iter().map(|r| if r.4 > 0.0 { (r.3 - 1.0) / r.4 } else { r.3 - 1.0 }).fold(f64::NEG_INFINITY, f64::max);
    let below = ratios.iter().filter(|r| r.3 < 1.0 - 3.0 * r.4).count();
    v.measured("min_ratio", min);
    v.measured("max_ratio", max);
    v.measured("max_sigma_above_1", excess);
    v.measured("points", ratios.len() as f64);
    v.measured("points_below_1_by_3sigma", below as f64);
    v.measured("window_constant", max.max(1.0) / min.min(1.0));
    v.threshold("floor", floor);
    v.threshold("upper_sigma", 3.0);
    v.pass = min >= floor && excess <= 3.0;
    let mut s: Vec<(f64, f64)> = ratios.iter().map(|r| (r.2, r.3)).collect();
    s.sort_by(|a, b| a.0.total_cmp(&b.0));
    v.series.insert("ratio_vs_t".into(), s);
    Ok(v)
}

/// `pi/alpha` in `[floor, 1 + 3 sigma]` for `m <= n <= l(t)`.
pub fn check_stability_region(surface: &PiSurface, table: &AlphaTable, floor: f64) -> Result<Verdict> {
    let mut ratios = Vec::new();
    for (m, n, t, pi) in surface.points() {
        if !ell_at_least(ell_of(table, t), n) {
            continue;
        }
        if let Some(a) = surface.alpha(m, n) {
            let (r, s) = ratio(pi, a);
            ratios.push((m, n, t, r, s));
        }
    }
    window_check(Verdict::new("stability_region").param("star", &surface.star), &ratios, floor)
}

/// `pi/alpha^2` in `[floor, 1 + 3 sigma]` for `n >= m >= l(t)`.
///
/// Since `pi(t) >= alpha^2` for every `t`, ratios sit at or above 1; the verdict
/// reports how far above as `window_constant`.
pub fn check_sensitivity_region(surface: &PiSurface, table: &AlphaTable, floor: f64) -> Result<Verdict> {
    let mut ratios = Vec::new();
    for (m, n, t, pi) in surface.points() {
        if !ell_at_most(ell_of(table, t), m) {
            continue;
        }
        if let Some(a) = surface.alpha(m, n) {
            let sq = Estimate { mean: a.mean * a.mean, stderr: 2.0 * a.mean * a.stderr, ..*a };
            let (r, s) = ratio(pi, &sq);
            ratios.push((m, n, t, r, s));
        }
    }
    window_check(Verdict::new("sensitivity_region").param("star", &surface.star), &ratios, floor)
}

/// Pairs `(m, n)` with `n/m` in `ratios` and `m >= inner`, evaluated on a single ladder from `inner`.
fn ladder_pairs(surface: &PiSurface, inner: u32, t: f64, steps: &[u32]) -> Vec<(u32, u32)> {
    let ns: Vec<u32> = surface.points().filter(|p| p.0 == inner && p.2 == t).map(|p| p.1).collect();
    let mut out = Vec::new();
    for &m in &ns {
        for &k in steps {
            if ns.contains(&(m * k)) {
                out.push((m, m * k));
            }
        }
    }
    out
}

/// Exponent of `pi_n(t)/pi_m(t)` in `n/m` above (`m >= l(t)`) and below (`n <= l(t)`) the curve.
pub fn check_superquadratic(
    surface: &PiSurface,
    table: &AlphaTable,
    inner: u32,
    above_max: f64,
    below_min: f64,
) -> Result<Verdict> {
    let steps = [2, 4, 8];
    let mut ts: Vec<f64> = surface.points().filter(|p| p.0 == inner).map(|p| p.2).collect();
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    let (mut above, mut below) = (Vec::new(), Vec::new());
    let mut v = Verdict::new("superquadratic").param("star", &surface.star).param("inner", inner);
    for &t in &ts {
        let ell = ell_of(table, t);
        let mut at_t = Vec::new();
        for (m, n) in ladder_pairs(surface, inner, t, &steps) {
            let (Some(pm), Some(pn)) = (surface.pi(inner, m, t), surface.pi(inner, n, t)) else { continue };
            if pm.mean <= 0.0 || pn.mean <= 0.0 {
                continue;
            }
            let (r, s) = ratio(pn, pm);
            let point = ((n / m) as f64, Estimate { mean: r, stderr: s, samples: pn.samples, seed: pn.seed });
            if ell_at_most(ell, m) {
                above.push(point);
                at_t.push(point);
            } else if ell_at_least(ell, n) {
                below.push(point);
            }
        }
        if let Ok(f) = fit_exponent(&at_t) {
            v.measured(&format!("above_exponent_t={t}"), f.slope);
        }
    }
    let fa = fit_exponent(&above)?;
    let fb = fit_exponent(&below)?;
    v.measured("above_exponent", fa.slope);
    v.measured("above_exponent_stderr", fa.slope_stderr);
    v.measured("below_exponent", fb.slope);
    v.measured("below_exponent_stderr", fb.slope_stderr);
    v.measured("above_points", above.len() as f64);
    v.measured("below_points", below.len() as f64);
    v.threshold("above_max", above_max);
    v.threshold("below_min", below_min);
    v.pass = fa.slope <= above_max && fb.slope >= below_min;
    v.series.insert("above".into(), above.iter().map(|p| (p.0, p.1.mean)).collect());
    v.series.insert("below".into(), below.iter().map(|p| (p.0, p.1.mean)).collect());
    Ok(v)
}

/// Trapezoid rule on sorted `(t, y)` points.
pub fn trapezoid(points: &[(f64, f64)]) -> f64 {
    points.windows(2).map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1)).sum()
}

fn covers_unit_interval(ts: &[f64]) -> bool {
    ts.len() >= 16 && ts.first() == Some(&0.0) && ts.last() == Some(&1.0)
}

/// P1 (monotone in `t`), P2 (bounded `int_0^1 n^2 pi_n`) and P3 (ratio
/// monotonicity up to a constant) on four-arm ladders from `inner`.
pub fn check_p1_p2_p3(surface: &PiSurface, inner: u32, p2_factor: f64) -> Result<Verdict> {
    let mut ns: Vec<u32> = surface.points().filter(|p| p.0 == inner).map(|p| p.1).collect();
    ns.sort();
    ns.dedup();
    let mut v = Verdict::new("p1_p2_p3").param("star", &surface.star).param("inner", inner).param("n", &ns);
    let mut worst_p1 = f64::INFINITY;
    let mut p2 = Vec::new();
    for &n in &ns {
        let ts = surface.t_grid(inner, n);
        if !covers_unit_interval(&ts) {
            return Err(Error::Insufficient(format!("t-grid for n={n} must contain 0, 1 and >= 16 points")));
        }
        let pis: Vec<&Estimate> = ts.iter().map(|&t| surface.pi(inner, n, t).expect("listed")).collect();
        for i in 0..pis.len() {
            for j in i + 1..pis.len() {
                let (r, s) = ratio(pis[i], pis[j]);
                if pis[j].mean > 0.0 {
                    // sigma distance of the ratio above 1 (negative if below)
                    let z = if s > 0.0 {
                        (r - 1.0) / s
                    } else if r >= 1.0 {
                        0.0
                    } else {
                        f64::NEG_INFINITY
                    };
                    worst_p1 = worst_p1.min(z);
                }
            }
        }
        let curve: Vec<(f64, f64)> = ts.iter().zip(&pis).map(|(&t, p)| (t, (n as f64).powi(2) * p.mean)).collect();
        let integral = trapezoid(&curve);
        v.measured(&format!("p2_integral_n={n}"), integral);
        v.series.insert(format!("n2pi_n={n}"), curve);
        p2.push((n, integral));
    }
    if p2.len() < 2 {
        return Err(Error::Insufficient("P2 needs at least two scales".into()));
    }
    let hi = p2.iter().map(|p| p.1).fold(0.0, f64::max);
    let lo = p2.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let p2_fit = fit_power(&p2.iter().map(|&(n, i)| (n as f64, i, 0.0)).collect::<Vec<_>>()).ok();
    // P3: pi_n(u) pi_m(t) <= C pi_m(u) pi_n(t) for m <= n, t <= u
    let mut p3: f64 = 0.0;
    for (a, &m) in ns.iter().enumerate() {
        for &n in &ns[a..] {
            let ts = surface.t_grid(inner, n);
            for (i, &t) in ts.iter().enumerate() {
                for &u in &ts[i..] {
                    let get = |k: u32, s: f64| surface.pi(inner, k, s).map(|e| e.mean);
                    if let (Some(nu), Some(mt), Some(mu), Some(nt)) = (get(n, u), get(m, t), get(m, u), get(n, t)) {
                        if mu > 0.0 && nt > 0.0 {
                            p3 = p3.max(nu * mt / (mu * nt));
                        }
                    }
                }
            }
        }
    }
    v.measured("p1_min_sigma", worst_p1);
    v.measured("p2_spread", hi / lo);
    if let Some(f) = p2_fit {
        v.measured("p2_log_slope", f.slope);
    }
    v.measured("p3_constant", p3);
    v.threshold("p1_min_sigma", -3.0);
    v.threshold("p2_factor", p2_factor);
    v.pass = worst_p1 >= -3.0 && hi / lo <= p2_factor;
    Ok(v)
}

/// `pi_{k,m} pi_{m,n} / pi_{k,n}` within `[1/C, C]` over triples with `m/k, n/m` in `{2, 4}`.
pub fn check_quasi_multiplicativity(surface: &PiSurface, c_max: f64) -> Result<Verdict> {
    let step = |a: u32, b: u32| b.is_multiple_of(a) && matches!(b / a, 2 | 4);
    let mut worst: f64 = 1.0;
    let mut at = (0, 0, 0, 0.0);
    let mut count = 0;
    let mut v = Verdict::new("quasi_multiplicativity").param("star", &surface.star);
    let entries: Vec<(u32, u32, f64)> = surface.points().map(|p| (p.0, p.1, p.2)).collect();
    for &(k, n, t) in &entries {
        for &(k2, m, t2) in &entries {
            if k2 != k || t2 != t || !step(k, m) || !step(m, n) {
                continue;
            }
            let (Some(km), Some(mn), Some(kn)) = (surface.pi(k, m, t), surface.pi(m, n, t), surface.pi(k, n, t)) else {
                continue;
            };
            if km.mean > 0.0 && mn.mean > 0.0 && kn.mean > 0.0 {
                let q = km.mean * mn.mean / kn.mean;
                if q.max(1.0 / q) > worst {
                    worst = q.max(1.0 / q);
                    at = (k, m, n, t);
                }
                count += 1;
            }
        }
    }
    if count == 0 {
        return Err(Error::Insufficient("no (k, m, n) triples on the grid".into()));
    }
    v.measured("window_constant", worst);
    v.measured("worst_k", at.0 as f64);
    v.measured("worst_m", at.1 as f64);
    v.measured("worst_n", at.2 as f64);
    v.measured("worst_t", at.3);
    v.measured("triples", count as f64);
    v.threshold("c_max", c_max);
    v.pass = worst < c_max;
    Ok(v)
}

/// Covariance law: `COV_t(g_n) / [(1-t)(n a_n / (l a_l))^2]` varies by less than `factor`
/// over pairs with `n >= l(t)`.
pub fn check_cov_law(cov: &[(u32, f64, Estimate)], table: &AlphaTable, factor: f64) -> Result<Verdict> {
    let mut ratios = Vec::new();
    for &(n, t, ref e) in cov {
        if !(t > 0.0 && t < 1.0) {
            continue;
        }
        let Ell::At(l) = ell_of(table, t) else { continue };
        if l > n {
            continue;
        }
        let (Some(an), Some(al)) = (table.regularized(n), table.regularized(l)) else { continue };
        let rhs = (1.0 - t) * ((n as f64 * an) / (l as f64 * al)).powi(2);
        if e.mean > 0.0 {
            ratios.push((n, t, e.mean / rhs));
        }
    }
    if ratios.is_empty() {
        return Err(Error::Insufficient("no (n, t) pairs with n >= l(t)".into()));
    }
    let hi = ratios.iter().map(|r| r.2).fold(0.0, f64::max);
    let lo = ratios.iter().map(|r| r.2).fold(f64::INFINITY, f64::min);
    let mut v = Verdict::new("cov_law");
    v.measured("ratio_min", lo);
    v.measured("ratio_max", hi);
    v.measured("spread", hi / lo);
    v.measured("points", ratios.len() as f64);
    v.threshold("factor", factor);
    v.pass = hi / lo < factor;
    v.series.insert("ratio_vs_t".into(), ratios.iter().map(|r| (r.1, r.2)).collect());
    Ok(v)
}

/// Both limbs of sharp noise sensitivity on `t_n = lambda eps_n` (clamped to 1).
///
/// `rows` holds `(n, lambda, cov, var)`; large `lambda` needs `cov < upper`,
/// small `lambda` needs `cov > lower_frac * var`.
pub fn check_sharp_limbs(
    rows: &[(u32, f64, Estimate, f64)],
    big: f64,
    upper: f64,
    small: f64,
    lower_frac: f64,
) -> Result<Verdict> {
    let mut v = Verdict::new("sharp_noise_sensitivity");
    let mut pass = true;
    let mut seen = (false, false);
    for &(n, lambda, ref c, var) in rows {
        if lambda == big {
            v.measured(&format!("cov_n={n}_lambda={lambda}"), c.mean);
            pass &= c.mean < upper;
            seen.0 = true;
        } else if lambda == small {
            v.measured(&format!("cov_over_var_n={n}_lambda={lambda}"), c.mean / var);
            pass &= c.mean > lower_frac * var;
            seen.1 = true;
        }
    }
    if !(seen.0 && seen.1) {
        return Err(Error::Insufficient("both limbs need data".into()));
    }
    v.threshold("lambda_large", big);
    v.threshold("cov_upper", upper);
    v.threshold("lambda_small", small);
    v.threshold("cov_lower_fraction_of_var", lower_frac);
    v.pass = pass;
    Ok(v)
}

/// Fitted slope within `[lo, hi]`.
pub fn check_slope(name: &str, points: &[(f64, Estimate)], lo: f64, hi: f64) -> Result<Verdict> {
    let f = fit_exponent(points)?;
    let mut v = Verdict::new(name);
    v.measured("slope", f.slope);
    v.measured("slope_stderr", f.slope_stderr);
    v.measured("ci_low", f.ci.0);
    v.measured("ci_high", f.ci.1);
    v.threshold("slope_min", lo);
    v.threshold("slope_max", hi);
    v.pass = (lo..=hi).contains(&f.slope);
    v.series.insert("points".into(), points.iter().map(|(x, e)| (*x, e.mean)).collect());
    Ok(v)
}
