//! Declarative experiment runner.
//!
//! A config file is a TOML document with a list of `[[experiment]]` tables and
//! an optional list of `[[check]]` tables. Unknown keys are rejected. Each
//! experiment writes `<name>.csv` in the output directory together with a
//! `<name>.key` file holding the hash of its parameters; a rerun with the same
//! hash reuses the CSV instead of recomputing it.
//!
//! Experiment `k` draws from the stream keyed by `(seed, hash(name))`, and all
//! estimators are thread-count independent, so identical `(config, seed)` pairs
//! produce byte-identical CSV files.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{
    check_cov_law, check_p1_p2_p3, check_quasi_multiplicativity, check_sensitivity_region, check_slope,
    check_stability_region, check_superquadratic, read_rows, write_rows, PiSurface, ResultTable, Row, Verdict,
};
use crate::connectivity::{ArmEvent, ArmType, Crossing, Event};
use crate::dynamics::{correlation_integral, correlation_replicas, exceptional_probability};
use crate::error::{Error, Result};
use crate::estimators::{estimate_cov_grid, estimate_event, estimate_ladder, pivotal_sum_grid, Estimate};
use crate::lattice::{LatticeKind, Shape};
use crate::rng::RngStream;
use crate::VERSION;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "PERC_LAB_OUT_DIR";

/// Batches used for the standard error of Frostman integrals.
const FROSTMAN_BATCHES: u64 = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Alpha,
    Pi,
    Crossing,
    Cov,
    Pivotal,
    Exceptional,
    DynCorrelation,
    Frostman,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(u32),
    Many(Vec<u32>),
}

impl OneOrMany {
    pub fn values(&self) -> Vec<u32> {
        match self {
            OneOrMany::One(v) => vec![*v],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

fn default_lattice() -> String {
    "tri".into()
}

fn default_m() -> OneOrMany {
    OneOrMany::One(1)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    pub kind: Kind,
    #[serde(default = "default_lattice")]
    pub lattice: String,
    /// Arm type such as `0101` or `01+`; ignored by crossing-based kinds.
    #[serde(default)]
    pub star: Option<String>,
    #[serde(default = "default_m")]
    pub m: OneOrMany,
    pub n: Vec<u32>,
    /// Noise levels (`pi`, `cov`, `pivotal`, `frostman`) or lags (`dyn_correlation`).
    #[serde(default)]
    pub t: Vec<f64>,
    /// Samples, trajectories or replicas.
    pub samples: u64,
    /// Colouring density for the static kinds.
    #[serde(default)]
    pub p: Option<f64>,
    #[serde(default)]
    pub horizon: Option<f64>,
    #[serde(default)]
    pub gamma: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Slope,
    StabilityRegion,
    SensitivityRegion,
    Superquadratic,
    P1P2P3,
    CovLaw,
    QuasiMultiplicativity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSpec {
    pub kind: CheckKind,
    #[serde(default = "default_lattice")]
    pub lattice: String,
    #[serde(default)]
    pub star: Option<String>,
    #[serde(default)]
    pub quantity: Option<String>,
    #[serde(default)]
    pub m: Option<u32>,
    #[serde(default)]
    pub t: Option<f64>,
    /// Only rows with `n` in `[n_min, n_max]` enter slope fits and arm surfaces.
    #[serde(default)]
    pub n_min: Option<u32>,
    #[serde(default)]
    pub n_max: Option<u32>,
    #[serde(default)]
    pub min: Option<f64>,
    #[serde(default)]
    pub max: Option<f64>,
    /// Lower window constant, upper factor or `C` depending on the check.
    #[serde(default)]
    pub bound: Option<f64>,
    /// Whether failure makes `--strict` runs exit non-zero.
    #[serde(default = "yes")]
    pub hard: bool,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default, rename = "experiment")]
    pub experiments: Vec<ExperimentSpec>,
    #[serde(default, rename = "check")]
    pub checks: Vec<CheckSpec>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let mut names = std::collections::BTreeSet::new();
        for e in &cfg.experiments {
            if !names.insert(e.name.as_str()) {
                return Err(Error::Config(format!("duplicate experiment name {}", e.name)));
            }
            e.validate()?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }
}

fn cfg_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl ExperimentSpec {
    fn lattice_kind(&self) -> Result<LatticeKind> {
        LatticeKind::from_tag(&self.lattice)
    }

    fn arm(&self) -> Result<ArmType> {
        let s = self.star.as_deref().ok_or_else(|| cfg_err(format!("{}: star is required", self.name)))?;
        s.parse()
    }

    pub fn validate(&self) -> Result<()> {
        if !self.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') || self.name.is_empty() {
            return Err(cfg_err(format!("experiment name {:?} must be [A-Za-z0-9_-]+", self.name)));
        }
        self.lattice_kind()?;
        if self.n.is_empty() || self.samples == 0 {
            return Err(cfg_err(format!("{}: n and samples must be non-empty", self.name)));
        }
        let needs_t = matches!(self.kind, Kind::Pi | Kind::Cov | Kind::Pivotal | Kind::DynCorrelation | Kind::Frostman);
        if needs_t && self.t.is_empty() {
            return Err(cfg_err(format!("{}: t grid is required", self.name)));
        }
        match self.kind {
            Kind::Alpha | Kind::Pi | Kind::Exceptional | Kind::DynCorrelation | Kind::Frostman => {
                self.arm()?;
            }
            _ => {}
        }
        if matches!(self.kind, Kind::Frostman) && self.gamma.is_none() {
            return Err(cfg_err(format!("{}: gamma is required", self.name)));
        }
        if matches!(self.kind, Kind::DynCorrelation | Kind::Exceptional) && self.horizon.is_none() {
            return Err(cfg_err(format!("{}: horizon is required", self.name)));
        }
        Ok(())
    }

    /// Hex digest of the parameters, seed and version.
    pub fn key(&self, seed: u64) -> String {
        let mut h = Sha256::new();
        h.update(serde_json::to_vec(self).expect("serializable"));
        h.update(seed.to_le_bytes());
        h.update(VERSION.as_bytes());
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    fn stream(&self) -> u64 {
        let d = Sha256::digest(self.name.as_bytes());
        u64::from_le_bytes(d[..8].try_into().expect("8 bytes"))
    }

    fn shape(&self, arm: &ArmType, m: u32, n: u32) -> Shape {
        if arm.half_plane() {
            Shape::HalfAnnulus { m, n }
        } else {
            Shape::Annulus { m, n }
        }
    }

    fn row(&self, quantity: &str, star: &str, m: u32, n: u32, t: Option<f64>, e: &Estimate) -> Row {
        Row {
            quantity: quantity.into(),
            star: star.into(),
            lattice: self.lattice.clone(),
            m,
            n,
            t,
            mean: e.mean,
            stderr: e.stderr,
            samples: e.samples,
            seed: e.seed,
            version: VERSION.into(),
        }
    }

    fn ladder(&self, kind: LatticeKind, arm: &ArmType, m: u32) -> Result<(Vec<u32>, Vec<ArmEvent>)> {
        let mut ns = self.n.clone();
        ns.sort();
        ns.dedup();
        if ns[0] < m {
            return Err(cfg_err(format!("{}: n must be at least m", self.name)));
        }
        let events =
            ns.iter().map(|&n| ArmEvent::new(kind, self.shape(arm, m, n), arm.clone())).collect::<Result<_>>()?;
        Ok((ns, events))
    }

    /// Compute all rows of this experiment.
    pub fn run(&self, seed: u64) -> Result<Vec<Row>> {
        self.validate()?;
        let kind = self.lattice_kind()?;
        let rng = RngStream::new(seed, self.stream());
        let p = self.p.unwrap_or(0.5);
        let mut rows = Vec::new();
        match self.kind {
            Kind::Alpha | Kind::Pi => {
                let arm = self.arm()?;
                let star = arm.to_string();
                for m in self.m.values() {
                    let (ns, events) = self.ladder(kind, &arm, m)?;
                    let refs: Vec<&dyn Event> = events.iter().map(|e| e as &dyn Event).collect();
                    let r = rng.substream(m as u64);
                    if self.kind == Kind::Alpha {
                        let est = estimate_ladder(&refs, p, None, self.samples, &r)?;
                        for (n, e) in ns.iter().zip(&est) {
                            rows.push(self.row("alpha", &star, m, *n, None, &e[0]));
                        }
                    } else {
                        let est = estimate_ladder(&refs, 0.5, Some(&self.t), self.samples, &r)?;
                        for (n, es) in ns.iter().zip(&est) {
                            for (t, e) in self.t.iter().zip(es) {
                                rows.push(self.row("pi", &star, m, *n, Some(*t), e));
                            }
                        }
                    }
                }
            }
            Kind::Crossing | Kind::Cov | Kind::Pivotal => {
                for &n in &self.n {
                    let g = Crossing::new(kind, n)?;
                    let r = rng.substream(n as u64);
                    match self.kind {
                        Kind::Crossing => {
                            let e = estimate_event(&g, p, self.samples, &r)?;
                            rows.push(self.row("crossing", "lr", 0, n, None, &e));
                        }
                        Kind::Cov => {
                            for (t, e) in self.t.iter().zip(estimate_cov_grid(&g, &self.t, self.samples, &r)?) {
                                rows.push(self.row("cov", "lr", 0, n, Some(*t), &e));
                            }
                        }
                        _ => {
                            for (t, e) in self.t.iter().zip(pivotal_sum_grid(&g, &self.t, self.samples, &r)?) {
                                rows.push(self.row("pivotal", "lr", 0, n, Some(*t), &e));
                            }
                        }
                    }
                }
            }
            Kind::Exceptional | Kind::DynCorrelation => {
                let arm = self.arm()?;
                let star = arm.to_string();
                let horizon = self.horizon.expect("validated");
                for m in self.m.values() {
                    for &n in &self.n {
                        let ev = ArmEvent::new(kind, self.shape(&arm, m, n), arm.clone())?;
                        let r = rng.substream((m as u64) << 32 | n as u64);
                        if self.kind == Kind::Exceptional {
                            let e = exceptional_probability(&ev, horizon, self.samples, &r)?;
                            rows.push(self.row("exceptional", &star, m, n, Some(horizon), &e));
                        } else {
                            let est = correlation_replicas(&ev, &self.t, horizon, self.samples, &r)?;
                            for (t, e) in self.t.iter().zip(&est) {
                                rows.push(self.row("dyn_correlation", &star, m, n, Some(*t), e));
                            }
                        }
                    }
                }
            }
            Kind::Frostman => {
                let arm = self.arm()?;
                let star = arm.to_string();
                let gamma = self.gamma.expect("validated");
                let mut ts = self.t.clone();
                if !ts.contains(&0.0) {
                    ts.push(0.0);
                }
                for m in self.m.values() {
                    let (ns, events) = self.ladder(kind, &arm, m)?;
                    let refs: Vec<&dyn Event> = events.iter().map(|e| e as &dyn Event).collect();
                    let per_batch = self.samples.div_ceil(FROSTMAN_BATCHES);
                    let batches = (0..FROSTMAN_BATCHES)
                        .map(|b| {
                            estimate_ladder(&refs, 0.5, Some(&ts), per_batch, &rng.substream(m as u64).substream(b))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    for (k, &n) in ns.iter().enumerate() {
                        let (est, coarse) = frostman_from_batches(&batches, k, &ts, gamma)?;
                        let q = if coarse { "frostman_coarse" } else { "frostman" };
                        if coarse {
                            eprintln!("warning: {}: t grid has fewer than 8 points per decade", self.name);
                        }
                        rows.push(self.row(q, &star, m, n, Some(gamma), &Estimate { seed, ..est }));
                    }
                }
            }
        }
        Ok(rows)
    }
}

/// Pooled Frostman integral for ladder entry `k` with a batch standard error.
fn frostman_from_batches(batches: &[Vec<Vec<Estimate>>], k: usize, ts: &[f64], gamma: f64) -> Result<(Estimate, bool)> {
    let zero = ts.iter().position(|&t| t == 0.0).expect("grid contains 0");
    let integral = |pis: &[f64]| {
        let grid: Vec<(f64, f64)> = ts.iter().zip(pis).map(|(&t, &p)| (t, p)).collect();
        correlation_integral(pis[zero], gamma, &grid)
    };
    let nb = batches.len() as f64;
    let pooled: Vec<f64> = (0..ts.len()).map(|i| batches.iter().map(|b| b[k][i].mean).sum::<f64>() / nb).collect();
    let total = integral(&pooled)?;
    let (mut s, mut s2, mut used) = (0.0, 0.0, 0u64);
    for b in batches {
        let pis: Vec<f64> = b[k].iter().map(|e| e.mean).collect();
        if let Ok(v) = integral(&pis) {
            s += v.value;
            s2 += v.value * v.value;
            used += 1;
        }
    }
    let spread = Estimate::from_moments(s, s2, used, 0);
    let samples = batches.iter().map(|b| b[k][0].samples).sum();
    Ok((Estimate { mean: total.value, stderr: spread.stderr, samples, seed: 0 }, total.coarse))
}

/// Outcome of [`run_config`].
#[derive(Debug)]
pub struct RunReport {
    pub csv_files: Vec<PathBuf>,
    pub reused: Vec<String>,
    pub verdicts: Vec<(Verdict, bool)>,
}

impl RunReport {
    /// `false` if a hard check failed.
    pub fn hard_checks_pass(&self) -> bool {
        self.verdicts.iter().all(|(v, hard)| v.pass || !hard)
    }
}

/// Run (or resume) every experiment, then evaluate the checks.
pub fn run_config(cfg: &Config, seed: u64, out_dir: &Path) -> Result<RunReport> {
    fs::create_dir_all(out_dir)?;
    let mut report = RunReport { csv_files: Vec::new(), reused: Vec::new(), verdicts: Vec::new() };
    for e in &cfg.experiments {
        let csv = out_dir.join(format!("{}.csv", e.name));
        let key_file = out_dir.join(format!("{}.key", e.name));
        let key = e.key(seed);
        let done = csv.exists() && fs::read_to_string(&key_file).map(|k| k.trim() == key).unwrap_or(false);
        if done {
            report.reused.push(e.name.clone());
        } else {
            let rows = e.run(seed)?;
            let mut buf = Vec::new();
            write_rows(&mut buf, &rows)?;
            fs::write(&csv, buf)?;
            fs::write(&key_file, format!("{key}\n"))?;
        }
        report.csv_files.push(csv);
    }
    report.verdicts = evaluate_checks(cfg, out_dir)?;
    write_verdicts(&report.verdicts, out_dir)?;
    Ok(report)
}

/// Load every experiment CSV of `cfg` from `out_dir`.
pub fn load_results(cfg: &Config, out_dir: &Path) -> Result<ResultTable> {
    let mut rows = Vec::new();
    for e in &cfg.experiments {
        rows.extend(read_rows(fs::File::open(out_dir.join(format!("{}.csv", e.name)))?)?);
    }
    Ok(ResultTable::new(rows))
}

/// Evaluate the `[[check]]` list against stored results.
pub fn evaluate_checks(cfg: &Config, out_dir: &Path) -> Result<Vec<(Verdict, bool)>> {
    let table = load_results(cfg, out_dir)?;
    cfg.checks.iter().map(|c| Ok((evaluate_check(c, &table)?, c.hard))).collect()
}

fn evaluate_check(c: &CheckSpec, table: &ResultTable) -> Result<Verdict> {
    let star = c.star.clone().unwrap_or_else(|| "0101".into());
    let in_range = |n: u32| c.n_min.is_none_or(|lo| n >= lo) && c.n_max.is_none_or(|hi| n <= hi);
    let surface = || {
        let rows = table.rows().filter(|r| r.quantity == "alpha" || r.quantity == "pi").filter(|r| in_range(r.n));
        PiSurface::from_table(&ResultTable::new(rows.cloned()), &star, &c.lattice)
    };
    let v = match c.kind {
        CheckKind::Slope => {
            let q = c.quantity.as_deref().ok_or_else(|| cfg_err("slope check needs quantity"))?;
            let pts: Vec<(f64, Estimate)> = table
                .select(q, &star, &c.lattice)
                .filter(|r| c.m.is_none_or(|m| r.m == m) && (c.t.is_none() || r.t == c.t) && in_range(r.n))
                .map(|r| (r.n as f64, r.estimate()))
                .collect();
            let (lo, hi) = (c.min.unwrap_or(f64::NEG_INFINITY), c.max.unwrap_or(f64::INFINITY));
            check_slope(&format!("slope_{q}_{star}"), &pts, lo, hi)?
        }
        CheckKind::StabilityRegion => {
            check_stability_region(&surface(), &table.alpha_table(&c.lattice)?, c.bound.unwrap_or(0.2))?
        }
        CheckKind::SensitivityRegion => {
            check_sensitivity_region(&surface(), &table.alpha_table(&c.lattice)?, c.bound.unwrap_or(0.2))?
        }
        CheckKind::Superquadratic => check_superquadratic(
            &surface(),
            &table.alpha_table(&c.lattice)?,
            c.m.unwrap_or(1),
            c.max.unwrap_or(-2.1),
            c.min.unwrap_or(-1.6),
        )?,
        CheckKind::P1P2P3 => check_p1_p2_p3(&surface(), c.m.unwrap_or(1), c.bound.unwrap_or(3.0))?,
        CheckKind::CovLaw => {
            let cov: Vec<(u32, f64, Estimate)> =
                table.select("cov", "lr", &c.lattice).filter_map(|r| r.t.map(|t| (r.n, t, r.estimate()))).collect();
            check_cov_law(&cov, &table.alpha_table(&c.lattice)?, c.bound.unwrap_or(5.0))?
        }
        CheckKind::QuasiMultiplicativity => check_quasi_multiplicativity(&surface(), c.bound.unwrap_or(10.0))?,
    };
    Ok(v.param("lattice", &c.lattice))
}

/// `verdicts.json` plus one two-column `.dat` file per plotted series.
pub fn write_verdicts(verdicts: &[(Verdict, bool)], out_dir: &Path) -> Result<()> {
    let list: Vec<&Verdict> = verdicts.iter().map(|v| &v.0).collect();
    fs::write(out_dir.join("verdicts.json"), serde_json::to_string_pretty(&list)?)?;
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    for (v, _) in verdicts {
        let count = seen.entry(v.check.clone()).or_default();
        *count += 1;
        for (name, series) in &v.series {
            let file = format!("{}_{}_{}.dat", v.check, count, name.replace(['=', ' '], "_"));
            let body: String = series.iter().map(|(x, y)| format!("{x} {y}\n")).collect();
            fs::write(out_dir.join(file), body)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = r#"
seed = 3

[[experiment]]
name = "a"
kind = "alpha"
star = "0101"
m = 1
n = [4, 6, 8]
samples = 200

[[experiment]]
name = "c"
kind = "crossing"
n = [4]
samples = 100
"#;

    #[test]
    fn parses_and_rejects_unknown_keys() {
        let cfg = Config::parse(SMALL).unwrap();
        assert_eq!(cfg.experiments.len(), 2);
        assert_eq!(cfg.experiments[0].m, OneOrMany::One(1));
        assert!(Config::parse(&SMALL.replace("samples = 100", "samples = 100\nsampels = 3")).is_err());
        assert!(Config::parse(&SMALL.replace("name = \"c\"", "name = \"a\"")).is_err());
        assert!(Config::parse(&SMALL.replace("kind = \"crossing\"", "kind = \"pi\"")).is_err());
    }

    #[test]
    fn key_depends_on_parameters_and_seed() {
        let cfg = Config::parse(SMALL).unwrap();
        let e = &cfg.experiments[0];
        let mut f = e.clone();
        f.samples += 1;
        assert_ne!(e.key(1), f.key(1));
        assert_ne!(e.key(1), e.key(2));
        assert_eq!(e.key(1), e.clone().key(1));
    }

    #[test]
    fn resume_reuses_matching_results() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = Config::parse(SMALL).unwrap();
        let first = run_config(&cfg, 3, dir.path()).unwrap();
        assert!(first.reused.is_empty());
        let before = fs::read(dir.path().join("a.csv")).unwrap();
        let second = run_config(&cfg, 3, dir.path()).unwrap();
        assert_eq!(second.reused, vec!["a".to_string(), "c".to_string()]);
        assert_eq!(fs::read(dir.path().join("a.csv")).unwrap(), before);
        let third = run_config(&cfg, 4, dir.path()).unwrap();
        assert!(third.reused.is_empty());
    }
}
