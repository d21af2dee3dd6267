use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use perclab::analysis::{check_slope, read_rows, ResultTable};
use perclab::connectivity::{ArmEvent, ArmType};
use perclab::dynamics::simulate;
use perclab::experiment::{evaluate_checks, run_config, write_verdicts, Config, OUT_DIR_ENV};
use perclab::lattice::{build_region, LatticeKind, Shape};
use perclab::oracle::{identity_corpus, identity_report};
use perclab::rng::RngStream;
use perclab::{Error, Result};

#[derive(Parser)]
#[command(name = "perc-lab", version, about = "Noise sensitivity laboratory for critical planar percolation")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Master seed (overrides the config file).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Exit non-zero when a hard check fails.
    #[arg(long, global = true)]
    strict: bool,
    /// Output directory (default: $PERC_LAB_OUT_DIR or ./perc-lab-out).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run every experiment of a config file, then its checks.
    Run { config: PathBuf },
    /// Exact identity checks on the built-in corpus of small Boolean functions.
    OracleSuite,
    /// Fit a power law to rows of a results CSV.
    Fit {
        csv: PathBuf,
        #[arg(long)]
        quantity: String,
        #[arg(long, default_value = "0101")]
        star: String,
        #[arg(long, default_value = "tri")]
        lattice: String,
        #[arg(long)]
        m: Option<u32>,
        #[arg(long)]
        t: Option<f64>,
    },
    /// Re-evaluate the checks of a config against stored results.
    Verdict { config: PathBuf },
    /// Simulate one trajectory and write its binary event log.
    Dynamics {
        #[arg(long, default_value = "tri")]
        lattice: String,
        /// Annulus as `m,n`.
        #[arg(long, default_value = "2,16")]
        annulus: String,
        #[arg(long, default_value = "0101")]
        star: String,
        #[arg(long, default_value_t = 1.0)]
        horizon: f64,
        /// Event log path (little-endian records, see the README).
        #[arg(long)]
        log: Option<PathBuf>,
    },
}

fn out_dir(g: &Global) -> PathBuf {
    g.out_dir
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("perc-lab-out"))
}

fn parse_lattice(s: &str) -> Result<LatticeKind> {
    LatticeKind::from_tag(s)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match dispatch(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

/// Returns whether the strict-mode gate passed.
fn dispatch(cli: &Cli) -> Result<bool> {
    let g = &cli.global;
    match &cli.command {
        Command::Run { config } => {
            let cfg = Config::load(config)?;
            let seed = g.seed.or(cfg.seed).unwrap_or(0);
            let dir = out_dir(g);
            let report = run_config(&cfg, seed, &dir)?;
            for f in &report.csv_files {
                println!("wrote {}", f.display());
            }
            for name in &report.reused {
                println!("reused {name} (parameters unchanged)");
            }
            for (v, _) in &report.verdicts {
                println!("{}", v.summary());
            }
            Ok(!g.strict || report.hard_checks_pass())
        }
        Command::Verdict { config } => {
            let cfg = Config::load(config)?;
            let dir = out_dir(g);
            let verdicts = evaluate_checks(&cfg, &dir)?;
            write_verdicts(&verdicts, &dir)?;
            for (v, _) in &verdicts {
                println!("{}", v.summary());
            }
            Ok(!g.strict || verdicts.iter().all(|(v, hard)| v.pass || !hard))
        }
        Command::OracleSuite => {
            let ts = [0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0];
            let mut ok = true;
            for (name, f) in identity_corpus()? {
                let r = identity_report(&name, &f, &ts, 2)?;
                let pass = r.passed(1e-12);
                ok &= pass;
                println!(
                    "{:<40} bits={:<2} {} gradient_gap={:.1e} russo_gap={:.1e}",
                    name,
                    r.n_bits,
                    if pass { "PASS" } else { "FAIL" },
                    r.gradient_gap,
                    r.russo_gap
                );
            }
            Ok(ok)
        }
        Command::Fit { csv, quantity, star, lattice, m, t } => {
            let table = ResultTable::new(read_rows(std::fs::File::open(csv)?)?);
            let pts: Vec<_> = table
                .select(quantity, star, lattice)
                .filter(|r| m.is_none_or(|m| r.m == m) && (t.is_none() || r.t == *t))
                .map(|r| (r.n as f64, r.estimate()))
                .collect();
            let v = check_slope(&format!("slope_{quantity}_{star}"), &pts, f64::NEG_INFINITY, f64::INFINITY)?;
            println!("{}", serde_json::to_string_pretty(&v)?);
            Ok(true)
        }
        Command::Dynamics { lattice, annulus, star, horizon, log } => {
            let kind = parse_lattice(lattice)?;
            let (m, n) = annulus
                .split_once(',')
                .and_then(|(a, b)| Some((a.trim().parse().ok()?, b.trim().parse().ok()?)))
                .ok_or_else(|| Error::Config(format!("annulus must be m,n, got {annulus}")))?;
            let arm: ArmType = star.parse()?;
            let shape = if arm.half_plane() { Shape::HalfAnnulus { m, n } } else { Shape::Annulus { m, n } };
            let ev = ArmEvent::new(kind, shape, arm)?;
            let region = build_region(kind, perclab::connectivity::Event::region(&ev).shape())?;
            let traj = simulate(&region, *horizon, &RngStream::new(g.seed.unwrap_or(0), 0))?;
            let path = traj.indicator(&ev)?;
            let on: f64 = path.on_intervals().iter().map(|(a, b)| b - a).sum();
            println!("cells={} events={} time_fraction_on={:.6}", region.len(), traj.events().len(), on / horizon);
            if let Some(p) = log {
                traj.write_log(std::io::BufWriter::new(std::fs::File::create(p)?))?;
                println!("wrote {}", p.display());
            }
            Ok(true)
        }
    }
}
