//! Command-line front end: `run`, `table1` and `crlb`.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::bench::{run_batch, table1_experiment, Scenario, Table1Config};
use crate::config::{self, Config, LoadError};
use crate::error::Error;
use crate::tma::{bearing, crlb_curve, init_prior, position_bound};

// stdout may be a closed pipe (`possq ... | head`); that is not a failure
macro_rules! outln {
    ($($t:tt)*) => {{
        let _ = writeln!(std::io::stdout(), $($t)*);
    }};
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "possq",
    version,
    about = "Possibility particle filter TMA experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct CommonArgs {
    /// Sectioned key-value config file; defaults apply when omitted.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Override one config key, e.g. `--set filter.particles=5000`.
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte Carlo batch of one filter; writes rms.csv and runs.csv.
    Run(CommonArgs),
    /// Divergence grid over particle counts and Student-t dof; writes table1.csv.
    Table1(CommonArgs),
    /// Cramér–Rao bound along the nominal track; writes crlb.csv.
    Crlb(CommonArgs),
}

#[derive(Debug, thiserror::Error)]
enum Failure {
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error("{0}")]
    Runtime(#[from] Error),
    #[error("cannot write {}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl Failure {
    fn exit_code(&self) -> i32 {
        match self {
            Self::Load(_) => EXIT_CONFIG,
            Self::Runtime(_) | Self::Io { .. } => EXIT_RUNTIME,
        }
    }
}

/// Runs a parsed command line and returns the process exit code.
pub fn execute(cli: &Cli) -> i32 {
    let result = match &cli.command {
        Command::Run(a) => load(a).and_then(|c| cmd_run(&c)),
        Command::Table1(a) => load(a).and_then(|c| cmd_table1(&c)),
        Command::Crlb(a) => load(a).and_then(|c| cmd_crlb(&c)),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("possq: {e}");
            e.exit_code()
        }
    }
}

fn load(args: &CommonArgs) -> Result<Config, Failure> {
    Ok(config::load(args.config.as_deref(), &args.set)?)
}

fn header(cfg: &Config) -> String {
    format!(
        "# possq {} config_sha256={} seed={}\n",
        env!("CARGO_PKG_VERSION"),
        cfg.hash(),
        cfg.experiment.base_seed
    )
}

fn write_csv(
    cfg: &Config,
    name: &str,
    columns: &[&str],
    rows: &[Vec<String>],
) -> Result<PathBuf, Failure> {
    let path = cfg.output_dir.join(name);
    let io = |source| Failure::Io {
        path: path.clone(),
        source,
    };
    let mut body = csv::Writer::from_writer(Vec::new());
    body.write_record(columns).map_err(|e| io(e.into()))?;
    for row in rows {
        body.write_record(row).map_err(|e| io(e.into()))?;
    }
    let body = body.into_inner().map_err(|e| io(e.into_error()))?;
    std::fs::create_dir_all(&cfg.output_dir).map_err(io)?;
    let mut file = std::fs::File::create(&path).map_err(io)?;
    file.write_all(header(cfg).as_bytes()).map_err(io)?;
    file.write_all(&body).map_err(io)?;
    Ok(path)
}

fn scenario(cfg: &Config) -> Result<Scenario, Failure> {
    cfg.scenario()
        .map_err(|e| Failure::Load(LoadError::Config(e)))
}

/// Position bound per scan along the noise-free track, with the prior built
/// from the noise-free first bearing.
pub fn crlb_bounds(s: &Scenario) -> crate::Result<Vec<f64>> {
    let truth = s.nominal_relative_track();
    let o1 = s.observer().states()[0];
    let prior = init_prior(bearing(&truth[0])?, (o1[1], o1[3]), s.prior_config())?;
    let bounds = crlb_curve(&truth, s.dynamics(), s.filter_sigma(), prior.spread())?;
    Ok(bounds.iter().map(position_bound).collect())
}

fn time_of(s: &Scenario, scan: usize) -> f64 {
    (scan - 1) as f64 * s.interval()
}

fn cmd_run(cfg: &Config) -> Result<(), Failure> {
    let s = scenario(cfg)?;
    let e = &cfg.experiment;
    let batch = run_batch(
        &s,
        cfg.filter,
        cfg.particles,
        e.runs,
        e.base_seed,
        e.parallelism,
    )?;
    let crlb = crlb_bounds(&s)?;
    let agg = &batch.aggregate;
    let rms_rows: Vec<Vec<String>> = agg
        .rms
        .iter()
        .zip(&crlb)
        .enumerate()
        .map(|(i, (r, b))| {
            let scan = i + 1;
            vec![
                scan.to_string(),
                time_of(&s, scan).to_string(),
                r.to_string(),
                b.to_string(),
                agg.alive.to_string(),
            ]
        })
        .collect();
    let run_rows: Vec<Vec<String>> = batch
        .reports
        .iter()
        .enumerate()
        .map(|(i, r)| {
            vec![
                i.to_string(),
                r.seed.to_string(),
                r.final_error().to_string(),
                r.divergent.to_string(),
            ]
        })
        .collect();
    let rms = write_csv(
        cfg,
        "rms.csv",
        &["scan", "time_s", "rms_m", "crlb_m", "n_alive_runs"],
        &rms_rows,
    )?;
    let runs = write_csv(
        cfg,
        "runs.csv",
        &["run", "seed", "final_err_m", "divergent"],
        &run_rows,
    )?;
    outln!(
        "{} PF ({}), N={}, {} runs: {:.1}% divergent, final RMS {:.1} m (CRLB {:.1} m)",
        cfg.filter,
        cfg.filter.estimator(),
        cfg.particles,
        agg.runs,
        agg.divergence_pct(),
        agg.rms.last().copied().unwrap_or(f64::NAN),
        crlb.last().copied().unwrap_or(f64::NAN),
    );
    outln!("wrote {} and {}", rms.display(), runs.display());
    Ok(())
}

fn cmd_table1(cfg: &Config) -> Result<(), Failure> {
    let s = scenario(cfg)?;
    let e = &cfg.experiment;
    let table = Table1Config {
        particle_counts: e.particle_counts.clone(),
        nus: e.nus.clone(),
        filters: e.filters.clone(),
        runs: e.runs,
        base_seed: e.base_seed,
        parallelism: e.parallelism,
    };
    let cells = table1_experiment(&s, &table)?;
    let rows: Vec<Vec<String>> = cells
        .iter()
        .map(|c| {
            vec![
                c.filter.to_string(),
                c.particles.to_string(),
                c.nu.to_string(),
                c.runs.to_string(),
                c.divergent_pct.to_string(),
                c.wilson_lo.to_string(),
                c.wilson_hi.to_string(),
            ]
        })
        .collect();
    let path = write_csv(
        cfg,
        "table1.csv",
        &[
            "filter",
            "n",
            "nu",
            "runs",
            "divergent_pct",
            "wilson_lo",
            "wilson_hi",
        ],
        &rows,
    )?;
    for c in &cells {
        outln!(
            "{:<12} N={:<6} nu={:<4} {:>5.1}% [{:.1}, {:.1}]",
            c.filter,
            c.particles,
            c.nu,
            c.divergent_pct,
            c.wilson_lo,
            c.wilson_hi
        );
    }
    outln!("wrote {}", path.display());
    Ok(())
}

fn cmd_crlb(cfg: &Config) -> Result<(), Failure> {
    let s = scenario(cfg)?;
    let bounds = crlb_bounds(&s)?;
    let rows: Vec<Vec<String>> = bounds
        .iter()
        .enumerate()
        .map(|(i, b)| {
            vec![
                (i + 1).to_string(),
                time_of(&s, i + 1).to_string(),
                b.to_string(),
            ]
        })
        .collect();
    let path = write_csv(cfg, "crlb.csv", &["scan", "time_s", "pos_bound_m"], &rows)?;
    outln!(
        "CRLB position bound: scan 1 {:.1} m, final scan {:.1} m",
        bounds[0],
        bounds[bounds.len() - 1]
    );
    outln!("wrote {}", path.display());
    Ok(())
}

/// Entry point used by the binary.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(&cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            code
        }
    }
}
