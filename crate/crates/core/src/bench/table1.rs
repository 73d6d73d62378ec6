use super::{run_batch, FilterKind, NoiseModel, Scenario};
use crate::error::{Error, Result};

/// Grid of the divergence experiment under Student-t measurement noise.
#[derive(Debug, Clone, PartialEq)]
pub struct Table1Config {
    pub particle_counts: Vec<usize>,
    /// Degrees of freedom; `f64::INFINITY` selects Gaussian noise.
    pub nus: Vec<f64>,
    pub filters: Vec<FilterKind>,
    pub runs: usize,
    pub base_seed: u64,
    pub parallelism: usize,
}

impl Default for Table1Config {
    fn default() -> Self {
        Self {
            particle_counts: vec![2000, 5000],
            nus: vec![3.0, 5.0, 8.0, f64::INFINITY],
            filters: vec![FilterKind::Standard, FilterKind::Possibility],
            runs: 500,
            base_seed: 1,
            parallelism: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table1Cell {
    pub filter: FilterKind,
    pub particles: usize,
    pub nu: f64,
    pub runs: usize,
    pub divergent: usize,
    pub divergent_pct: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
}

/// Wilson score interval for a binomial proportion, as percentages.
pub fn wilson_interval(successes: usize, trials: usize, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 100.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    (
        100.0 * (centre - half).max(0.0),
        100.0 * (centre + half).min(1.0),
    )
}

/// 97.5% standard normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// Divergence percentage for every (filter, particle count, nu) cell.
///
/// Cells are ordered filter-major, then particle count, then nu. Every cell
/// uses the same seeds, so both filters face identical measurement records.
pub fn table1_experiment(scenario: &Scenario, cfg: &Table1Config) -> Result<Vec<Table1Cell>> {
    if cfg.particle_counts.is_empty() || cfg.nus.is_empty() || cfg.filters.is_empty() {
        return Err(Error::InvalidParameter("empty table grid".into()));
    }
    let sigma = scenario.true_noise().sigma();
    let mut cells = Vec::new();
    for &filter in &cfg.filters {
        for &n in &cfg.particle_counts {
            for &nu in &cfg.nus {
                let noise = if nu.is_infinite() {
                    NoiseModel::gaussian(sigma)?
                } else {
                    NoiseModel::student_t(sigma, nu)?
                };
                let s = scenario.with_true_noise(noise)?;
                let batch = run_batch(&s, filter, n, cfg.runs, cfg.base_seed, cfg.parallelism)?;
                let agg = batch.aggregate;
                let (lo, hi) = wilson_interval(agg.divergent, agg.runs, Z_95);
                cells.push(Table1Cell {
                    filter,
                    particles: n,
                    nu,
                    runs: agg.runs,
                    divergent: agg.divergent,
                    divergent_pct: agg.divergence_pct(),
                    wilson_lo: lo,
                    wilson_hi: hi,
                });
            }
        }
    }
    Ok(cells)
}
