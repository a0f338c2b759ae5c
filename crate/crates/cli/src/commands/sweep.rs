use super::write_output;
use crate::config::{Settings, DEFAULT_SIGMA_GRID, DEFAULT_SWEEP_SEEDS};
use crate::pipeline::{load_data, plan_iterations, run, RunSpec};
use crate::svg::{sweep_chart, SweepSeries};
use ampaug::{Error, Result};
use rayon::prelude::*;
use std::fmt::{self, Write};
use std::sync::atomic::{AtomicBool, Ordering};

/// Published reference for 22-channel, 4-class motor-imagery data.
pub const REFERENCE_BASELINE: f64 = 0.74;
pub const REFERENCE_BEST: f64 = 0.763;
pub const REFERENCE_BEST_SIGMA: f64 = 0.001;
/// Half-width, in accuracy, of the baseline sanity band.
pub const SANITY_BAND: f64 = 0.05;

/// One trained model of the sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    /// `None` for the unaugmented baseline.
    pub sigma: Option<f64>,
    pub seed: u64,
    pub accuracy: f64,
    pub macro_f1: f64,
    pub macro_auc: Option<f64>,
    pub best_iteration: usize,
}

/// Mean and sample standard deviation of accuracy for one condition.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub sigma: Option<f64>,
    pub runs: usize,
    pub mean: f64,
    pub sd: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    /// Baseline first, then one row per σ in grid order.
    pub rows: Vec<SweepRow>,
    pub cells: Vec<SweepCell>,
    /// Contents of `sweep.csv`.
    pub table: String,
    pub iterations: usize,
}

impl SweepOutcome {
    pub fn baseline(&self) -> &SweepRow {
        &self.rows[0]
    }

    /// The augmented row with the highest mean accuracy (earliest on ties).
    pub fn best_augmented(&self) -> Option<&SweepRow> {
        self.rows[1..].iter().fold(None, |best: Option<&SweepRow>, r| match best {
            Some(b) if b.mean >= r.mean => Some(b),
            _ => Some(r),
        })
    }
}

/// For 22-channel 4-class data, whether the baseline mean lies within
/// [`SANITY_BAND`] of [`REFERENCE_BASELINE`]; `None` for other data.
pub fn baseline_sanity(channels: usize, classes: usize, baseline_mean: f64) -> Option<bool> {
    (channels == 22 && classes == 4).then(|| (baseline_mean - REFERENCE_BASELINE).abs() <= SANITY_BAND + 1e-12)
}

fn summarize(sigma: Option<f64>, cells: &[SweepCell]) -> SweepRow {
    let acc: Vec<f64> = cells.iter().filter(|c| c.sigma == sigma).map(|c| c.accuracy).collect();
    let n = acc.len();
    let mean = acc.iter().sum::<f64>() / n as f64;
    let sd = if n > 1 { (acc.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt() } else { 0.0 };
    SweepRow { sigma, runs: n, mean, sd }
}

fn sigma_text(sigma: Option<f64>) -> String {
    sigma.map(|s| s.to_string()).unwrap_or_default()
}

fn condition(sigma: Option<f64>) -> &'static str {
    if sigma.is_some() { "augmented" } else { "baseline" }
}

const CELLS_HEADER: &str = "condition,sigma,seed,test_accuracy,macro_f1,macro_auc,best_iteration";

fn cells_csv(cells: &[SweepCell]) -> String {
    let mut out = format!("{CELLS_HEADER}\n");
    for c in cells {
        let auc = c.macro_auc.map(|a| format!("{a:.6}")).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{:.6},{:.6},{auc},{}",
            condition(c.sigma),
            sigma_text(c.sigma),
            c.seed,
            c.accuracy,
            c.macro_f1,
            c.best_iteration
        )
        .unwrap();
    }
    out
}

/// Trains the baseline and every σ of the grid for every seed.
///
/// Writes `sweep.csv` (commented header, then one mean ± sd row per
/// condition), `sweep_runs.csv` (one row per model) and `sweep.svg`. If any
/// run fails, the remaining runs are skipped, finished runs go to
/// `sweep_partial.csv`, and the first failure is returned.
pub fn cmd_sweep(settings: &Settings) -> Result<SweepOutcome> {
    let sigmas = settings.sigmas.clone().unwrap_or_else(|| DEFAULT_SIGMA_GRID.to_vec());
    let seeds = settings.seeds_or(&DEFAULT_SWEEP_SEEDS);
    if sigmas.is_empty() || seeds.is_empty() {
        return Err(Error::Config("sweep needs at least one sigma and one seed".into()));
    }
    let (train_file, test, source) = load_data(settings)?;
    let plan = plan_iterations(settings.iterations, train_file.len());

    let conditions: Vec<Option<f64>> = std::iter::once(None).chain(sigmas.iter().map(|&s| Some(s))).collect();
    let keys: Vec<(usize, u64)> =
        seeds.iter().flat_map(|&seed| (0..conditions.len()).map(move |c| (c, seed))).collect();
    let failed = AtomicBool::new(false);
    let mut results: Vec<((usize, u64), Option<Result<SweepCell>>)> = keys
        .par_iter()
        .map(|&(c, seed)| {
            if failed.load(Ordering::SeqCst) {
                return ((c, seed), None);
            }
            let sigma = conditions[c];
            log::info!("sweep: {} sigma={} seed={seed}", condition(sigma), sigma_text(sigma));
            let cell = RunSpec::from_settings(settings, seed, sigma, plan.iterations)
                .and_then(|spec| run(&train_file, &test, &spec))
                .map(|r| SweepCell {
                    sigma,
                    seed,
                    accuracy: r.report.accuracy,
                    macro_f1: r.report.scores.macro_f1,
                    macro_auc: r.report.roc.macro_auc,
                    best_iteration: r.outcome.best_iteration,
                });
            if cell.is_err() {
                failed.store(true, Ordering::SeqCst);
            }
            ((c, seed), Some(cell))
        })
        .collect();
    results.sort_by_key(|(k, _)| *k);

    let out = &settings.out;
    std::fs::create_dir_all(out)?;
    let mut cells = Vec::with_capacity(results.len());
    let mut first_error = None;
    for (_, r) in results {
        match r {
            Some(Ok(cell)) => cells.push(cell),
            Some(Err(e)) if first_error.is_none() => first_error = Some(e),
            _ => {}
        }
    }
    if let Some(e) = first_error {
        write_output(&out.join("sweep_partial.csv"), cells_csv(&cells))?;
        return Err(e);
    }

    let rows: Vec<SweepRow> = conditions.iter().map(|&s| summarize(s, &cells)).collect();
    let mut table = String::new();
    writeln!(table, "# amplitude-perturbation augmentation sweep").unwrap();
    writeln!(table, "# data: {}", source.describe()).unwrap();
    writeln!(
        table,
        "# trials: train file {} ({} classes, {} channels × {} samples), test {}",
        train_file.len(),
        train_file.num_classes,
        train_file.channel_count,
        train_file.samples_per_trial,
        test.len()
    )
    .unwrap();
    writeln!(table, "# seeds: {}", seeds.iter().map(u64::to_string).collect::<Vec<_>>().join(" ")).unwrap();
    writeln!(
        table,
        "# mu: {}, copies per trial: {}, window: {}, hop: {}, train fraction: {}",
        settings.mu, settings.copies, settings.window, settings.hop, settings.train_fraction
    )
    .unwrap();
    writeln!(table, "# iterations: {} ({})", plan.iterations, plan.note).unwrap();
    writeln!(
        table,
        "# reference (BCI IV 2a, 22 channels, 4 classes, 288/288 trials, 2000 iterations): baseline {:.1}%, best {:.1}% at sigma={}; documentation only, not asserted",
        100.0 * REFERENCE_BASELINE,
        100.0 * REFERENCE_BEST,
        REFERENCE_BEST_SIGMA
    )
    .unwrap();
    let baseline = &rows[0];
    let sanity = match baseline_sanity(train_file.channel_count, train_file.num_classes, baseline.mean) {
        None => "not applicable (data is not 22-channel 4-class)".to_string(),
        Some(ok) => format!(
            "baseline {:.1}% is {} ±{:.0} points of the {:.0}% reference",
            100.0 * baseline.mean,
            if ok { "within" } else { "OUTSIDE" },
            100.0 * SANITY_BAND,
            100.0 * REFERENCE_BASELINE
        ),
    };
    writeln!(table, "# sanity: {sanity}").unwrap();
    writeln!(table, "condition,sigma,runs,mean_accuracy,sd_accuracy").unwrap();
    for r in &rows {
        writeln!(table, "{},{},{},{:.6},{:.6}", condition(r.sigma), sigma_text(r.sigma), r.runs, r.mean, r.sd).unwrap();
    }

    write_output(&out.join("sweep.csv"), &table)?;
    write_output(&out.join("sweep_runs.csv"), cells_csv(&cells))?;
    let series = SweepSeries {
        baseline: (baseline.mean, baseline.sd),
        points: rows[1..].iter().map(|r| (r.sigma.unwrap_or_default(), r.mean, r.sd)).collect(),
    };
    write_output(&out.join("sweep.svg"), sweep_chart(&series))?;
    Ok(SweepOutcome { rows, cells, table, iterations: plan.iterations })
}

impl fmt::Display for SweepOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<10} {:>8}  accuracy % (mean ± sd over {} seeds)", "condition", "sigma", self.baseline().runs)?;
        for r in &self.rows {
            let sigma = r.sigma.map(|s| s.to_string()).unwrap_or_else(|| "-".into());
            writeln!(f, "{:<10} {:>8}  {:.2} ± {:.2}", condition(r.sigma), sigma, 100.0 * r.mean, 100.0 * r.sd)?;
        }
        write!(f, "{} iterations per run", self.iterations)
    }
}
