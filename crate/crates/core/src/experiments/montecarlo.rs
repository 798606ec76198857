use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::baseline::periodogram_peaks;
use super::metrics::match_frequencies;
use super::scenario::{Method, Scenario};
use crate::error::{Error, Result};
use crate::pencil::{gmpa_estimate, mpa_estimate, PencilConfig};
use crate::signal::{add_noise_with_rng, SegmentedSignal};

/// One aggregated line of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub method: Method,
    /// `all` for joint methods, `seg1`, `seg2`, ... for per-segment ones.
    pub segment_label: String,
    pub snr_db: f64,
    pub f_true_hz: f64,
    /// Over successful runs only; NaN when every run failed.
    pub rmse_hz: f64,
    pub bias_hz: f64,
    /// Runs attempted.
    pub runs: usize,
    /// Runs excluded because the estimator failed or missed this component.
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloReport {
    pub scenario: String,
    pub seed: u64,
    pub rows: Vec<ReportRow>,
}

impl MonteCarloReport {
    pub fn find(
        &self,
        method: Method,
        label: &str,
        snr_db: f64,
        f_true_hz: f64,
    ) -> Option<&ReportRow> {
        self.rows.iter().find(|r| {
            r.method == method
                && r.segment_label == label
                && r.snr_db == snr_db
                && (r.f_true_hz - f_true_hz).abs() < 1e-9
        })
    }

    pub fn rmse(&self, method: Method, label: &str, snr_db: f64, f_true_hz: f64) -> Option<f64> {
        self.find(method, label, snr_db, f_true_hz)
            .map(|r| r.rmse_hz)
    }

    /// Labels present for `method`, in first-seen order.
    pub fn labels(&self, method: Method) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for r in self.rows.iter().filter(|r| r.method == method) {
            if !out.contains(&r.segment_label) {
                out.push(r.segment_label.clone());
            }
        }
        out
    }
}

/// Estimator slot: one method applied to one label.
#[derive(Debug, Clone)]
struct Slot {
    method: Method,
    label: String,
    segment: Option<usize>,
}

fn slots(s: &Scenario) -> Vec<Slot> {
    let mut out = Vec::new();
    for &m in &s.methods {
        match m {
            Method::GmpaAll | Method::PeriodogramBaseline => out.push(Slot {
                method: m,
                label: "all".to_owned(),
                segment: None,
            }),
            Method::MpaPerSegment => {
                for i in 0..s.segment_specs.len() {
                    out.push(Slot {
                        method: m,
                        label: format!("seg{}", i + 1),
                        segment: Some(i),
                    });
                }
            }
        }
    }
    out
}

/// Frequencies estimated by one slot on one realization.
fn estimate(slot: &Slot, s: &Scenario, noisy: &SegmentedSignal, order: usize) -> Result<Vec<f64>> {
    let cfg = PencilConfig::with_order(order);
    match slot.method {
        Method::GmpaAll => Ok(gmpa_estimate(noisy, &cfg)?.frequencies),
        Method::MpaPerSegment => {
            let i = slot.segment.expect("per-segment slot");
            Ok(mpa_estimate(&noisy.segments()[i], noisy.dt(), &cfg)?.frequencies)
        }
        Method::PeriodogramBaseline => periodogram_peaks(noisy, s.baseline_grid_hz, order),
    }
}

/// Independent stream per (SNR index, run index) under the master seed.
fn run_rng(seed: u64, snr_index: usize, run_index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((snr_index as u64) << 32) | run_index as u64);
    rng
}

/// Per run: for each slot, per true frequency, the signed error or None.
type RunOutcome = Vec<Vec<Option<f64>>>;

fn one_run(
    s: &Scenario,
    clean: &SegmentedSignal,
    slots: &[Slot],
    truth: &[f64],
    snr_index: usize,
    run_index: usize,
) -> RunOutcome {
    let mut rng = run_rng(s.seed, snr_index, run_index);
    let noisy = add_noise_with_rng(clean, s.snr_grid[snr_index], &mut rng);
    slots
        .iter()
        .map(|slot| match estimate(slot, s, &noisy, truth.len()) {
            Ok(est) => match_frequencies(truth, &est)
                .into_iter()
                .zip(truth)
                .map(|(e, t)| e.map(|e| e - t))
                .collect(),
            Err(_) => vec![None; truth.len()],
        })
        .collect()
}

/// Runs the sweep on the global rayon pool.
pub fn run_monte_carlo(s: &Scenario) -> Result<MonteCarloReport> {
    s.validate()?;
    let clean = s.clean_signal()?;
    let slots = slots(s);
    let truth = s.true_frequencies();

    let mut rows = Vec::new();
    for (snr_index, &snr_db) in s.snr_grid.iter().enumerate() {
        let outcomes: Vec<RunOutcome> = (0..s.runs)
            .into_par_iter()
            .map(|run| one_run(s, &clean, &slots, &truth, snr_index, run))
            .collect();
        // Sequential reduction in run order keeps the sums bit-reproducible.
        for (k, slot) in slots.iter().enumerate() {
            for (f, &f_true) in truth.iter().enumerate() {
                let (mut sum, mut sq, mut ok) = (0.0, 0.0, 0usize);
                for o in &outcomes {
                    if let Some(e) = o[k][f] {
                        sum += e;
                        sq += e * e;
                        ok += 1;
                    }
                }
                let (rmse_hz, bias_hz) = if ok > 0 {
                    ((sq / ok as f64).sqrt(), sum / ok as f64)
                } else {
                    (f64::NAN, f64::NAN)
                };
                rows.push(ReportRow {
                    method: slot.method,
                    segment_label: slot.label.clone(),
                    snr_db,
                    f_true_hz: f_true,
                    rmse_hz,
                    bias_hz,
                    runs: s.runs,
                    failures: s.runs - ok,
                });
            }
        }
    }
    Ok(MonteCarloReport {
        scenario: s.name.clone(),
        seed: s.seed,
        rows,
    })
}

/// Like [`run_monte_carlo`] on a dedicated pool of `threads` workers
/// (`None` uses the global pool).
pub fn run_monte_carlo_with_threads(
    s: &Scenario,
    threads: Option<usize>,
) -> Result<MonteCarloReport> {
    match threads {
        None => run_monte_carlo(s),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::invalid(format!("thread pool: {e}")))?
            .install(|| run_monte_carlo(s)),
    }
}
