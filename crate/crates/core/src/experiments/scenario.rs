use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{synthesize, ComponentParams, HarmonicModel, SegmentedSignal};

pub const DEFAULT_RUNS: usize = 200;
pub const FULL_RUNS: usize = 1000;
/// Segment-2 drift used when none is given, seconds.
pub const DEFAULT_DRIFT: f64 = 0.004;

const DT: f64 = 0.01;
const SAMPLE_RATE: f64 = 100.0;
const TOTAL_SAMPLES: usize = 301;
const REMOVED: [(usize, usize); 2] = [(80, 98), (210, 238)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    GmpaAll,
    MpaPerSegment,
    PeriodogramBaseline,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::GmpaAll => "gmpa_all",
            Method::MpaPerSegment => "mpa_per_segment",
            Method::PeriodogramBaseline => "periodogram_baseline",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gmpa_all" => Ok(Method::GmpaAll),
            "mpa_per_segment" => Ok(Method::MpaPerSegment),
            "periodogram_baseline" => Ok(Method::PeriodogramBaseline),
            other => Err(Error::invalid(format!("unknown method {other:?}"))),
        }
    }
}

/// Which third-segment length to use for the 301-sample geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SegmentCounts {
    /// n = 239..=300, 62 samples.
    #[default]
    Arithmetic,
    /// Drops n = 300 to get the stated 80/111/61 split.
    Stated,
}

/// Time offset added to the start of the listed segments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Drift {
    pub segments: Vec<usize>,
    pub delta_t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub model: HarmonicModel,
    pub dt: f64,
    /// Nominal `(start_time, length)` per segment, before drift.
    pub segment_specs: Vec<(f64, usize)>,
    pub drift: Option<Drift>,
    pub snr_grid: Vec<f64>,
    pub runs: usize,
    pub seed: u64,
    pub methods: Vec<Method>,
    /// Frequency grid of the periodogram baseline, Hz.
    pub baseline_grid_hz: f64,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::invalid("scenario needs at least one run"));
        }
        if self.snr_grid.is_empty() {
            return Err(Error::invalid("scenario SNR grid is empty"));
        }
        if self.snr_grid.iter().any(|s| s.is_nan()) {
            return Err(Error::invalid("SNR grid contains NaN"));
        }
        if self.methods.is_empty() {
            return Err(Error::invalid("scenario has no methods"));
        }
        if self.segment_specs.is_empty() || self.segment_specs.iter().any(|s| s.1 == 0) {
            return Err(Error::invalid("scenario segments must be nonempty"));
        }
        if let Some(d) = &self.drift {
            if let Some(&i) = d.segments.iter().find(|&&i| i >= self.segment_specs.len()) {
                return Err(Error::invalid(format!("drift names missing segment {i}")));
            }
            if !d.delta_t.is_finite() {
                return Err(Error::invalid("drift must be finite"));
            }
        }
        if self.baseline_grid_hz.is_nan() || self.baseline_grid_hz <= 0.0 {
            return Err(Error::invalid("baseline grid spacing must be positive"));
        }
        Ok(())
    }

    /// Segment specs with the drift applied.
    pub fn effective_specs(&self) -> Vec<(f64, usize)> {
        let mut specs = self.segment_specs.clone();
        if let Some(d) = &self.drift {
            for &i in &d.segments {
                specs[i].0 += d.delta_t;
            }
        }
        specs
    }

    pub fn true_frequencies(&self) -> Vec<f64> {
        self.model
            .components()
            .iter()
            .map(ComponentParams::frequency_hz)
            .collect()
    }

    pub fn clean_signal(&self) -> Result<SegmentedSignal> {
        synthesize(&self.model, self.dt, &self.effective_specs())
    }

    pub fn with_runs(mut self, runs: usize) -> Self {
        self.runs = runs;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_snr_grid(mut self, grid: Vec<f64>) -> Self {
        self.snr_grid = grid;
        self
    }

    pub fn with_methods(mut self, methods: Vec<Method>) -> Self {
        self.methods = methods;
        self
    }
}

/// Indices `0..301` minus the two removed ranges (and `n = 300` for the
/// stated counts).
pub fn retained_indices(counts: SegmentCounts) -> Vec<usize> {
    let last = match counts {
        SegmentCounts::Arithmetic => TOTAL_SAMPLES,
        SegmentCounts::Stated => TOTAL_SAMPLES - 1,
    };
    (0..last)
        .filter(|n| !REMOVED.iter().any(|&(a, b)| (a..=b).contains(n)))
        .collect()
}

/// Number of removed samples in each gap.
pub fn gap_lengths() -> Vec<usize> {
    REMOVED.iter().map(|&(a, b)| b - a + 1).collect()
}

/// Contiguous runs of retained indices as `(first_index, length)`.
fn runs_of(indices: &[usize]) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = Vec::new();
    for &n in indices {
        match out.last_mut() {
            Some((start, len)) if *start + *len == n => *len += 1,
            _ => out.push((n, 1)),
        }
    }
    out
}

fn two_tone(f1: f64, f2: f64) -> HarmonicModel {
    HarmonicModel::new(vec![
        ComponentParams::from_hz(Complex64::new(1.0, 0.0), 0.0, f1),
        ComponentParams::from_hz(Complex64::new(0.8, 0.0), 0.0, f2),
    ])
    .expect("constant model is valid")
}

fn default_snr_grid() -> Vec<f64> {
    (0..=15).map(|i| -10.0 + 2.0 * i as f64).collect()
}

fn gapped(name: &str, model: HarmonicModel, counts: SegmentCounts) -> Scenario {
    let segment_specs = runs_of(&retained_indices(counts))
        .into_iter()
        .map(|(n, len)| (n as f64 / SAMPLE_RATE, len))
        .collect();
    Scenario {
        name: name.to_owned(),
        model,
        dt: DT,
        segment_specs,
        drift: None,
        snr_grid: default_snr_grid(),
        runs: DEFAULT_RUNS,
        seed: 0,
        methods: vec![Method::GmpaAll, Method::MpaPerSegment],
        baseline_grid_hz: 0.125,
    }
}

/// 3 Hz + 0.8 * 8 Hz tones, 301 samples at 100 Hz with n = 80..=98 and
/// n = 210..=238 removed; SNR -10..=20 dB in 2 dB steps.
pub fn scenario_4a() -> Scenario {
    scenario_4a_with(SegmentCounts::default())
}

pub fn scenario_4a_with(counts: SegmentCounts) -> Scenario {
    gapped("4a", two_tone(3.0, 8.0), counts)
}

/// `scenario_4a` with the second segment's sampling instants shifted by
/// `delta_t`, so the gaps are no longer whole sampling intervals.
pub fn scenario_4b(delta_t: f64) -> Scenario {
    scenario_4b_with(delta_t, SegmentCounts::default())
}

pub fn scenario_4b_with(delta_t: f64, counts: SegmentCounts) -> Scenario {
    let mut s = scenario_4a_with(counts);
    s.name = "4b".to_owned();
    if delta_t != 0.0 {
        s.drift = Some(Drift {
            segments: vec![1],
            delta_t,
        });
    }
    s
}

/// Same geometry with 8 Hz and 11.4 Hz tones; includes the 0.125 Hz grid
/// periodogram baseline.
pub fn scenario_4c() -> Scenario {
    scenario_4c_with(SegmentCounts::default())
}

pub fn scenario_4c_with(counts: SegmentCounts) -> Scenario {
    let mut s = gapped("4c", two_tone(8.0, 11.4), counts);
    s.methods.push(Method::PeriodogramBaseline);
    s
}
