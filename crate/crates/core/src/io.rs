//! Interchange formats: the signal CSV, the JSON result document and the
//! benchmark report CSV. Every write goes to a temporary file in the target
//! directory and is renamed into place.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use tempfile::NamedTempFile;

use crate::error::{Error, Result};
use crate::experiments::{MonteCarloReport, ReportRow};
use crate::pencil::{Diagnostics, EstimationResult, OrderSelection, PencilConfig, SubspaceSource};
use crate::signal::{Segment, SegmentedSignal};

pub const SIGNAL_HEADER: [&str; 5] = ["segment_index", "sample_index", "time_s", "re", "im"];
pub const REPORT_HEADER: [&str; 8] = [
    "method",
    "segment_label",
    "snr_db",
    "f_true_hz",
    "rmse_hz",
    "bias_hz",
    "runs",
    "failures",
];
pub const RESULT_FORMAT: u32 = 1;

/// Relative tolerance on sampling-interval consistency.
const DT_REL_TOL: f64 = 1e-9;

/// 17 significant digits.
fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes through `f` into a temp file next to `path`, then renames it.
pub fn write_atomic(path: &Path, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let tmp = NamedTempFile::new_in(dir)?;
    {
        let mut w = BufWriter::new(tmp.as_file());
        f(&mut w)?;
        w.flush()?;
    }
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn csv_writer(w: &mut dyn Write) -> csv::Writer<&mut dyn Write> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

pub fn write_signal_csv(signal: &SegmentedSignal, w: &mut dyn Write) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(SIGNAL_HEADER)?;
    for (i, seg) in signal.segments().iter().enumerate() {
        for (k, v) in seg.samples.iter().enumerate() {
            let t = seg.start_time + k as f64 * signal.dt();
            out.write_record([
                i.to_string(),
                k.to_string(),
                fmt_f64(t),
                fmt_f64(v.re),
                fmt_f64(v.im),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn save_signal(signal: &SegmentedSignal, path: &Path) -> Result<()> {
    write_atomic(path, |w| write_signal_csv(signal, w))
}

#[derive(Debug, Deserialize)]
struct SignalRow {
    segment_index: usize,
    sample_index: usize,
    time_s: f64,
    re: f64,
    im: f64,
}

struct RawSegment {
    first_line: u64,
    last_line: u64,
    times: Vec<f64>,
    samples: Vec<Complex64>,
}

impl RawSegment {
    fn dt(&self) -> Option<f64> {
        let k = self.times.len();
        (k >= 2).then(|| (self.times[k - 1] - self.times[0]) / (k - 1) as f64)
    }
}

/// Parses the signal CSV. `dt` is inferred from within-segment time steps
/// and must agree across segments; each segment starts at its first
/// `time_s`.
pub fn read_signal_csv(r: impl Read) -> Result<SegmentedSignal> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let header = rdr.headers()?.clone();
    if header.iter().ne(SIGNAL_HEADER.iter().copied()) {
        return Err(Error::Format(format!(
            "expected header {:?}, found {:?}",
            SIGNAL_HEADER.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }

    let mut raw: Vec<RawSegment> = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let row: SignalRow = rec
            .deserialize(Some(&header))
            .map_err(|e| Error::Format(format!("line {line}: {e}")))?;
        if !(row.time_s.is_finite() && row.re.is_finite() && row.im.is_finite()) {
            return Err(Error::Format(format!("line {line}: non-finite value")));
        }
        let expected_seg = raw.len();
        if row.segment_index + 1 == expected_seg {
            let seg = raw.last_mut().expect("segment exists");
            if row.sample_index != seg.samples.len() {
                return Err(Error::Format(format!(
                    "line {line}: sample_index {} in segment {} is not monotone (expected {})",
                    row.sample_index,
                    row.segment_index,
                    seg.samples.len()
                )));
            }
            seg.last_line = line;
            seg.times.push(row.time_s);
            seg.samples.push(Complex64::new(row.re, row.im));
        } else if row.segment_index == expected_seg {
            if row.sample_index != 0 {
                return Err(Error::Format(format!(
                    "line {line}: segment {} starts at sample_index {}, expected 0",
                    row.segment_index, row.sample_index
                )));
            }
            raw.push(RawSegment {
                first_line: line,
                last_line: line,
                times: vec![row.time_s],
                samples: vec![Complex64::new(row.re, row.im)],
            });
        } else {
            return Err(Error::Format(format!(
                "line {line}: segment_index {} out of order (expected {} or {})",
                row.segment_index,
                expected_seg.saturating_sub(1),
                expected_seg
            )));
        }
    }
    if raw.is_empty() {
        return Err(Error::Format("signal file has no samples".into()));
    }

    let reference = raw
        .iter()
        .enumerate()
        .find_map(|(i, s)| s.dt().map(|dt| (i, dt)))
        .ok_or_else(|| Error::Format("cannot infer dt: every segment has one sample".into()))?;
    let (ref_index, ref_dt) = reference;
    if ref_dt.is_nan() || ref_dt <= 0.0 {
        return Err(Error::Format(format!(
            "segment {ref_index} (lines {}-{}): time_s must increase",
            raw[ref_index].first_line, raw[ref_index].last_line
        )));
    }

    let (mut span, mut steps) = (0.0, 0usize);
    for (i, seg) in raw.iter().enumerate() {
        let Some(dt) = seg.dt() else { continue };
        if (dt - ref_dt).abs() > DT_REL_TOL * ref_dt {
            return Err(Error::Format(format!(
                "segment {i} (lines {}-{}) has dt {dt} but segment {ref_index} has dt {ref_dt}; \
                 all segments must share one sampling interval",
                seg.first_line, seg.last_line
            )));
        }
        let t0 = seg.times[0];
        for (k, &t) in seg.times.iter().enumerate() {
            let expect = t0 + k as f64 * dt;
            if (t - expect).abs() > DT_REL_TOL * t.abs().max(dt) {
                return Err(Error::Format(format!(
                    "line {}: time_s {t} is off the uniform grid of segment {i} (expected {expect})",
                    seg.first_line + k as u64
                )));
            }
        }
        span += seg.times[seg.times.len() - 1] - t0;
        steps += seg.times.len() - 1;
    }
    let dt = span / steps as f64;

    let segments = raw
        .into_iter()
        .map(|s| Segment::new(s.times[0], s.samples))
        .collect::<Result<Vec<_>>>()?;
    SegmentedSignal::new(dt, segments)
}

pub fn load_segments(path: &Path) -> Result<SegmentedSignal> {
    read_signal_csv(File::open(path)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexPair {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexPair {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl From<ComplexPair> for Complex64 {
    fn from(z: ComplexPair) -> Self {
        Complex64::new(z.re, z.im)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub pencil: usize,
    pub order: usize,
    /// `fixed` or `auto`.
    pub order_selection: String,
    pub auto_order_ratio: Option<f64>,
    pub tol_rank: f64,
    pub subspace: SubspaceSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub input: Option<String>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultDocument {
    pub format: u32,
    pub tool_version: String,
    pub dt: f64,
    pub segment_start_times: Vec<f64>,
    pub poles: Vec<ComplexPair>,
    pub frequencies_hz: Vec<f64>,
    pub dampings_per_s: Vec<f64>,
    /// One row per segment, one entry per pole.
    pub amplitudes: Vec<Vec<ComplexPair>>,
    pub residuals: Vec<f64>,
    pub config: ConfigEcho,
    pub diagnostics: Diagnostics,
    pub provenance: Provenance,
}

impl ResultDocument {
    pub fn new(
        result: &EstimationResult,
        signal: &SegmentedSignal,
        cfg: &PencilConfig,
        provenance: Provenance,
    ) -> Self {
        let (order_selection, auto_order_ratio) = match cfg.order {
            OrderSelection::Fixed(_) => ("fixed", None),
            OrderSelection::Auto { ratio } => ("auto", Some(ratio)),
        };
        Self {
            format: RESULT_FORMAT,
            tool_version: env!("CARGO_PKG_VERSION").to_owned(),
            dt: signal.dt(),
            segment_start_times: signal.segments().iter().map(|s| s.start_time).collect(),
            poles: result.poles.iter().map(|p| p.0.into()).collect(),
            frequencies_hz: result.frequencies.clone(),
            dampings_per_s: result.dampings.clone(),
            amplitudes: result
                .amplitudes
                .iter()
                .map(|row| row.iter().map(|&a| a.into()).collect())
                .collect(),
            residuals: result.residuals.clone(),
            config: ConfigEcho {
                pencil: result.diagnostics.pencil,
                order: result.order(),
                order_selection: order_selection.to_owned(),
                auto_order_ratio,
                tol_rank: cfg.tol_rank,
                subspace: cfg.subspace,
            },
            diagnostics: result.diagnostics.clone(),
            provenance,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.format != RESULT_FORMAT {
            return Err(Error::Format(format!(
                "unsupported result format {}",
                self.format
            )));
        }
        let n = self.poles.len();
        if self.frequencies_hz.len() != n
            || self.dampings_per_s.len() != n
            || self.amplitudes.iter().any(|r| r.len() != n)
            || self.config.order != n
        {
            return Err(Error::Format(
                "result arrays disagree on model order".into(),
            ));
        }
        if self.amplitudes.len() != self.residuals.len() {
            return Err(Error::Format(
                "result arrays disagree on segment count".into(),
            ));
        }
        Ok(())
    }
}

pub fn save_result(doc: &ResultDocument, path: &Path) -> Result<()> {
    write_atomic(path, |w| {
        serde_json::to_writer_pretty(&mut *w, doc)?;
        w.write_all(b"\n")?;
        Ok(())
    })
}

pub fn load_result(path: &Path) -> Result<ResultDocument> {
    let doc: ResultDocument = serde_json::from_reader(File::open(path)?)?;
    doc.validate()?;
    Ok(doc)
}

pub fn write_report_csv(report: &MonteCarloReport, w: &mut dyn Write) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(REPORT_HEADER)?;
    for r in &report.rows {
        out.write_record([
            r.method.as_str().to_owned(),
            r.segment_label.clone(),
            r.snr_db.to_string(),
            r.f_true_hz.to_string(),
            fmt_f64(r.rmse_hz),
            fmt_f64(r.bias_hz),
            r.runs.to_string(),
            r.failures.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn save_report(report: &MonteCarloReport, path: &Path) -> Result<()> {
    write_atomic(path, |w| write_report_csv(report, w))
}

pub fn read_report_csv(r: impl Read) -> Result<Vec<ReportRow>> {
    let mut rdr = csv::Reader::from_reader(r);
    let header = rdr.headers()?.clone();
    if header.iter().ne(REPORT_HEADER.iter().copied()) {
        return Err(Error::Format(format!(
            "expected report header {:?}",
            REPORT_HEADER.join(",")
        )));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let field = |i: usize| rec.get(i).unwrap_or("");
        let num = |i: usize| -> Result<f64> {
            field(i)
                .parse()
                .map_err(|_| Error::Format(format!("line {line}: bad number {:?}", field(i))))
        };
        let count = |i: usize| -> Result<usize> {
            field(i)
                .parse()
                .map_err(|_| Error::Format(format!("line {line}: bad count {:?}", field(i))))
        };
        rows.push(ReportRow {
            method: field(0).parse()?,
            segment_label: field(1).to_owned(),
            snr_db: num(2)?,
            f_true_hz: num(3)?,
            rmse_hz: num(4)?,
            bias_hz: num(5)?,
            runs: count(6)?,
            failures: count(7)?,
        });
    }
    Ok(rows)
}
