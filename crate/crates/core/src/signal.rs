//! Complex-exponential signal model, pole parametrization, segmented
//! synthesis and noise injection.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One term `amplitude * exp[(damping + j*angular_frequency) * t]`.
///
/// Any phase lives in the complex amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentParams {
    pub amplitude: Complex64,
    /// 1/s, `<= 0` for decaying components.
    pub damping: f64,
    /// rad/s.
    pub angular_frequency: f64,
}

impl ComponentParams {
    pub fn new(amplitude: Complex64, damping: f64, angular_frequency: f64) -> Self {
        Self {
            amplitude,
            damping,
            angular_frequency,
        }
    }

    pub fn undamped(amplitude: Complex64, angular_frequency: f64) -> Self {
        Self::new(amplitude, 0.0, angular_frequency)
    }

    /// Convenience constructor taking the frequency in Hz.
    pub fn from_hz(amplitude: Complex64, damping: f64, frequency_hz: f64) -> Self {
        Self::new(amplitude, damping, 2.0 * PI * frequency_hz)
    }

    pub fn frequency_hz(&self) -> f64 {
        self.angular_frequency / (2.0 * PI)
    }

    /// Continuous-time exponent `damping + j*angular_frequency`.
    pub fn exponent(&self) -> Complex64 {
        Complex64::new(self.damping, self.angular_frequency)
    }

    /// Evaluate the component at continuous time `t`.
    pub fn eval(&self, t: f64) -> Complex64 {
        self.amplitude * (self.exponent() * t).exp()
    }

    fn validate(&self) -> Result<()> {
        if !(self.damping.is_finite() && self.angular_frequency.is_finite()) {
            return Err(Error::invalid(
                "damping and angular frequency must be finite",
            ));
        }
        let m = self.amplitude.norm();
        if !m.is_finite() || m <= 0.0 {
            return Err(Error::invalid(
                "component amplitude must be finite and nonzero",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicModel {
    components: Vec<ComponentParams>,
}

impl HarmonicModel {
    pub fn new(components: Vec<ComponentParams>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::invalid(
                "harmonic model needs at least one component",
            ));
        }
        for c in &components {
            c.validate()?;
        }
        Ok(Self { components })
    }

    pub fn components(&self) -> &[ComponentParams] {
        &self.components
    }

    pub fn order(&self) -> usize {
        self.components.len()
    }

    /// Sum of all components at continuous time `t`.
    pub fn eval(&self, t: f64) -> Complex64 {
        self.components.iter().map(|c| c.eval(t)).sum()
    }

    pub fn poles(&self, dt: f64) -> Result<Vec<Pole>> {
        self.components
            .iter()
            .map(|c| params_to_pole(c, dt))
            .collect()
    }

    /// Checks that the sampled poles are pairwise separated by more than
    /// `tol` for the given sampling interval.
    pub fn check_distinct(&self, dt: f64, tol: f64) -> Result<()> {
        let poles = self.poles(dt)?;
        for (i, a) in poles.iter().enumerate() {
            for b in &poles[i + 1..] {
                if (a.0 - b.0).norm() <= tol {
                    return Err(Error::invalid(format!(
                        "poles {} and {} coincide at dt = {dt}",
                        a.0, b.0
                    )));
                }
            }
        }
        Ok(())
    }

    /// Same model with every amplitude multiplied by `c`.
    pub fn scaled(&self, c: Complex64) -> Result<Self> {
        Self::new(
            self.components
                .iter()
                .map(|p| ComponentParams {
                    amplitude: p.amplitude * c,
                    ..*p
                })
                .collect(),
        )
    }
}

/// Per-sample ratio `z = exp[(damping + j*omega) * dt]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pole(pub Complex64);

impl Pole {
    pub fn value(self) -> Complex64 {
        self.0
    }

    pub fn is_undamped(self, tol: f64) -> bool {
        (self.0.norm() - 1.0).abs() <= tol
    }
}

impl From<Complex64> for Pole {
    fn from(z: Complex64) -> Self {
        Pole(z)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    /// Time of the first sample, seconds.
    pub start_time: f64,
    pub samples: Vec<Complex64>,
}

impl Segment {
    pub fn new(start_time: f64, samples: Vec<Complex64>) -> Result<Self> {
        if !start_time.is_finite() {
            return Err(Error::invalid("segment start time must be finite"));
        }
        if samples.is_empty() {
            return Err(Error::invalid("segment must hold at least one sample"));
        }
        if samples
            .iter()
            .any(|s| !(s.re.is_finite() && s.im.is_finite()))
        {
            return Err(Error::invalid("segment samples must be finite"));
        }
        Ok(Self {
            start_time,
            samples,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Several uniformly sampled segments sharing one sampling interval. Start
/// times are arbitrary; they need not fall on the `dt` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentedSignal {
    dt: f64,
    segments: Vec<Segment>,
}

impl SegmentedSignal {
    pub fn new(dt: f64, segments: Vec<Segment>) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::invalid(format!(
                "sampling interval must be positive, got {dt}"
            )));
        }
        if segments.is_empty() {
            return Err(Error::invalid("signal needs at least one segment"));
        }
        Ok(Self { dt, segments })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn num_segments(&self) -> usize {
        self.segments.len()
    }

    pub fn total_samples(&self) -> usize {
        self.segments.iter().map(Segment::len).sum()
    }

    pub fn min_segment_len(&self) -> usize {
        self.segments.iter().map(Segment::len).min().unwrap_or(0)
    }

    /// Mean `|s|^2` over every retained sample.
    pub fn mean_power(&self) -> f64 {
        let total: f64 = self
            .segments
            .iter()
            .flat_map(|s| s.samples.iter())
            .map(|v| v.norm_sqr())
            .sum();
        total / self.total_samples() as f64
    }

    /// Signal containing only segment `index`.
    pub fn single(&self, index: usize) -> Result<Self> {
        let seg = self
            .segments
            .get(index)
            .ok_or_else(|| Error::invalid(format!("no segment {index}")))?;
        Self::new(self.dt, vec![seg.clone()])
    }

    /// Applies `f` to every sample.
    pub fn map_samples(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            dt: self.dt,
            segments: self
                .segments
                .iter()
                .map(|s| Segment {
                    start_time: s.start_time,
                    samples: s.samples.iter().map(|&v| f(v)).collect(),
                })
                .collect(),
        }
    }

    /// Reorders segments; `order[i]` names the source of the i-th output.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let segments = order
            .iter()
            .map(|&i| {
                self.segments
                    .get(i)
                    .cloned()
                    .ok_or_else(|| Error::invalid(format!("no segment {i}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.dt, segments)
    }
}

pub fn params_to_pole(c: &ComponentParams, dt: f64) -> Result<Pole> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::invalid(format!(
            "sampling interval must be positive, got {dt}"
        )));
    }
    if !(c.damping.is_finite() && c.angular_frequency.is_finite()) {
        return Err(Error::invalid(
            "damping and angular frequency must be finite",
        ));
    }
    Ok(Pole((c.exponent() * dt).exp()))
}

/// Returns `(damping [1/s], frequency [Hz])`. The frequency comes from the
/// principal argument, so it lies in `(-1/(2dt), 1/(2dt)]`.
pub fn pole_to_params(z: Pole, dt: f64) -> Result<(f64, f64)> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::invalid(format!(
            "sampling interval must be positive, got {dt}"
        )));
    }
    let n = z.0.norm();
    if n == 0.0 {
        return Err(Error::DegeneratePole);
    }
    if !n.is_finite() {
        return Err(Error::invalid("pole must be finite"));
    }
    Ok((n.ln() / dt, z.0.arg() / (2.0 * PI * dt)))
}

/// Noiseless samples of `model` on each `(start_time, length)` segment.
pub fn synthesize(
    model: &HarmonicModel,
    dt: f64,
    segment_specs: &[(f64, usize)],
) -> Result<SegmentedSignal> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::invalid(format!(
            "sampling interval must be positive, got {dt}"
        )));
    }
    if segment_specs.is_empty() {
        return Err(Error::invalid("need at least one segment spec"));
    }
    let segments = segment_specs
        .iter()
        .map(|&(start, len)| {
            if len == 0 {
                return Err(Error::invalid("segment length must be at least 1"));
            }
            let samples = (0..len)
                .map(|k| model.eval(k as f64 * dt + start))
                .collect();
            Segment::new(start, samples)
        })
        .collect::<Result<Vec<_>>>()?;
    SegmentedSignal::new(dt, segments)
}

/// Adds circular complex white Gaussian noise at `snr_db` relative to the
/// mean power of the clean samples. `f64::INFINITY` returns the input as is.
pub fn add_noise(signal: &SegmentedSignal, snr_db: f64, seed: u64) -> SegmentedSignal {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    add_noise_with_rng(signal, snr_db, &mut rng)
}

pub fn add_noise_with_rng<R: Rng + ?Sized>(
    signal: &SegmentedSignal,
    snr_db: f64,
    rng: &mut R,
) -> SegmentedSignal {
    if snr_db == f64::INFINITY {
        return signal.clone();
    }
    let variance = signal.mean_power() / 10f64.powf(snr_db / 10.0);
    let scale = (variance / 2.0).sqrt();
    let segments = signal
        .segments
        .iter()
        .map(|s| Segment {
            start_time: s.start_time,
            samples: s
                .samples
                .iter()
                .map(|&v| {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    v + Complex64::new(re, im) * scale
                })
                .collect(),
        })
        .collect();
    SegmentedSignal {
        dt: signal.dt,
        segments,
    }
}
