//! Zero-filled, zero-padded FFT peak picker. A grid-based reference for the
//! off-grid comparison; it is not any published gapped-data estimator.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::signal::SegmentedSignal;

/// Returns up to `count` peak frequencies (Hz) of the periodogram evaluated
/// on a `grid_hz` grid, strongest first.
///
/// Samples are placed on the common time grid starting at the first
/// segment, start offsets rounded to whole samples; gaps are zero-filled and
/// the record is zero-padded to `1 / (dt * grid_hz)` points.
pub fn periodogram_peaks(signal: &SegmentedSignal, grid_hz: f64, count: usize) -> Result<Vec<f64>> {
    let dt = signal.dt();
    if !(grid_hz > 0.0 && grid_hz.is_finite()) {
        return Err(Error::invalid(format!(
            "grid spacing must be positive, got {grid_hz}"
        )));
    }
    let nfft_f = 1.0 / (dt * grid_hz);
    let nfft = nfft_f.round() as usize;
    if nfft < 2 || (nfft_f - nfft as f64).abs() > 1e-6 {
        return Err(Error::invalid(format!(
            "grid spacing {grid_hz} Hz does not divide the sample rate {}",
            1.0 / dt
        )));
    }

    let t0 = signal
        .segments()
        .iter()
        .map(|s| s.start_time)
        .fold(f64::INFINITY, f64::min);
    let mut buf = vec![Complex64::new(0.0, 0.0); nfft];
    for seg in signal.segments() {
        let offset = ((seg.start_time - t0) / dt).round() as usize;
        for (k, &v) in seg.samples.iter().enumerate() {
            let idx = offset + k;
            if idx >= nfft {
                return Err(Error::invalid(format!(
                    "record spans more than {nfft} samples; use a finer grid"
                )));
            }
            buf[idx] += v;
        }
    }
    FftPlanner::new().plan_fft_forward(nfft).process(&mut buf);
    let power: Vec<f64> = buf.iter().map(|v| v.norm_sqr()).collect();

    let mut peaks: Vec<usize> = (0..nfft)
        .filter(|&b| {
            let prev = power[(b + nfft - 1) % nfft];
            let next = power[(b + 1) % nfft];
            power[b] > prev && power[b] >= next
        })
        .collect();
    peaks.sort_by(|&a, &b| power[b].total_cmp(&power[a]).then(a.cmp(&b)));
    peaks.truncate(count);
    Ok(peaks
        .into_iter()
        .map(|b| {
            let signed = if b <= nfft / 2 {
                b as f64
            } else {
                b as f64 - nfft as f64
            };
            signed * grid_hz
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{synthesize, ComponentParams, HarmonicModel};

    fn tones(freqs: &[(f64, f64)]) -> HarmonicModel {
        HarmonicModel::new(
            freqs
                .iter()
                .map(|&(a, f)| ComponentParams::from_hz(Complex64::new(a, 0.0), 0.0, f))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn on_grid_tone_exact() {
        let sig = synthesize(
            &tones(&[(1.0, 8.0)]),
            0.01,
            &[(0.0, 80), (0.99, 111), (2.39, 62)],
        )
        .unwrap();
        let p = periodogram_peaks(&sig, 0.125, 1).unwrap();
        assert_eq!(p, vec![8.0]);
    }

    #[test]
    fn negative_frequency() {
        let sig = synthesize(&tones(&[(1.0, -5.0)]), 0.01, &[(0.0, 200)]).unwrap();
        assert_eq!(periodogram_peaks(&sig, 0.125, 1).unwrap(), vec![-5.0]);
    }

    #[test]
    fn off_grid_tone_lands_on_neighbour() {
        let sig = synthesize(&tones(&[(1.0, 11.4)]), 0.01, &[(0.0, 301)]).unwrap();
        let p = periodogram_peaks(&sig, 0.125, 1).unwrap();
        assert_eq!(p, vec![11.375]);
        assert!((p[0] - 11.4).abs() >= 0.025);
    }

    #[test]
    fn rejects_bad_grid() {
        let sig = synthesize(&tones(&[(1.0, 3.0)]), 0.01, &[(0.0, 301)]).unwrap();
        assert!(periodogram_peaks(&sig, 0.0, 1).is_err());
        assert!(periodogram_peaks(&sig, 0.3, 1).is_err());
        // 1 Hz grid gives 100 bins, shorter than the record
        assert!(periodogram_peaks(&sig, 1.0, 1).is_err());
    }
}
