//! Super-resolution estimation of damped and undamped complex exponentials
//! from signals sampled as several uniformly sampled segments with gaps.
//!
//! The estimator stacks the per-segment Hankel matrices side by side, so all
//! segments share one left (row) Vandermonde factor, and extracts the poles
//! from the shift invariance of the dominant left singular subspace. With a
//! single segment it is the classic total-least-squares matrix pencil.
//!
//! ```
//! use harmgap::{gmpa_estimate, synthesize, ComponentParams, HarmonicModel, PencilConfig};
//! use std::f64::consts::PI;
//!
//! let model = HarmonicModel::new(vec![
//!     ComponentParams::undamped(1.0.into(), 2.0 * PI * 3.0),
//!     ComponentParams::undamped(0.8.into(), 2.0 * PI * 8.0),
//! ])
//! .unwrap();
//! let signal = synthesize(&model, 0.01, &[(0.0, 80), (0.99, 111), (2.39, 62)]).unwrap();
//! let result = gmpa_estimate(&signal, &PencilConfig::with_order(2)).unwrap();
//! let mut f = result.frequencies.clone();
//! f.sort_by(f64::total_cmp);
//! assert!((f[0] - 3.0).abs() < 1e-8 && (f[1] - 8.0).abs() < 1e-8);
//! ```

pub mod cli;
pub mod error;
pub mod experiments;
pub mod io;
pub mod linalg;
pub mod pencil;
pub mod signal;

pub use error::{Error, Result};
pub use pencil::{
    build_hankel, coherent_amplitudes, estimate_amplitudes, estimate_poles, gmpa_estimate,
    mpa_estimate, select_order, shift_pair, stack_pencil, AmplitudeFit, EstimationResult,
    OrderSelection, PencilConfig, PencilPair, SubspaceSource,
};
pub use signal::{
    add_noise, add_noise_with_rng, params_to_pole, pole_to_params, synthesize, ComponentParams,
    HarmonicModel, Pole, Segment, SegmentedSignal,
};

pub use num_complex::Complex64;
