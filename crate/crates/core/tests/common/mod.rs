//! Random noiseless instances and the invariant checks shared by the
//! property tests and the acceptance suite.
#![allow(dead_code)]

use std::f64::consts::PI;

use harmgap::linalg::singular_values;
use harmgap::{
    estimate_poles, gmpa_estimate, stack_pencil, synthesize, Complex64, ComponentParams,
    HarmonicModel, PencilConfig, Pole, SegmentedSignal, SubspaceSource,
};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

pub const DT: f64 = 0.01;

#[derive(Debug, Clone)]
pub struct Instance {
    pub model: HarmonicModel,
    pub specs: Vec<(f64, usize)>,
}

impl Instance {
    pub fn order(&self) -> usize {
        self.model.order()
    }

    pub fn signal(&self) -> SegmentedSignal {
        synthesize(&self.model, DT, &self.specs).unwrap()
    }

    pub fn true_poles(&self) -> Vec<Complex64> {
        self.model
            .poles(DT)
            .unwrap()
            .into_iter()
            .map(|p| p.0)
            .collect()
    }

    pub fn config(&self) -> PencilConfig {
        PencilConfig::with_order(self.order())
    }
}

/// Up to five poles on distinct 7.5 Hz slots (jittered by at most 1 Hz),
/// damping in [-1, 0] 1/s, and up to five segments of 30..80 samples at
/// arbitrary real start times.
pub fn instance() -> impl Strategy<Value = Instance> {
    (1usize..=5, 1usize..=5).prop_flat_map(|(n, m)| {
        let slots = proptest::sample::subsequence((0..12).collect::<Vec<i32>>(), n);
        let comps = proptest::collection::vec(
            (-1.0f64..1.0, -1.0f64..=0.0, 0.5f64..2.0, 0.0f64..2.0 * PI),
            n,
        );
        let segs = proptest::collection::vec((30usize..=80, 0.0f64..1.0), m);
        (slots, comps, segs).prop_map(|(slots, comps, segs)| {
            let components = slots
                .iter()
                .zip(comps)
                .map(|(&s, (jitter, damping, mag, phase))| {
                    let f = -45.0 + 7.5 * s as f64 + jitter;
                    ComponentParams::from_hz(Complex64::from_polar(mag, phase), damping, f)
                })
                .collect();
            let mut t = 0.0;
            let specs = segs
                .into_iter()
                .map(|(len, gap)| {
                    let start = t;
                    t += len as f64 * DT + gap;
                    (start, len)
                })
                .collect();
            Instance {
                model: HarmonicModel::new(components).unwrap(),
                specs,
            }
        })
    })
}

/// Largest distance from each expected pole to its nearest estimate.
pub fn pole_distance(expected: &[Complex64], got: &[Pole]) -> f64 {
    if expected.len() != got.len() {
        return f64::INFINITY;
    }
    expected
        .iter()
        .map(|z| {
            got.iter()
                .map(|g| (g.0 - z).norm())
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

pub fn noiseless_exactness(inst: &Instance) -> Result<(), TestCaseError> {
    let est = gmpa_estimate(&inst.signal(), &inst.config())
        .map_err(|e| TestCaseError::fail(e.to_string()))?;
    let d = pole_distance(&inst.true_poles(), &est.poles);
    prop_assert!(d < 1e-8, "pole error {d:e}");
    Ok(())
}

pub fn rank_law(inst: &Instance) -> Result<(), TestCaseError> {
    let sig = inst.signal();
    let n = inst.order();
    let p = inst
        .config()
        .resolve_pencil(n, sig.min_segment_len())
        .unwrap();
    let pair = stack_pencil(&sig, p).unwrap();
    for h in [&pair.h_down, &pair.h_up] {
        let sv = singular_values(h).unwrap();
        prop_assert!(
            sv[n - 1] / sv[0] > 1e-8,
            "sigma_N / sigma_1 = {:e}",
            sv[n - 1] / sv[0]
        );
        if sv.len() > n {
            prop_assert!(
                sv[n] / sv[0] < 1e-10,
                "sigma_N+1 / sigma_1 = {:e}",
                sv[n] / sv[0]
            );
        }
    }
    Ok(())
}

pub fn permutation_invariance(inst: &Instance, order: &[usize]) -> Result<(), TestCaseError> {
    let sig = inst.signal();
    let cfg = inst.config();
    let a = gmpa_estimate(&sig, &cfg).unwrap();
    let b = gmpa_estimate(&sig.permuted(order).unwrap(), &cfg).unwrap();
    let reference: Vec<Complex64> = a.poles.iter().map(|p| p.0).collect();
    let d = pole_distance(&reference, &b.poles);
    prop_assert!(d <= 1e-10, "permutation moved poles by {d:e}");
    Ok(())
}

pub fn scaling_invariance(inst: &Instance, c: Complex64) -> Result<(), TestCaseError> {
    let sig = inst.signal();
    let cfg = inst.config();
    let a = gmpa_estimate(&sig, &cfg).unwrap();
    let b = gmpa_estimate(&sig.map_samples(|v| v * c), &cfg).unwrap();
    let reference: Vec<Complex64> = a.poles.iter().map(|p| p.0).collect();
    let d = pole_distance(&reference, &b.poles);
    prop_assert!(d <= 1e-10, "scaling moved poles by {d:e}");
    prop_assert_eq!(a.order(), b.order());
    for (sa, sb) in a.amplitudes.iter().zip(&b.amplitudes) {
        for (&x, &y) in sa.iter().zip(sb) {
            let err = (y - c * x).norm();
            prop_assert!(
                err <= 1e-8 * (c * x).norm().max(1e-3),
                "amplitude {y} vs {}",
                c * x
            );
        }
    }
    Ok(())
}

pub fn conjugate_symmetry(inst: &Instance) -> Result<(), TestCaseError> {
    let sig = inst.signal();
    let cfg = inst.config();
    let a = gmpa_estimate(&sig, &cfg).unwrap();
    let b = gmpa_estimate(&sig.map_samples(|v| v.conj()), &cfg).unwrap();
    let conj: Vec<Complex64> = a.poles.iter().map(|p| p.0.conj()).collect();
    let d = pole_distance(&conj, &b.poles);
    prop_assert!(d <= 1e-10, "conjugate pole sets differ by {d:e}");
    Ok(())
}

pub fn shift_relation(inst: &Instance, source: SubspaceSource) -> Result<(), TestCaseError> {
    let sig = inst.signal();
    let n = inst.order();
    let p = inst
        .config()
        .resolve_pencil(n, sig.min_segment_len())
        .unwrap();
    let pair = stack_pencil(&sig, p).unwrap();
    let sol = estimate_poles(&pair, n, source, 1e-11).unwrap();
    prop_assert!(
        sol.shift_residual <= 1e-8,
        "residual {:e}",
        sol.shift_residual
    );
    let d = pole_distance(&inst.true_poles(), &sol.poles);
    prop_assert!(d < 1e-8, "operator eigenvalues off by {d:e}");
    Ok(())
}

/// A segment order for `m` segments.
pub fn permutation(m: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..m).collect::<Vec<_>>()).prop_shuffle()
}

pub fn nonzero_complex() -> impl Strategy<Value = Complex64> {
    (0.1f64..10.0, 0.0f64..2.0 * PI).prop_map(|(r, t)| Complex64::from_polar(r, t))
}

pub fn with_permutation() -> impl Strategy<Value = (Instance, Vec<usize>)> {
    instance().prop_flat_map(|inst| {
        let m = inst.specs.len();
        (Just(inst), permutation(m))
    })
}
