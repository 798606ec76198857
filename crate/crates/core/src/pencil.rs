//! Single- and multi-segment matrix pencil estimation.
//!
//! Every segment is turned into a Hankel matrix with the same number of rows
//! `p`. Stacking those matrices side by side keeps one common row
//! Vandermonde factor, so the stacked matrix still has rank N and its left
//! singular subspace is shift invariant: dropping its last row and dropping
//! its first row gives two bases related by `diag(z_1..z_N)` up to a change
//! of basis. The poles are the eigenvalues of that N x N operator. Column
//! blocks coming from different segments never need to be aligned in time,
//! which is why the inter-segment delays may be arbitrary.
//!
//! Amplitudes are solved per segment because the right Vandermonde factor
//! is block diagonal across segments.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, MatrixC, VectorC};
use crate::signal::{pole_to_params, Pole, Segment, SegmentedSignal};

/// Default ratio for automatic model-order selection.
pub const DEFAULT_ORDER_RATIO: f64 = 1e-2;
/// Default relative singular-value floor below which a requested order is
/// declared rank deficient.
pub const DEFAULT_TOL_RANK: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderSelection {
    Fixed(usize),
    /// Keep every singular value with `sigma_r / sigma_1 >= ratio`.
    Auto {
        ratio: f64,
    },
}

/// Which matrix supplies the signal subspace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubspaceSource {
    /// The stacked p-row Hankel matrix.
    #[default]
    Hankel,
    /// The vertical concatenation of the shifted pair `[H_down; H_up]`.
    StackedPair,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PencilConfig {
    /// Hankel row count. `None` picks `floor(K_min / 2)` clamped into the
    /// valid range.
    pub pencil: Option<usize>,
    pub order: OrderSelection,
    pub tol_rank: f64,
    pub subspace: SubspaceSource,
}

impl PencilConfig {
    pub fn with_order(order: usize) -> Self {
        Self {
            pencil: None,
            order: OrderSelection::Fixed(order),
            tol_rank: DEFAULT_TOL_RANK,
            subspace: SubspaceSource::Hankel,
        }
    }

    pub fn auto(ratio: f64) -> Self {
        Self {
            order: OrderSelection::Auto { ratio },
            ..Self::with_order(1)
        }
    }

    pub fn pencil(mut self, p: usize) -> Self {
        self.pencil = Some(p);
        self
    }

    pub fn subspace(mut self, source: SubspaceSource) -> Self {
        self.subspace = source;
        self
    }

    /// Resolves the pencil parameter for a known order, enforcing
    /// `N + 1 <= p <= K_min - N`.
    pub fn resolve_pencil(&self, order: usize, min_len: usize) -> Result<usize> {
        if order == 0 {
            return Err(Error::invalid("model order must be at least 1"));
        }
        let lower = order + 1;
        let upper = min_len.saturating_sub(order);
        let p = self
            .pencil
            .unwrap_or_else(|| (min_len / 2).clamp(lower, upper.max(lower)));
        if p < lower || p > upper {
            return Err(Error::PencilBound {
                pencil: p,
                order,
                min_len,
                lower,
                upper,
            });
        }
        Ok(p)
    }
}

impl Default for PencilConfig {
    fn default() -> Self {
        Self::auto(DEFAULT_ORDER_RATIO)
    }
}

/// Stacked shifted Hankel pair. Column `j` of `h_up` is column `j` of
/// `h_down` advanced by one sample.
#[derive(Debug, Clone)]
pub struct PencilPair {
    pub h_down: MatrixC,
    pub h_up: MatrixC,
    /// Columns contributed by each segment, in order.
    pub segment_columns: Vec<usize>,
}

impl PencilPair {
    pub fn pencil(&self) -> usize {
        self.h_down.nrows() + 1
    }

    /// The full p-row stacked Hankel matrix.
    pub fn hankel(&self) -> MatrixC {
        let rows = self.h_down.nrows();
        let mut h = self
            .h_down
            .clone()
            .insert_row(rows, Complex64::new(0.0, 0.0));
        h.row_mut(rows).copy_from(&self.h_up.row(rows - 1));
        h
    }

    /// `[h_down; h_up]`.
    pub fn stacked(&self) -> MatrixC {
        let r = self.h_down.nrows();
        let mut m = MatrixC::zeros(2 * r, self.h_down.ncols());
        m.rows_mut(0, r).copy_from(&self.h_down);
        m.rows_mut(r, r).copy_from(&self.h_up);
        m
    }

    fn subspace_matrix(&self, source: SubspaceSource) -> MatrixC {
        match source {
            SubspaceSource::Hankel => self.hankel(),
            SubspaceSource::StackedPair => self.stacked(),
        }
    }
}

/// `p x (K - p + 1)` Hankel matrix with entry `(r, c) = samples[r + c]`.
pub fn build_hankel(samples: &[Complex64], p: usize) -> Result<MatrixC> {
    let k = samples.len();
    if p == 0 || p > k {
        return Err(Error::invalid(format!(
            "pencil parameter {p} outside 1..={k}"
        )));
    }
    Ok(MatrixC::from_fn(p, k - p + 1, |r, c| samples[r + c]))
}

/// Splits `h` into `(h_down, h_up)`: without its last row and without its
/// first row.
pub fn shift_pair(h: &MatrixC) -> Result<(MatrixC, MatrixC)> {
    let rows = h.nrows();
    if rows < 2 {
        return Err(Error::invalid(
            "shift pair needs a matrix with at least two rows",
        ));
    }
    Ok((
        h.rows(0, rows - 1).into_owned(),
        h.rows(1, rows - 1).into_owned(),
    ))
}

/// Builds each segment's Hankel with the same `pencil`, shift-splits it and
/// concatenates the blocks column-wise in segment order.
pub fn stack_pencil(signal: &SegmentedSignal, pencil: usize) -> Result<PencilPair> {
    if pencil < 2 {
        return Err(Error::invalid(format!(
            "pencil parameter must be at least 2, got {pencil}"
        )));
    }
    for (index, seg) in signal.segments().iter().enumerate() {
        if seg.len() < pencil + 1 {
            return Err(Error::SegmentTooShort {
                index,
                len: seg.len(),
                required: pencil + 1,
                pencil,
            });
        }
    }
    let segment_columns: Vec<usize> = signal
        .segments()
        .iter()
        .map(|s| s.len() - pencil + 1)
        .collect();
    let total: usize = segment_columns.iter().sum();
    let mut h = MatrixC::zeros(pencil, total);
    let mut col = 0;
    for seg in signal.segments() {
        let block = build_hankel(&seg.samples, pencil)?;
        h.columns_mut(col, block.ncols()).copy_from(&block);
        col += block.ncols();
    }
    let (h_down, h_up) = shift_pair(&h)?;
    Ok(PencilPair {
        h_down,
        h_up,
        segment_columns,
    })
}

/// Largest `r` with `sigma_r / sigma_1 >= ratio`.
pub fn select_order(singular_values: &[f64], ratio: f64) -> Result<usize> {
    let first = *singular_values
        .first()
        .ok_or_else(|| Error::invalid("empty singular value list"))?;
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(Error::invalid(format!(
            "order ratio must be in (0, 1], got {ratio}"
        )));
    }
    if first <= 0.0 {
        return Err(Error::ZeroSignal);
    }
    Ok(singular_values
        .iter()
        .take_while(|&&s| s / first >= ratio)
        .count())
}

/// Poles plus the quantities that produced them.
#[derive(Debug, Clone)]
pub struct PoleSolution {
    pub poles: Vec<Pole>,
    /// Full spectrum of the subspace matrix.
    pub singular_values: Vec<f64>,
    /// N x N operator mapping the truncated basis onto its shifted copy.
    pub operator: MatrixC,
    /// `||U_up - U_down * operator||_F`.
    pub shift_residual: f64,
}

/// Total-least-squares pole extraction from the dominant left singular
/// subspace of the stacked pencil.
pub fn estimate_poles(
    pair: &PencilPair,
    order: usize,
    source: SubspaceSource,
    tol_rank: f64,
) -> Result<PoleSolution> {
    let rows = pair.h_down.nrows();
    if order == 0 {
        return Err(Error::invalid("model order must be at least 1"));
    }
    if order > rows {
        return Err(Error::invalid(format!(
            "order {order} needs at least {} Hankel rows, pencil has {}",
            order + 1,
            rows + 1
        )));
    }
    let m = pair.subspace_matrix(source);
    if order > m.ncols() {
        return Err(Error::invalid(format!(
            "order {order} exceeds the {} stacked columns",
            m.ncols()
        )));
    }
    let spectrum = linalg::singular_values(&m)?;
    if spectrum[0] == 0.0 {
        return Err(Error::ZeroSignal);
    }
    if spectrum[order - 1] / spectrum[0] < tol_rank {
        let rank = spectrum
            .iter()
            .take_while(|&&s| s / spectrum[0] >= tol_rank)
            .count();
        return Err(Error::RankDeficient {
            order,
            rank,
            spectrum,
        });
    }
    let svd = linalg::svd_truncated(&m, order)?;
    let u = &svd.left_vectors;
    let (u_down, u_up) = match source {
        SubspaceSource::Hankel => (u.rows(0, rows).into_owned(), u.rows(1, rows).into_owned()),
        SubspaceSource::StackedPair => (
            u.rows(0, rows).into_owned(),
            u.rows(rows, rows).into_owned(),
        ),
    };
    let operator = linalg::lstsq_multi(&u_down, &u_up)?.x;
    let shift_residual = (&u_up - &u_down * &operator).norm();
    let mut poles: Vec<Pole> = linalg::eig_square(&operator)?
        .into_iter()
        .map(Pole)
        .collect();
    poles.sort_by(|a, b| {
        a.0.arg()
            .total_cmp(&b.0.arg())
            .then(a.0.norm().total_cmp(&b.0.norm()))
    });
    Ok(PoleSolution {
        poles,
        singular_values: spectrum,
        operator,
        shift_residual,
    })
}

/// Per-segment amplitudes `alpha~_in` with fit diagnostics.
#[derive(Debug, Clone)]
pub struct AmplitudeFit {
    /// `amplitudes[i][n]` for segment `i`, component `n`.
    pub amplitudes: Vec<Vec<Complex64>>,
    /// `||V a - y|| / ||y||` per segment.
    pub residuals: Vec<f64>,
    /// Vandermonde condition estimate per segment.
    pub conditions: Vec<f64>,
    pub warnings: Vec<String>,
}

fn vandermonde(poles: &[Pole], len: usize) -> MatrixC {
    MatrixC::from_fn(len, poles.len(), |k, n| poles[n].0.powu(k as u32))
}

fn fit_segment(seg: &Segment, poles: &[Pole]) -> Result<(Vec<Complex64>, f64, f64)> {
    let v = vandermonde(poles, seg.len());
    let y = VectorC::from_column_slice(&seg.samples);
    let sol = linalg::lstsq(&v, &y)?;
    let a = sol.column(0);
    let ynorm = y.norm();
    let r = (&v * &a - &y).norm();
    let rel = if ynorm > 0.0 { r / ynorm } else { r };
    Ok((a.iter().copied().collect(), rel, sol.condition))
}

/// Solves each segment's `K_i x N` Vandermonde system independently.
pub fn estimate_amplitudes(signal: &SegmentedSignal, poles: &[Pole]) -> Result<AmplitudeFit> {
    if poles.is_empty() {
        return Err(Error::invalid("no poles to fit"));
    }
    let mut fit = AmplitudeFit {
        amplitudes: Vec::with_capacity(signal.num_segments()),
        residuals: Vec::with_capacity(signal.num_segments()),
        conditions: Vec::with_capacity(signal.num_segments()),
        warnings: Vec::new(),
    };
    for (i, seg) in signal.segments().iter().enumerate() {
        if seg.len() < poles.len() {
            return Err(Error::invalid(format!(
                "segment {i} has {} samples, fewer than the {} poles",
                seg.len(),
                poles.len()
            )));
        }
        let (a, res, cond) = fit_segment(seg, poles)?;
        if cond > linalg::ILL_CONDITIONED {
            fit.warnings.push(format!(
                "segment {i}: Vandermonde condition {cond:.3e} exceeds {:.0e}",
                linalg::ILL_CONDITIONED
            ));
        }
        fit.amplitudes.push(a);
        fit.residuals.push(res);
        fit.conditions.push(cond);
    }
    Ok(fit)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Diagnostics {
    pub pencil: usize,
    pub order: usize,
    pub singular_values: Vec<f64>,
    pub shift_residual: f64,
    pub amplitude_conditions: Vec<f64>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct EstimationResult {
    /// Sorted by argument, then modulus.
    pub poles: Vec<Pole>,
    /// Hz, one per pole.
    pub frequencies: Vec<f64>,
    /// 1/s, one per pole.
    pub dampings: Vec<f64>,
    /// `amplitudes[i][n]`: segment `i`, pole `n`.
    pub amplitudes: Vec<Vec<Complex64>>,
    pub residuals: Vec<f64>,
    pub diagnostics: Diagnostics,
}

impl EstimationResult {
    pub fn order(&self) -> usize {
        self.poles.len()
    }
}

fn finish(
    signal: &SegmentedSignal,
    pencil: usize,
    solution: PoleSolution,
) -> Result<EstimationResult> {
    let fit = estimate_amplitudes(signal, &solution.poles)?;
    let (dampings, frequencies): (Vec<f64>, Vec<f64>) = solution
        .poles
        .iter()
        .map(|&z| pole_to_params(z, signal.dt()))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .unzip();
    Ok(EstimationResult {
        diagnostics: Diagnostics {
            pencil,
            order: solution.poles.len(),
            singular_values: solution.singular_values,
            shift_residual: solution.shift_residual,
            amplitude_conditions: fit.conditions,
            warnings: fit.warnings,
        },
        poles: solution.poles,
        frequencies,
        dampings,
        amplitudes: fit.amplitudes,
        residuals: fit.residuals,
    })
}

fn solve_pair(
    signal: &SegmentedSignal,
    cfg: &PencilConfig,
    build: impl Fn(usize) -> Result<PencilPair>,
) -> Result<EstimationResult> {
    let min_len = signal.min_segment_len();
    match cfg.order {
        OrderSelection::Fixed(order) => {
            let p = cfg.resolve_pencil(order, min_len)?;
            let pair = build(p)?;
            let sol = estimate_poles(&pair, order, cfg.subspace, cfg.tol_rank)?;
            finish(signal, p, sol)
        }
        OrderSelection::Auto { ratio } => {
            if min_len < 3 {
                return Err(Error::SegmentTooShort {
                    index: signal
                        .segments()
                        .iter()
                        .position(|s| s.len() == min_len)
                        .unwrap_or(0),
                    len: min_len,
                    required: 3,
                    pencil: 2,
                });
            }
            let p = cfg.pencil.unwrap_or((min_len / 2).clamp(2, min_len - 1));
            let pair = build(p)?;
            let spectrum = linalg::singular_values(&pair.subspace_matrix(cfg.subspace))?;
            let order = select_order(&spectrum, ratio)?;
            // Re-check the bound now that the order is known.
            let checked = PencilConfig {
                pencil: Some(p),
                ..*cfg
            };
            checked.resolve_pencil(order, min_len)?;
            let sol = estimate_poles(&pair, order, cfg.subspace, cfg.tol_rank)?;
            finish(signal, p, sol)
        }
    }
}

/// Joint estimation over all segments.
pub fn gmpa_estimate(signal: &SegmentedSignal, cfg: &PencilConfig) -> Result<EstimationResult> {
    solve_pair(signal, cfg, |p| stack_pencil(signal, p))
}

/// Classic single-segment total-least-squares matrix pencil.
pub fn mpa_estimate(segment: &Segment, dt: f64, cfg: &PencilConfig) -> Result<EstimationResult> {
    let signal = SegmentedSignal::new(dt, vec![segment.clone()])?;
    solve_pair(&signal, cfg, |p| {
        if segment.len() < p + 1 {
            return Err(Error::SegmentTooShort {
                index: 0,
                len: segment.len(),
                required: p + 1,
                pencil: p,
            });
        }
        let h = build_hankel(&segment.samples, p)?;
        let (h_down, h_up) = shift_pair(&h)?;
        Ok(PencilPair {
            segment_columns: vec![h.ncols()],
            h_down,
            h_up,
        })
    })
}

/// Refers the per-segment amplitudes back to `t = 0` using the segment
/// start times, `alpha_n = alpha~_in * exp(-s_n t_i)` with
/// `s_n = ln(z_n) / dt`, and averages them weighted by segment length.
///
/// Only meaningful when the start times are known exactly; with an unknown
/// inter-segment drift the per-segment amplitudes are the usable output.
pub fn coherent_amplitudes(
    result: &EstimationResult,
    signal: &SegmentedSignal,
) -> Result<Vec<Complex64>> {
    if result.amplitudes.len() != signal.num_segments() {
        return Err(Error::invalid(
            "result and signal disagree on segment count",
        ));
    }
    let dt = signal.dt();
    let total = signal.total_samples() as f64;
    let mut out = vec![Complex64::new(0.0, 0.0); result.order()];
    for (seg, amps) in signal.segments().iter().zip(&result.amplitudes) {
        let w = seg.len() as f64 / total;
        for (n, z) in result.poles.iter().enumerate() {
            let s = z.0.ln() / dt;
            out[n] += amps[n] * (-s * seg.start_time).exp() * w;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{synthesize, ComponentParams, HarmonicModel};
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn two_pole() -> HarmonicModel {
        HarmonicModel::new(vec![
            ComponentParams::from_hz(c(1.0, 0.0), 0.0, 3.0),
            ComponentParams::from_hz(c(0.8, 0.0), 0.0, 8.0),
        ])
        .unwrap()
    }

    fn gapped_segments() -> Vec<(f64, usize)> {
        vec![(0.0, 80), (0.99, 111), (2.39, 62)]
    }

    /// Numerical rank by SVD, relative threshold 1e-10.
    fn numerical_rank(m: &MatrixC) -> usize {
        let s = linalg::singular_values(m).unwrap();
        s.iter().filter(|&&x| x / s[0] >= 1e-10).count()
    }

    #[test]
    fn hankel_by_definition() {
        let s: Vec<Complex64> = (1..=4).map(|v| c(v as f64, 0.0)).collect();
        let h = build_hankel(&s, 2).unwrap();
        let expect = MatrixC::from_row_slice(
            2,
            3,
            &[
                c(1.0, 0.0),
                c(2.0, 0.0),
                c(3.0, 0.0),
                c(2.0, 0.0),
                c(3.0, 0.0),
                c(4.0, 0.0),
            ],
        );
        assert_eq!(h, expect);
        assert!(build_hankel(&s, 0).is_err());
        assert!(build_hankel(&s, 5).is_err());
    }

    #[test]
    fn hankel_shape_for_first_segment() {
        let sig = synthesize(&two_pole(), 0.01, &[(0.0, 80)]).unwrap();
        let h = build_hankel(&sig.segments()[0].samples, 30).unwrap();
        assert_eq!(h.shape(), (30, 51));
    }

    #[test]
    fn noiseless_hankel_rank_two() {
        let sig = synthesize(&two_pole(), 0.01, &[(0.0, 80)]).unwrap();
        for p in [3, 10, 40, 77] {
            let h = build_hankel(&sig.segments()[0].samples, p).unwrap();
            let s = linalg::singular_values(&h).unwrap();
            assert!(s[2] / s[0] < 1e-10, "p={p}: {:?}", &s[..3]);
            assert!(s[1] / s[0] > 1e-3);
        }
    }

    #[test]
    fn shift_pair_drops_rows() {
        let m = MatrixC::from_row_slice(
            3,
            2,
            &[
                c(1.0, 0.0),
                c(2.0, 0.0),
                c(3.0, 0.0),
                c(4.0, 0.0),
                c(5.0, 0.0),
                c(6.0, 0.0),
            ],
        );
        let (down, up) = shift_pair(&m).unwrap();
        assert_eq!(
            down,
            MatrixC::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)])
        );
        assert_eq!(
            up,
            MatrixC::from_row_slice(2, 2, &[c(3.0, 0.0), c(4.0, 0.0), c(5.0, 0.0), c(6.0, 0.0)])
        );
        assert!(shift_pair(&MatrixC::zeros(1, 4)).is_err());
    }

    #[test]
    fn single_pole_shift_is_scaling() {
        let z = c(0.0, 0.4).exp() * 0.97;
        let s: Vec<Complex64> = (0..12).map(|k| z.powu(k)).collect();
        let (down, up) = shift_pair(&build_hankel(&s, 3).unwrap()).unwrap();
        assert!((up - down * z).norm() < 1e-14);
    }

    #[test]
    fn pencil_drops_rank_at_pole() {
        let sig = synthesize(&two_pole(), 0.01, &[(0.0, 80)]).unwrap();
        let (down, up) =
            shift_pair(&build_hankel(&sig.segments()[0].samples, 20).unwrap()).unwrap();
        let z1 = params_pole(3.0);
        assert_eq!(numerical_rank(&(&up - &down * z1)), 1);
        assert_eq!(numerical_rank(&(&up - &down * c(0.3, 0.1))), 2);
    }

    fn params_pole(f: f64) -> Complex64 {
        c(0.0, 2.0 * PI * f * 0.01).exp()
    }

    #[test]
    fn stack_matches_single_segment_path() {
        let sig = synthesize(&two_pole(), 0.01, &[(0.0, 80)]).unwrap();
        let pair = stack_pencil(&sig, 30).unwrap();
        let (down, up) =
            shift_pair(&build_hankel(&sig.segments()[0].samples, 30).unwrap()).unwrap();
        assert_eq!(pair.h_down, down);
        assert_eq!(pair.h_up, up);
        assert_eq!(
            pair.hankel(),
            build_hankel(&sig.segments()[0].samples, 30).unwrap()
        );
    }

    #[test]
    fn stack_shape_and_rank() {
        let sig = synthesize(&two_pole(), 0.01, &gapped_segments()).unwrap();
        let pair = stack_pencil(&sig, 30).unwrap();
        assert_eq!(pair.h_down.shape(), (29, 51 + 82 + 33));
        assert_eq!(pair.segment_columns, vec![51, 82, 33]);
        assert_eq!(numerical_rank(&pair.h_down), 2);
        assert_eq!(numerical_rank(&pair.h_up), 2);

        // arbitrary, off-grid start times
        let odd = synthesize(&two_pole(), 0.01, &[(0.0, 40), (0.7137, 50), (1.9001, 45)]).unwrap();
        let pair = stack_pencil(&odd, 12).unwrap();
        assert_eq!(numerical_rank(&pair.h_down), 2);
    }

    #[test]
    fn stack_rejects_short_segment() {
        let sig = synthesize(&two_pole(), 0.01, &[(0.0, 80), (1.0, 20)]).unwrap();
        match stack_pencil(&sig, 20) {
            Err(Error::SegmentTooShort {
                index: 1,
                len: 20,
                required: 21,
                ..
            }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn select_order_examples() {
        assert_eq!(select_order(&[10.0, 8.0, 1e-9], 1e-2).unwrap(), 2);
        assert_eq!(select_order(&[5.0], 1e-2).unwrap(), 1);
        assert!(matches!(
            select_order(&[0.0, 0.0], 1e-2),
            Err(Error::ZeroSignal)
        ));
        assert!(select_order(&[], 1e-2).is_err());

        let sig = synthesize(&two_pole(), 0.01, &gapped_segments()).unwrap();
        let pair = stack_pencil(&sig, 31).unwrap();
        let s = linalg::singular_values(&pair.hankel()).unwrap();
        assert_eq!(select_order(&s, 1e-2).unwrap(), 2);
    }

    #[test]
    fn dc_signal_pole_is_one() {
        let m = HarmonicModel::new(vec![ComponentParams::undamped(c(2.0, 0.0), 0.0)]).unwrap();
        let sig = synthesize(&m, 0.01, &[(0.0, 10), (0.5, 12)]).unwrap();
        let pair = stack_pencil(&sig, 4).unwrap();
        let sol = estimate_poles(&pair, 1, SubspaceSource::Hankel, DEFAULT_TOL_RANK).unwrap();
        assert!((sol.poles[0].0 - c(1.0, 0.0)).norm() < 1e-10);
    }

    /// Three damped poles whose shifted basis has singular values near
    /// 1, 1, 0.94; an inaccurate SVD of that basis once cost 4e-3 here.
    #[test]
    fn clustered_basis_three_poles() {
        let model = HarmonicModel::new(vec![
            ComponentParams::new(
                c(-0.3354902591458037, 1.4426956976395984),
                -0.8052167137104975,
                49.641324590076955,
            ),
            ComponentParams::new(
                c(1.5779215121795065, -1.0488993888057678),
                -0.9442655324276308,
                94.24777960769379,
            ),
            ComponentParams::new(
                c(-1.2242393948974717, -0.6942801913152081),
                -0.4780307962780103,
                140.45403720516083,
            ),
        ])
        .unwrap();
        let specs = [(0.0, 67), (1.501969192880207, 64), (2.8288469815050608, 50)];
        let sig = synthesize(&model, 0.01, &specs).unwrap();
        let est = gmpa_estimate(&sig, &PencilConfig::with_order(3)).unwrap();
        for z in model.poles(0.01).unwrap() {
            let best = est
                .poles
                .iter()
                .map(|p| (p.0 - z.0).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(best < 1e-10, "pole {} off by {best:e}", z.0);
        }
        assert!(est.diagnostics.shift_residual < 1e-10);
    }

    #[test]
    fn noiseless_two_tone_poles() {
        let sig = synthesize(&two_pole(), 0.01, &gapped_segments()).unwrap();
        let pair = stack_pencil(&sig, 31).unwrap();
        for source in [SubspaceSource::Hankel, SubspaceSource::StackedPair] {
            let sol = estimate_poles(&pair, 2, source, DEFAULT_TOL_RANK).unwrap();
            let f: Vec<f64> = sol
                .poles
                .iter()
                .map(|&z| pole_to_params(z, 0.01).unwrap().1)
                .collect();
            assert!((f[0] - 3.0).abs() < 1e-8, "{source:?} {f:?}");
            assert!((f[1] - 8.0).abs() < 1e-8, "{source:?} {f:?}");
            assert!(sol.shift_residual < 1e-10);
        }
    }

    #[test]
    fn excess_order_is_rank_deficient() {
        let sig = synthesize(&two_pole(), 0.01, &gapped_segments()).unwrap();
        let pair = stack_pencil(&sig, 31).unwrap();
        match estimate_poles(&pair, 3, SubspaceSource::Hankel, DEFAULT_TOL_RANK) {
            Err(Error::RankDeficient {
                order: 3,
                rank: 2,
                spectrum,
            }) => assert!(spectrum.len() >= 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unit_amplitude_single_pole() {
        let z = Pole(c(0.0, 0.5).exp());
        let s: Vec<Complex64> = (0..30).map(|k| z.0.powu(k)).collect();
        let sig = SegmentedSignal::new(0.01, vec![Segment::new(0.0, s).unwrap()]).unwrap();
        let fit = estimate_amplitudes(&sig, &[z]).unwrap();
        assert!((fit.amplitudes[0][0] - c(1.0, 0.0)).norm() < 1e-10);
        assert!(fit.residuals[0] < 1e-12);
    }

    #[test]
    fn two_tone_amplitudes_first_segment() {
        let model = two_pole();
        let sig = synthesize(&model, 0.01, &gapped_segments()).unwrap();
        let poles = model.poles(0.01).unwrap();
        let fit = estimate_amplitudes(&sig, &poles).unwrap();
        assert!((fit.amplitudes[0][0] - c(1.0, 0.0)).norm() < 1e-8);
        assert!((fit.amplitudes[0][1] - c(0.8, 0.0)).norm() < 1e-8);
    }

    #[test]
    fn integer_offset_amplitude_is_rotated() {
        let model = two_pole();
        let m = 99u32;
        let sig = synthesize(&model, 0.01, &[(m as f64 * 0.01, 40)]).unwrap();
        let poles = model.poles(0.01).unwrap();
        let fit = estimate_amplitudes(&sig, &poles).unwrap();
        for (n, comp) in model.components().iter().enumerate() {
            let expect = comp.amplitude * poles[n].0.powu(m);
            assert!((fit.amplitudes[0][n] - expect).norm() < 1e-10);
        }
    }

    #[test]
    fn amplitude_fit_flags_near_coincident_poles() {
        let z1 = Pole(c(0.0, 0.3).exp());
        let z2 = Pole(c(0.0, 0.3 + 1e-9).exp());
        let s: Vec<Complex64> = (0..20).map(|k| z1.0.powu(k)).collect();
        let sig = SegmentedSignal::new(0.01, vec![Segment::new(0.0, s).unwrap()]).unwrap();
        let fit = estimate_amplitudes(&sig, &[z1, z2]).unwrap();
        assert_eq!(fit.warnings.len(), 1);
    }

    #[test]
    fn pencil_bound_enforced() {
        let sig = synthesize(&two_pole(), 0.01, &[(0.0, 80)]).unwrap();
        match gmpa_estimate(&sig, &PencilConfig::with_order(50)) {
            Err(Error::PencilBound {
                order: 50,
                min_len: 80,
                ..
            }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(gmpa_estimate(&sig, &PencilConfig::with_order(2).pencil(2)).is_err());
        assert!(gmpa_estimate(&sig, &PencilConfig::with_order(2).pencil(79)).is_err());
        assert!(gmpa_estimate(&sig, &PencilConfig::with_order(2).pencil(78)).is_ok());
    }

    #[test]
    fn default_pencil_is_half_min_length() {
        let cfg = PencilConfig::with_order(2);
        assert_eq!(cfg.resolve_pencil(2, 62).unwrap(), 31);
        assert_eq!(cfg.resolve_pencil(2, 5).unwrap(), 3);
        assert!(cfg.resolve_pencil(3, 5).is_err());
    }

    #[test]
    fn auto_order_finds_two() {
        let sig = synthesize(&two_pole(), 0.01, &gapped_segments()).unwrap();
        let res = gmpa_estimate(&sig, &PencilConfig::auto(1e-2)).unwrap();
        assert_eq!(res.order(), 2);
        assert_eq!(res.diagnostics.pencil, 31);
    }

    #[test]
    fn drifted_segment_amplitude_carries_phase() {
        let model = two_pole();
        let delta = 0.004;
        let sig = synthesize(&model, 0.01, &[(0.0, 80), (0.99 + delta, 111), (2.39, 62)]).unwrap();
        let res = gmpa_estimate(&sig, &PencilConfig::with_order(2)).unwrap();
        assert!((res.frequencies[0] - 3.0).abs() < 1e-8);
        assert!((res.frequencies[1] - 8.0).abs() < 1e-8);
        for (n, comp) in model.components().iter().enumerate() {
            let expect = comp.eval(0.99 + delta);
            assert!((res.amplitudes[1][n] - expect).norm() < 1e-8);
        }
        let global = coherent_amplitudes(&res, &sig).unwrap();
        assert!((global[0] - c(1.0, 0.0)).norm() < 1e-8);
        assert!((global[1] - c(0.8, 0.0)).norm() < 1e-8);
    }

    #[test]
    fn single_segment_equals_classic_path() {
        let sig = synthesize(&two_pole(), 0.01, &[(0.0, 111)]).unwrap();
        let noisy = crate::signal::add_noise(&sig, 5.0, 9);
        let cfg = PencilConfig::with_order(2);
        let g = gmpa_estimate(&noisy, &cfg).unwrap();
        let m = mpa_estimate(&noisy.segments()[0], 0.01, &cfg).unwrap();
        for (a, b) in g.poles.iter().zip(&m.poles) {
            assert!((a.0 - b.0).norm() < 1e-12);
        }
    }
}
