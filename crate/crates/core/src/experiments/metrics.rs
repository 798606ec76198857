use crate::error::{Error, Result};

/// `sqrt(mean(e^2))`.
pub fn rmse(errors: &[f64]) -> Result<f64> {
    mse(errors).map(f64::sqrt)
}

pub fn mse(errors: &[f64]) -> Result<f64> {
    if errors.is_empty() {
        return Err(Error::invalid("rmse of an empty error list"));
    }
    Ok(errors.iter().map(|e| e * e).sum::<f64>() / errors.len() as f64)
}

/// Greedy nearest-frequency assignment: repeatedly pairs the closest
/// remaining (truth, estimate). `out[i]` is the estimate matched to
/// `truth[i]`, or `None` when estimates ran out.
pub fn match_frequencies(truth: &[f64], estimates: &[f64]) -> Vec<Option<f64>> {
    let mut out = vec![None; truth.len()];
    let mut pairs: Vec<(f64, usize, usize)> = truth
        .iter()
        .enumerate()
        .flat_map(|(i, t)| {
            estimates
                .iter()
                .enumerate()
                .map(move |(j, e)| ((t - e).abs(), i, j))
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut used = vec![false; estimates.len()];
    for (_, i, j) in pairs {
        if out[i].is_none() && !used[j] {
            out[i] = Some(estimates[j]);
            used[j] = true;
        }
    }
    out
}
