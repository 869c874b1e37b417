//! Statistics used by the sampler and the validation pipeline.

mod correlation;
mod deciles;
pub mod normal;
mod ols;
mod truncnorm;

pub use correlation::{pearson, spearman, Spearman};
pub use deciles::assign_deciles;
pub use ols::{ols_fit, ols_predict, LinearModel};
pub use truncnorm::{fit_truncated_normal, truncnorm_cdf, TruncatedNormalFit, SIGMA_FLOOR};

pub(crate) fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Sample standard deviation (n - 1 denominator).
pub(crate) fn sample_sd(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = mean(v);
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}
