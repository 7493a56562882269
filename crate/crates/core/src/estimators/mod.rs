//! Coefficient-wise estimators: thresholding rules, SURE, GGD-MAP and the
//! moment/ML hyperparameter estimators.

mod ggd;
mod moments;
mod sure;
mod threshold;

pub use ggd::{
    ggd_map_derivative, ggd_map_estimate, ggd_step, ggd_step_bound, ggd_threshold, map_normalized_exact, GgdPrior,
    MapTable, DEFAULT_GRID_STEP,
};
pub use moments::{ggd_moment_ratio, lambda_ml_ggd, lambda_moment, nu_estimate};
pub use sure::{sparsity_test, sure_threshold, sure_value, sureshrink_denoise};
pub use threshold::{
    detail_subbands, median_noise_sigma, riskshrink_denoise, threshold, universal_threshold, ThresholdKind,
};
