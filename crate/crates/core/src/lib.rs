//! Wavelet-domain denoising and restoration driven by an invariant
//! minimum-description-length (INMDL) model-selection rule.
//!
//! The crate is organised by concern:
//!
//! * [`signal`]: test signals, noise injection, metrics and dataset I/O.
//! * [`wavelet`]: periodic orthogonal transforms, packet trees, mirror bases
//!   and the constrained best-basis search.
//! * [`estimators`]: thresholds, SURE machinery and the GGD-MAP solver.
//! * [`codelength`]: Laplace marginal, renormalisation bounds, model-class
//!   prior, diagnostics and the NML baseline.
//! * [`selection`]: the INMDL selection loop.
//! * [`deconv`]: blur models, whitening, mirror-wavelet thresholding, the
//!   whitened INMDL restoration and the Wiener baseline.
//! * [`experiment`]: the table harness tying everything together.

// `!(x < y)` is used deliberately so that NaN takes the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod codelength;
pub mod deconv;
pub mod error;
pub mod estimators;
pub mod experiment;
pub mod rng;
pub mod selection;
pub mod signal;
pub mod special;
pub mod wavelet;

pub use codelength::{CodelengthReport, Diagnostics, IntervalConfig, ModelIndex};
pub use deconv::{BlurKernel, DeconvConfig, Restoration};
pub use error::{Error, Result};
pub use estimators::{GgdPrior, MapTable};
pub use experiment::{ExperimentConfig, ExperimentResult, Method};
pub use rng::NoiseRng;
pub use selection::{InmdlConfig, SelectionState};
pub use signal::{Dataset, MetricsRow, Shape};
pub use wavelet::{FilterPair, WaveletBasis};
