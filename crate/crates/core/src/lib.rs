//! Retrospective Bayesian inference for multiple changepoint models with an
//! unknown number of changepoints.
//!
//! Segment parameters are integrated out through conjugate priors, leaving a
//! posterior over segmentations alone. Two inference routes are provided:
//!
//! * [`sampler`]: a collapsed Metropolis-Hastings sampler that adds,
//!   deletes and moves changepoints, with optional Gibbs updates of the
//!   segmentation-prior parameter `p` and the model hyperparameters `γ`;
//! * [`recursions`]: backward filtering recursions for fixed `γ`, which
//!   yield independent exact draws of the changepoints.
//!
//! [`analysis`] holds the exhaustive-enumeration oracle, chain summaries and
//! sensitivity sweeps. Positions are 1-based throughout: a changepoint at
//! `t` means `y_t` is the last observation of its segment.

pub mod analysis;
pub mod error;
pub mod math;
pub mod models;
pub mod priors;
pub mod recursions;
pub mod sampler;
pub mod series;

pub use error::{Error, Result, SegmentationError};
pub use models::{
    BernoulliBeta, BernoulliBetaParams, BernoulliHyperprior, GaussianCommonVar, GaussianCommonVarParams,
    GaussianHyperprior, PoissonGamma, PoissonGammaParams, PoissonHyperprior, SegmentModel, SegmentParamDraw,
};
pub use priors::{KPrior, PointProcess, SegPrior};
pub use series::{build_stats, DataKind, Edit, Segmentation, SufficientStats, TimeSeries};
