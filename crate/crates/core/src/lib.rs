//! Minimum mean-square error of Gaussian vector sources observed through
//! random-erasure and equidistant sampling channels under unitary precoding.
//!
//! The crate is organized bottom-up:
//!
//! - [`model`]: spectra, unitary transforms, source models, channels and
//!   sampling patterns.
//! - [`mmse`]: per-pattern MMSE, the LMMSE estimator, Monte Carlo checks and
//!   the fixed-sample-count eigenvalue lower bound.
//! - [`average`]: MMSE averaged over random channels, exact and sampled, plus
//!   the closed-form special cases.
//! - [`precoder`]: objective, Wirtinger gradient, stationarity and a
//!   Riemannian optimizer over unitary precoders.
//! - [`cwss`]: closed forms for equidistant sampling of circulant sources.
//! - [`bounds`]: high-probability bound calculators and their empirical
//!   counterparts.
//! - [`verify`]: the reproduction checklist used by the CLI.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod average;
pub mod bounds;
pub mod cwss;
mod error;
pub mod linalg;
pub mod mmse;
pub mod model;
mod parallel;
pub mod precoder;
pub mod seed;
pub mod verify;

pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector, C64};
pub use model::{
    coherence, covariance, effective_dof, make_dft, random_unitary, ChannelMode, ChannelSpec,
    SamplingPattern, SourceModel, Spectrum, UnitaryTransform,
};
