//! Sparse polynomial chaos expansions fitted directly from data, with
//! KDE marginals and vine-copula dependence models.

pub mod basis;
pub mod benchmarks;
pub mod copula;
pub mod error;
pub mod marginals;
pub mod metrics;
pub mod optimize;
pub mod orthopoly;
pub mod pce;
pub mod quadrature;
pub mod regression;
pub mod special;

pub use error::{Error, Result};
