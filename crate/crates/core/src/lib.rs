//! Covariance and spectrum estimation for high-dimensional returns driven by
//! scalar-BEKK volatility.
//!
//! The pipeline: simulate a panel ([`bekk`]), estimate the volatility
//! coefficients from a few coordinates ([`garch`]), rescale each return by
//! its recent-lag projection ([`tvadjust`]), then recover the population
//! spectrum and shrink the sample eigenvalues ([`mplaw`], [`shrinkage`]).
//! [`experiments`] runs the replicated Monte Carlo study on top.

pub mod bekk;
pub mod error;
pub mod experiments;
pub mod garch;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod mplaw;
pub mod rng;
pub mod shrinkage;
pub mod tvadjust;
