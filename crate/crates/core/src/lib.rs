//! Elliptic volatility sample covariance ensembles.
//!
//! An elliptic volatility matrix is a `T×S` matrix `X = ΣZ` whose rows are
//! i.i.d. noise rows scaled by i.i.d. random volatilities `σ_t`. This crate
//! simulates such matrices and the spectra of `A = XᵀX/T`, evaluates the
//! limiting spectral density in closed form for unit-variance Student(3)
//! volatilities (with two independent numerical oracles), computes the
//! Fréchet statistics of the largest eigenvalue, and prepares market
//! returns data (renormalisation, market-mode clearing, tail fits) for
//! comparison with the model.

#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::excessive_precision,
    clippy::needless_range_loop
)]

pub mod commands;
pub mod distributions;
pub mod error;
pub mod extremes;
pub mod histogram;
pub mod io;
pub mod linalg;
pub mod market;
pub mod precision;
pub mod quadrature;
pub mod rng;
pub mod simulator;
pub mod spectral;

pub use error::{Error, Result};
