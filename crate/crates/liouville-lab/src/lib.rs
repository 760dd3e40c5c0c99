//! Numerical laboratory for the planar Liouville equation with a Riesz
//! potential nonlinearity,
//!
//!   -lap u = V I_mu[e^{lambda u} chi_Omega] e^{lambda u},
//!   I_mu f = f * |.|^-mu,  lambda = (4 - mu)/4,
//!
//! built around closed-form bubble profiles, singular-kernel quadrature with
//! an FFT fast path checked against a brute-force oracle, and scripted
//! experiments that verify the quantitative structure of blow-up: per-bubble
//! masses of 8 pi, vanishing bubble interactions and neck energy, sup+inf
//! and driving estimates, and the exponential-integrability bound.

// `!(x > 0.0)` is the NaN-rejecting sign check and is used deliberately
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod closed_form;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod potential;
mod quadrature;
pub mod report;

pub use error::{Error, Result};
pub use grid::{
    fd_laplacian, integrate, make_grid, region_mask, Grid2D, MaskGeometry, Point, PowerTail,
    RegionMask, ScalarField,
};
