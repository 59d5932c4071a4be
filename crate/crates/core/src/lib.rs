//! Pointwise-exact evaluation of curvature invariants on coordinate charts.
//!
//! The crate is organized around a small pipeline:
//!
//! * [`expr`] — closed-form scalar expressions for metric components and
//!   test fields, with exact rational constants.
//! * [`jet`] — truncated multivariate Taylor tables (derivative values up to
//!   total order 7, plus an optional deformation variable of order ≤ 2).
//!   All runtime derivatives flow through jets; there are no finite
//!   differences anywhere in the evaluation path.
//! * [`geometry`] — charts and pointwise curvature frames (Γ, Rm, Ric, R, J,
//!   P, W, C, B and covariant derivatives) computed from metric jets.
//! * [`catalog`] — the registry of scalar invariants of weight −2, −4, −6
//!   and the 17-element Riemannian basis of weight −6.
//! * [`deform`] — first and second variations along conformal families,
//!   metric paths and diffeomorphism pullbacks, plus the weak-form identity
//!   residuals built from them.
//! * [`quad`] — quadrature on closed charts and the exact Fourier toolkit
//!   on flat tori (Poisson solves, TT projection, the E construction).
//! * [`spectra`] — closed-form spectral theory at Einstein metrics.
//! * [`models`] — the manifold zoo (spheres, tori, products, perturbations,
//!   the Page metric).
//! * [`rigidity`] — flat-metric second-variation analysis.

pub mod catalog;
pub mod deform;
mod error;
pub mod expr;
pub mod geometry;
pub mod jet;
pub mod models;
pub mod quad;
pub mod rigidity;
pub mod spectra;

pub use error::{Error, Result};
