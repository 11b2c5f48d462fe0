//! Two-ruled hypersurfaces in Euclidean 4-space.
//!
//! A two-ruled hypersurface is the one-parameter family of 2-planes
//! f(t,s,r) = γ(t) + s·X(t) + r·Y(t). This crate reconstructs such surfaces
//! from their invariant functions (a, δ, b₁…b₄), computes striction surfaces
//! and second striction curves, classifies the singularities of
//! pseudo-non-degenerate two-ruled frontals (cuspidal edge, swallowtail,
//! cuspidal butterfly, Whitney umbrella × interval, cuspidal cross cap ×
//! interval), and builds the four developable frontals S₁–S₄ swept out by the
//! height-function envelopes of a framed curve.
//!
//! Derivatives everywhere are exact: scalar data and curves are evaluated as
//! truncated Taylor jets ([`jets`]), so the closed-form criteria and their
//! independent derivative-based recomputations can be cross-checked at
//! machine precision.

pub mod catalog;
pub mod curve;
pub mod error;
pub mod expr;
pub mod framefield;
pub mod geom;
pub mod heights;
pub mod hypersurface;
pub mod jets;
pub mod singular;
pub mod striction;

pub use error::{Error, Result};
