//! Desk-scale numerical lab for one question about symmetric matrices:
//! when a sequence converges only against a fixed set of test vectors
//! (weakly), which scalar functions f push that convergence through to
//! honest per-vector (strong) convergence of f applied to the terms?
//!
//! The crate supplies the pieces needed to study that question end to end:
//!
//! * [`spectral`] — a deterministic Jacobi eigensolver plus the derived
//!   calculus: functions of a matrix, spectral projections, compressions,
//!   commutator norms.
//! * [`convexity`] — scalar diagnostics: one-sided derivatives, affine
//!   chord detection, chord normalization with its gamma/beta ratio bound,
//!   and epsilon-partitions of an interval by derivative oscillation.
//! * [`lab`] — operator sequences and experiments: truncated-shift lifts
//!   that converge weakly but not strongly, decaying families that converge
//!   strongly, residual reports, multiplier classification, and a
//!   corner-versus-ambient projection instance.
//! * [`bounds`] — quantitative inequalities: block quadratic-form and norm
//!   bounds, the chord operator bound, and random scans relating the
//!   compression defect of f to the commutator norm.
//! * [`report`] / [`verify`] / [`cli`] — deterministic JSON/CSV output, a
//!   named self-check battery, and the command-line front end.
//!
//! Everything is seeded and wall-clock free: the same inputs produce the
//! same bytes on every run.

// Validation guards are written as negated comparisons on purpose:
// `!(a < b)` also catches NaN operands, which `a >= b` would wave through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Index loops that walk several parallel vectors at once stay as indices.
#![allow(clippy::needless_range_loop)]

pub mod bounds;
pub mod cli;
pub mod convexity;
pub mod error;
pub mod lab;
pub mod mat;
pub mod report;
pub mod rng;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
