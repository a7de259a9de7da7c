//! Fermion decoherence in Witten's N=2 supersymmetric quantum mechanics.
//!
//! The spin (fermion) and position (boson) of the model entangle because the
//! two spin channels move in different partner potentials. This crate
//! computes the resulting decoherence factor `D(t) = ⟨φ₊(t)|φ₋(t)⟩` in three
//! independent ways:
//!
//! * closed forms for the harmonic reduction of each channel ([`harmonic`]),
//! * exact Gaussian dynamics in those quadratic wells ([`harmonic::gaussian_oracle`]),
//! * split-operator propagation on a periodic grid ([`grid`]),
//!
//! and checks the supersymmetry algebra and spectral pairing on
//! finite-difference operators.

// Negated float comparisons are used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dsl;
pub mod grid;
pub mod harmonic;
pub mod potential;
pub mod series;

pub use num_complex::Complex64;
