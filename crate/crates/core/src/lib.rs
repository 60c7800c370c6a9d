//! Numerics for the perturbed principal submodules ⟨z₁ᵏ − εe^{it}⟩ of the
//! two-variable Drury-Arveson space: orthonormal frames on coefficient
//! chains, parallel-transport frequencies and monodromy phases, the
//! compressed coordinate shifts with their conjugation and compactness
//! profiles, Besov-Sobolev projection smoothness diagnostics, and the
//! generalized z₁ᵏz₂ˡ chain frequencies.
//!
//! Everything explicit is cross-validated: closed forms against direct
//! series summation with certified geometric tail bounds, floating point
//! against exact big-rational arithmetic where the quantities are rational,
//! and weighted-shift normal forms against raw inner products.  The
//! `verify` module bundles the cross-checks into a deterministic pass/fail
//! suite; the `da-perturb` binary exposes each module as a subcommand with
//! CSV/JSON output.

pub mod cli;
pub mod error;
pub mod export;
pub mod frames;
pub mod general;
pub mod series;
pub mod sobolev;
pub mod toeplitz;
pub mod transport;
pub mod verify;

pub use error::{Error, Result};
