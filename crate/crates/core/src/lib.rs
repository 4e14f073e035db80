//! Numerical renormalization of critical commuting pairs.
//!
//! Modules, bottom-up:
//!
//! - [`chebapprox`]: Chebyshev series algebra and analyticity diagnostics.
//! - [`combinatorics`]: continued fractions, Gauss map, bounded-type words.
//! - [`pairs`]: the commuting-pair data model.
//! - [`circle_maps`]: critical circle lifts, rotation numbers, tuning, pair extraction.
//! - [`renorm`]: heights and the renormalization operator.
//! - [`analysis`]: pair metrics, contraction fits and the experiment suite.
//! - [`cli`]: configuration and the experiment runner behind `renorm-lab`.

// NaN must fail the range checks, so they are written as negated comparisons.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod chebapprox;
pub mod circle_maps;
pub mod cli;
pub mod combinatorics;
pub mod error;
pub mod pairs;
pub mod renorm;

pub use chebapprox::{compose_refit, ChebSeries};
pub use circle_maps::{extract_pair, rotation_number, tune_omega, CircleLift, RigidRotation};
pub use combinatorics::{CfWord, SymbolWord};
pub use error::{Error, Result};
pub use pairs::{CommutingPair, CriticalMap, ValidationReport};
pub use renorm::{height, renorm_orbit, renormalize, OrbitRecord, RenormStep};
