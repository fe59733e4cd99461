//! Eisenstein cocycles for GL(n) over an imaginary quadratic field,
//! evaluated on unit-group homology cycles and verified against direct
//! Hecke L-function summation.
//!
//! Subsystems:
//! - [`field`], [`extension`], [`embeddings`], [`instance`]: exact arithmetic
//!   in F = Q(√−D) and a degree-n extension K/F, complex embeddings, and
//!   validated configuration bundles.
//! - [`poly`]: homogeneous polynomials, the GL(n) action, partition
//!   expansions, and norm forms.
//! - [`cocycle`]: the rational (n−1)-cocycle with its exact column-selection
//!   rule.
//! - [`eisenstein`]: lattice-coset enumeration, the convergence factor, and
//!   the truncated Eisenstein cocycle.
//! - [`homology`]: the unit representation, regulator, bar-notation cycles,
//!   and cocycle/cycle pairing.
//! - [`hecke`]: direct partial and assembled Hecke L-function evaluation and
//!   the rank-2 elliptic sums.
//! - [`checks`]: named verification suites behind a common registry.

pub mod num;

pub mod field;
pub mod extension;
pub mod embeddings;
pub mod instance;

pub mod poly;
pub mod cocycle;
pub mod eisenstein;
pub mod homology;
pub mod hecke;

pub mod report;
pub mod checks;

pub const DEFAULT_PRECISION: u32 = 128;
