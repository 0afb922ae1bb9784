//! Two pipelines over a small proof-engineering workbench.
//!
//! * [`matrix`]: exact square-matrix algorithms (unitriangular inversion,
//!   Strassen multiplication, determinant, rank) on an abstract dense
//!   representation and an executable list-of-rows one, over any [`Field`].
//! * [`script`], [`features`], [`cluster`]: parse proof scripts, turn each
//!   lemma into a fixed-width feature vector, cluster repeatedly and report
//!   lemma sets that recur.
//!
//! [`fixtures`] generates a synthetic corpus with planted lemma families.

pub mod cluster;
pub mod features;
pub mod field;
pub mod fixtures;
pub mod matrix;
pub mod script;

pub use field::{CountingField, Field, Fp, PrimeField, RationalField, Rationals};
pub use matrix::{AbstractMatrix, MatrixError, SeqMatrix};

pub type Rational = num_rational::BigRational;

/// Dense matrix over the rationals.
pub type QMatrix = AbstractMatrix<Rational>;
/// Dense matrix over a prime field.
pub type GfMatrix = AbstractMatrix<Fp>;
/// List-of-rows matrix over the rationals.
pub type QSeqMatrix = SeqMatrix<Rational>;
/// List-of-rows matrix over a prime field.
pub type GfSeqMatrix = SeqMatrix<Fp>;

/// Clustering result over double-precision features.
pub type Partition = cluster::Partition<f64>;
