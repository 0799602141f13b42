//! Operator calculus on finite-dimensional coordinate vector lattices.
//!
//! Vectors in ℝⁿ with the componentwise order model Dedekind complete Riesz
//! spaces; matrices model regular operators between them. On top of that the
//! crate builds two-sided multiplication superoperators `T ↦ ATB`, their
//! moduli, meets and joins, regular norms, and verifiers that check the
//! modulus factorization `|M_{A,B}| = M_{|A|,|B|}`, the regular-norm product
//! rule `‖M_{A,B}‖_r = ‖A‖_r‖B‖_r`, and the meet computations behind the
//! rank-one counterexample `B = f ⊗ e`.
//!
//! Identities are checked in exact rational arithmetic ([`Rational`]);
//! norms use `f64`.

pub mod corpus;
pub mod counterexample;
pub mod error;
pub mod io;
pub mod lattice;
pub mod norms;
pub mod regular_op;
pub mod report;
pub mod scalar;
pub mod superop;

pub use error::{Error, Result};
pub use lattice::{BandProjection, Component, LatticeVector, Partition};
pub use regular_op::{OperatorPartition, OperatorPartitionStrategy, PartitionStrategy, RegularOperator};
pub use report::{ClaimId, Status, VerificationReport};
pub use scalar::{Rational, Scalar, Tolerance};
pub use superop::{SuperDims, Superoperator};
