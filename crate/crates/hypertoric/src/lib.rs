//! Toolkit for hypertoric arrangements and hyperKähler moment maps.
//!
//! The crate models arrangements of codimension-three affine flats
//! `H(u, λ) = { a : a(u) = λ }` in `Im ℍ ⊗ (ℝⁿ)*`, validates the integer
//! combinatorics that make the associated hyperKähler quotient smooth,
//! evaluates the multi-center harmonic potentials and metric matrices these
//! arrangements define (including infinite monomial families of centers),
//! constructs explicit zero-set witnesses for the flat torus moment map, and
//! classifies fibers of the SU(2)/SU(3) moment maps on `T*ℂⁿ`.
//!
//! Modules:
//! - [`algebra`]: quaternions, imaginary quaternions, target points, the
//!   `ν(x) = x̄ i x` map and its circle-fiber inverse.
//! - [`arrangement`]: the arrangement data model, smoothness conditions,
//!   convergence checks and integer-lattice computations.
//! - [`potential`]: potentials `V`, slice potentials, the generating
//!   function `F`, metric matrices and finite-difference residuals.
//! - [`quotient`]: quotient-level moment map, zero-set membership,
//!   fiber-point witnesses and stabilizer subtori.
//! - [`fibers`]: SU(2)/SU(3) moment map, Schur triangularization, exact
//!   fiber classification and a numeric scanning oracle.
//! - [`modification`]: arrangement transforms (modification, Taub-NUT
//!   deformation, scaling, A_k iteration, cut-region reports).

pub mod algebra;
pub mod arrangement;
pub mod context;
pub mod exact;
pub mod fibers;
pub mod lattice;
pub mod modification;
pub mod par;
pub mod potential;
pub mod quotient;
pub mod tail;

pub use algebra::{ImQuaternion, Quaternion, TargetPoint};
pub use arrangement::{Arrangement, FamilyGenerator, Flat};
pub use context::NumericContext;
