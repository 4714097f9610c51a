//! Exact graded Poisson calculus for Lie algebroids, composite geometric
//! structures, and symplectic Monge-Ampère analysis.
//!
//! The crate is organized bottom-up:
//!
//! * [`scalar`] — the exact coefficient field (sparse rational functions with
//!   rational exponents);
//! * [`graded`] — the bigraded supercommutative algebra and its even graded
//!   Poisson bracket (the "big bracket");
//! * [`algebroid`] — Lie algebroid / proto-bialgebroid structures, derived
//!   brackets, differentials, deformations, Nijenhuis torsion, Dorfman
//!   brackets, gauge transformations;
//! * [`sl2`] — the sl(2) triple attached to an inverse bivector/2-form pair
//!   and the Hodge–Lepage decomposition into primitive components;
//! * [`compat`] — bivector/form/endomorphism calculus and the composite
//!   structure checkers (Poisson, PN, PΩ, ΩN, Hitchin pairs, complementary
//!   2-forms, compatible pairs, recursion operators, modular cocycle);
//! * [`gcs`] — endomorphisms of the double `A ⊕ A*`, Courant torsion, and
//!   classification of generalized complex / product / subtangent structures;
//! * [`ma`] — symplectic Monge-Ampère structures on cotangent bundles in
//!   dimensions 2 and 3, Jacobi systems, and the named instance library.
//!
//! All arithmetic is exact: scalars are rational functions over ℚ and every
//! identity check reduces to a canonical-form zero test.

pub mod algebroid;
pub mod compat;
pub mod frame;
pub mod gcs;
pub mod graded;
pub mod ma;
pub mod sampling;
pub mod scalar;
pub mod sl2;
