//! Exact combinatorial machinery for local Euler-class cochains of
//! fiber-oriented triangulated sphere bundles.
//!
//! The crate is organised bottom-up:
//!
//! * [`complex`] — finite graded posets with incidence signs (regular CW
//!   complexes presented combinatorially), validation, orientations.
//! * [`chain`] — sparse chains with arbitrary-precision rational
//!   coefficients, boundary and coboundary operators, inner products.
//! * [`linalg`] — fraction-free exact linear algebra: rank, solving,
//!   nullspaces, Hodge Laplacians, Betti numbers, minimum-norm preimages
//!   of the boundary operator.
//! * [`bundle`] — simplicial maps modelling sphere bundles, the per-face
//!   tilings of the fibers, their dual complexes, refinement maps between
//!   them and orientation transport.
//! * [`engine`] — winding patches and the two local Euler cochain
//!   constructions, plus pairing and cocycle checks.
//! * [`fixtures`] — generators and frozen inputs used by the test suite
//!   and the CLI `generate` subcommand.
//! * [`doc`] — JSON document schemas, canonical serialization, digests.
//!
//! All arithmetic is exact; every assertion in the pipeline is checked at
//! tolerance zero.

pub mod bundle;
pub mod chain;
pub mod complex;
pub mod doc;
pub mod engine;
pub mod fixtures;
pub mod linalg;
pub mod orientation;
