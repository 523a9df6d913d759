//! Exact computer algebra for species with potential on weighted quivers,
//! together with the triangulated-surface constructions that produce them.
//!
//! The crate is organized along the data it manipulates:
//!
//! * [`scalars`] — rationals, the quadratic extension with `v^2 = -1`, and
//!   cyclic Galois groups as residue classes;
//! * [`wquiver`] — weighted quivers, modulating labels, the matrix
//!   correspondence and quiver mutation;
//! * [`pathalg`] — the complete path algebra: normalized paths, cyclic
//!   equivalence, cyclic derivatives, projections and substitutions;
//! * [`sp`] — species-with-potential bundles: premutation, reduction,
//!   mutation, Jacobian truncations, right-equivalence checking;
//! * [`surface`] — marked surfaces with order-2 orbifold points, puzzle-piece
//!   assembly, tagged triangulations, potentials and flips;
//! * [`formal`] — a decoration-free potential shadow for weight tuples
//!   outside the quadratic range.

pub mod error;
pub mod fixtures;
pub mod formal;
pub mod pathalg;
pub mod scalars;
pub mod sp;
pub mod surface;
pub mod wquiver;
