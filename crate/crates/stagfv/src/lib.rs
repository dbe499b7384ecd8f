//! Staggered finite-volume solver for the compressible Euler equations on
//! hybrid unstructured meshes.
//!
//! Scalars (density, internal energy, pressure) live on primal cells;
//! velocities live on faces, i.e. on a virtual dual mesh of diamond cells.
//! Dual convection fluxes are reconstructed *algebraically* from the primal
//! mass fluxes through exact per-kind coefficient tables, so the scheme
//! needs no dual-mesh geometry and mass and momentum stay consistent on any
//! supported cell kind (triangles, quadrangles, tetrahedra, hexahedra,
//! prisms, pyramids) and on conforming hybrid meshes mixing them.
//!
//! Crate layout:
//! - [`geom`]: small exact-geometry kernel (areas, volumes, clipping);
//! - [`mesh`]: hybrid mesh with dual-volume bookkeeping, generators, I/O;
//! - [`dualflux`]: dual-flux coefficient tables and their least-squares
//!   derivation and verification;
//! - [`operators`]: discrete divergence, gradient and convection operators;
//! - [`solver`]: the explicit time stepper with boundary conditions;
//! - [`verify`]: shock reference solutions, error norms, convergence and
//!   weak-consistency (Lax–Wendroff) harnesses.

pub mod dualflux;
pub mod geom;
pub mod mesh;
pub mod operators;
pub mod solver;
pub mod verify;
