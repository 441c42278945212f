//! Operator preconditioners for Galerkin discretizations of negative-order
//! operators on simplicial meshes of curves and surfaces.
//!
//! The preconditioner for a trial space `V_T` is the matrix
//! `G = D^{-1} B D^{-T}`, where `D = <Xi, Psi>` is diagonal thanks to a
//! biorthogonal collection `Psi`, and `B` is built from an opposite-order
//! operator `B^S` on continuous piecewise linears plus a diagonal bubble
//! part. Only sparse coupling matrices ever enter the construction; the
//! bubble functions themselves appear only in [`discretization`] as test
//! oracles.

pub mod bench;
pub mod discretization;
pub mod error;
pub mod io;
pub mod linalg;
pub mod mesh;
pub mod operators;
pub mod precond;
pub mod spectral;

pub use error::{Error, Result};
