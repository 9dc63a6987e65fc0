//! Exact-arithmetic certificates for the nonexistence of invariant
//! closed G₂-structures on solvable Lie algebras.

#![allow(clippy::needless_range_loop)]

pub mod catalog;
pub mod certify;
pub mod derivations;
pub mod exact_arith;
pub mod exec;
pub mod exterior;
pub mod hitchin;
pub mod lie;
