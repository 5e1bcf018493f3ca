//! Exact integer arithmetic on the algebraic Mukai lattice of a K3 surface.
//!
//! The crate provides:
//! - the Mukai pairing, duality, twist and reflection isometries, and
//!   saturated orthogonal complements ([`lattice`]);
//! - the explicit Mukai-vector families over `Pic(X) = Z H` together with
//!   checkers for every numerical hypothesis they rely on ([`families`]);
//! - dimension and stratification numerics for the moduli spaces, plus a
//!   brute-force filtration oracle for the slope-stability codimension
//!   bound ([`moduli`]);
//! - enumeration of the finitely many numerical walls for pure-dimension-1
//!   vectors and the chamber decomposition of a rank-2 ample cone
//!   ([`walls`]);
//! - machine-verifiable certificates chaining twist / reflect / deform moves
//!   from a Mukai vector down to the Hilbert-scheme vector `(1, 0, 1-n)`
//!   ([`certify`]).
//!
//! All arithmetic is arbitrary precision; there is no floating-point mode.

pub mod certify;
pub mod families;
pub mod jsonio;
pub mod lattice;
pub mod linalg;
pub mod moduli;
pub mod walls;

pub use lattice::{MukaiVector, NSLattice};
