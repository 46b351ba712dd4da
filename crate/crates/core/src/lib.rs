//! Exact arithmetic over small finite fields, unitriangular matrix groups
//! `UT(n, F_q)`, and tools for constructing, enumerating and classifying
//! commutator-preserving bijections (PC-maps) of those groups.

pub mod acceptance;
pub mod cli;
pub mod error;
pub mod field;
pub mod matrix;
pub mod factor;
pub mod identities;
pub mod pcmap;
pub mod enumerate;

pub use error::{Error, Result};
pub use field::{Field, FieldElem};
pub use matrix::{TriangularInvertible, UTElement};
pub use pcmap::{CentralFunction, PCMap};
