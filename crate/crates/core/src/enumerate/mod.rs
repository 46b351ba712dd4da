//! Finite group tables, PC-map enumeration and decomposition.

pub mod aut;
pub mod decompose;
pub mod mapset;
pub mod search;
pub mod standard;
pub mod table;

pub use aut::enumerate_automorphisms;
pub use decompose::{decompose_pc_map, Decomposition};
pub use mapset::MapSet;
pub use search::{enumerate_pc_maps, Constraint, SearchOutcome, SearchStats, DEFAULT_BUDGET};
pub use standard::{central_set, generate_standard_set, AutPart, StandardSet};
pub use table::{GroupTable, Ix, DEFAULT_BOUND};
