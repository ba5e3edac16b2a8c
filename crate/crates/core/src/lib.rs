//! Exact computational homological algebra over finite groups.

pub mod linalg;
pub mod fgab;
pub mod grpmod;
pub mod complexes;
pub mod resolutions;
pub mod spectral;
pub mod dsl;
pub mod scenario;
pub mod diagrams;
pub mod cli;
mod lattice;
