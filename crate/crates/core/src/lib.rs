//! Exact Fedosov star products on a symplectic coordinate chart.

pub mod cli;
pub mod euler;
pub mod fedosov;
pub mod fibrewise;
pub mod forms;
pub mod random;
pub mod report;
pub mod scalar;
pub mod suites;
pub mod symmetry;
pub mod weyl;
