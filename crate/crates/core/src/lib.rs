//! Exact verification of degenerations between complex three-dimensional Novikov algebras.

pub mod algebra;
pub mod catalog;
pub mod cli;
pub mod degeneration;
pub mod exactnum;
pub mod hasse;
pub mod linalg;
pub mod symring;
