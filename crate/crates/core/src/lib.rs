//! Certified lower bounds on the convergence radii of cluster and virial
//! expansions for repulsive classical gases.

pub mod cli;
pub mod cluster;
pub mod formal_series;
pub mod numerics;
pub mod potentials;
pub mod trees;
pub mod virial;
