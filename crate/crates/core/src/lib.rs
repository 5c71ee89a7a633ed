//! Bounds on the success probability of discriminating bipartite quantum
//! states with one-round and non-adaptive LOCC measurements.

pub mod analytic;
pub mod certify;
pub mod conic;
pub mod ensemble;
pub mod hierarchy;
pub mod linalg;
pub mod seesaw;
