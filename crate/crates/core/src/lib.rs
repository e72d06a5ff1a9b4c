//! Controllability Gramians, minimum control energy, and eigenvalue-clustering
//! bounds on the smallest Gramian eigenvalue.

pub mod approx;
pub mod bounds;
pub mod capacity;
pub mod gramian;
pub mod numerics;
pub mod system;
pub mod text;
