pub mod catalog;
pub mod cli;
pub mod curvature;
pub mod error;
pub mod geodesics;
pub mod liealg;
pub mod report;
pub mod search;
pub mod subspace;
pub mod tables;
pub mod tolerances;
