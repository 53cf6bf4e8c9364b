//! Exact LP-rounding for capacitated vertex cover in hypergraphs.

pub mod flow;
pub mod instance;
pub mod linalg;
pub mod lp;
pub mod oracle;
pub mod rational;
pub mod rounding;
pub mod solution;
pub mod verify;
