//! Exact solvers for optimal truthful single-item allocation when agents'
//! values (or costs) depend on everyone's private signals.

#![allow(clippy::needless_range_loop)]

pub mod binary;
pub mod duo;
pub mod gen;
pub mod io;
pub mod lp;
pub mod model;
pub mod oracle;
pub mod payments;
pub mod rational;
pub mod report;
pub mod search;
