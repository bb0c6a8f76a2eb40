//! Selection of XOR package bids for multi-period electricity auctions under
//! price uncertainty.

pub mod agents;
pub mod bids;
pub mod experiments;
pub mod market;
pub mod scenarios;
pub mod solver;
