//! Local MEV and MEV-interference analysis for a small account-based
//! smart-contract model.
//!
//! States hold user wallets and contract instances. The [`vm`] executes
//! transactions with all-or-nothing revert; [`engine`] searches for the
//! largest loss an adversary can inflict on a set of contracts, with and
//! without access to the rest of the state; [`harness`] checks the
//! compositionality results as executable properties.

pub mod compare;
pub mod contracts;
pub mod engine;
pub mod harness;
pub mod model;
pub mod oracles;
pub mod presets;
pub mod rational;
pub mod report;
pub mod scenario;
pub mod vm;
