//! Effective loss and depolarizing-error rates for loss- and failure-tolerant
//! graph-state schemes: +-cluster bonding, tree-cluster indirect measurement and
//! parity-state re-encoding.
//!
//! Three engines cross-check each other: closed-form rates ([`rates`]), a
//! Monte-Carlo protocol simulator ([`mc`]) and an exact stabilizer tableau
//! ([`stabilizer`]). [`sweep`] adds grids, break-even search and tree-shape
//! optimisation on top of the analytic engine, and [`verify`] runs the
//! cross-engine checks as one suite.

pub mod error;
pub mod mc;
pub mod rates;
pub mod stabilizer;
pub mod sweep;
pub mod verify;

pub use error::{Error, Result};
