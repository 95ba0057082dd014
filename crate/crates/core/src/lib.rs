//! Bilevel pricing and interdiction solver built on diagram reformulations.
//!
//! The leader sets tolls (or interdicts items); the follower solves a
//! combinatorial problem over the net values and breaks ties in the leader's
//! favor. The solver reformulates the bilevel program as a single-level MILP
//! whose follower-rationality constraints come from longest-path inequalities
//! over a layered diagram, refined lazily inside branch and bound.

pub mod batch;
pub mod diagram;
pub mod difficulty;
pub mod domain;
pub mod driver;
pub mod error;
pub mod generators;
pub mod milp;
pub mod model;
pub mod oracle;
pub mod problems;
pub mod reformulate;

pub use diagram::{Diagram, DiagramArc, DiagramKind, DiagramNode, GroupPartition, NodeState};
pub use domain::{
    FollowerProblem, FollowerSolution, ItemSet, Payload, PricingInstance, Sense, SolveResult,
    SolveStats, SolveStatus, TollVector,
};
pub use error::{Error, Result};
