//! Causal execution graph discovery and unification for business-process event logs.
//!
//! The pipeline runs in four stages:
//!
//! 1. [`event_log`] parses CSV or XES logs and groups traces into variants and
//!    activity-set partitions.
//! 2. [`discovery`] builds one causal execution (CX) graph per partition using a
//!    DirectLiNGAM-style backend constrained by a temporal-precedence blacklist.
//! 3. [`unification`] folds the per-partition graphs into a single unified graph
//!    (U-CX) whose AND / XOR / OR / exhaustive-OR gateways record how the causal
//!    flow alternates across partitions.
//! 4. [`simplify`] optionally rewrites non-exhaustive OR gateways as factored
//!    XOR/AND formulas.
//!
//! [`verify`] holds executable soundness and completeness checkers, a brute-force
//! classification oracle and a synthetic log generator with known ground truth.
//! [`cli`] wires everything into the commands exposed by the `ucx` binary.
//!
//! ```
//! use ucx::cx_model::{CxGraph, Direction};
//! use ucx::unification::unify_graphs;
//!
//! let g1 = CxGraph::from_edges(["a", "b", "c"], [("a", "b"), ("a", "c")]).unwrap();
//! let g2 = CxGraph::from_edges(["a", "f"], [("a", "f")]).unwrap();
//! let g3 = CxGraph::from_edges(["f", "g", "h"], [("f", "g"), ("f", "h")]).unwrap();
//!
//! let unified = unify_graphs(&[g1, g2, g3], Direction::Split).unwrap();
//! assert_eq!(unified.graph.gateways().count(), 3);
//! assert_eq!(unified.graph.edges().count(), 8);
//! ```

pub mod cli;
pub mod cx_model;
pub mod discovery;
pub mod event_log;
pub mod fixtures;
pub mod simplify;
pub mod unification;
pub mod verify;


pub use cx_model::{CxGraph, Direction, GatewayKind, UcxGraph};
pub use discovery::{discover_cx, DiscoveryConfig};
pub use event_log::{EventLog, Partition, Variant};
pub use unification::{unify_graphs, unify_log};
