//! Deterministic simulator for the asynchronous crash-prone LOCAL model.
//!
//! Nodes of a graph communicate through single-writer registers readable by
//! their neighbors. At each step the adversary activates a nonempty set of
//! nodes; every activated node publishes its pending state and then takes an
//! immediate snapshot of its neighbors' registers. Crashes are modeled purely
//! by omission from later steps.
//!
//! The crate provides:
//!
//! * [`engine`]: graphs, the step semantics, execution driving, runtime
//!   metering and livelock detection;
//! * [`coverfree`]: polynomial cover-free families over finite fields and the
//!   color-reduction schedule they induce;
//! * [`algorithms`]: the wait-free coloring programs (6-coloring of cycles,
//!   wait-free Linial, color saving, saving one more color) plus a known
//!   non-terminating 5-coloring program, and phase composition;
//! * [`schedulers`]: synchronous, random crash, replay and enumerated
//!   schedulings, and adversary search;
//! * [`verify`]: trace checkers, golden-trace reproduction and campaigns;
//! * [`wsb`]: signed-count combinatorics of weak symmetry breaking over
//!   small shared-memory systems.

pub mod algorithms;
pub mod cli;
pub mod color;
pub mod coverfree;
pub mod engine;
pub mod registry;
pub mod schedulers;
pub mod verify;
pub mod wsb;

pub use color::{Color, NodeId};
pub use engine::graph::{Graph, GraphError, GraphSpec};
pub use engine::{Algorithm, AlgorithmError, Configuration, EngineError, NodeState, Trace, Transition};

/// Environment variable that lifts the enumeration guards.
pub const GUARD_OVERRIDE_ENV: &str = "ASYNCLOCAL_GUARD_OVERRIDE";

/// Whether [`GUARD_OVERRIDE_ENV`] is set to `1`.
pub fn guard_override_from_env() -> bool {
    std::env::var(GUARD_OVERRIDE_ENV).map(|v| v == "1").unwrap_or(false)
}
