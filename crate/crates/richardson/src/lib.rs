//! Discrete-event simulator and analysis toolkit for two-type competing
//! growth (the two-type Richardson model) on engineered graph families.
//!
//! The crate is organized around the experiment pipeline:
//!
//! * [`graph`]: immutable bounded-degree graphs with dense ids.
//! * [`families`]: generators for the ladder, multi-spine and countable
//!   constructions, with landmark maps naming every construction vertex.
//! * [`engine`]: the competition dynamics: exponential edge clocks, the
//!   event-driven race, a literal rescanning oracle, and coupled runs.
//! * [`events`]: race classification: bridge-interception events,
//!   strangulation, spine-capture scenarios, truncated coexistence.
//! * [`bounds`]: closed-form passage-time moments, Chebyshev bounds, the
//!   coexistence union bound, and growth-condition checkers.
//! * [`harness`]: replicated Monte Carlo sweeps with reproducible parallel
//!   execution, Wilson intervals, and coupling monotonicity reports.
//! * [`cli`]: spec documents, presets, and the command implementations
//!   behind the `richardson` binary.

pub mod bounds;
pub mod cli;
pub mod engine;
pub mod events;
pub mod families;
pub mod graph;
pub mod harness;
