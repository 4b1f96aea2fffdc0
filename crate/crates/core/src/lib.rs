//! Alternating continuous-time quantum walks on graphs with integral
//! Laplacian spectra.
//!
//! The crate synthesizes schedules that interleave walk evolutions
//! `exp(-iLt)` with marked-vertex phase shifts `exp(-iθ|m⟩⟨m|)` and checks
//! them by exact dense state-vector simulation. Three tasks are covered:
//!
//! - exact uniform sampling: `|m⟩ → |s⟩` for any start vertex,
//! - perfect state transfer between any two vertices,
//! - deterministic spatial search on vertex-transitive graphs, plus a
//!   dedicated route for complete bipartite graphs.
//!
//! The pipeline is `graph → spectral → depth → schedule → simulate`, with
//! [`pipelines`] wiring the stages together and [`report`] handling the
//! JSON/CSV artifacts.
//!
//! ```
//! use qwalk::graph::{Family, Graph};
//! use qwalk::pipelines::WalkContext;
//!
//! let g = Graph::build_family(Family::Johnson { n: 5, k: 2 }).unwrap();
//! let ctx = WalkContext::new(g).unwrap();
//! let report = ctx.uniform_sample(3).unwrap();
//! assert!(report.fidelity > 1.0 - 1e-8);
//! ```

pub mod depth;
pub mod error;
pub mod graph;
pub mod pipelines;
pub mod report;
pub mod schedule;
pub mod simulate;
pub mod spectral;

pub use error::{Error, Result};

/// Fidelity threshold used to declare a run exact.
pub const FIDELITY_THRESHOLD: f64 = 1.0 - 1e-8;
