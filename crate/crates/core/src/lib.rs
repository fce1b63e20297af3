//! One-pass semi-streaming set cover (hypergraph edge cover) with exact
//! rational arithmetic.
//!
//! * [`stream`]: edge stream model and text format.
//! * [`cover`]: the per-vertex effectiveness procedure.
//! * [`sssc`]: the four-procedure summary and `(1 − ε)`-cover extraction.
//! * [`advgen`]: affine-plane adversarial instances and random instances.
//! * [`oracles`]: exact and greedy offline covers for ground truth.

pub mod advgen;
pub mod cover;
pub mod oracles;
pub mod sssc;
pub mod stream;
pub mod weight;

pub use cover::{level, CoverState, Effectiveness, FrozenCover};
pub use sssc::{run_stream, Certificate, Regime, StreamSummary};
pub use stream::{EdgeId, StreamEdge, VertexId};
pub use weight::{Rational, Weight};
