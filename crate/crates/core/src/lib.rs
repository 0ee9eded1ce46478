//! Fully dynamic transitive closure built on supportive vertices.
//!
//! A handful of vertices each keep a dynamic single-source and single-sink
//! reachability structure ([`ssr`]); queries are answered from those sets when
//! possible and by a static search ([`traversal`]) otherwise. [`instance`]
//! generates and reads update/query streams for benchmarking.

pub mod graph;
pub mod instance;
pub mod reachability;
pub mod ssr;
pub mod supportive;
pub mod traversal;

pub use graph::{DiGraph, Direction, EdgeId, GraphError, UpdateObserver, VertexId};
pub use reachability::{DynamicReachability, StaticReachability};
pub use ssr::{SsrEngine, SsrKind, SsrParams};
pub use supportive::{AdjustPeriod, QueryStage, SvConfig, SvState, SvVariant};
pub use traversal::{SearchScratch, StaticAlgo};
