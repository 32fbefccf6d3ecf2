//! Finite-scale experiments with relatively hyperbolic graphs: coned-off
//! electrifications, projection axioms, quasi-trees of metric spaces, the
//! product embedding and scale-by-scale dimension covers.

pub mod asdim;
pub mod electrify;
pub mod embedding;
pub mod error;
pub mod generators;
pub mod graph;
pub mod hyperbolicity;
pub mod projections;
pub mod quasitree;

pub use electrify::{de_electrify, electrify, ElectrifiedGraph, SubgraphFamily};
pub use error::{Error, Result};
pub use graph::{MetricGraph, PathWalk, Vertex};
pub use quasitree::{build_quasitree, EdgeRule, QuasiTreeSpace, Tagged};
