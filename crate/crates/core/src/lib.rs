//! Semantic trajectory analytics: compress raw moving-object samples into
//! stops at places of interest, then answer regular-expression queries with
//! attribute and time conditions over the compressed stop sequences.
//!
//! The pipeline is
//!
//! 1. [`moft::Moft`]: raw `(oid, t, x, y)` samples;
//! 2. [`stops::build_sm_moft`]: stops detected against a [`stops::Pia`];
//! 3. [`smgraph::SmGraph`]: per-object stop graph, unfolded back into a
//!    time-ordered stop sequence;
//! 4. [`resm`]: query parsing, compilation to an automaton, and matching;
//! 5. [`aggregate`]: counts, areas and temporal aggregates.

pub mod aggregate;
pub mod catalog;
pub mod geometry;
pub mod moft;
pub mod numfmt;
pub mod olap;
pub mod resm;
pub mod smgraph;
pub mod stops;
pub mod temporal;

pub use catalog::{Catalog, CatalogError};
pub use geometry::{Geometry, GeometryId, Point, SpatialIndex};
pub use moft::{Moft, ObjectId, Trajectory};
pub use olap::Olap;
pub use resm::{matching_oids, parse, Resm, ResmAutomaton};
pub use smgraph::{AsmGraph, SmGraph, StopEvent};
pub use stops::{build_sm_moft, detect_moves, detect_stops, Pia, PoI, SmMoft, SmRecord};
pub use temporal::Interval;
