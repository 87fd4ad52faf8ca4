//! Streaming dilated k-nearest-neighbor image graph construction for Vision
//! GNNs.
//!
//! The library mirrors a four-stage partitioned dataflow: a blocked squared
//! Euclidean distance kernel ([`dcm`]), per-partition top-t sorting ([`lsm`]),
//! heap-based k-way merging of partition streams ([`gmm`]), and dilated
//! neighbor selection ([`nsm`]), orchestrated by [`pipeline`]. A serial
//! reference implementation ([`oracle`]) defines exact expected output for
//! every configuration, and [`perfmodel`] provides the analytical cycle and
//! DDR traffic estimates for the equivalent accelerator.

pub mod bench;
pub mod dcm;
pub mod error;
pub mod gmm;
pub mod ingest;
pub mod lsm;
pub mod nsm;
pub mod oracle;
pub mod perfmodel;
pub mod pipeline;
pub mod synthetic;
pub mod types;

pub use error::{DigcError, Result};
pub use types::{
    entry_less, validate_problem, DistEntry, FeatureMatrix, GraphConfig, NeighborIndexMatrix,
    PartitionPlan, PosBias, Problem,
};
