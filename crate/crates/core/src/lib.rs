//! Subgraph-to-subgraph transitions (SSTs): canonical labels for local graph
//! changes, exhaustive counting of the transitions around a change, and
//! interpretable linear link predictors built on those counts.

pub mod counter;
pub mod error;
pub mod generators;
pub mod graph;
pub mod io;
pub mod labeler;
pub mod metrics;
pub mod predictor;
pub mod svm;
pub mod traits;
pub mod view;

pub use error::{Result, SstError};
pub use graph::{Graph, GraphChange, HopMetric, NodeId, NodeSet};
pub use labeler::{label_transition, LabelCache, LabelId, LabelRegistry, SstLabel, TransitionLabeler};
pub use traits::{TraitId, TraitScope, TraitSpec, TraitValue};
pub use view::ChangeView;
