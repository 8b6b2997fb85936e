//! Joint change-point and community detection for time series of networks.
//!
//! A sequence of undirected snapshots is split into segments, each modelled
//! by its own stochastic block model partition, and the segmentation is
//! chosen to minimize a two-part description length in bits.
//!
//! ```
//! use netseg::{detect, GraphSequence, SearchConfig};
//!
//! let clique = |a: &[&'static str]| {
//!     let mut e = Vec::new();
//!     for i in 0..a.len() {
//!         for j in i + 1..a.len() {
//!             e.push((a[i], a[j]));
//!         }
//!     }
//!     e
//! };
//! let snap = [clique(&["a", "b", "c", "d"]), clique(&["e", "f", "g", "h"])].concat();
//! let seq = GraphSequence::from_edge_lists(&vec![snap; 4]).unwrap();
//! let found = detect(&seq, 1, &SearchConfig::default()).unwrap();
//! assert!(found.change_points.is_empty());
//! assert_eq!(found.segmentation.assignments()[0].num_communities(), 2);
//! ```

pub mod changepoint;
pub mod cli;
pub mod community;
pub mod error;
pub mod eval;
pub mod graph;
pub mod io;
pub mod mdl;
pub mod sbm;
pub mod seed;
pub mod simulate;
pub mod synth;

pub use changepoint::{detect, fit_known, DetectionResult};
pub use community::{detect_communities, Initializer, SearchConfig};
pub use error::{Error, Result};
pub use eval::{nmi, overall_nmi};
pub use graph::{GraphSequence, SegmentView, Snapshot};
pub use mdl::{full_mdl, segment_mdl, MdlConfig, Segmentation};
pub use sbm::CommunityAssignment;
pub use synth::{builtin_setting, generate, GroundTruth, SettingSpec};
