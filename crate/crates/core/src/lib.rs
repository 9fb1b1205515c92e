//! Taxonomy-driven evaluation of multi-label classifiers.
//!
//! Each item's predicted labels are aligned one-to-one with its expected
//! labels by semantic similarity over an is-a taxonomy, and the alignments
//! are counted into a confusion matrix whose rows are predicted labels (plus
//! a `NO_VALUE` row for missed expected labels) and whose columns are the
//! expected labels.
//!
//! ```
//! use semconf::dataset::{fixtures, load_items, load_precomputed};
//! use semconf::alignment::align_item;
//!
//! let items = load_items(fixtures::ITEMS.as_bytes()).unwrap();
//! let matrices = load_precomputed(fixtures::MATRICES.as_bytes(), &items).unwrap();
//! let aligned = align_item(&matrices[1], matrices[1].measure().threshold());
//! assert!(aligned
//!     .pairs
//!     .iter()
//!     .any(|p| p.expected.as_str() == "Dog" && p.predicted.as_str() == "Wolf"));
//! ```

pub mod alignment;
pub mod cli;
pub mod dataset;
mod error;
pub mod matrix;
pub mod semsim;
pub mod taxonomy;

pub use alignment::{align_item, best_partner, scan_side, AlignmentPair, AlignmentSet, ItemLabels, ScanSide};
pub use error::{Error, Result};
pub use matrix::{accumulate, class_metrics, ClassMetrics, ConfusionMatrix, Format, Ratio, Vocabulary, NO_VALUE};
pub use semsim::{
    alpha, feature_similarity, path_similarity, similarity_matrix, tversky, Measure, MeasureDescriptor,
    SimilarityMatrix,
};
pub use taxonomy::{Concept, ConceptId, Taxonomy, ValidationReport};
