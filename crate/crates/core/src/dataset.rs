//! Evaluation inputs: item label files and precomputed similarity matrices.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::alignment::{align_item, AlignmentSet, ItemLabels};
use crate::error::{Error, Result};
use crate::matrix::{ConfusionMatrix, Vocabulary};
use crate::semsim::{similarity_matrix, Measure, MeasureDescriptor, SimilarityMatrix};
use crate::taxonomy::{ConceptId, Taxonomy};

/// Bundled example data: four virtual items labelled with animal concepts,
/// their precomputed feature-measure matrices, and a small animal taxonomy.
pub mod fixtures {
    pub const ITEMS: &str = include_str!("../fixtures/items.json");
    pub const MATRICES: &str = include_str!("../fixtures/matrices.json");
    pub const TAXONOMY: &str = include_str!("../fixtures/taxonomy.json");
}

#[derive(Debug, Serialize, Deserialize)]
struct ItemsDoc {
    items: Vec<ItemDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ItemDoc {
    id: String,
    expected: Vec<String>,
    predicted: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct MatrixDoc {
    item: String,
    measure: MeasureDescriptor,
    rows: Vec<String>,
    cols: Vec<String>,
    cells: Vec<Vec<f64>>,
}

/// Reads an items document, preserving file order.
pub fn load_items<R: Read>(source: R) -> Result<Vec<ItemLabels>> {
    let doc: ItemsDoc = serde_json::from_reader(source).map_err(|e| Error::parse("items", e))?;
    let mut seen = BTreeSet::new();
    doc.items
        .into_iter()
        .map(|item| {
            if !seen.insert(item.id.clone()) {
                return Err(Error::DuplicateItemId(item.id));
            }
            ItemLabels::new(item.id, item.expected, item.predicted)
        })
        .collect()
}

pub fn write_items(items: &[ItemLabels]) -> String {
    let doc = ItemsDoc {
        items: items
            .iter()
            .map(|i| ItemDoc {
                id: i.id().to_string(),
                expected: i.expected().iter().map(ToString::to_string).collect(),
                predicted: i.predicted().iter().map(ToString::to_string).collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("items serialize") + "\n"
}

/// Reads a JSON array of per-item matrices and returns one matrix per item,
/// in item order. Each matrix's labels must equal its item's label sets.
pub fn load_precomputed<R: Read>(source: R, items: &[ItemLabels]) -> Result<Vec<SimilarityMatrix>> {
    let docs: Vec<MatrixDoc> =
        serde_json::from_reader(source).map_err(|e| Error::parse("similarity matrices", e))?;
    let known: BTreeSet<&str> = items.iter().map(ItemLabels::id).collect();
    let mut by_item = BTreeMap::new();
    for doc in docs {
        if !known.contains(doc.item.as_str()) {
            return Err(Error::UnexpectedItem(doc.item));
        }
        if by_item.contains_key(&doc.item) {
            return Err(Error::DuplicateItemId(doc.item));
        }
        by_item.insert(doc.item.clone(), doc);
    }

    items
        .iter()
        .map(|item| {
            let doc = by_item
                .remove(item.id())
                .ok_or_else(|| Error::MissingItem(item.id().to_string()))?;
            let rows = labels(doc.rows)?;
            let cols = labels(doc.cols)?;
            for (labels, expected, side) in [
                (&rows, item.expected(), "expected"),
                (&cols, item.predicted(), "predicted"),
            ] {
                let as_set: BTreeSet<&ConceptId> = labels.iter().collect();
                if as_set.len() != labels.len() || !as_set.iter().copied().eq(expected.iter()) {
                    return Err(Error::LabelSetMismatch {
                        item: item.id().to_string(),
                        side: side.to_string(),
                    });
                }
            }
            SimilarityMatrix::new(doc.item, doc.measure, rows, cols, doc.cells)
        })
        .collect()
}

fn labels(raw: Vec<String>) -> Result<Vec<ConceptId>> {
    raw.into_iter().map(ConceptId::new).collect()
}

/// Serializes matrices in the precomputed-matrix format. Cells are rounded
/// to 3 decimals.
pub fn write_matrices(matrices: &[SimilarityMatrix]) -> String {
    let docs: Vec<MatrixDoc> = matrices
        .iter()
        .map(|m| MatrixDoc {
            item: m.item().to_string(),
            measure: m.measure().clone(),
            rows: m.rows().iter().map(ToString::to_string).collect(),
            cols: m.cols().iter().map(ToString::to_string).collect(),
            cells: m
                .cells()
                .iter()
                .map(|row| row.iter().map(|&v| round3(v)).collect())
                .collect(),
        })
        .collect();
    serde_json::to_string_pretty(&docs).expect("matrices serialize") + "\n"
}

pub fn round3(value: f64) -> f64 {
    (value * 1000.0).round() / 1000.0
}

/// Where similarity values come from.
#[derive(Debug, Clone)]
pub enum Mode {
    /// Computed from a taxonomy with a built-in measure.
    Taxonomy { taxonomy: Taxonomy, measure: Measure },
    /// Supplied per item, one matrix for each item in item order.
    Precomputed(Vec<SimilarityMatrix>),
}

#[derive(Debug, Clone)]
pub struct EvaluationRun {
    items: Vec<ItemLabels>,
    mode: Mode,
    measure: MeasureDescriptor,
}

impl EvaluationRun {
    pub fn with_taxonomy(items: Vec<ItemLabels>, taxonomy: Taxonomy, measure: Measure) -> Result<Self> {
        check_unique_ids(&items)?;
        Ok(EvaluationRun {
            items,
            measure: measure.descriptor(),
            mode: Mode::Taxonomy { taxonomy, measure },
        })
    }

    /// All matrices must share one measure descriptor; a run without items
    /// defaults to the feature measure.
    pub fn with_matrices(items: Vec<ItemLabels>, matrices: Vec<SimilarityMatrix>) -> Result<Self> {
        check_unique_ids(&items)?;
        if items.len() != matrices.len() || items.iter().zip(&matrices).any(|(i, m)| i.id() != m.item()) {
            return Err(Error::Config("matrices must follow item order one to one".into()));
        }
        let measure = matrices
            .first()
            .map_or_else(MeasureDescriptor::feature, |m| m.measure().clone());
        if let Some(odd) = matrices.iter().find(|m| *m.measure() != measure) {
            return Err(Error::MeasureMismatch(odd.item().to_string()));
        }
        Ok(EvaluationRun {
            items,
            mode: Mode::Precomputed(matrices),
            measure,
        })
    }

    pub fn items(&self) -> &[ItemLabels] {
        &self.items
    }

    pub fn mode(&self) -> &Mode {
        &self.mode
    }

    pub fn measure(&self) -> &MeasureDescriptor {
        &self.measure
    }

    pub fn vocabulary(&self) -> Vocabulary {
        Vocabulary::from_items(&self.items)
    }

    /// Per-item matrices in item order. Runs on the current rayon pool.
    pub fn similarity_matrices(&self) -> Result<Vec<SimilarityMatrix>> {
        match &self.mode {
            Mode::Precomputed(matrices) => Ok(matrices.clone()),
            Mode::Taxonomy { taxonomy, measure } => self
                .items
                .par_iter()
                .map(|item| similarity_matrix(taxonomy, item, *measure))
                .collect(),
        }
    }

    /// Aligns every item, in item order.
    pub fn alignments(&self, threshold: f64) -> Result<Vec<AlignmentSet>> {
        match &self.mode {
            Mode::Precomputed(matrices) => Ok(matrices.par_iter().map(|m| align_item(m, threshold)).collect()),
            Mode::Taxonomy { taxonomy, measure } => self
                .items
                .par_iter()
                .map(|item| similarity_matrix(taxonomy, item, *measure).map(|m| align_item(&m, threshold)))
                .collect(),
        }
    }

    /// Per-item partial matrices folded in item order.
    pub fn confusion_matrix(&self, threshold: f64, vocab: &Vocabulary) -> Result<ConfusionMatrix> {
        let partials = self
            .alignments(threshold)?
            .par_iter()
            .map(|a| crate::matrix::accumulate([a], vocab))
            .collect::<Result<Vec<_>>>()?;
        partials
            .iter()
            .try_fold(ConfusionMatrix::zeros(vocab), |acc, m| acc.merge(m))
    }
}

fn check_unique_ids(items: &[ItemLabels]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for item in items {
        if !seen.insert(item.id()) {
            return Err(Error::DuplicateItemId(item.id().to_string()));
        }
    }
    Ok(())
}
