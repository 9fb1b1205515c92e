//! Semantic similarity measures over a [`Taxonomy`] and per-item similarity
//! matrices.
//!
//! Two measures are provided:
//!
//! * [`Measure::Feature`]: the feature-based ratio model. It sums three
//!   Tversky ratios (lemmas, feature terms, radius-1 neighborhoods), each in
//!   `[0, 1]`, so scores lie in `[0, 3]`. The asymmetry weight depends on the
//!   relative depth of the two concepts.
//! * [`Measure::Path`]: a Wu-Palmer style baseline in `(0, 1]`.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::alignment::ItemLabels;
use crate::error::{Error, Result};
use crate::taxonomy::{ConceptId, Taxonomy};

/// Radius of the semantic neighborhood compared by the feature measure.
pub const NEIGHBORHOOD_RADIUS: usize = 1;

/// Identity and theoretical range of a similarity measure.
///
/// `min` scores two unrelated terms, `max` two synonyms; the default
/// alignment threshold is their midpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureDescriptor {
    pub name: String,
    pub min: f64,
    pub max: f64,
}

impl MeasureDescriptor {
    pub fn new(name: impl Into<String>, min: f64, max: f64) -> Result<Self> {
        let descriptor = MeasureDescriptor {
            name: name.into(),
            min,
            max,
        };
        descriptor.check()?;
        Ok(descriptor)
    }

    pub fn feature() -> Self {
        Measure::Feature.descriptor()
    }

    pub fn path() -> Self {
        Measure::Path.descriptor()
    }

    /// Midpoint of the measure's range; associations scoring below it are discarded.
    pub fn threshold(&self) -> f64 {
        0.5 * (self.max + self.min)
    }

    pub fn contains(&self, value: f64) -> bool {
        value >= self.min && value <= self.max
    }

    pub(crate) fn check(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(Error::InvalidMeasure("measure name is empty".into()));
        }
        if !(self.min.is_finite() && self.max.is_finite() && self.min < self.max) {
            return Err(Error::InvalidMeasure(format!(
                "{}: need finite min < max, got [{}, {}]",
                self.name, self.min, self.max
            )));
        }
        Ok(())
    }
}

/// Built-in measures computable from a taxonomy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    Feature,
    Path,
}

impl Measure {
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "feature" => Ok(Measure::Feature),
            "path" => Ok(Measure::Path),
            other => Err(Error::UnknownMeasure(other.to_string())),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Measure::Feature => "feature",
            Measure::Path => "path",
        }
    }

    pub fn descriptor(self) -> MeasureDescriptor {
        match self {
            Measure::Feature => MeasureDescriptor {
                name: self.name().into(),
                min: 0.0,
                max: 3.0,
            },
            Measure::Path => MeasureDescriptor {
                name: self.name().into(),
                min: 0.0,
                max: 1.0,
            },
        }
    }

    pub fn similarity(self, t: &Taxonomy, a: &str, b: &str) -> Result<f64> {
        match self {
            Measure::Feature => feature_similarity(t, a, b),
            Measure::Path => path_similarity(t, a, b),
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Asymmetry weight `min(depth) / (depth(a) + depth(b))`, always in `(0, 0.5]`.
pub fn alpha(t: &Taxonomy, a: &str, b: &str) -> Result<f64> {
    let (da, db) = (t.depth(a)? as f64, t.depth(b)? as f64);
    Ok(depth_weight(da, db))
}

fn depth_weight(da: f64, db: f64) -> f64 {
    da.min(db) / (da + db)
}

/// Tversky ratio model: `|A∩B| / (|A∩B| + α|A\B| + (1-α)|B\A|)`.
///
/// Two empty sets score 0.
pub fn tversky<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>, alpha: f64) -> f64 {
    let common = a.intersection(b).count() as f64;
    if common == 0.0 {
        return 0.0;
    }
    let only_a = (a.len() as f64) - common;
    let only_b = (b.len() as f64) - common;
    common / (common + alpha * only_a + (1.0 - alpha) * only_b)
}

/// Feature-based similarity in `[0, 3]`; not symmetric in general.
pub fn feature_similarity(t: &Taxonomy, a: &str, b: &str) -> Result<f64> {
    let (ia, ib) = (t.index_of(a)?, t.index_of(b)?);
    let (ca, cb) = (t.concept_at(ia), t.concept_at(ib));
    let w = depth_weight(t.depth_at(ia) as f64, t.depth_at(ib) as f64);
    let words = tversky(&ca.lemmas, &cb.lemmas, w);
    let features = tversky(&ca.features, &cb.features, w);
    let neighbors = tversky(
        &t.neighborhood_indices(ia, NEIGHBORHOOD_RADIUS),
        &t.neighborhood_indices(ib, NEIGHBORHOOD_RADIUS),
        w,
    );
    Ok(words + features + neighbors)
}

/// `2·depth(lcs) / (depth(a) + depth(b))`, symmetric, in `(0, 1]`.
pub fn path_similarity(t: &Taxonomy, a: &str, b: &str) -> Result<f64> {
    let (ia, ib) = (t.index_of(a)?, t.index_of(b)?);
    let lcs = t.lcs_index(ia, ib);
    Ok(2.0 * t.depth_at(lcs) as f64 / (t.depth_at(ia) + t.depth_at(ib)) as f64)
}

/// Similarity of every expected label (rows) against every predicted label
/// (columns) of one item. Both label lists are sorted by id.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    item: String,
    measure: MeasureDescriptor,
    rows: Vec<ConceptId>,
    cols: Vec<ConceptId>,
    cells: Vec<Vec<f64>>,
}

impl SimilarityMatrix {
    /// Validates shape, label uniqueness and cell bounds, then reorders rows
    /// and columns by id. Storage order of the input does not matter.
    pub fn new(
        item: impl Into<String>,
        measure: MeasureDescriptor,
        rows: Vec<ConceptId>,
        cols: Vec<ConceptId>,
        cells: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let item = item.into();
        measure.check()?;
        let malformed = |reason: String| Error::MalformedMatrix {
            item: item.clone(),
            reason,
        };
        if cells.len() != rows.len() {
            return Err(malformed(format!(
                "{} rows of cells for {} row labels",
                cells.len(),
                rows.len()
            )));
        }
        if let Some(bad) = cells.iter().position(|r| r.len() != cols.len()) {
            return Err(malformed(format!(
                "row {} has {} cells for {} column labels",
                rows[bad],
                cells[bad].len(),
                cols.len()
            )));
        }
        for (labels, side) in [(&rows, "row"), (&cols, "column")] {
            let unique: BTreeSet<_> = labels.iter().collect();
            if unique.len() != labels.len() {
                return Err(malformed(format!("duplicate {side} label")));
            }
        }
        for (r, row) in cells.iter().enumerate() {
            for (c, &value) in row.iter().enumerate() {
                if !measure.contains(value) {
                    return Err(Error::OutOfBoundsCell {
                        item: item.clone(),
                        row: rows[r].to_string(),
                        col: cols[c].to_string(),
                        value,
                        min: measure.min,
                        max: measure.max,
                    });
                }
            }
        }

        let mut row_order: Vec<usize> = (0..rows.len()).collect();
        row_order.sort_by(|&x, &y| rows[x].cmp(&rows[y]));
        let mut col_order: Vec<usize> = (0..cols.len()).collect();
        col_order.sort_by(|&x, &y| cols[x].cmp(&cols[y]));
        Ok(SimilarityMatrix {
            cells: row_order
                .iter()
                .map(|&r| col_order.iter().map(|&c| cells[r][c]).collect())
                .collect(),
            rows: row_order.iter().map(|&r| rows[r].clone()).collect(),
            cols: col_order.iter().map(|&c| cols[c].clone()).collect(),
            item,
            measure,
        })
    }

    pub fn item(&self) -> &str {
        &self.item
    }

    pub fn measure(&self) -> &MeasureDescriptor {
        &self.measure
    }

    /// Expected labels, sorted.
    pub fn rows(&self) -> &[ConceptId] {
        &self.rows
    }

    /// Predicted labels, sorted.
    pub fn cols(&self) -> &[ConceptId] {
        &self.cols
    }

    pub fn cells(&self) -> &[Vec<f64>] {
        &self.cells
    }

    pub fn row_index(&self, label: &str) -> Option<usize> {
        self.rows.binary_search_by(|r| r.as_str().cmp(label)).ok()
    }

    pub fn col_index(&self, label: &str) -> Option<usize> {
        self.cols.binary_search_by(|c| c.as_str().cmp(label)).ok()
    }

    /// Similarity of expected label `expected` against predicted label `predicted`.
    pub fn get(&self, expected: &str, predicted: &str) -> Result<f64> {
        let r = self
            .row_index(expected)
            .ok_or_else(|| Error::LabelNotInMatrix(expected.to_string()))?;
        let c = self
            .col_index(predicted)
            .ok_or_else(|| Error::LabelNotInMatrix(predicted.to_string()))?;
        Ok(self.cells[r][c])
    }
}

/// Computes the matrix for one item, with the expected (row) concept as the
/// first argument of the measure.
pub fn similarity_matrix(t: &Taxonomy, item: &ItemLabels, measure: Measure) -> Result<SimilarityMatrix> {
    let rows: Vec<ConceptId> = item.expected().iter().cloned().collect();
    let cols: Vec<ConceptId> = item.predicted().iter().cloned().collect();
    for label in rows.iter().chain(&cols) {
        t.index_of(label.as_str())?;
    }
    let cells = rows
        .iter()
        .map(|e| {
            cols.iter()
                .map(|p| measure.similarity(t, e.as_str(), p.as_str()))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    SimilarityMatrix::new(item.id(), measure.descriptor(), rows, cols, cells)
}
