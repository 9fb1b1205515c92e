//! Confusion matrix accumulation and classical multi-label metrics.
//!
//! Rows of the confusion matrix are predicted labels (the whole label
//! vocabulary, sorted) followed by a `NO_VALUE` row for expected labels that
//! found no partner. Columns are the labels that occur as expected anywhere
//! in the dataset. Unmatched predicted labels are counted per row in a
//! separate spurious column that is only rendered on request.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Serialize, Serializer};

use crate::alignment::{AlignmentSet, ItemLabels};
use crate::error::{Error, Result};
use crate::taxonomy::ConceptId;

/// Label of the row counting unmatched expected labels.
pub const NO_VALUE: &str = "NO_VALUE";
/// Header of the optional column counting unmatched predicted labels.
pub const SPURIOUS: &str = "SPURIOUS";

/// Label scaffolding of a dataset: every label, and the expected-only subset.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Vocabulary {
    labels: BTreeSet<ConceptId>,
    expected: BTreeSet<ConceptId>,
}

impl Vocabulary {
    pub fn from_items(items: &[ItemLabels]) -> Self {
        let mut vocab = Vocabulary::default();
        for item in items {
            vocab.labels.extend(item.labels().cloned());
            vocab.expected.extend(item.expected().iter().cloned());
        }
        vocab
    }

    /// Replaces the label set with a closed class list, which must cover
    /// every label of the dataset.
    pub fn with_labels(mut self, labels: BTreeSet<ConceptId>) -> Result<Self> {
        if let Some(missing) = self.labels.difference(&labels).next() {
            return Err(Error::VocabularyMismatch(missing.to_string()));
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn labels(&self) -> &BTreeSet<ConceptId> {
        &self.labels
    }

    pub fn expected(&self) -> &BTreeSet<ConceptId> {
        &self.expected
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    rows: Vec<ConceptId>,
    cols: Vec<ConceptId>,
    /// `rows.len() + 1` rows; the last one is `NO_VALUE`.
    counts: Vec<Vec<u64>>,
    spurious: Vec<u64>,
}

impl ConfusionMatrix {
    /// All-zero matrix over the vocabulary's scaffolding.
    pub fn zeros(vocab: &Vocabulary) -> Self {
        let rows: Vec<ConceptId> = vocab.labels.iter().cloned().collect();
        let cols: Vec<ConceptId> = vocab.expected.iter().cloned().collect();
        ConfusionMatrix {
            counts: vec![vec![0; cols.len()]; rows.len() + 1],
            spurious: vec![0; rows.len()],
            rows,
            cols,
        }
    }

    /// Predicted-label rows, excluding `NO_VALUE`.
    pub fn rows(&self) -> &[ConceptId] {
        &self.rows
    }

    pub fn cols(&self) -> &[ConceptId] {
        &self.cols
    }

    /// Count in row `predicted` (or [`NO_VALUE`]) and column `expected`.
    pub fn count(&self, predicted: &str, expected: &str) -> Option<u64> {
        let r = self.row_position(predicted)?;
        let c = self.col_index(expected)?;
        Some(self.counts[r][c])
    }

    pub fn row_counts(&self, predicted: &str) -> Option<&[u64]> {
        self.row_position(predicted).map(|r| self.counts[r].as_slice())
    }

    pub fn no_value_counts(&self) -> &[u64] {
        &self.counts[self.rows.len()]
    }

    /// Unmatched predicted labels per predicted-label row.
    pub fn spurious(&self) -> &[u64] {
        &self.spurious
    }

    pub fn unmatched_predicted_total(&self) -> u64 {
        self.spurious.iter().sum()
    }

    pub fn column_sum(&self, expected: &str) -> Option<u64> {
        let c = self.col_index(expected)?;
        Some(self.counts.iter().map(|row| row[c]).sum())
    }

    /// Sum over all predicted-label rows, excluding `NO_VALUE`.
    pub fn matched_total(&self) -> u64 {
        self.counts[..self.rows.len()].iter().flatten().sum()
    }

    fn row_position(&self, label: &str) -> Option<usize> {
        if label == NO_VALUE {
            return Some(self.rows.len());
        }
        self.rows.binary_search_by(|r| r.as_str().cmp(label)).ok()
    }

    fn row_index(&self, label: &ConceptId) -> Result<usize> {
        self.rows
            .binary_search(label)
            .map_err(|_| Error::VocabularyMismatch(label.to_string()))
    }

    fn col_index(&self, label: &str) -> Option<usize> {
        self.cols.binary_search_by(|c| c.as_str().cmp(label)).ok()
    }

    /// Adds one item's alignment to the counts.
    pub fn add(&mut self, alignment: &AlignmentSet) -> Result<()> {
        let col = |label: &ConceptId| {
            self.col_index(label.as_str())
                .ok_or_else(|| Error::VocabularyMismatch(label.to_string()))
        };
        // Resolve every index before touching counts so a failure leaves the matrix unchanged.
        let mut cells = Vec::with_capacity(alignment.pairs.len() + alignment.unmatched_expected.len());
        for pair in &alignment.pairs {
            cells.push((self.row_index(&pair.predicted)?, col(&pair.expected)?));
        }
        for expected in &alignment.unmatched_expected {
            cells.push((self.rows.len(), col(expected)?));
        }
        let spurious = alignment
            .unmatched_predicted
            .iter()
            .map(|p| self.row_index(p))
            .collect::<Result<Vec<_>>>()?;

        for (r, c) in cells {
            self.counts[r][c] += 1;
        }
        for r in spurious {
            self.spurious[r] += 1;
        }
        Ok(())
    }

    /// Cellwise sum of two matrices with identical scaffolding.
    pub fn merge(&self, other: &ConfusionMatrix) -> Result<ConfusionMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::ScaffoldMismatch);
        }
        let mut out = self.clone();
        for (dst, src) in out.counts.iter_mut().zip(&other.counts) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += s;
            }
        }
        for (d, s) in out.spurious.iter_mut().zip(&other.spurious) {
            *d += s;
        }
        Ok(out)
    }

    pub fn render(&self, format: Format, spurious_column: bool) -> String {
        match format {
            Format::Csv => self.to_csv(spurious_column),
            Format::Json => self.to_json(spurious_column),
        }
    }

    fn to_csv(&self, spurious_column: bool) -> String {
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let mut header = vec![String::new()];
        header.extend(self.cols.iter().map(ToString::to_string));
        if spurious_column {
            header.push(SPURIOUS.to_string());
        }
        writer.write_record(&header).expect("in-memory csv write");
        for (r, counts) in self.counts.iter().enumerate() {
            let label = self.rows.get(r).map_or(NO_VALUE, ConceptId::as_str);
            let mut record = vec![label.to_string()];
            record.extend(counts.iter().map(ToString::to_string));
            if spurious_column {
                record.push(self.spurious.get(r).copied().unwrap_or(0).to_string());
            }
            writer.write_record(&record).expect("in-memory csv write");
        }
        let bytes = writer.into_inner().expect("in-memory csv flush");
        String::from_utf8(bytes).expect("csv output is utf-8")
    }

    fn to_json(&self, spurious_column: bool) -> String {
        let mut rows: Vec<&str> = self.rows.iter().map(ConceptId::as_str).collect();
        rows.push(NO_VALUE);
        let mut doc = serde_json::json!({
            "rows": rows,
            "cols": self.cols,
            "counts": self.counts,
            "unmatched_predicted_total": self.unmatched_predicted_total(),
        });
        if spurious_column {
            let mut spurious = self.spurious.clone();
            spurious.push(0);
            doc["spurious"] = serde_json::json!(spurious);
        }
        serde_json::to_string_pretty(&doc).expect("matrix serializes") + "\n"
    }
}

/// Accumulates alignments into a fresh matrix over `vocab`.
pub fn accumulate<'a, I>(alignments: I, vocab: &Vocabulary) -> Result<ConfusionMatrix>
where
    I: IntoIterator<Item = &'a AlignmentSet>,
{
    let mut matrix = ConfusionMatrix::zeros(vocab);
    for alignment in alignments {
        matrix.add(alignment)?;
    }
    Ok(matrix)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// A ratio that may be 0/0. Undefined values serialize as `"undef"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ratio {
    Defined(f64),
    Undefined,
}

impl Ratio {
    pub fn of(numerator: u64, denominator: u64) -> Self {
        if denominator == 0 {
            Ratio::Undefined
        } else {
            Ratio::Defined(numerator as f64 / denominator as f64)
        }
    }

    pub fn value(self) -> Option<f64> {
        match self {
            Ratio::Defined(v) => Some(v),
            Ratio::Undefined => None,
        }
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ratio::Defined(v) => write!(f, "{v}"),
            Ratio::Undefined => f.write_str("undef"),
        }
    }
}

impl Serialize for Ratio {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Ratio::Defined(v) => serializer.serialize_f64(*v),
            Ratio::Undefined => serializer.serialize_str("undef"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
    pub precision: Ratio,
    pub recall: Ratio,
    pub f1: Ratio,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassMetrics {
    pub per_class: BTreeMap<ConceptId, ClassCounts>,
    pub hamming_loss: f64,
    pub micro_accuracy: f64,
}

/// Per-class TP/FP/FN/TN from raw label sets, plus Hamming loss over
/// `|vocabulary| · |items|` and micro-averaged accuracy.
pub fn class_metrics(items: &[ItemLabels], vocabulary: &BTreeSet<ConceptId>) -> Result<ClassMetrics> {
    if items.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if vocabulary.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    if let Some(label) = items.iter().flat_map(ItemLabels::labels).find(|l| !vocabulary.contains(*l)) {
        return Err(Error::VocabularyMismatch(label.to_string()));
    }

    let n = items.len() as u64;
    let mut per_class = BTreeMap::new();
    let (mut correct, mut total) = (0u64, 0u64);
    for class in vocabulary {
        let (mut tp, mut fp, mut fn_) = (0, 0, 0);
        for item in items {
            match (item.expected().contains(class), item.predicted().contains(class)) {
                (true, true) => tp += 1,
                (false, true) => fp += 1,
                (true, false) => fn_ += 1,
                (false, false) => {}
            }
        }
        let tn = n - tp - fp - fn_;
        correct += tp + tn;
        total += n;
        per_class.insert(
            class.clone(),
            ClassCounts {
                tp,
                fp,
                fn_,
                tn,
                precision: Ratio::of(tp, tp + fp),
                recall: Ratio::of(tp, tp + fn_),
                f1: Ratio::of(2 * tp, 2 * tp + fp + fn_),
            },
        );
    }

    let mismatches: usize = items
        .iter()
        .map(|i| i.expected().symmetric_difference(i.predicted()).count())
        .sum();
    Ok(ClassMetrics {
        per_class,
        hamming_loss: mismatches as f64 / (vocabulary.len() as f64 * n as f64),
        micro_accuracy: correct as f64 / total as f64,
    })
}
