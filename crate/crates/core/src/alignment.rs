//! One-to-one alignment of predicted labels with expected labels.
//!
//! The smaller label set (predicted when `N_P <= N_E`, expected otherwise)
//! is the scan side: each of its labels seeks the partner with the highest
//! similarity on the other side. Partners scoring below the measure's
//! threshold are never considered. When two scan labels want the same
//! partner, the higher similarity keeps it and the loser moves on to its
//! next best candidate.
//!
//! Conflicts are resolved by proposal and displacement: free scan labels
//! propose in id order to their next untried partner, and an occupied
//! partner switches only to a strictly better proposer. Equal similarities
//! go to the smaller scan id. Every tie rule is by id, so the outcome
//! depends only on ids and similarity values, never on storage order.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::semsim::SimilarityMatrix;
use crate::taxonomy::ConceptId;

/// Expected and predicted label sets of one evaluated item.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ItemLabels {
    id: String,
    expected: BTreeSet<ConceptId>,
    predicted: BTreeSet<ConceptId>,
}

impl ItemLabels {
    /// Fails with [`Error::DuplicateLabel`] when a label repeats within one set.
    pub fn new<E, P>(id: impl Into<String>, expected: E, predicted: P) -> Result<Self>
    where
        E: IntoIterator,
        E::Item: Into<String>,
        P: IntoIterator,
        P::Item: Into<String>,
    {
        let id = id.into();
        let collect = |labels: Vec<String>| -> Result<BTreeSet<ConceptId>> {
            let mut set = BTreeSet::new();
            for label in labels {
                let label = ConceptId::new(label)?;
                if set.contains(&label) {
                    return Err(Error::DuplicateLabel {
                        item: id.clone(),
                        label: label.to_string(),
                    });
                }
                set.insert(label);
            }
            Ok(set)
        };
        let expected = collect(expected.into_iter().map(Into::into).collect())?;
        let predicted = collect(predicted.into_iter().map(Into::into).collect())?;
        Ok(ItemLabels {
            id,
            expected,
            predicted,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn expected(&self) -> &BTreeSet<ConceptId> {
        &self.expected
    }

    pub fn predicted(&self) -> &BTreeSet<ConceptId> {
        &self.predicted
    }

    /// Every label of the item, expected or predicted.
    pub fn labels(&self) -> impl Iterator<Item = &ConceptId> {
        self.expected.union(&self.predicted)
    }
}

/// Which label set looks for partners.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanSide {
    /// Each expected label seeks a predicted partner (`N_P > N_E`).
    Expected,
    /// Each predicted label seeks an expected partner (`N_P <= N_E`).
    Predicted,
}

pub fn scan_side(n_predicted: usize, n_expected: usize) -> ScanSide {
    if n_predicted > n_expected {
        ScanSide::Expected
    } else {
        ScanSide::Predicted
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlignmentPair {
    pub expected: ConceptId,
    pub predicted: ConceptId,
    pub similarity: f64,
}

/// The matching of one item plus the labels left without a partner.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlignmentSet {
    pub item: String,
    /// Sorted by (expected, predicted).
    pub pairs: Vec<AlignmentPair>,
    pub unmatched_expected: BTreeSet<ConceptId>,
    pub unmatched_predicted: BTreeSet<ConceptId>,
}

/// Read-only view of a matrix from the scan side: `scan` indexes the
/// scanning labels, `partner` the other side.
struct Oriented<'a> {
    m: &'a SimilarityMatrix,
    side: ScanSide,
}

impl Oriented<'_> {
    fn scan_len(&self) -> usize {
        match self.side {
            ScanSide::Expected => self.m.rows().len(),
            ScanSide::Predicted => self.m.cols().len(),
        }
    }

    fn partners(&self) -> &[ConceptId] {
        match self.side {
            ScanSide::Expected => self.m.cols(),
            ScanSide::Predicted => self.m.rows(),
        }
    }

    fn scan_index(&self, label: &str) -> Option<usize> {
        match self.side {
            ScanSide::Expected => self.m.row_index(label),
            ScanSide::Predicted => self.m.col_index(label),
        }
    }

    fn sim(&self, scan: usize, partner: usize) -> f64 {
        match self.side {
            ScanSide::Expected => self.m.cells()[scan][partner],
            ScanSide::Predicted => self.m.cells()[partner][scan],
        }
    }

    /// Acceptable partners of `scan`, best first; equal scores by id.
    fn preferences(&self, scan: usize, threshold: f64) -> Vec<usize> {
        let mut prefs: Vec<usize> = (0..self.partners().len())
            .filter(|&p| self.sim(scan, p) >= threshold)
            .collect();
        prefs.sort_by(|&x, &y| self.sim(scan, y).total_cmp(&self.sim(scan, x)).then(x.cmp(&y)));
        prefs
    }
}

/// The best non-excluded partner of scan label `label` scoring at least
/// `threshold`, or `None` when no partner qualifies.
pub fn best_partner(
    label: &str,
    m: &SimilarityMatrix,
    side: ScanSide,
    excluded: &BTreeSet<ConceptId>,
    threshold: f64,
) -> Result<Option<(ConceptId, f64)>> {
    let view = Oriented { m, side };
    let scan = view
        .scan_index(label)
        .ok_or_else(|| Error::LabelNotInMatrix(label.to_string()))?;
    Ok(view
        .preferences(scan, threshold)
        .into_iter()
        .find(|&p| !excluded.contains(&view.partners()[p]))
        .map(|p| (view.partners()[p].clone(), view.sim(scan, p))))
}

/// Aligns one item's labels; see the module documentation for the procedure.
pub fn align_item(m: &SimilarityMatrix, threshold: f64) -> AlignmentSet {
    let side = scan_side(m.cols().len(), m.rows().len());
    let view = Oriented { m, side };
    let n_scan = view.scan_len();

    let prefs: Vec<Vec<usize>> = (0..n_scan).map(|s| view.preferences(s, threshold)).collect();
    let mut next = vec![0usize; n_scan];
    let mut holder: Vec<Option<usize>> = vec![None; view.partners().len()];
    let mut free: BTreeSet<usize> = (0..n_scan).collect();

    while let Some(scan) = free.pop_first() {
        let Some(&partner) = prefs[scan].get(next[scan]) else {
            continue; // exhausted: stays unmatched
        };
        next[scan] += 1;
        match holder[partner] {
            None => holder[partner] = Some(scan),
            Some(incumbent) => {
                let (challenger, current) = (view.sim(scan, partner), view.sim(incumbent, partner));
                if challenger > current || (challenger == current && scan < incumbent) {
                    holder[partner] = Some(scan);
                    free.insert(incumbent);
                } else {
                    free.insert(scan);
                }
            }
        }
    }

    let mut pairs = Vec::new();
    for (partner, held) in holder.iter().enumerate() {
        if let Some(scan) = *held {
            let (r, c) = match side {
                ScanSide::Expected => (scan, partner),
                ScanSide::Predicted => (partner, scan),
            };
            pairs.push(AlignmentPair {
                expected: m.rows()[r].clone(),
                predicted: m.cols()[c].clone(),
                similarity: m.cells()[r][c],
            });
        }
    }
    pairs.sort_by(|a, b| (&a.expected, &a.predicted).cmp(&(&b.expected, &b.predicted)));

    let matched_e: BTreeSet<&ConceptId> = pairs.iter().map(|p| &p.expected).collect();
    let matched_p: BTreeSet<&ConceptId> = pairs.iter().map(|p| &p.predicted).collect();
    AlignmentSet {
        item: m.item().to_string(),
        unmatched_expected: m.rows().iter().filter(|r| !matched_e.contains(r)).cloned().collect(),
        unmatched_predicted: m.cols().iter().filter(|c| !matched_p.contains(c)).cloned().collect(),
        pairs,
    }
}
