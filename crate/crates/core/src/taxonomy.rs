//! The is-a taxonomy: a single-rooted DAG of concepts under hypernym edges.
//!
//! A [`Taxonomy`] is immutable once built. Loading validates the structure
//! (unique ids, known parents, acyclicity, a single root reachable from every
//! concept) and precomputes depth and hypernym closure for every concept, so
//! all queries afterwards are read-only and can be shared across threads.
//!
//! Concepts are stored sorted by id, which makes "lexicographically smallest
//! id" tie-breaking equivalent to "smallest index" everywhere in this module.

use std::borrow::Borrow;
use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Identifier of a concept (and of a class label).
///
/// Non-empty, no leading or trailing whitespace, compared bytewise.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ConceptId(String);

impl ConceptId {
    pub fn new(id: impl Into<String>) -> Result<Self> {
        let id = id.into();
        if id.is_empty() || id.trim() != id {
            return Err(Error::InvalidId(id));
        }
        Ok(ConceptId(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for ConceptId {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        ConceptId::new(value)
    }
}

impl From<ConceptId> for String {
    fn from(id: ConceptId) -> Self {
        id.0
    }
}

impl Borrow<str> for ConceptId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl AsRef<str> for ConceptId {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ConceptId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// One node of the taxonomy.
#[derive(Debug, Clone, PartialEq)]
pub struct Concept {
    pub id: ConceptId,
    /// Synonym words naming the concept.
    pub lemmas: BTreeSet<String>,
    pub gloss: Option<String>,
    /// Direct hypernyms.
    pub parents: BTreeSet<ConceptId>,
    /// Parts, functions and attributes, merged into one set.
    pub features: BTreeSet<String>,
}

impl Concept {
    /// A concept with a single lemma equal to its id and no gloss or features.
    pub fn new(id: &str, parents: &[&str]) -> Result<Self> {
        Ok(Concept {
            id: ConceptId::new(id)?,
            lemmas: BTreeSet::from([id.to_string()]),
            gloss: None,
            parents: parents
                .iter()
                .map(|p| ConceptId::new(*p))
                .collect::<Result<_>>()?,
            features: BTreeSet::new(),
        })
    }

    pub fn with_lemmas<I, S>(mut self, lemmas: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.lemmas = lemmas.into_iter().map(Into::into).collect();
        self
    }

    pub fn with_features<I, S>(mut self, features: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.features = features.into_iter().map(Into::into).collect();
        self
    }

    pub fn with_gloss(mut self, gloss: impl Into<String>) -> Self {
        self.gloss = Some(gloss.into());
        self
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct TaxonomyDoc {
    root: String,
    concepts: Vec<ConceptDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ConceptDoc {
    id: String,
    lemmas: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gloss: Option<String>,
    #[serde(default)]
    parents: Vec<String>,
    #[serde(default)]
    features: Vec<String>,
}

/// Validated, immutable is-a taxonomy with cached depth and hypernym closures.
#[derive(Debug, Clone)]
pub struct Taxonomy {
    concepts: Vec<Concept>,
    root: usize,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    depth: Vec<usize>,
    ancestors: Vec<BTreeSet<usize>>,
}

impl Taxonomy {
    /// Parses and validates a JSON taxonomy document.
    pub fn from_reader<R: Read>(source: R) -> Result<Self> {
        let doc: TaxonomyDoc =
            serde_json::from_reader(source).map_err(|e| Error::parse("taxonomy", e))?;
        let root = ConceptId::new(doc.root)?;
        let concepts = doc
            .concepts
            .into_iter()
            .map(|c| {
                Ok(Concept {
                    id: ConceptId::new(c.id)?,
                    lemmas: c.lemmas.into_iter().collect(),
                    gloss: c.gloss,
                    parents: c
                        .parents
                        .into_iter()
                        .map(ConceptId::new)
                        .collect::<Result<_>>()?,
                    features: c.features.into_iter().collect(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_concepts(root, concepts)
    }

    pub fn from_json_str(source: &str) -> Result<Self> {
        Self::from_reader(source.as_bytes())
    }

    /// Builds a taxonomy from already-typed concepts, applying the same
    /// validation as [`Taxonomy::from_reader`].
    pub fn from_concepts(root: ConceptId, mut concepts: Vec<Concept>) -> Result<Self> {
        concepts.sort_by(|a, b| a.id.cmp(&b.id));
        if let Some(w) = concepts.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(Error::DuplicateId(w[0].id.to_string()));
        }
        let lookup = |id: &ConceptId| concepts.binary_search_by(|c| c.id.cmp(id)).ok();

        let root_idx = lookup(&root).ok_or_else(|| Error::UnknownConcept(root.to_string()))?;

        let mut parents = vec![Vec::new(); concepts.len()];
        let mut children = vec![Vec::new(); concepts.len()];
        for (idx, concept) in concepts.iter().enumerate() {
            if concept.lemmas.is_empty() {
                return Err(Error::InvalidConcept {
                    concept: concept.id.to_string(),
                    reason: "lemma set is empty".into(),
                });
            }
            for parent in &concept.parents {
                let p = lookup(parent).ok_or_else(|| Error::UnknownParent {
                    concept: concept.id.to_string(),
                    parent: parent.to_string(),
                })?;
                parents[idx].push(p);
                children[p].push(idx);
            }
        }

        let (order, remaining) = topological_order(&parents);
        if let Some(cycle) = find_cycle(&parents, &remaining) {
            return Err(Error::Cycle(
                cycle.into_iter().map(|i| concepts[i].id.to_string()).collect(),
            ));
        }
        if !parents[root_idx].is_empty() {
            return Err(Error::InvalidConcept {
                concept: root.to_string(),
                reason: "the root must not have parents".into(),
            });
        }
        if let Some(orphan) = (0..concepts.len()).find(|&i| i != root_idx && parents[i].is_empty()) {
            return Err(Error::UnreachableRoot(concepts[orphan].id.to_string()));
        }

        let mut depth = vec![0usize; concepts.len()];
        let mut ancestors = vec![BTreeSet::new(); concepts.len()];
        for &node in &order {
            depth[node] = 1 + parents[node].iter().map(|&p| depth[p]).max().unwrap_or(0);
            let mut closure = BTreeSet::new();
            for &p in &parents[node] {
                closure.insert(p);
                closure.extend(ancestors[p].iter().copied());
            }
            ancestors[node] = closure;
        }

        Ok(Taxonomy {
            concepts,
            root: root_idx,
            parents,
            children,
            depth,
            ancestors,
        })
    }

    /// Serializes back to the JSON document format, concepts sorted by id.
    pub fn to_json(&self) -> String {
        let doc = TaxonomyDoc {
            root: self.root().to_string(),
            concepts: self
                .concepts
                .iter()
                .map(|c| ConceptDoc {
                    id: c.id.to_string(),
                    lemmas: c.lemmas.iter().cloned().collect(),
                    gloss: c.gloss.clone(),
                    parents: c.parents.iter().map(ToString::to_string).collect(),
                    features: c.features.iter().cloned().collect(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("taxonomy document serializes") + "\n"
    }

    pub fn len(&self) -> usize {
        self.concepts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.concepts.is_empty()
    }

    pub fn root(&self) -> &ConceptId {
        &self.concepts[self.root].id
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index_of(id).is_ok()
    }

    /// All concepts, sorted by id.
    pub fn concepts(&self) -> &[Concept] {
        &self.concepts
    }

    pub fn concept(&self, id: &str) -> Result<&Concept> {
        Ok(&self.concepts[self.index_of(id)?])
    }

    /// Node count of the longest root-to-concept chain; the root has depth 1.
    pub fn depth(&self, id: &str) -> Result<usize> {
        Ok(self.depth[self.index_of(id)?])
    }

    pub fn max_depth(&self) -> usize {
        self.depth.iter().copied().max().unwrap_or(0)
    }

    /// All direct and indirect parents of a concept, excluding the concept itself.
    pub fn hypernym_closure(&self, id: &str) -> Result<BTreeSet<&ConceptId>> {
        let idx = self.index_of(id)?;
        Ok(self.ancestors[idx].iter().map(|&i| &self.concepts[i].id).collect())
    }

    /// All direct and indirect descendants of a concept, excluding the concept itself.
    pub fn hyponym_closure(&self, id: &str) -> Result<BTreeSet<&ConceptId>> {
        let idx = self.index_of(id)?;
        let mut seen = BTreeSet::new();
        let mut stack = self.children[idx].clone();
        while let Some(node) = stack.pop() {
            if seen.insert(node) {
                stack.extend(self.children[node].iter().copied());
            }
        }
        Ok(seen.into_iter().map(|i| &self.concepts[i].id).collect())
    }

    /// Lowest common subsumer: the deepest concept that is an ancestor-or-self
    /// of both inputs. Equal depths resolve to the smallest id.
    pub fn lcs(&self, a: &str, b: &str) -> Result<&ConceptId> {
        let (a, b) = (self.index_of(a)?, self.index_of(b)?);
        Ok(&self.concepts[self.lcs_index(a, b)].id)
    }

    /// The concept plus everything within `radius` is-a steps, following
    /// edges in either direction. A radius of 0 yields just the concept.
    pub fn neighborhood(&self, id: &str, radius: usize) -> Result<BTreeSet<&ConceptId>> {
        let idx = self.index_of(id)?;
        Ok(self
            .neighborhood_indices(idx, radius)
            .into_iter()
            .map(|i| &self.concepts[i].id)
            .collect())
    }

    /// Quality report: concept count, maximum depth, and per-concept warnings
    /// for data that degrades similarity scores.
    pub fn validate(&self) -> ValidationReport {
        let mut warnings = Vec::new();
        for concept in &self.concepts {
            if concept.features.is_empty() {
                warnings.push(ValidationWarning {
                    concept: concept.id.clone(),
                    kind: WarningKind::EmptyFeatures,
                });
            }
            if concept.gloss.as_deref().is_none_or(|g| g.trim().is_empty()) {
                warnings.push(ValidationWarning {
                    concept: concept.id.clone(),
                    kind: WarningKind::MissingGloss,
                });
            }
        }
        warnings.sort();
        ValidationReport {
            concept_count: self.concepts.len(),
            max_depth: self.max_depth(),
            structural_errors: 0,
            warnings,
        }
    }

    pub(crate) fn index_of(&self, id: &str) -> Result<usize> {
        self.concepts
            .binary_search_by(|c| c.id.as_str().cmp(id))
            .map_err(|_| Error::UnknownConcept(id.to_string()))
    }

    pub(crate) fn concept_at(&self, idx: usize) -> &Concept {
        &self.concepts[idx]
    }

    pub(crate) fn depth_at(&self, idx: usize) -> usize {
        self.depth[idx]
    }

    pub(crate) fn lcs_index(&self, a: usize, b: usize) -> usize {
        let with_self = |i: usize| {
            let mut s = self.ancestors[i].clone();
            s.insert(i);
            s
        };
        let (sa, sb) = (with_self(a), with_self(b));
        // Ascending index order plus strict `>` keeps the smallest id on depth ties.
        let mut best = self.root;
        for &c in sa.intersection(&sb) {
            if self.depth[c] > self.depth[best] || (self.depth[c] == self.depth[best] && c < best) {
                best = c;
            }
        }
        best
    }

    pub(crate) fn neighborhood_indices(&self, idx: usize, radius: usize) -> BTreeSet<usize> {
        let mut seen = BTreeSet::from([idx]);
        let mut queue = VecDeque::from([(idx, 0usize)]);
        while let Some((node, dist)) = queue.pop_front() {
            if dist == radius {
                continue;
            }
            for &next in self.parents[node].iter().chain(&self.children[node]) {
                if seen.insert(next) {
                    queue.push_back((next, dist + 1));
                }
            }
        }
        seen
    }
}

/// Kahn's algorithm over parent edges. Returns the topological order (parents
/// before children) and the nodes left over, which are exactly those on or
/// below a cycle.
fn topological_order(parents: &[Vec<usize>]) -> (Vec<usize>, Vec<usize>) {
    let n = parents.len();
    let mut pending: Vec<usize> = parents.iter().map(Vec::len).collect();
    let mut children = vec![Vec::new(); n];
    for (node, ps) in parents.iter().enumerate() {
        for &p in ps {
            children[p].push(node);
        }
    }
    let mut ready: BTreeSet<usize> = (0..n).filter(|&i| pending[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(node) = ready.pop_first() {
        order.push(node);
        for &c in &children[node] {
            pending[c] -= 1;
            if pending[c] == 0 {
                ready.insert(c);
            }
        }
    }
    let remaining = (0..n).filter(|&i| pending[i] > 0).collect();
    (order, remaining)
}

/// Every leftover node from Kahn's algorithm has at least one leftover parent,
/// so walking leftover parents from any of them must revisit a node.
fn find_cycle(parents: &[Vec<usize>], remaining: &[usize]) -> Option<Vec<usize>> {
    let start = *remaining.first()?;
    let left: BTreeSet<usize> = remaining.iter().copied().collect();
    let mut path = vec![start];
    let mut node = start;
    loop {
        node = *parents[node].iter().filter(|p| left.contains(p)).min()?;
        if let Some(pos) = path.iter().position(|&p| p == node) {
            let mut cycle = path.split_off(pos);
            cycle.push(node);
            return Some(cycle);
        }
        path.push(node);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WarningKind {
    EmptyFeatures,
    MissingGloss,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct ValidationWarning {
    pub concept: ConceptId,
    pub kind: WarningKind,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub concept_count: usize,
    pub max_depth: usize,
    pub structural_errors: usize,
    pub warnings: Vec<ValidationWarning>,
}
