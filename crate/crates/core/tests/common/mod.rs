//! Test-only generators and oracles. Nothing here calls into the library's
//! similarity or alignment code, so the oracles stay independent of the
//! implementation they check.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

/// A plain description of a random taxonomy.
#[derive(Debug, Clone)]
pub struct TaxSpec {
    pub root: String,
    pub concepts: BTreeMap<String, ConceptSpec>,
}

#[derive(Debug, Clone)]
pub struct ConceptSpec {
    pub parents: BTreeSet<String>,
    pub lemmas: BTreeSet<String>,
    pub features: BTreeSet<String>,
}

const NAMES: [&str; 12] = [
    "ant", "bee", "cat", "dog", "eel", "fox", "gnu", "hen", "ibis", "jay", "koi", "lynx",
];
const WORDS: [&str; 6] = ["w0", "w1", "w2", "w3", "w4", "w5"];
const FEATURES: [&str; 6] = ["f0", "f1", "f2", "f3", "f4", "f5"];

fn subset<R: Rng>(rng: &mut R, pool: &[&str], min: usize) -> BTreeSet<String> {
    loop {
        let s: BTreeSet<String> = pool
            .iter()
            .filter(|_| rng.gen_bool(0.35))
            .map(|w| w.to_string())
            .collect();
        if s.len() >= min {
            return s;
        }
    }
}

/// Random DAG of 2..=`max` concepts. Concept k picks its parents among
/// concepts created before it, so the result is acyclic and single-rooted.
/// Ids are shuffled so creation order differs from id order.
pub fn random_taxonomy<R: Rng>(rng: &mut R, max: usize) -> TaxSpec {
    let n = rng.gen_range(2..=max);
    let mut names: Vec<&str> = NAMES.to_vec();
    names.shuffle(rng);
    let names: Vec<String> = names[..n].iter().map(|s| s.to_string()).collect();
    let mut concepts = BTreeMap::new();
    for k in 0..n {
        let mut parents = BTreeSet::new();
        if k > 0 {
            parents.insert(names[rng.gen_range(0..k)].clone());
            for earlier in names.iter().take(k) {
                if rng.gen_bool(0.25) {
                    parents.insert(earlier.clone());
                }
            }
        }
        concepts.insert(
            names[k].clone(),
            ConceptSpec {
                parents,
                lemmas: subset(rng, &WORDS, 1),
                features: subset(rng, &FEATURES, 0),
            },
        );
    }
    TaxSpec {
        root: names[0].clone(),
        concepts,
    }
}

impl TaxSpec {
    pub fn to_json(&self) -> String {
        let concepts: Vec<serde_json::Value> = self
            .concepts
            .iter()
            .rev()
            .map(|(id, c)| {
                serde_json::json!({
                    "id": id,
                    "lemmas": c.lemmas,
                    "gloss": format!("gloss of {id}"),
                    "parents": c.parents,
                    "features": c.features,
                })
            })
            .collect();
        serde_json::json!({ "root": self.root, "concepts": concepts }).to_string()
    }

    pub fn ids(&self) -> Vec<&String> {
        self.concepts.keys().collect()
    }

    /// Longest root path, by enumerating every parent chain.
    pub fn depth(&self, c: &str) -> usize {
        let parents = &self.concepts[c].parents;
        1 + parents.iter().map(|p| self.depth(p)).max().unwrap_or(0)
    }

    pub fn ancestors_or_self(&self, c: &str) -> BTreeSet<String> {
        let mut out = BTreeSet::from([c.to_string()]);
        for p in &self.concepts[c].parents {
            out.extend(self.ancestors_or_self(p));
        }
        out
    }

    /// Concept, its direct parents and its direct children.
    pub fn neighborhood1(&self, c: &str) -> BTreeSet<String> {
        let mut out = BTreeSet::from([c.to_string()]);
        out.extend(self.concepts[c].parents.iter().cloned());
        for (id, spec) in &self.concepts {
            if spec.parents.contains(c) {
                out.insert(id.clone());
            }
        }
        out
    }

    pub fn lcs(&self, a: &str, b: &str) -> String {
        let common: Vec<String> = self
            .ancestors_or_self(a)
            .intersection(&self.ancestors_or_self(b))
            .cloned()
            .collect();
        let best = common.iter().map(|c| self.depth(c)).max().unwrap();
        common.into_iter().find(|c| self.depth(c) == best).unwrap()
    }

    pub fn alpha(&self, a: &str, b: &str) -> f64 {
        let (da, db) = (self.depth(a) as f64, self.depth(b) as f64);
        da.min(db) / (da + db)
    }

    /// Sum of three Tversky ratios, each counted element by element.
    pub fn feature_similarity(&self, a: &str, b: &str) -> f64 {
        let alpha = self.alpha(a, b);
        let (ca, cb) = (&self.concepts[a], &self.concepts[b]);
        tversky_by_counting(&ca.lemmas, &cb.lemmas, alpha)
            + tversky_by_counting(&ca.features, &cb.features, alpha)
            + tversky_by_counting(&self.neighborhood1(a), &self.neighborhood1(b), alpha)
    }

    pub fn path_similarity(&self, a: &str, b: &str) -> f64 {
        2.0 * self.depth(&self.lcs(a, b)) as f64 / (self.depth(a) + self.depth(b)) as f64
    }
}

pub fn tversky_by_counting(a: &BTreeSet<String>, b: &BTreeSet<String>, alpha: f64) -> f64 {
    let (mut both, mut only_a, mut only_b) = (0usize, 0usize, 0usize);
    for x in a.union(b) {
        match (a.contains(x), b.contains(x)) {
            (true, true) => both += 1,
            (true, false) => only_a += 1,
            (false, true) => only_b += 1,
            (false, false) => unreachable!(),
        }
    }
    if both == 0 {
        return 0.0;
    }
    both as f64 / (both as f64 + alpha * only_a as f64 + (1.0 - alpha) * only_b as f64)
}

/// A raw matrix in arbitrary storage order: `cells[r][c]` scores expected
/// `rows[r]` against predicted `cols[c]`.
#[derive(Debug, Clone)]
pub struct RawMatrix {
    pub rows: Vec<String>,
    pub cols: Vec<String>,
    pub cells: Vec<Vec<f64>>,
}

const LABELS: [&str; 7] = ["a", "b", "c", "d", "e", "f", "g"];

/// Matrix of up to `max`×`max` with labels drawn from a shared pool and
/// cells from `{0, step, 2·step, ..., 3}`.
pub fn random_matrix<R: Rng>(rng: &mut R, max: usize, step: f64) -> RawMatrix {
    let pick = |rng: &mut R| {
        let n = rng.gen_range(0..=max);
        let mut pool = LABELS.to_vec();
        pool.shuffle(rng);
        pool[..n].iter().map(|s| s.to_string()).collect::<Vec<_>>()
    };
    let rows = pick(rng);
    let cols = pick(rng);
    let levels = (3.0 / step).round() as i64;
    let cells = rows
        .iter()
        .map(|_| cols.iter().map(|_| rng.gen_range(0..=levels) as f64 * step).collect())
        .collect();
    RawMatrix { rows, cols, cells }
}

/// Literal simulation of the alignment rules in rounds:
///   - the smaller side scans (predicted when N_P <= N_E);
///   - every unassigned scan label picks its argmax partner among those it
///     has not lost, ignoring scores below the threshold (ties: smaller id);
///   - where several labels claim one partner, the highest score keeps it
///     (ties: smaller scan id), and each loser drops that partner and
///     re-selects in the next round.
///
/// Returns matched (expected, predicted) pairs.
pub fn cascade_oracle(m: &RawMatrix, threshold: f64) -> BTreeSet<(String, String)> {
    let expected_scans = m.cols.len() > m.rows.len();
    let (scan, partner) = if expected_scans { (&m.rows, &m.cols) } else { (&m.cols, &m.rows) };
    let sim = |s: usize, p: usize| if expected_scans { m.cells[s][p] } else { m.cells[p][s] };

    let mut lost: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); scan.len()];
    let mut holds: BTreeMap<usize, usize> = BTreeMap::new(); // partner -> scan

    loop {
        let assigned: BTreeSet<usize> = holds.values().copied().collect();
        let mut claims: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for s in 0..scan.len() {
            if assigned.contains(&s) {
                continue;
            }
            let best = (0..partner.len())
                .filter(|p| !lost[s].contains(p) && sim(s, *p) >= threshold)
                .max_by(|&x, &y| {
                    sim(s, x)
                        .partial_cmp(&sim(s, y))
                        .unwrap()
                        .then_with(|| partner[y].cmp(&partner[x]))
                });
            if let Some(p) = best {
                claims.entry(p).or_default().push(s);
            }
        }
        if claims.is_empty() {
            break;
        }
        for (p, mut claimants) in claims {
            if let Some(&holder) = holds.get(&p) {
                claimants.push(holder);
            }
            let winner = *claimants
                .iter()
                .max_by(|&&x, &&y| {
                    sim(x, p)
                        .partial_cmp(&sim(y, p))
                        .unwrap()
                        .then_with(|| scan[y].cmp(&scan[x]))
                })
                .unwrap();
            for &s in &claimants {
                if s != winner {
                    lost[s].insert(p);
                }
            }
            holds.insert(p, winner);
        }
    }

    holds
        .into_iter()
        .map(|(p, s)| {
            if expected_scans {
                (scan[s].clone(), partner[p].clone())
            } else {
                (partner[p].clone(), scan[s].clone())
            }
        })
        .collect()
}

/// Brute force over every one-to-one matching of acceptable pairs: keep the
/// stable ones (no label pair that both prefer to their current situation)
/// and return the one every scan label likes best.
pub fn stable_matching_oracle(m: &RawMatrix, threshold: f64) -> BTreeSet<(String, String)> {
    let expected_scans = m.cols.len() > m.rows.len();
    let (scan, partner) = if expected_scans { (&m.rows, &m.cols) } else { (&m.cols, &m.rows) };
    let sim = |s: usize, p: usize| if expected_scans { m.cells[s][p] } else { m.cells[p][s] };
    let ok = |s: usize, p: usize| sim(s, p) >= threshold;
    // scan s strictly prefers p over q (None = unmatched)
    let scan_prefers = |s: usize, p: usize, q: Option<usize>| match q {
        None => true,
        Some(q) => sim(s, p) > sim(s, q) || (sim(s, p) == sim(s, q) && partner[p] < partner[q]),
    };
    let partner_prefers = |p: usize, s: usize, t: Option<usize>| match t {
        None => true,
        Some(t) => sim(s, p) > sim(t, p) || (sim(s, p) == sim(t, p) && scan[s] < scan[t]),
    };

    let mut all = Vec::new();
    let mut current = vec![None; scan.len()];
    enumerate(0, scan.len(), partner.len(), &ok, &mut current, &mut all);

    let stable: Vec<Vec<Option<usize>>> = all
        .into_iter()
        .filter(|assign| {
            let mut held = vec![None; partner.len()];
            for (s, p) in assign.iter().enumerate() {
                if let Some(p) = p {
                    held[*p] = Some(s);
                }
            }
            !(0..scan.len()).any(|s| {
                (0..partner.len()).any(|p| {
                    ok(s, p) && assign[s] != Some(p) && scan_prefers(s, p, assign[s]) && partner_prefers(p, s, held[p])
                })
            })
        })
        .collect();

    let weakly_better = |a: &[Option<usize>], b: &[Option<usize>]| {
        (0..scan.len()).all(|s| a[s] == b[s] || matches!(a[s], Some(p) if scan_prefers(s, p, b[s])))
    };
    let best = stable
        .iter()
        .find(|a| stable.iter().all(|b| weakly_better(a, b)))
        .expect("a scan-optimal stable matching exists");

    best.iter()
        .enumerate()
        .filter_map(|(s, p)| {
            p.map(|p| {
                if expected_scans {
                    (scan[s].clone(), partner[p].clone())
                } else {
                    (partner[p].clone(), scan[s].clone())
                }
            })
        })
        .collect()
}

fn enumerate(
    s: usize,
    n_scan: usize,
    n_partner: usize,
    ok: &dyn Fn(usize, usize) -> bool,
    current: &mut Vec<Option<usize>>,
    out: &mut Vec<Vec<Option<usize>>>,
) {
    if s == n_scan {
        out.push(current.clone());
        return;
    }
    current[s] = None;
    enumerate(s + 1, n_scan, n_partner, ok, current, out);
    for p in 0..n_partner {
        if ok(s, p) && !current[..s].contains(&Some(p)) {
            current[s] = Some(p);
            enumerate(s + 1, n_scan, n_partner, ok, current, out);
        }
    }
    current[s] = None;
}
