//! Finite posets given by cover relations.
//!
//! A [`Poset`] is built from labelled cover edges, transitively reduced to
//! Hasse form, and internally indexed by a fixed linear extension
//! (topological order, ties broken by label). After construction `i < j` as
//! indices whenever element `i` strictly precedes element `j`, which keeps
//! every elimination loop in the cone code a plain forward sweep.
//!
//! The module also answers the order-theoretic questions the algebra needs:
//! unique-Hasse-path checking, sources, separators, and the dimensional
//! bookkeeping that parameterizes Wishart multipliers.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PosetError {
    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),
    #[error("unknown label `{0}` in cover edge")]
    UnknownLabel(String),
    #[error("order relation has a cycle through `{0}` and `{1}`")]
    Cycle(String, String),
}

/// Witness that the Hasse path between a comparable pair is not unique.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PathWitness {
    pub lower: usize,
    pub upper: usize,
    /// Two distinct cover paths from `lower` to `upper`, as index sequences.
    pub path_a: Vec<usize>,
    pub path_b: Vec<usize>,
}

/// Per-element and aggregate separator sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Separators {
    /// `per_element[i]` = minimal separators above element `i`.
    pub per_element: Vec<Vec<usize>>,
    /// Union of the per-element sets.
    pub union: Vec<usize>,
    /// Minimal elements of the union.
    pub minimal: Vec<usize>,
}

/// Dimensional bookkeeping of a poset with all spaces one-dimensional.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PosetDims {
    /// Number of strict predecessors of each element.
    pub preds: Vec<usize>,
    /// Number of strict successors of each element.
    pub succs: Vec<usize>,
    /// Per-element dimension weight `1 + (preds + succs) / 2`.
    pub n_i: Vec<f64>,
    /// Sum of the per-element weights.
    pub n_total: f64,
}

/// A finite poset in Hasse form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poset {
    labels: Vec<String>,
    /// Cover pairs `(i, j)` meaning `i` is covered by `j`; `i < j` as indices.
    covers: Vec<(usize, usize)>,
    /// Reflexive-transitive order, row-major `n x n`.
    leq: Vec<bool>,
    n: usize,
    path_witness: Option<PathWitness>,
}

impl Poset {
    /// Builds a poset from labels and cover edges given by label.
    ///
    /// Redundant (transitively implied) edges are accepted and reduced away.
    pub fn from_cover_edges<S: AsRef<str>>(
        labels: &[S],
        edges: &[(S, S)],
    ) -> Result<Poset, PosetError> {
        let labels: Vec<String> = labels.iter().map(|s| s.as_ref().to_string()).collect();
        let mut seen = BTreeSet::new();
        for l in &labels {
            if !seen.insert(l.clone()) {
                return Err(PosetError::DuplicateLabel(l.clone()));
            }
        }
        let index_of = |l: &str| -> Result<usize, PosetError> {
            labels
                .iter()
                .position(|x| x == l)
                .ok_or_else(|| PosetError::UnknownLabel(l.to_string()))
        };
        let mut idx_edges = Vec::with_capacity(edges.len());
        for (a, b) in edges {
            idx_edges.push((index_of(a.as_ref())?, index_of(b.as_ref())?));
        }
        Self::build(labels, idx_edges)
    }

    fn build(labels: Vec<String>, edges: Vec<(usize, usize)>) -> Result<Poset, PosetError> {
        let n = labels.len();
        let mut lt = vec![false; n * n];
        for &(a, b) in &edges {
            if a == b {
                return Err(PosetError::Cycle(labels[a].clone(), labels[b].clone()));
            }
            lt[a * n + b] = true;
        }
        // Warshall closure of the strict relation.
        for k in 0..n {
            for i in 0..n {
                if lt[i * n + k] {
                    for j in 0..n {
                        if lt[k * n + j] {
                            lt[i * n + j] = true;
                        }
                    }
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                if i != j && lt[i * n + j] && lt[j * n + i] {
                    return Err(PosetError::Cycle(labels[i].clone(), labels[j].clone()));
                }
            }
        }
        // Linear extension: Kahn's algorithm, ties broken by label order.
        let mut order = Vec::with_capacity(n);
        let mut placed = vec![false; n];
        for _ in 0..n {
            let next = (0..n)
                .filter(|&v| !placed[v])
                .filter(|&v| (0..n).all(|u| placed[u] || !lt[u * n + v]))
                .min_by(|&a, &b| labels[a].cmp(&labels[b]))
                .expect("acyclic relation always has a minimal element");
            placed[next] = true;
            order.push(next);
        }
        let mut rank = vec![0usize; n];
        for (r, &v) in order.iter().enumerate() {
            rank[v] = r;
        }
        let new_labels: Vec<String> = order.iter().map(|&v| labels[v].clone()).collect();
        let mut leq = vec![false; n * n];
        for i in 0..n {
            leq[i * n + i] = true;
        }
        for i in 0..n {
            for j in 0..n {
                if lt[i * n + j] {
                    leq[rank[i] * n + rank[j]] = true;
                }
            }
        }
        // Transitive reduction to Hasse covers.
        let strict = |i: usize, j: usize| i != j && leq[i * n + j];
        let mut covers = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if strict(i, j) && !(0..n).any(|k| strict(i, k) && strict(k, j)) {
                    covers.push((i, j));
                }
            }
        }
        covers.sort_unstable();
        let mut poset = Poset {
            labels: new_labels,
            covers,
            leq,
            n,
            path_witness: None,
        };
        poset.path_witness = poset.find_path_witness();
        Ok(poset)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Reflexive order: `i` precedes or equals `j`.
    pub fn leq(&self, i: usize, j: usize) -> bool {
        self.leq[i * self.n + j]
    }

    /// Strict order.
    pub fn lt(&self, i: usize, j: usize) -> bool {
        i != j && self.leq(i, j)
    }

    pub fn comparable(&self, i: usize, j: usize) -> bool {
        self.leq(i, j) || self.leq(j, i)
    }

    /// Hasse cover pairs `(i, j)` with `i` covered by `j`.
    pub fn covers(&self) -> &[(usize, usize)] {
        &self.covers
    }

    /// Direct successors of `i` in the Hasse diagram.
    pub fn children(&self, i: usize) -> Vec<usize> {
        self.covers
            .iter()
            .filter(|&&(a, _)| a == i)
            .map(|&(_, b)| b)
            .collect()
    }

    /// Direct predecessors of `i` in the Hasse diagram.
    pub fn parents(&self, i: usize) -> Vec<usize> {
        self.covers
            .iter()
            .filter(|&&(_, b)| b == i)
            .map(|&(a, _)| a)
            .collect()
    }

    /// Down-set `{j : j <= i}`, ascending.
    pub fn down_set(&self, i: usize) -> Vec<usize> {
        (0..self.n).filter(|&j| self.leq(j, i)).collect()
    }

    /// Strict down-set `{j : j < i}`, ascending.
    pub fn strict_down_set(&self, i: usize) -> Vec<usize> {
        (0..self.n).filter(|&j| self.lt(j, i)).collect()
    }

    /// Up-set `{j : i <= j}`, ascending.
    pub fn up_set(&self, i: usize) -> Vec<usize> {
        (0..self.n).filter(|&j| self.leq(i, j)).collect()
    }

    /// Elements with no strict predecessor.
    pub fn minimal_elements(&self) -> Vec<usize> {
        (0..self.n)
            .filter(|&i| (0..self.n).all(|j| !self.lt(j, i)))
            .collect()
    }

    /// Elements with no strict successor.
    pub fn maximal_elements(&self) -> Vec<usize> {
        (0..self.n)
            .filter(|&i| (0..self.n).all(|j| !self.lt(i, j)))
            .collect()
    }

    /// Elements with in-degree 0 that cover at least two elements.
    pub fn sources(&self) -> Vec<usize> {
        self.minimal_elements()
            .into_iter()
            .filter(|&i| self.children(i).len() >= 2)
            .collect()
    }

    /// True when the Hasse path between every comparable pair is unique.
    pub fn satisfies_unique_paths(&self) -> bool {
        self.path_witness.is_none()
    }

    /// A comparable pair joined by two distinct Hasse paths, if one exists.
    pub fn path_witness(&self) -> Option<&PathWitness> {
        self.path_witness.as_ref()
    }

    fn find_path_witness(&self) -> Option<PathWitness> {
        for a in 0..self.n {
            // Path counts from a, saturating at 2; indices are topological.
            let mut ways = vec![0u32; self.n];
            ways[a] = 1;
            for v in a..self.n {
                if ways[v] == 0 {
                    continue;
                }
                for c in self.children(v) {
                    ways[c] = (ways[c] + ways[v]).min(2);
                }
            }
            for b in a + 1..self.n {
                if self.lt(a, b) && ways[b] >= 2 {
                    let paths = self.two_paths(a, b);
                    return Some(PathWitness {
                        lower: a,
                        upper: b,
                        path_a: paths[0].clone(),
                        path_b: paths[1].clone(),
                    });
                }
            }
        }
        None
    }

    /// Enumerates cover paths from `a` to `b`, stopping after `limit`.
    fn paths_between(&self, a: usize, b: usize, limit: usize) -> Vec<Vec<usize>> {
        let mut found = Vec::new();
        let mut stack = vec![a];
        self.dfs_paths(a, b, limit, &mut stack, &mut found);
        found
    }

    fn dfs_paths(
        &self,
        cur: usize,
        b: usize,
        limit: usize,
        stack: &mut Vec<usize>,
        found: &mut Vec<Vec<usize>>,
    ) {
        if found.len() >= limit {
            return;
        }
        if cur == b {
            found.push(stack.clone());
            return;
        }
        for c in self.children(cur) {
            if self.leq(c, b) {
                stack.push(c);
                self.dfs_paths(c, b, limit, stack, found);
                stack.pop();
            }
        }
    }

    fn two_paths(&self, a: usize, b: usize) -> Vec<Vec<usize>> {
        self.paths_between(a, b, 2)
    }

    /// Separator structure of the poset.
    ///
    /// `j` separates an incomparable pair when it lies above both of them;
    /// each element keeps the minimal separators above it.
    pub fn separators(&self) -> Separators {
        let n = self.n;
        let mut is_sep = vec![false; n];
        for i1 in 0..n {
            for i2 in i1 + 1..n {
                if self.comparable(i1, i2) {
                    continue;
                }
                for j in 0..n {
                    if j != i1 && j != i2 && self.leq(i1, j) && self.leq(i2, j) {
                        is_sep[j] = true;
                    }
                }
            }
        }
        let minimal_within = |set: &[usize]| -> Vec<usize> {
            set.iter()
                .copied()
                .filter(|&j| set.iter().all(|&k| k == j || !self.lt(k, j)))
                .collect()
        };
        let mut per_element = Vec::with_capacity(n);
        let mut union = BTreeSet::new();
        for i in 0..n {
            let above: Vec<usize> = (0..n).filter(|&j| is_sep[j] && self.leq(i, j)).collect();
            let mins = minimal_within(&above);
            union.extend(mins.iter().copied());
            per_element.push(mins);
        }
        let union: Vec<usize> = union.into_iter().collect();
        let minimal = minimal_within(&union);
        Separators {
            per_element,
            union,
            minimal,
        }
    }

    pub fn dims(&self) -> PosetDims {
        let n = self.n;
        let preds: Vec<usize> = (0..n).map(|i| self.strict_down_set(i).len()).collect();
        let succs: Vec<usize> = (0..n)
            .map(|i| (0..n).filter(|&j| self.lt(i, j)).count())
            .collect();
        let n_i: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.5 * (preds[i] + succs[i]) as f64)
            .collect();
        let n_total = n_i.iter().sum();
        PosetDims {
            preds,
            succs,
            n_i,
            n_total,
        }
    }

    /// The poset with all covers reversed.
    pub fn opposite(&self) -> Poset {
        let edges: Vec<(usize, usize)> = self.covers.iter().map(|&(a, b)| (b, a)).collect();
        Poset::build(self.labels.clone(), edges).expect("reversing an order keeps it an order")
    }

    /// Induced sub-poset on `subset` (full-poset indices).
    ///
    /// Returns the sub-poset together with `map[sub_index] = full_index`.
    pub fn induced(&self, subset: &[usize]) -> (Poset, Vec<usize>) {
        let labels: Vec<String> = subset.iter().map(|&i| self.labels[i].clone()).collect();
        let mut edges = Vec::new();
        for (a, &ia) in subset.iter().enumerate() {
            for (b, &ib) in subset.iter().enumerate() {
                if ia != ib && self.lt(ia, ib) {
                    edges.push((a, b));
                }
            }
        }
        let sub = Poset::build(labels, edges).expect("induced relation stays an order");
        let map: Vec<usize> = sub
            .labels
            .iter()
            .map(|l| self.index_of(l).expect("labels preserved"))
            .collect();
        (sub, map)
    }

    /// SHA-256 of the canonical form, used in run manifests.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(b"poset-v1");
        for l in &self.labels {
            hasher.update([0x1f]);
            hasher.update(l.as_bytes());
        }
        hasher.update([0x1e]);
        for &(a, b) in &self.covers {
            hasher.update(a.to_le_bytes());
            hasher.update(b.to_le_bytes());
        }
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl fmt::Display for Poset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "poset on {{{}}}", self.labels.join(", "))?;
        if !self.covers.is_empty() {
            let edges: Vec<String> = self
                .covers
                .iter()
                .map(|&(a, b)| format!("{} < {}", self.labels[a], self.labels[b]))
                .collect();
            write!(f, " with {}", edges.join(", "))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PosetSpec {
    pub labels: Vec<String>,
    pub covers: Vec<(String, String)>,
}

impl PosetSpec {
    pub fn to_poset(&self) -> Result<Poset, PosetError> {
        let edges: Vec<(&str, &str)> = self
            .covers
            .iter()
            .map(|(a, b)| (a.as_str(), b.as_str()))
            .collect();
        let labels: Vec<&str> = self.labels.iter().map(|s| s.as_str()).collect();
        Poset::from_cover_edges(&labels, &edges)
    }
}

impl From<&Poset> for PosetSpec {
    fn from(p: &Poset) -> Self {
        PosetSpec {
            labels: p.labels().to_vec(),
            covers: p
                .covers()
                .iter()
                .map(|&(a, b)| (p.label(a).to_string(), p.label(b).to_string()))
                .collect(),
        }
    }
}
