//! Rooted binary phylogenetic networks over a labeled leaf set.
//!
//! A network is a single-rooted acyclic digraph in which every vertex is the
//! root (in-degree 0, out-degree 2), a tree vertex (1, 2), a reticulation
//! (2, 1), or a labeled leaf (1, 0). The one exception is the single-vertex
//! network, whose only vertex is a labeled leaf that is also the root.
//! Parallel arcs are not allowed.
//!
//! Networks are immutable once built. [`build_network`] validates its input
//! exhaustively, so every `Network` in circulation satisfies the degree,
//! acyclicity, and labeling invariants. Vertex ids are dense indices that are
//! only meaningful for the network that produced them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

/// Errors produced while building or querying a network.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetworkError {
    /// The input described no vertices at all.
    #[error("network has no vertices")]
    Empty,
    /// The same directed arc was given more than once.
    #[error("parallel arc ({0}, {1})")]
    ParallelArc(String, String),
    /// The arc set contains a directed cycle.
    #[error("network contains a directed cycle")]
    NotAcyclic,
    /// More than one vertex has in-degree 0.
    #[error("multiple in-degree-0 vertices: {0} and {1}")]
    MultipleRoots(String, String),
    /// A vertex has a degree pair (or labeling) that fits no binary role.
    #[error("vertex {vertex} with in-degree {in_degree} and out-degree {out_degree} fits no binary network role")]
    DegreeViolation {
        vertex: String,
        in_degree: usize,
        out_degree: usize,
    },
    /// An out-degree-0 vertex carries no leaf label.
    #[error("out-degree-0 vertex {0} has no leaf label")]
    UnlabeledLeaf(String),
    /// The same leaf label was assigned twice, or one vertex was labeled twice.
    #[error("duplicate leaf label {0}")]
    DuplicateLabel(String),
    /// A vertex id does not belong to the queried network.
    #[error("vertex id {0} does not belong to this network")]
    UnknownVertex(u32),
    /// A leaf label does not occur in the queried network.
    #[error("no leaf is labeled {0}")]
    UnknownLabel(String),
}

/// Dense handle for a vertex of a specific [`Network`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub(crate) u32);

impl VertexId {
    /// Index into the network's vertex tables.
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

/// Role of a vertex, determined by its degrees and label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VertexKind {
    /// In-degree 0, out-degree 2.
    Root,
    /// In-degree 1, out-degree 2.
    TreeVertex,
    /// In-degree 2, out-degree 1.
    Reticulation,
    /// In-degree 1 (or 0 in the single-vertex network), out-degree 0, labeled.
    Leaf(String),
}

/// A sorted set of leaf labels.
///
/// Used for the leaf set X itself, for cluster sets, and for visibility sets.
/// Iteration order is always ascending, so anything derived from a `LeafSet`
/// is deterministic.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct LeafSet(BTreeSet<String>);

impl LeafSet {
    pub fn new() -> Self {
        LeafSet(BTreeSet::new())
    }

    pub fn insert(&mut self, label: impl Into<String>) -> bool {
        self.0.insert(label.into())
    }

    pub fn remove(&mut self, label: &str) -> bool {
        self.0.remove(label)
    }

    pub fn contains(&self, label: &str) -> bool {
        self.0.contains(label)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(|s| s.as_str())
    }

    /// Set difference as a fresh `LeafSet`.
    pub fn difference(&self, other: &LeafSet) -> LeafSet {
        LeafSet(self.0.difference(&other.0).cloned().collect())
    }

    pub fn is_subset(&self, other: &LeafSet) -> bool {
        self.0.is_subset(&other.0)
    }

    /// Labels as a sorted vector, for order-sensitive comparisons.
    pub fn to_vec(&self) -> Vec<String> {
        self.0.iter().cloned().collect()
    }
}

impl FromIterator<String> for LeafSet {
    fn from_iter<T: IntoIterator<Item = String>>(iter: T) -> Self {
        LeafSet(iter.into_iter().collect())
    }
}

impl<'a> FromIterator<&'a str> for LeafSet {
    fn from_iter<T: IntoIterator<Item = &'a str>>(iter: T) -> Self {
        LeafSet(iter.into_iter().map(|s| s.to_string()).collect())
    }
}

impl fmt::Display for LeafSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, label) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{label}")?;
        }
        write!(f, "}}")
    }
}

/// A pair of reticulations in a near-sibling or near-stack configuration.
///
/// For a near-sibling pair there is a tree vertex whose children are the
/// reticulation `v` and a tree vertex that is a parent of the reticulation
/// `u`. For a near-stack pair the unique child of `u` is a tree vertex that
/// is a parent of `v`. `comparable` records whether one of the two is an
/// ancestor of the other.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct NearPair {
    pub u: VertexId,
    pub v: VertexId,
    pub comparable: bool,
}

/// A reticulated cherry: leaves `a` and `b` where the parent of `b` is a
/// reticulation `p_b`, the parent `p_a` of `a` is also a parent of `p_b`,
/// and `g_b` is the other parent of `p_b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReticulatedCherry {
    pub a: String,
    pub b: String,
    pub p_a: VertexId,
    pub p_b: VertexId,
    pub g_b: VertexId,
}

/// An immutable, validated binary phylogenetic network.
#[derive(Debug, Clone)]
pub struct Network {
    names: Vec<String>,
    parents: Vec<Vec<VertexId>>,
    children: Vec<Vec<VertexId>>,
    leaf_labels: Vec<Option<String>>,
    label_index: BTreeMap<String, VertexId>,
    name_index: BTreeMap<String, VertexId>,
    clusters: Vec<LeafSet>,
    root: VertexId,
}

/// Builds and validates a network from named arcs and a leaf labeling.
///
/// `arcs` lists directed arcs as (tail, head) vertex names; `leaf_labels`
/// assigns a label to every out-degree-0 vertex. Vertex names may be
/// arbitrary strings; they are kept for diagnostics. A single labeled vertex
/// with no arcs builds the single-vertex network.
pub fn build_network<S: AsRef<str>>(
    arcs: &[(S, S)],
    leaf_labels: &[(S, S)],
) -> Result<Network, NetworkError> {
    let mut names: Vec<String> = Vec::new();
    let mut name_index: BTreeMap<String, VertexId> = BTreeMap::new();
    let intern = |name: &str, names: &mut Vec<String>, index: &mut BTreeMap<String, VertexId>| {
        if let Some(&id) = index.get(name) {
            id
        } else {
            let id = VertexId(names.len() as u32);
            names.push(name.to_string());
            index.insert(name.to_string(), id);
            id
        }
    };

    let mut arc_ids: Vec<(VertexId, VertexId)> = Vec::with_capacity(arcs.len());
    for (u, v) in arcs {
        let ui = intern(u.as_ref(), &mut names, &mut name_index);
        let vi = intern(v.as_ref(), &mut names, &mut name_index);
        arc_ids.push((ui, vi));
    }
    for (v, _) in leaf_labels {
        intern(v.as_ref(), &mut names, &mut name_index);
    }

    if names.is_empty() {
        return Err(NetworkError::Empty);
    }

    let n = names.len();
    let mut seen_arcs: BTreeSet<(VertexId, VertexId)> = BTreeSet::new();
    for &(u, v) in &arc_ids {
        if !seen_arcs.insert((u, v)) {
            return Err(NetworkError::ParallelArc(
                names[u.index()].clone(),
                names[v.index()].clone(),
            ));
        }
    }

    let mut parents: Vec<Vec<VertexId>> = vec![Vec::new(); n];
    let mut children: Vec<Vec<VertexId>> = vec![Vec::new(); n];
    for &(u, v) in &arc_ids {
        children[u.index()].push(v);
        parents[v.index()].push(u);
    }

    let mut leaf_label_vec: Vec<Option<String>> = vec![None; n];
    let mut label_index: BTreeMap<String, VertexId> = BTreeMap::new();
    for (v, label) in leaf_labels {
        let vi = name_index[v.as_ref()];
        let label = label.as_ref().to_string();
        if leaf_label_vec[vi.index()].is_some() || label_index.contains_key(&label) {
            return Err(NetworkError::DuplicateLabel(label));
        }
        label_index.insert(label.clone(), vi);
        leaf_label_vec[vi.index()] = Some(label);
    }

    let topo = topological_order(&parents, &children)?;

    let mut in0: Vec<VertexId> = (0..n)
        .map(|i| VertexId(i as u32))
        .filter(|v| parents[v.index()].is_empty())
        .collect();
    if in0.len() > 1 {
        return Err(NetworkError::MultipleRoots(
            names[in0[0].index()].clone(),
            names[in0[1].index()].clone(),
        ));
    }
    let root = in0.pop().expect("acyclic nonempty digraph has a source");

    for i in 0..n {
        let ind = parents[i].len();
        let outd = children[i].len();
        let labeled = leaf_label_vec[i].is_some();
        let ok = match (ind, outd, labeled) {
            (0, 2, false) => true,
            (1, 2, false) => true,
            (2, 1, false) => true,
            (1, 0, true) => true,
            (0, 0, true) => n == 1,
            (_, 0, false) => return Err(NetworkError::UnlabeledLeaf(names[i].clone())),
            _ => false,
        };
        if !ok {
            return Err(NetworkError::DegreeViolation {
                vertex: names[i].clone(),
                in_degree: ind,
                out_degree: outd,
            });
        }
    }

    let mut clusters: Vec<LeafSet> = vec![LeafSet::new(); n];
    for &v in topo.iter().rev() {
        let i = v.index();
        if let Some(label) = &leaf_label_vec[i] {
            clusters[i].insert(label.clone());
        } else {
            let mut acc = LeafSet::new();
            for c in &children[i] {
                for label in clusters[c.index()].iter() {
                    acc.insert(label);
                }
            }
            clusters[i] = acc;
        }
    }

    Ok(Network {
        names,
        parents,
        children,
        leaf_labels: leaf_label_vec,
        label_index,
        name_index,
        clusters,
        root,
    })
}

/// Kahn topological order, root first. Errors with `NotAcyclic` on a cycle.
fn topological_order(
    parents: &[Vec<VertexId>],
    children: &[Vec<VertexId>],
) -> Result<Vec<VertexId>, NetworkError> {
    let n = parents.len();
    let mut indeg: Vec<usize> = parents.iter().map(|p| p.len()).collect();
    let mut queue: Vec<VertexId> = (0..n)
        .map(|i| VertexId(i as u32))
        .filter(|v| indeg[v.index()] == 0)
        .collect();
    let mut order = Vec::with_capacity(n);
    let mut head = 0;
    while head < queue.len() {
        let v = queue[head];
        head += 1;
        order.push(v);
        for &c in &children[v.index()] {
            indeg[c.index()] -= 1;
            if indeg[c.index()] == 0 {
                queue.push(c);
            }
        }
    }
    if order.len() != n {
        return Err(NetworkError::NotAcyclic);
    }
    Ok(order)
}

impl Network {
    fn check(&self, v: VertexId) -> Result<usize, NetworkError> {
        if v.index() < self.names.len() {
            Ok(v.index())
        } else {
            Err(NetworkError::UnknownVertex(v.0))
        }
    }

    pub fn root(&self) -> VertexId {
        self.root
    }

    pub fn vertex_count(&self) -> usize {
        self.names.len()
    }

    pub fn arc_count(&self) -> usize {
        self.children.iter().map(|c| c.len()).sum()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.names.len()).map(|i| VertexId(i as u32))
    }

    /// All arcs, ordered by (tail index, insertion order of heads).
    pub fn arcs(&self) -> Vec<(VertexId, VertexId)> {
        let mut out = Vec::with_capacity(self.arc_count());
        for v in self.vertices() {
            for &c in &self.children[v.index()] {
                out.push((v, c));
            }
        }
        out
    }

    pub fn has_arc(&self, u: VertexId, v: VertexId) -> bool {
        u.index() < self.names.len() && self.children[u.index()].contains(&v)
    }

    /// The vertex name given at build time (or synthesized by surgery).
    ///
    /// Panics if `v` is out of range.
    pub fn name(&self, v: VertexId) -> &str {
        &self.names[v.index()]
    }

    pub fn parents(&self, v: VertexId) -> &[VertexId] {
        &self.parents[v.index()]
    }

    pub fn children(&self, v: VertexId) -> &[VertexId] {
        &self.children[v.index()]
    }

    pub fn leaf_label(&self, v: VertexId) -> Option<&str> {
        self.leaf_labels[v.index()].as_deref()
    }

    pub fn vertex_by_name(&self, name: &str) -> Option<VertexId> {
        self.name_index.get(name).copied()
    }

    pub fn vertex_by_label(&self, label: &str) -> Option<VertexId> {
        self.label_index.get(label).copied()
    }

    /// Leaves in ascending label order.
    pub fn leaves(&self) -> impl Iterator<Item = (VertexId, &str)> + '_ {
        self.label_index.iter().map(|(label, &v)| (v, label.as_str()))
    }

    /// The leaf set X.
    pub fn leaf_set(&self) -> LeafSet {
        self.label_index.keys().cloned().collect()
    }

    pub fn n_leaves(&self) -> usize {
        self.label_index.len()
    }

    pub fn reticulations(&self) -> Vec<VertexId> {
        self.vertices()
            .filter(|&v| self.parents[v.index()].len() == 2)
            .collect()
    }

    pub fn n_reticulations(&self) -> usize {
        self.reticulations().len()
    }

    /// The role of `v`, from its degrees and label.
    pub fn vertex_kind(&self, v: VertexId) -> Result<VertexKind, NetworkError> {
        let i = self.check(v)?;
        Ok(if let Some(label) = &self.leaf_labels[i] {
            VertexKind::Leaf(label.clone())
        } else if self.parents[i].is_empty() {
            VertexKind::Root
        } else if self.parents[i].len() == 2 {
            VertexKind::Reticulation
        } else {
            VertexKind::TreeVertex
        })
    }

    fn is_tree_vertex(&self, v: VertexId) -> bool {
        self.parents[v.index()].len() == 1 && self.children[v.index()].len() == 2
    }

    fn is_reticulation(&self, v: VertexId) -> bool {
        self.parents[v.index()].len() == 2
    }

    fn is_leaf(&self, v: VertexId) -> bool {
        self.leaf_labels[v.index()].is_some()
    }

    /// Cluster set C_v: the leaf labels reachable from `v`.
    pub fn cluster_set(&self, v: VertexId) -> Result<&LeafSet, NetworkError> {
        let i = self.check(v)?;
        Ok(&self.clusters[i])
    }

    /// All vertices reachable from `v`, including `v`.
    fn descendants(&self, v: VertexId) -> Vec<bool> {
        let mut seen = vec![false; self.names.len()];
        let mut stack = vec![v];
        seen[v.index()] = true;
        while let Some(x) = stack.pop() {
            for &c in &self.children[x.index()] {
                if !seen[c.index()] {
                    seen[c.index()] = true;
                    stack.push(c);
                }
            }
        }
        seen
    }

    /// Whether `u` is an ancestor of `v` (reflexively).
    pub fn is_ancestor(&self, u: VertexId, v: VertexId) -> bool {
        self.descendants(u)[v.index()]
    }

    /// Visibility set V_v: the leaves every root path of which passes `v`.
    ///
    /// Computed by deleting `v` and re-running reachability from the root:
    /// exactly the leaves that become unreachable are in V_v.
    pub fn visibility_set(&self, v: VertexId) -> Result<LeafSet, NetworkError> {
        let i = self.check(v)?;
        let mut seen = vec![false; self.names.len()];
        if self.root.index() != i {
            let mut stack = vec![self.root];
            seen[self.root.index()] = true;
            while let Some(x) = stack.pop() {
                for &c in &self.children[x.index()] {
                    if c.index() != i && !seen[c.index()] {
                        seen[c.index()] = true;
                        stack.push(c);
                    }
                }
            }
        }
        Ok(self
            .label_index
            .iter()
            .filter(|(_, leaf)| !seen[leaf.index()])
            .map(|(label, _)| label.clone())
            .collect())
    }

    /// Whether every non-leaf vertex has a child that is not a reticulation.
    pub fn is_tree_child(&self) -> bool {
        self.vertices().all(|v| {
            self.is_leaf(v)
                || self.children[v.index()]
                    .iter()
                    .any(|&c| !self.is_reticulation(c))
        })
    }

    /// Pairs of reticulations sharing a parent, each pair sorted, listed once.
    pub fn sibling_reticulation_pairs(&self) -> Vec<(VertexId, VertexId)> {
        let mut out = BTreeSet::new();
        for v in self.vertices() {
            let kids = &self.children[v.index()];
            if kids.len() == 2 && self.is_reticulation(kids[0]) && self.is_reticulation(kids[1]) {
                let (a, b) = (kids[0].min(kids[1]), kids[0].max(kids[1]));
                out.insert((a, b));
            }
        }
        out.into_iter().collect()
    }

    /// Pairs (u, v) of reticulations where u is a parent of v.
    pub fn stack_reticulation_pairs(&self) -> Vec<(VertexId, VertexId)> {
        let mut out = Vec::new();
        for u in self.reticulations() {
            for &v in &self.children[u.index()] {
                if self.is_reticulation(v) {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// Whether every vertex has a non-empty visibility set.
    pub fn all_vertices_visible(&self) -> bool {
        self.vertices().all(|v| {
            !self
                .visibility_set(v)
                .expect("id from vertices() is valid")
                .is_empty()
        })
    }

    /// Reticulation arcs (u, v) admitting a directed u-v path avoiding the arc.
    pub fn shortcuts(&self) -> Vec<(VertexId, VertexId)> {
        let mut out = Vec::new();
        for v in self.reticulations() {
            let ps = &self.parents[v.index()];
            debug_assert_eq!(ps.len(), 2);
            for k in 0..2 {
                let u = ps[k];
                let other = ps[1 - k];
                if self.descendants(u)[other.index()] {
                    out.push((u, v));
                }
            }
        }
        out.sort();
        out
    }

    /// Tree-child and shortcut-free.
    pub fn is_normal(&self) -> bool {
        self.is_tree_child() && self.shortcuts().is_empty()
    }

    /// Near-sibling reticulation pairs (u, v) with their comparability flag.
    ///
    /// (u, v) qualifies when some tree vertex has children v and s, where s
    /// is a tree vertex that is a parent of u.
    pub fn near_sibling_pairs(&self) -> Vec<NearPair> {
        let mut pairs = BTreeSet::new();
        for t in self.vertices() {
            if !self.is_tree_vertex(t) {
                continue;
            }
            let kids = &self.children[t.index()];
            for k in 0..2 {
                let v = kids[k];
                let s = kids[1 - k];
                if !self.is_reticulation(v) || !self.is_tree_vertex(s) {
                    continue;
                }
                for &u in &self.children[s.index()] {
                    if self.is_reticulation(u) && u != v {
                        pairs.insert((u, v));
                    }
                }
            }
        }
        pairs
            .into_iter()
            .map(|(u, v)| NearPair {
                u,
                v,
                comparable: self.is_ancestor(u, v) || self.is_ancestor(v, u),
            })
            .collect()
    }

    /// Near-stack reticulation pairs (u, v) with their comparability flag.
    ///
    /// (u, v) qualifies when the unique child of u is a tree vertex that is
    /// a parent of v. The pair is always comparable.
    pub fn near_stack_pairs(&self) -> Vec<NearPair> {
        let mut pairs = BTreeSet::new();
        for u in self.reticulations() {
            let c = self.children[u.index()][0];
            if !self.is_tree_vertex(c) {
                continue;
            }
            for &v in &self.children[c.index()] {
                if self.is_reticulation(v) && v != u {
                    pairs.insert((u, v));
                }
            }
        }
        pairs
            .into_iter()
            .map(|(u, v)| NearPair {
                u,
                v,
                comparable: self.is_ancestor(u, v) || self.is_ancestor(v, u),
            })
            .collect()
    }

    pub fn has_near_reticulations(&self) -> bool {
        !self.near_sibling_pairs().is_empty() || !self.near_stack_pairs().is_empty()
    }

    /// Cherries as sorted label pairs, listed in ascending order.
    pub fn cherries(&self) -> Vec<(String, String)> {
        let mut out = BTreeSet::new();
        for v in self.vertices() {
            let kids = &self.children[v.index()];
            if kids.len() == 2 {
                if let (Some(x), Some(y)) = (self.leaf_label(kids[0]), self.leaf_label(kids[1])) {
                    let (a, b) = if x < y { (x, y) } else { (y, x) };
                    out.insert((a.to_string(), b.to_string()));
                }
            }
        }
        out.into_iter().collect()
    }

    /// Reticulated cherries, in ascending (a, b) label order.
    pub fn reticulated_cherries(&self) -> Vec<ReticulatedCherry> {
        let mut out = Vec::new();
        for (b_vertex, b) in self.leaves() {
            let p_b = match self.parents[b_vertex.index()].first() {
                Some(&p) if self.is_reticulation(p) => p,
                _ => continue,
            };
            let ps = &self.parents[p_b.index()];
            for k in 0..2 {
                let p_a = ps[k];
                let g_b = ps[1 - k];
                let a = self.children[p_a.index()]
                    .iter()
                    .filter(|&&c| c != p_b)
                    .find_map(|&c| self.leaf_label(c));
                if let Some(a) = a {
                    out.push(ReticulatedCherry {
                        a: a.to_string(),
                        b: b.to_string(),
                        p_a,
                        p_b,
                        g_b,
                    });
                }
            }
        }
        out.sort_by(|x, y| (&x.a, &x.b).cmp(&(&y.a, &y.b)));
        out
    }
}

/// Leaf-label-respecting digraph isomorphism.
///
/// Backtracking seeded by the forced leaf correspondence, pruned by
/// (in-degree, out-degree, cluster set) signatures.
pub fn are_isomorphic(a: &Network, b: &Network) -> bool {
    if a.vertex_count() != b.vertex_count()
        || a.arc_count() != b.arc_count()
        || a.leaf_set() != b.leaf_set()
    {
        return false;
    }
    let n = a.vertex_count();

    let sig = |net: &Network, v: VertexId| {
        (
            net.parents[v.index()].len(),
            net.children[v.index()].len(),
            net.clusters[v.index()].clone(),
        )
    };
    let mut b_by_sig: BTreeMap<(usize, usize, LeafSet), Vec<VertexId>> = BTreeMap::new();
    for v in b.vertices() {
        b_by_sig.entry(sig(b, v)).or_default().push(v);
    }

    let mut map: Vec<Option<VertexId>> = vec![None; n];
    let mut used: Vec<bool> = vec![false; n];

    for (va, label) in a.leaves() {
        let vb = match b.vertex_by_label(label) {
            Some(v) => v,
            None => return false,
        };
        if sig(a, va) != sig(b, vb) {
            return false;
        }
        map[va.index()] = Some(vb);
        used[vb.index()] = true;
    }

    let mut pending: Vec<(usize, VertexId)> = Vec::new();
    for v in a.vertices() {
        if map[v.index()].is_none() {
            let candidates = b_by_sig.get(&sig(a, v)).map_or(0, |c| c.len());
            if candidates == 0 {
                return false;
            }
            pending.push((candidates, v));
        }
    }
    pending.sort();
    let order: Vec<VertexId> = pending.into_iter().map(|(_, v)| v).collect();

    fn consistent(a: &Network, b: &Network, map: &[Option<VertexId>], v: VertexId, w: VertexId) -> bool {
        for &p in &a.parents[v.index()] {
            if let Some(pw) = map[p.index()] {
                if !b.has_arc(pw, w) {
                    return false;
                }
            }
        }
        for &c in &a.children[v.index()] {
            if let Some(cw) = map[c.index()] {
                if !b.has_arc(w, cw) {
                    return false;
                }
            }
        }
        true
    }

    fn solve(
        a: &Network,
        b: &Network,
        order: &[VertexId],
        pos: usize,
        b_by_sig: &BTreeMap<(usize, usize, LeafSet), Vec<VertexId>>,
        map: &mut Vec<Option<VertexId>>,
        used: &mut Vec<bool>,
    ) -> bool {
        if pos == order.len() {
            return true;
        }
        let v = order[pos];
        let key = (
            a.parents[v.index()].len(),
            a.children[v.index()].len(),
            a.clusters[v.index()].clone(),
        );
        if let Some(cands) = b_by_sig.get(&key) {
            for &w in cands {
                if used[w.index()] || !consistent(a, b, map, v, w) {
                    continue;
                }
                map[v.index()] = Some(w);
                used[w.index()] = true;
                if solve(a, b, order, pos + 1, b_by_sig, map, used) {
                    return true;
                }
                map[v.index()] = None;
                used[w.index()] = false;
            }
        }
        false
    }

    solve(a, b, &order, 0, &b_by_sig, &mut map, &mut used)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Three leaves, one reticulation: the smallest normal network that is
    /// not a tree. Leaf b hangs from a reticulation reachable from both
    /// sides of the root.
    pub(crate) fn three_leaf_fixture() -> Network {
        build_network(
            &[
                ("r", "g"),
                ("r", "pa"),
                ("pa", "a"),
                ("pa", "pb"),
                ("g", "c"),
                ("g", "pb"),
                ("pb", "b"),
            ],
            &[("a", "a"), ("b", "b"), ("c", "c")],
        )
        .unwrap()
    }

    fn stack_fixture() -> Network {
        build_network(
            &[
                ("rho", "p1"),
                ("rho", "p2"),
                ("p1", "u"),
                ("p1", "q"),
                ("p2", "u"),
                ("p2", "d"),
                ("q", "v"),
                ("q", "c"),
                ("u", "v"),
                ("v", "e"),
            ],
            &[("c", "c"), ("d", "d"), ("e", "e")],
        )
        .unwrap()
    }

    #[test]
    fn builds_two_leaf_cherry() {
        let n = build_network(&[("r", "a"), ("r", "b")], &[("a", "a"), ("b", "b")]).unwrap();
        assert_eq!(n.vertex_count(), 3);
        assert_eq!(n.n_leaves(), 2);
        assert_eq!(n.vertex_kind(n.root()).unwrap(), VertexKind::Root);
        assert_eq!(n.cherries(), vec![("a".to_string(), "b".to_string())]);
        assert!(n.is_normal());
    }

    #[test]
    fn builds_single_vertex_network() {
        let n = build_network::<&str>(&[], &[("a", "a")]).unwrap();
        assert_eq!(n.vertex_count(), 1);
        assert_eq!(n.root(), n.vertex_by_label("a").unwrap());
        assert_eq!(
            n.vertex_kind(n.root()).unwrap(),
            VertexKind::Leaf("a".to_string())
        );
    }

    #[test]
    fn rejects_two_cycle() {
        let err = build_network(&[("r", "a"), ("a", "r")], &[] as &[(&str, &str)]).unwrap_err();
        assert_eq!(err, NetworkError::NotAcyclic);
    }

    #[test]
    fn rejects_parallel_arc() {
        let err = build_network(
            &[("r", "a"), ("r", "a")],
            &[("a", "a")],
        )
        .unwrap_err();
        assert_eq!(err, NetworkError::ParallelArc("r".into(), "a".into()));
    }

    #[test]
    fn rejects_multiple_roots() {
        let err = build_network(
            &[("r", "a"), ("r", "b"), ("s", "b"), ("s", "a")],
            &[("a", "a"), ("b", "b")],
        )
        .unwrap_err();
        assert!(matches!(err, NetworkError::MultipleRoots(_, _)));
    }

    #[test]
    fn rejects_unlabeled_leaf() {
        let err = build_network(&[("r", "a"), ("r", "b")], &[("a", "a")]).unwrap_err();
        assert_eq!(err, NetworkError::UnlabeledLeaf("b".into()));
    }

    #[test]
    fn rejects_duplicate_label() {
        let err = build_network(
            &[("r", "a"), ("r", "b")],
            &[("a", "x"), ("b", "x")],
        )
        .unwrap_err();
        assert_eq!(err, NetworkError::DuplicateLabel("x".into()));
    }

    #[test]
    fn rejects_degree_violation() {
        // An out-degree-3 "root".
        let err = build_network(
            &[("r", "a"), ("r", "b"), ("r", "c")],
            &[("a", "a"), ("b", "b"), ("c", "c")],
        )
        .unwrap_err();
        assert_eq!(
            err,
            NetworkError::DegreeViolation {
                vertex: "r".into(),
                in_degree: 0,
                out_degree: 3
            }
        );
    }

    #[test]
    fn rejects_empty_input() {
        let err = build_network::<&str>(&[], &[]).unwrap_err();
        assert_eq!(err, NetworkError::Empty);
    }

    #[test]
    fn stale_id_is_rejected() {
        let n = three_leaf_fixture();
        let bad = VertexId(99);
        assert!(matches!(
            n.vertex_kind(bad),
            Err(NetworkError::UnknownVertex(99))
        ));
        assert!(n.cluster_set(bad).is_err());
        assert!(n.visibility_set(bad).is_err());
    }

    #[test]
    fn clusters_on_the_reticulated_fixture() {
        let n = three_leaf_fixture();
        let pa = n.vertex_by_name("pa").unwrap();
        let g = n.vertex_by_name("g").unwrap();
        let pb = n.vertex_by_name("pb").unwrap();
        assert_eq!(n.cluster_set(pa).unwrap(), &["a", "b"].iter().copied().collect());
        assert_eq!(n.cluster_set(g).unwrap(), &["b", "c"].iter().copied().collect());
        assert_eq!(n.cluster_set(pb).unwrap(), &["b"].iter().copied().collect());
        assert_eq!(n.cluster_set(n.root()).unwrap().len(), 3);
    }

    #[test]
    fn visibility_on_the_reticulated_fixture() {
        let n = three_leaf_fixture();
        let g = n.vertex_by_name("g").unwrap();
        let pa = n.vertex_by_name("pa").unwrap();
        let pb = n.vertex_by_name("pb").unwrap();
        assert_eq!(n.visibility_set(g).unwrap(), ["c"].iter().copied().collect());
        assert_eq!(n.visibility_set(pa).unwrap(), ["a"].iter().copied().collect());
        assert_eq!(n.visibility_set(pb).unwrap(), ["b"].iter().copied().collect());
        assert_eq!(n.visibility_set(n.root()).unwrap().len(), 3);
        // Visibility is always a subset of the cluster.
        for v in n.vertices() {
            assert!(n
                .visibility_set(v)
                .unwrap()
                .is_subset(n.cluster_set(v).unwrap()));
        }
    }

    #[test]
    fn fixture_is_normal_without_near_reticulations() {
        let n = three_leaf_fixture();
        assert!(n.is_tree_child());
        assert!(n.all_vertices_visible());
        assert!(n.sibling_reticulation_pairs().is_empty());
        assert!(n.stack_reticulation_pairs().is_empty());
        assert!(n.shortcuts().is_empty());
        assert!(n.is_normal());
        assert!(n.near_sibling_pairs().is_empty());
        assert!(n.near_stack_pairs().is_empty());
        assert!(!n.has_near_reticulations());
    }

    #[test]
    fn stacked_reticulations_break_tree_child() {
        let n = stack_fixture();
        let u = n.vertex_by_name("u").unwrap();
        let v = n.vertex_by_name("v").unwrap();
        assert_eq!(n.stack_reticulation_pairs(), vec![(u, v)]);
        assert!(n.sibling_reticulation_pairs().is_empty());
        assert!(!n.is_tree_child());
        assert!(!n.all_vertices_visible());
        assert!(n.visibility_set(u).unwrap().is_empty());
    }

    #[test]
    fn shortcut_detection() {
        // Arc (t, v) has the alternative path t -> s -> v.
        let n = build_network(
            &[
                ("r", "t"),
                ("r", "x"),
                ("t", "v"),
                ("t", "s"),
                ("s", "v"),
                ("s", "y"),
                ("v", "z"),
            ],
            &[("x", "x"), ("y", "y"), ("z", "z")],
        )
        .unwrap();
        let t = n.vertex_by_name("t").unwrap();
        let v = n.vertex_by_name("v").unwrap();
        assert_eq!(n.shortcuts(), vec![(t, v)]);
        assert!(n.is_tree_child());
        assert!(!n.is_normal());
    }

    #[test]
    fn reticulated_cherries_on_the_fixture() {
        let n = three_leaf_fixture();
        assert!(n.cherries().is_empty());
        let rc = n.reticulated_cherries();
        assert_eq!(rc.len(), 2);
        assert_eq!((rc[0].a.as_str(), rc[0].b.as_str()), ("a", "b"));
        assert_eq!(n.name(rc[0].p_a), "pa");
        assert_eq!(n.name(rc[0].p_b), "pb");
        assert_eq!(n.name(rc[0].g_b), "g");
        assert_eq!((rc[1].a.as_str(), rc[1].b.as_str()), ("c", "b"));
        assert_eq!(n.name(rc[1].p_a), "g");
        assert_eq!(n.name(rc[1].g_b), "pa");
    }

    #[test]
    fn isomorphism_ignores_vertex_names_but_not_labels() {
        let n1 = three_leaf_fixture();
        let n2 = build_network(
            &[
                ("x1", "x2"),
                ("x1", "x3"),
                ("x3", "a"),
                ("x3", "x4"),
                ("x2", "c"),
                ("x2", "x4"),
                ("x4", "b"),
            ],
            &[("a", "a"), ("b", "b"), ("c", "c")],
        )
        .unwrap();
        assert!(are_isomorphic(&n1, &n2));

        // Swapping which leaf hangs from the reticulation changes the network.
        let n3 = build_network(
            &[
                ("r", "g"),
                ("r", "pa"),
                ("pa", "b"),
                ("pa", "pb"),
                ("g", "c"),
                ("g", "pb"),
                ("pb", "a"),
            ],
            &[("a", "a"), ("b", "b"), ("c", "c")],
        )
        .unwrap();
        assert!(!are_isomorphic(&n1, &n3));
    }

    #[test]
    fn isomorphism_distinguishes_tree_shapes() {
        let t1 = build_network(
            &[("r", "p"), ("r", "c"), ("p", "a"), ("p", "b")],
            &[("a", "a"), ("b", "b"), ("c", "c")],
        )
        .unwrap();
        let t2 = build_network(
            &[("r", "a"), ("r", "p"), ("p", "b"), ("p", "c")],
            &[("a", "a"), ("b", "b"), ("c", "c")],
        )
        .unwrap();
        assert!(!are_isomorphic(&t1, &t2));
        assert!(are_isomorphic(&t1, &t1));
    }
}
