//! Displayed rooted triples and quartet caterpillars.
//!
//! A switching of a network keeps exactly one in-arc per reticulation,
//! deletes the others, prunes unlabeled sinks, and suppresses the resulting
//! degree-(1, 1) vertices (and a root left with one child). Every switching
//! is a rooted binary tree on the full leaf set. The displayed triple set
//! R(N) is the union of the rooted triples of all switchings; the quartet
//! set collects the caterpillar shapes of all 4-leaf restrictions of those
//! switchings.
//!
//! Switching enumeration is exponential in the reticulation count, which is
//! the intended regime for desk-scale verification. With the `parallel`
//! feature (on by default) the enumeration fans out over a rayon pool; the
//! sequential path is always compiled and gives identical results.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::network::{LeafSet, Network, VertexId};
use crate::surgery::Editor;

/// Errors from triple-set construction and queries.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TripleError {
    #[error("label {0} is outside the triple universe")]
    LabelOutsideUniverse(String),
    #[error("a rooted triple needs three distinct labels, got {0}, {1}, {2}")]
    DegenerateTriple(String, String, String),
}

/// A rooted triple xy|z: the pair {x, y} is closer together than to z.
///
/// Stored with the pair sorted, so equal triples compare equal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RootedTriple {
    x: String,
    y: String,
    z: String,
}

impl RootedTriple {
    pub fn new(a: &str, b: &str, outgroup: &str) -> Result<RootedTriple, TripleError> {
        if a == b || a == outgroup || b == outgroup {
            return Err(TripleError::DegenerateTriple(
                a.to_string(),
                b.to_string(),
                outgroup.to_string(),
            ));
        }
        Ok(Self::canonical(a, b, outgroup))
    }

    pub(crate) fn canonical(a: &str, b: &str, outgroup: &str) -> RootedTriple {
        let (x, y) = if a <= b { (a, b) } else { (b, a) };
        RootedTriple {
            x: x.to_string(),
            y: y.to_string(),
            z: outgroup.to_string(),
        }
    }

    /// The cherry pair, in ascending order.
    pub fn pair(&self) -> (&str, &str) {
        (&self.x, &self.y)
    }

    pub fn outgroup(&self) -> &str {
        &self.z
    }

    pub fn labels(&self) -> [&str; 3] {
        [&self.x, &self.y, &self.z]
    }

    pub fn mentions(&self, label: &str) -> bool {
        self.x == label || self.y == label || self.z == label
    }
}

impl fmt::Display for RootedTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} | {}", self.x, self.y, self.z)
    }
}

/// A set of rooted triples over an explicit label universe.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TripleSet {
    universe: LeafSet,
    triples: BTreeSet<RootedTriple>,
}

impl TripleSet {
    pub fn new(universe: LeafSet) -> TripleSet {
        TripleSet {
            universe,
            triples: BTreeSet::new(),
        }
    }

    /// Builds a set from triples, checking every label against `universe`.
    pub fn with_triples<I: IntoIterator<Item = RootedTriple>>(
        universe: LeafSet,
        triples: I,
    ) -> Result<TripleSet, TripleError> {
        let mut set = TripleSet::new(universe);
        for t in triples {
            set.insert(t)?;
        }
        Ok(set)
    }

    pub fn insert(&mut self, t: RootedTriple) -> Result<bool, TripleError> {
        for label in t.labels() {
            if !self.universe.contains(label) {
                return Err(TripleError::LabelOutsideUniverse(label.to_string()));
            }
        }
        Ok(self.triples.insert(t))
    }

    pub fn universe(&self) -> &LeafSet {
        &self.universe
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &RootedTriple> {
        self.triples.iter()
    }

    pub fn contains(&self, t: &RootedTriple) -> bool {
        self.triples.contains(t)
    }

    /// Membership of xy|z without allocating the caller's triple.
    pub fn contains_triple(&self, a: &str, b: &str, outgroup: &str) -> bool {
        self.triples.contains(&RootedTriple::canonical(a, b, outgroup))
    }

    /// The triple set on X - {b}: drops every triple mentioning `b` in any
    /// position. Removing the same leaf twice fails, because the second call
    /// finds `b` outside the universe.
    pub fn remove_leaf(&self, b: &str) -> Result<TripleSet, TripleError> {
        if !self.universe.contains(b) {
            return Err(TripleError::LabelOutsideUniverse(b.to_string()));
        }
        let mut universe = self.universe.clone();
        universe.remove(b);
        Ok(TripleSet {
            universe,
            triples: self
                .triples
                .iter()
                .filter(|t| !t.mentions(b))
                .cloned()
                .collect(),
        })
    }
}

/// A caterpillar quartet (((w, x), y), z), canonicalized with w < x.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct QuartetCaterpillar {
    pub cherry: (String, String),
    pub mid: String,
    pub outer: String,
}

impl fmt::Display for QuartetCaterpillar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} | {} | {}",
            self.cherry.0, self.cherry.1, self.mid, self.outer
        )
    }
}

/// Builds the switching selected by `mask`: bit i picks the in-arc kept by
/// the i-th reticulation (in vertex order).
fn switching_tree(n: &Network, mask: u64) -> Network {
    let mut ed = Editor::from_network(n);
    for (i, r) in n.reticulations().into_iter().enumerate() {
        let parents: Vec<usize> = n.parents(r).iter().map(|p| p.index()).collect();
        let keep = ((mask >> i) & 1) as usize;
        ed.delete_arc(parents[1 - keep], r.index());
    }
    ed.normalize()
        .expect("suppressing a switching cannot create parallel arcs");
    ed.build().expect("a switching of a valid network is a valid tree")
}

/// Lazily enumerates all 2^r switchings of `n`, duplicates included.
pub fn switchings(n: &Network) -> impl Iterator<Item = Network> + '_ {
    let r = n.n_reticulations();
    assert!(r < 63, "switching enumeration over {r} reticulations is not supported");
    (0..(1u64 << r)).map(move |mask| switching_tree(n, mask))
}

/// Sorted key describing a rooted tree up to vertex renaming.
fn tree_key(t: &Network, v: VertexId) -> String {
    if let Some(label) = t.leaf_label(v) {
        return label.to_string();
    }
    let mut parts: Vec<String> = t.children(v).iter().map(|&c| tree_key(t, c)).collect();
    parts.sort();
    format!("({})", parts.join(","))
}

/// All distinct switchings of `n`. Deduplication is an optimization: the
/// triple and quartet unions are unchanged by it.
pub fn switching_trees(n: &Network) -> Vec<Network> {
    let r = n.n_reticulations();
    assert!(r < 63, "switching enumeration over {r} reticulations is not supported");
    let masks: Vec<u64> = (0..(1u64 << r)).collect();
    let keyed: Vec<(String, Network)> = {
        #[cfg(feature = "parallel")]
        {
            masks
                .into_par_iter()
                .map(|mask| {
                    let t = switching_tree(n, mask);
                    (tree_key(&t, t.root()), t)
                })
                .collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            masks
                .into_iter()
                .map(|mask| {
                    let t = switching_tree(n, mask);
                    (tree_key(&t, t.root()), t)
                })
                .collect()
        }
    };
    let mut unique: BTreeMap<String, Network> = BTreeMap::new();
    for (key, tree) in keyed {
        unique.entry(key).or_insert(tree);
    }
    unique.into_values().collect()
}

/// The rooted triples displayed by a single tree.
fn tree_triple_set(t: &Network) -> BTreeSet<RootedTriple> {
    let all: Vec<String> = t.leaf_set().to_vec();
    let mut out = BTreeSet::new();
    for v in t.vertices() {
        let kids = t.children(v);
        if kids.len() != 2 {
            continue;
        }
        let left = t.cluster_set(kids[0]).expect("own vertex id");
        let right = t.cluster_set(kids[1]).expect("own vertex id");
        let here = t.cluster_set(v).expect("own vertex id");
        for x in left.iter() {
            for y in right.iter() {
                for z in &all {
                    if !here.contains(z) {
                        out.insert(RootedTriple::canonical(x, y, z));
                    }
                }
            }
        }
    }
    out
}

fn union_triples(n: &Network, trees: &[Network]) -> TripleSet {
    let universe = n.leaf_set();
    if universe.len() < 3 {
        return TripleSet::new(universe);
    }
    let triples = {
        #[cfg(feature = "parallel")]
        {
            trees
                .par_iter()
                .map(tree_triple_set)
                .reduce(BTreeSet::new, |mut acc, s| {
                    acc.extend(s);
                    acc
                })
        }
        #[cfg(not(feature = "parallel"))]
        {
            trees.iter().map(tree_triple_set).fold(BTreeSet::new(), |mut acc, s| {
                acc.extend(s);
                acc
            })
        }
    };
    TripleSet { universe, triples }
}

/// R(N): the union of the rooted triples of every switching of `n`.
///
/// Empty (with universe X) when |X| < 3. Uses the rayon pool when the
/// `parallel` feature is active, the sequential path otherwise.
pub fn rooted_triples(n: &Network) -> TripleSet {
    if n.n_leaves() < 3 {
        return TripleSet::new(n.leaf_set());
    }
    union_triples(n, &switching_trees(n))
}

/// Sequential R(N), compiled under every feature combination.
pub fn rooted_triples_seq(n: &Network) -> TripleSet {
    let universe = n.leaf_set();
    if universe.len() < 3 {
        return TripleSet::new(universe);
    }
    let mut unique: BTreeMap<String, Network> = BTreeMap::new();
    for tree in switchings(n) {
        unique.entry(tree_key(&tree, tree.root())).or_insert(tree);
    }
    let mut triples = BTreeSet::new();
    for tree in unique.values() {
        triples.extend(tree_triple_set(tree));
    }
    TripleSet { universe, triples }
}

/// Whether some switching of `n` displays `t`, with early exit.
pub fn displays_triple(n: &Network, t: &RootedTriple) -> Result<bool, TripleError> {
    let universe = n.leaf_set();
    for label in t.labels() {
        if !universe.contains(label) {
            return Err(TripleError::LabelOutsideUniverse(label.to_string()));
        }
    }
    if universe.len() < 3 {
        return Ok(false);
    }
    let (x, y) = t.pair();
    let z = t.outgroup();
    for tree in switchings(n) {
        let lca = tree_lca(&tree, x, y);
        if !tree.cluster_set(lca).expect("own vertex id").contains(z) {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Lowest common ancestor of two leaf labels in a tree.
fn tree_lca(t: &Network, x: &str, y: &str) -> VertexId {
    let mut on_path = vec![false; t.vertex_count()];
    let mut v = t.vertex_by_label(x).expect("leaf of the switching");
    loop {
        on_path[v.index()] = true;
        match t.parents(v).first() {
            Some(&p) => v = p,
            None => break,
        }
    }
    let mut w = t.vertex_by_label(y).expect("leaf of the switching");
    while !on_path[w.index()] {
        w = t.parents(w)[0];
    }
    w
}

/// Q(N): caterpillar shapes of all 4-leaf restrictions of all switchings.
pub fn quartet_caterpillars(n: &Network) -> BTreeSet<QuartetCaterpillar> {
    let labels: Vec<String> = n.leaf_set().to_vec();
    let mut out = BTreeSet::new();
    if labels.len() < 4 {
        return out;
    }
    for tree in switching_trees(n) {
        let triples = tree_triple_set(&tree);
        for sub in combinations(labels.len(), 4) {
            let four: Vec<&str> = sub.iter().map(|&i| labels[i].as_str()).collect();
            if let Some(q) = quartet_of(&triples, &four) {
                out.insert(q);
            }
        }
    }
    out
}

/// The caterpillar displayed on `four` by a tree's triples, if any.
fn quartet_of(triples: &BTreeSet<RootedTriple>, four: &[&str]) -> Option<QuartetCaterpillar> {
    let mut outgroup_count = [0usize; 4];
    let mut per_subset: Vec<RootedTriple> = Vec::with_capacity(4);
    for skip in 0..4 {
        let trio: Vec<&str> = (0..4).filter(|&i| i != skip).map(|i| four[i]).collect();
        let found = [
            RootedTriple::canonical(trio[0], trio[1], trio[2]),
            RootedTriple::canonical(trio[0], trio[2], trio[1]),
            RootedTriple::canonical(trio[1], trio[2], trio[0]),
        ]
        .into_iter()
        .find(|t| triples.contains(t))
        .expect("a binary tree resolves every trio");
        for (i, &label) in four.iter().enumerate() {
            if found.outgroup() == label {
                outgroup_count[i] += 1;
            }
        }
        per_subset.push(found);
    }
    let z = (0..4).find(|&i| outgroup_count[i] == 3)?;
    let inner = per_subset
        .iter()
        .find(|t| !t.mentions(four[z]))
        .expect("one trio omits the caterpillar top");
    Some(QuartetCaterpillar {
        cherry: (inner.pair().0.to_string(), inner.pair().1.to_string()),
        mid: inner.outgroup().to_string(),
        outer: four[z].to_string(),
    })
}

/// Index combinations of size `k` from `0..n`, in lexicographic order.
pub(crate) fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}
