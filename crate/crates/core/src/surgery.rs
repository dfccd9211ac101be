//! Mutable scratch representation for local rewrites of a network.
//!
//! All public operations of this crate keep [`Network`] immutable; anything
//! that rewires arcs (switchings, cherry reductions, attachments, the NNI
//! move, generator expansion moves) copies the network into an [`Editor`],
//! edits names and arcs, and rebuilds through [`build_network`] so the full
//! validation suite runs again on the result.

use std::collections::BTreeSet;

use crate::network::{build_network, Network, NetworkError};

pub(crate) struct Editor {
    names: Vec<String>,
    labels: Vec<Option<String>>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    alive: Vec<bool>,
    name_set: BTreeSet<String>,
}

impl Editor {
    pub fn from_network(n: &Network) -> Editor {
        let count = n.vertex_count();
        let mut ed = Editor {
            names: Vec::with_capacity(count),
            labels: vec![None; count],
            parents: vec![Vec::new(); count],
            children: vec![Vec::new(); count],
            alive: vec![true; count],
            name_set: BTreeSet::new(),
        };
        for v in n.vertices() {
            ed.names.push(n.name(v).to_string());
            ed.name_set.insert(n.name(v).to_string());
            ed.labels[v.index()] = n.leaf_label(v).map(|s| s.to_string());
            ed.children[v.index()] = n.children(v).iter().map(|c| c.index()).collect();
            ed.parents[v.index()] = n.parents(v).iter().map(|p| p.index()).collect();
        }
        ed
    }

    /// Adds an isolated vertex whose name starts from `hint`, deduplicated
    /// deterministically against every name ever used in this editor.
    pub fn add_vertex(&mut self, hint: &str) -> usize {
        let mut name = hint.to_string();
        let mut k = 1usize;
        while self.name_set.contains(&name) {
            k += 1;
            name = format!("{hint}_{k}");
        }
        self.name_set.insert(name.clone());
        self.names.push(name);
        self.labels.push(None);
        self.parents.push(Vec::new());
        self.children.push(Vec::new());
        self.alive.push(true);
        self.names.len() - 1
    }

    pub fn add_leaf(&mut self, label: &str) -> usize {
        let v = self.add_vertex(label);
        self.labels[v] = Some(label.to_string());
        v
    }

    pub fn add_arc(&mut self, u: usize, v: usize) {
        self.children[u].push(v);
        self.parents[v].push(u);
    }

    pub fn delete_arc(&mut self, u: usize, v: usize) {
        if let Some(pos) = self.children[u].iter().position(|&c| c == v) {
            self.children[u].remove(pos);
        }
        if let Some(pos) = self.parents[v].iter().position(|&p| p == u) {
            self.parents[v].remove(pos);
        }
    }

    pub fn delete_vertex(&mut self, v: usize) {
        for c in self.children[v].clone() {
            self.parents[c].retain(|&p| p != v);
        }
        for p in self.parents[v].clone() {
            self.children[p].retain(|&c| c != v);
        }
        self.children[v].clear();
        self.parents[v].clear();
        self.alive[v] = false;
    }

    /// Replaces arc (u, v) by (u, m), (m, v) for a fresh vertex m.
    pub fn subdivide(&mut self, u: usize, v: usize, hint: &str) -> usize {
        self.delete_arc(u, v);
        let m = self.add_vertex(hint);
        self.add_arc(u, m);
        self.add_arc(m, v);
        m
    }

    /// Removes an in-degree-1 out-degree-1 vertex, joining its neighbors.
    ///
    /// Fails with the (parent, child) names when the joining arc already
    /// exists, which would create a parallel arc.
    pub fn suppress(&mut self, v: usize) -> Result<(), (String, String)> {
        debug_assert_eq!(self.parents[v].len(), 1);
        debug_assert_eq!(self.children[v].len(), 1);
        let p = self.parents[v][0];
        let c = self.children[v][0];
        if self.children[p].contains(&c) {
            return Err((self.names[p].clone(), self.names[c].clone()));
        }
        self.delete_vertex(v);
        self.add_arc(p, c);
        Ok(())
    }

    pub fn in_degree(&self, v: usize) -> usize {
        self.parents[v].len()
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.children[v].len()
    }

    pub fn parent_of(&self, v: usize) -> Option<usize> {
        self.parents[v].first().copied()
    }

    pub fn is_labeled(&self, v: usize) -> bool {
        self.labels[v].is_some()
    }

    /// Restores the binary shape after deletions: prunes unlabeled sinks,
    /// drops a root left with a single child, and suppresses degree-(1,1)
    /// vertices, until the graph is stable.
    pub fn normalize(&mut self) -> Result<(), (String, String)> {
        loop {
            let mut changed = false;
            for v in 0..self.names.len() {
                if !self.alive[v] {
                    continue;
                }
                if self.out_degree(v) == 0 && !self.is_labeled(v) {
                    self.delete_vertex(v);
                    changed = true;
                } else if self.in_degree(v) == 0 && self.out_degree(v) == 1 {
                    self.delete_vertex(v);
                    changed = true;
                } else if self.in_degree(v) == 1 && self.out_degree(v) == 1 {
                    self.suppress(v)?;
                    changed = true;
                }
                if changed {
                    break;
                }
            }
            if !changed {
                return Ok(());
            }
        }
    }

    /// Rebuilds a validated network from the surviving arcs and labels.
    pub fn build(&self) -> Result<Network, NetworkError> {
        let mut arcs: Vec<(String, String)> = Vec::new();
        let mut labels: Vec<(String, String)> = Vec::new();
        for v in 0..self.names.len() {
            if !self.alive[v] {
                continue;
            }
            for &c in &self.children[v] {
                arcs.push((self.names[v].clone(), self.names[c].clone()));
            }
            if let Some(label) = &self.labels[v] {
                labels.push((self.names[v].clone(), label.clone()));
            }
        }
        build_network(&arcs, &labels)
    }
}
