//! Cherry reductions, their inverse attachments, and reconstruction of a
//! network from its rooted triples.
//!
//! The reconstruction loop peels one leaf at a time: while more than two
//! leaves remain it asks [`crate::recognition::find_recognized_cherry`] for
//! a pair to reduce, records the step, and removes the reticulation-side
//! leaf from the triple set. The recorded steps are then replayed in
//! reverse on a two-leaf (or single-vertex) base network. Cherry steps
//! subdivide the retained leaf's in-arc; reticulated-cherry steps locate
//! the grandparent side by matching the recorded candidate set against the
//! visibility sets of the partial network.
//!
//! The recognition layer is only trustworthy on triple sets of normal
//! networks without near reticulations, so [`reconstruct_from_triples`]
//! always finishes by recomputing the triples of the result and comparing
//! them with the input. A mismatch, a failed attachment, or a stuck
//! reduction all report [`ReconstructError::NotRealizableOrOutOfClass`]
//! rather than a wrong network.

use thiserror::Error;

use crate::network::{build_network, LeafSet, Network, NetworkError, VertexId};
use crate::recognition::{self, RecognitionError, RecognizedCherry};
use crate::surgery::Editor;
use crate::triples::{rooted_triples, TripleError, TripleSet};

/// Errors from reductions, attachments, and reconstruction.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReconstructError {
    #[error("the triple universe is empty")]
    EmptyUniverse,
    #[error("leaf {0} is not in the network")]
    UnknownLeaf(String),
    #[error("label {0} is already a leaf of the network")]
    LabelClash(String),
    #[error("({a}, {b}) is not a cherry: {detail}")]
    NotACherry { a: String, b: String, detail: String },
    #[error("({a}, {b}) is not a reticulated cherry: {detail}")]
    NotAReticulatedCherry { a: String, b: String, detail: String },
    #[error("reduction would create a parallel arc from {from} to {to}")]
    WouldCreateParallelArc { from: String, to: String },
    #[error("malformed candidate set: {0}")]
    MalformedCandidateSet(String),
    #[error("no vertex has visibility set {0}")]
    NoVisibilityMatch(LeafSet),
    #[error("attachment target is ambiguous ({}): {detail}", targets.join(", "))]
    AmbiguousAttachment { targets: Vec<String>, detail: String },
    #[error("not the triple set of a normal network without near reticulations: {reason}")]
    NotRealizableOrOutOfClass { reason: String },
    #[error(transparent)]
    Recognition(#[from] RecognitionError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Triples(#[from] TripleError),
}

/// One recorded reduction; `b` is always the removed leaf.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReductionStep {
    Cherry {
        a: String,
        b: String,
    },
    ReticulatedCherry {
        a: String,
        b: String,
        w: LeafSet,
        alternatives: usize,
    },
}

/// A verified reconstruction: the network, the reduction order that led to
/// it, and the (always true on success) verification flag.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub network: Network,
    pub steps: Vec<ReductionStep>,
    pub verified: bool,
}

fn leaf_vertex(n: &Network, label: &str) -> Result<VertexId, ReconstructError> {
    n.vertex_by_label(label)
        .ok_or_else(|| ReconstructError::UnknownLeaf(label.to_string()))
}

fn single_leaf_network(label: &str) -> Network {
    build_network::<&str>(&[], &[(label, label)]).expect("a single labeled vertex is valid")
}

fn normalize_and_build(mut ed: Editor) -> Result<Network, ReconstructError> {
    ed.normalize()
        .map_err(|(from, to)| ReconstructError::WouldCreateParallelArc { from, to })?;
    Ok(ed.build()?)
}

/// Removes leaf `b` from the cherry {a, b}. With two leaves the result is
/// the single-vertex network on a; otherwise the shared parent is
/// suppressed, which never creates a parallel arc.
pub fn reduce_cherry(n: &Network, a: &str, b: &str) -> Result<Network, ReconstructError> {
    let va = leaf_vertex(n, a)?;
    let vb = leaf_vertex(n, b)?;
    if a == b {
        return Err(ReconstructError::NotACherry {
            a: a.into(),
            b: b.into(),
            detail: "a cherry needs two distinct leaves".into(),
        });
    }
    let (pa, pb) = match (n.parents(va).first(), n.parents(vb).first()) {
        (Some(&pa), Some(&pb)) => (pa, pb),
        _ => {
            return Err(ReconstructError::NotACherry {
                a: a.into(),
                b: b.into(),
                detail: "a single-vertex network has no cherry".into(),
            })
        }
    };
    if pa != pb {
        return Err(ReconstructError::NotACherry {
            a: a.into(),
            b: b.into(),
            detail: format!("the leaves have different parents {} and {}", n.name(pa), n.name(pb)),
        });
    }
    if n.n_leaves() == 2 {
        return Ok(single_leaf_network(a));
    }
    let mut ed = Editor::from_network(n);
    ed.delete_vertex(vb.index());
    normalize_and_build(ed)
}

/// Removes leaf `b` and its reticulation parent from the reticulated
/// cherry (a, b), returning the reduced network together with the
/// visibility set of the grandparent g_b, captured before the reduction.
///
/// On a normal network the suppression of g_b cannot create a parallel
/// arc; out-of-class inputs can make it try, which reports
/// [`ReconstructError::WouldCreateParallelArc`].
pub fn reduce_reticulated_cherry(
    n: &Network,
    a: &str,
    b: &str,
) -> Result<(Network, LeafSet), ReconstructError> {
    let va = leaf_vertex(n, a)?;
    let vb = leaf_vertex(n, b)?;
    let not = |detail: String| ReconstructError::NotAReticulatedCherry {
        a: a.into(),
        b: b.into(),
        detail,
    };
    if a == b {
        return Err(not("the leaves must be distinct".into()));
    }
    let p_a = *n
        .parents(va)
        .first()
        .ok_or_else(|| not("a single-vertex network has no reticulated cherry".into()))?;
    let p_b = *n
        .parents(vb)
        .first()
        .ok_or_else(|| not("a single-vertex network has no reticulated cherry".into()))?;
    if n.parents(p_b).len() != 2 {
        return Err(not(format!("the parent of {b} is not a reticulation")));
    }
    if !n.parents(p_b).contains(&p_a) {
        return Err(not(format!("the parent of {a} is not a parent of the parent of {b}")));
    }
    let g_b = *n
        .parents(p_b)
        .iter()
        .find(|&&p| p != p_a)
        .expect("a reticulation has two distinct parents");
    let w = n.visibility_set(g_b)?;
    let mut ed = Editor::from_network(n);
    ed.delete_vertex(vb.index());
    ed.delete_vertex(p_b.index());
    let reduced = normalize_and_build(ed)?;
    Ok((reduced, w))
}

/// Adds leaf `b` next to leaf `a`, making {a, b} a cherry.
pub fn attach_cherry(n: &Network, a: &str, b: &str) -> Result<Network, ReconstructError> {
    let va = leaf_vertex(n, a)?;
    if n.leaf_set().contains(b) {
        return Err(ReconstructError::LabelClash(b.to_string()));
    }
    let mut ed = Editor::from_network(n);
    let vb = ed.add_leaf(b);
    match n.parents(va).first() {
        Some(&p) => {
            let m = ed.subdivide(p.index(), va.index(), "p");
            ed.add_arc(m, vb);
        }
        None => {
            let root = ed.add_vertex("rho");
            ed.add_arc(root, va.index());
            ed.add_arc(root, vb);
        }
    }
    Ok(ed.build()?)
}

/// Adds leaf `b` under a new reticulation whose parents sit on the in-arcs
/// of leaf `a` and of the unique vertex whose visibility set equals `w`.
///
/// Zero matching vertices report [`ReconstructError::NoVisibilityMatch`];
/// several, or a match without an in-arc of its own to subdivide, report
/// [`ReconstructError::AmbiguousAttachment`]. Both mean no network in the
/// reconstructible class extends this partial network with this step.
pub fn attach_reticulated_cherry(
    n: &Network,
    a: &str,
    b: &str,
    w: &LeafSet,
) -> Result<Network, ReconstructError> {
    let va = leaf_vertex(n, a)?;
    if n.leaf_set().contains(b) {
        return Err(ReconstructError::LabelClash(b.to_string()));
    }
    if w.is_empty() {
        return Err(ReconstructError::MalformedCandidateSet(
            "candidate set is empty".into(),
        ));
    }
    if w.contains(a) || w.contains(b) {
        return Err(ReconstructError::MalformedCandidateSet(format!(
            "candidate set must avoid the pair ({a}, {b})"
        )));
    }
    if !w.is_subset(&n.leaf_set()) {
        return Err(ReconstructError::MalformedCandidateSet(format!(
            "candidate set {w} is not a subset of the leaf set {}",
            n.leaf_set()
        )));
    }

    let matches: Vec<VertexId> = n
        .vertices()
        .filter(|&v| n.visibility_set(v).expect("vertex of this network") == *w)
        .collect();
    let target = match matches.as_slice() {
        [] => return Err(ReconstructError::NoVisibilityMatch(w.clone())),
        [one] => *one,
        several => {
            return Err(ReconstructError::AmbiguousAttachment {
                targets: several.iter().map(|&v| n.name(v).to_string()).collect(),
                detail: format!("{} vertices share the visibility set {w}", several.len()),
            })
        }
    };

    let mut ed = Editor::from_network(n);
    let g = match n.parents(target).len() {
        1 => ed.subdivide(n.parents(target)[0].index(), target.index(), "g"),
        0 => {
            let g = ed.add_vertex("g");
            ed.add_arc(g, target.index());
            g
        }
        _ => {
            return Err(ReconstructError::AmbiguousAttachment {
                targets: vec![n.name(target).to_string()],
                detail: "the matching vertex is a reticulation, so it has no unique in-arc".into(),
            })
        }
    };
    let p_a = n.parents(va)[0];
    let m = ed.subdivide(p_a.index(), va.index(), "p");
    let h = ed.add_vertex("h");
    let vb = ed.add_leaf(b);
    ed.add_arc(m, h);
    ed.add_arc(g, h);
    ed.add_arc(h, vb);
    Ok(ed.build()?)
}

fn base_cherry(x: &str, y: &str) -> Network {
    let mut root = String::from("rho");
    while root == x || root == y {
        root.push('_');
    }
    build_network(
        &[(root.as_str(), x), (root.as_str(), y)],
        &[(x, x), (y, y)],
    )
    .expect("a two-leaf cherry is valid")
}

/// Reconstructs the unique normal network without near reticulations
/// displaying exactly the given triples, if one exists.
///
/// The result is always verified: `rooted_triples` of the returned network
/// equals the input set. Any discrepancy, along every dead end on the way
/// (no recognized cherry, impossible attachment), reports
/// [`ReconstructError::NotRealizableOrOutOfClass`] with the reason.
pub fn reconstruct_from_triples(r: &TripleSet) -> Result<Reconstruction, ReconstructError> {
    let mut current = r.clone();
    let mut steps: Vec<ReductionStep> = Vec::new();
    while current.universe().len() > 2 {
        match recognition::find_recognized_cherry(&current)? {
            RecognizedCherry::Cherry { a, b } => {
                current = current.remove_leaf(&b)?;
                steps.push(ReductionStep::Cherry { a, b });
            }
            RecognizedCherry::ReticulatedCherry { a, b, w, alternatives } => {
                current = current.remove_leaf(&b)?;
                steps.push(ReductionStep::ReticulatedCherry {
                    a,
                    b,
                    w: w.w,
                    alternatives,
                });
            }
            RecognizedCherry::NotFound => {
                return Err(ReconstructError::NotRealizableOrOutOfClass {
                    reason: format!(
                        "no recognized cherry on the {} remaining leaves {}",
                        current.universe().len(),
                        current.universe()
                    ),
                });
            }
        }
    }

    let base_labels = current.universe().to_vec();
    let mut network = match base_labels.as_slice() {
        [] => return Err(ReconstructError::EmptyUniverse),
        [x] => single_leaf_network(x),
        [x, y] => base_cherry(x, y),
        _ => unreachable!("the loop reduces to at most two leaves"),
    };

    for step in steps.iter().rev() {
        let attached = match step {
            ReductionStep::Cherry { a, b } => attach_cherry(&network, a, b),
            ReductionStep::ReticulatedCherry { a, b, w, .. } => {
                attach_reticulated_cherry(&network, a, b, w)
            }
        };
        network = attached.map_err(|e| ReconstructError::NotRealizableOrOutOfClass {
            reason: format!("replaying the reduction steps fails: {e}"),
        })?;
    }

    let recovered = rooted_triples(&network);
    if recovered != *r {
        let reason = if let Some(extra) = recovered.iter().find(|t| !r.contains(t)) {
            format!("the candidate network displays {extra}, which is not in the input")
        } else if let Some(missing) = r.iter().find(|t| !recovered.contains(t)) {
            format!("the candidate network does not display {missing}")
        } else {
            "the recovered universe differs from the input universe".into()
        };
        return Err(ReconstructError::NotRealizableOrOutOfClass { reason });
    }
    Ok(Reconstruction {
        network,
        steps,
        verified: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::are_isomorphic;
    use crate::triples::RootedTriple;

    fn three_leaf_fixture() -> Network {
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

    fn tree(newick_like: &[(&str, &str)], leaves: &[&str]) -> Network {
        let labels: Vec<(&str, &str)> = leaves.iter().map(|&l| (l, l)).collect();
        build_network(newick_like, &labels).unwrap()
    }

    fn set(universe: &[&str], triples: &[(&str, &str, &str)]) -> TripleSet {
        TripleSet::with_triples(
            universe.iter().copied().collect(),
            triples
                .iter()
                .map(|(a, b, z)| RootedTriple::new(a, b, z).unwrap()),
        )
        .unwrap()
    }

    #[test]
    fn cherry_reduction_on_a_tree() {
        let n = tree(&[("r", "p"), ("r", "c"), ("p", "a"), ("p", "b")], &["a", "b", "c"]);
        let reduced = reduce_cherry(&n, "a", "b").unwrap();
        assert_eq!(reduced.leaf_set(), ["a", "c"].iter().copied().collect());
        assert_eq!(reduced.arc_count(), 2);
        assert!(matches!(
            reduce_cherry(&n, "a", "c"),
            Err(ReconstructError::NotACherry { .. })
        ));
        assert!(matches!(
            reduce_cherry(&n, "a", "w"),
            Err(ReconstructError::UnknownLeaf(_))
        ));
    }

    #[test]
    fn cherry_reduction_to_a_single_vertex() {
        let n = tree(&[("r", "a"), ("r", "b")], &["a", "b"]);
        let reduced = reduce_cherry(&n, "a", "b").unwrap();
        assert_eq!(reduced.vertex_count(), 1);
        assert_eq!(reduced.leaf_set(), ["a"].iter().copied().collect());
    }

    #[test]
    fn reticulated_cherry_reduction_captures_the_visibility_set() {
        let n = three_leaf_fixture();
        let (reduced, w) = reduce_reticulated_cherry(&n, "a", "b").unwrap();
        assert_eq!(w, ["c"].iter().copied().collect());
        assert!(are_isomorphic(&reduced, &base_cherry("a", "c")));
        let (reduced, w) = reduce_reticulated_cherry(&n, "c", "b").unwrap();
        assert_eq!(w, ["a"].iter().copied().collect());
        assert!(are_isomorphic(&reduced, &base_cherry("a", "c")));
        assert!(matches!(
            reduce_reticulated_cherry(&n, "a", "c"),
            Err(ReconstructError::NotAReticulatedCherry { .. })
        ));
    }

    #[test]
    fn reduction_of_an_out_of_class_network_can_hit_a_parallel_arc() {
        let n = build_network(
            &[
                ("rho", "hb"),
                ("rho", "pa"),
                ("hb", "gb"),
                ("hb", "c"),
                ("gb", "pb"),
                ("gb", "c"),
                ("pa", "a"),
                ("pa", "pb"),
                ("pb", "b"),
                ("c", "d"),
            ],
            &[("a", "a"), ("b", "b"), ("d", "d")],
        )
        .unwrap();
        assert!(!n.is_normal());
        match reduce_reticulated_cherry(&n, "a", "b") {
            Err(ReconstructError::WouldCreateParallelArc { from, to }) => {
                assert_eq!((from.as_str(), to.as_str()), ("hb", "c"));
            }
            other => panic!("expected a parallel-arc failure, got {other:?}"),
        }
    }

    #[test]
    fn cherry_attachment_inverts_cherry_reduction() {
        let n = tree(&[("r", "p"), ("r", "c"), ("p", "a"), ("p", "b")], &["a", "b", "c"]);
        let reduced = reduce_cherry(&n, "a", "b").unwrap();
        let restored = attach_cherry(&reduced, "a", "b").unwrap();
        assert!(are_isomorphic(&n, &restored));

        let single = single_leaf_network("a");
        let grown = attach_cherry(&single, "a", "b").unwrap();
        assert!(are_isomorphic(&grown, &base_cherry("a", "b")));

        assert!(matches!(
            attach_cherry(&n, "a", "c"),
            Err(ReconstructError::LabelClash(_))
        ));
        assert!(matches!(
            attach_cherry(&n, "w", "x"),
            Err(ReconstructError::UnknownLeaf(_))
        ));
    }

    #[test]
    fn reticulated_cherry_attachment_inverts_its_reduction() {
        let n = three_leaf_fixture();
        let (reduced, w) = reduce_reticulated_cherry(&n, "a", "b").unwrap();
        let restored = attach_reticulated_cherry(&reduced, "a", "b", &w).unwrap();
        assert!(are_isomorphic(&n, &restored));
        assert_eq!(rooted_triples(&restored), rooted_triples(&n));
    }

    #[test]
    fn attachment_fails_without_a_visibility_match() {
        let n = tree(&[("r", "p"), ("r", "c"), ("p", "a"), ("p", "b")], &["a", "b", "c"]);
        let w: LeafSet = ["a", "c"].iter().copied().collect();
        match attach_reticulated_cherry(&n, "b", "d", &w) {
            Err(ReconstructError::NoVisibilityMatch(got)) => assert_eq!(got, w),
            other => panic!("expected a visibility mismatch, got {other:?}"),
        }
    }

    #[test]
    fn attachment_fails_on_an_ambiguous_visibility_match() {
        // In the fixture both the leaf a and its parent have visibility
        // set {a}, so no unique grandparent position exists.
        let n = three_leaf_fixture();
        let w: LeafSet = ["a"].iter().copied().collect();
        match attach_reticulated_cherry(&n, "c", "d", &w) {
            Err(ReconstructError::AmbiguousAttachment { targets, .. }) => {
                assert_eq!(targets, vec!["pa".to_string(), "a".to_string()]);
            }
            other => panic!("expected an ambiguous attachment, got {other:?}"),
        }
    }

    #[test]
    fn attachment_rejects_malformed_candidate_sets() {
        let n = three_leaf_fixture();
        let empty = LeafSet::new();
        assert!(matches!(
            attach_reticulated_cherry(&n, "a", "d", &empty),
            Err(ReconstructError::MalformedCandidateSet(_))
        ));
        let with_a: LeafSet = ["a", "c"].iter().copied().collect();
        assert!(matches!(
            attach_reticulated_cherry(&n, "a", "d", &with_a),
            Err(ReconstructError::MalformedCandidateSet(_))
        ));
        let outside: LeafSet = ["z"].iter().copied().collect();
        assert!(matches!(
            attach_reticulated_cherry(&n, "a", "d", &outside),
            Err(ReconstructError::MalformedCandidateSet(_))
        ));
    }

    #[test]
    fn reconstructs_the_fixture_from_its_triples() {
        let n = three_leaf_fixture();
        let r = rooted_triples(&n);
        let rec = reconstruct_from_triples(&r).unwrap();
        assert!(rec.verified);
        assert!(are_isomorphic(&rec.network, &n));
        assert_eq!(
            rec.steps,
            vec![ReductionStep::ReticulatedCherry {
                a: "a".into(),
                b: "b".into(),
                w: ["c"].iter().copied().collect(),
                alternatives: 0,
            }]
        );
    }

    #[test]
    fn reconstructs_trees_from_their_triples() {
        let n = tree(
            &[
                ("r", "p"),
                ("r", "q"),
                ("p", "a"),
                ("p", "b"),
                ("q", "c"),
                ("q", "d"),
            ],
            &["a", "b", "c", "d"],
        );
        let rec = reconstruct_from_triples(&rooted_triples(&n)).unwrap();
        assert!(are_isomorphic(&rec.network, &n));
        assert!(rec.steps.iter().all(|s| matches!(s, ReductionStep::Cherry { .. })));
    }

    #[test]
    fn reconstructs_tiny_universes() {
        let rec = reconstruct_from_triples(&set(&["a"], &[])).unwrap();
        assert_eq!(rec.network.vertex_count(), 1);
        let rec = reconstruct_from_triples(&set(&["a", "b"], &[])).unwrap();
        assert!(are_isomorphic(&rec.network, &base_cherry("a", "b")));
        assert!(matches!(
            reconstruct_from_triples(&TripleSet::new(LeafSet::new())),
            Err(ReconstructError::EmptyUniverse)
        ));
    }

    #[test]
    fn dense_cyclic_triples_are_rejected_as_unrealizable() {
        let r = set(
            &["a", "b", "c"],
            &[("a", "b", "c"), ("b", "c", "a"), ("a", "c", "b")],
        );
        assert!(matches!(
            reconstruct_from_triples(&r),
            Err(ReconstructError::NotRealizableOrOutOfClass { .. })
        ));
    }

    #[test]
    fn verification_catches_a_reducible_but_unrealizable_input() {
        // The steps reduce cleanly to a base cherry, but replaying them
        // yields the balanced tree on four leaves, which displays cd|b.
        let r = set(
            &["a", "b", "c", "d"],
            &[("a", "b", "c"), ("a", "b", "d"), ("c", "d", "a")],
        );
        match reconstruct_from_triples(&r) {
            Err(ReconstructError::NotRealizableOrOutOfClass { reason }) => {
                assert!(reason.contains("c d | b"), "unexpected reason: {reason}");
            }
            other => panic!("expected verification to fail, got {other:?}"),
        }
    }
}
