//! Local rearrangement, the indistinguishable pair, and a seeded generator.
//!
//! The NNI move here acts on a near-sibling reticulation pair (u, v): with
//! t a tree vertex over children v and s, and s a tree vertex over u and
//! w, it detaches w, suppresses s, subdivides (t, v), and rehangs w there,
//! so u and v trade places under t. Every rooted triple of the input stays
//! displayed. When u and v are non-comparable the result of the move on a
//! normal network is again normal and displays exactly the same triples,
//! which is why triples cannot pin down networks with such pairs. When
//! they are comparable the arc from t to u becomes a shortcut: the result
//! leaves the normal class and can display strictly more triples, see the
//! comparable-pair test below for a four-leaf witness.
//!
//! [`indistinguishable_pair`] returns two non-isomorphic normal networks
//! with the same rooted triples on four placeholder positions, each filled
//! by a single leaf or by a two-leaf cherry. Their quartet caterpillar
//! sets differ, so quartets separate what triples cannot.
//!
//! [`random_normal_network`] grows a network from a single leaf by seeded
//! expansion moves, the inverses of the two cherry reductions, rejecting
//! any intermediate that leaves the target class. Every normal network is
//! the endpoint of some such move sequence, so the sampler's support is
//! the whole class.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::network::{build_network, Network, NetworkError, VertexId};
use crate::reconstruct::{attach_cherry, ReconstructError};
use crate::surgery::Editor;

/// Errors from rearrangement and generation.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransformError {
    #[error("no vertex is named {0}")]
    UnknownVertex(String),
    #[error("({u}, {v}) is not a near-sibling reticulation pair: {detail}")]
    NotNearSiblingPair { u: String, v: String, detail: String },
    #[error("the move would create a parallel arc from {from} to {to}")]
    WouldCreateParallelArc { from: String, to: String },
    #[error("bad generator configuration: {0}")]
    BadConfig(String),
    #[error("generation gave up after {attempts} rejected expansion moves")]
    GenerationBudgetExhausted { attempts: usize },
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// How the four placeholder positions of the indistinguishable pair are
/// filled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeafGadget {
    /// Each position is one labeled leaf.
    SingleLeaf,
    /// Each position is a tree vertex over a two-leaf cherry.
    CherryPair,
}

fn vertex_by_name(n: &Network, name: &str) -> Result<VertexId, TransformError> {
    n.vertex_by_name(name)
        .ok_or_else(|| TransformError::UnknownVertex(name.to_string()))
}

/// Applies the near-sibling NNI move to the pair (u, v), given by vertex
/// name. If both parents of u support the move, the one with the
/// lexicographically smaller name is used.
///
/// The result displays every rooted triple of the input; the sets are
/// equal when u and v are non-comparable, and then a normal input yields a
/// normal result. On comparable pairs the result acquires a shortcut, so
/// callers that need to stay in class must check [`Network::is_normal`].
pub fn nni_near_sibling(n: &Network, u: &str, v: &str) -> Result<Network, TransformError> {
    let vu = vertex_by_name(n, u)?;
    let vv = vertex_by_name(n, v)?;
    let not = |detail: String| TransformError::NotNearSiblingPair {
        u: u.into(),
        v: v.into(),
        detail,
    };
    if n.parents(vu).len() != 2 {
        return Err(not(format!("{u} is not a reticulation")));
    }
    if n.parents(vv).len() != 2 {
        return Err(not(format!("{v} is not a reticulation")));
    }

    let mut candidates: Vec<(VertexId, VertexId)> = Vec::new();
    for &s in n.parents(vu) {
        if n.parents(s).len() != 1 || n.children(s).len() != 2 {
            continue;
        }
        let t = n.parents(s)[0];
        if n.parents(t).len() != 1 || n.children(t).len() != 2 {
            continue;
        }
        if n.children(t).iter().any(|&c| c == vv) {
            candidates.push((t, s));
        }
    }
    candidates.sort_by(|a, b| n.name(a.1).cmp(n.name(b.1)));
    let (t, s) = *candidates
        .first()
        .ok_or_else(|| not("no tree vertex over both a parent of u and v".into()))?;
    let w = *n
        .children(s)
        .iter()
        .find(|&&c| c != vu)
        .expect("a tree vertex has two children");

    let mut ed = Editor::from_network(n);
    ed.delete_arc(s.index(), w.index());
    ed.suppress(s.index())
        .map_err(|(from, to)| TransformError::WouldCreateParallelArc { from, to })?;
    let m = ed.subdivide(t.index(), vv.index(), "s");
    ed.add_arc(m, w.index());
    Ok(ed.build()?)
}

fn gadget_network(core_arcs: &[(&str, &str)], gadget: LeafGadget) -> Network {
    let positions = ["w1", "w2", "w3", "w4"];
    match gadget {
        LeafGadget::SingleLeaf => {
            let labels: Vec<(&str, &str)> = positions.iter().map(|&w| (w, w)).collect();
            build_network(core_arcs, &labels).expect("the fixture is valid")
        }
        LeafGadget::CherryPair => {
            let mut arcs: Vec<(String, String)> = core_arcs
                .iter()
                .map(|&(x, y)| (x.to_string(), y.to_string()))
                .collect();
            let mut labels: Vec<(String, String)> = Vec::new();
            for w in positions {
                for side in ["a", "b"] {
                    let leaf = format!("{w}{side}");
                    arcs.push((w.to_string(), leaf.clone()));
                    labels.push((leaf.clone(), leaf));
                }
            }
            build_network(&arcs, &labels).expect("the fixture is valid")
        }
    }
}

/// Two non-isomorphic normal networks with identical rooted triple sets.
///
/// Both have a comparable near-sibling pair, which is how they evade the
/// uniqueness that holds without near reticulations. Their quartet
/// caterpillar sets differ.
pub fn indistinguishable_pair(gadget: LeafGadget) -> (Network, Network) {
    let first = gadget_network(
        &[
            ("rho", "qv"),
            ("rho", "pv"),
            ("qv", "w1"),
            ("qv", "v"),
            ("pv", "v"),
            ("pv", "pu"),
            ("v", "qu"),
            ("qu", "w2"),
            ("qu", "u"),
            ("pu", "u"),
            ("pu", "w4"),
            ("u", "w3"),
        ],
        gadget,
    );
    let second = gadget_network(
        &[
            ("rho", "qvp"),
            ("rho", "pu"),
            ("qvp", "vp"),
            ("qvp", "qv"),
            ("pu", "vp"),
            ("pu", "w4"),
            ("vp", "pup"),
            ("pup", "up"),
            ("pup", "w3"),
            ("qv", "w1"),
            ("qv", "up"),
            ("up", "w2"),
        ],
        gadget,
    );
    (first, second)
}

/// Parameters for [`random_normal_network`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub n_leaves: usize,
    pub n_reticulations: usize,
    /// Reject intermediates with near-sibling or near-stack pairs, keeping
    /// the result inside the class that reconstruction handles.
    pub forbid_near: bool,
    /// Total rejected expansion moves tolerated before giving up.
    pub max_rejections: usize,
}

impl GeneratorConfig {
    pub fn new(seed: u64, n_leaves: usize, n_reticulations: usize) -> GeneratorConfig {
        GeneratorConfig {
            seed,
            n_leaves,
            n_reticulations,
            forbid_near: true,
            max_rejections: 10_000,
        }
    }
}

/// The k-th label in the sequence a, b, .., z, aa, ab, ..
fn label_for(mut k: usize) -> String {
    let mut s = Vec::new();
    loop {
        s.push(b'a' + (k % 26) as u8);
        k /= 26;
        if k == 0 {
            break;
        }
        k -= 1;
    }
    s.reverse();
    String::from_utf8(s).expect("ascii letters")
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Move {
    Cherry,
    Retic,
}

fn retic_expansion(n: &Network, leaf: VertexId, arc: (VertexId, VertexId), label: &str) -> Network {
    let mut ed = Editor::from_network(n);
    let m = ed.subdivide(arc.0.index(), arc.1.index(), "m");
    let p = ed
        .parent_of(leaf.index())
        .expect("a leaf of a multi-leaf network has a parent");
    let q = ed.subdivide(p, leaf.index(), "q");
    let h = ed.add_vertex("h");
    let b = ed.add_leaf(label);
    ed.add_arc(m, h);
    ed.add_arc(q, h);
    ed.add_arc(h, b);
    ed.build().expect("the expansion is structurally valid")
}

/// Grows a seeded pseudorandom network with the requested number of leaves
/// (labeled a, b, .., z, aa, ..) and reticulations.
///
/// The same configuration always returns the same network. Expansion moves
/// that leave normality, or that create near reticulations while
/// `forbid_near` is set, are rejected and retried with fresh random
/// choices, up to `max_rejections` in total.
pub fn random_normal_network(cfg: &GeneratorConfig) -> Result<Network, TransformError> {
    if cfg.n_leaves == 0 {
        return Err(TransformError::BadConfig("at least one leaf is required".into()));
    }
    if cfg.n_reticulations > 0 && cfg.n_reticulations + 2 > cfg.n_leaves {
        return Err(TransformError::BadConfig(format!(
            "{} reticulations need at least {} leaves: every reduction chain \
             ends with a plain cherry, so a normal network has at most its \
             leaf count minus two reticulations",
            cfg.n_reticulations,
            cfg.n_reticulations + 2
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n_moves = cfg.n_leaves - 1;
    let mut rejections = 0usize;
    'generation: loop {
        let mut plan = vec![Move::Cherry; n_moves];
        for slot in plan.iter_mut().take(cfg.n_reticulations) {
            *slot = Move::Retic;
        }
        plan.shuffle(&mut rng);
        // Defer reticulation moves that the intermediate network cannot
        // absorb yet: after m moves there are m + 1 leaves, a normal
        // network needs two more leaves than reticulations, and keeping
        // near reticulations out costs another leaf per reticulation. A
        // too-early move would reject forever, so the next cherry move is
        // pulled forward instead.
        let mut retics_placed = 0usize;
        for i in 0..plan.len() {
            if plan[i] == Move::Cherry {
                continue;
            }
            let k = retics_placed + 1;
            let min_position = if cfg.forbid_near { 2 * k } else { k + 1 };
            if i + 1 < min_position {
                if let Some(j) = (i + 1..plan.len()).find(|&j| plan[j] == Move::Cherry) {
                    plan.swap(i, j);
                    continue;
                }
            }
            retics_placed = k;
        }

        let mut network =
            build_network::<&str>(&[], &[("a", "a")]).expect("a single labeled vertex is valid");
        for (step, &mv) in plan.iter().enumerate() {
            let label = label_for(step + 1);
            match mv {
                Move::Cherry => {
                    let leaves: Vec<String> =
                        network.leaves().map(|(_, l)| l.to_string()).collect();
                    let anchor = &leaves[rng.random_range(0..leaves.len())];
                    network = match attach_cherry(&network, anchor, &label) {
                        Ok(next) => next,
                        Err(ReconstructError::Network(e)) => return Err(e.into()),
                        Err(e) => unreachable!("cherry expansion cannot fail: {e}"),
                    };
                }
                Move::Retic => {
                    let leaves: Vec<VertexId> = network.leaves().map(|(v, _)| v).collect();
                    let mut options: Vec<(VertexId, (VertexId, VertexId))> = Vec::new();
                    for &leaf in &leaves {
                        for &arc in &network.arcs() {
                            options.push((leaf, arc));
                        }
                    }
                    options.shuffle(&mut rng);
                    let mut placed = None;
                    for (leaf, arc) in options {
                        let candidate = retic_expansion(&network, leaf, arc, &label);
                        if candidate.is_normal()
                            && (!cfg.forbid_near || !candidate.has_near_reticulations())
                        {
                            placed = Some(candidate);
                            break;
                        }
                        rejections += 1;
                        if rejections > cfg.max_rejections {
                            return Err(TransformError::GenerationBudgetExhausted {
                                attempts: rejections,
                            });
                        }
                    }
                    match placed {
                        Some(next) => network = next,
                        // This intermediate admits no reticulation at all,
                        // so retrying arcs cannot help; regrow from scratch
                        // on the same random stream.
                        None => continue 'generation,
                    }
                }
            }
        }
        return Ok(network);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::are_isomorphic;
    use crate::triples::{quartet_caterpillars, rooted_triples};

    fn nni_fixture() -> Network {
        build_network(
            &[
                ("rho", "t"),
                ("rho", "z"),
                ("t", "v"),
                ("t", "s"),
                ("s", "u"),
                ("s", "w1"),
                ("v", "w2"),
                ("u", "w3"),
                ("z", "x1"),
                ("z", "x2"),
                ("x1", "v"),
                ("x1", "w4"),
                ("x2", "u"),
                ("x2", "w5"),
            ],
            &[("w1", "w1"), ("w2", "w2"), ("w3", "w3"), ("w4", "w4"), ("w5", "w5")],
        )
        .unwrap()
    }

    #[test]
    fn nni_on_a_non_comparable_pair_stays_normal() {
        let n = nni_fixture();
        assert!(n.is_normal());
        let pairs = n.near_sibling_pairs();
        assert_eq!(pairs.len(), 1);
        assert_eq!(n.name(pairs[0].u), "u");
        assert_eq!(n.name(pairs[0].v), "v");
        assert!(!pairs[0].comparable);

        let moved = nni_near_sibling(&n, "u", "v").unwrap();
        assert!(moved.is_normal());
        assert_eq!(rooted_triples(&moved), rooted_triples(&n));
        assert!(!are_isomorphic(&moved, &n));
    }

    #[test]
    fn nni_on_a_comparable_pair_leaves_the_class() {
        let (n, _) = indistinguishable_pair(LeafGadget::SingleLeaf);
        let pairs = n.near_sibling_pairs();
        assert_eq!(pairs.len(), 1);
        assert!(pairs[0].comparable);
        let (u, v) = (n.name(pairs[0].u).to_string(), n.name(pairs[0].v).to_string());

        let moved = nni_near_sibling(&n, &u, &v).unwrap();
        assert!(!moved.is_normal());
        assert!(!moved.shortcuts().is_empty());
        // The input's triples survive the move, but the shortcut opens one
        // extra embedding, so the sets are not equal.
        let before = rooted_triples(&n);
        let after = rooted_triples(&moved);
        assert!(before.iter().all(|t| after.contains(t)));
        let extra: Vec<String> = after
            .iter()
            .filter(|t| !before.contains(t))
            .map(|t| t.to_string())
            .collect();
        assert_eq!(extra, vec!["w2 w4 | w3".to_string()]);
    }

    #[test]
    fn nni_rejects_pairs_without_the_shape() {
        let n = nni_fixture();
        assert!(matches!(
            nni_near_sibling(&n, "v", "u"),
            Err(TransformError::NotNearSiblingPair { .. })
        ));
        assert!(matches!(
            nni_near_sibling(&n, "w1", "v"),
            Err(TransformError::NotNearSiblingPair { .. })
        ));
        assert!(matches!(
            nni_near_sibling(&n, "nope", "v"),
            Err(TransformError::UnknownVertex(_))
        ));
    }

    #[test]
    fn the_indistinguishable_pair_shares_triples_but_not_quartets() {
        let (n1, n2) = indistinguishable_pair(LeafGadget::SingleLeaf);
        assert!(n1.is_normal());
        assert!(n2.is_normal());
        assert!(n1.has_near_reticulations());
        assert!(n2.has_near_reticulations());
        // The reticulations u and v of the first network form a comparable
        // near-sibling and near-stack pair at once.
        let sib = n1.near_sibling_pairs();
        assert_eq!(sib.len(), 1);
        assert_eq!((n1.name(sib[0].u), n1.name(sib[0].v)), ("u", "v"));
        assert!(sib[0].comparable);
        let stack = n1.near_stack_pairs();
        assert_eq!(stack.len(), 1);
        assert_eq!((n1.name(stack[0].u), n1.name(stack[0].v)), ("v", "u"));
        assert!(stack[0].comparable);
        assert!(!are_isomorphic(&n1, &n2));
        let r1 = rooted_triples(&n1);
        assert_eq!(r1, rooted_triples(&n2));
        assert_eq!(r1.len(), 8);
        assert!(r1.contains_triple("w2", "w3", "w1"));
        assert!(r1.contains_triple("w2", "w3", "w4"));
        assert!(r1.contains_triple("w1", "w2", "w4"));
        assert!(r1.contains_triple("w1", "w2", "w3"));
        assert!(r1.contains_triple("w3", "w4", "w1"));
        assert!(r1.contains_triple("w3", "w4", "w2"));
        assert!(r1.contains_triple("w2", "w4", "w1"));
        assert!(r1.contains_triple("w1", "w3", "w4"));

        let q1 = quartet_caterpillars(&n1);
        let q2 = quartet_caterpillars(&n2);
        assert_ne!(q1, q2);
        let display = |q: &std::collections::BTreeSet<_>| -> Vec<String> {
            q.iter().map(|c| format!("{c}")).collect()
        };
        assert_eq!(
            display(&q1),
            vec!["w2 w3 | w1 | w4", "w2 w3 | w4 | w1", "w3 w4 | w2 | w1"]
        );
        assert_eq!(
            display(&q2),
            vec!["w1 w2 | w3 | w4", "w2 w3 | w1 | w4", "w2 w3 | w4 | w1"]
        );
    }

    #[test]
    fn the_cherry_gadget_pair_behaves_like_the_leaf_pair() {
        let (n1, n2) = indistinguishable_pair(LeafGadget::CherryPair);
        assert_eq!(n1.n_leaves(), 8);
        assert!(n1.is_normal());
        assert!(n2.is_normal());
        assert!(!are_isomorphic(&n1, &n2));
        assert_eq!(rooted_triples(&n1), rooted_triples(&n2));
        assert_ne!(quartet_caterpillars(&n1), quartet_caterpillars(&n2));
    }

    #[test]
    fn labels_extend_past_the_alphabet() {
        assert_eq!(label_for(0), "a");
        assert_eq!(label_for(25), "z");
        assert_eq!(label_for(26), "aa");
        assert_eq!(label_for(27), "ab");
        assert_eq!(label_for(2 * 26), "ba");
    }

    #[test]
    fn generation_is_deterministic_and_in_class() {
        let cfg = GeneratorConfig::new(7, 8, 3);
        let n1 = random_normal_network(&cfg).unwrap();
        let n2 = random_normal_network(&cfg).unwrap();
        assert_eq!(n1.arcs(), n2.arcs());
        assert!(are_isomorphic(&n1, &n2));
        assert_eq!(n1.n_leaves(), 8);
        assert_eq!(n1.n_reticulations(), 3);
        assert!(n1.is_normal());
        assert!(!n1.has_near_reticulations());
    }

    #[test]
    fn generation_covers_a_spread_of_shapes() {
        let shapes = [
            (3, 0),
            (3, 1),
            (4, 0),
            (4, 1),
            (5, 1),
            (5, 2),
            (6, 2),
            (7, 2),
            (8, 3),
        ];
        for seed in 0..3u64 {
            for &(n_leaves, n_retics) in &shapes {
                let cfg = GeneratorConfig::new(seed, n_leaves, n_retics);
                let n = random_normal_network(&cfg).unwrap_or_else(|e| {
                    panic!("seed {seed}, {n_leaves} leaves, {n_retics} reticulations: {e}")
                });
                assert_eq!(n.n_leaves(), n_leaves);
                assert_eq!(n.n_reticulations(), n_retics);
                assert!(n.is_normal());
                assert!(!n.has_near_reticulations());
            }
        }
    }

    #[test]
    fn unrealizable_shapes_exhaust_the_rejection_budget() {
        // Four leaves and two reticulations admit no normal network free of
        // near reticulations: such a network would reduce to the unique
        // three-leaf one-reticulation network, whose visibility sets never
        // single out an attachment point for the second reticulation. The
        // sampler therefore rejects forever, whatever the seed.
        for seed in 0..3u64 {
            let mut cfg = GeneratorConfig::new(seed, 4, 2);
            cfg.max_rejections = 300;
            assert!(matches!(
                random_normal_network(&cfg),
                Err(TransformError::GenerationBudgetExhausted { .. })
            ));
        }
    }

    #[test]
    fn generation_can_keep_near_reticulations_when_allowed() {
        let mut found_near = false;
        for seed in 0..40u64 {
            let mut cfg = GeneratorConfig::new(seed, 6, 3);
            cfg.forbid_near = false;
            let n = random_normal_network(&cfg).unwrap();
            assert!(n.is_normal());
            if n.has_near_reticulations() {
                found_near = true;
            }
        }
        assert!(found_near, "no seed produced a near reticulation");
    }

    #[test]
    fn generator_rejects_bad_configurations() {
        assert!(matches!(
            random_normal_network(&GeneratorConfig::new(0, 0, 0)),
            Err(TransformError::BadConfig(_))
        ));
        assert!(matches!(
            random_normal_network(&GeneratorConfig::new(0, 2, 1)),
            Err(TransformError::BadConfig(_))
        ));
        assert!(matches!(
            random_normal_network(&GeneratorConfig::new(0, 4, 3)),
            Err(TransformError::BadConfig(_))
        ));
        let single = random_normal_network(&GeneratorConfig::new(0, 1, 0)).unwrap();
        assert_eq!(single.vertex_count(), 1);
    }
}
