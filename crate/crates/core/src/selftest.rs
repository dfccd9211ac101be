//! Built-in acceptance suite: ten criteria over exhaustive and seeded samples.
//!
//! Each criterion is an independent check with a content-describing name.
//! The suite never panics on a failed property; it reports every criterion
//! as passed or failed with a one-line detail, so a single run gives the
//! whole picture. `Small` trims the sample sizes for a quick smoke run,
//! `Full` runs the sizes the suite is specified at.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::formats::{parse_enewick, write_enewick};
use crate::network::{are_isomorphic, build_network, Network, ReticulatedCherry};
use crate::recognition::{check_candidate_set, is_cherry_by_triples, CandidateVerdict};
use crate::reconstruct::{reconstruct_from_triples, reduce_cherry, reduce_reticulated_cherry};
use crate::surgery::Editor;
use crate::transforms::{
    indistinguishable_pair, nni_near_sibling, random_normal_network, GeneratorConfig, LeafGadget,
};
use crate::triples::{rooted_triples, TripleSet};

/// Sample sizes for one suite run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelftestSize {
    Small,
    Full,
}

/// Result of one criterion: its name, verdict, and a one-line summary.
#[derive(Debug, Clone)]
pub struct CriterionOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

struct Dims {
    tree_sizes: &'static [usize],
    tree_counts: &'static [usize],
    sample_size: u64,
    nni_cases_needed: usize,
    nni_seed_cap: u64,
    exhaustive_leaves: usize,
    random_characterizations: u64,
    near_sample_size: u64,
    tree_count_max: usize,
    format_random: u64,
}

impl Dims {
    fn for_size(size: SelftestSize) -> Dims {
        match size {
            SelftestSize::Full => Dims {
                tree_sizes: &[3, 4, 5],
                tree_counts: &[3, 15, 105],
                sample_size: 500,
                nni_cases_needed: 100,
                nni_seed_cap: 4000,
                exhaustive_leaves: 5,
                random_characterizations: 1000,
                near_sample_size: 60,
                tree_count_max: 9,
                format_random: 200,
            },
            SelftestSize::Small => Dims {
                tree_sizes: &[3, 4],
                tree_counts: &[3, 15],
                sample_size: 120,
                nni_cases_needed: 25,
                nni_seed_cap: 1500,
                exhaustive_leaves: 4,
                random_characterizations: 250,
                near_sample_size: 20,
                tree_count_max: 7,
                format_random: 50,
            },
        }
    }
}

const LEAF_NAMES: [&str; 9] = ["a", "b", "c", "d", "e", "f", "g", "h", "i"];

/// Enumerates every rooted binary tree on the given labels by attaching
/// each new leaf onto every arc and above the root of every smaller tree.
pub fn enumerate_trees(labels: &[&str]) -> Result<Vec<Network>, String> {
    #[derive(Clone)]
    struct Partial {
        arcs: Vec<(String, String)>,
        root: String,
        next: usize,
    }
    let mut states = vec![Partial {
        arcs: Vec::new(),
        root: labels[0].to_string(),
        next: 1,
    }];
    for &label in &labels[1..] {
        let mut grown = Vec::new();
        for t in &states {
            for i in 0..t.arcs.len() {
                let mut s = t.clone();
                let (u, v) = s.arcs[i].clone();
                let m = format!("i{}", s.next);
                s.next += 1;
                s.arcs[i] = (u, m.clone());
                s.arcs.push((m.clone(), v));
                s.arcs.push((m, label.to_string()));
                grown.push(s);
            }
            let mut s = t.clone();
            let m = format!("i{}", s.next);
            s.next += 1;
            s.arcs.push((m.clone(), s.root.clone()));
            s.arcs.push((m.clone(), label.to_string()));
            s.root = m;
            grown.push(s);
        }
        states = grown;
    }
    states
        .into_iter()
        .map(|t| {
            let leaf_pairs: Vec<(String, String)> = labels
                .iter()
                .map(|&l| (l.to_string(), l.to_string()))
                .collect();
            build_network(&t.arcs, &leaf_pairs)
                .map_err(|e| format!("the tree enumerator built an invalid tree: {e}"))
        })
        .collect()
}

/// Adds one reticulation by subdividing two distinct arcs and connecting
/// the new vertices; fails on candidates that validation rejects.
fn with_chord(n: &Network, tail_arc: usize, head_arc: usize) -> Option<Network> {
    let arcs = n.arcs();
    let (tu, tv) = arcs[tail_arc];
    let (hu, hv) = arcs[head_arc];
    let mut ed = Editor::from_network(n);
    let m_tail = ed.subdivide(tu.index(), tv.index(), "ct");
    let m_head = ed.subdivide(hu.index(), hv.index(), "ch");
    ed.add_arc(m_tail, m_head);
    ed.build().ok()
}

/// Every network reachable from `n` by one reticulation chord, in arc-pair
/// order; candidates that fail validation are skipped.
pub fn all_chord_extensions(n: &Network) -> Vec<Network> {
    let count = n.arc_count();
    let mut out = Vec::new();
    for i in 0..count {
        for j in 0..count {
            if i != j {
                if let Some(net) = with_chord(n, i, j) {
                    out.push(net);
                }
            }
        }
    }
    out
}

fn random_binary_network(seed: u64) -> Result<Network, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5e1f_7e57);
    let n_leaves = rng.random_range(3..=8usize);
    let tree_cfg = GeneratorConfig::new(rng.random(), n_leaves, 0);
    let mut net = random_normal_network(&tree_cfg).map_err(|e| e.to_string())?;
    let wanted = rng.random_range(0..=3usize);
    for _ in 0..wanted {
        for _attempt in 0..25 {
            let count = net.arc_count();
            let i = rng.random_range(0..count);
            let j = rng.random_range(0..count);
            if i == j {
                continue;
            }
            if let Some(candidate) = with_chord(&net, i, j) {
                net = candidate;
                break;
            }
        }
    }
    Ok(net)
}

struct SampleEntry {
    seed: u64,
    network: Network,
    triples: TripleSet,
}

fn build_sample(count: u64) -> Result<Vec<SampleEntry>, String> {
    (0..count)
        .map(|seed| {
            let n_leaves = 3 + (seed as usize % 6);
            let retics = (seed as usize % 4).min((n_leaves - 1) / 2);
            let cfg = GeneratorConfig::new(seed, n_leaves, retics);
            let network = random_normal_network(&cfg)
                .map_err(|e| format!("generation failed at seed {seed}: {e}"))?;
            let triples = rooted_triples(&network);
            Ok(SampleEntry {
                seed,
                network,
                triples,
            })
        })
        .collect()
}

fn tree_triples_determine_tree(d: &Dims) -> Result<String, String> {
    let mut pairs = 0usize;
    let mut total = 0usize;
    for (k, &n) in d.tree_sizes.iter().enumerate() {
        let trees = enumerate_trees(&LEAF_NAMES[..n])?;
        if trees.len() != d.tree_counts[k] {
            return Err(format!(
                "expected {} trees on {n} leaves, enumerated {}",
                d.tree_counts[k],
                trees.len()
            ));
        }
        total += trees.len();
        let triple_sets: Vec<TripleSet> = trees.iter().map(rooted_triples).collect();
        for i in 0..trees.len() {
            for j in (i + 1)..trees.len() {
                let same_triples = triple_sets[i] == triple_sets[j];
                let isomorphic = are_isomorphic(&trees[i], &trees[j]);
                if same_triples || isomorphic {
                    return Err(format!(
                        "distinct enumerated trees on {n} leaves at ({i}, {j}): \
                         same triples {same_triples}, isomorphic {isomorphic}"
                    ));
                }
                pairs += 1;
            }
        }
    }
    Ok(format!(
        "{total} trees over sizes {:?}, {pairs} pairs with triple sets separating exactly the \
         non-isomorphic ones",
        d.tree_sizes
    ))
}

fn reconstruction_roundtrip(sample: &[SampleEntry]) -> Result<String, String> {
    let mut with_retics = 0usize;
    for e in sample {
        let rec = reconstruct_from_triples(&e.triples)
            .map_err(|err| format!("seed {}: reconstruction failed: {err}", e.seed))?;
        if !rec.verified {
            return Err(format!("seed {}: result not verified", e.seed));
        }
        if !are_isomorphic(&rec.network, &e.network) {
            return Err(format!(
                "seed {}: reconstructed network is not isomorphic to the source",
                e.seed
            ));
        }
        if e.network.n_reticulations() > 0 {
            with_retics += 1;
        }
    }
    Ok(format!(
        "{} networks rebuilt from their triples, verified and isomorphic ({with_retics} with \
         reticulations)",
        sample.len()
    ))
}

fn nni_preserves_triples(d: &Dims) -> Result<String, String> {
    let mut found = 0usize;
    let mut seed = 100_000u64;
    let mut tried = 0u64;
    while found < d.nni_cases_needed && tried < d.nni_seed_cap {
        let n_leaves = 5 + (seed % 4) as usize;
        let retics = 2 + (seed % 2) as usize;
        tried += 1;
        let mut cfg = GeneratorConfig::new(seed, n_leaves, retics);
        cfg.forbid_near = false;
        seed += 1;
        let Ok(net) = random_normal_network(&cfg) else {
            continue;
        };
        let Some(pair) = net.near_sibling_pairs().into_iter().find(|p| !p.comparable) else {
            continue;
        };
        let u = net.name(pair.u).to_string();
        let v = net.name(pair.v).to_string();
        let moved = nni_near_sibling(&net, &u, &v)
            .map_err(|e| format!("seed {}: the move failed: {e}", cfg.seed))?;
        if rooted_triples(&net) != rooted_triples(&moved) {
            return Err(format!("seed {}: triple sets differ after the move", cfg.seed));
        }
        if are_isomorphic(&net, &moved) {
            return Err(format!("seed {}: the move produced an isomorphic network", cfg.seed));
        }
        if !moved.is_normal() {
            return Err(format!("seed {}: the moved network is not normal", cfg.seed));
        }
        found += 1;
    }
    if found < d.nni_cases_needed {
        return Err(format!(
            "only {found} of {} non-comparable near-sibling cases found in {tried} seeds",
            d.nni_cases_needed
        ));
    }
    Ok(format!(
        "{found} non-comparable near-sibling moves kept the triple set and changed the network"
    ))
}

fn indistinguishable_pair_fixture() -> Result<String, String> {
    for (gadget, tag) in [
        (LeafGadget::SingleLeaf, "single-leaf"),
        (LeafGadget::CherryPair, "cherry-pair"),
    ] {
        let (first, second) = indistinguishable_pair(gadget);
        if rooted_triples(&first) != rooted_triples(&second) {
            return Err(format!("{tag}: the pair does not share its triple set"));
        }
        if !first.is_normal() || !second.is_normal() {
            return Err(format!("{tag}: a network in the pair is not normal"));
        }
        if are_isomorphic(&first, &second) {
            return Err(format!("{tag}: the pair is isomorphic"));
        }
    }
    Ok("both leaf interpretations give normal, non-isomorphic networks with equal triple sets"
        .to_string())
}

fn characterizations_agree(n: &Network) -> Result<bool, String> {
    let tree_child = n.is_tree_child();
    let visible = n.all_vertices_visible();
    let unpaired =
        n.sibling_reticulation_pairs().is_empty() && n.stack_reticulation_pairs().is_empty();
    if tree_child != visible || visible != unpaired {
        return Err(format!(
            "characterizations disagree (tree-child {tree_child}, all visible {visible}, no \
             sibling or stacked reticulations {unpaired}) on {}",
            write_enewick(n).trim_end()
        ));
    }
    Ok(tree_child)
}

fn tree_child_characterizations_agree(d: &Dims) -> Result<String, String> {
    let mut checked = 0usize;
    let mut tree_child_count = 0usize;
    for n in 1..=d.exhaustive_leaves {
        let trees = enumerate_trees(&LEAF_NAMES[..n])?;
        for t in &trees {
            if characterizations_agree(t)? {
                tree_child_count += 1;
            }
            checked += 1;
            for one in all_chord_extensions(t) {
                if characterizations_agree(&one)? {
                    tree_child_count += 1;
                }
                checked += 1;
                for two in all_chord_extensions(&one) {
                    if characterizations_agree(&two)? {
                        tree_child_count += 1;
                    }
                    checked += 1;
                }
            }
        }
    }
    let exhaustive = checked;
    for seed in 0..d.random_characterizations {
        let n = random_binary_network(seed)?;
        if characterizations_agree(&n)? {
            tree_child_count += 1;
        }
        checked += 1;
    }
    Ok(format!(
        "{checked} networks agree on all three characterizations ({exhaustive} exhaustive with \
         up to {} leaves and 2 reticulations, {tree_child_count} tree-child overall)",
        d.exhaustive_leaves
    ))
}

fn reticulated_cherry_properties_for(
    triples: &TripleSet,
    network: &Network,
    rc: &ReticulatedCherry,
    check_vi: bool,
) -> Result<(), String> {
    let a = rc.a.as_str();
    let b = rc.b.as_str();
    let w = network
        .visibility_set(rc.g_b)
        .map_err(|e| format!("visibility of the second grandparent: {e}"))?;
    if w.is_empty() || w.contains(a) || w.contains(b) {
        return Err(format!(
            "visibility set {w} of the second grandparent is not a candidate for ({a}, {b})"
        ));
    }
    let leaves = triples.universe().to_vec();
    let outside_w_b: Vec<&String> = leaves
        .iter()
        .filter(|x| !w.contains(x) && x.as_str() != b)
        .collect();
    let distant: Vec<&String> = leaves
        .iter()
        .filter(|x| !w.contains(x) && x.as_str() != a && x.as_str() != b)
        .collect();
    for x in &leaves {
        if x != a && x != b && !triples.contains_triple(a, b, x) {
            return Err(format!("({a}, {b}): missing {a} {b} | {x}"));
        }
    }
    for c in w.iter() {
        if triples.contains_triple(a, c, b) {
            return Err(format!("({a}, {b}): unexpected {a} {c} | {b}"));
        }
        for x in &outside_w_b {
            if x.as_str() != c && !triples.contains_triple(b, c, x) {
                return Err(format!("({a}, {b}): missing {b} {c} | {x}"));
            }
        }
        for c2 in w.iter() {
            if c != c2 && triples.contains_triple(b, c, c2) {
                return Err(format!("({a}, {b}): unexpected {b} {c} | {c2}"));
            }
        }
        for x in &distant {
            let via_c = triples.contains_triple(c, x, a);
            let via_b = triples.contains_triple(b, x, a);
            if via_c != via_b {
                return Err(format!(
                    "({a}, {b}): {c} {x} | {a} and {b} {x} | {a} disagree ({via_c} vs {via_b})"
                ));
            }
        }
    }
    for x in &distant {
        for y in &distant {
            if x == y || !triples.contains_triple(b, x, y) || triples.contains_triple(a, x, y) {
                continue;
            }
            for c in w.iter() {
                if !triples.contains_triple(c, x, y) {
                    return Err(format!(
                        "({a}, {b}): {b} {x} | {y} present without {a} {x} | {y}, yet {c} {x} | \
                         {y} is missing"
                    ));
                }
            }
        }
    }
    if check_vi {
        for c in w.iter() {
            if !distant.iter().all(|x| triples.contains_triple(a, c, x)) {
                continue;
            }
            for x in &distant {
                if triples.contains_triple(a, x, c) || triples.contains_triple(a, x, b) {
                    return Err(format!(
                        "({a}, {b}): {a} pairs with {x} against {c} or {b} despite {a} {c} | x \
                         holding throughout"
                    ));
                }
            }
        }
        let verdict = check_candidate_set(triples, a, b, &w).map_err(|e| e.to_string())?;
        if let CandidateVerdict::Failed(failure) = verdict {
            return Err(format!("({a}, {b}): certification failed: {failure}"));
        }
    }
    Ok(())
}

fn reticulated_cherry_triple_properties(
    sample: &[SampleEntry],
    d: &Dims,
) -> Result<String, String> {
    let mut cherries_checked = 0usize;
    for e in sample {
        for rc in e.network.reticulated_cherries() {
            reticulated_cherry_properties_for(&e.triples, &e.network, &rc, true)
                .map_err(|err| format!("seed {}: {err}", e.seed))?;
            cherries_checked += 1;
        }
    }
    if cherries_checked == 0 {
        return Err("the sample exercised no reticulated cherries".to_string());
    }
    let mut near_checked = 0usize;
    for k in 0..d.near_sample_size {
        let seed = 300_000 + k;
        let n_leaves = 4 + (k as usize % 5);
        let retics = (1 + k as usize % 3).min(n_leaves - 2);
        let mut cfg = GeneratorConfig::new(seed, n_leaves, retics);
        cfg.forbid_near = false;
        let Ok(net) = random_normal_network(&cfg) else {
            continue;
        };
        let triples = rooted_triples(&net);
        let check_vi = !net.has_near_reticulations();
        for rc in net.reticulated_cherries() {
            reticulated_cherry_properties_for(&triples, &net, &rc, check_vi)
                .map_err(|err| format!("near-allowed seed {seed}: {err}"))?;
            near_checked += 1;
        }
    }
    Ok(format!(
        "{cherries_checked} reticulated cherries satisfied every property and certified, plus \
         {near_checked} from networks allowed near reticulations"
    ))
}

fn cherry_recognition_equivalence(sample: &[SampleEntry]) -> Result<String, String> {
    let mut pairs = 0usize;
    let mut cherry_pairs = 0usize;
    for e in sample {
        let structural: std::collections::BTreeSet<(String, String)> = e
            .network
            .cherries()
            .into_iter()
            .map(|(a, b)| if a <= b { (a, b) } else { (b, a) })
            .collect();
        let leaves = e.triples.universe().to_vec();
        for i in 0..leaves.len() {
            for j in (i + 1)..leaves.len() {
                let claimed = is_cherry_by_triples(&e.triples, &leaves[i], &leaves[j])
                    .map_err(|err| format!("seed {}: {err}", e.seed))?;
                let actual = structural.contains(&(leaves[i].clone(), leaves[j].clone()));
                if claimed != actual {
                    return Err(format!(
                        "seed {}: pair ({}, {}) recognized {claimed} but structurally {actual}",
                        e.seed, leaves[i], leaves[j]
                    ));
                }
                pairs += 1;
                if actual {
                    cherry_pairs += 1;
                }
            }
        }
    }
    Ok(format!(
        "{pairs} leaf pairs matched between triple recognition and structure ({cherry_pairs} \
         cherries)"
    ))
}

fn reduction_closure(sample: &[SampleEntry]) -> Result<String, String> {
    let mut reticulated_steps = 0usize;
    let mut cherry_steps = 0usize;
    for e in sample {
        let mut current = e.network.clone();
        let mut triples = e.triples.clone();
        while current.n_leaves() > 2 {
            let (reduced, removed_leaf, was_reticulated) =
                if let Some(rc) = current.reticulated_cherries().first() {
                    let (reduced, _w) = reduce_reticulated_cherry(&current, &rc.a, &rc.b)
                        .map_err(|err| format!("seed {}: {err}", e.seed))?;
                    (reduced, rc.b.clone(), true)
                } else if let Some((a, b)) = current.cherries().first() {
                    let reduced = reduce_cherry(&current, a, b)
                        .map_err(|err| format!("seed {}: {err}", e.seed))?;
                    (reduced, b.clone(), false)
                } else {
                    return Err(format!(
                        "seed {}: no cherry or reticulated cherry in a {}-leaf network",
                        e.seed,
                        current.n_leaves()
                    ));
                };
            if !reduced.is_normal() || reduced.has_near_reticulations() {
                return Err(format!(
                    "seed {}: a reduction left the class (removing {removed_leaf})",
                    e.seed
                ));
            }
            let expected = triples
                .remove_leaf(&removed_leaf)
                .map_err(|err| format!("seed {}: {err}", e.seed))?;
            let actual = rooted_triples(&reduced);
            if expected != actual {
                return Err(format!(
                    "seed {}: triples after removing {removed_leaf} do not match the reduced \
                     network",
                    e.seed
                ));
            }
            if was_reticulated {
                reticulated_steps += 1;
            } else {
                cherry_steps += 1;
            }
            current = reduced;
            triples = actual;
        }
    }
    if reticulated_steps == 0 {
        return Err("the sample exercised no reticulated-cherry reductions".to_string());
    }
    Ok(format!(
        "{reticulated_steps} reticulated-cherry and {cherry_steps} cherry reductions stayed \
         normal without near reticulations and kept exact triple bookkeeping"
    ))
}

fn tree_triple_count(d: &Dims) -> Result<String, String> {
    let mut trees = 0usize;
    for n in 3..=d.tree_count_max {
        for k in 0..12u64 {
            let cfg = GeneratorConfig::new(n as u64 * 131 + k, n, 0);
            let tree = random_normal_network(&cfg).map_err(|e| e.to_string())?;
            let expected = n * (n - 1) * (n - 2) / 6;
            let got = rooted_triples(&tree).len();
            if got != expected {
                return Err(format!(
                    "a tree on {n} leaves displays {got} triples, expected {expected}"
                ));
            }
            trees += 1;
        }
    }
    Ok(format!(
        "{trees} random trees with 3 to {} leaves each displayed exactly one triple per leaf \
         triple",
        d.tree_count_max
    ))
}

fn fixture_networks() -> Result<Vec<Network>, String> {
    let mut out = Vec::new();
    out.push(
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
        .map_err(|e| e.to_string())?,
    );
    out.push(
        build_network(&[("r", "a"), ("r", "b")], &[("a", "a"), ("b", "b")])
            .map_err(|e| e.to_string())?,
    );
    out.push(build_network::<&str>(&[], &[("a", "a")]).map_err(|e| e.to_string())?);
    for gadget in [LeafGadget::SingleLeaf, LeafGadget::CherryPair] {
        let (first, second) = indistinguishable_pair(gadget);
        out.push(first);
        out.push(second);
    }
    Ok(out)
}

fn rebuilt_with_reversed_arcs(n: &Network) -> Result<Network, String> {
    let mut arcs: Vec<(String, String)> = n
        .arcs()
        .into_iter()
        .map(|(u, v)| (n.name(u).to_string(), n.name(v).to_string()))
        .collect();
    arcs.reverse();
    let labels: Vec<(String, String)> = n
        .leaves()
        .map(|(v, l)| (n.name(v).to_string(), l.to_string()))
        .collect();
    build_network(&arcs, &labels).map_err(|e| e.to_string())
}

fn format_stability(d: &Dims) -> Result<String, String> {
    let mut networks = fixture_networks()?;
    for seed in 0..d.format_random {
        let n_leaves = 3 + (seed as usize % 6);
        let retics = (seed as usize % 4).min((n_leaves - 1) / 2);
        let mut cfg = GeneratorConfig::new(7000 + seed, n_leaves, retics);
        cfg.forbid_near = seed % 3 != 0;
        networks.push(random_normal_network(&cfg).map_err(|e| e.to_string())?);
    }
    let count = networks.len();
    for (k, n) in networks.into_iter().enumerate() {
        let text = write_enewick(&n);
        let back = parse_enewick(&text).map_err(|e| format!("network {k}: {e}"))?;
        if !are_isomorphic(&n, &back) {
            return Err(format!("network {k}: parse of {} lost structure", text.trim_end()));
        }
        if write_enewick(&back) != text {
            return Err(format!("network {k}: rewrite differs for {}", text.trim_end()));
        }
        let rebuilt = rebuilt_with_reversed_arcs(&n).map_err(|e| format!("network {k}: {e}"))?;
        if write_enewick(&rebuilt) != text {
            return Err(format!(
                "network {k}: construction order changed the canonical form {}",
                text.trim_end()
            ));
        }
    }
    Ok(format!(
        "{count} networks round-tripped and kept one canonical form under reparsing and \
         rebuilding"
    ))
}

/// Runs the ten criteria and reports each outcome; never panics on failure.
pub fn run(size: SelftestSize) -> Vec<CriterionOutcome> {
    let d = Dims::for_size(size);
    let sample = build_sample(d.sample_size);
    let on_sample = |f: &dyn Fn(&[SampleEntry]) -> Result<String, String>| match &sample {
        Ok(s) => f(s),
        Err(e) => Err(format!("sample generation failed: {e}")),
    };
    let results: Vec<(&'static str, Result<String, String>)> = vec![
        ("tree-triples-determine-tree", tree_triples_determine_tree(&d)),
        ("reconstruction-roundtrip", on_sample(&reconstruction_roundtrip)),
        ("nni-preserves-triples", nni_preserves_triples(&d)),
        ("indistinguishable-pair-fixture", indistinguishable_pair_fixture()),
        ("tree-child-characterizations-agree", tree_child_characterizations_agree(&d)),
        (
            "reticulated-cherry-triple-properties",
            match &sample {
                Ok(s) => reticulated_cherry_triple_properties(s, &d),
                Err(e) => Err(format!("sample generation failed: {e}")),
            },
        ),
        ("cherry-recognition-equivalence", on_sample(&cherry_recognition_equivalence)),
        ("reduction-closure", on_sample(&reduction_closure)),
        ("tree-triple-count", tree_triple_count(&d)),
        ("format-stability", format_stability(&d)),
    ];
    results
        .into_iter()
        .map(|(name, result)| match result {
            Ok(detail) => CriterionOutcome {
                name,
                passed: true,
                detail,
            },
            Err(detail) => CriterionOutcome {
                name,
                passed: false,
                detail,
            },
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_run_passes_every_criterion() {
        let outcomes = run(SelftestSize::Small);
        assert_eq!(outcomes.len(), 10);
        for o in &outcomes {
            assert!(o.passed, "{}: {}", o.name, o.detail);
        }
    }

    #[test]
    fn enumerated_tree_counts_match_the_closed_form() {
        for (n, count) in [(2usize, 1usize), (3, 3), (4, 15)] {
            let trees = enumerate_trees(&LEAF_NAMES[..n]).unwrap();
            assert_eq!(trees.len(), count, "on {n} leaves");
            for t in &trees {
                assert_eq!(t.n_leaves(), n);
                assert_eq!(t.n_reticulations(), 0);
            }
        }
    }

    #[test]
    fn chord_extensions_produce_valid_single_reticulation_networks() {
        let trees = enumerate_trees(&LEAF_NAMES[..3]).unwrap();
        let mut total = 0usize;
        for t in &trees {
            for n in all_chord_extensions(t) {
                assert_eq!(n.n_reticulations(), 1);
                assert_eq!(n.n_leaves(), 3);
                total += 1;
            }
        }
        assert!(total > 0);
    }
}
