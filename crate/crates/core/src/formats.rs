//! Text formats: extended Newick for networks, line documents for triples.
//!
//! Networks are written in extended Newick with reticulations as hybrid
//! nodes: the first time a reticulation is reached it is emitted as
//! `(subtree)#H<k>`, and its second parent refers to it as `#H<k>`. Tags
//! are numbered in order of first emission. Output is canonical: the two
//! children of every vertex are ordered by their sorted cluster lists
//! (equivalently, by smallest descendant leaf label, refined
//! deterministically), so isomorphic tree-child networks always serialize
//! to the same bytes. Networks that are not tree-child can have sibling
//! subtrees with identical clusters; a structural tiebreak keeps the
//! output deterministic for them too. Parsing accepts names over
//! `[A-Za-z0-9_.-]`, ignores branch lengths, ignores names on non-hybrid
//! internal vertices, and accepts a hybrid tag reference before or after
//! its defining occurrence. Every parse ends with full network validation.
//!
//! Triple documents hold one `x y | z` line per triple, `#` comments, and
//! an optional `leaves:` line declaring the universe, which may be larger
//! than the set of mentioned labels. The writer always emits the `leaves:`
//! line so that universes with fewer than three leaves survive the round
//! trip.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::network::{build_network, LeafSet, Network, NetworkError, VertexId};
use crate::triples::{RootedTriple, TripleSet};

/// Errors from reading either text format.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at line {line}, column {col}: {msg}")]
    SyntaxError { line: usize, col: usize, msg: String },
    #[error("hybrid tag #{0}: {1}")]
    HybridTagMismatch(String, String),
    #[error(transparent)]
    Validation(#[from] NetworkError),
}

fn is_name_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '-')
}

struct Scanner<'a> {
    src: &'a str,
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Scanner<'a> {
    fn new(src: &'a str) -> Scanner<'a> {
        Scanner {
            src,
            chars: src.chars().collect(),
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_whitespace(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.bump();
        }
    }

    fn error(&self, msg: impl Into<String>) -> ParseError {
        ParseError::SyntaxError {
            line: self.line,
            col: self.col,
            msg: msg.into(),
        }
    }

    fn take_name(&mut self) -> String {
        let mut name = String::new();
        while matches!(self.peek(), Some(c) if is_name_char(c)) {
            name.push(self.bump().expect("peeked"));
        }
        name
    }
}

struct PNode {
    name: Option<String>,
    tag: Option<String>,
    children: Vec<usize>,
    has_list: bool,
    line: usize,
    col: usize,
}

fn parse_node(sc: &mut Scanner<'_>, arena: &mut Vec<PNode>) -> Result<usize, ParseError> {
    sc.skip_whitespace();
    let (line, col) = (sc.line, sc.col);
    let mut node = PNode {
        name: None,
        tag: None,
        children: Vec::new(),
        has_list: false,
        line,
        col,
    };
    match sc.peek() {
        Some('(') => {
            sc.bump();
            node.has_list = true;
            loop {
                let child = parse_node(sc, arena)?;
                node.children.push(child);
                sc.skip_whitespace();
                match sc.peek() {
                    Some(',') => {
                        sc.bump();
                    }
                    Some(')') => {
                        sc.bump();
                        break;
                    }
                    Some(c) => return Err(sc.error(format!("expected ',' or ')', found {c:?}"))),
                    None => return Err(sc.error("expected ',' or ')', found end of input")),
                }
            }
            sc.skip_whitespace();
            let name = sc.take_name();
            if !name.is_empty() {
                node.name = Some(name);
            }
        }
        Some(c) if is_name_char(c) => {
            node.name = Some(sc.take_name());
        }
        Some('#') => {}
        Some(c) => return Err(sc.error(format!("expected a subtree or a name, found {c:?}"))),
        None => return Err(sc.error("expected a subtree or a name, found end of input")),
    }
    if sc.peek() == Some('#') {
        sc.bump();
        let tag = sc.take_name();
        if tag.is_empty() {
            return Err(sc.error("expected a hybrid tag after '#'"));
        }
        node.tag = Some(tag);
    }
    if sc.peek() == Some(':') {
        sc.bump();
        let mut length = String::new();
        while matches!(sc.peek(), Some(c) if c.is_ascii_digit() || matches!(c, '.' | 'e' | 'E' | '+' | '-'))
        {
            length.push(sc.bump().expect("peeked"));
        }
        if length.is_empty() {
            return Err(sc.error("expected a branch length after ':'"));
        }
    }
    if node.name.is_none() && node.tag.is_none() && !node.has_list {
        return Err(ParseError::SyntaxError {
            line,
            col,
            msg: "empty node".into(),
        });
    }
    arena.push(node);
    Ok(arena.len() - 1)
}

fn fresh_name(hint: String, used: &mut std::collections::BTreeSet<String>) -> String {
    let mut name = hint.clone();
    let mut k = 1usize;
    while used.contains(&name) {
        k += 1;
        name = format!("{hint}_{k}");
    }
    used.insert(name.clone());
    name
}

/// Parses one extended-Newick statement into a validated network.
pub fn parse_enewick(text: &str) -> Result<Network, ParseError> {
    let mut sc = Scanner::new(text);
    let mut arena: Vec<PNode> = Vec::new();
    let root = parse_node(&mut sc, &mut arena)?;
    sc.skip_whitespace();
    match sc.peek() {
        Some(';') => {
            sc.bump();
        }
        Some(c) => return Err(sc.error(format!("expected ';', found {c:?}"))),
        None => return Err(sc.error("expected ';', found end of input")),
    }
    sc.skip_whitespace();
    if let Some(c) = sc.peek() {
        return Err(sc.error(format!("unexpected content after ';': {c:?}")));
    }
    let _ = sc.src;

    let mut occurrences: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, node) in arena.iter().enumerate() {
        if let Some(tag) = &node.tag {
            occurrences.entry(tag.clone()).or_default().push(i);
        }
    }
    let mut used: std::collections::BTreeSet<String> = std::collections::BTreeSet::new();
    for node in &arena {
        if node.tag.is_none() && !node.has_list {
            if let Some(name) = &node.name {
                used.insert(name.clone());
            }
        }
    }
    let mut hybrid_names: BTreeMap<String, String> = BTreeMap::new();
    for (tag, occs) in &occurrences {
        if occs.len() != 2 {
            return Err(ParseError::HybridTagMismatch(
                tag.clone(),
                format!("appears {} times, expected exactly 2", occs.len()),
            ));
        }
        let with_list = occs.iter().filter(|&&i| arena[i].has_list).count();
        if with_list != 1 {
            return Err(ParseError::HybridTagMismatch(
                tag.clone(),
                format!("{with_list} of 2 occurrences carry a subtree, expected exactly 1"),
            ));
        }
        let mut names: Vec<&String> = occs.iter().filter_map(|&i| arena[i].name.as_ref()).collect();
        names.dedup();
        if names.len() > 1 {
            return Err(ParseError::HybridTagMismatch(
                tag.clone(),
                format!("conflicting names {} and {}", names[0], names[1]),
            ));
        }
        let hint = names.first().map_or_else(|| tag.clone(), |n| (*n).clone());
        hybrid_names.insert(tag.clone(), fresh_name(hint, &mut used));
    }

    let mut final_names: Vec<Option<String>> = vec![None; arena.len()];
    let mut labels: Vec<(String, String)> = Vec::new();
    let mut seen_labels: std::collections::BTreeSet<String> = std::collections::BTreeSet::new();
    let mut internal_counter = 0usize;
    for (i, node) in arena.iter().enumerate() {
        if let Some(tag) = &node.tag {
            final_names[i] = Some(hybrid_names[tag].clone());
        } else if !node.has_list {
            let label = node.name.clone().ok_or(ParseError::SyntaxError {
                line: node.line,
                col: node.col,
                msg: "a leaf needs a label".into(),
            })?;
            let vertex = if seen_labels.insert(label.clone()) {
                label.clone()
            } else {
                fresh_name(format!("{label}_dup"), &mut used)
            };
            labels.push((vertex.clone(), label));
            final_names[i] = Some(vertex);
        } else {
            internal_counter += 1;
            final_names[i] = Some(fresh_name(format!("v{internal_counter}"), &mut used));
        }
    }

    let mut arcs: Vec<(String, String)> = Vec::new();
    let mut stack = vec![root];
    while let Some(i) = stack.pop() {
        let parent = final_names[i].clone().expect("assigned above");
        for &c in arena[i].children.iter().rev() {
            arcs.push((parent.clone(), final_names[c].clone().expect("assigned above")));
            stack.push(c);
        }
    }
    Ok(build_network(&arcs, &labels)?)
}

fn structural_key(n: &Network, v: VertexId, memo: &mut BTreeMap<VertexId, String>) -> String {
    if let Some(s) = memo.get(&v) {
        return s.clone();
    }
    let s = match n.leaf_label(v) {
        Some(label) => label.to_string(),
        None => {
            let mut parts: Vec<String> = n
                .children(v)
                .iter()
                .map(|&c| structural_key(n, c, memo))
                .collect();
            parts.sort();
            let marker = if n.parents(v).len() == 2 { "#" } else { "" };
            format!("({}){marker}", parts.join(","))
        }
    };
    memo.insert(v, s.clone());
    s
}

fn emit_enewick(
    n: &Network,
    v: VertexId,
    out: &mut String,
    tags: &mut BTreeMap<VertexId, usize>,
    memo: &mut BTreeMap<VertexId, String>,
) {
    let is_reticulation = n.parents(v).len() == 2;
    if is_reticulation {
        if let Some(&k) = tags.get(&v) {
            let _ = write!(out, "#H{k}");
            return;
        }
        let k = tags.len() + 1;
        tags.insert(v, k);
    }
    if let Some(label) = n.leaf_label(v) {
        out.push_str(label);
        return;
    }
    let mut kids: Vec<VertexId> = n.children(v).to_vec();
    if kids.len() == 2 {
        let ordering = {
            let ca = n.cluster_set(kids[0]).expect("vertex of this network");
            let cb = n.cluster_set(kids[1]).expect("vertex of this network");
            ca.cmp(cb)
        };
        let swap = match ordering {
            std::cmp::Ordering::Greater => true,
            std::cmp::Ordering::Equal => {
                structural_key(n, kids[0], memo) > structural_key(n, kids[1], memo)
            }
            std::cmp::Ordering::Less => false,
        };
        if swap {
            kids.swap(0, 1);
        }
    }
    out.push('(');
    for (i, &c) in kids.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        emit_enewick(n, c, out, tags, memo);
    }
    out.push(')');
    if is_reticulation {
        let _ = write!(out, "#H{}", tags[&v]);
    }
}

/// Serializes a network canonically; see the module notes on determinism.
pub fn write_enewick(n: &Network) -> String {
    let mut out = String::new();
    let mut tags = BTreeMap::new();
    let mut memo = BTreeMap::new();
    emit_enewick(n, n.root(), &mut out, &mut tags, &mut memo);
    out.push_str(";\n");
    out
}

/// Parses a triple document: `x y | z` lines, `#` comments, and at most
/// one `leaves:` universe declaration.
pub fn parse_triples(text: &str) -> Result<TripleSet, ParseError> {
    let mut declared: Option<LeafSet> = None;
    let mut parsed: Vec<(usize, String, String, String)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("leaves:") {
            if declared.is_some() {
                return Err(ParseError::SyntaxError {
                    line: line_no,
                    col: 1,
                    msg: "duplicate leaves: line".into(),
                });
            }
            let mut universe = LeafSet::new();
            for token in rest.split_whitespace() {
                if !token.chars().all(is_name_char) {
                    return Err(ParseError::SyntaxError {
                        line: line_no,
                        col: 1,
                        msg: format!("bad leaf label {token:?}"),
                    });
                }
                universe.insert(token);
            }
            declared = Some(universe);
            continue;
        }
        let (pair_part, outgroup_part) = line.split_once('|').ok_or(ParseError::SyntaxError {
            line: line_no,
            col: 1,
            msg: "expected 'x y | z'".into(),
        })?;
        let pair: Vec<&str> = pair_part.split_whitespace().collect();
        let outgroup: Vec<&str> = outgroup_part.split_whitespace().collect();
        if pair.len() != 2 || outgroup.len() != 1 {
            return Err(ParseError::SyntaxError {
                line: line_no,
                col: 1,
                msg: "expected 'x y | z'".into(),
            });
        }
        for token in pair.iter().chain(&outgroup) {
            if !token.chars().all(is_name_char) {
                return Err(ParseError::SyntaxError {
                    line: line_no,
                    col: 1,
                    msg: format!("bad leaf label {token:?}"),
                });
            }
        }
        parsed.push((
            line_no,
            pair[0].to_string(),
            pair[1].to_string(),
            outgroup[0].to_string(),
        ));
    }

    let universe = declared.unwrap_or_else(|| {
        parsed
            .iter()
            .flat_map(|(_, x, y, z)| [x.clone(), y.clone(), z.clone()])
            .collect()
    });
    let mut set = TripleSet::new(universe);
    for (line_no, x, y, z) in parsed {
        let triple = RootedTriple::new(&x, &y, &z).map_err(|e| ParseError::SyntaxError {
            line: line_no,
            col: 1,
            msg: e.to_string(),
        })?;
        set.insert(triple).map_err(|e| ParseError::SyntaxError {
            line: line_no,
            col: 1,
            msg: e.to_string(),
        })?;
    }
    Ok(set)
}

/// Serializes a triple set with its universe, one triple per line.
pub fn write_triples(r: &TripleSet) -> String {
    let mut out = String::from("leaves:");
    for leaf in r.universe().iter() {
        out.push(' ');
        out.push_str(leaf);
    }
    out.push('\n');
    for t in r.iter() {
        let _ = writeln!(out, "{t}");
    }
    out
}

/// Writes the arcs and leaf labels as one record per line, for audits.
pub fn write_arcs(n: &Network) -> String {
    let mut out = String::new();
    for (u, v) in n.arcs() {
        let _ = writeln!(out, "arc {} {}", n.name(u), n.name(v));
    }
    for (v, label) in n.leaves() {
        let _ = writeln!(out, "leaf {} {label}", n.name(v));
    }
    out
}

/// Writes a DOT digraph, best effort, for visual inspection.
pub fn write_dot(n: &Network) -> String {
    let mut out = String::from("digraph network {\n  rankdir=TB;\n");
    for v in n.vertices() {
        let name = n.name(v);
        match n.leaf_label(v) {
            Some(label) => {
                let _ = writeln!(out, "  \"{name}\" [shape=none, label=\"{label}\"];");
            }
            None if n.parents(v).len() == 2 => {
                let _ = writeln!(out, "  \"{name}\" [shape=box, label=\"{name}\"];");
            }
            None => {
                let _ = writeln!(out, "  \"{name}\" [shape=point];");
            }
        }
    }
    for (u, v) in n.arcs() {
        let _ = writeln!(out, "  \"{}\" -> \"{}\";", n.name(u), n.name(v));
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::are_isomorphic;
    use crate::transforms::{random_normal_network, GeneratorConfig};
    use crate::triples::rooted_triples;

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

    #[test]
    fn canonical_output_of_the_fixtures() {
        assert_eq!(write_enewick(&three_leaf_fixture()), "((a,(b)#H1),(#H1,c));\n");
        let cherry = build_network(&[("r", "a"), ("r", "b")], &[("a", "a"), ("b", "b")]).unwrap();
        assert_eq!(write_enewick(&cherry), "(a,b);\n");
        let single = build_network::<&str>(&[], &[("a", "a")]).unwrap();
        assert_eq!(write_enewick(&single), "a;\n");
    }

    #[test]
    fn parses_plain_trees() {
        let n = parse_enewick("((a,b),c);").unwrap();
        assert_eq!(n.n_leaves(), 3);
        assert_eq!(n.n_reticulations(), 0);
        assert_eq!(n.cherries(), vec![("a".to_string(), "b".to_string())]);
    }

    #[test]
    fn parses_hybrid_notation_into_the_fixture() {
        let n = parse_enewick("((a,(b)#H1),(#H1,c));").unwrap();
        assert!(are_isomorphic(&n, &three_leaf_fixture()));
        // The tag reference may precede the defining occurrence, names and
        // branch lengths are tolerated, and the canonical form is restored.
        let shuffled = parse_enewick("((#H1:2.0,c)right,(a,(b:1)x#H1):0.5)myroot;").unwrap();
        assert!(are_isomorphic(&shuffled, &three_leaf_fixture()));
        assert_eq!(write_enewick(&shuffled), "((a,(b)#H1),(#H1,c));\n");
    }

    #[test]
    fn syntax_errors_carry_positions() {
        match parse_enewick("((a,b;") {
            Err(ParseError::SyntaxError { line, col, .. }) => {
                assert_eq!(line, 1);
                assert_eq!(col, 6);
            }
            other => panic!("expected a syntax error, got {other:?}"),
        }
        assert!(matches!(
            parse_enewick("(a,b);;"),
            Err(ParseError::SyntaxError { .. })
        ));
        assert!(matches!(
            parse_enewick("(a,b(;"),
            Err(ParseError::SyntaxError { .. })
        ));
        assert!(matches!(
            parse_enewick(""),
            Err(ParseError::SyntaxError { .. })
        ));
    }

    #[test]
    fn hybrid_tag_mismatches_are_detected() {
        assert!(matches!(
            parse_enewick("((a,(b)#H1),c);"),
            Err(ParseError::HybridTagMismatch(..))
        ));
        assert!(matches!(
            parse_enewick("(((b)#H1,a),((c)#H1,d));"),
            Err(ParseError::HybridTagMismatch(..))
        ));
        assert!(matches!(
            parse_enewick("((a,(b)#H1),(#H1,(#H1,c)));"),
            Err(ParseError::HybridTagMismatch(..))
        ));
    }

    #[test]
    fn validation_errors_are_forwarded() {
        assert!(matches!(
            parse_enewick("(a,a);"),
            Err(ParseError::Validation(NetworkError::DuplicateLabel(_)))
        ));
        assert!(matches!(
            parse_enewick("((a),b);"),
            Err(ParseError::Validation(NetworkError::DegreeViolation { .. }))
        ));
    }

    #[test]
    fn roundtrips_generated_networks() {
        for seed in 0..25u64 {
            let n_leaves = 3 + (seed as usize % 5);
            let n_retics = (seed as usize % 3).min((n_leaves - 1) / 2);
            let mut cfg = GeneratorConfig::new(seed, n_leaves, n_retics);
            cfg.forbid_near = seed % 2 == 0;
            let n = random_normal_network(&cfg).unwrap();
            let text = write_enewick(&n);
            let back = parse_enewick(&text).unwrap();
            assert!(are_isomorphic(&n, &back), "seed {seed}: {text}");
            assert_eq!(write_enewick(&back), text, "seed {seed}");
        }
    }

    #[test]
    fn canonical_form_is_stable_under_renaming() {
        // The same network with permuted child order and different internal
        // names serializes identically.
        let a = parse_enewick("((a,(b)#H1),(#H1,c));").unwrap();
        let b = parse_enewick("((#Hq,c),((b)#Hq,a));").unwrap();
        assert_eq!(write_enewick(&a), write_enewick(&b));
    }

    #[test]
    fn triple_documents_roundtrip() {
        let r = rooted_triples(&three_leaf_fixture());
        let text = write_triples(&r);
        assert_eq!(text, "leaves: a b c\na b | c\nb c | a\n");
        assert_eq!(parse_triples(&text).unwrap(), r);
    }

    #[test]
    fn triple_documents_tolerate_comments_and_infer_universes() {
        let text = "# a comment\n\n  a b | c  # trailing\nb c | a\n";
        let r = parse_triples(text).unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r.universe().to_vec(), vec!["a", "b", "c"]);
        let declared = parse_triples("leaves: a b c d\na b | c\n").unwrap();
        assert_eq!(declared.universe().len(), 4);
        assert!(declared.contains_triple("a", "b", "c"));
        let empty = parse_triples("leaves: x y\n").unwrap();
        assert!(empty.is_empty());
        assert_eq!(empty.universe().len(), 2);
    }

    #[test]
    fn triple_document_errors_carry_line_numbers() {
        match parse_triples("a b | c\nq r s\n") {
            Err(ParseError::SyntaxError { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected a syntax error, got {other:?}"),
        }
        assert!(matches!(
            parse_triples("leaves: a b c\nleaves: d e\n"),
            Err(ParseError::SyntaxError { .. })
        ));
        match parse_triples("leaves: a b c\na b | z\n") {
            Err(ParseError::SyntaxError { line, msg, .. }) => {
                assert_eq!(line, 2);
                assert!(msg.contains('z'));
            }
            other => panic!("expected a syntax error, got {other:?}"),
        }
        assert!(matches!(
            parse_triples("a a | b\n"),
            Err(ParseError::SyntaxError { .. })
        ));
    }

    #[test]
    fn arc_and_dot_listings_are_deterministic() {
        let n = three_leaf_fixture();
        let arcs = write_arcs(&n);
        assert!(arcs.starts_with("arc r g\narc r pa\n"));
        assert!(arcs.ends_with("leaf a a\nleaf b b\nleaf c c\n"));
        let dot = write_dot(&n);
        assert!(dot.starts_with("digraph network {"));
        assert!(dot.contains("\"pb\" [shape=box"));
        assert!(dot.contains("\"r\" -> \"g\";"));
    }
}
