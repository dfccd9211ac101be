//! Command-line front end: triples, class checks, reconstruction, moves,
//! generation, and the built-in acceptance suite.
//!
//! Exit codes: 0 for success or a positive answer, 1 for usage, I/O, or
//! parse errors (diagnostics on the error stream), 2 for a semantically
//! negative answer (not isomorphic, outside the class, not realizable, a
//! failed suite). `--json` switches every subcommand to a single JSON
//! object on standard output with a `schema_version` field. Paths accept
//! `-` for standard input, so the subcommands compose as a pipeline.

use std::io::Read;
use std::path::PathBuf;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use normnet::formats::{parse_enewick, parse_triples, write_arcs, write_dot, write_enewick, write_triples};
use normnet::network::{are_isomorphic, Network, VertexKind};
use normnet::reconstruct::{reconstruct_from_triples, ReconstructError, ReductionStep};
use normnet::selftest::{run as run_selftest, SelftestSize};
use normnet::transforms::{nni_near_sibling, random_normal_network, GeneratorConfig};
use normnet::triples::{quartet_caterpillars, rooted_triples};

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(name = "normnet", version, about = "Rooted binary phylogenetic networks: \
triples, recognition, reconstruction, and transforms")]
struct Cli {
    /// Emit one machine-readable JSON object instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    #[default]
    Enewick,
    Arcs,
    Dot,
}

#[derive(Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
enum SizeArg {
    Small,
    #[default]
    Full,
}

#[derive(Subcommand)]
enum Command {
    /// Print the rooted triples a network displays.
    Triples {
        /// Network file in extended Newick, or - for standard input.
        #[arg(default_value = "-")]
        net: PathBuf,
        /// Also print the displayed four-leaf caterpillars as comments.
        #[arg(long)]
        quartets: bool,
    },
    /// Describe a network; exit 0 only if it is normal with no near reticulations.
    Check {
        #[arg(default_value = "-")]
        net: PathBuf,
        /// Also list every vertex with its kind and neighbors.
        #[arg(long)]
        ids: bool,
    },
    /// Rebuild the unique in-class network displaying a set of triples.
    Reconstruct {
        /// Triple document, or - for standard input.
        #[arg(default_value = "-")]
        triples: PathBuf,
        /// Write the network here instead of standard output.
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t)]
        format: OutputFormat,
    },
    /// Compare two networks up to leaf-label-preserving isomorphism.
    Iso { a: PathBuf, b: PathBuf },
    /// Apply the near-sibling interchange at a pair of reticulations.
    Nni {
        #[arg(default_value = "-")]
        net: PathBuf,
        /// The two reticulation names, comma separated (see check --ids).
        #[arg(long, value_name = "U,V")]
        pair: String,
        #[arg(long, value_enum, default_value_t)]
        format: OutputFormat,
    },
    /// Generate a seeded random normal network.
    Gen {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        leaves: usize,
        #[arg(long, default_value_t = 0)]
        retics: usize,
        /// Allow near-sibling and near-stack reticulations.
        #[arg(long)]
        allow_near: bool,
        #[arg(long, value_enum, default_value_t)]
        format: OutputFormat,
    },
    /// Run the built-in acceptance suite.
    Selftest {
        #[arg(long, value_enum, default_value_t)]
        size: SizeArg,
    },
}

fn read_input(path: &PathBuf) -> Result<String> {
    if path.as_os_str() == "-" {
        let mut text = String::new();
        std::io::stdin()
            .read_to_string(&mut text)
            .context("reading standard input")?;
        Ok(text)
    } else {
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
    }
}

fn load_network(path: &PathBuf) -> Result<Network> {
    let text = read_input(path)?;
    parse_enewick(&text).map_err(|e| anyhow!("{}: {e}", source_name(path)))
}

fn source_name(path: &PathBuf) -> String {
    if path.as_os_str() == "-" {
        "standard input".to_string()
    } else {
        path.display().to_string()
    }
}

fn render_network(n: &Network, format: OutputFormat) -> String {
    match format {
        OutputFormat::Enewick => write_enewick(n),
        OutputFormat::Arcs => write_arcs(n),
        OutputFormat::Dot => write_dot(n),
    }
}

fn kind_name(kind: &VertexKind) -> &'static str {
    match kind {
        VertexKind::Root => "root",
        VertexKind::TreeVertex => "tree",
        VertexKind::Reticulation => "reticulation",
        VertexKind::Leaf(_) => "leaf",
    }
}

fn cmd_triples(net: &PathBuf, quartets: bool, as_json: bool) -> Result<i32> {
    let network = load_network(net)?;
    let triples = rooted_triples(&network);
    if as_json {
        let mut object = json!({
            "schema_version": SCHEMA_VERSION,
            "leaves": triples.universe().to_vec(),
            "triples": triples.iter().map(|t| t.to_string()).collect::<Vec<_>>(),
        });
        if quartets {
            let q: Vec<String> = quartet_caterpillars(&network)
                .iter()
                .map(|c| c.to_string())
                .collect();
            object["quartets"] = json!(q);
        }
        println!("{object}");
    } else {
        print!("{}", write_triples(&triples));
        if quartets {
            for c in quartet_caterpillars(&network) {
                println!("# quartet {c}");
            }
        }
    }
    Ok(0)
}

fn cmd_check(net: &PathBuf, ids: bool, as_json: bool) -> Result<i32> {
    let network = load_network(net)?;
    let name = |v| network.name(v).to_string();
    let near_sibling: Vec<_> = network.near_sibling_pairs();
    let near_stack: Vec<_> = network.near_stack_pairs();
    let in_class = network.is_normal() && near_sibling.is_empty() && near_stack.is_empty();
    let visibility: Vec<(String, Vec<String>)> = network
        .vertices()
        .map(|v| {
            let set = network
                .visibility_set(v)
                .expect("vertex of this network")
                .to_vec();
            (name(v), set)
        })
        .collect();
    if as_json {
        let object = json!({
            "schema_version": SCHEMA_VERSION,
            "binary_acyclic": true,
            "leaves": network.leaf_set().to_vec(),
            "vertices": network.vertex_count(),
            "arcs": network.arc_count(),
            "reticulations": network.reticulations().iter().map(|&v| name(v)).collect::<Vec<_>>(),
            "tree_child": network.is_tree_child(),
            "shortcuts": network.shortcuts().iter().map(|&(u, v)| [name(u), name(v)]).collect::<Vec<_>>(),
            "normal": network.is_normal(),
            "near_sibling": near_sibling.iter().map(|p| json!({
                "u": name(p.u), "v": name(p.v), "comparable": p.comparable,
            })).collect::<Vec<_>>(),
            "near_stack": near_stack.iter().map(|p| json!({
                "u": name(p.u), "v": name(p.v), "comparable": p.comparable,
            })).collect::<Vec<_>>(),
            "cherries": network.cherries(),
            "reticulated_cherries": network.reticulated_cherries().iter().map(|rc| json!({
                "a": rc.a, "b": rc.b, "grandparent": name(rc.g_b),
            })).collect::<Vec<_>>(),
            "visibility": visibility.iter().cloned().collect::<std::collections::BTreeMap<_, _>>(),
            "in_class": in_class,
        });
        println!("{object}");
        return Ok(if in_class { 0 } else { 2 });
    }
    println!("binary and acyclic: yes (validated on parse)");
    println!(
        "vertices {} arcs {} leaves {} reticulations {}",
        network.vertex_count(),
        network.arc_count(),
        network.n_leaves(),
        network.n_reticulations()
    );
    println!("tree-child: {}", network.is_tree_child());
    let shortcuts = network.shortcuts();
    println!(
        "shortcuts: {}",
        if shortcuts.is_empty() {
            "none".to_string()
        } else {
            shortcuts
                .iter()
                .map(|&(u, v)| format!("({}, {})", name(u), name(v)))
                .collect::<Vec<_>>()
                .join(" ")
        }
    );
    println!("normal: {}", network.is_normal());
    for (label, pairs) in [("near-sibling", &near_sibling), ("near-stack", &near_stack)] {
        if pairs.is_empty() {
            println!("{label} reticulations: none");
        } else {
            for p in pairs {
                println!(
                    "{label} reticulations: ({}, {}) {}",
                    name(p.u),
                    name(p.v),
                    if p.comparable { "comparable" } else { "non-comparable" }
                );
            }
        }
    }
    for (a, b) in network.cherries() {
        println!("cherry: ({a}, {b})");
    }
    for rc in network.reticulated_cherries() {
        println!(
            "reticulated cherry: ({}, {}) with reticulation leaf {} and grandparent {}",
            rc.a,
            rc.b,
            rc.b,
            name(rc.g_b)
        );
    }
    for (vertex, set) in &visibility {
        println!("visibility {vertex}: {{{}}}", set.join(", "));
    }
    if ids {
        for v in network.vertices() {
            let kind = network.vertex_kind(v).expect("vertex of this network");
            println!(
                "vertex {} kind {} parents [{}] children [{}]",
                name(v),
                kind_name(&kind),
                network.parents(v).iter().map(|&p| name(p)).collect::<Vec<_>>().join(", "),
                network.children(v).iter().map(|&c| name(c)).collect::<Vec<_>>().join(", ")
            );
        }
    }
    println!(
        "verdict: {}",
        if in_class {
            "normal with no near reticulations"
        } else {
            "outside the reconstructible class"
        }
    );
    Ok(if in_class { 0 } else { 2 })
}

fn describe_step(step: &ReductionStep) -> serde_json::Value {
    match step {
        ReductionStep::Cherry { a, b } => json!({ "kind": "cherry", "a": a, "b": b }),
        ReductionStep::ReticulatedCherry { a, b, w, alternatives } => json!({
            "kind": "reticulated-cherry",
            "a": a,
            "b": b,
            "w": w.to_vec(),
            "alternatives": alternatives,
        }),
    }
}

fn cmd_reconstruct(
    triples_path: &PathBuf,
    out: Option<&PathBuf>,
    format: OutputFormat,
    as_json: bool,
) -> Result<i32> {
    let text = read_input(triples_path)?;
    let triples =
        parse_triples(&text).map_err(|e| anyhow!("{}: {e}", source_name(triples_path)))?;
    match reconstruct_from_triples(&triples) {
        Ok(rec) => {
            let rendered = render_network(&rec.network, format);
            if as_json {
                println!(
                    "{}",
                    json!({
                        "schema_version": SCHEMA_VERSION,
                        "verified": rec.verified,
                        "steps": rec.steps.iter().map(describe_step).collect::<Vec<_>>(),
                        "network": rendered,
                    })
                );
            }
            match out {
                Some(path) => std::fs::write(path, &rendered)
                    .with_context(|| format!("writing {}", path.display()))?,
                None if !as_json => print!("{rendered}"),
                None => {}
            }
            Ok(0)
        }
        Err(err @ ReconstructError::NotRealizableOrOutOfClass { .. }) => {
            if as_json {
                println!(
                    "{}",
                    json!({
                        "schema_version": SCHEMA_VERSION,
                        "verified": false,
                        "error": err.to_string(),
                    })
                );
            } else {
                eprintln!("normnet: {err}");
            }
            Ok(2)
        }
        Err(err) => Err(anyhow!("{err}")),
    }
}

fn cmd_iso(a: &PathBuf, b: &PathBuf, as_json: bool) -> Result<i32> {
    let first = load_network(a)?;
    let second = load_network(b)?;
    let isomorphic = are_isomorphic(&first, &second);
    if as_json {
        println!(
            "{}",
            json!({ "schema_version": SCHEMA_VERSION, "isomorphic": isomorphic })
        );
    } else {
        println!("{}", if isomorphic { "isomorphic" } else { "not isomorphic" });
    }
    Ok(if isomorphic { 0 } else { 2 })
}

fn cmd_nni(net: &PathBuf, pair: &str, format: OutputFormat, as_json: bool) -> Result<i32> {
    let network = load_network(net)?;
    let (u, v) = pair
        .split_once(',')
        .ok_or_else(|| anyhow!("--pair expects two names separated by a comma, got {pair:?}"))?;
    let moved = nni_near_sibling(&network, u.trim(), v.trim())?;
    let rendered = render_network(&moved, format);
    if as_json {
        println!(
            "{}",
            json!({
                "schema_version": SCHEMA_VERSION,
                "network": rendered,
                "normal": moved.is_normal(),
            })
        );
    } else {
        print!("{rendered}");
    }
    Ok(0)
}

fn cmd_gen(
    seed: u64,
    leaves: usize,
    retics: usize,
    allow_near: bool,
    format: OutputFormat,
    as_json: bool,
) -> Result<i32> {
    let mut cfg = GeneratorConfig::new(seed, leaves, retics);
    cfg.forbid_near = !allow_near;
    let network = random_normal_network(&cfg)?;
    let rendered = render_network(&network, format);
    if as_json {
        println!(
            "{}",
            json!({
                "schema_version": SCHEMA_VERSION,
                "seed": seed,
                "leaves": leaves,
                "retics": retics,
                "network": rendered,
            })
        );
    } else {
        print!("{rendered}");
    }
    Ok(0)
}

fn cmd_selftest(size: SizeArg, as_json: bool) -> Result<i32> {
    let outcomes = run_selftest(match size {
        SizeArg::Small => SelftestSize::Small,
        SizeArg::Full => SelftestSize::Full,
    });
    let all_passed = outcomes.iter().all(|o| o.passed);
    if as_json {
        println!(
            "{}",
            json!({
                "schema_version": SCHEMA_VERSION,
                "passed": all_passed,
                "outcomes": outcomes.iter().map(|o| json!({
                    "name": o.name,
                    "passed": o.passed,
                    "detail": o.detail,
                })).collect::<Vec<_>>(),
            })
        );
    } else {
        for (k, o) in outcomes.iter().enumerate() {
            println!(
                "criterion {:02} {} {}: {}",
                k + 1,
                if o.passed { "pass" } else { "FAIL" },
                o.name,
                o.detail
            );
        }
        println!("suite: {}", if all_passed { "pass" } else { "FAIL" });
    }
    Ok(if all_passed { 0 } else { 2 })
}

fn run(cli: Cli) -> Result<i32> {
    match &cli.command {
        Command::Triples { net, quartets } => cmd_triples(net, *quartets, cli.json),
        Command::Check { net, ids } => cmd_check(net, *ids, cli.json),
        Command::Reconstruct { triples, out, format } => {
            cmd_reconstruct(triples, out.as_ref(), *format, cli.json)
        }
        Command::Iso { a, b } => cmd_iso(a, b, cli.json),
        Command::Nni { net, pair, format } => cmd_nni(net, pair, *format, cli.json),
        Command::Gen { seed, leaves, retics, allow_near, format } => {
            cmd_gen(*seed, *leaves, *retics, *allow_near, *format, cli.json)
        }
        Command::Selftest { size } => cmd_selftest(*size, cli.json),
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version requests are successes; everything else is a
            // usage error reported on the error stream.
            if err.use_stderr() {
                eprint!("{err}");
                std::process::exit(1);
            }
            print!("{err}");
            std::process::exit(0);
        }
    };
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("normnet: {err:#}");
            std::process::exit(1);
        }
    }
}
