//! Binary rooted phylogenetic networks, their displayed rooted triples, and
//! reconstruction of normal networks from triple sets.
//!
//! The crate is organized around one pipeline:
//!
//! - [`network`]: validated binary networks, class predicates (tree-child,
//!   normal, near reticulations), cherries, and label-respecting isomorphism.
//! - [`triples`]: switchings, the displayed triple set R(N), and quartet
//!   caterpillars.
//! - [`recognition`]: recognizing cherries and reticulated cherries from a
//!   triple set alone, via candidate sets.
//! - [`reconstruct`]: cherry reductions, their inverse attachments, and
//!   triple-set reconstruction with mandatory verification.
//! - [`transforms`]: the near-sibling NNI rewrite, a seeded generator of
//!   normal networks, and the bundled indistinguishable pair.
//! - [`formats`]: extended Newick and triple documents, plus arc-list and
//!   DOT debug output.
//! - [`selftest`]: the acceptance suite, runnable from tests or the CLI.
//!
//! The `parallel` feature (default) routes switching enumeration, candidate
//! searches, and batch suites through rayon; disabling it selects sequential
//! code with identical results.

pub mod formats;
pub mod network;
pub mod recognition;
pub mod reconstruct;
pub mod selftest;
mod surgery;
pub mod transforms;
pub mod triples;
