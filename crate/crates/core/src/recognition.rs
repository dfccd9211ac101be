//! Recognizing cherries and reticulated cherries from a triple set alone.
//!
//! A pair {a, b} reads as a cherry when every triple containing both a and b
//! has {a, b} as its pair. It reads as a reticulated cherry with
//! reticulation leaf b when ab|x holds for every other leaf x and some
//! candidate set W certifies the five properties W1..W5 below. On the
//! triple set of a normal network without near reticulations these readings
//! match the structural cherries exactly, which is what the reconstruction
//! in [`crate::reconstruct`] relies on; on arbitrary input they are
//! heuristics whose output is only trusted after final verification.
//!
//! For leaves a, b and a candidate W with b not in W, writing D for the
//! leaves outside W and {a, b}:
//!
//! - W1: for every c in W and every x outside W and b: bc|x is present,
//!   and ac|b is absent.
//! - W2: for distinct c, c' in W: bc|c' is absent.
//! - W3: for every c in W and x in D: cx|a and bx|a are present together.
//! - W4: for x, y in D, if bx|y is present and ax|y absent, then cx|y is
//!   present for every c in W.
//! - W5: for c in W, if ac|x is present for every x in D, then ax|c and
//!   ax|b are absent for every x in D. With D empty the rule is moot and
//!   imposes nothing.

use std::fmt;

use thiserror::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::network::LeafSet;
use crate::triples::{combinations, TripleSet};

/// Subset-search guard: candidate enumeration is exponential in |X|.
pub const DEFAULT_UNIVERSE_LIMIT: usize = 16;

/// Errors from recognition queries.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RecognitionError {
    #[error("label {0} is outside the triple universe")]
    LabelOutsideUniverse(String),
    #[error("leaf pair needs two distinct labels, got {0} twice")]
    IdenticalLabels(String),
    #[error("malformed candidate set: {0}")]
    MalformedW(String),
    #[error("universe of {size} leaves exceeds the exhaustive search limit {limit}")]
    UniverseTooLargeForExhaustiveSearch { size: usize, limit: usize },
}

/// The five candidate-set properties, checked in this order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CandidateProperty {
    W1,
    W2,
    W3,
    W4,
    W5,
}

impl fmt::Display for CandidateProperty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            CandidateProperty::W1 => "W1",
            CandidateProperty::W2 => "W2",
            CandidateProperty::W3 => "W3",
            CandidateProperty::W4 => "W4",
            CandidateProperty::W5 => "W5",
        };
        f.write_str(name)
    }
}

/// The first property a candidate set violates, with the labels involved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertyFailure {
    pub property: CandidateProperty,
    pub witness: Vec<String>,
    pub explanation: String,
}

impl fmt::Display for PropertyFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} fails at ({}): {}",
            self.property,
            self.witness.join(", "),
            self.explanation
        )
    }
}

/// Evidence that (a, b, W) passed all five properties.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateCertificate {
    pub a: String,
    pub b: String,
    pub w: LeafSet,
    /// Satisfied instances per property, in W1..W5 order.
    pub checks: [usize; 5],
}

/// Outcome of checking one candidate set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CandidateVerdict {
    Certified(CandidateCertificate),
    Failed(PropertyFailure),
}

impl CandidateVerdict {
    pub fn certificate(self) -> Option<CandidateCertificate> {
        match self {
            CandidateVerdict::Certified(c) => Some(c),
            CandidateVerdict::Failed(_) => None,
        }
    }
}

/// What a triple set says about its smallest reducible pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RecognizedCherry {
    Cherry {
        a: String,
        b: String,
    },
    /// b is the reticulation leaf; `w` is the first certified candidate set
    /// in the (size, lexicographic) order and `alternatives` counts the
    /// other certified sets for the same pair.
    ReticulatedCherry {
        a: String,
        b: String,
        w: CandidateCertificate,
        alternatives: usize,
    },
    NotFound,
}

fn require_leaf(r: &TripleSet, label: &str) -> Result<(), RecognitionError> {
    if r.universe().contains(label) {
        Ok(())
    } else {
        Err(RecognitionError::LabelOutsideUniverse(label.to_string()))
    }
}

/// Whether every triple containing both `a` and `b` pairs them together.
///
/// Vacuously true when no triple contains both.
pub fn is_cherry_by_triples(r: &TripleSet, a: &str, b: &str) -> Result<bool, RecognitionError> {
    if a == b {
        return Err(RecognitionError::IdenticalLabels(a.to_string()));
    }
    require_leaf(r, a)?;
    require_leaf(r, b)?;
    Ok(r.iter().all(|t| {
        if !(t.mentions(a) && t.mentions(b)) {
            return true;
        }
        let (x, y) = t.pair();
        (x == a && y == b) || (x == b && y == a)
    }))
}

/// Checks the five candidate-set properties in order, stopping at the first
/// failure. `W` must be a non-empty subset of the universe avoiding a and b.
pub fn check_candidate_set(
    r: &TripleSet,
    a: &str,
    b: &str,
    w: &LeafSet,
) -> Result<CandidateVerdict, RecognitionError> {
    if a == b {
        return Err(RecognitionError::IdenticalLabels(a.to_string()));
    }
    require_leaf(r, a)?;
    require_leaf(r, b)?;
    if w.is_empty() {
        return Err(RecognitionError::MalformedW("candidate set is empty".into()));
    }
    if w.contains(a) || w.contains(b) {
        return Err(RecognitionError::MalformedW(format!(
            "candidate set must avoid the pair ({a}, {b})"
        )));
    }
    for c in w.iter() {
        require_leaf(r, c)?;
    }

    let members: Vec<&str> = w.iter().collect();
    // X - (W + {b}), which includes a, and X - (W + {a, b}).
    let outside_b: Vec<&str> = r
        .universe()
        .iter()
        .filter(|x| !w.contains(x) && *x != b)
        .collect();
    let distant: Vec<&str> = outside_b.iter().copied().filter(|&x| x != a).collect();
    let mut checks = [0usize; 5];

    // W1
    for &c in &members {
        for &x in &outside_b {
            if !r.contains_triple(b, c, x) {
                return Ok(CandidateVerdict::Failed(PropertyFailure {
                    property: CandidateProperty::W1,
                    witness: vec![c.to_string(), x.to_string()],
                    explanation: format!("{b} {c} | {x} is not in R"),
                }));
            }
            checks[0] += 1;
        }
        if r.contains_triple(a, c, b) {
            return Ok(CandidateVerdict::Failed(PropertyFailure {
                property: CandidateProperty::W1,
                witness: vec![c.to_string()],
                explanation: format!("{a} {c} | {b} is in R"),
            }));
        }
        checks[0] += 1;
    }

    // W2
    for &c in &members {
        for &c2 in &members {
            if c == c2 {
                continue;
            }
            if r.contains_triple(b, c, c2) {
                return Ok(CandidateVerdict::Failed(PropertyFailure {
                    property: CandidateProperty::W2,
                    witness: vec![c.to_string(), c2.to_string()],
                    explanation: format!("{b} {c} | {c2} is in R"),
                }));
            }
            checks[1] += 1;
        }
    }

    // W3
    for &c in &members {
        for &x in &distant {
            let with_c = r.contains_triple(c, x, a);
            let with_b = r.contains_triple(b, x, a);
            if with_c != with_b {
                return Ok(CandidateVerdict::Failed(PropertyFailure {
                    property: CandidateProperty::W3,
                    witness: vec![c.to_string(), x.to_string()],
                    explanation: format!(
                        "{c} {x} | {a} {} R but {b} {x} | {a} {} R",
                        if with_c { "is in" } else { "is not in" },
                        if with_b { "is in" } else { "is not in" },
                    ),
                }));
            }
            checks[2] += 1;
        }
    }

    // W4
    for &x in &distant {
        for &y in &distant {
            if x == y {
                continue;
            }
            if r.contains_triple(b, x, y) && !r.contains_triple(a, x, y) {
                for &c in &members {
                    if !r.contains_triple(c, x, y) {
                        return Ok(CandidateVerdict::Failed(PropertyFailure {
                            property: CandidateProperty::W4,
                            witness: vec![c.to_string(), x.to_string(), y.to_string()],
                            explanation: format!("{c} {x} | {y} is not in R"),
                        }));
                    }
                    checks[3] += 1;
                }
            }
        }
    }

    // W5
    if !distant.is_empty() {
        for &c in &members {
            if distant.iter().all(|&x| r.contains_triple(a, c, x)) {
                for &x in &distant {
                    if r.contains_triple(a, x, c) {
                        return Ok(CandidateVerdict::Failed(PropertyFailure {
                            property: CandidateProperty::W5,
                            witness: vec![c.to_string(), x.to_string()],
                            explanation: format!("{a} {x} | {c} is in R"),
                        }));
                    }
                    if r.contains_triple(a, x, b) {
                        return Ok(CandidateVerdict::Failed(PropertyFailure {
                            property: CandidateProperty::W5,
                            witness: vec![c.to_string(), x.to_string()],
                            explanation: format!("{a} {x} | {b} is in R"),
                        }));
                    }
                    checks[4] += 2;
                }
            }
        }
    }

    Ok(CandidateVerdict::Certified(CandidateCertificate {
        a: a.to_string(),
        b: b.to_string(),
        w: w.clone(),
        checks,
    }))
}

/// Every certified candidate set for (a, b), smallest first, lexicographic
/// within a size. Exhaustive over the non-empty subsets of X - {a, b}, so
/// the universe is capped at `limit` leaves.
pub fn find_candidate_sets_with_limit(
    r: &TripleSet,
    a: &str,
    b: &str,
    limit: usize,
) -> Result<Vec<CandidateCertificate>, RecognitionError> {
    if a == b {
        return Err(RecognitionError::IdenticalLabels(a.to_string()));
    }
    require_leaf(r, a)?;
    require_leaf(r, b)?;
    let size = r.universe().len();
    if size > limit {
        return Err(RecognitionError::UniverseTooLargeForExhaustiveSearch { size, limit });
    }
    let ground: Vec<&str> = r
        .universe()
        .iter()
        .filter(|&x| x != a && x != b)
        .collect();
    let mut subsets: Vec<LeafSet> = Vec::new();
    for k in 1..=ground.len() {
        for idx in combinations(ground.len(), k) {
            subsets.push(idx.iter().map(|&i| ground[i]).collect());
        }
    }
    let verdicts: Vec<Option<CandidateCertificate>> = {
        #[cfg(feature = "parallel")]
        {
            subsets
                .par_iter()
                .map(|w| {
                    check_candidate_set(r, a, b, w)
                        .expect("subset of the universe is well formed")
                        .certificate()
                })
                .collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            subsets
                .iter()
                .map(|w| {
                    check_candidate_set(r, a, b, w)
                        .expect("subset of the universe is well formed")
                        .certificate()
                })
                .collect()
        }
    };
    Ok(verdicts.into_iter().flatten().collect())
}

/// [`find_candidate_sets_with_limit`] at the default universe cap.
pub fn find_candidate_sets(
    r: &TripleSet,
    a: &str,
    b: &str,
) -> Result<Vec<CandidateCertificate>, RecognitionError> {
    find_candidate_sets_with_limit(r, a, b, DEFAULT_UNIVERSE_LIMIT)
}

/// Scans ordered pairs lexicographically for a cherry reading first, then
/// for a reticulated-cherry reading.
///
/// A pair only reads as a cherry when some triple mentions a or b, or the
/// universe has exactly two leaves; this keeps fully silent pairs from
/// being reported on sparse input. A pair (a, b) reads as a reticulated
/// cherry when ab|x holds for every other x and some candidate set
/// certifies. `NotFound` is a value: inputs outside the reconstructible
/// class commonly have no recognized cherry.
pub fn find_recognized_cherry(r: &TripleSet) -> Result<RecognizedCherry, RecognitionError> {
    let labels: Vec<&str> = r.universe().iter().collect();
    if labels.len() < 2 {
        return Ok(RecognizedCherry::NotFound);
    }

    for &a in &labels {
        for &b in &labels {
            if a == b {
                continue;
            }
            let mentioned = labels.len() == 2 || r.iter().any(|t| t.mentions(a) || t.mentions(b));
            if !mentioned {
                continue;
            }
            if is_cherry_by_triples(r, a, b).expect("labels from the universe") {
                return Ok(RecognizedCherry::Cherry {
                    a: a.to_string(),
                    b: b.to_string(),
                });
            }
        }
    }

    if labels.len() > DEFAULT_UNIVERSE_LIMIT {
        return Err(RecognitionError::UniverseTooLargeForExhaustiveSearch {
            size: labels.len(),
            limit: DEFAULT_UNIVERSE_LIMIT,
        });
    }
    for &a in &labels {
        for &b in &labels {
            if a == b {
                continue;
            }
            if !labels
                .iter()
                .all(|&x| x == a || x == b || r.contains_triple(a, b, x))
            {
                continue;
            }
            let certs = find_candidate_sets(r, a, b)?;
            if let Some(first) = certs.first() {
                return Ok(RecognizedCherry::ReticulatedCherry {
                    a: a.to_string(),
                    b: b.to_string(),
                    w: first.clone(),
                    alternatives: certs.len() - 1,
                });
            }
        }
    }
    Ok(RecognizedCherry::NotFound)
}
