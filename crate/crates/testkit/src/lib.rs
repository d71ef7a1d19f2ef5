//! Test support: brute-force oracles computed independently of the engine
//! (nested-loop reverse and join, direct formula evaluation) and generators
//! for randomized catalog inputs.
//!
//! Nothing here calls the engine's symmetrization, composition, or resolution
//! code; equality between the two routes is what the tests assert.

use std::collections::BTreeSet;
use std::path::PathBuf;

use threatgraph_core::ident::NodeId;

pub mod gen;
pub mod oracle;

pub type PairSet = BTreeSet<(NodeId, NodeId)>;

/// Path of a shipped fixture file (the corpus lives in the core crate).
pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures")
        .join(name)
}
