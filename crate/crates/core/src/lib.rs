//! threatgraph-core: a queryable knowledge graph uniting the ATT&CK, CAPEC,
//! CWE, and CVE security enumerations.
//!
//! The pipeline is: [`ingest`] parses the three source catalogs into
//! normalized records; [`kgraph`] assembles them into a typed graph and runs
//! the inference layer (inverse symmetrization, property chains, and the
//! `refToEnum` super-relation); [`query`] answers neighborhood, reverse
//! mapping, and statistics questions; [`modeler`] resolves attack techniques
//! for labeled elements of Threat Dragon data-flow diagrams; [`snapshot`]
//! persists the closed graph deterministically.

pub mod error;
pub mod ident;
pub mod ingest;
pub mod kgraph;
pub mod modeler;
pub mod pipeline;
pub mod query;
pub mod report;
pub mod snapshot;

pub use error::{Error, Result};
pub use ident::{canonicalize_name, NameStyle, Namespace, NodeId};
pub use kgraph::{build_graph, CatalogInputs, KnowledgeGraph, RelationName};
