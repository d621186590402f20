//! Fixing identification distance (FID) between acyclic directed mixed graphs.
//!
//! The crate enumerates every fixing-based identifying expression of
//! `p(y | do(t))` for each treatment/outcome pair, reduces the expressions to a
//! canonical form with a small rewrite system, and scores how many of a
//! candidate graph's estimands are supported by a reference graph.
//!
//! Module map:
//! - [`graph`], [`node`], [`format`]: graph types, structural queries, I/O
//! - [`fixing`]: fixability, graph fixing, valid fixing sequences, intrinsic sets
//! - [`estimand`]: the expression tree, kernel fixing and the canonicalizer
//! - [`identify`]: identifiability and enumeration of identifying expressions
//! - [`distance`]: the symbolic verifier and the distance aggregates
//! - [`perturb`]: random graph generation, edits and SHD
//! - [`mag`]: ADMG to MAG projection, DAG extensions of CPDAGs, FID ranges
//! - [`oracle`]: discrete latent-variable models for numeric ground truth
//! - [`sweep`]: the perturbation experiment harness

pub mod distance;
pub mod error;
pub mod estimand;
pub mod fixing;
pub mod format;
pub mod graph;
pub mod identify;
pub mod mag;
pub mod node;
pub mod oracle;
pub mod perturb;
pub mod sweep;

pub use distance::{fid, fid_symmetric, verify, DistanceReport, FidOptions, MissPolicy, PairScore, SymmetricReport};
pub use error::{FidError, Result};
pub use estimand::{canonicalize, expr_equal, Expr};
pub use fixing::Cap;
pub use graph::{Admg, Cadmg, Cpdag, DagWithLatents, Mag, MixedGraph};

pub use identify::{all_pairs, identify_all, is_identifiable, EstimandSet, EstimandStatus, Identifier, PairQuery};
pub use node::{NodeId, NodeSet};
