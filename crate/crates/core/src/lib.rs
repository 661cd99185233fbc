//! Realizability of branch data for branched covers of surfaces.
//!
//! The crate decides whether a candidate branch datum
//! `(g·T, Σ, d, n; π1, ..., πn)` is realized by a branched cover, using closed
//! form verdicts where they exist ([`classifier`]), an exhaustive monodromy
//! search ([`oracle`]) as ground truth, datum rewrites that reduce the genus or
//! the number of branch points ([`moves`]), and an enumerator of all data of a
//! given degree ([`census`]).

pub mod census;
pub mod classifier;
pub mod datum;
pub mod dessin;
pub mod moves;
pub mod oracle;
pub mod perm;

pub use datum::{format_datum, genus_from_partitions, parse_datum, BranchDatum, DatumError, Partition, Surface};
pub use perm::{Permutation, PermError};
