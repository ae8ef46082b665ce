//! Ordinal combinatorics and finite-dimensional norm machinery for operator
//! indices: Cantor normal form ordinals, well-founded trees and their ranks,
//! Schreier-type families, exact norms, domination constants and bounded
//! probes of index trees.

pub mod exact;
pub mod ordinal;
pub mod trees;
pub mod families;
pub mod linalg;
pub mod polytope;
pub mod spaces;
pub mod domination;
pub mod indices;
