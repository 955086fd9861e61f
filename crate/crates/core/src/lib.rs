//! Geometric analysis of linear complementarity problems (LCPs) and linear
//! complementarity systems (LCSs).
//!
//! An LCP asks for `z >= 0` with `w = M z + q >= 0` and `z^T w = 0`. The crate
//! solves LCPs exhaustively over complementary cones and by Lemke pivoting,
//! decides degeneracy and LCP-stability, computes stability margins, applies
//! equivalence-preserving transformations, classifies every 2x2 matrix, and
//! maps LCS equilibria to LCP solutions.

pub mod analysis;
pub mod circuit;
pub mod classify;
pub mod cone;
pub mod equivalence;
pub mod error;
pub mod index_set;
pub mod lcp;
pub mod lcs;
pub mod lemke;
pub mod linalg;
pub mod nnls;
pub mod simplex;
pub mod stability;
pub mod sweep;

pub use error::{Error, Result};
pub use index_set::IndexSet;
pub use lcp::{LcpInstance, SolutionCount, SolutionSet};
pub use linalg::{Mat, Vector};
