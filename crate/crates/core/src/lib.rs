//! Simulation, exact computation and statistical checks for positively and
//! negatively step-reinforced random walks.
//!
//! The crate is organised around the objects that drive both walks:
//!
//! * [`walk`] simulates the walks and maps traces to normalized statistics;
//! * [`tree`] holds the random recursive tree of copy choices and the bond
//!   percolation that groups steps sharing one innovation;
//! * [`moments`] evaluates exact moments, normalizers and rate sequences;
//! * [`oracle`] enumerates every configuration at small sizes;
//! * [`graph`] handles percolation on arbitrary finite graphs;
//! * [`gof`] measures Kolmogorov distances and convergence rates.

pub mod dist;
pub mod error;
pub mod gof;
pub mod graph;
pub mod moments;
pub mod oracle;
pub mod rng;
pub mod special;
pub mod tree;
pub mod walk;

pub use dist::{make_distribution, DistributionSpec, StepDistribution, StepKind};
pub use error::{Error, Result};
pub use gof::{RateRow, RateTable, RateTarget, SlopeFit};
pub use graph::{DegreeCountEstimate, Graph};
pub use moments::{MomentTable, TheoryConstants};
pub use tree::{ClusterStats, RecursiveTree, TreeFunctionals};
pub use walk::{Injected, Mode, Randomness, WalkParams, WalkTrace};
