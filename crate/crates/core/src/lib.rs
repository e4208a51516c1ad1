//! Minimum arc-edit interventions that steer a present-biased agent through a
//! set of critical arcs on a weighted DAG.
//!
//! Three engines solve the same problem and are cross-checked in the tests:
//! an exhaustive [`oracle`], the vertex-cover parameterized search in [`vc`],
//! and the tree-decomposition dynamic program in [`tw`].

pub mod conditions;
pub mod error;
pub mod generators;
pub mod io;
pub mod lset;
pub mod matching;
pub mod model;
pub mod oracle;
pub mod rational;
pub mod sim;
pub mod treedecomp;
pub mod tw;
pub mod vc;

pub use error::{Error, Result};
pub use model::{Arc, ArcId, ArcKind, EditPlan, GraphView, Instance, PerceivedCost, VertexId};
pub use oracle::Semantics;
pub use rational::Rational;
