//! Exact finite certificates for amenability-type properties of concrete
//! topological groups: matching numbers, Følner defects, bounded-Lipschitz
//! seminorms, perturbed translations and paradoxical decompositions.

pub mod algebra;
pub mod folner;
pub mod group;
pub mod matching;
pub mod paradox;
pub mod perturb;
pub mod rational;
pub mod scenario;

pub use group::{Element, Entourage, FiniteWindow, GroupError, GroupKind, GroupModel, MetricRule};
pub use rational::{parse_rational, Rational};
