//! Fast-slow consensus networks with one state-dependent edge weight.
//!
//! The fast node states follow x′ = −L(w)x, where the weight w of a single
//! edge depends on the node states and on a slow variable y′ = ε·g. When w
//! drops below a critical value the consensus state loses stability through
//! a transcritical point and the network splits into clusters.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod blowup;
pub mod dynamics;
pub mod integrate;
pub mod network;
pub mod roots;
pub mod scenarios;
pub mod specfun;

pub use dynamics::{Drift, FastSlowState, ModelParams};
pub use integrate::{IntegratorConfig, Method, Phase, Trajectory};
pub use network::{DynamicWeight, Graph};
