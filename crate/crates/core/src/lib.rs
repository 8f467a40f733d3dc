//! Exact analysis of cost-bounded reachability in Markov chains and MDPs
//! with non-negative integer costs.
//!
//! A run accumulates cost until it is absorbed in a target state. Given a
//! Boolean combination `φ` of constraints `x <= B` on the final cost, the
//! crate computes exact probabilities `P(K ⊨ φ)`, optimal cost-aware
//! schedulers, cost quantiles, the hardness gadgets that relate these
//! problems to PosSLP, QSubsetSum and countdown games, and a seeded Monte
//! Carlo estimator for cross-checking.

pub mod chain_solver;
pub mod error;
pub mod formula;
pub mod gadgets;
pub mod linalg;
pub mod mc;
pub mod mdp_solver;
pub mod model;
pub mod quantile;
pub mod rational;
