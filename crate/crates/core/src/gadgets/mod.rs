//! Reductions into the cost problem, each paired with a brute-force oracle.
//!
//! * [`threshold_to_half`] moves any threshold `τ` to `1/2`.
//! * Arithmetic circuits become DFAs whose Parikh-restricted path count is
//!   the circuit value, then typed cost chains, then ordinary cost chains
//!   with `P(K = T) = val(g)/m` ([`circuit_to_chain`]). Two such chains give
//!   a PosSLP comparison ([`posslp_instance`]).
//! * QSubsetSum games become acyclic processes with an atomic budget
//!   ([`qsubsetsum_to_process`], [`universal_qsubsetsum_to_process`]).
//! * Countdown games become qualitative cost problems
//!   ([`countdown_to_process`]), which lift to cost-utility problems.

mod circuit;
mod countdown;
mod cost_utility;
mod parikh;
mod posslp;
mod qsubsetsum;
mod threshold;
mod typed;

pub use circuit::{normalize_circuit, ArithmeticCircuit, CircuitFile, DualRail, Gate, GateId, GateKind, RawCircuit};
pub use countdown::{countdown_brute, countdown_to_process, CountdownGame, CountdownGadget, Move};
pub use cost_utility::qualitative_to_cost_utility;
pub use parikh::{circuit_to_dfa, count_parikh_paths, ParikhDfa, PATH_GUARD};
pub use posslp::{posslp_decide, posslp_instance, PosSlpInstance, PosSlpVerdict};
pub use qsubsetsum::{
    qsubsetsum_brute, qsubsetsum_to_process, universal_qsubsetsum_to_process, QSubsetSum, QSubsetSumGadget,
};
pub use threshold::threshold_to_half;
pub use typed::{circuit_to_chain, dfa_to_typed_chain, typed_to_chain, GadgetCertificate, ScaleFactor, TypedCostChain};
