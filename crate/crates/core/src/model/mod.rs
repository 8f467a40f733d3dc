//! Cost processes and cost chains.
//!
//! A [`Process`] is a finite control graph whose actions carry exact
//! distributions over `(successor, weight)` pairs. The weight is a single
//! cost for ordinary [`CostProcess`]es and a `(cost, utility)` pair for
//! [`CostUtilityProcess`]es. Construction goes through [`ProcessBuilder`],
//! which merges duplicate outcomes and fixes the canonical indexing.

mod builder;
mod json;
mod mec;
mod validate;

use std::collections::BTreeSet;
use std::fmt::Debug;
use std::ops::Deref;

use num_traits::{One, Zero};
use petgraph::graph::DiGraph;

use crate::rational::{Cost, Rational};

pub use builder::ProcessBuilder;
pub use json::ModelFile;
pub use mec::maximal_end_components;
pub use validate::{Finding, ValidationReport};

pub type StateId = usize;
pub type ActionId = usize;

/// Action name used when a model file omits `"action"` (cost chains).
pub const CHAIN_ACTION: &str = "_";

/// Transition weight. Weights only ever grow along a run.
pub trait Weight: Clone + Ord + Debug {
    fn is_zero_weight(&self) -> bool;
    fn zero_weight() -> Self;
}

impl Weight for Cost {
    fn is_zero_weight(&self) -> bool {
        self.is_zero()
    }
    fn zero_weight() -> Self {
        Cost::zero()
    }
}

/// Cost and utility carried by one transition of a cost-utility process.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CostUtility {
    pub cost: Cost,
    pub utility: Cost,
}

impl Weight for CostUtility {
    fn is_zero_weight(&self) -> bool {
        self.cost.is_zero() && self.utility.is_zero()
    }
    fn zero_weight() -> Self {
        CostUtility { cost: Cost::zero(), utility: Cost::zero() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome<W> {
    pub to: StateId,
    pub cost: W,
    pub prob: Rational,
}

/// The distribution attached to one enabled action.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Choice<W> {
    pub action: ActionId,
    pub outcomes: Vec<Outcome<W>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Process<W> {
    states: Vec<String>,
    actions: Vec<String>,
    initial: StateId,
    target: StateId,
    /// Per state, sorted by action id; outcomes sorted by `(to, cost)`.
    choices: Vec<Vec<Choice<W>>>,
}

pub type CostProcess = Process<Cost>;
pub type CostUtilityProcess = Process<CostUtility>;

/// The graph `E` over control states: `(q, q')` whenever some action of a
/// non-target `q` can move to `q'`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ControlGraph {
    pub vertices: usize,
    pub edges: BTreeSet<(StateId, StateId)>,
}

impl ControlGraph {
    pub fn to_petgraph(&self) -> DiGraph<(), ()> {
        let mut g = DiGraph::with_capacity(self.vertices, self.edges.len());
        for _ in 0..self.vertices {
            g.add_node(());
        }
        g.extend_with_edges(self.edges.iter().map(|&(a, b)| (a as u32, b as u32)));
        g
    }

    pub fn successors(&self, q: StateId) -> impl Iterator<Item = StateId> + '_ {
        self.edges.range((q, 0)..(q + 1, 0)).map(|&(_, b)| b)
    }
}

impl<W: Weight> Process<W> {
    pub(crate) fn from_parts(
        states: Vec<String>,
        actions: Vec<String>,
        initial: StateId,
        target: StateId,
        choices: Vec<Vec<Choice<W>>>,
    ) -> Self {
        Process { states, actions, initial, target, choices }
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn state_name(&self, q: StateId) -> &str {
        &self.states[q]
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.states.iter().position(|s| s == name)
    }

    pub fn actions(&self) -> &[String] {
        &self.actions
    }

    pub fn action_name(&self, a: ActionId) -> &str {
        &self.actions[a]
    }

    pub fn action_id(&self, name: &str) -> Option<ActionId> {
        self.actions.iter().position(|s| s == name)
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn target(&self) -> StateId {
        self.target
    }

    pub fn choices(&self, q: StateId) -> &[Choice<W>] {
        &self.choices[q]
    }

    pub fn choice(&self, q: StateId, action: ActionId) -> Option<&Choice<W>> {
        self.choices[q].iter().find(|c| c.action == action)
    }

    pub fn enabled(&self, q: StateId) -> impl Iterator<Item = ActionId> + '_ {
        self.choices[q].iter().map(|c| c.action)
    }

    /// True iff every state has exactly one enabled action.
    pub fn is_chain(&self) -> bool {
        self.choices.iter().all(|c| c.len() == 1)
    }

    pub fn control_graph(&self) -> ControlGraph {
        let mut edges = BTreeSet::new();
        for (q, choices) in self.choices.iter().enumerate() {
            if q == self.target {
                continue;
            }
            for choice in choices {
                for o in &choice.outcomes {
                    edges.insert((q, o.to));
                }
            }
        }
        ControlGraph { vertices: self.states.len(), edges }
    }

    /// True iff the control graph (which ignores edges leaving the target)
    /// has no directed cycle.
    pub fn is_acyclic(&self) -> bool {
        !petgraph::algo::is_cyclic_directed(&self.control_graph().to_petgraph())
    }

    /// Smallest non-zero transition probability.
    pub fn p_min(&self) -> Rational {
        self.all_outcomes()
            .map(|o| o.prob.clone())
            .min()
            .unwrap_or_else(Rational::one)
    }

    pub fn all_outcomes(&self) -> impl Iterator<Item = &Outcome<W>> + '_ {
        self.choices.iter().flatten().flat_map(|c| c.outcomes.iter())
    }

    /// States reachable from the initial state under some scheduler.
    pub fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.states.len()];
        let mut stack = vec![self.initial];
        seen[self.initial] = true;
        while let Some(q) = stack.pop() {
            for o in self.choices[q].iter().flat_map(|c| &c.outcomes) {
                if !seen[o.to] {
                    seen[o.to] = true;
                    stack.push(o.to);
                }
            }
        }
        seen
    }

    /// Keeps only the lowest-indexed enabled action of every state.
    pub fn first_action_restriction(&self) -> Self {
        let mut out = self.clone();
        for choices in &mut out.choices {
            choices.truncate(1);
        }
        out
    }

    pub fn map_weights<V: Weight>(&self, f: impl Fn(&W) -> V) -> Process<V> {
        let choices = self
            .choices
            .iter()
            .map(|cs| {
                cs.iter()
                    .map(|c| Choice {
                        action: c.action,
                        outcomes: c
                            .outcomes
                            .iter()
                            .map(|o| Outcome { to: o.to, cost: f(&o.cost), prob: o.prob.clone() })
                            .collect(),
                    })
                    .collect()
            })
            .collect();
        Process {
            states: self.states.clone(),
            actions: self.actions.clone(),
            initial: self.initial,
            target: self.target,
            choices,
        }
    }
}

impl CostProcess {
    /// Largest transition cost appearing in the description.
    pub fn k_max(&self) -> Cost {
        self.all_outcomes().map(|o| o.cost.clone()).max().unwrap_or_default()
    }
}

impl CostUtilityProcess {
    /// The cost-only projection used for validation and acyclicity checks.
    pub fn cost_projection(&self) -> CostProcess {
        let mut b = ProcessBuilder::<Cost>::new();
        for s in &self.states {
            b.state(s);
        }
        b.initial(&self.states[self.initial]).target(&self.states[self.target]);
        for (q, cs) in self.choices.iter().enumerate() {
            for c in cs {
                for o in &c.outcomes {
                    b.transition(
                        &self.states[q],
                        &self.actions[c.action],
                        &self.states[o.to],
                        o.cost.cost.clone(),
                        o.prob.clone(),
                    );
                }
            }
        }
        b.build().expect("projection of a well-formed process is well-formed")
    }
}

/// A process that passed [`Process::validate`]: distributions are exact,
/// the target is absorbing and reached almost surely under every scheduler.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Validated<P>(P);

impl<P> Validated<P> {
    pub fn into_inner(self) -> P {
        self.0
    }
}

impl<P> Deref for Validated<P> {
    type Target = P;
    fn deref(&self) -> &P {
        &self.0
    }
}

impl<W: Weight> Process<W> {
    pub fn validated(self) -> Result<Validated<Self>, ValidationReport> {
        let report = self.validate();
        if report.ok {
            Ok(Validated(self))
        } else {
            Err(report)
        }
    }
}
