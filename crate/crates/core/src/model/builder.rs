use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};

use super::{Choice, Outcome, Process, StateId, Weight, CHAIN_ACTION};
use crate::error::ModelError;
use crate::rational::{format_rational, Rational};

/// Incremental constructor for [`Process`].
///
/// States and actions are indexed by first mention. Repeated
/// `(from, action, to, weight)` entries are merged by adding probabilities.
#[derive(Clone, Debug)]
pub struct ProcessBuilder<W> {
    states: Vec<String>,
    state_index: HashMap<String, StateId>,
    actions: Vec<String>,
    action_index: HashMap<String, usize>,
    initial: Option<String>,
    target: Option<String>,
    entries: Vec<(StateId, usize, StateId, W, Rational)>,
}

impl<W: Weight> Default for ProcessBuilder<W> {
    fn default() -> Self {
        Self::new()
    }
}

impl<W: Weight> ProcessBuilder<W> {
    pub fn new() -> Self {
        ProcessBuilder {
            states: Vec::new(),
            state_index: HashMap::new(),
            actions: Vec::new(),
            action_index: HashMap::new(),
            initial: None,
            target: None,
            entries: Vec::new(),
        }
    }

    /// Declares a state (idempotent) and returns its index.
    pub fn state(&mut self, name: &str) -> StateId {
        if let Some(&id) = self.state_index.get(name) {
            return id;
        }
        let id = self.states.len();
        self.states.push(name.to_string());
        self.state_index.insert(name.to_string(), id);
        id
    }

    fn action(&mut self, name: &str) -> usize {
        if let Some(&id) = self.action_index.get(name) {
            return id;
        }
        let id = self.actions.len();
        self.actions.push(name.to_string());
        self.action_index.insert(name.to_string(), id);
        id
    }

    pub fn initial(&mut self, name: &str) -> &mut Self {
        self.state(name);
        self.initial = Some(name.to_string());
        self
    }

    pub fn target(&mut self, name: &str) -> &mut Self {
        self.state(name);
        self.target = Some(name.to_string());
        self
    }

    pub fn transition(
        &mut self,
        from: &str,
        action: &str,
        to: &str,
        cost: impl Into<W>,
        prob: Rational,
    ) -> &mut Self {
        let f = self.state(from);
        let t = self.state(to);
        let a = self.action(action);
        self.entries.push((f, a, t, cost.into(), prob));
        self
    }

    /// A transition of the implicit chain action.
    pub fn chain_edge(&mut self, from: &str, to: &str, cost: impl Into<W>, prob: Rational) -> &mut Self {
        self.transition(from, CHAIN_ACTION, to, cost, prob)
    }

    pub fn build(self) -> Result<Process<W>, ModelError> {
        let initial = self.initial.ok_or(ModelError::Missing("initial"))?;
        let target = self.target.ok_or(ModelError::Missing("target"))?;
        let mut merged: BTreeMap<(StateId, usize, StateId, W), Rational> = BTreeMap::new();
        for (f, a, t, w, p) in self.entries {
            if p <= Rational::zero() || p > Rational::one() {
                return Err(ModelError::BadProbability {
                    from: self.states[f].clone(),
                    to: self.states[t].clone(),
                    prob: format_rational(&p),
                });
            }
            *merged.entry((f, a, t, w)).or_insert_with(Rational::zero) += p;
        }
        let mut choices: Vec<Vec<Choice<W>>> = vec![Vec::new(); self.states.len()];
        for ((f, a, t, w), p) in merged {
            let list = &mut choices[f];
            if list.last().map(|c: &Choice<W>| c.action) != Some(a) {
                list.push(Choice { action: a, outcomes: Vec::new() });
            }
            list.last_mut().unwrap().outcomes.push(Outcome { to: t, cost: w, prob: p });
        }
        Ok(Process::from_parts(
            self.states,
            self.actions,
            self.state_index[&initial],
            self.state_index[&target],
            choices,
        ))
    }
}
