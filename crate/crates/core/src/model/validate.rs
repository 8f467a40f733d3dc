use num_traits::One;
use serde::Serialize;

use super::{maximal_end_components, Process, Weight};
use crate::rational::{format_rational, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Finding {
    /// Probabilities of one action do not add up to 1, or a state has no
    /// enabled action at all (`action` is then `None`).
    BadDistribution { state: String, action: Option<String>, sum: String },
    /// The target is not an absorbing zero-weight self-loop with one action.
    BadTargetLoop { target: String },
    /// No path leads from the initial state to the target.
    UnreachableTarget { initial: String, target: String },
    /// A reachable end component other than `{t}`.
    BadMec { states: Vec<String> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Finding>,
}

impl<W: Weight> Process<W> {
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        for q in 0..self.num_states() {
            if self.choices(q).is_empty() {
                violations.push(Finding::BadDistribution {
                    state: self.state_name(q).to_string(),
                    action: None,
                    sum: "0".into(),
                });
            }
            for c in self.choices(q) {
                let sum: Rational = c.outcomes.iter().map(|o| &o.prob).sum();
                if !sum.is_one() {
                    violations.push(Finding::BadDistribution {
                        state: self.state_name(q).to_string(),
                        action: Some(self.action_name(c.action).to_string()),
                        sum: format_rational(&sum),
                    });
                }
            }
        }

        let t = self.target();
        let target_ok = match self.choices(t) {
            [only] => {
                only.outcomes.len() == 1
                    && only.outcomes[0].to == t
                    && only.outcomes[0].cost.is_zero_weight()
                    && only.outcomes[0].prob.is_one()
            }
            _ => false,
        };
        if !target_ok {
            violations.push(Finding::BadTargetLoop { target: self.state_name(t).to_string() });
        }

        let reachable = self.reachable();
        if !reachable[t] {
            violations.push(Finding::UnreachableTarget {
                initial: self.state_name(self.initial()).to_string(),
                target: self.state_name(t).to_string(),
            });
        }

        for mec in maximal_end_components(self, &reachable) {
            if mec != [t] {
                violations.push(Finding::BadMec {
                    states: mec.iter().map(|&q| self.state_name(q).to_string()).collect(),
                });
            }
        }

        ValidationReport { ok: violations.is_empty(), violations }
    }
}

impl ValidationReport {
    pub fn summary(&self) -> String {
        if self.ok {
            return "ok".into();
        }
        let lines: Vec<String> = self
            .violations
            .iter()
            .map(|f| match f {
                Finding::BadDistribution { state, action: Some(a), sum } => {
                    format!("bad-distribution: {state}/{a} sums to {sum}")
                }
                Finding::BadDistribution { state, action: None, .. } => {
                    format!("bad-distribution: {state} has no enabled action")
                }
                Finding::BadTargetLoop { target } => {
                    format!("bad-target-loop: {target} must carry exactly one zero-cost self-loop")
                }
                Finding::UnreachableTarget { initial, target } => {
                    format!("unreachable-target: {target} is not reachable from {initial}")
                }
                Finding::BadMec { states } => format!("bad-mec: {{{}}}", states.join(", ")),
            })
            .collect();
        lines.join("\n")
    }
}
