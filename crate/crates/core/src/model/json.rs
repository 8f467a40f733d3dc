//! The JSON model format.
//!
//! ```json
//! { "states": ["q0", "t"], "initial": "q0", "target": "t",
//!   "transitions": [ {"from": "q0", "action": "a", "to": "t", "cost": "1", "prob": "1/2"} ] }
//! ```
//!
//! Costs and probabilities are decimal strings. Chains omit `"action"`.
//! Cost-utility processes add a `"utility"` string to every transition.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::{CostProcess, CostUtility, CostUtilityProcess, Process, ProcessBuilder, Weight, CHAIN_ACTION};
use crate::error::{ModelError, ParseError};
use crate::rational::{format_rational, parse_cost, parse_rational};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub states: Vec<String>,
    pub initial: String,
    pub target: String,
    pub transitions: Vec<TransitionEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct TransitionEntry {
    pub from: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<String>,
    pub to: String,
    pub cost: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub utility: Option<String>,
    pub prob: String,
}

impl ModelFile {
    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        serde_json::from_str(text).map_err(|e| ParseError::Json(e.to_string()).into())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("model files always serialize");
        s.push('\n');
        s
    }

    fn builder<W: Weight>(
        &self,
        weight: impl Fn(&TransitionEntry) -> Result<W, ModelError>,
    ) -> Result<ProcessBuilder<W>, ModelError> {
        let mut b = ProcessBuilder::new();
        let mut declared = HashSet::new();
        for s in &self.states {
            if !declared.insert(s.as_str()) {
                return Err(ModelError::DuplicateState(s.clone()));
            }
            b.state(s);
        }
        let known = |s: &String| {
            if declared.contains(s.as_str()) {
                Ok(())
            } else {
                Err(ModelError::UnknownState(s.clone()))
            }
        };
        known(&self.initial)?;
        known(&self.target)?;
        b.initial(&self.initial).target(&self.target);
        for t in &self.transitions {
            known(&t.from)?;
            known(&t.to)?;
            let prob = parse_rational(&t.prob)?;
            let action = t.action.as_deref().unwrap_or(CHAIN_ACTION);
            b.transition(&t.from, action, &t.to, weight(t)?, prob);
        }
        Ok(b)
    }

    pub fn to_cost_process(&self) -> Result<CostProcess, ModelError> {
        self.builder(|t| Ok(parse_cost(&t.cost)?))?.build()
    }

    /// Missing `"utility"` fields are read as utility 0.
    pub fn to_cost_utility_process(&self) -> Result<CostUtilityProcess, ModelError> {
        self.builder(|t| {
            Ok(CostUtility {
                cost: parse_cost(&t.cost)?,
                utility: parse_cost(t.utility.as_deref().unwrap_or("0"))?,
            })
        })?
        .build()
    }

    fn from_process<W: Weight>(p: &Process<W>, fill: impl Fn(&W, &mut TransitionEntry)) -> Self {
        let mut transitions = Vec::new();
        for q in 0..p.num_states() {
            for c in p.choices(q) {
                let action = p.action_name(c.action);
                for o in &c.outcomes {
                    let mut entry = TransitionEntry {
                        from: p.state_name(q).to_string(),
                        action: (action != CHAIN_ACTION).then(|| action.to_string()),
                        to: p.state_name(o.to).to_string(),
                        cost: String::new(),
                        utility: None,
                        prob: format_rational(&o.prob),
                    };
                    fill(&o.cost, &mut entry);
                    transitions.push(entry);
                }
            }
        }
        ModelFile {
            states: p.states().to_vec(),
            initial: p.state_name(p.initial()).to_string(),
            target: p.state_name(p.target()).to_string(),
            transitions,
        }
    }
}

impl From<&CostProcess> for ModelFile {
    fn from(p: &CostProcess) -> Self {
        ModelFile::from_process(p, |w, e| e.cost = w.to_string())
    }
}

impl From<&CostUtilityProcess> for ModelFile {
    fn from(p: &CostUtilityProcess) -> Self {
        ModelFile::from_process(p, |w, e| {
            e.cost = w.cost.to_string();
            e.utility = Some(w.utility.to_string());
        })
    }
}

impl CostProcess {
    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        ModelFile::from_json(text)?.to_cost_process()
    }

    pub fn to_json(&self) -> String {
        ModelFile::from(self).to_json()
    }
}

impl CostUtilityProcess {
    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        ModelFile::from_json(text)?.to_cost_utility_process()
    }

    pub fn to_json(&self) -> String {
        ModelFile::from(self).to_json()
    }
}
