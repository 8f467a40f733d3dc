use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::chain_solver::solve_chain;
use crate::error::{ModelError, ParseError, SolveError};
use crate::formula::CostFormula;
use crate::model::{ActionId, CostProcess, Process, ProcessBuilder, StateId, Validated, Weight};
use crate::rational::{parse_cost, Cost, Rational};

/// Accumulated cost as seen by a scheduler: exact up to the formula's
/// largest constant, `Top` above it.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CostKey {
    Cost(Cost),
    Top,
}

impl fmt::Display for CostKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CostKey::Cost(c) => write!(f, "{c}"),
            CostKey::Top => write!(f, "top"),
        }
    }
}

/// Deterministic cost-aware scheduler: `(state, cost key) -> action`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Scheduler {
    entries: BTreeMap<(StateId, CostKey), ActionId>,
}

/// One line of the JSON scheduler format.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchedulerEntry {
    pub state: String,
    /// A decimal cost or `"top"`.
    pub cost: String,
    pub action: String,
}

impl Scheduler {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, state: StateId, key: CostKey, action: ActionId) {
        self.entries.insert((state, key), action);
    }

    pub fn get(&self, state: StateId, key: &CostKey) -> Option<ActionId> {
        self.entries.get(&(state, key.clone())).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(StateId, CostKey), &ActionId)> {
        self.entries.iter()
    }

    /// Adds lowest-index choices for every non-target state reachable from
    /// `seeds` once the cost has saturated.
    pub(crate) fn fill_top<W: Weight>(&mut self, process: &Process<W>, seeds: &BTreeSet<StateId>) {
        let t = process.target();
        let mut seen: BTreeSet<StateId> = BTreeSet::new();
        let mut queue: VecDeque<StateId> = seeds.iter().copied().filter(|&q| q != t).collect();
        seen.extend(queue.iter().copied());
        while let Some(q) = queue.pop_front() {
            self.insert(q, CostKey::Top, process.choices(q)[0].action);
            for o in process.choices(q).iter().flat_map(|c| &c.outcomes) {
                if o.to != t && seen.insert(o.to) {
                    queue.push_back(o.to);
                }
            }
        }
    }

    pub fn to_entries(&self, process: &CostProcess) -> Vec<SchedulerEntry> {
        self.entries
            .iter()
            .map(|((q, key), a)| SchedulerEntry {
                state: process.state_name(*q).to_string(),
                cost: key.to_string(),
                action: process.action_name(*a).to_string(),
            })
            .collect()
    }

    pub fn to_json(&self, process: &CostProcess) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_entries(process)).expect("entries serialize");
        s.push('\n');
        s
    }

    pub fn from_entries(entries: &[SchedulerEntry], process: &CostProcess) -> Result<Self, ModelError> {
        let mut out = Scheduler::new();
        for e in entries {
            let q = process.state_id(&e.state).ok_or_else(|| ModelError::UnknownState(e.state.clone()))?;
            let key = if e.cost == "top" { CostKey::Top } else { CostKey::Cost(parse_cost(&e.cost)?) };
            let a = process
                .action_id(&e.action)
                .ok_or_else(|| ParseError::Json(format!("unknown action `{}`", e.action)))?;
            out.insert(q, key, a);
        }
        Ok(out)
    }

    pub fn from_json(text: &str, process: &CostProcess) -> Result<Self, ModelError> {
        let entries: Vec<SchedulerEntry> =
            serde_json::from_str(text).map_err(|e| ParseError::Json(e.to_string()))?;
        Self::from_entries(&entries, process)
    }
}

fn pair_name(process: &CostProcess, q: StateId, key: &CostKey) -> String {
    format!("{}@{}", process.state_name(q), key)
}

/// Unfolds the process under `scheduler` into an explicit cost chain on
/// pairs `(q, c)` with `c <= b_max`, pairs `(q, top)`, and the target.
/// Every edge keeps its original cost, so the chain accumulates exactly the
/// same cost as the process.
pub fn induced_chain(
    process: &Validated<CostProcess>,
    scheduler: &Scheduler,
    b_max: &Cost,
) -> Result<Validated<CostProcess>, SolveError> {
    let t = process.target();
    let target_name = process.state_name(t).to_string();
    let mut b = ProcessBuilder::<Cost>::new();
    let start = CostKey::Cost(Cost::from(0u32));
    let initial = if process.initial() == t {
        target_name.clone()
    } else {
        pair_name(process, process.initial(), &start)
    };
    b.initial(&initial).target(&target_name);
    b.chain_edge(&target_name, &target_name, 0u32, Rational::from_integer(1.into()));

    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::new();
    if process.initial() != t {
        seen.insert((process.initial(), start.clone()));
        queue.push_back((process.initial(), start));
    }
    while let Some((q, key)) = queue.pop_front() {
        let a = scheduler.get(q, &key).ok_or_else(|| SolveError::SchedulerIncomplete {
            state: process.state_name(q).to_string(),
            cost: key.to_string(),
        })?;
        let choice = process.choice(q, a).ok_or_else(|| SolveError::SchedulerDisabled {
            state: process.state_name(q).to_string(),
            action: process.action_name(a).to_string(),
        })?;
        let from = pair_name(process, q, &key);
        for o in &choice.outcomes {
            let next = match &key {
                CostKey::Top => CostKey::Top,
                CostKey::Cost(c) => {
                    let n = c + &o.cost;
                    if &n <= b_max {
                        CostKey::Cost(n)
                    } else {
                        CostKey::Top
                    }
                }
            };
            let to = if o.to == t { target_name.clone() } else { pair_name(process, o.to, &next) };
            b.chain_edge(&from, &to, o.cost.clone(), o.prob.clone());
            if o.to != t && seen.insert((o.to, next.clone())) {
                queue.push_back((o.to, next));
            }
        }
    }
    let chain = b.build().expect("probabilities come from a well-formed process");
    chain.validated().map_err(|r| SolveError::NotAChain(r.summary()))
}

/// `P_σ(K ⊨ φ)` for an explicit scheduler, computed on the induced chain.
pub fn evaluate_scheduler(
    process: &Validated<CostProcess>,
    scheduler: &Scheduler,
    formula: &CostFormula,
) -> Result<Rational, SolveError> {
    let b_max = formula.query().b_max;
    let chain = induced_chain(process, scheduler, &b_max)?;
    solve_chain(&chain, formula)
}
