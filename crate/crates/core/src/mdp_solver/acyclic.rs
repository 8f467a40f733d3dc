use std::collections::{BTreeSet, HashMap};

use num_traits::Zero;

use super::levels::MdpStats;
use super::{indicator, Mode, Scheduler, SolveResult};
use crate::error::SolveError;
use crate::formula::{CostFormula, Query};
use crate::model::{CostProcess, StateId, Validated};
use crate::rational::{Cost, Rational};

/// Optimal value of an acyclic process by the recursion
/// `p(q, c) = opt_a Σ Δ(q, a)(q', k) · p(q', c + k)`, memoized on `(q, c)`.
/// No linear system is ever solved; the recursion depth is at most `|Q|`.
pub fn solve_acyclic(
    process: &Validated<CostProcess>,
    formula: &CostFormula,
    mode: Mode,
) -> Result<SolveResult, SolveError> {
    acyclic_query(process, &formula.query(), mode)
}

pub(crate) fn acyclic_query(
    process: &Validated<CostProcess>,
    query: &Query,
    mode: Mode,
) -> Result<SolveResult, SolveError> {
    if !process.is_acyclic() {
        return Err(SolveError::Cyclic);
    }
    let t = process.target();
    let b_max = &query.b_max;
    let mut memo: HashMap<(StateId, Cost), (Rational, usize)> = HashMap::new();
    let mut top_states = BTreeSet::new();

    // Explicit post-order traversal; the control graph is a DAG apart from
    // the target loop, so no pair can depend on itself.
    let start = (process.initial(), Cost::zero());
    let mut stack: Vec<((StateId, Cost), bool)> = Vec::new();
    if process.initial() != t {
        stack.push((start.clone(), false));
    }
    while let Some(((q, c), expanded)) = stack.pop() {
        if memo.contains_key(&(q, c.clone())) {
            continue;
        }
        if !expanded {
            stack.push(((q, c.clone()), true));
            for o in process.choices(q).iter().flat_map(|ch| &ch.outcomes) {
                let n = &c + &o.cost;
                if o.to != t && &n <= b_max && !memo.contains_key(&(o.to, n.clone())) {
                    stack.push(((o.to, n), false));
                }
            }
            continue;
        }
        let values: Vec<Rational> = process
            .choices(q)
            .iter()
            .map(|ch| {
                let mut v = Rational::zero();
                for o in &ch.outcomes {
                    let n = &c + &o.cost;
                    let succ = if &n > b_max {
                        top_states.insert(o.to);
                        indicator(query.tail)
                    } else if o.to == t {
                        indicator(query.holds(&n))
                    } else {
                        memo[&(o.to, n)].0.clone()
                    };
                    if !succ.is_zero() {
                        v += &o.prob * succ;
                    }
                }
                v
            })
            .collect();
        let (a, best) = mode.best(&values);
        memo.insert((q, c), (best, a));
    }

    let value = if process.initial() == t {
        indicator(query.holds(&Cost::zero()))
    } else {
        memo[&start].0.clone()
    };
    let mut scheduler = Scheduler::new();
    let stats = MdpStats {
        levels: memo.keys().map(|(_, c)| c).collect::<BTreeSet<_>>().len() as u64,
        pairs: memo.len() as u64,
        ..MdpStats::default()
    };
    for ((q, c), (_, a)) in memo {
        scheduler.insert(q, super::CostKey::Cost(c), process.choices(q)[a].action);
    }
    scheduler.fill_top(process, &top_states);
    Ok(SolveResult { value, scheduler, mode, strategy: "acyclic", stats })
}
