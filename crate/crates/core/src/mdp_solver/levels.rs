//! Backward induction over the levels of a truncated product.
//!
//! The product pairs a control state with a key (the accumulated cost, or
//! a cost/utility pair) that never decreases. Keys beyond the truncation
//! collapse into a single saturation bucket whose value is a constant.
//! Levels are solved from the largest key down; inside a level only the
//! outcomes that keep the key unchanged create dependencies, and those are
//! handled per strongly connected component, using exact policy iteration
//! for components with cycles.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::hash::Hash;

use num_traits::{One, Zero};
use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use serde::Serialize;

use super::{indicator, Mode};
use crate::linalg::{solve, SolveStats};
use crate::model::{ActionId, Process, StateId, Weight};
use crate::rational::Rational;

/// Constant part and in-level dependencies of one choice.
type LocalChoice = (Rational, Vec<(usize, Rational)>);

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct MdpStats {
    /// Distinct keys visited.
    pub levels: u64,
    /// Reachable non-target `(state, key)` pairs.
    pub pairs: u64,
    /// Policy-iteration rounds across all cyclic components.
    pub policy_iterations: u64,
    pub linear: SolveStats,
}

/// Description of a truncated product.
pub(crate) struct Truncation<'a, W, K, S, T> {
    pub process: &'a Process<W>,
    pub start: K,
    /// Key after paying a weight, or `None` for the saturation bucket.
    pub step: S,
    /// Whether the target counts as success at this key.
    pub terminal: T,
    /// Constant value of the saturation bucket.
    pub top: bool,
}

pub(crate) struct LevelSolution<K> {
    pub value: Rational,
    pub choice: BTreeMap<(StateId, K), ActionId>,
    /// States entered with a saturated key.
    pub top_states: BTreeSet<StateId>,
    pub stats: MdpStats,
}

pub(crate) fn solve_levels<W, K, S, T>(tr: &Truncation<'_, W, K, S, T>, mode: Mode) -> LevelSolution<K>
where
    W: Weight,
    K: Ord + Clone + Hash,
    S: Fn(&K, &W) -> Option<K>,
    T: Fn(&K) -> bool,
{
    let p = tr.process;
    let t = p.target();
    let mut stats = MdpStats::default();

    // Forward exploration, level by level.
    let mut levels: Vec<(K, Vec<StateId>)> = Vec::new();
    let mut top_states = BTreeSet::new();
    let mut frontier: BTreeMap<K, BTreeSet<StateId>> = BTreeMap::new();
    if p.initial() != t {
        frontier.entry(tr.start.clone()).or_default().insert(p.initial());
    }
    while let Some((key, seeds)) = frontier.pop_first() {
        let mut members: BTreeSet<StateId> = seeds.clone();
        let mut stack: Vec<StateId> = seeds.into_iter().collect();
        while let Some(q) = stack.pop() {
            for c in p.choices(q) {
                for o in &c.outcomes {
                    match (tr.step)(&key, &o.cost) {
                        None => {
                            top_states.insert(o.to);
                        }
                        Some(_) if o.to == t => {}
                        Some(k2) if k2 == key => {
                            if members.insert(o.to) {
                                stack.push(o.to);
                            }
                        }
                        Some(k2) => {
                            frontier.entry(k2).or_default().insert(o.to);
                        }
                    }
                }
            }
        }
        stats.levels += 1;
        stats.pairs += members.len() as u64;
        levels.push((key, members.into_iter().collect()));
    }

    let mut values: HashMap<(StateId, K), Rational> = HashMap::new();
    let mut choice: BTreeMap<(StateId, K), ActionId> = BTreeMap::new();

    for (key, states) in levels.iter().rev() {
        let local: HashMap<StateId, usize> = states.iter().enumerate().map(|(i, &q)| (q, i)).collect();
        // Per state and choice: constant part and in-level dependencies.
        let mut actions: Vec<Vec<LocalChoice>> = Vec::with_capacity(states.len());
        let mut graph: DiGraph<(), ()> = DiGraph::with_capacity(states.len(), 0);
        for _ in states {
            graph.add_node(());
        }
        let mut self_loop = vec![false; states.len()];
        for (i, &q) in states.iter().enumerate() {
            let mut per_q = Vec::with_capacity(p.choices(q).len());
            for c in p.choices(q) {
                let mut r = Rational::zero();
                let mut deps: Vec<(usize, Rational)> = Vec::new();
                for o in &c.outcomes {
                    match (tr.step)(key, &o.cost) {
                        None => {
                            if tr.top {
                                r += &o.prob;
                            }
                        }
                        Some(k2) if o.to == t => {
                            if (tr.terminal)(&k2) {
                                r += &o.prob;
                            }
                        }
                        Some(k2) if k2 == *key => {
                            let j = local[&o.to];
                            graph.update_edge(NodeIndex::new(i), NodeIndex::new(j), ());
                            self_loop[i] |= i == j;
                            deps.push((j, o.prob.clone()));
                        }
                        Some(k2) => {
                            let v = &values[&(o.to, k2)];
                            if !v.is_zero() {
                                r += &o.prob * v;
                            }
                        }
                    }
                }
                per_q.push((r, deps));
            }
            actions.push(per_q);
        }

        let mut v: Vec<Option<Rational>> = vec![None; states.len()];
        let mut pick: Vec<usize> = vec![0; states.len()];
        let q_value = |v: &[Option<Rational>], scc_v: &HashMap<usize, Rational>, i: usize, a: usize| {
            let (r, deps) = &actions[i][a];
            let mut x = r.clone();
            for (j, pr) in deps {
                let vj = v[*j].as_ref().or_else(|| scc_v.get(j)).expect("dependency solved first");
                if !vj.is_zero() {
                    x += pr * vj;
                }
            }
            x
        };

        // Tarjan yields components with their successors first.
        for comp in tarjan_scc(&graph) {
            let comp: Vec<usize> = {
                let mut c: Vec<usize> = comp.into_iter().map(|n| n.index()).collect();
                c.sort_unstable();
                c
            };
            let empty = HashMap::new();
            if comp.len() == 1 && !self_loop[comp[0]] {
                let i = comp[0];
                let qs: Vec<Rational> = (0..actions[i].len()).map(|a| q_value(&v, &empty, i, a)).collect();
                let (a, best) = mode.best(&qs);
                pick[i] = a;
                v[i] = Some(best);
                continue;
            }

            // Policy iteration; every policy reaches the target almost surely,
            // so each evaluation is a nonsingular system.
            let pos: HashMap<usize, usize> = comp.iter().enumerate().map(|(k, &i)| (i, k)).collect();
            let mut policy: Vec<usize> = vec![0; comp.len()];
            let solved: HashMap<usize, Rational> = loop {
                stats.policy_iterations += 1;
                let n = comp.len();
                let mut a = vec![vec![Rational::zero(); n]; n];
                let mut b = vec![Rational::zero(); n];
                for (k, &i) in comp.iter().enumerate() {
                    let (r, deps) = &actions[i][policy[k]];
                    a[k][k] += Rational::one();
                    b[k] = r.clone();
                    for (j, pr) in deps {
                        match pos.get(j) {
                            Some(&kj) => a[k][kj] -= pr,
                            None => b[k] += pr * v[*j].as_ref().expect("solved earlier"),
                        }
                    }
                }
                let x = solve(a, b, &mut stats.linear).expect("every policy is proper");
                let cur: HashMap<usize, Rational> = comp.iter().copied().zip(x).collect();
                let mut changed = false;
                for (k, &i) in comp.iter().enumerate() {
                    let qs: Vec<Rational> = (0..actions[i].len()).map(|a| q_value(&v, &cur, i, a)).collect();
                    let (a_best, best) = mode.best(&qs);
                    if mode.strictly_better(&best, &qs[policy[k]]) {
                        policy[k] = a_best;
                        changed = true;
                    }
                }
                if !changed {
                    break cur;
                }
            };
            for &i in &comp {
                let qs: Vec<Rational> = (0..actions[i].len()).map(|a| q_value(&v, &solved, i, a)).collect();
                pick[i] = mode.best(&qs).0;
            }
            for (i, val) in solved {
                v[i] = Some(val);
            }
        }

        for (i, &q) in states.iter().enumerate() {
            choice.insert((q, key.clone()), p.choices(q)[pick[i]].action);
            values.insert((q, key.clone()), v[i].take().expect("all states solved"));
        }
    }

    let value = if p.initial() == t {
        indicator((tr.terminal)(&tr.start))
    } else {
        values[&(p.initial(), tr.start.clone())].clone()
    };
    LevelSolution { value, choice, top_states, stats }
}
