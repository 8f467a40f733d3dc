//! Exact cost distributions of cost chains.
//!
//! Costs never decrease along a run, so the product chain on `(state, cost)`
//! is block-triangular by cost. [`cost_distribution`] walks the reachable
//! cost levels in increasing order. Inside a level only zero-cost edges
//! matter; they are processed one strongly connected component at a time,
//! in topological order, and a component with a cycle is resolved by exact
//! elimination. Mass that would exceed the budget is collected in
//! `overflow`.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_traits::{One, Zero};
use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use serde::Serialize;

use crate::error::SolveError;
use crate::formula::{CostFormula, Query};
use crate::linalg::{invert, SolveStats};
use crate::model::{CostProcess, StateId, Validated};
use crate::rational::{Cost, Rational};

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ChainStats {
    /// Cost levels visited.
    pub levels: u64,
    pub linear: SolveStats,
}

/// `P(K = c)` for every `c <= budget`, plus `P(K > budget)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncatedDistribution {
    pub budget: Cost,
    /// Only non-zero entries are stored.
    pub mass: BTreeMap<Cost, Rational>,
    pub overflow: Rational,
    pub stats: ChainStats,
}

impl TruncatedDistribution {
    pub fn mass_at(&self, c: &Cost) -> Rational {
        self.mass.get(c).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn total(&self) -> Rational {
        self.mass.values().sum::<Rational>() + &self.overflow
    }

    /// `P(K ⊨ φ)`; the budget must be at least the query's `b_max`.
    pub fn probability(&self, query: &Query) -> Rational {
        assert!(self.budget >= query.b_max, "budget below the formula's largest constant");
        let mut p: Rational = self
            .mass
            .iter()
            .filter(|(c, _)| query.holds(c))
            .map(|(_, m)| m)
            .sum();
        if query.holds(&(self.budget.clone() + 1u32)) {
            // Above b_max every cost behaves like b_max + 1.
            p += &self.overflow;
        }
        p
    }
}

/// Zero-cost structure of a chain: components of the zero-cost graph in
/// topological order, with cached `(I - Z_C)^-T` for cyclic ones.
struct ZeroLayers {
    comp_of: Vec<usize>,
    comps: Vec<Vec<StateId>>,
    inverse: Vec<Option<Vec<Vec<Rational>>>>,
}

impl ZeroLayers {
    fn new(chain: &CostProcess, stats: &mut SolveStats) -> Self {
        let n = chain.num_states();
        let t = chain.target();
        let mut g: DiGraph<(), ()> = DiGraph::with_capacity(n, 0);
        for _ in 0..n {
            g.add_node(());
        }
        let mut self_loop = vec![false; n];
        // Unreachable states may sit in zero-cost cycles that never exit.
        let reachable = chain.reachable();
        for q in (0..n).filter(|&q| q != t && reachable[q]) {
            for o in &chain.choices(q)[0].outcomes {
                if o.cost.is_zero() {
                    g.add_edge(NodeIndex::new(q), NodeIndex::new(o.to), ());
                    self_loop[q] |= o.to == q;
                }
            }
        }
        // tarjan_scc yields sinks first.
        let mut comps: Vec<Vec<StateId>> = tarjan_scc(&g)
            .into_iter()
            .map(|c| {
                let mut c: Vec<StateId> = c.into_iter().map(|v| v.index()).collect();
                c.sort_unstable();
                c
            })
            .collect();
        comps.reverse();
        let mut comp_of = vec![0; n];
        let mut local = vec![0; n];
        for (k, c) in comps.iter().enumerate() {
            for (i, &q) in c.iter().enumerate() {
                comp_of[q] = k;
                local[q] = i;
            }
        }
        let inverse = comps
            .iter()
            .map(|c| {
                if c.len() == 1 && !self_loop[c[0]] {
                    return None;
                }
                // y = b + Z^T y  restricted to the component.
                let s = c.len();
                let mut a = vec![vec![Rational::zero(); s]; s];
                for (i, &q) in c.iter().enumerate() {
                    a[i][i] += Rational::one();
                    for o in &chain.choices(q)[0].outcomes {
                        if o.cost.is_zero() && comp_of[o.to] == comp_of[q] {
                            a[local[o.to]][i] -= &o.prob;
                        }
                    }
                }
                Some(invert(a, stats).expect("the target is reached almost surely"))
            })
            .collect();
        ZeroLayers { comp_of, comps, inverse }
    }
}

fn ensure_chain(chain: &CostProcess) -> Result<(), SolveError> {
    match (0..chain.num_states()).find(|&q| chain.choices(q).len() != 1) {
        Some(q) => Err(SolveError::NotAChain(chain.state_name(q).to_string())),
        None => Ok(()),
    }
}

/// Exact distribution of the accumulated cost, truncated at `budget`.
pub fn cost_distribution(
    chain: &Validated<CostProcess>,
    budget: &Cost,
) -> Result<TruncatedDistribution, SolveError> {
    ensure_chain(chain)?;
    let mut stats = ChainStats::default();
    let layers = ZeroLayers::new(chain, &mut stats.linear);
    let t = chain.target();

    let mut mass = BTreeMap::new();
    let mut overflow = Rational::zero();
    let mut pending: BTreeMap<Cost, HashMap<StateId, Rational>> = BTreeMap::new();
    pending.entry(Cost::zero()).or_default().insert(chain.initial(), Rational::one());

    while let Some((level, inflow)) = pending.pop_first() {
        stats.levels += 1;
        let mut at_target = Rational::zero();
        let mut acc: HashMap<StateId, Rational> = HashMap::new();
        let mut work: BTreeSet<usize> = BTreeSet::new();
        for (q, p) in inflow {
            work.insert(layers.comp_of[q]);
            *acc.entry(q).or_insert_with(Rational::zero) += p;
        }
        while let Some(k) = work.pop_first() {
            let comp = &layers.comps[k];
            let b: Vec<Rational> = comp
                .iter()
                .map(|q| acc.remove(q).unwrap_or_else(Rational::zero))
                .collect();
            let y = match &layers.inverse[k] {
                None => b,
                Some(inv) => inv
                    .iter()
                    .map(|row| {
                        let mut v = Rational::zero();
                        for (r, bi) in row.iter().zip(&b) {
                            if !r.is_zero() && !bi.is_zero() {
                                v += r * bi;
                            }
                        }
                        stats.linear.observe(&v);
                        v
                    })
                    .collect(),
            };
            for (&q, yq) in comp.iter().zip(y) {
                if yq.is_zero() {
                    continue;
                }
                if q == t {
                    at_target += yq;
                    continue;
                }
                for o in &chain.choices(q)[0].outcomes {
                    let p = &yq * &o.prob;
                    if o.cost.is_zero() {
                        if layers.comp_of[o.to] != k {
                            work.insert(layers.comp_of[o.to]);
                            *acc.entry(o.to).or_insert_with(Rational::zero) += p;
                        }
                    } else {
                        let next = &level + &o.cost;
                        if &next > budget {
                            overflow += p;
                        } else {
                            *pending.entry(next).or_default().entry(o.to).or_insert_with(Rational::zero) += p;
                        }
                    }
                }
            }
        }
        if !at_target.is_zero() {
            mass.insert(level, at_target);
        }
    }
    Ok(TruncatedDistribution { budget: budget.clone(), mass, overflow, stats })
}

/// Exact `P(K ⊨ φ)` for a cost chain.
pub fn solve_chain(chain: &Validated<CostProcess>, formula: &CostFormula) -> Result<Rational, SolveError> {
    solve_chain_query(chain, &formula.query())
}

pub fn solve_chain_query(chain: &Validated<CostProcess>, query: &Query) -> Result<Rational, SolveError> {
    ensure_chain(chain)?;
    match query.constant {
        Some(true) => Ok(Rational::one()),
        Some(false) => Ok(Rational::zero()),
        None => Ok(cost_distribution(chain, &query.b_max)?.probability(query)),
    }
}
