use std::collections::{BTreeMap, VecDeque};

use num_bigint::BigUint;
use num_traits::{One, Pow, Zero};
use serde::Serialize;

use super::circuit::{ArithmeticCircuit, GateId, GateKind};
use super::parikh::{circuit_to_dfa, ParikhDfa};
use crate::error::GadgetError;
use crate::model::{CostProcess, ProcessBuilder};
use crate::quantile::ln_upper;
use crate::rational::{Cost, Rational};

/// The factor `m = 2^two_exp · d^d_exp` with `P(K = T) = val(g)/m`, kept
/// factored because it grows doubly exponentially in the level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ScaleFactor {
    pub two_exp: u64,
    pub d: u64,
    pub d_exp: u64,
}

impl ScaleFactor {
    /// `m(0) = 1`; a `+` level multiplies by `2d`, a `*` level maps `m` to `d²m²`.
    pub fn for_level(level: usize, d: u64) -> Self {
        let mut s = ScaleFactor { two_exp: 0, d, d_exp: 0 };
        for l in 1..=level {
            if l % 2 == 1 {
                s.two_exp += 1;
                s.d_exp += 1;
            } else {
                s.two_exp *= 2;
                s.d_exp = 2 * s.d_exp + 2;
            }
        }
        s
    }

    pub fn value(&self) -> BigUint {
        (BigUint::one() << self.two_exp) * Pow::pow(BigUint::from(self.d), self.d_exp)
    }

    /// Upper bound on `ln(m + 1)`, computed from the exponents only.
    pub fn ln_upper_bound(&self, bits: u32) -> Rational {
        let ln2 = ln_upper(&Rational::from_integer(2.into()), bits);
        let lnd = ln_upper(&Rational::from_integer(self.d.into()), bits);
        // ln(m + 1) <= ln m + 1/m <= ln m + 1
        Rational::from_integer(self.two_exp.into()) * ln2 + Rational::from_integer(self.d_exp.into()) * lnd + Rational::one()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypedEdge {
    pub from: usize,
    pub to: usize,
    /// Sparse cost vector over the alphabet.
    pub cost: BTreeMap<usize, Cost>,
    pub prob: Rational,
}

/// A Markov chain whose transitions carry a cost vector, one component per
/// letter of `alphabet`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypedCostChain {
    pub states: Vec<String>,
    pub alphabet: Vec<String>,
    pub initial: usize,
    pub target: usize,
    pub edges: Vec<TypedEdge>,
}

/// `|V'| + 1` for the automaton's sub-circuit, raised if some out-state
/// already has more outgoing letters.
fn padding_degree(dfa: &ParikhDfa) -> u64 {
    let succ = dfa.successors();
    let widest = dfa
        .ports
        .iter()
        .skip(1)
        .map(|p| succ[p.output].len() as u64)
        .max()
        .unwrap_or(0);
    (dfa.circuit.len() as u64 + 1).max(widest)
}

/// Turns the automaton into a typed chain with `P(K = c) = val(g)/m`.
///
/// Letters become unit vectors. Every out-state of a gate other than the
/// designated one is padded with fresh letters `e_1, e_2, …` leading to the
/// target until it has `d` outgoing edges, the zero-leaf's in-state gets an
/// `e_1` edge to the target, and each state picks its edges uniformly.
/// Returns the chain, the target vector `c` and `m`.
pub fn dfa_to_typed_chain(dfa: &ParikhDfa) -> (TypedCostChain, Vec<Cost>, ScaleFactor) {
    typed_with_degree(dfa, padding_degree(dfa))
}

fn typed_with_degree(dfa: &ParikhDfa, d: u64) -> (TypedCostChain, Vec<Cost>, ScaleFactor) {
    let sigma = dfa.alphabet.len();
    let mut alphabet = dfa.alphabet.clone();
    alphabet.extend((1..=d).map(|j| format!("e_{j}")));
    let target = dfa.output;

    let mut out: Vec<Vec<(Option<usize>, usize)>> =
        dfa.successors().into_iter().map(|s| s.into_iter().map(|(l, r)| (Some(l), r)).collect()).collect();
    for p in dfa.ports.iter().skip(1) {
        let have = out[p.output].len() as u64;
        for j in 0..d.saturating_sub(have) {
            out[p.output].push((Some(sigma + j as usize), target));
        }
        if dfa.circuit.gate(p.gate).kind == GateKind::Zero {
            out[p.input].push((Some(sigma), target));
        }
    }
    out[target] = vec![(None, target)];

    // Keep the states reachable from the designated gate's in-state.
    let mut index: Vec<Option<usize>> = vec![None; dfa.num_states()];
    let mut order = Vec::new();
    let mut queue = VecDeque::from([dfa.input]);
    index[dfa.input] = Some(0);
    order.push(dfa.input);
    while let Some(q) = queue.pop_front() {
        for &(_, r) in &out[q] {
            if index[r].is_none() {
                index[r] = Some(order.len());
                order.push(r);
                queue.push_back(r);
            }
        }
    }
    if index[target].is_none() {
        index[target] = Some(order.len());
        order.push(target);
    }

    let mut edges = Vec::new();
    for &q in &order {
        let n = out[q].len() as i64;
        for &(l, r) in &out[q] {
            let cost = l.map(|l| BTreeMap::from([(l, Cost::one())])).unwrap_or_default();
            edges.push(TypedEdge {
                from: index[q].unwrap(),
                to: index[r].unwrap(),
                cost,
                prob: Rational::new(1.into(), n.into()),
            });
        }
    }
    let chain = TypedCostChain {
        states: order.iter().map(|&q| dfa.states[q].clone()).collect(),
        alphabet,
        initial: 0,
        target: index[target].unwrap(),
        edges,
    };
    let mut c = dfa.parikh.clone();
    c.resize(sigma + d as usize, Cost::zero());
    let level = dfa.circuit.level(dfa.gate);
    (chain, c, ScaleFactor::for_level(level, d))
}

/// Collapses cost vectors into numbers with `h(x) = Σ_j x_j·b^j + (Σ x)·b^k`,
/// where `b = 1 + Σ c` and `k` is the alphabet size. The top digit counts
/// letters, which makes `h(x) = h(c)` hold only for `x = c` among the vectors
/// a run can accumulate. Returns the chain and `T = h(c)`.
pub fn typed_to_chain(typed: &TypedCostChain, c: &[Cost]) -> (CostProcess, Cost) {
    let k = typed.alphabet.len();
    let base: Cost = c.iter().sum::<Cost>() + 1u32;
    let powers: Vec<Cost> = (0..=k).map(|j| Pow::pow(&base, j)).collect();
    let h = |x: &dyn Fn(usize) -> Cost| {
        let mut total = Cost::zero();
        let mut sum = Cost::zero();
        for (j, p) in powers.iter().take(k).enumerate() {
            let xj = x(j);
            if !xj.is_zero() {
                total += &xj * p;
                sum += xj;
            }
        }
        total + sum * &powers[k]
    };
    let mut b = ProcessBuilder::new();
    for s in &typed.states {
        b.state(s);
    }
    b.initial(&typed.states[typed.initial]).target(&typed.states[typed.target]);
    for e in &typed.edges {
        let cost = h(&|j| e.cost.get(&j).cloned().unwrap_or_default());
        b.chain_edge(&typed.states[e.from], &typed.states[e.to], cost, e.prob.clone());
    }
    let chain = b.build().expect("typed chain has valid probabilities");
    let t = h(&|j| c[j].clone());
    (chain, t)
}

/// A cost chain with `P(K = target) = val(g)/m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GadgetCertificate {
    pub chain: CostProcess,
    /// `T`
    pub target: Cost,
    /// `m`
    pub scale: ScaleFactor,
    /// Level of the designated gate.
    pub level: usize,
}

/// Runs the circuit → automaton → typed chain → chain pipeline for a gate
/// on an odd level. Lift even-level gates first with
/// [`ArithmeticCircuit::lift_to_odd`].
pub fn circuit_to_chain(circuit: &ArithmeticCircuit, g: GateId) -> Result<GadgetCertificate, GadgetError> {
    chain_with_degree(circuit, g, None)
}

pub(crate) fn chain_with_degree(
    circuit: &ArithmeticCircuit,
    g: GateId,
    d: Option<u64>,
) -> Result<GadgetCertificate, GadgetError> {
    if g >= circuit.len() {
        return Err(GadgetError::MalformedCircuit(format!("no gate #{g}")));
    }
    let level = circuit.level(g);
    if level.is_multiple_of(2) {
        return Err(GadgetError::Precondition(format!(
            "gate `{}` is on even level {level}; lift it to an odd level first",
            circuit.gate(g).name
        )));
    }
    let dfa = circuit_to_dfa(circuit, g)?;
    let d = d.unwrap_or(0).max(padding_degree(&dfa));
    let (typed, c, scale) = typed_with_degree(&dfa, d);
    let (chain, target) = typed_to_chain(&typed, &c);
    Ok(GadgetCertificate { chain, target, scale, level })
}

pub(crate) fn degree_for(circuit: &ArithmeticCircuit, g: GateId) -> Result<u64, GadgetError> {
    Ok(padding_degree(&circuit_to_dfa(circuit, g)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain_solver::solve_chain;
    use crate::formula::CostFormula;
    use crate::rational::{rat, rat_int};

    fn hit(chain: &CostProcess, t: &Cost) -> Rational {
        solve_chain(&chain.clone().validated().unwrap(), &CostFormula::eq(t.clone())).unwrap()
    }

    #[test]
    fn scale_recurrence() {
        assert_eq!(ScaleFactor::for_level(0, 4).value(), BigUint::one());
        assert_eq!(ScaleFactor::for_level(1, 4).value(), BigUint::from(8u32));
        assert_eq!(ScaleFactor::for_level(2, 4).value(), BigUint::from(4u32 * 256));
        assert_eq!(ScaleFactor::for_level(3, 3), ScaleFactor { two_exp: 3, d: 3, d_exp: 5 });
        let s = ScaleFactor::for_level(3, 5);
        let m = Rational::from_integer(s.value().into());
        // e^(ln bound) >= m + 1, checked through ln_upper's monotonicity.
        assert!(s.ln_upper_bound(64) >= ln_upper(&(m + Rational::one()), 64) - rat(1, 1 << 20));
    }

    #[test]
    fn h_of_the_unit_target() {
        let typed = TypedCostChain {
            states: vec!["s".into(), "t".into()],
            alphabet: vec!["a".into(), "b".into()],
            initial: 0,
            target: 1,
            edges: vec![
                TypedEdge { from: 0, to: 1, cost: BTreeMap::new(), prob: rat(1, 1) },
                TypedEdge { from: 1, to: 1, cost: BTreeMap::new(), prob: rat(1, 1) },
            ],
        };
        let (chain, t) = typed_to_chain(&typed, &[Cost::one(), Cost::one()]);
        assert_eq!(t, Cost::from(22u32));
        assert!(chain.all_outcomes().all(|o| o.cost.is_zero()));
        let (_, zero) = typed_to_chain(&typed, &[Cost::zero(), Cost::zero()]);
        assert_eq!(zero, Cost::zero());
    }

    fn leaves() -> (ArithmeticCircuit, GateId, GateId) {
        let mut c = ArithmeticCircuit::new();
        let z = c.zero();
        let o = c.one();
        (c, z, o)
    }

    #[test]
    fn one_leaf_is_certain() {
        let (c, _, o) = leaves();
        let dfa = circuit_to_dfa(&c, o).unwrap();
        let (typed, cv, scale) = dfa_to_typed_chain(&dfa);
        assert_eq!(scale.value(), BigUint::one());
        let (chain, t) = typed_to_chain(&typed, &cv);
        assert_eq!(hit(&chain, &t), rat(1, 1));
    }

    #[test]
    fn small_sums() {
        let (mut c, z, o) = leaves();
        let two = c.plus(o, o).unwrap();
        let cert = circuit_to_chain(&c, two).unwrap();
        assert_eq!(cert.scale.d, 4);
        assert_eq!(hit(&cert.chain, &cert.target), rat(1, 4));

        let (mut c, z2, o2) = leaves();
        let _ = (z, o);
        let uno = c.plus(o2, z2).unwrap();
        let cert = circuit_to_chain(&c, uno).unwrap();
        assert_eq!(hit(&cert.chain, &cert.target), rat(1, 8));
    }

    #[test]
    fn deep_squares_scale_exactly() {
        let (mut c, z, o) = leaves();
        let uno = c.plus(o, z).unwrap();
        let sq = c.times(uno, uno).unwrap();
        let two = c.plus(sq, sq).unwrap();
        let four = c.times(two, two).unwrap();
        let g = c.lift_to_odd(four);
        assert_eq!(c.level(g), 5);
        let cert = circuit_to_chain(&c, g).unwrap();
        let m = Rational::from_integer(cert.scale.value().into());
        assert_eq!(hit(&cert.chain, &cert.target) * m, rat_int(4));
    }

    #[test]
    fn lifted_leaves() {
        let (mut c, z, o) = leaves();
        let g = c.lift_to_odd(o);
        let cert = circuit_to_chain(&c, g).unwrap();
        let d = cert.scale.d;
        assert_eq!(d, c.len() as u64 + 1);
        assert_eq!(hit(&cert.chain, &cert.target), Rational::new(1.into(), (2 * d as i64).into()));
        let g = c.lift_to_odd(z);
        let cert = circuit_to_chain(&c, g).unwrap();
        assert_eq!(hit(&cert.chain, &cert.target), rat(0, 1));
        assert!(matches!(circuit_to_chain(&c, o), Err(GadgetError::Precondition(_))));
    }

    #[test]
    fn level_three_identity() {
        let (mut c, z, o) = leaves();
        let two = c.plus(o, o).unwrap();
        let uno = c.plus(o, z).unwrap();
        let four = c.times(two, two).unwrap();
        let twice = c.times(two, uno).unwrap();
        let six = c.plus(four, twice).unwrap();
        let cert = circuit_to_chain(&c, six).unwrap();
        assert!(cert.chain.clone().validated().is_ok());
        let p = hit(&cert.chain, &cert.target);
        assert_eq!(p * rat_int(cert.scale.value()), rat(6, 1));
    }
}
