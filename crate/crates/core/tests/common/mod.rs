//! Generators and independent oracles shared by the integration tests.
//!
//! The oracles recompute every answer from the model alone: they never call
//! the solvers, the linear-algebra module or the gadget brute-force helpers
//! of the crate.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use costodds::formula::CostFormula;
use costodds::gadgets::{ArithmeticCircuit, CountdownGame, GateId, GateKind, Move};
use costodds::model::{CostProcess, ProcessBuilder, Validated};
use costodds::rational::{Cost, Rational};
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn q(num: i64, den: i64) -> Rational {
    Rational::new(num.into(), den.into())
}

/// Shape of a random process. `states` counts the target.
#[derive(Clone, Debug)]
pub struct ProcSpec {
    pub states: usize,
    pub actions: usize,
    pub max_cost: u32,
    /// Denominators a two-outcome split may use.
    pub dens: &'static [i64],
}

impl ProcSpec {
    pub fn chains(states: usize, max_cost: u32) -> Self {
        ProcSpec { states, actions: 1, max_cost, dens: &[2, 3, 4, 5] }
    }
}

/// A random process with the shape of `spec`, not necessarily valid. With
/// `forward`, edges only lead to later states, so the control graph is a DAG.
pub fn random_raw_process(rng: &mut ChaCha8Rng, spec: &ProcSpec, forward: bool) -> CostProcess {
    let n = rng.gen_range(2..=spec.states);
    let name = |i: usize| if i + 1 == n { "t".to_string() } else { format!("q{i}") };
    let mut b = ProcessBuilder::new();
    b.initial("q0").target("t");
    for i in 0..n - 1 {
        b.state(&name(i));
        for a in 0..rng.gen_range(1..=spec.actions) {
            let action = format!("a{a}");
            let split = if rng.gen_bool(0.7) {
                let den = *spec.dens.choose(rng).unwrap();
                let num = rng.gen_range(1..den);
                vec![q(num, den), q(den - num, den)]
            } else {
                vec![q(1, 1)]
            };
            for p in split {
                let to = if forward { rng.gen_range(i + 1..n) } else { rng.gen_range(0..n) };
                let cost = rng.gen_range(0..=spec.max_cost);
                b.transition(&name(i), &action, &name(to), cost, p);
            }
        }
    }
    b.transition("t", "a0", "t", 0u32, q(1, 1));
    b.build().expect("well-formed")
}

/// A random process that passes validation; invalid draws are redrawn.
pub fn random_process(rng: &mut ChaCha8Rng, spec: &ProcSpec) -> Validated<CostProcess> {
    loop {
        if let Ok(v) = random_raw_process(rng, spec, false).validated() {
            return v;
        }
    }
}

/// A random process whose control graph is a DAG; always valid.
pub fn random_dag(rng: &mut ChaCha8Rng, spec: &ProcSpec) -> Validated<CostProcess> {
    random_raw_process(rng, spec, true).validated().expect("DAGs reach the target")
}

/// A random Boolean combination of atoms `x <= B` with `B <= b_max`, and
/// its largest constant.
pub fn random_formula(rng: &mut ChaCha8Rng, b_max: u32) -> (CostFormula, u32) {
    fn go(rng: &mut ChaCha8Rng, b_max: u32, depth: u32, top: &mut u32) -> CostFormula {
        if depth == 0 || rng.gen_bool(0.4) {
            let b = rng.gen_range(0..=b_max);
            *top = (*top).max(b);
            return CostFormula::le(b);
        }
        match rng.gen_range(0..3) {
            0 => go(rng, b_max, depth - 1, top).not(),
            1 => go(rng, b_max, depth - 1, top).and(go(rng, b_max, depth - 1, top)),
            _ => go(rng, b_max, depth - 1, top).or(go(rng, b_max, depth - 1, top)),
        }
    }
    let mut top = 0;
    let f = go(rng, b_max, 3, &mut top);
    (f, top)
}

/// Solves `a·x = b` by Gaussian elimination with exact pivoting.
pub fn gauss(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Vec<Rational> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero()).expect("non-singular system");
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = a[col][col].recip();
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = &a[r][col] * &inv;
            let pivot_row = a[col].clone();
            for (x, y) in a[r].iter_mut().zip(&pivot_row).skip(col) {
                *x -= &factor * y;
            }
            let delta = &factor * &b[col];
            b[r] -= delta;
        }
    }
    (0..n).map(|i| &b[i] / &a[i][i]).collect()
}

/// The truncated cost space of a process: layers `0..=b_max` and one
/// saturated layer `b_max + 1` for all larger costs.
pub struct Truncated<'a> {
    pub process: &'a CostProcess,
    pub formula: &'a CostFormula,
    pub b_max: u64,
}

impl Truncated<'_> {
    fn top(&self) -> u64 {
        self.b_max + 1
    }

    fn next(&self, layer: u64, cost: &Cost) -> u64 {
        match cost.to_u64() {
            Some(k) => (layer + k).min(self.top()),
            None => self.top(),
        }
    }

    fn sat(&self, layer: u64) -> Rational {
        if self.formula.satisfies(&Cost::from(layer)) {
            Rational::one()
        } else {
            Rational::zero()
        }
    }

    /// Non-target configurations reachable from `(initial, 0)` under some
    /// scheduler.
    pub fn reachable(&self) -> BTreeSet<(usize, u64)> {
        let p = self.process;
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::new();
        if p.initial() != p.target() {
            seen.insert((p.initial(), 0));
            queue.push_back((p.initial(), 0));
        }
        while let Some((s, layer)) = queue.pop_front() {
            for ch in p.choices(s) {
                for o in &ch.outcomes {
                    let cfg = (o.to, self.next(layer, &o.cost));
                    if o.to != p.target() && seen.insert(cfg) {
                        queue.push_back(cfg);
                    }
                }
            }
        }
        seen
    }

    /// Reachable configurations with more than one enabled action.
    pub fn decision_points(&self) -> Vec<(usize, u64)> {
        self.reachable().into_iter().filter(|&(s, _)| self.process.choices(s).len() > 1).collect()
    }

    /// `P(K ⊨ φ)` from `(initial, 0)` under the scheduler that picks the
    /// choice index `pick(state, layer)`. Layers are solved top-down; only
    /// zero-cost steps stay inside a layer.
    pub fn value(&self, pick: &dyn Fn(usize, u64) -> usize) -> Rational {
        let p = self.process;
        let t = p.target();
        if p.initial() == t {
            return self.sat(0);
        }
        // Unreachable states may loop forever, so they stay out of the system.
        let live = p.reachable();
        let inner: Vec<usize> = (0..p.num_states()).filter(|&s| s != t && live[s]).collect();
        let pos: BTreeMap<usize, usize> = inner.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        let mut values: Vec<Vec<Rational>> = vec![Vec::new(); self.top() as usize + 1];
        for layer in (0..=self.top()).rev() {
            let n = inner.len();
            let mut a = vec![vec![Rational::zero(); n]; n];
            let mut b = vec![Rational::zero(); n];
            for (i, &s) in inner.iter().enumerate() {
                a[i][i] += Rational::one();
                let ch = &p.choices(s)[pick(s, layer)];
                for o in &ch.outcomes {
                    let next = self.next(layer, &o.cost);
                    if o.to == t {
                        b[i] += &o.prob * self.sat(next);
                    } else if next == layer {
                        a[i][pos[&o.to]] -= &o.prob;
                    } else {
                        b[i] += &o.prob * &values[next as usize][pos[&o.to]];
                    }
                }
            }
            values[layer as usize] = gauss(a, b);
        }
        values[0][pos[&p.initial()]].clone()
    }

    /// Maximum and minimum of [`value`](Self::value) over every
    /// deterministic scheduler on the reachable decision points.
    pub fn brute_force(&self) -> (Rational, Rational) {
        let points = self.decision_points();
        let arity: Vec<usize> = points.iter().map(|&(s, _)| self.process.choices(s).len()).collect();
        let mut digits = vec![0usize; points.len()];
        let mut best: Option<(Rational, Rational)> = None;
        loop {
            let table: BTreeMap<(usize, u64), usize> = points.iter().cloned().zip(digits.iter().cloned()).collect();
            let v = self.value(&|s, layer| table.get(&(s, layer)).copied().unwrap_or(0));
            best = Some(match best {
                None => (v.clone(), v),
                Some((hi, lo)) => (hi.max(v.clone()), lo.min(v)),
            });
            let mut i = 0;
            loop {
                if i == digits.len() {
                    return best.expect("at least one scheduler");
                }
                digits[i] += 1;
                if digits[i] < arity[i] {
                    break;
                }
                digits[i] = 0;
                i += 1;
            }
        }
    }
}

/// `P(K ⊨ φ)` of an acyclic chain, summed over its complete paths.
pub fn path_sum(chain: &CostProcess, formula: &CostFormula) -> Rational {
    fn go(chain: &CostProcess, formula: &CostFormula, s: usize, cost: Cost, prob: Rational) -> Rational {
        if s == chain.target() {
            return if formula.satisfies(&cost) { prob } else { Rational::zero() };
        }
        let mut sum = Rational::zero();
        for o in &chain.choices(s)[0].outcomes {
            sum += go(chain, formula, o.to, &cost + &o.cost, &prob * &o.prob);
        }
        sum
    }
    go(chain, formula, chain.initial(), Cost::zero(), Rational::one())
}

/// Circuit value by direct recursion over the gate list.
pub fn circuit_value(c: &ArithmeticCircuit, g: GateId) -> BigUint {
    let gate = c.gate(g);
    match gate.kind {
        GateKind::Zero => BigUint::zero(),
        GateKind::One => BigUint::one(),
        GateKind::Plus => circuit_value(c, gate.inputs[0]) + circuit_value(c, gate.inputs[1]),
        GateKind::Times => circuit_value(c, gate.inputs[0]) * circuit_value(c, gate.inputs[1]),
    }
}

fn leaves(c: &mut ArithmeticCircuit) -> (GateId, GateId) {
    (c.add("z", GateKind::Zero, &[]).unwrap(), c.add("o", GateKind::One, &[]).unwrap())
}

fn kind_for(level: usize) -> GateKind {
    if level % 2 == 1 {
        GateKind::Plus
    } else {
        GateKind::Times
    }
}

fn pairs(gates: &[GateId]) -> Vec<[GateId; 2]> {
    let mut out = Vec::new();
    for (i, &a) in gates.iter().enumerate() {
        for &b in &gates[i..] {
            out.push([a, b]);
        }
    }
    out
}

/// Every circuit of the shape 2 leaves, 2 sums, 2 products, 1 sum, with
/// unordered input pairs and unordered gate pairs per level.
pub fn enumerated_circuits() -> Vec<ArithmeticCircuit> {
    let mut out = Vec::new();
    let mut base = ArithmeticCircuit::new();
    let (z, o) = leaves(&mut base);
    let p1 = pairs(&[z, o]);
    for (i, x) in p1.iter().enumerate() {
        for y in &p1[i..] {
            let mut c1 = base.clone();
            let a = c1.add("s1", GateKind::Plus, x).unwrap();
            let b = c1.add("s2", GateKind::Plus, y).unwrap();
            let p2 = pairs(&[a, b]);
            for (j, u) in p2.iter().enumerate() {
                for w in &p2[j..] {
                    let mut c2 = c1.clone();
                    let m1 = c2.add("p1", GateKind::Times, u).unwrap();
                    let m2 = c2.add("p2", GateKind::Times, w).unwrap();
                    for top in pairs(&[m1, m2]) {
                        let mut c3 = c2.clone();
                        c3.add("r", GateKind::Plus, &top).unwrap();
                        out.push(c3);
                    }
                }
            }
        }
    }
    out
}

/// A random normal-form circuit with at most `max_gates` gates and top
/// level at most `max_level`.
pub fn random_circuit(rng: &mut ChaCha8Rng, max_gates: usize, max_level: usize) -> ArithmeticCircuit {
    let mut c = ArithmeticCircuit::new();
    let (z, o) = leaves(&mut c);
    let top = rng.gen_range(1..=max_level);
    let mut below = vec![z, o];
    let mut budget = max_gates - 2 - top;
    for level in 1..=top {
        let extra = rng.gen_range(0..=budget.min(2));
        budget -= extra;
        let mut here = Vec::new();
        for k in 0..=extra {
            let u = *below.choose(rng).unwrap();
            let w = *below.choose(rng).unwrap();
            here.push(c.add(&format!("l{level}g{k}"), kind_for(level), &[u, w]).unwrap());
        }
        below = here;
    }
    c
}

/// `∃x1 ∀x2 ∃x3 … : Σ xi·ki = T` by direct recursion.
pub fn qss_wins(k: &[u64], t: u64) -> bool {
    fn go(k: &[u64], i: usize, sum: u64, t: u64) -> bool {
        if i == k.len() {
            return sum == t;
        }
        let (skip, take) = (go(k, i + 1, sum, t), go(k, i + 1, sum + k[i], t));
        if i.is_multiple_of(2) {
            skip || take
        } else {
            skip && take
        }
    }
    go(k, 0, 0, t)
}

/// A random countdown game with `|S| <= 3`, at most three moves per state,
/// durations up to 5 and `T <= 12`.
pub fn random_countdown(rng: &mut ChaCha8Rng) -> CountdownGame {
    let n = rng.gen_range(1..=3);
    let states: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
    let mut moves = Vec::new();
    for s in &states {
        for _ in 0..rng.gen_range(0..=3) {
            moves.push(Move { from: s.clone(), k: rng.gen_range(1..=5), to: states.choose(rng).unwrap().clone() });
        }
    }
    moves.sort_by(|a, b| (&a.from, a.k, &a.to).cmp(&(&b.from, b.k, &b.to)));
    moves.dedup();
    CountdownGame { states, initial: "s0".into(), final_value: rng.gen_range(1..=12), moves }
}

/// Player 1 wins from `(s, c)` by direct recursion over the game tree.
pub fn countdown_wins(game: &CountdownGame) -> bool {
    fn go(game: &CountdownGame, s: &str, c: u64, memo: &mut BTreeMap<(String, u64), bool>) -> bool {
        if c == game.final_value {
            return true;
        }
        if let Some(&w) = memo.get(&(s.to_string(), c)) {
            return w;
        }
        let durations: BTreeSet<u64> = game.moves.iter().filter(|m| m.from == s).map(|m| m.k).collect();
        let w = durations.into_iter().any(|k| {
            c + k <= game.final_value
                && game.moves.iter().filter(|m| m.from == s && m.k == k).all(|m| go(game, &m.to, c + k, memo))
        });
        memo.insert((s.to_string(), c), w);
        w
    }
    go(game, &game.initial, 0, &mut BTreeMap::new())
}
