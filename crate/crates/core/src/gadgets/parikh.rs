use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use super::circuit::{ArithmeticCircuit, GateId, GateKind};
use crate::error::GadgetError;
use crate::rational::Cost;

/// Partial paths [`count_parikh_paths`] may explore before giving up.
pub const PATH_GUARD: u64 = 1_000_000;

/// States [`circuit_to_dfa`] may create before giving up.
pub const STATE_GUARD: usize = 2_000_000;

/// One copy of a gate's gadget inside the automaton.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Port {
    pub gate: GateId,
    pub input: usize,
    pub output: usize,
}

/// A DFA built from a circuit, together with the Parikh function `f` such
/// that the paths from `input` to `output` with Parikh image `f` are
/// exactly `val(gate)` many.
#[derive(Clone, Debug)]
pub struct ParikhDfa {
    pub states: Vec<String>,
    pub alphabet: Vec<String>,
    /// `(state, letter) -> state`
    pub delta: BTreeMap<(usize, usize), usize>,
    pub input: usize,
    pub output: usize,
    /// `f(letter)`, indexed like `alphabet`.
    pub parikh: Vec<Cost>,
    /// The sub-circuit the automaton was built from: the gates below the
    /// designated gate's level, and the gate itself.
    pub circuit: ArithmeticCircuit,
    pub gate: GateId,
    /// Every gadget copy; the first one belongs to the designated gate.
    pub ports: Vec<Port>,
}

impl ParikhDfa {
    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    /// Outgoing `(letter, successor)` pairs per state, by letter.
    pub fn successors(&self) -> Vec<Vec<(usize, usize)>> {
        let mut out = vec![Vec::new(); self.states.len()];
        for (&(q, a), &r) in &self.delta {
            out[q].push((a, r));
        }
        out
    }
}

struct DfaBuilder<'a> {
    circuit: &'a ArithmeticCircuit,
    letters: &'a [Option<[usize; 3]>],
    states: Vec<String>,
    delta: BTreeMap<(usize, usize), usize>,
    ports: Vec<Port>,
    copies: Vec<usize>,
}

impl DfaBuilder<'_> {
    fn state(&mut self, name: String) -> Result<usize, GadgetError> {
        if self.states.len() >= STATE_GUARD {
            return Err(GadgetError::SizeGuard(format!("more than {STATE_GUARD} automaton states")));
        }
        self.states.push(name);
        Ok(self.states.len() - 1)
    }

    fn edge(&mut self, from: usize, letter: usize, to: usize) {
        let prev = self.delta.insert((from, letter), to);
        debug_assert!(prev.is_none(), "construction is deterministic");
    }

    /// Adds a fresh copy of the gadget for `v` and returns its port.
    fn gadget(&mut self, v: GateId) -> Result<Port, GadgetError> {
        let gate = self.circuit.gate(v);
        let copy = self.copies[v];
        self.copies[v] += 1;
        let tag = if copy == 0 { gate.name.clone() } else { format!("{}#{copy}", gate.name) };
        let input = self.state(format!("in({tag})"))?;
        let output = self.state(format!("out({tag})"))?;
        let port = Port { gate: v, input, output };
        self.ports.push(port);
        match gate.kind {
            GateKind::One => self.edge(input, 0, output),
            GateKind::Zero => {}
            GateKind::Plus | GateKind::Times => {
                let [av, bv, cv] = self.letters[v].expect("inner gate");
                // Letters of the siblings on this level, in alphabet order.
                let mut others: Vec<usize> = self
                    .circuit
                    .gates()
                    .iter()
                    .enumerate()
                    .filter(|&(w, other)| w != v && other.level == gate.level)
                    .flat_map(|(w, _)| self.letters[w].expect("inner gate"))
                    .collect();
                others.sort_unstable();
                let mut q = input;
                for (k, &l) in others.iter().enumerate() {
                    let next = if k + 1 == others.len() {
                        self.state(format!("q({tag})"))?
                    } else {
                        self.state(format!("s{}({tag})", k + 1))?
                    };
                    self.edge(q, l, next);
                    q = next;
                }
                let (u, w) = (gate.inputs[0], gate.inputs[1]);
                let pu = self.gadget(u)?;
                let pw = self.gadget(w)?;
                if gate.kind == GateKind::Plus {
                    let q1 = self.state(format!("q1({tag})"))?;
                    let q2 = self.state(format!("q2({tag})"))?;
                    self.edge(q, av, q1);
                    self.edge(q1, bv, pu.input);
                    self.edge(q, bv, q2);
                    self.edge(q2, av, pw.input);
                    self.edge(pu.output, cv, output);
                    self.edge(pw.output, cv, output);
                } else {
                    self.edge(q, av, pu.input);
                    self.edge(pu.output, bv, pw.input);
                    self.edge(pw.output, cv, output);
                }
            }
        }
        Ok(port)
    }
}

/// Builds the automaton for gate `g`. A `+` gate branches into its two
/// inputs; a `*` gate runs them one after the other. Every gate first
/// reads one copy of each letter owned by the other gates on its level, so
/// that all gadgets of a level consume the same letters.
///
/// Each use of a gate gets its own copy of the gate's gadget, so the
/// automaton is a tree of gadgets. Copies share letters. With shared
/// gadgets a run could leave a gadget through another parent, and from
/// level 4 on, where letters are owed more than once, such runs can hit
/// `f` exactly and inflate the count.
pub fn circuit_to_dfa(circuit: &ArithmeticCircuit, g: GateId) -> Result<ParikhDfa, GadgetError> {
    if g >= circuit.len() {
        return Err(GadgetError::MalformedCircuit(format!("no gate #{g}")));
    }
    let (c, v) = circuit.prune_for(g);
    let top = c.level(v);

    // Letter 0 is shared by the one-leaves; every inner gate owns a, b, c.
    let mut alphabet = vec!["a".to_string()];
    let mut letters: Vec<Option<[usize; 3]>> = vec![None; c.len()];
    for (i, gate) in c.gates().iter().enumerate() {
        if gate.level > 0 {
            let base = alphabet.len();
            for p in ["a", "b", "c"] {
                alphabet.push(format!("{p}_{}", gate.name));
            }
            letters[i] = Some([base, base + 1, base + 2]);
        }
    }

    // Parikh function: new letters once, doubled on every product level.
    let mut parikh = vec![Cost::zero(); alphabet.len()];
    parikh[0] = Cost::from(1u32);
    for level in 1..=top {
        if level % 2 == 0 {
            for x in parikh.iter_mut() {
                *x *= 2u32;
            }
        }
        for (i, gate) in c.gates().iter().enumerate() {
            if gate.level == level {
                for l in letters[i].expect("inner gate") {
                    parikh[l] = Cost::from(1u32);
                }
            }
        }
    }

    let mut b = DfaBuilder {
        circuit: &c,
        letters: &letters,
        states: Vec::new(),
        delta: BTreeMap::new(),
        ports: Vec::new(),
        copies: vec![0; c.len()],
    };
    let root = b.gadget(v)?;
    let DfaBuilder { states, delta, ports, .. } = b;
    Ok(ParikhDfa {
        states,
        alphabet,
        delta,
        input: root.input,
        output: root.output,
        parikh,
        circuit: c,
        gate: v,
        ports,
    })
}

/// Number of paths from `from` to `to` whose Parikh image is exactly `f`.
///
/// Depth-first search over partial paths, pruned by the letters still
/// owed; fails once more than [`PATH_GUARD`] partial paths were explored.
pub fn count_parikh_paths(dfa: &ParikhDfa, from: usize, to: usize, f: &[Cost]) -> Result<BigUint, GadgetError> {
    let guard = || GadgetError::SizeGuard(format!("more than {PATH_GUARD} partial paths"));
    let mut remaining: Vec<u64> = f.iter().map(|x| x.to_u64()).collect::<Option<_>>().ok_or_else(guard)?;
    let total: u64 = remaining.iter().sum();
    let succ = dfa.successors();

    let mut count = BigUint::zero();
    let mut explored: u64 = 1;
    let mut left = total;
    // Each frame: state and index of the next outgoing edge to try.
    let mut stack: Vec<(usize, usize)> = vec![(from, 0)];
    let mut taken: Vec<usize> = Vec::new();
    if left == 0 && from == to {
        return Ok(BigUint::from(1u32));
    }
    while let Some(frame) = stack.last_mut() {
        let (q, next) = *frame;
        if next >= succ[q].len() {
            stack.pop();
            if let Some(l) = taken.pop() {
                remaining[l] += 1;
                left += 1;
            }
            continue;
        }
        frame.1 += 1;
        let (l, r) = succ[q][next];
        if remaining[l] == 0 {
            continue;
        }
        explored += 1;
        if explored > PATH_GUARD {
            return Err(guard());
        }
        remaining[l] -= 1;
        left -= 1;
        if left == 0 {
            if r == to {
                count += 1u32;
            }
            remaining[l] += 1;
            left += 1;
            continue;
        }
        taken.push(l);
        stack.push((r, 0));
    }
    Ok(count)
}
