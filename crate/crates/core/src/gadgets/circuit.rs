use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{GadgetError, ParseError};

pub type GateId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateKind {
    Zero,
    One,
    Plus,
    Times,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gate {
    pub name: String,
    pub kind: GateKind,
    pub inputs: Vec<GateId>,
    pub level: usize,
}

/// A circuit in normal form: leaves on level 0, `+` gates on odd levels,
/// `*` gates on even levels, and every inner gate reads two gates of the
/// level directly below. Gates are stored in topological order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ArithmeticCircuit {
    gates: Vec<Gate>,
    outputs: Vec<GateId>,
    names: HashMap<String, GateId>,
    interned: HashMap<(GateKind, Vec<GateId>), GateId>,
}

impl ArithmeticCircuit {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn gate(&self, g: GateId) -> &Gate {
        &self.gates[g]
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn level(&self, g: GateId) -> usize {
        self.gates[g].level
    }

    pub fn max_level(&self) -> usize {
        self.gates.iter().map(|g| g.level).max().unwrap_or(0)
    }

    pub fn gate_id(&self, name: &str) -> Option<GateId> {
        self.names.get(name).copied()
    }

    pub fn outputs(&self) -> &[GateId] {
        &self.outputs
    }

    pub fn set_outputs(&mut self, outputs: Vec<GateId>) {
        self.outputs = outputs;
    }

    /// Adds a gate, checking the normal form.
    pub fn add(&mut self, name: &str, kind: GateKind, inputs: &[GateId]) -> Result<GateId, GadgetError> {
        let bad = |msg: String| Err(GadgetError::MalformedCircuit(format!("gate `{name}`: {msg}")));
        if self.names.contains_key(name) {
            return bad("declared twice".into());
        }
        if let Some(&i) = inputs.iter().find(|&&i| i >= self.gates.len()) {
            return bad(format!("unknown input #{i}"));
        }
        let level = match kind {
            GateKind::Zero | GateKind::One => {
                if !inputs.is_empty() {
                    return bad("leaves take no inputs".into());
                }
                0
            }
            GateKind::Plus | GateKind::Times => {
                if inputs.len() != 2 {
                    return bad(format!("expected 2 inputs, found {}", inputs.len()));
                }
                let (l0, l1) = (self.gates[inputs[0]].level, self.gates[inputs[1]].level);
                if l0 != l1 {
                    return bad(format!("inputs on different levels {l0} and {l1}"));
                }
                let level = l0 + 1;
                let odd = level % 2 == 1;
                if odd != (kind == GateKind::Plus) {
                    return bad(format!("{kind:?} gate on level {level}"));
                }
                level
            }
        };
        let id = self.gates.len();
        self.gates.push(Gate { name: name.to_string(), kind, inputs: inputs.to_vec(), level });
        self.names.insert(name.to_string(), id);
        self.interned.entry((kind, inputs.to_vec())).or_insert(id);
        Ok(id)
    }

    /// Like [`add`](Self::add) with a generated name, reusing an identical gate.
    pub fn intern(&mut self, kind: GateKind, inputs: &[GateId]) -> Result<GateId, GadgetError> {
        if let Some(&id) = self.interned.get(&(kind, inputs.to_vec())) {
            return Ok(id);
        }
        let mut n = self.gates.len();
        let mut name = format!("g{n}");
        while self.names.contains_key(&name) {
            n += 1;
            name = format!("g{n}");
        }
        self.add(&name, kind, inputs)
    }

    pub fn zero(&mut self) -> GateId {
        self.intern(GateKind::Zero, &[]).expect("leaf")
    }

    pub fn one(&mut self) -> GateId {
        self.intern(GateKind::One, &[]).expect("leaf")
    }

    pub fn plus(&mut self, a: GateId, b: GateId) -> Result<GateId, GadgetError> {
        self.intern(GateKind::Plus, &[a, b])
    }

    pub fn times(&mut self, a: GateId, b: GateId) -> Result<GateId, GadgetError> {
        self.intern(GateKind::Times, &[a, b])
    }

    /// A gate of value 0 on `level`.
    pub fn zero_at(&mut self, level: usize) -> GateId {
        let mut z = self.zero();
        for l in 1..=level {
            z = if l % 2 == 1 { self.plus(z, z) } else { self.times(z, z) }.expect("tower");
        }
        z
    }

    /// A gate of value 1 on `level`.
    pub fn one_at(&mut self, level: usize) -> GateId {
        let mut o = self.one();
        for l in 1..=level {
            o = if l % 2 == 1 {
                let z = self.zero_at(l - 1);
                self.plus(o, z)
            } else {
                self.times(o, o)
            }
            .expect("tower");
        }
        o
    }

    /// A gate on `level` with the same value as `g`.
    pub fn lift(&mut self, mut g: GateId, level: usize) -> GateId {
        assert!(self.level(g) <= level, "cannot lower a gate");
        while self.level(g) < level {
            let l = self.level(g);
            g = if (l + 1) % 2 == 1 {
                let z = self.zero_at(l);
                self.plus(g, z)
            } else {
                let o = self.one_at(l);
                self.times(g, o)
            }
            .expect("lift");
        }
        g
    }

    /// `g` itself on an odd level, otherwise `g + 0` one level up.
    pub fn lift_to_odd(&mut self, g: GateId) -> GateId {
        let l = self.level(g);
        if l % 2 == 1 {
            g
        } else {
            self.lift(g, l + 1)
        }
    }

    pub fn eval_all(&self) -> Vec<BigUint> {
        let mut v: Vec<BigUint> = Vec::with_capacity(self.gates.len());
        for g in &self.gates {
            let x = match g.kind {
                GateKind::Zero => BigUint::zero(),
                GateKind::One => BigUint::one(),
                GateKind::Plus => &v[g.inputs[0]] + &v[g.inputs[1]],
                GateKind::Times => &v[g.inputs[0]] * &v[g.inputs[1]],
            };
            v.push(x);
        }
        v
    }

    /// `val(g)`, by bottom-up evaluation of the gates `g` depends on.
    pub fn eval(&self, g: GateId) -> BigUint {
        let mut memo: HashMap<GateId, BigUint> = HashMap::new();
        let mut stack = vec![(g, false)];
        while let Some((x, ready)) = stack.pop() {
            if memo.contains_key(&x) {
                continue;
            }
            let gate = &self.gates[x];
            if !ready && !gate.inputs.is_empty() {
                stack.push((x, true));
                stack.extend(gate.inputs.iter().map(|&i| (i, false)));
                continue;
            }
            let val = match gate.kind {
                GateKind::Zero => BigUint::zero(),
                GateKind::One => BigUint::one(),
                GateKind::Plus => &memo[&gate.inputs[0]] + &memo[&gate.inputs[1]],
                GateKind::Times => &memo[&gate.inputs[0]] * &memo[&gate.inputs[1]],
            };
            memo.insert(x, val);
        }
        memo.remove(&g).expect("evaluated")
    }

    /// The gates below the level of `g`, plus `g` itself; returns the new id of `g`.
    pub fn prune_for(&self, g: GateId) -> (ArithmeticCircuit, GateId) {
        let level = self.level(g);
        let mut out = ArithmeticCircuit::new();
        let mut map: HashMap<GateId, GateId> = HashMap::new();
        for (i, gate) in self.gates.iter().enumerate() {
            if gate.level < level || i == g {
                let inputs: Vec<GateId> = gate.inputs.iter().map(|x| map[x]).collect();
                map.insert(i, out.add(&gate.name, gate.kind, &inputs).expect("sub-circuit keeps the normal form"));
            }
        }
        let new_g = map[&g];
        out.outputs = vec![new_g];
        (out, new_g)
    }

    pub fn from_file(file: &CircuitFile) -> Result<Self, GadgetError> {
        let raw = RawCircuit::from_file(file)?;
        let mut c = ArithmeticCircuit::new();
        for g in &raw.gates {
            let kind = match g.kind {
                RawKind::Zero => GateKind::Zero,
                RawKind::One => GateKind::One,
                RawKind::Plus => GateKind::Plus,
                RawKind::Times => GateKind::Times,
                RawKind::Minus => {
                    return Err(GadgetError::MalformedCircuit(format!(
                        "gate `{}`: subtraction needs normalization first",
                        g.name
                    )))
                }
            };
            c.add(&g.name, kind, &g.inputs)?;
        }
        c.outputs = raw.outputs;
        Ok(c)
    }

    pub fn from_json(text: &str) -> Result<Self, GadgetError> {
        Self::from_file(&CircuitFile::from_json(text)?)
    }

    pub fn to_file(&self) -> CircuitFile {
        CircuitFile {
            gates: self
                .gates
                .iter()
                .map(|g| GateEntry {
                    id: GateRef::Name(g.name.clone()),
                    kind: match g.kind {
                        GateKind::Zero => RawKind::Zero,
                        GateKind::One => RawKind::One,
                        GateKind::Plus => RawKind::Plus,
                        GateKind::Times => RawKind::Times,
                    },
                    inputs: g.inputs.iter().map(|&i| GateRef::Name(self.gates[i].name.clone())).collect(),
                })
                .collect(),
            outputs: self.outputs.iter().map(|&i| GateRef::Name(self.gates[i].name.clone())).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        self.to_file().to_json()
    }
}

/// Gate kinds accepted before normalization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RawKind {
    Zero,
    One,
    Plus,
    Minus,
    Times,
}

/// Gate ids in files may be numbers or strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GateRef {
    Number(u64),
    Name(String),
}

impl GateRef {
    fn key(&self) -> String {
        match self {
            GateRef::Number(n) => n.to_string(),
            GateRef::Name(s) => s.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateEntry {
    pub id: GateRef,
    pub kind: RawKind,
    #[serde(default)]
    pub inputs: Vec<GateRef>,
}

/// On-disk circuit: `{"gates": [{"id", "kind", "inputs"}], "outputs": [...]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitFile {
    pub gates: Vec<GateEntry>,
    #[serde(default)]
    pub outputs: Vec<GateRef>,
}

impl CircuitFile {
    pub fn from_json(text: &str) -> Result<Self, ParseError> {
        serde_json::from_str(text).map_err(|e| ParseError::Json(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("circuit serializes");
        s.push('\n');
        s
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawGate {
    pub name: String,
    pub kind: RawKind,
    pub inputs: Vec<GateId>,
}

/// A DAG over `0`, `1`, `+`, `-`, `*` without level constraints, in
/// topological order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RawCircuit {
    pub gates: Vec<RawGate>,
    pub outputs: Vec<GateId>,
}

impl RawCircuit {
    pub fn from_file(file: &CircuitFile) -> Result<Self, GadgetError> {
        let malformed = |msg: String| GadgetError::MalformedCircuit(msg);
        let mut index: HashMap<String, usize> = HashMap::new();
        for (i, g) in file.gates.iter().enumerate() {
            if index.insert(g.id.key(), i).is_some() {
                return Err(malformed(format!("gate `{}` declared twice", g.id.key())));
            }
        }
        let lookup = |r: &GateRef| index.get(&r.key()).copied().ok_or_else(|| malformed(format!("unknown gate `{}`", r.key())));
        let mut inputs: Vec<Vec<usize>> = Vec::with_capacity(file.gates.len());
        for g in &file.gates {
            let ins = g.inputs.iter().map(lookup).collect::<Result<Vec<_>, _>>()?;
            let want = match g.kind {
                RawKind::Zero | RawKind::One => 0,
                _ => 2,
            };
            if ins.len() != want {
                return Err(malformed(format!("gate `{}` expects {want} inputs, found {}", g.id.key(), ins.len())));
            }
            inputs.push(ins);
        }
        // Kahn's algorithm, preferring file order.
        let n = file.gates.len();
        let mut pending: Vec<usize> = inputs.iter().map(|ins| ins.len()).collect();
        let mut users: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, ins) in inputs.iter().enumerate() {
            for &j in ins {
                users[j].push(i);
            }
        }
        let mut ready: std::collections::BTreeSet<usize> = (0..n).filter(|&i| pending[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(i) = ready.pop_first() {
            order.push(i);
            for &u in &users[i] {
                pending[u] -= 1;
                if pending[u] == 0 {
                    ready.insert(u);
                }
            }
        }
        if order.len() != n {
            return Err(malformed("gates form a cycle".into()));
        }
        let mut pos = vec![0; n];
        for (k, &i) in order.iter().enumerate() {
            pos[i] = k;
        }
        let gates = order
            .iter()
            .map(|&i| RawGate {
                name: file.gates[i].id.key(),
                kind: file.gates[i].kind,
                inputs: inputs[i].iter().map(|&j| pos[j]).collect(),
            })
            .collect();
        let outputs = file.outputs.iter().map(|r| lookup(r).map(|i| pos[i])).collect::<Result<Vec<_>, _>>()?;
        Ok(RawCircuit { gates, outputs })
    }

    pub fn from_json(text: &str) -> Result<Self, GadgetError> {
        Self::from_file(&CircuitFile::from_json(text)?)
    }

    pub fn eval_all(&self) -> Vec<BigInt> {
        let mut v: Vec<BigInt> = Vec::with_capacity(self.gates.len());
        for g in &self.gates {
            let x = match g.kind {
                RawKind::Zero => BigInt::zero(),
                RawKind::One => BigInt::one(),
                RawKind::Plus => &v[g.inputs[0]] + &v[g.inputs[1]],
                RawKind::Minus => &v[g.inputs[0]] - &v[g.inputs[1]],
                RawKind::Times => &v[g.inputs[0]] * &v[g.inputs[1]],
            };
            v.push(x);
        }
        v
    }
}

/// Gates holding the positive and negative part of a raw gate's value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DualRail {
    pub pos: GateId,
    pub neg: GateId,
}

/// Rewrites a raw circuit into normal form. Every raw gate `x` maps to a
/// pair with `val(x) = val(pos) - val(neg)`; without subtraction `neg` is
/// always zero. Outputs of the result are the positive rails of the raw
/// outputs.
pub fn normalize_circuit(raw: &RawCircuit) -> (ArithmeticCircuit, Vec<DualRail>) {
    let mut c = ArithmeticCircuit::new();
    let mut rails: Vec<DualRail> = Vec::with_capacity(raw.gates.len());

    // Inputs that already satisfy the normal form are copied verbatim.
    let mut verbatim = true;
    for g in &raw.gates {
        let kind = match g.kind {
            RawKind::Zero => GateKind::Zero,
            RawKind::One => GateKind::One,
            RawKind::Plus => GateKind::Plus,
            RawKind::Times => GateKind::Times,
            RawKind::Minus => {
                verbatim = false;
                break;
            }
        };
        if c.add(&g.name, kind, &g.inputs).is_err() {
            verbatim = false;
            break;
        }
    }
    if verbatim {
        let z = c.zero();
        let rails = (0..raw.gates.len()).map(|i| DualRail { pos: i, neg: z }).collect();
        c.outputs = raw.outputs.clone();
        return (c, rails);
    }

    c = ArithmeticCircuit::new();
    let add = |c: &mut ArithmeticCircuit, x: GateId, y: GateId| {
        let l = c.level(x).max(c.level(y));
        let l = l + l % 2;
        let (x, y) = (c.lift(x, l), c.lift(y, l));
        c.plus(x, y).expect("aligned")
    };
    let mul = |c: &mut ArithmeticCircuit, x: GateId, y: GateId| {
        let l = c.level(x).max(c.level(y));
        let l = if l % 2 == 1 { l } else { l + 1 };
        let (x, y) = (c.lift(x, l), c.lift(y, l));
        c.times(x, y).expect("aligned")
    };
    for g in &raw.gates {
        let z = c.zero();
        let rail = match g.kind {
            RawKind::Zero => DualRail { pos: z, neg: z },
            RawKind::One => DualRail { pos: c.one(), neg: z },
            RawKind::Plus | RawKind::Minus | RawKind::Times => {
                let (a, b) = (rails[g.inputs[0]], rails[g.inputs[1]]);
                match g.kind {
                    RawKind::Plus => DualRail { pos: add(&mut c, a.pos, b.pos), neg: add(&mut c, a.neg, b.neg) },
                    RawKind::Minus => DualRail { pos: add(&mut c, a.pos, b.neg), neg: add(&mut c, a.neg, b.pos) },
                    _ => {
                        let pp = mul(&mut c, a.pos, b.pos);
                        let nn = mul(&mut c, a.neg, b.neg);
                        let pn = mul(&mut c, a.pos, b.neg);
                        let np = mul(&mut c, a.neg, b.pos);
                        DualRail { pos: add(&mut c, pp, nn), neg: add(&mut c, pn, np) }
                    }
                }
            }
        };
        rails.push(rail);
    }
    c.outputs = raw.outputs.iter().map(|&o| rails[o].pos).collect();
    (c, rails)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> (ArithmeticCircuit, [GateId; 5]) {
        let mut c = ArithmeticCircuit::new();
        let z = c.add("zero", GateKind::Zero, &[]).unwrap();
        let o = c.add("one", GateKind::One, &[]).unwrap();
        let two = c.add("two", GateKind::Plus, &[o, o]).unwrap();
        let uno = c.add("uno", GateKind::Plus, &[o, z]).unwrap();
        let v = c.add("v", GateKind::Times, &[two, uno]).unwrap();
        (c, [z, o, two, uno, v])
    }

    #[test]
    fn evaluation() {
        let (c, [z, o, two, uno, v]) = small();
        assert_eq!(c.eval(z), BigUint::zero());
        assert_eq!(c.eval(o), BigUint::one());
        assert_eq!(c.eval(two), BigUint::from(2u32));
        assert_eq!(c.eval(uno), BigUint::one());
        assert_eq!(c.eval(v), BigUint::from(2u32));
        assert_eq!(c.eval_all()[v], BigUint::from(2u32));
    }

    #[test]
    fn normal_form_is_enforced() {
        let (mut c, [z, o, two, _, _]) = small();
        assert!(c.add("bad", GateKind::Times, &[o, z]).is_err());
        assert!(c.add("skew", GateKind::Plus, &[two, o]).is_err());
        assert!(c.add("leaf", GateKind::One, &[o]).is_err());
        assert!(c.add("two", GateKind::One, &[]).is_err());
    }

    #[test]
    fn lifting_preserves_values() {
        let (mut c, [z, o, two, _, v]) = small();
        for (g, want) in [(z, 0u32), (o, 1), (two, 2), (v, 2)] {
            let lifted = c.lift(g, 5);
            assert_eq!(c.level(lifted), 5);
            assert_eq!(c.eval(lifted), BigUint::from(want));
            let odd = c.lift_to_odd(g);
            assert_eq!(c.level(odd) % 2, 1);
            assert_eq!(c.eval(odd), BigUint::from(want));
        }
    }

    #[test]
    fn pruning_keeps_lower_levels() {
        let (c, [_, o, two, _, v]) = small();
        let (p, g) = c.prune_for(two);
        assert_eq!(p.len(), 3);
        assert_eq!(p.eval(g), BigUint::from(2u32));
        let (p, g) = c.prune_for(v);
        assert_eq!(p.len(), 5);
        assert_eq!(p.eval(g), BigUint::from(2u32));
        let (p, g) = c.prune_for(o);
        assert_eq!(p.len(), 1);
        assert_eq!(p.eval(g), BigUint::one());
    }

    #[test]
    fn file_round_trip() {
        let (mut c, [.., v]) = small();
        c.set_outputs(vec![v]);
        let text = c.to_json();
        let back = ArithmeticCircuit::from_json(&text).unwrap();
        assert_eq!(back.to_json(), text);
        let numeric = r#"{"gates":[{"id":2,"kind":"plus","inputs":[1,1]},{"id":1,"kind":"one"}],"outputs":[2]}"#;
        let c = ArithmeticCircuit::from_json(numeric).unwrap();
        assert_eq!(c.eval(c.outputs()[0]), BigUint::from(2u32));
        let cyclic = r#"{"gates":[{"id":"a","kind":"plus","inputs":["b","b"]},{"id":"b","kind":"plus","inputs":["a","a"]}]}"#;
        assert!(matches!(ArithmeticCircuit::from_json(cyclic), Err(GadgetError::MalformedCircuit(_))));
    }

    #[test]
    fn normalizing_a_normal_circuit_copies_it() {
        let (c, [.., v]) = small();
        let raw = RawCircuit::from_json(&c.to_json()).unwrap();
        let (n, rails) = normalize_circuit(&raw);
        assert_eq!(n.len(), c.len());
        assert_eq!(n.eval(rails[v].pos), BigUint::from(2u32));
    }

    #[test]
    fn normalizing_deep_products() {
        // (1+1)*(1+1) with both factors at different depths.
        let text = r#"{"gates":[
            {"id":"o","kind":"one"},
            {"id":"a","kind":"plus","inputs":["o","o"]},
            {"id":"b","kind":"plus","inputs":["a","o"]},
            {"id":"c","kind":"minus","inputs":["b","o"]},
            {"id":"p","kind":"times","inputs":["a","c"]}
        ],"outputs":["p"]}"#;
        let raw = RawCircuit::from_json(text).unwrap();
        let want = raw.eval_all();
        let (n, rails) = normalize_circuit(&raw);
        let vals = n.eval_all();
        for (i, r) in rails.iter().enumerate() {
            let diff = BigInt::from(vals[r.pos].clone()) - BigInt::from(vals[r.neg].clone());
            assert_eq!(diff, want[i], "gate {i}");
        }
        assert_eq!(want[4], BigInt::from(4));
    }

    #[test]
    fn one_minus_one_is_a_balanced_pair() {
        let text = r#"{"gates":[{"id":"o","kind":"one"},{"id":"d","kind":"minus","inputs":["o","o"]}]}"#;
        let (n, rails) = normalize_circuit(&RawCircuit::from_json(text).unwrap());
        let d = rails[1];
        assert_eq!((n.eval(d.pos), n.eval(d.neg)), (BigUint::one(), BigUint::one()));
    }
}
