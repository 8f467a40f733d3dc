use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{GadgetError, ParseError};
use crate::model::{CostProcess, ProcessBuilder};
use crate::rational::{parse_cost, Cost, Rational};

/// Is `∃x1 ∀x2 … ∃x(n-1) ∀xn : Σ xi·ki = T` true?
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QSubsetSum {
    #[serde(serialize_with = "ser_costs", deserialize_with = "de_costs")]
    pub k: Vec<Cost>,
    #[serde(rename = "T", serialize_with = "ser_cost", deserialize_with = "de_cost")]
    pub t: Cost,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Number {
    Int(u64),
    Text(String),
}

fn number(n: Number) -> Result<Cost, ParseError> {
    match n {
        Number::Int(v) => Ok(Cost::from(v)),
        Number::Text(s) => parse_cost(&s),
    }
}

fn de_cost<'de, D: Deserializer<'de>>(d: D) -> Result<Cost, D::Error> {
    number(Number::deserialize(d)?).map_err(serde::de::Error::custom)
}

fn de_costs<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Cost>, D::Error> {
    Vec::<Number>::deserialize(d)?.into_iter().map(|n| number(n).map_err(serde::de::Error::custom)).collect()
}

fn json_number(c: &Cost) -> serde_json::Value {
    match u64::try_from(c) {
        Ok(v) => serde_json::Value::from(v),
        Err(_) => serde_json::Value::from(c.to_string()),
    }
}

fn ser_cost<S: Serializer>(c: &Cost, s: S) -> Result<S::Ok, S::Error> {
    json_number(c).serialize(s)
}

fn ser_costs<S: Serializer>(cs: &[Cost], s: S) -> Result<S::Ok, S::Error> {
    cs.iter().map(json_number).collect::<Vec<_>>().serialize(s)
}

impl QSubsetSum {
    pub fn new(k: Vec<Cost>, t: Cost) -> Self {
        QSubsetSum { k, t }
    }

    pub fn from_json(text: &str) -> Result<Self, ParseError> {
        serde_json::from_str(text).map_err(|e| ParseError::Json(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("instance serializes");
        s.push('\n');
        s
    }

    fn k_max(&self) -> Cost {
        self.k.iter().max().cloned().unwrap_or_default()
    }
}

/// An acyclic process with an atomic budget question equivalent to a
/// QSubsetSum instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QSubsetSumGadget {
    pub process: CostProcess,
    /// `B = (n/2)·ℓ + T`
    pub budget: Cost,
    /// `τ`
    pub tau: Rational,
    /// `M = 2^(n/2)·n²·ℓ²`
    pub big_m: Cost,
    /// `ℓ = 1 + n·k_max`
    pub ell: Cost,
}

struct Params {
    n: usize,
    ell: Cost,
    budget: Cost,
    big_m: Cost,
    /// `1 / 2^(n/2+1)`
    slack: Rational,
}

fn params(inst: &QSubsetSum) -> Result<Params, GadgetError> {
    let n = inst.k.len();
    if n < 2 || n % 2 == 1 {
        return Err(GadgetError::Precondition(format!("need an even number n >= 2 of values, got {n}")));
    }
    let ell = Cost::one() + inst.k_max() * n;
    let budget = &ell * (n / 2) + &inst.t;
    let big_m = (Cost::one() << (n / 2)) * n * n * &ell * &ell;
    let slack = Rational::new(1.into(), (BigUint::one() << (n / 2 + 1)).into());
    Ok(Params { n, ell, budget, big_m, slack })
}

fn frac(c: &Cost, big_m: &Cost) -> Rational {
    Rational::new(c.clone().into(), big_m.clone().into())
}

/// Player Odd picks `a0`/`a1` in `q_i` (not taking / taking `k_{i+1}`);
/// a fair coin decides `k_{i+2}`. Each step pays `ℓ` on top. Incurring cost
/// `c` jumps to the target with probability `c/M`, a win if still within
/// budget, and `q_n` overshoots the budget. Player Odd wins the game iff
/// some scheduler has `P(K <= B) >= τ` with `τ = (B - 2^-(n/2+1))/M`.
/// Fails when `τ > 1`, which needs `T > n·k_max`; Odd loses those games.
pub fn qsubsetsum_to_process(inst: &QSubsetSum) -> Result<QSubsetSumGadget, GadgetError> {
    let Params { n, ell, budget, big_m, slack } = params(inst)?;
    let half = Rational::new(1.into(), 2.into());
    let mut b = ProcessBuilder::new();
    b.initial("q0").target("t");
    for i in (0..n).step_by(2) {
        let (from, to) = (format!("q{i}"), format!("q{}", i + 2));
        for j in 0..2u32 {
            let action = format!("a{j}");
            let c1 = &ell + &inst.k[i] * j;
            let c2 = &c1 + &inst.k[i + 1];
            for c in [c1, c2] {
                let win = frac(&c, &big_m);
                b.transition(&from, &action, &to, c.clone(), &half * (Rational::one() - &win));
                b.transition(&from, &action, "t", c, &half * win);
            }
        }
    }
    b.transition(&format!("q{n}"), "a", "t", &budget + 1u32, Rational::one());
    b.transition("t", "a", "t", Cost::zero(), Rational::one());
    let tau = (Rational::from_integer(budget.clone().into()) - slack) / Rational::from_integer(big_m.clone().into());
    if tau > Rational::one() {
        return Err(GadgetError::Precondition(format!(
            "T = {} exceeds n·k_max = {} by so much that τ > 1",
            inst.t,
            inst.k_max() * n
        )));
    }
    Ok(QSubsetSumGadget { process: b.build()?, budget, tau, big_m, ell })
}

/// The universal variant: incurring cost `c` now jumps to the target at
/// cost 0 with probability `c/M`, which loses. Player Odd wins iff some
/// scheduler has `P(K < B) < τ` with `τ = (B + 2^-(n/2+1))/M`, that is iff
/// not every scheduler has `P(K <= B - 1) >= τ`. Requires `T <= n·k_max`;
/// larger targets are trivially unreachable.
pub fn universal_qsubsetsum_to_process(inst: &QSubsetSum) -> Result<QSubsetSumGadget, GadgetError> {
    let Params { n, ell, budget, big_m, slack } = params(inst)?;
    if inst.t > inst.k_max() * n {
        return Err(GadgetError::Precondition(format!("T = {} exceeds n·k_max = {}", inst.t, inst.k_max() * n)));
    }
    let half = Rational::new(1.into(), 2.into());
    let mut b = ProcessBuilder::new();
    b.initial("q0").target("t");
    for i in (0..n).step_by(2) {
        let (from, to) = (format!("q{i}"), format!("q{}", i + 2));
        for j in 0..2u32 {
            let action = format!("a{j}");
            let c1 = &ell + &inst.k[i] * j;
            let c2 = &c1 + &inst.k[i + 1];
            let mut lose = Rational::zero();
            for c in [c1, c2] {
                let p = frac(&c, &big_m);
                b.transition(&from, &action, &to, c, &half * (Rational::one() - &p));
                lose += &half * p;
            }
            b.transition(&from, &action, "t", Cost::zero(), lose);
        }
    }
    b.transition(&format!("q{n}"), "a", "t", Cost::zero(), Rational::one());
    b.transition("t", "a", "t", Cost::zero(), Rational::one());
    let tau = (Rational::from_integer(budget.clone().into()) + slack) / Rational::from_integer(big_m.clone().into());
    Ok(QSubsetSumGadget { process: b.build()?, budget, tau, big_m, ell })
}

/// Largest `n` [`qsubsetsum_brute`] accepts.
pub const BRUTE_MAX_N: usize = 20;

/// Evaluates the alternating formula by exhaustive game-tree search.
pub fn qsubsetsum_brute(inst: &QSubsetSum) -> Result<bool, GadgetError> {
    let n = inst.k.len();
    if n > BRUTE_MAX_N {
        return Err(GadgetError::SizeGuard(format!("n = {n} exceeds {BRUTE_MAX_N}")));
    }
    if n % 2 == 1 {
        return Err(GadgetError::Precondition(format!("need an even number of values, got {n}")));
    }
    fn go(k: &[Cost], t: &Cost, i: usize, sum: &Cost) -> bool {
        if i == k.len() {
            return sum == t;
        }
        let skip = || go(k, t, i + 1, sum);
        let take = || go(k, t, i + 1, &(sum + &k[i]));
        if i.is_multiple_of(2) {
            skip() || take()
        } else {
            skip() && take()
        }
    }
    Ok(go(&inst.k, &inst.t, 0, &Cost::zero()))
}
