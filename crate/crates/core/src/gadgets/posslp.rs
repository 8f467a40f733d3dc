use num_bigint::BigInt;
use num_traits::{One, Pow, Zero};

use super::circuit::{ArithmeticCircuit, GateId};
use super::typed::{chain_with_degree, degree_for, GadgetCertificate};
use crate::chain_solver::solve_chain;
use crate::error::GadgetError;
use crate::formula::CostFormula;
use crate::model::{CostProcess, ProcessBuilder};
use crate::rational::{ceil_nonneg, Cost, Rational};

/// A cost chain and formula with `val(g1) >= val(g2)` iff `P(K ⊨ φ) >= 1/2`.
#[derive(Clone, Debug)]
pub struct PosSlpInstance {
    pub chain: CostProcess,
    pub formula: CostFormula,
    pub first: GadgetCertificate,
    pub second: GadgetCertificate,
    /// `H`: beyond it either component chain has probability below `1/m`.
    pub horizon: Cost,
    /// Upper bound on `ln(m + 1)` used for `H`.
    pub ln_bound: Rational,
}

/// Combines the chains of `g1` and `g2` behind a fair coin.
///
/// Heads runs the chain of `g1` at cost 0, tails runs the chain of `g2`
/// after paying `H + 1`. With
///
/// ```text
/// φ = (x = T1) ∨ (H+1 <= x <= H+T2) ∨ (x >= H+T2+2)
/// ```
///
/// `P(K ⊨ φ) = ½(P1 + ε) + ½(1 - P2)` where `Pi = val(gi)/m` and
/// `0 <= ε < 1/m` is the mass of the first chain beyond `H`. The error only
/// ever raises the probability, so it cannot break ties against `g1`.
pub fn posslp_instance(circuit: &ArithmeticCircuit, g1: GateId, g2: GateId) -> Result<PosSlpInstance, GadgetError> {
    for g in [g1, g2] {
        if g >= circuit.len() {
            return Err(GadgetError::MalformedCircuit(format!("no gate #{g}")));
        }
    }
    let (l1, l2) = (circuit.level(g1), circuit.level(g2));
    if l1 != l2 {
        return Err(GadgetError::Precondition(format!(
            "gates on different levels {l1} and {l2}; lift the lower one first"
        )));
    }
    // Both chains use the same padding degree, hence the same m.
    let d = degree_for(circuit, g1)?.max(degree_for(circuit, g2)?);
    let first = chain_with_degree(circuit, g1, Some(d))?;
    let second = chain_with_degree(circuit, g2, Some(d))?;
    debug_assert_eq!(first.scale, second.scale);

    let states = first.chain.num_states() + second.chain.num_states() - 1;
    let k_max = first.chain.k_max().max(second.chain.k_max());
    let p_min = first.chain.p_min().min(second.chain.p_min());
    let ln_bound = first.scale.ln_upper_bound(64);
    let p_pow: Rational = Pow::pow(&p_min, states as u32);
    let apriori = k_max * ceil_nonneg(&(Rational::from_integer(BigInt::from(states)) * (&ln_bound / p_pow + Rational::one())));
    let horizon = apriori.max(first.target.clone()).max(second.target.clone());

    let mut b = ProcessBuilder::new();
    b.initial("q0").target("t");
    let name = |prefix: &str, cert: &GadgetCertificate, q: usize| {
        if q == cert.chain.target() {
            "t".to_string()
        } else {
            format!("{prefix}:{}", cert.chain.state_name(q))
        }
    };
    let shift = &horizon + 1u32;
    let half = Rational::new(1.into(), 2.into());
    b.chain_edge("q0", &name("1", &first, first.chain.initial()), Cost::zero(), half.clone());
    b.chain_edge("q0", &name("2", &second, second.chain.initial()), shift.clone(), half);
    for (prefix, cert) in [("1", &first), ("2", &second)] {
        let c = &cert.chain;
        for q in (0..c.num_states()).filter(|&q| q != c.target()) {
            for o in c.choices(q).iter().flat_map(|ch| &ch.outcomes) {
                b.chain_edge(&name(prefix, cert, q), &name(prefix, cert, o.to), o.cost.clone(), o.prob.clone());
            }
        }
    }
    b.chain_edge("t", "t", Cost::zero(), Rational::one());
    let chain = b.build()?;

    let formula = CostFormula::eq(first.target.clone())
        .or(CostFormula::between(shift.clone(), &horizon + &second.target))
        .or(CostFormula::ge(&shift + &second.target + 1u32));
    Ok(PosSlpInstance { chain, formula, first, second, horizon, ln_bound })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PosSlpVerdict {
    /// `val(g1) >= val(g2)`, or `None` if the component probabilities are
    /// too close to separate from the tail error.
    pub holds: Option<bool>,
    pub p1: Rational,
    pub p2: Rational,
    /// `P(K ⊨ φ)` of the combined chain, when the tail error is known to
    /// vanish.
    pub probability: Option<Rational>,
}

/// Decides an instance without expanding the combined chain up to `H`.
///
/// Solves `P1 = P(K1 = T1)` and `P2 = P(K2 = T2)` exactly. `P1 >= P2` gives
/// `P(K ⊨ φ) >= 1/2` outright; `P2 - P1 >= 1/m` exceeds the tail error.
/// An acyclic first chain never pays more than `|Q|·k_max <= H`, so then
/// `ε = 0` and `P(K ⊨ φ) = ½P1 + ½(1 - P2)` exactly.
pub fn posslp_decide(instance: &PosSlpInstance) -> Result<PosSlpVerdict, GadgetError> {
    let hit = |cert: &GadgetCertificate| -> Result<Rational, GadgetError> {
        let chain = cert.chain.clone().validated().map_err(|r| GadgetError::Precondition(r.summary()))?;
        Ok(solve_chain(&chain, &CostFormula::eq(cert.target.clone()))?)
    };
    let p1 = hit(&instance.first)?;
    let p2 = hit(&instance.second)?;
    let first = &instance.first.chain;
    let tail_free = first.is_acyclic() && Cost::from(first.num_states()) * first.k_max() <= instance.horizon;
    let probability = tail_free.then(|| (&p1 + Rational::one() - &p2) / Rational::from_integer(2.into()));
    let holds = if p1 >= p2 {
        Some(true)
    } else if tail_free {
        Some(false)
    } else {
        let m = Rational::from_integer(instance.first.scale.value().into());
        (&p2 - &p1 >= m.recip()).then_some(false)
    };
    Ok(PosSlpVerdict { holds, p1, p2, probability })
}
