use num_traits::{One, Zero};

use crate::error::GadgetError;
use crate::formula::CostFormula;
use crate::model::{CostProcess, ProcessBuilder, CHAIN_ACTION};
use crate::rational::{format_rational, is_probability, rat, Cost, Rational};

/// Rewrites `process` so that a scheduler reaches `P(K ⊨ φ) >= τ` in the
/// original exactly when one reaches `P(K ⊨ φ) >= 1/2` in the result.
///
/// A fresh initial state either jumps to the target with cost `n1` (a
/// satisfying value) or `n0` (a violating one), or continues in the old
/// initial state at cost 0. Chains stay chains.
pub fn threshold_to_half(
    process: &CostProcess,
    formula: &CostFormula,
    tau: &Rational,
    n0: &Cost,
    n1: &Cost,
) -> Result<CostProcess, GadgetError> {
    if !is_probability(tau) {
        return Err(GadgetError::Precondition(format!("threshold {} is outside [0, 1]", format_rational(tau))));
    }
    if formula.satisfies(n0) {
        return Err(GadgetError::Precondition(format!("n0 = {n0} satisfies the formula")));
    }
    if !formula.satisfies(n1) {
        return Err(GadgetError::Precondition(format!("n1 = {n1} does not satisfy the formula")));
    }
    let half = rat(1, 2);
    if *tau == half {
        return Ok(process.clone());
    }
    // Probability of continuing in the old initial state, and the cost of the shortcut.
    let (stay, shortcut) = if *tau < half {
        let p = (&half - tau) / (Rational::one() - tau);
        (Rational::one() - p, n1)
    } else {
        (Rational::one() / (Rational::from_integer(2.into()) * tau), n0)
    };

    let mut b = ProcessBuilder::new();
    let fresh = fresh_name(process, "s00");
    for name in process.states() {
        b.state(name);
    }
    b.initial(&fresh).target(process.state_name(process.target()));
    let action = if process.is_chain() { CHAIN_ACTION } else { "a" };
    let t = process.state_name(process.target());
    let s0 = process.state_name(process.initial());
    if !stay.is_zero() {
        b.transition(&fresh, action, s0, Cost::zero(), stay.clone());
    }
    if !stay.is_one() {
        b.transition(&fresh, action, t, shortcut.clone(), Rational::one() - &stay);
    }
    for q in 0..process.num_states() {
        for c in process.choices(q) {
            for o in &c.outcomes {
                b.transition(
                    process.state_name(q),
                    process.action_name(c.action),
                    process.state_name(o.to),
                    o.cost.clone(),
                    o.prob.clone(),
                );
            }
        }
    }
    Ok(b.build()?)
}

/// `base`, or `base` followed by enough primes to avoid a clash.
pub(crate) fn fresh_name(process: &CostProcess, base: &str) -> String {
    let mut name = base.to_string();
    while process.state_id(&name).is_some() {
        name.push('\'');
    }
    name
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain_solver::solve_chain;
    use crate::mdp_solver::solve_max;
    use crate::model::fixtures::*;

    fn shortcut_probability(p: &CostProcess) -> Rational {
        let s = p.initial();
        p.choices(s)[0].outcomes.iter().filter(|o| o.to == p.target()).map(|o| o.prob.clone()).sum()
    }

    #[test]
    fn quarter_and_three_quarters() {
        let p = geometric_chain();
        let phi = CostFormula::le(1u32);
        let low = threshold_to_half(&p, &phi, &rat(1, 4), &Cost::from(2u32), &Cost::from(0u32)).unwrap();
        assert_eq!(shortcut_probability(&low), rat(1, 3));
        let high = threshold_to_half(&p, &phi, &rat(3, 4), &Cost::from(2u32), &Cost::from(0u32)).unwrap();
        // Continue with p = 2/3, shortcut with 1/3.
        assert_eq!(shortcut_probability(&high), rat(1, 3));
        assert!(low.is_chain() && high.is_chain());
    }

    #[test]
    fn half_is_the_identity() {
        let p = budget_example();
        let q = threshold_to_half(&p, &CostFormula::le(5u32), &rat(1, 2), &Cost::from(6u32), &Cost::from(0u32)).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn shifted_probability_matches_the_affine_map() {
        let p = geometric_chain();
        let phi = CostFormula::le(1u32);
        let base = solve_chain(&p.clone().validated().unwrap(), &phi).unwrap();
        let tau = rat(1, 4);
        let q = threshold_to_half(&p, &phi, &tau, &Cost::from(2u32), &Cost::from(0u32)).unwrap();
        let shifted = solve_chain(&q.validated().unwrap(), &phi).unwrap();
        let pp = rat(1, 3);
        assert_eq!(shifted, &pp + (Rational::one() - &pp) * base);
    }

    #[test]
    fn mdp_decision_is_preserved() {
        let p = budget_example();
        let phi = CostFormula::le(5u32);
        for tau in [rat(1, 4), rat(2, 3), rat(3, 4), rat(4, 5)] {
            let q = threshold_to_half(&p, &phi, &tau, &Cost::from(6u32), &Cost::from(0u32)).unwrap();
            let before = solve_max(&p.clone().validated().unwrap(), &phi).value >= tau;
            let after = solve_max(&q.validated().unwrap(), &phi).value >= rat(1, 2);
            assert_eq!(before, after, "tau = {tau}");
        }
    }

    #[test]
    fn rejects_bad_witnesses() {
        let p = geometric_chain();
        let phi = CostFormula::le(1u32);
        assert!(threshold_to_half(&p, &phi, &rat(1, 4), &Cost::from(0u32), &Cost::from(0u32)).is_err());
        assert!(threshold_to_half(&p, &phi, &rat(1, 4), &Cost::from(2u32), &Cost::from(2u32)).is_err());
        assert!(threshold_to_half(&p, &phi, &rat(5, 4), &Cost::from(2u32), &Cost::from(0u32)).is_err());
    }
}
