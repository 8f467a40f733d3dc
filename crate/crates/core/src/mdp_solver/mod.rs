//! Optimal cost-bounded probabilities for cost processes.
//!
//! Schedulers may depend on the control state and on the cost accumulated
//! so far. Costs above the largest constant `B` of the formula are
//! indistinguishable, so the relevant product is finite: `(q, c)` for
//! `c <= B`, plus one saturated bucket `(q, top)` per state.
//!
//! Two algorithms implement [`CostSolver`]: backward induction over cost
//! levels with exact policy iteration ([`LevelSolver`]), and a memoized
//! recursion for acyclic processes ([`AcyclicSolver`]). [`AutoSolver`]
//! routes between them; [`SolverRegistry`] selects one by name.

mod acyclic;
mod cost_utility;
mod levels;
mod registry;
mod scheduler;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::SolveError;
use crate::formula::{CostFormula, Query};
use crate::model::{CostProcess, Validated};
use crate::rational::{format_rational, is_probability, Cost, Rational};

pub use acyclic::solve_acyclic;
pub use cost_utility::{decide_cost_utility, CostUtilityOutcome};
pub use levels::MdpStats;
pub use registry::{AcyclicSolver, AutoSolver, CostSolver, LevelSolver, SolverRegistry};
pub use scheduler::{evaluate_scheduler, induced_chain, CostKey, Scheduler, SchedulerEntry};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Max,
    Min,
}

impl Mode {
    /// Lowest index attaining the optimum, and the optimum.
    pub(crate) fn best(self, values: &[Rational]) -> (usize, Rational) {
        let mut best = 0;
        for (i, v) in values.iter().enumerate().skip(1) {
            if self.strictly_better(v, &values[best]) {
                best = i;
            }
        }
        (best, values[best].clone())
    }

    pub(crate) fn strictly_better(self, a: &Rational, b: &Rational) -> bool {
        match self {
            Mode::Max => a > b,
            Mode::Min => a < b,
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "max" => Ok(Mode::Max),
            "min" => Ok(Mode::Min),
            _ => Err(format!("unknown mode `{s}` (expected max or min)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveResult {
    pub value: Rational,
    pub scheduler: Scheduler,
    pub mode: Mode,
    /// Name of the strategy that produced the result.
    pub strategy: &'static str,
    pub stats: MdpStats,
}

pub fn solve_max(process: &Validated<CostProcess>, formula: &CostFormula) -> SolveResult {
    solve(process, formula, Mode::Max)
}

pub fn solve_min(process: &Validated<CostProcess>, formula: &CostFormula) -> SolveResult {
    solve(process, formula, Mode::Min)
}

/// Optimal value with automatic routing: acyclic processes use the
/// recursion, everything else the level solver.
pub fn solve(process: &Validated<CostProcess>, formula: &CostFormula, mode: Mode) -> SolveResult {
    AutoSolver
        .solve(process, &formula.query(), mode)
        .expect("the automatic route accepts every validated process")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantifier {
    /// Some scheduler reaches the threshold.
    Exists,
    /// Every scheduler reaches the threshold.
    Forall,
}

impl std::str::FromStr for Quantifier {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "exists" => Ok(Quantifier::Exists),
            "forall" => Ok(Quantifier::Forall),
            _ => Err(format!("unknown quantifier `{s}` (expected exists or forall)")),
        }
    }
}

/// Answer to a threshold question together with its certificate: a
/// witness for a positive `exists`, a counter-witness for a negative
/// `forall`, and the optimal scheduler otherwise.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decision {
    pub holds: bool,
    pub value: Rational,
    pub scheduler: Scheduler,
}

pub fn check_threshold(tau: &BigRational) -> Result<(), SolveError> {
    if is_probability(tau) {
        Ok(())
    } else {
        Err(SolveError::TauOutOfRange(format_rational(tau)))
    }
}

/// Is there a scheduler (`Exists`), or is every scheduler (`Forall`),
/// such that `P(K ⊨ φ) >= τ`?
pub fn decide(
    process: &Validated<CostProcess>,
    formula: &CostFormula,
    tau: &Rational,
    quantifier: Quantifier,
) -> Result<Decision, SolveError> {
    check_threshold(tau)?;
    let mode = match quantifier {
        Quantifier::Exists => Mode::Max,
        Quantifier::Forall => Mode::Min,
    };
    let r = solve(process, formula, mode);
    Ok(Decision { holds: r.value >= *tau, value: r.value, scheduler: r.scheduler })
}

/// Can the accumulated cost be made exactly `target` with probability 1?
pub fn decide_qualitative(process: &Validated<CostProcess>, target: &Cost) -> Decision {
    let r = solve_max(process, &CostFormula::eq(target.clone()));
    Decision { holds: r.value.is_one(), value: r.value, scheduler: r.scheduler }
}

pub(crate) fn indicator(b: bool) -> Rational {
    if b {
        Rational::one()
    } else {
        Rational::zero()
    }
}

pub(crate) fn query_step(query: &Query) -> impl Fn(&Cost, &Cost) -> Option<Cost> + '_ {
    move |c, k| {
        let next = c + k;
        (next <= query.b_max).then_some(next)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain_solver::solve_chain;
    use crate::model::fixtures::*;
    use crate::rational::rat;

    fn f(s: &str) -> CostFormula {
        CostFormula::parse(s).unwrap()
    }

    fn example() -> Validated<CostProcess> {
        budget_example().validated().unwrap()
    }

    #[test]
    fn example_optimum_and_witness() {
        let p = example();
        let r = solve_max(&p, &f("x<=5"));
        assert_eq!(r.value, rat(3, 4));
        let q1 = p.state_id("q1").unwrap();
        let a1 = p.action_id("a1").unwrap();
        let a2 = p.action_id("a2").unwrap();
        assert_eq!(r.scheduler.get(q1, &CostKey::Cost(Cost::from(1u32))), Some(a1));
        assert_eq!(r.scheduler.get(q1, &CostKey::Cost(Cost::from(3u32))), Some(a2));
        assert_eq!(evaluate_scheduler(&p, &r.scheduler, &f("x<=5")).unwrap(), rat(3, 4));
    }

    #[test]
    fn example_smaller_budget_and_minimum() {
        let p = example();
        assert_eq!(solve_max(&p, &f("x<=3")).value, rat(1, 4));
        // Worst case: a2 after cost 1 (1/2), a1 after cost 3 (0).
        let r = solve_min(&p, &f("x<=5"));
        assert_eq!(r.value, rat(1, 4));
        assert_eq!(evaluate_scheduler(&p, &r.scheduler, &f("x<=5")).unwrap(), rat(1, 4));
    }

    #[test]
    fn levels_and_recursion_agree_on_the_example() {
        let p = example();
        for mode in [Mode::Max, Mode::Min] {
            let a = solve_acyclic(&p, &f("x<=5"), mode).unwrap();
            let b = LevelSolver.solve(&p, &f("x<=5").query(), mode).unwrap();
            assert_eq!(a.value, b.value);
            assert_eq!(a.scheduler, b.scheduler);
        }
    }

    #[test]
    fn chains_collapse() {
        for chain in [geometric_chain(), two_branch_chain()] {
            let chain = chain.validated().unwrap();
            for text in ["x<=0", "x<=2", "!(x<=1)", "x=1"] {
                let expect = solve_chain(&chain, &f(text)).unwrap();
                assert_eq!(solve_max(&chain, &f(text)).value, expect);
                assert_eq!(solve_min(&chain, &f(text)).value, expect);
            }
        }
    }

    #[test]
    fn decisions() {
        let p = example();
        assert!(decide(&p, &f("x<=5"), &rat(3, 4), Quantifier::Exists).unwrap().holds);
        assert!(!decide(&p, &f("x<=5"), &rat(4, 5), Quantifier::Exists).unwrap().holds);
        for q in [Quantifier::Exists, Quantifier::Forall] {
            assert!(decide(&p, &f("x<=0"), &rat(0, 1), q).unwrap().holds);
        }
        assert!(matches!(
            decide(&p, &f("x<=5"), &rat(5, 4), Quantifier::Exists),
            Err(SolveError::TauOutOfRange(_))
        ));
        assert!(decide(&p, &f("x<=0 | !(x<=0)"), &rat(1, 1), Quantifier::Forall).unwrap().holds);
    }

    #[test]
    fn qualitative() {
        let c2 = two_branch_chain().validated().unwrap();
        let d = decide_qualitative(&c2, &Cost::from(1u32));
        assert!(!d.holds);
        assert_eq!(d.value, rat(1, 2));

        let mut b = crate::model::ProcessBuilder::new();
        b.initial("q").target("t");
        b.chain_edge("q", "t", 7u32, rat(1, 1));
        b.chain_edge("t", "t", 0u32, rat(1, 1));
        let single = b.build().unwrap().validated().unwrap();
        assert!(decide_qualitative(&single, &Cost::from(7u32)).holds);
    }

    #[test]
    fn duality() {
        let p = example();
        for text in ["x<=5", "x<=3", "x=4", "!(x<=2) & x<=6"] {
            let pos = solve_max(&p, &f(text)).value;
            let neg = solve_min(&p, &f(text).not()).value;
            assert_eq!(pos, Rational::one() - neg);
        }
    }
}
