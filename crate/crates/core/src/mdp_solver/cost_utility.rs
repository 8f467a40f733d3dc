use num_traits::{One, Zero};

use super::levels::{solve_levels, MdpStats, Truncation};
use super::Mode;
use crate::model::{CostUtility, CostUtilityProcess, Validated};
use crate::rational::{Cost, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CostUtilityOutcome {
    pub holds: bool,
    /// Optimal `P(cost <= C ∧ utility >= U)`.
    pub value: Rational,
    pub stats: MdpStats,
}

/// Is there a scheduler that reaches the target with cost at most `max_cost`
/// and utility at least `min_utility`, with probability 1?
///
/// Runs on the product with keys `(cost, min(utility, U))`; any run whose
/// cost exceeds `C` is lost.
pub fn decide_cost_utility(
    process: &Validated<CostUtilityProcess>,
    max_cost: &Cost,
    min_utility: &Cost,
) -> CostUtilityOutcome {
    let step = |key: &(Cost, Cost), w: &CostUtility| {
        let c = &key.0 + &w.cost;
        if &c > max_cost {
            return None;
        }
        let u = (&key.1 + &w.utility).min(min_utility.clone());
        Some((c, u))
    };
    let tr = Truncation {
        process: &**process,
        start: (Cost::zero(), Cost::zero().min(min_utility.clone())),
        step,
        terminal: |key: &(Cost, Cost)| &key.1 >= min_utility,
        top: false,
    };
    let sol = solve_levels(&tr, Mode::Max);
    CostUtilityOutcome { holds: sol.value.is_one(), value: sol.value, stats: sol.stats }
}
