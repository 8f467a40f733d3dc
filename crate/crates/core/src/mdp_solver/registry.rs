use super::acyclic::acyclic_query;
use super::levels::{solve_levels, Truncation};
use super::{query_step, CostKey, Mode, Scheduler, SolveResult};
use crate::error::SolveError;
use crate::formula::Query;
use crate::model::{CostProcess, Validated};
use crate::rational::Cost;

/// An algorithm computing optimal cost-bounded probabilities.
pub trait CostSolver: Send + Sync {
    fn name(&self) -> &'static str;
    fn summary(&self) -> &'static str;
    fn solve(&self, process: &Validated<CostProcess>, query: &Query, mode: Mode) -> Result<SolveResult, SolveError>;
}

/// Backward induction over cost levels with exact policy iteration.
pub struct LevelSolver;

impl CostSolver for LevelSolver {
    fn name(&self) -> &'static str {
        "levels"
    }

    fn summary(&self) -> &'static str {
        "backward induction over cost levels; policy iteration on zero-cost cycles"
    }

    fn solve(&self, process: &Validated<CostProcess>, query: &Query, mode: Mode) -> Result<SolveResult, SolveError> {
        let tr = Truncation {
            process: &**process,
            start: Cost::from(0u32),
            step: query_step(query),
            terminal: |c: &Cost| query.holds(c),
            top: query.tail,
        };
        let sol = solve_levels(&tr, mode);
        let mut scheduler = Scheduler::new();
        for ((q, c), a) in sol.choice {
            scheduler.insert(q, CostKey::Cost(c), a);
        }
        scheduler.fill_top(process, &sol.top_states);
        Ok(SolveResult { value: sol.value, scheduler, mode, strategy: self.name(), stats: sol.stats })
    }
}

/// Memoized recursion; acyclic processes only.
pub struct AcyclicSolver;

impl CostSolver for AcyclicSolver {
    fn name(&self) -> &'static str {
        "acyclic"
    }

    fn summary(&self) -> &'static str {
        "memoized recursion over (state, cost); rejects cyclic processes"
    }

    fn solve(&self, process: &Validated<CostProcess>, query: &Query, mode: Mode) -> Result<SolveResult, SolveError> {
        acyclic_query(process, query, mode)
    }
}

/// `acyclic` when the control graph is a DAG, `levels` otherwise.
pub struct AutoSolver;

impl CostSolver for AutoSolver {
    fn name(&self) -> &'static str {
        "auto"
    }

    fn summary(&self) -> &'static str {
        "acyclic for DAG-shaped processes, levels otherwise"
    }

    fn solve(&self, process: &Validated<CostProcess>, query: &Query, mode: Mode) -> Result<SolveResult, SolveError> {
        if process.is_acyclic() {
            AcyclicSolver.solve(process, query, mode)
        } else {
            LevelSolver.solve(process, query, mode)
        }
    }
}

/// Named solver strategies, selectable at runtime.
pub struct SolverRegistry {
    solvers: Vec<Box<dyn CostSolver>>,
}

impl Default for SolverRegistry {
    fn default() -> Self {
        let mut r = SolverRegistry { solvers: Vec::new() };
        r.register(Box::new(AutoSolver));
        r.register(Box::new(LevelSolver));
        r.register(Box::new(AcyclicSolver));
        r
    }
}

impl SolverRegistry {
    /// Adds a solver; a later registration replaces one with the same name.
    pub fn register(&mut self, solver: Box<dyn CostSolver>) {
        self.solvers.retain(|s| s.name() != solver.name());
        self.solvers.push(solver);
    }

    pub fn get(&self, name: &str) -> Result<&dyn CostSolver, SolveError> {
        self.solvers
            .iter()
            .find(|s| s.name() == name)
            .map(|s| s.as_ref())
            .ok_or_else(|| SolveError::UnknownStrategy(name.to_string()))
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.solvers.iter().map(|s| s.name()).collect()
    }
}
