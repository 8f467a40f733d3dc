//! Monte Carlo estimation of `P(K ⊨ φ)` under a fixed scheduler.
//!
//! Sample `i` of a run with seed `s` draws from ChaCha8 seeded with `s` on
//! stream `i`, so reports are bit-reproducible and independent of the order
//! in which samples are taken. Outcomes are picked by a uniform integer
//! below the distribution's common denominator, without floating point.

use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::SolveError;
use crate::formula::{CostFormula, Query};
use crate::mdp_solver::{CostKey, Scheduler};
use crate::model::{CostProcess, StateId, Validated};
use crate::rational::{format_rational, Cost, Rational};

/// Steps after which a single run is abandoned.
pub const STEP_GUARD: u64 = 10_000_000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleReport {
    pub n: u64,
    pub hits: u64,
    #[serde(serialize_with = "ser_rational")]
    pub estimate: Rational,
    /// Three standard deviations of the normal approximation.
    pub ci_halfwidth: f64,
    pub seed: u64,
}

fn ser_rational<S: serde::Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(r))
}

impl SampleReport {
    pub fn estimate_f64(&self) -> f64 {
        self.hits as f64 / self.n as f64
    }
}

/// Cumulative numerators over a common denominator.
enum Table {
    Small { den: u64, cum: Vec<u64> },
    Big { den: BigUint, cum: Vec<BigUint> },
}

struct Outcome {
    to: StateId,
    cost: Cost,
    small_cost: Option<u64>,
}

struct Sampler<'a> {
    process: &'a CostProcess,
    scheduler: &'a Scheduler,
    horizon: Cost,
    /// Per state, per choice.
    tables: Vec<Vec<(Table, Vec<Outcome>)>>,
}

impl<'a> Sampler<'a> {
    fn new(process: &'a CostProcess, scheduler: &'a Scheduler, horizon: Cost) -> Self {
        let tables = (0..process.num_states())
            .map(|q| {
                process
                    .choices(q)
                    .iter()
                    .map(|ch| {
                        let den = ch.outcomes.iter().fold(BigUint::from(1u32), |acc, o| {
                            acc.lcm(&o.prob.denom().to_biguint().expect("positive"))
                        });
                        let mut acc = BigUint::zero();
                        let mut cum = Vec::with_capacity(ch.outcomes.len());
                        for o in &ch.outcomes {
                            let num = o.prob.numer().to_biguint().expect("positive");
                            acc += num * (&den / o.prob.denom().to_biguint().expect("positive"));
                            cum.push(acc.clone());
                        }
                        let table = match (den.to_u64(), cum.iter().map(|c| c.to_u64()).collect::<Option<Vec<_>>>()) {
                            (Some(d), Some(c)) => Table::Small { den: d, cum: c },
                            _ => Table::Big { den, cum },
                        };
                        let outs = ch
                            .outcomes
                            .iter()
                            .map(|o| Outcome { to: o.to, cost: o.cost.clone(), small_cost: o.cost.to_u64() })
                            .collect();
                        (table, outs)
                    })
                    .collect()
            })
            .collect();
        Sampler { process, scheduler, horizon, tables }
    }

    fn pick(&self, q: StateId, cost: &Cost) -> Result<usize, SolveError> {
        let choices = self.process.choices(q);
        if choices.len() == 1 {
            return Ok(0);
        }
        let key = if *cost <= self.horizon { CostKey::Cost(cost.clone()) } else { CostKey::Top };
        let action = self.scheduler.get(q, &key).ok_or_else(|| SolveError::SchedulerIncomplete {
            state: self.process.state_name(q).to_string(),
            cost: key.to_string(),
        })?;
        choices.iter().position(|c| c.action == action).ok_or_else(|| SolveError::SchedulerDisabled {
            state: self.process.state_name(q).to_string(),
            action: self.process.action_name(action).to_string(),
        })
    }

    fn run(&self, rng: &mut ChaCha8Rng) -> Result<Cost, SolveError> {
        let t = self.process.target();
        let mut q = self.process.initial();
        let mut small: u64 = 0;
        let mut big: Option<Cost> = None;
        let mut steps: u64 = 0;
        while q != t {
            steps += 1;
            if steps > STEP_GUARD {
                return Err(SolveError::StepGuard(STEP_GUARD));
            }
            let current = big.clone().unwrap_or_else(|| Cost::from(small));
            let a = self.pick(q, &current)?;
            let (table, outs) = &self.tables[q][a];
            let i = match table {
                Table::Small { den, cum } => {
                    let u = rng.gen_range(0..*den);
                    cum.partition_point(|&c| c <= u)
                }
                Table::Big { den, cum } => {
                    let u = rng.gen_biguint_below(den);
                    cum.partition_point(|c| *c <= u)
                }
            };
            let o = &outs[i];
            match (&mut big, o.small_cost.and_then(|k| small.checked_add(k))) {
                (None, Some(s)) => small = s,
                (None, None) => big = Some(Cost::from(small) + &o.cost),
                (Some(b), _) => *b += &o.cost,
            }
            q = o.to;
        }
        Ok(big.unwrap_or_else(|| Cost::from(small)))
    }
}

fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// One run's accumulated cost. `horizon` is the largest cost the scheduler
/// distinguishes; above it the scheduler's `top` entries apply. States with
/// a single action need no entry.
pub fn sample_run(
    process: &Validated<CostProcess>,
    scheduler: &Scheduler,
    horizon: &Cost,
    seed: u64,
) -> Result<Cost, SolveError> {
    Sampler::new(process, scheduler, horizon.clone()).run(&mut stream(seed, 0))
}

/// Estimates `P(K ⊨ φ)` from `n` independent runs.
pub fn estimate(
    process: &Validated<CostProcess>,
    scheduler: &Scheduler,
    formula: &CostFormula,
    n: u64,
    seed: u64,
) -> Result<SampleReport, SolveError> {
    if n == 0 {
        return Err(SolveError::NoSamples);
    }
    let query: Query = formula.query();
    let sampler = Sampler::new(process, scheduler, query.b_max.clone());
    let mut hits = 0;
    for i in 0..n {
        let k = sampler.run(&mut stream(seed, i))?;
        if query.holds(&k) {
            hits += 1;
        }
    }
    let p = hits as f64 / n as f64;
    Ok(SampleReport {
        n,
        hits,
        estimate: Rational::new(hits.into(), n.into()),
        ci_halfwidth: 3.0 * (p * (1.0 - p) / n as f64).sqrt(),
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp_solver::solve_max;
    use crate::model::fixtures::*;
    use crate::model::ProcessBuilder;
    use crate::rational::rat;

    #[test]
    fn deterministic_path() {
        let mut b = ProcessBuilder::new();
        b.initial("q").target("t");
        b.chain_edge("q", "r", 3u32, rat(1, 1));
        b.chain_edge("r", "t", 1u32, rat(1, 1));
        b.chain_edge("t", "t", 0u32, rat(1, 1));
        let p = b.build().unwrap().validated().unwrap();
        for seed in 0..5 {
            assert_eq!(sample_run(&p, &Scheduler::new(), &Cost::zero(), seed).unwrap(), Cost::from(4u32));
        }
    }

    #[test]
    fn geometric_mean() {
        let p = geometric_chain().validated().unwrap();
        let n = 100_000u64;
        let none = Scheduler::default();
        let sampler = Sampler::new(&p, &none, Cost::zero());
        let costs: Vec<f64> = (0..n).map(|i| sampler.run(&mut stream(7, i)).unwrap().to_f64().unwrap()).collect();
        let mean = costs.iter().sum::<f64>() / n as f64;
        // Variance of the geometric law with mean 1 is 2.
        assert!((mean - 1.0).abs() <= 3.0 * (2.0 / n as f64).sqrt(), "mean {mean}");
    }

    #[test]
    fn example_hit_rate() {
        let p = budget_example().validated().unwrap();
        let phi = CostFormula::le(5u32);
        let opt = solve_max(&p, &phi);
        let r = estimate(&p, &opt.scheduler, &phi, 20_000, 11).unwrap();
        assert!((r.estimate_f64() - 0.75).abs() <= r.ci_halfwidth, "{r:?}");
        assert_eq!(r, estimate(&p, &opt.scheduler, &phi, 20_000, 11).unwrap());
    }

    #[test]
    fn missing_entries_and_zero_samples() {
        let p = budget_example().validated().unwrap();
        let phi = CostFormula::le(5u32);
        assert!(matches!(
            estimate(&p, &Scheduler::new(), &phi, 10, 0),
            Err(SolveError::SchedulerIncomplete { .. })
        ));
        assert!(matches!(estimate(&p, &Scheduler::new(), &phi, 0, 0), Err(SolveError::NoSamples)));
    }

    #[test]
    fn big_denominators() {
        let mut b = ProcessBuilder::new();
        b.initial("q").target("t");
        let third = Rational::new(1.into(), BigUint::from(3u32).pow(50).into());
        b.chain_edge("q", "t", 1u32, third.clone());
        b.chain_edge("q", "t", 0u32, Rational::from_integer(1.into()) - third);
        b.chain_edge("t", "t", 0u32, rat(1, 1));
        let p = b.build().unwrap().validated().unwrap();
        let r = estimate(&p, &Scheduler::new(), &CostFormula::le(0u32), 1000, 3).unwrap();
        assert_eq!(r.hits, 1000);
    }
}
