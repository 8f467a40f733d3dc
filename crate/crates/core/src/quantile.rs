//! Cost quantiles: the least budget `B` with optimal `P(K <= B) >= τ`.
//!
//! For `τ < 1` there is an a-priori bound: with `p_min` the smallest
//! probability and `k_max` the largest cost, every scheduler satisfies
//! `P(K <= B) >= τ` once
//!
//! ```text
//! B >= k_max · ⌈|Q| · (L / p_min^|Q| + 1)⌉,   L >= -ln(1 - τ).
//! ```
//!
//! The least budget is then found by bisection. For `τ = 1` the question is
//! about the worst path cost, which is a fixpoint on the control graph.

use num_bigint::BigInt;
use num_traits::{One, Pow, Zero};
use serde::Serialize;

use crate::error::SolveError;
use crate::formula::CostFormula;
use crate::mdp_solver::{check_threshold, solve, Mode, Quantifier};
use crate::model::{CostProcess, Validated};
use crate::rational::{ceil_nonneg, format_rational, Cost, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QuantileBounds {
    #[serde(serialize_with = "ser_rational")]
    pub p_min: Rational,
    #[serde(serialize_with = "ser_display")]
    pub k_max: Cost,
    /// Dyadic upper bound on `-ln(1 - τ)` actually used.
    #[serde(serialize_with = "ser_rational")]
    pub l_upper: Rational,
    /// Fractional bits of `l_upper`.
    pub precision: u32,
    #[serde(serialize_with = "ser_display")]
    pub b_bound: Cost,
}

fn ser_rational<S: serde::Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(r))
}

fn ser_display<S: serde::Serializer, T: std::fmt::Display>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Quantile {
    Finite(Cost),
    Infinite,
}

impl std::fmt::Display for Quantile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Quantile::Finite(b) => write!(f, "{b}"),
            Quantile::Infinite => write!(f, "inf"),
        }
    }
}

/// `ceil(r · 2^bits) / 2^bits`
fn round_up(r: &Rational, bits: u32) -> Rational {
    let scale = BigInt::one() << bits;
    let scaled = r * Rational::from_integer(scale.clone());
    Rational::new(scaled.ceil().to_integer(), scale)
}

/// Upper bound on `atanh(s)` for `0 <= s < 1/2`, as a dyadic rational.
fn atanh_upper(s: &Rational, bits: u32) -> Rational {
    if s.is_zero() {
        return Rational::zero();
    }
    let s2 = s * s;
    let eps = Rational::new(BigInt::one(), BigInt::one() << (bits + 2));
    let mut power = s.clone();
    let mut sum = Rational::zero();
    let mut k: u32 = 0;
    loop {
        let term = &power / Rational::from_integer(BigInt::from(2 * k + 1));
        sum += round_up(&term, bits + 4);
        power = round_up(&(&power * &s2), bits + 8);
        k += 1;
        // Remaining terms are at most power / (2k+1) / (1 - s^2).
        let tail = &power / Rational::from_integer(BigInt::from(2 * k + 1)) / (Rational::one() - &s2);
        if tail < eps {
            return round_up(&(sum + tail), bits);
        }
    }
}

/// Dyadic upper bound on `ln(y)` for rational `y >= 1`, with `bits`
/// fractional bits.
pub fn ln_upper(y: &Rational, bits: u32) -> Rational {
    assert!(*y >= Rational::one(), "ln_upper needs y >= 1");
    // y = 2^e · z with 1 <= z < 2.
    let mut e: u64 = y.numer().bits().saturating_sub(y.denom().bits());
    let two_e = |e: u64| Rational::from_integer(BigInt::one() << e);
    if e > 0 && y < &two_e(e) {
        e -= 1;
    }
    let z = y / two_e(e);
    debug_assert!(z >= Rational::one() && z < Rational::from_integer(2.into()));
    let two = Rational::from_integer(2.into());
    let ln_z = &two * atanh_upper(&((&z - Rational::one()) / (&z + Rational::one())), bits + 2);
    let ln2 = &two * atanh_upper(&Rational::new(1.into(), 3.into()), bits + 2 + 64);
    round_up(&(Rational::from_integer(BigInt::from(e)) * ln2 + ln_z), bits)
}

fn bound_from(l: &Rational, n: usize, p_min: &Rational, k_max: &Cost) -> Cost {
    let p_pow: Rational = Pow::pow(p_min, n as u32);
    let inner = Rational::from_integer(BigInt::from(n)) * (l / p_pow + Rational::one());
    k_max * ceil_nonneg(&inner)
}

/// The a-priori budget after which every scheduler reaches the target
/// with probability at least `τ`.
pub fn budget_upper_bound(process: &CostProcess, tau: &Rational) -> Result<QuantileBounds, SolveError> {
    check_threshold(tau)?;
    if tau.is_one() {
        return Err(SolveError::TauIsOne);
    }
    let p_min = process.p_min();
    let k_max = process.k_max();
    let n = process.num_states();
    if tau.is_zero() {
        return Ok(QuantileBounds {
            b_bound: bound_from(&Rational::zero(), n, &p_min, &k_max),
            p_min,
            k_max,
            l_upper: Rational::zero(),
            precision: 0,
        });
    }
    let y = (Rational::one() - tau).recip();
    let mut bits = 64;
    let mut l = ln_upper(&y, bits);
    let mut b = bound_from(&l, n, &p_min, &k_max);
    // Refine until the ceiling no longer moves.
    while bits < 4096 {
        let l2 = ln_upper(&y, bits * 2);
        let b2 = bound_from(&l2, n, &p_min, &k_max);
        let stable = b2 == b;
        bits *= 2;
        l = l2;
        b = b2;
        if stable {
            break;
        }
    }
    Ok(QuantileBounds { p_min, k_max, l_upper: l, precision: bits, b_bound: b })
}

fn probe(process: &Validated<CostProcess>, b: &Cost, tau: &Rational, mode: Mode) -> bool {
    solve(process, &CostFormula::le(b.clone()), mode).value >= *tau
}

/// Least `B` such that `P(K <= B) >= τ` for some (`Exists`) or every
/// (`Forall`) scheduler.
pub fn quantile_query(
    process: &Validated<CostProcess>,
    tau: &Rational,
    quantifier: Quantifier,
) -> Result<Quantile, SolveError> {
    check_threshold(tau)?;
    if tau.is_one() {
        return Ok(worst_case_cost(process, quantifier));
    }
    let mode = match quantifier {
        Quantifier::Exists => Mode::Max,
        Quantifier::Forall => Mode::Min,
    };
    let bound = budget_upper_bound(process, tau)?.b_bound;
    // Gallop from 0 so that small answers need few probes, then bisect;
    // the a-priori bound caps the search.
    if probe(process, &Cost::zero(), tau, mode) {
        return Ok(Quantile::Finite(Cost::zero()));
    }
    let mut lo = Cost::zero(); // fails
    let mut hi = Cost::one();
    loop {
        if hi >= bound {
            hi = bound;
            break;
        }
        if probe(process, &hi, tau, mode) {
            break;
        }
        lo = hi.clone();
        hi <<= 1u32;
    }
    while &lo + 1u32 < hi {
        let mid: Cost = (&lo + &hi) >> 1u32;
        if probe(process, &mid, tau, mode) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Quantile::Finite(hi))
}

/// `τ = 1`: least `B` such that no finite path consistent with the
/// scheduler exceeds cost `B`.
///
/// `W(t) = 0`, `W(q) = opt_a max_{(q', k)} (k + W(q'))` with `opt = min` for
/// `Exists` and `max` for `Forall`, computed as a least fixpoint from 0.
/// Finite values never exceed `(|Q| - 1) · k_max`, so values are capped at
/// `|Q| · k_max + 1`, and reaching the cap means infinity.
pub fn worst_case_cost(process: &CostProcess, quantifier: Quantifier) -> Quantile {
    let n = process.num_states();
    let t = process.target();
    let cap: Cost = Cost::from(n) * process.k_max() + 1u32;
    let mut w: Vec<Cost> = vec![Cost::zero(); n];
    loop {
        let mut changed = false;
        for q in (0..n).filter(|&q| q != t) {
            let per_action = process.choices(q).iter().map(|c| {
                c.outcomes
                    .iter()
                    .map(|o| (&o.cost + &w[o.to]).min(cap.clone()))
                    .max()
                    .unwrap_or_default()
            });
            let v = match quantifier {
                Quantifier::Exists => per_action.min(),
                Quantifier::Forall => per_action.max(),
            }
            .unwrap_or_default();
            if v > w[q] {
                w[q] = v;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let v = &w[process.initial()];
    if *v >= cap {
        Quantile::Infinite
    } else {
        Quantile::Finite(v.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp_solver::solve_min;
    use crate::model::fixtures::*;
    use crate::rational::rat;

    #[test]
    fn ln_bounds_are_tight_upper_bounds() {
        // ln 2 = 0.693147180559945309417232121458...
        let l = ln_upper(&rat(2, 1), 64);
        let below = rat(693_147_180_559_945_309, 1_000_000_000_000_000_000);
        let above = rat(693_147_180_559_945_310, 1_000_000_000_000_000_000);
        assert!(l > below && l < above + rat(1, 1 << 40));
        assert!(ln_upper(&rat(1, 1), 64).is_zero());
        // ln 10 = 2.302585092994045684...
        let l10 = ln_upper(&rat(10, 1), 64);
        assert!(l10 > rat(2_302_585_092_994_045_684, 1_000_000_000_000_000_000));
        assert!(l10 < rat(2_302_585_092_994_045_685, 1_000_000_000_000_000_000));
        // ln(4/3) = 0.287682072451780927...
        let l43 = ln_upper(&rat(4, 3), 64);
        assert!(l43 > rat(287_682_072_451_780_927, 1_000_000_000_000_000_000));
        assert!(l43 < rat(287_682_072_451_780_928, 1_000_000_000_000_000_000));
    }

    #[test]
    fn zero_threshold_bound() {
        let p = two_branch_chain();
        let b = budget_upper_bound(&p, &rat(0, 1)).unwrap();
        assert_eq!(b.b_bound, p.k_max() * Cost::from(p.num_states()));
    }

    #[test]
    fn half_threshold_bound() {
        // |Q| = 2, p_min = 1/2, k_max = 1: ⌈2 · (4 ln 2 + 1)⌉ = 8.
        let p = geometric_chain();
        let b = budget_upper_bound(&p, &rat(1, 2)).unwrap();
        assert_eq!(b.b_bound, Cost::from(8u32));
        assert_eq!(bound_from(&b.l_upper, 2, &rat(1, 2), &Cost::from(3u32)), Cost::from(24u32));
    }

    #[test]
    fn rejects_tau_one_and_out_of_range() {
        let p = geometric_chain();
        assert_eq!(budget_upper_bound(&p, &rat(1, 1)), Err(SolveError::TauIsOne));
        assert!(matches!(budget_upper_bound(&p, &rat(3, 2)), Err(SolveError::TauOutOfRange(_))));
        let v = p.validated().unwrap();
        assert!(matches!(quantile_query(&v, &rat(-1, 2), Quantifier::Exists), Err(SolveError::TauOutOfRange(_))));
    }

    #[test]
    fn bound_is_sound_on_the_geometric_chain() {
        let p = geometric_chain().validated().unwrap();
        for tau in [rat(1, 2), rat(9, 10), rat(99, 100), rat(999, 1000)] {
            let b = budget_upper_bound(&p, &tau).unwrap().b_bound;
            assert!(solve_min(&p, &CostFormula::le(b)).value >= tau);
        }
    }

    #[test]
    fn quantiles() {
        let g = geometric_chain().validated().unwrap();
        assert_eq!(quantile_query(&g, &rat(3, 4), Quantifier::Exists).unwrap(), Quantile::Finite(Cost::one()));
        assert_eq!(quantile_query(&g, &rat(0, 1), Quantifier::Forall).unwrap(), Quantile::Finite(Cost::zero()));
        let ex = budget_example().validated().unwrap();
        // max P(K <= 4) = 3/4 (a1 after cost 1, a2 after cost 3), max P(K <= 3) = 1/4.
        assert_eq!(quantile_query(&ex, &rat(3, 4), Quantifier::Exists).unwrap(), Quantile::Finite(Cost::from(4u32)));
    }

    #[test]
    fn certain_quantiles() {
        let g = geometric_chain().validated().unwrap();
        assert_eq!(quantile_query(&g, &rat(1, 1), Quantifier::Exists).unwrap(), Quantile::Infinite);
        let ex = budget_example().validated().unwrap();
        // Exists: a1 everywhere gives worst cost 6; Forall: a2 after cost 3 gives 9.
        assert_eq!(worst_case_cost(&ex, Quantifier::Exists), Quantile::Finite(Cost::from(6u32)));
        assert_eq!(worst_case_cost(&ex, Quantifier::Forall), Quantile::Finite(Cost::from(9u32)));
    }
}
