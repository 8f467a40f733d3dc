mod common;

use common::*;
use costodds::chain_solver::{cost_distribution, solve_chain};
use costodds::rational::{Cost, Rational};
use num_traits::One;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn complement_law(seed in any::<u64>()) {
        let mut r = rng(seed);
        let c = random_process(&mut r, &ProcSpec::chains(6, 3));
        let (f, _) = random_formula(&mut r, 10);
        let sum = solve_chain(&c, &f).unwrap() + solve_chain(&c, &f.clone().not()).unwrap();
        prop_assert!(sum.is_one());
    }

    #[test]
    fn acyclic_chains_match_path_sums(seed in any::<u64>()) {
        let mut r = rng(seed);
        let c = random_dag(&mut r, &ProcSpec::chains(8, 3));
        let (f, _) = random_formula(&mut r, 12);
        prop_assert_eq!(solve_chain(&c, &f).unwrap(), path_sum(&c, &f));
    }

    #[test]
    fn truncations_agree(seed in any::<u64>(), b in 0u64..12, extra in 1u64..12) {
        let c = random_process(&mut rng(seed), &ProcSpec::chains(5, 3));
        let short = cost_distribution(&c, &Cost::from(b)).unwrap();
        let long = cost_distribution(&c, &Cost::from(b + extra)).unwrap();
        let mut between = Rational::from_integer(0.into());
        for k in 0..=b + extra {
            let k = Cost::from(k);
            if k <= Cost::from(b) {
                prop_assert_eq!(short.mass_at(&k), long.mass_at(&k));
            } else {
                between += long.mass_at(&k);
            }
        }
        prop_assert_eq!(short.overflow.clone(), long.overflow.clone() + between);
        prop_assert!(short.total().is_one());
    }

    #[test]
    fn monotone_in_the_satisfying_set(seed in any::<u64>()) {
        let mut r = rng(seed);
        let c = random_process(&mut r, &ProcSpec::chains(6, 3));
        let (f, _) = random_formula(&mut r, 10);
        let (g, _) = random_formula(&mut r, 10);
        let wider = f.clone().or(g.clone());
        prop_assert!(f.normalize().is_subset(&wider.normalize()));
        prop_assert!(solve_chain(&c, &f).unwrap() <= solve_chain(&c, &wider).unwrap());
        if f.normalize().is_subset(&g.normalize()) {
            prop_assert!(solve_chain(&c, &f).unwrap() <= solve_chain(&c, &g).unwrap());
        }
    }
}
