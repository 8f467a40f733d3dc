mod common;

use common::*;
use costodds::chain_solver::solve_chain;
use costodds::formula::CostFormula;
use costodds::gadgets::{
    circuit_to_chain, circuit_to_dfa, count_parikh_paths, countdown_to_process, posslp_instance,
    qsubsetsum_to_process, qualitative_to_cost_utility, threshold_to_half, universal_qsubsetsum_to_process,
    QSubsetSum,
};
use costodds::mdp_solver::{decide_cost_utility, decide_qualitative};
use costodds::rational::{Cost, Rational};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn deep_circuits_count_and_scale_exactly(seed in any::<u64>()) {
        let c = random_circuit(&mut rng(seed), 10, 5);
        for g in 0..c.len() {
            let dfa = circuit_to_dfa(&c, g).unwrap();
            let want = circuit_value(&c, g);
            prop_assert_eq!(count_parikh_paths(&dfa, dfa.input, dfa.output, &dfa.parikh).unwrap(), want.clone());
            let mut lifted = c.clone();
            let g = lifted.lift_to_odd(g);
            let cert = circuit_to_chain(&lifted, g).unwrap();
            let chain = cert.chain.validated().unwrap();
            let p = solve_chain(&chain, &CostFormula::eq(cert.target)).unwrap();
            prop_assert_eq!(p * Rational::from_integer(cert.scale.value().into()), Rational::from_integer(want.into()));
        }
    }

    #[test]
    fn posslp_chains_validate(seed in any::<u64>()) {
        let mut c = random_circuit(&mut rng(seed), 6, 3);
        let level = c.max_level();
        let gates: Vec<usize> = (0..c.len()).filter(|&g| c.level(g) == level).collect();
        let (a, b) = (gates[0], gates[gates.len() - 1]);
        let (a, b) = (c.lift_to_odd(a), c.lift_to_odd(b));
        prop_assert!(posslp_instance(&c, a, b).unwrap().chain.validated().is_ok());
    }

    #[test]
    fn qsubsetsum_gadgets_validate(k in prop::collection::vec(0u64..6, 1..4), t in 0u64..20) {
        let mut k = k;
        k.extend(k.clone());
        let inst = QSubsetSum { k: k.iter().map(|&x| Cost::from(x)).collect(), t: Cost::from(t) };
        let in_range = t <= k.len() as u64 * k.iter().max().unwrap();
        for built in [qsubsetsum_to_process(&inst), universal_qsubsetsum_to_process(&inst)] {
            match built {
                Ok(g) => {
                    prop_assert!(g.process.is_acyclic());
                    prop_assert!(g.process.validated().is_ok());
                }
                Err(_) => prop_assert!(!in_range),
            }
        }
    }

    #[test]
    fn countdown_gadgets_lift_to_cost_utility(seed in any::<u64>()) {
        let game = random_countdown(&mut rng(seed));
        let g = countdown_to_process(&game).unwrap();
        let p = g.process.clone().validated().unwrap();
        let qualitative = decide_qualitative(&p, &g.target).holds;
        prop_assert_eq!(qualitative, countdown_wins(&game));
        let lifted = qualitative_to_cost_utility(&g.process).validated().unwrap();
        prop_assert_eq!(decide_cost_utility(&lifted, &g.target, &g.target).holds, qualitative);
    }

    #[test]
    fn threshold_gadgets_validate(seed in any::<u64>(), num in 0i64..=10) {
        let mut r = rng(seed);
        let p = random_process(&mut r, &ProcSpec { states: 4, actions: 2, max_cost: 3, dens: &[2, 3] });
        let f = CostFormula::le(4u32);
        let out = threshold_to_half(&p, &f, &q(num, 10), &Cost::from(5u32), &Cost::from(0u32)).unwrap();
        prop_assert_eq!(out.is_chain(), p.is_chain());
        prop_assert!(out.validated().is_ok());
    }
}
