mod common;

use common::*;
use costodds::formula::CostFormula;
use costodds::rational::Cost;
use proptest::prelude::*;

fn sat_set(f: &CostFormula, upto: u64) -> Vec<bool> {
    (0..=upto).map(|c| f.satisfies(&Cost::from(c))).collect()
}

/// Rewrites `f` into an equivalent formula with a different tree.
fn rewrite(f: &CostFormula) -> CostFormula {
    match f {
        CostFormula::Atom(_) => f.clone().not().not(),
        CostFormula::Not(a) => rewrite(a).not(),
        CostFormula::And(a, b) => rewrite(a).not().or(rewrite(b).not()).not(),
        CostFormula::Or(a, b) => rewrite(b).or(rewrite(a)),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn equal_satisfying_sets_normalize_alike(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (f, bf) = random_formula(&mut r, 6);
        let (g, bg) = random_formula(&mut r, 6);
        let upto = bf.max(bg) as u64 + 1;
        let same = sat_set(&f, upto) == sat_set(&g, upto);
        prop_assert_eq!(same, f.normalize() == g.normalize());
        prop_assert_eq!(rewrite(&f).normalize(), f.normalize());
        let reparsed = CostFormula::parse(&f.to_string()).unwrap();
        prop_assert_eq!(reparsed.normalize(), f.normalize());
    }

    #[test]
    fn tail_is_constant(seed in any::<u64>()) {
        let (f, b) = random_formula(&mut rng(seed), 20);
        let edge = f.satisfies(&Cost::from(b + 1));
        for k in 1..=100u32 {
            prop_assert_eq!(f.satisfies(&Cost::from(b + k)), edge);
        }
    }

    #[test]
    fn negation_is_the_complement(seed in any::<u64>()) {
        let (f, b) = random_formula(&mut rng(seed), 10);
        let n = f.clone().not().normalize();
        prop_assert_eq!(&n, &f.normalize().complement());
        for c in 0..=b as u64 + 3 {
            let c = Cost::from(c);
            prop_assert_eq!(n.contains(&c), !f.normalize().contains(&c));
        }
    }
}
