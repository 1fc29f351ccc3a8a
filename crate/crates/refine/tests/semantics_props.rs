mod common;

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use refine::fixtures::{ds_axioms, grammar_axioms, random_system};
use refine::grammar::CfcstSystem;
use refine::semantics::{ds_globally_true, random_ds_models, random_sigma_models, saturate, sigma_globally_true, validate_ds, ModelBounds, SigmaModel};
use refine::sequent::Label;

/// An unsaturated model with random relations over the system's alphabet.
fn raw_model(rng: &mut ChaCha8Rng, sys: &CfcstSystem) -> SigmaModel {
    let n = rng.random_range(1..=4u32);
    let mut m = SigmaModel { worlds: (0..n).map(Label).collect(), ..SigmaModel::default() };
    for c in sys.alphabet() {
        let pairs: BTreeSet<(Label, Label)> = (0..rng.random_range(0..=3))
            .map(|_| (Label(rng.random_range(0..n)), Label(rng.random_range(0..n))))
            .collect();
        m.relations.insert(c.clone(), pairs);
    }
    m.valuation = BTreeMap::from([("p".into(), m.worlds.iter().copied().filter(|_| rng.random_bool(0.5)).collect())]);
    m
}

fn below(a: &SigmaModel, b: &SigmaModel) -> bool {
    a.relations.iter().all(|(c, r)| r.iter().all(|p| b.relations.get(c).is_some_and(|s| s.contains(p))))
}

fn bounds() -> ModelBounds {
    ModelBounds { max_worlds: 4, atoms: vec!["p".into(), "q".into()], density: 0.35 }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn saturation_is_idempotent_and_closed(mut rng in common::rng()) {
        let sys = random_system(&mut rng, 3, 3);
        let s = saturate(&sys, &raw_model(&mut rng, &sys));
        prop_assert!(s.converse_closed() && s.satisfies(&sys));
        prop_assert_eq!(saturate(&sys, &s), s);
    }

    #[test]
    fn saturation_is_monotone(mut rng in common::rng()) {
        let sys = random_system(&mut rng, 3, 3);
        let small = raw_model(&mut rng, &sys);
        let mut big = small.clone();
        let n = small.worlds.len() as u32;
        for (_, r) in big.relations.iter_mut() {
            r.insert((Label(rng.random_range(0..n)), Label(rng.random_range(0..n))));
        }
        let (a, b) = (saturate(&sys, &small), saturate(&sys, &big));
        prop_assert!(below(&small, &a));
        prop_assert!(below(&a, &b));
    }

    #[test]
    fn grammar_axioms_hold_on_saturated_models(seed in any::<u64>(), mut rng in common::rng()) {
        let sys = random_system(&mut rng, 3, 3);
        let axioms = grammar_axioms(&sys);
        for m in random_sigma_models(seed, bounds(), &sys, BTreeSet::new()).take(5) {
            for a in &axioms {
                prop_assert!(sigma_globally_true(&m, &a.formula), "{} fails on {:?}", a.name, m);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn ds_axioms_hold_on_random_models(seed in any::<u64>(), k in 0usize..=2) {
        let axioms = ds_axioms(k);
        for m in random_ds_models(seed, bounds(), k).take(3) {
            prop_assert!(validate_ds(&m).is_ok());
            for a in &axioms {
                prop_assert!(ds_globally_true(&m, &a.formula), "{} fails on {:?}", a.name, m);
            }
        }
    }
}
