mod common;

use proptest::prelude::*;
use rand::Rng;
use refine::calculus::{
    check_proof, prove_bounded, translate_proof, tree_isomorphic, untranslate_proof, Budget, GrammarRule, Verdict,
};
use refine::fixtures::{random_grammar_formula, random_system};
use refine::semantics::{check_sigma, random_sigma_models, sigma_globally_true, ModelBounds};
use refine::sequent::{Label, Shape};
use refine::syntax::{negate, Character, Formula};

const BUDGET: Budget = Budget { max_labels: 12, max_steps: 4_000 };

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn verdicts_are_verified(mut rng in common::rng()) {
        let sys = random_system(&mut rng, 2, 3);
        let chars: Vec<Character> = sys.alphabet().iter().cloned().collect();
        let depth = rng.random_range(1..=3);
        let g = random_grammar_formula(&mut rng, &chars, &["p", "q"], depth);
        let h = random_grammar_formula(&mut rng, &chars, &["p", "q"], depth);
        // Half the cases are valid by construction, so proofs get exercised.
        let f = match rng.random_range(0..4) {
            0 => Formula::implies(g.clone(), Formula::or(h, g)),
            1 => Formula::or(Formula::and(h, g.clone()), negate(&g)),
            _ => g,
        };
        let root = Label(0);
        match prove_bounded(&sys, &f, BUDGET) {
            Verdict::Valid(p) => {
                prop_assert!(check_proof(&sys, &p).is_ok());
                prop_assert!(p.conclusion.contains(root, &f));
                for n in p.nodes() {
                    prop_assert_eq!(n.conclusion.classify(), Shape::Tree);
                    prop_assert_eq!(n.conclusion.sequent_graph().roots(), vec![root]);
                    if matches!(n.rule, GrammarRule::Dia { .. }) {
                        prop_assert_eq!(n.premises[0].conclusion.propagation_graph(), n.conclusion.propagation_graph());
                    }
                }
                let bounds = ModelBounds { max_worlds: 4, atoms: vec!["p".into(), "q".into()], density: 0.4 };
                for m in random_sigma_models(rng.random(), bounds, &sys, f.characters()).take(10) {
                    prop_assert!(sigma_globally_true(&m, &f), "{} fails on {:?}", f, m);
                }
                let nested = translate_proof(&p).unwrap();
                let back = untranslate_proof(&nested).unwrap();
                prop_assert!(check_proof(&sys, &back).is_ok());
                prop_assert!(tree_isomorphic(&back.conclusion, &p.conclusion));
                prop_assert_eq!(back.size(), p.size());
            }
            Verdict::Refuted { model, world } => {
                prop_assert!(model.converse_closed() && model.satisfies(&sys));
                prop_assert_eq!(check_sigma(&model, world, &f), Ok(false));
            }
            Verdict::Unknown(_) => {}
        }
    }

    #[test]
    fn proofs_survive_json(mut rng in common::rng()) {
        let sys = random_system(&mut rng, 2, 2);
        let chars: Vec<Character> = sys.alphabet().iter().cloned().collect();
        let g = random_grammar_formula(&mut rng, &chars, &["p"], 3);
        let f = Formula::or(negate(&g), g);
        if let Verdict::Valid(p) = prove_bounded(&sys, &f, BUDGET) {
            let json = serde_json::to_string(&p).unwrap();
            let q: refine::calculus::GrammarProof = serde_json::from_str(&json).unwrap();
            prop_assert!(check_proof(&sys, &q).is_ok());
            prop_assert_eq!(q, p);
        }
    }
}
