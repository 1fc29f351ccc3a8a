mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;
use refine::semantics::{check_ds, validate_ds};
use refine::sequent::Label;
use refine::stit::{check_stit_proof, is_rooted_forest, prove_ds, prove_ds_with, DsVerdict};
use refine::syntax::{complexity, parse, Atom, Formula};

fn propositional(depth: u32) -> impl Strategy<Value = Formula> {
    let leaf = (prop::sample::select(vec!["p", "q", "r"]), any::<bool>()).prop_map(|(a, pos)| Formula::Lit(a.into(), pos));
    leaf.prop_recursive(depth, 64, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Formula::and(a, b)),
        ]
    })
}

fn tautology(f: &Formula) -> bool {
    let atoms = ["p", "q", "r"];
    (0..1u32 << atoms.len()).all(|bits| {
        let v: BTreeMap<Atom, bool> = atoms.iter().enumerate().map(|(i, n)| (Atom::from(*n), bits >> i & 1 == 1)).collect();
        common::eval_prop(f, &v)
    })
}

/// Boxes re-expand at every world a permission reaches, so counter-models
/// are not bounded by the number of modal subformulas plus two.
#[test]
fn counter_models_can_outgrow_the_subformula_count() {
    let f = parse("<o>[0][0][o]~q").unwrap();
    let run = prove_ds_with(1, &f, false);
    let DsVerdict::Refuted { model, .. } = run.verdict else { panic!("expected a refutation") };
    assert_eq!(f.modal_subformulas(), 4);
    assert_eq!(model.worlds.len(), 7);
    assert_eq!(run.stats.fresh_labels, 6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn verdicts_are_verified_and_bounded(f in common::stit_formula(5), k in 0usize..=2) {
        prop_assume!(complexity(&f) <= 8);
        let run = prove_ds_with(k, &f, false);
        let root = Label(0);
        match run.verdict {
            DsVerdict::Proved(p) => {
                prop_assert!(check_stit_proof(k, &p).is_ok());
                for n in p.nodes() {
                    prop_assert!(is_rooted_forest(&n.conclusion, root), "non-forest node {}", n.conclusion);
                }
            }
            DsVerdict::Refuted { model, world } => {
                prop_assert!(validate_ds(&model).is_ok());
                prop_assert_eq!(check_ds(&model, world, &f), Ok(false));
                // Worlds are the root plus the labels the search introduced.
                prop_assert!(model.worlds.len() <= run.stats.fresh_labels + 1);
            }
        }
        prop_assert!(run.stats.max_labels <= run.stats.fresh_labels + 1);
    }

    #[test]
    fn propositional_inputs_agree_with_truth_tables(f in propositional(5)) {
        prop_assert_eq!(prove_ds(0, &f).is_proved(), tautology(&f));
    }
}
