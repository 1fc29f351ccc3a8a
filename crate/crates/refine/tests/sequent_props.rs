mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use refine::calculus::{to_labelled, to_nested, tree_isomorphic, NestedSequent};
use refine::fixtures::random_tree_sequent;
use refine::sequent::{undirected_path, Label, LabelledSequent, RelAtom, Shape};
use refine::syntax::{Character, Formula};

fn chars() -> Vec<Character> {
    vec![Character::forward("a"), Character::backward("a"), Character::forward("b")]
}

/// Applies a label bijection.
fn relabel(seq: &LabelledSequent, map: &BTreeMap<Label, Label>) -> LabelledSequent {
    let m = |l: &Label| map[l];
    let mut out = LabelledSequent::new();
    for a in &seq.atoms {
        out.atoms.insert(match a {
            RelAtom::G(c, w, u) => RelAtom::G(c.clone(), m(w), m(u)),
            RelAtom::Choice(w, u) => RelAtom::Choice(m(w), m(u)),
            RelAtom::Ideal(w) => RelAtom::Ideal(m(w)),
        });
    }
    for lf in &seq.formulas {
        out.insert(m(&lf.label), lf.formula.clone());
    }
    out
}

/// An arbitrary graph-shaped sequent on at most five labels.
fn random_graph_sequent(rng: &mut impl Rng) -> LabelledSequent {
    let n = rng.random_range(1..=5u32);
    let mut seq = LabelledSequent::new();
    seq.insert(Label(0), Formula::atom("p"));
    let cs = chars();
    for _ in 0..rng.random_range(0..=6) {
        let c = cs[rng.random_range(0..cs.len())].clone();
        seq.atoms.insert(RelAtom::G(c, Label(rng.random_range(0..n)), Label(rng.random_range(0..n))));
    }
    seq
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn shape_is_invariant_under_relabelling(mut rng in common::rng()) {
        let seq = if rng.random_bool(0.5) {
            random_tree_sequent(&mut rng, &chars(), &["p", "q"], 6)
        } else {
            random_graph_sequent(&mut rng)
        };
        let labels: Vec<Label> = seq.labels().into_iter().collect();
        let mut targets: Vec<Label> = (0..3 * labels.len() as u32).map(Label).collect();
        targets.shuffle(&mut rng);
        let map: BTreeMap<Label, Label> = labels.iter().copied().zip(targets).collect();
        let copy = relabel(&seq, &map);
        prop_assert_eq!(copy.classify(), seq.classify());
        if seq.classify() == Shape::Tree {
            prop_assert!(tree_isomorphic(&seq, &copy));
            prop_assert_eq!(common::canonical_tree(&seq), common::canonical_tree(&copy));
        }
    }

    #[test]
    fn text_and_json_round_trip(mut rng in common::rng()) {
        let seq = random_tree_sequent(&mut rng, &chars(), &["p", "q"], 6);
        prop_assert_eq!(seq.to_string().parse::<LabelledSequent>().unwrap(), seq.clone());
        let json = serde_json::to_string(&seq).unwrap();
        prop_assert_eq!(serde_json::from_str::<LabelledSequent>(&json).unwrap(), seq);
    }

    #[test]
    fn nested_translation_round_trips(mut rng in common::rng()) {
        let seq = random_tree_sequent(&mut rng, &chars(), &["p", "q"], 6);
        let n = to_nested(&seq).unwrap();
        let back = to_labelled(&n);
        prop_assert!(tree_isomorphic(&seq, &back));
        prop_assert_eq!(common::canonical_tree(&seq), common::canonical_tree(&back));
        prop_assert_eq!(to_nested(&back).unwrap(), n.clone());
        prop_assert_eq!(n.to_string().parse::<NestedSequent>().unwrap(), n);
    }

    #[test]
    fn choice_paths_form_an_equivalence(
        n in 1u32..=6,
        raw in prop::collection::vec((0u32..6, 0u32..6), 0..7),
    ) {
        let atoms: Vec<RelAtom> = raw.into_iter().map(|(a, b)| RelAtom::Choice(Label(a % n), Label(b % n))).collect();
        let r = |a: u32, b: u32| undirected_path(&atoms, Label(a), Label(b));
        for a in 0..n {
            prop_assert!(r(a, a));
            for b in 0..n {
                prop_assert_eq!(r(a, b), r(b, a));
                for c in 0..n {
                    prop_assert!(!(r(a, b) && r(b, c)) || r(a, c));
                }
            }
        }
    }
}
