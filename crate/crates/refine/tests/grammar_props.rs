mod common;

use proptest::prelude::*;
use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use refine::fixtures::random_system;
use refine::grammar::{reachable, CfcstSystem};
use refine::sequent::{Label, LabelledSequent, PropGraph, RelAtom};
use refine::syntax::{Character, Formula};

const PATH_LEN: usize = 7;
const DERIVATION_STEPS: usize = 5;

struct Case {
    sys: CfcstSystem,
    seq: LabelledSequent,
    x: Character,
    n: u32,
}

fn case(rng: &mut ChaCha8Rng) -> Case {
    let sys = random_system(rng, 3, 3);
    let chars: Vec<Character> = sys.alphabet().iter().cloned().collect();
    let n = rng.random_range(1..=5u32);
    let mut seq = LabelledSequent::new();
    for w in 0..n {
        seq.insert(Label(w), Formula::atom("p"));
    }
    for _ in 0..rng.random_range(0..=7) {
        let c = chars.choose(rng).expect("nonempty").clone();
        seq.atoms.insert(RelAtom::G(c, Label(rng.random_range(0..n)), Label(rng.random_range(0..n))));
    }
    let x = chars.choose(rng).expect("nonempty").clone();
    Case { sys, seq, x, n }
}

fn pairs(n: u32) -> impl Iterator<Item = (Label, Label)> {
    (0..n).flat_map(move |w| (0..n).map(move |u| (Label(w), Label(u))))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn random_systems_pass_the_audit_and_round_trip(mut rng in common::rng()) {
        let sys = random_system(&mut rng, 4, 5);
        prop_assert!(sys.audit().is_ok());
        prop_assert_eq!(CfcstSystem::parse(&sys.to_text(), false).unwrap(), sys);
    }

    #[test]
    fn witnesses_lie_in_the_graph_and_derive(mut rng in common::rng()) {
        let c = case(&mut rng);
        let g = c.seq.propagation_graph();
        for (w, u) in pairs(c.n) {
            if let Some(p) = reachable(&g, &c.sys, &c.x, w, u) {
                prop_assert!(p.start() == w && p.end() == u && p.lies_in(&g));
                prop_assert!(common::derives_id(&c.sys, &[c.x.clone()], &p.string().0, 16), "{} does not derive {}", c.x, p);
            }
        }
    }

    #[test]
    fn every_oracle_path_is_found(mut rng in common::rng()) {
        let c = case(&mut rng);
        let g = c.seq.propagation_graph();
        let lang = common::derivable_strings(&c.sys, &c.x, DERIVATION_STEPS, PATH_LEN);
        for (w, u) in pairs(c.n) {
            if common::path_oracle(&g, &lang, w, u, PATH_LEN) {
                prop_assert!(reachable(&g, &c.sys, &c.x, w, u).is_some(), "missed {} -> {}", w, u);
            }
        }
    }

    #[test]
    fn adding_edges_keeps_paths(mut rng in common::rng()) {
        let c = case(&mut rng);
        let chars: Vec<Character> = c.sys.alphabet().iter().cloned().collect();
        let mut bigger = c.seq.clone();
        let extra = chars.choose(&mut rng).expect("nonempty").clone();
        bigger.atoms.insert(RelAtom::G(extra, Label(rng.random_range(0..c.n)), Label(rng.random_range(0..c.n))));
        let (g, h): (PropGraph, PropGraph) = (c.seq.propagation_graph(), bigger.propagation_graph());
        for (w, u) in pairs(c.n) {
            if reachable(&g, &c.sys, &c.x, w, u).is_some() {
                prop_assert!(reachable(&h, &c.sys, &c.x, w, u).is_some());
            }
        }
    }

    #[test]
    fn reachability_is_converse_symmetric(mut rng in common::rng()) {
        let c = case(&mut rng);
        let g = c.seq.propagation_graph();
        for (w, u) in pairs(c.n) {
            prop_assert_eq!(
                reachable(&g, &c.sys, &c.x, w, u).is_some(),
                reachable(&g, &c.sys, &c.x.converse(), u, w).is_some()
            );
        }
    }
}
