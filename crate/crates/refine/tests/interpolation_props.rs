mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use refine::calculus::{check_proof, prove_bounded, Budget, Verdict};
use refine::fixtures::{random_grammar_formula, random_system};
use refine::grammar::CfcstSystem;
use refine::interpolation::{
    annotate, lyndon_interpolate, orthogonal, FlatSequent, InterpNode, InterpOutcome, Interpolant, Step,
};
use refine::sequent::{Label, LabelledFormula};
use refine::syntax::{negate, Character, Formula};

const BUDGET: Budget = Budget { max_labels: 10, max_steps: 3_000 };

/// A valid implication built from random parts.
fn implication(rng: &mut ChaCha8Rng) -> (CfcstSystem, Formula, Formula) {
    let sys = random_system(rng, 2, 2);
    let chars: Vec<Character> = sys.alphabet().iter().cloned().collect();
    let part = |rng: &mut ChaCha8Rng| random_grammar_formula(rng, &chars, &["p", "q", "r"], 2);
    let (a, b, c) = (part(rng), part(rng), part(rng));
    let x = chars.choose(rng).expect("nonempty").clone();
    let (phi, psi) = match rng.random_range(0..4) {
        0 => (Formula::and(a.clone(), b), Formula::or(a, c)),
        1 => (Formula::boxed(x.clone(), Formula::and(a.clone(), b)), Formula::or(Formula::boxed(x, a), c)),
        2 => (Formula::and(Formula::dia(x.clone(), a.clone()), b.clone()), Formula::or(Formula::dia(x, Formula::or(a, c)), b)),
        _ => (a.clone(), a),
    };
    (sys, phi, psi)
}

fn interpolant_labels(i: &Interpolant) -> BTreeSet<Label> {
    i.iter().flatten().map(|lf| lf.label).collect()
}

fn check_labels(node: &InterpNode) -> Result<usize, TestCaseError> {
    let own = node.sequent().labels();
    prop_assert!(interpolant_labels(&node.interpolant).is_subset(&own), "interpolant labels escape {:?}", own);
    Ok(1 + match &node.step {
        Step::Orth(inner) => check_labels(inner)?,
        Step::Rule { premises, .. } => premises.iter().map(check_labels).sum::<Result<usize, _>>()?,
    })
}

/// Whether resolution on complementary labelled formulas derives the empty clause.
fn refutable(clauses: &Interpolant) -> bool {
    let neg = |lf: &LabelledFormula| LabelledFormula::new(lf.label, negate(&lf.formula));
    let mut known: BTreeSet<FlatSequent> = clauses.clone();
    loop {
        if known.contains(&FlatSequent::new()) {
            return true;
        }
        let mut fresh = Vec::new();
        for a in &known {
            for b in &known {
                for l in a {
                    if b.contains(&neg(l)) {
                        let r: FlatSequent = a.iter().filter(|x| *x != l).chain(b.iter().filter(|x| **x != neg(l))).cloned().collect();
                        if !known.contains(&r) {
                            fresh.push(r);
                        }
                    }
                }
            }
        }
        if fresh.is_empty() {
            return false;
        }
        known.extend(fresh);
    }
}

fn small_interpolant() -> impl Strategy<Value = Interpolant> {
    let pool = vec!["p", "~p", "q", "<a>p", "[a]~p", "top", "bot"];
    let lf = (0u32..2, prop::sample::select(pool))
        .prop_map(|(w, f)| LabelledFormula::new(Label(w), refine::syntax::parse(f).unwrap()));
    prop::collection::btree_set(prop::collection::btree_set(lf, 0..=2), 0..=3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn interpolants_satisfy_lyndon_and_come_with_proofs(mut rng in common::rng()) {
        let (sys, phi, psi) = implication(&mut rng);
        match lyndon_interpolate(&sys, &phi, &psi, BUDGET).unwrap() {
            InterpOutcome::Found(r) => {
                let (lp, lq) = (common::lits(&phi), common::lits(&psi));
                for l in common::lits(&r.chi) {
                    prop_assert!(lp.contains(&l) && lq.contains(&l), "{:?} of {} not shared by {} and {}", l, r.chi, phi, psi);
                }
                let w0 = Label(0);
                for (p, end) in [(&r.left_proof, Formula::implies(phi.clone(), r.chi.clone())), (&r.right_proof, Formula::implies(r.chi.clone(), psi.clone()))] {
                    prop_assert!(check_proof(&sys, p).is_ok());
                    prop_assert!(p.conclusion.atoms.is_empty());
                    prop_assert_eq!(p.conclusion.formulas.iter().cloned().collect::<Vec<_>>(), vec![LabelledFormula::new(w0, end)]);
                }
                prop_assert_eq!(r.literal_audit.len(), common::lits(&r.chi).len());
            }
            InterpOutcome::Unknown(_) => {}
            InterpOutcome::NotDerivable { .. } => prop_assert!(false, "{} -> {} is valid", phi, psi),
        }
    }

    #[test]
    fn annotation_keeps_labels_local(mut rng in common::rng()) {
        let (sys, phi, psi) = implication(&mut rng);
        if let Verdict::Valid(p) = prove_bounded(&sys, &Formula::implies(phi, psi), BUDGET) {
            let left: BTreeSet<LabelledFormula> =
                p.conclusion.formulas.iter().filter(|_| rng.random_bool(0.5)).cloned().collect();
            let node = annotate(&sys, &p, &left).unwrap();
            prop_assert!(check_labels(&node)? >= p.size());
        }
    }

    #[test]
    fn a_set_and_its_orthogonal_are_jointly_refutable(i in small_interpolant()) {
        let o = orthogonal(&i);
        prop_assert_eq!(&o, &common::orth_oracle(&i));
        let both: Interpolant = i.union(&o).cloned().collect();
        prop_assert!(refutable(&both), "{:?} with {:?}", i, o);
    }
}
