//! Axiom corpora and seeded random generators.
//!
//! The generators take any [`Rng`], so a fixed seed gives a fixed stream.

use rand::seq::IndexedRandom;
use rand::Rng;

use crate::grammar::{build_system, CfcstSystem, Production};
use crate::sequent::{Label, LabelledSequent, RelAtom};
use crate::syntax::{negate, Character, Formula};

/// A named axiom instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub name: String,
    pub formula: Formula,
}

fn inst(name: impl Into<String>, formula: Formula) -> Instance {
    Instance { name: name.into(), formula }
}

/// Diamonds along a string: `<s1>...<sn>f`, and `f` for the empty string.
pub fn dia_string(s: &[Character], f: Formula) -> Formula {
    s.iter().rev().fold(f, |acc, c| Formula::dia(c.clone(), acc))
}

/// `p -> [x]<x'>p` for every character and `<s>p -> <x>p` for every rule `x -> s`.
pub fn grammar_axioms(system: &CfcstSystem) -> Vec<Instance> {
    let p = Formula::atom("p");
    let mut out: Vec<Instance> = system
        .alphabet()
        .iter()
        .map(|x| inst(format!("A2[{x}]"), Formula::implies(p.clone(), Formula::boxed(x.clone(), Formula::dia(x.converse(), p.clone())))))
        .collect();
    for r in system.rules() {
        let f = Formula::implies(dia_string(&r.tail.0, p.clone()), Formula::dia(r.head.clone(), p.clone()));
        out.push(inst(format!("A3[{r}]"), f));
    }
    out
}

/// Propositional tautologies over `p` and `q`.
pub fn tautologies() -> Vec<Formula> {
    let (p, q) = (Formula::atom("p"), Formula::atom("q"));
    let imp = Formula::implies;
    let or = Formula::or;
    let and = Formula::and;
    vec![
        or(p.clone(), negate(&p)),
        imp(p.clone(), imp(q.clone(), p.clone())),
        imp(imp(p.clone(), q.clone()), imp(negate(&q), negate(&p))),
        imp(and(p.clone(), q.clone()), p.clone()),
        imp(p.clone(), or(p.clone(), q.clone())),
        imp(imp(imp(p.clone(), q.clone()), p.clone()), p.clone()),
        imp(and(imp(p.clone(), q.clone()), p.clone()), q.clone()),
        imp(or(p.clone(), q.clone()), or(q.clone(), p.clone())),
    ]
}

fn substitutes() -> (Vec<Formula>, Vec<Formula>) {
    let (p, q) = (Formula::atom("p"), Formula::atom("q"));
    let first = vec![p.clone(), negate(&q), Formula::and(p.clone(), q.clone()), Formula::or(p.clone(), negate(&q))];
    let second = vec![q.clone(), negate(&p), Formula::or(p, q)];
    (first, second)
}

/// Instances of the deontic STIT axioms A0 to A12 over `p` and `q`, plus the
/// choice-bounding axiom A14 when `k > 0`.
pub fn ds_axioms(k: usize) -> Vec<Instance> {
    use Formula as F;
    let imp = F::implies;
    let (first, second) = substitutes();
    let mut out: Vec<Instance> = tautologies().into_iter().enumerate().map(|(i, f)| inst(format!("A0.{i}"), f)).collect();
    for a in &first {
        for b in &second {
            let k_axiom = |m: fn(F) -> F| imp(m(imp(a.clone(), b.clone())), imp(m(a.clone()), m(b.clone())));
            out.push(inst(format!("A1[{a}; {b}]"), k_axiom(F::settled)));
            out.push(inst(format!("A2[{a}; {b}]"), k_axiom(F::choice)));
            out.push(inst(format!("A3[{a}; {b}]"), k_axiom(F::ought)));
        }
    }
    for a in first.iter().chain(&second) {
        let a = a.clone();
        let unary = [
            ("A4", imp(F::settled(a.clone()), F::choice(a.clone()))),
            ("A5", imp(F::settled(a.clone()), F::ought(a.clone()))),
            ("A6", imp(F::settled(a.clone()), a.clone())),
            ("A7", imp(F::settled_dia(a.clone()), F::settled(F::settled_dia(a.clone())))),
            ("A8", imp(F::choice(a.clone()), a.clone())),
            ("A9", imp(F::choice_dia(a.clone()), F::choice(F::choice_dia(a.clone())))),
            ("A10", imp(F::ought(a.clone()), F::permitted(a.clone()))),
            ("A11", imp(F::settled_dia(F::ought(a.clone())), F::settled(F::ought(a.clone())))),
            ("A12", imp(F::ought(a.clone()), F::ought(F::choice(a.clone())))),
        ];
        out.extend(unary.into_iter().map(|(n, f)| inst(format!("{n}[{a}]"), f)));
    }
    if k > 0 {
        let pool: Vec<Formula> = first.iter().chain(&second).cloned().collect();
        for start in 0..pool.len() {
            let phis: Vec<Formula> = (0..k).map(|i| pool[(start + i) % pool.len()].clone()).collect();
            let names: Vec<String> = phis.iter().map(|f| f.to_string()).collect();
            out.push(inst(format!("A14[{}]", names.join("; ")), a14(&phis)));
        }
    }
    out
}

/// `<*>[0]f1 & <*>(~f1 & [0]f2) & ... -> f1 | ... | fk`.
pub fn a14(phis: &[Formula]) -> Formula {
    let conjuncts = (0..phis.len()).map(|i| {
        let earlier = phis[..i].iter().map(negate);
        Formula::settled_dia(Formula::big_and(earlier.chain([Formula::choice(phis[i].clone())])))
    });
    Formula::implies(Formula::big_and(conjuncts), Formula::big_or(phis.iter().cloned()))
}

const BASES: [&str; 4] = ["a", "b", "c", "d"];

/// A random closed system over at most `max_base` base characters with at
/// most `max_rules` productions before closing under converse.
pub fn random_system<R: Rng>(rng: &mut R, max_base: usize, max_rules: usize) -> CfcstSystem {
    let n = rng.random_range(1..=max_base.clamp(1, BASES.len()));
    let alphabet: Vec<Character> = BASES[..n].iter().flat_map(|b| [Character::forward(b), Character::backward(b)]).collect();
    let rules: Vec<Production> = (0..rng.random_range(0..=max_rules))
        .map(|_| {
            let head = alphabet.choose(rng).expect("nonempty").clone();
            let len = *[0usize, 1, 2, 2, 3].choose(rng).expect("nonempty");
            let tail: Vec<Character> = (0..len).map(|_| alphabet.choose(rng).expect("nonempty").clone()).collect();
            Production::new(head, tail)
        })
        .collect();
    build_system(alphabet, rules, true).expect("closed by construction")
}

/// A random grammar formula of modal and connective depth at most `depth`.
pub fn random_grammar_formula<R: Rng>(rng: &mut R, chars: &[Character], atoms: &[&str], depth: usize) -> Formula {
    if depth == 0 || rng.random_bool(0.25) {
        return random_literal(rng, atoms);
    }
    let sub = |rng: &mut R| random_grammar_formula(rng, chars, atoms, depth - 1);
    match rng.random_range(0..4) {
        0 => Formula::or(sub(rng), sub(rng)),
        1 => Formula::and(sub(rng), sub(rng)),
        n if chars.is_empty() => {
            if n == 2 {
                Formula::or(sub(rng), sub(rng))
            } else {
                Formula::and(sub(rng), sub(rng))
            }
        }
        2 => Formula::dia(chars.choose(rng).expect("nonempty").clone(), sub(rng)),
        _ => Formula::boxed(chars.choose(rng).expect("nonempty").clone(), sub(rng)),
    }
}

fn random_literal<R: Rng>(rng: &mut R, atoms: &[&str]) -> Formula {
    let a = atoms.choose(rng).expect("at least one atom");
    Formula::Lit((*a).into(), rng.random_bool(0.5))
}

/// A random STIT formula with complexity at most `depth` and at most
/// `max_binary` binary connectives.
pub fn random_stit_formula<R: Rng>(rng: &mut R, atoms: &[&str], depth: usize, max_binary: usize) -> Formula {
    let mut budget = max_binary;
    stit_rec(rng, atoms, depth, &mut budget)
}

fn stit_rec<R: Rng>(rng: &mut R, atoms: &[&str], depth: usize, budget: &mut usize) -> Formula {
    if depth == 0 || rng.random_bool(0.2) {
        return random_literal(rng, atoms);
    }
    let pick = rng.random_range(0..8);
    if pick < 2 && *budget > 0 && depth >= 1 {
        *budget -= 1;
        let a = stit_rec(rng, atoms, depth - 1, budget);
        let b = stit_rec(rng, atoms, depth - 1, budget);
        return if pick == 0 { Formula::or(a, b) } else { Formula::and(a, b) };
    }
    let body = stit_rec(rng, atoms, depth - 1, budget);
    match pick % 6 {
        0 => Formula::settled(body),
        1 => Formula::settled_dia(body),
        2 => Formula::choice(body),
        3 => Formula::choice_dia(body),
        4 => Formula::ought(body),
        _ => Formula::permitted(body),
    }
}

/// A random labelled tree sequent with at most `max_labels` labels. Labels
/// are drawn sparsely from `w0..w(3n)` so they are not in tree order.
pub fn random_tree_sequent<R: Rng>(rng: &mut R, chars: &[Character], atoms: &[&str], max_labels: usize) -> LabelledSequent {
    let n = rng.random_range(1..=max_labels.max(1));
    let mut pool: Vec<u32> = (0..(3 * n as u32)).collect();
    let mut names = Vec::with_capacity(n);
    for _ in 0..n {
        let i = rng.random_range(0..pool.len());
        names.push(Label(pool.swap_remove(i)));
    }
    let mut seq = LabelledSequent::new();
    for i in 1..n {
        let parent = names[rng.random_range(0..i)];
        let c = chars.choose(rng).expect("nonempty").clone();
        seq.atoms.insert(RelAtom::G(c, parent, names[i]));
    }
    for i in 0..rng.random_range(1..=2 * n) {
        let w = if i == 0 { names[0] } else { *names.choose(rng).expect("nonempty") };
        let f = random_grammar_formula(rng, chars, atoms, 2);
        seq.insert(w, f);
    }
    seq
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequent::Shape;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn corpora_have_expected_sizes() {
        let s4 = CfcstSystem::s4("a");
        assert_eq!(grammar_axioms(&s4).len(), 2 + 4);
        assert!(ds_axioms(0).iter().all(|i| !i.name.starts_with("A14")));
        assert_eq!(ds_axioms(2).iter().filter(|i| i.name.starts_with("A14")).count(), 7);
    }

    #[test]
    fn a14_shape() {
        let f = a14(&[Formula::atom("p"), Formula::atom("q")]);
        assert_eq!(f.to_string(), "[*]<0>~p | [*](p | <0>~q) | (p | q)");
    }

    #[test]
    fn generators_are_deterministic() {
        let mut a = ChaCha8Rng::seed_from_u64(3);
        let mut b = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            assert_eq!(random_system(&mut a, 4, 5), random_system(&mut b, 4, 5));
        }
        let chars = [Character::forward("a"), Character::backward("b")];
        for _ in 0..50 {
            let s = random_tree_sequent(&mut a, &chars, &["p"], 6);
            assert_eq!(s.classify(), Shape::Tree);
        }
    }
}
