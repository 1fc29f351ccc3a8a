//! Independent oracles shared by the integration tests. Nothing here calls
//! the code it is used to check.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashSet};

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use refine::grammar::CfcstSystem;
use refine::interpolation::{FlatSequent, Interpolant};
use refine::sequent::{Label, LabelledFormula, LabelledSequent, PropGraph, RelAtom};
use refine::syntax::{Atom, Character, Formula};

/// Truth value of a modality-free formula.
pub fn eval_prop(f: &Formula, v: &BTreeMap<Atom, bool>) -> bool {
    match f {
        Formula::Lit(a, pos) => v.get(a).copied().unwrap_or(false) == *pos,
        Formula::Top => true,
        Formula::Bot => false,
        Formula::Or(a, b) => eval_prop(a, v) || eval_prop(b, v),
        Formula::And(a, b) => eval_prop(a, v) && eval_prop(b, v),
        other => panic!("not propositional: {other}"),
    }
}

/// Truth-table equivalence over the given atoms.
pub fn prop_equivalent(a: &Formula, b: &Formula, atoms: &[&str]) -> bool {
    (0..1u32 << atoms.len()).all(|bits| {
        let v: BTreeMap<Atom, bool> = atoms.iter().enumerate().map(|(i, n)| (Atom::from(*n), bits >> i & 1 == 1)).collect();
        eval_prop(a, &v) == eval_prop(b, &v)
    })
}

/// Literals with polarity, collected by direct recursion.
pub fn lits(f: &Formula) -> BTreeSet<(Atom, bool)> {
    let mut out = BTreeSet::new();
    fn go(f: &Formula, out: &mut BTreeSet<(Atom, bool)>) {
        match f {
            Formula::Lit(a, p) => {
                out.insert((a.clone(), *p));
            }
            Formula::Top | Formula::Bot => {}
            Formula::Or(a, b) | Formula::And(a, b) => {
                go(a, out);
                go(b, out);
            }
            Formula::GDia(_, a)
            | Formula::GBox(_, a)
            | Formula::SDia(a)
            | Formula::SBox(a)
            | Formula::CDia(a)
            | Formula::CBox(a)
            | Formula::ODia(a)
            | Formula::OBox(a) => go(a, out),
        }
    }
    go(f, &mut out);
    out
}

/// Every string derivable from `x` in at most `max_steps` rewrites whose
/// length is at most `max_len`. Intermediate strings are kept up to
/// `max_len + max_steps` characters.
pub fn derivable_strings(system: &CfcstSystem, x: &Character, max_steps: usize, max_len: usize) -> HashSet<Vec<Character>> {
    let cap = max_len + max_steps;
    let mut seen: HashSet<Vec<Character>> = HashSet::from([vec![x.clone()]]);
    let mut frontier = vec![vec![x.clone()]];
    for _ in 0..max_steps {
        let mut next = Vec::new();
        for s in &frontier {
            for i in 0..s.len() {
                for r in system.rules() {
                    if r.head != s[i] {
                        continue;
                    }
                    let mut t = s[..i].to_vec();
                    t.extend(r.tail.0.iter().cloned());
                    t.extend(s[i + 1..].iter().cloned());
                    if t.len() <= cap && seen.insert(t.clone()) {
                        next.push(t);
                    }
                }
            }
        }
        frontier = next;
    }
    seen.into_iter().filter(|s| s.len() <= max_len).collect()
}

/// Whether some path of length at most `max_len` from `w` to `u` spells a
/// string in `lang`.
pub fn path_oracle(g: &PropGraph, lang: &HashSet<Vec<Character>>, w: Label, u: Label, max_len: usize) -> bool {
    let prefixes: HashSet<Vec<Character>> = lang.iter().flat_map(|s| (0..=s.len()).map(move |i| s[..i].to_vec())).collect();
    let mut stack = vec![(w, Vec::<Character>::new())];
    while let Some((v, s)) = stack.pop() {
        if v == u && lang.contains(&s) {
            return true;
        }
        if s.len() == max_len {
            continue;
        }
        for (a, b, c) in &g.edges {
            if *a == v {
                let mut t = s.clone();
                t.push(c.clone());
                if prefixes.contains(&t) {
                    stack.push((*b, t));
                }
            }
        }
    }
    false
}

/// Whether `target` is derivable from `start`, by iterative deepening up to
/// `max_depth` rewrites.
pub fn derives_id(system: &CfcstSystem, start: &[Character], target: &[Character], max_depth: usize) -> bool {
    fn dfs(system: &CfcstSystem, s: &[Character], target: &[Character], depth: usize, slack: usize) -> bool {
        if s == target {
            return true;
        }
        if depth == 0 || s.len() > target.len() + slack * depth {
            return false;
        }
        for i in 0..s.len() {
            for r in system.rules() {
                if r.head == s[i] {
                    let mut t = s[..i].to_vec();
                    t.extend(r.tail.0.iter().cloned());
                    t.extend(s[i + 1..].iter().cloned());
                    if dfs(system, &t, target, depth - 1, slack) {
                        return true;
                    }
                }
            }
        }
        false
    }
    let slack = usize::from(system.rules().iter().any(|r| r.tail.0.is_empty()));
    (0..=max_depth).any(|d| dfs(system, start, target, d, slack))
}

/// The orthogonal by explicit enumeration of choice vectors.
pub fn orth_oracle(i: &Interpolant) -> Interpolant {
    let members: Vec<Vec<&LabelledFormula>> = i.iter().map(|s| s.iter().collect()).collect();
    if members.iter().any(|m| m.is_empty()) {
        return Interpolant::new();
    }
    let mut out = Interpolant::new();
    let mut idx = vec![0usize; members.len()];
    loop {
        let s: FlatSequent = members
            .iter()
            .zip(&idx)
            .map(|(m, &j)| LabelledFormula::new(m[j].label, refine::syntax::negate(&m[j].formula)))
            .collect();
        out.insert(s);
        let mut pos = 0;
        loop {
            if pos == idx.len() {
                return out;
            }
            idx[pos] += 1;
            if idx[pos] < members[pos].len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// A label-free canonical form of a tree sequent, or `None` if it is not a
/// tree: the root's formulas, then its children sorted by their own forms.
pub fn canonical_tree(seq: &LabelledSequent) -> Option<String> {
    let mut children: BTreeMap<Label, Vec<(Character, Label)>> = BTreeMap::new();
    let mut has_parent = BTreeSet::new();
    for a in &seq.atoms {
        let RelAtom::G(c, w, u) = a else { return None };
        children.entry(*w).or_default().push((c.clone(), *u));
        if !has_parent.insert(*u) {
            return None;
        }
    }
    let labels = seq.labels();
    let roots: Vec<Label> = labels.iter().copied().filter(|l| !has_parent.contains(l)).collect();
    let [root] = roots[..] else { return None };
    fn form(seq: &LabelledSequent, children: &BTreeMap<Label, Vec<(Character, Label)>>, w: Label, depth: usize) -> String {
        assert!(depth <= seq.labels().len(), "cycle");
        let fs: Vec<String> = seq.at(w).map(|f| f.to_string()).collect();
        let mut kids: Vec<String> = children
            .get(&w)
            .into_iter()
            .flatten()
            .map(|(c, u)| format!("{c}:{}", form(seq, children, *u, depth + 1)))
            .collect();
        kids.sort();
        format!("[{}|{}]", fs.join(","), kids.join(","))
    }
    Some(form(seq, &children, root, 0))
}

fn literal() -> impl Strategy<Value = Formula> {
    prop_oneof![
        6 => (prop::sample::select(vec!["p", "q", "r"]), any::<bool>()).prop_map(|(a, pos)| Formula::Lit(a.into(), pos)),
        1 => Just(Formula::Top),
        1 => Just(Formula::Bot),
    ]
}

/// Grammar formulas over `a`, `a'` and `b` with at most `depth` nested
/// constructors.
pub fn grammar_formula(depth: u32) -> impl Strategy<Value = Formula> {
    let chars = vec![Character::forward("a"), Character::backward("a"), Character::forward("b")];
    literal().prop_recursive(depth, 96, 2, move |inner| {
        let c = prop::sample::select(chars.clone());
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (c.clone(), inner.clone()).prop_map(|(c, a)| Formula::dia(c, a)),
            (c, inner).prop_map(|(c, a)| Formula::boxed(c, a)),
        ]
    })
}

/// STIT formulas with at most `depth` nested constructors.
pub fn stit_formula(depth: u32) -> impl Strategy<Value = Formula> {
    literal().prop_recursive(depth, 96, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            inner.clone().prop_map(Formula::settled),
            inner.clone().prop_map(Formula::settled_dia),
            inner.clone().prop_map(Formula::choice),
            inner.clone().prop_map(Formula::choice_dia),
            inner.clone().prop_map(Formula::ought),
            inner.prop_map(Formula::permitted),
        ]
    })
}

/// A seeded generator, for properties that use the crate's own samplers.
pub fn rng() -> impl Strategy<Value = ChaCha8Rng> {
    any::<u64>().prop_map(ChaCha8Rng::seed_from_u64)
}
