//! CFL-reachability over propagation graphs.
//!
//! Facts are triples `(v1, X, v2)` meaning some path from `v1` to `v2` spells
//! a string derivable from the symbol `X`. Every character derives itself,
//! so graph edges seed the table directly. Productions with long tails are
//! split into binary ones over fresh internal symbols.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use super::CfcstSystem;
use crate::sequent::{Label, PropGraph};
use crate::syntax::{Character, Str};

/// A propagation path `w0 c1 w1 c2 ... wn`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PathWitness {
    pub vertices: Vec<Label>,
    pub chars: Vec<Character>,
}

impl PathWitness {
    /// The empty path at `w`, whose string is ε.
    pub fn empty(w: Label) -> Self {
        PathWitness { vertices: vec![w], chars: vec![] }
    }

    pub fn start(&self) -> Label {
        self.vertices[0]
    }

    pub fn end(&self) -> Label {
        *self.vertices.last().expect("a path has at least one vertex")
    }

    pub fn string(&self) -> Str {
        Str(self.chars.clone())
    }

    pub fn edges(&self) -> impl Iterator<Item = (Label, Label, &Character)> + '_ {
        self.chars.iter().enumerate().map(|(i, c)| (self.vertices[i], self.vertices[i + 1], c))
    }

    pub fn is_well_formed(&self) -> bool {
        !self.vertices.is_empty() && self.vertices.len() == self.chars.len() + 1
    }

    /// Every step is an edge of `g`.
    pub fn lies_in(&self, g: &PropGraph) -> bool {
        self.is_well_formed()
            && self.vertices.iter().all(|v| g.vertices.contains(v))
            && self.edges().all(|(a, b, c)| g.edges.contains(&(a, b, c.clone())))
    }

    /// Edge membership in `g` plus membership of the string in `L_S(x)`.
    pub fn validates(&self, g: &PropGraph, system: &CfcstSystem, x: &Character) -> bool {
        self.lies_in(g) && in_language(system, x, &self.string())
    }

    pub fn rename(&self, from: Label, to: Label) -> Self {
        let vertices = self.vertices.iter().map(|&v| if v == from { to } else { v }).collect();
        PathWitness { vertices, chars: self.chars.clone() }
    }
}

impl fmt::Display for PathWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.vertices[0])?;
        for (i, c) in self.chars.iter().enumerate() {
            write!(f, " {c} {}", self.vertices[i + 1])?;
        }
        Ok(())
    }
}

impl fmt::Debug for PathWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

type Sym = u32;

/// Binarised grammar: characters first, then internal symbols.
struct Compiled {
    sym_of: HashMap<Character, Sym>,
    char_of: Vec<Option<Character>>,
    eps: Vec<Sym>,
    unary: HashMap<Sym, Vec<Sym>>,
    by_left: HashMap<Sym, Vec<(Sym, Sym)>>,
    by_right: HashMap<Sym, Vec<(Sym, Sym)>>,
}

impl Compiled {
    fn new<'a>(system: &'a CfcstSystem, extra: impl IntoIterator<Item = &'a Character>) -> Self {
        let mut c = Compiled {
            sym_of: HashMap::new(),
            char_of: Vec::new(),
            eps: Vec::new(),
            unary: HashMap::new(),
            by_left: HashMap::new(),
            by_right: HashMap::new(),
        };
        for ch in system.alphabet().iter().chain(extra) {
            c.intern(ch);
        }
        for rule in system.rules() {
            let head = c.intern(&rule.head);
            let tail: Vec<Sym> = rule.tail.0.iter().map(|ch| c.intern(ch)).collect();
            match tail.as_slice() {
                [] => c.eps.push(head),
                [one] => c.unary.entry(*one).or_default().push(head),
                [first, rest @ ..] => {
                    let mut left = *first;
                    for (i, &right) in rest.iter().enumerate() {
                        let target = if i + 1 == rest.len() { head } else { c.fresh() };
                        c.by_left.entry(left).or_default().push((target, right));
                        c.by_right.entry(right).or_default().push((target, left));
                        left = target;
                    }
                }
            }
        }
        c
    }

    fn intern(&mut self, ch: &Character) -> Sym {
        if let Some(&s) = self.sym_of.get(ch) {
            return s;
        }
        let s = self.char_of.len() as Sym;
        self.char_of.push(Some(ch.clone()));
        self.sym_of.insert(ch.clone(), s);
        s
    }

    fn fresh(&mut self) -> Sym {
        self.char_of.push(None);
        (self.char_of.len() - 1) as Sym
    }
}

#[derive(Clone, Copy)]
enum Back {
    Edge,
    Eps,
    Unit(Sym),
    Bin { mid: u32, left: Sym, right: Sym },
}

type Fact = (u32, Sym, u32);

/// Saturated CFL-reachability table for one graph under one system.
pub struct Reachability {
    grammar: Compiled,
    index: HashMap<Label, u32>,
    labels: Vec<Label>,
    facts: HashMap<Fact, Back>,
    out: HashMap<(u32, Sym), Vec<u32>>,
    inc: HashMap<(Sym, u32), Vec<u32>>,
}

impl Reachability {
    pub fn new(g: &PropGraph, system: &CfcstSystem) -> Self {
        let labels: Vec<Label> = g.vertices.iter().copied().collect();
        let edges = g.edges.iter().map(|(a, b, c)| (*a, *b, c.clone())).collect::<Vec<_>>();
        Self::from_edges(labels, &edges, system)
    }

    fn from_edges(labels: Vec<Label>, edges: &[(Label, Label, Character)], system: &CfcstSystem) -> Self {
        let grammar = Compiled::new(system, edges.iter().map(|e| &e.2));
        let index = labels.iter().enumerate().map(|(i, l)| (*l, i as u32)).collect();
        let mut r = Reachability {
            grammar,
            index,
            labels,
            facts: HashMap::new(),
            out: HashMap::new(),
            inc: HashMap::new(),
        };
        r.saturate(edges);
        r
    }

    fn saturate(&mut self, edges: &[(Label, Label, Character)]) {
        let mut work = VecDeque::new();
        for (a, b, c) in edges {
            let fact = (self.index[a], self.grammar.sym_of[c], self.index[b]);
            self.add(fact, Back::Edge, &mut work);
        }
        for v in 0..self.labels.len() as u32 {
            for x in self.grammar.eps.clone() {
                self.add((v, x, v), Back::Eps, &mut work);
            }
        }
        while let Some((a, x, b)) = work.pop_front() {
            if let Some(heads) = self.grammar.unary.get(&x).cloned() {
                for h in heads {
                    self.add((a, h, b), Back::Unit(x), &mut work);
                }
            }
            if let Some(rules) = self.grammar.by_left.get(&x).cloned() {
                for (h, right) in rules {
                    let ends = self.out.get(&(b, right)).cloned().unwrap_or_default();
                    for c in ends {
                        self.add((a, h, c), Back::Bin { mid: b, left: x, right }, &mut work);
                    }
                }
            }
            if let Some(rules) = self.grammar.by_right.get(&x).cloned() {
                for (h, left) in rules {
                    let starts = self.inc.get(&(left, a)).cloned().unwrap_or_default();
                    for z in starts {
                        self.add((z, h, b), Back::Bin { mid: a, left, right: x }, &mut work);
                    }
                }
            }
        }
    }

    fn add(&mut self, fact: Fact, back: Back, work: &mut VecDeque<Fact>) {
        if self.facts.contains_key(&fact) {
            return;
        }
        self.facts.insert(fact, back);
        let (a, x, b) = fact;
        self.out.entry((a, x)).or_default().push(b);
        self.inc.entry((x, b)).or_default().push(a);
        work.push_back(fact);
    }

    fn rebuild(&self, (a, x, b): Fact, path: &mut PathWitness) {
        match self.facts[&(a, x, b)] {
            Back::Edge => {
                let c = self.grammar.char_of[x as usize].clone().expect("edges carry characters");
                path.chars.push(c);
                path.vertices.push(self.labels[b as usize]);
            }
            Back::Eps => {}
            Back::Unit(y) => self.rebuild((a, y, b), path),
            Back::Bin { mid, left, right } => {
                self.rebuild((a, left, mid), path);
                self.rebuild((mid, right, b), path);
            }
        }
    }

    /// A path from `w` to `u` whose string lies in `L_S(x)`, if one exists.
    pub fn query(&self, x: &Character, w: Label, u: Label) -> Option<PathWitness> {
        let sym = *self.grammar.sym_of.get(x)?;
        let (a, b) = (*self.index.get(&w)?, *self.index.get(&u)?);
        self.facts.get(&(a, sym, b))?;
        let mut path = PathWitness::empty(w);
        self.rebuild((a, sym, b), &mut path);
        Some(path)
    }

    pub fn holds(&self, x: &Character, w: Label, u: Label) -> bool {
        let (Some(sym), Some(a), Some(b)) = (self.grammar.sym_of.get(x), self.index.get(&w), self.index.get(&u)) else {
            return false;
        };
        self.facts.contains_key(&(*a, *sym, *b))
    }

    /// Labels reachable from `w` by an `x`-path, in label order.
    pub fn targets(&self, x: &Character, w: Label) -> Vec<Label> {
        let (Some(sym), Some(a)) = (self.grammar.sym_of.get(x), self.index.get(&w)) else {
            return Vec::new();
        };
        let mut out: Vec<Label> = self
            .out
            .get(&(*a, *sym))
            .map(|v| v.iter().map(|&i| self.labels[i as usize]).collect())
            .unwrap_or_default();
        out.sort();
        out
    }
}

/// Decides whether `x` derives the path string `s`.
pub fn in_language(system: &CfcstSystem, x: &Character, s: &Str) -> bool {
    let labels: Vec<Label> = (0..=s.len() as u32).map(Label).collect();
    let edges: Vec<_> = s.0.iter().enumerate().map(|(i, c)| (labels[i], labels[i + 1], c.clone())).collect();
    let table = Reachability::from_edges(labels, &edges, system);
    table.holds(x, Label(0), Label(s.len() as u32))
}

/// One-shot query; see [`Reachability`] for repeated use.
pub fn reachable(g: &PropGraph, system: &CfcstSystem, x: &Character, w: Label, u: Label) -> Option<PathWitness> {
    Reachability::new(g, system).query(x, w, u)
}

/// Saturations memoised per graph for a fixed system.
pub struct ReachCache {
    system: CfcstSystem,
    tables: Mutex<HashMap<PropGraph, Arc<Reachability>>>,
}

impl ReachCache {
    pub fn new(system: CfcstSystem) -> Self {
        ReachCache { system, tables: Mutex::new(HashMap::new()) }
    }

    pub fn system(&self) -> &CfcstSystem {
        &self.system
    }

    pub fn get(&self, g: &PropGraph) -> Arc<Reachability> {
        let mut tables = self.tables.lock().expect("cache lock poisoned");
        if let Some(t) = tables.get(g) {
            return t.clone();
        }
        let t = Arc::new(Reachability::new(g, &self.system));
        tables.insert(g.clone(), t.clone());
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequent::{LabelledSequent, RelAtom};

    fn c(s: &str) -> Character {
        s.parse().unwrap()
    }

    fn graph(atoms: &[(&str, u32, u32)]) -> PropGraph {
        let mut seq = LabelledSequent::default();
        for (x, a, b) in atoms {
            seq.atoms.insert(RelAtom::G(c(x), Label(*a), Label(*b)));
        }
        seq.propagation_graph()
    }

    #[test]
    fn empty_system_follows_single_edges() {
        let g = graph(&[("a", 0, 1)]);
        let s = CfcstSystem::empty();
        let p = reachable(&g, &s, &c("a"), Label(0), Label(1)).unwrap();
        assert_eq!(p.to_string(), "w0 a w1");
        assert!(reachable(&g, &s, &c("a"), Label(1), Label(0)).is_none());
        assert!(reachable(&g, &s, &c("a'"), Label(1), Label(0)).is_some());
    }

    #[test]
    fn worked_propagation_example() {
        // w = 0, v = 1, u = 2, z = 3
        let g = graph(&[("a", 0, 1), ("b'", 2, 1), ("c", 3, 1)]);
        assert_eq!(g.edges.len(), 6);
        let s = CfcstSystem::parse("alphabet: a b c\na -> a b b' c'\n", true).unwrap();
        let p = reachable(&g, &s, &c("a"), Label(0), Label(3)).unwrap();
        assert_eq!(p.to_string(), "w0 a w1 b w2 b' w1 c' w3");
        assert!(p.validates(&g, &s, &c("a")));
    }

    #[test]
    fn epsilon_rules_give_empty_paths() {
        let g = graph(&[("a", 0, 1)]);
        let s = CfcstSystem::parse("alphabet: a\na -> eps\n", true).unwrap();
        let p = reachable(&g, &s, &c("a"), Label(1), Label(1)).unwrap();
        assert!(p.chars.is_empty());
        assert!(in_language(&s, &c("a"), &Str::epsilon()));
    }

    #[test]
    fn membership_matches_derivations() {
        let s4 = CfcstSystem::s4("a");
        let aaa = Str::parse_spaced("a a a").unwrap();
        assert!(in_language(&s4, &c("a"), &aaa));
        assert!(!in_language(&s4, &c("a"), &Str::parse_spaced("a a'").unwrap()));
    }
}
