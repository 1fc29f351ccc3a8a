//! Labelled sequents `R |- Γ`, their graphs and shape classification.
//!
//! Sequents are kept as ordered sets. Duplicate relational atoms or labelled
//! formulas collapse; contraction is admissible in every calculus here, so
//! nothing provable is lost and equality is structural.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::syntax::{parse, Character, Formula, ParseError};

/// A label. Rendered as `w<n>`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label(pub u32);

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "w{}", self.0)
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SequentError {
    #[error("bad label `{0}` (labels are written w0, w1, ...)")]
    BadLabel(String),
    #[error("bad relational atom `{0}`")]
    BadAtom(String),
    #[error("bad labelled formula `{text}`: {source}")]
    BadFormula { text: String, source: ParseError },
    #[error("missing `|-`")]
    MissingTurnstile,
    #[error("sequent is not a labelled forest sequent")]
    NotForest,
}

impl FromStr for Label {
    type Err = SequentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.trim()
            .strip_prefix('w')
            .and_then(|n| n.parse().ok())
            .map(Label)
            .ok_or_else(|| SequentError::BadLabel(s.to_string()))
    }
}

macro_rules! string_serde {
    ($t:ty) => {
        impl Serialize for $t {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.collect_str(self)
            }
        }

        impl<'de> Deserialize<'de> for $t {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let s = String::deserialize(d)?;
                s.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

string_serde!(Label);
string_serde!(RelAtom);
string_serde!(LabelledFormula);

/// Relational atoms: `R_x wu` for grammar logics, `R_[0] wu` and `I w` for STIT.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RelAtom {
    G(Character, Label, Label),
    Choice(Label, Label),
    Ideal(Label),
}

impl RelAtom {
    pub fn labels(&self) -> Vec<Label> {
        match self {
            RelAtom::G(_, a, b) | RelAtom::Choice(a, b) => vec![*a, *b],
            RelAtom::Ideal(a) => vec![*a],
        }
    }

    pub fn rename(&self, from: Label, to: Label) -> Self {
        let r = |l: &Label| if *l == from { to } else { *l };
        match self {
            RelAtom::G(c, a, b) => RelAtom::G(c.clone(), r(a), r(b)),
            RelAtom::Choice(a, b) => RelAtom::Choice(r(a), r(b)),
            RelAtom::Ideal(a) => RelAtom::Ideal(r(a)),
        }
    }
}

impl fmt::Display for RelAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RelAtom::G(c, a, b) => write!(f, "R_{c}({a},{b})"),
            RelAtom::Choice(a, b) => write!(f, "R_[0]({a},{b})"),
            RelAtom::Ideal(a) => write!(f, "I({a})"),
        }
    }
}

impl fmt::Debug for RelAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for RelAtom {
    type Err = SequentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || SequentError::BadAtom(s.to_string());
        let s = s.trim();
        let open = s.find('(').ok_or_else(bad)?;
        let args = s[open + 1..].strip_suffix(')').ok_or_else(bad)?;
        let args: Vec<Label> = args.split(',').map(str::parse).collect::<Result<_, _>>()?;
        match (&s[..open], args.as_slice()) {
            ("I", [a]) => Ok(RelAtom::Ideal(*a)),
            ("R_[0]", [a, b]) => Ok(RelAtom::Choice(*a, *b)),
            (head, [a, b]) => {
                let c = head.strip_prefix("R_").ok_or_else(bad)?.parse().map_err(|_| bad())?;
                Ok(RelAtom::G(c, *a, *b))
            }
            _ => Err(bad()),
        }
    }
}

/// `w: φ`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LabelledFormula {
    pub label: Label,
    pub formula: Formula,
}

impl LabelledFormula {
    pub fn new(label: Label, formula: Formula) -> Self {
        LabelledFormula { label, formula }
    }
}

impl fmt::Display for LabelledFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.label, self.formula)
    }
}

impl fmt::Debug for LabelledFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for LabelledFormula {
    type Err = SequentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (l, f) = s.split_once(':').ok_or_else(|| SequentError::BadLabel(s.to_string()))?;
        let formula = parse(f).map_err(|source| SequentError::BadFormula { text: f.to_string(), source })?;
        Ok(LabelledFormula { label: l.parse()?, formula })
    }
}

/// `R |- Γ` with set semantics.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LabelledSequent {
    pub atoms: BTreeSet<RelAtom>,
    pub formulas: BTreeSet<LabelledFormula>,
}

/// Vertex decoration of a sequent graph.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VertexData {
    pub ideal: bool,
    pub formulas: BTreeSet<Formula>,
}

/// Edge tag: a character, or the agent's choice relation.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EdgeTag {
    Char(Character),
    Choice,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SequentGraph {
    pub vertices: BTreeSet<Label>,
    pub edges: BTreeSet<(Label, Label, EdgeTag)>,
    pub labeling: BTreeMap<Label, VertexData>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Tree,
    Forest,
    Dag,
    General,
}

/// Vertices are labels; each `R_x wu` contributes `(w,u,x)` and `(u,w,x')`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct PropGraph {
    pub vertices: BTreeSet<Label>,
    pub edges: BTreeSet<(Label, Label, Character)>,
}

impl LabelledSequent {
    pub fn new() -> Self {
        Self::default()
    }

    /// `∅ |- w: φ`.
    pub fn single(w: Label, f: Formula) -> Self {
        let mut s = Self::default();
        s.formulas.insert(LabelledFormula::new(w, f));
        s
    }

    pub fn with(mut self, w: Label, f: Formula) -> Self {
        self.formulas.insert(LabelledFormula::new(w, f));
        self
    }

    pub fn with_atom(mut self, a: RelAtom) -> Self {
        self.atoms.insert(a);
        self
    }

    pub fn contains(&self, w: Label, f: &Formula) -> bool {
        self.formulas.contains(&LabelledFormula::new(w, f.clone()))
    }

    pub fn has(&self, lf: &LabelledFormula) -> bool {
        self.formulas.contains(lf)
    }

    pub fn insert(&mut self, w: Label, f: Formula) -> bool {
        self.formulas.insert(LabelledFormula::new(w, f))
    }

    /// Lab(Λ): labels in atoms and formulas.
    pub fn labels(&self) -> BTreeSet<Label> {
        let mut out: BTreeSet<Label> = self.formulas.iter().map(|lf| lf.label).collect();
        for a in &self.atoms {
            out.extend(a.labels());
        }
        out
    }

    pub fn max_label(&self) -> Option<Label> {
        self.labels().into_iter().next_back()
    }

    /// Γ restricted to `w`.
    pub fn at(&self, w: Label) -> impl Iterator<Item = &Formula> + '_ {
        self.formulas.iter().filter(move |lf| lf.label == w).map(|lf| &lf.formula)
    }

    pub fn rename(&self, from: Label, to: Label) -> Self {
        LabelledSequent {
            atoms: self.atoms.iter().map(|a| a.rename(from, to)).collect(),
            formulas: self
                .formulas
                .iter()
                .map(|lf| LabelledFormula::new(if lf.label == from { to } else { lf.label }, lf.formula.clone()))
                .collect(),
        }
    }

    pub fn union(&self, other: &LabelledSequent) -> Self {
        LabelledSequent {
            atoms: self.atoms.union(&other.atoms).cloned().collect(),
            formulas: self.formulas.union(&other.formulas).cloned().collect(),
        }
    }

    pub fn sequent_graph(&self) -> SequentGraph {
        let vertices = self.labels();
        let mut labeling: BTreeMap<Label, VertexData> = vertices.iter().map(|&v| (v, VertexData::default())).collect();
        for lf in &self.formulas {
            labeling.get_mut(&lf.label).expect("label collected").formulas.insert(lf.formula.clone());
        }
        let mut edges = BTreeSet::new();
        for a in &self.atoms {
            match a {
                RelAtom::G(c, w, u) => {
                    edges.insert((*w, *u, EdgeTag::Char(c.clone())));
                }
                RelAtom::Choice(w, u) => {
                    edges.insert((*w, *u, EdgeTag::Choice));
                }
                RelAtom::Ideal(w) => labeling.get_mut(w).expect("label collected").ideal = true,
            }
        }
        SequentGraph { vertices, edges, labeling }
    }

    pub fn classify(&self) -> Shape {
        self.sequent_graph().classify()
    }

    pub fn propagation_graph(&self) -> PropGraph {
        let mut g = PropGraph { vertices: self.labels(), edges: BTreeSet::new() };
        for a in &self.atoms {
            if let RelAtom::G(c, w, u) = a {
                g.edges.insert((*w, *u, c.clone()));
                g.edges.insert((*u, *w, c.converse()));
            }
        }
        g
    }
}

impl SequentGraph {
    /// Roots of the graph (vertices without incoming edges).
    pub fn roots(&self) -> Vec<Label> {
        let targets: BTreeSet<Label> = self.edges.iter().map(|e| e.1).collect();
        self.vertices.iter().copied().filter(|v| !targets.contains(v)).collect()
    }

    fn acyclic(&self) -> bool {
        // Kahn's algorithm.
        let mut indeg: BTreeMap<Label, usize> = self.vertices.iter().map(|&v| (v, 0)).collect();
        for e in &self.edges {
            *indeg.get_mut(&e.1).expect("edge endpoints are vertices") += 1;
        }
        let mut ready: Vec<Label> = indeg.iter().filter(|(_, d)| **d == 0).map(|(v, _)| *v).collect();
        let mut seen = 0;
        while let Some(v) = ready.pop() {
            seen += 1;
            for e in self.edges.iter().filter(|e| e.0 == v) {
                let d = indeg.get_mut(&e.1).expect("edge endpoints are vertices");
                *d -= 1;
                if *d == 0 {
                    ready.push(e.1);
                }
            }
        }
        seen == self.vertices.len()
    }

    pub fn classify(&self) -> Shape {
        if !self.acyclic() {
            return Shape::General;
        }
        let mut indeg: BTreeMap<Label, usize> = BTreeMap::new();
        for e in &self.edges {
            *indeg.entry(e.1).or_default() += 1;
        }
        if indeg.values().any(|&d| d > 1) {
            return Shape::Dag;
        }
        if self.roots().len() == 1 {
            Shape::Tree
        } else {
            Shape::Forest
        }
    }
}

/// Equivalence classes of labels under undirected choice paths.
pub struct ChoiceClasses {
    index: BTreeMap<Label, usize>,
    uf: UnionFind<usize>,
}

impl ChoiceClasses {
    pub fn new<'a>(atoms: impl IntoIterator<Item = &'a RelAtom>) -> Self {
        let pairs: Vec<(Label, Label)> = atoms
            .into_iter()
            .filter_map(|a| match a {
                RelAtom::Choice(w, u) => Some((*w, *u)),
                _ => None,
            })
            .collect();
        let mut index = BTreeMap::new();
        for &(w, u) in &pairs {
            for l in [w, u] {
                let n = index.len();
                index.entry(l).or_insert(n);
            }
        }
        let mut uf = UnionFind::new(index.len());
        for (w, u) in pairs {
            uf.union(index[&w], index[&u]);
        }
        ChoiceClasses { index, uf }
    }

    /// `w ∼ u`: equal, or joined by choice atoms ignoring direction.
    pub fn same(&self, w: Label, u: Label) -> bool {
        if w == u {
            return true;
        }
        match (self.index.get(&w), self.index.get(&u)) {
            (Some(&a), Some(&b)) => self.uf.equiv(a, b),
            _ => false,
        }
    }

    /// The members of `w`'s class among `universe`.
    pub fn class_of<'a>(&'a self, w: Label, universe: &'a BTreeSet<Label>) -> impl Iterator<Item = Label> + 'a {
        universe.iter().copied().filter(move |&u| self.same(w, u))
    }
}

pub fn undirected_path<'a>(atoms: impl IntoIterator<Item = &'a RelAtom>, w: Label, u: Label) -> bool {
    ChoiceClasses::new(atoms).same(w, u)
}

/// One tree of the choice forest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChoiceTree {
    pub root: Label,
    pub labels: BTreeSet<Label>,
}

/// Splits the labels into the trees formed by choice atoms, ordered by root.
pub fn choice_trees(seq: &LabelledSequent) -> Result<Vec<ChoiceTree>, SequentError> {
    let labels = seq.labels();
    let mut parent: BTreeMap<Label, Label> = BTreeMap::new();
    for a in &seq.atoms {
        if let RelAtom::Choice(w, u) = a {
            if parent.insert(*u, *w).is_some() {
                return Err(SequentError::NotForest);
            }
        }
    }
    let mut trees: BTreeMap<Label, BTreeSet<Label>> = BTreeMap::new();
    for &l in &labels {
        let mut cur = l;
        let mut steps = 0;
        while let Some(&p) = parent.get(&cur) {
            cur = p;
            steps += 1;
            if steps > labels.len() {
                return Err(SequentError::NotForest);
            }
        }
        trees.entry(cur).or_default().insert(l);
    }
    Ok(trees.into_iter().map(|(root, labels)| ChoiceTree { root, labels }).collect())
}

impl fmt::Display for LabelledSequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let atoms: Vec<String> = self.atoms.iter().map(|a| a.to_string()).collect();
        let forms: Vec<String> = self.formulas.iter().map(|a| a.to_string()).collect();
        let left = atoms.join(", ");
        let right = forms.join(", ");
        match (left.is_empty(), right.is_empty()) {
            (true, true) => f.write_str("|-"),
            (true, false) => write!(f, "|- {right}"),
            (false, true) => write!(f, "{left} |-"),
            (false, false) => write!(f, "{left} |- {right}"),
        }
    }
}

impl fmt::Debug for LabelledSequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Splits on top-level commas (commas inside parentheses belong to atoms).
fn split_top(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out.into_iter().map(str::trim).filter(|p| !p.is_empty()).collect()
}

impl FromStr for LabelledSequent {
    type Err = SequentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (l, r) = s.split_once("|-").ok_or(SequentError::MissingTurnstile)?;
        let mut out = LabelledSequent::default();
        for a in split_top(l) {
            out.atoms.insert(a.parse()?);
        }
        for f in split_top(r) {
            out.formulas.insert(f.parse()?);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(s: &str) -> LabelledSequent {
        s.parse().unwrap()
    }

    #[test]
    fn text_round_trip() {
        let s = seq("R_a(w0,w1), R_[0](w0,w2), I(w3) |- w0: <a>p, w1: ~q | r");
        assert_eq!(s.to_string().parse::<LabelledSequent>().unwrap(), s);
        assert_eq!(seq("|-"), LabelledSequent::default());
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(serde_json::from_str::<LabelledSequent>(&json).unwrap(), s);
    }

    #[test]
    fn sequent_graph_example() {
        // w = 0, v = 1, u = 2, c = 3, p = 4
        let s = seq("R_b'(w0,w1), R_b(w0,w2), R_a(w2,w3), R_d'(w2,w4) |- w0: q, w0: r, w1: ~q, w2: q | r");
        let g = s.sequent_graph();
        assert_eq!(g.vertices.len(), 5);
        assert_eq!(g.edges.len(), 4);
        assert_eq!(g.labeling[&Label(0)].formulas.len(), 2);
        assert_eq!(s.classify(), Shape::Tree);
    }

    #[test]
    fn shapes() {
        assert_eq!(seq("|- w0: p").classify(), Shape::Tree);
        assert_eq!(seq("R_a(w0,w0) |-").classify(), Shape::General);
        assert_eq!(seq("R_a(w0,w1), R_a(w2,w1) |-").classify(), Shape::Dag);
        assert_eq!(seq("R_[0](w0,w1), R_[0](w2,w3) |-").classify(), Shape::Forest);
        let g = seq("R_a(w0,w0) |-").sequent_graph();
        assert_eq!(g.vertices.len(), 1);
        assert_eq!(g.edges.len(), 1);
    }

    #[test]
    fn propagation_graph_is_converse_symmetric() {
        let g = seq("R_a(w0,w0) |-").propagation_graph();
        let a: Character = "a".parse().unwrap();
        assert!(g.edges.contains(&(Label(0), Label(0), a.clone())));
        assert!(g.edges.contains(&(Label(0), Label(0), a.converse())));
        let empty = seq("|- w0: p, w1: q").propagation_graph();
        assert_eq!(empty.vertices.len(), 2);
        assert!(empty.edges.is_empty());
    }

    #[test]
    fn undirected_paths() {
        let atoms = seq("R_[0](w0,w1) |-").atoms;
        assert!(undirected_path(&atoms, Label(0), Label(1)));
        assert!(undirected_path(&atoms, Label(1), Label(0)));
        assert!(undirected_path(&atoms, Label(0), Label(0)));
        let none = BTreeSet::new();
        assert!(undirected_path(&none, Label(5), Label(5)));
        assert!(!undirected_path(&none, Label(0), Label(1)));
    }

    #[test]
    fn choice_tree_example() {
        // w=0 w1=1 w2=2 u=3 u1=4 v=5 v1=6
        let s = seq("I(w2), I(w3), I(w4), I(w5), R_[0](w0,w1), R_[0](w0,w2), R_[0](w3,w4), R_[0](w5,w6) |- w0: [*]r, w1: p, w4: q | <0>q, w5: p, w5: ~q, w6: [o]q");
        let trees = choice_trees(&s).unwrap();
        let roots: Vec<u32> = trees.iter().map(|t| t.root.0).collect();
        assert_eq!(roots, vec![0, 3, 5]);
        assert_eq!(trees[0].labels, [0, 1, 2].map(Label).into());
        let merged = s.clone().with_atom(RelAtom::Choice(Label(0), Label(3)));
        assert_eq!(choice_trees(&merged).unwrap().len(), 2);
        assert_eq!(choice_trees(&seq("|- w0: p")).unwrap().len(), 1);
        assert!(choice_trees(&seq("R_[0](w0,w1), R_[0](w1,w0) |-")).is_err());
    }
}
