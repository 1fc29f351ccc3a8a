//! Nested sequents and the notation change between labelled tree sequents
//! and nested sequents, for single sequents and for whole proofs.
//!
//! A nested node is addressed by the child indices leading to it from the
//! root; `[]` is the root. Children are kept in the order of their labels, so
//! `to_nested` is deterministic and `to_labelled` numbers nodes in preorder.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{GrammarProof, GrammarRule, Proof};
use crate::grammar::PathWitness;
use crate::sequent::{Label, LabelledSequent, RelAtom, Shape};
use crate::syntax::{Atom, Character, Formula};

pub type Address = Vec<usize>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NestedError {
    #[error("sequent is not a labelled tree sequent (shape {0:?})")]
    NotTree(Shape),
    #[error("sequent contains a non-grammar atom `{0}`")]
    NotGrammar(String),
    #[error("proof node {at:?} is not a labelled tree sequent")]
    NotTreeProof { at: Vec<usize> },
    #[error("no node at address {0:?}")]
    BadAddress(Address),
    #[error("cannot parse nested sequent: {0}")]
    Parse(String),
}

/// `Γ, (x1){X1}, ..., (xn){Xn}`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct NestedSequent {
    pub formulas: BTreeSet<Formula>,
    pub children: Vec<(Character, NestedSequent)>,
}

impl NestedSequent {
    pub fn leaf(formulas: impl IntoIterator<Item = Formula>) -> Self {
        NestedSequent { formulas: formulas.into_iter().collect(), children: Vec::new() }
    }

    pub fn at(&self, addr: &[usize]) -> Option<&NestedSequent> {
        match addr.split_first() {
            None => Some(self),
            Some((i, rest)) => self.children.get(*i)?.1.at(rest),
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        1 + self.children.iter().map(|(_, c)| c.size()).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.children.iter().map(|(_, c)| c.depth()).max().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.formulas.is_empty() && self.children.is_empty()
    }
}

impl fmt::Display for NestedSequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        let mut sep = |f: &mut fmt::Formatter<'_>| {
            if !std::mem::take(&mut first) {
                f.write_str(", ")?;
            }
            Ok(())
        };
        for phi in &self.formulas {
            sep(f)?;
            write!(f, "{phi}")?;
        }
        for (c, child) in &self.children {
            sep(f)?;
            write!(f, "({c}){{{child}}}")?;
        }
        Ok(())
    }
}

fn split_items(s: &str) -> Result<Vec<&str>, NestedError> {
    let mut out = Vec::new();
    let (mut paren, mut brace, mut start) = (0i32, 0i32, 0);
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => paren += 1,
            ')' => paren -= 1,
            '{' => brace += 1,
            '}' => brace -= 1,
            ',' if paren == 0 && brace == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
        if paren < 0 || brace < 0 {
            return Err(NestedError::Parse(format!("unbalanced bracket at byte {i}")));
        }
    }
    if paren != 0 || brace != 0 {
        return Err(NestedError::Parse("unbalanced brackets".into()));
    }
    out.push(&s[start..]);
    Ok(out.into_iter().map(str::trim).filter(|p| !p.is_empty()).collect())
}

impl FromStr for NestedSequent {
    type Err = NestedError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut out = NestedSequent::default();
        for item in split_items(s)? {
            // Formulas never contain braces, so a brace marks a child.
            if let Some(open) = item.find('{') {
                let head = item[..open].trim();
                let body = item[open + 1..]
                    .strip_suffix('}')
                    .ok_or_else(|| NestedError::Parse(format!("child `{item}` does not end in `}}`")))?;
                let c = head
                    .strip_prefix('(')
                    .and_then(|h| h.strip_suffix(')'))
                    .ok_or_else(|| NestedError::Parse(format!("child `{item}` lacks a `(x)` tag")))?;
                let c: Character = c.trim().parse().map_err(|e| NestedError::Parse(format!("{e}")))?;
                out.children.push((c, body.parse()?));
            } else {
                let f: Formula = item.parse().map_err(|e| NestedError::Parse(format!("{e}")))?;
                out.formulas.insert(f);
            }
        }
        Ok(out)
    }
}

impl Serialize for NestedSequent {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for NestedSequent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// Converts a labelled tree sequent, also returning the address of each label.
fn nest(seq: &LabelledSequent) -> Result<(NestedSequent, BTreeMap<Label, Address>), NestedError> {
    if let Some(a) = seq.atoms.iter().find(|a| !matches!(a, RelAtom::G(..))) {
        return Err(NestedError::NotGrammar(a.to_string()));
    }
    if seq.atoms.is_empty() && seq.formulas.is_empty() {
        return Ok((NestedSequent::default(), BTreeMap::new()));
    }
    let shape = seq.classify();
    if shape != Shape::Tree {
        return Err(NestedError::NotTree(shape));
    }
    let root = seq.sequent_graph().roots()[0];
    let mut kids: BTreeMap<Label, Vec<(Label, Character)>> = BTreeMap::new();
    for a in &seq.atoms {
        if let RelAtom::G(c, w, u) = a {
            kids.entry(*w).or_default().push((*u, c.clone()));
        }
    }
    for v in kids.values_mut() {
        v.sort();
    }
    let mut addrs = BTreeMap::new();
    fn build(
        w: Label,
        addr: Address,
        seq: &LabelledSequent,
        kids: &BTreeMap<Label, Vec<(Label, Character)>>,
        addrs: &mut BTreeMap<Label, Address>,
    ) -> NestedSequent {
        let mut node = NestedSequent::leaf(seq.at(w).cloned());
        for (i, (u, c)) in kids.get(&w).into_iter().flatten().enumerate() {
            let mut a = addr.clone();
            a.push(i);
            node.children.push((c.clone(), build(*u, a, seq, kids, addrs)));
        }
        addrs.insert(w, addr);
        node
    }
    let n = build(root, Vec::new(), seq, &kids, &mut addrs);
    Ok((n, addrs))
}

/// The nested sequent encoding a labelled tree sequent.
pub fn to_nested(seq: &LabelledSequent) -> Result<NestedSequent, NestedError> {
    nest(seq).map(|(n, _)| n)
}

/// Builds a labelled sequent from `x`, reading labels from `label_of`.
fn unnest_with(x: &NestedSequent, label_of: &BTreeMap<Address, Label>) -> Result<LabelledSequent, NestedError> {
    let mut out = LabelledSequent::new();
    let mut stack: Vec<(&NestedSequent, Address)> = vec![(x, Vec::new())];
    while let Some((node, addr)) = stack.pop() {
        let w = *label_of.get(&addr).ok_or_else(|| NestedError::BadAddress(addr.clone()))?;
        for f in &node.formulas {
            out.insert(w, f.clone());
        }
        for (i, (c, child)) in node.children.iter().enumerate() {
            let mut a = addr.clone();
            a.push(i);
            let u = *label_of.get(&a).ok_or_else(|| NestedError::BadAddress(a.clone()))?;
            out.atoms.insert(RelAtom::G(c.clone(), w, u));
            stack.push((child, a));
        }
    }
    Ok(out)
}

/// Labels nodes `w0, w1, ...` in preorder.
fn preorder_labels(x: &NestedSequent) -> BTreeMap<Address, Label> {
    let mut out = BTreeMap::new();
    let mut stack: Vec<(&NestedSequent, Address)> = vec![(x, Vec::new())];
    while let Some((node, addr)) = stack.pop() {
        out.insert(addr.clone(), Label(out.len() as u32));
        for (i, (_, child)) in node.children.iter().enumerate().rev() {
            let mut a = addr.clone();
            a.push(i);
            stack.push((child, a));
        }
    }
    out
}

/// The labelled tree sequent of a nested sequent; the root becomes `w0`.
pub fn to_labelled(x: &NestedSequent) -> LabelledSequent {
    unnest_with(x, &preorder_labels(x)).expect("every address is labelled")
}

/// A rule application in nested notation; labels are replaced by addresses.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule")]
pub enum NestedRule {
    Id { at: Address, atom: Atom },
    #[serde(rename = "TopR")]
    Top { at: Address },
    #[serde(rename = "OrR")]
    Or { at: Address, formula: Formula },
    #[serde(rename = "AndR")]
    And { at: Address, formula: Formula },
    /// `child` is the index of the new child in the premise.
    #[serde(rename = "BoxR")]
    Box { at: Address, formula: Formula, child: usize },
    #[serde(rename = "PrDia")]
    Dia { at: Address, formula: Formula, target: Address, path: Vec<Address>, chars: Vec<Character> },
}

impl NestedRule {
    pub fn name(&self) -> &'static str {
        match self {
            NestedRule::Id { .. } => "Id",
            NestedRule::Top { .. } => "TopR",
            NestedRule::Or { .. } => "OrR",
            NestedRule::And { .. } => "AndR",
            NestedRule::Box { .. } => "BoxR",
            NestedRule::Dia { .. } => "PrDia",
        }
    }
}

fn show_addr(a: &[usize]) -> String {
    let parts: Vec<String> = a.iter().map(|i| i.to_string()).collect();
    format!("[{}]", parts.join("."))
}

impl fmt::Display for NestedRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NestedRule::Id { at, atom } => write!(f, "Id {}:{atom}", show_addr(at)),
            NestedRule::Top { at } => write!(f, "TopR {}", show_addr(at)),
            NestedRule::Or { at, formula } | NestedRule::And { at, formula } => {
                write!(f, "{} {}: {formula}", self.name(), show_addr(at))
            }
            NestedRule::Box { at, formula, child } => write!(f, "BoxR {}: {formula} child {child}", show_addr(at)),
            NestedRule::Dia { at, formula, target, .. } => {
                write!(f, "PrDia {}: {formula} to {}", show_addr(at), show_addr(target))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NestedProof {
    #[serde(flatten)]
    pub rule: NestedRule,
    pub conclusion: NestedSequent,
    #[serde(default)]
    pub premises: Vec<NestedProof>,
}

impl NestedProof {
    pub fn height(&self) -> usize {
        1 + self.premises.iter().map(NestedProof::height).max().unwrap_or(0)
    }

    /// Indented text rendering, conclusion first.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let mut stack = vec![(self, 0usize)];
        while let Some((n, depth)) = stack.pop() {
            out.push_str(&format!("{:indent$}{}   [{}]\n", "", n.conclusion, n.rule, indent = depth * 2));
            for q in n.premises.iter().rev() {
                stack.push((q, depth + 1));
            }
        }
        out
    }
}

fn addr_of(map: &BTreeMap<Label, Address>, l: Label) -> Result<Address, NestedError> {
    map.get(&l).cloned().ok_or(NestedError::NotGrammar(format!("label {l} has no node")))
}

/// Rewrites every sequent of a labelled proof in nested notation.
pub fn translate_proof(p: &GrammarProof) -> Result<NestedProof, NestedError> {
    translate_at(p, &mut Vec::new())
}

fn translate_at(p: &GrammarProof, at: &mut Vec<usize>) -> Result<NestedProof, NestedError> {
    let (conclusion, map) = nest(&p.conclusion).map_err(|_| NestedError::NotTreeProof { at: at.clone() })?;
    let a = |l: Label| addr_of(&map, l);
    let rule = match &p.rule {
        GrammarRule::Id { label, atom } => NestedRule::Id { at: a(*label)?, atom: atom.clone() },
        GrammarRule::Top { label } => NestedRule::Top { at: a(*label)? },
        GrammarRule::Or { label, formula } => NestedRule::Or { at: a(*label)?, formula: formula.clone() },
        GrammarRule::And { label, formula } => NestedRule::And { at: a(*label)?, formula: formula.clone() },
        GrammarRule::Box { label, formula, fresh } => {
            let prem = p.premises.first().ok_or(NestedError::NotTreeProof { at: at.clone() })?;
            let (_, pmap) = nest(&prem.conclusion).map_err(|_| {
                let mut b = at.clone();
                b.push(0);
                NestedError::NotTreeProof { at: b }
            })?;
            let child = *addr_of(&pmap, *fresh)?.last().ok_or(NestedError::NotTreeProof { at: at.clone() })?;
            NestedRule::Box { at: a(*label)?, formula: formula.clone(), child }
        }
        GrammarRule::Dia { label, formula, target, path } => NestedRule::Dia {
            at: a(*label)?,
            formula: formula.clone(),
            target: a(*target)?,
            path: path.vertices.iter().map(|v| a(*v)).collect::<Result<_, _>>()?,
            chars: path.chars.clone(),
        },
    };
    let mut premises = Vec::with_capacity(p.premises.len());
    for (i, q) in p.premises.iter().enumerate() {
        at.push(i);
        premises.push(translate_at(q, at)?);
        at.pop();
    }
    Ok(NestedProof { rule, conclusion, premises })
}

/// Rewrites a nested proof in labelled notation. The end sequent is labelled
/// in preorder and fresh children receive labels above all earlier ones.
pub fn untranslate_proof(p: &NestedProof) -> Result<GrammarProof, NestedError> {
    let labels = preorder_labels(&p.conclusion);
    let mut next = labels.len() as u32;
    untranslate_at(p, labels, &mut next)
}

fn untranslate_at(p: &NestedProof, labels: BTreeMap<Address, Label>, next: &mut u32) -> Result<GrammarProof, NestedError> {
    let conclusion = unnest_with(&p.conclusion, &labels)?;
    let l = |a: &Address| labels.get(a).copied().ok_or_else(|| NestedError::BadAddress(a.clone()));
    let mut premise_labels = labels.clone();
    let rule = match &p.rule {
        NestedRule::Id { at, atom } => GrammarRule::Id { label: l(at)?, atom: atom.clone() },
        NestedRule::Top { at } => GrammarRule::Top { label: l(at)? },
        NestedRule::Or { at, formula } => GrammarRule::Or { label: l(at)?, formula: formula.clone() },
        NestedRule::And { at, formula } => GrammarRule::And { label: l(at)?, formula: formula.clone() },
        NestedRule::Box { at, formula, child } => {
            let fresh = Label(*next);
            *next += 1;
            premise_labels = labels
                .iter()
                .map(|(addr, &lab)| {
                    let mut addr = addr.clone();
                    if addr.len() > at.len() && addr.starts_with(at) && addr[at.len()] >= *child {
                        addr[at.len()] += 1;
                    }
                    (addr, lab)
                })
                .collect();
            let mut new = at.clone();
            new.push(*child);
            premise_labels.insert(new, fresh);
            GrammarRule::Box { label: l(at)?, formula: formula.clone(), fresh }
        }
        NestedRule::Dia { at, formula, target, path, chars } => GrammarRule::Dia {
            label: l(at)?,
            formula: formula.clone(),
            target: l(target)?,
            path: PathWitness { vertices: path.iter().map(l).collect::<Result<_, _>>()?, chars: chars.clone() },
        },
    };
    let premises = p
        .premises
        .iter()
        .map(|q| untranslate_at(q, premise_labels.clone(), next))
        .collect::<Result<_, _>>()?;
    Ok(Proof { rule, conclusion, premises })
}

/// Isomorphism of the sequent graphs of two labelled tree sequents.
pub fn tree_isomorphic(a: &LabelledSequent, b: &LabelledSequent) -> bool {
    match (to_nested(a), to_nested(b)) {
        (Ok(x), Ok(y)) => canonical(&x) == canonical(&y),
        _ => false,
    }
}

/// Children sorted by their own canonical form, so sibling order is ignored.
fn canonical(x: &NestedSequent) -> String {
    let mut kids: Vec<String> = x.children.iter().map(|(c, k)| format!("({c}){{{}}}", canonical(k))).collect();
    kids.sort();
    let forms: Vec<String> = x.formulas.iter().map(|f| f.to_string()).collect();
    format!("{}|{}", forms.join(","), kids.join(","))
}

impl From<&NestedSequent> for LabelledSequent {
    fn from(x: &NestedSequent) -> Self {
        to_labelled(x)
    }
}

#[cfg(test)]
mod tests {
    use super::super::tests::converse_axiom_proof;
    use super::*;
    use crate::calculus::check_proof;
    use crate::grammar::CfcstSystem;

    #[test]
    fn display_and_parse() {
        let s = "q, <b>q, (a){p & ~p, (a){q, r}}, (b'){p}";
        let x: NestedSequent = s.parse().unwrap();
        assert_eq!(x.size(), 4);
        assert_eq!(x.to_string().parse::<NestedSequent>().unwrap(), x);
        assert!("(a){p".parse::<NestedSequent>().is_err());
    }

    #[test]
    fn single_label_has_no_children() {
        let seq: LabelledSequent = "|- w3: p | q".parse().unwrap();
        let x = to_nested(&seq).unwrap();
        assert!(x.children.is_empty());
        assert_eq!(x.to_string(), "p | q");
    }

    #[test]
    fn tree_round_trip() {
        let seq: LabelledSequent = "R_a(w0,w2), R_b'(w0,w5), R_a(w2,w7) |- w0: q, w2: p, w7: r, w5: p".parse().unwrap();
        let x = to_nested(&seq).unwrap();
        assert_eq!(x.to_string(), "q, (a){p, (a){r}}, (b'){p}");
        let back = to_labelled(&x);
        assert!(tree_isomorphic(&seq, &back));
        assert_eq!(back.labels().len(), 4);
    }

    #[test]
    fn non_trees_are_rejected() {
        let dag: LabelledSequent = "R_a(w0,w1), R_a(w2,w1) |- w0: p".parse().unwrap();
        assert!(matches!(to_nested(&dag), Err(NestedError::NotTree(Shape::Dag))));
        let choice: LabelledSequent = "R_[0](w0,w1) |- w0: p".parse().unwrap();
        assert!(matches!(to_nested(&choice), Err(NestedError::NotGrammar(_))));
    }

    #[test]
    fn converse_axiom_translates() {
        let p = converse_axiom_proof();
        let n = translate_proof(&p).unwrap();
        let lines: Vec<String> = {
            let mut v = Vec::new();
            let mut cur = &n;
            loop {
                v.push(cur.conclusion.to_string());
                match cur.premises.first() {
                    Some(q) => cur = q,
                    None => break,
                }
            }
            v
        };
        assert_eq!(lines, vec!["~p | [a]<a'>p", "~p, [a]<a'>p", "~p, (a){<a'>p}", "~p, p, (a){<a'>p}"]);
        let back = untranslate_proof(&n).unwrap();
        assert_eq!(back, p);
        assert_eq!(check_proof(&CfcstSystem::empty(), &back), Ok(()));
    }

    #[test]
    fn json_round_trip() {
        let n = translate_proof(&converse_axiom_proof()).unwrap();
        let js = serde_json::to_string(&n).unwrap();
        assert!(js.contains("\"rule\":\"BoxR\""));
        assert_eq!(serde_json::from_str::<NestedProof>(&js).unwrap(), n);
    }
}
