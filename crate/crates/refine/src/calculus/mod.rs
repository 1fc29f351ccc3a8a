//! The refined calculus for grammar logics: proof objects, the checker,
//! structural transformations, bounded proof search and nested sequents.
//!
//! Rules (read bottom-up, `Γ` is a set):
//!
//! ```text
//! Id     R |- w:p, w:~p, Γ
//! TopR   R |- w:top, Γ
//! OrR    R |- w:A, w:B, Γ            / R |- w:A|B, Γ
//! AndR   R |- w:A, Γ    R |- w:B, Γ  / R |- w:A&B, Γ
//! BoxR   R, R_x(w,u) |- u:A, Γ       / R |- w:[x]A, Γ        u fresh
//! PrDia  R |- w:<x>A, u:A, Γ         / R |- w:<x>A, Γ        path w..u in L(x)
//! ```
//!
//! Principal formulas may be kept in the premise; the checker accepts both
//! forms, except for `PrDia` whose principal always stays.

mod nested;
mod search;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::grammar::{in_language, reachable, CfcstSystem, PathWitness};
use crate::sequent::{Label, LabelledFormula, LabelledSequent, RelAtom};
use crate::syntax::{Atom, Formula};

pub use nested::{
    to_labelled, to_nested, translate_proof, tree_isomorphic, untranslate_proof, Address, NestedError, NestedProof, NestedRule,
    NestedSequent,
};
pub use search::{prove_bounded, prove_sequent, Budget, Unknown, Verdict};

/// A derivation tree. `premises` are empty exactly at initial sequents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Proof<R> {
    pub rule: R,
    pub conclusion: LabelledSequent,
    pub premises: Vec<Proof<R>>,
}

impl<R> Proof<R> {
    pub fn new(rule: R, conclusion: LabelledSequent, premises: Vec<Proof<R>>) -> Self {
        Proof { rule, conclusion, premises }
    }

    pub fn leaf(rule: R, conclusion: LabelledSequent) -> Self {
        Proof { rule, conclusion, premises: Vec::new() }
    }

    pub fn height(&self) -> usize {
        1 + self.premises.iter().map(Proof::height).max().unwrap_or(0)
    }

    pub fn size(&self) -> usize {
        1 + self.premises.iter().map(Proof::size).sum::<usize>()
    }

    /// Pre-order list of nodes.
    pub fn nodes(&self) -> Vec<&Proof<R>> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(p) = stack.pop() {
            out.push(p);
            stack.extend(p.premises.iter().rev());
        }
        out
    }

    /// Every label occurring in some sequent of the proof.
    pub fn labels(&self) -> BTreeSet<Label> {
        self.nodes().iter().flat_map(|n| n.conclusion.labels()).collect()
    }
}

/// Optional per-node data in the JSON form of a proof.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub label: Option<Label>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub atom: Option<Atom>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub formula: Option<Formula>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub fresh: Option<Label>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub target: Option<Label>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ideal: Option<Label>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub path: Option<PathWitness>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub roots: Option<Vec<Label>>,
}

impl Witness {
    pub(crate) fn need<T: Clone>(v: &Option<T>, field: &str) -> Result<T, String> {
        v.clone().ok_or_else(|| format!("witness field `{field}` missing"))
    }
}

/// What every rule family provides so proofs can be serialised and
/// manipulated generically.
pub trait Rule: Clone + fmt::Debug {
    fn name(&self) -> &'static str;
    fn witness(&self) -> Witness;
    fn from_witness(name: &str, w: &Witness) -> Result<Self, String>;
    fn rename(&self, from: Label, to: Label) -> Self;
    /// The eigenvariable introduced by this rule, if any.
    fn fresh(&self) -> Option<Label>;
}

#[derive(Serialize, Deserialize)]
struct ProofDto {
    rule: String,
    conclusion: LabelledSequent,
    #[serde(default)]
    witness: Witness,
    #[serde(default)]
    premises: Vec<ProofDto>,
}

fn to_dto<R: Rule>(p: &Proof<R>) -> ProofDto {
    ProofDto {
        rule: p.rule.name().to_string(),
        conclusion: p.conclusion.clone(),
        witness: p.rule.witness(),
        premises: p.premises.iter().map(to_dto).collect(),
    }
}

fn from_dto<R: Rule>(d: ProofDto) -> Result<Proof<R>, String> {
    let rule = R::from_witness(&d.rule, &d.witness)?;
    let premises = d.premises.into_iter().map(from_dto).collect::<Result<_, _>>()?;
    Ok(Proof { rule, conclusion: d.conclusion, premises })
}

impl<R: Rule> Serialize for Proof<R> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        to_dto(self).serialize(s)
    }
}

impl<'de, R: Rule> Deserialize<'de> for Proof<R> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        from_dto(ProofDto::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

/// Rule applications of the grammar-logic calculus. `formula` is always the
/// principal formula.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GrammarRule {
    Id { label: Label, atom: Atom },
    Top { label: Label },
    Or { label: Label, formula: Formula },
    And { label: Label, formula: Formula },
    Box { label: Label, formula: Formula, fresh: Label },
    Dia { label: Label, formula: Formula, target: Label, path: PathWitness },
}

pub type GrammarProof = Proof<GrammarRule>;

impl GrammarRule {
    pub fn label(&self) -> Label {
        match self {
            GrammarRule::Id { label, .. }
            | GrammarRule::Top { label }
            | GrammarRule::Or { label, .. }
            | GrammarRule::And { label, .. }
            | GrammarRule::Box { label, .. }
            | GrammarRule::Dia { label, .. } => *label,
        }
    }

    /// The principal labelled formula; for `Id` the positive literal.
    pub fn principal(&self) -> LabelledFormula {
        let w = self.label();
        match self {
            GrammarRule::Id { atom, .. } => LabelledFormula::new(w, Formula::Lit(atom.clone(), true)),
            GrammarRule::Top { .. } => LabelledFormula::new(w, Formula::Top),
            GrammarRule::Or { formula, .. }
            | GrammarRule::And { formula, .. }
            | GrammarRule::Box { formula, .. }
            | GrammarRule::Dia { formula, .. } => LabelledFormula::new(w, formula.clone()),
        }
    }
}

fn rn(l: Label, from: Label, to: Label) -> Label {
    if l == from {
        to
    } else {
        l
    }
}

impl Rule for GrammarRule {
    fn name(&self) -> &'static str {
        match self {
            GrammarRule::Id { .. } => "Id",
            GrammarRule::Top { .. } => "TopR",
            GrammarRule::Or { .. } => "OrR",
            GrammarRule::And { .. } => "AndR",
            GrammarRule::Box { .. } => "BoxR",
            GrammarRule::Dia { .. } => "PrDia",
        }
    }

    fn witness(&self) -> Witness {
        let mut w = Witness { label: Some(self.label()), ..Witness::default() };
        match self {
            GrammarRule::Id { atom, .. } => w.atom = Some(atom.clone()),
            GrammarRule::Top { .. } => {}
            GrammarRule::Or { formula, .. } | GrammarRule::And { formula, .. } => w.formula = Some(formula.clone()),
            GrammarRule::Box { formula, fresh, .. } => {
                w.formula = Some(formula.clone());
                w.fresh = Some(*fresh);
            }
            GrammarRule::Dia { formula, target, path, .. } => {
                w.formula = Some(formula.clone());
                w.target = Some(*target);
                w.path = Some(path.clone());
            }
        }
        w
    }

    fn from_witness(name: &str, w: &Witness) -> Result<Self, String> {
        let label = Witness::need(&w.label, "label")?;
        let formula = || Witness::need(&w.formula, "formula");
        Ok(match name {
            "Id" => GrammarRule::Id { label, atom: Witness::need(&w.atom, "atom")? },
            "TopR" => GrammarRule::Top { label },
            "OrR" => GrammarRule::Or { label, formula: formula()? },
            "AndR" => GrammarRule::And { label, formula: formula()? },
            "BoxR" => GrammarRule::Box { label, formula: formula()?, fresh: Witness::need(&w.fresh, "fresh")? },
            "PrDia" => GrammarRule::Dia {
                label,
                formula: formula()?,
                target: Witness::need(&w.target, "target")?,
                path: Witness::need(&w.path, "path")?,
            },
            other => return Err(format!("unknown rule `{other}`")),
        })
    }

    fn rename(&self, from: Label, to: Label) -> Self {
        let r = |l: &Label| rn(*l, from, to);
        match self {
            GrammarRule::Id { label, atom } => GrammarRule::Id { label: r(label), atom: atom.clone() },
            GrammarRule::Top { label } => GrammarRule::Top { label: r(label) },
            GrammarRule::Or { label, formula } => GrammarRule::Or { label: r(label), formula: formula.clone() },
            GrammarRule::And { label, formula } => GrammarRule::And { label: r(label), formula: formula.clone() },
            GrammarRule::Box { label, formula, fresh } => {
                GrammarRule::Box { label: r(label), formula: formula.clone(), fresh: r(fresh) }
            }
            GrammarRule::Dia { label, formula, target, path } => GrammarRule::Dia {
                label: r(label),
                formula: formula.clone(),
                target: r(target),
                path: path.rename(from, to),
            },
        }
    }

    fn fresh(&self) -> Option<Label> {
        match self {
            GrammarRule::Box { fresh, .. } => Some(*fresh),
            _ => None,
        }
    }
}

/// Why a node fails to instantiate its rule.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CheckErrorKind {
    #[error("wrong shape: {0}")]
    WrongShape(String),
    #[error("eigenvariable {0} already occurs in the conclusion")]
    EigenvariableClash(Label),
    #[error("side condition fails (recomputed reachability: {recomputed})")]
    SideConditionFails { recomputed: bool },
    #[error("leaf is not an initial sequent")]
    LeafNotInitial,
}

/// A checker error together with the address of the offending node
/// (child indices from the root).
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("node {at:?}: {kind}")]
pub struct CheckError {
    pub at: Vec<usize>,
    pub kind: CheckErrorKind,
}

pub(crate) fn shape(msg: impl Into<String>) -> CheckErrorKind {
    CheckErrorKind::WrongShape(msg.into())
}

/// Checks that `premise` is `conclusion` plus `added` formulas and
/// `new_atoms`, with the principal optionally dropped.
pub(crate) fn expect_premise(
    conclusion: &LabelledSequent,
    premise: &LabelledSequent,
    principal: Option<&LabelledFormula>,
    added: &[LabelledFormula],
    new_atoms: &[RelAtom],
    keep_principal: bool,
) -> Result<(), CheckErrorKind> {
    let mut atoms = conclusion.atoms.clone();
    atoms.extend(new_atoms.iter().cloned());
    if premise.atoms != atoms {
        return Err(shape("premise atoms differ from the expected ones"));
    }
    let mut kept = conclusion.formulas.clone();
    kept.extend(added.iter().cloned());
    if premise.formulas == kept {
        return Ok(());
    }
    if let (Some(pr), false) = (principal, keep_principal) {
        let mut dropped = conclusion.formulas.clone();
        dropped.remove(pr);
        dropped.extend(added.iter().cloned());
        if premise.formulas == dropped {
            return Ok(());
        }
    }
    Err(shape("premise formulas differ from the expected ones"))
}

pub(crate) fn require(seq: &LabelledSequent, lf: &LabelledFormula) -> Result<(), CheckErrorKind> {
    if seq.has(lf) {
        Ok(())
    } else {
        Err(shape(format!("principal `{lf}` not in the conclusion")))
    }
}

pub(crate) fn premise_count(p: usize, n: usize) -> Result<(), CheckErrorKind> {
    if p == n {
        return Ok(());
    }
    if n == 0 {
        return Err(CheckErrorKind::LeafNotInitial);
    }
    Err(shape(format!("expected {p} premise(s), found {n}")))
}

/// Walks the proof, applying `local` at every node.
pub(crate) fn check_tree<R>(
    p: &Proof<R>,
    local: &mut impl FnMut(&Proof<R>) -> Result<(), CheckErrorKind>,
) -> Result<(), CheckError> {
    let mut stack: Vec<(&Proof<R>, Vec<usize>)> = vec![(p, Vec::new())];
    while let Some((node, at)) = stack.pop() {
        local(node).map_err(|kind| CheckError { at: at.clone(), kind })?;
        for (i, q) in node.premises.iter().enumerate().rev() {
            let mut a = at.clone();
            a.push(i);
            stack.push((q, a));
        }
    }
    Ok(())
}

fn check_node(system: &CfcstSystem, node: &GrammarProof) -> Result<(), CheckErrorKind> {
    use crate::syntax::Formula::*;
    let c = &node.conclusion;
    let w = node.rule.label();
    let pr = node.rule.principal();
    match &node.rule {
        GrammarRule::Id { atom, .. } => {
            premise_count(0, node.premises.len())?;
            require(c, &pr)?;
            require(c, &LabelledFormula::new(w, Lit(atom.clone(), false)))
        }
        GrammarRule::Top { .. } => {
            premise_count(0, node.premises.len())?;
            require(c, &pr)
        }
        GrammarRule::Or { formula, .. } => {
            premise_count(1, node.premises.len())?;
            require(c, &pr)?;
            let Or(a, b) = formula else { return Err(shape("OrR principal is not a disjunction")) };
            let added = [LabelledFormula::new(w, (**a).clone()), LabelledFormula::new(w, (**b).clone())];
            expect_premise(c, &node.premises[0].conclusion, Some(&pr), &added, &[], false)
        }
        GrammarRule::And { formula, .. } => {
            premise_count(2, node.premises.len())?;
            require(c, &pr)?;
            let And(a, b) = formula else { return Err(shape("AndR principal is not a conjunction")) };
            for (prem, part) in node.premises.iter().zip([a, b]) {
                let added = [LabelledFormula::new(w, (**part).clone())];
                expect_premise(c, &prem.conclusion, Some(&pr), &added, &[], false)?;
            }
            Ok(())
        }
        GrammarRule::Box { formula, fresh, .. } => {
            premise_count(1, node.premises.len())?;
            require(c, &pr)?;
            let GBox(x, a) = formula else { return Err(shape("BoxR principal is not a box")) };
            if c.labels().contains(fresh) {
                return Err(CheckErrorKind::EigenvariableClash(*fresh));
            }
            let added = [LabelledFormula::new(*fresh, (**a).clone())];
            let atom = RelAtom::G(x.clone(), w, *fresh);
            expect_premise(c, &node.premises[0].conclusion, Some(&pr), &added, &[atom], false)
        }
        GrammarRule::Dia { formula, target, path, .. } => {
            premise_count(1, node.premises.len())?;
            require(c, &pr)?;
            let GDia(x, a) = formula else { return Err(shape("PrDia principal is not a diamond")) };
            let g = c.propagation_graph();
            let ok = path.start() == w
                && path.end() == *target
                && path.is_well_formed()
                && path.lies_in(&g)
                && in_language(system, x, &path.string());
            if !ok {
                let recomputed = reachable(&g, system, x, w, *target).is_some();
                return Err(CheckErrorKind::SideConditionFails { recomputed });
            }
            let added = [LabelledFormula::new(*target, (**a).clone())];
            expect_premise(c, &node.premises[0].conclusion, Some(&pr), &added, &[], true)
        }
    }
}

/// Checks every node of a grammar-logic proof against its rule schema.
pub fn check_proof(system: &CfcstSystem, proof: &GrammarProof) -> Result<(), CheckError> {
    check_tree(proof, &mut |n| check_node(system, n))
}

/// Renames `from` to `to` in every sequent and rule of the proof.
pub fn rename_proof<R: Rule>(p: &Proof<R>, from: Label, to: Label) -> Proof<R> {
    Proof {
        rule: p.rule.rename(from, to),
        conclusion: p.conclusion.rename(from, to),
        premises: p.premises.iter().map(|q| rename_proof(q, from, to)).collect(),
    }
}

/// Adds `extra` to every sequent of the proof. Eigenvariables that would
/// clash with labels of `extra` are renamed apart.
pub fn weaken<R: Rule>(p: &Proof<R>, extra: &LabelledSequent) -> Proof<R> {
    let extra_labels = extra.labels();
    let mut next = p.labels().union(&extra_labels).max().map_or(0, |l| l.0 + 1);
    weaken_rec(p, extra, &extra_labels, &mut next)
}

fn weaken_rec<R: Rule>(p: &Proof<R>, extra: &LabelledSequent, extra_labels: &BTreeSet<Label>, next: &mut u32) -> Proof<R> {
    let mut rule = p.rule.clone();
    let mut premises: Vec<Proof<R>> = p.premises.clone();
    if let Some(u) = rule.fresh().filter(|u| extra_labels.contains(u)) {
        let v = Label(*next);
        *next += 1;
        rule = rule.rename(u, v);
        premises = premises.iter().map(|q| rename_proof(q, u, v)).collect();
    }
    Proof {
        rule,
        conclusion: p.conclusion.union(extra),
        premises: premises.iter().map(|q| weaken_rec(q, extra, extra_labels, next)).collect(),
    }
}

/// Weakens `p` so that its end sequent becomes `target`, which must contain it.
pub fn weaken_to<R: Rule>(p: &Proof<R>, target: &LabelledSequent) -> Proof<R> {
    debug_assert!(p.conclusion.atoms.is_subset(&target.atoms) && p.conclusion.formulas.is_subset(&target.formulas));
    let extra = LabelledSequent {
        atoms: target.atoms.difference(&p.conclusion.atoms).cloned().collect(),
        formulas: target.formulas.difference(&p.conclusion.formulas).cloned().collect(),
    };
    if extra.atoms.is_empty() && extra.formulas.is_empty() {
        return p.clone();
    }
    weaken(p, &extra)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FlipError {
    #[error("atom {0} does not occur in the end sequent")]
    AtomNotFound(RelAtom),
    #[error("only grammar atoms R_x(w,u) can be flipped")]
    NotGrammarAtom,
}

/// Replaces `R_x(w,u)` by `R_x'(u,w)` throughout the proof. Propagation
/// graphs are unchanged, so every path witness stays valid.
pub fn flip_atom(p: &GrammarProof, atom: &RelAtom) -> Result<GrammarProof, FlipError> {
    let RelAtom::G(x, w, u) = atom else { return Err(FlipError::NotGrammarAtom) };
    if !p.conclusion.atoms.contains(atom) {
        return Err(FlipError::AtomNotFound(atom.clone()));
    }
    let flipped = RelAtom::G(x.converse(), *u, *w);
    Ok(flip_rec(p, atom, &flipped))
}

fn flip_rec(p: &GrammarProof, atom: &RelAtom, flipped: &RelAtom) -> GrammarProof {
    let mut conclusion = p.conclusion.clone();
    if conclusion.atoms.remove(atom) {
        conclusion.atoms.insert(flipped.clone());
    }
    Proof {
        rule: p.rule.clone(),
        conclusion,
        premises: p.premises.iter().map(|q| flip_rec(q, atom, flipped)).collect(),
    }
}

impl fmt::Display for GrammarRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GrammarRule::Id { label, atom } => write!(f, "Id {label}:{atom}"),
            GrammarRule::Top { label } => write!(f, "TopR {label}"),
            GrammarRule::Or { label, formula } | GrammarRule::And { label, formula } => {
                write!(f, "{} {label}: {formula}", self.name())
            }
            GrammarRule::Box { label, formula, fresh } => write!(f, "BoxR {label}: {formula} fresh {fresh}"),
            GrammarRule::Dia { label, formula, target, path } => {
                write!(f, "PrDia {label}: {formula} to {target} via {path}")
            }
        }
    }
}

/// Indented text rendering, conclusion first, premises below.
pub fn render<R: fmt::Display>(p: &Proof<R>) -> String {
    let mut out = String::new();
    let mut stack = vec![(p, 0usize)];
    while let Some((n, depth)) = stack.pop() {
        out.push_str(&format!("{:indent$}{}   [{}]\n", "", n.conclusion, n.rule, indent = depth * 2));
        for q in n.premises.iter().rev() {
            stack.push((q, depth + 1));
        }
    }
    out
}
