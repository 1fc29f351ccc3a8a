//! Lyndon interpolation read off grammar-logic proofs.
//!
//! A proof of `|- w0: ~phi, w0: psi` is replayed with its formulas split into
//! a left part (coming from `~phi`) and a right part (coming from `psi`).
//! Every node gets an interpolant, a set of flat sequents read as a
//! conjunction of disjunctions. Rules always act on the right; a node whose
//! principal formula sits on the left is handled by swapping the sides and
//! taking the orthogonal of the swapped node's interpolant.
//!
//! Interpolants come with proofs. For a node `R |- L | Rt` with interpolant
//! `I` the annotation can build
//!
//! * `R |- L, X` for every `X` in `I` ([`InterpNode::witness_i`]), and
//! * `R |- T, Rt` for every `T` that meets each member of `I` in a negated
//!   formula ([`InterpNode::witness_ii`]).
//!
//! At the root these two families assemble into proofs of `phi -> chi` and
//! `chi -> psi`, which [`lyndon_interpolate`] checks before returning.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::calculus::{
    check_proof, prove_sequent, weaken_to, Budget, CheckError, GrammarProof, GrammarRule, Proof, Unknown, Verdict,
};
use crate::grammar::{CfcstSystem, PathWitness};
use crate::semantics::SigmaModel;
use crate::sequent::{Label, LabelledFormula, LabelledSequent, RelAtom};
use crate::syntax::{literals, negate, Character, Formula};

/// The consequent of a sequent without relational atoms.
pub type FlatSequent = BTreeSet<LabelledFormula>;

/// A set of flat sequents, read as the conjunction of their disjunctions.
pub type Interpolant = BTreeSet<FlatSequent>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InterpError {
    #[error("proof does not check: {0}")]
    InvalidProof(CheckError),
    #[error("the left part is not contained in the end sequent")]
    PartitionMismatch,
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("interpolant mixes labels")]
    MixedLabels,
    #[error("interpolation is only available for grammar formulas")]
    NotGrammar,
    #[error("no witness proof: {0}")]
    Witness(String),
}

fn neg(lf: &LabelledFormula) -> LabelledFormula {
    LabelledFormula::new(lf.label, negate(&lf.formula))
}

/// Pick one formula from each member and negate it, in every possible way.
pub fn orthogonal(i: &Interpolant) -> Interpolant {
    let mut acc: Interpolant = [FlatSequent::new()].into();
    for g in i {
        acc = acc
            .iter()
            .flat_map(|s| {
                g.iter().map(move |lf| {
                    let mut t = s.clone();
                    t.insert(neg(lf));
                    t
                })
            })
            .collect();
    }
    acc
}

/// Replaces the `u`-formulas of each member by `w: [x](disjunction)`.
/// Members without `u`-formulas receive `w: [x]bot`.
pub fn boxed(i: &Interpolant, x: &Character, w: Label, u: Label) -> Result<Interpolant, InterpError> {
    Ok(boxed_with_preimage(i, x, w, u)?.into_keys().collect())
}

fn split_at_label(s: &FlatSequent, u: Label) -> (FlatSequent, Vec<Formula>) {
    let (at_u, rest): (Vec<_>, Vec<_>) = s.iter().cloned().partition(|lf| lf.label == u);
    (rest.into_iter().collect(), at_u.into_iter().map(|lf| lf.formula).collect())
}

fn boxed_with_preimage(
    i: &Interpolant,
    x: &Character,
    w: Label,
    u: Label,
) -> Result<BTreeMap<FlatSequent, FlatSequent>, InterpError> {
    if w == u {
        return Err(InterpError::PreconditionViolated(format!("boxing {u} into itself")));
    }
    let mut out = BTreeMap::new();
    for s in i {
        let (mut rest, items) = split_at_label(s, u);
        rest.insert(LabelledFormula::new(w, Formula::GBox(x.clone(), Formula::big_or(items).into())));
        out.entry(rest).or_insert_with(|| s.clone());
    }
    Ok(out)
}

/// Drops every member that strictly contains another. The conjunction is
/// unchanged, and a set meeting each remaining member meets every original one.
pub fn reduce(i: &Interpolant) -> Interpolant {
    i.iter().filter(|s| !i.iter().any(|t| t.len() < s.len() && t.is_subset(s))).cloned().collect()
}

/// `AND_i OR_j f_ij` over the members of `i`; every formula must sit at `w`.
pub fn interpolant_formula(i: &Interpolant, w: Label) -> Result<Formula, InterpError> {
    if i.iter().flatten().any(|lf| lf.label != w) {
        return Err(InterpError::MixedLabels);
    }
    Ok(Formula::big_and(i.iter().map(|s| Formula::big_or(s.iter().map(|lf| lf.formula.clone())))))
}

/// Whether `theta` contains the negation of some formula of `xi`.
fn meets(theta: &FlatSequent, xi: &FlatSequent) -> bool {
    xi.iter().any(|lf| theta.contains(&neg(lf)))
}

/// One node of an annotated derivation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InterpNode {
    pub atoms: BTreeSet<RelAtom>,
    pub left: BTreeSet<LabelledFormula>,
    pub right: BTreeSet<LabelledFormula>,
    pub interpolant: Interpolant,
    pub step: Step,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Step {
    /// Sides swapped; the interpolant is the orthogonal of the inner one.
    Orth(Box<InterpNode>),
    /// A rule whose principal formula is on the right.
    Rule { rule: GrammarRule, premises: Vec<InterpNode>, preimage: BTreeMap<FlatSequent, FlatSequent> },
}

/// Annotates a checked proof, starting from the given left part of its end sequent.
pub fn annotate(
    system: &CfcstSystem,
    proof: &GrammarProof,
    left: &BTreeSet<LabelledFormula>,
) -> Result<InterpNode, InterpError> {
    check_proof(system, proof).map_err(InterpError::InvalidProof)?;
    if !left.is_subset(&proof.conclusion.formulas) {
        return Err(InterpError::PartitionMismatch);
    }
    Ok(annotate_node(proof, left.clone()))
}

fn principal_left(rule: &GrammarRule, left: &BTreeSet<LabelledFormula>) -> bool {
    match rule {
        GrammarRule::Id { label, atom } => {
            left.contains(&LabelledFormula::new(*label, Formula::Lit(atom.clone(), true)))
                && left.contains(&LabelledFormula::new(*label, Formula::Lit(atom.clone(), false)))
        }
        _ => left.contains(&rule.principal()),
    }
}

/// Formulas each premise adds, in premise order.
fn added(rule: &GrammarRule) -> Vec<Vec<LabelledFormula>> {
    let lf = LabelledFormula::new;
    match rule {
        GrammarRule::Id { .. } | GrammarRule::Top { .. } => vec![],
        GrammarRule::Or { label, formula: Formula::Or(a, b) } => {
            vec![vec![lf(*label, (**a).clone()), lf(*label, (**b).clone())]]
        }
        GrammarRule::And { label, formula: Formula::And(a, b) } => {
            vec![vec![lf(*label, (**a).clone())], vec![lf(*label, (**b).clone())]]
        }
        GrammarRule::Box { fresh, formula: Formula::GBox(_, a), .. } => vec![vec![lf(*fresh, (**a).clone())]],
        GrammarRule::Dia { target, formula: Formula::GDia(_, a), .. } => vec![vec![lf(*target, (**a).clone())]],
        other => unreachable!("checked proof has malformed rule {other}"),
    }
}

fn annotate_node(p: &GrammarProof, left: BTreeSet<LabelledFormula>) -> InterpNode {
    let c = &p.conclusion;
    let right: BTreeSet<_> = c.formulas.difference(&left).cloned().collect();
    let atoms = c.atoms.clone();
    if principal_left(&p.rule, &left) {
        let inner = annotate_node(p, right.clone());
        let interpolant = reduce(&orthogonal(&inner.interpolant));
        return InterpNode { atoms, left, right, interpolant, step: Step::Orth(Box::new(inner)) };
    }
    let w = p.rule.label();
    let mut preimage = BTreeMap::new();
    let (premises, interpolant) = match &p.rule {
        GrammarRule::Id { atom, .. } => {
            let pos = LabelledFormula::new(w, Formula::Lit(atom.clone(), true));
            let dual = neg(&pos);
            let lit = match (left.contains(&pos), left.contains(&dual)) {
                (false, true) => pos,
                (true, false) => dual,
                _ => LabelledFormula::new(w, Formula::Top),
            };
            (vec![], [[lit].into()].into())
        }
        GrammarRule::Top { .. } => (vec![], [[LabelledFormula::new(w, Formula::Top)].into()].into()),
        rule => {
            let adds = added(rule);
            let premises: Vec<InterpNode> = p
                .premises
                .iter()
                .zip(&adds)
                .map(|(q, add)| {
                    let l: BTreeSet<_> =
                        left.iter().filter(|lf| q.conclusion.formulas.contains(lf) && !add.contains(lf)).cloned().collect();
                    annotate_node(q, l)
                })
                .collect();
            let interpolant = match rule {
                GrammarRule::And { .. } => reduce(&premises[0].interpolant.union(&premises[1].interpolant).cloned().collect()),
                GrammarRule::Box { fresh, formula: Formula::GBox(x, _), .. } => {
                    preimage = boxed_with_preimage(&premises[0].interpolant, x, w, *fresh).expect("fresh label differs");
                    let kept = reduce(&preimage.keys().cloned().collect());
                    preimage.retain(|k, _| kept.contains(k));
                    kept
                }
                _ => premises[0].interpolant.clone(),
            };
            (premises, interpolant)
        }
    };
    InterpNode { atoms, left, right, interpolant, step: Step::Rule { rule: p.rule.clone(), premises, preimage } }
}

fn sequent(atoms: &BTreeSet<RelAtom>, parts: &[&BTreeSet<LabelledFormula>]) -> LabelledSequent {
    LabelledSequent { atoms: atoms.clone(), formulas: parts.iter().flat_map(|s| s.iter().cloned()).collect() }
}

/// Closes a sequent holding `w: top` or a complementary literal pair.
fn close(seq: &LabelledSequent) -> Option<GrammarProof> {
    for lf in &seq.formulas {
        match &lf.formula {
            Formula::Top => return Some(Proof::leaf(GrammarRule::Top { label: lf.label }, seq.clone())),
            Formula::Lit(a, true) if seq.contains(lf.label, &Formula::Lit(a.clone(), false)) => {
                return Some(Proof::leaf(GrammarRule::Id { label: lf.label, atom: a.clone() }, seq.clone()))
            }
            _ => {}
        }
    }
    None
}

/// Bottom-up `OrR` steps unfolding `w: big_or(items)` into its items. Returns
/// the steps (lowest first) and the topmost sequent.
fn or_steps(base: &LabelledSequent, w: Label, items: &[Formula]) -> (Vec<(GrammarRule, LabelledSequent)>, LabelledSequent) {
    let mut steps = Vec::new();
    let mut seq = base.clone();
    let mut rest = items;
    while rest.len() >= 2 {
        let f = Formula::big_or(rest.iter().cloned());
        let Formula::Or(a, b) = &f else { unreachable!() };
        let (a, b) = ((**a).clone(), (**b).clone());
        steps.push((GrammarRule::Or { label: w, formula: f }, seq.clone()));
        seq.insert(w, a);
        seq.insert(w, b);
        rest = &rest[1..];
    }
    (steps, seq)
}

fn stack(steps: Vec<(GrammarRule, LabelledSequent)>, top: GrammarProof) -> GrammarProof {
    steps.into_iter().rev().fold(top, |p, (rule, c)| Proof::new(rule, c, vec![p]))
}

type Leaf<'a> = dyn FnMut(&LabelledSequent, &[LabelledFormula]) -> Result<GrammarProof, InterpError> + 'a;

/// Splits, group by group, `w: big_and(items)` with `AndR`. Each leaf holds one
/// chosen item per group; an empty group is `top` and closes at once.
fn split_all(
    seq: &LabelledSequent,
    groups: &[(Label, Vec<Formula>)],
    chosen: &mut Vec<LabelledFormula>,
    leaf: &mut Leaf<'_>,
) -> Result<GrammarProof, InterpError> {
    match groups.split_first() {
        None => leaf(seq, chosen),
        Some(((w, items), rest)) => split_one(seq, *w, items, rest, chosen, leaf),
    }
}

fn split_one(
    seq: &LabelledSequent,
    w: Label,
    items: &[Formula],
    rest: &[(Label, Vec<Formula>)],
    chosen: &mut Vec<LabelledFormula>,
    leaf: &mut Leaf<'_>,
) -> Result<GrammarProof, InterpError> {
    let pick = |s: &LabelledSequent, f: &Formula, chosen: &mut Vec<LabelledFormula>, leaf: &mut Leaf<'_>| {
        chosen.push(LabelledFormula::new(w, f.clone()));
        let r = split_all(s, rest, chosen, leaf);
        chosen.pop();
        r
    };
    match items {
        [] => Ok(Proof::leaf(GrammarRule::Top { label: w }, seq.clone())),
        [f] => pick(seq, f, chosen, leaf),
        _ => {
            let f = Formula::big_and(items.iter().cloned());
            let Formula::And(a, b) = &f else { unreachable!() };
            let mut s1 = seq.clone();
            s1.insert(w, (**a).clone());
            let p1 = pick(&s1, a, chosen, leaf)?;
            let mut s2 = seq.clone();
            s2.insert(w, (**b).clone());
            let p2 = split_one(&s2, w, &items[1..], rest, chosen, leaf)?;
            Ok(Proof::new(GrammarRule::And { label: w, formula: f.clone() }, seq.clone(), vec![p1, p2]))
        }
    }
}

impl InterpNode {
    pub fn sequent(&self) -> LabelledSequent {
        sequent(&self.atoms, &[&self.left, &self.right])
    }

    fn labels(&self) -> BTreeSet<Label> {
        self.sequent().labels()
    }

    /// A proof of `R |- L, xi` for a member `xi` of the interpolant.
    pub fn witness_i(&self, xi: &FlatSequent) -> Result<GrammarProof, InterpError> {
        if !self.interpolant.contains(xi) {
            return Err(InterpError::Witness("not a member of the interpolant".into()));
        }
        let goal = sequent(&self.atoms, &[&self.left, xi]);
        match &self.step {
            Step::Orth(inner) => Ok(weaken_to(&inner.witness_ii(xi)?, &goal)),
            Step::Rule { rule, premises, preimage } => match rule {
                GrammarRule::Id { .. } | GrammarRule::Top { .. } => {
                    close(&goal).ok_or_else(|| InterpError::Witness(format!("initial sequent does not close: {goal}")))
                }
                GrammarRule::And { .. } => {
                    let q = premises.iter().find(|q| q.interpolant.contains(xi)).expect("union of premise interpolants");
                    Ok(weaken_to(&q.witness_i(xi)?, &goal))
                }
                GrammarRule::Box { label, fresh, formula: Formula::GBox(x, _) } => {
                    let pre = &preimage[xi];
                    let (_, items) = split_at_label(pre, *fresh);
                    let d = Formula::big_or(items.iter().cloned());
                    let rule = GrammarRule::Box { label: *label, formula: Formula::GBox(x.clone(), d.clone().into()), fresh: *fresh };
                    let mut base = goal.clone();
                    base.insert(*fresh, d);
                    base.atoms.insert(RelAtom::G(x.clone(), *label, *fresh));
                    let (steps, top) = or_steps(&base, *fresh, &items);
                    let inner = weaken_to(&premises[0].witness_i(pre)?, &top);
                    Ok(Proof::new(rule, goal, vec![stack(steps, inner)]))
                }
                _ => Ok(weaken_to(&premises[0].witness_i(xi)?, &goal)),
            },
        }
    }

    /// A proof of `R |- theta, Rt` for any `theta` over this node's labels that
    /// meets every member of the interpolant.
    pub fn witness_ii(&self, theta: &FlatSequent) -> Result<GrammarProof, InterpError> {
        if let Some(bad) = self.interpolant.iter().find(|xi| !meets(theta, xi)) {
            return Err(InterpError::Witness(format!("{} misses a member of size {}", show_flat(theta), bad.len())));
        }
        if !theta.iter().all(|lf| self.labels().contains(&lf.label)) {
            return Err(InterpError::Witness("foreign label".into()));
        }
        let goal = sequent(&self.atoms, &[theta, &self.right]);
        match &self.step {
            Step::Orth(inner) => {
                let xi = inner
                    .interpolant
                    .iter()
                    .find(|xi| xi.is_subset(theta))
                    .ok_or_else(|| InterpError::Witness("no member below theta".into()))?;
                Ok(weaken_to(&inner.witness_i(xi)?, &goal))
            }
            Step::Rule { rule, premises, .. } => match rule {
                GrammarRule::Id { .. } | GrammarRule::Top { .. } => {
                    close(&goal).ok_or_else(|| InterpError::Witness(format!("initial sequent does not close: {goal}")))
                }
                GrammarRule::And { .. } => {
                    let adds = added(rule);
                    let ps = premises
                        .iter()
                        .zip(adds)
                        .map(|(q, add)| {
                            let mut t = goal.clone();
                            t.formulas.extend(add);
                            Ok(weaken_to(&q.witness_ii(theta)?, &t))
                        })
                        .collect::<Result<Vec<_>, InterpError>>()?;
                    Ok(Proof::new(rule.clone(), goal, ps))
                }
                GrammarRule::Box { label, fresh, formula: Formula::GBox(x, a) } => {
                    self.box_witness_ii(theta, goal, *label, *fresh, x, a, &premises[0])
                }
                _ => {
                    let mut t = goal.clone();
                    t.formulas.extend(added(rule).remove(0));
                    let p = weaken_to(&premises[0].witness_ii(theta)?, &t);
                    Ok(Proof::new(rule.clone(), goal, vec![p]))
                }
            },
        }
    }

    /// `BoxR` at the bottom; every boxed member met only through its box is
    /// propagated to the fresh child as a conjunction and split there.
    #[allow(clippy::too_many_arguments)]
    fn box_witness_ii(
        &self,
        theta: &FlatSequent,
        goal: LabelledSequent,
        w: Label,
        u: Label,
        x: &Character,
        a: &Formula,
        premise: &InterpNode,
    ) -> Result<GrammarProof, InterpError> {
        let mut base = goal.clone();
        base.insert(u, a.clone());
        base.atoms.insert(RelAtom::G(x.clone(), w, u));
        let mut groups: Vec<(Label, Vec<Formula>)> = Vec::new();
        let mut steps = Vec::new();
        let mut seq = base;
        for pre in &premise.interpolant {
            let (rest, items) = split_at_label(pre, u);
            if meets(theta, &rest) {
                continue;
            }
            let d = Formula::big_or(items.iter().cloned());
            let dia = LabelledFormula::new(w, negate(&Formula::GBox(x.clone(), d.clone().into())));
            if !theta.contains(&dia) {
                return Err(InterpError::Witness("boxed member not met".into()));
            }
            let group = (u, items.iter().map(negate).collect::<Vec<_>>());
            if groups.contains(&group) {
                continue;
            }
            let path = PathWitness { vertices: vec![w, u], chars: vec![x.clone()] };
            let rule = GrammarRule::Dia { label: w, formula: dia.formula.clone(), target: u, path };
            steps.push((rule, seq.clone()));
            seq.insert(u, negate(&d));
            groups.push(group);
        }
        let mut leaf = |s: &LabelledSequent, _: &[LabelledFormula]| Ok(weaken_to(&premise.witness_ii(&s.formulas)?, s));
        let top = split_all(&seq, &groups, &mut Vec::new(), &mut leaf)?;
        let rule = GrammarRule::Box { label: w, formula: Formula::GBox(x.clone(), a.clone().into()), fresh: u };
        Ok(Proof::new(rule, goal, vec![stack(steps, top)]))
    }

    /// Indented text rendering, one node per line.
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.render_into(0, &mut out);
        out
    }

    fn render_into(&self, depth: usize, out: &mut String) {
        let pad = "  ".repeat(depth);
        let side = |s: &BTreeSet<LabelledFormula>| s.iter().map(|f| f.to_string()).collect::<Vec<_>>().join(", ");
        let atoms = self.atoms.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(", ");
        let head = match &self.step {
            Step::Orth(_) => "orth".to_string(),
            Step::Rule { rule, .. } => rule.to_string(),
        };
        out.push_str(&format!(
            "{pad}[{head}] {atoms} |- {} ‖ {}  ::  {}\n",
            side(&self.left),
            side(&self.right),
            show_interpolant(&self.interpolant)
        ));
        match &self.step {
            Step::Orth(inner) => inner.render_into(depth + 1, out),
            Step::Rule { premises, .. } => premises.iter().for_each(|q| q.render_into(depth + 1, out)),
        }
    }
}

fn show_flat(s: &FlatSequent) -> String {
    let body = s.iter().map(|lf| lf.to_string()).collect::<Vec<_>>().join(", ");
    format!("(|- {body})")
}

pub fn show_interpolant(i: &Interpolant) -> String {
    format!("{{{}}}", i.iter().map(show_flat).collect::<Vec<_>>().join(", "))
}

/// Whether a literal of `chi` also occurs in `phi` and `psi`, with polarity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LiteralAudit {
    pub literal: String,
    pub in_phi: bool,
    pub in_psi: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct LyndonResult {
    pub chi: Formula,
    pub left_proof: GrammarProof,
    pub right_proof: GrammarProof,
    pub literal_audit: Vec<LiteralAudit>,
}

#[derive(Clone, Debug)]
pub enum InterpOutcome {
    Found(LyndonResult),
    /// `phi -> psi` is false at `world` of `model`.
    NotDerivable { model: SigmaModel, world: Label },
    Unknown(Unknown),
}

impl fmt::Display for LiteralAudit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (phi: {}, psi: {})", self.literal, self.in_phi, self.in_psi)
    }
}

fn has_stit(f: &Formula) -> bool {
    let mut found = false;
    f.visit(&mut |g| {
        use Formula::*;
        found |= matches!(g, SDia(_) | SBox(_) | CDia(_) | CBox(_) | ODia(_) | OBox(_));
    });
    found
}

/// Searches for a proof of `phi -> psi`, reads a Lyndon interpolant off it and
/// returns it with checked proofs of `phi -> chi` and `chi -> psi`.
///
/// # Panics
///
/// If a witness proof fails to check or `chi` breaks the Lyndon condition.
/// Either would be a bug in the construction.
pub fn lyndon_interpolate(
    system: &CfcstSystem,
    phi: &Formula,
    psi: &Formula,
    budget: Budget,
) -> Result<InterpOutcome, InterpError> {
    if has_stit(phi) || has_stit(psi) {
        return Err(InterpError::NotGrammar);
    }
    let w0 = Label(0);
    let nphi = LabelledFormula::new(w0, negate(phi));
    let rpsi = LabelledFormula::new(w0, psi.clone());
    let root = LabelledSequent::default().with(w0, nphi.formula.clone()).with(w0, psi.clone());
    let proof = match prove_sequent(system, &root, budget) {
        Verdict::Valid(p) => p,
        Verdict::Refuted { model, world } => return Ok(InterpOutcome::NotDerivable { model, world }),
        Verdict::Unknown(u) => return Ok(InterpOutcome::Unknown(u)),
    };
    let left: BTreeSet<_> = if nphi == rpsi { BTreeSet::new() } else { [nphi.clone()].into() };
    let node = annotate(system, &proof, &left)?;
    let chi = interpolant_formula(&node.interpolant, w0)?;
    let members: Vec<&FlatSequent> = node.interpolant.iter().collect();
    let disjunctions: Vec<Formula> =
        members.iter().map(|s| Formula::big_or(s.iter().map(|lf| lf.formula.clone()))).collect();

    // phi -> chi: split chi into its conjuncts, unfold each disjunction.
    let imp = Formula::implies(phi.clone(), chi.clone());
    let end_a = LabelledSequent::single(w0, imp.clone());
    let mut base = end_a.clone();
    base.insert(w0, nphi.formula.clone());
    base.insert(w0, chi.clone());
    let mut leaf_a = |s: &LabelledSequent, chosen: &[LabelledFormula]| {
        let i = disjunctions.iter().position(|d| *d == chosen[0].formula).expect("conjunct of chi");
        let items: Vec<Formula> = members[i].iter().map(|lf| lf.formula.clone()).collect();
        let (steps, top) = or_steps(s, w0, &items);
        Ok(stack(steps, weaken_to(&node.witness_i(members[i])?, &top)))
    };
    let split = split_all(&base, &[(w0, disjunctions.clone())], &mut Vec::new(), &mut leaf_a)?;
    let left_proof = Proof::new(GrammarRule::Or { label: w0, formula: imp }, end_a, vec![split]);

    // chi -> psi: unfold ~chi, split each negated conjunct, meet every member.
    let nchi = negate(&chi);
    let imp = Formula::implies(chi.clone(), psi.clone());
    let end_b = LabelledSequent::single(w0, imp.clone());
    let mut base = end_b.clone();
    base.insert(w0, nchi);
    base.insert(w0, psi.clone());
    let negated: Vec<Formula> = disjunctions.iter().map(negate).collect();
    let (steps, top) = or_steps(&base, w0, &negated);
    let groups: Vec<(Label, Vec<Formula>)> =
        members.iter().map(|s| (w0, s.iter().map(|lf| negate(&lf.formula)).collect())).collect();
    let mut leaf_b = |s: &LabelledSequent, chosen: &[LabelledFormula]| {
        let theta: FlatSequent = chosen.iter().cloned().collect();
        Ok(weaken_to(&node.witness_ii(&theta)?, s))
    };
    let split = split_all(&top, &groups, &mut Vec::new(), &mut leaf_b)?;
    let right_proof = Proof::new(GrammarRule::Or { label: w0, formula: imp }, end_b, vec![stack(steps, split)]);

    for (name, p) in [("phi -> chi", &left_proof), ("chi -> psi", &right_proof)] {
        if let Err(e) = check_proof(system, p) {
            panic!("witness proof of {name} does not check: {e}");
        }
    }
    let (lp, lq, lc) = (literals(phi), literals(psi), literals(&chi));
    assert!(
        lc.iter().all(|l| lp.contains(l) && lq.contains(l)),
        "interpolant {chi} breaks the Lyndon condition for {phi} and {psi}"
    );
    let literal_audit = lc
        .iter()
        .map(|l| LiteralAudit {
            literal: Formula::Lit(l.0.clone(), l.1).to_string(),
            in_phi: lp.contains(l),
            in_psi: lq.contains(l),
        })
        .collect();
    Ok(InterpOutcome::Found(LyndonResult { chi, left_proof, right_proof, literal_audit }))
}
