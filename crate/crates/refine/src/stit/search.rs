//! Blocking conditions, the proof-search loop, and countermodel extraction.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{apc_pairs, check_stit_proof, StitProof, StitRule};
use crate::calculus::{Proof, Rule};
use crate::semantics::{check_ds, validate_ds, DsModel};
use crate::sequent::{choice_trees, ChoiceClasses, Label, LabelledFormula, LabelledSequent, RelAtom, Shape};
use crate::syntax::{complexity, negate, Family, Formula};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StitError {
    #[error("sequent is not a labelled forest sequent")]
    NotForest,
    #[error("sequent is not stable")]
    NotStable,
    #[error("APC does not apply: {trees} choice-tree(s), k = {k}")]
    NotApplicable { trees: usize, k: usize },
}

/// Blocking conditions at one label.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelFlags {
    pub saturated: bool,
    pub box_realized: bool,
    pub choice_realized: bool,
    pub obl_realized: bool,
    pub dia_propagated: bool,
    pub chdia_propagated: bool,
    pub perm_propagated: bool,
}

impl LabelFlags {
    pub fn all(&self) -> bool {
        self.saturated
            && self.box_realized
            && self.choice_realized
            && self.obl_realized
            && self.dia_propagated
            && self.chdia_propagated
            && self.perm_propagated
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub labels: BTreeMap<Label, LabelFlags>,
    pub d2_satisfied: bool,
    pub ck_satisfied: bool,
    pub stable: bool,
}

/// Forest shape over the choice atoms, with `root` never a target.
pub fn is_rooted_forest(seq: &LabelledSequent, root: Label) -> bool {
    matches!(seq.classify(), Shape::Tree | Shape::Forest)
        && !seq.atoms.iter().any(|a| matches!(a, RelAtom::Choice(_, u) if *u == root))
}

fn ideals(seq: &LabelledSequent) -> Vec<Label> {
    seq.atoms
        .iter()
        .filter_map(|a| match a {
            RelAtom::Ideal(u) => Some(*u),
            _ => None,
        })
        .collect()
}

struct View<'a> {
    seq: &'a LabelledSequent,
    labels: BTreeSet<Label>,
    classes: ChoiceClasses,
    ideals: Vec<Label>,
}

impl<'a> View<'a> {
    fn new(seq: &'a LabelledSequent) -> Self {
        View { seq, labels: seq.labels(), classes: ChoiceClasses::new(&seq.atoms), ideals: ideals(seq) }
    }

    fn has(&self, u: Label, f: &Formula) -> bool {
        self.seq.contains(u, f)
    }

    fn somewhere(&self, a: &Formula) -> bool {
        self.labels.iter().any(|&u| self.has(u, a))
    }

    fn in_cell(&self, w: Label, a: &Formula) -> bool {
        self.classes.class_of(w, &self.labels).any(|u| self.has(u, a))
    }

    fn at_ideal(&self, a: &Formula) -> bool {
        self.ideals.iter().any(|&u| self.has(u, a))
    }

    /// Labels choice-connected to some ideal label.
    fn ideal_cells(&self) -> BTreeSet<Label> {
        self.labels.iter().copied().filter(|&v| self.ideals.iter().any(|&i| self.classes.same(i, v))).collect()
    }

    fn flags(&self, w: Label) -> LabelFlags {
        use Formula::*;
        let mut fl = LabelFlags {
            saturated: true,
            box_realized: true,
            choice_realized: true,
            obl_realized: true,
            dia_propagated: true,
            chdia_propagated: true,
            perm_propagated: true,
        };
        let ideal_cells = self.ideal_cells();
        for f in self.seq.at(w) {
            match f {
                Top => fl.saturated = false,
                Or(a, b) if !(self.has(w, a) && self.has(w, b)) => fl.saturated = false,
                And(a, b) if !self.has(w, a) && !self.has(w, b) => fl.saturated = false,
                SBox(a) if !self.somewhere(a) => fl.box_realized = false,
                CBox(a) if !self.in_cell(w, a) => fl.choice_realized = false,
                OBox(a) if !self.at_ideal(a) => fl.obl_realized = false,
                SDia(a) if !self.labels.iter().all(|&u| self.has(u, a)) => fl.dia_propagated = false,
                CDia(a) if !self.classes.class_of(w, &self.labels).all(|u| self.has(u, a)) => {
                    fl.chdia_propagated = false
                }
                ODia(a) if !ideal_cells.iter().all(|&u| self.has(u, a)) => fl.perm_propagated = false,
                _ => {}
            }
            if self.has(w, &negate(f)) {
                fl.saturated = false;
            }
        }
        fl
    }

    fn d2_satisfied(&self) -> bool {
        self.seq.formulas.iter().all(|lf| match &lf.formula {
            Formula::ODia(a) => self.at_ideal(a),
            _ => true,
        })
    }
}

/// Evaluates every blocking condition literally.
pub fn stability_report(k: usize, seq: &LabelledSequent) -> Result<StabilityReport, StitError> {
    let trees = choice_trees(seq).map_err(|_| StitError::NotForest)?;
    let view = View::new(seq);
    let labels: BTreeMap<Label, LabelFlags> = view.labels.iter().map(|&w| (w, view.flags(w))).collect();
    let d2_satisfied = view.d2_satisfied();
    let ck_satisfied = k == 0 || trees.len() <= k;
    let stable = labels.values().all(LabelFlags::all) && d2_satisfied && ck_satisfied;
    Ok(StabilityReport { labels, d2_satisfied, ck_satisfied, stable })
}

fn apc_roots(k: usize, seq: &LabelledSequent) -> Result<Vec<Label>, StitError> {
    let trees = choice_trees(seq).map_err(|_| StitError::NotForest)?;
    if k == 0 || trees.len() <= k {
        return Err(StitError::NotApplicable { trees: trees.len(), k });
    }
    // Trees come ordered by root label, which is creation order.
    Ok(trees.iter().take(k + 1).map(|t| t.root).collect())
}

/// The premises of APC applied to the first `k+1` choice-tree roots.
pub fn apc_branches(k: usize, seq: &LabelledSequent) -> Result<Vec<LabelledSequent>, StitError> {
    let roots = apc_roots(k, seq)?;
    Ok(apc_pairs(roots.len())
        .into_iter()
        .map(|(m, j)| seq.clone().with_atom(RelAtom::Choice(roots[m], roots[j])))
        .collect())
}

fn build_model(k: usize, seq: &LabelledSequent, root: Label) -> DsModel {
    let view = View::new(seq);
    let worlds = view.labels.clone();
    let mut choice = BTreeSet::new();
    for &u in &worlds {
        for v in view.classes.class_of(u, &worlds) {
            choice.insert((u, v));
        }
    }
    let ideal = if view.ideals.is_empty() {
        view.classes.class_of(root, &worlds).collect()
    } else {
        view.ideal_cells()
    };
    let mut valuation: BTreeMap<_, BTreeSet<Label>> = BTreeMap::new();
    for LabelledFormula { label, formula } in &seq.formulas {
        if let Formula::Lit(p, false) = formula {
            valuation.entry(p.clone()).or_default().insert(*label);
        }
    }
    DsModel { worlds, choice, ideal, valuation, k }
}

/// The countermodel read off a stable sequent. Worlds are labels, choice
/// cells are choice-trees, and `p` holds where `~p` occurs. The ideal set is
/// the union of the cells of `I`-marked labels, or the cell of the smallest
/// label when there are none.
pub fn extract_model(k: usize, seq: &LabelledSequent) -> Result<DsModel, StitError> {
    if !stability_report(k, seq)?.stable {
        return Err(StitError::NotStable);
    }
    let root = seq.labels().into_iter().next().unwrap_or(Label(0));
    Ok(build_model(k, seq, root))
}

#[derive(Clone, Debug)]
pub enum DsVerdict {
    Proved(StitProof),
    Refuted { model: DsModel, world: Label },
}

impl DsVerdict {
    pub fn is_proved(&self) -> bool {
        matches!(self, DsVerdict::Proved(_))
    }
}

/// Counters collected during one run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DsStats {
    /// Sequents visited.
    pub nodes: usize,
    /// Labels introduced by BoxR, ChBoxR, OblR and PermP2 during search.
    pub fresh_labels: usize,
    pub apc: usize,
    pub max_labels: usize,
}

#[derive(Clone, Debug)]
pub struct DsRun {
    pub verdict: DsVerdict,
    pub stats: DsStats,
    pub trace: Vec<String>,
}

/// Decides `|- w0: f` in the logic with at most `k` choices (`k = 0`: no
/// bound). Both outcomes are verified before they are returned.
///
/// # Panics
///
/// If `f` contains grammar modalities, or if a verdict fails verification
/// (which would be a bug in the search).
pub fn prove_ds(k: usize, f: &Formula) -> DsVerdict {
    prove_ds_with(k, f, false).verdict
}

/// [`prove_ds`] with statistics and, optionally, a trace of every rule
/// application.
pub fn prove_ds_with(k: usize, f: &Formula, trace: bool) -> DsRun {
    assert_ne!(f.family(), Some(Family::Grammar), "prove_ds expects a STIT formula");
    let root = Label(0);
    let mut s = Search { k, root, next: 1, stats: DsStats::default(), trace: trace.then(Vec::new), depth: 0 };
    let verdict = match s.run(LabelledSequent::single(root, f.clone())) {
        Ok(proof) => {
            if let Err(e) = check_stit_proof(k, &proof) {
                panic!("search produced an invalid proof: {e}");
            }
            DsVerdict::Proved(proof)
        }
        Err(model) => {
            if let Err(v) = validate_ds(&model) {
                panic!("extracted model violates frame conditions: {v:?}");
            }
            assert_eq!(check_ds(&model, root, f), Ok(false), "extracted model does not falsify the input");
            DsVerdict::Refuted { model, world: root }
        }
    };
    DsRun { verdict, stats: s.stats, trace: s.trace.unwrap_or_default() }
}

enum Action {
    Close(StitProof),
    Unary(StitRule, LabelledSequent),
    Branch(StitRule, Vec<LabelledSequent>),
    Stable,
}

struct Search {
    k: usize,
    root: Label,
    next: u32,
    stats: DsStats,
    trace: Option<Vec<String>>,
    depth: usize,
}

fn plus(seq: &LabelledSequent, w: Label, f: &Formula) -> LabelledSequent {
    seq.clone().with(w, f.clone())
}

impl Search {
    fn fresh(&mut self) -> Label {
        let u = Label(self.next);
        self.next += 1;
        u
    }

    fn log(&mut self, rule: &StitRule, seq: &LabelledSequent) {
        if let Some(t) = &mut self.trace {
            t.push(format!("{:indent$}{rule}   {seq}", "", indent = self.depth * 2));
        }
    }

    fn run(&mut self, start: LabelledSequent) -> Result<StitProof, DsModel> {
        let mut chain: Vec<(StitRule, LabelledSequent)> = Vec::new();
        let mut seq = start;
        let top = loop {
            self.stats.nodes += 1;
            self.stats.max_labels = self.stats.max_labels.max(seq.labels().len());
            debug_assert!(is_rooted_forest(&seq, self.root), "left the forest fragment: {seq}");
            match self.next_action(&seq) {
                Action::Close(p) => {
                    self.log(&p.rule, &seq);
                    break p;
                }
                Action::Unary(rule, premise) => {
                    self.log(&rule, &seq);
                    if rule.fresh().is_some() {
                        self.stats.fresh_labels += 1;
                    }
                    chain.push((rule, seq));
                    seq = premise;
                }
                Action::Branch(rule, premises) => {
                    self.log(&rule, &seq);
                    if matches!(rule, StitRule::Apc { .. }) {
                        self.stats.apc += 1;
                    }
                    self.depth += 1;
                    let mut subs = Vec::with_capacity(premises.len());
                    for p in premises {
                        match self.run(p) {
                            Ok(proof) => subs.push(proof),
                            Err(m) => {
                                self.depth -= 1;
                                return Err(m);
                            }
                        }
                    }
                    self.depth -= 1;
                    break Proof::new(rule, seq, subs);
                }
                Action::Stable => {
                    if let Some(t) = &mut self.trace {
                        t.push(format!("{:indent$}stable   {seq}", "", indent = self.depth * 2));
                    }
                    debug_assert!(stability_report(self.k, &seq).is_ok_and(|r| r.stable));
                    return Err(build_model(self.k, &seq, self.root));
                }
            }
        };
        let mut proof = top;
        while let Some((rule, conclusion)) = chain.pop() {
            proof = Proof::new(rule, conclusion, vec![proof]);
        }
        Ok(proof)
    }

    /// A dual pair to close on: `top` first, then literals, then the
    /// complex pair of least complexity.
    fn dual_pair(seq: &LabelledSequent) -> Option<(Label, Formula)> {
        let mut best: Option<(usize, Label, Formula)> = None;
        for lf in &seq.formulas {
            let (w, f) = (lf.label, &lf.formula);
            if *f == Formula::Top {
                return Some((w, Formula::Top));
            }
            if !seq.contains(w, &negate(f)) {
                continue;
            }
            let c = if f.is_literal() { 0 } else { complexity(f) };
            if best.as_ref().is_none_or(|b| c < b.0) {
                best = Some((c, w, f.clone()));
            }
        }
        best.map(|(_, w, f)| (w, f))
    }

    /// A proof of a sequent containing `w: phi` and `w: negate(phi)`.
    fn identity(&mut self, seq: &LabelledSequent, w: Label, phi: &Formula) -> StitProof {
        use Formula::*;
        let neg = negate(phi);
        match phi {
            Lit(a, _) => Proof::leaf(StitRule::Id { label: w, atom: a.clone() }, seq.clone()),
            Top | Bot => Proof::leaf(StitRule::Top { label: w }, seq.clone()),
            And(..) | SDia(_) | CDia(_) | ODia(_) => self.identity(seq, w, &neg),
            Or(a, b) => {
                let s1 = plus(&plus(seq, w, a), w, b);
                let And(na, nb) = &neg else { unreachable!("negation of a disjunction") };
                let left = self.identity(&plus(&s1, w, na), w, a);
                let right = self.identity(&plus(&s1, w, nb), w, b);
                let and = Proof::new(StitRule::And { label: w, formula: neg.clone() }, s1, vec![left, right]);
                Proof::new(StitRule::Or { label: w, formula: phi.clone() }, seq.clone(), vec![and])
            }
            SBox(a) | CBox(a) | OBox(a) => {
                let na = negate(a);
                let u = self.fresh();
                let mut s1 = plus(seq, u, a);
                let (open, prop) = match phi {
                    SBox(_) => (
                        StitRule::Box { label: w, formula: phi.clone(), fresh: u },
                        StitRule::Dia { label: w, formula: neg.clone(), target: u },
                    ),
                    CBox(_) => {
                        s1.atoms.insert(RelAtom::Choice(w, u));
                        (
                            StitRule::ChBox { label: w, formula: phi.clone(), fresh: u },
                            StitRule::ChDia { label: w, formula: neg.clone(), target: u },
                        )
                    }
                    _ => {
                        s1.atoms.insert(RelAtom::Ideal(u));
                        (
                            StitRule::Obl { label: w, formula: phi.clone(), fresh: u },
                            StitRule::PermP1 { label: w, formula: neg.clone(), ideal: u, target: u },
                        )
                    }
                };
                let s2 = plus(&s1, u, &na);
                let inner = self.identity(&s2, u, a);
                let p = Proof::new(prop, s1, vec![inner]);
                Proof::new(open, seq.clone(), vec![p])
            }
            GDia(..) | GBox(..) => unreachable!("grammar modality in a STIT sequent"),
        }
    }

    fn next_action(&mut self, seq: &LabelledSequent) -> Action {
        use Formula::*;
        if let Some((w, phi)) = Self::dual_pair(seq) {
            return Action::Close(self.identity(seq, w, &phi));
        }
        for lf in &seq.formulas {
            if let Or(a, b) = &lf.formula {
                let w = lf.label;
                if !(seq.contains(w, a) && seq.contains(w, b)) {
                    let rule = StitRule::Or { label: w, formula: lf.formula.clone() };
                    return Action::Unary(rule, plus(&plus(seq, w, a), w, b));
                }
            }
        }
        for lf in &seq.formulas {
            if let And(a, b) = &lf.formula {
                let w = lf.label;
                if !seq.contains(w, a) && !seq.contains(w, b) {
                    let rule = StitRule::And { label: w, formula: lf.formula.clone() };
                    return Action::Branch(rule, vec![plus(seq, w, a), plus(seq, w, b)]);
                }
            }
        }
        let view = View::new(seq);
        // Realization: one fresh label per unrealized formula.
        for lf in &seq.formulas {
            if let SBox(a) = &lf.formula {
                if !view.somewhere(a) {
                    let u = self.fresh();
                    let rule = StitRule::Box { label: lf.label, formula: lf.formula.clone(), fresh: u };
                    return Action::Unary(rule, plus(seq, u, a));
                }
            }
        }
        for lf in &seq.formulas {
            if let CBox(a) = &lf.formula {
                let w = lf.label;
                if !view.in_cell(w, a) {
                    let u = self.fresh();
                    let premise = plus(seq, u, a).with_atom(RelAtom::Choice(w, u));
                    return Action::Unary(StitRule::ChBox { label: w, formula: lf.formula.clone(), fresh: u }, premise);
                }
            }
        }
        for lf in &seq.formulas {
            if let OBox(a) = &lf.formula {
                if !view.at_ideal(a) {
                    let u = self.fresh();
                    let premise = plus(seq, u, a).with_atom(RelAtom::Ideal(u));
                    let rule = StitRule::Obl { label: lf.label, formula: lf.formula.clone(), fresh: u };
                    return Action::Unary(rule, premise);
                }
            }
        }
        // Propagation, targets in label order.
        for lf in &seq.formulas {
            if let SDia(a) = &lf.formula {
                if let Some(&u) = view.labels.iter().find(|&&u| !seq.contains(u, a)) {
                    let rule = StitRule::Dia { label: lf.label, formula: lf.formula.clone(), target: u };
                    return Action::Unary(rule, plus(seq, u, a));
                }
            }
        }
        for lf in &seq.formulas {
            if let CDia(a) = &lf.formula {
                let w = lf.label;
                if let Some(u) = view.classes.class_of(w, &view.labels).find(|&u| !seq.contains(u, a)) {
                    let rule = StitRule::ChDia { label: w, formula: lf.formula.clone(), target: u };
                    return Action::Unary(rule, plus(seq, u, a));
                }
            }
        }
        for lf in &seq.formulas {
            if let ODia(a) = &lf.formula {
                for &i in &view.ideals {
                    if let Some(v) = view.classes.class_of(i, &view.labels).find(|&v| !seq.contains(v, a)) {
                        let rule = StitRule::PermP1 { label: lf.label, formula: lf.formula.clone(), ideal: i, target: v };
                        return Action::Unary(rule, plus(seq, v, a));
                    }
                }
            }
        }
        for lf in &seq.formulas {
            if let ODia(a) = &lf.formula {
                if !view.at_ideal(a) {
                    let u = self.fresh();
                    let premise = plus(seq, u, a).with_atom(RelAtom::Ideal(u));
                    let rule = StitRule::PermP2 { label: lf.label, formula: lf.formula.clone(), fresh: u };
                    return Action::Unary(rule, premise);
                }
            }
        }
        if let Ok(roots) = apc_roots(self.k, seq) {
            let branches = apc_branches(self.k, seq).expect("roots exist");
            return Action::Branch(StitRule::Apc { roots }, branches);
        }
        Action::Stable
    }
}
