//! Single-agent deontic STIT: the refined calculus, its proof checker, and a
//! terminating proof search that returns either a proof or a countermodel.
//!
//! Rules (read bottom-up, principal formulas kept where marked `keep`):
//!
//! ```text
//! BoxR    R |- u:A, Γ                / R |- w:□A, Γ       u fresh
//! DiaP    R |- w:◇A, u:A, Γ          / R |- w:◇A, Γ       keep
//! ChBoxR  R, R_[0](w,u) |- u:A, Γ    / R |- w:[0]A, Γ     u fresh
//! ChDiaP  R |- w:<0>A, u:A, Γ        / R |- w:<0>A, Γ     w ~ u, keep
//! OblR    R, I(u) |- u:A, Γ          / R |- w:⊗A, Γ       u fresh
//! PermP1  R |- w:⊖A, v:A, Γ          / R |- w:⊖A, Γ       I(u) in R, u ~ v, keep
//! PermP2  R, I(u) |- w:⊖A, u:A, Γ    / R |- w:⊖A, Γ       u fresh, keep
//! APC     { R, R_[0](w_m,w_j) |- Γ : m < j <= k }  / R |- Γ          k > 0
//! ```
//!
//! `~` is the undirected choice-path relation. Id, TopR, OrR and AndR are as
//! in the grammar calculus.

mod search;

use std::fmt;

use crate::calculus::{
    check_tree, expect_premise, premise_count, require, shape, CheckError, CheckErrorKind, Proof, Rule, Witness,
};
use crate::sequent::{ChoiceClasses, Label, LabelledFormula, RelAtom};
use crate::syntax::{Atom, Formula};

pub use search::{
    apc_branches, extract_model, is_rooted_forest, prove_ds, prove_ds_with, stability_report, DsRun, DsStats,
    DsVerdict, LabelFlags, StabilityReport, StitError,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StitRule {
    Id { label: Label, atom: Atom },
    Top { label: Label },
    Or { label: Label, formula: Formula },
    And { label: Label, formula: Formula },
    Box { label: Label, formula: Formula, fresh: Label },
    Dia { label: Label, formula: Formula, target: Label },
    ChBox { label: Label, formula: Formula, fresh: Label },
    ChDia { label: Label, formula: Formula, target: Label },
    Obl { label: Label, formula: Formula, fresh: Label },
    PermP1 { label: Label, formula: Formula, ideal: Label, target: Label },
    PermP2 { label: Label, formula: Formula, fresh: Label },
    /// Connects the listed roots pairwise, one premise per pair `m < j`.
    Apc { roots: Vec<Label> },
}

pub type StitProof = Proof<StitRule>;

impl StitRule {
    pub fn label(&self) -> Option<Label> {
        use StitRule::*;
        match self {
            Id { label, .. }
            | Top { label }
            | Or { label, .. }
            | And { label, .. }
            | Box { label, .. }
            | Dia { label, .. }
            | ChBox { label, .. }
            | ChDia { label, .. }
            | Obl { label, .. }
            | PermP1 { label, .. }
            | PermP2 { label, .. } => Some(*label),
            Apc { .. } => None,
        }
    }

    pub fn formula(&self) -> Option<&Formula> {
        use StitRule::*;
        match self {
            Or { formula, .. }
            | And { formula, .. }
            | Box { formula, .. }
            | Dia { formula, .. }
            | ChBox { formula, .. }
            | ChDia { formula, .. }
            | Obl { formula, .. }
            | PermP1 { formula, .. }
            | PermP2 { formula, .. } => Some(formula),
            _ => None,
        }
    }

    pub fn is_propagation(&self) -> bool {
        matches!(self, StitRule::Dia { .. } | StitRule::ChDia { .. } | StitRule::PermP1 { .. } | StitRule::PermP2 { .. })
    }
}

/// Pairs `(m, j)` with `m < j`, in the order APC lists its premises.
pub fn apc_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|m| (m + 1..n).map(move |j| (m, j))).collect()
}

fn rn(l: Label, from: Label, to: Label) -> Label {
    if l == from {
        to
    } else {
        l
    }
}

impl Rule for StitRule {
    fn name(&self) -> &'static str {
        use StitRule::*;
        match self {
            Id { .. } => "Id",
            Top { .. } => "TopR",
            Or { .. } => "OrR",
            And { .. } => "AndR",
            Box { .. } => "BoxR",
            Dia { .. } => "DiaP",
            ChBox { .. } => "ChBoxR",
            ChDia { .. } => "ChDiaP",
            Obl { .. } => "OblR",
            PermP1 { .. } => "PermP1",
            PermP2 { .. } => "PermP2",
            Apc { .. } => "APC",
        }
    }

    fn witness(&self) -> Witness {
        use StitRule::*;
        let mut w = Witness { label: self.label(), formula: self.formula().cloned(), ..Witness::default() };
        match self {
            Id { atom, .. } => w.atom = Some(atom.clone()),
            Box { fresh, .. } | ChBox { fresh, .. } | Obl { fresh, .. } | PermP2 { fresh, .. } => w.fresh = Some(*fresh),
            Dia { target, .. } | ChDia { target, .. } => w.target = Some(*target),
            PermP1 { ideal, target, .. } => {
                w.ideal = Some(*ideal);
                w.target = Some(*target);
            }
            Apc { roots } => w.roots = Some(roots.clone()),
            Top { .. } | Or { .. } | And { .. } => {}
        }
        w
    }

    fn from_witness(name: &str, w: &Witness) -> Result<Self, String> {
        use StitRule::*;
        if name == "APC" {
            return Ok(Apc { roots: Witness::need(&w.roots, "roots")? });
        }
        let label = Witness::need(&w.label, "label")?;
        let formula = || Witness::need(&w.formula, "formula");
        let fresh = || Witness::need(&w.fresh, "fresh");
        let target = || Witness::need(&w.target, "target");
        Ok(match name {
            "Id" => Id { label, atom: Witness::need(&w.atom, "atom")? },
            "TopR" => Top { label },
            "OrR" => Or { label, formula: formula()? },
            "AndR" => And { label, formula: formula()? },
            "BoxR" => Box { label, formula: formula()?, fresh: fresh()? },
            "DiaP" => Dia { label, formula: formula()?, target: target()? },
            "ChBoxR" => ChBox { label, formula: formula()?, fresh: fresh()? },
            "ChDiaP" => ChDia { label, formula: formula()?, target: target()? },
            "OblR" => Obl { label, formula: formula()?, fresh: fresh()? },
            "PermP1" => PermP1 { label, formula: formula()?, ideal: Witness::need(&w.ideal, "ideal")?, target: target()? },
            "PermP2" => PermP2 { label, formula: formula()?, fresh: fresh()? },
            other => return Err(format!("unknown rule `{other}`")),
        })
    }

    fn rename(&self, from: Label, to: Label) -> Self {
        use StitRule::*;
        let r = |l: &Label| rn(*l, from, to);
        match self.clone() {
            Id { label, atom } => Id { label: r(&label), atom },
            Top { label } => Top { label: r(&label) },
            Or { label, formula } => Or { label: r(&label), formula },
            And { label, formula } => And { label: r(&label), formula },
            Box { label, formula, fresh } => Box { label: r(&label), formula, fresh: r(&fresh) },
            Dia { label, formula, target } => Dia { label: r(&label), formula, target: r(&target) },
            ChBox { label, formula, fresh } => ChBox { label: r(&label), formula, fresh: r(&fresh) },
            ChDia { label, formula, target } => ChDia { label: r(&label), formula, target: r(&target) },
            Obl { label, formula, fresh } => Obl { label: r(&label), formula, fresh: r(&fresh) },
            PermP1 { label, formula, ideal, target } => {
                PermP1 { label: r(&label), formula, ideal: r(&ideal), target: r(&target) }
            }
            PermP2 { label, formula, fresh } => PermP2 { label: r(&label), formula, fresh: r(&fresh) },
            Apc { roots } => Apc { roots: roots.iter().map(r).collect() },
        }
    }

    fn fresh(&self) -> Option<Label> {
        use StitRule::*;
        match self {
            Box { fresh, .. } | ChBox { fresh, .. } | Obl { fresh, .. } | PermP2 { fresh, .. } => Some(*fresh),
            _ => None,
        }
    }
}

impl fmt::Display for StitRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use StitRule::*;
        match self {
            Id { label, atom } => write!(f, "Id {label}:{atom}"),
            Top { label } => write!(f, "TopR {label}"),
            Apc { roots } => {
                let rs: Vec<String> = roots.iter().map(|r| r.to_string()).collect();
                write!(f, "APC {}", rs.join(" "))
            }
            _ => {
                let label = self.label().expect("labelled rule");
                let phi = self.formula().expect("rule with principal");
                write!(f, "{} {label}: {phi}", self.name())?;
                match self {
                    Box { fresh, .. } | ChBox { fresh, .. } | Obl { fresh, .. } | PermP2 { fresh, .. } => {
                        write!(f, " fresh {fresh}")
                    }
                    Dia { target, .. } | ChDia { target, .. } => write!(f, " to {target}"),
                    PermP1 { ideal, target, .. } => write!(f, " to {target} via I({ideal})"),
                    _ => Ok(()),
                }
            }
        }
    }
}

fn lf(w: Label, f: &Formula) -> LabelledFormula {
    LabelledFormula::new(w, f.clone())
}

fn check_node(k: usize, node: &StitProof) -> Result<(), CheckErrorKind> {
    use crate::syntax::Formula::*;
    let c = &node.conclusion;
    let n = node.premises.len();
    let fresh_ok = |u: &Label| {
        if c.labels().contains(u) {
            Err(CheckErrorKind::EigenvariableClash(*u))
        } else {
            Ok(())
        }
    };
    let only = |p: usize| premise_count(p, n);
    match &node.rule {
        StitRule::Id { label, atom } => {
            only(0)?;
            require(c, &lf(*label, &Lit(atom.clone(), true)))?;
            require(c, &lf(*label, &Lit(atom.clone(), false)))
        }
        StitRule::Top { label } => {
            only(0)?;
            require(c, &lf(*label, &Top))
        }
        StitRule::Apc { roots } => {
            if k == 0 {
                return Err(shape("APC is not part of the calculus when k = 0"));
            }
            if roots.len() != k + 1 {
                return Err(shape(format!("APC needs {} roots, found {}", k + 1, roots.len())));
            }
            let distinct: std::collections::BTreeSet<_> = roots.iter().collect();
            if distinct.len() != roots.len() {
                return Err(shape("APC roots are not distinct"));
            }
            let pairs = apc_pairs(roots.len());
            only(pairs.len())?;
            for ((m, j), prem) in pairs.into_iter().zip(&node.premises) {
                expect_premise(c, &prem.conclusion, None, &[], &[RelAtom::Choice(roots[m], roots[j])], true)?;
            }
            Ok(())
        }
        rule => {
            let w = rule.label().expect("labelled rule");
            let phi = rule.formula().expect("rule with principal");
            let pr = lf(w, phi);
            require(c, &pr)?;
            if matches!(rule, StitRule::And { .. }) {
                only(2)?;
                let And(a, b) = phi else { return Err(shape("AndR principal is not a conjunction")) };
                for (prem, part) in node.premises.iter().zip([a, b]) {
                    expect_premise(c, &prem.conclusion, Some(&pr), &[lf(w, part)], &[], false)?;
                }
                return Ok(());
            }
            only(1)?;
            let premise = &node.premises[0].conclusion;
            let classes = || ChoiceClasses::new(&c.atoms);
            let (added, atoms, keep): (Vec<LabelledFormula>, Vec<RelAtom>, bool) = match (rule, phi) {
                (StitRule::Or { .. }, Or(a, b)) => (vec![lf(w, a), lf(w, b)], vec![], false),
                (StitRule::Box { fresh, .. }, SBox(a)) => {
                    fresh_ok(fresh)?;
                    (vec![lf(*fresh, a)], vec![], false)
                }
                (StitRule::Dia { target, .. }, SDia(a)) => {
                    if !c.labels().contains(target) {
                        return Err(shape(format!("DiaP target {target} is not a label of the conclusion")));
                    }
                    (vec![lf(*target, a)], vec![], true)
                }
                (StitRule::ChBox { fresh, .. }, CBox(a)) => {
                    fresh_ok(fresh)?;
                    (vec![lf(*fresh, a)], vec![RelAtom::Choice(w, *fresh)], false)
                }
                (StitRule::ChDia { target, .. }, CDia(a)) => {
                    if !classes().same(w, *target) {
                        return Err(CheckErrorKind::SideConditionFails { recomputed: false });
                    }
                    (vec![lf(*target, a)], vec![], true)
                }
                (StitRule::Obl { fresh, .. }, OBox(a)) => {
                    fresh_ok(fresh)?;
                    (vec![lf(*fresh, a)], vec![RelAtom::Ideal(*fresh)], false)
                }
                (StitRule::PermP1 { ideal, target, .. }, ODia(a)) => {
                    if !c.atoms.contains(&RelAtom::Ideal(*ideal)) || !classes().same(*ideal, *target) {
                        return Err(CheckErrorKind::SideConditionFails { recomputed: false });
                    }
                    (vec![lf(*target, a)], vec![], true)
                }
                (StitRule::PermP2 { fresh, .. }, ODia(a)) => {
                    fresh_ok(fresh)?;
                    (vec![lf(*fresh, a)], vec![RelAtom::Ideal(*fresh)], true)
                }
                _ => return Err(shape(format!("{} principal has the wrong connective", rule.name()))),
            };
            expect_premise(c, premise, Some(&pr), &added, &atoms, keep)
        }
    }
}

/// Checks every node of a STIT proof for the calculus with choice bound `k`.
pub fn check_stit_proof(k: usize, proof: &StitProof) -> Result<(), CheckError> {
    check_tree(proof, &mut |n| check_node(k, n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequent::LabelledSequent;
    use crate::syntax::parse_in;
    use crate::syntax::Family;

    fn seq(s: &str) -> LabelledSequent {
        s.parse().unwrap()
    }

    fn f(s: &str) -> Formula {
        parse_in(s, Family::Stit).unwrap()
    }

    #[test]
    fn apc_pair_order() {
        assert_eq!(apc_pairs(3), vec![(0, 1), (0, 2), (1, 2)]);
        assert!(apc_pairs(1).is_empty());
    }

    #[test]
    fn chdia_side_condition() {
        let l = Label;
        let conclusion = seq("R_[0](w0,w1), R_[0](w0,w2) |- w1: <0>p, w2: ~p");
        let premise = seq("R_[0](w0,w1), R_[0](w0,w2) |- w1: <0>p, w2: p, w2: ~p");
        let rule = StitRule::ChDia { label: l(1), formula: f("<0>p"), target: l(2) };
        let leaf = Proof::leaf(rule.clone(), conclusion.clone());
        assert_eq!(check_stit_proof(0, &leaf).unwrap_err().kind, CheckErrorKind::LeafNotInitial);
        let p = Proof::new(rule, conclusion, vec![Proof::leaf(StitRule::Id { label: l(2), atom: "p".into() }, premise)]);
        assert_eq!(check_stit_proof(0, &p), Ok(()));
        let mut bad = p.clone();
        let edge: RelAtom = "R_[0](w0,w2)".parse().unwrap();
        bad.conclusion.atoms.remove(&edge);
        bad.premises[0].conclusion.atoms.remove(&edge);
        assert_eq!(check_stit_proof(0, &bad).unwrap_err().kind, CheckErrorKind::SideConditionFails { recomputed: false });
    }

    #[test]
    fn apc_is_absent_for_k_zero() {
        let p = Proof::new(StitRule::Apc { roots: vec![Label(0)] }, seq("|- w0: p"), vec![]);
        assert!(matches!(check_stit_proof(0, &p).unwrap_err().kind, CheckErrorKind::WrongShape(_)));
    }

    #[test]
    fn json_round_trip() {
        let p = Proof::new(
            StitRule::Apc { roots: vec![Label(0), Label(1)] },
            seq("|- w0: p, w0: ~p"),
            vec![Proof::leaf(StitRule::Id { label: Label(0), atom: "p".into() }, seq("R_[0](w0,w1) |- w0: p, w0: ~p"))],
        );
        assert_eq!(check_stit_proof(1, &p), Ok(()));
        let js = serde_json::to_string(&p).unwrap();
        assert!(js.contains("\"roots\":[\"w0\",\"w1\"]"));
        assert_eq!(serde_json::from_str::<StitProof>(&js).unwrap(), p);
    }
}
