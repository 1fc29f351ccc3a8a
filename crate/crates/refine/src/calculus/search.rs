//! Bounded backward proof search for the grammar-logic calculus.
//!
//! Principal formulas stay in premises. Each disjunction and conjunction is
//! analysed once per label, each box gets one fresh child, and each diamond
//! is propagated once to every label it currently reaches. Grammar logics
//! are undecidable in general, so the search is cut off by a label and a step
//! budget; a sequent on which no rule applies is turned into a model and the
//! model is checked before a refutation is reported.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{GrammarProof, GrammarRule, Proof};
use crate::grammar::{CfcstSystem, ReachCache};
use crate::semantics::{check_sigma, saturate, SigmaModel};
use crate::sequent::{Label, LabelledFormula, LabelledSequent, RelAtom};
use crate::syntax::Formula;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub max_labels: usize,
    pub max_steps: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_labels: 16, max_steps: 10_000 }
    }
}

/// Why the search gave up.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Unknown {
    LabelBudget,
    StepBudget,
    /// A stable sequent was reached but its model does not falsify the input.
    NotFalsified,
}

#[derive(Clone, Debug)]
pub enum Verdict {
    Valid(GrammarProof),
    Refuted { model: SigmaModel, world: Label },
    Unknown(Unknown),
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid(_))
    }

    pub fn is_refuted(&self) -> bool {
        matches!(self, Verdict::Refuted { .. })
    }
}

/// Searches for a proof of `∅ |- w0: f`.
pub fn prove_bounded(system: &CfcstSystem, f: &Formula, budget: Budget) -> Verdict {
    prove_sequent(system, &LabelledSequent::single(Label(0), f.clone()), budget)
}

/// Searches for a proof of an arbitrary sequent. A refutation falsifies every
/// formula of the input at its label; `world` is the smallest input label.
pub fn prove_sequent(system: &CfcstSystem, seq: &LabelledSequent, budget: Budget) -> Verdict {
    let mut s = Search {
        cache: ReachCache::new(system.clone()),
        budget,
        steps: 0,
        next: seq.max_label().map_or(0, |l| l.0 + 1),
        input: seq.clone(),
    };
    let world = seq.labels().into_iter().next().unwrap_or(Label(0));
    match s.run(seq.clone()) {
        Outcome::Proved(p) => Verdict::Valid(p),
        Outcome::Refuted(model) => Verdict::Refuted { model, world },
        Outcome::Unknown(u) => Verdict::Unknown(u),
    }
}

enum Outcome {
    Proved(GrammarProof),
    Refuted(SigmaModel),
    Unknown(Unknown),
}

enum Action {
    Close(GrammarRule),
    Unary(GrammarRule, LabelledSequent),
    Branch(GrammarRule, LabelledSequent, LabelledSequent),
    OutOfLabels,
    Stable,
}

struct Search {
    cache: ReachCache,
    budget: Budget,
    steps: usize,
    next: u32,
    input: LabelledSequent,
}

fn plus(seq: &LabelledSequent, w: Label, f: &Formula) -> LabelledSequent {
    let mut s = seq.clone();
    s.insert(w, f.clone());
    s
}

impl Search {
    fn run(&mut self, start: LabelledSequent) -> Outcome {
        let mut chain: Vec<(GrammarRule, LabelledSequent)> = Vec::new();
        let mut seq = start;
        let top = loop {
            self.steps += 1;
            if self.steps > self.budget.max_steps {
                return Outcome::Unknown(Unknown::StepBudget);
            }
            match self.next_action(&seq) {
                Action::Close(rule) => break Proof::leaf(rule, seq),
                Action::Unary(rule, premise) => {
                    chain.push((rule, seq));
                    seq = premise;
                }
                Action::Branch(rule, left, right) => match self.run(left) {
                    Outcome::Refuted(m) => return Outcome::Refuted(m),
                    Outcome::Proved(a) => match self.run(right) {
                        Outcome::Proved(b) => break Proof::new(rule, seq, vec![a, b]),
                        other => return other,
                    },
                    Outcome::Unknown(u) => {
                        return match self.run(right) {
                            Outcome::Refuted(m) => Outcome::Refuted(m),
                            _ => Outcome::Unknown(u),
                        }
                    }
                },
                Action::OutOfLabels => return Outcome::Unknown(Unknown::LabelBudget),
                Action::Stable => return self.refute(&seq),
            }
        };
        let mut proof = top;
        while let Some((rule, conclusion)) = chain.pop() {
            proof = Proof::new(rule, conclusion, vec![proof]);
        }
        Outcome::Proved(proof)
    }

    fn next_action(&mut self, seq: &LabelledSequent) -> Action {
        use Formula::*;
        for lf in &seq.formulas {
            match &lf.formula {
                Lit(a, true) if seq.contains(lf.label, &Lit(a.clone(), false)) => {
                    return Action::Close(GrammarRule::Id { label: lf.label, atom: a.clone() })
                }
                Top => return Action::Close(GrammarRule::Top { label: lf.label }),
                _ => {}
            }
        }
        for lf in &seq.formulas {
            if let Or(a, b) = &lf.formula {
                let w = lf.label;
                if !(seq.contains(w, a) && seq.contains(w, b)) {
                    let premise = plus(&plus(seq, w, a), w, b);
                    return Action::Unary(GrammarRule::Or { label: w, formula: lf.formula.clone() }, premise);
                }
            }
        }
        for lf in &seq.formulas {
            if let And(a, b) = &lf.formula {
                let w = lf.label;
                if !seq.contains(w, a) && !seq.contains(w, b) {
                    let rule = GrammarRule::And { label: w, formula: lf.formula.clone() };
                    return Action::Branch(rule, plus(seq, w, a), plus(seq, w, b));
                }
            }
        }
        let graph = seq.propagation_graph();
        let reach = self.cache.get(&graph);
        for lf in &seq.formulas {
            if let GDia(x, a) = &lf.formula {
                for u in reach.targets(x, lf.label) {
                    if !seq.contains(u, a) {
                        let path = reach.query(x, lf.label, u).expect("target is reachable");
                        let rule = GrammarRule::Dia { label: lf.label, formula: lf.formula.clone(), target: u, path };
                        return Action::Unary(rule, plus(seq, u, a));
                    }
                }
            }
        }
        for lf in &seq.formulas {
            if let GBox(x, a) = &lf.formula {
                let w = lf.label;
                let realized = graph.edges.iter().any(|(s, t, c)| *s == w && c == x && seq.contains(*t, a));
                if realized {
                    continue;
                }
                if seq.labels().len() >= self.budget.max_labels {
                    return Action::OutOfLabels;
                }
                let u = Label(self.next);
                self.next += 1;
                let mut premise = plus(seq, u, a);
                premise.atoms.insert(RelAtom::G(x.clone(), w, u));
                return Action::Unary(GrammarRule::Box { label: w, formula: lf.formula.clone(), fresh: u }, premise);
            }
        }
        Action::Stable
    }

    fn refute(&self, seq: &LabelledSequent) -> Outcome {
        let model = stable_model(self.cache.system(), seq);
        let falsified = self
            .input
            .formulas
            .iter()
            .all(|lf| matches!(check_sigma(&model, lf.label, &lf.formula), Ok(false)));
        if falsified {
            Outcome::Refuted(model)
        } else {
            Outcome::Unknown(Unknown::NotFalsified)
        }
    }
}

/// Worlds are labels, relations come from the atoms (then saturated), and
/// `p` holds exactly where `~p` occurs.
pub(crate) fn stable_model(system: &CfcstSystem, seq: &LabelledSequent) -> SigmaModel {
    let mut m = SigmaModel { worlds: seq.labels(), ..SigmaModel::default() };
    for a in &seq.atoms {
        if let RelAtom::G(c, w, u) = a {
            m.relations.entry(c.clone()).or_default().insert((*w, *u));
        }
    }
    let mut valuation: BTreeMap<_, std::collections::BTreeSet<Label>> = BTreeMap::new();
    for LabelledFormula { label, formula } in &seq.formulas {
        if let Formula::Lit(p, false) = formula {
            valuation.entry(p.clone()).or_default().insert(*label);
        }
    }
    m.valuation = valuation;
    saturate(system, &m)
}
