//! Finite Kripke models for both families and their model checkers.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::grammar::CfcstSystem;
use crate::sequent::Label;
use crate::syntax::{Atom, Character, Family, Formula};

/// Worlds are labels so that models read off sequents keep their names.
pub type World = Label;

type Rel = BTreeSet<(World, World)>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("world {0} is not in the model")]
    UnknownWorld(World),
    #[error("formula belongs to the other logic family")]
    WrongFamily,
}

/// A Σ-model: one accessibility relation per character.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SigmaModel {
    pub worlds: BTreeSet<World>,
    #[serde(default)]
    pub relations: BTreeMap<Character, Rel>,
    #[serde(default)]
    pub valuation: BTreeMap<Atom, BTreeSet<World>>,
}

fn successors(r: Option<&Rel>, w: World) -> impl Iterator<Item = World> + '_ {
    r.into_iter().flat_map(move |r| r.range((w, Label(0))..=(w, Label(u32::MAX))).map(|p| p.1))
}

fn compose(a: &Rel, b: &Rel) -> Rel {
    let mut out = Rel::new();
    for &(x, y) in a {
        out.extend(successors(Some(b), y).map(|z| (x, z)));
    }
    out
}

impl SigmaModel {
    pub fn relation(&self, c: &Character) -> Option<&Rel> {
        self.relations.get(c)
    }

    /// `R_s`: the diagonal for ε, otherwise the composite along `s`.
    pub fn string_relation(&self, s: &[Character]) -> Rel {
        let mut acc: Rel = self.worlds.iter().map(|&w| (w, w)).collect();
        for c in s {
            let r = self.relations.get(c).cloned().unwrap_or_default();
            acc = compose(&acc, &r);
        }
        acc
    }

    /// The converse condition holds for every stored relation.
    pub fn converse_closed(&self) -> bool {
        self.relations.iter().all(|(c, r)| {
            let conv = self.relations.get(&c.converse());
            r.iter().all(|&(a, b)| conv.is_some_and(|cr| cr.contains(&(b, a))))
        })
    }

    /// Every production `x -> s` of `system` has `R_s ⊆ R_x`.
    pub fn satisfies(&self, system: &CfcstSystem) -> bool {
        system.rules().iter().all(|rule| {
            let rs = self.string_relation(&rule.tail.0);
            let rx = self.relations.get(&rule.head);
            rs.iter().all(|p| rx.is_some_and(|r| r.contains(p)))
        })
    }
}

/// Least extension of `m` that satisfies the converse condition and every
/// production of `system`.
pub fn saturate(system: &CfcstSystem, m: &SigmaModel) -> SigmaModel {
    let mut out = m.clone();
    loop {
        let mut changed = false;
        let snapshot: Vec<(Character, Rel)> = out.relations.iter().map(|(c, r)| (c.clone(), r.clone())).collect();
        for (c, r) in snapshot {
            let conv = out.relations.entry(c.converse()).or_default();
            for (a, b) in r {
                changed |= conv.insert((b, a));
            }
        }
        for rule in system.rules() {
            let rs = out.string_relation(&rule.tail.0);
            let rx = out.relations.entry(rule.head.clone()).or_default();
            for p in rs {
                changed |= rx.insert(p);
            }
        }
        if !changed {
            return out;
        }
    }
}

fn lit(val: &BTreeMap<Atom, BTreeSet<World>>, a: &Atom, pos: bool, w: World) -> bool {
    val.get(a).is_some_and(|s| s.contains(&w)) == pos
}

fn eval_sigma(m: &SigmaModel, w: World, f: &Formula) -> bool {
    use Formula::*;
    match f {
        Lit(a, pos) => lit(&m.valuation, a, *pos, w),
        Top => true,
        Bot => false,
        Or(a, b) => eval_sigma(m, w, a) || eval_sigma(m, w, b),
        And(a, b) => eval_sigma(m, w, a) && eval_sigma(m, w, b),
        GDia(c, a) => successors(m.relations.get(c), w).any(|u| eval_sigma(m, u, a)),
        GBox(c, a) => successors(m.relations.get(c), w).all(|u| eval_sigma(m, u, a)),
        _ => unreachable!("family checked by the caller"),
    }
}

/// `M, w ⊩ f` for a grammar-logic formula.
pub fn check_sigma(m: &SigmaModel, w: World, f: &Formula) -> Result<bool, ModelError> {
    if !m.worlds.contains(&w) {
        return Err(ModelError::UnknownWorld(w));
    }
    if f.family() == Some(Family::Stit) || f.is_mixed() {
        return Err(ModelError::WrongFamily);
    }
    Ok(eval_sigma(m, w, f))
}

/// True at every world.
pub fn sigma_globally_true(m: &SigmaModel, f: &Formula) -> bool {
    m.worlds.iter().all(|&w| check_sigma(m, w, f).unwrap_or(false))
}

/// A single-agent deontic STIT model.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DsModel {
    pub worlds: BTreeSet<World>,
    pub choice: Rel,
    pub ideal: BTreeSet<World>,
    #[serde(default)]
    pub valuation: BTreeMap<Atom, BTreeSet<World>>,
    #[serde(default)]
    pub k: usize,
}

/// A violated frame condition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
pub enum Violation {
    #[error("W: the set of worlds is empty")]
    NoWorlds,
    #[error("P: choice is not an equivalence relation ({0})")]
    P(String),
    #[error("Ck: {classes} choice cells exceed k = {k}")]
    Ck { classes: usize, k: usize },
    #[error("D1: ideal world {0} is not in W")]
    D1(World),
    #[error("D2: the ideal set is empty")]
    D2,
    #[error("D3: ideal set is not closed under choice at {0}")]
    D3(World),
}

impl DsModel {
    pub fn cell(&self, w: World) -> impl Iterator<Item = World> + '_ {
        successors(Some(&self.choice), w)
    }

    /// Distinct choice cells.
    pub fn classes(&self) -> BTreeSet<BTreeSet<World>> {
        self.worlds.iter().map(|&w| self.cell(w).collect()).collect()
    }
}

pub fn validate_ds(m: &DsModel) -> Result<(), Vec<Violation>> {
    let mut out = Vec::new();
    if m.worlds.is_empty() {
        out.push(Violation::NoWorlds);
    }
    let mut p_problem = None;
    if let Some(&(a, b)) = m.choice.iter().find(|(a, b)| !m.worlds.contains(a) || !m.worlds.contains(b)) {
        p_problem = Some(format!("pair ({a},{b}) leaves W"));
    } else if let Some(w) = m.worlds.iter().find(|w| !m.choice.contains(&(**w, **w))) {
        p_problem = Some(format!("not reflexive at {w}"));
    } else if let Some((a, b)) = m.choice.iter().find(|(a, b)| !m.choice.contains(&(*b, *a))) {
        p_problem = Some(format!("not symmetric at ({a},{b})"));
    } else {
        'outer: for &(a, b) in &m.choice {
            for c in m.cell(b) {
                if !m.choice.contains(&(a, c)) {
                    p_problem = Some(format!("not transitive at ({a},{b}),({b},{c})"));
                    break 'outer;
                }
            }
        }
    }
    if let Some(p) = p_problem {
        out.push(Violation::P(p));
    }
    let classes = m.classes().len();
    if m.k > 0 && classes > m.k {
        out.push(Violation::Ck { classes, k: m.k });
    }
    if let Some(w) = m.ideal.iter().find(|w| !m.worlds.contains(w)) {
        out.push(Violation::D1(*w));
    }
    if m.ideal.is_empty() {
        out.push(Violation::D2);
    }
    if let Some(w) = m.ideal.iter().find(|&&w| m.cell(w).any(|u| !m.ideal.contains(&u))) {
        out.push(Violation::D3(*w));
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

fn eval_ds(m: &DsModel, w: World, f: &Formula) -> bool {
    use Formula::*;
    match f {
        Lit(a, pos) => lit(&m.valuation, a, *pos, w),
        Top => true,
        Bot => false,
        Or(a, b) => eval_ds(m, w, a) || eval_ds(m, w, b),
        And(a, b) => eval_ds(m, w, a) && eval_ds(m, w, b),
        SDia(a) => m.worlds.iter().any(|&u| eval_ds(m, u, a)),
        SBox(a) => m.worlds.iter().all(|&u| eval_ds(m, u, a)),
        CDia(a) => m.cell(w).any(|u| eval_ds(m, u, a)),
        CBox(a) => m.cell(w).all(|u| eval_ds(m, u, a)),
        ODia(a) => m.ideal.iter().any(|&u| eval_ds(m, u, a)),
        OBox(a) => m.ideal.iter().all(|&u| eval_ds(m, u, a)),
        GDia(..) | GBox(..) => unreachable!("family checked by the caller"),
    }
}

/// `M, w ⊩ f` for a STIT formula.
pub fn check_ds(m: &DsModel, w: World, f: &Formula) -> Result<bool, ModelError> {
    if !m.worlds.contains(&w) {
        return Err(ModelError::UnknownWorld(w));
    }
    if f.family() == Some(Family::Grammar) || f.is_mixed() {
        return Err(ModelError::WrongFamily);
    }
    Ok(eval_ds(m, w, f))
}

pub fn ds_globally_true(m: &DsModel, f: &Formula) -> bool {
    m.worlds.iter().all(|&w| check_ds(m, w, f).unwrap_or(false))
}

/// Size and vocabulary limits for random models.
#[derive(Clone, Debug)]
pub struct ModelBounds {
    pub max_worlds: usize,
    pub atoms: Vec<Atom>,
    /// Probability of each possible edge, per forward character.
    pub density: f64,
}

impl Default for ModelBounds {
    fn default() -> Self {
        ModelBounds { max_worlds: 4, atoms: vec!["p".into(), "q".into()], density: 0.35 }
    }
}

fn random_valuation(rng: &mut ChaCha8Rng, atoms: &[Atom], worlds: &BTreeSet<World>) -> BTreeMap<Atom, BTreeSet<World>> {
    atoms
        .iter()
        .map(|a| (a.clone(), worlds.iter().copied().filter(|_| rng.random_bool(0.5)).collect()))
        .collect()
}

/// Saturated Σ-models over the forward characters of `system` plus `extra`.
pub struct RandomSigmaModels {
    rng: ChaCha8Rng,
    bounds: ModelBounds,
    system: CfcstSystem,
    chars: Vec<Character>,
}

pub fn random_sigma_models(
    seed: u64,
    bounds: ModelBounds,
    system: &CfcstSystem,
    extra: impl IntoIterator<Item = Character>,
) -> RandomSigmaModels {
    let chars: BTreeSet<Character> = system
        .alphabet()
        .iter()
        .cloned()
        .chain(extra)
        .map(|c| if c.backward { c.converse() } else { c })
        .collect();
    RandomSigmaModels {
        rng: ChaCha8Rng::seed_from_u64(seed),
        bounds,
        system: system.clone(),
        chars: chars.into_iter().collect(),
    }
}

impl Iterator for RandomSigmaModels {
    type Item = SigmaModel;

    fn next(&mut self) -> Option<SigmaModel> {
        let n = self.rng.random_range(1..=self.bounds.max_worlds.max(1));
        let worlds: BTreeSet<World> = (0..n as u32).map(Label).collect();
        let mut relations = BTreeMap::new();
        for c in &self.chars {
            let mut r = Rel::new();
            for &a in &worlds {
                for &b in &worlds {
                    if self.rng.random_bool(self.bounds.density) {
                        r.insert((a, b));
                    }
                }
            }
            relations.insert(c.clone(), r);
        }
        let valuation = random_valuation(&mut self.rng, &self.bounds.atoms, &worlds);
        Some(saturate(&self.system, &SigmaModel { worlds, relations, valuation }))
    }
}

/// Valid DS-models with at most `k` cells (any number when `k = 0`).
pub struct RandomDsModels {
    rng: ChaCha8Rng,
    bounds: ModelBounds,
    k: usize,
}

pub fn random_ds_models(seed: u64, bounds: ModelBounds, k: usize) -> RandomDsModels {
    RandomDsModels { rng: ChaCha8Rng::seed_from_u64(seed), bounds, k }
}

impl RandomDsModels {
    fn sample(&mut self) -> DsModel {
        let n = self.rng.random_range(1..=self.bounds.max_worlds.max(1));
        let worlds: Vec<World> = (0..n as u32).map(Label).collect();
        let max_cells = if self.k == 0 { n } else { self.k.min(n) };
        let cells = self.rng.random_range(1..=max_cells);
        let mut cell_of: Vec<usize> = (0..n).map(|i| if i < cells { i } else { self.rng.random_range(0..cells) }).collect();
        cell_of.shuffle(&mut self.rng);
        let choice = worlds
            .iter()
            .flat_map(|&a| worlds.iter().map(move |&b| (a, b)))
            .filter(|(a, b)| cell_of[a.0 as usize] == cell_of[b.0 as usize])
            .collect();
        let mut chosen: Vec<bool> = (0..cells).map(|_| self.rng.random_bool(0.5)).collect();
        let forced = self.rng.random_range(0..cells);
        chosen[forced] = true;
        let ideal = worlds.iter().copied().filter(|w| chosen[cell_of[w.0 as usize]]).collect();
        let worlds: BTreeSet<World> = worlds.into_iter().collect();
        let valuation = random_valuation(&mut self.rng, &self.bounds.atoms, &worlds);
        DsModel { worlds, choice, ideal, valuation, k: self.k }
    }
}

impl Iterator for RandomDsModels {
    type Item = DsModel;

    fn next(&mut self) -> Option<DsModel> {
        loop {
            let m = self.sample();
            if validate_ds(&m).is_ok() {
                return Some(m);
            }
        }
    }
}
