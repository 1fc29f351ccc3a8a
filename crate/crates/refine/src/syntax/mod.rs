//! Formulas in negation normal form for grammar logics and deontic STIT.
//!
//! Both families share one AST. Negation only ever sits on atoms; the
//! [`negate`] function pushes a negation through by swapping every
//! connective and modality with its dual.

mod parse;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use parse::{parse, parse_implication, parse_in, Family, ParseError};

/// Propositional variable name.
pub type Atom = Arc<str>;

/// A character of the alphabet. Backward characters print with a trailing `'`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Character {
    pub base: Arc<str>,
    pub backward: bool,
}

impl Character {
    pub fn forward(base: &str) -> Self {
        Character { base: base.into(), backward: false }
    }

    pub fn backward(base: &str) -> Self {
        Character { base: base.into(), backward: true }
    }

    pub fn converse(&self) -> Self {
        Character { base: self.base.clone(), backward: !self.backward }
    }
}

impl fmt::Display for Character {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.backward {
            write!(f, "{}'", self.base)
        } else {
            f.write_str(&self.base)
        }
    }
}

impl fmt::Debug for Character {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Error for a malformed character token.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid character `{0}`")]
pub struct BadCharacter(pub String);

impl FromStr for Character {
    type Err = BadCharacter;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (base, backward) = match s.strip_suffix('\'') {
            Some(b) => (b, true),
            None => (s, false),
        };
        if !is_ident(base) {
            return Err(BadCharacter(s.to_string()));
        }
        Ok(Character { base: base.into(), backward })
    }
}

pub(crate) fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Serialize for Character {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Character {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A string over the alphabet; the empty string is ε.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Str(pub Vec<Character>);

impl Str {
    pub fn epsilon() -> Self {
        Str(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Reverses the string and converts each character.
    pub fn converse(&self) -> Self {
        Str(self.0.iter().rev().map(Character::converse).collect())
    }

    /// Parses whitespace separated characters; `eps` or an empty input is ε.
    pub fn parse_spaced(s: &str) -> Result<Self, BadCharacter> {
        let mut out = Vec::new();
        for tok in s.split_whitespace() {
            if tok == "eps" {
                continue;
            }
            out.push(tok.parse()?);
        }
        Ok(Str(out))
    }
}

impl From<Vec<Character>> for Str {
    fn from(v: Vec<Character>) -> Self {
        Str(v)
    }
}

impl fmt::Display for Str {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("eps");
        }
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Str {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// NNF formula. `S*` are the settledness modalities, `C*` the agent's choice
/// modalities and `O*` the obligation/permission pair.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Lit(Atom, bool),
    Top,
    Bot,
    Or(Arc<Formula>, Arc<Formula>),
    And(Arc<Formula>, Arc<Formula>),
    GDia(Character, Arc<Formula>),
    GBox(Character, Arc<Formula>),
    SDia(Arc<Formula>),
    SBox(Arc<Formula>),
    CDia(Arc<Formula>),
    CBox(Arc<Formula>),
    ODia(Arc<Formula>),
    OBox(Arc<Formula>),
}

use Formula::*;

impl Formula {
    pub fn atom(name: &str) -> Self {
        Lit(name.into(), true)
    }

    pub fn neg_atom(name: &str) -> Self {
        Lit(name.into(), false)
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Or(Arc::new(a), Arc::new(b))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        And(Arc::new(a), Arc::new(b))
    }

    pub fn dia(c: Character, a: Formula) -> Self {
        GDia(c, Arc::new(a))
    }

    pub fn boxed(c: Character, a: Formula) -> Self {
        GBox(c, Arc::new(a))
    }

    pub fn settled_dia(a: Formula) -> Self {
        SDia(Arc::new(a))
    }

    pub fn settled(a: Formula) -> Self {
        SBox(Arc::new(a))
    }

    pub fn choice_dia(a: Formula) -> Self {
        CDia(Arc::new(a))
    }

    pub fn choice(a: Formula) -> Self {
        CBox(Arc::new(a))
    }

    pub fn permitted(a: Formula) -> Self {
        ODia(Arc::new(a))
    }

    pub fn ought(a: Formula) -> Self {
        OBox(Arc::new(a))
    }

    /// `a -> b`, i.e. `negate(a) | b`.
    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::or(negate(&a), b)
    }

    /// Right-nested disjunction; the empty disjunction is `bot`.
    pub fn big_or(items: impl IntoIterator<Item = Formula>) -> Self {
        fold_right(items.into_iter().collect(), Bot, Formula::or)
    }

    /// Right-nested conjunction; the empty conjunction is `top`.
    pub fn big_and(items: impl IntoIterator<Item = Formula>) -> Self {
        fold_right(items.into_iter().collect(), Top, Formula::and)
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, Lit(..))
    }

    /// The family this formula commits to, or `None` for purely propositional ones.
    pub fn family(&self) -> Option<Family> {
        let mut fam = None;
        let mut mixed = false;
        self.visit(&mut |f| {
            let here = match f {
                GDia(..) | GBox(..) => Some(Family::Grammar),
                SDia(_) | SBox(_) | CDia(_) | CBox(_) | ODia(_) | OBox(_) => Some(Family::Stit),
                _ => None,
            };
            if let Some(h) = here {
                match fam {
                    None => fam = Some(h),
                    Some(prev) if prev != h => mixed = true,
                    _ => {}
                }
            }
        });
        if mixed {
            None
        } else {
            fam
        }
    }

    /// True if grammar and STIT modalities occur together.
    pub fn is_mixed(&self) -> bool {
        let (mut g, mut s) = (false, false);
        self.visit(&mut |f| match f {
            GDia(..) | GBox(..) => g = true,
            SDia(_) | SBox(_) | CDia(_) | CBox(_) | ODia(_) | OBox(_) => s = true,
            _ => {}
        });
        g && s
    }

    /// Pre-order traversal.
    pub fn visit(&self, f: &mut impl FnMut(&Formula)) {
        f(self);
        match self {
            Lit(..) | Top | Bot => {}
            Or(a, b) | And(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            GDia(_, a) | GBox(_, a) | SDia(a) | SBox(a) | CDia(a) | CBox(a) | ODia(a)
            | OBox(a) => a.visit(f),
        }
    }

    pub fn is_modal(&self) -> bool {
        !matches!(self, Lit(..) | Top | Bot | Or(..) | And(..))
    }

    /// Number of distinct modal subformulas.
    pub fn modal_subformulas(&self) -> usize {
        let mut seen = BTreeSet::new();
        self.visit(&mut |f| {
            if f.is_modal() {
                seen.insert(f.clone());
            }
        });
        seen.len()
    }

    /// Characters occurring as modal indices.
    pub fn characters(&self) -> BTreeSet<Character> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let GDia(c, _) | GBox(c, _) = f {
                out.insert(c.clone());
            }
        });
        out
    }

    pub fn atoms(&self) -> BTreeSet<Atom> {
        literals(self).into_iter().map(|(a, _)| a).collect()
    }
}

fn fold_right(mut items: Vec<Formula>, unit: Formula, op: fn(Formula, Formula) -> Formula) -> Formula {
    let Some(mut acc) = items.pop() else { return unit };
    while let Some(f) = items.pop() {
        acc = op(f, acc);
    }
    acc
}

/// Dual of a formula: literal polarity flips, each connective and modality
/// swaps with its dual.
pub fn negate(f: &Formula) -> Formula {
    let n = |a: &Arc<Formula>| Arc::new(negate(a));
    match f {
        Lit(a, pos) => Lit(a.clone(), !pos),
        Top => Bot,
        Bot => Top,
        Or(a, b) => And(n(a), n(b)),
        And(a, b) => Or(n(a), n(b)),
        GDia(c, a) => GBox(c.clone(), n(a)),
        GBox(c, a) => GDia(c.clone(), n(a)),
        SDia(a) => SBox(n(a)),
        SBox(a) => SDia(n(a)),
        CDia(a) => CBox(n(a)),
        CBox(a) => CDia(n(a)),
        ODia(a) => OBox(n(a)),
        OBox(a) => ODia(n(a)),
    }
}

/// Counts nested binary connectives and modalities along the deepest branch.
/// `top` and `bot` count as 1 since they abbreviate `p | ~p` and `p & ~p`.
pub fn complexity(f: &Formula) -> usize {
    match f {
        Lit(..) => 0,
        Top | Bot => 1,
        Or(a, b) | And(a, b) => complexity(a).max(complexity(b)) + 1,
        GDia(_, a) | GBox(_, a) | SDia(a) | SBox(a) | CDia(a) | CBox(a) | ODia(a) | OBox(a) => {
            complexity(a) + 1
        }
    }
}

/// Literals with polarity (`true` = positive).
pub fn literals(f: &Formula) -> BTreeSet<(Atom, bool)> {
    let mut out = BTreeSet::new();
    f.visit(&mut |g| {
        if let Lit(a, p) = g {
            out.insert((a.clone(), *p));
        }
    });
    out
}

// Printing. Binding strength: modalities and literals 3, `&` 2, `|` 1.
fn prec(f: &Formula) -> u8 {
    match f {
        Or(..) => 1,
        And(..) => 2,
        _ => 3,
    }
}

fn write_at(f: &Formula, min: u8, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    if prec(f) < min {
        out.write_str("(")?;
        write_at(f, 0, out)?;
        return out.write_str(")");
    }
    match f {
        Lit(a, true) => out.write_str(a),
        Lit(a, false) => write!(out, "~{a}"),
        Top => out.write_str("top"),
        Bot => out.write_str("bot"),
        Or(a, b) => {
            write_at(a, 1, out)?;
            out.write_str(" | ")?;
            write_at(b, 2, out)
        }
        And(a, b) => {
            write_at(a, 2, out)?;
            out.write_str(" & ")?;
            write_at(b, 3, out)
        }
        GDia(c, a) => {
            write!(out, "<{c}>")?;
            write_at(a, 3, out)
        }
        GBox(c, a) => {
            write!(out, "[{c}]")?;
            write_at(a, 3, out)
        }
        SDia(a) => unary("<*>", a, out),
        SBox(a) => unary("[*]", a, out),
        CDia(a) => unary("<0>", a, out),
        CBox(a) => unary("[0]", a, out),
        ODia(a) => unary("<o>", a, out),
        OBox(a) => unary("[o]", a, out),
    }
}

fn unary(op: &str, a: &Formula, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    out.write_str(op)?;
    write_at(a, 3, out)
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_at(self, 0, f)
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Renders a formula in the concrete syntax accepted by [`parse`].
pub fn print(f: &Formula) -> String {
    f.to_string()
}

impl FromStr for Formula {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

impl Serialize for Formula {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Formula {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(s: &str) -> Formula {
        parse(s).unwrap()
    }

    #[test]
    fn negation_example() {
        assert_eq!(negate(&f("[a]~p & q")), f("<a>p | ~q"));
        assert_eq!(negate(&f("[o](p | ~q)")), f("<o>(~p & q)"));
        assert_eq!(negate(&Top), Bot);
    }

    #[test]
    fn complexity_examples() {
        assert_eq!(complexity(&f("p")), 0);
        assert_eq!(complexity(&f("~p")), 0);
        assert_eq!(complexity(&f("p & q")), 1);
        assert_eq!(complexity(&f("[a](p | q)")), 2);
        assert_eq!(complexity(&Top), 1);
    }

    #[test]
    fn converse_is_involutive() {
        let a = Character::forward("a");
        assert_ne!(a, a.converse());
        assert_eq!(a.converse().converse(), a);
        let s = Str(vec![a.clone(), Character::forward("b")]);
        assert_eq!(s.converse().to_string(), "b' a'");
        assert_eq!(s.converse().converse(), s);
        assert_eq!(Str::epsilon().converse(), Str::epsilon());
    }

    #[test]
    fn big_connectives() {
        assert_eq!(Formula::big_or(vec![]), Bot);
        assert_eq!(Formula::big_and(vec![]), Top);
        assert_eq!(Formula::big_or(vec![f("p"), f("q"), f("r")]), f("p | (q | r)"));
        assert_eq!(negate(&Formula::big_or(vec![f("p"), f("q")])), Formula::big_and(vec![f("~p"), f("~q")]));
    }

    #[test]
    fn families() {
        assert_eq!(f("[a]p").family(), Some(Family::Grammar));
        assert_eq!(f("[0]p").family(), Some(Family::Stit));
        assert_eq!(f("p | q").family(), None);
    }
}
