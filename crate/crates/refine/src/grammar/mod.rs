//! Context-free closed semi-Thue (CFCST) systems.
//!
//! A production `x -> s` rewrites the single character `x` into the string
//! `s`. A system is closed when `x -> s` is present exactly when the converse
//! production `x' -> s'` is.

mod reach;

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use crate::syntax::{BadCharacter, Character, Str};

pub use reach::{in_language, reachable, PathWitness, ReachCache, Reachability};

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Production {
    pub head: Character,
    pub tail: Str,
}

impl Production {
    pub fn new(head: Character, tail: impl Into<Str>) -> Self {
        Production { head, tail: tail.into() }
    }

    pub fn converse(&self) -> Self {
        Production { head: self.head.converse(), tail: self.tail.converse() }
    }
}

impl fmt::Display for Production {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.head, self.tail)
    }
}

impl fmt::Debug for Production {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GrammarError {
    #[error("closure violation: `{rule}` present but `{}` missing", rule.converse())]
    ClosureViolation { rule: Production },
    #[error("character `{0}` is not in the alphabet")]
    UnknownCharacter(Character),
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
}

impl From<(usize, BadCharacter)> for GrammarError {
    fn from((line, e): (usize, BadCharacter)) -> Self {
        GrammarError::Syntax { line, msg: e.to_string() }
    }
}

/// A validated CFCST system. The alphabet is always converse-closed.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct CfcstSystem {
    alphabet: BTreeSet<Character>,
    rules: BTreeSet<Production>,
}

/// Builds a system. With `auto_close` the converse of every rule is added;
/// otherwise a missing converse is reported.
pub fn build_system(
    alphabet: impl IntoIterator<Item = Character>,
    rules: impl IntoIterator<Item = Production>,
    auto_close: bool,
) -> Result<CfcstSystem, GrammarError> {
    let alphabet: BTreeSet<Character> =
        alphabet.into_iter().flat_map(|c| [c.converse(), c]).collect();
    let mut set: BTreeSet<Production> = rules.into_iter().collect();
    for r in &set {
        for c in std::iter::once(&r.head).chain(&r.tail.0) {
            if !alphabet.contains(c) {
                return Err(GrammarError::UnknownCharacter(c.clone()));
            }
        }
    }
    if auto_close {
        let extra: Vec<_> = set.iter().map(Production::converse).collect();
        set.extend(extra);
    }
    let system = CfcstSystem { alphabet, rules: set };
    system.audit()?;
    Ok(system)
}

impl CfcstSystem {
    /// The system with no productions over the given alphabet.
    pub fn empty() -> Self {
        CfcstSystem::default()
    }

    /// `{a -> eps, a -> a a}` and converses: reflexive-transitive `a`.
    pub fn s4(base: &str) -> Self {
        let a = Character::forward(base);
        build_system(
            [a.clone()],
            [Production::new(a.clone(), vec![]), Production::new(a.clone(), vec![a.clone(), a])],
            true,
        )
        .expect("closed by construction")
    }

    pub fn alphabet(&self) -> &BTreeSet<Character> {
        &self.alphabet
    }

    pub fn rules(&self) -> &BTreeSet<Production> {
        &self.rules
    }

    pub fn has_epsilon_rule(&self) -> bool {
        self.rules.iter().any(|r| r.tail.is_empty())
    }

    /// Re-checks the closure condition and alphabet membership.
    pub fn audit(&self) -> Result<(), GrammarError> {
        for r in &self.rules {
            for c in std::iter::once(&r.head).chain(&r.tail.0) {
                if !self.alphabet.contains(c) {
                    return Err(GrammarError::UnknownCharacter(c.clone()));
                }
            }
            if !self.rules.contains(&r.converse()) {
                return Err(GrammarError::ClosureViolation { rule: r.clone() });
            }
        }
        if self.alphabet.iter().any(|c| !self.alphabet.contains(&c.converse())) {
            unreachable!("alphabet is closed on construction");
        }
        Ok(())
    }

    /// Parses the line-based file format:
    ///
    /// ```text
    /// # comment
    /// alphabet: a b
    /// a -> a b'
    /// a' -> eps
    /// ```
    ///
    /// Without an `alphabet:` line the alphabet is inferred from the rules.
    pub fn parse(text: &str, auto_close: bool) -> Result<Self, GrammarError> {
        let mut alphabet: Option<Vec<Character>> = None;
        let mut rules = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("alphabet:") {
                let chars = Str::parse_spaced(rest).map_err(|e| (line_no, e))?;
                alphabet.get_or_insert_with(Vec::new).extend(chars.0);
                continue;
            }
            let Some((head, tail)) = line.split_once("->") else {
                return Err(GrammarError::Syntax { line: line_no, msg: "expected `head -> tail`".into() });
            };
            let head: Character = head.trim().parse().map_err(|e| (line_no, e))?;
            let tail = Str::parse_spaced(tail).map_err(|e| (line_no, e))?;
            rules.push(Production { head, tail });
        }
        let alphabet = alphabet.unwrap_or_else(|| {
            rules.iter().flat_map(|r| std::iter::once(r.head.clone()).chain(r.tail.0.clone())).collect()
        });
        build_system(alphabet, rules, auto_close)
    }

    /// Renders the system in the file format read by [`CfcstSystem::parse`].
    pub fn to_text(&self) -> String {
        let bases: BTreeSet<_> = self.alphabet.iter().map(|c| c.base.clone()).collect();
        let mut out = String::from("alphabet:");
        for b in bases {
            out.push(' ');
            out.push_str(&b);
        }
        out.push('\n');
        for r in &self.rules {
            out.push_str(&r.to_string());
            out.push('\n');
        }
        out
    }

    /// All strings reachable from `s` by one rewrite step.
    pub fn one_step(&self, s: &Str) -> Vec<Str> {
        let mut out = Vec::new();
        for (i, c) in s.0.iter().enumerate() {
            for r in self.rules.iter().filter(|r| &r.head == c) {
                let mut next = Vec::with_capacity(s.len() + r.tail.len());
                next.extend_from_slice(&s.0[..i]);
                next.extend_from_slice(&r.tail.0);
                next.extend_from_slice(&s.0[i + 1..]);
                out.push(Str(next));
            }
        }
        out
    }
}

/// Brute-force check that `target` is derivable from `start` in at most
/// `max_steps` rewrites. Breadth-first with length pruning.
pub fn derives(system: &CfcstSystem, start: &Str, target: &Str, max_steps: usize) -> bool {
    if start == target {
        return true;
    }
    let shrinks = system.has_epsilon_rule();
    let mut seen: HashSet<Str> = HashSet::from([start.clone()]);
    let mut frontier = vec![start.clone()];
    for step in 0..max_steps {
        let remaining = max_steps - step - 1;
        let slack = if shrinks { remaining } else { 0 };
        let mut next = Vec::new();
        for s in &frontier {
            for succ in system.one_step(s) {
                if &succ == target {
                    return true;
                }
                if succ.len() > target.len() + slack {
                    continue;
                }
                if seen.insert(succ.clone()) {
                    next.push(succ);
                }
            }
        }
        if next.is_empty() {
            return false;
        }
        frontier = next;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(s: &str) -> Character {
        s.parse().unwrap()
    }

    fn st(s: &str) -> Str {
        Str::parse_spaced(s).unwrap()
    }

    #[test]
    fn closure_is_validated() {
        let err = build_system([c("a")], [Production::new(c("a"), vec![])], false).unwrap_err();
        assert!(matches!(err, GrammarError::ClosureViolation { .. }));
        let s4 = CfcstSystem::parse("alphabet: a\na -> eps\na -> a a\na' -> eps\na' -> a' a'\n", false).unwrap();
        assert_eq!(s4, CfcstSystem::s4("a"));
    }

    #[test]
    fn auto_close_adds_converses() {
        let s = CfcstSystem::parse("alphabet: a b c\na -> b b'\nb' -> b' c a\n", true).unwrap();
        let rules: Vec<String> = s.rules().iter().map(|r| r.to_string()).collect();
        assert_eq!(rules.len(), 4);
        assert!(rules.contains(&"a' -> b b'".to_string()));
        assert!(rules.contains(&"b -> a' c' b".to_string()));
    }

    #[test]
    fn unknown_characters_are_rejected() {
        let err = CfcstSystem::parse("alphabet: a\na -> b\n", true).unwrap_err();
        assert_eq!(err, GrammarError::UnknownCharacter(c("b")));
        assert!(matches!(CfcstSystem::parse("a => b", true), Err(GrammarError::Syntax { line: 1, .. })));
    }

    #[test]
    fn derivation_examples() {
        let s = CfcstSystem::parse("alphabet: a b\na -> b b\nb -> b'\n", true).unwrap();
        assert!(derives(&s, &st("a"), &st("a"), 0));
        assert!(derives(&s, &st("a b"), &st("b b b"), 1));
        assert!(derives(&s, &st("a b"), &st("a b'"), 1));
        assert!(!derives(&s, &st("a b"), &st("b' b b'"), 1));
        assert!(derives(&s, &st("a b"), &st("b' b b'"), 3));
        let s4 = CfcstSystem::s4("a");
        assert!(derives(&s4, &st("a"), &st("a a a"), 2));
        assert!(!derives(&s4, &st("a"), &st("a a a"), 1));
        assert!(derives(&s4, &st("a"), &st("eps"), 1));
    }

    #[test]
    fn text_round_trip() {
        let s = CfcstSystem::parse("alphabet: a b\na -> b a' # comment\n", true).unwrap();
        assert_eq!(CfcstSystem::parse(&s.to_text(), false).unwrap(), s);
    }
}
