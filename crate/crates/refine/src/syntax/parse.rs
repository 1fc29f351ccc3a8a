//! Recursive-descent parser for the ASCII formula syntax.
//!
//! ```text
//! phi ::= ATOM | ~ATOM | top | bot | (phi) | phi & phi | phi | phi
//!       | phi -> phi | <IDX> phi | [IDX] phi
//! ```
//!
//! Modalities bind tightest, then `&`, then `|`, then `->` (right
//! associative). `&` and `|` associate to the left.

use std::sync::Arc;

use super::{negate, Character, Formula};

/// The two logic families sharing the formula type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Grammar,
    Stit,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("lexical error at byte {offset}: {msg}")]
    Lexical { offset: usize, msg: String },
    #[error("syntax error at byte {offset}: {msg}")]
    Syntax { offset: usize, msg: String },
    #[error("family mixing at byte {offset}: {msg}")]
    FamilyMix { offset: usize, msg: String },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Lexical { offset, .. }
            | ParseError::Syntax { offset, .. }
            | ParseError::FamilyMix { offset, .. } => *offset,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Tilde,
    Amp,
    Bar,
    Arrow,
    LParen,
    RParen,
    Modal { diamond: bool, idx: String },
    Eof,
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let lexical = |offset, msg: &str| ParseError::Lexical { offset, msg: msg.to_string() };
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'~' => out.push((Tok::Tilde, start)),
            b'&' => out.push((Tok::Amp, start)),
            b'|' => out.push((Tok::Bar, start)),
            b'(' => out.push((Tok::LParen, start)),
            b')' => out.push((Tok::RParen, start)),
            b'-' => {
                if bytes.get(i + 1) != Some(&b'>') {
                    return Err(lexical(start, "expected `->`"));
                }
                i += 1;
                out.push((Tok::Arrow, start));
            }
            b'<' | b'[' => {
                let close = if c == b'<' { b'>' } else { b']' };
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_whitespace() {
                    i += 1;
                }
                let idx_start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'*' || bytes[i] == b'\'')
                {
                    i += 1;
                }
                let idx = src[idx_start..i].to_string();
                while i < bytes.len() && bytes[i].is_ascii_whitespace() {
                    i += 1;
                }
                if bytes.get(i) != Some(&close) {
                    return Err(lexical(i, &format!("expected `{}`", close as char)));
                }
                let valid = idx == "*" || idx == "0" || idx.parse::<Character>().is_ok();
                if !valid {
                    return Err(lexical(idx_start, &format!("invalid modal index `{idx}`")));
                }
                out.push((Tok::Modal { diamond: c == b'<', idx }, start));
            }
            _ if c.is_ascii_alphabetic() => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(src[start..i].to_string()), start));
                continue;
            }
            _ => {
                let ch = src[start..].chars().next().unwrap_or('?');
                return Err(lexical(start, &format!("unexpected character `{ch}`")));
            }
        }
        i += 1;
    }
    out.push((Tok::Eof, src.len()));
    Ok(out)
}

fn is_stit_only(idx: &str) -> bool {
    idx == "*" || idx == "0"
}

fn is_grammar_only(idx: &str) -> bool {
    !is_stit_only(idx) && idx != "o"
}

fn resolve_family(toks: &[(Tok, usize)], forced: Option<Family>) -> Result<Family, ParseError> {
    let mut seen: Option<(Family, usize)> = forced.map(|f| (f, 0));
    for (tok, off) in toks {
        let Tok::Modal { idx, .. } = tok else { continue };
        let here = if is_stit_only(idx) {
            Family::Stit
        } else if is_grammar_only(idx) {
            Family::Grammar
        } else {
            continue;
        };
        match seen {
            None => seen = Some((here, *off)),
            Some((fam, _)) if fam != here => {
                return Err(ParseError::FamilyMix {
                    offset: *off,
                    msg: format!("index `{idx}` does not belong to the {fam:?} family"),
                })
            }
            _ => {}
        }
    }
    // A lone `o` index is read as the obligation modality.
    Ok(seen.map(|(f, _)| f).unwrap_or(Family::Stit))
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    family: Family,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError::Syntax { offset: self.offset(), msg: msg.into() }
    }

    fn implication(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.disjunction()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let rhs = self.implication()?;
            return Ok(Formula::or(negate(&lhs), rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.conjunction()?;
        while *self.peek() == Tok::Bar {
            self.bump();
            let rhs = self.conjunction()?;
            acc = Formula::or(acc, rhs);
        }
        Ok(acc)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.unary()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            let rhs = self.unary()?;
            acc = Formula::and(acc, rhs);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        let start = self.pos;
        match self.bump() {
            Tok::Ident(name) => Ok(match name.as_str() {
                "top" => Formula::Top,
                "bot" => Formula::Bot,
                _ => Formula::Lit(name.into(), true),
            }),
            Tok::Tilde => match self.bump() {
                Tok::Ident(name) if name != "top" && name != "bot" => Ok(Formula::Lit(name.into(), false)),
                _ => {
                    self.pos = start + 1;
                    Err(self.err("`~` applies only to atoms (input must be in negation normal form)"))
                }
            },
            Tok::LParen => {
                let inner = self.implication()?;
                let at = self.pos;
                if self.bump() != Tok::RParen {
                    self.pos = at;
                    return Err(self.err("expected `)`"));
                }
                Ok(inner)
            }
            Tok::Modal { diamond, idx } => {
                let body = Arc::new(self.unary()?);
                Ok(self.modal(diamond, &idx, body))
            }
            _ => {
                self.pos = start;
                Err(self.err("expected a formula"))
            }
        }
    }

    fn modal(&self, diamond: bool, idx: &str, body: Arc<Formula>) -> Formula {
        use Formula::*;
        match (self.family, idx, diamond) {
            (Family::Stit, "*", true) => SDia(body),
            (Family::Stit, "*", false) => SBox(body),
            (Family::Stit, "0", true) => CDia(body),
            (Family::Stit, "0", false) => CBox(body),
            (Family::Stit, _, true) => ODia(body),
            (Family::Stit, _, false) => OBox(body),
            (Family::Grammar, _, _) => {
                let c: Character = idx.parse().expect("validated by the lexer");
                if diamond {
                    GDia(c, body)
                } else {
                    GBox(c, body)
                }
            }
        }
    }
}

/// Parses a formula, inferring the family from its modal indices.
pub fn parse(src: &str) -> Result<Formula, ParseError> {
    parse_with(src, None)
}

/// Parses a formula that must belong to `family`. Under [`Family::Grammar`]
/// the index `o` names an ordinary character.
pub fn parse_in(src: &str, family: Family) -> Result<Formula, ParseError> {
    parse_with(src, Some(family))
}

/// Splits a top-level implication `phi -> psi` into its two sides, parsed in
/// `family`. The right side may itself contain `->`.
pub fn parse_implication(src: &str, family: Family) -> Result<(Formula, Formula), ParseError> {
    let toks = lex(src)?;
    let family = resolve_family(&toks, Some(family))?;
    let mut p = Parser { toks, pos: 0, family };
    let lhs = p.disjunction()?;
    if *p.peek() != Tok::Arrow {
        return Err(p.err("expected `->`"));
    }
    p.bump();
    let rhs = p.implication()?;
    if *p.peek() != Tok::Eof {
        return Err(p.err("unexpected trailing input"));
    }
    Ok((lhs, rhs))
}

fn parse_with(src: &str, forced: Option<Family>) -> Result<Formula, ParseError> {
    let toks = lex(src)?;
    let family = resolve_family(&toks, forced)?;
    let mut p = Parser { toks, pos: 0, family };
    let f = p.implication()?;
    if *p.peek() != Tok::Eof {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use Formula::*;

    #[test]
    fn splits_implication() {
        let (a, b) = parse_implication("p & q -> p -> q", Family::Grammar).unwrap();
        assert_eq!(a.to_string(), "p & q");
        assert_eq!(b, parse("p -> q").unwrap());
        assert!(parse_implication("p | q", Family::Grammar).is_err());
        assert!(parse_implication("(p -> q)", Family::Grammar).is_err());
    }

    #[test]
    fn reads_grammar_formula() {
        let f = parse("~p | [a]<a'>p").unwrap();
        let a = Character::forward("a");
        let expected = Formula::or(
            Formula::neg_atom("p"),
            Formula::boxed(a.clone(), Formula::dia(a.converse(), Formula::atom("p"))),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn arrow_desugars_through_negation() {
        let f = parse("p & q -> p & q").unwrap();
        let expected = Formula::or(
            Formula::or(Formula::neg_atom("p"), Formula::neg_atom("q")),
            Formula::and(Formula::atom("p"), Formula::atom("q")),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn arrow_is_right_associative() {
        assert_eq!(parse("p -> q -> r").unwrap(), parse("p -> (q -> r)").unwrap());
    }

    #[test]
    fn reads_stit_formula() {
        let f = parse("[0] [o] (p | ~q)").unwrap();
        assert_eq!(f, Formula::choice(Formula::ought(parse("p | ~q").unwrap())));
        assert!(matches!(parse("<*>p & [*]q").unwrap(), And(..)));
    }

    #[test]
    fn o_is_a_character_next_to_grammar_indices() {
        let f = parse("[o]p | <a>p").unwrap();
        assert!(matches!(f, Or(ref l, _) if matches!(**l, GBox(..))));
        assert!(matches!(parse_in("[o]p", Family::Grammar).unwrap(), GBox(..)));
    }

    #[test]
    fn errors_carry_offsets() {
        assert_eq!(parse("p & ").unwrap_err().offset(), 4);
        assert_eq!(parse("p $ q").unwrap_err().offset(), 2);
        assert!(matches!(parse("~(p & q)"), Err(ParseError::Syntax { offset: 1, .. })));
        let mix = parse("[a]p | [0]q").unwrap_err();
        assert!(matches!(mix, ParseError::FamilyMix { offset: 7, .. }));
        assert!(parse_in("[0]p", Family::Grammar).is_err());
    }

    #[test]
    fn printing_round_trips() {
        for s in ["p | q | r", "p | (q | r)", "(p | q) & r", "[a](p & <b'>~q)", "[0][o](p | ~q)", "top & bot", "<*>(p | q) & [o]r"] {
            let f = parse(s).unwrap();
            assert_eq!(parse(&f.to_string()).unwrap(), f, "{s}");
        }
        assert_eq!(parse("p | q | r").unwrap().to_string(), "p | q | r");
        assert_eq!(parse("p | (q | r)").unwrap().to_string(), "p | (q | r)");
    }
}
