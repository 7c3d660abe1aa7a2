//! Concrete syntax for category formulas and sequents.
//!
//! Grammar (binary operators left-associative, `&` binds tighter than `|`):
//!
//! ```text
//! formula := disj
//! disj    := conj ('|' conj)*
//! conj    := unary ('&' unary)*
//! unary   := '[' agent ']' unary | 'C' '(' formula ')' | atomlike
//! atomlike:= 'top' | 'bot' | ident | '#'ident | '@'ident | '(' formula ')'
//! sequent := formula '|-' formula
//! ```
//!
//! `top`/`bot` and `C` are reserved. Atoms are identifiers, `#name` is a
//! nominal, `@name` a conominal, `[i]` the box of agent `i`. Nominals and
//! conominals need a hybrid dialect, `C` needs a common-knowledge dialect.

use crate::error::{Error, Result};
use std::collections::BTreeSet;
use std::fmt;

/// Which language the text is parsed against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Dialect {
    /// Plain boxes only.
    L,
    /// Boxes plus the common-knowledge operator.
    LC,
    /// Boxes plus nominals and conominals.
    LH,
    /// Everything.
    #[default]
    LCH,
}

impl Dialect {
    pub fn allows_common(self) -> bool {
        matches!(self, Dialect::LC | Dialect::LCH)
    }

    pub fn allows_hybrid(self) -> bool {
        matches!(self, Dialect::LH | Dialect::LCH)
    }
}

impl fmt::Display for Dialect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Dialect::L => "L",
            Dialect::LC => "LC",
            Dialect::LH => "LH",
            Dialect::LCH => "LCH",
        };
        write!(f, "{name}")
    }
}

impl std::str::FromStr for Dialect {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "L" => Ok(Dialect::L),
            "LC" => Ok(Dialect::LC),
            "LH" => Ok(Dialect::LH),
            "LCH" => Ok(Dialect::LCH),
            other => Err(Error::UnknownName {
                kind: "dialect",
                name: other.to_string(),
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Top,
    Bot,
    Atom(String),
    Nominal(String),
    Conominal(String),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Box_(String, Box<Formula>),
    Common(Box<Formula>),
}

impl Formula {
    pub fn and(l: Formula, r: Formula) -> Formula {
        Formula::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: Formula, r: Formula) -> Formula {
        Formula::Or(Box::new(l), Box::new(r))
    }

    pub fn boxed(agent: impl Into<String>, f: Formula) -> Formula {
        Formula::Box_(agent.into(), Box::new(f))
    }

    pub fn common(f: Formula) -> Formula {
        Formula::Common(Box::new(f))
    }

    pub fn atom(name: impl Into<String>) -> Formula {
        Formula::Atom(name.into())
    }

    /// Left-fold a nonempty list into a conjunction.
    pub fn big_and(mut parts: Vec<Formula>) -> Option<Formula> {
        let mut acc = if parts.is_empty() {
            return None;
        } else {
            parts.remove(0)
        };
        for p in parts {
            acc = Formula::and(acc, p);
        }
        Some(acc)
    }

    /// Atom names occurring in the formula, sorted.
    pub fn atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk(&mut |f| {
            if let Formula::Atom(p) = f {
                out.insert(p.clone());
            }
        });
        out
    }

    pub fn nominals(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk(&mut |f| {
            if let Formula::Nominal(n) = f {
                out.insert(n.clone());
            }
        });
        out
    }

    pub fn conominals(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk(&mut |f| {
            if let Formula::Conominal(n) = f {
                out.insert(n.clone());
            }
        });
        out
    }

    pub fn agents(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk(&mut |f| {
            if let Formula::Box_(i, _) = f {
                out.insert(i.clone());
            }
        });
        out
    }

    pub fn uses_common(&self) -> bool {
        let mut found = false;
        self.walk(&mut |f| {
            if matches!(f, Formula::Common(_)) {
                found = true;
            }
        });
        found
    }

    pub fn depth(&self) -> usize {
        match self {
            Formula::Top
            | Formula::Bot
            | Formula::Atom(_)
            | Formula::Nominal(_)
            | Formula::Conominal(_) => 0,
            Formula::And(l, r) | Formula::Or(l, r) => 1 + l.depth().max(r.depth()),
            Formula::Box_(_, f) | Formula::Common(f) => 1 + f.depth(),
        }
    }

    fn walk(&self, visit: &mut impl FnMut(&Formula)) {
        visit(self);
        match self {
            Formula::And(l, r) | Formula::Or(l, r) => {
                l.walk(visit);
                r.walk(visit);
            }
            Formula::Box_(_, f) | Formula::Common(f) => f.walk(visit),
            _ => {}
        }
    }
}

/// `lhs |- rhs`, read "lhs is a subcategory of rhs".
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Sequent {
    pub lhs: Formula,
    pub rhs: Formula,
}

impl fmt::Display for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} |- {}", self.lhs, self.rhs)
    }
}

// -------------------------------------------------------------------------
// printer

fn precedence(f: &Formula) -> u8 {
    match f {
        Formula::Or(..) => 1,
        Formula::And(..) => 2,
        _ => 3,
    }
}

fn fmt_formula(f: &Formula, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    match f {
        Formula::Top => write!(out, "top"),
        Formula::Bot => write!(out, "bot"),
        Formula::Atom(p) => write!(out, "{p}"),
        Formula::Nominal(n) => write!(out, "#{n}"),
        Formula::Conominal(n) => write!(out, "@{n}"),
        Formula::And(l, r) => fmt_binary(l, r, "&", 2, out),
        Formula::Or(l, r) => fmt_binary(l, r, "|", 1, out),
        Formula::Box_(agent, sub) => {
            write!(out, "[{agent}]")?;
            fmt_child(sub, 3, out)
        }
        Formula::Common(sub) => {
            write!(out, "C(")?;
            fmt_formula(sub, out)?;
            write!(out, ")")
        }
    }
}

fn fmt_binary(
    l: &Formula,
    r: &Formula,
    op: &str,
    prec: u8,
    out: &mut fmt::Formatter<'_>,
) -> fmt::Result {
    if precedence(l) < prec {
        write!(out, "(")?;
        fmt_formula(l, out)?;
        write!(out, ")")?;
    } else {
        fmt_formula(l, out)?;
    }
    write!(out, " {op} ")?;
    // same-precedence right child needs parens to keep left associativity
    if precedence(r) <= prec {
        write!(out, "(")?;
        fmt_formula(r, out)?;
        write!(out, ")")?;
    } else {
        fmt_formula(r, out)?;
    }
    Ok(())
}

fn fmt_child(f: &Formula, prec: u8, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    if precedence(f) < prec {
        write!(out, "(")?;
        fmt_formula(f, out)?;
        write!(out, ")")
    } else {
        fmt_formula(f, out)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_formula(self, f)
    }
}

// -------------------------------------------------------------------------
// lexer and parser

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Top,
    Bot,
    CommonKw,
    Ident(String),
    Nominal(String),
    Conominal(String),
    Amp,
    Pipe,
    Turnstile,
    LParen,
    RParen,
    LBrack,
    RBrack,
    End,
}

#[derive(Clone, Copy, Debug)]
struct Pos {
    line: usize,
    col: usize,
}

struct Lexer<'a> {
    src: &'a [u8],
    at: usize,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src: src.as_bytes(),
            at: 0,
            line: 1,
            col: 1,
        }
    }

    fn pos(&self) -> Pos {
        Pos {
            line: self.line,
            col: self.col,
        }
    }

    fn bump(&mut self) -> Option<u8> {
        let c = *self.src.get(self.at)?;
        self.at += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.at).copied()
    }

    fn ident(&mut self) -> String {
        let start = self.at;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
            self.bump();
        }
        String::from_utf8_lossy(&self.src[start..self.at]).into_owned()
    }

    fn next_token(&mut self) -> Result<(Tok, Pos)> {
        while matches!(self.peek(), Some(c) if c.is_ascii_whitespace()) {
            self.bump();
        }
        let pos = self.pos();
        let Some(c) = self.peek() else {
            return Ok((Tok::End, pos));
        };
        let tok = match c {
            b'&' => {
                self.bump();
                Tok::Amp
            }
            b'|' => {
                self.bump();
                if self.peek() == Some(b'-') {
                    self.bump();
                    Tok::Turnstile
                } else {
                    Tok::Pipe
                }
            }
            b'(' => {
                self.bump();
                Tok::LParen
            }
            b')' => {
                self.bump();
                Tok::RParen
            }
            b'[' => {
                self.bump();
                Tok::LBrack
            }
            b']' => {
                self.bump();
                Tok::RBrack
            }
            b'#' => {
                self.bump();
                let name = self.ident();
                if name.is_empty() {
                    return Err(parse_err(pos, "expected a name after `#`"));
                }
                Tok::Nominal(name)
            }
            b'@' => {
                self.bump();
                let name = self.ident();
                if name.is_empty() {
                    return Err(parse_err(pos, "expected a name after `@`"));
                }
                Tok::Conominal(name)
            }
            c if c.is_ascii_alphanumeric() || c == b'_' => {
                let name = self.ident();
                match name.as_str() {
                    "top" => Tok::Top,
                    "bot" => Tok::Bot,
                    "C" => Tok::CommonKw,
                    _ => Tok::Ident(name),
                }
            }
            other => {
                return Err(parse_err(
                    pos,
                    format!("unexpected character `{}`", other as char),
                ));
            }
        };
        Ok((tok, pos))
    }
}

fn parse_err(pos: Pos, msg: impl Into<String>) -> Error {
    Error::Parse {
        line: pos.line,
        col: pos.col,
        msg: msg.into(),
    }
}

/// Parser for a fixed dialect, optionally restricted to a declared agent set.
pub struct FormulaParser {
    dialect: Dialect,
    agents: Option<BTreeSet<String>>,
}

impl FormulaParser {
    pub fn new(dialect: Dialect) -> Self {
        FormulaParser {
            dialect,
            agents: None,
        }
    }

    /// Restrict box agents to a declared set; unknown agents become parse
    /// errors.
    pub fn with_agents<I: IntoIterator<Item = String>>(mut self, agents: I) -> Self {
        self.agents = Some(agents.into_iter().collect());
        self
    }

    pub fn parse_formula(&self, text: &str) -> Result<Formula> {
        let mut tokens = TokenStream::new(text)?;
        let f = self.formula(&mut tokens)?;
        tokens.expect_end()?;
        Ok(f)
    }

    pub fn parse_sequent(&self, text: &str) -> Result<Sequent> {
        let mut tokens = TokenStream::new(text)?;
        let lhs = self.formula(&mut tokens)?;
        let (tok, pos) = tokens.next()?;
        if tok != Tok::Turnstile {
            return Err(parse_err(pos, "expected `|-` between the two formulas"));
        }
        let rhs = self.formula(&mut tokens)?;
        tokens.expect_end()?;
        Ok(Sequent { lhs, rhs })
    }

    fn dialect_err(&self, construct: &'static str, pos: Pos) -> Error {
        Error::DialectViolation {
            construct,
            dialect: self.dialect.to_string(),
            line: pos.line,
            col: pos.col,
        }
    }

    fn formula(&self, t: &mut TokenStream) -> Result<Formula> {
        let mut acc = self.conj(t)?;
        while t.peek()?.0 == Tok::Pipe {
            t.next()?;
            let rhs = self.conj(t)?;
            acc = Formula::or(acc, rhs);
        }
        Ok(acc)
    }

    fn conj(&self, t: &mut TokenStream) -> Result<Formula> {
        let mut acc = self.unary(t)?;
        while t.peek()?.0 == Tok::Amp {
            t.next()?;
            let rhs = self.unary(t)?;
            acc = Formula::and(acc, rhs);
        }
        Ok(acc)
    }

    fn unary(&self, t: &mut TokenStream) -> Result<Formula> {
        let (tok, pos) = t.next()?;
        match tok {
            Tok::Top => Ok(Formula::Top),
            Tok::Bot => Ok(Formula::Bot),
            Tok::Ident(name) => Ok(Formula::Atom(name)),
            Tok::Nominal(name) => {
                if !self.dialect.allows_hybrid() {
                    return Err(self.dialect_err("nominal", pos));
                }
                Ok(Formula::Nominal(name))
            }
            Tok::Conominal(name) => {
                if !self.dialect.allows_hybrid() {
                    return Err(self.dialect_err("conominal", pos));
                }
                Ok(Formula::Conominal(name))
            }
            Tok::CommonKw => {
                if !self.dialect.allows_common() {
                    return Err(self.dialect_err("C", pos));
                }
                let (open, open_pos) = t.next()?;
                if open != Tok::LParen {
                    return Err(parse_err(open_pos, "expected `(` after `C`"));
                }
                let inner = self.formula(t)?;
                let (close, close_pos) = t.next()?;
                if close != Tok::RParen {
                    return Err(parse_err(close_pos, "expected `)` to close `C(`"));
                }
                Ok(Formula::common(inner))
            }
            Tok::LBrack => {
                let (agent_tok, agent_pos) = t.next()?;
                let agent = match agent_tok {
                    Tok::Ident(name) => name,
                    Tok::Top => "top".to_string(),
                    Tok::Bot => "bot".to_string(),
                    Tok::CommonKw => "C".to_string(),
                    _ => return Err(parse_err(agent_pos, "expected an agent name inside `[ ]`")),
                };
                if let Some(known) = &self.agents {
                    if !known.contains(&agent) {
                        return Err(parse_err(
                            agent_pos,
                            format!("unknown agent `{agent}`"),
                        ));
                    }
                }
                let (close, close_pos) = t.next()?;
                if close != Tok::RBrack {
                    return Err(parse_err(close_pos, "expected `]` after the agent name"));
                }
                let sub = self.unary(t)?;
                Ok(Formula::boxed(agent, sub))
            }
            Tok::LParen => {
                let inner = self.formula(t)?;
                let (close, close_pos) = t.next()?;
                if close != Tok::RParen {
                    return Err(parse_err(close_pos, "unbalanced parenthesis"));
                }
                Ok(inner)
            }
            Tok::End => Err(parse_err(pos, "unexpected end of input")),
            other => Err(parse_err(pos, format!("unexpected token {other:?}"))),
        }
    }
}

struct TokenStream {
    tokens: Vec<(Tok, Pos)>,
    at: usize,
}

impl TokenStream {
    fn new(text: &str) -> Result<Self> {
        let mut lexer = Lexer::new(text);
        let mut tokens = Vec::new();
        loop {
            let (tok, pos) = lexer.next_token()?;
            let end = tok == Tok::End;
            tokens.push((tok, pos));
            if end {
                break;
            }
        }
        Ok(TokenStream { tokens, at: 0 })
    }

    fn peek(&self) -> Result<&(Tok, Pos)> {
        Ok(&self.tokens[self.at.min(self.tokens.len() - 1)])
    }

    fn next(&mut self) -> Result<(Tok, Pos)> {
        let item = self.tokens[self.at.min(self.tokens.len() - 1)].clone();
        if self.at < self.tokens.len() {
            self.at += 1;
        }
        Ok(item)
    }

    fn expect_end(&mut self) -> Result<()> {
        let (tok, pos) = self.next()?;
        if tok != Tok::End {
            return Err(parse_err(pos, format!("trailing input ({tok:?})")));
        }
        Ok(())
    }
}

/// Parses a `.seq` file body: one sequent per line, lines whose first
/// character is `#` are comments, blank lines are skipped.
pub fn parse_sequent_file(text: &str, parser: &FormulaParser) -> Result<Vec<(usize, Sequent)>> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let sequent = parser.parse_sequent(line).map_err(|e| match e {
            Error::Parse { col, msg, .. } => Error::Parse {
                line: idx + 1,
                col,
                msg,
            },
            other => other,
        })?;
        out.push((idx + 1, sequent));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(dialect: Dialect, text: &str) -> Result<Formula> {
        FormulaParser::new(dialect).parse_formula(text)
    }

    #[test]
    fn grammar_basics() {
        let f = p(Dialect::LCH, "[i](p & q) | bot").unwrap();
        assert_eq!(
            f,
            Formula::or(
                Formula::boxed("i", Formula::and(Formula::atom("p"), Formula::atom("q"))),
                Formula::Bot
            )
        );
        let g = p(Dialect::LH, "#a & @x").unwrap();
        assert_eq!(
            g,
            Formula::and(
                Formula::Nominal("a".into()),
                Formula::Conominal("x".into())
            )
        );
        // & binds tighter than |
        let h = p(Dialect::L, "p | q & r").unwrap();
        assert_eq!(
            h,
            Formula::or(
                Formula::atom("p"),
                Formula::and(Formula::atom("q"), Formula::atom("r"))
            )
        );
        // left associativity
        let assoc = p(Dialect::L, "p & q & r").unwrap();
        assert_eq!(
            assoc,
            Formula::and(
                Formula::and(Formula::atom("p"), Formula::atom("q")),
                Formula::atom("r")
            )
        );
    }

    #[test]
    fn dialect_gates() {
        assert!(matches!(
            p(Dialect::L, "C([i]p)"),
            Err(Error::DialectViolation { construct: "C", .. })
        ));
        assert!(matches!(
            p(Dialect::LC, "#a"),
            Err(Error::DialectViolation { .. })
        ));
        assert!(p(Dialect::LC, "C([i]p)").is_ok());
        assert!(p(Dialect::LCH, "C(#a)").is_ok());
    }

    #[test]
    fn agent_whitelist() {
        let parser = FormulaParser::new(Dialect::L).with_agents(["i".to_string()]);
        assert!(parser.parse_formula("[i]p").is_ok());
        let err = parser.parse_formula("[j]p").unwrap_err();
        assert!(err.to_string().contains("unknown agent"));
    }

    #[test]
    fn sequent_parsing() {
        let parser = FormulaParser::new(Dialect::LCH);
        let s = parser.parse_sequent("p |- top").unwrap();
        assert_eq!(s.lhs, Formula::atom("p"));
        assert_eq!(s.rhs, Formula::Top);

        let axiom = parser.parse_sequent("C(p) |- [i]p & [i]C(p)").unwrap();
        assert_eq!(
            axiom.rhs,
            Formula::and(
                Formula::boxed("i", Formula::atom("p")),
                Formula::boxed("i", Formula::common(Formula::atom("p")))
            )
        );

        assert!(matches!(
            parser.parse_sequent("p |-"),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            parser.parse_sequent("p"),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn printer_minimal_parens() {
        let f = Formula::and(
            Formula::atom("p"),
            Formula::or(Formula::atom("q"), Formula::atom("r")),
        );
        assert_eq!(f.to_string(), "p & (q | r)");
        assert_eq!(Formula::boxed("i", Formula::Top).to_string(), "[i]top");
        let g = Formula::or(
            Formula::and(Formula::atom("p"), Formula::atom("q")),
            Formula::atom("r"),
        );
        assert_eq!(g.to_string(), "p & q | r");
        let nested = Formula::boxed(
            "i",
            Formula::and(Formula::atom("p"), Formula::atom("q")),
        );
        assert_eq!(nested.to_string(), "[i](p & q)");
        assert_eq!(
            Formula::common(Formula::or(Formula::atom("p"), Formula::Bot)).to_string(),
            "C(p | bot)"
        );
    }

    #[test]
    fn positions_in_errors() {
        let err = p(Dialect::L, "p &\n  )").unwrap_err();
        match err {
            Error::Parse { line, col, .. } => {
                assert_eq!(line, 2);
                assert_eq!(col, 3);
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn sequent_file_comments() {
        let parser = FormulaParser::new(Dialect::LCH);
        let text = "# a comment\np |- top\n\nbot |- q\n";
        let seqs = parse_sequent_file(text, &parser).unwrap();
        assert_eq!(seqs.len(), 2);
        assert_eq!(seqs[0].0, 2);
        assert_eq!(seqs[1].0, 4);
    }
}
