use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use thiserror::Error;

use super::ast::{Action, ActionSet, Quantity, Tuplix, IOTA};
use crate::meadow::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{position}: expected {}, found {found}", expected.join(" or "))]
    Unexpected {
        position: Position,
        expected: Vec<String>,
        found: String,
    },
    #[error("{position}: invalid character `{found}`")]
    InvalidChar { position: Position, found: char },
    #[error("{position}: `{name}` is used both as an action and as a quantity variable")]
    SortClash { position: Position, name: String },
    #[error("{position}: `{name}` is reserved")]
    Reserved { position: Position, name: String },
}

impl ParseError {
    pub fn position(&self) -> Position {
        match self {
            ParseError::Unexpected { position, .. }
            | ParseError::InvalidChar { position, .. }
            | ParseError::SortClash { position, .. }
            | ParseError::Reserved { position, .. } => *position,
        }
    }
}

pub(crate) const KEYWORDS: &[&str] = &[
    "eps", "bot", "test", "delay", "abs", "enc", "icap", "sign", "max", "min", "inv",
];

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Number(String),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Amp,
    At,
    Caret,
    Plus,
    Minus,
    Star,
    Slash,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Number(s) => write!(f, "`{s}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Amp => f.write_str("`&`"),
            Tok::At => f.write_str("`@`"),
            Tok::Caret => f.write_str("`^`"),
            Tok::Plus => f.write_str("`+`"),
            Tok::Minus => f.write_str("`-`"),
            Tok::Star => f.write_str("`*`"),
            Tok::Slash => f.write_str("`/`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, Position)>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let pos = Position { line, column: col };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len()
                && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '\'')
            {
                i += 1;
            }
            Tok::Ident(chars[start..i].iter().collect())
        } else if c.is_ascii_digit() {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            Tok::Number(chars[start..i].iter().collect())
        } else {
            i += 1;
            match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                ',' => Tok::Comma,
                '&' => Tok::Amp,
                '@' => Tok::At,
                '^' => Tok::Caret,
                '+' => Tok::Plus,
                '-' => Tok::Minus,
                '*' => Tok::Star,
                '/' => Tok::Slash,
                other => {
                    return Err(ParseError::InvalidChar {
                        position: pos,
                        found: other,
                    })
                }
            }
        };
        col += i - start;
        out.push((tok, pos));
    }
    out.push((Tok::Eof, Position { line, column: col }));
    Ok(out)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Sort {
    Action,
    Variable,
}

struct Parser {
    toks: Vec<(Tok, Position)>,
    at: usize,
    names: BTreeMap<String, Sort>,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn new(src: &str) -> PResult<Self> {
        Ok(Parser {
            toks: lex(src)?,
            at: 0,
            names: BTreeMap::new(),
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.at + 1).min(self.toks.len() - 1)].0
    }

    fn pos(&self) -> Position {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn unexpected<T>(&self, expected: &[&str]) -> PResult<T> {
        Err(ParseError::Unexpected {
            position: self.pos(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().to_string(),
        })
    }

    fn expect(&mut self, tok: Tok) -> PResult<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            let want = tok.to_string();
            self.unexpected(&[want.as_str()])
        }
    }

    fn declare(&mut self, name: &str, sort: Sort, position: Position) -> PResult<()> {
        if sort == Sort::Variable && name == IOTA {
            return Err(ParseError::Reserved {
                position,
                name: name.to_string(),
            });
        }
        match self.names.get(name) {
            Some(prev) if *prev != sort => Err(ParseError::SortClash {
                position,
                name: name.to_string(),
            }),
            _ => {
                self.names.insert(name.to_string(), sort);
                Ok(())
            }
        }
    }

    fn finish(&mut self) -> PResult<()> {
        if *self.peek() != Tok::Eof {
            return self.unexpected(&["end of input", "`&`"]);
        }
        Ok(())
    }

    fn nat(&mut self) -> PResult<u32> {
        match self.peek().clone() {
            Tok::Number(s) if !s.contains('.') => {
                let position = self.pos();
                self.bump();
                s.parse().map_err(|_| ParseError::Unexpected {
                    position,
                    expected: vec!["a small natural number".into()],
                    found: format!("`{s}`"),
                })
            }
            _ => self.unexpected(&["natural number"]),
        }
    }

    // tuplix := prim ('&' prim)*
    fn tuplix(&mut self) -> PResult<Tuplix> {
        let mut lhs = self.prim()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            let rhs = self.prim()?;
            lhs = Tuplix::conj(lhs, rhs);
        }
        Ok(lhs)
    }

    fn prim(&mut self) -> PResult<Tuplix> {
        let position = self.pos();
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let t = self.tuplix()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Tok::Ident(name) => match name.as_str() {
                "eps" => {
                    self.bump();
                    Ok(Tuplix::Empty)
                }
                "bot" => {
                    self.bump();
                    Ok(Tuplix::Block)
                }
                "test" => {
                    self.bump();
                    self.expect(Tok::LParen)?;
                    let q = self.qty()?;
                    self.expect(Tok::RParen)?;
                    Ok(Tuplix::ZeroTest(q))
                }
                "delay" => {
                    self.bump();
                    let n = if *self.peek() == Tok::Caret {
                        self.bump();
                        self.nat()?
                    } else {
                        1
                    };
                    self.expect(Tok::LParen)?;
                    let t = self.tuplix()?;
                    self.expect(Tok::RParen)?;
                    Ok(Tuplix::delay_n(t, n))
                }
                "abs" => {
                    self.bump();
                    let set = self.action_set()?;
                    self.expect(Tok::LParen)?;
                    let t = self.tuplix()?;
                    self.expect(Tok::RParen)?;
                    Ok(Tuplix::PreAbstr(set, Box::new(t)))
                }
                "enc" => {
                    self.bump();
                    let set = self.action_set()?;
                    let rate = if *self.peek() == Tok::At {
                        self.bump();
                        self.qatom()?
                    } else {
                        Quantity::Zero
                    };
                    self.expect(Tok::LParen)?;
                    let t = self.tuplix()?;
                    self.expect(Tok::RParen)?;
                    Ok(Tuplix::IntEncap(set, rate, Box::new(t)))
                }
                kw if KEYWORDS.contains(&kw) => Err(ParseError::Reserved {
                    position,
                    name: name.clone(),
                }),
                _ => {
                    self.bump();
                    self.declare(&name, Sort::Action, position)?;
                    self.expect(Tok::LParen)?;
                    let q = self.qty()?;
                    self.expect(Tok::RParen)?;
                    Ok(Tuplix::Transfer(Action::new(name), q))
                }
            },
            _ => self.unexpected(&[
                "`eps`", "`bot`", "`test`", "`delay`", "`abs`", "`enc`", "action", "`(`",
            ]),
        }
    }

    fn action_set(&mut self) -> PResult<ActionSet> {
        self.expect(Tok::LBrace)?;
        let mut set = ActionSet::new();
        if *self.peek() == Tok::RBrace {
            self.bump();
            return Ok(set);
        }
        loop {
            let position = self.pos();
            match self.peek().clone() {
                Tok::Ident(name) if !KEYWORDS.contains(&name.as_str()) => {
                    self.bump();
                    self.declare(&name, Sort::Action, position)?;
                    set.insert(Action::new(name));
                }
                _ => return self.unexpected(&["action"]),
            }
            match self.peek() {
                Tok::Comma => {
                    self.bump();
                }
                Tok::RBrace => {
                    self.bump();
                    return Ok(set);
                }
                _ => return self.unexpected(&["`,`", "`}`"]),
            }
        }
    }

    // qty := product (('+' | '-') product)*
    fn qty(&mut self) -> PResult<Quantity> {
        let mut lhs = self.product()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    let rhs = self.product()?;
                    lhs = Quantity::add(lhs, rhs);
                }
                Tok::Minus => {
                    self.bump();
                    let rhs = self.product()?;
                    lhs = Quantity::sub(lhs, rhs);
                }
                _ => return Ok(lhs),
            }
        }
    }

    // product := power (('*' | '/') power)*
    fn product(&mut self) -> PResult<Quantity> {
        let mut lhs = self.power()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    let rhs = self.power()?;
                    lhs = Quantity::mul(lhs, rhs);
                }
                Tok::Slash => {
                    self.bump();
                    let rhs = self.power()?;
                    lhs = Quantity::div(lhs, rhs);
                }
                _ => return Ok(lhs),
            }
        }
    }

    // power := unary ('^' NAT)*
    fn power(&mut self) -> PResult<Quantity> {
        let mut base = self.unary()?;
        while *self.peek() == Tok::Caret {
            self.bump();
            let n = self.nat()?;
            base = Quantity::pow(base, n);
        }
        Ok(base)
    }

    // unary := '-' unary | atom
    fn unary(&mut self) -> PResult<Quantity> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(Quantity::neg(self.unary()?));
        }
        self.atom()
    }

    fn number(&mut self, text: &str) -> PResult<Quantity> {
        let position = self.pos();
        self.bump();
        if text.contains('.') {
            let r: Rational = text.parse().map_err(|_| ParseError::Unexpected {
                position,
                expected: vec!["number".into()],
                found: format!("`{text}`"),
            })?;
            Ok(Quantity::literal(&r))
        } else {
            let n: BigUint = text.parse().expect("lexer yields digit strings");
            Ok(Quantity::nat(n))
        }
    }

    fn atom(&mut self) -> PResult<Quantity> {
        let position = self.pos();
        match self.peek().clone() {
            Tok::Number(text) => self.number(&text),
            Tok::LParen => {
                self.bump();
                let q = self.qty()?;
                self.expect(Tok::RParen)?;
                Ok(q)
            }
            Tok::Ident(name) => match name.as_str() {
                "sign" | "inv" => {
                    self.bump();
                    self.expect(Tok::LParen)?;
                    let q = self.qty()?;
                    self.expect(Tok::RParen)?;
                    Ok(if name == "sign" {
                        Quantity::sign(q)
                    } else {
                        Quantity::inv(q)
                    })
                }
                "max" | "min" => {
                    self.bump();
                    self.expect(Tok::LParen)?;
                    let u = self.qty()?;
                    self.expect(Tok::Comma)?;
                    let v = self.qty()?;
                    self.expect(Tok::RParen)?;
                    Ok(if name == "max" {
                        Quantity::max(u, v)
                    } else {
                        Quantity::min(u, v)
                    })
                }
                "icap" => {
                    self.bump();
                    self.expect(Tok::At)?;
                    let rate = self.qatom()?;
                    self.expect(Tok::LParen)?;
                    let body = self.tuplix()?;
                    self.expect(Tok::RParen)?;
                    Ok(Quantity::icap(rate, body))
                }
                kw if KEYWORDS.contains(&kw) => Err(ParseError::Reserved {
                    position,
                    name: name.clone(),
                }),
                _ => {
                    if *self.peek2() == Tok::LParen {
                        self.bump();
                        return self.unexpected(&["operator", "`)`"]);
                    }
                    self.bump();
                    self.declare(&name, Sort::Variable, position)?;
                    Ok(Quantity::Var(name))
                }
            },
            _ => self.unexpected(&[
                "number", "variable", "`(`", "`-`", "`sign`", "`max`", "`icap`",
            ]),
        }
    }

    // qatom := literal | identifier | '(' qty ')'
    fn qatom(&mut self) -> PResult<Quantity> {
        let position = self.pos();
        match self.peek().clone() {
            Tok::Number(text) => self.number(&text),
            Tok::LParen => {
                self.bump();
                let q = self.qty()?;
                self.expect(Tok::RParen)?;
                Ok(q)
            }
            Tok::Ident(name) if !KEYWORDS.contains(&name.as_str()) => {
                self.bump();
                self.declare(&name, Sort::Variable, position)?;
                Ok(Quantity::Var(name))
            }
            _ => self.unexpected(&["number", "variable", "`(`"]),
        }
    }
}

pub fn parse_tuplix(src: &str) -> Result<Tuplix, ParseError> {
    let mut p = Parser::new(src)?;
    let t = p.tuplix()?;
    p.finish()?;
    Ok(t)
}

pub fn parse_quantity(src: &str) -> Result<Quantity, ParseError> {
    let mut p = Parser::new(src)?;
    let q = p.qty()?;
    p.finish()?;
    Ok(q)
}
