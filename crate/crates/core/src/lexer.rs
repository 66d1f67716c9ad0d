//! Tokenizer shared by the scalar, term, type and matrix-literal parsers.
//!
//! ASCII and the usual Unicode spellings are both accepted: `λ`/`\`, `·`/`*`,
//! `∀`/`forall`, `→`/`->`, `√2`/`sqrt2`.

use num_bigint::BigInt;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(pos: Pos, message: impl Into<String>) -> Self {
        ParseError {
            line: pos.line,
            col: pos.col,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Int(BigInt),
    Sqrt2,
    Ident(String),
    /// `%X`, a general type variable.
    GenIdent(String),
    Forall,
    Lambda,
    Dot,
    Colon,
    Arrow,
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Eq,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Int(n) => write!(f, "{n}"),
            Tok::Sqrt2 => f.write_str("sqrt2"),
            Tok::Ident(s) => f.write_str(s),
            Tok::GenIdent(s) => write!(f, "%{s}"),
            Tok::Forall => f.write_str("forall"),
            Tok::Lambda => f.write_str("\\"),
            Tok::Dot => f.write_str("."),
            Tok::Colon => f.write_str(":"),
            Tok::Arrow => f.write_str("->"),
            Tok::Plus => f.write_str("+"),
            Tok::Minus => f.write_str("-"),
            Tok::Star => f.write_str("*"),
            Tok::Slash => f.write_str("/"),
            Tok::LParen => f.write_str("("),
            Tok::RParen => f.write_str(")"),
            Tok::LBracket => f.write_str("["),
            Tok::RBracket => f.write_str("]"),
            Tok::Comma => f.write_str(","),
            Tok::Semi => f.write_str(";"),
            Tok::Eq => f.write_str("="),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

pub fn tokenize(src: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let (mut line, mut col) = (1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        let mut adv = 1;
        match c {
            '\n' => {
                line += 1;
                col = 0;
            }
            c if c.is_whitespace() => {}
            '-' if chars.get(i + 1) == Some(&'-') => {
                // line comment
                while i + adv < chars.len() && chars[i + adv] != '\n' {
                    adv += 1;
                }
            }
            '-' if chars.get(i + 1) == Some(&'>') => {
                out.push((Tok::Arrow, pos));
                adv = 2;
            }
            '→' => out.push((Tok::Arrow, pos)),
            '\\' | 'λ' => out.push((Tok::Lambda, pos)),
            '∀' => out.push((Tok::Forall, pos)),
            '·' | '*' | '×' => out.push((Tok::Star, pos)),
            '.' => out.push((Tok::Dot, pos)),
            ':' => out.push((Tok::Colon, pos)),
            '+' => out.push((Tok::Plus, pos)),
            '-' | '−' => out.push((Tok::Minus, pos)),
            '/' => out.push((Tok::Slash, pos)),
            '(' => out.push((Tok::LParen, pos)),
            ')' => out.push((Tok::RParen, pos)),
            '[' => out.push((Tok::LBracket, pos)),
            ']' => out.push((Tok::RBracket, pos)),
            ',' => out.push((Tok::Comma, pos)),
            ';' => out.push((Tok::Semi, pos)),
            '=' => out.push((Tok::Eq, pos)),
            '√' => {
                if chars.get(i + 1) == Some(&'2') {
                    out.push((Tok::Sqrt2, pos));
                    adv = 2;
                } else {
                    return Err(ParseError::new(pos, "only √2 is supported"));
                }
            }
            '%' => {
                let mut j = i + 1;
                if j >= chars.len() || !is_ident_start(chars[j]) {
                    return Err(ParseError::new(pos, "expected a variable name after `%`"));
                }
                while j < chars.len() && is_ident_char(chars[j]) {
                    j += 1;
                }
                out.push((Tok::GenIdent(chars[i + 1..j].iter().collect()), pos));
                adv = j - i;
            }
            c if c.is_ascii_digit() => {
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                let digits: String = chars[i..j].iter().collect();
                out.push((Tok::Int(digits.parse().expect("digits")), pos));
                adv = j - i;
            }
            c if is_ident_start(c) => {
                let mut j = i;
                while j < chars.len() && is_ident_char(chars[j]) {
                    j += 1;
                }
                let word: String = chars[i..j].iter().collect();
                let tok = match word.as_str() {
                    "forall" => Tok::Forall,
                    "sqrt2" => Tok::Sqrt2,
                    _ => Tok::Ident(word),
                };
                out.push((tok, pos));
                adv = j - i;
            }
            other => {
                return Err(ParseError::new(pos, format!("unexpected character `{other}`")));
            }
        }
        i += adv;
        col += adv;
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}

/// Cursor over a token stream with cheap backtracking.
#[derive(Debug, Clone)]
pub struct Cursor {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

impl Cursor {
    pub fn new(src: &str) -> Result<Self, ParseError> {
        Ok(Cursor {
            toks: tokenize(src)?,
            at: 0,
        })
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    pub fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.at + k).min(self.toks.len() - 1);
        &self.toks[i].0
    }

    pub fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    pub fn mark(&self) -> usize {
        self.at
    }

    pub fn reset(&mut self, mark: usize) {
        self.at = mark;
    }

    pub fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    pub fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, tok: &Tok) -> Result<(), ParseError> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{tok}`, found `{}`", self.peek())))
        }
    }

    pub fn at_eof(&self) -> bool {
        *self.peek() == Tok::Eof
    }

    pub fn expect_eof(&self) -> Result<(), ParseError> {
        if self.at_eof() {
            Ok(())
        } else {
            Err(self.error(format!("unexpected `{}`", self.peek())))
        }
    }

    pub fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError::new(self.pos(), message)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unicode_and_ascii_agree() {
        let a: Vec<Tok> = tokenize("λx.x · ∀X. X → X √2").unwrap().into_iter().map(|t| t.0).collect();
        let b: Vec<Tok> = tokenize("\\x.x * forall X. X -> X sqrt2").unwrap().into_iter().map(|t| t.0).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn comments_and_positions() {
        let toks = tokenize("x -- comment\n  %Y").unwrap();
        assert_eq!(toks[1].0, Tok::GenIdent("Y".into()));
        assert_eq!(toks[1].1, Pos { line: 2, col: 3 });
    }

    #[test]
    fn bad_character_reports_position() {
        let err = tokenize("x $").unwrap_err();
        assert_eq!((err.line, err.col), (1, 3));
    }
}
