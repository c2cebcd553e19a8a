//! Textual formats: one lexical layer shared by the category, model,
//! signature, algebra, and sketch formats, plus the expression syntax.
//!
//! All serializers are canonical: cells sorted, entries sorted, so equal
//! values print byte-identically.

use std::fmt;

use thiserror::Error;

mod algebra_file;
mod category;
mod expr;
mod model;
mod signature;
mod sketch_file;

pub use algebra_file::{parse_algebra, serialize_algebra, AlgebraDoc};
pub use category::{
    parse_category, recover_presentation, serialize_presentation, PresentedCategory,
};
pub use expr::{parse_mor_expr, parse_obj_expr};
pub use model::{bind_model, parse_model, serialize_model, ModelFile};
pub use signature::{parse_signature, serialize_signature, SignatureDoc};
pub use sketch_file::{parse_sketch, serialize_sketch};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyntaxError {
    #[error("{line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("{0}")]
    Elaborate(String),
}

impl SyntaxError {
    pub fn elaborate(msg: impl fmt::Display) -> SyntaxError {
        SyntaxError::Elaborate(msg.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    /// `->`
    Arrow,
    /// `|->`
    MapsTo,
    /// `=>`
    FatArrow,
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Colon,
    Semi,
    Comma,
    Dot,
    Equals,
    At,
    Hash,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Arrow => write!(f, "`->`"),
            Tok::MapsTo => write!(f, "`|->`"),
            Tok::FatArrow => write!(f, "`=>`"),
            Tok::LBrace => write!(f, "`{{`"),
            Tok::RBrace => write!(f, "`}}`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::LBracket => write!(f, "`[`"),
            Tok::RBracket => write!(f, "`]`"),
            Tok::Colon => write!(f, "`:`"),
            Tok::Semi => write!(f, "`;`"),
            Tok::Comma => write!(f, "`,`"),
            Tok::Dot => write!(f, "`.`"),
            Tok::Equals => write!(f, "`=`"),
            Tok::At => write!(f, "`@`"),
            Tok::Hash => write!(f, "`#`"),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Spanned {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

fn ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '/' || c == '-' || c == '\''
}

pub(crate) fn lex(text: &str) -> Result<Vec<Spanned>, SyntaxError> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let (l, co) = (line, col);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next().unwrap();
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        if c.is_whitespace() {
            bump(&mut chars);
            continue;
        }
        // line comments
        if c == '/' {
            let mut look = chars.clone();
            look.next();
            if look.peek() == Some(&'/') {
                while let Some(&c2) = chars.peek() {
                    if c2 == '\n' {
                        break;
                    }
                    bump(&mut chars);
                }
                continue;
            }
        }
        if ident_char(c) && c != '-' && c != '/' {
            let mut s = String::new();
            while let Some(&c2) = chars.peek() {
                // `-` only continues an identifier when not starting `->`
                if c2 == '-' {
                    let mut look = chars.clone();
                    look.next();
                    if look.peek() == Some(&'>') {
                        break;
                    }
                }
                if ident_char(c2) {
                    s.push(bump(&mut chars));
                } else {
                    break;
                }
            }
            out.push(Spanned {
                tok: Tok::Ident(s),
                line: l,
                col: co,
            });
            continue;
        }
        let tok = match c {
            '-' => {
                bump(&mut chars);
                if chars.peek() == Some(&'>') {
                    bump(&mut chars);
                    Tok::Arrow
                } else {
                    return Err(SyntaxError::Parse {
                        line: l,
                        col: co,
                        msg: "stray `-`".to_string(),
                    });
                }
            }
            '|' => {
                bump(&mut chars);
                if chars.peek() == Some(&'-') {
                    bump(&mut chars);
                    if chars.peek() == Some(&'>') {
                        bump(&mut chars);
                        Tok::MapsTo
                    } else {
                        return Err(SyntaxError::Parse {
                            line: l,
                            col: co,
                            msg: "expected `|->`".to_string(),
                        });
                    }
                } else {
                    return Err(SyntaxError::Parse {
                        line: l,
                        col: co,
                        msg: "expected `|->`".to_string(),
                    });
                }
            }
            '=' => {
                bump(&mut chars);
                if chars.peek() == Some(&'>') {
                    bump(&mut chars);
                    Tok::FatArrow
                } else {
                    Tok::Equals
                }
            }
            '{' => {
                bump(&mut chars);
                Tok::LBrace
            }
            '}' => {
                bump(&mut chars);
                Tok::RBrace
            }
            '(' => {
                bump(&mut chars);
                Tok::LParen
            }
            ')' => {
                bump(&mut chars);
                Tok::RParen
            }
            '[' => {
                bump(&mut chars);
                Tok::LBracket
            }
            ']' => {
                bump(&mut chars);
                Tok::RBracket
            }
            ':' => {
                bump(&mut chars);
                Tok::Colon
            }
            ';' => {
                bump(&mut chars);
                Tok::Semi
            }
            ',' => {
                bump(&mut chars);
                Tok::Comma
            }
            '.' => {
                bump(&mut chars);
                Tok::Dot
            }
            '@' => {
                bump(&mut chars);
                Tok::At
            }
            '#' => {
                bump(&mut chars);
                Tok::Hash
            }
            other => {
                return Err(SyntaxError::Parse {
                    line: l,
                    col: co,
                    msg: format!("unexpected character `{other}`"),
                })
            }
        };
        out.push(Spanned {
            tok,
            line: l,
            col: co,
        });
    }
    Ok(out)
}

/// Token cursor shared by the parsers.
pub(crate) struct Cursor {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Cursor {
    pub fn new(toks: Vec<Spanned>) -> Cursor {
        Cursor { toks, pos: 0 }
    }

    pub fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    pub fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.pos + 1).map(|s| &s.tok)
    }

    pub fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|s| s.tok.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    pub fn err(&self, msg: impl fmt::Display) -> SyntaxError {
        let (line, col) = self
            .toks
            .get(self.pos.min(self.toks.len().saturating_sub(1)))
            .map(|s| (s.line, s.col))
            .unwrap_or((0, 0));
        SyntaxError::Parse {
            line,
            col,
            msg: msg.to_string(),
        }
    }

    pub fn expect(&mut self, tok: Tok) -> Result<(), SyntaxError> {
        match self.peek() {
            Some(t) if *t == tok => {
                self.next();
                Ok(())
            }
            Some(t) => Err(self.err(format!("expected {tok}, found {t}"))),
            None => Err(self.err(format!("expected {tok}, found end of input"))),
        }
    }

    pub fn ident(&mut self) -> Result<String, SyntaxError> {
        match self.peek() {
            Some(Tok::Ident(_)) => {
                let Some(Tok::Ident(s)) = self.next() else {
                    unreachable!()
                };
                Ok(s)
            }
            Some(t) => Err(self.err(format!("expected an identifier, found {t}"))),
            None => Err(self.err("expected an identifier, found end of input")),
        }
    }

    /// `a` or `a.b.c`: a dotted cell path, joined back into the canonical
    /// composite name.
    pub fn cell_path(&mut self) -> Result<String, SyntaxError> {
        let mut s = self.ident()?;
        while self.peek() == Some(&Tok::Dot) {
            self.next();
            s.push('.');
            s.push_str(&self.ident()?);
        }
        Ok(s)
    }

    pub fn keyword(&mut self, word: &str) -> Result<(), SyntaxError> {
        let got = self.ident()?;
        if got == word {
            Ok(())
        } else {
            Err(self.err(format!("expected `{word}`, found `{got}`")))
        }
    }

    pub fn at_keyword(&self, word: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == word)
    }
}
