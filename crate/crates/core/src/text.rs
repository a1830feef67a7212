//! Tokenizer shared by the small text formats (presentations, cover files,
//! family expressions, group descriptors).

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Int(String),
    Str(String),
    Punct(char),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Int(s) => write!(f, "integer `{s}`"),
            Tok::Str(s) => write!(f, "string {s:?}"),
            Tok::Punct(c) => write!(f, "`{c}`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntaxError {
    pub pos: Pos,
    pub message: String,
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.pos.line, self.pos.col, self.message)
    }
}

impl std::error::Error for SyntaxError {}

const PUNCT: &[char] = &[':', ';', ',', '(', ')', '[', ']', '=', '^', '-', '+', '*', '/', '{', '}'];

pub(crate) struct Lexer<'a> {
    chars: Vec<char>,
    idx: usize,
    line: usize,
    col: usize,
    peeked: Option<(Tok, Pos)>,
    _src: &'a str,
}

impl<'a> Lexer<'a> {
    pub fn new(src: &'a str) -> Self {
        Lexer { chars: src.chars().collect(), idx: 0, line: 1, col: 1, peeked: None, _src: src }
    }

    fn bump(&mut self) -> Option<char> {
        let c = *self.chars.get(self.idx)?;
        self.idx += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        while let Some(&c) = self.chars.get(self.idx) {
            if c == '#' {
                while let Some(&c) = self.chars.get(self.idx) {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                }
            } else if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn here(&self) -> Pos {
        Pos { line: self.line, col: self.col }
    }

    fn lex(&mut self) -> Result<(Tok, Pos), SyntaxError> {
        self.skip_trivia();
        let pos = self.here();
        let Some(&c) = self.chars.get(self.idx) else {
            return Ok((Tok::Eof, pos));
        };
        if c.is_alphabetic() || c == '_' {
            let mut s = String::new();
            while let Some(&c) = self.chars.get(self.idx) {
                if c.is_alphanumeric() || c == '_' {
                    s.push(c);
                    self.bump();
                } else {
                    break;
                }
            }
            return Ok((Tok::Ident(s), pos));
        }
        if c.is_ascii_digit() {
            let mut s = String::new();
            while let Some(&c) = self.chars.get(self.idx) {
                if c.is_ascii_digit() {
                    s.push(c);
                    self.bump();
                } else {
                    break;
                }
            }
            return Ok((Tok::Int(s), pos));
        }
        if c == '"' {
            self.bump();
            let mut s = String::new();
            loop {
                match self.bump() {
                    Some('"') => return Ok((Tok::Str(s), pos)),
                    Some(c) => s.push(c),
                    None => return Err(SyntaxError { pos, message: "unterminated string".into() }),
                }
            }
        }
        if PUNCT.contains(&c) {
            self.bump();
            return Ok((Tok::Punct(c), pos));
        }
        Err(SyntaxError { pos, message: format!("unexpected character {c:?}") })
    }

    pub fn peek(&mut self) -> Result<&Tok, SyntaxError> {
        if self.peeked.is_none() {
            self.peeked = Some(self.lex()?);
        }
        Ok(&self.peeked.as_ref().expect("just filled").0)
    }

    pub fn pos(&mut self) -> Result<Pos, SyntaxError> {
        self.peek()?;
        Ok(self.peeked.as_ref().expect("just filled").1)
    }

    pub fn next(&mut self) -> Result<(Tok, Pos), SyntaxError> {
        match self.peeked.take() {
            Some(t) => Ok(t),
            None => self.lex(),
        }
    }

    pub fn expect_punct(&mut self, c: char) -> Result<Pos, SyntaxError> {
        let (t, pos) = self.next()?;
        if t == Tok::Punct(c) {
            Ok(pos)
        } else {
            Err(SyntaxError { pos, message: format!("expected `{c}`, found {t}") })
        }
    }

    pub fn eat_punct(&mut self, c: char) -> Result<bool, SyntaxError> {
        if *self.peek()? == Tok::Punct(c) {
            self.next()?;
            Ok(true)
        } else {
            Ok(false)
        }
    }

    pub fn expect_ident(&mut self) -> Result<(String, Pos), SyntaxError> {
        let (t, pos) = self.next()?;
        match t {
            Tok::Ident(s) => Ok((s, pos)),
            other => Err(SyntaxError { pos, message: format!("expected identifier, found {other}") }),
        }
    }

    pub fn expect_keyword(&mut self, kw: &str) -> Result<Pos, SyntaxError> {
        let (t, pos) = self.next()?;
        match t {
            Tok::Ident(s) if s == kw => Ok(pos),
            other => Err(SyntaxError { pos, message: format!("expected `{kw}`, found {other}") }),
        }
    }

    pub fn expect_uint(&mut self) -> Result<(u64, Pos), SyntaxError> {
        let (t, pos) = self.next()?;
        match t {
            Tok::Int(s) => s
                .parse()
                .map(|v| (v, pos))
                .map_err(|_| SyntaxError { pos, message: format!("integer `{s}` out of range") }),
            other => Err(SyntaxError { pos, message: format!("expected integer, found {other}") }),
        }
    }

    /// Signed integer, with an optional leading `-`.
    pub fn expect_int(&mut self) -> Result<(i64, Pos), SyntaxError> {
        let pos = self.pos()?;
        let neg = self.eat_punct('-')?;
        let (v, _) = self.expect_uint()?;
        let v = i64::try_from(v).map_err(|_| SyntaxError { pos, message: "integer out of range".into() })?;
        Ok((if neg { -v } else { v }, pos))
    }

    pub fn expect_eof(&mut self) -> Result<(), SyntaxError> {
        let (t, pos) = self.next()?;
        if t == Tok::Eof {
            Ok(())
        } else {
            Err(SyntaxError { pos, message: format!("unexpected {t} after end of input") })
        }
    }
}
