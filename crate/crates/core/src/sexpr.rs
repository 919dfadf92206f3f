//! Minimal S-expression reader used by the grammar and feature-structure
//! loaders. Supports `;` comments, double-quoted strings with `\"` and `\\`
//! escapes, and bare symbols.

use std::fmt;

use thiserror::Error;

/// Source position, 1-based.
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

#[derive(Debug, Clone, PartialEq)]
pub enum Sexp {
    Symbol(String, Pos),
    Str(String, Pos),
    List(Vec<Sexp>, Pos),
}

impl Sexp {
    pub fn pos(&self) -> Pos {
        match self {
            Sexp::Symbol(_, p) | Sexp::Str(_, p) | Sexp::List(_, p) => *p,
        }
    }

    pub fn as_symbol(&self) -> Option<&str> {
        match self {
            Sexp::Symbol(s, _) => Some(s),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List(items, _) => Some(items),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SexpError {
    #[error("{0}: unexpected ')'")]
    UnexpectedClose(Pos),
    #[error("{0}: unclosed '('")]
    Unclosed(Pos),
    #[error("{0}: unterminated string literal")]
    UnterminatedString(Pos),
    #[error("{0}: expected exactly one expression")]
    NotSingle(Pos),
}

struct Reader<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
}

impl<'a> Reader<'a> {
    fn new(text: &'a str) -> Self {
        Reader {
            chars: text.chars().peekable(),
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

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == ';' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn read_all(&mut self) -> Result<Vec<Sexp>, SexpError> {
        let mut out = Vec::new();
        // stack of (open position, items)
        let mut stack: Vec<(Pos, Vec<Sexp>)> = Vec::new();
        loop {
            self.skip_trivia();
            let pos = self.pos();
            let Some(&c) = self.chars.peek() else {
                break;
            };
            let atom = match c {
                '(' => {
                    self.bump();
                    stack.push((pos, Vec::new()));
                    continue;
                }
                ')' => {
                    self.bump();
                    let (open, items) = stack.pop().ok_or(SexpError::UnexpectedClose(pos))?;
                    Sexp::List(items, open)
                }
                '"' => {
                    self.bump();
                    let mut s = String::new();
                    loop {
                        match self.bump() {
                            None => return Err(SexpError::UnterminatedString(pos)),
                            Some('"') => break,
                            Some('\\') => match self.bump() {
                                None => return Err(SexpError::UnterminatedString(pos)),
                                Some(e) => s.push(e),
                            },
                            Some(ch) => s.push(ch),
                        }
                    }
                    Sexp::Str(s, pos)
                }
                _ => {
                    let mut s = String::new();
                    while let Some(&ch) = self.chars.peek() {
                        if ch.is_whitespace() || matches!(ch, '(' | ')' | '"' | ';') {
                            break;
                        }
                        s.push(ch);
                        self.bump();
                    }
                    Sexp::Symbol(s, pos)
                }
            };
            match stack.last_mut() {
                Some((_, items)) => items.push(atom),
                None => out.push(atom),
            }
        }
        if let Some((open, _)) = stack.pop() {
            return Err(SexpError::Unclosed(open));
        }
        Ok(out)
    }
}

/// Read every top-level expression in `text`.
pub fn read_all(text: &str) -> Result<Vec<Sexp>, SexpError> {
    Reader::new(text).read_all()
}

/// Read exactly one expression.
pub fn read_one(text: &str) -> Result<Sexp, SexpError> {
    let mut all = read_all(text)?;
    if all.len() != 1 {
        return Err(SexpError::NotSingle(Pos { line: 1, col: 1 }));
    }
    Ok(all.pop().unwrap())
}

/// Quote a string literal in the notation the readers accept.
pub fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}
