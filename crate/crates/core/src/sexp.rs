//! Minimal S-expression reader shared by the treebank and rule-file formats.
//!
//! Atoms are runs of non-space characters other than parentheses and `"`.
//! Double-quoted atoms may contain spaces; `\"` and `\\` are the only escapes.
//! A `;` outside a quoted atom starts a comment that runs to end of line.

use crate::error::{Error, Pos, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sexp {
    Atom {
        text: String,
        quoted: bool,
        pos: Pos,
    },
    List {
        items: Vec<Sexp>,
        pos: Pos,
    },
}

impl Sexp {
    pub fn pos(&self) -> Pos {
        match self {
            Sexp::Atom { pos, .. } | Sexp::List { pos, .. } => *pos,
        }
    }
}

struct Reader<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl<'a> Reader<'a> {
    fn new(text: &'a str) -> Self {
        Reader {
            chars: text.chars().peekable(),
            line: 1,
            column: 1,
        }
    }

    fn pos(&self) -> Pos {
        Pos {
            line: self.line,
            column: self.column,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
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

    fn read(&mut self) -> Result<Option<Sexp>> {
        self.skip_trivia();
        let pos = self.pos();
        match self.chars.peek().copied() {
            None => Ok(None),
            Some(')') => Err(Error::Syntax {
                pos,
                message: "unexpected `)`".into(),
            }),
            Some('(') => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_trivia();
                    match self.chars.peek() {
                        None => {
                            return Err(Error::Syntax {
                                pos,
                                message: "unclosed `(`".into(),
                            })
                        }
                        Some(')') => {
                            self.bump();
                            return Ok(Some(Sexp::List { items, pos }));
                        }
                        Some(_) => {
                            // read() only yields None at end of input, handled above
                            if let Some(item) = self.read()? {
                                items.push(item);
                            }
                        }
                    }
                }
            }
            Some('"') => {
                self.bump();
                let mut text = String::new();
                loop {
                    match self.bump() {
                        None => {
                            return Err(Error::Syntax {
                                pos,
                                message: "unterminated string".into(),
                            })
                        }
                        Some('"') => break,
                        Some('\\') => match self.bump() {
                            Some(c @ ('"' | '\\')) => text.push(c),
                            _ => {
                                return Err(Error::Syntax {
                                    pos: self.pos(),
                                    message: "invalid escape in string".into(),
                                })
                            }
                        },
                        Some(c) => text.push(c),
                    }
                }
                Ok(Some(Sexp::Atom {
                    text,
                    quoted: true,
                    pos,
                }))
            }
            Some(_) => {
                let mut text = String::new();
                while let Some(&c) = self.chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == '"' || c == ';' {
                        break;
                    }
                    text.push(c);
                    self.bump();
                }
                Ok(Some(Sexp::Atom {
                    text,
                    quoted: false,
                    pos,
                }))
            }
        }
    }
}

/// Reads every top-level expression in `text`.
pub fn read_all(text: &str) -> Result<Vec<Sexp>> {
    let mut reader = Reader::new(text);
    let mut out = Vec::new();
    while let Some(expr) = reader.read()? {
        out.push(expr);
    }
    Ok(out)
}

/// Writes an atom, quoting it when it would not survive re-reading bare.
pub fn write_atom(out: &mut String, text: &str) {
    let bare = !text.is_empty()
        && !text
            .chars()
            .any(|c| c.is_whitespace() || matches!(c, '(' | ')' | '"' | ';' | '\\'));
    if bare {
        out.push_str(text);
    } else {
        out.push('"');
        for c in text.chars() {
            if c == '"' || c == '\\' {
                out.push('\\');
            }
            out.push(c);
        }
        out.push('"');
    }
}
