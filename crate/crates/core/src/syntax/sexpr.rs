//! A small s-expression reader that keeps line/column positions.

use super::ParseError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

#[derive(Clone, Debug)]
pub enum Sexp {
    Symbol(String, Pos),
    List(Vec<Sexp>, Pos),
}

impl Sexp {
    pub fn pos(&self) -> &Pos {
        match self {
            Sexp::Symbol(_, p) | Sexp::List(_, p) => p,
        }
    }
}

pub fn read_all(text: &str, file: &str) -> Result<Vec<Sexp>, ParseError> {
    let mut reader = Reader { chars: text.chars().collect(), i: 0, line: 1, column: 1, file };
    let mut out = Vec::new();
    loop {
        reader.skip_ws();
        if reader.i >= reader.chars.len() {
            return Ok(out);
        }
        out.push(reader.read()?);
    }
}

struct Reader<'a> {
    chars: Vec<char>,
    i: usize,
    line: usize,
    column: usize,
    file: &'a str,
}

impl Reader<'_> {
    fn pos(&self) -> Pos {
        Pos { line: self.line, column: self.column }
    }

    fn bump(&mut self) -> Option<char> {
        let c = *self.chars.get(self.i)?;
        self.i += 1;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.i).copied()
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == ';' {
                while let Some(c) = self.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                }
            } else {
                break;
            }
        }
    }

    fn error(&self, pos: &Pos, message: &str) -> ParseError {
        ParseError {
            file: self.file.to_string(),
            line: pos.line,
            column: pos.column,
            message: message.to_string(),
        }
    }

    fn read(&mut self) -> Result<Sexp, ParseError> {
        self.skip_ws();
        let start = self.pos();
        match self.peek() {
            None => Err(self.error(&start, "unexpected end of input")),
            Some(')') => Err(self.error(&start, "unexpected ')'")),
            Some('(') => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_ws();
                    match self.peek() {
                        None => return Err(self.error(&start, "unclosed '('")),
                        Some(')') => {
                            self.bump();
                            return Ok(Sexp::List(items, start));
                        }
                        Some(_) => items.push(self.read()?),
                    }
                }
            }
            Some('"') => Err(self.error(&start, "string literals are not part of the grammar")),
            Some(_) => {
                let mut s = String::new();
                while let Some(c) = self.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' || c == '"' {
                        break;
                    }
                    s.push(c);
                    self.bump();
                }
                Ok(Sexp::Symbol(s, start))
            }
        }
    }
}
