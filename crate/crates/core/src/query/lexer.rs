use crate::value::{CompareOp, Scalar};

use super::ParseError;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Select,
    Where,
    From,
    And,
    Ident(String),
    Dot,
    Comma,
    Op(CompareOp),
    Literal(Scalar),
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Select => "`select`".into(),
            Tok::Where => "`where`".into(),
            Tok::From => "`from`".into(),
            Tok::And => "`and`".into(),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Dot => "`.`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Op(op) => format!("`{op}`"),
            Tok::Literal(Scalar::Str(s)) => format!("string {s:?}"),
            Tok::Literal(v) => format!("number `{v}`"),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub column: usize,
}

pub(crate) const KEYWORDS: [&str; 4] = ["select", "where", "from", "and"];

pub(crate) fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

pub(crate) fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
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

    fn error(&mut self, expected: &[&str]) -> ParseError {
        let found = match self.peek() {
            Some(c) => format!("{c:?}"),
            None => "end of input".into(),
        };
        ParseError {
            line: self.line,
            column: self.column,
            expected: expected.iter().map(|s| (*s).to_owned()).collect(),
            found,
        }
    }
}

pub(crate) fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut cur = Cursor { chars: text.chars().peekable(), line: 1, column: 1 };
    let mut out = Vec::new();
    loop {
        while cur.peek().is_some_and(char::is_whitespace) {
            cur.bump();
        }
        let (line, column) = (cur.line, cur.column);
        let Some(c) = cur.peek() else {
            out.push(Token { tok: Tok::Eof, line, column });
            return Ok(out);
        };
        let tok = match c {
            ',' => {
                cur.bump();
                Tok::Comma
            }
            '.' => {
                cur.bump();
                Tok::Dot
            }
            '=' => {
                cur.bump();
                Tok::Op(CompareOp::Eq)
            }
            '!' => {
                cur.bump();
                if cur.peek() != Some('=') {
                    return Err(cur.error(&["`=`"]));
                }
                cur.bump();
                Tok::Op(CompareOp::Ne)
            }
            '<' | '>' => {
                cur.bump();
                let eq = cur.peek() == Some('=');
                if eq {
                    cur.bump();
                }
                Tok::Op(match (c, eq) {
                    ('<', false) => CompareOp::Lt,
                    ('<', true) => CompareOp::Le,
                    (_, false) => CompareOp::Gt,
                    (_, true) => CompareOp::Ge,
                })
            }
            '"' => {
                cur.bump();
                Tok::Literal(Scalar::Str(string_body(&mut cur)?))
            }
            c if c == '-' || c.is_ascii_digit() => number(&mut cur, line, column)?,
            c if is_ident_start(c) => {
                let mut word = String::new();
                while let Some(c) = cur.peek().filter(|c| is_ident_char(*c)) {
                    word.push(c);
                    cur.bump();
                }
                match word.to_ascii_lowercase().as_str() {
                    "select" => Tok::Select,
                    "where" => Tok::Where,
                    "from" => Tok::From,
                    "and" => Tok::And,
                    _ => Tok::Ident(word),
                }
            }
            _ => return Err(cur.error(&["token"])),
        };
        out.push(Token { tok, line, column });
    }
}

fn string_body(cur: &mut Cursor<'_>) -> Result<String, ParseError> {
    let mut s = String::new();
    loop {
        match cur.peek() {
            None => return Err(cur.error(&["`\"`"])),
            Some('"') => {
                cur.bump();
                return Ok(s);
            }
            Some('\\') => {
                cur.bump();
                let esc = match cur.peek() {
                    Some('"') => '"',
                    Some('\\') => '\\',
                    Some('n') => '\n',
                    Some('t') => '\t',
                    _ => return Err(cur.error(&["`\"`", "`\\`", "`n`", "`t`"])),
                };
                cur.bump();
                s.push(esc);
            }
            Some(c) => {
                cur.bump();
                s.push(c);
            }
        }
    }
}

fn number(cur: &mut Cursor<'_>, line: usize, column: usize) -> Result<Tok, ParseError> {
    let mut text = String::new();
    if cur.peek() == Some('-') {
        text.push('-');
        cur.bump();
    }
    fn digits(cur: &mut Cursor<'_>, text: &mut String) -> Result<(), ParseError> {
        if !cur.peek().is_some_and(|c| c.is_ascii_digit()) {
            return Err(cur.error(&["digit"]));
        }
        while let Some(c) = cur.peek().filter(char::is_ascii_digit) {
            text.push(c);
            cur.bump();
        }
        Ok(())
    }
    digits(cur, &mut text)?;
    let mut float = false;
    if cur.peek() == Some('.') {
        float = true;
        text.push('.');
        cur.bump();
        digits(cur, &mut text)?;
    }
    if cur.peek().is_some_and(is_ident_char) {
        return Err(cur.error(&["digit", "`.`", "separator"]));
    }
    let out_of_range = || ParseError {
        line,
        column,
        expected: vec!["number in range".into()],
        found: format!("`{text}`"),
    };
    if float {
        let f: f64 = text.parse().map_err(|_| out_of_range())?;
        if !f.is_finite() {
            return Err(out_of_range());
        }
        Ok(Tok::Literal(Scalar::Float(f)))
    } else {
        text.parse::<i64>().map(|i| Tok::Literal(Scalar::Int(i))).map_err(|_| out_of_range())
    }
}
