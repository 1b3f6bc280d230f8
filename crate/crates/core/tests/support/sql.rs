//! A tiny evaluator for the SQL subset the renderer emits: a projection
//! list, comma-separated tables, one inline `VALUES` relation and a
//! conjunction of comparisons.

use std::collections::BTreeMap;

use polyfed::federation::Row;
use polyfed::value::{CompareOp, Scalar};

use super::compare;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Quoted(String),
    Str(String),
    Num(String),
    Punct(&'static str),
}

fn tokenize(sql: &str) -> Vec<Tok> {
    let chars: Vec<char> = sql.chars().collect();
    let mut i = 0;
    let mut out = Vec::new();
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c == '"' || c == '\'' {
            let mut s = String::new();
            i += 1;
            loop {
                if chars[i] == c {
                    if chars.get(i + 1) == Some(&c) {
                        s.push(c);
                        i += 2;
                        continue;
                    }
                    i += 1;
                    break;
                }
                s.push(chars[i]);
                i += 1;
            }
            out.push(if c == '"' { Tok::Quoted(s) } else { Tok::Str(s) });
        } else if c.is_ascii_digit() || (c == '-' && chars.get(i + 1).is_some_and(char::is_ascii_digit)) {
            let start = i;
            i += 1;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '.' || chars[i] == '-' || chars[i] == '+') {
                i += 1;
            }
            out.push(Tok::Num(chars[start..i].iter().collect()));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Tok::Word(chars[start..i].iter().collect()));
        } else {
            let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
            let p = ["!=", "<=", ">=", "(", ")", ",", ".", "=", "<", ">"]
                .into_iter()
                .find(|p| two.starts_with(p))
                .unwrap_or_else(|| panic!("unexpected {c:?} in SQL"));
            i += p.len();
            out.push(Tok::Punct(p));
        }
    }
    out
}

#[derive(Debug)]
enum Operand {
    Column(String, String),
    Value(Scalar),
}

#[derive(Debug)]
struct Query {
    distinct: bool,
    select: Vec<(String, String)>,
    tables: Vec<(String, String)>,
    values_alias: String,
    values_columns: Vec<String>,
    values_rows: Vec<Vec<Scalar>>,
    conditions: Vec<(String, String, CompareOp, Operand)>,
}

struct P {
    toks: Vec<Tok>,
    pos: usize,
}

impl P {
    fn next(&mut self) -> Tok {
        self.pos += 1;
        self.toks[self.pos - 1].clone()
    }
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }
    fn word(&mut self) -> String {
        match self.next() {
            Tok::Word(w) => w,
            t => panic!("expected word, got {t:?}"),
        }
    }
    fn punct(&mut self, p: &str) {
        match self.next() {
            Tok::Punct(q) if q == p => {}
            t => panic!("expected {p}, got {t:?}"),
        }
    }
    fn keyword(&mut self, k: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Word(w)) if w.eq_ignore_ascii_case(k)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }
    fn column(&mut self) -> (String, String) {
        let alias = self.word();
        self.punct(".");
        let col = match self.next() {
            Tok::Quoted(c) | Tok::Word(c) => c,
            t => panic!("expected column, got {t:?}"),
        };
        (alias, col)
    }
    fn literal(&mut self) -> Scalar {
        match self.next() {
            Tok::Str(s) => Scalar::Str(s),
            Tok::Num(n) if n.contains(['.', 'e', 'E']) => Scalar::Float(n.parse().unwrap()),
            Tok::Num(n) => Scalar::Int(n.parse().unwrap()),
            Tok::Word(w) if w == "TRUE" => Scalar::Bool(true),
            Tok::Word(w) if w == "FALSE" => Scalar::Bool(false),
            t => panic!("expected literal, got {t:?}"),
        }
    }
}

fn parse(sql: &str) -> Query {
    let mut p = P { toks: tokenize(sql), pos: 0 };
    assert!(p.keyword("SELECT"));
    let distinct = p.keyword("distinct");
    let mut select = vec![p.column()];
    while p.peek() == Some(&Tok::Punct(",")) {
        p.next();
        select.push(p.column());
    }
    assert!(p.keyword("FROM"));
    let mut tables = Vec::new();
    let mut values = None;
    loop {
        if p.peek() == Some(&Tok::Punct("(")) {
            p.next();
            assert!(p.keyword("VALUES"));
            let mut rows = Vec::new();
            loop {
                p.punct("(");
                let mut row = vec![p.literal()];
                while p.peek() == Some(&Tok::Punct(",")) {
                    p.next();
                    row.push(p.literal());
                }
                p.punct(")");
                rows.push(row);
                if p.peek() == Some(&Tok::Punct(",")) {
                    p.next();
                } else {
                    break;
                }
            }
            p.punct(")");
            assert!(p.keyword("as"));
            let alias = p.word();
            p.punct("(");
            let mut cols = vec![p.word()];
            while p.peek() == Some(&Tok::Punct(",")) {
                p.next();
                cols.push(p.word());
            }
            p.punct(")");
            values = Some((alias, cols, rows));
        } else {
            let table = p.word();
            let alias = p.word();
            tables.push((table, alias));
        }
        if p.peek() == Some(&Tok::Punct(",")) {
            p.next();
        } else {
            break;
        }
    }
    let mut conditions = Vec::new();
    if p.keyword("WHERE") {
        loop {
            let (alias, col) = p.column();
            let op = match p.next() {
                Tok::Punct("=") => CompareOp::Eq,
                Tok::Punct("!=") => CompareOp::Ne,
                Tok::Punct("<") => CompareOp::Lt,
                Tok::Punct("<=") => CompareOp::Le,
                Tok::Punct(">") => CompareOp::Gt,
                Tok::Punct(">=") => CompareOp::Ge,
                t => panic!("expected operator, got {t:?}"),
            };
            let rhs = if matches!(p.peek(), Some(Tok::Word(w)) if w != "TRUE" && w != "FALSE") {
                let (a, c) = p.column();
                Operand::Column(a, c)
            } else {
                Operand::Value(p.literal())
            };
            conditions.push((alias, col, op, rhs));
            if !p.keyword("AND") {
                break;
            }
        }
    }
    assert!(p.peek().is_none(), "trailing SQL tokens");
    let (values_alias, values_columns, values_rows) = values.expect("VALUES relation");
    Query { distinct, select, tables, values_alias, values_columns, values_rows, conditions }
}

pub type Table = Vec<BTreeMap<String, Option<Scalar>>>;

/// Evaluates `sql` against tables keyed by table name.
pub fn evaluate(sql: &str, data: &BTreeMap<String, Table>) -> Vec<Row> {
    let q = parse(sql);
    let values: Table = q
        .values_rows
        .iter()
        .map(|r| q.values_columns.iter().cloned().zip(r.iter().cloned().map(Some)).collect())
        .collect();
    let mut relations: Vec<(String, Table)> = vec![(q.values_alias.clone(), values)];
    relations.extend(q.tables.iter().map(|(t, a)| (a.clone(), data.get(t).cloned().unwrap_or_default())));

    let lookup = |c: &BTreeMap<String, &BTreeMap<String, Option<Scalar>>>, a: &str, col: &str| -> Option<Scalar> {
        c[a].get(col).cloned().flatten()
    };
    let holds = |c: &BTreeMap<String, &BTreeMap<String, Option<Scalar>>>, (a, col, op, rhs): &(String, String, CompareOp, Operand)| {
        let lhs = lookup(c, a, col);
        let rhs = match rhs {
            Operand::Column(a2, c2) => lookup(c, a2, c2),
            Operand::Value(v) => Some(v.clone()),
        };
        matches!((lhs, rhs), (Some(l), Some(r)) if compare(&l, *op, &r))
    };
    // Cross product, applying each condition once all its relations are bound.
    let mut combos: Vec<BTreeMap<String, &BTreeMap<String, Option<Scalar>>>> = vec![BTreeMap::new()];
    for (alias, rows) in &relations {
        let ready: Vec<_> = q
            .conditions
            .iter()
            .filter(|cond| {
                let bound = |a: &str| a == alias || combos.first().is_some_and(|c| c.contains_key(a));
                let rhs_bound = match &cond.3 {
                    Operand::Column(a2, _) => bound(a2),
                    Operand::Value(_) => true,
                };
                bound(&cond.0) && rhs_bound && (cond.0 == *alias || matches!(&cond.3, Operand::Column(a2, _) if a2 == alias))
            })
            .collect();
        combos = combos
            .into_iter()
            .flat_map(|c| {
                rows.iter().map(move |r| {
                    let mut c = c.clone();
                    c.insert(alias.clone(), r);
                    c
                })
            })
            .filter(|c| ready.iter().all(|cond| holds(c, cond)))
            .collect();
    }
    let mut out: Vec<Row> = Vec::new();
    for c in &combos {
        let row: Row = q.select.iter().map(|(a, col)| lookup(c, a, col)).collect();
        if !q.distinct || !out.contains(&row) {
            out.push(row);
        }
    }
    out
}
