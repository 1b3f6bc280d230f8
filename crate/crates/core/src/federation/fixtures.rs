//! On-disk store formats, one directory per store:
//!
//! * relational: `<table>.csv` with a `name:type` header (`int`, `float`,
//!   `str`, `bool`; untyped columns are `str`), empty cells are null;
//! * document: `<collection>.jsonl`, one flat JSON object per line;
//! * triple: `*.triples`, lines `subject predicate object` where the object
//!   is the rest of the line (a JSON string, a number, `true`/`false`, or a
//!   bare IRI);
//! * file: `<dataset>.manifest`, lines `path size key=value ...`.
//!
//! Blank lines and lines starting with `#` are skipped in the line formats.

use std::fs;
use std::path::{Path, PathBuf};

use crate::registry::StoreKind;
use crate::value::Scalar;

use super::stores::{ColumnType, DocumentStore, FileMetaStore, RelationalStore, TripleStore};
use super::{FederationError, Result, StoreAdapter};

fn io_err(path: &Path, e: impl std::fmt::Display) -> FederationError {
    FederationError::Io { path: path.display().to_string(), message: e.to_string() }
}

fn fixture_err(path: &Path, line: usize, message: impl Into<String>) -> FederationError {
    FederationError::Fixture { path: path.display().to_string(), line, message: message.into() }
}

/// Files in `dir` with extension `ext`, sorted, as (stem, path).
fn files_with(dir: &Path, ext: &str) -> Result<Vec<(String, PathBuf)>> {
    if !dir.exists() {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| io_err(dir, e))? {
        let path = entry.map_err(|e| io_err(dir, e))?.path();
        if path.extension().and_then(|e| e.to_str()) == Some(ext) {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                out.push((stem.to_owned(), path.clone()));
            }
        }
    }
    out.sort();
    Ok(out)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| io_err(path, e))
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// A bare token as a scalar: quoted JSON string, integer, float, boolean,
/// or otherwise the text itself.
pub(crate) fn parse_token(text: &str) -> Result<Scalar, String> {
    if text.starts_with('"') {
        return serde_json::from_str::<String>(text).map(Scalar::Str).map_err(|e| e.to_string());
    }
    if let Ok(i) = text.parse::<i64>() {
        return Ok(Scalar::Int(i));
    }
    let numeric = text.chars().all(|c| c.is_ascii_digit() || matches!(c, '-' | '.'))
        && text.chars().any(|c| c.is_ascii_digit());
    if numeric {
        if let Ok(f) = text.parse::<f64>() {
            return Ok(Scalar::Float(f));
        }
    }
    Ok(match text {
        "true" => Scalar::Bool(true),
        "false" => Scalar::Bool(false),
        _ => Scalar::str(text),
    })
}

/// Loads an adapter of `kind` from `dir`. A missing directory yields an
/// empty store. `declared` lists datasets and attributes that must be known
/// even when no file mentions them.
pub fn load_store(
    kind: StoreKind,
    name: &str,
    dir: &Path,
    declared: &[(String, Vec<String>)],
) -> Result<Box<dyn StoreAdapter>> {
    Ok(match kind {
        StoreKind::RelationalDB => {
            let mut s = load_relational(name, dir)?;
            for (d, attrs) in declared {
                s.declare(d, attrs.iter().cloned());
            }
            Box::new(s)
        }
        StoreKind::DocumentDB => {
            let mut s = load_documents(name, dir)?;
            for (d, attrs) in declared {
                s.declare(d, attrs.iter().cloned());
            }
            Box::new(s)
        }
        StoreKind::TripleStore => {
            let mut s = load_triples(name, dir)?;
            for (d, attrs) in declared {
                s.declare(d, attrs.iter().cloned());
            }
            Box::new(s)
        }
        StoreKind::FileSystem => {
            let mut s = load_files(name, dir)?;
            for (d, attrs) in declared {
                s.declare(d, attrs.iter().cloned());
            }
            Box::new(s)
        }
    })
}

pub fn load_relational(name: &str, dir: &Path) -> Result<RelationalStore> {
    let mut store = RelationalStore::new(name);
    for (table, path) in files_with(dir, "csv")? {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_path(&path)
            .map_err(|e| io_err(&path, e))?;
        let headers = reader.headers().map_err(|e| fixture_err(&path, 1, e.to_string()))?.clone();
        let mut columns = Vec::new();
        for h in headers.iter() {
            let (col, ty) = match h.split_once(':') {
                Some((c, t)) => (c, ColumnType::parse(t).ok_or_else(|| fixture_err(&path, 1, format!("unknown type `{t}`")))?),
                None => (h, ColumnType::Str),
            };
            columns.push((col.to_owned(), ty));
        }
        store.create_table(table.clone(), columns.clone());
        for (i, record) in reader.records().enumerate() {
            let line = i + 2;
            let record = record.map_err(|e| fixture_err(&path, line, e.to_string()))?;
            if record.len() != columns.len() {
                return Err(fixture_err(&path, line, format!("expected {} fields", columns.len())));
            }
            let row = record
                .iter()
                .zip(&columns)
                .map(|(cell, (_, ty))| ty.parse_cell(cell))
                .collect::<Result<Vec<_>, String>>()
                .map_err(|m| fixture_err(&path, line, m))?;
            store.insert(&table, row)?;
        }
    }
    Ok(store)
}

pub fn load_documents(name: &str, dir: &Path) -> Result<DocumentStore> {
    let mut store = DocumentStore::new(name);
    for (collection, path) in files_with(dir, "jsonl")? {
        store.declare(&collection, Vec::<String>::new());
        let text = read(&path)?;
        for (line, l) in content_lines(&text) {
            let value: serde_json::Value = serde_json::from_str(l).map_err(|e| fixture_err(&path, line, e.to_string()))?;
            let serde_json::Value::Object(map) = value else {
                return Err(fixture_err(&path, line, "expected a JSON object"));
            };
            let mut doc = Vec::new();
            for (k, v) in map {
                let v = match v {
                    serde_json::Value::Null => continue,
                    serde_json::Value::Bool(b) => Scalar::Bool(b),
                    serde_json::Value::String(s) => Scalar::Str(s),
                    serde_json::Value::Number(n) => match n.as_i64() {
                        Some(i) => Scalar::Int(i),
                        None => Scalar::Float(n.as_f64().unwrap_or(f64::NAN)),
                    },
                    _ => return Err(fixture_err(&path, line, format!("field `{k}` is not a scalar"))),
                };
                doc.push((k, v));
            }
            store.insert(&collection, doc);
        }
    }
    Ok(store)
}

pub fn load_triples(name: &str, dir: &Path) -> Result<TripleStore> {
    let mut store = TripleStore::new(name);
    for (_, path) in files_with(dir, "triples")? {
        let text = read(&path)?;
        for (line, l) in content_lines(&text) {
            let mut parts = l.splitn(3, char::is_whitespace);
            let (Some(s), Some(p), Some(o)) = (parts.next(), parts.next(), parts.next()) else {
                return Err(fixture_err(&path, line, "expected `subject predicate object`"));
            };
            let o = parse_token(o.trim()).map_err(|m| fixture_err(&path, line, m))?;
            store.insert(s, p, o);
        }
    }
    Ok(store)
}

/// Splits off the leading token, honouring a JSON-quoted string.
fn leading_token(text: &str) -> Result<(&str, &str), String> {
    let text = text.trim_start();
    if text.starts_with('"') {
        let mut escaped = false;
        for (i, c) in text.char_indices().skip(1) {
            match c {
                '\\' if !escaped => escaped = true,
                '"' if !escaped => return Ok((&text[..=i], &text[i + 1..])),
                _ => escaped = false,
            }
        }
        return Err("unterminated string".into());
    }
    let end = text.find(char::is_whitespace).unwrap_or(text.len());
    Ok((&text[..end], &text[end..]))
}

pub fn load_files(name: &str, dir: &Path) -> Result<FileMetaStore> {
    let mut store = FileMetaStore::new(name);
    for (dataset, path) in files_with(dir, "manifest")? {
        store.declare(&dataset, Vec::<String>::new());
        let text = read(&path)?;
        for (line, l) in content_lines(&text) {
            let bad = |m: String| fixture_err(&path, line, m);
            let (file, rest) = leading_token(l).map_err(bad)?;
            let file = match parse_token(file).map_err(bad)? {
                Scalar::Str(s) => s,
                other => other.to_string(),
            };
            let (size, mut rest) = leading_token(rest).map_err(bad)?;
            let size: i64 = size.parse().map_err(|_| bad(format!("bad size `{size}`")))?;
            let mut meta = Vec::new();
            while !rest.trim().is_empty() {
                let trimmed = rest.trim_start();
                let (key, after) = trimmed.split_once('=').ok_or_else(|| bad("expected key=value".into()))?;
                let (value, after) = leading_token(after).map_err(bad)?;
                meta.push((key.to_owned(), parse_token(value).map_err(bad)?));
                rest = after;
            }
            store.insert(&dataset, file, size, meta);
        }
    }
    Ok(store)
}
