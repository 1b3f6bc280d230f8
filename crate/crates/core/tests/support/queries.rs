use polyfed::query::{Filter, GlobalQuery, QualifiedName};
use polyfed::value::Scalar;
use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::OPS;

const KEYWORDS: [&str; 4] = ["select", "where", "from", "and"];

pub fn random_ident(rng: &mut ChaCha8Rng) -> String {
    const START: &[u8] = b"abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_";
    const REST: &[u8] = b"abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_0123456789";
    loop {
        let mut s = String::new();
        s.push(*START.choose(rng).unwrap() as char);
        for _ in 0..rng.random_range(0..8) {
            s.push(*REST.choose(rng).unwrap() as char);
        }
        if !KEYWORDS.contains(&s.to_ascii_lowercase().as_str()) {
            return s;
        }
    }
}

fn random_string(rng: &mut ChaCha8Rng) -> String {
    const CHARS: [char; 14] = ['a', 'Z', ' ', '"', '\\', '\n', '\t', '\r', 'é', '日', '#', '\'', '0', '.'];
    (0..rng.random_range(0..10)).map(|_| *CHARS.choose(rng).unwrap()).collect()
}

pub fn random_literal(rng: &mut ChaCha8Rng) -> Scalar {
    match rng.random_range(0..4) {
        0 => Scalar::Int(rng.random()),
        1 => Scalar::Int(rng.random_range(-100..100)),
        2 => {
            let f: f64 = match rng.random_range(0..3) {
                0 => rng.random_range(-1e6..1e6),
                1 => (rng.random_range(-1000..1000) as f64) / 8.0,
                _ => f64::from_bits(rng.random::<u64>() & !(0x7ff << 52) | (rng.random_range(900u64..1150) << 52)),
            };
            Scalar::Float(f)
        }
        _ => Scalar::Str(random_string(rng)),
    }
}

pub fn random_query(rng: &mut ChaCha8Rng) -> GlobalQuery {
    let entity = random_ident(rng);
    let projections = (0..rng.random_range(1..=5)).map(|_| QualifiedName::new(entity.clone(), random_ident(rng))).collect();
    let filters = (0..rng.random_range(0..=3))
        .map(|_| Filter {
            attribute: QualifiedName::new(entity.clone(), random_ident(rng)),
            op: *OPS.choose(rng).unwrap(),
            value: random_literal(rng),
        })
        .collect();
    GlobalQuery { projections, subject_entity: entity, workflow: random_ident(rng), filters }
}

/// Same query with random keyword case and whitespace between tokens.
pub fn scramble(rng: &mut ChaCha8Rng, canonical: &str) -> String {
    let mut out = String::new();
    let mut in_string = false;
    let mut escaped = false;
    for c in canonical.chars() {
        if in_string {
            out.push(c);
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == '"' {
                in_string = false;
            }
            continue;
        }
        match c {
            '"' => {
                in_string = true;
                out.push(c);
            }
            ' ' => out.push_str(*[" ", "  ", "\n", "\t ", " \r\n "].choose(rng).unwrap()),
            ',' => out.push_str(*[",", " ,", ",\n"].choose(rng).unwrap()),
            c => out.push(c),
        }
    }
    for kw in KEYWORDS {
        let upper = kw.to_ascii_uppercase();
        if rng.random_bool(0.5) {
            out = out.replacen(&format!("{kw} "), &format!("{upper} "), 1);
        }
    }
    out
}

/// One random edit: delete, insert, duplicate, swap or truncate.
pub fn mutate(rng: &mut ChaCha8Rng, text: &str) -> String {
    let chars: Vec<char> = text.chars().collect();
    if chars.is_empty() {
        return "\"".into();
    }
    let i = rng.random_range(0..chars.len());
    let mut out = chars.clone();
    match rng.random_range(0..5) {
        0 => {
            out.remove(i);
        }
        1 => out.insert(i, *['"', '.', ',', '=', '!', '<', '-', '\\', '@', '1', 'x', ' ', '#'].choose(rng).unwrap()),
        2 => out.insert(i, chars[i]),
        3 => {
            let j = rng.random_range(0..chars.len());
            out.swap(i, j);
        }
        _ => out.truncate(i),
    }
    out.into_iter().collect()
}

/// Whether a (line, column) position points into `text` or just past
/// its end.
pub fn position_in_bounds(text: &str, line: usize, column: usize) -> bool {
    let lines: Vec<&str> = text.split('\n').collect();
    line >= 1 && line <= lines.len() && column >= 1 && column <= lines[line - 1].chars().count() + 1
}
