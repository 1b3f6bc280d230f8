//! Parses a query, prints its canonical form, and shows a positioned parse
//! error for a broken one.

use polyfed::query::{parse, render};

fn main() {
    let text = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "SELECT E.a,E.b WHERE E FROM wf AND E.a >= 2.5 and E.b != \"x\"".into());
    match parse(&text) {
        Ok(q) => println!("{}", render(&q)),
        Err(e) => println!("error: {e}"),
    }
    match parse("select E.a\nwhere E frm wf") {
        Ok(_) => unreachable!(),
        Err(e) => println!("line {}, column {}: expected {:?}, found {}", e.line, e.column, e.expected, e.found),
    }
}
