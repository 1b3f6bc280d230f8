//! Test-side oracles and random instance generators. Nothing here calls the
//! matcher, the executor or the planner's join logic.
#![allow(dead_code)]

pub mod federation;
pub mod graphs;
pub mod queries;
pub mod sql;

use polyfed::value::{CompareOp, Scalar};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Type-strict comparison written out case by case.
pub fn compare(a: &Scalar, op: CompareOp, b: &Scalar) -> bool {
    use std::cmp::Ordering;
    let ord: Ordering = match (a, b) {
        (Scalar::Int(x), Scalar::Int(y)) => x.cmp(y),
        (Scalar::Str(x), Scalar::Str(y)) => x.cmp(y),
        (Scalar::Bool(x), Scalar::Bool(y)) => x.cmp(y),
        (Scalar::Float(x), Scalar::Float(y)) => match x.partial_cmp(y) {
            Some(o) => o,
            None => return false,
        },
        _ => return false,
    };
    match op {
        CompareOp::Eq => ord.is_eq(),
        CompareOp::Ne => ord.is_ne(),
        CompareOp::Lt => ord.is_lt(),
        CompareOp::Le => ord.is_le(),
        CompareOp::Gt => ord.is_gt(),
        CompareOp::Ge => ord.is_ge(),
    }
}

pub const OPS: [CompareOp; 6] = [
    CompareOp::Eq,
    CompareOp::Ne,
    CompareOp::Lt,
    CompareOp::Le,
    CompareOp::Gt,
    CompareOp::Ge,
];

/// Sorts a multiset of rows for comparison.
pub fn sorted<T: Ord>(mut v: Vec<T>) -> Vec<T> {
    v.sort();
    v
}
