#![allow(dead_code)]

use povmlab::hs::{span_projector, Operator};
use povmlab::Tolerances;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn tol() -> Tolerances {
    Tolerances::default()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Orthogonal projection of `x` onto `Span(ops)`.
pub fn project_into_span(ops: &[Operator], x: &Operator) -> Operator {
    span_projector(ops, &tol()).unwrap().project(x).hermitian_part()
}
