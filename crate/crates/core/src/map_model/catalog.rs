//! Reference maps on `[0, 1]` used throughout the tests and the CLI.

use super::{Branch, PmMap};
use crate::interval::Interval;
use crate::scalar::Scalar;

fn r<S: Scalar>(p: i64, q: i64) -> S {
    S::from_ratio(p, q)
}

/// Full tent map: `2x` on `[0, 1/2]`, `2 - 2x` on `(1/2, 1]`.
pub fn tent<S: Scalar>() -> PmMap<S> {
    PmMap::affine(
        (r(0, 1), r(1, 1)),
        vec![
            (Interval::closed(r(0, 1), r(1, 2)).unwrap(), r(2, 1), r(0, 1)),
            (Interval::new(r(1, 2), r(1, 1), false, true).unwrap(), r(-2, 1), r(2, 1)),
        ],
    )
    .expect("tent map is valid")
}

/// Three isometric flips cycling `J_1 → J_2 → J_3 → J_1` on thirds of the
/// unit interval. Satisfies the Markov condition, has no generator, and its
/// third iterate is the identity on piece interiors.
pub fn flip_cycle<S: Scalar>() -> PmMap<S> {
    PmMap::affine(
        (r(0, 1), r(1, 1)),
        vec![
            (Interval::closed(r(0, 1), r(1, 3)).unwrap(), r(-1, 1), r(2, 3)),
            (Interval::new(r(1, 3), r(2, 3), false, true).unwrap(), r(-1, 1), r(4, 3)),
            (Interval::new(r(2, 3), r(1, 1), false, true).unwrap(), r(1, 1), r(-2, 3)),
        ],
    )
    .expect("flip cycle map is valid")
}

/// The identity on `[0, 1]` as a single piece.
pub fn identity<S: Scalar>() -> PmMap<S> {
    PmMap::new(
        (r(0, 1), r(1, 1)),
        vec![Interval::closed(r(0, 1), r(1, 1)).unwrap()],
        vec![Branch::affine(r(1, 1), r(0, 1))],
    )
    .expect("identity map is valid")
}

/// Seed point `x_n = (4n-1)/(18n)` of the flip-cycle family. Its partner is
/// `f(x_n)`, obtained by evaluating the map.
pub fn flip_cycle_seed<S: Scalar>(n: i64) -> S {
    r(4 * n - 1, 18 * n)
}
