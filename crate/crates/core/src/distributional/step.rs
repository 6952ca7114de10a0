use std::fmt::Write as _;

use thiserror::Error;

use crate::map_model::sort_dedup;
use crate::scalar::{min_of, Scalar};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StepError {
    #[error("{levels} levels do not fit {breakpoints} breakpoints")]
    LengthMismatch { breakpoints: usize, levels: usize },
    #[error("breakpoints must be strictly increasing")]
    Unsorted,
}

/// Left-continuous step function.
///
/// `levels[k]` is the value on `(b_{k-1}, b_k]`, with `b_{-1} = −∞` and
/// `b_n = +∞`, so there is one more level than breakpoints. Breakpoints
/// where the level does not change are removed on construction, which
/// makes structural equality the same as pointwise equality.
#[derive(Clone, Debug, PartialEq)]
pub struct StepFunction<S> {
    breakpoints: Vec<S>,
    levels: Vec<S>,
}

impl<S: Scalar> StepFunction<S> {
    pub fn new(breakpoints: Vec<S>, levels: Vec<S>) -> Result<Self, StepError> {
        if levels.len() != breakpoints.len() + 1 {
            return Err(StepError::LengthMismatch {
                breakpoints: breakpoints.len(),
                levels: levels.len(),
            });
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(StepError::Unsorted);
        }
        let mut bps = Vec::with_capacity(breakpoints.len());
        let mut lvls = Vec::with_capacity(levels.len());
        let mut levels = levels.into_iter();
        lvls.push(levels.next().expect("at least one level"));
        for (b, l) in breakpoints.into_iter().zip(levels) {
            if !S::approx_eq(lvls.last().unwrap(), &l) {
                bps.push(b);
                lvls.push(l);
            }
        }
        Ok(StepFunction {
            breakpoints: bps,
            levels: lvls,
        })
    }

    pub fn constant(level: S) -> Self {
        StepFunction {
            breakpoints: Vec::new(),
            levels: vec![level],
        }
    }

    /// `t ↦ 1` for `t > 0`, `0` otherwise: the function of a pair whose
    /// orbits coincide.
    pub fn indicator_positive() -> Self {
        StepFunction {
            breakpoints: vec![S::zero()],
            levels: vec![S::zero(), S::one()],
        }
    }

    /// `t ↦ #{d ∈ distances : d < t} / len`.
    pub fn from_distances(distances: &[S]) -> Self {
        if distances.is_empty() {
            return Self::constant(S::zero());
        }
        let mut sorted = distances.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        let total = sorted.len() as i64;
        let mut breakpoints = Vec::new();
        let mut levels = vec![S::zero()];
        let mut i = 0;
        while i < sorted.len() {
            let mut j = i + 1;
            while j < sorted.len() && S::approx_eq(&sorted[j], &sorted[i]) {
                j += 1;
            }
            breakpoints.push(sorted[i].clone());
            levels.push(S::from_ratio(j as i64, total));
            i = j;
        }
        StepFunction { breakpoints, levels }
    }

    pub fn breakpoints(&self) -> &[S] {
        &self.breakpoints
    }

    pub fn levels(&self) -> &[S] {
        &self.levels
    }

    pub fn eval(&self, t: &S) -> S {
        let k = self.breakpoints.partition_point(|b| b < t);
        self.levels[k].clone()
    }

    /// Nondecreasing with every level in `[0, 1]`.
    pub fn is_monotone_unit(&self) -> bool {
        let zero = S::zero();
        let one = S::one();
        self.levels.windows(2).all(|w| S::approx_le(&w[0], &w[1]))
            && self
                .levels
                .iter()
                .all(|l| S::approx_le(&zero, l) && S::approx_le(l, &one))
    }

    /// Vanishes for `t ≤ 0` and equals 1 for `t > span`.
    pub fn has_distribution_bounds(&self, span: &S) -> bool {
        S::approx_eq(&self.eval(&S::zero()), &S::zero())
            && S::approx_eq(self.levels.last().unwrap(), &S::one())
            && self.breakpoints.last().is_none_or(|b| S::approx_le(b, span))
    }

    /// Largest `ε` with the function zero on `(−∞, ε]`, or `None` when it
    /// never vanishes. Unbounded zero functions report their last breakpoint.
    pub fn zero_until(&self) -> Option<S> {
        if !self.levels[0].is_zero() {
            return None;
        }
        let k = self.levels.iter().take_while(|l| l.is_zero()).count();
        self.breakpoints.get(k - 1).cloned()
    }

    /// `∫_a^b F(t) dt`.
    pub fn integral(&self, a: &S, b: &S) -> S {
        if b <= a {
            return S::zero();
        }
        let mut total = S::zero();
        let mut left = a.clone();
        for (k, bp) in self.breakpoints.iter().enumerate() {
            if *bp <= left {
                continue;
            }
            let right = min_of(bp, b);
            total = total + self.levels[k].clone() * (right.clone() - left.clone());
            left = right;
            if left >= *b {
                return total;
            }
        }
        total + self.levels.last().unwrap().clone() * (b.clone() - left)
    }

    /// Pointwise minimum.
    pub fn pointwise_min(&self, other: &Self) -> Self {
        let mut merged: Vec<S> = self.breakpoints.iter().chain(&other.breakpoints).cloned().collect();
        sort_dedup(&mut merged);
        let mut levels: Vec<S> = merged
            .iter()
            .map(|t| min_of(&self.eval(t), &other.eval(t)))
            .collect();
        levels.push(min_of(self.levels.last().unwrap(), other.levels.last().unwrap()));
        StepFunction::new(merged, levels).expect("merged breakpoints are sorted")
    }

    /// Largest `|F(t) − G(t)|` over the given points.
    pub fn max_gap_on(&self, other: &Self, points: &[S]) -> S {
        points.iter().fold(S::zero(), |acc, t| {
            let gap = (self.eval(t) - other.eval(t)).abs();
            if gap > acc {
                gap
            } else {
                acc
            }
        })
    }

    /// `t;level` rows, two per jump: the level just left of `t` (attained
    /// at `t`) and the level just right of it.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t;level\n");
        for (k, b) in self.breakpoints.iter().enumerate() {
            let t = b.to_text();
            let _ = writeln!(out, "{t};{}", self.levels[k].to_text());
            let _ = writeln!(out, "{t};{}", self.levels[k + 1].to_text());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rat;

    fn r(p: i64, q: i64) -> Rat {
        Rat::from_ratio(p, q)
    }

    #[test]
    fn left_continuous_evaluation() {
        let f = StepFunction::from_distances(&[r(5, 18), r(7, 18), r(2, 3)]);
        assert_eq!(f.breakpoints(), &[r(5, 18), r(7, 18), r(2, 3)]);
        assert_eq!(f.levels(), &[r(0, 1), r(1, 3), r(2, 3), r(1, 1)]);
        assert_eq!(f.eval(&r(5, 18)), r(0, 1));
        assert_eq!(f.eval(&r(1, 3)), r(1, 3));
        assert_eq!(f.eval(&r(2, 3)), r(2, 3));
        assert_eq!(f.eval(&r(3, 4)), r(1, 1));
        assert!(f.is_monotone_unit());
        assert!(f.has_distribution_bounds(&r(1, 1)));
    }

    #[test]
    fn repeated_distances_merge() {
        let f = StepFunction::from_distances(&[r(1, 3), r(1, 3), r(2, 3)]);
        assert_eq!(f.levels(), &[r(0, 1), r(2, 3), r(1, 1)]);
        let zero = StepFunction::from_distances(&[r(0, 1), r(0, 1)]);
        assert_eq!(zero, StepFunction::indicator_positive());
    }

    #[test]
    fn construction_drops_flat_breakpoints() {
        let f = StepFunction::new(vec![r(1, 4), r(1, 2)], vec![r(0, 1), r(0, 1), r(1, 1)]).unwrap();
        assert_eq!(f.breakpoints(), &[r(1, 2)]);
        assert_eq!(
            StepFunction::new(vec![r(1, 2), r(1, 4)], vec![r(0, 1); 3]),
            Err(StepError::Unsorted)
        );
        assert!(matches!(
            StepFunction::<Rat>::new(vec![], vec![]),
            Err(StepError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn integral_and_zero_interval() {
        let f = StepFunction::from_distances(&[r(5, 18), r(7, 18), r(2, 3)]);
        // 1/3·(7/18−5/18) + 2/3·(2/3−7/18) + 1·(1−2/3)
        assert_eq!(f.integral(&r(0, 1), &r(1, 1)), r(1, 27) + r(5, 27) + r(1, 3));
        assert_eq!(f.zero_until(), Some(r(5, 18)));
        assert_eq!(StepFunction::<Rat>::indicator_positive().zero_until(), Some(r(0, 1)));
        assert_eq!(StepFunction::constant(r(1, 2)).zero_until(), None);
    }

    #[test]
    fn pointwise_min_and_csv() {
        let f = StepFunction::from_distances(&[r(1, 4), r(3, 4)]);
        let g = StepFunction::from_distances(&[r(1, 2)]);
        let m = f.pointwise_min(&g);
        assert_eq!(m.breakpoints(), &[r(1, 2), r(3, 4)]);
        assert_eq!(m.levels(), &[r(0, 1), r(1, 2), r(1, 1)]);
        assert_eq!(g.to_csv(), "t;level\n1/2;0\n1/2;1\n");
    }
}
