//! Intervals of the real line with explicit endpoint closure.
//!
//! An `Interval` is never empty: constructors that could produce an empty
//! set return `Option`. A degenerate interval is a single closed point.

use std::fmt;

use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct Interval<S> {
    pub left: S,
    pub right: S,
    pub left_closed: bool,
    pub right_closed: bool,
}

impl<S: Scalar> Interval<S> {
    pub fn new(left: S, right: S, left_closed: bool, right_closed: bool) -> Option<Self> {
        if left < right || (left == right && left_closed && right_closed) {
            Some(Interval {
                left,
                right,
                left_closed,
                right_closed,
            })
        } else {
            None
        }
    }

    pub fn closed(left: S, right: S) -> Option<Self> {
        Self::new(left, right, true, true)
    }

    pub fn open(left: S, right: S) -> Option<Self> {
        Self::new(left, right, false, false)
    }

    pub fn point(p: S) -> Self {
        Interval {
            left: p.clone(),
            right: p,
            left_closed: true,
            right_closed: true,
        }
    }

    pub fn is_point(&self) -> bool {
        self.left == self.right
    }

    pub fn diameter(&self) -> S {
        self.right.clone() - self.left.clone()
    }

    pub fn contains(&self, x: &S) -> bool {
        let above = if self.left_closed { *x >= self.left } else { *x > self.left };
        let below = if self.right_closed { *x <= self.right } else { *x < self.right };
        above && below
    }

    pub fn closure(&self) -> Self {
        Interval {
            left: self.left.clone(),
            right: self.right.clone(),
            left_closed: true,
            right_closed: true,
        }
    }

    /// Open interior; `None` for a single point.
    pub fn interior(&self) -> Option<Self> {
        Self::open(self.left.clone(), self.right.clone())
    }

    pub fn intersect(&self, other: &Self) -> Option<Self> {
        let (left, left_closed) = if self.left > other.left {
            (self.left.clone(), self.left_closed)
        } else if other.left > self.left {
            (other.left.clone(), other.left_closed)
        } else {
            (self.left.clone(), self.left_closed && other.left_closed)
        };
        let (right, right_closed) = if self.right < other.right {
            (self.right.clone(), self.right_closed)
        } else if other.right < self.right {
            (other.right.clone(), other.right_closed)
        } else {
            (self.right.clone(), self.right_closed && other.right_closed)
        };
        Self::new(left, right, left_closed, right_closed)
    }

    /// `other ⊆ self`.
    pub fn contains_interval(&self, other: &Self) -> bool {
        let left_ok = self.left < other.left
            || (self.left == other.left && (self.left_closed || !other.left_closed));
        let right_ok = other.right < self.right
            || (self.right == other.right && (self.right_closed || !other.right_closed));
        left_ok && right_ok
    }

    /// Interiors intersect (the sets share more than a point).
    pub fn overlaps_interior(&self, other: &Self) -> bool {
        S::definitely_lt(&self.left, &other.right) && S::definitely_lt(&other.left, &self.right)
    }

    pub fn midpoint(&self) -> S {
        S::midpoint(&self.left, &self.right)
    }
}

impl<S: Scalar> fmt::Display for Interval<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_point() {
            return write!(f, "{{{}}}", self.left.to_text());
        }
        write!(
            f,
            "{}{}, {}{}",
            if self.left_closed { '[' } else { '(' },
            self.left.to_text(),
            self.right.to_text(),
            if self.right_closed { ']' } else { ')' }
        )
    }
}

/// Sorted, pairwise disjoint union of intervals. Touching pieces are merged
/// whenever their union is again an interval.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalUnion<S> {
    parts: Vec<Interval<S>>,
}

impl<S: Scalar> IntervalUnion<S> {
    pub fn empty() -> Self {
        IntervalUnion { parts: Vec::new() }
    }

    pub fn from_parts(parts: impl IntoIterator<Item = Interval<S>>) -> Self {
        let mut parts: Vec<_> = parts.into_iter().collect();
        parts.sort_by(|a, b| {
            a.left
                .partial_cmp(&b.left)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(b.left_closed.cmp(&a.left_closed))
        });
        let mut merged: Vec<Interval<S>> = Vec::with_capacity(parts.len());
        for part in parts {
            if let Some(last) = merged.last_mut() {
                let joins = part.left < last.right
                    || (part.left == last.right && (part.left_closed || last.right_closed));
                if joins {
                    if part.right > last.right {
                        last.right = part.right;
                        last.right_closed = part.right_closed;
                    } else if part.right == last.right {
                        last.right_closed |= part.right_closed;
                    }
                    continue;
                }
            }
            merged.push(part);
        }
        IntervalUnion { parts: merged }
    }

    pub fn parts(&self) -> &[Interval<S>] {
        &self.parts
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn contains_interval(&self, target: &Interval<S>) -> bool {
        self.parts.iter().any(|p| p.contains_interval(target))
    }

    /// Total length of the union.
    pub fn measure(&self) -> S {
        self.parts.iter().fold(S::zero(), |acc, p| acc + p.diameter())
    }

    pub fn intersect_interval(&self, other: &Interval<S>) -> Self {
        IntervalUnion {
            parts: self.parts.iter().filter_map(|p| p.intersect(other)).collect(),
        }
    }
}
