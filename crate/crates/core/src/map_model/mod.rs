//! Piecewise monotonic interval maps.
//!
//! A [`PmMap`] is a partition of a compact interval into nondegenerate
//! pieces, each carrying a strictly monotone continuous branch. Points on
//! piece boundaries belong to whichever piece the closure flags assign them
//! to, which makes evaluation total on the domain.

mod branch;
pub mod catalog;
pub mod spec_file;

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

pub use branch::{Affine, Branch, Interpolation, MonotoneTable, Monotonicity};

use crate::interval::{Interval, IntervalUnion};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ValidationIssue {
    NoPieces,
    BranchCountMismatch { pieces: usize, branches: usize },
    DegenerateDomain,
    DegeneratePiece { piece: usize },
    Unordered { piece: usize },
    Gap { from: String, to: String },
    Overlap { from: String, to: String },
    MissingPoint { at: String },
    DoubleCovered { at: String },
    OutsideDomain { piece: usize },
    ZeroSlope { piece: usize },
    TableGrid { piece: usize, reason: String },
    ImageOutsideDomain { piece: usize, value: String },
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationIssue::NoPieces => write!(f, "map has no pieces"),
            ValidationIssue::BranchCountMismatch { pieces, branches } => {
                write!(f, "{pieces} pieces but {branches} branches")
            }
            ValidationIssue::DegenerateDomain => write!(f, "domain must satisfy a < b"),
            ValidationIssue::DegeneratePiece { piece } => {
                write!(f, "piece {} is degenerate (left >= right)", piece + 1)
            }
            ValidationIssue::Unordered { piece } => {
                write!(f, "piece {} starts before the piece listed ahead of it", piece + 1)
            }
            ValidationIssue::Gap { from, to } => write!(f, "gap between {from} and {to}"),
            ValidationIssue::Overlap { from, to } => write!(f, "overlap between {from} and {to}"),
            ValidationIssue::MissingPoint { at } => write!(f, "gap: point {at} is not covered"),
            ValidationIssue::DoubleCovered { at } => write!(f, "overlap: point {at} is covered twice"),
            ValidationIssue::OutsideDomain { piece } => {
                write!(f, "piece {} extends outside the domain", piece + 1)
            }
            ValidationIssue::ZeroSlope { piece } => write!(f, "branch {} has zero slope", piece + 1),
            ValidationIssue::TableGrid { piece, reason } => {
                write!(f, "branch {}: {reason}", piece + 1)
            }
            ValidationIssue::ImageOutsideDomain { piece, value } => {
                write!(f, "branch {} takes value {value} outside the domain", piece + 1)
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, issue) in self.issues.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "  - {issue}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum MapError {
    #[error("invalid map:\n{0}")]
    Invalid(ValidationReport),
    #[error("point {point} lies outside the domain {domain}")]
    OutOfDomain { point: String, domain: String },
    #[error("exact orbit detection requires an exact scalar type")]
    InexactScalar,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Piece<S> {
    pub interval: Interval<S>,
    /// Zero-based position in the partition; reports print it one-based.
    pub index: usize,
}

/// Piecewise monotonic self-map of a closed interval.
#[derive(Clone, Debug, PartialEq)]
pub struct PmMap<S> {
    domain: Interval<S>,
    pieces: Vec<Piece<S>>,
    branches: Vec<Branch<S>>,
}

/// `C_n`: points whose orbit meets a partition endpoint within `depth` steps.
#[derive(Clone, Debug, PartialEq)]
pub struct CriticalSet<S> {
    pub depth: usize,
    pub points: Vec<S>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EventualPeriod {
    pub preperiod: usize,
    pub period: usize,
}

impl<S: Scalar> PmMap<S> {
    /// Validates the partition and the branches. Every problem found is
    /// listed in the returned report.
    pub fn new(
        domain: (S, S),
        pieces: Vec<Interval<S>>,
        branches: Vec<Branch<S>>,
    ) -> Result<Self, MapError> {
        let mut issues = Vec::new();
        let (a, b) = domain;
        if a >= b {
            issues.push(ValidationIssue::DegenerateDomain);
            return Err(MapError::Invalid(ValidationReport { issues }));
        }
        let domain = Interval::closed(a, b).expect("a < b");
        if pieces.is_empty() {
            issues.push(ValidationIssue::NoPieces);
        }
        if pieces.len() != branches.len() {
            issues.push(ValidationIssue::BranchCountMismatch {
                pieces: pieces.len(),
                branches: branches.len(),
            });
        }
        for (i, p) in pieces.iter().enumerate() {
            if p.left >= p.right {
                issues.push(ValidationIssue::DegeneratePiece { piece: i });
            }
            if p.left < domain.left || p.right > domain.right {
                issues.push(ValidationIssue::OutsideDomain { piece: i });
            }
        }
        for (i, w) in pieces.windows(2).enumerate() {
            if w[1].left < w[0].left {
                issues.push(ValidationIssue::Unordered { piece: i + 1 });
            }
        }
        if issues.is_empty() {
            check_coverage(&domain, &pieces, &mut issues);
            for (i, (piece, branch)) in pieces.iter().zip(&branches).enumerate() {
                check_branch(i, &domain, piece, branch, &mut issues);
            }
        }
        if !issues.is_empty() {
            return Err(MapError::Invalid(ValidationReport { issues }));
        }
        let pieces = pieces
            .into_iter()
            .enumerate()
            .map(|(index, interval)| Piece { interval, index })
            .collect();
        Ok(PmMap {
            domain,
            pieces,
            branches,
        })
    }

    /// Convenience constructor for maps whose branches are all affine.
    pub fn affine(domain: (S, S), pieces: Vec<(Interval<S>, S, S)>) -> Result<Self, MapError> {
        let (ivs, brs) = pieces
            .into_iter()
            .map(|(iv, slope, intercept)| (iv, Branch::affine(slope, intercept)))
            .unzip();
        Self::new(domain, ivs, brs)
    }

    pub fn domain(&self) -> &Interval<S> {
        &self.domain
    }

    pub fn domain_length(&self) -> S {
        self.domain.diameter()
    }

    pub fn pieces(&self) -> &[Piece<S>] {
        &self.pieces
    }

    pub fn piece(&self, k: usize) -> &Interval<S> {
        &self.pieces[k].interval
    }

    pub fn branches(&self) -> &[Branch<S>] {
        &self.branches
    }

    pub fn branch(&self, k: usize) -> &Branch<S> {
        &self.branches[k]
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn is_affine(&self) -> bool {
        self.branches.iter().all(|b| b.as_affine().is_some())
    }

    /// Index of the piece containing `x`.
    pub fn locate(&self, x: &S) -> Option<usize> {
        let k = self.pieces.partition_point(|p| {
            let iv = &p.interval;
            iv.right < *x || (iv.right == *x && !iv.right_closed)
        });
        (k < self.pieces.len() && self.pieces[k].interval.contains(x)).then_some(k)
    }

    pub fn eval(&self, x: &S) -> Result<S, MapError> {
        let k = self.locate(x).ok_or_else(|| self.out_of_domain(x))?;
        Ok(self.branches[k].eval(x))
    }

    /// `f(x)` for a point already known to be in the domain.
    pub(crate) fn apply(&self, x: &S) -> S {
        let k = self.locate(x).expect("orbit left the domain");
        self.branches[k].eval(x)
    }

    /// `[x, f(x), …, fⁿ(x)]`.
    pub fn iterate(&self, x: &S, n: usize) -> Result<Vec<S>, MapError> {
        self.check_domain(x)?;
        let mut out = Vec::with_capacity(n + 1);
        out.push(x.clone());
        for _ in 0..n {
            let next = self.apply(out.last().unwrap());
            out.push(next);
        }
        Ok(out)
    }

    pub(crate) fn check_domain(&self, x: &S) -> Result<(), MapError> {
        if self.domain.contains(x) {
            Ok(())
        } else {
            Err(self.out_of_domain(x))
        }
    }

    fn out_of_domain(&self, x: &S) -> MapError {
        MapError::OutOfDomain {
            point: x.to_text(),
            domain: self.domain.to_string(),
        }
    }

    /// Branch values at the two ends of piece `k` (one-sided limits when the
    /// piece is open there).
    pub fn endpoint_limits(&self, k: usize) -> (S, S) {
        let iv = &self.pieces[k].interval;
        (self.branches[k].eval(&iv.left), self.branches[k].eval(&iv.right))
    }

    /// `f(J_k)` with closure flags.
    pub fn piece_image(&self, k: usize) -> Interval<S> {
        self.branches[k].image(&self.pieces[k].interval)
    }

    /// `C_0`: all piece endpoints, sorted.
    pub fn partition_points(&self) -> Vec<S> {
        let mut pts: Vec<S> = self
            .pieces
            .iter()
            .flat_map(|p| [p.interval.left.clone(), p.interval.right.clone()])
            .collect();
        sort_dedup(&mut pts);
        pts
    }

    /// Solutions of `f(x) = y`, at most one per piece.
    pub fn preimages(&self, y: &S) -> Vec<S> {
        let target = Interval::point(y.clone());
        self.branches
            .iter()
            .zip(&self.pieces)
            .filter_map(|(b, p)| b.preimage(&target, &p.interval))
            .map(|iv| iv.left)
            .collect()
    }

    /// `C_depth`, built as `C_n = C_0 ∪ f⁻¹(C_{n-1})`.
    pub fn critical_points(&self, depth: usize) -> CriticalSet<S> {
        let mut points = self.partition_points();
        let mut frontier = points.clone();
        for _ in 0..depth {
            let mut fresh: Vec<S> = frontier.iter().flat_map(|y| self.preimages(y)).collect();
            sort_dedup(&mut fresh);
            fresh.retain(|p| !contains_sorted(&points, p));
            if fresh.is_empty() {
                break;
            }
            points.extend(fresh.iter().cloned());
            sort_dedup(&mut points);
            frontier = fresh;
        }
        CriticalSet { depth, points }
    }

    /// Finds the minimal `(m, p)` with `f^{m+p}(x) = f^m(x)` by hashing exact
    /// orbit points. `Ok(None)` means no repeat within `cap` iterates.
    pub fn detect_eventual_period(
        &self,
        x: &S,
        cap: usize,
    ) -> Result<Option<EventualPeriod>, MapError> {
        if !S::EXACT {
            return Err(MapError::InexactScalar);
        }
        self.check_domain(x)?;
        let mut seen: HashMap<S::Key, usize> = HashMap::new();
        let mut current = x.clone();
        for step in 0..=cap {
            let key = current.key().ok_or(MapError::InexactScalar)?;
            if let Some(&first) = seen.get(&key) {
                return Ok(Some(EventualPeriod {
                    preperiod: first,
                    period: step - first,
                }));
            }
            seen.insert(key, step);
            current = self.apply(&current);
        }
        Ok(None)
    }

    /// Composition `b_{w[p-1]} ∘ … ∘ b_{w[0]}` when every branch in the word
    /// is affine.
    pub fn affine_composition(&self, word: &[usize]) -> Option<Affine<S>> {
        word.iter().try_fold(Affine::identity(), |acc, &k| {
            self.branches[k].as_affine().map(|b| acc.then(b))
        })
    }

    /// `f(set)`, split along the partition.
    pub fn image_of(&self, set: &IntervalUnion<S>) -> IntervalUnion<S> {
        IntervalUnion::from_parts(set.parts().iter().flat_map(|part| {
            self.pieces
                .iter()
                .zip(&self.branches)
                .filter_map(move |(p, b)| part.intersect(&p.interval).map(|iv| b.image(&iv)))
        }))
    }

    /// Applies the word's branches in order, ignoring piece membership.
    pub(crate) fn apply_word(&self, word: &[usize], x: &S) -> S {
        word.iter()
            .fold(x.clone(), |acc, &k| self.branches[k].eval(&acc))
    }
}

fn check_coverage<S: Scalar>(domain: &Interval<S>, pieces: &[Interval<S>], issues: &mut Vec<ValidationIssue>) {
    let Some(first) = pieces.first() else { return };
    let last = pieces.last().unwrap();
    if first.left > domain.left {
        issues.push(ValidationIssue::Gap {
            from: domain.left.to_text(),
            to: first.left.to_text(),
        });
    } else if !first.left_closed {
        issues.push(ValidationIssue::MissingPoint { at: first.left.to_text() });
    }
    for w in pieces.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if a.right < b.left {
            issues.push(ValidationIssue::Gap {
                from: a.right.to_text(),
                to: b.left.to_text(),
            });
        } else if a.right > b.left {
            issues.push(ValidationIssue::Overlap {
                from: b.left.to_text(),
                to: a.right.to_text(),
            });
        } else if a.right_closed && b.left_closed {
            issues.push(ValidationIssue::DoubleCovered { at: b.left.to_text() });
        } else if !a.right_closed && !b.left_closed {
            issues.push(ValidationIssue::MissingPoint { at: b.left.to_text() });
        }
    }
    if last.right < domain.right {
        issues.push(ValidationIssue::Gap {
            from: last.right.to_text(),
            to: domain.right.to_text(),
        });
    } else if !last.right_closed {
        issues.push(ValidationIssue::MissingPoint { at: last.right.to_text() });
    }
}

fn check_branch<S: Scalar>(
    index: usize,
    domain: &Interval<S>,
    piece: &Interval<S>,
    branch: &Branch<S>,
    issues: &mut Vec<ValidationIssue>,
) {
    match branch {
        Branch::Affine(a) if a.slope.is_zero() => {
            issues.push(ValidationIssue::ZeroSlope { piece: index });
            return;
        }
        Branch::Table(t) => {
            let (x0, x1) = (&t.xs[0], t.xs.last().unwrap());
            if !S::approx_eq(x0, &piece.left) || !S::approx_eq(x1, &piece.right) {
                issues.push(ValidationIssue::TableGrid {
                    piece: index,
                    reason: format!(
                        "grid spans [{}, {}] but the piece is {}",
                        x0.to_text(),
                        x1.to_text(),
                        piece
                    ),
                });
                return;
            }
        }
        _ => {}
    }
    for end in [&piece.left, &piece.right] {
        let v = branch.eval(end);
        if !S::approx_le(&domain.left, &v) || !S::approx_le(&v, &domain.right) {
            issues.push(ValidationIssue::ImageOutsideDomain {
                piece: index,
                value: v.to_text(),
            });
        }
    }
}

pub(crate) fn sort_dedup<S: Scalar>(v: &mut Vec<S>) {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    v.dedup_by(|a, b| S::approx_eq(a, b));
}

pub(crate) fn contains_sorted<S: Scalar>(v: &[S], x: &S) -> bool {
    let k = v.partition_point(|p| S::definitely_lt(p, x));
    k < v.len() && S::approx_eq(&v[k], x)
}
