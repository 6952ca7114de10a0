//! Periodic points realising cyclic admissible words, and a depth-wise audit
//! of their density inside a component.

use rayon::prelude::*;
use thiserror::Error;

use crate::graph::{CoveringGraph, IrreducibleComponent};
use crate::interval::Interval;
use crate::map_model::{Branch, PmMap};
use crate::scalar::Scalar;
use crate::symbolic::{cylinder, nonempty_cylinders, transitions, Admissibility, Itinerary, SymbolicError};

/// Bisection stops once the bracket is narrower than this.
pub const DEFAULT_BISECTION_TOLERANCE: f64 = 1e-12;
const BISECTION_STEP_CAP: usize = 200;

#[derive(Debug, Error)]
pub enum PeriodicError {
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
    #[error("word {word} is not cyclically admissible")]
    NotCyclic { word: Itinerary },
    #[error("component {component} is not basic")]
    NotBasic { component: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicPoint<S> {
    pub point: S,
    /// Word length; a multiple of the prime period.
    pub period: usize,
    pub prime_period: usize,
    pub word: Itinerary,
    /// `|f^p(x) − x|`, zero for exact solves.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum PeriodicOutcome<S> {
    Point(PeriodicPoint<S>),
    /// The composed branch is the identity: every point of `interval` is
    /// fixed by `f^p`.
    FixedInterval { word: Itinerary, interval: Interval<S> },
    /// The fixed-point equation has no solution inside the cylinder.
    NotRealized { word: Itinerary, candidate: Option<S> },
}

impl<S: Scalar> PeriodicOutcome<S> {
    pub fn point(&self) -> Option<&PeriodicPoint<S>> {
        match self {
            PeriodicOutcome::Point(p) => Some(p),
            _ => None,
        }
    }
}

fn prime_period<S: Scalar>(map: &PmMap<S>, word: &[usize], x: &S) -> usize {
    let p = word.len();
    (1..p)
        .filter(|d| p.is_multiple_of(*d))
        .find(|&d| {
            (0..p - d).all(|i| word[i] == word[i + d]) && S::approx_eq(&map.apply_word(&word[..d], x), x)
        })
        .unwrap_or(p)
}

/// Solves `f^p(x) = x` on the cylinder of a cyclically admissible word.
///
/// Affine words are composed and solved exactly; table branches use
/// bisection on `f^p(x) − x` over the cylinder down to `tolerance`.
pub fn periodic_point_from_word<S: Scalar>(
    map: &PmMap<S>,
    word: &Itinerary,
    tolerance: f64,
) -> Result<PeriodicOutcome<S>, PeriodicError> {
    let letters = word.letters();
    let cyl = cylinder(map, word)?;
    let step = transitions(map, Admissibility::Touching);
    let cyclic = letters
        .iter()
        .zip(letters.iter().cycle().skip(1))
        .all(|(&a, &b)| step[a][b]);
    if !cyclic {
        return Err(PeriodicError::NotCyclic { word: word.clone() });
    }
    let Some(interval) = cyl.interval else {
        return Ok(PeriodicOutcome::NotRealized {
            word: word.clone(),
            candidate: None,
        });
    };

    let (point, residual) = if let Some(comp) = map.affine_composition(letters) {
        let one = S::one();
        if comp.slope == one {
            return Ok(if comp.intercept.is_zero() {
                PeriodicOutcome::FixedInterval {
                    word: word.clone(),
                    interval,
                }
            } else {
                PeriodicOutcome::NotRealized {
                    word: word.clone(),
                    candidate: None,
                }
            });
        }
        let x = comp.intercept.clone() / (one - comp.slope.clone());
        let residual = (comp.eval(&x) - x.clone()).abs().to_f64();
        (x, residual)
    } else {
        match bisect(map, letters, &interval, tolerance) {
            Some(found) => found,
            None => {
                return Ok(PeriodicOutcome::NotRealized {
                    word: word.clone(),
                    candidate: None,
                })
            }
        }
    };
    if !interval.contains(&point) {
        return Ok(PeriodicOutcome::NotRealized {
            word: word.clone(),
            candidate: Some(point),
        });
    }
    Ok(PeriodicOutcome::Point(PeriodicPoint {
        prime_period: prime_period(map, letters, &point),
        period: letters.len(),
        word: word.clone(),
        point,
        residual,
    }))
}

fn bisect<S: Scalar>(map: &PmMap<S>, word: &[usize], iv: &Interval<S>, tolerance: f64) -> Option<(S, f64)> {
    let g = |x: &S| map.apply_word(word, x) - x.clone();
    let (mut lo, mut hi) = (iv.left.clone(), iv.right.clone());
    let (glo, ghi) = (g(&lo), g(&hi));
    if glo.is_zero() {
        return Some((lo, 0.0));
    }
    if ghi.is_zero() {
        return Some((hi, 0.0));
    }
    if glo.is_positive() == ghi.is_positive() {
        return None;
    }
    let rising = ghi.is_positive();
    for _ in 0..BISECTION_STEP_CAP {
        if (hi.clone() - lo.clone()).to_f64() <= tolerance {
            break;
        }
        let mid = S::midpoint(&lo, &hi);
        let gm = g(&mid);
        if gm.is_zero() {
            return Some((mid, 0.0));
        }
        if gm.is_positive() == rising {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let x = S::midpoint(&lo, &hi);
    let residual = g(&x).abs().to_f64();
    Some((x, residual))
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuditRow<S> {
    pub word: Itinerary,
    /// Word actually solved: `word` followed by the shortest return path.
    pub cycle: Itinerary,
    pub found: Option<PeriodicPoint<S>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicAudit<S> {
    pub depth: usize,
    pub rows: Vec<AuditRow<S>>,
}

impl<S: Scalar> PeriodicAudit<S> {
    /// Fraction of cylinders holding a periodic point.
    pub fn coverage(&self) -> f64 {
        if self.rows.is_empty() {
            return 0.0;
        }
        self.rows.iter().filter(|r| r.found.is_some()).count() as f64 / self.rows.len() as f64
    }

    pub fn points(&self) -> Vec<S> {
        self.rows
            .iter()
            .filter_map(|r| r.found.as_ref().map(|p| p.point.clone()))
            .collect()
    }

    /// Smallest gap between distinct periodic points found.
    pub fn min_spacing(&self) -> Option<S> {
        let mut pts = self.points();
        crate::map_model::sort_dedup(&mut pts);
        pts.windows(2)
            .map(|w| w[1].clone() - w[0].clone())
            .min_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal))
    }

    /// `word;point;period;residual`, blank point and period for misses.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("word;point;period;residual\n");
        for r in &self.rows {
            match &r.found {
                Some(p) => out.push_str(&format!("{};{};{};{}\n", r.word, p.point.to_text(), p.period, p.residual)),
                None => out.push_str(&format!("{};;;\n", r.word)),
            }
        }
        out
    }
}

/// For every nonempty depth-`depth` cylinder whose letters stay in a basic
/// component, closes the word into a cycle along the covering graph and
/// looks for a periodic point inside the cylinder.
pub fn dense_periodic_audit<S: Scalar>(
    map: &PmMap<S>,
    graph: &CoveringGraph,
    component: &IrreducibleComponent,
    depth: usize,
    cylinder_cap: usize,
) -> Result<PeriodicAudit<S>, PeriodicError> {
    if !component.is_basic {
        return Err(PeriodicError::NotBasic { component: component.id });
    }
    let cylinders: Vec<_> = nonempty_cylinders(map, depth, cylinder_cap)?
        .into_iter()
        .filter(|c| c.word.letters().iter().all(|&k| component.contains(k)))
        .collect();
    let rows = cylinders
        .par_iter()
        .map(|c| {
            let letters = c.word.letters();
            let (first, last) = (letters[0], letters[letters.len() - 1]);
            let mut cycle = letters.to_vec();
            let Some(path) = graph.shortest_return(last, first) else {
                return Ok(AuditRow { word: c.word.clone(), cycle: Itinerary(cycle), found: None });
            };
            cycle.extend(path);
            let cycle = Itinerary(cycle);
            let found = match periodic_point_from_word(map, &cycle, DEFAULT_BISECTION_TOLERANCE) {
                Ok(PeriodicOutcome::Point(p)) => Some(p),
                Ok(PeriodicOutcome::FixedInterval { word, interval }) => {
                    let x = interval.midpoint();
                    Some(PeriodicPoint {
                        prime_period: prime_period(map, word.letters(), &x),
                        period: word.len(),
                        word,
                        point: x,
                        residual: 0.0,
                    })
                }
                Ok(PeriodicOutcome::NotRealized { .. }) | Err(PeriodicError::NotCyclic { .. }) => None,
                Err(e) => return Err(e),
            };
            Ok(AuditRow { word: c.word.clone(), cycle, found })
        })
        .collect::<Result<Vec<_>, PeriodicError>>()?;
    Ok(PeriodicAudit { depth, rows })
}

/// Periodic points of every cyclically admissible word of length
/// `1..=max_len` inside the component, deduplicated and sorted.
pub fn component_periodic_points<S: Scalar>(
    map: &PmMap<S>,
    component: &IrreducibleComponent,
    max_len: usize,
) -> Vec<S> {
    let mut points = Vec::new();
    for len in 1..=max_len {
        let Ok(words) = crate::symbolic::admissible_words(
            map,
            &component.nodes,
            len,
            Admissibility::Interior,
            1 << 16,
        ) else {
            break;
        };
        for w in words {
            if let Ok(PeriodicOutcome::Point(p)) = periodic_point_from_word(map, &w, DEFAULT_BISECTION_TOLERANCE) {
                points.push(p.point);
            }
        }
    }
    crate::map_model::sort_dedup(&mut points);
    points
}

/// True when every branch is affine, so periodic points are exact.
pub fn is_exactly_solvable<S: Scalar>(map: &PmMap<S>) -> bool {
    S::EXACT && map.branches().iter().all(|b| matches!(b, Branch::Affine(_)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_covering_graph, irreducible_components};
    use crate::map_model::catalog;
    use crate::Rat;

    fn r(p: i64, q: i64) -> Rat {
        Rat::from_ratio(p, q)
    }

    fn w(labels: &[usize]) -> Itinerary {
        Itinerary::from_labels(labels)
    }

    fn solve(map: &PmMap<Rat>, labels: &[usize]) -> PeriodicOutcome<Rat> {
        periodic_point_from_word(map, &w(labels), DEFAULT_BISECTION_TOLERANCE).unwrap()
    }

    #[test]
    fn tent_words() {
        let t = catalog::tent::<Rat>();
        let p = solve(&t, &[1, 2]);
        let p = p.point().unwrap();
        assert_eq!(p.point, r(2, 5));
        assert_eq!((p.period, p.prime_period), (2, 2));
        assert_eq!(p.residual, 0.0);
        assert_eq!(solve(&t, &[1]).point().unwrap().point, r(0, 1));
        assert_eq!(solve(&t, &[2]).point().unwrap().point, r(2, 3));
        let doubled = solve(&t, &[2, 2]);
        assert_eq!(doubled.point().unwrap().prime_period, 1);
    }

    #[test]
    fn flip_cycle_gives_a_fixed_interval() {
        let f = catalog::flip_cycle::<Rat>();
        match solve(&f, &[1, 2, 3]) {
            PeriodicOutcome::FixedInterval { interval, .. } => {
                assert_eq!(interval, Interval::open(r(0, 1), r(1, 3)).unwrap());
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            periodic_point_from_word(&f, &w(&[1, 3]), 1e-12),
            Err(PeriodicError::NotCyclic { .. })
        ));
    }

    #[test]
    fn boundary_and_identity_words() {
        // f(J_1) = [1/3, 2/3] touches J_1 only at the fixed point 1/3
        let f = catalog::flip_cycle::<Rat>();
        match solve(&f, &[1]) {
            PeriodicOutcome::Point(p) => assert_eq!(p.point, r(1, 3)),
            other => panic!("unexpected {other:?}"),
        }
        // identity map branch: slope one, fixed everywhere
        let id = catalog::identity::<Rat>();
        assert!(matches!(solve(&id, &[1]), PeriodicOutcome::FixedInterval { .. }));
    }

    #[test]
    fn table_branches_bisect() {
        use crate::map_model::{MonotoneTable, Monotonicity};
        let grid = |pts: &[(f64, f64)]| pts.iter().map(|&(x, y)| (x, y)).collect::<Vec<_>>();
        let m = PmMap::new(
            (0.0, 1.0),
            vec![
                Interval::closed(0.0, 0.5).unwrap(),
                Interval::new(0.5, 1.0, false, true).unwrap(),
            ],
            vec![
                Branch::Table(
                    MonotoneTable::new(grid(&[(0.0, 0.0), (0.25, 0.6), (0.5, 1.0)]), Monotonicity::Increasing)
                        .unwrap(),
                ),
                Branch::Table(
                    MonotoneTable::new(grid(&[(0.5, 1.0), (0.75, 0.3), (1.0, 0.0)]), Monotonicity::Decreasing)
                        .unwrap(),
                ),
            ],
        )
        .unwrap();
        let out = periodic_point_from_word(&m, &w(&[1, 2]), 1e-12).unwrap();
        let p = out.point().expect("period-2 point exists");
        let back = m.iterate(&p.point, 2).unwrap();
        assert!((back[2] - p.point).abs() < 1e-9);
        assert!(p.residual < 1e-9);
    }

    #[test]
    fn tent_audit_has_full_coverage() {
        let t = catalog::tent::<Rat>();
        let g = build_covering_graph(&t).unwrap();
        let comp = &irreducible_components(&g)[0];
        let mut spacing = Vec::new();
        for d in 1..=5 {
            let audit = dense_periodic_audit(&t, &g, comp, d, 1 << 20).unwrap();
            assert_eq!(audit.rows.len(), 1 << d);
            assert_eq!(audit.coverage(), 1.0);
            spacing.push(audit.min_spacing().unwrap());
        }
        assert!(spacing.windows(2).all(|s| s[1] < s[0]));
        let d1 = dense_periodic_audit(&t, &g, comp, 1, 100).unwrap();
        assert_eq!(d1.points(), vec![r(0, 1), r(2, 3)]);
        assert!(d1.to_csv().starts_with("word;point;period;residual\n1;0;1;0\n"));
    }

    #[test]
    fn audit_rejects_non_basic_components() {
        let f = catalog::flip_cycle::<Rat>();
        let g = build_covering_graph(&f).unwrap();
        let comp = &irreducible_components(&g)[0];
        assert!(matches!(
            dense_periodic_audit(&f, &g, comp, 2, 100),
            Err(PeriodicError::NotBasic { .. })
        ));
    }

    #[test]
    fn component_points() {
        let t = catalog::tent::<Rat>();
        let g = build_covering_graph(&t).unwrap();
        let comp = &irreducible_components(&g)[0];
        let pts = component_periodic_points(&t, comp, 2);
        assert_eq!(pts, vec![r(0, 1), r(2, 5), r(2, 3), r(4, 5)]);
    }
}
