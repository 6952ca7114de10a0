//! Itineraries, cylinder sets and admissible words, plus the Markov and
//! generator checks built on them.
//!
//! Piece indices are zero-based throughout the API; [`Itinerary`] prints
//! them one-based.

use std::fmt;

use thiserror::Error;

use crate::interval::Interval;
use crate::map_model::{contains_sorted, MapError, PmMap};
use crate::scalar::{max_of, Scalar};

pub const DEFAULT_STALL_WINDOW: usize = 3;
pub const DEFAULT_CYLINDER_CAP: usize = 1_000_000;

#[derive(Debug, Error)]
pub enum SymbolicError {
    #[error(transparent)]
    Map(#[from] MapError),
    #[error("depth must be at least 1")]
    ZeroDepth,
    #[error("letter set is empty")]
    EmptyAlphabet,
    #[error("piece index {letter} out of range for a map with {pieces} pieces")]
    BadLetter { letter: usize, pieces: usize },
    #[error("more than {cap} cylinders at depth {depth}")]
    TooManyCylinders { depth: usize, cap: usize },
    #[error("more than {cap} admissible words of length {length}")]
    TooManyWords { length: usize, cap: usize },
}

/// Finite sequence of piece indices visited by an orbit.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Itinerary(pub Vec<usize>);

impl Itinerary {
    /// Builds an itinerary from one-based piece labels.
    pub fn from_labels(labels: &[usize]) -> Self {
        Itinerary(labels.iter().map(|l| l - 1).collect())
    }

    pub fn letters(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Itinerary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, k) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", k + 1)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cylinder<S> {
    pub word: Itinerary,
    /// `None` when no point realises the word.
    pub interval: Option<Interval<S>>,
}

impl<S: Scalar> Cylinder<S> {
    pub fn diameter(&self) -> S {
        self.interval.as_ref().map_or_else(S::zero, Interval::diameter)
    }
}

/// How `f(J_i)` must meet `J_j` for the transition `i → j` to count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Admissibility {
    /// `f(J_i) ∩ J_j ≠ ∅`; a single shared point suffices.
    #[default]
    Touching,
    /// `int f(J_i) ∩ int J_j ≠ ∅`.
    Interior,
}

pub fn itinerary<S: Scalar>(map: &PmMap<S>, x: &S, depth: usize) -> Result<Itinerary, SymbolicError> {
    if depth == 0 {
        return Err(SymbolicError::ZeroDepth);
    }
    let orbit = map.iterate(x, depth - 1)?;
    Ok(Itinerary(
        orbit
            .iter()
            .map(|p| map.locate(p).expect("orbit stays in the domain"))
            .collect(),
    ))
}

fn check_letters<S: Scalar>(map: &PmMap<S>, letters: &[usize]) -> Result<(), SymbolicError> {
    match letters.iter().find(|&&k| k >= map.len()) {
        Some(&letter) => Err(SymbolicError::BadLetter {
            letter,
            pieces: map.len(),
        }),
        None => Ok(()),
    }
}

/// `J_k ∩ f⁻¹(target)` restricted to the branch of piece `k`.
fn pull_back<S: Scalar>(map: &PmMap<S>, k: usize, target: &Interval<S>) -> Option<Interval<S>> {
    map.branch(k).preimage(target, map.piece(k))
}

/// The set of points whose first `word.len()` itinerary letters are `word`,
/// obtained by pulling the last piece back through the branch inverses.
pub fn cylinder<S: Scalar>(map: &PmMap<S>, word: &Itinerary) -> Result<Cylinder<S>, SymbolicError> {
    let letters = word.letters();
    let Some((&last, rest)) = letters.split_last() else {
        return Err(SymbolicError::ZeroDepth);
    };
    check_letters(map, letters)?;
    let mut current = Some(map.piece(last).clone());
    for &k in rest.iter().rev() {
        current = current.and_then(|iv| pull_back(map, k, &iv));
    }
    Ok(Cylinder {
        word: word.clone(),
        interval: current,
    })
}

/// All nonempty cylinders of length `depth`, sorted by word. Built level by
/// level: `C(k·w) = J_k ∩ f⁻¹(C(w))`.
pub fn nonempty_cylinders<S: Scalar>(
    map: &PmMap<S>,
    depth: usize,
    cap: usize,
) -> Result<Vec<Cylinder<S>>, SymbolicError> {
    let mut levels = cylinder_levels(map, depth, cap)?;
    Ok(levels.pop().unwrap_or_default())
}

/// Nonempty cylinders for every depth `1..=depth`.
fn cylinder_levels<S: Scalar>(
    map: &PmMap<S>,
    depth: usize,
    cap: usize,
) -> Result<Vec<Vec<Cylinder<S>>>, SymbolicError> {
    if depth == 0 {
        return Err(SymbolicError::ZeroDepth);
    }
    let mut level: Vec<Cylinder<S>> = (0..map.len())
        .map(|k| Cylinder {
            word: Itinerary(vec![k]),
            interval: Some(map.piece(k).clone()),
        })
        .collect();
    let mut levels = Vec::with_capacity(depth);
    for d in 2..=depth {
        let mut next = Vec::new();
        for k in 0..map.len() {
            for cyl in &level {
                let iv = cyl.interval.as_ref().expect("levels hold nonempty cylinders");
                if let Some(pulled) = pull_back(map, k, iv) {
                    let mut word = Vec::with_capacity(d);
                    word.push(k);
                    word.extend_from_slice(cyl.word.letters());
                    next.push(Cylinder {
                        word: Itinerary(word),
                        interval: Some(pulled),
                    });
                    if next.len() > cap {
                        return Err(SymbolicError::TooManyCylinders { depth: d, cap });
                    }
                }
            }
        }
        levels.push(std::mem::replace(&mut level, next));
    }
    levels.push(level);
    for lvl in &mut levels {
        lvl.sort_by(|a, b| a.word.cmp(&b.word));
    }
    Ok(levels)
}

/// Transition relation `i → j` between pieces.
pub fn transitions<S: Scalar>(map: &PmMap<S>, mode: Admissibility) -> Vec<Vec<bool>> {
    (0..map.len())
        .map(|i| {
            let image = map.piece_image(i);
            (0..map.len())
                .map(|j| match mode {
                    Admissibility::Touching => image.intersect(map.piece(j)).is_some(),
                    Admissibility::Interior => image.overlaps_interior(map.piece(j)),
                })
                .collect()
        })
        .collect()
}

/// Words of length `length` over `letters` whose consecutive letters are
/// admissible transitions, in lexicographic order.
pub fn admissible_words<S: Scalar>(
    map: &PmMap<S>,
    letters: &[usize],
    length: usize,
    mode: Admissibility,
    cap: usize,
) -> Result<Vec<Itinerary>, SymbolicError> {
    if length == 0 {
        return Err(SymbolicError::ZeroDepth);
    }
    if letters.is_empty() {
        return Err(SymbolicError::EmptyAlphabet);
    }
    check_letters(map, letters)?;
    let mut alphabet = letters.to_vec();
    alphabet.sort_unstable();
    alphabet.dedup();
    let step = transitions(map, mode);
    let mut words: Vec<Vec<usize>> = alphabet.iter().map(|&k| vec![k]).collect();
    for _ in 1..length {
        let mut next = Vec::new();
        for w in &words {
            let last = *w.last().unwrap();
            for &k in &alphabet {
                if step[last][k] {
                    let mut ext = w.clone();
                    ext.push(k);
                    next.push(ext);
                    if next.len() > cap {
                        return Err(SymbolicError::TooManyWords { length, cap });
                    }
                }
            }
        }
        words = next;
    }
    Ok(words.into_iter().map(Itinerary).collect())
}

/// Admissible words together with their cylinders; unrealised words keep an
/// empty cylinder instead of being dropped.
pub fn admissible_cylinders<S: Scalar>(
    map: &PmMap<S>,
    letters: &[usize],
    length: usize,
    mode: Admissibility,
    cap: usize,
) -> Result<Vec<Cylinder<S>>, SymbolicError> {
    admissible_words(map, letters, length, mode, cap)?
        .iter()
        .map(|w| cylinder(map, w))
        .collect()
}

/// Which side an offending one-sided limit is taken from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Approach {
    FromLeft,
    FromRight,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MarkovViolation<S> {
    pub piece: usize,
    pub critical_point: S,
    pub approach: Approach,
    pub limit: S,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MarkovReport<S> {
    pub violations: Vec<MarkovViolation<S>>,
}

impl<S: Scalar> MarkovReport<S> {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Every one-sided limit of `f` at a partition endpoint must itself be a
/// partition endpoint. With continuous branches the limits are the branch
/// values at the ends of each piece.
pub fn markov_check<S: Scalar>(map: &PmMap<S>) -> MarkovReport<S> {
    let c0 = map.partition_points();
    let mut violations = Vec::new();
    for k in 0..map.len() {
        let piece = map.piece(k);
        let (at_left, at_right) = map.endpoint_limits(k);
        for (point, approach, limit) in [
            (&piece.left, Approach::FromRight, at_left),
            (&piece.right, Approach::FromLeft, at_right),
        ] {
            if !contains_sorted(&c0, &limit) {
                violations.push(MarkovViolation {
                    piece: k,
                    critical_point: point.clone(),
                    approach,
                    limit,
                });
            }
        }
    }
    MarkovReport { violations }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GeneratorConfig {
    /// Consecutive non-decreasing depths after which the verdict is `Stalled`.
    pub stall_window: usize,
    pub cylinder_cap: usize,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            stall_window: DEFAULT_STALL_WINDOW,
            cylinder_cap: DEFAULT_CYLINDER_CAP,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum GeneratorVerdict<S> {
    Shrinking,
    Stalled { diameter: S, first_stall_depth: usize },
}

/// Finite-depth evidence for the generator property: the largest cylinder
/// diameter at each depth.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorDiagnostic<S> {
    /// `diameters[d-1]` is the maximum diameter at depth `d`.
    pub diameters: Vec<S>,
    pub cylinder_counts: Vec<usize>,
    pub verdict: GeneratorVerdict<S>,
}

impl<S: Scalar> GeneratorDiagnostic<S> {
    pub fn is_shrinking(&self) -> bool {
        self.verdict == GeneratorVerdict::Shrinking
    }
}

pub fn generator_diagnostic<S: Scalar>(
    map: &PmMap<S>,
    max_depth: usize,
    config: &GeneratorConfig,
) -> Result<GeneratorDiagnostic<S>, SymbolicError> {
    let levels = cylinder_levels(map, max_depth, config.cylinder_cap)?;
    let diameters: Vec<S> = levels
        .iter()
        .map(|lvl| lvl.iter().fold(S::zero(), |acc, c| max_of(&acc, &c.diameter())))
        .collect();
    let cylinder_counts = levels.iter().map(Vec::len).collect();

    // trailing run of depths without a strict decrease
    let mut plateau = 0;
    for w in diameters.windows(2).rev() {
        if S::definitely_lt(&w[1], &w[0]) {
            break;
        }
        plateau += 1;
    }
    let last = diameters.last().cloned().unwrap_or_else(S::zero);
    let verdict = if config.stall_window > 0 && plateau >= config.stall_window && last > S::tolerance() {
        GeneratorVerdict::Stalled {
            diameter: last,
            first_stall_depth: diameters.len() - plateau,
        }
    } else {
        GeneratorVerdict::Shrinking
    };
    Ok(GeneratorDiagnostic {
        diameters,
        cylinder_counts,
        verdict,
    })
}

/// `word;left;right;diameter` rows. Empty cylinders leave the bounds blank.
pub fn cylinders_csv<S: Scalar>(cylinders: &[Cylinder<S>]) -> String {
    let mut out = String::from("word;left;right;diameter\n");
    for c in cylinders {
        let (l, r) = c
            .interval
            .as_ref()
            .map_or((String::new(), String::new()), |iv| (iv.left.to_text(), iv.right.to_text()));
        out.push_str(&format!("{};{};{};{}\n", c.word, l, r, c.diameter().to_text()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map_model::catalog;
    use crate::Rat;

    fn r(p: i64, q: i64) -> Rat {
        Rat::from_ratio(p, q)
    }

    fn w(labels: &[usize]) -> Itinerary {
        Itinerary::from_labels(labels)
    }

    #[test]
    fn itinerary_examples() {
        let f = catalog::flip_cycle::<Rat>();
        let t = catalog::tent::<Rat>();
        assert_eq!(itinerary(&f, &r(7, 36), 6).unwrap(), w(&[1, 2, 3, 1, 2, 3]));
        assert_eq!(itinerary(&t, &r(0, 1), 3).unwrap(), w(&[1, 1, 1]));
        assert_eq!(itinerary(&t, &r(2, 5), 4).unwrap(), w(&[1, 2, 1, 2]));
        assert!(matches!(itinerary(&t, &r(0, 1), 0), Err(SymbolicError::ZeroDepth)));
    }

    #[test]
    fn cylinder_examples() {
        let t = catalog::tent::<Rat>();
        assert_eq!(
            cylinder(&t, &w(&[1])).unwrap().interval,
            Interval::closed(r(0, 1), r(1, 2))
        );
        assert_eq!(
            cylinder(&t, &w(&[1, 2])).unwrap().interval,
            Interval::new(r(1, 4), r(1, 2), false, true)
        );
        // f(J_1) = [1/3, 2/3] meets J_1 only at the fixed point 1/3
        let f = catalog::flip_cycle::<Rat>();
        assert_eq!(
            cylinder(&f, &w(&[1, 1])).unwrap().interval,
            Some(Interval::point(r(1, 3)))
        );
        assert_eq!(cylinder(&f, &w(&[1, 3])).unwrap().interval, None);
        assert_eq!(
            cylinder(&f, &w(&[1, 2])).unwrap().interval,
            Interval::new(r(0, 1), r(1, 3), true, false)
        );
    }

    #[test]
    fn markov_examples() {
        assert!(markov_check(&catalog::flip_cycle::<Rat>()).passed());
        assert!(markov_check(&catalog::tent::<Rat>()).passed());
        let bad = PmMap::affine(
            (r(0, 1), r(1, 1)),
            vec![
                (Interval::closed(r(0, 1), r(1, 2)).unwrap(), r(2, 1), r(0, 1)),
                (Interval::new(r(1, 2), r(1, 1), false, true).unwrap(), r(1, 2), r(1, 4)),
            ],
        )
        .unwrap();
        let report = markov_check(&bad);
        assert_eq!(
            report.violations,
            vec![MarkovViolation {
                piece: 1,
                critical_point: r(1, 1),
                approach: Approach::FromLeft,
                limit: r(3, 4),
            }]
        );
    }

    #[test]
    fn generator_examples() {
        let cfg = GeneratorConfig::default();
        let f = generator_diagnostic(&catalog::flip_cycle::<Rat>(), 6, &cfg).unwrap();
        assert_eq!(f.diameters, vec![r(1, 3); 6]);
        assert_eq!(
            f.verdict,
            GeneratorVerdict::Stalled { diameter: r(1, 3), first_stall_depth: 1 }
        );
        let t = generator_diagnostic(&catalog::tent::<Rat>(), 10, &cfg).unwrap();
        let expected: Vec<Rat> = (1..=10).map(|d| r(1, 1 << d)).collect();
        assert_eq!(t.diameters, expected);
        assert!(t.is_shrinking());
        let id = generator_diagnostic(&catalog::identity::<Rat>(), 5, &cfg).unwrap();
        assert_eq!(id.diameters, vec![r(1, 1); 5]);
        assert!(!id.is_shrinking());
    }

    #[test]
    fn generator_cap_is_enforced() {
        let cfg = GeneratorConfig { stall_window: 3, cylinder_cap: 100 };
        let err = generator_diagnostic(&catalog::tent::<Rat>(), 8, &cfg).unwrap_err();
        assert!(matches!(err, SymbolicError::TooManyCylinders { depth: 7, cap: 100 }));
    }

    #[test]
    fn admissible_word_examples() {
        let f = catalog::flip_cycle::<Rat>();
        let interior = admissible_words(&f, &[0, 1, 2], 3, Admissibility::Interior, 1000).unwrap();
        assert_eq!(interior, vec![w(&[1, 2, 3]), w(&[2, 3, 1]), w(&[3, 1, 2])]);
        // the fixed points 1/3 and 2/3 add touching transitions 1→1 and 2→2
        let touching = admissible_words(&f, &[0, 1, 2], 3, Admissibility::Touching, 1000).unwrap();
        assert!(touching.contains(&w(&[1, 1, 2])));
        assert!(touching.contains(&w(&[2, 2, 2])));
        assert!(!touching.contains(&w(&[1, 3, 1])));

        let t = catalog::tent::<Rat>();
        let words = admissible_words(&t, &[0, 1], 2, Admissibility::default(), 1000).unwrap();
        assert_eq!(words, vec![w(&[1, 1]), w(&[1, 2]), w(&[2, 1]), w(&[2, 2])]);
        assert_eq!(
            admissible_words(&f, &[1], 1, Admissibility::default(), 10).unwrap(),
            vec![w(&[2])]
        );
        assert!(matches!(
            admissible_words(&t, &[], 2, Admissibility::default(), 10),
            Err(SymbolicError::EmptyAlphabet)
        ));
    }

    #[test]
    fn admissible_cylinders_keep_empty_words() {
        let f = catalog::flip_cycle::<Rat>();
        let cyls = admissible_cylinders(&f, &[0, 1, 2], 3, Admissibility::Touching, 1000).unwrap();
        let words = admissible_words(&f, &[0, 1, 2], 3, Admissibility::Touching, 1000).unwrap();
        assert_eq!(cyls.len(), words.len());
        assert!(cyls.iter().any(|c| c.interval.is_none()));
    }

    #[test]
    fn csv_export() {
        let t = catalog::tent::<Rat>();
        let csv = cylinders_csv(&nonempty_cylinders(&t, 2, 100).unwrap());
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "word;left;right;diameter");
        assert_eq!(lines[1], "1,1;0;1/4;1/4");
        assert_eq!(lines.len(), 5);
    }

    #[test]
    fn float_tent_cylinders() {
        let t = catalog::tent::<f64>();
        let d = generator_diagnostic(&t, 8, &GeneratorConfig::default()).unwrap();
        assert_eq!(d.diameters.last().copied(), Some(1.0 / 256.0));
        assert!(d.is_shrinking());
    }
}
