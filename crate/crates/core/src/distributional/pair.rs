use num_integer::Integer;
use thiserror::Error;

use super::step::StepFunction;
use crate::graph::{component_cycle, CoveringGraph, IrreducibleComponent};
use crate::map_model::{sort_dedup, MapError, PmMap};
use crate::scalar::Scalar;
use crate::symbolic::{itinerary, SymbolicError};

#[derive(Debug, Error)]
pub enum DfError {
    #[error(transparent)]
    Map(#[from] MapError),
    #[error("need horizon >= window >= 1 and horizon > window, got horizon {horizon}, window {window}")]
    BadWindow { horizon: usize, window: usize },
    #[error("t grid is empty")]
    EmptyGrid,
}

/// How a [`DfPair`] was obtained.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Provenance {
    /// Joint orbit `(f^i x, f^i y)` is periodic from `preperiod` on.
    Exact { preperiod: usize, period: usize },
    /// Window extremes of `ξ/n` over `n ∈ [horizon − window, horizon]`.
    Empirical { horizon: usize, window: usize, grid: usize },
}

/// Lower (liminf) and upper (limsup) distributional functions of a pair.
#[derive(Clone, Debug, PartialEq)]
pub struct DfPair<S> {
    pub lower: StepFunction<S>,
    pub upper: StepFunction<S>,
    /// Length of the domain; both functions are 1 beyond it.
    pub span: S,
    pub provenance: Provenance,
}

/// `#{0 ≤ i < n : |f^i(x) − f^i(y)| < t}`.
pub fn xi<S: Scalar>(map: &PmMap<S>, x: &S, y: &S, t: &S, n: usize) -> Result<usize, MapError> {
    map.check_domain(x)?;
    map.check_domain(y)?;
    let (mut u, mut v) = (x.clone(), y.clone());
    let mut count = 0;
    for i in 0..n {
        if (u.clone() - v.clone()).abs() < *t {
            count += 1;
        }
        if i + 1 < n {
            u = map.apply(&u);
            v = map.apply(&v);
        }
    }
    Ok(count)
}

/// Joint preperiod and period of `(f^i x, f^i y)`, if both orbits repeat
/// within `cap` steps.
pub fn joint_period<S: Scalar>(map: &PmMap<S>, x: &S, y: &S, cap: usize) -> Result<Option<(usize, usize)>, MapError> {
    let (Some(px), Some(py)) = (map.detect_eventual_period(x, cap)?, map.detect_eventual_period(y, cap)?) else {
        return Ok(None);
    };
    let period = px.period.lcm(&py.period);
    if period > cap {
        return Ok(None);
    }
    Ok(Some((px.preperiod.max(py.preperiod), period)))
}

fn cycle_distances<S: Scalar>(map: &PmMap<S>, x: &S, y: &S, preperiod: usize, period: usize) -> Vec<S> {
    let last = preperiod + period - 1;
    let ox = map.iterate(x, last).expect("checked in domain");
    let oy = map.iterate(y, last).expect("checked in domain");
    ox[preperiod..]
        .iter()
        .zip(&oy[preperiod..])
        .map(|(a, b)| (a.clone() - b.clone()).abs())
        .collect()
}

/// Exact distributional function of an eventually periodic joint orbit.
/// `Ok(None)` when no repeat shows up within `cap` steps. Needs an exact
/// scalar.
pub fn exact_df<S: Scalar>(map: &PmMap<S>, x: &S, y: &S, cap: usize) -> Result<Option<DfPair<S>>, MapError> {
    let Some((preperiod, period)) = joint_period(map, x, y, cap)? else {
        return Ok(None);
    };
    let f = StepFunction::from_distances(&cycle_distances(map, x, y, preperiod, period));
    Ok(Some(DfPair {
        lower: f.clone(),
        upper: f,
        span: map.domain_length(),
        provenance: Provenance::Exact { preperiod, period },
    }))
}

/// `size` uniform points on `[0, span]` merged with `extra`, sorted.
pub fn default_grid<S: Scalar>(span: &S, size: usize, extra: &[S]) -> Vec<S> {
    let last = size.max(2) as i64 - 1;
    let mut grid: Vec<S> = (0..=last)
        .map(|k| span.clone() * S::from_ratio(k, last))
        .chain(extra.iter().cloned())
        .collect();
    sort_dedup(&mut grid);
    grid
}

/// Window extremes of `ξ(x, y, t, n) / n` for `n ∈ [horizon − window,
/// horizon]` at each grid point. Between grid points the functions are
/// extended left-continuously.
pub fn empirical_df<S: Scalar>(
    map: &PmMap<S>,
    x: &S,
    y: &S,
    horizon: usize,
    window: usize,
    grid: &[S],
) -> Result<DfPair<S>, DfError> {
    if window == 0 || window >= horizon {
        return Err(DfError::BadWindow { horizon, window });
    }
    if grid.is_empty() {
        return Err(DfError::EmptyGrid);
    }
    map.check_domain(x)?;
    map.check_domain(y)?;
    let mut grid = grid.to_vec();
    sort_dedup(&mut grid);
    let g = grid.len();

    // hist[k] counts distances d with exactly k grid points ≤ d, so d < t_j iff k ≤ j
    let mut hist = vec![0u64; g + 1];
    let mut low: Vec<(u64, u64)> = vec![(1, 1); g];
    let mut high: Vec<(u64, u64)> = vec![(0, 1); g];
    let (mut u, mut v) = (x.clone(), y.clone());
    for n in 1..=horizon {
        let d = (u.clone() - v.clone()).abs();
        hist[grid.partition_point(|t| *t <= d)] += 1;
        if n >= horizon - window {
            let n = n as u64;
            let mut count = 0u64;
            for j in 0..g {
                count += hist[j];
                if count * low[j].1 < low[j].0 * n {
                    low[j] = (count, n);
                }
                if count * high[j].1 > high[j].0 * n {
                    high[j] = (count, n);
                }
            }
        }
        if n < horizon {
            u = map.apply(&u);
            v = map.apply(&v);
        }
    }
    let to_levels = |ext: &[(u64, u64)]| -> Vec<S> {
        ext.iter()
            .map(|&(c, n)| S::from_ratio(c as i64, n as i64))
            .chain(std::iter::once(S::one()))
            .collect()
    };
    let lower = StepFunction::new(grid.clone(), to_levels(&low)).expect("grid is sorted");
    let upper = StepFunction::new(grid, to_levels(&high)).expect("grid is sorted");
    Ok(DfPair {
        lower,
        upper,
        span: map.domain_length(),
        provenance: Provenance::Empirical { horizon, window, grid: g },
    })
}

/// `∫_0^{|I|} (F* − F) dt`.
pub fn chaos_measure<S: Scalar>(pair: &DfPair<S>) -> S {
    let zero = S::zero();
    pair.upper.integral(&zero, &pair.span) - pair.lower.integral(&zero, &pair.span)
}

/// Keeps pairs whose orbits come within `epsilon` of each other in the
/// tail: exactly over the joint cycle when both orbits are eventually
/// periodic within `cap`, otherwise over steps `horizon/2..horizon`.
pub fn weak_pair_filter<S: Scalar>(
    map: &PmMap<S>,
    pairs: &[(S, S)],
    horizon: usize,
    epsilon: &S,
    cap: usize,
) -> Result<Vec<(S, S)>, MapError> {
    let mut kept = Vec::new();
    for (x, y) in pairs {
        let exact = if S::EXACT { joint_period(map, x, y, cap)? } else { None };
        let distances = match exact {
            Some((m, p)) => cycle_distances(map, x, y, m, p),
            None => {
                let ox = map.iterate(x, horizon)?;
                let oy = map.iterate(y, horizon)?;
                ox[horizon / 2..]
                    .iter()
                    .zip(&oy[horizon / 2..])
                    .map(|(a, b)| (a.clone() - b.clone()).abs())
                    .collect()
            }
        };
        if distances.iter().any(|d| d < epsilon) {
            kept.push((x.clone(), y.clone()));
        }
    }
    Ok(kept)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Refutation {
    /// Orbit tails settle in different irreducible components (zero-based).
    DifferentComponents { x: usize, y: usize },
    /// Tails sit in the same component but always `offset` sets apart in
    /// its f*-cycle of the given period.
    OutOfPhase { offset: usize, period: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Isotectic {
    Consistent,
    Refuted(Refutation),
    Inconclusive,
}

/// Finite-horizon test of the isotectic (synchronous) property.
///
/// The second half of each itinerary is the tail. Both tails must stay in
/// one component, and for every set of that component's f*-cycle there
/// must be a common time with both orbits in it.
pub fn isotectic_probe<S: Scalar>(
    map: &PmMap<S>,
    graph: &CoveringGraph,
    components: &[IrreducibleComponent],
    x: &S,
    y: &S,
    horizon: usize,
) -> Result<Isotectic, SymbolicError> {
    let horizon = horizon.max(2);
    let ix = itinerary(map, x, horizon)?;
    let iy = itinerary(map, y, horizon)?;
    let tail = horizon / 2;
    let (tx, ty) = (&ix.letters()[tail..], &iy.letters()[tail..]);
    let settled = |letters: &[usize]| -> Option<usize> {
        let c = components.iter().position(|c| c.contains(letters[0]))?;
        letters.iter().all(|&k| components[c].contains(k)).then_some(c)
    };
    let (Some(cx), Some(cy)) = (settled(tx), settled(ty)) else {
        return Ok(Isotectic::Inconclusive);
    };
    if cx != cy {
        return Ok(Isotectic::Refuted(Refutation::DifferentComponents { x: cx, y: cy }));
    }
    let cycle = component_cycle(graph, &components[cx]);
    let m = cycle.period;
    if m == 1 {
        return Ok(Isotectic::Consistent);
    }
    let mut together = vec![false; m];
    let mut offsets = Vec::with_capacity(tx.len());
    for (&a, &b) in tx.iter().zip(ty) {
        let (Some(pa), Some(pb)) = (cycle.phase_of(a), cycle.phase_of(b)) else {
            return Ok(Isotectic::Inconclusive);
        };
        if pa == pb {
            together[pa] = true;
        }
        offsets.push((pb + m - pa) % m);
    }
    if together.iter().all(|&t| t) {
        return Ok(Isotectic::Consistent);
    }
    let offset = offsets[0];
    if offset != 0 && offsets.iter().all(|&o| o == offset) {
        return Ok(Isotectic::Refuted(Refutation::OutOfPhase { offset, period: m }));
    }
    Ok(Isotectic::Inconclusive)
}
