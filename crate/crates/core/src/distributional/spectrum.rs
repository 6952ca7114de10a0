use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};
use thiserror::Error;

use super::pair::{
    chaos_measure, default_grid, empirical_df, exact_df, isotectic_probe, weak_pair_filter, DfError, DfPair,
    Isotectic, Provenance,
};
use super::step::StepFunction;
use crate::graph::{CoveringGraph, IrreducibleComponent};
use crate::map_model::{sort_dedup, MapError, PmMap};
use crate::periodic::component_periodic_points;
use crate::scalar::Scalar;
use crate::symbolic::SymbolicError;

#[derive(Debug, Error)]
pub enum SpectrumError {
    #[error(transparent)]
    Df(#[from] DfError),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
    #[error("pair_count must be at least 1")]
    NoPairs,
}

/// Outcome of [`compare`].
#[derive(Clone, Debug, PartialEq)]
pub enum Comparison<S> {
    Equal,
    /// `F ≤ G` pointwise and `F ≠ G`.
    Less,
    /// `G ≤ F` pointwise and `F ≠ G`.
    Greater,
    /// `F(below) < G(below)` and `G(above) < F(above)`. Both points are
    /// interior to open intervals on which the strict inequality holds.
    Incomparable { below: S, above: S },
}

/// Decides the pointwise order exactly: both functions are constant on each
/// piece between merged breakpoints, so one sample per piece suffices.
pub fn compare<S: Scalar>(f: &StepFunction<S>, g: &StepFunction<S>) -> Comparison<S> {
    let mut merged: Vec<S> = f.breakpoints().iter().chain(g.breakpoints()).cloned().collect();
    sort_dedup(&mut merged);
    let one = S::one();
    let samples: Vec<S> = match (merged.first(), merged.last()) {
        (Some(first), Some(last)) => std::iter::once(first.clone() - one.clone())
            .chain(merged.windows(2).map(|w| S::midpoint(&w[0], &w[1])))
            .chain(std::iter::once(last.clone() + one))
            .collect(),
        _ => vec![S::zero()],
    };
    let mut below = None;
    let mut above = None;
    for t in samples {
        let (a, b) = (f.eval(&t), g.eval(&t));
        if below.is_none() && S::definitely_lt(&a, &b) {
            below = Some(t);
        } else if above.is_none() && S::definitely_lt(&b, &a) {
            above = Some(t);
        }
    }
    match (below, above) {
        (None, None) => Comparison::Equal,
        (Some(_), None) => Comparison::Less,
        (None, Some(_)) => Comparison::Greater,
        (Some(below), Some(above)) => Comparison::Incomparable { below, above },
    }
}

/// Indices of the minimal functions. Among equal functions only the first
/// is kept.
pub fn minimal_indices<S: Scalar>(functions: &[StepFunction<S>]) -> Vec<usize> {
    (0..functions.len())
        .filter(|&i| {
            (0..functions.len()).all(|j| match compare(&functions[j], &functions[i]) {
                Comparison::Less => false,
                Comparison::Equal => j >= i,
                _ => true,
            })
        })
        .collect()
}

/// Where a candidate function came from.
#[derive(Clone, Debug, PartialEq)]
pub enum Source<S> {
    Pair {
        x: S,
        y: S,
        group: String,
        provenance: Provenance,
        chaos: S,
    },
    /// Pointwise infimum of the lower functions sampled in a group.
    Envelope { group: String, members: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Candidate<S> {
    pub function: StepFunction<S>,
    pub source: Source<S>,
}

impl<S: Scalar> Candidate<S> {
    pub fn from_pair(x: S, y: S, group: impl Into<String>, df: DfPair<S>) -> Self {
        Candidate {
            source: Source::Pair {
                chaos: chaos_measure(&df),
                x,
                y,
                group: group.into(),
                provenance: df.provenance,
            },
            function: df.lower,
        }
    }
}

/// Certificate that candidates `i` and `j` are incomparable.
#[derive(Clone, Debug, PartialEq)]
pub struct Certificate<S> {
    pub i: usize,
    pub j: usize,
    /// `F_i(t1) < F_j(t1)`.
    pub t1: S,
    /// `F_j(t2) < F_i(t2)`.
    pub t2: S,
}

impl<S: Scalar> Certificate<S> {
    pub fn verify(&self, candidates: &[Candidate<S>]) -> bool {
        let (fi, fj) = (&candidates[self.i].function, &candidates[self.j].function);
        fi.eval(&self.t1) < fj.eval(&self.t1) && fj.eval(&self.t2) < fi.eval(&self.t2)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumReport<S> {
    pub candidates: Vec<Candidate<S>>,
    /// Indices into `candidates`.
    pub minimal: Vec<usize>,
    pub certificates: Vec<Certificate<S>>,
    /// Component pairs not sampled, with the reason.
    pub skipped: Vec<String>,
}

/// Minimal elements of the candidate set with pairwise incomparability
/// certificates among them.
pub fn minimal_elements<S: Scalar>(candidates: Vec<Candidate<S>>) -> SpectrumReport<S> {
    let functions: Vec<StepFunction<S>> = candidates.iter().map(|c| c.function.clone()).collect();
    let minimal = minimal_indices(&functions);
    let mut certificates = Vec::new();
    for (a, &i) in minimal.iter().enumerate() {
        for &j in &minimal[a + 1..] {
            if let Comparison::Incomparable { below, above } = compare(&functions[i], &functions[j]) {
                certificates.push(Certificate { i, j, t1: below, t2: above });
            }
        }
    }
    SpectrumReport {
        candidates,
        minimal,
        certificates,
        skipped: Vec::new(),
    }
}

impl<S: Scalar> SpectrumReport<S> {
    pub fn minimal_functions(&self) -> impl Iterator<Item = &StepFunction<S>> {
        self.minimal.iter().map(|&i| &self.candidates[i].function)
    }

    /// Largest `ε` with some sampled pair function vanishing on `[0, ε]`.
    pub fn largest_zero_interval(&self) -> Option<S> {
        self.candidates
            .iter()
            .filter(|c| matches!(c.source, Source::Pair { .. }))
            .filter_map(|c| c.function.zero_until())
            .max_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal))
    }

    pub fn to_json(&self) -> Value {
        let function = |f: &StepFunction<S>| {
            json!({
                "breakpoints": f.breakpoints().iter().map(Scalar::to_text).collect::<Vec<_>>(),
                "levels": f.levels().iter().map(Scalar::to_text).collect::<Vec<_>>(),
            })
        };
        let candidates: Vec<Value> = self
            .candidates
            .iter()
            .enumerate()
            .map(|(id, c)| {
                let source = match &c.source {
                    Source::Pair { x, y, group, provenance, chaos } => json!({
                        "kind": "pair",
                        "x": x.to_text(),
                        "y": y.to_text(),
                        "group": group,
                        "provenance": provenance_json(provenance),
                        "chaos_measure": chaos.to_text(),
                    }),
                    Source::Envelope { group, members } => json!({
                        "kind": "envelope",
                        "group": group,
                        "members": members,
                    }),
                };
                json!({
                    "id": id,
                    "source": source,
                    "function": function(&c.function),
                    "zero_until": c.function.zero_until().map(|e| e.to_text()),
                })
            })
            .collect();
        let certificates: Vec<Value> = self
            .certificates
            .iter()
            .map(|c| json!({"i": c.i, "j": c.j, "t1": c.t1.to_text(), "t2": c.t2.to_text()}))
            .collect();
        json!({
            "minimal": self.minimal,
            "minimal_count": self.minimal.len(),
            "certificates": certificates,
            "skipped": self.skipped,
            "candidates": candidates,
        })
    }
}

fn provenance_json(p: &Provenance) -> Value {
    match p {
        Provenance::Exact { preperiod, period } => {
            json!({"kind": "exact", "preperiod": preperiod, "period": period})
        }
        Provenance::Empirical { horizon, window, grid } => {
            json!({"kind": "empirical", "horizon": horizon, "window": window, "grid": grid})
        }
    }
}

/// Sampling and evaluation settings for [`spectrum_estimate`].
#[derive(Clone, Debug, PartialEq)]
pub struct SamplerConfig<S> {
    /// Random pairs drawn per group.
    pub pair_count: usize,
    pub seed: u64,
    /// Empirical horizon `N`.
    pub horizon: usize,
    /// Empirical tail window `W`.
    pub window: usize,
    /// Uniform t-grid size for empirical functions.
    pub grid: usize,
    /// Step cap for exact period detection.
    pub exact_cap: usize,
    /// Longest word used for periodic sample points.
    pub periodic_word_len: usize,
    pub probe_horizon: usize,
    /// Add the pointwise infimum of each group's functions as a candidate.
    pub envelope: bool,
    /// Proximal (weak) pairs with this threshold instead of isotectic ones.
    pub weak_epsilon: Option<S>,
    /// Pairs evaluated as given, without filtering.
    pub extra_pairs: Vec<(S, S)>,
}

impl<S: Scalar> Default for SamplerConfig<S> {
    fn default() -> Self {
        SamplerConfig {
            pair_count: 200,
            seed: 0,
            horizon: 100_000,
            window: 10_000,
            grid: 512,
            exact_cap: 4096,
            periodic_word_len: 3,
            probe_horizon: 64,
            envelope: true,
            weak_epsilon: None,
            extra_pairs: Vec::new(),
        }
    }
}

/// Point of the component's pieces with a small odd denominator relative to
/// the piece, so exact orbits become periodic quickly.
fn sample_point<S: Scalar>(map: &PmMap<S>, nodes: &[usize], rng: &mut ChaCha8Rng) -> S {
    let piece = map.piece(nodes[rng.random_range(0..nodes.len())]);
    let q = 2 * rng.random_range(1..16i64) + 1;
    let k = rng.random_range(1..q);
    piece.left.clone() + piece.diameter() * S::from_ratio(k, q)
}

fn shares_critical_point<S: Scalar>(map: &PmMap<S>, a: &IrreducibleComponent, b: &IrreducibleComponent) -> bool {
    let ends = |c: &IrreducibleComponent| -> Vec<S> {
        let mut v: Vec<S> = c
            .nodes
            .iter()
            .flat_map(|&k| [map.piece(k).left.clone(), map.piece(k).right.clone()])
            .collect();
        sort_dedup(&mut v);
        v
    };
    let eb = ends(b);
    ends(a).iter().any(|p| eb.iter().any(|q| S::approx_eq(p, q)))
}

struct Group<S> {
    name: String,
    pairs: Vec<(S, S)>,
    envelope: bool,
}

fn pair_df<S: Scalar>(map: &PmMap<S>, x: &S, y: &S, cfg: &SamplerConfig<S>) -> Result<DfPair<S>, SpectrumError> {
    if S::EXACT {
        if let Some(df) = exact_df(map, x, y, cfg.exact_cap)? {
            return Ok(df);
        }
    }
    let grid = default_grid(&map.domain_length(), cfg.grid, &[]);
    Ok(empirical_df(map, x, y, cfg.horizon, cfg.window, &grid)?)
}

/// Samples pairs inside basic components, evaluates their lower
/// distributional functions and returns the minimal ones.
///
/// Each basic component contributes the pairs of its periodic points (words
/// up to `periodic_word_len`) and `pair_count` seeded random pairs, kept
/// when the isotectic probe is consistent. With `weak_epsilon` set, pairs
/// are filtered for proximality instead, and components sharing a critical
/// point are also paired with each other. Explicit `extra_pairs` are
/// evaluated unfiltered. The result is deterministic for a fixed seed.
pub fn spectrum_estimate<S: Scalar>(
    map: &PmMap<S>,
    graph: &CoveringGraph,
    components: &[IrreducibleComponent],
    cfg: &SamplerConfig<S>,
) -> Result<SpectrumReport<S>, SpectrumError> {
    if cfg.pair_count == 0 {
        return Err(SpectrumError::NoPairs);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let basic: Vec<&IrreducibleComponent> = components.iter().filter(|c| c.is_basic).collect();
    let mut groups: Vec<Group<S>> = Vec::new();
    let mut skipped = Vec::new();

    for comp in &basic {
        let periodic = component_periodic_points(map, comp, cfg.periodic_word_len);
        let mut pairs: Vec<(S, S)> = Vec::new();
        for (a, p) in periodic.iter().enumerate() {
            for q in &periodic[a + 1..] {
                pairs.push((p.clone(), q.clone()));
            }
        }
        for _ in 0..cfg.pair_count {
            let x = sample_point(map, &comp.nodes, &mut rng);
            let y = sample_point(map, &comp.nodes, &mut rng);
            pairs.push((x, y));
        }
        groups.push(Group {
            name: format!("component {}", comp.id + 1),
            pairs,
            envelope: cfg.envelope,
        });
    }
    if cfg.weak_epsilon.is_some() {
        for (a, ca) in basic.iter().enumerate() {
            for cb in &basic[a + 1..] {
                if !shares_critical_point(map, ca, cb) {
                    skipped.push(format!(
                        "components {} and {} share no critical point",
                        ca.id + 1,
                        cb.id + 1
                    ));
                    continue;
                }
                let pairs = (0..cfg.pair_count)
                    .map(|_| {
                        let x = sample_point(map, &ca.nodes, &mut rng);
                        let y = sample_point(map, &cb.nodes, &mut rng);
                        (x, y)
                    })
                    .collect();
                groups.push(Group {
                    name: format!("components {}+{}", ca.id + 1, cb.id + 1),
                    pairs,
                    envelope: cfg.envelope,
                });
            }
        }
    }

    // filtering
    for group in &mut groups {
        group.pairs = match &cfg.weak_epsilon {
            Some(eps) => weak_pair_filter(map, &group.pairs, cfg.probe_horizon, eps, cfg.exact_cap)?,
            None => {
                let verdicts = group
                    .pairs
                    .par_iter()
                    .map(|(x, y)| isotectic_probe(map, graph, components, x, y, cfg.probe_horizon))
                    .collect::<Result<Vec<_>, _>>()?;
                group
                    .pairs
                    .iter()
                    .zip(verdicts)
                    .filter(|(_, v)| *v == Isotectic::Consistent)
                    .map(|(p, _)| p.clone())
                    .collect()
            }
        };
    }
    if !cfg.extra_pairs.is_empty() {
        groups.push(Group {
            name: "explicit".into(),
            pairs: cfg.extra_pairs.clone(),
            envelope: false,
        });
    }
    if groups.iter().all(|g| g.pairs.is_empty()) {
        let x = map.domain().left.clone();
        groups.push(Group {
            name: "self".into(),
            pairs: vec![(x.clone(), x)],
            envelope: false,
        });
    }

    let mut candidates: Vec<Candidate<S>> = Vec::new();
    for group in groups {
        let dfs = group
            .pairs
            .par_iter()
            .map(|(x, y)| pair_df(map, x, y, cfg))
            .collect::<Result<Vec<_>, _>>()?;
        let mut members: Vec<Candidate<S>> = group
            .pairs
            .into_iter()
            .zip(dfs)
            .map(|((x, y), df)| Candidate::from_pair(x, y, group.name.clone(), df))
            .collect();
        if group.envelope && members.len() > 1 {
            let inf = members[1..]
                .iter()
                .fold(members[0].function.clone(), |acc, c| acc.pointwise_min(&c.function));
            members.push(Candidate {
                function: inf,
                source: Source::Envelope {
                    group: group.name,
                    members: members.len(),
                },
            });
        }
        for m in members {
            if !candidates.iter().any(|c| c.function == m.function) {
                candidates.push(m);
            }
        }
    }
    let mut report = minimal_elements(candidates);
    report.skipped = skipped;
    Ok(report)
}
