//! Covering graph of the partition pieces and what can be read off it:
//! irreducible components, f*-periodic cycles, an entropy lower bound and
//! strong transitivity witnesses.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use thiserror::Error;

use crate::interval::{Interval, IntervalUnion};
use crate::map_model::PmMap;
use crate::scalar::Scalar;
use crate::symbolic::markov_check;

const POWER_TOLERANCE: f64 = 1e-10;
const POWER_ITERATION_CAP: usize = 100_000;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("Markov condition fails at {violations} one-sided limit(s)")]
    NotMarkov { violations: usize },
    #[error("edge {from} -> {to} is out of range for {nodes} nodes")]
    EdgeOutOfRange { from: usize, to: usize, nodes: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
}

/// Directed graph on piece indices with `i → j` iff `int(J_j) ⊆ int(f(J_i))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoveringGraph {
    succ: Vec<Vec<usize>>,
}

impl CoveringGraph {
    /// Graph from zero-based edges.
    pub fn from_edges(nodes: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut succ = vec![Vec::new(); nodes];
        for &(from, to) in edges {
            if from >= nodes || to >= nodes {
                return Err(GraphError::EdgeOutOfRange { from, to, nodes });
            }
            succ[from].push(to);
        }
        for s in &mut succ {
            s.sort_unstable();
            s.dedup();
        }
        Ok(CoveringGraph { succ })
    }

    pub fn n_nodes(&self) -> usize {
        self.succ.len()
    }

    pub fn successors(&self, i: usize) -> &[usize] {
        &self.succ[i]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.succ[i].binary_search(&j).is_ok()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.succ
            .iter()
            .enumerate()
            .flat_map(|(i, s)| s.iter().map(move |&j| (i, j)))
    }

    pub fn edge_count(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    /// Union of successors of `set`, sorted.
    pub fn image_set(&self, set: &[usize]) -> Vec<usize> {
        let mut out: Vec<usize> = set.iter().flat_map(|&i| self.succ[i].iter().copied()).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Shortest path `from → … → to` with at least one edge; ties go to the
    /// smallest node index. Returns the nodes strictly between the two ends.
    pub fn shortest_return(&self, from: usize, to: usize) -> Option<Vec<usize>> {
        let n = self.n_nodes();
        let mut parent: Vec<Option<usize>> = vec![None; n];
        let mut seen = vec![false; n];
        let mut queue = std::collections::VecDeque::new();
        for &j in &self.succ[from] {
            if j == to {
                return Some(Vec::new());
            }
            if !seen[j] {
                seen[j] = true;
                queue.push_back(j);
            }
        }
        while let Some(u) = queue.pop_front() {
            for &v in &self.succ[u] {
                if v == to {
                    let mut path = vec![u];
                    let mut cur = u;
                    while let Some(p) = parent[cur] {
                        path.push(p);
                        cur = p;
                    }
                    path.reverse();
                    return Some(path);
                }
                if !seen[v] {
                    seen[v] = true;
                    parent[v] = Some(u);
                    queue.push_back(v);
                }
            }
        }
        None
    }
}

/// Builds the covering graph from exact endpoint images.
pub fn build_covering_graph<S: Scalar>(map: &PmMap<S>) -> Result<CoveringGraph, GraphError> {
    let report = markov_check(map);
    if !report.passed() {
        return Err(GraphError::NotMarkov {
            violations: report.violations.len(),
        });
    }
    let n = map.len();
    let mut succ = vec![Vec::new(); n];
    for (i, s) in succ.iter_mut().enumerate() {
        let image = map.piece_image(i);
        for j in 0..n {
            let target = map.piece(j);
            if S::approx_le(&image.left, &target.left) && S::approx_le(&target.right, &image.right) {
                s.push(j);
            }
        }
    }
    Ok(CoveringGraph { succ })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IrreducibleComponent {
    /// Position in the list returned by [`irreducible_components`].
    pub id: usize,
    /// Sorted node indices.
    pub nodes: Vec<usize>,
    pub is_basic: bool,
    /// Out-degree of each node inside the component, aligned with `nodes`.
    pub internal_out_degrees: Vec<usize>,
}

impl IrreducibleComponent {
    pub fn contains(&self, node: usize) -> bool {
        self.nodes.binary_search(&node).is_ok()
    }
}

/// Strongly connected components ordered by smallest node.
pub fn irreducible_components(graph: &CoveringGraph) -> Vec<IrreducibleComponent> {
    let mut g = DiGraph::<(), ()>::new();
    let ids: Vec<_> = (0..graph.n_nodes()).map(|_| g.add_node(())).collect();
    for (i, j) in graph.edges() {
        g.add_edge(ids[i], ids[j], ());
    }
    let mut sccs: Vec<Vec<usize>> = tarjan_scc(&g)
        .into_iter()
        .map(|c| {
            let mut nodes: Vec<usize> = c.into_iter().map(|v| v.index()).collect();
            nodes.sort_unstable();
            nodes
        })
        .collect();
    sccs.sort_by_key(|c| c[0]);
    sccs.into_iter()
        .enumerate()
        .map(|(id, nodes)| {
            let internal_out_degrees: Vec<usize> = nodes
                .iter()
                .map(|&i| {
                    graph
                        .successors(i)
                        .iter()
                        .filter(|j| nodes.binary_search(j).is_ok())
                        .count()
                })
                .collect();
            IrreducibleComponent {
                id,
                is_basic: internal_out_degrees.iter().any(|&d| d >= 2),
                nodes,
                internal_out_degrees,
            }
        })
        .collect()
}

/// Cyclic list of piece-index sets `L_0 → L_1 → … → L_{m-1} → L_0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FStarCycle {
    pub sets: Vec<Vec<usize>>,
    pub period: usize,
}

impl FStarCycle {
    /// Index of the set containing `node`, if any.
    pub fn phase_of(&self, node: usize) -> Option<usize> {
        self.sets.iter().position(|s| s.binary_search(&node).is_ok())
    }
}

/// Iterates `S ↦ succ(S) ∩ restrict` from `start` until a set repeats.
fn iterate_sets(graph: &CoveringGraph, start: Vec<usize>, restrict: Option<&[usize]>) -> FStarCycle {
    let mut seen: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut history = Vec::new();
    let mut current = start;
    loop {
        if let Some(&first) = seen.get(&current) {
            let sets = history.split_off(first);
            let period = sets.len();
            return FStarCycle { sets, period };
        }
        seen.insert(current.clone(), history.len());
        let mut next = graph.image_set(&current);
        if let Some(keep) = restrict {
            next.retain(|j| keep.binary_search(j).is_ok());
        }
        history.push(std::mem::replace(&mut current, next));
    }
}

/// The sets `L_i` with `int f^i(I) = int ∪_{l ∈ L_i} J_l`, iterated until
/// they cycle. Images of the whole interval are nested, so the cycle found
/// has period 1.
pub fn f_star_periodic_sets<S: Scalar>(map: &PmMap<S>) -> Result<FStarCycle, GraphError> {
    let graph = build_covering_graph(map)?;
    Ok(iterate_sets(&graph, (0..graph.n_nodes()).collect(), None))
}

/// Minimal f*-periodic cycle carried by a component: the cyclic classes of
/// its nodes, starting with the class of the smallest node. A component
/// without internal edges is returned as a single set.
pub fn component_cycle(graph: &CoveringGraph, component: &IrreducibleComponent) -> FStarCycle {
    let first = component.nodes[0];
    let cycle = iterate_sets(graph, vec![first], Some(&component.nodes));
    if cycle.sets.iter().all(Vec::is_empty) {
        return FStarCycle {
            sets: vec![component.nodes.clone()],
            period: 1,
        };
    }
    let mut sets = cycle.sets;
    if let Some(k) = sets.iter().position(|s| s.binary_search(&first).is_ok()) {
        sets.rotate_left(k);
    }
    FStarCycle {
        period: sets.len(),
        sets,
    }
}

fn pieces_union<S: Scalar>(map: &PmMap<S>, set: &[usize]) -> IntervalUnion<S> {
    IntervalUnion::from_parts(set.iter().map(|&l| map.piece(l).clone()))
}

/// Nondegenerate parts of the closure; equal for two sets iff they differ
/// in finitely many points.
fn closure_parts<S: Scalar>(u: &IntervalUnion<S>) -> Vec<(S, S)> {
    IntervalUnion::from_parts(u.parts().iter().filter(|p| !p.is_point()).map(Interval::closure))
        .parts()
        .iter()
        .map(|p| (p.left.clone(), p.right.clone()))
        .collect()
}

/// Checks `int f(∪_{L_t} J_l) = int ∪_{L_{t+1}} J_l` around the cycle, up
/// to finitely many points (an image can miss an isolated piece endpoint).
pub fn f_star_cycle_holds<S: Scalar>(map: &PmMap<S>, cycle: &FStarCycle) -> bool {
    (0..cycle.period).all(|t| {
        let image = map.image_of(&pieces_union(map, &cycle.sets[t]));
        let next = pieces_union(map, &cycle.sets[(t + 1) % cycle.period]);
        closure_parts(&image) == closure_parts(&next)
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralEstimate {
    pub radius: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Spectral radius of the adjacency matrix restricted to `nodes`.
///
/// Power iteration runs on `A + I`, which is primitive on an irreducible
/// block, with Collatz–Wielandt bounds as the stopping rule. Without
/// convergence the lower bound is returned.
pub fn spectral_radius(graph: &CoveringGraph, nodes: &[usize]) -> SpectralEstimate {
    let k = nodes.len();
    if k == 0 {
        return SpectralEstimate {
            radius: 0.0,
            converged: true,
            iterations: 0,
        };
    }
    let local: Vec<Vec<usize>> = nodes
        .iter()
        .map(|&i| {
            graph
                .successors(i)
                .iter()
                .filter_map(|j| nodes.binary_search(j).ok())
                .collect()
        })
        .collect();
    let mut v = vec![1.0f64; k];
    let mut lower = 0.0;
    for it in 1..=POWER_ITERATION_CAP {
        let w: Vec<f64> = (0..k)
            .map(|i| v[i] + local[i].iter().map(|&j| v[j]).sum::<f64>())
            .collect();
        let ratios = w.iter().zip(&v).map(|(a, b)| a / b);
        let (lo, hi) = ratios.fold((f64::INFINITY, 0.0f64), |(lo, hi), r| (lo.min(r), hi.max(r)));
        lower = lo;
        if hi - lo <= POWER_TOLERANCE * hi {
            return SpectralEstimate {
                radius: (0.5 * (lo + hi) - 1.0).max(0.0),
                converged: true,
                iterations: it,
            };
        }
        let scale = w.iter().cloned().fold(0.0, f64::max);
        v = w.into_iter().map(|x| x / scale).collect();
    }
    SpectralEstimate {
        radius: (lower - 1.0).max(0.0),
        converged: false,
        iterations: POWER_ITERATION_CAP,
    }
}

/// `log ρ(A)` for one component, 0 when `ρ ≤ 1`.
pub fn component_entropy(graph: &CoveringGraph, component: &IrreducibleComponent) -> f64 {
    spectral_radius(graph, &component.nodes).radius.max(1.0).ln()
}

/// `log ρ(A)`: the spectral radius of a matrix is the largest over its
/// irreducible blocks.
pub fn entropy_lower_bound(graph: &CoveringGraph) -> f64 {
    irreducible_components(graph)
        .iter()
        .map(|c| component_entropy(graph, c))
        .fold(0.0, f64::max)
}

/// `(ln ‖A^{2k}‖ − ln ‖A^k‖) / k` with exact integer powers; `None` when
/// `A^k` vanishes. Meant for small graphs.
pub fn exact_log_growth(graph: &CoveringGraph, k: usize) -> Option<f64> {
    let n = graph.n_nodes();
    let a: Vec<Vec<BigUint>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if graph.has_edge(i, j) { BigUint::from(1u8) } else { BigUint::zero() })
                .collect()
        })
        .collect();
    let mul = |x: &[Vec<BigUint>], y: &[Vec<BigUint>]| -> Vec<Vec<BigUint>> {
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).fold(BigUint::zero(), |acc, l| acc + &x[i][l] * &y[l][j]))
                    .collect()
            })
            .collect()
    };
    let mut power = a.clone();
    for _ in 1..k {
        power = mul(&power, &a);
    }
    let double = mul(&power, &power);
    let norm = |m: &[Vec<BigUint>]| m.iter().flatten().fold(BigUint::zero(), |acc, x| acc + x);
    let (nk, n2k) = (norm(&power), norm(&double));
    if nk.is_zero() {
        return None;
    }
    let ln = |x: &BigUint| {
        let shift = x.bits().saturating_sub(64);
        (x >> shift).to_f64().unwrap_or(f64::MAX).ln() + shift as f64 * std::f64::consts::LN_2
    };
    Some((ln(&n2k) - ln(&nk)) / k as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub enum TransitivityOutcome<S> {
    /// `f^{a+bm}(K_1) ⊇ K_2` for every `b ≥ b_min` within the horizon.
    Witness { a: usize, b_min: usize, period: usize },
    /// No stable covering within the horizon. `best_coverage` is the
    /// largest fraction of `K_2` covered, reached first at `best_step`.
    Exhausted { best_step: usize, best_coverage: S },
}

/// Looks for exponents `a` and `b_min` with `f^{a+bm}(K_1) ⊇ K_2`, where `m`
/// is the period of the component's f*-cycle, by tracking the images of
/// `K_1` exactly.
pub fn strong_transitivity_witness<S: Scalar>(
    map: &PmMap<S>,
    graph: &CoveringGraph,
    component: &IrreducibleComponent,
    k1: &Interval<S>,
    k2: &Interval<S>,
    horizon: usize,
) -> Result<TransitivityOutcome<S>, GraphError> {
    let meets = component.nodes.iter().any(|&i| {
        map.piece(i)
            .interior()
            .and_then(|int| int.intersect(k1))
            .is_some_and(|iv| !iv.is_point())
    });
    if !meets {
        return Err(GraphError::Precondition(format!(
            "{k1} does not meet the interior of the component's pieces"
        )));
    }
    let home = pieces_union(map, &component.nodes);
    let inside = home
        .parts()
        .iter()
        .filter_map(Interval::interior)
        .any(|int| int.contains_interval(k2));
    if !inside {
        return Err(GraphError::Precondition(format!(
            "{k2} is not inside the interior of the component's pieces"
        )));
    }
    let m = component_cycle(graph, component).period;

    let mut covers = Vec::with_capacity(horizon + 1);
    let mut best = (0, S::zero());
    let mut current = IntervalUnion::from_parts([k1.clone()]);
    for step in 0..=horizon {
        covers.push(current.contains_interval(k2));
        let covered = current.intersect_interval(k2).measure();
        if covered > best.1 {
            best = (step, covered);
        }
        if step < horizon {
            current = map.image_of(&current);
        }
    }
    if let Some(a) = covers.iter().position(|&c| c) {
        let hits: Vec<bool> = covers[a..].iter().step_by(m).copied().collect();
        // the last missed multiple decides b_min
        let b_min = hits.iter().rposition(|&c| !c).map_or(0, |b| b + 1);
        if b_min < hits.len() {
            return Ok(TransitivityOutcome::Witness { a, b_min, period: m });
        }
    }
    let width = k2.diameter();
    let best_coverage = if width.is_zero() { S::zero() } else { best.1 / width };
    Ok(TransitivityOutcome::Exhausted {
        best_step: best.0,
        best_coverage,
    })
}

/// One line per edge, `"i j"`, one-based.
pub fn adjacency_list(graph: &CoveringGraph) -> String {
    graph.edges().map(|(i, j)| format!("{} {}\n", i + 1, j + 1)).collect()
}

/// `component_id;nodes;is_basic;entropy_lower_bound`, one-based ids and nodes.
pub fn components_csv(graph: &CoveringGraph, components: &[IrreducibleComponent]) -> String {
    let mut out = String::from("component_id;nodes;is_basic;entropy_lower_bound\n");
    for c in components {
        let nodes: Vec<String> = c.nodes.iter().map(|n| (n + 1).to_string()).collect();
        out.push_str(&format!(
            "{};{};{};{}\n",
            c.id + 1,
            nodes.join(","),
            c.is_basic,
            component_entropy(graph, c)
        ));
    }
    out
}
