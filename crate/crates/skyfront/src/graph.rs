//! Sampling control as a shortest path over candidate instants.
//!
//! Fix the block cap and the per-update bit target. Relabel every slot
//! `1..=T` plus a virtual terminal `T + 1` as graph vertices; an edge
//! `(i, j)` with `1 <= j - i <= age limit` means "sample at `i`, deliver
//! during slots `i..j - 1`, sample next at `j`", and its weight is the
//! minimum energy of that delivery (from [`crate::interval`]), infinite
//! when the target cannot fit. Freshness holds exactly along paths from
//! vertex 1 to the terminal, so the cheapest admissible schedule is the
//! shortest path through a DAG, found in one forward sweep.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::interval::{Outcome, Plan, Solver};
use crate::strategy::{Scheme, Strategy};

/// Weight of one timing edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EdgeWeight {
    /// Minimum delivery energy in watt-slots.
    Finite(f64),
    /// The interval cannot carry the bit target at any power.
    Unreachable,
}

impl EdgeWeight {
    pub fn energy(self) -> Option<f64> {
        match self {
            EdgeWeight::Finite(e) => Some(e),
            EdgeWeight::Unreachable => None,
        }
    }
}

/// One stored edge: the full minimum-energy plan, kept so extracting the
/// winning schedule never re-solves an interval.
#[derive(Debug, Clone)]
enum StoredEdge {
    Finite(Arc<Plan>),
    Unreachable,
}

impl StoredEdge {
    fn weight(&self) -> EdgeWeight {
        match self {
            StoredEdge::Finite(p) => EdgeWeight::Finite(p.energy),
            StoredEdge::Unreachable => EdgeWeight::Unreachable,
        }
    }
}

/// The weighted DAG of sampling decisions for one (cap, target) pair.
#[derive(Debug, Clone)]
pub struct TimingGraph {
    pub horizon: usize,
    pub age_limit: usize,
    /// `edges[c - 1][i - 1]` is the edge `(i, i + c)`, grouped by
    /// interval length `c` so equal-length edges sit together.
    edges: Vec<Vec<StoredEdge>>,
}

impl TimingGraph {
    /// Number of edges: lengths `c = 1..=age_limit` contribute
    /// `T + 1 - c` edges each.
    pub fn edge_count(&self) -> usize {
        self.edges.iter().map(Vec::len).sum()
    }

    /// Weight of edge `(i, j)`.
    ///
    /// # Panics
    ///
    /// Panics when `(i, j)` is not an edge of the graph.
    pub fn weight(&self, i: usize, j: usize) -> EdgeWeight {
        assert!(i >= 1 && j > i && j - i <= self.age_limit && j <= self.horizon + 1);
        self.edges[j - i - 1][i - 1].weight()
    }

    /// The stored minimum-energy plan for edge `(i, j)`, `None` when the
    /// interval cannot carry the target.
    ///
    /// # Panics
    ///
    /// Panics when `(i, j)` is not an edge of the graph.
    pub fn plan(&self, i: usize, j: usize) -> Option<&Plan> {
        assert!(i >= 1 && j > i && j - i <= self.age_limit && j <= self.horizon + 1);
        match &self.edges[j - i - 1][i - 1] {
            StoredEdge::Finite(p) => Some(p),
            StoredEdge::Unreachable => None,
        }
    }

    /// All edges as `(i, j, weight)`, ordered by length then tail.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, EdgeWeight)> + '_ {
        self.edges.iter().enumerate().flat_map(move |(ci, row)| {
            row.iter()
                .enumerate()
                .map(move |(i0, e)| (i0 + 1, i0 + 1 + ci + 1, e.weight()))
        })
    }

    /// Shortest path from vertex 1 to the terminal: total energy and the
    /// vertex sequence. `None` when the terminal is unreachable.
    pub fn shortest_path(&self) -> Option<(f64, Vec<usize>)> {
        let n = self.horizon + 1;
        let mut dist = vec![f64::INFINITY; n + 1];
        let mut prev = vec![0usize; n + 1];
        dist[1] = 0.0;
        for i in 1..=n - 1 {
            if dist[i].is_infinite() {
                continue;
            }
            for c in 1..=self.age_limit.min(n - i) {
                if let StoredEdge::Finite(p) = &self.edges[c - 1][i - 1] {
                    // Strict improvement keeps the earliest predecessor
                    // on ties, so equal-cost schedules resolve the same
                    // way on every run.
                    if dist[i] + p.energy < dist[i + c] {
                        dist[i + c] = dist[i] + p.energy;
                        prev[i + c] = i;
                    }
                }
            }
        }
        if dist[n].is_infinite() {
            return None;
        }
        let mut path = vec![n];
        let mut v = n;
        while v != 1 {
            v = prev[v];
            path.push(v);
        }
        path.reverse();
        Some((dist[n], path))
    }

    /// The largest vertex reachable from vertex 1, a diagnostic for
    /// infeasible horizons ("the schedule gets stuck after this slot").
    pub fn max_reachable(&self) -> usize {
        let n = self.horizon + 1;
        let mut reach = vec![false; n + 1];
        reach[1] = true;
        let mut best = 1;
        for i in 1..=n - 1 {
            if !reach[i] {
                continue;
            }
            for c in 1..=self.age_limit.min(n - i) {
                if matches!(self.edges[c - 1][i - 1], StoredEdge::Finite(_)) {
                    reach[i + c] = true;
                    best = best.max(i + c);
                }
            }
        }
        best
    }
}

/// Builds the timing graph by solving every admissible interval.
///
/// Per-slot budget prices are forced first (in parallel when a rayon pool
/// with more than one thread is active), then each edge runs one interval
/// solve and keeps the resulting plan. Edge weights are exactly the
/// energies `solver.solve` would report for the same interval; the shared
/// per-slot cache is the only state reused across edges.
pub fn build_graph(solver: &Solver, age_limit: usize, target: f64) -> TimingGraph {
    let horizon = solver.stats().horizon();
    assert!(
        age_limit >= 1 && age_limit <= horizon,
        "age limit {age_limit} outside 1..={horizon}"
    );
    (0..horizon)
        .into_par_iter()
        .with_min_len(16)
        .for_each(|t| {
            solver.max_bits(t + 1, t + 2);
        });
    let edges = (1..=age_limit)
        .map(|c| {
            (1..horizon + 2 - c)
                .into_par_iter()
                .with_min_len(4)
                .map(|i| match solver.solve(i, i + c, target) {
                    Outcome::Feasible(plan) => StoredEdge::Finite(Arc::new(plan)),
                    Outcome::Infeasible { .. } => StoredEdge::Unreachable,
                })
                .collect()
        })
        .collect();
    TimingGraph {
        horizon,
        age_limit,
        edges,
    }
}

/// Outcome of planning a whole horizon at one block cap.
#[derive(Debug, Clone, PartialEq)]
pub enum HorizonOutcome {
    Feasible(Strategy),
    /// No sampling schedule obeys the age limit; planning stalls after
    /// `max_reachable` (as a vertex of the timing graph).
    Infeasible { max_reachable: usize },
}

impl HorizonOutcome {
    pub fn strategy(&self) -> Option<&Strategy> {
        match self {
            HorizonOutcome::Feasible(s) => Some(s),
            HorizonOutcome::Infeasible { .. } => None,
        }
    }
}

/// Plans the whole horizon: builds the timing graph, extracts the
/// shortest path, and assembles the chosen intervals' stored plans.
pub fn solve_horizon(solver: &Solver, age_limit: usize, target: f64) -> HorizonOutcome {
    let graph = build_graph(solver, age_limit, target);
    solve_on_graph(solver, &graph, target)
}

/// As [`solve_horizon`] for a graph that is already built (the sweep over
/// caps reuses graphs it dumped, and tests inspect them).
pub fn solve_on_graph(solver: &Solver, graph: &TimingGraph, target: f64) -> HorizonOutcome {
    let Some((energy, path)) = graph.shortest_path() else {
        return HorizonOutcome::Infeasible {
            max_reachable: graph.max_reachable(),
        };
    };
    let mut plans: Vec<Plan> = Vec::with_capacity(path.len() - 1);
    for w in path.windows(2) {
        match graph.plan(w[0], w[1]) {
            Some(plan) => plans.push(plan.clone()),
            None => unreachable!("edge ({}, {}) was finite during the sweep", w[0], w[1]),
        }
    }
    let total: f64 = plans.iter().map(|p| p.energy).sum();
    debug_assert!(
        (total - energy).abs() <= 1e-9 * energy.max(1.0),
        "stored plans drifted from edge weights: {total} vs {energy}"
    );
    let instants = path[..path.len() - 1].to_vec();
    let required = vec![target; plans.len()];
    HorizonOutcome::Feasible(Strategy::new(
        Scheme::Proposed,
        solver.theta(),
        graph.horizon,
        instants,
        plans,
        required,
    ))
}
