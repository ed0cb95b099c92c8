//! The load/energy Pareto frontier: sweep the block cap, collect the
//! undominated trade-off points.
//!
//! Energy is non-increasing in the cap (a plan legal under a tight cap
//! stays legal under a looser one), so the frontier is found by sweeping
//! `theta` upward: the first feasible cap is the lightest load
//! `theta_lower`, and the sweep stops at `theta_upper`, the first cap
//! whose energy reaches the floor set by the fully relaxed cap
//! `theta = K` (computed once, up front, as the anchor). Between the two
//! ends the energy decreases strictly, hence every collected point is
//! undominated.
//!
//! [`scalarize`] re-expresses a frontier through strictly increasing
//! coordinate maps (say, energy in decibels); such maps preserve the
//! undominated structure, and the function verifies both the maps and
//! the mapped result rather than trusting the caller.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{ChannelStats, LinkParams};
use crate::graph::{solve_horizon, HorizonOutcome};
use crate::interval::Solver;
use crate::strategy::Strategy;

/// Relative tolerance deciding when two optimal energies are "equal":
/// the plateau test of the sweep and the strictness test of the
/// structure check both resolve differences at this scale.
pub const EPSILON_ENERGY: f64 = 1e-9;

/// One frontier point: the cheapest strategy at cap `theta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoPoint {
    pub theta: usize,
    /// Optimal energy at this cap, watt-slots.
    pub energy: f64,
    pub strategy: Strategy,
}

/// The complete frontier: consecutive caps `theta_lower..=theta_upper`
/// with strictly decreasing energies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoFrontier {
    pub points: Vec<ParetoPoint>,
    /// Lightest feasible load (the utopian cap).
    pub theta_lower: usize,
    /// First cap whose energy reaches the relaxed-cap floor.
    pub theta_upper: usize,
    /// Componentwise ideal `(theta_lower, energy floor)`; as a pair it is
    /// usually infeasible, the frontier shows the attainable trades.
    pub utopia: (usize, f64),
}

impl ParetoFrontier {
    pub fn point(&self, theta: usize) -> Option<&ParetoPoint> {
        self.points.iter().find(|p| p.theta == theta)
    }

    /// Verifies the frontier shape: consecutive caps, energies strictly
    /// decreasing (resolved at [`EPSILON_ENERGY`]), the last point on
    /// the energy floor, and no point dominating another.
    pub fn check_structure(&self) -> Result<(), String> {
        if self.points.is_empty() {
            return Err("frontier has no points".into());
        }
        if self.points.first().unwrap().theta != self.theta_lower
            || self.points.last().unwrap().theta != self.theta_upper
        {
            return Err("frontier ends disagree with theta bounds".into());
        }
        for w in self.points.windows(2) {
            if w[1].theta != w[0].theta + 1 {
                return Err(format!(
                    "caps must be consecutive, got {} then {}",
                    w[0].theta, w[1].theta
                ));
            }
            if !(w[1].energy < w[0].energy * (1.0 - EPSILON_ENERGY)) {
                return Err(format!(
                    "energy must decrease strictly: E({}) = {} vs E({}) = {}",
                    w[0].theta, w[0].energy, w[1].theta, w[1].energy
                ));
            }
        }
        let floor = self.utopia.1;
        let last = self.points.last().unwrap();
        if !(last.energy <= floor * (1.0 + EPSILON_ENERGY)) {
            return Err(format!(
                "last point {} is off the energy floor {floor}",
                last.energy
            ));
        }
        for a in &self.points {
            for b in &self.points {
                let dominates = a.theta <= b.theta
                    && a.energy <= b.energy * (1.0 - EPSILON_ENERGY)
                    || a.theta < b.theta && a.energy <= b.energy * (1.0 + EPSILON_ENERGY);
                if a.theta != b.theta && dominates && a.theta < b.theta {
                    // With increasing theta and strictly decreasing
                    // energy this cannot fire; keep the direct check as
                    // the definition is what callers rely on.
                    return Err(format!(
                        "point at cap {} dominates cap {}",
                        a.theta, b.theta
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Why a sweep failed.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SweepError {
    /// Even the fully relaxed cap cannot schedule the horizon; planning
    /// stalls after the reported timing-graph vertex.
    #[error("no cap admits a feasible schedule; planning stalls after vertex {max_reachable}")]
    WhollyInfeasible { max_reachable: usize },
    /// Optimal energies must be non-increasing in the cap; observing the
    /// opposite means a solver defect, and results cannot be trusted.
    #[error("energy rose when the cap loosened: E({theta}) = {looser} > E({}) = {tighter}", theta - 1)]
    MonotonicityBreak {
        theta: usize,
        tighter: f64,
        looser: f64,
    },
}

/// Sweeps caps `1..=K` and assembles the frontier.
///
/// The relaxed-cap optimum (`theta = K`) is solved first and anchors the
/// energy floor; the upward sweep then stops at the first cap reaching
/// the floor (within [`EPSILON_ENERGY`]), which Lemma-style monotonicity
/// makes the saturation cap.
pub fn sweep_frontier(
    stats: &ChannelStats,
    params: LinkParams,
    age_limit: usize,
    target: f64,
) -> Result<ParetoFrontier, SweepError> {
    let k = stats.n_rb();
    let anchor_solver = Solver::new(stats, params, k);
    let anchor = match solve_horizon(&anchor_solver, age_limit, target) {
        HorizonOutcome::Feasible(s) => s,
        HorizonOutcome::Infeasible { max_reachable } => {
            return Err(SweepError::WhollyInfeasible { max_reachable })
        }
    };
    let floor = anchor.energy;

    let mut points: Vec<ParetoPoint> = Vec::new();
    for theta in 1..=k {
        let outcome = if theta == k {
            HorizonOutcome::Feasible(anchor.clone())
        } else {
            let solver = Solver::new(stats, params, theta);
            solve_horizon(&solver, age_limit, target)
        };
        match outcome {
            HorizonOutcome::Infeasible { .. } => {
                if let Some(prev) = points.last() {
                    // Feasible sets are nested in the cap; losing
                    // feasibility when loosening is the monotonicity
                    // defect in its most extreme form.
                    return Err(SweepError::MonotonicityBreak {
                        theta,
                        tighter: prev.energy,
                        looser: f64::INFINITY,
                    });
                }
            }
            HorizonOutcome::Feasible(strategy) => {
                if let Some(prev) = points.last() {
                    if strategy.energy > prev.energy * (1.0 + EPSILON_ENERGY) {
                        return Err(SweepError::MonotonicityBreak {
                            theta,
                            tighter: prev.energy,
                            looser: strategy.energy,
                        });
                    }
                }
                let energy = strategy.energy;
                points.push(ParetoPoint {
                    theta,
                    energy,
                    strategy,
                });
                if energy <= floor * (1.0 + EPSILON_ENERGY) {
                    break;
                }
            }
        }
    }
    let theta_lower = points.first().expect("cap K is feasible").theta;
    let theta_upper = points.last().unwrap().theta;
    Ok(ParetoFrontier {
        points,
        theta_lower,
        theta_upper,
        utopia: (theta_lower, floor),
    })
}

/// A claimed-increasing coordinate map failed its check.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{which} map is not strictly increasing near {at}")]
pub struct NonMonotoneMap {
    /// Which argument failed: "load" or "energy".
    pub which: &'static str,
    pub at: f64,
}

/// Maps frontier points through strictly increasing coordinate maps,
/// returning `(f1(theta), f2(energy))` in frontier order.
///
/// Both maps are sampled across the frontier's coordinate ranges and the
/// mapped points are re-checked for the undominated shape (first
/// coordinate increasing, second strictly decreasing); any failure
/// reports [`NonMonotoneMap`] rather than returning a corrupt frontier.
pub fn scalarize(
    frontier: &ParetoFrontier,
    f1: impl Fn(f64) -> f64,
    f2: impl Fn(f64) -> f64,
) -> Result<Vec<(f64, f64)>, NonMonotoneMap> {
    let lo1 = frontier.theta_lower as f64;
    let hi1 = frontier.theta_upper as f64;
    sampled_increasing(&f1, lo1, hi1, "load")?;
    let e_hi = frontier.points.first().unwrap().energy;
    let e_lo = frontier.points.last().unwrap().energy;
    sampled_increasing(&f2, e_lo, e_hi, "energy")?;

    let mapped: Vec<(f64, f64)> = frontier
        .points
        .iter()
        .map(|p| (f1(p.theta as f64), f2(p.energy)))
        .collect();
    for w in mapped.windows(2) {
        if !(w[1].0 > w[0].0) {
            return Err(NonMonotoneMap {
                which: "load",
                at: w[0].0,
            });
        }
        if !(w[1].1 < w[0].1) {
            return Err(NonMonotoneMap {
                which: "energy",
                at: w[0].1,
            });
        }
    }
    Ok(mapped)
}

fn sampled_increasing(
    f: &impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    which: &'static str,
) -> Result<(), NonMonotoneMap> {
    if !(hi > lo) {
        return Ok(());
    }
    const SAMPLES: usize = 33;
    let mut prev = f(lo);
    for i in 1..SAMPLES {
        let x = lo + (hi - lo) * i as f64 / (SAMPLES - 1) as f64;
        let y = f(x);
        if !(y > prev) {
            return Err(NonMonotoneMap { which, at: x });
        }
        prev = y;
    }
    Ok(())
}
