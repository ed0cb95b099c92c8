//! Reference schemes the two-layer planner is measured against.
//!
//! All three reuse the interval solver but give up one of its freedoms:
//!
//! * [`instantaneous`] transmits every slot, carrying an equal share
//!   `target / age_limit` of the per-update target, so data is always as
//!   fresh as possible and energy is spent without pooling slots.
//! * [`periodic`] samples on the fixed grid `1, 1 + age_limit, ...` and
//!   plans each interval separately; it pools slots but never adapts the
//!   sampling times to the channel.
//! * [`average`] plans the whole horizon as one interval with the same
//!   average throughput, ignoring freshness entirely; it lower-bounds the
//!   energy any freshness-respecting scheme can achieve.

use crate::interval::{Outcome, Plan, Solver};
use crate::strategy::{Scheme, Strategy};

/// Why a baseline could not be planned: some interval cannot carry its
/// bit requirement even at full power.
#[derive(Debug, Clone, PartialEq)]
pub struct Shortfall {
    pub start: usize,
    pub end: usize,
    pub target: f64,
    pub max_bits: f64,
}

impl std::fmt::Display for Shortfall {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "slots [{}, {}) carry at most {:.3e} expected bits, need {:.3e}",
            self.start, self.end, self.max_bits, self.target
        )
    }
}

/// Sampling grid shared by the periodic and instantaneous schemes:
/// instants `1, 1 + age_limit, ...` up to the horizon.
fn grid(horizon: usize, age_limit: usize) -> Vec<usize> {
    (1..=horizon).step_by(age_limit).collect()
}

fn solve_or_shortfall(
    solver: &Solver,
    start: usize,
    end: usize,
    target: f64,
) -> Result<Plan, Shortfall> {
    match solver.solve(start, end, target) {
        Outcome::Feasible(plan) => Ok(plan),
        Outcome::Infeasible { max_bits } => Err(Shortfall {
            start,
            end,
            target,
            max_bits,
        }),
    }
}

/// Every slot transmits `target / age_limit` expected bits. Intervals
/// follow the periodic grid; an interval's plan is the union of its
/// slots' single-slot plans, and a ragged final interval of length `L`
/// is only required to carry `L * target / age_limit`.
pub fn instantaneous(solver: &Solver, age_limit: usize, target: f64) -> Result<Strategy, Shortfall> {
    check(solver, age_limit, target);
    let horizon = solver.stats().horizon();
    let per_slot = target / age_limit as f64;
    let instants = grid(horizon, age_limit);
    let mut plans = Vec::with_capacity(instants.len());
    let mut required = Vec::with_capacity(instants.len());
    for (idx, &start) in instants.iter().enumerate() {
        let end = instants.get(idx + 1).copied().unwrap_or(horizon + 1);
        let mut merged = Plan {
            start,
            end,
            energy: 0.0,
            bits: 0.0,
            allocations: Vec::new(),
        };
        for t in start..end {
            let slot_plan = solve_or_shortfall(solver, t, t + 1, per_slot)?;
            merged.energy += slot_plan.energy;
            merged.bits += slot_plan.bits;
            merged.allocations.extend(slot_plan.allocations);
        }
        required.push((end - start) as f64 * per_slot);
        plans.push(merged);
    }
    Ok(Strategy::new(
        Scheme::Instantaneous,
        solver.theta(),
        horizon,
        instants,
        plans,
        required,
    ))
}

/// One delivery program across the whole horizon carrying the same
/// average throughput, `target * horizon / age_limit` bits. Freshness is
/// ignored (the single interval is as long as the horizon), which makes
/// this an energy lower bound for every scheme delivering that average.
pub fn average(solver: &Solver, age_limit: usize, target: f64) -> Result<Strategy, Shortfall> {
    check(solver, age_limit, target);
    let horizon = solver.stats().horizon();
    let total = target * horizon as f64 / age_limit as f64;
    let plan = solve_or_shortfall(solver, 1, horizon + 1, total)?;
    Ok(Strategy::new(
        Scheme::Average,
        solver.theta(),
        horizon,
        vec![1],
        vec![plan],
        vec![total],
    ))
}

/// Samples on the fixed grid and plans each interval for the full
/// per-update target, including the ragged final interval.
pub fn periodic(solver: &Solver, age_limit: usize, target: f64) -> Result<Strategy, Shortfall> {
    check(solver, age_limit, target);
    let horizon = solver.stats().horizon();
    let instants = grid(horizon, age_limit);
    let mut plans = Vec::with_capacity(instants.len());
    for (idx, &start) in instants.iter().enumerate() {
        let end = instants.get(idx + 1).copied().unwrap_or(horizon + 1);
        plans.push(solve_or_shortfall(solver, start, end, target)?);
    }
    let required = vec![target; plans.len()];
    Ok(Strategy::new(
        Scheme::Periodic,
        solver.theta(),
        horizon,
        instants,
        plans,
        required,
    ))
}

fn check(solver: &Solver, age_limit: usize, target: f64) {
    let horizon = solver.stats().horizon();
    assert!(
        age_limit >= 1 && age_limit <= horizon,
        "age limit {age_limit} outside 1..={horizon}"
    );
    assert!(target.is_finite() && target > 0.0, "bit target {target}");
}
