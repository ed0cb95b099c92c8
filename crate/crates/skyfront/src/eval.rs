//! Independent auditing and Monte Carlo evaluation of strategies.
//!
//! The solvers promise plans that are feasible in expectation; nothing
//! here trusts them. [`audit_strategy`] recomputes every constraint from
//! the raw tables: interval lengths against the age limit, expected
//! delivery per interval via the channel model, per-slot power against
//! the budget, block exclusivity, and the per-station cap.
//!
//! [`monte_carlo_eval`] replays a strategy against drawn channel
//! realizations. An interval's update is delivered once the bits that
//! actually arrived since its sampling instant reach the interval's
//! requirement; the success indicator fires at the following slot, and
//! the information age then resets to the update's actual age
//! (`t - t0`). Ages evolve by [`aoi_trace`]; a run's score is the
//! fraction of slots whose age stays within the limit, and the reported
//! rate averages the runs. Transmit powers are planned ahead of time, so
//! realized energy is deterministic; only delivery timing varies.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{expected_capacity, realized_capacity, sample_channel_gain, ChannelStats, LinkParams};
use crate::interval::{Outcome, Plan, Solver};
use crate::strategy::{Scheme, Strategy};

/// One audited constraint failure, naming the constraint, the indices,
/// and the margin by which it fails.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Violation {
    /// Interval `index` spans `[start, end)`, longer than the age limit.
    GapTooLong {
        index: usize,
        start: usize,
        end: usize,
        limit: usize,
    },
    /// Interval `index` delivers fewer expected bits than required.
    UnderDelivery {
        index: usize,
        expected_bits: f64,
        required: f64,
    },
    /// Total power in `slot` exceeds the per-slot budget.
    PowerOverBudget { slot: usize, power_w: f64, budget_w: f64 },
    /// Block `rb` serves more than one station in `slot`.
    BlockConflict { slot: usize, rb: usize },
    /// Station `bs` uses more blocks in `slot` than the cap allows.
    CapExceeded {
        slot: usize,
        bs: usize,
        used: usize,
        cap: usize,
    },
    /// An allocation with impossible indices or a negative power.
    Malformed { slot: usize, bs: usize, rb: usize, detail: String },
    /// Plan boundaries disagree with the sampling instants.
    Misaligned { index: usize, detail: String },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::GapTooLong { index, start, end, limit } => write!(
                f,
                "interval {index} spans [{start}, {end}), longer than the age limit {limit}"
            ),
            Violation::UnderDelivery { index, expected_bits, required } => write!(
                f,
                "interval {index} delivers {expected_bits:.6e} expected bits, needs {required:.6e}"
            ),
            Violation::PowerOverBudget { slot, power_w, budget_w } => write!(
                f,
                "slot {slot} transmits {power_w:.6e} W, budget {budget_w:.6e} W"
            ),
            Violation::BlockConflict { slot, rb } => {
                write!(f, "block {rb} serves two stations in slot {slot}")
            }
            Violation::CapExceeded { slot, bs, used, cap } => write!(
                f,
                "station {bs} uses {used} blocks in slot {slot}, cap {cap}"
            ),
            Violation::Malformed { slot, bs, rb, detail } => {
                write!(f, "allocation (slot {slot}, bs {bs}, rb {rb}): {detail}")
            }
            Violation::Misaligned { index, detail } => {
                write!(f, "plan {index} misaligned: {detail}")
            }
        }
    }
}

/// Checks every constraint of a strategy against raw channel tables,
/// trusting nothing the solvers wrote. Expected delivery is recomputed
/// through the channel model from each allocation's power. An empty list
/// means fully feasible.
pub fn audit_strategy(
    strategy: &Strategy,
    stats: &ChannelStats,
    params: LinkParams,
    age_limit: usize,
) -> Vec<Violation> {
    let mut out = Vec::new();
    let horizon = stats.horizon();
    let spans: Vec<(usize, usize)> = strategy.intervals().collect();
    for (index, (&instant, plan)) in strategy.instants.iter().zip(&strategy.plans).enumerate() {
        let (start, end) = spans[index];
        if plan.start != instant || plan.end != end {
            out.push(Violation::Misaligned {
                index,
                detail: format!(
                    "plan covers [{}, {}), interval is [{start}, {end})",
                    plan.start, plan.end
                ),
            });
        }
        if end - start > age_limit {
            out.push(Violation::GapTooLong {
                index,
                start,
                end,
                limit: age_limit,
            });
        }
    }

    // Recompute per-slot structure and per-interval delivery from the
    // allocations alone.
    let mut slot_power = vec![0.0f64; horizon + 1];
    let mut slot_cells: Vec<Vec<(usize, usize)>> = vec![Vec::new(); horizon + 1];
    let mut delivered = vec![0.0f64; strategy.plans.len()];
    for (index, plan) in strategy.plans.iter().enumerate() {
        for a in &plan.allocations {
            let bad_index = a.slot < plan.start
                || a.slot >= plan.end
                || a.slot > horizon
                || a.bs >= stats.n_bs()
                || a.rb >= stats.n_rb();
            if bad_index || !a.power_w.is_finite() || a.power_w < 0.0 {
                out.push(Violation::Malformed {
                    slot: a.slot,
                    bs: a.bs,
                    rb: a.rb,
                    detail: if bad_index {
                        format!("outside plan [{}, {}) or table bounds", plan.start, plan.end)
                    } else {
                        format!("power {} is not a valid wattage", a.power_w)
                    },
                });
                continue;
            }
            slot_power[a.slot] += a.power_w;
            slot_cells[a.slot].push((a.bs, a.rb));
            delivered[index] += expected_capacity(
                a.power_w,
                stats.gain(a.bs, a.rb, a.slot - 1),
                stats.shape(a.bs, a.rb, a.slot - 1),
                params.bandwidth_hz,
                params.noise_w,
            );
        }
    }
    for (index, (&got, &need)) in delivered.iter().zip(&strategy.required_bits).enumerate() {
        if got < need * (1.0 - 1e-9) {
            out.push(Violation::UnderDelivery {
                index,
                expected_bits: got,
                required: need,
            });
        }
    }
    for slot in 1..=horizon {
        if slot_power[slot] > params.p_bar_w * (1.0 + 1e-9) {
            out.push(Violation::PowerOverBudget {
                slot,
                power_w: slot_power[slot],
                budget_w: params.p_bar_w,
            });
        }
        let cells = &slot_cells[slot];
        let mut rb_seen = vec![false; stats.n_rb()];
        let mut bs_load = vec![0usize; stats.n_bs()];
        for &(bs, rb) in cells {
            if rb_seen[rb] {
                out.push(Violation::BlockConflict { slot, rb });
            }
            rb_seen[rb] = true;
            bs_load[bs] += 1;
        }
        for (bs, &used) in bs_load.iter().enumerate() {
            if used > strategy.theta {
                out.push(Violation::CapExceeded {
                    slot,
                    bs,
                    used,
                    cap: strategy.theta,
                });
            }
        }
    }
    out
}

/// Evolves the information age from per-slot success indicators.
///
/// `s[t - 1]` says whether an update was declared delivered at slot `t`;
/// `instants` are the sampling times. On success the age resets to the
/// delivered update's actual age `t - t0`, where `t0` is the latest
/// sampling instant before `t`; otherwise it grows by one. The initial
/// sample is fresh, so the age starts at zero. Returns ages for slots
/// `1..=T + 1`.
///
/// # Panics
///
/// Panics when a success is flagged before the first sampling instant
/// has anything in flight.
pub fn aoi_trace(s: &[bool], instants: &[usize]) -> Vec<usize> {
    assert!(!instants.is_empty(), "at least one sampling instant");
    let mut tau = Vec::with_capacity(s.len() + 1);
    tau.push(0usize);
    for t in 1..=s.len() {
        let next = if s[t - 1] {
            let t0 = instants
                .iter()
                .copied()
                .filter(|&i| i < t)
                .max()
                .expect("success at slot {t} with no update in flight");
            t - t0
        } else {
            tau[t - 1] + 1
        };
        tau.push(next);
    }
    tau
}

/// Evaluation of one strategy against drawn channel realizations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub scheme: Scheme,
    pub theta: usize,
    /// Planned energy, watt-slots (equals the realized spend: powers are
    /// precomputed and do not adapt to realizations).
    pub expected_energy: f64,
    pub realized_energy_median: f64,
    /// `(lower quartile, upper quartile)` of realized energy over runs.
    pub realized_energy_iqr: (f64, f64),
    /// Mean over runs of the fraction of slots whose age stays within
    /// the limit.
    pub aoi_success_rate: f64,
    /// Mean over runs of the fraction of intervals whose update arrived
    /// within its interval.
    pub interval_success_rate: f64,
    /// Mean realized bits per interval over runs (full-interval totals,
    /// not stopped at delivery).
    pub interval_realized_mean: Vec<f64>,
    /// Number of (station, block, slot) assignments in the strategy.
    pub rb_total: u64,
    pub runs: usize,
    pub seed: u64,
    /// Per-run age series (slots `1..=T + 1`) when requested.
    pub per_run_traces: Option<Vec<Vec<usize>>>,
}

struct RunResult {
    slot_fraction: f64,
    interval_fraction: f64,
    interval_bits: Vec<f64>,
    trace: Option<Vec<usize>>,
}

/// Replays `strategy` against `n_runs` independent channel realizations.
///
/// Each run draws one gain per assigned (station, block, slot) cell from
/// its Gamma law, on an RNG substream indexed by the run, so results do
/// not depend on evaluation order. Per run: accumulate realized bits per
/// interval, declare delivery at the first slot where the accumulation
/// reaches the interval's requirement, fire the success indicator on the
/// following slot, evolve ages with [`aoi_trace`], score the fraction of
/// slots within the age limit.
pub fn monte_carlo_eval(
    strategy: &Strategy,
    stats: &ChannelStats,
    params: LinkParams,
    age_limit: usize,
    n_runs: usize,
    seed: u64,
    keep_traces: bool,
) -> EvalReport {
    assert!(n_runs >= 1, "at least one run");
    let horizon = strategy.horizon;
    assert_eq!(horizon, stats.horizon(), "strategy and stats horizons");

    let results: Vec<RunResult> = (0..n_runs)
        .into_par_iter()
        .map(|run| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(run as u64 + 1);
            simulate_run(strategy, stats, params, age_limit, keep_traces, &mut rng)
        })
        .collect();

    let n = n_runs as f64;
    let aoi_success_rate = results.iter().map(|r| r.slot_fraction).sum::<f64>() / n;
    let interval_success_rate = results.iter().map(|r| r.interval_fraction).sum::<f64>() / n;
    let mut interval_realized_mean = vec![0.0f64; strategy.plans.len()];
    for r in &results {
        for (acc, &b) in interval_realized_mean.iter_mut().zip(&r.interval_bits) {
            *acc += b;
        }
    }
    for acc in &mut interval_realized_mean {
        *acc /= n;
    }

    // Powers are planned, so every run spends the same energy; the
    // median/IQR machinery stays for the report shape.
    let energies = vec![strategy.energy; n_runs];
    let (median, iqr) = median_iqr(energies);

    EvalReport {
        scheme: strategy.scheme,
        theta: strategy.theta,
        expected_energy: strategy.energy,
        realized_energy_median: median,
        realized_energy_iqr: iqr,
        aoi_success_rate,
        interval_success_rate,
        interval_realized_mean,
        rb_total: strategy.plans.iter().map(|p| p.allocations.len() as u64).sum(),
        runs: n_runs,
        seed,
        per_run_traces: keep_traces.then(|| {
            results.into_iter().map(|r| r.trace.unwrap()).collect()
        }),
    }
}

fn simulate_run(
    strategy: &Strategy,
    stats: &ChannelStats,
    params: LinkParams,
    age_limit: usize,
    keep_trace: bool,
    rng: &mut ChaCha8Rng,
) -> RunResult {
    let horizon = strategy.horizon;
    let mut s = vec![false; horizon];
    let mut interval_bits = Vec::with_capacity(strategy.plans.len());
    let mut completed = 0usize;
    for (plan, &required) in strategy.plans.iter().zip(&strategy.required_bits) {
        let mut acc = 0.0f64;
        let mut done = false;
        let mut idx = 0usize;
        // Allocations are ordered by slot; draw one gain per assignment
        // regardless of completion so changing the requirement never
        // shifts the random stream.
        for t in plan.start..plan.end {
            while idx < plan.allocations.len() && plan.allocations[idx].slot == t {
                let a = &plan.allocations[idx];
                let h = sample_channel_gain(
                    stats.gain(a.bs, a.rb, t - 1),
                    stats.shape(a.bs, a.rb, t - 1),
                    rng,
                );
                acc += realized_capacity(a.power_w, h, params.bandwidth_hz, params.noise_w);
                idx += 1;
            }
            if !done && acc >= required {
                done = true;
                completed += 1;
                if t < horizon {
                    s[t] = true; // indicator fires at slot t + 1
                }
            }
        }
        interval_bits.push(acc);
    }
    let trace = aoi_trace(&s, &strategy.instants);
    let ok = trace[..horizon].iter().filter(|&&a| a <= age_limit).count();
    RunResult {
        slot_fraction: ok as f64 / horizon as f64,
        interval_fraction: completed as f64 / strategy.plans.len() as f64,
        interval_bits,
        trace: keep_trace.then_some(trace),
    }
}

fn median_iqr(mut values: Vec<f64>) -> (f64, (f64, f64)) {
    values.sort_by(f64::total_cmp);
    let q = |frac: f64| -> f64 {
        let pos = frac * (values.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        let w = pos - lo as f64;
        values[lo] * (1.0 - w) + values[hi] * w
    };
    (q(0.5), (q(0.25), q(0.75)))
}

/// Recomputes `(theta_used, energy, rb_total)` from the raw allocation
/// tables: the worst per-station block load actually used in any slot,
/// the summed transmit energy, and the number of block assignments.
pub fn account(strategy: &Strategy) -> (usize, f64, u64) {
    let mut loads: std::collections::HashMap<(usize, usize), usize> = std::collections::HashMap::new();
    let mut energy = 0.0f64;
    let mut rb_total = 0u64;
    for plan in &strategy.plans {
        for a in &plan.allocations {
            *loads.entry((a.slot, a.bs)).or_insert(0) += 1;
            energy += a.power_w;
            rb_total += 1;
        }
    }
    let theta_used = loads.values().copied().max().unwrap_or(0);
    (theta_used, energy, rb_total)
}

/// Draws a random admissible schedule, choosing uniformly at every
/// instant among the gap lengths whose interval can carry the target,
/// and plans each interval optimally at the solver's cap. `None` when
/// the walk dead-ends at an instant where no admissible gap fits; such
/// samples are simply rejected.
pub fn sample_feasible_strategy<R: Rng + ?Sized>(
    solver: &Solver,
    age_limit: usize,
    target: f64,
    rng: &mut R,
) -> Option<Strategy> {
    let horizon = solver.stats().horizon();
    let terminal = horizon + 1;
    let mut instants = vec![1usize];
    let mut v = 1usize;
    while v < terminal {
        let widest = age_limit.min(terminal - v);
        // Slot ceilings add up across the interval, so the lengths that
        // can carry the target form a suffix of `1..=widest`.
        let c_min = (1..=widest).find(|&c| solver.max_bits(v, v + c) >= target)?;
        let gap = rng.gen_range(c_min..=widest);
        v += gap;
        if v < terminal {
            instants.push(v);
        }
    }
    let mut plans: Vec<Plan> = Vec::with_capacity(instants.len());
    for (i, &start) in instants.iter().enumerate() {
        let end = instants.get(i + 1).copied().unwrap_or(terminal);
        match solver.solve(start, end, target) {
            Outcome::Feasible(plan) => plans.push(plan),
            Outcome::Infeasible { .. } => return None,
        }
    }
    let required = vec![target; plans.len()];
    Some(Strategy::new(
        Scheme::Proposed,
        solver.theta(),
        horizon,
        instants,
        plans,
        required,
    ))
}
