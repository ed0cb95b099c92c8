//! Minimum-energy delivery of a bit target within one inter-sample
//! interval.
//!
//! Given the slots between two sampling instants, the solver picks, per
//! slot, which (station, block) cells transmit and at what power, so that
//! the total expected bits reach a target at minimum total energy. The
//! constraints are a per-slot transmit power budget, a per-station block
//! cap `theta`, and exclusive use of each block within a slot.
//!
//! The program is convex in the powers once the assignment is fixed, and
//! the assignment itself is priced out through Lagrange duality: at dual
//! price `rho` every cell independently maximizes `bits(p) - rho * p`,
//! and a maximum-weight matching picks which cells are worth running.
//! Two nested scalar searches close the loop:
//!
//! * per slot, the price at which the optimal allocation exactly spends
//!   the power budget (`rho_pow`, cached; prices below it are clamped),
//! * across the interval, the bits multiplier `lambda` whose effective
//!   prices `max(1/lambda, rho_pow[t])` deliver the target.
//!
//! Because the matching makes total bits jump at isolated prices, a final
//! power-only pass re-solves on the frozen assignment, where bits are
//! continuous in `lambda`, and lands within `TARGET_BAND` of the target.

pub mod matching;

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::channel::{CellKernel, ChannelStats, LinkParams, quad};

/// Relative overshoot allowed on delivered expected bits.
pub const TARGET_BAND: f64 = 1e-9;

/// Shrinks a bracket around the root of a decreasing function until it
/// is narrower than `rel_tol * hi`, by false position with Illinois
/// damping (the retained end's value is halved when the same end loses
/// twice in a row, and any step outside the bracket falls back to its
/// midpoint). Requires `f(lo) > 0 >= f(hi)` with the end values passed
/// in, so callers reuse evaluations from bracketing loops. Returns the
/// final bracket; the caller picks the side its contract needs.
fn shrink_bracket(
    mut f: impl FnMut(f64) -> f64,
    mut lo: f64,
    mut f_lo: f64,
    mut hi: f64,
    mut f_hi: f64,
    rel_tol: f64,
) -> (f64, f64) {
    debug_assert!(lo < hi && f_lo > 0.0 && f_hi <= 0.0);
    let mut last_kept = 0i8;
    for _ in 0..200 {
        if hi - lo <= rel_tol * hi {
            break;
        }
        let denom = f_lo - f_hi;
        let mut x = if denom > 0.0 {
            lo + (hi - lo) * f_lo / denom
        } else {
            0.5 * (lo + hi)
        };
        if !(x > lo && x < hi) {
            x = 0.5 * (lo + hi);
        }
        let fx = f(x);
        if fx > 0.0 {
            lo = x;
            f_lo = fx;
            if last_kept == 1 {
                f_hi *= 0.5;
            }
            last_kept = 1;
        } else {
            hi = x;
            f_hi = fx;
            if last_kept == -1 {
                f_lo *= 0.5;
            }
            last_kept = -1;
        }
    }
    (lo, hi)
}

/// One transmitting cell in a finished plan. `slot` is the absolute
/// one-based slot index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    pub slot: usize,
    pub bs: usize,
    pub rb: usize,
    pub power_w: f64,
    pub bits: f64,
}

/// Minimum-energy plan for one interval: transmit during slots
/// `start..end` (one-based sampling instants, `end` exclusive).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub start: usize,
    pub end: usize,
    /// Total transmit energy in watt-slots.
    pub energy: f64,
    /// Total expected bits, within `[target, target * (1 + TARGET_BAND)]`.
    pub bits: f64,
    pub allocations: Vec<Allocation>,
}

/// Result of one interval solve.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Feasible(Plan),
    /// The target exceeds what the interval can carry even at full
    /// per-slot power; `max_bits` is that ceiling.
    Infeasible { max_bits: f64 },
}

impl Outcome {
    pub fn plan(&self) -> Option<&Plan> {
        match self {
            Outcome::Feasible(p) => Some(p),
            Outcome::Infeasible { .. } => None,
        }
    }
}

/// One slot's priced allocation: the matched cells with their optimal
/// powers and expected bits at some dual price.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotEval {
    /// Matched cells `(bs, rb, power_w, bits)`, sorted by station then
    /// block.
    pub cells: Vec<(usize, usize, f64, f64)>,
    pub bits: f64,
    pub power_w: f64,
}

#[derive(Debug, Clone)]
struct SlotCap {
    /// Smallest price at which the slot's optimal allocation fits the
    /// power budget.
    rho_pow: f64,
    /// The allocation at that price; its bits are the slot's throughput
    /// ceiling.
    eval: SlotEval,
}

/// Interval solver for a fixed per-station block cap. Construction
/// precomputes quadrature kernels for every (slot, station, block) cell;
/// per-slot budget prices are found lazily and cached, so a solver is
/// cheap to share across many interval solves (shared references are
/// thread-safe).
pub struct Solver<'a> {
    stats: &'a ChannelStats,
    params: LinkParams,
    theta: usize,
    kernels: Vec<CellKernel>,
    /// Capacity slope at zero power, same layout as `kernels`.
    d0: Vec<f64>,
    /// High-SNR capacity intercept, same layout; seeds price searches.
    d0_geo: Vec<f64>,
    /// Per-slot maximum of `d0`: prices at or above it shut the slot off.
    d0_slot: Vec<f64>,
    caps: Vec<OnceLock<SlotCap>>,
}

impl<'a> Solver<'a> {
    pub fn new(stats: &'a ChannelStats, params: LinkParams, theta: usize) -> Self {
        params.validate();
        assert!(theta >= 1, "block cap must be at least one");
        let (nb, nr, t_len) = (stats.n_bs(), stats.n_rb(), stats.horizon());
        let mut kernels = Vec::with_capacity(t_len * nb * nr);
        let mut d0 = Vec::with_capacity(t_len * nb * nr);
        let mut d0_geo = Vec::with_capacity(t_len * nb * nr);
        let mut d0_slot = vec![0.0f64; t_len];
        for t in 0..t_len {
            for n in 0..nb {
                for k in 0..nr {
                    let kern = CellKernel::new(
                        quad::rule_for(stats.shape(n, k, t)),
                        stats.gain(n, k, t),
                        params.noise_w,
                    );
                    let slope = kern.capacity_derivative(0.0, params.bandwidth_hz);
                    d0_slot[t] = d0_slot[t].max(slope);
                    d0.push(slope);
                    d0_geo.push(kern.high_snr_intercept(params.bandwidth_hz));
                    kernels.push(kern);
                }
            }
        }
        let caps = (0..t_len).map(|_| OnceLock::new()).collect();
        Solver {
            stats,
            params,
            theta,
            kernels,
            d0,
            d0_geo,
            d0_slot,
            caps,
        }
    }

    pub fn theta(&self) -> usize {
        self.theta
    }

    pub fn params(&self) -> LinkParams {
        self.params
    }

    pub fn stats(&self) -> &'a ChannelStats {
        self.stats
    }

    #[inline]
    fn cell(&self, t: usize, n: usize, k: usize) -> usize {
        (t * self.stats.n_bs() + n) * self.stats.n_rb() + k
    }

    /// Power maximizing `bits(p) - rho * p` for one cell, with the bits
    /// it earns. Zero when the price is above the capacity slope at the
    /// origin; otherwise the root of the capacity derivative.
    fn cell_opt(&self, idx: usize, rho: f64) -> (f64, f64) {
        debug_assert!(rho > 0.0);
        // The dust band keeps the bracket below strictly positive: at a
        // price this close to the zero-power slope the optimal power
        // earns no representable bits.
        if self.d0[idx] <= rho * (1.0 + 1e-12) {
            return (0.0, 0.0);
        }
        let kern = &self.kernels[idx];
        let bw = self.params.bandwidth_hz;
        // The fading-averaged derivative lies below the derivative of the
        // mean channel (the average of a concave map of the draw), and
        // both share the slope at zero, so the mean channel's inverse
        // brackets the root from above.
        let mut hi = bw / std::f64::consts::LN_2 * (1.0 / rho - 1.0 / self.d0[idx]);
        let mut f_hi = kern.capacity_derivative(hi, bw) - rho;
        let mut grow = 0;
        while f_hi > 0.0 {
            hi *= 2.0;
            f_hi = kern.capacity_derivative(hi, bw) - rho;
            grow += 1;
            assert!(grow < 200, "power bracket did not close at price {rho}");
        }
        let (lo, hi) = shrink_bracket(
            |p| kern.capacity_derivative(p, bw) - rho,
            0.0,
            self.d0[idx] - rho,
            hi,
            f_hi,
            1e-10,
        );
        let p = 0.5 * (lo + hi);
        (p, kern.capacity(p, bw))
    }

    /// Optimal allocation of slot `t` (zero-based) at dual price `rho`:
    /// per-cell power optimization, then a maximum-weight matching over
    /// the cells whose score is strictly positive.
    pub fn eval_slot(&self, t: usize, rho: f64) -> SlotEval {
        let (nb, nr) = (self.stats.n_bs(), self.stats.n_rb());
        let mut scores = vec![0.0f64; nb * nr];
        let mut opt = vec![(0.0f64, 0.0f64); nb * nr];
        for n in 0..nb {
            for k in 0..nr {
                let (p, bits) = self.cell_opt(self.cell(t, n, k), rho);
                if p > 0.0 {
                    let s = bits - rho * p;
                    if s > 0.0 {
                        scores[n * nr + k] = s;
                        opt[n * nr + k] = (p, bits);
                    }
                }
            }
        }
        let matched = matching::max_weight_assignment(&scores, nb, nr, self.theta);
        let mut cells = Vec::with_capacity(matched.len());
        let (mut bits, mut power) = (0.0, 0.0);
        for (n, k) in matched {
            let (p, b) = opt[n * nr + k];
            bits += b;
            power += p;
            cells.push((n, k, p, b));
        }
        SlotEval {
            cells,
            bits,
            power_w: power,
        }
    }

    /// Budget price and ceiling allocation of slot `t`, computed once.
    fn slot_cap(&self, t: usize) -> &SlotCap {
        self.caps[t].get_or_init(|| {
            let p_bar = self.params.p_bar_w;
            // Water-filling over every cell of the slot under the
            // high-SNR capacity model prices the budget to within the
            // model error; the probes below sort out which side of the
            // true budget price the seed landed on.
            let cells_per_slot = self.stats.n_bs() * self.stats.n_rb();
            let mut slopes = self.d0_geo[t * cells_per_slot..(t + 1) * cells_per_slot].to_vec();
            slopes.sort_unstable_by(|a, b| b.total_cmp(a));
            let spend_rate = p_bar * std::f64::consts::LN_2 / self.params.bandwidth_hz;
            let mut inv_sum = 0.0;
            let mut seed = self.d0_slot[t];
            for (m, &s) in slopes.iter().enumerate() {
                inv_sum += 1.0 / s;
                let cand = (m + 1) as f64 / (spend_rate + inv_sum);
                if m + 1 == slopes.len() || cand >= slopes[m + 1] {
                    seed = cand;
                    break;
                }
            }
            let mut hi = seed;
            let mut f_hi = self.eval_slot(t, hi).power_w - p_bar;
            let (lo, f_lo, hi, f_hi) = if f_hi > 0.0 {
                // Quadrature dust pushed the seed across; no cell runs
                // at the top slope, so the budget holds there.
                (hi, f_hi, self.d0_slot[t], -p_bar)
            } else {
                let mut lo = 0.5 * hi;
                let mut f_lo = self.eval_slot(t, lo).power_w - p_bar;
                let mut halvings = 0;
                while f_lo <= 0.0 {
                    hi = lo;
                    f_hi = f_lo;
                    lo *= 0.5;
                    f_lo = self.eval_slot(t, lo).power_w - p_bar;
                    halvings += 1;
                    assert!(
                        halvings < 600,
                        "slot {t}: power stays under budget down to price {lo:e}"
                    );
                }
                (lo, f_lo, hi, f_hi)
            };
            let (_, hi) = shrink_bracket(
                |rho| self.eval_slot(t, rho).power_w - p_bar,
                lo,
                f_lo,
                hi,
                f_hi,
                1e-9,
            );
            SlotCap {
                rho_pow: hi,
                eval: self.eval_slot(t, hi),
            }
        })
    }

    /// Slot allocation at bits multiplier `lambda`, with the price
    /// clamped so the power budget holds.
    fn eval_effective(&self, t: usize, lambda: f64) -> SlotEval {
        let cap = self.slot_cap(t);
        let inv = 1.0 / lambda;
        if inv > cap.rho_pow {
            self.eval_slot(t, inv)
        } else {
            cap.eval.clone()
        }
    }

    /// Expected-bit ceiling of the interval: every slot at full budget.
    /// A target is deliverable precisely when it does not exceed this.
    pub fn max_bits(&self, start: usize, end: usize) -> f64 {
        self.check_span(start, end);
        (start - 1..end - 1).map(|t| self.slot_cap(t).eval.bits).sum()
    }

    fn check_span(&self, start: usize, end: usize) {
        assert!(
            start >= 1 && start < end && end <= self.stats.horizon() + 1,
            "interval [{start}, {end}) out of range for horizon {}",
            self.stats.horizon()
        );
    }

    /// Cheapest plan delivering `target` expected bits over slots
    /// `start..end` (one-based instants, `end` exclusive), or the
    /// interval's ceiling if the target is out of reach.
    pub fn solve(&self, start: usize, end: usize, target: f64) -> Outcome {
        self.check_span(start, end);
        assert!(target.is_finite() && target > 0.0, "bit target {target}");
        let slots: Vec<usize> = (start - 1..end - 1).collect();
        let max_bits: f64 = slots.iter().map(|&t| self.slot_cap(t).eval.bits).sum();
        if max_bits < target {
            return Outcome::Infeasible { max_bits };
        }
        if max_bits <= target * (1.0 + TARGET_BAND) {
            // The budget binds in every slot; the ceiling allocation is
            // the only plan that reaches the target.
            let evals: Vec<SlotEval> = slots
                .iter()
                .map(|&t| self.slot_cap(t).eval.clone())
                .collect();
            return Outcome::Feasible(self.assemble(start, end, &slots, &evals));
        }

        // Seed the bits multiplier from the high-SNR relaxation: a cell
        // earns about `B*log2(d0_geo/rho)` bits at price `rho`, so
        // water-filling each slot's top cells onto the target prices the
        // interval to within a few probes; the branches below sort out
        // which side of the target the seed landed on.
        let cells_per_slot = self.stats.n_bs() * self.stats.n_rb();
        let m_cap = self.stats.n_rb().min(self.stats.n_bs() * self.theta);
        let mut cand: Vec<f64> = Vec::with_capacity(slots.len() * m_cap);
        let mut top = Vec::with_capacity(cells_per_slot);
        for &t in &slots {
            top.clear();
            top.extend_from_slice(&self.d0_geo[t * cells_per_slot..(t + 1) * cells_per_slot]);
            top.sort_unstable_by(|a, b| b.total_cmp(a));
            cand.extend_from_slice(&top[..m_cap]);
        }
        cand.sort_unstable_by(|a, b| b.total_cmp(a));
        let bits_rate = target * std::f64::consts::LN_2 / self.params.bandwidth_hz;
        let mut ln_sum = 0.0;
        let mut rho_seed = cand[0];
        for (m, &s) in cand.iter().enumerate() {
            ln_sum += s.ln();
            let r = ((ln_sum - bits_rate) / (m + 1) as f64).exp();
            if m + 1 == cand.len() || r >= cand[m + 1] {
                rho_seed = r;
                break;
            }
        }
        let mut lam_hi = 1.0 / rho_seed;
        let mut bits_hi = self.bits_at(&slots, lam_hi);
        let (mut lam_lo, mut bits_lo) = (0.0f64, 0.0f64);
        if bits_hi < target {
            let mut grow = 0;
            while bits_hi < target {
                lam_lo = lam_hi;
                bits_lo = bits_hi;
                lam_hi *= 2.0;
                bits_hi = self.bits_at(&slots, lam_hi);
                grow += 1;
                assert!(grow < 200, "bits multiplier bracket did not close");
            }
        } else {
            // The seed already delivers; one probe tightens the bracket.
            let probe = 0.25 * lam_hi;
            let b = self.bits_at(&slots, probe);
            if b >= target {
                lam_hi = probe;
                bits_hi = b;
            } else {
                lam_lo = probe;
                bits_lo = b;
            }
        }
        let (_, lam_hi) = shrink_bracket(
            |lam| target - self.bits_at(&slots, lam),
            lam_lo,
            target - bits_lo,
            lam_hi,
            target - bits_hi,
            1e-9,
        );

        // Freeze the assignment found at the feasible end of the bracket
        // and re-run the scalar search on powers alone, where bits are
        // continuous in lambda and the target band is reachable.
        let frozen: Vec<Vec<(usize, usize)>> = slots
            .iter()
            .map(|&t| {
                self.eval_effective(t, lam_hi)
                    .cells
                    .iter()
                    .map(|&(n, k, _, _)| (n, k))
                    .collect()
            })
            .collect();
        // Per-slot price floors keeping the frozen search under budget.
        // Slots that froze their ceiling cells keep the ceiling price as
        // the floor; all others held the budget at `1/lam_hi` already,
        // and the search below only raises prices from there, so they
        // need no floor. Reusing the ceiling price (rather than solving
        // for a fresh one) also makes the frozen evaluation at `lam_hi`
        // reproduce the bracketed bits exactly.
        let rho_pow: Vec<f64> = slots
            .iter()
            .zip(&frozen)
            .map(|(&t, cells)| {
                let cap = self.slot_cap(t);
                let same_cells = cap.eval.cells.len() == cells.len()
                    && cap.eval.cells.iter().zip(cells).all(|(a, b)| (a.0, a.1) == *b);
                if same_cells { cap.rho_pow } else { 0.0 }
            })
            .collect();
        let eval_frozen = |lam: f64| -> Vec<SlotEval> {
            let inv = 1.0 / lam;
            slots
                .iter()
                .zip(&frozen)
                .zip(&rho_pow)
                .map(|((&t, cells), &rp)| self.eval_cells(t, cells, inv.max(rp)))
                .collect()
        };
        let mut hi = lam_hi;
        let mut lo = 0.0f64;
        // Bits vanish as lambda drops to zero, so the low end starts at
        // the full target without an evaluation.
        let mut f_lo = target;
        let mut evals = eval_frozen(hi);
        let mut bits_hi: f64 = evals.iter().map(|e| e.bits).sum();
        assert!(
            bits_hi >= target,
            "frozen assignment lost bits: {bits_hi} < {target}"
        );
        let mut f_hi_damp = target - bits_hi;
        let mut last_kept = 0i8;
        for _ in 0..200 {
            if bits_hi <= target * (1.0 + TARGET_BAND) {
                break;
            }
            let denom = f_lo - f_hi_damp;
            let mut x = if denom > 0.0 {
                lo + (hi - lo) * f_lo / denom
            } else {
                0.5 * (lo + hi)
            };
            if !(x > lo && x < hi) {
                x = 0.5 * (lo + hi);
            }
            let cand = eval_frozen(x);
            let b: f64 = cand.iter().map(|e| e.bits).sum();
            if b >= target {
                hi = x;
                evals = cand;
                bits_hi = b;
                f_hi_damp = target - b;
                if last_kept == -1 {
                    f_lo *= 0.5;
                }
                last_kept = -1;
            } else {
                lo = x;
                f_lo = target - b;
                if last_kept == 1 {
                    f_hi_damp *= 0.5;
                }
                last_kept = 1;
            }
        }
        Outcome::Feasible(self.assemble(start, end, &slots, &evals))
    }

    /// Total expected bits across `slots` at bits multiplier `lambda`.
    fn bits_at(&self, slots: &[usize], lambda: f64) -> f64 {
        slots
            .iter()
            .map(|&t| self.eval_effective(t, lambda).bits)
            .sum()
    }

    /// Power-optimal allocation of a frozen cell set at price `rho`.
    fn eval_cells(&self, t: usize, cells: &[(usize, usize)], rho: f64) -> SlotEval {
        let mut out = Vec::with_capacity(cells.len());
        let (mut bits, mut power) = (0.0, 0.0);
        for &(n, k) in cells {
            let (p, b) = self.cell_opt(self.cell(t, n, k), rho);
            bits += b;
            power += p;
            out.push((n, k, p, b));
        }
        SlotEval {
            cells: out,
            bits,
            power_w: power,
        }
    }

    fn assemble(&self, start: usize, end: usize, slots: &[usize], evals: &[SlotEval]) -> Plan {
        let mut allocations = Vec::new();
        let (mut energy, mut bits) = (0.0, 0.0);
        for (&t, eval) in slots.iter().zip(evals) {
            debug_assert!(
                eval.power_w <= self.params.p_bar_w * (1.0 + 1e-9),
                "slot {t} over budget: {} > {}",
                eval.power_w,
                self.params.p_bar_w
            );
            for &(n, k, p, b) in &eval.cells {
                if p > 0.0 {
                    allocations.push(Allocation {
                        slot: t + 1,
                        bs: n,
                        rb: k,
                        power_w: p,
                        bits: b,
                    });
                }
            }
            energy += eval.power_w;
            bits += eval.bits;
        }
        Plan {
            start,
            end,
            energy,
            bits,
            allocations,
        }
    }
}
