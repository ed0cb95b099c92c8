//! Operating strategies: when to sample, and the delivery plan for each
//! inter-sample interval.
//!
//! A strategy is a strictly increasing list of sampling instants starting
//! at slot 1, together with one [`Plan`] per interval. The interval after
//! instant `instants[i]` ends at `instants[i + 1]`, and the last one ends
//! at the virtual terminal `horizon + 1`. Freshness demands every
//! interval be short (at most the age limit) and every plan deliver its
//! required bits; [`crate::eval::audit_strategy`] checks both, so
//! constructors here only enforce structural shape.

use serde::{Deserialize, Serialize};

use crate::interval::Plan;

/// Which planner produced a strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Two-layer planner: optimal sampling instants over per-interval
    /// minimum-energy plans.
    Proposed,
    /// Transmit every slot, carrying an equal share of the target.
    Instantaneous,
    /// One delivery program for the whole horizon, freshness ignored.
    Average,
    /// Fixed sampling grid at the age limit, each update planned alone.
    Periodic,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Proposed => "proposed",
            Scheme::Instantaneous => "instantaneous",
            Scheme::Average => "average",
            Scheme::Periodic => "periodic",
        }
    }

    pub fn all() -> [Scheme; 4] {
        [
            Scheme::Proposed,
            Scheme::Instantaneous,
            Scheme::Average,
            Scheme::Periodic,
        ]
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A complete schedule over the horizon: sampling instants (one-based,
/// first is 1) and the delivery plan of every interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Strategy {
    pub scheme: Scheme,
    pub theta: usize,
    pub horizon: usize,
    /// Sampling instants; `instants[0] == 1`, strictly increasing.
    pub instants: Vec<usize>,
    /// `plans[i]` covers `instants[i] .. instants[i + 1]` (or
    /// `horizon + 1` for the last).
    pub plans: Vec<Plan>,
    /// Expected bits each interval must deliver, same length as `plans`.
    pub required_bits: Vec<f64>,
    /// Total transmit energy, watt-slots.
    pub energy: f64,
}

impl Strategy {
    /// Assembles a strategy from instants and aligned plans.
    ///
    /// # Panics
    ///
    /// Panics when shapes disagree: instants not starting at 1 or not
    /// strictly increasing, plan boundaries not matching the instants, or
    /// length mismatches. Constraint violations (long gaps, missed bits)
    /// are deliberately not checked here; auditing reports those.
    pub fn new(
        scheme: Scheme,
        theta: usize,
        horizon: usize,
        instants: Vec<usize>,
        plans: Vec<Plan>,
        required_bits: Vec<f64>,
    ) -> Self {
        assert!(!instants.is_empty(), "a strategy samples at least once");
        assert_eq!(instants[0], 1, "the first sample is taken at slot 1");
        assert!(
            instants.windows(2).all(|w| w[0] < w[1]),
            "instants must increase strictly"
        );
        assert!(
            *instants.last().unwrap() <= horizon,
            "instants must lie within the horizon"
        );
        assert_eq!(plans.len(), instants.len(), "one plan per interval");
        assert_eq!(required_bits.len(), plans.len());
        for (i, plan) in plans.iter().enumerate() {
            let end = instants.get(i + 1).copied().unwrap_or(horizon + 1);
            assert_eq!(plan.start, instants[i], "plan {i} start");
            assert_eq!(plan.end, end, "plan {i} end");
        }
        let energy = plans.iter().map(|p| p.energy).sum();
        Strategy {
            scheme,
            theta,
            horizon,
            instants,
            plans,
            required_bits,
            energy,
        }
    }

    /// Interval boundaries as `(start, end)` pairs, `end` exclusive; the
    /// last interval ends at `horizon + 1`.
    pub fn intervals(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.instants.iter().copied().zip(
            self.instants
                .iter()
                .copied()
                .skip(1)
                .chain(std::iter::once(self.horizon + 1)),
        )
    }

    /// The longest interval length, the worst case for information age.
    pub fn max_gap(&self) -> usize {
        self.intervals().map(|(a, b)| b - a).max().unwrap()
    }
}
