//! Energy/load trade-off planning for timely UAV status updates.
//!
//! A UAV streams status updates to ground base stations over a slotted,
//! resource-block-structured uplink whose per-link fading statistics are
//! known ahead of time. Keeping the data fresh (every inter-sample gap
//! bounded, every update delivered within its gap) while spending little
//! transmit energy and borrowing few resource blocks from the terrestrial
//! network are competing goals. This crate computes the exact Pareto
//! frontier between the per-station resource-block load cap and the total
//! transmit energy:
//!
//! * [`channel`] evaluates expected link capacity under Gamma-distributed
//!   small-scale fading by Gauss-Laguerre quadrature,
//! * [`interval`] finds the cheapest power/assignment plan delivering a
//!   bit target inside one inter-sample interval (a convex program solved
//!   by dual bisection with exact per-slot matching),
//! * [`graph`] turns sampling control into a shortest-path problem on a
//!   DAG of candidate sampling instants,
//! * [`pareto`] sweeps the load cap and assembles the frontier,
//! * [`baselines`] implements three reference schemes for comparison,
//! * [`eval`] audits plans against every constraint and replays them
//!   against Monte Carlo channel realizations,
//! * [`scenario`] synthesizes reproducible urban-microcell scenarios,
//! * [`cli`] exposes all of the above as a command-line tool.
//!
//! The long-form guide in `book/` walks through the model and the solver
//! layer by layer; its code snippets compile and run as doc-tests via the
//! [`guide`] module.

pub mod baselines;
pub mod channel;
pub mod cli;
pub mod eval;
pub mod graph;
pub mod interval;
pub mod pareto;
pub mod scenario;
pub mod strategy;
pub mod units;
