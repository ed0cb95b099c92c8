//! Predicted channel statistics and expected-capacity evaluation.
//!
//! Each (base station, resource block, slot) link is described by the
//! mean gain `g` of its Gamma-distributed small-scale fading and the
//! shape `kappa` (unit-mean fading scaled by the large-scale gain, i.e.
//! `h ~ Gamma(kappa, g/kappa)`). The planner never sees realizations,
//! only the expected Shannon capacity
//!
//! ```text
//!   C(p) = E[ B * log2(1 + p*h / noise) ]
//! ```
//!
//! and its derivative in transmit power `p`, both evaluated by the cached
//! Gauss-Laguerre rules in [`quad`]. `C` is strictly concave and strictly
//! increasing in `p` with `C(0) = 0`, which the allocator's dual search
//! relies on.
//!
//! # Example
//!
//! ```
//! use skyfront::channel::{expected_capacity, realized_capacity};
//!
//! let (g, kappa) = (1e-9, 4.0);
//! let (bw, noise) = (180e3, 3.6e-15);
//! let fading_aware = expected_capacity(0.05, g, kappa, bw, noise);
//! let fading_blind = realized_capacity(0.05, g, bw, noise);
//! // Jensen: averaging inside the log overstates what fading delivers.
//! assert!(fading_aware < fading_blind);
//! ```

pub mod quad;

use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use quad::{GammaRule, NODES};

const INV_LN_2: f64 = std::f64::consts::LOG2_E;

/// Predicted per-link fading statistics over a horizon, indexed by
/// (base station `n`, resource block `k`, slot `t`), all zero-based.
/// Slots are numbered 1..=T at the API boundary; the offset is applied
/// by callers that deal in sampling instants.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(into = "RawStats", try_from = "RawStats")]
pub struct ChannelStats {
    n_bs: usize,
    n_rb: usize,
    horizon: usize,
    /// Mean gains, row-major `[n][k][t]`, linear scale.
    g: Vec<f64>,
    /// Gamma shapes, row-major `[n][k][t]`.
    kappa: Vec<f64>,
}

impl ChannelStats {
    /// Builds stats from dense row-major `[n][k][t]` tables.
    ///
    /// # Panics
    ///
    /// Panics when dimensions are empty or inconsistent, a gain is not
    /// finite and positive, or a shape is below 0.5 (the quadrature
    /// construction needs the Gamma weight exponent above -0.5).
    pub fn new(n_bs: usize, n_rb: usize, horizon: usize, g: Vec<f64>, kappa: Vec<f64>) -> Self {
        match Self::try_new(n_bs, n_rb, horizon, g, kappa) {
            Ok(stats) => stats,
            Err(why) => panic!("{why}"),
        }
    }

    /// Fallible variant of [`ChannelStats::new`] for deserialized input.
    pub fn try_new(
        n_bs: usize,
        n_rb: usize,
        horizon: usize,
        g: Vec<f64>,
        kappa: Vec<f64>,
    ) -> Result<Self, String> {
        if n_bs == 0 || n_rb == 0 || horizon == 0 {
            return Err("empty stats dimensions".into());
        }
        let len = n_bs * n_rb * horizon;
        if g.len() != len {
            return Err(format!("gain table length {} != {len}", g.len()));
        }
        if kappa.len() != len {
            return Err(format!("shape table length {} != {len}", kappa.len()));
        }
        for (i, &v) in g.iter().enumerate() {
            if !(v.is_finite() && v > 0.0) {
                return Err(format!("gain[{i}] = {v} must be positive"));
            }
        }
        for (i, &v) in kappa.iter().enumerate() {
            if !(v.is_finite() && v >= 0.5) {
                return Err(format!("shape[{i}] = {v} must be >= 0.5"));
            }
        }
        Ok(ChannelStats {
            n_bs,
            n_rb,
            horizon,
            g,
            kappa,
        })
    }

    pub fn n_bs(&self) -> usize {
        self.n_bs
    }

    pub fn n_rb(&self) -> usize {
        self.n_rb
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    #[inline]
    fn idx(&self, n: usize, k: usize, t: usize) -> usize {
        debug_assert!(n < self.n_bs && k < self.n_rb && t < self.horizon);
        (n * self.n_rb + k) * self.horizon + t
    }

    /// Mean gain of link (n, k, t), zero-based indices.
    #[inline]
    pub fn gain(&self, n: usize, k: usize, t: usize) -> f64 {
        self.g[self.idx(n, k, t)]
    }

    /// Gamma shape of link (n, k, t), zero-based indices.
    #[inline]
    pub fn shape(&self, n: usize, k: usize, t: usize) -> f64 {
        self.kappa[self.idx(n, k, t)]
    }

    pub fn gains(&self) -> &[f64] {
        &self.g
    }

    pub fn shapes(&self) -> &[f64] {
        &self.kappa
    }
}

/// Wire form of [`ChannelStats`]: dense tables plus an explicit layout
/// tag so files are self-describing.
#[derive(serde::Serialize, serde::Deserialize)]
struct RawStats {
    n_bs: usize,
    n_rb: usize,
    horizon: usize,
    order: String,
    g: Vec<f64>,
    kappa: Vec<f64>,
}

const STATS_ORDER: &str = "[n][k][t]";

impl From<ChannelStats> for RawStats {
    fn from(s: ChannelStats) -> RawStats {
        RawStats {
            n_bs: s.n_bs,
            n_rb: s.n_rb,
            horizon: s.horizon,
            order: STATS_ORDER.to_string(),
            g: s.g,
            kappa: s.kappa,
        }
    }
}

impl TryFrom<RawStats> for ChannelStats {
    type Error = String;

    fn try_from(raw: RawStats) -> Result<ChannelStats, String> {
        if raw.order != STATS_ORDER {
            return Err(format!(
                "unsupported table order {:?}, expected {STATS_ORDER:?}",
                raw.order
            ));
        }
        ChannelStats::try_new(raw.n_bs, raw.n_rb, raw.horizon, raw.g, raw.kappa)
    }
}

/// Static radio parameters shared by every solver call on a scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkParams {
    /// Bandwidth of one resource block, Hz.
    pub bandwidth_hz: f64,
    /// Noise power per resource block, watts.
    pub noise_w: f64,
    /// Per-slot transmit power budget across all blocks, watts.
    pub p_bar_w: f64,
}

impl LinkParams {
    pub fn validate(&self) {
        assert!(
            self.bandwidth_hz > 0.0 && self.noise_w > 0.0 && self.p_bar_w > 0.0,
            "link parameters must be positive: {self:?}"
        );
    }
}

/// Expected capacity `E[B*log2(1 + p*h/noise)]` in bits per slot for
/// `h ~ Gamma(kappa, g/kappa)`.
///
/// # Panics
///
/// Panics on negative power or non-positive gain/bandwidth/noise.
pub fn expected_capacity(p_w: f64, g: f64, kappa: f64, bandwidth_hz: f64, noise_w: f64) -> f64 {
    let kernel = CellKernel::new(quad::rule_for(kappa), g, noise_w);
    kernel.capacity(p_w, bandwidth_hz)
}

/// Derivative of [`expected_capacity`] in the power argument:
/// `(B/ln 2) * E[(h/noise) / (1 + p*h/noise)]`.
pub fn expected_capacity_derivative(
    p_w: f64,
    g: f64,
    kappa: f64,
    bandwidth_hz: f64,
    noise_w: f64,
) -> f64 {
    let kernel = CellKernel::new(quad::rule_for(kappa), g, noise_w);
    kernel.capacity_derivative(p_w, bandwidth_hz)
}

/// Capacity for one realized gain: `B*log2(1 + p*h/noise)`.
pub fn realized_capacity(p_w: f64, h: f64, bandwidth_hz: f64, noise_w: f64) -> f64 {
    assert!(p_w >= 0.0 && h >= 0.0);
    bandwidth_hz * (p_w * h / noise_w).ln_1p() * INV_LN_2
}

/// Draws one gain realization `h ~ Gamma(kappa, g/kappa)` (mean `g`).
pub fn sample_channel_gain<R: Rng + ?Sized>(g: f64, kappa: f64, rng: &mut R) -> f64 {
    assert!(g > 0.0 && kappa >= 0.5);
    Gamma::new(kappa, g / kappa)
        .expect("valid Gamma parameters")
        .sample(rng)
}

/// Precomputed quadrature state for one (n, k, t) link: the per-node SNR
/// slopes `g*x_i/(kappa*noise)`, so capacity and derivative evaluations
/// inside solver loops are a fused multiply/log pass with no lookups.
#[derive(Debug, Clone)]
pub struct CellKernel {
    snr: [f64; NODES],
    probs: [f64; NODES],
    /// `(B/ln 2) * g/noise`, the capacity slope at zero power.
    _rule: Arc<GammaRule>,
}

impl CellKernel {
    pub fn new(rule: Arc<GammaRule>, g: f64, noise_w: f64) -> Self {
        assert!(g > 0.0 && noise_w > 0.0, "gain and noise must be positive");
        let scale = g / (rule.kappa * noise_w);
        let mut snr = [0.0; NODES];
        for i in 0..NODES {
            snr[i] = rule.nodes[i] * scale;
        }
        CellKernel {
            snr,
            probs: rule.probs,
            _rule: rule,
        }
    }

    /// Expected capacity in bits per slot at power `p_w`.
    #[inline]
    pub fn capacity(&self, p_w: f64, bandwidth_hz: f64) -> f64 {
        assert!(p_w >= 0.0, "power must be nonnegative, got {p_w}");
        let mut acc = 0.0;
        for i in 0..NODES {
            acc += self.probs[i] * (p_w * self.snr[i]).ln_1p();
        }
        bandwidth_hz * acc * INV_LN_2
    }

    /// Derivative of expected capacity in power, bits per slot per watt.
    /// Strictly decreasing in `p_w`; at zero power it equals
    /// `(B/ln 2) * g/noise`.
    #[inline]
    pub fn capacity_derivative(&self, p_w: f64, bandwidth_hz: f64) -> f64 {
        debug_assert!(p_w >= 0.0);
        let mut acc = 0.0;
        for i in 0..NODES {
            acc += self.probs[i] * self.snr[i] / (1.0 + p_w * self.snr[i]);
        }
        bandwidth_hz * acc * INV_LN_2
    }

    /// High-SNR capacity intercept `(B/ln 2) * exp(E[ln snr])`. Expected
    /// capacity at large power approaches `B * log2(p * snr_geo)` with
    /// the geometric rather than arithmetic fading mean, so the bits a
    /// dual price `rho` buys approach `B * log2(intercept / rho)`. Always
    /// at or below the zero-power slope.
    pub fn high_snr_intercept(&self, bandwidth_hz: f64) -> f64 {
        let mut acc = 0.0;
        for i in 0..NODES {
            acc += self.probs[i] * self.snr[i].ln();
        }
        bandwidth_hz * acc.exp() * INV_LN_2
    }
}
