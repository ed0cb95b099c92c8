//! Reproducible synthetic scenarios: station layout, circular patrol
//! trajectory, and the predicted radio map along it.
//!
//! A scenario is fully determined by a [`ScenarioConfig`] (which embeds
//! the RNG seed), so two builds from the same config are bit-identical.
//! The map uses urban-microcell path loss with distance-dependent
//! line-of-sight, log-normal shadowing drawn per (station, slot) and
//! shared across blocks, and a Gamma fading shape drawn per
//! (station, block) and shared across slots, which keeps the predicted
//! map smooth in time. All radio quantities convert to linear units at
//! this boundary; solvers never see decibels.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{ChannelStats, LinkParams};
use crate::units::{db_to_linear, dbm_to_watts};

/// Everything needed to rebuild a scenario from scratch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Side of the square patrol area, metres.
    pub area_side_m: f64,
    /// Number of ground stations, drawn uniformly over the area.
    pub n_bs: usize,
    /// Flight altitude, metres.
    pub altitude_m: f64,
    /// Flight speed, metres per second.
    pub speed_mps: f64,
    /// Slot duration, seconds.
    pub slot_s: f64,
    /// Horizon length in slots.
    pub horizon_slots: usize,
    /// Resource blocks per slot.
    pub n_rb: usize,
    /// Bandwidth of one resource block, Hz.
    pub bandwidth_hz: f64,
    /// Noise power per block, dBm.
    pub noise_dbm: f64,
    /// Per-slot transmit power budget, dBm.
    pub p_bar_dbm: f64,
    /// Update payload, bits.
    pub v_bar_bits: f64,
    /// Peak information-age bound, slots.
    pub tau_bar_slots: usize,
    /// Carrier frequency, GHz.
    pub carrier_ghz: f64,
    /// Shadowing standard deviation under line of sight, dB.
    pub shadow_sigma_los_db: f64,
    /// Shadowing standard deviation otherwise, dB.
    pub shadow_sigma_nlos_db: f64,
    /// Fading shape bounds `[lo, hi]`, drawn uniformly per (station, block).
    pub kappa_range: [f64; 2],
    /// Master seed for layout and radio-map draws.
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            area_side_m: 200.0,
            n_bs: 5,
            altitude_m: 50.0,
            speed_mps: 6.0,
            slot_s: 0.5,
            horizon_slots: 100,
            n_rb: 8,
            bandwidth_hz: 180e3,
            noise_dbm: -114.4,
            p_bar_dbm: 23.0,
            v_bar_bits: 7.2e7,
            tau_bar_slots: 13,
            carrier_ghz: 3.5,
            shadow_sigma_los_db: 4.0,
            shadow_sigma_nlos_db: 8.0,
            kappa_range: [1.0, 30.0],
            seed: 7,
        }
    }
}

/// A config field with an inadmissible value.
#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("{field} must be positive, got {value}")]
    NotPositive { field: &'static str, value: f64 },
    #[error("{field} must not be negative, got {value}")]
    Negative { field: &'static str, value: f64 },
    #[error("{field} must be at least 1")]
    ZeroCount { field: &'static str },
    #[error("kappa_range [{lo}, {hi}] must satisfy 0.5 <= lo <= hi")]
    BadKappaRange { lo: f64, hi: f64 },
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            ("area_side_m", self.area_side_m),
            ("slot_s", self.slot_s),
            ("bandwidth_hz", self.bandwidth_hz),
            ("v_bar_bits", self.v_bar_bits),
            ("carrier_ghz", self.carrier_ghz),
        ];
        for (field, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(ConfigError::NotPositive { field, value });
            }
        }
        let non_negative = [
            ("altitude_m", self.altitude_m),
            ("speed_mps", self.speed_mps),
            ("shadow_sigma_los_db", self.shadow_sigma_los_db),
            ("shadow_sigma_nlos_db", self.shadow_sigma_nlos_db),
        ];
        for (field, value) in non_negative {
            if !(value.is_finite() && value >= 0.0) {
                return Err(ConfigError::Negative { field, value });
            }
        }
        for (field, value) in [("noise_dbm", self.noise_dbm), ("p_bar_dbm", self.p_bar_dbm)] {
            if !value.is_finite() {
                return Err(ConfigError::NotPositive { field, value });
            }
        }
        if self.n_bs == 0 {
            return Err(ConfigError::ZeroCount { field: "n_bs" });
        }
        if self.n_rb == 0 {
            return Err(ConfigError::ZeroCount { field: "n_rb" });
        }
        if self.horizon_slots == 0 {
            return Err(ConfigError::ZeroCount { field: "horizon_slots" });
        }
        if self.tau_bar_slots == 0 {
            return Err(ConfigError::ZeroCount { field: "tau_bar_slots" });
        }
        let [lo, hi] = self.kappa_range;
        if !(lo.is_finite() && hi.is_finite() && 0.5 <= lo && lo <= hi) {
            return Err(ConfigError::BadKappaRange { lo, hi });
        }
        Ok(())
    }

    /// Radio parameters in linear units.
    pub fn link_params(&self) -> LinkParams {
        LinkParams {
            bandwidth_hz: self.bandwidth_hz,
            noise_w: dbm_to_watts(self.noise_dbm),
            p_bar_w: dbm_to_watts(self.p_bar_dbm),
        }
    }
}

/// A built scenario: geometry plus the predicted channel tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub config: ScenarioConfig,
    /// Ground station coordinates `[x, y, 0]`, metres.
    pub bs_positions: Vec<[f64; 3]>,
    /// Flight path coordinates per slot, metres.
    pub trajectory: Vec<[f64; 3]>,
    pub stats: ChannelStats,
}

impl Scenario {
    pub fn link_params(&self) -> LinkParams {
        self.config.link_params()
    }

    /// Structural consistency of a deserialized scenario.
    pub fn validate(&self) -> Result<(), String> {
        self.config.validate().map_err(|e| e.to_string())?;
        if self.trajectory.len() != self.config.horizon_slots {
            return Err(format!(
                "trajectory has {} points for a {}-slot horizon",
                self.trajectory.len(),
                self.config.horizon_slots
            ));
        }
        if self.bs_positions.len() != self.config.n_bs {
            return Err(format!(
                "{} station positions for n_bs = {}",
                self.bs_positions.len(),
                self.config.n_bs
            ));
        }
        let dims = (self.stats.n_bs(), self.stats.n_rb(), self.stats.horizon());
        let want = (self.config.n_bs, self.config.n_rb, self.config.horizon_slots);
        if dims != want {
            return Err(format!("stats dims {dims:?} disagree with config {want:?}"));
        }
        Ok(())
    }
}

/// Points of the circular patrol path: centered in the area, radius a
/// quarter of the side (so the path stays inside for any config), at the
/// configured altitude, starting at angle zero, spaced `speed * slot`
/// apart in arc length.
pub fn trajectory_positions(config: &ScenarioConfig) -> Vec<[f64; 3]> {
    let center = config.area_side_m / 2.0;
    let radius = config.area_side_m / 4.0;
    let step = config.speed_mps * config.slot_s / radius;
    (0..config.horizon_slots)
        .map(|i| {
            let phi = step * i as f64;
            [
                center + radius * phi.cos(),
                center + radius * phi.sin(),
                config.altitude_m,
            ]
        })
        .collect()
}

/// Probability of line of sight at ground distance `d2_m`, one at zero
/// distance and decaying towards the `exp(-d/36)` tail beyond 18 m.
pub fn los_probability(d2_m: f64) -> f64 {
    let tail = (-d2_m / 36.0).exp();
    (18.0 / d2_m).min(1.0) * (1.0 - tail) + tail
}

/// Urban-microcell line-of-sight path loss, dB.
pub fn path_loss_los_db(d_m: f64, f_ghz: f64) -> f64 {
    22.0 * d_m.log10() + 28.0 + 20.0 * f_ghz.log10()
}

/// Urban-microcell non-line-of-sight path loss, dB.
pub fn path_loss_nlos_db(d_m: f64, f_ghz: f64) -> f64 {
    36.7 * d_m.log10() + 22.7 + 26.0 * f_ghz.log10()
}

/// Builds a scenario from a validated config; deterministic in the seed.
///
/// # Panics
///
/// Panics when the config does not validate.
pub fn build_scenario(config: &ScenarioConfig) -> Scenario {
    if let Err(why) = config.validate() {
        panic!("invalid scenario config: {why}");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let side = config.area_side_m;
    let bs_positions: Vec<[f64; 3]> = (0..config.n_bs)
        .map(|_| {
            let x = rng.gen_range(0.0..side);
            let y = rng.gen_range(0.0..side);
            [x, y, 0.0]
        })
        .collect();
    let trajectory = trajectory_positions(config);
    let stats = synthesize_radio_map(&bs_positions, &trajectory, config, &mut rng);
    Scenario {
        config: config.clone(),
        bs_positions,
        trajectory,
        stats,
    }
}

/// Draws the predicted channel tables along a trajectory.
///
/// Draw order is fixed so the map is reproducible: for each station, per
/// slot a line-of-sight state then a shadowing value; afterwards one
/// fading shape per (station, block). A zero station-to-craft distance
/// is perturbed to one metre and logged.
pub fn synthesize_radio_map<R: Rng + ?Sized>(
    bs_positions: &[[f64; 3]],
    trajectory: &[[f64; 3]],
    config: &ScenarioConfig,
    rng: &mut R,
) -> ChannelStats {
    let n_bs = bs_positions.len();
    let n_rb = config.n_rb;
    let horizon = trajectory.len();
    let mut gain_db = vec![0.0f64; n_bs * horizon];
    for (n, bs) in bs_positions.iter().enumerate() {
        for (t, uav) in trajectory.iter().enumerate() {
            let dx = uav[0] - bs[0];
            let dy = uav[1] - bs[1];
            let dz = uav[2] - bs[2];
            let d2 = (dx * dx + dy * dy).sqrt();
            let mut d3 = (dx * dx + dy * dy + dz * dz).sqrt();
            if d3 == 0.0 {
                log::warn!("craft sits on station {n} at slot {}; using 1 m", t + 1);
                d3 = 1.0;
            }
            let los = rng.gen::<f64>() < los_probability(d2);
            let sigma = if los {
                config.shadow_sigma_los_db
            } else {
                config.shadow_sigma_nlos_db
            };
            let shadow = Normal::new(0.0, sigma)
                .expect("validated sigma")
                .sample(rng);
            let pl = if los {
                path_loss_los_db(d3, config.carrier_ghz)
            } else {
                path_loss_nlos_db(d3, config.carrier_ghz)
            };
            gain_db[n * horizon + t] = -pl + shadow;
        }
    }
    let [k_lo, k_hi] = config.kappa_range;
    let kappas: Vec<f64> = (0..n_bs * n_rb)
        .map(|_| rng.gen_range(k_lo..=k_hi))
        .collect();

    let mut g = Vec::with_capacity(n_bs * n_rb * horizon);
    let mut kappa = Vec::with_capacity(n_bs * n_rb * horizon);
    for n in 0..n_bs {
        for k in 0..n_rb {
            for t in 0..horizon {
                g.push(db_to_linear(gain_db[n * horizon + t]));
                kappa.push(kappas[n * n_rb + k]);
            }
        }
    }
    ChannelStats::new(n_bs, n_rb, horizon, g, kappa)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_slot_path_is_one_point_at_angle_zero() {
        let config = ScenarioConfig {
            horizon_slots: 1,
            ..ScenarioConfig::default()
        };
        let path = trajectory_positions(&config);
        assert_eq!(path, vec![[150.0, 100.0, 50.0]], "center + radius along x");
    }

    #[test]
    fn arc_spacing_is_constant_and_matches_speed() {
        let config = ScenarioConfig::default();
        let path = trajectory_positions(&config);
        let radius = config.area_side_m / 4.0;
        let want = config.speed_mps * config.slot_s;
        for pair in path.windows(2) {
            let chord = pair[0]
                .iter()
                .zip(&pair[1])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            let arc = 2.0 * radius * f64::asin(chord / (2.0 * radius));
            assert!(
                (arc / want - 1.0).abs() < 1e-9,
                "arc step {arc} differs from {want}"
            );
        }
    }

    #[test]
    fn full_lap_returns_within_one_spacing() {
        // 100 steps of length pi close a circle of circumference 100*pi.
        let config = ScenarioConfig {
            speed_mps: std::f64::consts::PI,
            slot_s: 1.0,
            horizon_slots: 100,
            ..ScenarioConfig::default()
        };
        let path = trajectory_positions(&config);
        let first = path[0];
        let last = path[99];
        let gap = first
            .iter()
            .zip(&last)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        assert!(
            gap <= config.speed_mps * config.slot_s + 1e-9,
            "lap leaves a gap of {gap} m"
        );
    }

    #[test]
    fn same_config_builds_identical_scenarios() {
        let config = ScenarioConfig {
            horizon_slots: 12,
            n_rb: 3,
            ..ScenarioConfig::default()
        };
        let a = build_scenario(&config);
        let b = build_scenario(&config);
        assert_eq!(a, b);
        let ja = serde_json::to_string(&a).unwrap();
        let jb = serde_json::to_string(&b).unwrap();
        assert_eq!(ja, jb, "serialized form must be byte-identical");
    }

    #[test]
    fn different_seeds_move_the_stations() {
        let mut config = ScenarioConfig {
            horizon_slots: 4,
            ..ScenarioConfig::default()
        };
        config.seed = 0;
        let a = build_scenario(&config);
        config.seed = 1;
        let b = build_scenario(&config);
        assert_ne!(a.bs_positions, b.bs_positions);
    }

    #[test]
    fn layout_and_tables_respect_their_bounds() {
        let config = ScenarioConfig {
            horizon_slots: 20,
            ..ScenarioConfig::default()
        };
        let s = build_scenario(&config);
        assert_eq!(s.bs_positions.len(), 5);
        for p in &s.bs_positions {
            assert!(p[0] >= 0.0 && p[0] <= 200.0 && p[1] >= 0.0 && p[1] <= 200.0);
            assert_eq!(p[2], 0.0, "stations sit on the ground");
        }
        let [lo, hi] = config.kappa_range;
        for &k in s.stats.shapes() {
            assert!((lo..=hi).contains(&k), "shape {k} outside [{lo}, {hi}]");
        }
        for &g in s.stats.gains() {
            assert!(g > 0.0 && g.is_finite());
        }
        s.validate().expect("built scenarios are consistent");
    }

    #[test]
    fn no_shadowing_and_certain_sight_leave_only_distance() {
        // A station at the circle's center on the ground: every slot is
        // equidistant, and within 18 m ground range sight is certain, so
        // with zero shadowing every slot must see the same gain.
        let config = ScenarioConfig {
            area_side_m: 40.0,
            n_bs: 1,
            horizon_slots: 16,
            n_rb: 2,
            shadow_sigma_los_db: 0.0,
            shadow_sigma_nlos_db: 0.0,
            ..ScenarioConfig::default()
        };
        let trajectory = trajectory_positions(&config);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let stats = synthesize_radio_map(&[[20.0, 20.0, 0.0]], &trajectory, &config, &mut rng);
        let g0 = stats.gain(0, 0, 0);
        for k in 0..2 {
            for t in 0..16 {
                assert!(
                    (stats.gain(0, k, t) / g0 - 1.0).abs() < 1e-12,
                    "equidistant slots must share a gain"
                );
            }
        }
    }

    #[test]
    fn doubling_distance_costs_the_sight_exponent() {
        let drop = path_loss_los_db(240.0, 3.5) - path_loss_los_db(120.0, 3.5);
        assert!(
            (drop - 22.0 * 2.0f64.log10()).abs() < 1e-12,
            "got {drop} dB"
        );
        let nlos_drop = path_loss_nlos_db(240.0, 3.5) - path_loss_nlos_db(120.0, 3.5);
        assert!((nlos_drop - 36.7 * 2.0f64.log10()).abs() < 1e-12);
    }

    #[test]
    fn zero_distance_is_perturbed_not_fatal() {
        let config = ScenarioConfig {
            area_side_m: 40.0,
            n_bs: 1,
            altitude_m: 0.0,
            horizon_slots: 1,
            n_rb: 1,
            ..ScenarioConfig::default()
        };
        let trajectory = trajectory_positions(&config);
        let start = trajectory[0];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let stats = synthesize_radio_map(&[start], &trajectory, &config, &mut rng);
        assert!(stats.gain(0, 0, 0).is_finite());
    }

    #[test]
    fn sight_probability_has_the_pinned_shape() {
        assert_eq!(los_probability(0.0), 1.0);
        assert_eq!(los_probability(10.0), 1.0, "certain within 18 m");
        let far = los_probability(500.0);
        let tail = (-500.0f64 / 36.0).exp();
        let want = (18.0 / 500.0) * (1.0 - tail) + tail;
        assert!((far - want).abs() < 1e-15);
        assert!(far < 0.05);
    }

    #[test]
    fn config_validation_rejects_bad_fields() {
        let mut c = ScenarioConfig::default();
        c.v_bar_bits = 0.0;
        assert!(matches!(
            c.validate(),
            Err(ConfigError::NotPositive { field: "v_bar_bits", .. })
        ));
        let mut c = ScenarioConfig::default();
        c.kappa_range = [0.3, 2.0];
        assert!(matches!(c.validate(), Err(ConfigError::BadKappaRange { .. })));
        let mut c = ScenarioConfig::default();
        c.n_bs = 0;
        assert!(matches!(c.validate(), Err(ConfigError::ZeroCount { field: "n_bs" })));
        assert!(ScenarioConfig::default().validate().is_ok());
    }

    #[test]
    fn shipped_default_config_matches_the_builtin() {
        let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/default.json");
        let body = std::fs::read_to_string(path).expect("configs/default.json present");
        let parsed: ScenarioConfig = serde_json::from_str(&body).unwrap();
        assert_eq!(parsed, ScenarioConfig::default());
    }

    #[test]
    fn stats_wire_format_declares_its_layout() {
        let config = ScenarioConfig {
            n_bs: 1,
            horizon_slots: 2,
            n_rb: 1,
            ..ScenarioConfig::default()
        };
        let s = build_scenario(&config);
        let json = serde_json::to_string(&s.stats).unwrap();
        assert!(json.contains("\"order\":\"[n][k][t]\""), "layout tag missing: {json}");
        let back: ChannelStats = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s.stats);
        let tampered = json.replace("[n][k][t]", "[t][k][n]");
        assert!(serde_json::from_str::<ChannelStats>(&tampered).is_err());
    }
}
