//! Monte-Carlo forced outages superimposed on generated profiles.
//!
//! Availability follows a two-state hourly Markov chain whose stationary
//! unavailability equals the forced outage rate and whose outage durations
//! are geometric with mean MTTR.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::data::HourlyProfile;
use crate::error::{Error, Result};
use crate::par::{self, Exec};
use crate::rng::{derive_seed, from_seed, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutageConfig {
    pub forced_outage_rate: f64,
    pub mttr_hours: f64,
    #[serde(default)]
    pub seed: u64,
}

impl OutageConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.forced_outage_rate) {
            return Err(Error::invalid(format!(
                "forced outage rate {} must lie in [0, 1)",
                self.forced_outage_rate
            )));
        }
        if !(self.mttr_hours >= 1.0 && self.mttr_hours.is_finite()) {
            return Err(Error::invalid(format!(
                "MTTR {} must be >= 1 hour",
                self.mttr_hours
            )));
        }
        Ok(())
    }

    /// Hourly probability of a repair completing.
    pub fn repair_probability(&self) -> f64 {
        1.0 / self.mttr_hours
    }

    /// Hourly probability of an available unit failing.
    pub fn failure_probability(&self) -> f64 {
        let f = self.forced_outage_rate;
        f / ((1.0 - f) * self.mttr_hours)
    }
}

/// `true` marks an hour in the outage state.
pub fn simulate_outage_states(
    hours: usize,
    config: &OutageConfig,
    rng: &mut Rng,
) -> Result<Vec<bool>> {
    config.validate()?;
    let fail = config.failure_probability();
    if fail > 1.0 {
        return Err(Error::invalid(format!(
            "FOR {} with MTTR {} needs an hourly failure probability above 1",
            config.forced_outage_rate, config.mttr_hours
        )));
    }
    let repair = config.repair_probability();
    let mut out = rng.random::<f64>() < config.forced_outage_rate;
    let mut states = Vec::with_capacity(hours);
    for _ in 0..hours {
        states.push(out);
        let u: f64 = rng.random();
        out = if out { u >= repair } else { u < fail };
    }
    Ok(states)
}

/// Zero every hour the unit is out; all other hours are untouched.
pub fn inject_outages(profile: &HourlyProfile, config: &OutageConfig) -> Result<HourlyProfile> {
    config.validate()?;
    if config.forced_outage_rate == 0.0 {
        return Ok(profile.clone());
    }
    let mut rng = from_seed(config.seed);
    let states = simulate_outage_states(profile.values.len(), config, &mut rng)?;
    let mut out = profile.clone();
    for (v, down) in out.values.iter_mut().zip(states) {
        if down {
            *v = 0.0;
        }
    }
    Ok(out)
}

/// Outages for many profiles, each with a stream derived from the master
/// seed and the profile's (site, year).
pub fn inject_outages_all(
    profiles: &[HourlyProfile],
    config: &OutageConfig,
    exec: Exec,
) -> Result<Vec<HourlyProfile>> {
    par::map(exec, profiles, |p| {
        let cfg = OutageConfig {
            seed: derive_seed(
                config.seed,
                &format!("outage/{}", p.site_id),
                i64::from(p.year),
            ),
            ..*config
        };
        inject_outages(p, &cfg)
    })
    .into_iter()
    .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutageStats {
    pub unavailability: f64,
    /// Completed or truncated outage runs.
    pub events: usize,
    pub mean_duration_hours: f64,
}

pub fn outage_stats(states: &[bool]) -> OutageStats {
    let out_hours = states.iter().filter(|s| **s).count();
    let events = states
        .iter()
        .enumerate()
        .filter(|(i, s)| **s && (*i == 0 || !states[i - 1]))
        .count();
    OutageStats {
        unavailability: out_hours as f64 / states.len().max(1) as f64,
        events,
        mean_duration_hours: if events == 0 {
            0.0
        } else {
            out_hours as f64 / events as f64
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::GenerationType;

    fn flat() -> HourlyProfile {
        HourlyProfile {
            site_id: "s".into(),
            generation_type: GenerationType {
                label: "thermal".into(),
                intermittent: false,
                index: 0,
            },
            year: 2021,
            capacity_mw: 10.0,
            values: (0..8760).map(|h| 1.0 + (h % 5) as f64).collect(),
        }
    }

    #[test]
    fn zero_rate_is_identity() {
        let cfg = OutageConfig {
            forced_outage_rate: 0.0,
            mttr_hours: 24.0,
            seed: 3,
        };
        assert_eq!(inject_outages(&flat(), &cfg).unwrap(), flat());
    }

    #[test]
    fn outages_zero_only_out_hours() {
        let p = flat();
        let cfg = OutageConfig {
            forced_outage_rate: 0.2,
            mttr_hours: 10.0,
            seed: 5,
        };
        let out = inject_outages(&p, &cfg).unwrap();
        let states = simulate_outage_states(8760, &cfg, &mut from_seed(5)).unwrap();
        for ((a, b), down) in out.values.iter().zip(&p.values).zip(states) {
            assert_eq!(*a, if down { 0.0 } else { *b });
        }
        assert_eq!(inject_outages(&p, &cfg).unwrap(), out);
    }

    #[test]
    fn invalid_configs_rejected() {
        for (f, m) in [(1.0, 24.0), (-0.1, 24.0), (0.1, 0.5)] {
            let cfg = OutageConfig {
                forced_outage_rate: f,
                mttr_hours: m,
                seed: 0,
            };
            assert!(inject_outages(&flat(), &cfg).is_err());
        }
    }

    #[test]
    fn stats_count_runs() {
        let s = [true, true, false, true, false, false, true];
        let st = outage_stats(&s);
        assert_eq!(st.events, 3);
        assert!((st.mean_duration_hours - 4.0 / 3.0).abs() < 1e-15);
    }
}
