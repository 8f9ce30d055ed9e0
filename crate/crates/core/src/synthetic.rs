//! Parametric daily-shape families for self-contained experiments.
//!
//! Each family draws hourly profiles with known structure: solar-like
//! half-sines with a seasonal amplitude and daily cloudiness, wind-like AR(1)
//! noise continuous across days, and duty-cycled block shapes for peaking
//! units.

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::{
    date_of_day, days_in_year, Dataset, HourlyProfile, SiteMeta, TypeRegistry, HOURS_PER_DAY,
};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, from_seed, Rng};
use crate::synthesis::rescale_to_energy;

use chrono::Datelike;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilyKind {
    /// Half-sine between `sunrise` and `sunset` (hours), zero at night.
    Solar {
        #[serde(default = "defaults::sunrise")]
        sunrise: usize,
        #[serde(default = "defaults::sunset")]
        sunset: usize,
        /// Normalized midday peak averaged over the year.
        #[serde(default = "defaults::solar_peak")]
        peak: f64,
        /// Relative summer/winter swing of the peak.
        #[serde(default = "defaults::seasonal")]
        seasonal_amplitude: f64,
        /// Daily clear-sky factor is drawn from `[1 - cloud_noise, 1]`.
        #[serde(default = "defaults::cloud")]
        cloud_noise: f64,
        /// Multiplicative hourly noise standard deviation.
        #[serde(default = "defaults::hourly_noise")]
        hourly_noise: f64,
    },
    /// AR(1) deviations around a seasonal mean, clamped to `[0, 1]`.
    Wind {
        #[serde(default = "defaults::wind_mean")]
        mean: f64,
        #[serde(default = "defaults::seasonal_wind")]
        seasonal_amplitude: f64,
        #[serde(default = "defaults::phi")]
        phi: f64,
        #[serde(default = "defaults::sigma")]
        sigma: f64,
        #[serde(default)]
        diurnal_amplitude: f64,
    },
    /// One contiguous block of `min_hours..=max_hours` running hours per day.
    DutyBlock {
        #[serde(default = "defaults::min_hours")]
        min_hours: usize,
        #[serde(default = "defaults::max_hours")]
        max_hours: usize,
        #[serde(default = "defaults::earliest_start")]
        earliest_start: usize,
        #[serde(default = "defaults::level_lo")]
        level_lo: f64,
        #[serde(default = "defaults::level_hi")]
        level_hi: f64,
        #[serde(default = "defaults::block_noise")]
        hourly_noise: f64,
    },
}

mod defaults {
    pub fn sunrise() -> usize {
        6
    }
    pub fn sunset() -> usize {
        19
    }
    pub fn solar_peak() -> f64 {
        0.75
    }
    pub fn seasonal() -> f64 {
        0.3
    }
    pub fn cloud() -> f64 {
        0.4
    }
    pub fn hourly_noise() -> f64 {
        0.03
    }
    pub fn wind_mean() -> f64 {
        0.4
    }
    pub fn seasonal_wind() -> f64 {
        0.1
    }
    pub fn phi() -> f64 {
        0.95
    }
    pub fn sigma() -> f64 {
        0.05
    }
    pub fn min_hours() -> usize {
        3
    }
    pub fn max_hours() -> usize {
        12
    }
    pub fn earliest_start() -> usize {
        6
    }
    pub fn level_lo() -> f64 {
        0.5
    }
    pub fn level_hi() -> f64 {
        0.9
    }
    pub fn block_noise() -> f64 {
        0.02
    }
    pub fn sites() -> usize {
        1
    }
    pub fn capacity() -> f64 {
        100.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    /// Generation type label of the family.
    pub label: String,
    #[serde(default)]
    pub intermittent: bool,
    #[serde(default = "defaults::sites")]
    pub sites: usize,
    #[serde(default = "defaults::capacity")]
    pub capacity_mw: f64,
    /// Scale every synthetic year to this energy when set.
    #[serde(default)]
    pub annual_energy_mwh: Option<f64>,
    #[serde(flatten)]
    pub kind: FamilyKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    pub families: Vec<FamilySpec>,
    pub years: Vec<i32>,
    #[serde(default)]
    pub seed: u64,
}

impl FamilySpec {
    pub fn solar(label: &str) -> Self {
        FamilySpec {
            label: label.into(),
            intermittent: false,
            sites: 1,
            capacity_mw: defaults::capacity(),
            annual_energy_mwh: None,
            kind: FamilyKind::Solar {
                sunrise: defaults::sunrise(),
                sunset: defaults::sunset(),
                peak: defaults::solar_peak(),
                seasonal_amplitude: defaults::seasonal(),
                cloud_noise: defaults::cloud(),
                hourly_noise: defaults::hourly_noise(),
            },
        }
    }

    pub fn wind(label: &str) -> Self {
        FamilySpec {
            label: label.into(),
            intermittent: false,
            sites: 1,
            capacity_mw: defaults::capacity(),
            annual_energy_mwh: None,
            kind: FamilyKind::Wind {
                mean: defaults::wind_mean(),
                seasonal_amplitude: defaults::seasonal_wind(),
                phi: defaults::phi(),
                sigma: defaults::sigma(),
                diurnal_amplitude: 0.0,
            },
        }
    }

    pub fn duty_block(label: &str) -> Self {
        FamilySpec {
            label: label.into(),
            intermittent: true,
            sites: 1,
            capacity_mw: defaults::capacity(),
            annual_energy_mwh: None,
            kind: FamilyKind::DutyBlock {
                min_hours: defaults::min_hours(),
                max_hours: defaults::max_hours(),
                earliest_start: defaults::earliest_start(),
                level_lo: defaults::level_lo(),
                level_hi: defaults::level_hi(),
                hourly_noise: defaults::block_noise(),
            },
        }
    }

    pub fn site_id(&self, index: usize) -> String {
        format!("{}_{:02}", self.label, index + 1)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::invalid(format!("family {}: {msg}", self.label)));
        if self.label.is_empty() {
            return Err(Error::invalid("family label must not be empty"));
        }
        if self.sites == 0 {
            return bad("sites must be >= 1".into());
        }
        if !(self.capacity_mw > 0.0 && self.capacity_mw.is_finite()) {
            return bad("capacity_mw must be positive".into());
        }
        if let Some(e) = self.annual_energy_mwh {
            if !(e > 0.0 && e <= self.capacity_mw * 8760.0) {
                return bad(format!(
                    "annual_energy_mwh {e} outside (0, capacity x 8760]"
                ));
            }
        }
        match self.kind {
            FamilyKind::Solar {
                sunrise,
                sunset,
                peak,
                seasonal_amplitude,
                cloud_noise,
                hourly_noise,
            } => {
                if !(sunrise < sunset && sunset <= HOURS_PER_DAY) {
                    return bad("need sunrise < sunset <= 24".into());
                }
                if !(peak > 0.0
                    && peak * (1.0 + seasonal_amplitude) <= 1.0
                    && seasonal_amplitude >= 0.0)
                {
                    return bad("peak x (1 + seasonal_amplitude) must lie in (0, 1]".into());
                }
                if !(0.0..1.0).contains(&cloud_noise) || !(hourly_noise >= 0.0) {
                    return bad("noise levels must be non-negative, cloud_noise < 1".into());
                }
            }
            FamilyKind::Wind {
                mean,
                seasonal_amplitude,
                phi,
                sigma,
                diurnal_amplitude,
            } => {
                if !(0.0..=1.0).contains(&mean) || !(0.0..1.0).contains(&phi) {
                    return bad("need mean in [0, 1] and phi in [0, 1)".into());
                }
                if !(sigma >= 0.0 && seasonal_amplitude >= 0.0 && diurnal_amplitude >= 0.0) {
                    return bad("amplitudes and sigma must be non-negative".into());
                }
            }
            FamilyKind::DutyBlock {
                min_hours,
                max_hours,
                earliest_start,
                level_lo,
                level_hi,
                hourly_noise,
            } => {
                if !(1 <= min_hours
                    && min_hours <= max_hours
                    && earliest_start + max_hours <= HOURS_PER_DAY)
                {
                    return bad(
                        "need 1 <= min_hours <= max_hours and earliest_start + max_hours <= 24"
                            .into(),
                    );
                }
                if !(0.05 < level_lo
                    && level_lo <= level_hi
                    && level_hi + 3.0 * hourly_noise <= 1.0)
                {
                    return bad(
                        "need 0.05 < level_lo <= level_hi, level_hi + 3 x noise <= 1".into(),
                    );
                }
            }
        }
        Ok(())
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.families.is_empty() {
            return Err(Error::invalid("spec defines no families"));
        }
        if self.years.is_empty() {
            return Err(Error::invalid("spec defines no years"));
        }
        let mut years = self.years.clone();
        years.sort_unstable();
        if years.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("duplicate year in spec"));
        }
        let mut labels: Vec<&str> = self.families.iter().map(|f| f.label.as_str()).collect();
        labels.sort_unstable();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("duplicate family label in spec"));
        }
        self.families.iter().try_for_each(FamilySpec::validate)
    }
}

/// Seasonal phase in [0, 1): 0 at the summer peak (around 21 June).
fn season_cos(year: i32, day: usize) -> f64 {
    let doy = date_of_day(year, day).ordinal0() as f64;
    (2.0 * std::f64::consts::PI * (doy - 171.0) / 365.25).cos()
}

/// Noise-free solar day: half-sine scaled by `amplitude`.
pub fn solar_clear_sky(sunrise: usize, sunset: usize, amplitude: f64) -> [f64; HOURS_PER_DAY] {
    let width = (sunset - sunrise) as f64;
    std::array::from_fn(|h| {
        if h >= sunrise && h < sunset {
            amplitude
                * (std::f64::consts::PI * (h - sunrise) as f64 / width
                    + std::f64::consts::PI / (2.0 * width))
                    .sin()
        } else {
            0.0
        }
    })
}

/// Solar amplitude on `day` of `year`.
pub fn solar_amplitude(peak: f64, seasonal_amplitude: f64, year: i32, day: usize) -> f64 {
    peak * (1.0 + seasonal_amplitude * season_cos(year, day))
}

fn normal(rng: &mut Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Normalized hourly values for consecutive `years` of one site.
fn site_years(kind: &FamilyKind, years: &[i32], rng: &mut Rng) -> Vec<Vec<f64>> {
    // AR state carries across days and years
    let mut ar = 0.0f64;
    years
        .iter()
        .map(|&year| {
            let days = days_in_year(year);
            let mut out = Vec::with_capacity(days * HOURS_PER_DAY);
            for d in 0..days {
                match *kind {
                    FamilyKind::Solar {
                        sunrise,
                        sunset,
                        peak,
                        seasonal_amplitude,
                        cloud_noise,
                        hourly_noise,
                    } => {
                        let clear = rng.random_range(1.0 - cloud_noise..=1.0);
                        let amp = solar_amplitude(peak, seasonal_amplitude, year, d) * clear;
                        for v in solar_clear_sky(sunrise, sunset, amp) {
                            let noisy = if v > 0.0 {
                                (v * (1.0 + hourly_noise * normal(rng))).clamp(1e-4, 1.0)
                            } else {
                                0.0
                            };
                            out.push(noisy);
                        }
                    }
                    FamilyKind::Wind {
                        mean,
                        seasonal_amplitude,
                        phi,
                        sigma,
                        diurnal_amplitude,
                    } => {
                        // windier in winter
                        let level = mean - seasonal_amplitude * season_cos(year, d);
                        for h in 0..HOURS_PER_DAY {
                            ar = phi * ar + sigma * normal(rng);
                            let diurnal = diurnal_amplitude
                                * (2.0 * std::f64::consts::PI * (h as f64 - 3.0) / 24.0).cos();
                            out.push((level + diurnal + ar).clamp(0.0, 1.0));
                        }
                    }
                    FamilyKind::DutyBlock {
                        min_hours,
                        max_hours,
                        earliest_start,
                        level_lo,
                        level_hi,
                        hourly_noise,
                    } => {
                        let n = rng.random_range(min_hours..=max_hours);
                        let start = rng.random_range(earliest_start..=HOURS_PER_DAY - n);
                        let level = rng.random_range(level_lo..=level_hi);
                        for h in 0..HOURS_PER_DAY {
                            if h >= start && h < start + n {
                                out.push((level + hourly_noise * normal(rng)).clamp(0.05, 1.0));
                            } else {
                                out.push(0.0);
                            }
                        }
                    }
                }
            }
            out
        })
        .collect()
}

/// Draw the synthetic data set described by `spec`.
///
/// Every (family, site) has its own RNG stream, so adding a family does not
/// change the others.
pub fn generate_dataset(spec: &SynthSpec) -> Result<Dataset> {
    spec.validate()?;
    let registry = TypeRegistry::new(
        spec.families
            .iter()
            .map(|f| (f.label.clone(), f.intermittent)),
    )?;
    let mut years = spec.years.clone();
    years.sort_unstable();

    let mut metas = Vec::new();
    let mut profiles = Vec::new();
    for family in &spec.families {
        let t = registry.lookup(&family.label)?.clone();
        for s in 0..family.sites {
            let site_id = family.site_id(s);
            let mut rng = from_seed(derive_seed(spec.seed, &family.label, s as i64));
            metas.push(SiteMeta {
                site_id: site_id.clone(),
                generation_type: t.clone(),
                installed_capacity_mw: family.capacity_mw,
            });
            for (year, norm) in years.iter().zip(site_years(&family.kind, &years, &mut rng)) {
                let mut values: Vec<f64> = norm.iter().map(|v| v * family.capacity_mw).collect();
                if let Some(energy) = family.annual_energy_mwh {
                    rescale_to_energy(&mut values, energy, family.capacity_mw)?;
                }
                profiles.push(HourlyProfile {
                    site_id: site_id.clone(),
                    generation_type: t.clone(),
                    year: *year,
                    capacity_mw: family.capacity_mw,
                    values,
                });
            }
        }
    }
    Ok(Dataset {
        registry,
        metas,
        profiles,
    })
}
