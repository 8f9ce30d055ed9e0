//! Multi-level assembly of continuous yearly profiles.
//!
//! Two time levels: a monthly magnitude envelope and GAN-generated daily
//! shapes. Days are chained through their starting point (each day is
//! conditioned on the previous day's last hour), intermittent types are
//! masked to their generated duty cycle, and the finished year is rescaled
//! so its energy matches the forecast exactly.

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use std::path::Path;

use crate::data::{
    days_in_year, hour_timestamp, hours_in_month, hours_in_year, month_of_day, ConditionVector,
    DailyShape, GenerationType, HourlyProfile, TypeStats, DEFAULT_DUTY_THRESHOLD, HOURS_PER_DAY,
    MONTHS,
};
use crate::error::{Error, Result};
use crate::gan::{GeneratedDay, TrainedGanModel};
use crate::par::{self, Exec};
use crate::rng::{derive_seed, from_seed, Rng};

/// Maximum clip-and-rescale passes when matching the annual energy.
pub const MAX_RESCALE_ITERATIONS: usize = 10;
/// Relative energy tolerance a finished year must meet.
pub const ENERGY_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastTarget {
    pub site_id: String,
    /// Generation type label.
    pub generation_type: String,
    pub target_year: i32,
    pub annual_energy_mwh: f64,
    /// Installed capacity of the target site, the normalization base.
    pub capacity_mw: f64,
    /// Optional share of the annual energy per calendar month.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monthly_shares: Option<[f64; MONTHS]>,
}

impl ForecastTarget {
    fn infeasible(&self, reason: impl Into<String>) -> Error {
        Error::Infeasible {
            site_id: self.site_id.clone(),
            year: self.target_year,
            reason: reason.into(),
        }
    }

    pub fn hours(&self) -> usize {
        hours_in_year(self.target_year)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.capacity_mw > 0.0 && self.capacity_mw.is_finite()) {
            return Err(self.infeasible("capacity_mw must be positive"));
        }
        if !(self.annual_energy_mwh > 0.0 && self.annual_energy_mwh.is_finite()) {
            return Err(self.infeasible("annual_energy_mwh must be positive"));
        }
        let max = self.capacity_mw * self.hours() as f64;
        if self.annual_energy_mwh > max {
            return Err(self.infeasible(format!(
                "annual energy {} MWh exceeds capacity x hours = {max} MWh",
                self.annual_energy_mwh
            )));
        }
        if let Some(shares) = &self.monthly_shares {
            if shares.iter().any(|s| !(*s >= 0.0)) {
                return Err(self.infeasible("monthly shares must be non-negative"));
            }
            let total: f64 = shares.iter().sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(self.infeasible(format!("monthly shares sum to {total}, not 1")));
            }
        }
        Ok(())
    }
}

/// One scale factor per calendar month, applied to generated normalized
/// shapes (times capacity).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonthlyEnvelope {
    pub factors: [f64; MONTHS],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthesisConfig {
    /// Percentile of historical hour-to-hour ramps used as the day-boundary
    /// limit.
    pub ramp_percentile: f64,
    pub max_resamples: usize,
    /// Weight of the previous day's last hour in the fallback blend.
    pub blend_weight: f64,
    pub duty_threshold: f64,
    pub seed: u64,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        SynthesisConfig {
            ramp_percentile: 99.5,
            max_resamples: 20,
            blend_weight: 0.5,
            duty_threshold: DEFAULT_DUTY_THRESHOLD,
            seed: 0,
        }
    }
}

impl SynthesisConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.ramp_percentile > 50.0 && self.ramp_percentile <= 100.0) {
            return Err(Error::invalid("ramp_percentile must lie in (50, 100]"));
        }
        if self.max_resamples < 1 {
            return Err(Error::invalid("max_resamples must be >= 1"));
        }
        if !(0.0..=1.0).contains(&self.blend_weight) {
            return Err(Error::invalid("blend_weight must lie in [0, 1]"));
        }
        if !(0.0..1.0).contains(&self.duty_threshold) {
            return Err(Error::invalid("duty_threshold must lie in [0, 1)"));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Monthly envelope

/// Envelope from historical profiles of the target's type.
///
/// Without monthly shares every factor is `annual target / expected
/// historical-shape energy`, i.e. the historical seasonality (already carried
/// by the month-conditioned daily shapes) is kept and only the level moves.
/// With shares, each month's factor makes that month's expected energy equal
/// `share * annual target`.
pub fn build_monthly_envelope(
    history: &[HourlyProfile],
    target: &ForecastTarget,
) -> Result<MonthlyEnvelope> {
    let mut sums = [0.0; MONTHS];
    let mut counts = [0usize; MONTHS];
    for p in history
        .iter()
        .filter(|p| p.generation_type.label == target.generation_type)
    {
        for (d, day) in p.values.chunks_exact(HOURS_PER_DAY).enumerate() {
            let m = month_of_day(p.year, d) as usize - 1;
            sums[m] += day.iter().map(|v| v / p.capacity_mw).sum::<f64>();
            counts[m] += HOURS_PER_DAY;
        }
    }
    let mut means = [None; MONTHS];
    for m in 0..MONTHS {
        if counts[m] > 0 {
            means[m] = Some(sums[m] / counts[m] as f64);
        }
    }
    envelope_from_month_means(&means, target)
}

/// Envelope from mean normalized power per month (`None` = no history).
pub fn envelope_from_month_means(
    means: &[Option<f64>; MONTHS],
    target: &ForecastTarget,
) -> Result<MonthlyEnvelope> {
    target.validate()?;
    let year = target.target_year;
    let cap = target.capacity_mw;
    let available: Vec<f64> = means.iter().flatten().copied().collect();
    let mut factors = [0.0; MONTHS];
    match &target.monthly_shares {
        None => {
            if let Some(m) = means.iter().position(Option::is_none) {
                return Err(target.infeasible(format!(
                    "no history for month {} and no monthly shares given",
                    m + 1
                )));
            }
            let expected: f64 = (0..MONTHS)
                .map(|m| means[m].unwrap_or(0.0) * cap * hours_in_month(year, m as u32 + 1) as f64)
                .sum();
            if !(expected > 0.0) {
                return Err(target.infeasible("historical output is zero"));
            }
            factors.fill(target.annual_energy_mwh / expected);
        }
        Some(shares) => {
            if available.is_empty() {
                return Err(target.infeasible("no history for this type"));
            }
            // months without history fall back to the mean of the others
            let fallback = available.iter().sum::<f64>() / available.len() as f64;
            for m in 0..MONTHS {
                let mean = means[m].unwrap_or(fallback);
                let expected = mean * cap * hours_in_month(year, m as u32 + 1) as f64;
                let wanted = shares[m] * target.annual_energy_mwh;
                if wanted == 0.0 {
                    factors[m] = 0.0;
                } else if expected > 0.0 {
                    factors[m] = wanted / expected;
                } else {
                    return Err(
                        target.infeasible(format!("month {} has zero historical output", m + 1))
                    );
                }
            }
        }
    }
    Ok(MonthlyEnvelope { factors })
}

fn envelope_from_stats(stats: &TypeStats, target: &ForecastTarget) -> Result<MonthlyEnvelope> {
    let means = stats.month_mean.map(Some);
    envelope_from_month_means(&means, target)
}

// ---------------------------------------------------------------------------
// Duty cycle

/// Hours kept by [`apply_duty_cycle`]: the `round(24 * duty)` largest,
/// ties going to the earlier hour.
pub fn duty_keep_mask(shape: &[f64; HOURS_PER_DAY], duty: f64) -> [bool; HOURS_PER_DAY] {
    let n = (HOURS_PER_DAY as f64 * duty.clamp(0.0, 1.0)).round() as usize;
    let mut order: [usize; HOURS_PER_DAY] = std::array::from_fn(|i| i);
    // stable: equal values keep index order
    order.sort_by(|&a, &b| shape[b].total_cmp(&shape[a]));
    let mut keep = [false; HOURS_PER_DAY];
    for &h in &order[..n] {
        keep[h] = true;
    }
    keep
}

/// Keep the `round(24 * duty)` largest hours and zero the rest.
pub fn apply_duty_cycle(shape: &DailyShape, duty: f64) -> DailyShape {
    let keep = duty_keep_mask(&shape.0, duty);
    let mut out = shape.0;
    for (v, k) in out.iter_mut().zip(keep) {
        if !k {
            *v = 0.0;
        }
    }
    DailyShape(out)
}

// ---------------------------------------------------------------------------
// Day chaining

/// Source of generated days for one generation type.
pub trait DaySampler {
    /// Draw a day for 1-based `month`, conditioned on `starting_point`.
    fn sample_day(&self, month: u32, starting_point: f64, rng: &mut Rng) -> Result<GeneratedDay>;
}

/// [`DaySampler`] backed by a trained model, with standard-normal latents.
pub struct ModelSampler<'a> {
    model: &'a TrainedGanModel,
    type_index: usize,
}

impl<'a> ModelSampler<'a> {
    pub fn new(model: &'a TrainedGanModel, type_label: &str) -> Result<Self> {
        let type_index = model.registry.lookup(type_label)?.index;
        Ok(ModelSampler { model, type_index })
    }

    pub fn stats(&self) -> &'a TypeStats {
        &self.model.stats[self.type_index]
    }
}

impl DaySampler for ModelSampler<'_> {
    fn sample_day(&self, month: u32, starting_point: f64, rng: &mut Rng) -> Result<GeneratedDay> {
        let condition = ConditionVector::new(
            self.type_index,
            self.model.registry.len(),
            month,
            starting_point,
        )?;
        let z: Vec<f64> = (0..self.model.latent_dim())
            .map(|_| StandardNormal.sample(rng))
            .collect();
        self.model.sample(&condition, &z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainedDay {
    /// Normalized shape after duty masking and any boundary blend.
    pub shape: DailyShape,
    pub duty: Option<f64>,
    pub attempts: usize,
    pub blended: bool,
}

/// Generate a day that connects to `prev_last_value`.
///
/// Draws up to `max_resamples` days until hour 0 is within `ramp_limit` of
/// the previous day's last hour. If none is, the closest attempt is taken
/// and its hour 0 blended towards the previous value. A duty-masked (zero)
/// hour 0 is left at zero so the duty cycle stays exact.
pub fn chain_day(
    sampler: &dyn DaySampler,
    prev_last_value: f64,
    month: u32,
    ramp_limit: f64,
    config: &SynthesisConfig,
    rng: &mut Rng,
) -> Result<ChainedDay> {
    if !(0.0..=1.0).contains(&prev_last_value) {
        return Err(Error::invalid(format!(
            "previous value {prev_last_value} outside [0, 1]"
        )));
    }
    let mut best: Option<(f64, ChainedDay)> = None;
    for attempt in 1..=config.max_resamples.max(1) {
        let day = sampler.sample_day(month, prev_last_value, rng)?;
        let shape = match day.duty {
            Some(d) => apply_duty_cycle(&day.shape, d),
            None => day.shape,
        };
        let gap = (shape.0[0] - prev_last_value).abs();
        let candidate = ChainedDay {
            shape,
            duty: day.duty,
            attempts: attempt,
            blended: false,
        };
        if gap <= ramp_limit {
            return Ok(candidate);
        }
        if best.as_ref().is_none_or(|(g, _)| gap < *g) {
            best = Some((gap, candidate));
        }
    }
    let (_, mut day) = best.expect("at least one attempt");
    day.attempts = config.max_resamples.max(1);
    let masked_off = day.duty.is_some() && day.shape.0[0] == 0.0;
    if !masked_off {
        let b = config.blend_weight;
        day.shape.0[0] = b * prev_last_value + (1.0 - b) * day.shape.0[0];
        day.blended = true;
    }
    Ok(day)
}

// ---------------------------------------------------------------------------
// Energy matching

/// Scale `values` so they sum to `energy` while staying within `[0, capacity]`.
///
/// Each pass rescales the values not yet at capacity and clips; returns the
/// number of passes.
pub fn rescale_to_energy(values: &mut [f64], energy: f64, capacity: f64) -> Result<usize> {
    let max = capacity * values.len() as f64;
    if energy > max {
        return Err(Error::invalid(format!(
            "energy {energy} exceeds capacity x hours = {max}"
        )));
    }
    for iteration in 1..=MAX_RESCALE_ITERATIONS {
        let clipped = values.iter().filter(|v| **v >= capacity).count();
        let free_sum: f64 = values.iter().filter(|v| **v < capacity).sum();
        let wanted_free = energy - capacity * clipped as f64;
        if !(free_sum > 0.0) {
            return Err(Error::invalid("profile has no output to scale"));
        }
        let k = wanted_free / free_sum;
        let mut new_clips = false;
        for v in values.iter_mut().filter(|v| **v < capacity) {
            *v *= k;
            if *v > capacity {
                *v = capacity;
                new_clips = true;
            }
        }
        if !new_clips {
            return Ok(iteration);
        }
    }
    let total: f64 = values.iter().sum();
    if (total / energy - 1.0).abs() <= ENERGY_TOLERANCE {
        return Ok(MAX_RESCALE_ITERATIONS);
    }
    Err(Error::invalid(format!(
        "energy did not converge within {MAX_RESCALE_ITERATIONS} clip-rescale passes"
    )))
}

// ---------------------------------------------------------------------------
// Year generation

/// Per-day bookkeeping of a synthesized year.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DayRecord {
    pub month: u32,
    pub duty: Option<f64>,
    pub attempts: usize,
    pub blended: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesizedYear {
    pub profile: HourlyProfile,
    pub days: Vec<DayRecord>,
    pub envelope: MonthlyEnvelope,
    pub ramp_limit: f64,
    pub rescale_passes: usize,
}

/// Synthesize one continuous year for `target` from a trained model.
pub fn generate_year(
    model: &TrainedGanModel,
    target: &ForecastTarget,
    config: &SynthesisConfig,
) -> Result<HourlyProfile> {
    generate_year_detailed(model, target, config).map(|y| y.profile)
}

pub fn generate_year_detailed(
    model: &TrainedGanModel,
    target: &ForecastTarget,
    config: &SynthesisConfig,
) -> Result<SynthesizedYear> {
    let sampler = ModelSampler::new(model, &target.generation_type)?;
    let gen_type = model.registry.lookup(&target.generation_type)?.clone();
    let mut year = synthesize_with(&sampler, sampler.stats(), target, config)?;
    year.profile.generation_type = gen_type;
    Ok(year)
}

/// Year synthesis against any [`DaySampler`] and history summary.
pub fn synthesize_with(
    sampler: &dyn DaySampler,
    stats: &TypeStats,
    target: &ForecastTarget,
    config: &SynthesisConfig,
) -> Result<SynthesizedYear> {
    config.validate()?;
    target.validate()?;
    if stats.jan1_starts.is_empty() {
        return Err(Error::Data(format!(
            "no January 1st history for {}",
            stats.label
        )));
    }
    let envelope = envelope_from_stats(stats, target)?;
    let ramp_limit = stats.ramp_limit(config.ramp_percentile);
    let mut rng = from_seed(config.seed);
    let mut prev = stats.jan1_starts[rng.random_range(0..stats.jan1_starts.len())].clamp(0.0, 1.0);

    let n_days = days_in_year(target.target_year);
    let cap = target.capacity_mw;
    let mut values = Vec::with_capacity(n_days * HOURS_PER_DAY);
    let mut days = Vec::with_capacity(n_days);
    for d in 0..n_days {
        let month = month_of_day(target.target_year, d);
        let day = chain_day(sampler, prev, month, ramp_limit, config, &mut rng)?;
        prev = day.shape.0[HOURS_PER_DAY - 1];
        let factor = envelope.factors[month as usize - 1];
        values.extend(day.shape.0.iter().map(|v| (v * cap * factor).min(cap)));
        days.push(DayRecord {
            month,
            duty: day.duty,
            attempts: day.attempts,
            blended: day.blended,
        });
    }
    let rescale_passes = rescale_to_energy(&mut values, target.annual_energy_mwh, cap)
        .map_err(|e| target.infeasible(e.to_string()))?;

    Ok(SynthesizedYear {
        profile: HourlyProfile {
            site_id: target.site_id.clone(),
            generation_type: GenerationType {
                label: stats.label.clone(),
                intermittent: days.iter().any(|d| d.duty.is_some()),
                index: 0,
            },
            year: target.target_year,
            capacity_mw: cap,
            values,
        },
        days,
        envelope,
        ramp_limit,
        rescale_passes,
    })
}

/// Seed of the RNG stream for one (site, year) under `master_seed`.
pub fn target_seed(master_seed: u64, target: &ForecastTarget) -> u64 {
    derive_seed(master_seed, &target.site_id, i64::from(target.target_year))
}

/// Model able to serve a target's type: the first one whose registry has it.
pub fn model_for<'a>(models: &'a [TrainedGanModel], label: &str) -> Result<&'a TrainedGanModel> {
    models
        .iter()
        .find(|m| m.registry.get(label).is_some())
        .ok_or_else(|| Error::UnknownType(label.to_string()))
}

/// Generate one profile per target, each from its own RNG stream derived
/// from `config.seed` and the target's (site, year). Results keep target
/// order; failures are reported per target.
pub fn generate_portfolio(
    models: &[TrainedGanModel],
    targets: &[ForecastTarget],
    config: &SynthesisConfig,
    exec: Exec,
) -> Vec<Result<HourlyProfile>> {
    par::map(exec, targets, |target| {
        let model = model_for(models, &target.generation_type)?;
        let cfg = SynthesisConfig {
            seed: target_seed(config.seed, target),
            ..config.clone()
        };
        generate_year(model, target, &cfg)
    })
}

// ---------------------------------------------------------------------------
// Output CSV

/// Profile as `timestamp,power_mw` CSV text with 3 decimals.
pub fn profile_csv_string(profile: &HourlyProfile) -> String {
    let mut out = String::with_capacity(24 * (profile.values.len() + 1));
    out.push_str("timestamp,power_mw\n");
    for (h, v) in profile.values.iter().enumerate() {
        out.push_str(&hour_timestamp(profile.year, h));
        out.push_str(&format!(",{v:.3}\n"));
    }
    out
}

pub fn write_profile_csv(path: &Path, profile: &HourlyProfile) -> Result<()> {
    std::fs::write(path, profile_csv_string(profile)).map_err(|e| Error::io(path, e))
}

/// Read a `timestamp,power_mw` file back into a profile for `year`.
pub fn read_profile_csv(
    path: &Path,
    site_id: &str,
    generation_type: GenerationType,
    year: i32,
    capacity_mw: f64,
) -> Result<HourlyProfile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let csv_err = |line: usize, msg: String| Error::Csv {
        path: path.to_path_buf(),
        message: format!("line {line}: {msg}"),
    };
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("timestamp,power_mw") {
        return Err(csv_err(1, "expected header timestamp,power_mw".into()));
    }
    let n = hours_in_year(year);
    let mut values = Vec::with_capacity(n);
    for (i, line) in lines.enumerate() {
        let (ts, v) = line
            .split_once(',')
            .ok_or_else(|| csv_err(i + 2, "expected two columns".into()))?;
        if i >= n || ts != hour_timestamp(year, i) {
            return Err(csv_err(i + 2, format!("unexpected timestamp {ts}")));
        }
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| csv_err(i + 2, format!("bad power value {v:?}")))?;
        values.push(v);
    }
    if values.len() != n {
        return Err(csv_err(
            values.len() + 1,
            format!("expected {n} hourly rows, found {}", values.len()),
        ));
    }
    let profile = HourlyProfile {
        site_id: site_id.to_string(),
        generation_type,
        year,
        capacity_mw,
        values,
    };
    profile.check()?;
    Ok(profile)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::cell::Cell;

    fn target(energy: f64) -> ForecastTarget {
        ForecastTarget {
            site_id: "s".into(),
            generation_type: "wind".into(),
            target_year: 2030,
            annual_energy_mwh: energy,
            capacity_mw: 10.0,
            monthly_shares: None,
        }
    }

    fn flat_history(level: f64) -> Vec<HourlyProfile> {
        vec![HourlyProfile {
            site_id: "h".into(),
            generation_type: crate::data::GenerationType {
                label: "wind".into(),
                intermittent: false,
                index: 0,
            },
            year: 2019,
            capacity_mw: 10.0,
            values: vec![level; 8760],
        }]
    }

    #[test]
    fn envelope_examples() {
        let hist = flat_history(4.0);
        let energy = 4.0 * 8760.0;
        let e = build_monthly_envelope(&hist, &target(energy)).unwrap();
        assert!(e.factors.iter().all(|f| (f - 1.0).abs() < 1e-12));
        let e = build_monthly_envelope(&hist, &target(2.0 * energy)).unwrap();
        assert!(e.factors.iter().all(|f| (f - 2.0).abs() < 1e-12));

        // equal energy shares: every month gets the same energy
        let mut t = target(energy);
        t.monthly_shares = Some([1.0 / 12.0; 12]);
        let e = build_monthly_envelope(&hist, &t).unwrap();
        let month_energy: Vec<f64> = (0..12)
            .map(|m| e.factors[m] * 4.0 * hours_in_month(2030, m as u32 + 1) as f64)
            .collect();
        assert!(month_energy
            .iter()
            .all(|x| (x - energy / 12.0).abs() < 1e-6));
    }

    #[test]
    fn envelope_needs_every_month_without_shares() {
        let mut hist = flat_history(4.0);
        hist[0].generation_type.label = "solar".into();
        assert!(build_monthly_envelope(&hist, &target(1000.0)).is_err());
    }

    #[test]
    fn infeasible_targets_rejected() {
        assert!(matches!(
            target(10.0 * 8760.0 + 1.0).validate(),
            Err(Error::Infeasible { .. })
        ));
        let mut t = target(100.0);
        t.monthly_shares = Some([0.1; 12]);
        assert!(t.validate().is_err());
    }

    #[test]
    fn duty_examples() {
        let s = DailyShape(std::array::from_fn(|i| 0.1 + i as f64 * 0.01));
        assert_eq!(apply_duty_cycle(&s, 1.0), s);
        assert_eq!(apply_duty_cycle(&s, 0.0).0, [0.0; 24]);
        let half = apply_duty_cycle(&s, 0.5);
        assert!(half.0[..12].iter().all(|v| *v == 0.0));
        assert_eq!(&half.0[12..], &s.0[12..]);
        // ties favour the earlier hour
        let flat = DailyShape([0.5; 24]);
        let kept = apply_duty_cycle(&flat, 3.0 / 24.0);
        assert_eq!(kept.0.iter().position(|v| *v == 0.0), Some(3));
    }

    struct Fixed {
        first: f64,
        calls: Cell<usize>,
    }

    impl DaySampler for Fixed {
        fn sample_day(&self, _month: u32, _sp: f64, _rng: &mut Rng) -> Result<GeneratedDay> {
            self.calls.set(self.calls.get() + 1);
            let mut s = [0.4; 24];
            s[0] = self.first;
            Ok(GeneratedDay {
                shape: DailyShape(s),
                duty: None,
            })
        }
    }

    #[test]
    fn chain_accepts_matching_day() {
        let sampler = Fixed {
            first: 0.5,
            calls: Cell::new(0),
        };
        let mut rng = from_seed(1);
        let day = chain_day(
            &sampler,
            0.5,
            1,
            0.05,
            &SynthesisConfig::default(),
            &mut rng,
        )
        .unwrap();
        assert_eq!(day.attempts, 1);
        assert!(!day.blended);
        assert_eq!(sampler.calls.get(), 1);
    }

    #[test]
    fn chain_blends_after_exhausting_resamples() {
        let sampler = Fixed {
            first: 0.9,
            calls: Cell::new(0),
        };
        let mut rng = from_seed(1);
        let cfg = SynthesisConfig::default();
        let day = chain_day(&sampler, 0.5, 1, 0.05, &cfg, &mut rng).unwrap();
        assert_eq!(sampler.calls.get(), cfg.max_resamples);
        assert!(day.blended);
        assert!((day.shape.0[0] - 0.7).abs() < 1e-12);
    }

    #[test]
    fn rescale_hits_energy_with_clipping() {
        let mut v: Vec<f64> = (0..100).map(|i| i as f64 / 10.0).collect();
        let passes = rescale_to_energy(&mut v, 800.0, 10.0).unwrap();
        let total: f64 = v.iter().sum();
        assert!((total / 800.0 - 1.0).abs() < 1e-12);
        assert!(v.iter().all(|x| (0.0..=10.0).contains(x)));
        assert!(passes > 1);
        assert!(rescale_to_energy(&mut v, 1001.0, 10.0).is_err());
    }

    #[test]
    fn csv_round_trip_to_three_decimals() {
        let mut p = flat_history(0.0).remove(0);
        p.year = 2024;
        p.values = (0..8784).map(|h| (h % 100) as f64 * 0.0731).collect();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        write_profile_csv(&path, &p).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text
            .starts_with("timestamp,power_mw\n2024-01-01T00:00,0.000\n2024-01-01T01:00,0.073\n"));
        let back = read_profile_csv(&path, "h", p.generation_type.clone(), 2024, 10.0).unwrap();
        assert!(back
            .values
            .iter()
            .zip(&p.values)
            .all(|(a, b)| (a - b).abs() <= 5e-4 + 1e-12));
        assert!(read_profile_csv(&path, "h", p.generation_type.clone(), 2023, 10.0).is_err());
    }

    proptest::proptest! {
        #[test]
        fn blend_stays_in_unit_interval(prev in 0.0f64..=1.0, first in 0.0f64..=1.0, beta in 0.0f64..=1.0) {
            let sampler = Fixed { first, calls: Cell::new(0) };
            let cfg = SynthesisConfig { blend_weight: beta, max_resamples: 2, ..Default::default() };
            let mut rng = from_seed(3);
            let day = chain_day(&sampler, prev, 1, 0.0, &cfg, &mut rng).unwrap();
            proptest::prop_assert!((0.0..=1.0).contains(&day.shape.0[0]));
        }

        #[test]
        fn duty_mask_count(shape in proptest::array::uniform24(0.01f64..1.0), duty in 0.0f64..=1.0) {
            let out = apply_duty_cycle(&DailyShape(shape), duty);
            let zeros = out.0.iter().filter(|v| **v == 0.0).count();
            proptest::prop_assert_eq!(zeros, 24 - (24.0 * duty).round() as usize);
        }
    }
}
