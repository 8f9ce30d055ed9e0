//! Evaluation metrics for synthesized profiles and the two traditional
//! baselines (average profiling and random day sampling).

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::data::{
    compute_duty_cycle, days_in_year, is_leap_year, month_of_day, DailyShape, HourlyProfile,
    TypeStats, DEFAULT_DUTY_THRESHOLD, HOURS_PER_DAY, MONTHS,
};
use crate::error::{Error, Result};
use crate::par::{self, Exec};
use crate::rng::from_seed;
use crate::synthesis::{rescale_to_energy, ForecastTarget};

/// Default ACF horizon: one week of hourly lags.
pub const DEFAULT_MAX_LAG: usize = 168;

/// Linearly interpolated percentile `p` (0..=100) of a sorted, non-empty slice.
pub fn percentile(sorted: &[f64], p: f64) -> f64 {
    let rank = p / 100.0 * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    sorted[lo] + (rank - lo as f64) * (sorted[hi] - sorted[lo])
}

fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Wasserstein-1 distance between two empirical distributions.
///
/// Equal sizes use the mean absolute difference of order statistics; unequal
/// sizes integrate the absolute quantile difference over the merged
/// quantile breakpoints.
pub fn wasserstein1(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid("wasserstein1 needs non-empty samples"));
    }
    let sa = sorted(a);
    let sb = sorted(b);
    let (n, m) = (sa.len(), sb.len());
    if n == m {
        return Ok(sa.iter().zip(&sb).map(|(x, y)| (x - y).abs()).sum::<f64>() / n as f64);
    }
    let (mut i, mut j) = (0, 0);
    let mut u = 0.0;
    let mut total = 0.0;
    while i < n && j < m {
        // compare (i+1)/n with (j+1)/m exactly
        let lhs = (i + 1) * m;
        let rhs = (j + 1) * n;
        let next = if lhs <= rhs {
            (i + 1) as f64 / n as f64
        } else {
            (j + 1) as f64 / m as f64
        };
        total += (next - u) * (sa[i] - sb[j]).abs();
        u = next;
        if lhs <= rhs {
            i += 1;
        }
        if rhs <= lhs {
            j += 1;
        }
    }
    Ok(total)
}

/// Sample autocorrelation at lags `0..=max_lag`.
pub fn acf(series: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    if series.len() <= max_lag {
        return Err(Error::invalid(format!(
            "series of length {} too short for lag {max_lag}",
            series.len()
        )));
    }
    let n = series.len() as f64;
    let mean = series.iter().sum::<f64>() / n;
    let centered: Vec<f64> = series.iter().map(|x| x - mean).collect();
    let var: f64 = centered.iter().map(|x| x * x).sum();
    if !(var > 0.0) || var / n < 1e-24 {
        return Err(Error::ConstantSeries);
    }
    Ok((0..=max_lag)
        .map(|k| {
            centered
                .iter()
                .zip(&centered[k..])
                .map(|(a, b)| a * b)
                .sum::<f64>()
                / var
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diversity {
    pub min_pairwise: f64,
    pub exact_duplicates: usize,
}

fn l2(a: &[f64; HOURS_PER_DAY], b: &[f64; HOURS_PER_DAY]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Minimum pairwise Euclidean distance and number of exactly equal pairs.
pub fn diversity(days: &[DailyShape], exec: Exec) -> Result<Diversity> {
    if days.len() < 2 {
        return Err(Error::invalid("diversity needs at least 2 days"));
    }
    let rows = par::map_range(exec, days.len() - 1, |i| {
        let mut min = f64::INFINITY;
        let mut dups = 0usize;
        for other in &days[i + 1..] {
            if days[i].0 == other.0 {
                dups += 1;
                min = 0.0;
            } else {
                min = min.min(l2(&days[i].0, &other.0));
            }
        }
        (min, dups)
    });
    Ok(rows.into_iter().fold(
        Diversity {
            min_pairwise: f64::INFINITY,
            exact_duplicates: 0,
        },
        |acc, (min, dups)| Diversity {
            min_pairwise: acc.min_pairwise.min(min),
            exact_duplicates: acc.exact_duplicates + dups,
        },
    ))
}

/// Mean distance from each generated day to its nearest training day.
pub fn memorization_distance(
    generated: &[DailyShape],
    training: &[DailyShape],
    exec: Exec,
) -> Result<f64> {
    if generated.is_empty() || training.is_empty() {
        return Err(Error::invalid(
            "memorization distance needs non-empty inputs",
        ));
    }
    let nearest = par::map(exec, generated, |g| {
        training
            .iter()
            .map(|t| l2(&g.0, &t.0))
            .fold(f64::INFINITY, f64::min)
    });
    Ok(nearest.iter().sum::<f64>() / generated.len() as f64)
}

// ---------------------------------------------------------------------------
// Baselines

/// Normalized days of `profile` mapped onto the calendar of `target_year`:
/// Feb 29 is dropped for non-leap targets and filled with Feb 28 for leap
/// targets.
fn days_on_calendar(profile: &HourlyProfile, target_year: i32) -> Vec<[f64; HOURS_PER_DAY]> {
    let mut days = profile.normalized_days();
    const FEB29: usize = 59;
    match (is_leap_year(profile.year), is_leap_year(target_year)) {
        (true, false) => {
            days.remove(FEB29);
        }
        (false, true) => {
            let feb28 = days[FEB29 - 1];
            days.insert(FEB29, feb28);
        }
        _ => {}
    }
    days
}

fn check_history(history: &[HourlyProfile], target: &ForecastTarget) -> Result<()> {
    if history.is_empty() {
        return Err(Error::Data(
            "baseline needs at least one historical year".into(),
        ));
    }
    if let Some(p) = history
        .iter()
        .find(|p| p.generation_type.label != target.generation_type)
    {
        return Err(Error::Data(format!(
            "history profile of site {} has type {}, target wants {}",
            p.site_id, p.generation_type.label, target.generation_type
        )));
    }
    Ok(())
}

/// Hour-by-hour mean of the normalized historical years on the target calendar.
pub fn average_profile_shape(history: &[HourlyProfile], target_year: i32) -> Result<Vec<f64>> {
    if history.is_empty() {
        return Err(Error::Data(
            "baseline needs at least one historical year".into(),
        ));
    }
    let mut sum = vec![0.0; days_in_year(target_year) * HOURS_PER_DAY];
    for p in history {
        for (s, v) in sum
            .iter_mut()
            .zip(days_on_calendar(p, target_year).iter().flatten())
        {
            *s += v;
        }
    }
    let n = history.len() as f64;
    Ok(sum.into_iter().map(|s| s / n).collect())
}

fn finish_baseline(
    target: &ForecastTarget,
    history: &[HourlyProfile],
    normalized: Vec<f64>,
) -> Result<HourlyProfile> {
    target.validate()?;
    let cap = target.capacity_mw;
    let mut values: Vec<f64> = normalized.into_iter().map(|v| v * cap).collect();
    rescale_to_energy(&mut values, target.annual_energy_mwh, cap).map_err(|e| {
        Error::Infeasible {
            site_id: target.site_id.clone(),
            year: target.target_year,
            reason: e.to_string(),
        }
    })?;
    Ok(HourlyProfile {
        site_id: target.site_id.clone(),
        generation_type: history[0].generation_type.clone(),
        year: target.target_year,
        capacity_mw: cap,
        values,
    })
}

/// Traditional average profiling: the mean historical year, scaled to the
/// target energy. Deterministic, so repeated target years are identical.
pub fn average_profile_baseline(
    history: &[HourlyProfile],
    target: &ForecastTarget,
) -> Result<HourlyProfile> {
    check_history(history, target)?;
    let shape = average_profile_shape(history, target.target_year)?;
    finish_baseline(target, history, shape)
}

/// Random day sampling: each target day is a uniformly drawn historical day
/// of the same month, concatenated without any continuity correction.
pub fn random_sampling_baseline(
    history: &[HourlyProfile],
    target: &ForecastTarget,
    seed: u64,
) -> Result<HourlyProfile> {
    check_history(history, target)?;
    let mut pools: Vec<Vec<[f64; HOURS_PER_DAY]>> = vec![Vec::new(); MONTHS];
    for p in history {
        for (d, day) in p.normalized_days().into_iter().enumerate() {
            pools[month_of_day(p.year, d) as usize - 1].push(day);
        }
    }
    if let Some(m) = pools.iter().position(Vec::is_empty) {
        return Err(Error::Data(format!("no history for month {}", m + 1)));
    }
    let mut rng = from_seed(seed);
    let year = target.target_year;
    let mut shape = Vec::with_capacity(days_in_year(year) * HOURS_PER_DAY);
    for d in 0..days_in_year(year) {
        let pool = &pools[month_of_day(year, d) as usize - 1];
        shape.extend_from_slice(&pool[rng.random_range(0..pool.len())]);
    }
    finish_baseline(target, history, shape)
}

// ---------------------------------------------------------------------------
// Report

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalConfig {
    pub ramp_percentile: f64,
    pub duty_threshold: f64,
    pub max_lag: usize,
    pub exec: Exec,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            ramp_percentile: 99.5,
            duty_threshold: DEFAULT_DUTY_THRESHOLD,
            max_lag: DEFAULT_MAX_LAG,
            exec: Exec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// Largest `|energy / target - 1|` over the generated years.
    pub magnitude_error: f64,
    /// RMSE between generated and historical mean hour-of-day curves.
    pub hourly_profile_rmse: f64,
    /// Wasserstein-1 of normalized hourly values, per calendar month.
    pub value_distribution_w1: [f64; MONTHS],
    /// RMSE between mean ACFs over lags 1..=max_lag.
    pub acf_rmse: f64,
    /// Wasserstein-1 of hour-to-hour normalized ramps.
    pub ramp_w1: f64,
    /// Wasserstein-1 of per-day duty cycles (intermittent types only).
    pub duty_w1: Option<f64>,
    pub diversity_min_pairwise: f64,
    pub exact_duplicate_days: usize,
    pub memorization_nn_distance: f64,
    /// Fraction of day boundaries whose jump exceeds the historical ramp
    /// limit.
    pub boundary_violation_rate: f64,
}

/// Columns of [`MetricsReport::csv_row`].
pub fn csv_header() -> Vec<String> {
    let mut h: Vec<String> = ["magnitude_error", "hourly_profile_rmse"]
        .map(String::from)
        .to_vec();
    h.push("value_distribution_w1_max".into());
    h.extend((1..=MONTHS).map(|m| format!("value_distribution_w1_m{m:02}")));
    h.extend(
        [
            "acf_rmse",
            "ramp_w1",
            "duty_w1",
            "diversity_min_pairwise",
            "exact_duplicate_days",
            "memorization_nn_distance",
            "boundary_violation_rate",
        ]
        .map(String::from),
    );
    h
}

impl MetricsReport {
    pub fn value_distribution_w1_max(&self) -> f64 {
        self.value_distribution_w1
            .iter()
            .copied()
            .fold(0.0, f64::max)
    }

    /// Flat row matching [`csv_header`]; an absent duty metric is empty.
    pub fn csv_row(&self) -> Vec<String> {
        let f = |x: f64| format!("{x:.9e}");
        let mut row = vec![f(self.magnitude_error), f(self.hourly_profile_rmse)];
        row.push(f(self.value_distribution_w1_max()));
        row.extend(self.value_distribution_w1.iter().map(|x| f(*x)));
        row.push(f(self.acf_rmse));
        row.push(f(self.ramp_w1));
        row.push(self.duty_w1.map(f).unwrap_or_default());
        row.push(f(self.diversity_min_pairwise));
        row.push(self.exact_duplicate_days.to_string());
        row.push(f(self.memorization_nn_distance));
        row.push(f(self.boundary_violation_rate));
        row
    }
}

fn shapes(profiles: &[HourlyProfile]) -> Vec<DailyShape> {
    profiles
        .iter()
        .flat_map(|p| p.normalized_days())
        .map(DailyShape)
        .collect()
}

fn hour_of_day_means(profiles: &[HourlyProfile]) -> [f64; HOURS_PER_DAY] {
    let mut sum = [0.0; HOURS_PER_DAY];
    let mut n = 0usize;
    for p in profiles {
        for day in p.normalized_days() {
            for (s, v) in sum.iter_mut().zip(day) {
                *s += v;
            }
            n += 1;
        }
    }
    sum.map(|s| s / n as f64)
}

fn month_values(profiles: &[HourlyProfile]) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new(); MONTHS];
    for p in profiles {
        for (d, day) in p.normalized_days().into_iter().enumerate() {
            out[month_of_day(p.year, d) as usize - 1].extend_from_slice(&day);
        }
    }
    out
}

fn mean_acf(profiles: &[HourlyProfile], max_lag: usize, exec: Exec) -> Result<Vec<f64>> {
    let all = par::map(exec, profiles, |p| acf(&p.normalized(), max_lag));
    let mut mean = vec![0.0; max_lag + 1];
    for a in all {
        for (m, v) in mean.iter_mut().zip(a?) {
            *m += v;
        }
    }
    Ok(mean
        .into_iter()
        .map(|m| m / profiles.len() as f64)
        .collect())
}

fn ramps(profiles: &[HourlyProfile]) -> Vec<f64> {
    profiles
        .iter()
        .flat_map(|p| {
            let n = p.normalized();
            n.windows(2).map(|w| w[1] - w[0]).collect::<Vec<_>>()
        })
        .collect()
}

fn duties(profiles: &[HourlyProfile], threshold: f64) -> Vec<f64> {
    shapes(profiles)
        .iter()
        .map(|s| compute_duty_cycle(s, threshold))
        .collect()
}

/// Largest `|energy / target - 1|` with each profile paired to its own
/// target (same site and year).
pub fn magnitude_error(generated: &[HourlyProfile], targets: &[ForecastTarget]) -> Result<f64> {
    generated.iter().try_fold(0.0f64, |acc, g| {
        let t = targets
            .iter()
            .find(|t| t.site_id == g.site_id && t.target_year == g.year)
            .ok_or_else(|| Error::Data(format!("no target for {} {}", g.site_id, g.year)))?;
        Ok(acc.max((g.energy_mwh() / t.annual_energy_mwh - 1.0).abs()))
    })
}

/// Fraction of day boundaries whose absolute jump exceeds `limit`
/// (normalized units).
pub fn boundary_violation_rate(profiles: &[HourlyProfile], limit: f64) -> f64 {
    let mut total = 0usize;
    let mut bad = 0usize;
    for p in profiles {
        let n = p.normalized();
        for b in (HOURS_PER_DAY..n.len()).step_by(HOURS_PER_DAY) {
            total += 1;
            if (n[b] - n[b - 1]).abs() > limit {
                bad += 1;
            }
        }
    }
    if total == 0 {
        0.0
    } else {
        bad as f64 / total as f64
    }
}

/// Score `generated` years for `target` against `history` of the same type.
pub fn evaluate(
    generated: &[HourlyProfile],
    history: &[HourlyProfile],
    target: &ForecastTarget,
    config: &EvalConfig,
) -> Result<MetricsReport> {
    if generated.is_empty() {
        return Err(Error::invalid("no generated profiles to evaluate"));
    }
    check_history(history, target)?;
    for g in generated {
        if g.generation_type.label != target.generation_type || g.site_id != target.site_id {
            return Err(Error::Data(format!(
                "generated profile {} ({}) does not match target {} ({})",
                g.site_id, g.generation_type.label, target.site_id, target.generation_type
            )));
        }
        g.check()?;
    }
    let intermittent = history[0].generation_type.intermittent;

    let magnitude_error = generated
        .iter()
        .map(|g| (g.energy_mwh() / target.annual_energy_mwh - 1.0).abs())
        .fold(0.0, f64::max);

    let gm = hour_of_day_means(generated);
    let hm = hour_of_day_means(history);
    let hourly_profile_rmse = (gm
        .iter()
        .zip(&hm)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / HOURS_PER_DAY as f64)
        .sqrt();

    let gmv = month_values(generated);
    let hmv = month_values(history);
    let mut value_distribution_w1 = [0.0; MONTHS];
    for m in 0..MONTHS {
        value_distribution_w1[m] = wasserstein1(&gmv[m], &hmv[m])?;
    }

    let ga = mean_acf(generated, config.max_lag, config.exec)?;
    let ha = mean_acf(history, config.max_lag, config.exec)?;
    let acf_rmse = (ga[1..]
        .iter()
        .zip(&ha[1..])
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / config.max_lag as f64)
        .sqrt();

    let ramp_w1 = wasserstein1(&ramps(generated), &ramps(history))?;
    let duty_w1 = if intermittent {
        Some(wasserstein1(
            &duties(generated, config.duty_threshold),
            &duties(history, config.duty_threshold),
        )?)
    } else {
        None
    };

    let gen_days = shapes(generated);
    let hist_days = shapes(history);
    let div = diversity(&gen_days, config.exec)?;
    let memorization_nn_distance = memorization_distance(&gen_days, &hist_days, config.exec)?;

    let stats = TypeStats::from_profiles(&target.generation_type, history, config.duty_threshold)?;
    let boundary_violation_rate =
        boundary_violation_rate(generated, stats.ramp_limit(config.ramp_percentile));

    Ok(MetricsReport {
        magnitude_error,
        hourly_profile_rmse,
        value_distribution_w1,
        acf_rmse,
        ramp_w1,
        duty_w1,
        diversity_min_pairwise: div.min_pairwise,
        exact_duplicate_days: div.exact_duplicates,
        memorization_nn_distance,
        boundary_violation_rate,
    })
}

/// One row of a method comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodReport {
    pub method: String,
    pub report: MetricsReport,
}

/// Side-by-side CSV table: one row per method, identical metric columns.
pub fn comparison_csv(rows: &[MethodReport]) -> String {
    let mut out = String::from("method,");
    out.push_str(&csv_header().join(","));
    out.push('\n');
    for r in rows {
        out.push_str(&r.method);
        out.push(',');
        out.push_str(&r.report.csv_row().join(","));
        out.push('\n');
    }
    out
}
