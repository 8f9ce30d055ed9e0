//! Historical data ingestion and conditioned daily training samples.
//!
//! Hourly power is normalized by installed capacity, so every daily shape
//! lives in `[0, 1]` and keeps its magnitude relative to other days.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use chrono::{Datelike, Duration, NaiveDate, NaiveDateTime, Timelike};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::percentile;

pub const HOURS_PER_DAY: usize = 24;
pub const MONTHS: usize = 12;
pub const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M";

/// Duty-cycle threshold as a fraction of capacity.
pub const DEFAULT_DUTY_THRESHOLD: f64 = 0.01;
/// Readings up to this factor above capacity are clamped, larger ones rejected.
pub const CLAMP_TOLERANCE: f64 = 1.01;

/// Type labels accepted when no explicit registry is configured.
pub const DEFAULT_TYPE_LABELS: &[&str] = &[
    "biomass",
    "cogeneration",
    "hydro",
    "nuclear",
    "peaker",
    "solar",
    "thermal",
    "wind",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationType {
    pub label: String,
    /// Enables the duty-cycle pathway.
    pub intermittent: bool,
    /// Position in the one-hot encoding.
    pub index: usize,
}

/// Ordered, closed set of generation types; indices are one-hot positions.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeRegistry {
    types: Vec<GenerationType>,
}

impl TypeRegistry {
    /// Build from `(label, intermittent)` pairs. Labels are sorted so the
    /// encoding does not depend on input order.
    pub fn new<I, S>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, bool)>,
        S: Into<String>,
    {
        let mut map: BTreeMap<String, bool> = BTreeMap::new();
        for (label, intermittent) in entries {
            let label = label.into();
            if map.insert(label.clone(), intermittent).is_some() {
                return Err(Error::Data(format!("duplicate type label {label:?}")));
            }
        }
        let types = map
            .into_iter()
            .enumerate()
            .map(|(index, (label, intermittent))| GenerationType {
                label,
                intermittent,
                index,
            })
            .collect();
        Ok(TypeRegistry { types })
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    pub fn types(&self) -> &[GenerationType] {
        &self.types
    }

    pub fn get(&self, label: &str) -> Option<&GenerationType> {
        self.types.iter().find(|t| t.label == label)
    }

    pub fn lookup(&self, label: &str) -> Result<&GenerationType> {
        self.get(label)
            .ok_or_else(|| Error::UnknownType(label.to_string()))
    }

    pub fn by_index(&self, index: usize) -> Option<&GenerationType> {
        self.types.get(index)
    }

    pub fn any_intermittent(&self) -> bool {
        self.types.iter().any(|t| t.intermittent)
    }

    /// Registry holding only `label`, re-indexed to 0.
    pub fn restrict(&self, label: &str) -> Result<TypeRegistry> {
        let t = self.lookup(label)?;
        TypeRegistry::new([(t.label.clone(), t.intermittent)])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiteMeta {
    pub site_id: String,
    pub generation_type: GenerationType,
    pub installed_capacity_mw: f64,
}

/// One calendar year of hourly mean power for one site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HourlyProfile {
    pub site_id: String,
    pub generation_type: GenerationType,
    pub year: i32,
    /// Normalization base, carried so the profile is self-describing.
    pub capacity_mw: f64,
    pub values: Vec<f64>,
}

impl HourlyProfile {
    pub fn energy_mwh(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn normalized(&self) -> Vec<f64> {
        self.values.iter().map(|v| v / self.capacity_mw).collect()
    }

    /// Normalized 24-hour days.
    pub fn normalized_days(&self) -> Vec<[f64; HOURS_PER_DAY]> {
        split_into_days(self)
            .into_iter()
            .map(|d| d.map(|v| v / self.capacity_mw))
            .collect()
    }

    pub fn check(&self) -> Result<()> {
        let expected = hours_in_year(self.year);
        if self.values.len() != expected {
            return Err(Error::Data(format!(
                "profile {} {} has {} values, expected {expected}",
                self.site_id,
                self.year,
                self.values.len()
            )));
        }
        if self.capacity_mw <= 0.0 || !self.capacity_mw.is_finite() {
            return Err(Error::Data(format!(
                "profile {} has non-positive capacity",
                self.site_id
            )));
        }
        if let Some(v) = self
            .values
            .iter()
            .find(|v| !v.is_finite() || **v < 0.0 || **v > self.capacity_mw)
        {
            return Err(Error::Data(format!(
                "profile {} {} value {v} outside [0, {}]",
                self.site_id, self.year, self.capacity_mw
            )));
        }
        Ok(())
    }
}

/// 24 hourly values as fractions of installed capacity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DailyShape(pub [f64; HOURS_PER_DAY]);

impl DailyShape {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionVector {
    pub type_onehot: Vec<f64>,
    pub month_onehot: [f64; MONTHS],
    /// Previous day's final-hour normalized power.
    pub starting_point: f64,
}

impl ConditionVector {
    /// `month` is 1-based.
    pub fn new(
        type_index: usize,
        num_types: usize,
        month: u32,
        starting_point: f64,
    ) -> Result<Self> {
        if type_index >= num_types {
            return Err(Error::invalid(format!(
                "type index {type_index} out of range for {num_types} types"
            )));
        }
        if !(1..=12).contains(&month) {
            return Err(Error::invalid(format!("month {month} out of range")));
        }
        if !(0.0..=1.0).contains(&starting_point) {
            return Err(Error::invalid(format!(
                "starting point {starting_point} outside [0, 1]"
            )));
        }
        let mut type_onehot = vec![0.0; num_types];
        type_onehot[type_index] = 1.0;
        let mut month_onehot = [0.0; MONTHS];
        month_onehot[month as usize - 1] = 1.0;
        Ok(ConditionVector {
            type_onehot,
            month_onehot,
            starting_point,
        })
    }

    pub fn type_index(&self) -> usize {
        self.type_onehot.iter().position(|v| *v == 1.0).unwrap_or(0)
    }

    /// 1-based month.
    pub fn month(&self) -> u32 {
        self.month_onehot
            .iter()
            .position(|v| *v == 1.0)
            .unwrap_or(0) as u32
            + 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSample {
    pub condition: ConditionVector,
    pub target_shape: DailyShape,
    /// Present iff the sample's type is intermittent.
    pub target_duty: Option<f64>,
}

/// Validated historical data set.
#[derive(Debug, Clone, Default)]
pub struct Dataset {
    pub registry: TypeRegistry,
    pub metas: Vec<SiteMeta>,
    pub profiles: Vec<HourlyProfile>,
}

impl Dataset {
    /// Only the sites and profiles of type `label`, with a single-type registry.
    pub fn filter_type(&self, label: &str) -> Result<Dataset> {
        let registry = self.registry.restrict(label)?;
        let t = registry.lookup(label)?.clone();
        let metas = self
            .metas
            .iter()
            .filter(|m| m.generation_type.label == label)
            .map(|m| SiteMeta {
                generation_type: t.clone(),
                ..m.clone()
            })
            .collect();
        let profiles = self
            .profiles
            .iter()
            .filter(|p| p.generation_type.label == label)
            .map(|p| HourlyProfile {
                generation_type: t.clone(),
                ..p.clone()
            })
            .collect();
        Ok(Dataset {
            registry,
            metas,
            profiles,
        })
    }

    pub fn meta(&self, site_id: &str) -> Option<&SiteMeta> {
        self.metas.iter().find(|m| m.site_id == site_id)
    }

    pub fn profiles_of_site<'a>(
        &'a self,
        site_id: &'a str,
    ) -> impl Iterator<Item = &'a HourlyProfile> + 'a {
        self.profiles.iter().filter(move |p| p.site_id == site_id)
    }

    pub fn profiles_of_type<'a>(
        &'a self,
        label: &'a str,
    ) -> impl Iterator<Item = &'a HourlyProfile> + 'a {
        self.profiles
            .iter()
            .filter(move |p| p.generation_type.label == label)
    }
}

// ---------------------------------------------------------------------------
// Calendar

pub fn is_leap_year(year: i32) -> bool {
    NaiveDate::from_ymd_opt(year, 2, 29).is_some()
}

pub fn days_in_year(year: i32) -> usize {
    if is_leap_year(year) {
        366
    } else {
        365
    }
}

pub fn hours_in_year(year: i32) -> usize {
    days_in_year(year) * HOURS_PER_DAY
}

/// Calendar date of 0-based day `day` in `year`.
pub fn date_of_day(year: i32, day: usize) -> NaiveDate {
    NaiveDate::from_yo_opt(year, day as u32 + 1).expect("day within year")
}

/// 1-based month of 0-based day `day`.
pub fn month_of_day(year: i32, day: usize) -> u32 {
    date_of_day(year, day).month()
}

pub fn days_in_month(year: i32, month: u32) -> usize {
    let first = NaiveDate::from_ymd_opt(year, month, 1).expect("valid month");
    let next = if month == 12 {
        NaiveDate::from_ymd_opt(year + 1, 1, 1)
    } else {
        NaiveDate::from_ymd_opt(year, month + 1, 1)
    }
    .expect("valid month");
    (next - first).num_days() as usize
}

pub fn hours_in_month(year: i32, month: u32) -> usize {
    days_in_month(year, month) * HOURS_PER_DAY
}

pub fn year_start(year: i32) -> NaiveDateTime {
    NaiveDate::from_ymd_opt(year, 1, 1)
        .expect("valid year")
        .and_hms_opt(0, 0, 0)
        .expect("midnight")
}

pub fn format_timestamp(ts: NaiveDateTime) -> String {
    ts.format(TIMESTAMP_FORMAT).to_string()
}

/// Timestamp of 0-based hour `hour` of `year`, formatted for CSV output.
pub fn hour_timestamp(year: i32, hour: usize) -> String {
    format_timestamp(year_start(year) + Duration::hours(hour as i64))
}

pub fn parse_timestamp(s: &str) -> Result<NaiveDateTime> {
    let ts = NaiveDateTime::parse_from_str(s.trim(), TIMESTAMP_FORMAT)
        .map_err(|e| Error::Data(format!("bad timestamp {s:?}: {e}")))?;
    if ts.minute() != 0 || ts.second() != 0 {
        return Err(Error::Data(format!("timestamp {s:?} is not on the hour")));
    }
    Ok(ts)
}

// ---------------------------------------------------------------------------
// Ingestion

#[derive(Debug, Deserialize)]
struct MetaRow {
    site_id: String,
    #[serde(rename = "type")]
    type_label: String,
    capacity_mw: f64,
    intermittent: u8,
}

#[derive(Debug, Deserialize)]
struct DataRow {
    timestamp: String,
    site_id: String,
    power_mw: f64,
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    Error::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

fn open_csv(path: &Path, header: &[&str]) -> Result<csv::Reader<std::fs::File>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file);
    let found: Vec<String> = reader
        .headers()
        .map_err(|e| csv_err(path, e))?
        .iter()
        .map(str::to_string)
        .collect();
    if found != header {
        return Err(Error::Csv {
            path: path.to_path_buf(),
            message: format!(
                "expected header {:?}, found {:?}",
                header.join(","),
                found.join(",")
            ),
        });
    }
    Ok(reader)
}

/// Read and validate the site metadata CSV.
///
/// `allowed_types` is the closed label set; types not in it are rejected.
pub fn read_meta_csv(
    meta_path: &Path,
    allowed_types: &[String],
) -> Result<(TypeRegistry, Vec<SiteMeta>)> {
    let mut reader = open_csv(
        meta_path,
        &["site_id", "type", "capacity_mw", "intermittent"],
    )?;
    let mut rows = Vec::new();
    for rec in reader.deserialize::<MetaRow>() {
        rows.push(rec.map_err(|e| csv_err(meta_path, e))?);
    }

    let mut type_flags: BTreeMap<String, bool> = BTreeMap::new();
    let mut seen = HashMap::new();
    for row in &rows {
        if !allowed_types.contains(&row.type_label) {
            return Err(Error::UnknownType(row.type_label.clone()));
        }
        if row.intermittent > 1 {
            return Err(Error::Data(format!(
                "site {}: intermittent must be 0 or 1, got {}",
                row.site_id, row.intermittent
            )));
        }
        if !(row.capacity_mw > 0.0 && row.capacity_mw.is_finite()) {
            return Err(Error::Data(format!(
                "site {}: capacity_mw must be positive, got {}",
                row.site_id, row.capacity_mw
            )));
        }
        if seen.insert(row.site_id.clone(), ()).is_some() {
            return Err(Error::Data(format!("duplicate site_id {}", row.site_id)));
        }
        let flag = row.intermittent == 1;
        if let Some(prev) = type_flags.insert(row.type_label.clone(), flag) {
            if prev != flag {
                return Err(Error::Data(format!(
                    "type {} has inconsistent intermittent flags",
                    row.type_label
                )));
            }
        }
    }

    let registry = TypeRegistry::new(type_flags)?;
    let metas = rows
        .into_iter()
        .map(|row| {
            let t = registry.lookup(&row.type_label)?.clone();
            Ok(SiteMeta {
                site_id: row.site_id,
                generation_type: t,
                installed_capacity_mw: row.capacity_mw,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((registry, metas))
}

/// Ingest historical hourly data and site metadata.
///
/// Produces one profile per (site, year). Every year present must be
/// complete and contiguous; readings up to 1% above capacity are clamped.
pub fn ingest_hourly_csv(
    data_path: &Path,
    meta_path: &Path,
    allowed_types: &[String],
) -> Result<Dataset> {
    let (registry, metas) = read_meta_csv(meta_path, allowed_types)?;
    let capacity: HashMap<&str, f64> = metas
        .iter()
        .map(|m| (m.site_id.as_str(), m.installed_capacity_mw))
        .collect();

    let mut reader = open_csv(data_path, &["timestamp", "site_id", "power_mw"])?;
    let headers = reader.headers().map_err(|e| csv_err(data_path, e))?.clone();
    let mut series: BTreeMap<String, Vec<(NaiveDateTime, f64)>> = BTreeMap::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| csv_err(data_path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        let row: DataRow = rec
            .deserialize(Some(&headers))
            .map_err(|e| csv_err(data_path, e))?;
        let cap = *capacity.get(row.site_id.as_str()).ok_or_else(|| {
            Error::Data(format!(
                "row {line}: site {:?} not in metadata",
                row.site_id
            ))
        })?;
        let ts = parse_timestamp(&row.timestamp)?;
        let mut value = row.power_mw;
        if !value.is_finite() {
            return Err(Error::Data(format!("row {line}: non-finite power")));
        }
        if value < 0.0 {
            return Err(Error::NegativePower { row: line, value });
        }
        if value > CLAMP_TOLERANCE * cap {
            return Err(Error::OverCapacity {
                row: line,
                value,
                capacity: cap,
            });
        }
        if value > cap {
            value = cap;
        }
        series.entry(row.site_id).or_default().push((ts, value));
    }

    let mut profiles = Vec::new();
    for meta in &metas {
        let Some(rows) = series.get_mut(&meta.site_id) else {
            continue;
        };
        profiles.extend(site_profiles(meta, rows)?);
    }
    if profiles.is_empty() {
        return Err(Error::Data("no hourly data rows".into()));
    }
    Ok(Dataset {
        registry,
        metas,
        profiles,
    })
}

fn site_profiles(meta: &SiteMeta, rows: &mut [(NaiveDateTime, f64)]) -> Result<Vec<HourlyProfile>> {
    rows.sort_by_key(|r| r.0);
    let missing = |ts: NaiveDateTime| Error::MissingHour {
        site_id: meta.site_id.clone(),
        timestamp: format_timestamp(ts),
    };

    let first = rows[0].0;
    let start = year_start(first.year());
    if first != start {
        return Err(missing(start));
    }
    for pair in rows.windows(2) {
        let expected = pair[0].0 + Duration::hours(1);
        if pair[1].0 == pair[0].0 {
            return Err(Error::Data(format!(
                "duplicate hour {} for site {}",
                format_timestamp(pair[0].0),
                meta.site_id
            )));
        }
        if pair[1].0 != expected {
            return Err(missing(expected));
        }
    }
    let last = rows[rows.len() - 1].0;
    let end = year_start(last.year() + 1) - Duration::hours(1);
    if last != end {
        return Err(missing(last + Duration::hours(1)));
    }

    let mut out = Vec::new();
    let mut offset = 0;
    for year in first.year()..=last.year() {
        let n = hours_in_year(year);
        let values = rows[offset..offset + n].iter().map(|r| r.1).collect();
        offset += n;
        out.push(HourlyProfile {
            site_id: meta.site_id.clone(),
            generation_type: meta.generation_type.clone(),
            year,
            capacity_mw: meta.installed_capacity_mw,
            values,
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Daily shapes

/// Slice a profile into consecutive 24-hour days.
pub fn split_into_days(profile: &HourlyProfile) -> Vec<[f64; HOURS_PER_DAY]> {
    profile
        .values
        .chunks_exact(HOURS_PER_DAY)
        .map(|c| c.try_into().expect("24-hour chunk"))
        .collect()
}

pub fn normalize_shape(day: &[f64], capacity: f64) -> Result<DailyShape> {
    if !(capacity > 0.0) {
        return Err(Error::invalid(format!(
            "capacity must be positive, got {capacity}"
        )));
    }
    if day.len() != HOURS_PER_DAY {
        return Err(Error::dim(format!("day has {} hours", day.len())));
    }
    let mut shape = [0.0; HOURS_PER_DAY];
    for (s, &v) in shape.iter_mut().zip(day) {
        if !(0.0..=capacity).contains(&v) {
            return Err(Error::Data(format!(
                "hourly value {v} outside [0, {capacity}]"
            )));
        }
        *s = v / capacity;
    }
    Ok(DailyShape(shape))
}

/// Fraction of hours whose normalized output is strictly above `threshold`.
pub fn compute_duty_cycle(shape: &DailyShape, threshold: f64) -> f64 {
    shape.0.iter().filter(|v| **v > threshold).count() as f64 / HOURS_PER_DAY as f64
}

/// One conditioned sample per calendar day.
///
/// Day `d` is conditioned on the final normalized hour of day `d - 1`; the
/// first day of each (site, year) uses its own hour 0.
pub fn build_training_set(
    profiles: &[HourlyProfile],
    registry: &TypeRegistry,
    duty_threshold: f64,
) -> Result<Vec<TrainingSample>> {
    if profiles.is_empty() {
        return Err(Error::Data("empty training input".into()));
    }
    let k = registry.len();
    let mut samples = Vec::with_capacity(profiles.len() * 366);
    for profile in profiles {
        profile.check()?;
        let t = registry.lookup(&profile.generation_type.label)?;
        let days = split_into_days(profile);
        let mut prev_last: Option<f64> = None;
        for (d, day) in days.iter().enumerate() {
            let shape = normalize_shape(day, profile.capacity_mw)?;
            let starting_point = prev_last.unwrap_or(shape.0[0]);
            let month = month_of_day(profile.year, d);
            let condition = ConditionVector::new(t.index, k, month, starting_point)?;
            let target_duty = t
                .intermittent
                .then(|| compute_duty_cycle(&shape, duty_threshold));
            prev_last = Some(shape.0[HOURS_PER_DAY - 1]);
            samples.push(TrainingSample {
                condition,
                target_shape: shape,
                target_duty,
            });
        }
    }
    Ok(samples)
}

// ---------------------------------------------------------------------------
// Per-type history summary

/// Percentile grid used for stored ramp quantiles: 50.0, 50.1, ..., 100.0.
const RAMP_GRID_LO: f64 = 50.0;
const RAMP_GRID_STEP: f64 = 0.1;
const RAMP_GRID_LEN: usize = 501;

/// Historical statistics of one generation type needed at synthesis time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeStats {
    pub label: String,
    /// Mean normalized power per calendar month.
    pub month_mean: [f64; MONTHS],
    /// Normalized hour-0 values of every historical January 1st.
    pub jan1_starts: Vec<f64>,
    /// Absolute normalized hour-to-hour ramps at percentiles 50.0..=100.0
    /// in steps of 0.1.
    pub ramp_quantiles: Vec<f64>,
    pub duty_threshold: f64,
}

impl TypeStats {
    pub fn from_profiles<'a, I>(label: &str, profiles: I, duty_threshold: f64) -> Result<Self>
    where
        I: IntoIterator<Item = &'a HourlyProfile>,
    {
        let mut sums = [0.0; MONTHS];
        let mut counts = [0usize; MONTHS];
        let mut jan1_starts = Vec::new();
        let mut ramps = Vec::new();
        for p in profiles {
            let norm = p.normalized();
            jan1_starts.push(norm[0]);
            for (d, day) in norm.chunks_exact(HOURS_PER_DAY).enumerate() {
                let m = month_of_day(p.year, d) as usize - 1;
                sums[m] += day.iter().sum::<f64>();
                counts[m] += HOURS_PER_DAY;
            }
            ramps.extend(norm.windows(2).map(|w| (w[1] - w[0]).abs()));
        }
        if jan1_starts.is_empty() {
            return Err(Error::Data(format!("no history for type {label}")));
        }
        if let Some(m) = counts.iter().position(|c| *c == 0) {
            return Err(Error::Data(format!(
                "type {label} has no history for month {}",
                m + 1
            )));
        }
        let mut month_mean = [0.0; MONTHS];
        for m in 0..MONTHS {
            month_mean[m] = sums[m] / counts[m] as f64;
        }
        ramps.sort_by(f64::total_cmp);
        let ramp_quantiles = (0..RAMP_GRID_LEN)
            .map(|i| percentile(&ramps, RAMP_GRID_LO + RAMP_GRID_STEP * i as f64))
            .collect();
        Ok(TypeStats {
            label: label.to_string(),
            month_mean,
            jan1_starts,
            ramp_quantiles,
            duty_threshold,
        })
    }

    /// Historical absolute ramp at percentile `p` in `(50, 100]`.
    pub fn ramp_limit(&self, p: f64) -> f64 {
        let pos = ((p - RAMP_GRID_LO) / RAMP_GRID_STEP).clamp(0.0, (RAMP_GRID_LEN - 1) as f64);
        let lo = pos.floor() as usize;
        let hi = (lo + 1).min(RAMP_GRID_LEN - 1);
        let frac = pos - lo as f64;
        // exact grid points must return the stored value untouched
        if frac < 1e-9 {
            return self.ramp_quantiles[lo];
        }
        self.ramp_quantiles[lo] + frac * (self.ramp_quantiles[hi] - self.ramp_quantiles[lo])
    }
}

/// Everything the trainer needs: samples, the type encoding, and the
/// per-type history summary stored with the model.
#[derive(Debug, Clone)]
pub struct TrainingData {
    pub registry: TypeRegistry,
    pub samples: Vec<TrainingSample>,
    pub stats: Vec<TypeStats>,
}

impl TrainingData {
    pub fn from_profiles(
        profiles: &[HourlyProfile],
        registry: &TypeRegistry,
        duty_threshold: f64,
    ) -> Result<Self> {
        let samples = build_training_set(profiles, registry, duty_threshold)?;
        let stats = registry
            .types()
            .iter()
            .map(|t| {
                TypeStats::from_profiles(
                    &t.label,
                    profiles
                        .iter()
                        .filter(|p| p.generation_type.label == t.label),
                    duty_threshold,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TrainingData {
            registry: registry.clone(),
            samples,
            stats,
        })
    }

    pub fn from_dataset(dataset: &Dataset, duty_threshold: f64) -> Result<Self> {
        Self::from_profiles(&dataset.profiles, &dataset.registry, duty_threshold)
    }
}
