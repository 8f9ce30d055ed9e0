use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use profile_gan::data::{DailyShape, TrainingData};
use profile_gan::gan::{train, GanConfig, GanMode};
use profile_gan::metrics::{diversity, memorization_distance};
use profile_gan::outage::{inject_outages_all, OutageConfig};
use profile_gan::par::Exec;
use profile_gan::synthesis::{generate_portfolio, ForecastTarget, SynthesisConfig};
use profile_gan::synthetic::{generate_dataset, FamilySpec, SynthSpec};

const PATHS: [(&str, Exec); 2] = [
    ("sequential", Exec::Sequential),
    ("parallel", Exec::Parallel),
];

fn wind_history() -> profile_gan::data::Dataset {
    let spec = SynthSpec {
        families: vec![FamilySpec {
            sites: 4,
            ..FamilySpec::wind("wind")
        }],
        years: (2010..2020).collect(),
        seed: 1,
    };
    generate_dataset(&spec).unwrap()
}

fn days_of(history: &profile_gan::data::Dataset) -> Vec<DailyShape> {
    history
        .profiles
        .iter()
        .flat_map(|p| p.normalized_days())
        .map(DailyShape)
        .collect()
}

fn bench_metrics(c: &mut Criterion) {
    let days = days_of(&wind_history());
    let (generated, training) = days.split_at(3650);
    let mut group = c.benchmark_group("diversity_3650_days");
    group.sample_size(10);
    for (name, exec) in PATHS {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| black_box(diversity(generated, exec).unwrap()))
        });
    }
    group.finish();

    let mut group = c.benchmark_group("memorization_3650_vs_10950_days");
    group.sample_size(10);
    for (name, exec) in PATHS {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| black_box(memorization_distance(generated, training, exec).unwrap()))
        });
    }
    group.finish();
}

fn bench_outages(c: &mut Criterion) {
    let history = wind_history();
    let config = OutageConfig {
        forced_outage_rate: 0.05,
        mttr_hours: 24.0,
        seed: 7,
    };
    let mut group = c.benchmark_group("outages_40_profiles");
    for (name, exec) in PATHS {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| black_box(inject_outages_all(&history.profiles, &config, exec).unwrap()))
        });
    }
    group.finish();
}

fn bench_portfolio(c: &mut Criterion) {
    let history = wind_history();
    let data = TrainingData::from_dataset(&history, 0.01).unwrap();
    // sampling cost does not depend on how well the weights are trained
    let config = GanConfig {
        epochs: 0,
        ..GanConfig::default()
    };
    let model = train(&data, &config, GanMode::SingleType).unwrap();
    let targets: Vec<ForecastTarget> = (0..16)
        .map(|i| ForecastTarget {
            site_id: format!("w{i:02}"),
            generation_type: "wind".into(),
            target_year: 2030,
            annual_energy_mwh: 350_000.0,
            capacity_mw: 100.0,
            monthly_shares: None,
        })
        .collect();
    let models = [model];
    let mut group = c.benchmark_group("portfolio_16_targets");
    group.sample_size(10);
    for (name, exec) in PATHS {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| {
                black_box(generate_portfolio(
                    &models,
                    &targets,
                    &SynthesisConfig::default(),
                    exec,
                ))
            })
        });
    }
    group.finish();
}

criterion_group!(benches, bench_metrics, bench_outages, bench_portfolio);
criterion_main!(benches);
