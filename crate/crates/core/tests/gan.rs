use profile_gan::data::{
    hours_in_year, ConditionVector, GenerationType, HourlyProfile, TrainingData, TypeRegistry,
    HOURS_PER_DAY,
};
use profile_gan::gan::{
    from_checkpoint_str, load_model, save_model, to_checkpoint_string, train, GanConfig, GanMode,
    TrainedGanModel, SCHEMA_VERSION,
};
use profile_gan::rng::from_seed;
use profile_gan::synthetic::{generate_dataset, FamilySpec, SynthSpec};
use profile_gan::Error;
use rand_distr::{Distribution, StandardNormal};

fn small_config(epochs: usize) -> GanConfig {
    GanConfig {
        latent_dim: 8,
        generator_hidden: vec![16],
        discriminator_hidden: vec![16],
        batch_size: 32,
        epochs,
        seed: 11,
        ..GanConfig::default()
    }
}

fn dataset(families: Vec<FamilySpec>, years: Vec<i32>) -> TrainingData {
    let ds = generate_dataset(&SynthSpec {
        families,
        years,
        seed: 5,
    })
    .unwrap();
    TrainingData::from_dataset(&ds, 0.01).unwrap()
}

fn solar_data() -> TrainingData {
    dataset(vec![FamilySpec::solar("solar")], vec![2019])
}

fn latent(model: &TrainedGanModel, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = from_seed(seed);
    (0..n * model.latent_dim())
        .map(|_| StandardNormal.sample(&mut rng))
        .collect()
}

#[test]
fn identical_seeds_give_identical_models() {
    let data = solar_data();
    let a = train(&data, &small_config(3), GanMode::SingleType).unwrap();
    let b = train(&data, &small_config(3), GanMode::SingleType).unwrap();
    assert_eq!(a, b);
    assert_eq!(to_checkpoint_string(&a), to_checkpoint_string(&b));
    let c = train(
        &data,
        &GanConfig {
            seed: 12,
            ..small_config(3)
        },
        GanMode::SingleType,
    )
    .unwrap();
    assert_ne!(a.generator, c.generator);
}

#[test]
fn zero_epochs_returns_initialized_model() {
    let data = solar_data();
    let model = train(&data, &small_config(0), GanMode::SingleType).unwrap();
    assert!(model.history.is_empty());
    let c = ConditionVector::new(0, 1, 6, 0.0).unwrap();
    let day = model.sample(&c, &latent(&model, 1, 1)).unwrap();
    assert!(day.shape.0.iter().all(|v| *v > 0.0 && *v < 1.0));
}

#[test]
fn history_has_one_entry_per_epoch() {
    let model = train(&solar_data(), &small_config(4), GanMode::SingleType).unwrap();
    assert_eq!(model.history.len(), 4);
    for (i, h) in model.history.iter().enumerate() {
        assert_eq!(h.epoch, i);
        assert!(h.discriminator.is_finite() && h.generator.is_finite());
        assert!(h.auxiliary.is_none());
    }
}

#[test]
fn constant_data_collapses_to_the_constant() {
    let c = 0.6;
    let t = GenerationType {
        label: "flat".into(),
        intermittent: false,
        index: 0,
    };
    let registry = TypeRegistry::new([("flat".to_string(), false)]).unwrap();
    let profile = HourlyProfile {
        site_id: "f1".into(),
        generation_type: t,
        year: 2019,
        capacity_mw: 50.0,
        values: vec![c * 50.0; hours_in_year(2019)],
    };
    let data = TrainingData::from_profiles(&[profile], &registry, 0.01).unwrap();
    let config = GanConfig {
        epochs: 200,
        seed: 3,
        ..GanConfig::default()
    };
    let model = train(&data, &config, GanMode::SingleType).unwrap();

    let n = 500;
    let conditions: Vec<_> = (0..n)
        .map(|i| ConditionVector::new(0, 1, (i % 12) as u32 + 1, c).unwrap())
        .collect();
    let days = model
        .sample_batch(&conditions, &latent(&model, n, 9))
        .unwrap();
    for h in 0..HOURS_PER_DAY {
        let mean = days.iter().map(|d| d.shape.0[h]).sum::<f64>() / n as f64;
        assert!((mean - c).abs() < 0.05, "hour {h}: mean {mean}");
    }
}

#[test]
fn distinct_latents_give_distinct_shapes() {
    let model = train(&solar_data(), &small_config(2), GanMode::SingleType).unwrap();
    let n = 1000;
    let conditions = vec![ConditionVector::new(0, 1, 7, 0.0).unwrap(); n];
    let days = model
        .sample_batch(&conditions, &latent(&model, n, 4))
        .unwrap();
    let mut keys: Vec<Vec<u64>> = days
        .iter()
        .map(|d| d.shape.0.map(f64::to_bits).to_vec())
        .collect();
    keys.sort();
    keys.dedup();
    assert_eq!(keys.len(), n);
}

#[test]
fn checkpoint_round_trip_is_bit_exact() {
    let data = dataset(
        vec![FamilySpec::solar("solar"), FamilySpec::duty_block("peaker")],
        vec![2019],
    );
    let model = train(&data, &small_config(2), GanMode::MultiType).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    save_model(&model, &path).unwrap();
    let loaded = load_model(&path).unwrap();
    assert_eq!(loaded, model);

    let conditions: Vec<_> = (0..50)
        .map(|i| ConditionVector::new(i % 2, 2, (i % 12) as u32 + 1, 0.01 * i as f64).unwrap())
        .collect();
    let z = latent(&model, 50, 8);
    let before = model.sample_batch(&conditions, &z).unwrap();
    let after = loaded.sample_batch(&conditions, &z).unwrap();
    for (a, b) in before.iter().zip(&after) {
        assert_eq!(a.shape.0.map(f64::to_bits), b.shape.0.map(f64::to_bits));
        assert_eq!(a.duty.map(f64::to_bits), b.duty.map(f64::to_bits));
    }
    let peaker = model.registry.lookup("peaker").unwrap().index;
    for (c, day) in conditions.iter().zip(&before) {
        assert_eq!(day.duty.is_some(), c.type_index() == peaker);
    }
}

#[test]
fn checkpoint_weights_carry_seventeen_digits() {
    let model = train(&solar_data(), &small_config(1), GanMode::SingleType).unwrap();
    let text = to_checkpoint_string(&model);
    let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(doc["schema_version"], SCHEMA_VERSION);
    let weights = doc["generator"][0]["weights"].as_array().unwrap();
    for w in weights {
        let s = w.as_str().unwrap();
        let mantissa = s.split('e').next().unwrap();
        let digits = mantissa.chars().filter(char::is_ascii_digit).count();
        assert!(digits >= 17, "{s}");
    }
}

#[test]
fn damaged_checkpoints_are_rejected() {
    let model = train(&solar_data(), &small_config(0), GanMode::SingleType).unwrap();
    let text = to_checkpoint_string(&model);

    let truncated = &text[..text.len() / 2];
    assert!(matches!(
        from_checkpoint_str(truncated),
        Err(Error::CorruptCheckpoint(_))
    ));

    let future = text.replacen(
        &format!("\"schema_version\": {SCHEMA_VERSION}"),
        "\"schema_version\": 999",
        1,
    );
    assert_ne!(future, text);
    assert!(matches!(
        from_checkpoint_str(&future),
        Err(Error::SchemaVersion { found: 999, .. })
    ));
}

#[test]
fn zero_lambda_matches_plain_conditional_gan() {
    let data = dataset(
        vec![FamilySpec::solar("solar"), FamilySpec::wind("wind")],
        vec![2019],
    );
    let with_zero = GanConfig {
        lambda_cls: 0.0,
        ..small_config(3)
    };
    let without_head = GanConfig {
        aux_classifier: false,
        ..small_config(3)
    };
    let a = train(&data, &with_zero, GanMode::MultiType).unwrap();
    let mut b = train(&data, &without_head, GanMode::MultiType).unwrap();
    // only the auxiliary loss records may differ
    b.config = a.config.clone();
    for (x, y) in a.history.iter().zip(&mut b.history) {
        assert_eq!(x.auxiliary, Some(0.0));
        y.auxiliary = x.auxiliary;
    }
    assert_eq!(to_checkpoint_string(&a), to_checkpoint_string(&b));

    let weighted = train(&data, &small_config(3), GanMode::MultiType).unwrap();
    assert_ne!(weighted.generator, a.generator);
}

#[test]
fn mode_type_count_mismatch_is_rejected() {
    let err = train(&solar_data(), &small_config(1), GanMode::MultiType).unwrap_err();
    assert!(matches!(err, Error::InvalidArgument(_)));
    let two = dataset(
        vec![FamilySpec::solar("solar"), FamilySpec::wind("wind")],
        vec![2019],
    );
    let err = train(&two, &small_config(1), GanMode::SingleType).unwrap_err();
    assert!(matches!(err, Error::InvalidArgument(_)));
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

#[test]
fn generator_honors_the_starting_point() {
    let data = dataset(vec![FamilySpec::wind("wind")], vec![2018, 2019]);
    let config = GanConfig {
        epochs: 300,
        seed: 21,
        ..GanConfig::default()
    };
    let model = train(&data, &config, GanMode::SingleType).unwrap();
    let conditions: Vec<_> = data.samples.iter().map(|s| s.condition.clone()).collect();
    let days = model
        .sample_batch(&conditions, &latent(&model, conditions.len(), 77))
        .unwrap();
    let starts: Vec<f64> = conditions.iter().map(|c| c.starting_point).collect();
    let first: Vec<f64> = days.iter().map(|d| d.shape.0[0]).collect();
    let r = pearson(&starts, &first);
    assert!(r >= 0.8, "starting-point correlation {r}");
}
