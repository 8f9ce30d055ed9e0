use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::json;

use profile_gan::data::{Dataset, HourlyProfile, TrainingData, DEFAULT_TYPE_LABELS};
use profile_gan::gan::{load_model, save_model, train, GanMode, TrainedGanModel};
use profile_gan::metrics::{
    average_profile_baseline, comparison_csv, evaluate, magnitude_error, random_sampling_baseline,
    EvalConfig, MethodReport, MetricsReport,
};
use profile_gan::outage::{inject_outages, OutageConfig};
use profile_gan::par::Exec;
use profile_gan::rng::derive_seed;
use profile_gan::store::{self, read_store, write_store};
use profile_gan::synthesis::{
    generate_portfolio, read_profile_csv, target_seed, write_profile_csv, ForecastTarget,
};
use profile_gan::synthetic::{generate_dataset, FamilySpec, SynthSpec};

use crate::config::{default_mttr, RunConfig, SynthSection};
use crate::exit::{usage, PartialFailure};
use crate::{Cli, Command, EvaluateArgs, GenerateArgs, IngestArgs, SynthDataArgs, TrainArgs};

pub const GENERATE_MANIFEST: &str = "generate_manifest.json";
pub const TRAIN_MANIFEST: &str = "train_manifest.json";

struct Ctx {
    config: RunConfig,
    seed: u64,
    out: Option<PathBuf>,
    force: bool,
}

impl Ctx {
    fn out(&self) -> Result<&Path> {
        self.out
            .as_deref()
            .ok_or_else(|| usage("no output directory: pass --out or set `out` in the config"))
    }

    /// Refuse to overwrite `path` unless `--force`.
    fn guard(&self, path: &Path) -> Result<()> {
        if path.exists() && !self.force {
            return Err(usage(format!(
                "{} already exists (use --force to overwrite)",
                path.display()
            )));
        }
        Ok(())
    }

    fn store_dir(&self, flag: &Option<PathBuf>) -> Result<PathBuf> {
        flag.clone()
            .or_else(|| self.config.data.store.clone())
            .ok_or_else(|| usage("no profile store: pass --store or set data.store in the config"))
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    let config = RunConfig::load(cli.config.as_deref())?;
    let ctx = Ctx {
        seed: cli.seed.or(config.seed).unwrap_or(0),
        out: cli.out.clone().or_else(|| config.out.clone()),
        force: cli.force,
        config,
    };
    match &cli.command {
        Command::Ingest(args) => ingest(&ctx, args),
        Command::Train(args) => train_cmd(&ctx, args),
        Command::Generate(args) => generate(&ctx, args),
        Command::Evaluate(args) => evaluate_cmd(&ctx, args, false),
        Command::Compare(args) => evaluate_cmd(&ctx, args, true),
        Command::SynthData(args) => synth_data(&ctx, args),
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).with_context(|| format!("creating {}", path.display()))
}

fn print_store_summary(ds: &Dataset) {
    for p in &ds.profiles {
        println!(
            "{}\t{}\t{}\t{} h\t{:.3} MWh",
            p.site_id,
            p.generation_type.label,
            p.year,
            p.values.len(),
            p.energy_mwh()
        );
    }
}

// ---------------------------------------------------------------------------
// ingest

fn ingest(ctx: &Ctx, args: &IngestArgs) -> Result<()> {
    let data = args
        .data
        .clone()
        .or_else(|| ctx.config.data.data.clone())
        .ok_or_else(|| usage("ingest needs --data"))?;
    let meta = args
        .meta
        .clone()
        .or_else(|| ctx.config.data.meta.clone())
        .ok_or_else(|| usage("ingest needs --meta"))?;
    let types: Vec<String> = args
        .types
        .clone()
        .or_else(|| ctx.config.data.types.clone())
        .unwrap_or_else(|| DEFAULT_TYPE_LABELS.iter().map(|s| s.to_string()).collect());
    let out = ctx.out()?;
    ctx.guard(&out.join(store::MANIFEST_FILE))?;

    let dataset = profile_gan::data::ingest_hourly_csv(&data, &meta, &types)?;
    let source = json!({
        "command": "ingest",
        "data": data,
        "meta": meta,
        "types": types,
    });
    write_store(out, &dataset, source, ctx.force)?;
    print_store_summary(&dataset);
    Ok(())
}

// ---------------------------------------------------------------------------
// synth-data

fn builtin_family(name: &str) -> Result<FamilySpec> {
    match name {
        "solar" => Ok(FamilySpec::solar("solar")),
        "wind" => Ok(FamilySpec::wind("wind")),
        "peaker" => Ok(FamilySpec::duty_block("peaker")),
        other => Err(usage(format!(
            "unknown built-in family {other:?} (solar, wind, peaker)"
        ))),
    }
}

fn read_synth_spec(path: &Path) -> Result<SynthSection> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading spec {}", path.display()))?;
    let parsed = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text)
            .map_err(|e| usage(format!("invalid spec {}: {e}", path.display())))?
    } else {
        toml::from_str(&text).map_err(|e| usage(format!("invalid spec {}: {e}", path.display())))?
    };
    Ok(parsed)
}

fn synth_data(ctx: &Ctx, args: &SynthDataArgs) -> Result<()> {
    let mut section = match &args.spec {
        Some(path) => read_synth_spec(path)?,
        None => ctx.config.synth.clone().unwrap_or(SynthSection {
            families: ["solar", "wind", "peaker"]
                .map(builtin_family)
                .into_iter()
                .collect::<Result<_>>()?,
            years: vec![2017, 2018, 2019],
        }),
    };
    if let Some(names) = &args.families {
        section.families = names
            .iter()
            .map(|n| builtin_family(n))
            .collect::<Result<_>>()?;
    }
    if let Some(years) = &args.years {
        section.years = years.clone();
    }
    let spec = SynthSpec {
        families: section.families,
        years: section.years,
        seed: ctx.seed,
    };
    spec.validate()?;
    let out = ctx.out()?;
    ctx.guard(&out.join(store::MANIFEST_FILE))?;
    let dataset = generate_dataset(&spec)?;
    write_store(
        out,
        &dataset,
        json!({ "command": "synth-data", "spec": spec }),
        ctx.force,
    )?;
    print_store_summary(&dataset);
    Ok(())
}

// ---------------------------------------------------------------------------
// train

fn write_loss_history(path: &Path, model: &TrainedGanModel) -> Result<()> {
    let mut text = String::from("epoch,discriminator,generator,auxiliary\n");
    for h in &model.history {
        let aux = h.auxiliary.map(|a| format!("{a:.17e}")).unwrap_or_default();
        text.push_str(&format!(
            "{},{:.17e},{:.17e},{aux}\n",
            h.epoch, h.discriminator, h.generator
        ));
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn train_cmd(ctx: &Ctx, args: &TrainArgs) -> Result<()> {
    let mode: GanMode = args
        .mode
        .parse()
        .map_err(|e: profile_gan::Error| usage(e.to_string()))?;
    let store_dir = ctx.store_dir(&args.store)?;
    let out = ctx.out()?;
    let mut gan = ctx.config.gan.clone();
    gan.seed = ctx.seed;
    if let Some(epochs) = args.epochs {
        gan.epochs = epochs;
    }
    gan.validate()?;

    let dataset = read_store(&store_dir)?;
    let jobs: Vec<(String, Dataset)> = match mode {
        GanMode::SingleType => {
            let labels: Vec<String> = match &args.type_label {
                Some(label) => vec![label.clone()],
                None => dataset
                    .registry
                    .types()
                    .iter()
                    .map(|t| t.label.clone())
                    .collect(),
            };
            labels
                .into_iter()
                .map(|l| Ok((l.clone(), dataset.filter_type(&l)?)))
                .collect::<Result<_>>()?
        }
        GanMode::MultiType => {
            if args.type_label.is_some() {
                return Err(usage("--type only applies to --mode single"));
            }
            vec![("multi".to_string(), dataset)]
        }
    };

    let names: Vec<(PathBuf, PathBuf)> = jobs
        .iter()
        .map(|(name, _)| {
            (
                out.join(format!("model_{name}.json")),
                out.join(format!("loss_history_{name}.csv")),
            )
        })
        .collect();
    for (model_path, loss_path) in &names {
        ctx.guard(model_path)?;
        ctx.guard(loss_path)?;
    }
    create_dir(out)?;

    let mut outputs = Vec::new();
    for ((name, data), (model_path, loss_path)) in jobs.iter().zip(&names) {
        let training = TrainingData::from_dataset(data, gan.duty_threshold)?;
        let model = train(&training, &gan, mode).with_context(|| format!("training {name}"))?;
        save_model(&model, model_path)?;
        write_loss_history(loss_path, &model)?;
        match model.history.last() {
            Some(h) => println!(
                "{name}: epoch {} discriminator {:.6} generator {:.6}{}",
                h.epoch,
                h.discriminator,
                h.generator,
                h.auxiliary
                    .map(|a| format!(" auxiliary {a:.6}"))
                    .unwrap_or_default()
            ),
            None => println!("{name}: untrained (0 epochs)"),
        }
        outputs.push(json!({
            "name": name,
            "types": model.registry.types().iter().map(|t| &t.label).collect::<Vec<_>>(),
            "samples": training.samples.len(),
            "model": model_path,
            "loss_history": loss_path,
        }));
    }
    write_json(
        &out.join(TRAIN_MANIFEST),
        &json!({
            "command": "train",
            "store": store_dir,
            "mode": mode,
            "seed": ctx.seed,
            "gan": gan,
            "outputs": outputs,
        }),
    )
}

// ---------------------------------------------------------------------------
// generate

#[derive(Debug, Deserialize)]
struct TargetRow {
    site_id: String,
    #[serde(rename = "type")]
    generation_type: String,
    target_year: i32,
    annual_energy_mwh: f64,
    capacity_mw: f64,
}

fn read_targets_csv(path: &Path) -> Result<Vec<ForecastTarget>> {
    let mut reader = csv::Reader::from_path(path)
        .with_context(|| format!("reading targets {}", path.display()))?;
    let mut out = Vec::new();
    for row in reader.deserialize::<TargetRow>() {
        let row = row.with_context(|| format!("parsing targets {}", path.display()))?;
        out.push(ForecastTarget {
            site_id: row.site_id,
            generation_type: row.generation_type,
            target_year: row.target_year,
            annual_energy_mwh: row.annual_energy_mwh,
            capacity_mw: row.capacity_mw,
            monthly_shares: None,
        });
    }
    Ok(out)
}

/// One target's line in the generate manifest.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneratedEntry {
    pub target: ForecastTarget,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenerateManifest {
    pub command: String,
    pub seed: u64,
    pub models: Vec<PathBuf>,
    pub synthesis: profile_gan::synthesis::SynthesisConfig,
    pub outage: Option<OutageConfig>,
    pub entries: Vec<GeneratedEntry>,
}

fn profile_file_name(t: &ForecastTarget) -> String {
    format!("{}_{}.csv", t.site_id, t.target_year)
}

fn generate(ctx: &Ctx, args: &GenerateArgs) -> Result<()> {
    let model_paths = if args.models.is_empty() {
        ctx.config.models.clone()
    } else {
        args.models.clone()
    };
    if model_paths.is_empty() {
        return Err(usage("generate needs at least one --model"));
    }
    let targets = match &args.targets {
        Some(path) => read_targets_csv(path)?,
        None => ctx.config.targets.clone(),
    };
    if targets.is_empty() {
        return Err(usage(
            "no targets: pass --targets or list [[targets]] in the config",
        ));
    }
    let mut seen = std::collections::HashSet::new();
    for t in &targets {
        if !seen.insert((t.site_id.clone(), t.target_year)) {
            return Err(usage(format!(
                "duplicate target {} {}",
                t.site_id, t.target_year
            )));
        }
    }
    let outage = match args.forced_outage_rate {
        Some(rate) => Some(OutageConfig {
            forced_outage_rate: rate,
            mttr_hours: args
                .mttr
                .or(ctx.config.outage.map(|o| o.mttr_hours))
                .unwrap_or_else(default_mttr),
            seed: derive_seed(ctx.seed, "outage", 0),
        }),
        None => {
            if args.mttr.is_some() {
                return Err(usage("--mttr needs --for"));
            }
            ctx.config.outage.map(|o| OutageConfig {
                forced_outage_rate: o.forced_outage_rate,
                mttr_hours: o.mttr_hours,
                seed: derive_seed(ctx.seed, "outage", 0),
            })
        }
    };
    if let Some(o) = &outage {
        o.validate()?;
    }
    let out = ctx.out()?;
    ctx.guard(&out.join(GENERATE_MANIFEST))?;

    let models = model_paths
        .iter()
        .map(|p| load_model(p).with_context(|| format!("loading {}", p.display())))
        .collect::<Result<Vec<_>>>()?;
    let mut synthesis = ctx.config.synthesis.clone();
    synthesis.seed = ctx.seed;
    synthesis.validate()?;
    create_dir(out)?;

    let results = generate_portfolio(&models, &targets, &synthesis, Exec::default());
    let mut entries = Vec::with_capacity(targets.len());
    let mut failed = 0;
    for (target, result) in targets.iter().zip(results) {
        let seed = target_seed(synthesis.seed, target);
        let written = result.and_then(|profile| {
            let profile = match &outage {
                Some(o) => inject_outages(
                    &profile,
                    &OutageConfig {
                        seed: derive_seed(
                            o.seed,
                            &format!("outage/{}", target.site_id),
                            i64::from(target.target_year),
                        ),
                        ..*o
                    },
                )?,
                None => profile,
            };
            let file = PathBuf::from(profile_file_name(target));
            write_profile_csv(&out.join(&file), &profile)?;
            Ok((file, profile.energy_mwh()))
        });
        match written {
            Ok((file, energy)) => {
                println!(
                    "{}\t{}\t{}\t{:.3} MWh\t{}",
                    target.site_id,
                    target.generation_type,
                    target.target_year,
                    energy,
                    file.display()
                );
                entries.push(GeneratedEntry {
                    target: target.clone(),
                    seed,
                    file: Some(file),
                    error: None,
                });
            }
            Err(e) => {
                failed += 1;
                eprintln!("{} {}: {e}", target.site_id, target.target_year);
                entries.push(GeneratedEntry {
                    target: target.clone(),
                    seed,
                    file: None,
                    error: Some(e.to_string()),
                });
            }
        }
    }
    write_json(
        &out.join(GENERATE_MANIFEST),
        &GenerateManifest {
            command: "generate".into(),
            seed: ctx.seed,
            models: model_paths,
            synthesis,
            outage,
            entries,
        },
    )?;
    if failed > 0 {
        return Err(PartialFailure {
            failed,
            total: targets.len(),
        }
        .into());
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// evaluate / compare

/// Generated years of one site with their targets.
struct SiteGroup {
    targets: Vec<ForecastTarget>,
    profiles: Vec<HourlyProfile>,
}

fn load_generated(dir: &Path, history: &Dataset, site: Option<&str>) -> Result<Vec<SiteGroup>> {
    if !dir.is_dir() {
        bail!("generated directory {} does not exist", dir.display());
    }
    let mut groups: BTreeMap<String, SiteGroup> = BTreeMap::new();
    let manifest_path = dir.join(GENERATE_MANIFEST);
    if manifest_path.exists() {
        let text = fs::read_to_string(&manifest_path)?;
        let manifest: GenerateManifest = serde_json::from_str(&text)
            .with_context(|| format!("parsing {}", manifest_path.display()))?;
        for entry in manifest.entries {
            let Some(file) = entry.file else { continue };
            let t = entry.target;
            let gen_type = history
                .registry
                .lookup(&t.generation_type)
                .with_context(|| {
                    format!(
                        "history has no type {} for generated site {}",
                        t.generation_type, t.site_id
                    )
                })?;
            let profile = read_profile_csv(
                &dir.join(file),
                &t.site_id,
                gen_type.clone(),
                t.target_year,
                t.capacity_mw,
            )?;
            let g = groups
                .entry(t.site_id.clone())
                .or_insert_with(|| SiteGroup {
                    targets: Vec::new(),
                    profiles: Vec::new(),
                });
            g.targets.push(t);
            g.profiles.push(profile);
        }
    } else if dir.join(store::MANIFEST_FILE).exists() {
        // a store evaluated as if generated, each year targeting its own energy
        let ds = read_store(dir)?;
        for p in ds.profiles {
            history.registry.lookup(&p.generation_type.label)?;
            let g = groups
                .entry(p.site_id.clone())
                .or_insert_with(|| SiteGroup {
                    targets: Vec::new(),
                    profiles: Vec::new(),
                });
            g.targets.push(ForecastTarget {
                site_id: p.site_id.clone(),
                generation_type: p.generation_type.label.clone(),
                target_year: p.year,
                annual_energy_mwh: p.energy_mwh(),
                capacity_mw: p.capacity_mw,
                monthly_shares: None,
            });
            g.profiles.push(p);
        }
    } else {
        bail!(
            "{} holds neither {GENERATE_MANIFEST} nor a profile store",
            dir.display()
        );
    }
    if let Some(site) = site {
        groups.retain(|k, _| k == site);
    }
    if groups.is_empty() {
        bail!("no generated profiles found in {}", dir.display());
    }
    Ok(groups.into_values().collect())
}

fn score(
    generated: &[HourlyProfile],
    targets: &[ForecastTarget],
    history: &[HourlyProfile],
    config: &EvalConfig,
) -> Result<MetricsReport> {
    let mut report = evaluate(generated, history, &targets[0], config)?;
    report.magnitude_error = magnitude_error(generated, targets)?;
    Ok(report)
}

fn evaluate_cmd(ctx: &Ctx, args: &EvaluateArgs, compare: bool) -> Result<()> {
    let store_dir = ctx.store_dir(&args.store)?;
    let out = ctx.out()?;
    let name = if compare { "compare" } else { "metrics" };
    let csv_path = out.join(format!("{name}.csv"));
    let json_path = out.join(format!("{name}.json"));
    ctx.guard(&csv_path)?;
    ctx.guard(&json_path)?;

    let history = read_store(&store_dir)?;
    let groups = load_generated(&args.generated, &history, args.site.as_deref())?;
    let config = EvalConfig {
        ramp_percentile: ctx.config.synthesis.ramp_percentile,
        duty_threshold: ctx.config.synthesis.duty_threshold,
        ..EvalConfig::default()
    };

    let mut csv = String::new();
    let mut docs = Vec::new();
    for group in &groups {
        let site_id = &group.targets[0].site_id;
        let label = &group.targets[0].generation_type;
        let hist: Vec<HourlyProfile> = history.profiles_of_type(label).cloned().collect();
        if hist.is_empty() {
            bail!("history has no profiles of type {label} for site {site_id}");
        }
        let mut rows = vec![MethodReport {
            method: "gan".into(),
            report: score(&group.profiles, &group.targets, &hist, &config)
                .with_context(|| format!("evaluating {site_id}"))?,
        }];
        if compare {
            let average = group
                .targets
                .iter()
                .map(|t| average_profile_baseline(&hist, t))
                .collect::<profile_gan::Result<Vec<_>>>()?;
            let random = group
                .targets
                .iter()
                .map(|t| {
                    let seed = derive_seed(
                        ctx.seed,
                        &format!("random/{}", t.site_id),
                        i64::from(t.target_year),
                    );
                    random_sampling_baseline(&hist, t, seed)
                })
                .collect::<profile_gan::Result<Vec<_>>>()?;
            rows.push(MethodReport {
                method: "average_profile".into(),
                report: score(&average, &group.targets, &hist, &config)?,
            });
            rows.push(MethodReport {
                method: "random_sampling".into(),
                report: score(&random, &group.targets, &hist, &config)?,
            });
        }
        let table = comparison_csv(&rows);
        let mut lines = table.lines();
        let header = lines.next().unwrap_or_default();
        if csv.is_empty() {
            csv.push_str("site_id,");
            csv.push_str(header);
            csv.push('\n');
        }
        for line in lines {
            csv.push_str(site_id);
            csv.push(',');
            csv.push_str(line);
            csv.push('\n');
        }
        for r in &rows {
            println!(
                "{site_id}\t{:<16}\tmagnitude {:.2e}\tacf_rmse {:.4}\tdiversity {:.4}\tboundary {:.4}",
                r.method,
                r.report.magnitude_error,
                r.report.acf_rmse,
                r.report.diversity_min_pairwise,
                r.report.boundary_violation_rate
            );
        }
        docs.push(json!({
            "site_id": site_id,
            "type": label,
            "years": group.targets.iter().map(|t| t.target_year).collect::<Vec<_>>(),
            "methods": rows,
        }));
    }
    create_dir(out)?;
    fs::write(&csv_path, csv).with_context(|| format!("writing {}", csv_path.display()))?;
    write_json(
        &json_path,
        &json!({
            "command": name,
            "generated": args.generated,
            "store": store_dir,
            "seed": ctx.seed,
            "ramp_percentile": config.ramp_percentile,
            "duty_threshold": config.duty_threshold,
            "max_lag": config.max_lag,
            "sites": docs,
        }),
    )
}
