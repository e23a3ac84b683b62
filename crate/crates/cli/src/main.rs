//! `rdsim`: network generation, RDS sampling, estimation and bias studies.
//!
//! Every run writes `manifest.toml` into the output directory: the resolved
//! configuration including the master seed, which reproduces the run when
//! passed back through `--config`.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand_chacha::ChaCha8Rng;

use rdsim_core::covgen::generate_binary_covariates;
use rdsim_core::estimators::estimate_all;
use rdsim_core::harness::{
    run_engage_mimic, run_experiment, stream, write_replicates, write_summary, StudyOutput,
};
use rdsim_core::model::{fit_theta, generate_from_model};
use rdsim_core::netgen::generate_network;
use rdsim_core::rds::run_rds;
use rdsim_core::{io, stats, AttributeVector, Config, CovariateMatrix, Error, Graph, Result};

/// Seed used when neither the config nor `--seed` gives one.
const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Debug, Parser)]
#[command(name = "rdsim", version, about = "Simulate respondent-driven sampling and estimator bias")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct Common {
    /// TOML config with [network], [rds], [experiment] and [engage] sections.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (created if missing).
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Master seed; overrides experiment.seed in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for replicated runs (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Use the reduced-size presets for anything the config leaves unset.
    #[arg(long, global = true)]
    desk_scale: bool,

    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a population network and its attribute table.
    Netgen,
    /// Generate correlated binary covariates.
    Covgen,
    /// Run RDS recruitment over an existing network.
    Rds {
        #[arg(long)]
        edges: PathBuf,
        #[arg(long)]
        attributes: PathBuf,
    },
    /// Estimate differential activity, homophily and prevalence from a forest.
    Estimate {
        #[arg(long)]
        forest: PathBuf,
    },
    /// Replicated sweep over network and sample-size grids.
    Experiment,
    /// Replicated three-covariate clinic-study scenario.
    EngageMimic,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Netgen => "netgen",
            Command::Covgen => "covgen",
            Command::Rds { .. } => "rds",
            Command::Estimate { .. } => "estimate",
            Command::Experiment => "experiment",
            Command::EngageMimic => "engage-mimic",
        }
    }
}

fn load_config(common: &Common) -> Result<Config> {
    match &common.config {
        Some(path) => Config::load(path),
        None => Ok(Config::default()),
    }
}

fn write_manifest(out: &Path, command: &str, extra: &[String], config: &Config) -> Result<()> {
    let mut text = format!(
        "# rdsim {}\n# subcommand: {command}\n",
        env!("CARGO_PKG_VERSION")
    );
    for line in extra {
        text.push_str(&format!("# {line}\n"));
    }
    text.push('\n');
    text.push_str(&config.to_toml()?);
    fs::write(out.join("manifest.toml"), text)?;
    Ok(())
}

fn rng_for(seed: u64, stage: &str) -> ChaCha8Rng {
    stream(seed, stage, 0)
}

fn network_line(g: &Graph, z: &AttributeVector) -> String {
    let m = stats::mixing_counts(g, z).expect("attribute matches graph");
    let fmt = |r: Result<f64>| r.map_or_else(|e| format!("undefined ({e})"), |v| format!("{v:.4}"));
    format!(
        "{}: p={:.4} D_a={} R={} h={}",
        z.name(),
        stats::prevalence(z),
        fmt(stats::differential_activity(g, z)),
        fmt(stats::homophily_r(&m)),
        fmt(stats::homophily_newman(&m)),
    )
}

fn write_network(out: &Path, g: &Graph, columns: &[AttributeVector]) -> Result<()> {
    io::save_edge_list(g, &out.join("edges.csv"))?;
    io::save_attributes(columns, &out.join("attributes.csv"))?;
    println!(
        "netgen: N={} edges={} mean_degree={:.4} -> edges.csv, attributes.csv",
        g.node_count(),
        g.edge_count(),
        stats::mean_degree(g)
    );
    for z in columns {
        println!("  {}", network_line(g, z));
    }
    Ok(())
}

fn netgen(common: &Common, mut config: Config, seed: u64) -> Result<()> {
    let mut rng = rng_for(seed, "netgen");
    if let Some((spec, targets)) = config.network_covariates()? {
        let n = config
            .network
            .n
            .ok_or_else(|| Error::Config("network.n is required".into()))?;
        let d = config
            .network
            .mean_degree
            .ok_or_else(|| Error::Config("network.mean_degree is required".into()))?;
        let z = generate_binary_covariates(&spec, n, &mut rng)?;
        let fit = fit_theta(&targets, d, &z)?;
        println!(
            "fit: {} Newton iterations, max relative residual {:.2e}",
            fit.iterations, fit.max_relative_residual
        );
        let g = generate_from_model(&fit.model, &z, &mut rng);
        write_network(&common.out, &g, z.columns())?;
    } else {
        let t = config.network_targets()?;
        let (g, z) = generate_network(&t, &mut rng, config.generation_mode()?)?;
        write_network(&common.out, &g, std::slice::from_ref(&z))?;
    }
    config.experiment.seed = Some(seed);
    write_manifest(&common.out, "netgen", &[], &config)
}

fn pearson(a: &AttributeVector, b: &AttributeVector) -> f64 {
    let n = a.len() as f64;
    let (pa, pb) = (a.count_ones() as f64 / n, b.count_ones() as f64 / n);
    let both = (0..a.len()).filter(|&i| a.get(i) == 1 && b.get(i) == 1).count() as f64 / n;
    (both - pa * pb) / (pa * (1.0 - pa) * pb * (1.0 - pb)).sqrt()
}

fn covgen(common: &Common, mut config: Config, seed: u64) -> Result<()> {
    let (spec, _) = config
        .network_covariates()?
        .ok_or_else(|| Error::Config("covgen needs [[network.covariate]] blocks".into()))?;
    let n = config
        .network
        .n
        .ok_or_else(|| Error::Config("network.n is required".into()))?;
    let z: CovariateMatrix = generate_binary_covariates(&spec, n, &mut rng_for(seed, "covgen"))?;
    io::save_attributes(z.columns(), &common.out.join("attributes.csv"))?;
    println!("covgen: {n} rows x {} covariates -> attributes.csv", z.column_count());
    for (i, c) in z.columns().iter().enumerate() {
        let others: Vec<String> = z.columns()[i + 1..]
            .iter()
            .map(|o| format!("r({},{})={:.4}", c.name(), o.name(), pearson(c, o)))
            .collect();
        println!(
            "  {}: p={:.4} {}",
            c.name(),
            c.count_ones() as f64 / n as f64,
            others.join(" ")
        );
    }
    config.experiment.seed = Some(seed);
    write_manifest(&common.out, "covgen", &[], &config)
}

fn rds(common: &Common, mut config: Config, seed: u64, edges: &Path, attributes: &Path) -> Result<()> {
    let z = io::load_attributes(attributes)?;
    let g = io::load_edge_list(edges, Some(z.rows()))?;
    let cfg = config.sampler_config()?;
    let forest = run_rds(&g, z.columns(), &cfg, &mut rng_for(seed, "rds"))?;
    io::save_forest(&forest, &common.out.join("forest.csv"))?;
    println!(
        "rds: sampled {} of {} (seeds={}, max wave={}, reseeds={}{}) -> forest.csv",
        forest.len(),
        g.node_count(),
        forest.seed_count(),
        forest.max_wave(),
        forest.reseeds,
        if forest.truncated { ", truncated" } else { "" }
    );
    config.set_sampler(&cfg);
    config.experiment.seed = Some(seed);
    let inputs = [
        format!("edges: {}", edges.display()),
        format!("attributes: {}", attributes.display()),
    ];
    write_manifest(&common.out, "rds", &inputs, &config)
}

fn estimate(common: &Common, config: Config, forest_path: &Path) -> Result<()> {
    let forest = io::load_forest(forest_path)?;
    let path = common.out.join("estimates.csv");
    let mut w = csv::Writer::from_path(&path).map_err(Error::from)?;
    w.write_record([
        "attribute",
        "sample_size",
        "max_wave",
        "d_a_hat",
        "h_hat",
        "r_hat",
        "rds2_prevalence",
        "crude_prevalence",
    ])
    .map_err(Error::from)?;
    let num = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    println!("estimate: {} respondents -> estimates.csv", forest.len());
    for (i, name) in forest.attribute_names.iter().enumerate() {
        let e = estimate_all(&forest, i);
        w.write_record([
            name.clone(),
            e.sample_size.to_string(),
            e.max_wave.to_string(),
            num(e.d_a_hat),
            num(e.h_hat),
            num(e.r_hat),
            num(e.rds2_prevalence),
            num(e.crude_prevalence),
        ])
        .map_err(Error::from)?;
        let show = |v: Option<f64>| v.map_or("undefined".to_owned(), |x| format!("{x:.4}"));
        println!(
            "  {name}: D_a={} h={} R={} RDS-II={} crude={}",
            show(e.d_a_hat),
            show(e.h_hat),
            show(e.r_hat),
            show(e.rds2_prevalence),
            show(e.crude_prevalence)
        );
    }
    w.flush()?;
    write_manifest(&common.out, "estimate", &[format!("forest: {}", forest_path.display())], &config)
}

fn write_study(out: &Path, study: &StudyOutput) -> Result<()> {
    write_replicates(&study.records, BufWriter::new(File::create(out.join("replicates.csv"))?))?;
    write_summary(&study.summary, BufWriter::new(File::create(out.join("summary.csv"))?))?;
    Ok(())
}

fn study_line(name: &str, study: &StudyOutput) -> String {
    let errors = study
        .records
        .iter()
        .filter(|r| r.status.label() == "error")
        .count();
    format!(
        "{name}: {} records ({} skipped, {errors} errors), {} summary rows -> replicates.csv, summary.csv",
        study.records.len(),
        study.skipped(),
        study.summary.len()
    )
}

fn experiment(common: &Common, mut config: Config, seed: Option<u64>) -> Result<bool> {
    if let Some(s) = seed {
        config.experiment.seed = Some(s);
    }
    let plan = config.experiment_plan(common.desk_scale)?;
    println!(
        "experiment: {} cells x {} replicates, N={}, mean degree {}, seed {}",
        plan.cells().len(),
        plan.replicates,
        plan.network.population,
        plan.network.mean_degree,
        plan.master_seed
    );
    let study = run_experiment(&plan)?;
    write_study(&common.out, &study)?;
    println!("{}", study_line("experiment", &study));
    write_manifest(&common.out, "experiment", &[], &Config::from_experiment_plan(&plan))?;
    Ok(!study.errored())
}

fn engage_mimic(common: &Common, mut config: Config, seed: Option<u64>) -> Result<bool> {
    if let Some(s) = seed {
        config.experiment.seed = Some(s);
    }
    let scenario = config.engage_scenario(common.desk_scale)?;
    println!(
        "engage-mimic: N={}, n={}, {} covariates, {} replicates, seed {}",
        scenario.population,
        scenario.sample_size,
        scenario.covariates.len(),
        scenario.replicates,
        scenario.master_seed
    );
    let study = run_engage_mimic(&scenario)?;
    write_study(&common.out, &study)?;
    println!("{}", study_line("engage-mimic", &study));
    write_manifest(&common.out, "engage-mimic", &[], &Config::from_engage_scenario(&scenario))?;
    Ok(!study.errored())
}

fn dispatch(cli: &Cli) -> Result<bool> {
    let common = &cli.common;
    fs::create_dir_all(&common.out)?;
    let config = load_config(common)?;
    let seed = common.seed.or(config.seed());
    let fixed = seed.unwrap_or(DEFAULT_SEED);
    match &cli.command {
        Command::Netgen => netgen(common, config, fixed).map(|_| true),
        Command::Covgen => covgen(common, config, fixed).map(|_| true),
        Command::Rds { edges, attributes } => rds(common, config, fixed, edges, attributes).map(|_| true),
        Command::Estimate { forest } => estimate(common, config, forest).map(|_| true),
        Command::Experiment => experiment(common, config, seed),
        Command::EngageMimic => engage_mimic(common, config, seed),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.common.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    if let Some(t) = cli.common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::FAILURE;
        }
    }
    match dispatch(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: {} finished with errored replicates; see replicates.csv", cli.command.name());
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
