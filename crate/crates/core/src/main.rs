//! Command-line entry point: dataset validation, scenario execution,
//! one-at-a-time parameter sweeps, calibration, and free-form simulation
//! from a scenario file.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Mutex;

use clap::{Args, Parser, Subcommand};

use epinomics::calibrate::{
    aggregate_iso_weeks, aggregate_months, ensemble_mcmc, gelman_rubin,
    iterative_initial_condition, log_posterior, Cadence, EnsembleOptions, IterativeIcOptions,
    ObservationSet, ParameterSpace,
};
use epinomics::coupler::scenarios::{self, ScenarioVariantArgs};
use epinomics::coupler::{run, ModelParams, ScenarioSpec, SimulationRecord};
use epinomics::datahub::{load_country_dataset, validate, CountryDataset};
use epinomics::date::Date;
use epinomics::error::{Error, Result};
use epinomics::output::{
    load_observations, summarize_window, write_chain_csv, write_manifest, write_record_csv,
    write_summary_csv, RunManifest, SummaryRow,
};

#[derive(Parser)]
#[command(
    name = "epinomics",
    version,
    about = "Coupled epidemic-economy co-simulation engine"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Country dataset directory (repeatable for multi-country commands).
    #[arg(long = "dataset", required = true)]
    dataset: Vec<PathBuf>,
    /// Output directory.
    #[arg(long = "out", default_value = "out")]
    out: PathBuf,
    /// Random seed for stochastic commands.
    #[arg(long = "seed", default_value_t = 0)]
    seed: u64,
    /// Worker threads for grid commands.
    #[arg(long = "workers", default_value_t = 1)]
    workers: usize,
    /// Simulation fidelity: `full` or `reduced` (two-patch aggregation).
    #[arg(long = "fidelity", default_value = "full")]
    fidelity: String,
    /// Parameter overrides, `name=value` (repeatable).
    #[arg(long = "set")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run every dataset invariant and report violations.
    Validate {
        /// Country dataset directory.
        dataset: PathBuf,
    },
    /// Run a library scenario (grids where the scenario defines one).
    Scenario {
        /// scenario1 | scenario2 | scenario3 | scenario4 | factual
        name: String,
        #[command(flatten)]
        common: CommonArgs,
        /// Country code matching the dataset (BE or SWE).
        #[arg(long, default_value = "BE")]
        country: String,
        /// Restrict scenario1 to one policy (P1..P4b); default runs the grid.
        #[arg(long)]
        policy: Option<String>,
        /// Restrict scenario1 to one imposition date; default runs the grid.
        #[arg(long)]
        date: Option<String>,
        /// Scenario2 release delay in months; default runs 2..5.
        #[arg(long)]
        release_months: Option<u32>,
        /// Scenario3 memory mean lifetime; default runs 7, 28, 62.
        #[arg(long)]
        nu: Option<f64>,
        /// Scenario4 second-seed patch; default runs every non-capital patch.
        #[arg(long)]
        second_seed: Option<String>,
    },
    /// One-at-a-time sensitivity sweep of a parameter over given values.
    Sweep {
        /// Parameter name (as accepted by --set).
        parameter: String,
        /// Comma-separated values.
        values: String,
        #[command(flatten)]
        common: CommonArgs,
        /// Country code matching the dataset.
        #[arg(long, default_value = "BE")]
        country: String,
        /// Scenario the sweep runs on.
        #[arg(long, default_value = "scenario3")]
        scenario: String,
    },
    /// Calibrate the free parameters against observations.csv in the
    /// dataset directories.
    Calibrate {
        #[command(flatten)]
        common: CommonArgs,
        /// Countries matching the datasets, in order.
        #[arg(long = "country", required = true)]
        country: Vec<String>,
        /// Ensemble walkers.
        #[arg(long, default_value_t = 24)]
        walkers: usize,
        /// Ensemble steps.
        #[arg(long, default_value_t = 200)]
        steps: usize,
        /// Skip the iterative initial-condition stage and use the packaged
        /// seeds.
        #[arg(long, default_value_t = false)]
        skip_initial_condition: bool,
        /// Continue a previous run from its chain CSV (implies
        /// --skip-initial-condition).
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Run a scenario specification file (TOML).
    Simulate {
        /// Scenario file.
        #[arg(long)]
        spec: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn apply_overrides(params: &mut ModelParams, sets: &[String]) -> Result<()> {
    for entry in sets {
        let (name, value) = entry
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects name=value, got '{entry}'")))?;
        let value: f64 = value
            .parse()
            .map_err(|_| Error::Config(format!("bad value in --set '{entry}'")))?;
        params.set(name.trim(), value)?;
    }
    Ok(())
}

fn load_dataset_with_fidelity(
    path: &Path,
    fidelity: &str,
    country: &str,
) -> Result<CountryDataset> {
    let ds = load_country_dataset(path)?;
    match fidelity {
        "full" => Ok(ds),
        "reduced" => {
            let focus = scenarios::capital_patch(country)
                .ok()
                .and_then(|c| ds.patch_index(c))
                .unwrap_or(0);
            Ok(ds.aggregate_to_two_patches(focus))
        }
        other => Err(Error::Config(format!("unknown fidelity '{other}'"))),
    }
}

/// Run a batch of scenarios across a worker pool; results keep input order.
fn run_batch(
    jobs: Vec<ScenarioSpec>,
    ds: &CountryDataset,
    workers: usize,
) -> Result<Vec<SimulationRecord>> {
    let workers = workers.max(1);
    let results: Mutex<Vec<Option<Result<SimulationRecord>>>> =
        Mutex::new((0..jobs.len()).map(|_| None).collect());
    let next = std::sync::atomic::AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..workers.min(jobs.len().max(1)) {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                if idx >= jobs.len() {
                    break;
                }
                let record = run(&jobs[idx], ds);
                results.lock().unwrap()[idx] = Some(record);
            });
        }
    });
    results
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("every job ran"))
        .collect()
}

fn cmd_validate(path: &Path) -> Result<ExitCode> {
    match load_country_dataset(path) {
        Ok(ds) => {
            // load_country_dataset already rejects on the first violation;
            // re-run the full sweep for the report.
            let violations = validate(&ds);
            if violations.is_empty() {
                println!(
                    "{}: OK ({} patches, {} sectors, population {:.0})",
                    path.display(),
                    ds.n_patches(),
                    ds.n_sectors(),
                    ds.geo.total_population()
                );
                Ok(ExitCode::SUCCESS)
            } else {
                for v in &violations {
                    println!("{v}");
                }
                println!("{}: {} violation(s)", path.display(), violations.len());
                Ok(ExitCode::FAILURE)
            }
        }
        Err(e) => {
            println!("{e}");
            println!("{}: invalid", path.display());
            Ok(ExitCode::FAILURE)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_scenario(
    name: &str,
    common: &CommonArgs,
    country: &str,
    policy: Option<String>,
    date: Option<String>,
    release_months: Option<u32>,
    nu: Option<f64>,
    second_seed: Option<String>,
) -> Result<ExitCode> {
    let ds = load_dataset_with_fidelity(&common.dataset[0], &common.fidelity, country)?;
    fs::create_dir_all(&common.out)?;

    // Expand the requested grid.
    let mut jobs: Vec<(String, String, ScenarioSpec)> = Vec::new();
    match name {
        "scenario1" => {
            let policies: Vec<scenarios::Policy> = match &policy {
                Some(p) => vec![p.parse()?],
                None => scenarios::Policy::ALL.to_vec(),
            };
            let dates: Vec<Date> = match &date {
                Some(d) => vec![d.parse().map_err(Error::Config)?],
                None => [3, 6, 9, 12, 15, 18]
                    .iter()
                    .map(|d| Date::from_ymd(2020, 3, *d))
                    .collect(),
            };
            for p in &policies {
                for d in &dates {
                    jobs.push((
                        p.name().to_string(),
                        d.to_string(),
                        scenarios::scenario1(*p, *d)?,
                    ));
                }
            }
        }
        "scenario2" => {
            let months: Vec<u32> = match release_months {
                Some(m) => vec![m],
                None => vec![2, 3, 4, 5],
            };
            for m in months {
                let date_override = date
                    .as_ref()
                    .map(|d| d.parse().map_err(Error::Config))
                    .transpose()?;
                jobs.push((
                    "P1".to_string(),
                    format!("release-{m}m"),
                    scenarios::scenario2(country, m, date_override)?,
                ));
            }
        }
        "scenario3" => {
            let nus: Vec<f64> = match nu {
                Some(v) => vec![v],
                None => vec![7.0, 28.0, 62.0],
            };
            for v in nus {
                jobs.push((
                    "none".to_string(),
                    format!("nu-{v}"),
                    scenarios::scenario3(country, v)?,
                ));
            }
        }
        "scenario4" => {
            let seconds: Vec<String> = match second_seed {
                Some(s) => vec![s],
                None => {
                    let capital = scenarios::capital_patch(country)?;
                    ds.geo
                        .patch_ids
                        .iter()
                        .filter(|p| p.as_str() != capital)
                        .cloned()
                        .collect()
                }
            };
            for s in seconds {
                jobs.push((
                    "none".to_string(),
                    format!("seed-{s}"),
                    scenarios::scenario4(country, &s)?,
                ));
            }
        }
        "factual" => {
            jobs.push((
                "factual".to_string(),
                country.to_string(),
                scenarios::factual(country)?,
            ));
        }
        other => {
            let variant = ScenarioVariantArgs {
                policy: policy.clone(),
                date: date
                    .as_ref()
                    .map(|d| d.parse().map_err(Error::Config))
                    .transpose()?,
                release_months,
                nu,
                second_seed: second_seed.clone(),
            };
            jobs.push((
                "custom".to_string(),
                other.to_string(),
                scenarios::scenario_library(other, country, &variant)?,
            ));
        }
    }

    for (_, _, spec) in jobs.iter_mut() {
        apply_overrides(&mut spec.params, &common.set)?;
        if common.fidelity == "reduced" {
            let focus = scenarios::capital_patch(country)?;
            spec.remap_seeds_for_reduced(focus, "rest");
        }
    }

    let specs: Vec<ScenarioSpec> = jobs.iter().map(|(_, _, s)| s.clone()).collect();
    let records = run_batch(specs, &ds, common.workers)?;

    let q2 = (Date::from_ymd(2020, 4, 1), Date::from_ymd(2020, 7, 1));
    let mut summary: Vec<SummaryRow> = Vec::new();
    for ((policy_name, variant, spec), record) in jobs.iter().zip(records.iter()) {
        let file = common
            .out
            .join(format!("record-{}.csv", spec.name.replace([' ', '/'], "_")));
        write_record_csv(record, &file)?;
        // Scenario-2 summaries span the whole horizon; the others use the
        // second quarter of 2020.
        let (from, to) = if name == "scenario2" || name == "scenario3" {
            (spec.start, spec.end)
        } else {
            q2
        };
        summary.push(summarize_window(record, policy_name, variant, from, to));
        println!(
            "{}: output {:+.1} %, labor {:+.1} %, cumulative IC {:.0}",
            spec.name,
            summary.last().unwrap().output_reduction_pct,
            summary.last().unwrap().labor_reduction_pct,
            summary.last().unwrap().cumulative_ic_patients
        );
    }
    write_summary_csv(&summary, common.out.join("summary.csv"))?;
    write_manifest(
        &RunManifest {
            command: format!("scenario {name}"),
            dataset: common
                .dataset
                .iter()
                .map(|d| d.display().to_string())
                .collect(),
            scenario: Some(name.to_string()),
            seed: common.seed,
            fidelity: common.fidelity.clone(),
            overrides: common.set.clone(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        },
        &common.out,
    )?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(
    parameter: &str,
    values: &str,
    common: &CommonArgs,
    country: &str,
    scenario: &str,
) -> Result<ExitCode> {
    let values: Vec<f64> = values
        .split(',')
        .filter(|v| !v.trim().is_empty())
        .map(|v| {
            v.trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad sweep value '{v}'")))
        })
        .collect::<Result<_>>()?;
    if values.is_empty() {
        return Err(Error::Config("empty sweep value list".to_string()));
    }
    let ds = load_dataset_with_fidelity(&common.dataset[0], &common.fidelity, country)?;
    fs::create_dir_all(&common.out)?;

    let mut jobs = Vec::new();
    for v in &values {
        let mut spec =
            scenarios::scenario_library(scenario, country, &ScenarioVariantArgs::default())?;
        apply_overrides(&mut spec.params, &common.set)?;
        spec.params.set(parameter, *v)?;
        spec.name = format!("sweep-{parameter}-{v}");
        if common.fidelity == "reduced" {
            let focus = scenarios::capital_patch(country)?;
            spec.remap_seeds_for_reduced(focus, "rest");
        }
        jobs.push(spec);
    }
    let records = run_batch(jobs.clone(), &ds, common.workers)?;
    let mut summary = Vec::new();
    for (spec, record) in jobs.iter().zip(records.iter()) {
        write_record_csv(record, common.out.join(format!("record-{}.csv", spec.name)))?;
        summary.push(summarize_window(
            record, parameter, &spec.name, spec.start, spec.end,
        ));
    }
    write_summary_csv(&summary, common.out.join("summary.csv"))?;
    write_manifest(
        &RunManifest {
            command: format!("sweep {parameter}"),
            dataset: common
                .dataset
                .iter()
                .map(|d| d.display().to_string())
                .collect(),
            scenario: Some(scenario.to_string()),
            seed: common.seed,
            fidelity: common.fidelity.clone(),
            overrides: common.set.clone(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        },
        &common.out,
    )?;
    Ok(ExitCode::SUCCESS)
}

/// Merge patch-stratified incidence series onto the two-patch reduced
/// geometry: the focus patch keeps its series, all others sum into "rest".
fn aggregate_observations_to_two_patches(set: ObservationSet, focus: &str) -> ObservationSet {
    let mut out = ObservationSet::default();
    let mut rest: Option<epinomics::calibrate::ObservationSeries> = None;
    for series in set.series {
        if series.variable != "hosp_incidence" || series.stratum == "national" {
            out.series.push(series);
            continue;
        }
        if series.stratum == focus {
            out.series.push(series);
            continue;
        }
        match &mut rest {
            None => {
                let mut merged = series.clone();
                merged.stratum = "rest".to_string();
                rest = Some(merged);
            }
            Some(merged) => {
                assert_eq!(merged.dates, series.dates, "misaligned observation dates");
                for (a, b) in merged.values.iter_mut().zip(series.values.iter()) {
                    *a += b;
                }
            }
        }
    }
    if let Some(merged) = rest {
        out.series.push(merged);
    }
    out
}

/// Align a factual-run record to each observed series' timestamps.
fn simulated_counterparts(
    records: &BTreeMap<String, SimulationRecord>,
    observations: &ObservationSet,
) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::with_capacity(observations.series.len());
    for series in &observations.series {
        let record = records.get(&series.country).ok_or_else(|| {
            Error::Calibration(format!("no simulation for country '{}'", series.country))
        })?;
        let daily: Vec<f64> = match series.variable.as_str() {
            "hosp_incidence" => {
                if series.stratum == "national" {
                    record.national_incidence()
                } else {
                    let g = record
                        .patch_ids
                        .iter()
                        .position(|p| *p == series.stratum)
                        .ok_or_else(|| {
                            Error::Calibration(format!("unknown stratum '{}'", series.stratum))
                        })?;
                    record.hosp_incidence.iter().map(|row| row[g]).collect()
                }
            }
            "gross_output_pct" => {
                let base: f64 = record.x0.iter().sum();
                record
                    .x
                    .iter()
                    .map(|row| 100.0 * row.iter().sum::<f64>() / base)
                    .collect()
            }
            "labor_pct" => {
                let base: f64 = record.l0.iter().sum();
                record
                    .l
                    .iter()
                    .map(|row| 100.0 * row.iter().sum::<f64>() / base)
                    .collect()
            }
            other => {
                return Err(Error::Calibration(format!(
                    "unsupported observed variable '{other}'"
                )))
            }
        };
        // Aggregate the daily simulation to the series' cadence, then align
        // on matching timestamps.
        let (agg_dates, agg_values) = match series.cadence {
            Cadence::Daily => (record.dates.clone(), daily),
            Cadence::Weekly => aggregate_iso_weeks(&record.dates, &daily),
            Cadence::Monthly => aggregate_months(&record.dates, &daily),
        };
        let mut aligned = Vec::with_capacity(series.dates.len());
        for d in &series.dates {
            let idx = agg_dates
                .iter()
                .position(|a| a == d)
                .ok_or_else(|| Error::Calibration(format!("no simulated value for {d}")))?;
            aligned.push(agg_values[idx]);
        }
        out.push(aligned);
    }
    Ok(out)
}

fn cmd_calibrate(
    common: &CommonArgs,
    countries: &[String],
    walkers: usize,
    steps: usize,
    skip_ic: bool,
    resume: Option<&Path>,
) -> Result<ExitCode> {
    let skip_ic = skip_ic || resume.is_some();
    if countries.len() != common.dataset.len() {
        return Err(Error::Config(
            "--country must be given once per --dataset".to_string(),
        ));
    }
    fs::create_dir_all(&common.out)?;
    let reduced = common.fidelity == "reduced";
    let mut datasets: BTreeMap<String, CountryDataset> = BTreeMap::new();
    let mut observations = ObservationSet::default();
    for (path, country) in common.dataset.iter().zip(countries.iter()) {
        datasets.insert(
            country.clone(),
            load_dataset_with_fidelity(path, &common.fidelity, country)?,
        );
        let mut obs = load_observations(path.join("observations.csv"))?;
        if reduced {
            let focus = scenarios::capital_patch(country)?;
            obs = aggregate_observations_to_two_patches(obs, focus);
        }
        observations.series.extend(obs.series);
    }

    let (space, initial) = ParameterSpace::standard();

    // The simulator: factual runs for every country with the 12 parameters
    // applied, reduced to the observed series.
    let apply_params = |spec: &mut ScenarioSpec, theta: &[f64], country: &str| {
        spec.params.nu = theta[0];
        spec.params.xi_eff = theta[1];
        spec.params.pi_eff = theta[2];
        spec.params.pi_work = theta[3];
        spec.params.pi_leisure = theta[4];
        spec.params.mu = theta[5];
        match country {
            "BE" => {
                spec.params.seasonal_amplitude = theta[6];
                spec.params.seasonal_shift = theta[7];
            }
            _ => {
                spec.params.seasonal_amplitude = theta[8];
                spec.params.seasonal_shift = theta[9];
            }
        }
        spec.params.iota_h = theta[10];
        spec.params.iota_f = theta[11];
    };
    let horizon_end = Date::from_ymd(2020, 8, 1);
    let simulate =
        |theta: &[f64], seeds_scale: &BTreeMap<String, Vec<f64>>| -> Result<Vec<Vec<f64>>> {
            let mut records = BTreeMap::new();
            for (country, ds) in &datasets {
                let mut spec = scenarios::factual(country)?;
                spec.end = horizon_end;
                apply_params(&mut spec, theta, country);
                apply_overrides(&mut spec.params, &common.set)?;
                if reduced {
                    let focus = scenarios::capital_patch(country)?;
                    spec.remap_seeds_for_reduced(focus, "rest");
                }
                if let Some(scaled) = seeds_scale.get(country) {
                    for (seed, value) in spec.seeds.iter_mut().zip(scaled.iter()) {
                        seed.exposed = *value;
                    }
                }
                records.insert(country.clone(), run(&spec, ds)?);
            }
            simulated_counterparts(&records, &observations)
        };

    // Stage 1: iterative initial condition (seeds against the early window,
    // parameters against the full horizon).
    let mut seed_map: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for country in datasets.keys() {
        let mut spec = scenarios::factual(country)?;
        if reduced {
            let focus = scenarios::capital_patch(country)?;
            spec.remap_seeds_for_reduced(focus, "rest");
        }
        seed_map.insert(
            country.clone(),
            spec.seeds.iter().map(|s| s.exposed).collect(),
        );
    }
    let mut theta = initial.clone();
    if !skip_ic {
        let flat_seeds: Vec<f64> = seed_map.values().flatten().copied().collect();
        let unflatten = |flat: &[f64]| -> BTreeMap<String, Vec<f64>> {
            let mut map = BTreeMap::new();
            let mut idx = 0;
            for (country, seeds) in &seed_map {
                let n = seeds.len();
                map.insert(
                    country.clone(),
                    flat[idx..idx + n].iter().map(|v| v.max(0.0)).collect(),
                );
                idx += n;
            }
            map
        };
        let early_cutoff = Date::from_ymd(2020, 5, 1);
        let early_obs: Vec<usize> = observations
            .series
            .iter()
            .enumerate()
            .filter(|(_, s)| s.variable == "hosp_incidence")
            .map(|(i, _)| i)
            .collect();
        let seed_objective = |seeds: &[f64], params: &[f64]| -> f64 {
            let map = unflatten(seeds);
            match simulate(params, &map) {
                Ok(sim) => {
                    let mut nll = 0.0;
                    for &i in &early_obs {
                        let series = &observations.series[i];
                        let keep: Vec<usize> = series
                            .dates
                            .iter()
                            .enumerate()
                            .filter(|(_, d)| **d < early_cutoff)
                            .map(|(j, _)| j)
                            .collect();
                        let sim_vals: Vec<f64> = keep.iter().map(|&j| sim[i][j]).collect();
                        let obs_vals: Vec<f64> = keep.iter().map(|&j| series.values[j]).collect();
                        nll -= epinomics::calibrate::log_likelihood(
                            &sim_vals,
                            &obs_vals,
                            series.family,
                        );
                    }
                    nll
                }
                Err(_) => f64::INFINITY,
            }
        };
        let param_objective = |params: &[f64], seeds: &[f64]| -> f64 {
            let map = unflatten(seeds);
            -log_posterior(params, &space, &observations, |t| simulate(t, &map))
        };
        let result = iterative_initial_condition(
            seed_objective,
            param_objective,
            &flat_seeds,
            &theta,
            &IterativeIcOptions {
                seed_evals: 200,
                param_evals: 300,
                ..Default::default()
            },
        )?;
        seed_map = unflatten(&result.seeds);
        theta = result.params;
        println!(
            "initial condition converged after {} iteration(s)",
            result.iterations
        );
        let mut seed_rows = vec!["country,patch,exposed".to_string()];
        for (country, seeds) in &seed_map {
            let mut spec = scenarios::factual(country)?;
            if reduced {
                let focus = scenarios::capital_patch(country)?;
                spec.remap_seeds_for_reduced(focus, "rest");
            }
            for (seed, value) in spec.seeds.iter().zip(seeds.iter()) {
                seed_rows.push(format!("{country},{},{value}", seed.patch));
            }
        }
        fs::write(common.out.join("seeds.csv"), seed_rows.join("\n") + "\n")?;
    }

    // Stage 2: ensemble sampling around the optimized estimate (or the tail
    // of a previous chain when resuming).
    let initial_ensemble = match resume {
        Some(path) => {
            let (names, tail) = epinomics::output::read_chain_tail(path)?;
            let expected: Vec<String> = space.params.iter().map(|p| p.name.clone()).collect();
            if names != expected {
                return Err(Error::Config(
                    "resume chain parameters do not match the parameter space".to_string(),
                ));
            }
            if tail.len() != walkers {
                return Err(Error::Config(format!(
                    "resume chain has {} walkers, expected {walkers}",
                    tail.len()
                )));
            }
            Some(tail)
        }
        None => None,
    };
    let seed_map_final = seed_map.clone();
    let chain = ensemble_mcmc(
        |t| log_posterior(t, &space, &observations, |tt| simulate(tt, &seed_map_final)),
        &theta,
        &EnsembleOptions {
            walkers,
            steps,
            seed: common.seed,
            initial_ensemble,
            ..Default::default()
        },
    )?;
    let names: Vec<String> = space.params.iter().map(|p| p.name.clone()).collect();
    write_chain_csv(&chain, &names, common.out.join("chain.csv"))?;
    let (map_theta, map_lp) = chain.maximum_a_posteriori();
    let mut best = String::new();
    for (name, value) in names.iter().zip(map_theta.iter()) {
        best.push_str(&format!("{name} = {value}\n"));
    }
    best.push_str(&format!("log_posterior = {map_lp}\n"));
    fs::write(common.out.join("best-fit.toml"), best)?;

    let rhat = gelman_rubin(&chain);
    let mut diag = String::from("parameter,autocorrelation_time,gelman_rubin\n");
    for (p, name) in names.iter().enumerate() {
        diag.push_str(&format!(
            "{name},{},{}\n",
            chain.autocorrelation_time(p),
            rhat[p]
        ));
    }
    diag.push_str(&format!(
        "acceptance_fraction,{},\n",
        chain.acceptance_fraction()
    ));
    diag.push_str(&format!("recommended_thin,{},\n", chain.recommended_thin()));
    diag.push_str(&format!("long_enough,{},\n", chain.long_enough()));
    fs::write(common.out.join("diagnostics.csv"), diag)?;
    println!(
        "chain written: {} walkers x {} steps, acceptance {:.2}",
        walkers,
        steps,
        chain.acceptance_fraction()
    );

    write_manifest(
        &RunManifest {
            command: "calibrate".to_string(),
            dataset: common
                .dataset
                .iter()
                .map(|d| d.display().to_string())
                .collect(),
            scenario: None,
            seed: common.seed,
            fidelity: common.fidelity.clone(),
            overrides: common.set.clone(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        },
        &common.out,
    )?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_simulate(spec_path: &Path, common: &CommonArgs) -> Result<ExitCode> {
    let text =
        fs::read_to_string(spec_path).map_err(|_| Error::MissingFile(spec_path.to_path_buf()))?;
    let mut spec = ScenarioSpec::from_toml(&text)?;
    apply_overrides(&mut spec.params, &common.set)?;
    let ds = load_dataset_with_fidelity(&common.dataset[0], &common.fidelity, &spec.country)?;
    fs::create_dir_all(&common.out)?;
    let record = run(&spec, &ds)?;
    write_record_csv(
        &record,
        common.out.join(format!("record-{}.csv", spec.name)),
    )?;
    let row = summarize_window(&record, "custom", &spec.name, spec.start, spec.end);
    write_summary_csv(&[row], common.out.join("summary.csv"))?;
    write_manifest(
        &RunManifest {
            command: "simulate".to_string(),
            dataset: common
                .dataset
                .iter()
                .map(|d| d.display().to_string())
                .collect(),
            scenario: Some(spec.name.clone()),
            seed: common.seed,
            fidelity: common.fidelity.clone(),
            overrides: common.set.clone(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        },
        &common.out,
    )?;
    println!("record written for '{}'", spec.name);
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { dataset } => cmd_validate(&dataset),
        Command::Scenario {
            name,
            common,
            country,
            policy,
            date,
            release_months,
            nu,
            second_seed,
        } => cmd_scenario(
            &name,
            &common,
            &country,
            policy,
            date,
            release_months,
            nu,
            second_seed,
        ),
        Command::Sweep {
            parameter,
            values,
            common,
            country,
            scenario,
        } => cmd_sweep(&parameter, &values, &common, &country, &scenario),
        Command::Calibrate {
            common,
            country,
            walkers,
            steps,
            skip_initial_condition,
            resume,
        } => cmd_calibrate(
            &common,
            &country,
            walkers,
            steps,
            skip_initial_condition,
            resume.as_deref(),
        ),
        Command::Simulate { spec, common } => cmd_simulate(&spec, &common),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
