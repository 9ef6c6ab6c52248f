//! Daily co-simulation of the transmission model, the production network,
//! and the behavioral feedback.
//!
//! One simulated day: (1) the hospital load is recorded into collective
//! memory and awareness is updated, (2) memory is condensed into behavioral
//! multipliers, (3) behavioral and policy inputs become economic shocks,
//! (4) the economy steps one day, (5) contact matrices are composed using
//! behavior, policy, sickness, and the labor situation, (6) the epidemic is
//! integrated over the day, (7) a record row is appended.

pub mod scenarios;

pub use crate::memory::AwarenessMode;

use serde::{Deserialize, Serialize};

use crate::datahub::CountryDataset;
use crate::date::Date;
use crate::econ::{
    household_shock, labor_shock, step_econ_day, EconParams, EconState, ExogenousSchedule, ShockSet,
};
use crate::epi::{
    compose_contacts, integrate_day, prepandemic_contacts, seed_epidemic, symptomatic_summaries,
    EpiParams, EpiState, PolicyInputs,
};
use crate::error::{Error, Result};
use crate::math::Mat;
use crate::memory::{
    connectivity_weights, gompertz_response, perceived_load, Awareness, BehaviorParams,
    HospitalMemory, XI_LEISURE, XI_WORK,
};

/// All tunable knobs of a simulation: the calibrated behavioral and economic
/// parameters plus country-level configuration. Everything can be overridden
/// from a scenario file or `--set` flags.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelParams {
    /// Memory mean lifetime (days).
    pub nu: f64,
    /// Spatial awareness connectivity.
    pub mu: f64,
    pub xi_eff: f64,
    pub pi_eff: f64,
    pub pi_work: f64,
    pub pi_leisure: f64,
    /// Per-contact transmission rate.
    pub beta: f64,
    /// Seasonal amplitude and shift (days relative to January 1st).
    pub seasonal_amplitude: f64,
    pub seasonal_shift: f64,
    /// Hiring and firing times (days).
    pub iota_h: f64,
    pub iota_f: f64,
    /// Inventory restocking time (days).
    pub tau: f64,
    /// Household savings rate under shocks.
    pub delta_s: f64,
    /// Nominal IC beds of the country.
    pub ic_beds: f64,
    /// IC beds per 100 000 of the reference country; the perceived-load
    /// scale is the ratio of this to the country's own beds per 100 000.
    pub reference_ic_per_100k: f64,
    /// Fraction of hospitalized patients occupying IC beds (reporting only).
    pub ic_fraction: f64,
    /// National hospital incidence per 100 000 that triggers awareness.
    pub awareness_threshold: f64,
    /// Peak exogenous shock magnitudes.
    pub investment_shock: f64,
    pub goods_export_shock: f64,
    pub services_export_shock: f64,
    /// Split of baseline exogenous demand into components.
    pub gov_share: f64,
    pub investment_share: f64,
    /// Evaluate the commuter mixing term with resident-patch susceptibles
    /// instead of destination-patch susceptibles (sensitivity switch).
    pub work_mixing_resident_susceptibles: bool,
    /// Evaluate the household demand shock with the complementary leisure
    /// association (sensitivity switch for the alternative reading).
    pub household_shock_lav_complement: bool,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            nu: 20.8,
            mu: 0.76,
            xi_eff: 0.39,
            pi_eff: 0.070,
            pi_work: 0.032,
            pi_leisure: 0.055,
            beta: 0.031,
            seasonal_amplitude: 0.0,
            seasonal_shift: 0.0,
            iota_h: 7.0,
            iota_f: 6.1,
            tau: 14.0,
            delta_s: 0.75,
            ic_beds: 1000.0,
            reference_ic_per_100k: 1000.0 / 114.31,
            ic_fraction: 1.0,
            awareness_threshold: 0.2,
            investment_shock: 0.0,
            goods_export_shock: 0.0,
            services_export_shock: 0.0,
            gov_share: 0.18,
            investment_share: 0.22,
            work_mixing_resident_susceptibles: false,
            household_shock_lav_complement: false,
        }
    }
}

impl ModelParams {
    /// Override a parameter by name (the `--set name=value` surface).
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        match name {
            "nu" => self.nu = value,
            "mu" => self.mu = value,
            "xi_eff" => self.xi_eff = value,
            "pi_eff" => self.pi_eff = value,
            "pi_work" => self.pi_work = value,
            "pi_leisure" => self.pi_leisure = value,
            "beta" => self.beta = value,
            "seasonal_amplitude" => self.seasonal_amplitude = value,
            "seasonal_shift" => self.seasonal_shift = value,
            "iota_h" => self.iota_h = value,
            "iota_f" => self.iota_f = value,
            "tau" => self.tau = value,
            "delta_s" => self.delta_s = value,
            "ic_beds" => self.ic_beds = value,
            "reference_ic_per_100k" => self.reference_ic_per_100k = value,
            "ic_fraction" => self.ic_fraction = value,
            "awareness_threshold" => self.awareness_threshold = value,
            "investment_shock" => self.investment_shock = value,
            "goods_export_shock" => self.goods_export_shock = value,
            "services_export_shock" => self.services_export_shock = value,
            "gov_share" => self.gov_share = value,
            "investment_share" => self.investment_share = value,
            _ => return Err(Error::Config(format!("unknown parameter '{name}'"))),
        }
        Ok(())
    }

    /// IC-capacity ratio scaling the perceived load.
    pub fn ic_ratio(&self, total_population: f64) -> f64 {
        let own_per_100k = self.ic_beds / total_population * 1.0e5;
        self.reference_ic_per_100k / own_per_100k
    }

    /// Nominal IC capacity per 100 000 inhabitants.
    pub fn ic_capacity_per_100k(&self, total_population: f64) -> f64 {
        self.ic_beds / total_population * 1.0e5
    }
}

/// One named change of the policy levers. Closures are keyed by sector code;
/// the pseudo-code `"*"` applies to every sector first, specific codes
/// override it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolicyPoint {
    pub date: Date,
    #[serde(default)]
    pub closures: Vec<SectorValue>,
    #[serde(default)]
    pub telework: f64,
    #[serde(default)]
    pub private_ban: f64,
    #[serde(default)]
    pub school_closure: f64,
    /// Per-patch private-ban overrides (patch id -> value).
    #[serde(default)]
    pub private_ban_overrides: Vec<PatchValue>,
    /// Scales the exogenous demand shocks from this point on.
    #[serde(default = "one")]
    pub exo_multiplier: f64,
    /// Transition ramp into this point, days; falls back to the schedule
    /// default when absent.
    #[serde(default)]
    pub ramp_days: Option<f64>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SectorValue {
    pub sector: String,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PatchValue {
    pub patch: String,
    pub value: f64,
}

/// Time-indexed policy levers: piecewise constant between change-points with
/// a linear ramp at each transition.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolicySchedule {
    /// Default transition ramp length in days (0 = discontinuous steps).
    #[serde(default = "default_ramp")]
    pub ramp_days: f64,
    #[serde(default)]
    pub points: Vec<PolicyPoint>,
}

fn default_ramp() -> f64 {
    5.0
}

impl Default for PolicySchedule {
    fn default() -> Self {
        PolicySchedule {
            ramp_days: default_ramp(),
            points: Vec::new(),
        }
    }
}

impl PolicySchedule {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<()> {
        for w in self.points.windows(2) {
            if w[1].date <= w[0].date {
                return Err(Error::Config(format!(
                    "policy change-points must be strictly increasing ({} then {})",
                    w[0].date, w[1].date
                )));
            }
        }
        for p in &self.points {
            let mut values: Vec<f64> = vec![p.telework, p.private_ban, p.school_closure];
            values.extend(p.closures.iter().map(|c| c.value));
            values.extend(p.private_ban_overrides.iter().map(|o| o.value));
            if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::Config(format!(
                    "policy values at {} must lie in [0, 1]",
                    p.date
                )));
            }
        }
        Ok(())
    }

    fn compile(&self, ds: &CountryDataset) -> Result<CompiledSchedule> {
        self.validate()?;
        let g = ds.n_patches();
        let k = ds.n_sectors();
        let mut points = Vec::with_capacity(self.points.len());
        for p in &self.points {
            let mut inputs = PolicyInputs::none(g, k);
            for entry in &p.closures {
                if entry.sector == "*" {
                    for gg in 0..g {
                        for kk in 0..k {
                            inputs.closure.set(gg, kk, entry.value);
                        }
                    }
                }
            }
            for entry in &p.closures {
                if entry.sector == "*" {
                    continue;
                }
                let kk = ds.sectors.sector_index(&entry.sector).ok_or_else(|| {
                    Error::Config(format!("unknown sector '{}' in schedule", entry.sector))
                })?;
                for gg in 0..g {
                    inputs.closure.set(gg, kk, entry.value);
                }
            }
            for gg in 0..g {
                for kk in 0..k {
                    inputs.telework.set(gg, kk, p.telework);
                }
                inputs.private_ban[gg] = p.private_ban;
                inputs.school_closure[gg] = p.school_closure;
            }
            for o in &p.private_ban_overrides {
                let gg = ds.patch_index(&o.patch).ok_or_else(|| {
                    Error::Config(format!("unknown patch '{}' in schedule", o.patch))
                })?;
                inputs.private_ban[gg] = o.value;
            }
            points.push(CompiledPoint {
                date: p.date,
                inputs,
                exo_multiplier: p.exo_multiplier,
                ramp_days: p.ramp_days.unwrap_or(self.ramp_days),
            });
        }
        Ok(CompiledSchedule { points })
    }
}

struct CompiledPoint {
    date: Date,
    inputs: PolicyInputs,
    exo_multiplier: f64,
    ramp_days: f64,
}

struct CompiledSchedule {
    points: Vec<CompiledPoint>,
}

impl CompiledSchedule {
    /// Effective policy on day `t`: the active change-point's values, ramped
    /// linearly from the previous point's values over the point's ramp
    /// length (full effect after `ramp_days` days, counting the change day).
    fn policy_at(&self, t: Date, g: usize, k: usize) -> (PolicyInputs, f64) {
        let mut active: Option<usize> = None;
        for (i, p) in self.points.iter().enumerate() {
            if p.date <= t {
                active = Some(i);
            } else {
                break;
            }
        }
        let Some(i) = active else {
            return (PolicyInputs::none(g, k), 1.0);
        };
        let point = &self.points[i];
        let elapsed = (t.rata_die() - point.date.rata_die()) as f64;
        let alpha = if point.ramp_days <= 0.0 {
            1.0
        } else {
            ((elapsed + 1.0) / point.ramp_days).min(1.0)
        };
        let (base, base_exo) = if i == 0 {
            (PolicyInputs::none(g, k), 1.0)
        } else {
            let prev = &self.points[i - 1];
            (prev.inputs.clone(), prev.exo_multiplier)
        };
        let lerp_mat = |a: &Mat, b: &Mat| {
            let mut out = a.clone();
            out.scale(1.0 - alpha);
            out.add_scaled(b, alpha);
            out
        };
        let lerp_vec = |a: &[f64], b: &[f64]| -> Vec<f64> {
            a.iter()
                .zip(b.iter())
                .map(|(x, y)| (1.0 - alpha) * x + alpha * y)
                .collect()
        };
        let inputs = PolicyInputs {
            closure: lerp_mat(&base.closure, &point.inputs.closure),
            telework: lerp_mat(&base.telework, &point.inputs.telework),
            private_ban: lerp_vec(&base.private_ban, &point.inputs.private_ban),
            school_closure: lerp_vec(&base.school_closure, &point.inputs.school_closure),
        };
        let exo = (1.0 - alpha) * base_exo + alpha * point.exo_multiplier;
        (inputs, exo)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DateRange {
    pub start: Date,
    pub end: Date,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Seed {
    pub patch: String,
    pub exposed: f64,
}

/// Complete description of one simulation run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub name: String,
    pub country: String,
    pub start: Date,
    pub end: Date,
    #[serde(default)]
    pub seasonality: bool,
    #[serde(default)]
    pub holidays: bool,
    #[serde(default)]
    pub exogenous_shocks: bool,
    pub awareness: AwarenessMode,
    #[serde(default)]
    pub seeds: Vec<Seed>,
    #[serde(default)]
    pub schedule: PolicySchedule,
    /// School holiday ranges (inclusive start, exclusive end); only used
    /// when `holidays` is set.
    #[serde(default)]
    pub holiday_ranges: Vec<DateRange>,
    #[serde(default)]
    pub params: ModelParams,
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        if self.end <= self.start {
            return Err(Error::Config(format!(
                "scenario '{}': end {} not after start {}",
                self.name, self.end, self.start
            )));
        }
        if self.seeds.iter().any(|s| s.exposed < 0.0) {
            return Err(Error::Config(format!(
                "scenario '{}': negative seed",
                self.name
            )));
        }
        self.schedule.validate()
    }

    /// Remap the scenario onto a two-patch reduced dataset: seeds in the focus
    /// patch stay and everything else merges into the aggregate patch;
    /// patch-specific schedule overrides outside the focus are dropped.
    pub fn remap_seeds_for_reduced(&mut self, focus: &str, rest_name: &str) {
        for point in &mut self.schedule.points {
            point.private_ban_overrides.retain(|o| o.patch == focus);
        }
        let mut focus_total = 0.0;
        let mut rest_total = 0.0;
        for seed in &self.seeds {
            if seed.patch == focus {
                focus_total += seed.exposed;
            } else {
                rest_total += seed.exposed;
            }
        }
        self.seeds.clear();
        if focus_total > 0.0 {
            self.seeds.push(Seed {
                patch: focus.to_string(),
                exposed: focus_total,
            });
        }
        if rest_total > 0.0 {
            self.seeds.push(Seed {
                patch: rest_name.to_string(),
                exposed: rest_total,
            });
        }
    }

    pub fn from_toml(text: &str) -> Result<ScenarioSpec> {
        let spec: ScenarioSpec =
            toml::from_str(text).map_err(|e| Error::Config(format!("scenario file: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("scenario serialization cannot fail")
    }
}

/// Daily time series produced by a run. Strata are recorded per patch for
/// the epidemiological series and per sector for the economic ones.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationRecord {
    pub scenario: String,
    pub country: String,
    pub dates: Vec<Date>,
    pub patch_ids: Vec<String>,
    pub sector_codes: Vec<String>,
    /// Patch total populations (for per-100k normalizations).
    pub patch_population: Vec<f64>,
    pub ic_fraction: f64,
    /// Baseline gross output and labor compensation (for reductions).
    pub x0: Vec<f64>,
    pub l0: Vec<f64>,

    /// Hospital load per (day, patch).
    pub q_hosp: Vec<Vec<f64>>,
    /// New hospital admissions per (day, patch).
    pub hosp_incidence: Vec<Vec<f64>>,
    /// IC load per (day, patch) = ic_fraction * hospital load.
    pub ic_load: Vec<Vec<f64>>,
    /// Gross output, labor compensation, total demand per (day, sector).
    pub x: Vec<Vec<f64>>,
    pub l: Vec<Vec<f64>>,
    pub d: Vec<Vec<f64>>,
    /// Shocks per (day, sector).
    pub kappa_d: Vec<Vec<f64>>,
    pub kappa_s: Vec<Vec<f64>>,
    pub kappa_f: Vec<Vec<f64>>,
    /// Behavioral multipliers per (day, patch).
    pub m_eff: Vec<Vec<f64>>,
    pub m_leisure: Vec<Vec<f64>>,
}

impl SimulationRecord {
    pub fn n_days(&self) -> usize {
        self.dates.len()
    }

    pub fn total_population(&self) -> f64 {
        self.patch_population.iter().sum()
    }

    /// National IC load per 100 000 on each day.
    pub fn national_ic_per_100k(&self) -> Vec<f64> {
        let pop = self.total_population();
        self.ic_load
            .iter()
            .map(|row| row.iter().sum::<f64>() * 1.0e5 / pop)
            .collect()
    }

    /// National hospital admissions per day.
    pub fn national_incidence(&self) -> Vec<f64> {
        self.hosp_incidence
            .iter()
            .map(|row| row.iter().sum::<f64>())
            .collect()
    }

    fn window(&self, from: Date, to: Date) -> impl Iterator<Item = usize> + '_ {
        self.dates
            .iter()
            .enumerate()
            .filter(move |(_, d)| **d >= from && **d < to)
            .map(|(i, _)| i)
    }

    /// Mean percentage change of national gross output over a window,
    /// relative to the pre-shock equilibrium (negative = reduction).
    pub fn gross_output_change_pct(&self, from: Date, to: Date) -> f64 {
        let base: f64 = self.x0.iter().sum();
        let days: Vec<usize> = self.window(from, to).collect();
        let mean: f64 = days
            .iter()
            .map(|&i| self.x[i].iter().sum::<f64>())
            .sum::<f64>()
            / days.len() as f64;
        100.0 * (mean / base - 1.0)
    }

    /// Mean percentage change of national labor compensation over a window.
    pub fn labor_change_pct(&self, from: Date, to: Date) -> f64 {
        let base: f64 = self.l0.iter().sum();
        let days: Vec<usize> = self.window(from, to).collect();
        let mean: f64 = days
            .iter()
            .map(|&i| self.l[i].iter().sum::<f64>())
            .sum::<f64>()
            / days.len() as f64;
        100.0 * (mean / base - 1.0)
    }

    /// Cumulative IC patients over a window: admissions scaled by the IC
    /// fraction.
    pub fn cumulative_ic_patients(&self, from: Date, to: Date) -> f64 {
        self.window(from, to)
            .map(|i| self.hosp_incidence[i].iter().sum::<f64>() * self.ic_fraction)
            .sum()
    }
}

/// Mutable state advanced by [`step_day`].
pub struct CoupledState {
    pub epi: EpiState,
    pub econ: EconState,
    pub memory: HospitalMemory,
    pub awareness: Awareness,
    /// National hospital incidence per 100 000 of the previous day.
    pub last_incidence_per_100k: f64,
}

/// Immutable per-run context shared by every day step.
pub struct RunContext<'a> {
    pub ds: &'a CountryDataset,
    pub spec: &'a ScenarioSpec,
    epi_params: EpiParams,
    econ_params: EconParams,
    behavior: BehaviorParams,
    exo: ExogenousSchedule,
    schedule: CompiledSchedule,
    patch_population: Vec<f64>,
}

impl<'a> RunContext<'a> {
    pub fn new(spec: &'a ScenarioSpec, ds: &'a CountryDataset) -> Result<Self> {
        spec.validate()?;
        let p = &spec.params;
        let mut epi_params = EpiParams::baseline(p.beta);
        if spec.seasonality {
            epi_params.seasonal_amplitude = p.seasonal_amplitude;
            epi_params.seasonal_shift = p.seasonal_shift;
        }
        epi_params.work_mixing_resident_susceptibles = p.work_mixing_resident_susceptibles;

        let mut econ_params = EconParams::from_dataset(ds, p.iota_h, p.iota_f);
        econ_params.tau = p.tau;
        econ_params.delta_s = p.delta_s;

        let total_pop = ds.geo.total_population();
        let behavior = BehaviorParams {
            nu: p.nu,
            mu: p.mu,
            ic_ratio: p.ic_ratio(total_pop),
            xi_eff: p.xi_eff,
            pi_eff: p.pi_eff,
            xi_work: XI_WORK,
            xi_leisure: XI_LEISURE,
            pi_work: p.pi_work,
            pi_leisure: p.pi_leisure,
            connectivity: connectivity_weights(&ds.mobility.normalized),
            willingness: ds.sectors.willingness.clone(),
        };

        let is_goods: Vec<bool> = ds
            .sectors
            .codes
            .iter()
            .map(|c| matches!(c.chars().next(), Some('A'..='E')))
            .collect();
        let exo = ExogenousSchedule::new(
            &ds.sectors.codes,
            &ds.io.f0,
            &is_goods,
            p.gov_share,
            p.investment_share,
            p.investment_shock,
            p.goods_export_shock,
            p.services_export_shock,
        );

        let schedule = spec.schedule.compile(ds)?;
        let patch_population = (0..ds.n_patches())
            .map(|g| ds.geo.patch_population(g))
            .collect();
        Ok(RunContext {
            ds,
            spec,
            epi_params,
            econ_params,
            behavior,
            exo,
            schedule,
            patch_population,
        })
    }

    pub fn initial_state(&self) -> Result<CoupledState> {
        let mut epi = EpiState::disease_free(&self.ds.geo.population);
        let contacts = prepandemic_contacts(self.ds);
        let seeds: Vec<(usize, f64)> = self
            .spec
            .seeds
            .iter()
            .map(|s| {
                self.ds
                    .patch_index(&s.patch)
                    .map(|g| (g, s.exposed))
                    .ok_or_else(|| Error::Config(format!("unknown seed patch '{}'", s.patch)))
            })
            .collect::<Result<_>>()?;
        seed_epidemic(&mut epi, &seeds, &contacts)?;
        Ok(CoupledState {
            epi,
            econ: EconState::equilibrium(&self.ds.io),
            memory: HospitalMemory::new(self.ds.n_patches()),
            awareness: Awareness::new(self.spec.awareness, self.spec.params.awareness_threshold),
            last_incidence_per_100k: 0.0,
        })
    }

    fn in_holiday(&self, t: Date) -> bool {
        self.spec.holidays
            && self
                .spec
                .holiday_ranges
                .iter()
                .any(|r| t >= r.start && t < r.end)
    }
}

/// Outputs of one day used to build the record row.
pub struct DayOutputs {
    pub admissions: Vec<f64>,
    pub shocks: ShockSet,
    pub m_eff: Vec<f64>,
    pub m_leisure: Vec<f64>,
}

/// Advance the coupled system by one day.
pub fn step_day(ctx: &RunContext, state: &mut CoupledState, t: Date) -> Result<DayOutputs> {
    let ds = ctx.ds;
    let g = ds.n_patches();
    let k = ds.n_sectors();
    let total_pop: f64 = ctx.patch_population.iter().sum();

    // (1) Memory and awareness.
    let hospital_load = state.epi.hospital_load_per_patch();
    state
        .memory
        .record_load(&hospital_load, &ctx.patch_population)?;
    state.awareness.update(state.last_incidence_per_100k);

    // (2) Behavioral multipliers.
    let ema = state.memory.ema_load(ctx.behavior.nu);
    let perceived = perceived_load(
        &ema,
        ctx.behavior.mu,
        &ctx.behavior.connectivity,
        ctx.behavior.ic_ratio,
    );
    let behavior = gompertz_response(&perceived, &ctx.behavior, state.awareness.is_active());

    // (3) Economic shocks from behavior, schedule, and epidemic state.
    let summaries = symptomatic_summaries(&state.epi, ds);
    let (policy, exo_multiplier) = ctx.schedule.policy_at(t, g, k);
    let i_mild_national: f64 = {
        let mild: f64 = state.epi.i_mild.data().iter().sum();
        mild / total_pop
    };
    let avoidance_leisure: f64 = (0..g)
        .map(|gg| ctx.patch_population[gg] * (1.0 - behavior.m_leisure[gg]))
        .sum::<f64>()
        / total_pop;
    let mut kappa_d = if ctx.spec.params.household_shock_lav_complement {
        let complement: Vec<f64> = ds.sectors.lav_demand.iter().map(|l| 1.0 - l).collect();
        household_shock(i_mild_national, avoidance_leisure, &complement)
    } else {
        household_shock(i_mild_national, avoidance_leisure, &ds.sectors.lav_demand)
    };
    for v in &mut kappa_d {
        *v = v.clamp(0.0, 1.0);
    }
    let mut avoidance_work = Mat::zeros(g, k);
    for gg in 0..g {
        for kk in 0..k {
            avoidance_work.set(gg, kk, behavior.avoidance_work(gg, kk));
        }
    }
    let kappa_s = labor_shock(
        &summaries.i_mild_active_employed,
        &policy.closure,
        &avoidance_work,
        &ds.sectors.f_workplace,
        &ds.sectors.f_telework,
        &ds.sectors.lmc,
        &ds.geo.active_population,
    );
    let exo_level = if ctx.spec.exogenous_shocks {
        exo_multiplier
    } else {
        0.0
    };
    let (_, kappa_f) = ctx.exo.demand(t, exo_level, &ds.io.f0);
    let shocks = ShockSet {
        kappa_d,
        kappa_s,
        kappa_f,
    };

    // (4) Economy.
    state.econ = step_econ_day(&state.econ, &ctx.econ_params, &shocks);

    // (5) Contacts under the day's labor situation.
    let labor_ratio: Vec<f64> = (0..k)
        .map(|kk| state.econ.l[kk] / ctx.econ_params.l0[kk])
        .collect();
    let school_term = if ctx.in_holiday(t) { 0.0 } else { 1.0 };
    let contacts = compose_contacts(
        &policy,
        &behavior,
        &summaries,
        &labor_ratio,
        school_term,
        ds,
    )?;

    // (6) Epidemic.
    let (epi_next, flows) = integrate_day(
        &state.epi,
        &ctx.epi_params,
        &contacts,
        &ds.mobility.normalized,
        &ds.geo.population,
        t.day_of_year() as f64,
    )?;
    state.epi = epi_next;
    state.last_incidence_per_100k = flows.admissions.iter().sum::<f64>() * 1.0e5 / total_pop;

    Ok(DayOutputs {
        admissions: flows.admissions,
        shocks,
        m_eff: behavior.m_eff,
        m_leisure: behavior.m_leisure,
    })
}

/// Run a scenario to completion. Deterministic in (scenario, dataset).
pub fn run(spec: &ScenarioSpec, ds: &CountryDataset) -> Result<SimulationRecord> {
    let ctx = RunContext::new(spec, ds)?;
    let mut state = ctx.initial_state()?;
    let n_days = (spec.end.rata_die() - spec.start.rata_die()) as usize;

    let mut record = SimulationRecord {
        scenario: spec.name.clone(),
        country: spec.country.clone(),
        dates: Vec::with_capacity(n_days),
        patch_ids: ds.geo.patch_ids.clone(),
        sector_codes: ds.sectors.codes.clone(),
        patch_population: ctx.patch_population.clone(),
        ic_fraction: spec.params.ic_fraction,
        x0: ds.io.x0.clone(),
        l0: ds.io.l0.clone(),
        q_hosp: Vec::with_capacity(n_days),
        hosp_incidence: Vec::with_capacity(n_days),
        ic_load: Vec::with_capacity(n_days),
        x: Vec::with_capacity(n_days),
        l: Vec::with_capacity(n_days),
        d: Vec::with_capacity(n_days),
        kappa_d: Vec::with_capacity(n_days),
        kappa_s: Vec::with_capacity(n_days),
        kappa_f: Vec::with_capacity(n_days),
        m_eff: Vec::with_capacity(n_days),
        m_leisure: Vec::with_capacity(n_days),
    };

    for day in 0..n_days {
        let t = spec.start.succ(day as i64);
        let out = step_day(&ctx, &mut state, t)?;

        let q: Vec<f64> = state.epi.hospital_load_per_patch();
        for series in [&q, &out.admissions] {
            if series.iter().any(|v| !v.is_finite()) {
                return Err(Error::Simulation(format!("non-finite record value on {t}")));
            }
        }
        record.dates.push(t);
        record
            .ic_load
            .push(q.iter().map(|v| v * spec.params.ic_fraction).collect());
        record.q_hosp.push(q);
        record.hosp_incidence.push(out.admissions);
        record.x.push(state.econ.x.clone());
        record.l.push(state.econ.l.clone());
        record.d.push(state.econ.d.clone());
        record.kappa_d.push(out.shocks.kappa_d);
        record.kappa_s.push(out.shocks.kappa_s);
        record.kappa_f.push(out.shocks.kappa_f);
        record.m_eff.push(out.m_eff);
        record.m_leisure.push(out.m_leisure);
    }
    Ok(record)
}

/// Count the local maxima of a daily series, requiring a relative
/// prominence: a peak must rise at least `prominence` (as a fraction of the
/// series maximum) above the lowest point separating it from its neighbors.
pub fn count_local_maxima(series: &[f64], prominence: f64) -> usize {
    let max = series.iter().cloned().fold(0.0f64, f64::max);
    if max <= 0.0 {
        return 0;
    }
    let floor = prominence * max;
    let mut count = 0;
    let mut first = true;
    let mut valley = f64::INFINITY;
    for i in 1..series.len().saturating_sub(1) {
        let v = series[i];
        valley = valley.min(v);
        if v > series[i - 1] && v >= series[i + 1] && v >= floor {
            let rise_ok = first || v - valley >= floor;
            if rise_ok {
                count += 1;
                first = false;
                valley = v;
            }
        }
    }
    count
}
