//! Bayesian calibration: L2-regularized normal priors, per-series likelihood
//! families, a Nelder-Mead simplex optimizer, an affine-invariant ensemble
//! sampler, and the iterative initial-condition procedure.

mod mcmc;
mod nelder_mead;

pub use mcmc::{ensemble_mcmc, gelman_rubin, EnsembleOptions, PosteriorChain};
pub use nelder_mead::{nelder_mead, NelderMeadOptions, NelderMeadResult};

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::date::Date;
use crate::error::{Error, Result};
use crate::math::ln_gamma;

/// One calibrated parameter: bounds plus the (lambda, mu, sigma) tuple of
/// its L2-regularized normal prior.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PriorSpec {
    pub name: String,
    pub lambda: f64,
    pub mu: f64,
    pub sigma: f64,
    pub lower: f64,
    pub upper: f64,
}

/// The free parameters of the coupled model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParameterSpace {
    pub params: Vec<PriorSpec>,
}

impl ParameterSpace {
    /// The twelve calibrated parameters with their prior tuples and the
    /// initial estimates used to start the optimization.
    pub fn standard() -> (ParameterSpace, Vec<f64>) {
        let rows: [(&str, f64, f64, f64, f64, f64, f64); 12] = [
            // name, initial, lambda, mu, sigma, lower, upper
            ("nu", 18.0, 10.0, 22.0, 1.0, 1.0, 120.0),
            ("xi_eff", 0.40, 10.0, 0.45, 0.01, 0.0, 10.0),
            ("pi_eff", 0.060, 25.0, 0.0, 0.015, 0.0, 1.0),
            ("pi_work", 0.035, 25.0, 0.035, 0.004, 0.0, 1.0),
            ("pi_leisure", 0.060, 15.0, 0.060, 0.006, 0.0, 1.0),
            ("mu", 0.72, 10.0, 1.0, 0.1, 0.0, 5.0),
            ("amplitude_be", 0.16, 20.0, 0.18, 0.03, 0.0, 0.99),
            ("shift_be", -14.0, 15.0, 0.0, 3.5, -60.0, 60.0),
            ("amplitude_swe", 0.23, 20.0, 0.22, 0.03, 0.0, 0.99),
            ("shift_swe", 14.0, 15.0, 0.0, 3.5, -60.0, 60.0),
            ("iota_h", 7.0, 10.0, 7.0, 2.0, 0.5, 60.0),
            ("iota_f", 7.0, 10.0, 7.0, 2.0, 0.5, 60.0),
        ];
        let mut params = Vec::new();
        let mut initial = Vec::new();
        for (name, init, lambda, mu, sigma, lower, upper) in rows {
            params.push(PriorSpec {
                name: name.to_string(),
                lambda,
                mu,
                sigma,
                lower,
                upper,
            });
            initial.push(init);
        }
        (ParameterSpace { params }, initial)
    }

    pub fn dim(&self) -> usize {
        self.params.len()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.params.iter().position(|p| p.name == name)
    }
}

/// Log of the L2-regularized normal prior: `sum_k log[lambda_k *
/// N(theta_k; mu_k, sigma_k)]`, negative infinity outside the bounds.
pub fn log_prior(theta: &[f64], space: &ParameterSpace) -> f64 {
    assert_eq!(theta.len(), space.dim());
    let mut acc = 0.0;
    for (t, p) in theta.iter().zip(space.params.iter()) {
        if *t < p.lower || *t > p.upper {
            return f64::NEG_INFINITY;
        }
        let z = (t - p.mu) / p.sigma;
        acc += p.lambda.ln() - 0.5 * z * z - (p.sigma * (2.0 * std::f64::consts::PI).sqrt()).ln();
    }
    acc
}

/// Observation noise model of one series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "family")]
pub enum LikelihoodFamily {
    /// Variance `mu + alpha * mu^2`.
    NegativeBinomial {
        dispersion: f64,
    },
    Poisson,
    /// Absolute standard deviation (percentage points for the economic
    /// series).
    Gaussian {
        sigma: f64,
    },
}

/// Reporting cadence of an observed series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Cadence {
    Daily,
    /// ISO-week sums.
    Weekly,
    /// Calendar-month means.
    Monthly,
}

/// One observed time series to fit against.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObservationSeries {
    pub country: String,
    pub variable: String,
    pub stratum: String,
    pub cadence: Cadence,
    pub dates: Vec<Date>,
    pub values: Vec<f64>,
    pub family: LikelihoodFamily,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ObservationSet {
    pub series: Vec<ObservationSeries>,
}

/// Floor applied to non-positive simulated means before likelihood
/// evaluation.
pub const MEAN_FLOOR: f64 = 1e-12;

fn ln_nb(y: f64, mean: f64, dispersion: f64) -> f64 {
    // Negative binomial with variance mean + dispersion * mean^2,
    // parameterized by r = 1/dispersion.
    let r = 1.0 / dispersion;
    let p = r / (r + mean);
    ln_gamma(y + r) - ln_gamma(r) - ln_gamma(y + 1.0) + r * p.ln() + y * (1.0 - p).ln()
}

fn ln_poisson(y: f64, mean: f64) -> f64 {
    y * mean.ln() - mean - ln_gamma(y + 1.0)
}

fn ln_gaussian(y: f64, mean: f64, sigma: f64) -> f64 {
    let z = (y - mean) / sigma;
    -0.5 * z * z - (sigma * (2.0 * std::f64::consts::PI).sqrt()).ln()
}

/// Log likelihood of one observed series given the simulated values aligned
/// to the same timestamps. Non-positive simulated means are floored.
pub fn log_likelihood(simulated: &[f64], observed: &[f64], family: LikelihoodFamily) -> f64 {
    assert_eq!(simulated.len(), observed.len());
    let mut acc = 0.0;
    for (s, y) in simulated.iter().zip(observed.iter()) {
        let mean = s.max(MEAN_FLOOR);
        acc += match family {
            LikelihoodFamily::NegativeBinomial { dispersion } => ln_nb(*y, mean, dispersion),
            LikelihoodFamily::Poisson => ln_poisson(*y, mean),
            LikelihoodFamily::Gaussian { sigma } => ln_gaussian(*y, *s, sigma),
        };
    }
    acc
}

/// Sum a daily series into ISO-week totals; returns (week-start dates,
/// sums), complete weeks only.
pub fn aggregate_iso_weeks(dates: &[Date], values: &[f64]) -> (Vec<Date>, Vec<f64>) {
    assert_eq!(dates.len(), values.len());
    let mut weeks: BTreeMap<(i64, u32), (Date, f64, usize)> = BTreeMap::new();
    for (d, v) in dates.iter().zip(values.iter()) {
        let key = d.iso_week();
        let monday = d.succ(-(d.weekday() as i64));
        let entry = weeks.entry(key).or_insert((monday, 0.0, 0));
        entry.1 += v;
        entry.2 += 1;
    }
    let mut out_dates = Vec::new();
    let mut out_values = Vec::new();
    for (_, (monday, sum, n)) in weeks {
        if n == 7 {
            out_dates.push(monday);
            out_values.push(sum);
        }
    }
    (out_dates, out_values)
}

/// Average a daily series over calendar months; returns (first-of-month
/// dates, means), complete months only.
pub fn aggregate_months(dates: &[Date], values: &[f64]) -> (Vec<Date>, Vec<f64>) {
    assert_eq!(dates.len(), values.len());
    let mut months: BTreeMap<(i64, u32), (f64, usize)> = BTreeMap::new();
    for (d, v) in dates.iter().zip(values.iter()) {
        let (y, m, _) = d.ymd();
        let entry = months.entry((y, m)).or_insert((0.0, 0));
        entry.0 += v;
        entry.1 += 1;
    }
    let mut out_dates = Vec::new();
    let mut out_values = Vec::new();
    for ((y, m), (sum, n)) in months {
        let days = match m {
            1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
            4 | 6 | 9 | 11 => 30,
            _ => {
                if (y % 4 == 0 && y % 100 != 0) || y % 400 == 0 {
                    29
                } else {
                    28
                }
            }
        };
        if n == days {
            out_dates.push(Date::from_ymd(y, m, 1));
            out_values.push(sum / n as f64);
        }
    }
    (out_dates, out_values)
}

/// Log posterior: the prior plus the summed likelihood of every series under
/// a caller-provided simulator. The simulator maps a parameter vector to the
/// simulated counterpart of each observed series (aligned to its
/// timestamps); a simulation failure yields negative infinity.
pub fn log_posterior<F>(
    theta: &[f64],
    space: &ParameterSpace,
    observations: &ObservationSet,
    simulate: F,
) -> f64
where
    F: Fn(&[f64]) -> Result<Vec<Vec<f64>>>,
{
    let prior = log_prior(theta, space);
    if !prior.is_finite() {
        return f64::NEG_INFINITY;
    }
    if observations.series.is_empty() {
        return prior;
    }
    let simulated = match simulate(theta) {
        Ok(s) => s,
        Err(_) => return f64::NEG_INFINITY,
    };
    assert_eq!(
        simulated.len(),
        observations.series.len(),
        "simulator must produce one series per observation"
    );
    let mut acc = prior;
    for (sim, obs) in simulated.iter().zip(observations.series.iter()) {
        acc += log_likelihood(sim, &obs.values, obs.family);
    }
    acc
}

/// Options for the iterative initial-condition procedure.
#[derive(Debug, Clone)]
pub struct IterativeIcOptions {
    pub max_outer: usize,
    /// Relative parameter change below which the alternation has converged.
    pub param_tol: f64,
    pub seed_evals: usize,
    pub param_evals: usize,
}

impl Default for IterativeIcOptions {
    fn default() -> Self {
        IterativeIcOptions {
            max_outer: 5,
            param_tol: 0.01,
            seed_evals: 2000,
            param_evals: 2000,
        }
    }
}

/// Result of the alternating optimization.
#[derive(Debug, Clone)]
pub struct IterativeIcResult {
    pub seeds: Vec<f64>,
    pub params: Vec<f64>,
    pub iterations: usize,
}

/// Alternate (a) a simplex search over the per-patch seed counts against the
/// early-epidemic objective and (b) a simplex search over the model
/// parameters against the full-horizon objective, until the parameters move
/// less than `param_tol` relative.
///
/// Both objectives are negative log posteriors to minimize; the caller wires
/// in the simulation windows (early fit from the epidemic start, parameter
/// fit from the later snapshot).
pub fn iterative_initial_condition<FS, FP>(
    seed_objective: FS,
    param_objective: FP,
    seeds0: &[f64],
    params0: &[f64],
    opts: &IterativeIcOptions,
) -> Result<IterativeIcResult>
where
    FS: Fn(&[f64], &[f64]) -> f64,
    FP: Fn(&[f64], &[f64]) -> f64,
{
    let mut seeds = seeds0.to_vec();
    let mut params = params0.to_vec();
    for outer in 1..=opts.max_outer {
        let params_snapshot = params.clone();

        let sres = nelder_mead(
            |s| seed_objective(s, &params_snapshot),
            &seeds,
            &NelderMeadOptions {
                max_evals: opts.seed_evals,
                ..Default::default()
            },
        )?;
        // Seeds are counts: never negative.
        seeds = sres.x.iter().map(|v| v.max(0.0)).collect();

        let pres = nelder_mead(
            |p| param_objective(p, &seeds),
            &params,
            &NelderMeadOptions {
                max_evals: opts.param_evals,
                ..Default::default()
            },
        )?;
        params = pres.x;

        let change = params
            .iter()
            .zip(params_snapshot.iter())
            .map(|(a, b)| (a - b).abs() / b.abs().max(1e-12))
            .fold(0.0f64, f64::max);
        if change < opts.param_tol {
            return Ok(IterativeIcResult {
                seeds,
                params,
                iterations: outer,
            });
        }
    }
    Err(Error::Calibration(format!(
        "initial-condition alternation did not converge in {} iterations",
        opts.max_outer
    )))
}
