//! Affine-invariant ensemble sampler (stretch moves over two half
//! ensembles), with integrated autocorrelation times and the split-chain
//! Gelman-Rubin diagnostic.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::math::{mean, variance};

#[derive(Debug, Clone)]
pub struct EnsembleOptions {
    pub walkers: usize,
    pub steps: usize,
    pub seed: u64,
    /// Stretch-move scale (the conventional default is 2).
    pub stretch: f64,
    /// Uniform relative perturbation of the initial estimate per walker.
    pub init_spread: f64,
    /// Explicit walker starting positions; overrides the perturbation.
    pub initial_ensemble: Option<Vec<Vec<f64>>>,
}

impl Default for EnsembleOptions {
    fn default() -> Self {
        EnsembleOptions {
            walkers: 32,
            steps: 1000,
            seed: 0,
            stretch: 2.0,
            init_spread: 0.05,
            initial_ensemble: None,
        }
    }
}

/// Walker x iteration x parameter samples plus the log-posterior trace.
#[derive(Debug, Clone)]
pub struct PosteriorChain {
    pub n_walkers: usize,
    pub n_params: usize,
    pub n_steps: usize,
    /// Flattened as [step][walker][param].
    samples: Vec<f64>,
    /// Flattened as [step][walker].
    log_prob: Vec<f64>,
    accepted: usize,
    proposed: usize,
}

impl PosteriorChain {
    pub fn sample(&self, step: usize, walker: usize) -> &[f64] {
        let base = (step * self.n_walkers + walker) * self.n_params;
        &self.samples[base..base + self.n_params]
    }

    pub fn log_prob(&self, step: usize, walker: usize) -> f64 {
        self.log_prob[step * self.n_walkers + walker]
    }

    pub fn acceptance_fraction(&self) -> f64 {
        if self.proposed == 0 {
            return 0.0;
        }
        self.accepted as f64 / self.proposed as f64
    }

    /// All samples after discarding `burn_in` steps, keeping every `thin`-th
    /// step.
    pub fn flat(&self, burn_in: usize, thin: usize) -> Vec<Vec<f64>> {
        let thin = thin.max(1);
        let mut out = Vec::new();
        let mut step = burn_in;
        while step < self.n_steps {
            for w in 0..self.n_walkers {
                out.push(self.sample(step, w).to_vec());
            }
            step += thin;
        }
        out
    }

    /// The best sample seen anywhere in the chain.
    pub fn maximum_a_posteriori(&self) -> (Vec<f64>, f64) {
        let mut best = (0usize, 0usize);
        let mut best_lp = f64::NEG_INFINITY;
        for s in 0..self.n_steps {
            for w in 0..self.n_walkers {
                let lp = self.log_prob(s, w);
                if lp > best_lp {
                    best_lp = lp;
                    best = (s, w);
                }
            }
        }
        (self.sample(best.0, best.1).to_vec(), best_lp)
    }

    /// One chain per walker for a given parameter.
    fn walker_series(&self, walker: usize, param: usize) -> Vec<f64> {
        (0..self.n_steps)
            .map(|s| self.sample(s, walker)[param])
            .collect()
    }

    /// Integrated autocorrelation time of one parameter: the walker-averaged
    /// autocorrelation function summed under an automatic (Sokal) window.
    pub fn autocorrelation_time(&self, param: usize) -> f64 {
        let n = self.n_steps;
        if n < 4 {
            return 1.0;
        }
        let max_lag = n / 2;
        let mut rho = vec![0.0; max_lag];
        for w in 0..self.n_walkers {
            let series = self.walker_series(w, param);
            let m = mean(&series);
            let denom: f64 = series.iter().map(|x| (x - m) * (x - m)).sum();
            if denom == 0.0 {
                continue;
            }
            for (lag, r) in rho.iter_mut().enumerate() {
                let mut acc = 0.0;
                for t in 0..n - lag {
                    acc += (series[t] - m) * (series[t + lag] - m);
                }
                *r += acc / denom;
            }
        }
        for r in rho.iter_mut() {
            *r /= self.n_walkers as f64;
        }
        // Sokal's automatic windowing with c = 5.
        let mut tau = 1.0;
        for (lag, _) in rho.iter().enumerate().skip(1) {
            tau = 1.0 + 2.0 * rho[1..=lag].iter().sum::<f64>();
            if (lag as f64) >= 5.0 * tau {
                break;
            }
        }
        tau.max(1.0)
    }

    pub fn max_autocorrelation_time(&self) -> f64 {
        (0..self.n_params)
            .map(|p| self.autocorrelation_time(p))
            .fold(1.0f64, f64::max)
    }

    /// Thinning factor of half the maximum integrated autocorrelation time.
    pub fn recommended_thin(&self) -> usize {
        (self.max_autocorrelation_time() / 2.0).ceil().max(1.0) as usize
    }

    /// Whether the run is at least 50 autocorrelation times long.
    pub fn long_enough(&self) -> bool {
        self.n_steps as f64 >= 50.0 * self.max_autocorrelation_time()
    }
}

/// Draw from g(z) proportional to 1/sqrt(z) on [1/a, a].
fn draw_stretch(rng: &mut ChaCha8Rng, a: f64) -> f64 {
    let u: f64 = rng.random();
    let s = (a - 1.0) * u + 1.0;
    s * s / a
}

/// Sample `log_prob` with the stretch move. The ensemble is updated in two
/// halves; every walker owns a deterministic random stream derived from the
/// seed, so chains are reproducible bit for bit.
pub fn ensemble_mcmc<F>(
    log_prob: F,
    initial: &[f64],
    opts: &EnsembleOptions,
) -> Result<PosteriorChain>
where
    F: Fn(&[f64]) -> f64,
{
    let dim = initial.len();
    if opts.walkers < 2 * dim || !opts.walkers.is_multiple_of(2) {
        return Err(Error::Calibration(format!(
            "need an even walker count of at least 2 x dim = {}, got {}",
            2 * dim,
            opts.walkers
        )));
    }

    let mut rngs: Vec<ChaCha8Rng> = (0..opts.walkers)
        .map(|w| {
            ChaCha8Rng::seed_from_u64(
                opts.seed ^ (0x9E37_79B9_7F4A_7C15u64.wrapping_mul(w as u64 + 1)),
            )
        })
        .collect();

    // Initial ensemble: explicit positions when given, otherwise the
    // reference point perturbed uniformly by the relative spread (absolute
    // for zero coordinates).
    let mut positions: Vec<Vec<f64>> = match &opts.initial_ensemble {
        Some(given) => {
            if given.len() != opts.walkers || given.iter().any(|p| p.len() != dim) {
                return Err(Error::Calibration(
                    "initial ensemble shape does not match walkers x dim".to_string(),
                ));
            }
            given.clone()
        }
        None => (0..opts.walkers)
            .map(|w| {
                initial
                    .iter()
                    .map(|&x| {
                        let u: f64 = rngs[w].random::<f64>() * 2.0 - 1.0;
                        if x.abs() > 1e-12 {
                            x * (1.0 + opts.init_spread * u)
                        } else {
                            opts.init_spread * u
                        }
                    })
                    .collect()
            })
            .collect(),
    };
    let mut lp: Vec<f64> = positions.iter().map(|p| log_prob(p)).collect();
    if lp.iter().all(|v| !v.is_finite()) {
        return Err(Error::Calibration(
            "log probability is non-finite for every initial walker".to_string(),
        ));
    }

    let mut chain = PosteriorChain {
        n_walkers: opts.walkers,
        n_params: dim,
        n_steps: opts.steps,
        samples: Vec::with_capacity(opts.steps * opts.walkers * dim),
        log_prob: Vec::with_capacity(opts.steps * opts.walkers),
        accepted: 0,
        proposed: 0,
    };

    let half = opts.walkers / 2;
    for _ in 0..opts.steps {
        // Update each half against the other (the complementary ensemble is
        // frozen during a half step).
        for (start, other_start) in [(0, half), (half, 0)] {
            let frozen: Vec<Vec<f64>> = (other_start..other_start + half)
                .map(|w| positions[w].clone())
                .collect();
            for w in start..start + half {
                let z = draw_stretch(&mut rngs[w], opts.stretch);
                let partner = rngs[w].random_range(0..half);
                let anchor = &frozen[partner];
                let proposal: Vec<f64> = (0..dim)
                    .map(|d| anchor[d] + z * (positions[w][d] - anchor[d]))
                    .collect();
                let lp_new = log_prob(&proposal);
                chain.proposed += 1;
                let ln_accept = (dim as f64 - 1.0) * z.ln() + lp_new - lp[w];
                let u: f64 = rngs[w].random();
                if ln_accept >= 0.0 || u.ln() < ln_accept {
                    positions[w] = proposal;
                    lp[w] = lp_new;
                    chain.accepted += 1;
                }
            }
        }
        for w in 0..opts.walkers {
            chain.samples.extend_from_slice(&positions[w]);
            chain.log_prob.push(lp[w]);
        }
    }
    Ok(chain)
}

/// Split-chain Gelman-Rubin statistic per parameter: each walker chain is
/// halved and the usual between/within variance ratio computed across the
/// resulting 2 x walkers chains.
pub fn gelman_rubin(chain: &PosteriorChain) -> Vec<f64> {
    let half = chain.n_steps / 2;
    let mut out = Vec::with_capacity(chain.n_params);
    for p in 0..chain.n_params {
        let mut chains: Vec<Vec<f64>> = Vec::new();
        for w in 0..chain.n_walkers {
            let series = chain.walker_series(w, p);
            chains.push(series[..half].to_vec());
            chains.push(series[half..2 * half].to_vec());
        }
        let m = chains.len() as f64;
        let n = half as f64;
        let means: Vec<f64> = chains.iter().map(|c| mean(c)).collect();
        let grand = mean(&means);
        let b = n / (m - 1.0) * means.iter().map(|x| (x - grand) * (x - grand)).sum::<f64>();
        let w_var = chains.iter().map(|c| variance(c)).sum::<f64>() / m;
        let var_plus = (n - 1.0) / n * w_var + b / n;
        out.push((var_plus / w_var).sqrt());
    }
    out
}
