//! Nelder-Mead simplex minimization with the standard reflection, expansion,
//! contraction, and shrink coefficients (1, 2, 0.5, 0.5).

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct NelderMeadOptions {
    /// Stop when the simplex diameter falls below this.
    pub diameter_tol: f64,
    /// Hard cap on objective evaluations.
    pub max_evals: usize,
    /// Initial displacement per coordinate (relative where the start is
    /// nonzero, absolute otherwise).
    pub init_step: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions {
            diameter_tol: 1e-10,
            max_evals: 20_000,
            init_step: 0.05,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    /// True when the diameter criterion was met (not the evaluation cap).
    pub converged: bool,
}

/// Minimize `f` from `x0`.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], opts: &NelderMeadOptions) -> Result<NelderMeadResult>
where
    F: FnMut(&[f64]) -> f64,
{
    const ALPHA: f64 = 1.0; // reflection
    const GAMMA: f64 = 2.0; // expansion
    const RHO: f64 = 0.5; // contraction
    const SIGMA: f64 = 0.5; // shrink

    let dim = x0.len();
    assert!(dim > 0);
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| -> f64 {
        *evals += 1;
        f(x)
    };

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    simplex.push(x0.to_vec());
    for i in 0..dim {
        let mut p = x0.to_vec();
        let step = if p[i].abs() > 1e-8 {
            p[i].abs() * opts.init_step
        } else {
            opts.init_step
        };
        p[i] += step;
        simplex.push(p);
    }
    let mut values: Vec<f64> = simplex.iter().map(|p| eval(p, &mut evals)).collect();
    if values.iter().all(|v| !v.is_finite()) {
        return Err(Error::Calibration(
            "objective not finite at any initial simplex vertex".to_string(),
        ));
    }

    loop {
        // Order best..worst.
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| {
            values[a]
                .partial_cmp(&values[b])
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let best = order[0];
        let worst = order[dim];
        let second_worst = order[dim - 1];

        let diameter = (1..=dim)
            .map(|i| {
                simplex[order[i]]
                    .iter()
                    .zip(simplex[best].iter())
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0f64, f64::max)
            })
            .fold(0.0f64, f64::max);
        if diameter < opts.diameter_tol || evals >= opts.max_evals {
            return Ok(NelderMeadResult {
                x: simplex[best].clone(),
                value: values[best],
                evaluations: evals,
                converged: diameter < opts.diameter_tol,
            });
        }

        let mut centroid = vec![0.0; dim];
        for &i in order.iter().take(dim) {
            for d in 0..dim {
                centroid[d] += simplex[i][d];
            }
        }
        for c in centroid.iter_mut() {
            *c /= dim as f64;
        }

        let reflect: Vec<f64> = (0..dim)
            .map(|d| centroid[d] + ALPHA * (centroid[d] - simplex[worst][d]))
            .collect();
        let f_reflect = eval(&reflect, &mut evals);

        if f_reflect < values[second_worst] && f_reflect >= values[best] {
            simplex[worst] = reflect;
            values[worst] = f_reflect;
            continue;
        }

        if f_reflect < values[best] {
            let expand: Vec<f64> = (0..dim)
                .map(|d| centroid[d] + GAMMA * (reflect[d] - centroid[d]))
                .collect();
            let f_expand = eval(&expand, &mut evals);
            if f_expand < f_reflect {
                simplex[worst] = expand;
                values[worst] = f_expand;
            } else {
                simplex[worst] = reflect;
                values[worst] = f_reflect;
            }
            continue;
        }

        // Contraction (outside towards the reflection when it improved on
        // the worst, inside otherwise).
        let (towards, f_towards) = if f_reflect < values[worst] {
            (reflect.clone(), f_reflect)
        } else {
            (simplex[worst].clone(), values[worst])
        };
        let contract: Vec<f64> = (0..dim)
            .map(|d| centroid[d] + RHO * (towards[d] - centroid[d]))
            .collect();
        let f_contract = eval(&contract, &mut evals);
        if f_contract < f_towards {
            simplex[worst] = contract;
            values[worst] = f_contract;
            continue;
        }

        // Shrink towards the best vertex.
        let best_point = simplex[best].clone();
        for i in 0..=dim {
            if i == best {
                continue;
            }
            for d in 0..dim {
                simplex[i][d] = best_point[d] + SIGMA * (simplex[i][d] - best_point[d]);
            }
            values[i] = eval(&simplex[i], &mut evals);
        }
    }
}
