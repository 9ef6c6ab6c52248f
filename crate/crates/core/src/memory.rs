//! Collective-memory behavioral feedback.
//!
//! The history of hospital loads is kept in a per-patch daily ring buffer,
//! condensed into an exponential moving average, blended spatially towards
//! the worst-hit patch, and mapped through Gompertz curves into behavioral
//! multipliers: contact effectivity, leisure reduction, and per-sector work
//! reduction.

use crate::error::{Error, Result};
use crate::math::Mat;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

/// Memory horizon in days (six months).
pub const MEMORY_HORIZON: usize = 182;

/// Hard-wired saturation parameters: no voluntary reduction of leisure and
/// work contacts in the absence of hospitalizations.
pub const XI_WORK: f64 = 10.0;
pub const XI_LEISURE: f64 = 10.0;

/// Per-patch ring buffer of daily normalized hospital loads (patients per
/// 100 000 inhabitants), newest first.
#[derive(Debug, Clone)]
pub struct HospitalMemory {
    buffers: Vec<VecDeque<f64>>,
}

impl HospitalMemory {
    pub fn new(n_patches: usize) -> Self {
        HospitalMemory {
            buffers: vec![VecDeque::with_capacity(MEMORY_HORIZON); n_patches],
        }
    }

    pub fn n_patches(&self) -> usize {
        self.buffers.len()
    }

    /// Entries for patch `g`, newest first.
    pub fn history(&self, g: usize) -> impl Iterator<Item = f64> + '_ {
        self.buffers[g].iter().copied()
    }

    /// Record one day of absolute hospital loads. `hospital_load[g]` is the
    /// age-summed number of hospitalized patients in patch g; `population[g]`
    /// the total population. Normalizes to patients per 100 000 and drops
    /// entries older than the horizon.
    pub fn record_load(&mut self, hospital_load: &[f64], population: &[f64]) -> Result<()> {
        assert_eq!(hospital_load.len(), self.buffers.len());
        assert_eq!(population.len(), self.buffers.len());
        for (g, buf) in self.buffers.iter_mut().enumerate() {
            let load = hospital_load[g];
            if load < 0.0 {
                return Err(Error::Simulation(format!(
                    "negative hospital load {load} in patch index {g}"
                )));
            }
            buf.push_front(1.0e5 * load / population[g]);
            while buf.len() > MEMORY_HORIZON {
                buf.pop_back();
            }
        }
        Ok(())
    }

    /// Exponentially weighted memory of the hospital load, per patch.
    ///
    /// `EMA = (1/N) * sum_{tau=0..horizon} exp(-tau/nu) * load(t - tau)` with
    /// `N = sum_{tau=0..horizon} exp(-tau/nu)`. Days before the simulation
    /// start count as zero load at full weight, so the normalization is a
    /// constant independent of how much history exists.
    pub fn ema_load(&self, nu: f64) -> Vec<f64> {
        assert!(nu > 0.0, "memory mean lifetime must be positive");
        let norm: f64 = (0..=MEMORY_HORIZON)
            .map(|tau| (-(tau as f64) / nu).exp())
            .sum();
        self.buffers
            .iter()
            .map(|buf| {
                let acc: f64 = buf
                    .iter()
                    .enumerate()
                    .map(|(tau, load)| (-(tau as f64) / nu).exp() * load)
                    .sum();
                acc / norm
            })
            .collect()
    }
}

/// Parameters of the behavioral feedback.
#[derive(Debug, Clone)]
pub struct BehaviorParams {
    /// Mean lifetime of the hospital-load memory (days).
    pub nu: f64,
    /// Spatial awareness connectivity.
    pub mu: f64,
    /// IC-capacity ratio scaling the perceived load (1 for the reference
    /// country).
    pub ic_ratio: f64,
    pub xi_eff: f64,
    pub pi_eff: f64,
    pub xi_work: f64,
    pub xi_leisure: f64,
    pub pi_work: f64,
    pub pi_leisure: f64,
    /// Normalized patch-to-patch connectivity weights.
    pub connectivity: Mat,
    /// Sector willingness multipliers on pi_work.
    pub willingness: Vec<f64>,
}

/// Behavioral multipliers emitted each day. All values are remaining
/// fractions in [0, 1] (1 = prepandemic); the avoidance duals `1 - M` drive
/// the economic shocks.
#[derive(Debug, Clone)]
pub struct BehaviorSignal {
    /// Remaining contact effectivity per patch.
    pub m_eff: Vec<f64>,
    /// Remaining leisure contacts per patch.
    pub m_leisure: Vec<f64>,
    /// Remaining work contacts per (patch, sector).
    pub m_work: Mat,
}

impl BehaviorSignal {
    /// Everything at the prepandemic level (awareness inactive).
    pub fn neutral(n_patches: usize, n_sectors: usize) -> Self {
        let mut m_work = Mat::zeros(n_patches, n_sectors);
        for v in m_work.data_mut() {
            *v = 1.0;
        }
        BehaviorSignal {
            m_eff: vec![1.0; n_patches],
            m_leisure: vec![1.0; n_patches],
            m_work,
        }
    }

    pub fn avoidance_leisure(&self, g: usize) -> f64 {
        1.0 - self.m_leisure[g]
    }

    pub fn avoidance_work(&self, g: usize, k: usize) -> f64 {
        1.0 - self.m_work.get(g, k)
    }
}

/// Normalized connectivity weights from the commuter-fraction matrix:
/// the symmetrized fraction, scaled by the mean over a patch's other
/// connections. The diagonal is fixed at 1 (its value never enters the
/// perceived-load blend).
pub fn connectivity_weights(p_bar: &Mat) -> Mat {
    let g = p_bar.rows();
    let mut kappa = Mat::zeros(g, g);
    for a in 0..g {
        for b in 0..g {
            kappa.set(a, b, 0.5 * (p_bar.get(a, b) + p_bar.get(b, a)));
        }
    }
    let mut c = Mat::zeros(g, g);
    for a in 0..g {
        let others: Vec<f64> = (0..g)
            .filter(|&b| b != a)
            .map(|b| kappa.get(a, b))
            .collect();
        let mean = if others.is_empty() {
            1.0
        } else {
            others.iter().sum::<f64>() / others.len() as f64
        };
        for b in 0..g {
            if a == b {
                c.set(a, b, 1.0);
            } else if mean > 0.0 {
                c.set(a, b, kappa.get(a, b) / mean);
            }
        }
    }
    c
}

/// Blend each patch's EMA load towards the patch with the maximum load and
/// scale by the IC-capacity ratio:
/// `Q~^g = r * (EMA^g + mu * C^{gh} * EMA^h) / (1 + mu * C^{gh})` with
/// `h = argmax EMA`. For g = h this reduces to `r * EMA^h` for any C.
pub fn perceived_load(ema: &[f64], mu: f64, connectivity: &Mat, ic_ratio: f64) -> Vec<f64> {
    if ema.is_empty() {
        return Vec::new();
    }
    let h = ema
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    ema.iter()
        .enumerate()
        .map(|(g, &e)| {
            let c = connectivity.get(g, h);
            ic_ratio * (e + mu * c * ema[h]) / (1.0 + mu * c)
        })
        .collect()
}

/// Map perceived loads through the two-parameter Gompertz curves. With
/// awareness inactive every multiplier is 1; the work response is steepened
/// per sector by the willingness weights.
pub fn gompertz_response(
    perceived: &[f64],
    params: &BehaviorParams,
    awareness_active: bool,
) -> BehaviorSignal {
    let g = perceived.len();
    let k = params.willingness.len();
    if !awareness_active {
        return BehaviorSignal::neutral(g, k);
    }
    let gompertz = |xi: f64, pi: f64, q: f64| 1.0 - (-xi * (-pi * q).exp()).exp();
    let mut m_work = Mat::zeros(g, k);
    for (gg, &q) in perceived.iter().enumerate() {
        for kk in 0..k {
            m_work.set(
                gg,
                kk,
                gompertz(params.xi_work, params.willingness[kk] * params.pi_work, q),
            );
        }
    }
    BehaviorSignal {
        m_eff: perceived
            .iter()
            .map(|&q| gompertz(params.xi_eff, params.pi_eff, q))
            .collect(),
        m_leisure: perceived
            .iter()
            .map(|&q| gompertz(params.xi_leisure, params.pi_leisure, q))
            .collect(),
        m_work,
    }
}

/// How awareness to the epidemic is triggered in a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AwarenessMode {
    /// Behavioral feedback disabled entirely.
    Off,
    /// Latches on the first day national hospital incidence per 100 000
    /// reaches the threshold.
    Threshold,
    /// Active from the simulation start.
    PreTriggered,
}

/// Latching awareness state.
#[derive(Debug, Clone, Copy)]
pub struct Awareness {
    pub mode: AwarenessMode,
    pub threshold: f64,
    active: bool,
}

impl Awareness {
    pub fn new(mode: AwarenessMode, threshold: f64) -> Self {
        Awareness {
            mode,
            threshold,
            active: mode == AwarenessMode::PreTriggered,
        }
    }

    /// Update with today's national hospital incidence per 100 000. Once
    /// active, awareness stays active.
    pub fn update(&mut self, incidence_per_100k: f64) -> bool {
        debug_assert!(incidence_per_100k >= 0.0);
        if self.mode == AwarenessMode::Threshold && incidence_per_100k >= self.threshold {
            self.active = true;
        }
        self.active
    }

    pub fn is_active(&self) -> bool {
        self.active
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_patch_memory(loads: &[f64]) -> HospitalMemory {
        let mut m = HospitalMemory::new(1);
        for &l in loads {
            // Population 1e5 makes the recorded entry equal the raw load.
            m.record_load(&[l], &[1.0e5]).unwrap();
        }
        m
    }

    #[test]
    fn record_load_normalizes_per_100k() {
        let mut m = HospitalMemory::new(1);
        m.record_load(&[50.0], &[1.0e6]).unwrap();
        assert_eq!(m.history(0).next().unwrap(), 5.0);
        m.record_load(&[0.0], &[1.0e6]).unwrap();
        assert_eq!(m.history(0).next().unwrap(), 0.0);
    }

    #[test]
    fn record_load_rejects_negative() {
        let mut m = HospitalMemory::new(1);
        assert!(m.record_load(&[-1.0], &[1.0e6]).is_err());
    }

    #[test]
    fn ring_buffer_keeps_latest_182() {
        let loads: Vec<f64> = (0..183).map(|i| i as f64).collect();
        let m = single_patch_memory(&loads);
        let hist: Vec<f64> = m.history(0).collect();
        assert_eq!(hist.len(), MEMORY_HORIZON);
        assert_eq!(hist[0], 182.0); // newest
        assert_eq!(hist[MEMORY_HORIZON - 1], 1.0); // day 0 dropped
    }

    #[test]
    fn ema_of_constant_history_is_the_constant() {
        let m = single_patch_memory(&vec![5.0; 200]);
        let ema = m.ema_load(20.8)[0];
        // The horizon-th weight is unfilled (the buffer holds 182 entries
        // against a 183-term normalization), bounded by e^(-182/20.8).
        assert!((ema - 5.0).abs() / 5.0 < 1e-4, "ema = {ema}");
    }

    #[test]
    fn ema_single_pulse_matches_direct_summation() {
        let nu = 20.8;
        let m = single_patch_memory(&[10.0]);
        let norm: f64 = (0..=MEMORY_HORIZON).map(|t| (-(t as f64) / nu).exp()).sum();
        let expect = 10.0 / norm;
        assert!((m.ema_load(nu)[0] - expect).abs() < 1e-12);

        // Oracle: direct weighted summation over an arbitrary history.
        let loads: Vec<f64> = (0..50)
            .map(|i| (i as f64 * 0.37).sin().abs() * 7.0)
            .collect();
        let m = single_patch_memory(&loads);
        let mut acc = 0.0;
        for (tau, &l) in loads.iter().rev().enumerate() {
            acc += (-(tau as f64) / nu).exp() * l;
        }
        assert!((m.ema_load(nu)[0] - acc / norm).abs() < 1e-12);
    }

    #[test]
    fn ema_large_nu_approaches_unweighted_mean() {
        let loads: Vec<f64> = (0..MEMORY_HORIZON).map(|i| (i % 7) as f64).collect();
        let m = single_patch_memory(&loads);
        let mean = loads.iter().sum::<f64>() / loads.len() as f64;
        let ema = m.ema_load(1.0e9)[0];
        assert!(
            (ema - mean).abs() / mean < 0.01,
            "ema = {ema}, mean = {mean}"
        );
    }

    #[test]
    fn ema_is_linear_in_the_history() {
        let loads: Vec<f64> = (0..90).map(|i| ((i * 13) % 11) as f64).collect();
        let scaled: Vec<f64> = loads.iter().map(|l| 3.5 * l).collect();
        let a = single_patch_memory(&loads).ema_load(15.0)[0];
        let b = single_patch_memory(&scaled).ema_load(15.0)[0];
        assert!((b - 3.5 * a).abs() < 1e-12);
    }

    #[test]
    fn perceived_load_disabled_blending() {
        let c = connectivity_weights(&Mat::from_vec(2, 2, vec![0.6, 0.1, 0.1, 0.6]));
        let q = perceived_load(&[2.0, 8.0], 0.0, &c, 1.0);
        assert_eq!(q, vec![2.0, 8.0]);
        // The argmax patch is unaffected by blending for any mu.
        let q = perceived_load(&[2.0, 8.0], 3.0, &c, 1.0);
        assert_eq!(q[1], 8.0);
    }

    #[test]
    fn perceived_load_hand_computed_blend() {
        // EMA = {1, 9}, mu = 0.76, C^{12} = 1, r = 1 ->
        // Q~^1 = (1 + 0.76 * 9) / 1.76.
        let mut c = Mat::zeros(2, 2);
        c.set(0, 1, 1.0);
        c.set(1, 0, 1.0);
        c.set(0, 0, 1.0);
        c.set(1, 1, 1.0);
        let q = perceived_load(&[1.0, 9.0], 0.76, &c, 1.0);
        assert!((q[0] - (1.0 + 0.76 * 9.0) / 1.76).abs() < 1e-12);
        assert!((q[0] - 4.4545454545).abs() < 1e-6);
        assert_eq!(q[1], 9.0);
    }

    #[test]
    fn perceived_load_scales_with_ic_ratio() {
        let c = connectivity_weights(&Mat::from_vec(1, 1, vec![0.7]));
        let q = perceived_load(&[4.0], 0.5, &c, 1.5);
        assert!((q[0] - 6.0).abs() < 1e-12);
    }

    fn params(willingness: Vec<f64>) -> BehaviorParams {
        BehaviorParams {
            nu: 20.8,
            mu: 0.76,
            ic_ratio: 1.0,
            xi_eff: 0.39,
            pi_eff: 0.070,
            xi_work: XI_WORK,
            xi_leisure: XI_LEISURE,
            pi_work: 0.032,
            pi_leisure: 0.055,
            connectivity: Mat::from_vec(1, 1, vec![1.0]),
            willingness,
        }
    }

    #[test]
    fn gompertz_saturation_at_zero_load() {
        let p = params(vec![1.0]);
        let sig = gompertz_response(&[0.0], &p, true);
        // xi = 10 -> barely any voluntary reduction at zero load.
        assert!((sig.m_leisure[0] - (1.0 - (-10.0f64).exp())).abs() < 1e-12);
        assert!((sig.m_leisure[0] - 0.9999546).abs() < 1e-6);
        // Calibrated effectivity floor: 1 - e^{-0.39}.
        assert!((sig.m_eff[0] - 0.3229).abs() < 1e-4);
    }

    #[test]
    fn gompertz_full_reduction_at_extreme_load() {
        let p = params(vec![1.0]);
        let sig = gompertz_response(&[1.0e9], &p, true);
        assert!(sig.m_eff[0] < 1e-12);
        assert!(sig.m_leisure[0] < 1e-12);
        assert!(sig.m_work.get(0, 0) < 1e-12);
    }

    #[test]
    fn gompertz_inactive_awareness_is_neutral() {
        let p = params(vec![1.0, 2.0]);
        let sig = gompertz_response(&[50.0], &p, false);
        assert_eq!(sig.m_eff[0], 1.0);
        assert_eq!(sig.m_work.get(0, 1), 1.0);
    }

    #[test]
    fn gompertz_willingness_steepens_work_response() {
        let p = params(vec![0.5, 2.0]);
        let sig = gompertz_response(&[20.0], &p, true);
        assert!(sig.m_work.get(0, 1) < sig.m_work.get(0, 0));
    }

    #[test]
    fn gompertz_is_monotone_decreasing_in_load() {
        let p = params(vec![1.0]);
        let mut prev = f64::INFINITY;
        for step in 0..100 {
            let q = step as f64 * 1.5;
            let sig = gompertz_response(&[q], &p, true);
            for m in [sig.m_eff[0], sig.m_leisure[0], sig.m_work.get(0, 0)] {
                assert!((0.0..=1.0).contains(&m));
            }
            assert!(sig.m_eff[0] < prev);
            prev = sig.m_eff[0];
        }
    }

    #[test]
    fn awareness_latches() {
        let mut a = Awareness::new(AwarenessMode::Threshold, 0.2);
        assert!(!a.update(0.1));
        assert!(a.update(0.25));
        assert!(a.update(0.0), "awareness must stay active after triggering");

        let pre = Awareness::new(AwarenessMode::PreTriggered, 0.2);
        assert!(pre.is_active());

        let mut off = Awareness::new(AwarenessMode::Off, 0.2);
        assert!(!off.update(100.0));
    }

    #[test]
    fn behavioral_lag_peak_after_load_peak() {
        // A symmetric triangular pulse in recorded load: the day of minimum M
        // must come strictly after the day of peak load.
        let p = params(vec![1.0]);
        let mut memory = HospitalMemory::new(1);
        let mut min_m = f64::INFINITY;
        let mut min_day = 0;
        let peak_day = 60;
        for day in 0..120 {
            let load = if day <= peak_day {
                day as f64
            } else {
                (120 - day) as f64
            };
            memory.record_load(&[load], &[1.0e5]).unwrap();
            let ema = memory.ema_load(p.nu);
            let q = perceived_load(&ema, p.mu, &p.connectivity, p.ic_ratio);
            let sig = gompertz_response(&q, &p, true);
            if sig.m_leisure[0] < min_m {
                min_m = sig.m_leisure[0];
                min_day = day;
            }
        }
        assert!(
            min_day > peak_day,
            "minimum M on day {min_day}, load peak on day {peak_day}"
        );
    }
}
