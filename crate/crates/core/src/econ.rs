//! Daily discrete-time production-network economy.
//!
//! Each day: shocks are converted into demands, productive capacity is
//! evaluated under labor and input constraints (half-critical partially
//! binding Leontief), realized output is rationed proportionally across
//! customers, inventories are updated, and labor is adjusted towards the
//! binding constraint.

use crate::datahub::{CountryDataset, Criticality, IOTables};
use crate::date::Date;
use crate::math::Mat;

/// Economic state, all in source currency units per year.
#[derive(Debug, Clone, PartialEq)]
pub struct EconState {
    /// Gross output per sector.
    pub x: Vec<f64>,
    /// Total demand per sector (recorded each day; feeds the next day's
    /// order formation).
    pub d: Vec<f64>,
    /// Labor compensation per sector.
    pub l: Vec<f64>,
    /// Realized household consumption.
    pub c: Vec<f64>,
    /// Realized exogenous consumption.
    pub f: Vec<f64>,
    /// Realized business-to-business orders, supplier x consumer.
    pub orders: Mat,
    /// Inventories of input k held by sector l.
    pub inventory: Mat,
}

impl EconState {
    /// Pre-shock equilibrium: output equals demand equals x0, orders equal
    /// the IO flows, inventories at target.
    pub fn equilibrium(io: &IOTables) -> Self {
        EconState {
            x: io.x0.clone(),
            d: io.x0.clone(),
            l: io.l0.clone(),
            c: io.c0.clone(),
            f: io.f0.clone(),
            orders: io.z.clone(),
            inventory: io.target_inventory.clone(),
        }
    }
}

/// Static parameters of the production network.
#[derive(Debug, Clone)]
pub struct EconParams {
    pub tech: Mat,
    pub criticality: Mat,
    pub target_inventory: Mat,
    pub x0: Vec<f64>,
    pub l0: Vec<f64>,
    pub c0: Vec<f64>,
    pub f0: Vec<f64>,
    /// Baseline household consumption shares.
    pub theta0: Vec<f64>,
    /// Total baseline household consumption.
    pub c_total0: f64,
    /// Inventory restocking time (days).
    pub tau: f64,
    /// Hiring time (days).
    pub iota_h: f64,
    /// Firing time (days).
    pub iota_f: f64,
    /// Household savings rate under shocks.
    pub delta_s: f64,
}

impl EconParams {
    pub fn from_dataset(ds: &CountryDataset, iota_h: f64, iota_f: f64) -> Self {
        let c_total0: f64 = ds.io.c0.iter().sum();
        EconParams {
            tech: ds.io.tech_coeffs.clone(),
            criticality: ds.sectors.criticality.clone(),
            target_inventory: ds.io.target_inventory.clone(),
            x0: ds.io.x0.clone(),
            l0: ds.io.l0.clone(),
            c0: ds.io.c0.clone(),
            f0: ds.io.f0.clone(),
            theta0: ds.io.c0.iter().map(|c| c / c_total0).collect(),
            c_total0,
            tau: 14.0,
            iota_h,
            iota_f,
            delta_s: 0.75,
        }
    }

    pub fn n_sectors(&self) -> usize {
        self.x0.len()
    }
}

/// Daily shocks to the economy, per sector, each in [0, 1].
#[derive(Debug, Clone)]
pub struct ShockSet {
    /// Household demand shock.
    pub kappa_d: Vec<f64>,
    /// Labor supply shock.
    pub kappa_s: Vec<f64>,
    /// Exogenous demand shock.
    pub kappa_f: Vec<f64>,
}

impl ShockSet {
    pub fn none(n_sectors: usize) -> Self {
        ShockSet {
            kappa_d: vec![0.0; n_sectors],
            kappa_s: vec![0.0; n_sectors],
            kappa_f: vec![0.0; n_sectors],
        }
    }
}

/// Household demand shock per sector: the sick stop leisure-associated
/// consumption entirely, a fraction of the healthy avoid it voluntarily, and
/// each sector caps the shock at its leisure-demand association.
pub fn household_shock(
    i_mild_national: f64,
    avoidance_leisure: f64,
    lav_demand: &[f64],
) -> Vec<f64> {
    lav_demand
        .iter()
        .map(|lav| (i_mild_national + (1.0 - i_mild_national) * avoidance_leisure) * lav)
        .collect()
}

/// National labor supply shock per sector. Per patch the shock combines
/// sickness of the employed, mandated closures (bounded by the share of
/// employees that can neither work on site nor from home), and voluntary
/// absenteeism beyond achievable telework; patch values are aggregated with
/// employment weights.
pub fn labor_shock(
    i_mild_active_employed: &[f64],
    closure: &Mat,
    avoidance_work: &Mat,
    f_workplace: &[f64],
    f_telework: &[f64],
    lmc: &Mat,
    active_population: &[f64],
) -> Vec<f64> {
    let g = closure.rows();
    let k = closure.cols();
    let mut national = vec![0.0; k];
    for kk in 0..k {
        let mut acc = 0.0;
        let mut weight = 0.0;
        for gg in 0..g {
            let sick = i_mild_active_employed[gg];
            let forced = closure.get(gg, kk) * (1.0 - f_workplace[kk] - f_telework[kk]).max(0.0);
            let voluntary = (avoidance_work.get(gg, kk) - f_telework[kk]).max(0.0);
            let shock = sick + (1.0 - sick) * forced.max(voluntary);
            let w = lmc.get(gg, kk) * active_population[gg];
            acc += w * shock;
            weight += w;
        }
        national[kk] = if weight > 0.0 { acc / weight } else { 0.0 };
    }
    national
}

/// Time courses of the exogenous demand shocks. Investment and goods-export
/// shocks ramp in over March 2020, hold, and ramp out between May 1 and
/// September 1, 2020; the services-export shock recovers by September 2021;
/// government demand is never shocked.
#[derive(Debug, Clone)]
pub struct ExogenousSchedule {
    /// Per-sector split of baseline exogenous demand into components.
    pub f_gov: Vec<f64>,
    pub f_inv: Vec<f64>,
    pub f_exp_goods: Vec<f64>,
    pub f_exp_services: Vec<f64>,
    /// Peak shock magnitudes.
    pub investment_shock: f64,
    pub goods_export_shock: f64,
    pub services_export_shock: f64,
    pub ramp_in_start: Date,
    pub ramp_in_end: Date,
    pub ramp_out_start: Date,
    pub ramp_out_end: Date,
    pub services_recovery_end: Date,
}

impl ExogenousSchedule {
    /// Split each sector's baseline exogenous demand into components.
    /// Public-dominated activities (public administration, education, health
    /// and care, utilities) sell almost entirely to government, construction
    /// to investment, and goods producers to exports; the remaining services
    /// use the configured national shares. Goods exporters are the sectors
    /// flagged in `is_goods_sector`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        codes: &[String],
        f0: &[f64],
        is_goods_sector: &[bool],
        gov_share: f64,
        inv_share: f64,
        investment_shock: f64,
        goods_export_shock: f64,
        services_export_shock: f64,
    ) -> Self {
        assert!(gov_share + inv_share <= 1.0, "component shares exceed 1");
        let n = f0.len();
        let mut s = ExogenousSchedule {
            f_gov: vec![0.0; n],
            f_inv: vec![0.0; n],
            f_exp_goods: vec![0.0; n],
            f_exp_services: vec![0.0; n],
            investment_shock,
            goods_export_shock,
            services_export_shock,
            ramp_in_start: Date::from_ymd(2020, 3, 1),
            ramp_in_end: Date::from_ymd(2020, 4, 1),
            ramp_out_start: Date::from_ymd(2020, 5, 1),
            ramp_out_end: Date::from_ymd(2020, 9, 1),
            services_recovery_end: Date::from_ymd(2021, 9, 1),
        };
        let public = ["O84", "P85", "Q86", "Q87-88", "D35", "E36", "E37-39"];
        for kk in 0..n {
            let code = codes[kk].as_str();
            let (gov, inv) = if public.contains(&code) {
                (0.90, 0.05)
            } else if code.starts_with('F') {
                (0.15, 0.80)
            } else if is_goods_sector[kk] {
                (0.02, 0.10)
            } else {
                (gov_share, inv_share)
            };
            s.f_gov[kk] = gov * f0[kk];
            s.f_inv[kk] = inv * f0[kk];
            let export = (1.0 - gov - inv) * f0[kk];
            if is_goods_sector[kk] {
                s.f_exp_goods[kk] = export;
            } else {
                s.f_exp_services[kk] = export;
            }
        }
        s
    }

    fn ramp(&self, t: Date, peak: f64, out_end: Date) -> f64 {
        let day = t.rata_die();
        let (in_start, in_end) = (self.ramp_in_start.rata_die(), self.ramp_in_end.rata_die());
        let (out_start, out_end) = (self.ramp_out_start.rata_die(), out_end.rata_die());
        if day < in_start {
            0.0
        } else if day < in_end {
            peak * (day - in_start) as f64 / (in_end - in_start) as f64
        } else if day < out_start {
            peak
        } else if day < out_end {
            peak * (1.0 - (day - out_start) as f64 / (out_end - out_start) as f64)
        } else {
            0.0
        }
    }

    /// Component shock levels on day `t`, scaled by `multiplier`.
    pub fn component_shocks(&self, t: Date, multiplier: f64) -> (f64, f64, f64) {
        (
            multiplier * self.ramp(t, self.investment_shock, self.ramp_out_end),
            multiplier * self.ramp(t, self.goods_export_shock, self.ramp_out_end),
            multiplier * self.ramp(t, self.services_export_shock, self.services_recovery_end),
        )
    }

    /// Desired exogenous demand and the effective per-sector shock on day
    /// `t`: `f_d = (1 - kappa_f) * f0` componentwise.
    pub fn demand(&self, t: Date, multiplier: f64, f0: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (k_inv, k_goods, k_serv) = self.component_shocks(t, multiplier);
        let n = f0.len();
        let mut f_d = vec![0.0; n];
        let mut kappa = vec![0.0; n];
        for kk in 0..n {
            let demand = self.f_gov[kk]
                + (1.0 - k_inv) * self.f_inv[kk]
                + (1.0 - k_goods) * self.f_exp_goods[kk]
                + (1.0 - k_serv) * self.f_exp_services[kk];
            f_d[kk] = demand;
            kappa[kk] = if f0[kk] != 0.0 {
                1.0 - demand / f0[kk]
            } else {
                0.0
            };
        }
        (f_d, kappa)
    }
}

/// Desired household demand under the sector shocks: preferences reallocate
/// towards unshocked sectors and a fraction `delta_s` of forgone spending is
/// saved.
pub fn household_demand(kappa_d: &[f64], theta0: &[f64], delta_s: f64, c_total0: f64) -> Vec<f64> {
    let n = kappa_d.len();
    let retained: f64 = (0..n).map(|k| theta0[k] * (1.0 - kappa_d[k])).sum();
    if retained <= 0.0 {
        return vec![0.0; n];
    }
    let aggregate_shock = delta_s * (1.0 - retained);
    (0..n)
        .map(|k| {
            let theta = (1.0 - kappa_d[k]) * theta0[k] / retained;
            (1.0 - aggregate_shock) * theta * c_total0
        })
        .collect()
}

/// Desired business-to-business orders: yesterday's demand passed through
/// the production recipe plus a restocking term closing inventory gaps over
/// `tau` days. Negative orders are floored at zero.
pub fn intermediate_demand(
    d_prev: &[f64],
    inventory: &Mat,
    target_inventory: &Mat,
    tech: &Mat,
    tau: f64,
) -> Mat {
    let n = d_prev.len();
    let mut orders = Mat::zeros(n, n);
    for k in 0..n {
        for l in 0..n {
            let pass_through = tech.get(k, l) * d_prev[l];
            let restock = (target_inventory.get(k, l) - inventory.get(k, l)) / tau;
            orders.set(k, l, (pass_through + restock).max(0.0));
        }
    }
    orders
}

/// Labor-constrained productive capacity.
pub fn labor_capacity(l: &[f64], l0: &[f64], x0: &[f64]) -> Vec<f64> {
    (0..l.len()).map(|k| l[k] / l0[k] * x0[k]).collect()
}

/// Input-constrained productive capacity under the half-critical partially
/// binding Leontief production function: depleted critical inputs halt
/// production, depleted important inputs halve it, other inputs never bind.
/// Sectors without critical or important inputs are unconstrained
/// (`f64::INFINITY`).
pub fn input_capacity(inventory: &Mat, tech: &Mat, criticality: &Mat, x0: &[f64]) -> Vec<f64> {
    let n = x0.len();
    let mut cap = vec![f64::INFINITY; n];
    for k in 0..n {
        let mut bound = f64::INFINITY;
        for input in 0..n {
            let level = Criticality::from_level(criticality.get(k, input))
                .expect("validated criticality level");
            if level == Criticality::NonCritical {
                continue;
            }
            let a = tech.get(input, k);
            if a == 0.0 {
                // A listed critical input the sector does not actually
                // consume cannot constrain it.
                continue;
            }
            let runway = inventory.get(input, k) / a;
            let candidate = match level {
                Criticality::Critical => runway,
                Criticality::Important => 0.5 * (runway + x0[k]),
                Criticality::NonCritical => unreachable!(),
            };
            bound = bound.min(candidate);
        }
        cap[k] = bound;
    }
    cap
}

/// Realized output and strict proportional rationing across households,
/// exogenous customers, and businesses.
pub struct Rationed {
    pub x: Vec<f64>,
    pub c: Vec<f64>,
    pub f: Vec<f64>,
    pub orders: Mat,
    pub d: Vec<f64>,
}

pub fn produce_and_ration(
    orders_desired: &Mat,
    c_desired: &[f64],
    f_desired: &[f64],
    x_cap: &[f64],
    x_inp: &[f64],
) -> Rationed {
    let n = c_desired.len();
    let mut d = vec![0.0; n];
    for k in 0..n {
        d[k] = orders_desired.row_sum(k) + c_desired[k] + f_desired[k];
    }
    let mut x = vec![0.0; n];
    let mut c = vec![0.0; n];
    let mut f = vec![0.0; n];
    let mut orders = Mat::zeros(n, n);
    for k in 0..n {
        x[k] = x_cap[k].min(x_inp[k]).min(d[k]);
        let ratio = if d[k] != 0.0 { x[k] / d[k] } else { 1.0 };
        c[k] = c_desired[k] * ratio;
        f[k] = f_desired[k] * ratio;
        for l in 0..n {
            orders.set(k, l, orders_desired.get(k, l) * ratio);
        }
    }
    Rationed { x, c, f, orders, d }
}

/// Inventory update: deliveries in, production draws out, floored at zero.
pub fn update_inventories(inventory: &Mat, orders: &Mat, tech: &Mat, x: &[f64]) -> Mat {
    let n = x.len();
    let mut next = Mat::zeros(n, n);
    for k in 0..n {
        for l in 0..n {
            let v = inventory.get(k, l) + orders.get(k, l) - tech.get(k, l) * x[l];
            next.set(k, l, v.max(0.0));
        }
    }
    next
}

/// Labor adjustment towards the binding constraint, at hiring/firing speed,
/// clamped to `[0, l_max]`.
#[allow(clippy::too_many_arguments)]
pub fn adjust_labor(
    l: &[f64],
    l0: &[f64],
    x0: &[f64],
    x_inp: &[f64],
    d: &[f64],
    x_cap: &[f64],
    iota_h: f64,
    iota_f: f64,
    l_max: &[f64],
) -> Vec<f64> {
    (0..l.len())
        .map(|k| {
            let delta = l0[k] / x0[k] * (x_inp[k].min(d[k]) - x_cap[k]);
            let speed = if delta >= 0.0 { iota_h } else { iota_f };
            (l[k] + delta / speed).clamp(0.0, l_max[k])
        })
        .collect()
}

/// One day of the economy: demands, capacities, production and rationing,
/// inventory update, labor adjustment. Records today's total demand for
/// tomorrow's order formation.
pub fn step_econ_day(state: &EconState, params: &EconParams, shocks: &ShockSet) -> EconState {
    let n = params.n_sectors();
    let f_desired: Vec<f64> = (0..n)
        .map(|k| (1.0 - shocks.kappa_f[k]) * params.f0[k])
        .collect();
    let c_desired = household_demand(
        &shocks.kappa_d,
        &params.theta0,
        params.delta_s,
        params.c_total0,
    );
    let orders_desired = intermediate_demand(
        &state.d,
        &state.inventory,
        &params.target_inventory,
        &params.tech,
        params.tau,
    );
    let x_cap = labor_capacity(&state.l, &params.l0, &params.x0);
    let x_inp = input_capacity(
        &state.inventory,
        &params.tech,
        &params.criticality,
        &params.x0,
    );
    let rationed = produce_and_ration(&orders_desired, &c_desired, &f_desired, &x_cap, &x_inp);
    let inventory = update_inventories(
        &state.inventory,
        &rationed.orders,
        &params.tech,
        &rationed.x,
    );
    let l_max: Vec<f64> = (0..n)
        .map(|k| (1.0 - shocks.kappa_s[k]) * params.l0[k])
        .collect();
    let l = adjust_labor(
        &state.l,
        &params.l0,
        &params.x0,
        &x_inp,
        &rationed.d,
        &x_cap,
        params.iota_h,
        params.iota_f,
        &l_max,
    );
    EconState {
        x: rationed.x,
        d: rationed.d,
        l,
        c: rationed.c,
        f: rationed.f,
        orders: rationed.orders,
        inventory,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testkit;

    fn fixture_params() -> (EconParams, EconState) {
        let ds = testkit::small_dataset(2, 3);
        let params = EconParams::from_dataset(&ds, 7.0, 6.1);
        let state = EconState::equilibrium(&ds.io);
        (params, state)
    }

    #[test]
    fn household_shock_composition() {
        let lav = [1.0, 0.1];
        let none = household_shock(0.0, 0.0, &lav);
        assert_eq!(none, vec![0.0, 0.0]);
        // Full avoidance saturates at the leisure-demand association.
        let full = household_shock(0.0, 1.0, &lav);
        assert_eq!(full, lav.to_vec());
        // Hand evaluation: 0.01 + 0.99 * 0.5 = 0.505.
        let mix = household_shock(0.01, 0.5, &[1.0]);
        assert!((mix[0] - 0.505).abs() < 1e-12);
    }

    #[test]
    fn labor_shock_piecewise_terms() {
        let g = 1;
        let k = 1;
        let lmc = Mat::from_vec(g, k, vec![1.0]);
        let active = vec![1000.0];
        let closure0 = Mat::zeros(g, k);
        let avoid0 = Mat::zeros(g, k);
        // Nothing active.
        let s = labor_shock(&[0.0], &closure0, &avoid0, &[0.3], &[0.3], &lmc, &active);
        assert_eq!(s[0], 0.0);
        // Full closure: the furloughed share 1 - f_wp - f_tel.
        let closure1 = Mat::from_vec(g, k, vec![1.0]);
        let s = labor_shock(&[0.0], &closure1, &avoid0, &[0.3], &[0.3], &lmc, &active);
        assert!((s[0] - 0.4).abs() < 1e-12);
        // Voluntary absenteeism beyond telework: a_work 0.9, f_tel 0.3.
        let avoid = Mat::from_vec(g, k, vec![0.9]);
        let s = labor_shock(&[0.0], &closure0, &avoid, &[0.3], &[0.3], &lmc, &active);
        assert!((s[0] - 0.6).abs() < 1e-12);
    }

    #[test]
    fn labor_shock_aggregates_with_employment_weights() {
        // Two patches, shock only where the employment weight is 3x.
        let lmc = Mat::from_vec(2, 1, vec![1.0, 1.0]);
        let active = vec![3000.0, 1000.0];
        let closure = Mat::from_vec(2, 1, vec![1.0, 0.0]);
        let avoid = Mat::zeros(2, 1);
        let s = labor_shock(&[0.0, 0.0], &closure, &avoid, &[0.2], &[0.3], &lmc, &active);
        // Patch shock 0.5 with weight 3/4.
        assert!((s[0] - 0.375).abs() < 1e-12);
    }

    #[test]
    fn exogenous_schedule_ramps() {
        let f0 = vec![100.0, 200.0];
        let codes = vec!["C10-12".to_string(), "J58".to_string()];
        let sched =
            ExogenousSchedule::new(&codes, &f0, &[true, false], 0.25, 0.35, 0.162, 0.25, 0.21);
        // Before the pandemic: no shock.
        let (f_d, kappa) = sched.demand(Date::from_ymd(2020, 1, 15), 1.0, &f0);
        assert_eq!(f_d, f0);
        assert!(kappa.iter().all(|&k| k == 0.0));
        // April 2020: fully ramped; the goods-export component runs at 0.75.
        let (k_inv, k_goods, k_serv) = sched.component_shocks(Date::from_ymd(2020, 4, 15), 1.0);
        assert!((k_inv - 0.162).abs() < 1e-12);
        assert!((k_goods - 0.25).abs() < 1e-12);
        assert!((k_serv - 0.21).abs() < 1e-12);
        let (f_d, _) = sched.demand(Date::from_ymd(2020, 4, 15), 1.0, &f0);
        // Goods producer: 2 % government, 10 % investment, 88 % goods exports.
        let expect0 = 0.02 * 100.0 + (1.0 - 0.162) * 0.10 * 100.0 + 0.75 * 0.88 * 100.0;
        assert!((f_d[0] - expect0).abs() < 1e-9);
        // Goods shock gone by September 2020; services recover later.
        let (_, k_goods, k_serv) = sched.component_shocks(Date::from_ymd(2020, 10, 1), 1.0);
        assert_eq!(k_goods, 0.0);
        assert!(k_serv > 0.0);
        let (_, _, k_serv) = sched.component_shocks(Date::from_ymd(2021, 9, 2), 1.0);
        assert_eq!(k_serv, 0.0);
        // Full shock on every component leaves only the government part.
        let all = ExogenousSchedule::new(&codes, &f0, &[true, false], 0.0, 0.5, 1.0, 1.0, 1.0);
        let (f_d, kappa) = all.demand(Date::from_ymd(2020, 4, 15), 1.0, &f0);
        assert!((f_d[0] - 0.02 * 100.0).abs() < 1e-9);
        assert!((kappa[0] - 0.98).abs() < 1e-9);
        assert!((f_d[1] - 0.0 * 200.0).abs() < 1e-9);
        assert!((kappa[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn household_demand_reallocation() {
        let theta0 = vec![0.5, 0.3, 0.2];
        let c_total = 1000.0;
        // No shock reproduces the baseline.
        let c = household_demand(&[0.0, 0.0, 0.0], &theta0, 0.75, c_total);
        for (got, want) in c.iter().zip([500.0, 300.0, 200.0]) {
            assert!((got - want).abs() < 1e-9);
        }
        // Uniform shock: preferences unchanged, 25 % of the forgone spending
        // is reallocated.
        let kappa = 0.4;
        let c = household_demand(&[kappa; 3], &theta0, 0.75, c_total);
        for (got, t0) in c.iter().zip(theta0.iter()) {
            assert!((got - (1.0 - 0.75 * kappa) * t0 * c_total).abs() < 1e-9);
        }
        // One sector fully shocked: it gets nothing, others rescale upward.
        let c = household_demand(&[1.0, 0.0, 0.0], &theta0, 0.75, c_total);
        assert_eq!(c[0], 0.0);
        let aggregate = 1.0 - 0.75 * 0.5;
        let expect1 = aggregate * (0.3 / 0.5) * c_total;
        assert!((c[1] - expect1).abs() < 1e-9);
        // All sectors fully shocked: demand collapses to zero.
        let c = household_demand(&[1.0; 3], &theta0, 0.75, c_total);
        assert!(c.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn intermediate_demand_gap_closing() {
        let (params, state) = fixture_params();
        // At target inventories the orders are pure pass-through.
        let orders = intermediate_demand(
            &state.d,
            &state.inventory,
            &params.target_inventory,
            &params.tech,
            params.tau,
        );
        let n = params.n_sectors();
        for k in 0..n {
            for l in 0..n {
                let expect = params.tech.get(k, l) * state.d[l];
                assert!((orders.get(k, l) - expect).abs() < 1e-9);
            }
        }
        // A 14-unit gap at tau = 14 adds one unit per day.
        let mut low = state.inventory.clone();
        low.add_at(0, 1, -14.0);
        let orders =
            intermediate_demand(&state.d, &low, &params.target_inventory, &params.tech, 14.0);
        let expect = params.tech.get(0, 1) * state.d[1] + 1.0;
        assert!((orders.get(0, 1) - expect).abs() < 1e-9);
        // The gap term vanishes as tau grows.
        let orders = intermediate_demand(
            &state.d,
            &low,
            &params.target_inventory,
            &params.tech,
            1.0e12,
        );
        let expect = params.tech.get(0, 1) * state.d[1];
        assert!((orders.get(0, 1) - expect).abs() < 1e-6);
    }

    #[test]
    fn labor_capacity_proportional() {
        let cap = labor_capacity(&[50.0], &[50.0], &[500.0]);
        assert_eq!(cap[0], 500.0);
        let cap = labor_capacity(&[40.0], &[50.0], &[500.0]);
        assert_eq!(cap[0], 400.0);
        let cap = labor_capacity(&[0.0], &[50.0], &[500.0]);
        assert_eq!(cap[0], 0.0);
    }

    #[test]
    fn input_capacity_half_critical_rules() {
        // Sector 0 with one critical input (1) and one important input (2).
        let mut criticality = Mat::zeros(3, 3);
        criticality.set(0, 1, 1.0);
        criticality.set(0, 2, 0.5);
        let mut tech = Mat::zeros(3, 3);
        tech.set(1, 0, 0.2);
        tech.set(2, 0, 0.1);
        let x0 = vec![100.0, 100.0, 100.0];

        // Critical input with zero stock halts production.
        let mut inv = Mat::zeros(3, 3);
        inv.set(2, 0, 1000.0);
        let cap = input_capacity(&inv, &tech, &criticality, &x0);
        assert_eq!(cap[0], 0.0);

        // Important input with zero stock, critical ample: half of x0.
        let mut inv = Mat::zeros(3, 3);
        inv.set(1, 0, 1.0e9);
        let cap = input_capacity(&inv, &tech, &criticality, &x0);
        assert!((cap[0] - 50.0).abs() < 1e-9);

        // No critical or important inputs: unconstrained.
        assert!(cap[1].is_infinite());
        assert!(cap[2].is_infinite());

        // A listed critical input the sector does not consume is skipped.
        let mut crit2 = Mat::zeros(3, 3);
        crit2.set(0, 1, 1.0);
        let cap = input_capacity(&Mat::zeros(3, 3), &Mat::zeros(3, 3), &crit2, &x0);
        assert!(cap[0].is_infinite());
    }

    #[test]
    fn input_capacity_ample_stocks_never_bind() {
        let ds = testkit::small_dataset(1, 5);
        let cap = input_capacity(
            &ds.io.target_inventory,
            &ds.io.tech_coeffs,
            &ds.sectors.criticality,
            &ds.io.x0,
        );
        for (k, c) in cap.iter().enumerate() {
            assert!(
                *c >= ds.io.x0[k],
                "sector {k} bound below x0 with inventories at target"
            );
        }
    }

    #[test]
    fn rationing_is_proportional_and_consistent() {
        // d = 100, x = 80: every customer class scaled by 0.8.
        let orders_desired = Mat::from_vec(1, 1, vec![70.0]);
        let r = produce_and_ration(&orders_desired, &[10.0], &[20.0], &[80.0], &[f64::INFINITY]);
        assert_eq!(r.d[0], 100.0);
        assert_eq!(r.x[0], 80.0);
        assert!((r.c[0] - 8.0).abs() < 1e-12);
        assert!((r.f[0] - 16.0).abs() < 1e-12);
        assert!((r.orders.get(0, 0) - 56.0).abs() < 1e-12);
        // Realized deliveries add up to realized output exactly.
        assert!((r.orders.row_sum(0) + r.c[0] + r.f[0] - r.x[0]).abs() < 1e-12);
        // Ample capacity: demands met exactly.
        let r = produce_and_ration(&orders_desired, &[10.0], &[20.0], &[1e6], &[f64::INFINITY]);
        assert_eq!(r.x[0], 100.0);
        assert_eq!(r.c[0], 10.0);
        // Zero demand: no division error.
        let r = produce_and_ration(&Mat::zeros(1, 1), &[0.0], &[0.0], &[50.0], &[f64::INFINITY]);
        assert_eq!(r.x[0], 0.0);
        assert_eq!(r.c[0], 0.0);
    }

    #[test]
    fn inventory_update_rules() {
        let inv = Mat::from_vec(1, 1, vec![10.0]);
        let orders = Mat::from_vec(1, 1, vec![3.0]);
        let tech = Mat::from_vec(1, 1, vec![0.05]);
        // S + O - A x = 10 + 3 - 5 = 8.
        let next = update_inventories(&inv, &orders, &tech, &[100.0]);
        assert!((next.get(0, 0) - 8.0).abs() < 1e-12);
        // Draws beyond stock clamp at zero.
        let next = update_inventories(&inv, &orders, &tech, &[1.0e6]);
        assert_eq!(next.get(0, 0), 0.0);
    }

    #[test]
    fn labor_adjustment_directions() {
        // Equilibrium: no change.
        let l = adjust_labor(
            &[50.0],
            &[50.0],
            &[100.0],
            &[f64::INFINITY],
            &[100.0],
            &[100.0],
            7.0,
            6.1,
            &[50.0],
        );
        assert_eq!(l[0], 50.0);
        // Demand shortfall: fire at 1/iota_F of the gap.
        // l0/x0 = 0.5, min(x_inp, d) = 90, x_cap = 100 -> delta = -5.
        let l = adjust_labor(
            &[50.0],
            &[50.0],
            &[100.0],
            &[f64::INFINITY],
            &[90.0],
            &[100.0],
            7.0,
            6.1,
            &[50.0],
        );
        assert!((l[0] - (50.0 - 5.0 / 6.1)).abs() < 1e-12);
        // Hiring clamped at l_max when the labor shock binds.
        let l = adjust_labor(
            &[40.0],
            &[50.0],
            &[100.0],
            &[f64::INFINITY],
            &[1000.0],
            &[80.0],
            0.1,
            6.1,
            &[42.0],
        );
        assert_eq!(l[0], 42.0);
    }

    #[test]
    fn equilibrium_is_a_fixed_point() {
        let (params, state) = fixture_params();
        let shocks = ShockSet::none(params.n_sectors());
        let mut current = state.clone();
        for _ in 0..365 {
            current = step_econ_day(&current, &params, &shocks);
        }
        for k in 0..params.n_sectors() {
            assert!((current.x[k] - state.x[k]).abs() / state.x[k] < 1e-12);
            assert!((current.l[k] - state.l[k]).abs() / state.l[k] < 1e-12);
            assert!((current.d[k] - state.d[k]).abs() / state.d[k] < 1e-12);
        }
        let mut inv_diff = current.inventory.clone();
        inv_diff.add_scaled(&state.inventory, -1.0);
        assert!(inv_diff.max_abs() < 1e-9 * state.inventory.max_abs());
    }

    #[test]
    fn full_labor_shock_stops_output_and_fires() {
        let (params, state) = fixture_params();
        let n = params.n_sectors();
        let mut shocks = ShockSet::none(n);
        shocks.kappa_s = vec![1.0; n];
        let next = step_econ_day(&state, &params, &shocks);
        // l_max = 0, so labor is clamped to zero immediately; production this
        // day already happened with yesterday's labor.
        for k in 0..n {
            assert_eq!(next.l[k], 0.0);
        }
        let after = step_econ_day(&next, &params, &shocks);
        for k in 0..n {
            assert_eq!(after.x[k], 0.0, "no labor leaves no output");
        }
    }

    #[test]
    fn shock_monotonicity_in_labor() {
        let (params, state) = fixture_params();
        let n = params.n_sectors();
        let mut mild = ShockSet::none(n);
        mild.kappa_s[1] = 0.2;
        let mut severe = ShockSet::none(n);
        severe.kappa_s[1] = 0.6;
        // Two days so the labor clamp propagates into capacity.
        let a = step_econ_day(&step_econ_day(&state, &params, &mild), &params, &mild);
        let b = step_econ_day(&step_econ_day(&state, &params, &severe), &params, &severe);
        assert!(b.x[1] <= a.x[1] + 1e-12);
    }

    #[test]
    fn ten_day_demand_shock_matches_hand_stepped_oracle() {
        // 3-sector fixture, sustained household shock on sector 0; compare
        // against an independently coded spreadsheet-style recursion.
        let ds = testkit::small_dataset(1, 3);
        let params = EconParams::from_dataset(&ds, 7.0, 6.1);
        let n = 3;
        let mut shocks = ShockSet::none(n);
        shocks.kappa_d = vec![0.5, 0.0, 0.0];

        let mut state = EconState::equilibrium(&ds.io);
        let mut oracle_d = params.x0.clone();
        let mut oracle_l = params.l0.clone();
        let mut oracle_inv = params.target_inventory.clone();
        for _day in 0..10 {
            state = step_econ_day(&state, &params, &shocks);

            // Oracle recursion, written out independently.
            let c_d = household_demand(
                &shocks.kappa_d,
                &params.theta0,
                params.delta_s,
                params.c_total0,
            );
            let f_d = params.f0.clone();
            let mut o_d = vec![vec![0.0; n]; n];
            for k in 0..n {
                for l in 0..n {
                    let v = params.tech.get(k, l) * oracle_d[l]
                        + (params.target_inventory.get(k, l) - oracle_inv.get(k, l)) / params.tau;
                    o_d[k][l] = v.max(0.0);
                }
            }
            let mut d_new = vec![0.0; n];
            for k in 0..n {
                d_new[k] = o_d[k].iter().sum::<f64>() + c_d[k] + f_d[k];
            }
            let x_cap: Vec<f64> = (0..n)
                .map(|k| oracle_l[k] / params.l0[k] * params.x0[k])
                .collect();
            let x_inp = input_capacity(&oracle_inv, &params.tech, &params.criticality, &params.x0);
            let x: Vec<f64> = (0..n)
                .map(|k| x_cap[k].min(x_inp[k]).min(d_new[k]))
                .collect();
            let mut o_real = vec![vec![0.0; n]; n];
            for k in 0..n {
                let ratio = if d_new[k] != 0.0 {
                    x[k] / d_new[k]
                } else {
                    1.0
                };
                for l in 0..n {
                    o_real[k][l] = o_d[k][l] * ratio;
                }
            }
            let mut inv_new = Mat::zeros(n, n);
            for k in 0..n {
                for l in 0..n {
                    let v = oracle_inv.get(k, l) + o_real[k][l] - params.tech.get(k, l) * x[l];
                    inv_new.set(k, l, v.max(0.0));
                }
            }
            for k in 0..n {
                let delta = params.l0[k] / params.x0[k] * (x_inp[k].min(d_new[k]) - x_cap[k]);
                let speed = if delta >= 0.0 {
                    params.iota_h
                } else {
                    params.iota_f
                };
                oracle_l[k] = (oracle_l[k] + delta / speed).clamp(0.0, params.l0[k]);
            }
            oracle_inv = inv_new;
            oracle_d = d_new;

            for k in 0..n {
                assert!(
                    (state.d[k] - oracle_d[k]).abs() / oracle_d[k].abs().max(1.0) < 1e-9,
                    "demand diverged from the oracle"
                );
                assert!(
                    (state.l[k] - oracle_l[k]).abs() / oracle_l[k].abs().max(1.0) < 1e-9,
                    "labor diverged from the oracle"
                );
            }
        }
        // The shocked sector's labor declines toward the demand-consistent level.
        assert!(state.l[0] < params.l0[0]);
    }
}
