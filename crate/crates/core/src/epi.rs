//! Spatial, age-stratified SEIQRD transmission model.
//!
//! Contact matrices are composed daily from prepandemic layers under policy
//! and behavioral scaling; the force of infection mixes local contacts with
//! commuter-coupled workplace contacts; integration is classical RK4 with a
//! fixed quarter-day substep and contacts held constant within the day.

use crate::datahub::{CountryDataset, ACTIVE_BINS, N_AGE};
use crate::error::{Error, Result};
use crate::math::{spectral_radius, Mat};
use crate::memory::BehaviorSignal;

/// Days per month used to convert the seroreversion time scale.
pub const DAYS_PER_MONTH: f64 = 30.44;

/// RK4 substep in days.
pub const RK4_SUBSTEP: f64 = 0.25;

/// Tolerated total clipped mass per integrated day, as a fraction of the
/// population.
pub const CLIP_TOLERANCE: f64 = 1e-9;

/// Age-dependent fraction of infections remaining asymptomatic.
pub const ASYMPTOMATIC_FRACTION: [f64; N_AGE] = [
    0.82, 0.82, 0.82, 0.82, 0.78, 0.78, 0.78, 0.78, 0.70, 0.70, 0.70, 0.70, 0.65, 0.65, 0.65, 0.65,
    0.178,
];

/// Age-dependent fraction of mild cases requiring hospitalization.
pub const HOSPITALIZATION_RATIO: [f64; N_AGE] = [
    0.010, 0.010, 0.010, 0.012, 0.015, 0.025, 0.025, 0.030, 0.030, 0.060, 0.060, 0.120, 0.120,
    0.450, 0.450, 0.950, 0.970,
];

/// Age-dependent mortality of hospitalized patients.
pub const HOSPITAL_FATALITY_RATIO: [f64; N_AGE] = [
    0.000, 0.000, 0.012, 0.012, 0.015, 0.015, 0.027, 0.027, 0.041, 0.041, 0.080, 0.080, 0.164,
    0.164, 0.266, 0.266, 0.404,
];

/// Age-dependent relative susceptibility to infection.
pub const SUSCEPTIBILITY: [f64; N_AGE] = [
    0.56, 0.56, 0.82, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0,
];

/// Disease progression and transmission parameters.
#[derive(Debug, Clone)]
pub struct EpiParams {
    /// Latent period (days).
    pub alpha: f64,
    /// Presymptomatic infectious period (days).
    pub gamma: f64,
    /// Asymptomatic/mild infectious period (days).
    pub delta: f64,
    /// Hospital stay (days).
    pub epsilon: f64,
    /// Seroreversion time (days).
    pub zeta: f64,
    /// Per-contact transmission rate.
    pub beta: f64,
    /// Seasonal amplitude of the transmission rate.
    pub seasonal_amplitude: f64,
    /// Seasonal shift (days relative to January 1st).
    pub seasonal_shift: f64,
    pub asymptomatic: [f64; N_AGE],
    pub hospitalization: [f64; N_AGE],
    pub mortality: [f64; N_AGE],
    pub susceptibility: [f64; N_AGE],
    /// Work-mixing susceptible convention: false evaluates the destination
    /// patch's susceptibles (as the transmission term is written), true uses
    /// the commuters' resident patch instead.
    pub work_mixing_resident_susceptibles: bool,
}

impl EpiParams {
    pub fn baseline(beta: f64) -> Self {
        EpiParams {
            alpha: 4.5,
            gamma: 0.7,
            delta: 7.0,
            epsilon: 11.4,
            zeta: 9.2 * DAYS_PER_MONTH,
            beta,
            seasonal_amplitude: 0.0,
            seasonal_shift: 0.0,
            asymptomatic: ASYMPTOMATIC_FRACTION,
            hospitalization: HOSPITALIZATION_RATIO,
            mortality: HOSPITAL_FATALITY_RATIO,
            susceptibility: SUSCEPTIBILITY,
            work_mixing_resident_susceptibles: false,
        }
    }
}

/// The eight disease compartments, each 17 ages x G patches.
#[derive(Debug, Clone, PartialEq)]
pub struct EpiState {
    pub s: Mat,
    pub e: Mat,
    pub i_presy: Mat,
    pub i_asy: Mat,
    pub i_mild: Mat,
    pub q_hosp: Mat,
    pub r: Mat,
    pub d: Mat,
}

impl EpiState {
    pub fn zeros(n_patches: usize) -> Self {
        let z = || Mat::zeros(N_AGE, n_patches);
        EpiState {
            s: z(),
            e: z(),
            i_presy: z(),
            i_asy: z(),
            i_mild: z(),
            q_hosp: z(),
            r: z(),
            d: z(),
        }
    }

    /// Whole population susceptible (disease-free state).
    pub fn disease_free(population: &Mat) -> Self {
        let mut st = EpiState::zeros(population.cols());
        st.s = population.clone();
        st
    }

    pub fn n_patches(&self) -> usize {
        self.s.cols()
    }

    pub fn compartments(&self) -> [&Mat; 8] {
        [
            &self.s,
            &self.e,
            &self.i_presy,
            &self.i_asy,
            &self.i_mild,
            &self.q_hosp,
            &self.r,
            &self.d,
        ]
    }

    fn compartments_mut(&mut self) -> [&mut Mat; 8] {
        [
            &mut self.s,
            &mut self.e,
            &mut self.i_presy,
            &mut self.i_asy,
            &mut self.i_mild,
            &mut self.q_hosp,
            &mut self.r,
            &mut self.d,
        ]
    }

    /// Total persons per (age, patch), all compartments.
    pub fn total(&self, i: usize, g: usize) -> f64 {
        self.compartments().iter().map(|c| c.get(i, g)).sum()
    }

    /// Hospital load per patch, summed over ages.
    pub fn hospital_load_per_patch(&self) -> Vec<f64> {
        (0..self.n_patches())
            .map(|g| self.q_hosp.col_sum(g))
            .collect()
    }

    /// self += factor * other, per compartment.
    pub fn add_scaled(&mut self, other: &EpiState, factor: f64) {
        let mine = self.compartments_mut();
        let theirs = other.compartments();
        for (m, t) in mine.into_iter().zip(theirs) {
            m.add_scaled(t, factor);
        }
    }

    fn has_nan(&self) -> bool {
        self.compartments()
            .iter()
            .any(|c| c.data().iter().any(|v| v.is_nan()))
    }
}

/// Government policy levers, all on a 0..1 scale where 1 is the strictest.
#[derive(Debug, Clone)]
pub struct PolicyInputs {
    /// closure[(g, k)] = degree to which sector k is prohibited in patch g.
    pub closure: Mat,
    /// telework[(g, k)] = degree to which telework is mandated.
    pub telework: Mat,
    /// Degree to which private leisure contacts are prohibited, per patch.
    pub private_ban: Vec<f64>,
    /// Degree to which schools are closed, per patch.
    pub school_closure: Vec<f64>,
}

impl PolicyInputs {
    pub fn none(n_patches: usize, n_sectors: usize) -> Self {
        PolicyInputs {
            closure: Mat::zeros(n_patches, n_sectors),
            telework: Mat::zeros(n_patches, n_sectors),
            private_ban: vec![0.0; n_patches],
            school_closure: vec![0.0; n_patches],
        }
    }
}

/// Mild-prevalence summaries feeding the contact composition and the
/// economic shocks.
#[derive(Debug, Clone)]
pub struct SymptomaticSummaries {
    /// Fraction of the total population with mild symptoms, per patch.
    pub i_mild: Vec<f64>,
    /// Fraction of the active population (16-65) with mild symptoms.
    pub i_mild_active: Vec<f64>,
    /// Fraction of the active and employed population with mild symptoms.
    pub i_mild_active_employed: Vec<f64>,
}

impl SymptomaticSummaries {
    pub fn zeros(n_patches: usize) -> Self {
        SymptomaticSummaries {
            i_mild: vec![0.0; n_patches],
            i_mild_active: vec![0.0; n_patches],
            i_mild_active_employed: vec![0.0; n_patches],
        }
    }
}

/// Population-weighted mild-symptom prevalences.
pub fn symptomatic_summaries(state: &EpiState, ds: &CountryDataset) -> SymptomaticSummaries {
    let g = state.n_patches();
    let mut out = SymptomaticSummaries::zeros(g);
    for gg in 0..g {
        let mut mild = 0.0;
        let mut pop = 0.0;
        let mut mild_active = 0.0;
        let mut pop_active = 0.0;
        for i in 0..N_AGE {
            let m = state.i_mild.get(i, gg);
            let t = ds.geo.population.get(i, gg);
            mild += m;
            pop += t;
            if ACTIVE_BINS.contains(&i) {
                mild_active += m;
                pop_active += t;
            }
        }
        out.i_mild[gg] = mild / pop;
        out.i_mild_active[gg] = mild_active / pop_active;
        out.i_mild_active_employed[gg] = out.i_mild_active[gg] * ds.mobility.normalized.row_sum(gg);
    }
    out
}

/// Seasonally forced transmission rate; `t` in days since January 1st.
pub fn seasonal_beta(beta: f64, amplitude: f64, shift: f64, t: f64) -> f64 {
    beta * (1.0 + amplitude * (2.0 * std::f64::consts::PI * (t - shift) / 365.0).cos())
}

/// Remaining fraction of work contacts for sector k in patch g: the minimum
/// of mandated closure, mandated telework, voluntary reduction, sickness,
/// and unemployment.
#[allow(clippy::too_many_arguments)]
pub fn remaining_work_fraction(
    k: usize,
    g: usize,
    policy: &PolicyInputs,
    behavior: &BehaviorSignal,
    i_mild_active: f64,
    labor_ratio: f64,
    f_workplace: &[f64],
    f_telework: &[f64],
) -> f64 {
    let closure = policy.closure.get(g, k);
    let a_bar = f_workplace[k] + (1.0 - closure) * (1.0 - f_workplace[k]);
    let e_bar = 1.0 - policy.telework.get(g, k) * f_telework[k];
    a_bar
        .min(e_bar)
        .min(behavior.m_work.get(g, k))
        .min(1.0 - i_mild_active)
        .min(labor_ratio)
}

/// Remaining fraction of public leisure contacts in patch g: closures are
/// weighted by each sector's association with leisure contacts.
pub fn remaining_public_leisure(
    g: usize,
    policy: &PolicyInputs,
    behavior: &BehaviorSignal,
    i_mild: f64,
    lav_contacts: &[f64],
) -> Result<f64> {
    let total: f64 = lav_contacts.iter().sum();
    if total <= 0.0 {
        return Err(Error::Simulation(
            "all leisure-association weights are zero".to_string(),
        ));
    }
    let open: f64 = lav_contacts
        .iter()
        .enumerate()
        .map(|(k, lav)| (1.0 - policy.closure.get(g, k)) * lav / total)
        .sum();
    Ok(open.min(behavior.m_leisure[g]).min(1.0 - i_mild))
}

/// Remaining fraction of private leisure contacts in patch g.
pub fn remaining_private_leisure(
    g: usize,
    policy: &PolicyInputs,
    behavior: &BehaviorSignal,
    i_mild: f64,
) -> f64 {
    (1.0 - policy.private_ban[g])
        .min(behavior.m_leisure[g])
        .min(1.0 - i_mild)
}

/// Per-patch composed contact matrices.
#[derive(Debug, Clone)]
pub struct ComposedContacts {
    /// Full contact matrix per patch.
    pub total: Vec<Mat>,
    /// Workplace component alone (commuter-mixed in the force of infection).
    pub work: Vec<Mat>,
}

/// Compose the pandemic contact matrices for every patch as a linear
/// combination of the prepandemic layers. `school_term` is 1 during school
/// terms and 0 during holidays; `labor_ratio[k] = l_k(t)/l_k(0)`.
pub fn compose_contacts(
    policy: &PolicyInputs,
    behavior: &BehaviorSignal,
    summaries: &SymptomaticSummaries,
    labor_ratio: &[f64],
    school_term: f64,
    ds: &CountryDataset,
) -> Result<ComposedContacts> {
    let g = ds.n_patches();
    let k = ds.n_sectors();
    let mut total = Vec::with_capacity(g);
    let mut work = Vec::with_capacity(g);
    for gg in 0..g {
        let m_eff = behavior.m_eff[gg];
        let mut n = ds.contacts.home.clone();
        let school = school_term * (1.0 - policy.school_closure[gg]) * m_eff;
        n.add_scaled(&ds.contacts.school, school);

        let mut n_work = Mat::zeros(N_AGE, N_AGE);
        for kk in 0..k {
            let b = remaining_work_fraction(
                kk,
                gg,
                policy,
                behavior,
                summaries.i_mild_active[gg],
                labor_ratio[kk],
                &ds.sectors.f_workplace,
                &ds.sectors.f_telework,
            );
            let weight = ds.sectors.lmc.get(gg, kk) * b * m_eff;
            if weight != 0.0 {
                n_work.add_scaled(&ds.contacts.work[kk], weight);
            }
        }
        n.add_scaled(&n_work, 1.0);

        let c = remaining_public_leisure(
            gg,
            policy,
            behavior,
            summaries.i_mild[gg],
            &ds.sectors.lav_contacts,
        )?;
        n.add_scaled(&ds.contacts.leisure_public, c * m_eff);
        let d = remaining_private_leisure(gg, policy, behavior, summaries.i_mild[gg]);
        n.add_scaled(&ds.contacts.leisure_private, d * m_eff);

        total.push(n);
        work.push(n_work);
    }
    Ok(ComposedContacts { total, work })
}

/// Force of infection, returned as a new-infection rate (persons/day) per
/// (age, patch). Local mixing uses the non-workplace contacts and local
/// prevalence; workplace mixing couples patches through the commuter matrix
/// using destination-patch prevalence.
pub fn force_of_infection(
    state: &EpiState,
    contacts: &ComposedContacts,
    p_bar: &Mat,
    beta_bar: f64,
    params: &EpiParams,
    population: &Mat,
) -> Result<Mat> {
    let g = state.n_patches();
    let mut lambda = Mat::zeros(N_AGE, g);

    // u_j^h = S_j^h * prevalence_j^h; v_j^h = prevalence_j^h.
    let mut u = Mat::zeros(N_AGE, g);
    let mut v = Mat::zeros(N_AGE, g);
    for h in 0..g {
        for j in 0..N_AGE {
            let t = population.get(j, h);
            if t <= 0.0 {
                return Err(Error::Simulation(format!(
                    "zero population in age bin {j}, patch index {h}"
                )));
            }
            let prev =
                (state.i_presy.get(j, h) + state.i_asy.get(j, h) + state.i_mild.get(j, h)) / t;
            v.set(j, h, prev);
            u.set(j, h, state.s.get(j, h) * prev);
        }
    }

    // Workplace pressure per destination patch h: w_i^h = sum_j Nw_ij^h u_j^h.
    let mut work_pressure = Mat::zeros(N_AGE, g);
    if !params.work_mixing_resident_susceptibles {
        for h in 0..g {
            let nw = &contacts.work[h];
            for i in 0..N_AGE {
                let mut acc = 0.0;
                for j in 0..N_AGE {
                    acc += nw.get(i, j) * u.get(j, h);
                }
                work_pressure.set(i, h, acc);
            }
        }
    }

    for gg in 0..g {
        let n = &contacts.total[gg];
        let nw = &contacts.work[gg];
        for i in 0..N_AGE {
            let mut local = 0.0;
            for j in 0..N_AGE {
                local += (n.get(i, j) - nw.get(i, j)) * u.get(j, gg);
            }
            let mut commuting = 0.0;
            if params.work_mixing_resident_susceptibles {
                // Sensitivity variant: susceptibles of the resident patch.
                for h in 0..g {
                    let p = p_bar.get(gg, h);
                    if p == 0.0 {
                        continue;
                    }
                    let nw_h = &contacts.work[h];
                    for j in 0..N_AGE {
                        commuting += p * nw_h.get(i, j) * state.s.get(j, gg) * v.get(j, h);
                    }
                }
            } else {
                for h in 0..g {
                    commuting += p_bar.get(gg, h) * work_pressure.get(i, h);
                }
            }
            lambda.set(
                i,
                gg,
                params.susceptibility[i] * beta_bar * (local + commuting),
            );
        }
    }
    Ok(lambda)
}

/// Compartment flows of the transmission model.
pub fn epi_derivatives(state: &EpiState, lambda: &Mat, params: &EpiParams) -> EpiState {
    let g = state.n_patches();
    let mut d = EpiState::zeros(g);
    let inv_alpha = 1.0 / params.alpha;
    let inv_gamma = 1.0 / params.gamma;
    let inv_delta = 1.0 / params.delta;
    let inv_eps = 1.0 / params.epsilon;
    let inv_zeta = 1.0 / params.zeta;
    for gg in 0..g {
        for i in 0..N_AGE {
            let lam = lambda.get(i, gg);
            let e = state.e.get(i, gg);
            let presy = state.i_presy.get(i, gg);
            let asy = state.i_asy.get(i, gg);
            let mild = state.i_mild.get(i, gg);
            let q = state.q_hosp.get(i, gg);
            let r = state.r.get(i, gg);
            let a = params.asymptomatic[i];
            let h = params.hospitalization[i];
            let m = params.mortality[i];

            d.s.set(i, gg, inv_zeta * r - lam);
            d.e.set(i, gg, lam - inv_alpha * e);
            d.i_presy.set(i, gg, inv_alpha * e - inv_gamma * presy);
            d.i_asy.set(i, gg, a * inv_gamma * presy - inv_delta * asy);
            d.i_mild
                .set(i, gg, (1.0 - a) * inv_gamma * presy - inv_delta * mild);
            d.q_hosp.set(i, gg, h * inv_delta * mild - inv_eps * q);
            d.r.set(
                i,
                gg,
                inv_delta * asy + (1.0 - h) * inv_delta * mild + (1.0 - m) * inv_eps * q
                    - inv_zeta * r,
            );
            d.d.set(i, gg, m * inv_eps * q);
        }
    }
    d
}

/// Per-day flow accumulators produced alongside the integrated state.
#[derive(Debug, Clone)]
pub struct DayFlows {
    /// New hospital admissions per patch over the day.
    pub admissions: Vec<f64>,
    /// Hospital discharges + deaths per patch over the day.
    pub hospital_outflow: Vec<f64>,
}

/// Advance the epidemic by one day with fixed contacts (daily operator
/// splitting): classical RK4 with substep `RK4_SUBSTEP`. Negative values are
/// clipped to zero; the total clipped mass must stay below `CLIP_TOLERANCE`
/// of the population.
pub fn integrate_day(
    state: &EpiState,
    params: &EpiParams,
    contacts: &ComposedContacts,
    p_bar: &Mat,
    population: &Mat,
    day_of_year: f64,
) -> Result<(EpiState, DayFlows)> {
    let g = state.n_patches();
    let beta_bar = seasonal_beta(
        params.beta,
        params.seasonal_amplitude,
        params.seasonal_shift,
        day_of_year,
    );
    let total_pop: f64 = population.data().iter().sum();
    let mut current = state.clone();
    let mut admissions = vec![0.0; g];
    let mut outflow = vec![0.0; g];
    let mut clipped = 0.0;

    let substeps = (1.0 / RK4_SUBSTEP).round() as usize;
    let h = RK4_SUBSTEP;
    for _ in 0..substeps {
        let deriv = |st: &EpiState| -> Result<EpiState> {
            let lambda = force_of_infection(st, contacts, p_bar, beta_bar, params, population)?;
            Ok(epi_derivatives(st, &lambda, params))
        };

        let k1 = deriv(&current)?;
        let mut y2 = current.clone();
        y2.add_scaled(&k1, h / 2.0);
        let k2 = deriv(&y2)?;
        let mut y3 = current.clone();
        y3.add_scaled(&k2, h / 2.0);
        let k3 = deriv(&y3)?;
        let mut y4 = current.clone();
        y4.add_scaled(&k3, h);
        let k4 = deriv(&y4)?;

        // Admission and hospital-outflow rates are linear in the state, so
        // the same RK4 stage weights integrate them exactly alongside.
        let flow_rates = |st: &EpiState, adm: &mut [f64], out: &mut [f64]| {
            for gg in 0..g {
                let mut a_acc = 0.0;
                let mut o_acc = 0.0;
                for i in 0..N_AGE {
                    a_acc += params.hospitalization[i] / params.delta * st.i_mild.get(i, gg);
                    o_acc += st.q_hosp.get(i, gg) / params.epsilon;
                }
                adm[gg] += a_acc;
                out[gg] += o_acc;
            }
        };
        let mut adm_stage = vec![0.0; g];
        let mut out_stage = vec![0.0; g];
        {
            let mut a1 = vec![0.0; g];
            let mut o1 = vec![0.0; g];
            flow_rates(&current, &mut a1, &mut o1);
            let mut a2 = vec![0.0; g];
            let mut o2 = vec![0.0; g];
            flow_rates(&y2, &mut a2, &mut o2);
            let mut a3 = vec![0.0; g];
            let mut o3 = vec![0.0; g];
            flow_rates(&y3, &mut a3, &mut o3);
            let mut a4 = vec![0.0; g];
            let mut o4 = vec![0.0; g];
            flow_rates(&y4, &mut a4, &mut o4);
            for gg in 0..g {
                adm_stage[gg] = (a1[gg] + 2.0 * a2[gg] + 2.0 * a3[gg] + a4[gg]) / 6.0;
                out_stage[gg] = (o1[gg] + 2.0 * o2[gg] + 2.0 * o3[gg] + o4[gg]) / 6.0;
            }
        }
        for gg in 0..g {
            admissions[gg] += h * adm_stage[gg];
            outflow[gg] += h * out_stage[gg];
        }

        current.add_scaled(&k1, h / 6.0);
        current.add_scaled(&k2, h / 3.0);
        current.add_scaled(&k3, h / 3.0);
        current.add_scaled(&k4, h / 6.0);

        if current.has_nan() {
            return Err(Error::Simulation(
                "transmission step produced NaN".to_string(),
            ));
        }
        for comp in current.compartments_mut() {
            for v in comp.data_mut() {
                if *v < 0.0 {
                    clipped += -*v;
                    *v = 0.0;
                }
            }
        }
    }

    if clipped > CLIP_TOLERANCE * total_pop {
        return Err(Error::Simulation(format!(
            "clipped mass {clipped:.3e} exceeds tolerance ({:.3e})",
            CLIP_TOLERANCE * total_pop
        )));
    }
    Ok((
        current,
        DayFlows {
            admissions,
            hospital_outflow: outflow,
        },
    ))
}

/// Basic reproduction number from the next-generation matrix over
/// (age x patch), evaluated at the disease-free state with the same
/// local/workplace mixing structure as the force of infection.
pub fn next_generation_r0(
    params: &EpiParams,
    contacts: &ComposedContacts,
    p_bar: &Mat,
    ds: &CountryDataset,
) -> Result<f64> {
    let g = ds.n_patches();
    let n = N_AGE * g;
    // Expected infectious person-days per newly exposed individual: the
    // presymptomatic stage plus either infectious branch of equal length.
    let infectious_days = params.gamma + params.delta;
    let mut ngm = Mat::zeros(n, n);
    for gg in 0..g {
        let ntot = &contacts.total[gg];
        let nw = &contacts.work[gg];
        for i in 0..N_AGE {
            let row = gg * N_AGE + i;
            let factor = params.susceptibility[i] * params.beta * infectious_days;
            for j in 0..N_AGE {
                // Local (non-workplace) mixing: infector in the same patch.
                ngm.add_at(
                    row,
                    gg * N_AGE + j,
                    factor * (ntot.get(i, j) - nw.get(i, j)),
                );
            }
            for h in 0..g {
                let p = p_bar.get(gg, h);
                if p == 0.0 {
                    continue;
                }
                let nw_h = &contacts.work[h];
                for j in 0..N_AGE {
                    ngm.add_at(row, h * N_AGE + j, factor * p * nw_h.get(i, j));
                }
            }
        }
    }
    // The iteration tolerance sits well below the 1e-10 relative accuracy the
    // R0 machinery is held to, so two-point linearity checks are not limited
    // by the eigensolve.
    spectral_radius(&ngm, 1e-13, 10_000)
        .ok_or_else(|| Error::Simulation("next-generation power iteration did not converge".into()))
}

/// Prepandemic contact composition (no policy, neutral behavior, no
/// sickness, full employment, schools in term).
pub fn prepandemic_contacts(ds: &CountryDataset) -> ComposedContacts {
    let g = ds.n_patches();
    let k = ds.n_sectors();
    let policy = PolicyInputs::none(g, k);
    let behavior = BehaviorSignal::neutral(g, k);
    let summaries = SymptomaticSummaries::zeros(g);
    compose_contacts(&policy, &behavior, &summaries, &vec![1.0; k], 1.0, ds)
        .expect("prepandemic composition cannot fail")
}

/// Solve for the transmission rate that attains a target R0 by bisection,
/// using the exact linearity of the next-generation matrix in beta for the
/// initial bracket.
pub fn calibrate_beta(
    target_r0: f64,
    params: &EpiParams,
    contacts: &ComposedContacts,
    p_bar: &Mat,
    ds: &CountryDataset,
) -> Result<f64> {
    assert!(target_r0 >= 0.0);
    if target_r0 == 0.0 {
        return Ok(0.0);
    }
    let mut probe = params.clone();
    probe.beta = 1.0;
    let r0_unit = next_generation_r0(&probe, contacts, p_bar, ds)?;
    if r0_unit <= 0.0 {
        return Err(Error::Simulation(
            "cannot bracket beta: R0 vanishes at beta = 1".to_string(),
        ));
    }
    let guess = target_r0 / r0_unit;
    let (mut lo, mut hi) = (0.5 * guess, 2.0 * guess);
    let eval = |beta: f64| -> Result<f64> {
        let mut p = params.clone();
        p.beta = beta;
        next_generation_r0(&p, contacts, p_bar, ds)
    };
    if eval(lo)? > target_r0 || eval(hi)? < target_r0 {
        return Err(Error::Simulation("beta bracket failure".to_string()));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let r0 = eval(mid)?;
        if (r0 - target_r0).abs() <= 1e-6 {
            return Ok(mid);
        }
        if r0 < target_r0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Simulation(
        "beta bisection did not converge".to_string(),
    ))
}

/// Distribute exposed seeds over the age groups of a patch proportionally to
/// each age group's total prepandemic contacts, moving mass from S to E.
pub fn seed_epidemic(
    state: &mut EpiState,
    seeds: &[(usize, f64)],
    contacts: &ComposedContacts,
) -> Result<()> {
    for &(g, count) in seeds {
        if count == 0.0 {
            continue;
        }
        let weights: Vec<f64> = (0..N_AGE).map(|i| contacts.total[g].row_sum(i)).collect();
        let total: f64 = weights.iter().sum();
        for i in 0..N_AGE {
            let share = if total > 0.0 {
                count * weights[i] / total
            } else {
                count / N_AGE as f64
            };
            if share > state.s.get(i, g) {
                return Err(Error::Simulation(format!(
                    "seed of {count} exceeds susceptible population in patch index {g}"
                )));
            }
            state.s.add_at(i, g, -share);
            state.e.add_at(i, g, share);
        }
    }
    Ok(())
}
