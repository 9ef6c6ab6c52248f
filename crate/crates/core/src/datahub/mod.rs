//! Ingestion and validation of static country data.
//!
//! A [`CountryDataset`] bundles demography, commuter mobility, social contact
//! matrices, the sector catalog, and input-output tables for one country. It
//! is immutable after construction; simulations share it freely. All derived
//! quantities (normalized mobility, technical coefficients, target
//! inventories, sector willingness) are computed once at load time.

mod io;

pub use io::{load_country_dataset, save_country_dataset};

use crate::error::{Error, Result};
use crate::math::Mat;

/// Number of five-year age bins (0-5 .. 75-80, 80+).
pub const N_AGE: usize = 17;

/// Age-bin indices counted as the active population (16-65 years), i.e.
/// bins 15-20 through 60-65.
pub const ACTIVE_BINS: std::ops::RangeInclusive<usize> = 3..=12;

/// Relative tolerance for the input-output accounting identity
/// `x0_k = sum_l Z_kl + c0_k + f0_k` (source-data rounding).
pub const IO_ACCOUNTING_TOL: f64 = 0.01;

/// Relative tolerance for demographic reciprocity of home/leisure contact
/// matrices.
pub const CONTACT_RECIPROCITY_TOL: f64 = 0.05;

/// Demography and geography of a country's spatial patches.
#[derive(Debug, Clone)]
pub struct GeoFrame {
    pub patch_ids: Vec<String>,
    pub names: Vec<String>,
    /// Persons per (age bin, patch); 17 x G.
    pub population: Mat,
    /// Persons aged 16-65 per patch.
    pub active_population: Vec<f64>,
    /// km^2 per patch.
    pub area: Vec<f64>,
}

impl GeoFrame {
    pub fn n_patches(&self) -> usize {
        self.patch_ids.len()
    }

    /// Total population of patch `g`.
    pub fn patch_population(&self, g: usize) -> f64 {
        (0..N_AGE).map(|i| self.population.get(i, g)).sum()
    }

    pub fn total_population(&self) -> f64 {
        (0..self.n_patches())
            .map(|g| self.patch_population(g))
            .sum()
    }

    /// National population per age bin.
    pub fn national_age_population(&self) -> Vec<f64> {
        (0..N_AGE)
            .map(|i| {
                (0..self.n_patches())
                    .map(|g| self.population.get(i, g))
                    .sum()
            })
            .collect()
    }
}

/// Raw and normalized commuter flows between patches.
#[derive(Debug, Clone)]
pub struct MobilityMatrix {
    /// Commuters per day, origin x destination.
    pub raw: Mat,
    /// Fraction of the origin patch's active population commuting to each
    /// destination; rows sum to the employed fraction of the active
    /// population.
    pub normalized: Mat,
}

/// Prepandemic social contact matrices (contacts/person/day).
#[derive(Debug, Clone)]
pub struct ContactMatrixSet {
    pub home: Mat,
    pub school: Mat,
    pub leisure_public: Mat,
    pub leisure_private: Mat,
    /// One 17x17 matrix per sector.
    pub work: Vec<Mat>,
}

/// Input criticality levels used by the partially-binding Leontief
/// production function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criticality {
    NonCritical,
    Important,
    Critical,
}

impl Criticality {
    pub fn from_level(level: f64) -> Option<Self> {
        if level == 0.0 {
            Some(Criticality::NonCritical)
        } else if level == 0.5 {
            Some(Criticality::Important)
        } else if level == 1.0 {
            Some(Criticality::Critical)
        } else {
            None
        }
    }

    pub fn level(&self) -> f64 {
        match self {
            Criticality::NonCritical => 0.0,
            Criticality::Important => 0.5,
            Criticality::Critical => 1.0,
        }
    }
}

/// Per-sector metadata and the patch-level labor market composition.
#[derive(Debug, Clone)]
pub struct SectorCatalog {
    pub codes: Vec<String>,
    /// Fraction of employees at the workplace during the reference lockdown.
    pub f_workplace: Vec<f64>,
    /// Fraction of employees working from home during the reference lockdown.
    pub f_telework: Vec<f64>,
    /// Association of the sector with public leisure contacts.
    pub lav_contacts: Vec<f64>,
    /// Maximum household-demand shock to the sector.
    pub lav_demand: Vec<f64>,
    /// Physical proximity index in [0, 1].
    pub physical_proximity: Vec<f64>,
    /// Days of inputs each sector aims to keep in inventory.
    pub inventory_days: Vec<f64>,
    /// National employment share; sums to 1.
    pub employee_share: Vec<f64>,
    /// criticality[(k, l)]: how critical input l is to sector k.
    pub criticality: Mat,
    /// lmc[(g, k)]: fraction of patch g's employees working in sector k.
    pub lmc: Mat,
    /// Sector willingness to reduce workplace contacts; employment-weighted
    /// mean is 1 by construction.
    pub willingness: Vec<f64>,
}

impl SectorCatalog {
    pub fn n_sectors(&self) -> usize {
        self.codes.len()
    }

    pub fn sector_index(&self, code: &str) -> Option<usize> {
        self.codes.iter().position(|c| c == code)
    }

    pub fn criticality_of(&self, sector: usize, input: usize) -> Criticality {
        Criticality::from_level(self.criticality.get(sector, input))
            .expect("validated criticality level")
    }
}

/// Input-output tables and quantities derived from them.
#[derive(Debug, Clone)]
pub struct IOTables {
    /// Intermediate consumption of good k (row) by industry l (column),
    /// currency/year.
    pub z: Mat,
    /// Gross output at equilibrium, per sector.
    pub x0: Vec<f64>,
    /// Household consumption at equilibrium.
    pub c0: Vec<f64>,
    /// Exogenous consumption at equilibrium (can be negative: net stock
    /// drawdown).
    pub f0: Vec<f64>,
    /// Labor compensation at equilibrium.
    pub l0: Vec<f64>,
    /// Technical coefficients A_kl = Z_kl / x0_l.
    pub tech_coeffs: Mat,
    /// Target inventory S0_kl = n_l * Z_kl.
    pub target_inventory: Mat,
}

/// Immutable bundle of all static data for one country.
#[derive(Debug, Clone)]
pub struct CountryDataset {
    pub geo: GeoFrame,
    pub mobility: MobilityMatrix,
    pub contacts: ContactMatrixSet,
    pub sectors: SectorCatalog,
    pub io: IOTables,
}

impl CountryDataset {
    pub fn n_patches(&self) -> usize {
        self.geo.n_patches()
    }

    pub fn n_sectors(&self) -> usize {
        self.sectors.n_sectors()
    }

    pub fn patch_index(&self, id: &str) -> Option<usize> {
        self.geo.patch_ids.iter().position(|p| p == id)
    }

    /// Collapse the dataset to two patches: `focus` and the aggregate of all
    /// others. Used by the reduced-fidelity calibration mode.
    pub fn aggregate_to_two_patches(&self, focus: usize) -> CountryDataset {
        let g_old = self.n_patches();
        assert!(focus < g_old);
        if g_old <= 2 {
            return self.clone();
        }
        let k = self.n_sectors();
        let group = |g: usize| if g == focus { 0usize } else { 1usize };

        let mut population = Mat::zeros(N_AGE, 2);
        let mut active = vec![0.0; 2];
        let mut area = vec![0.0; 2];
        for g in 0..g_old {
            let ng = group(g);
            for i in 0..N_AGE {
                population.add_at(i, ng, self.geo.population.get(i, g));
            }
            active[ng] += self.geo.active_population[g];
            area[ng] += self.geo.area[g];
        }
        let geo = GeoFrame {
            patch_ids: vec![self.geo.patch_ids[focus].clone(), "rest".to_string()],
            names: vec![self.geo.names[focus].clone(), "rest".to_string()],
            population,
            active_population: active.clone(),
            area,
        };

        let mut raw = Mat::zeros(2, 2);
        for g in 0..g_old {
            for h in 0..g_old {
                raw.add_at(group(g), group(h), self.mobility.raw.get(g, h));
            }
        }
        let normalized = normalize_mobility(&raw, &active).expect("active population positive");
        let mobility = MobilityMatrix { raw, normalized };

        // Employment-weighted labor market composition of the merged patch.
        let mut lmc = Mat::zeros(2, k);
        let mut weight = [0.0f64; 2];
        for g in 0..g_old {
            let ng = group(g);
            let w = self.geo.active_population[g];
            weight[ng] += w;
            for s in 0..k {
                lmc.add_at(ng, s, w * self.sectors.lmc.get(g, s));
            }
        }
        for ng in 0..2 {
            for s in 0..k {
                let v = lmc.get(ng, s) / weight[ng];
                lmc.set(ng, s, v);
            }
        }
        let mut sectors = self.sectors.clone();
        sectors.lmc = lmc;

        CountryDataset {
            geo,
            mobility,
            contacts: self.contacts.clone(),
            sectors,
            io: self.io.clone(),
        }
    }
}

/// Normalize a raw commuter matrix by the origin patch's active population.
pub fn normalize_mobility(raw: &Mat, active_population: &[f64]) -> Result<Mat> {
    let g = raw.rows();
    assert_eq!(raw.cols(), g);
    assert_eq!(active_population.len(), g);
    let mut out = Mat::zeros(g, g);
    for origin in 0..g {
        let t = active_population[origin];
        if t <= 0.0 {
            return Err(Error::invariant(
                "active-population-positive",
                "active_population.csv",
                origin + 2,
                format!("patch index {origin} has active population {t}"),
            ));
        }
        for dest in 0..g {
            out.set(origin, dest, raw.get(origin, dest) / t);
        }
    }
    Ok(out)
}

/// Technical coefficients A_kl = Z_kl / x0_l.
pub fn technical_coefficients(z: &Mat, x0: &[f64]) -> Result<Mat> {
    let n = z.rows();
    assert_eq!(z.cols(), n);
    assert_eq!(x0.len(), n);
    let mut a = Mat::zeros(n, n);
    for l in 0..n {
        if x0[l] <= 0.0 {
            return Err(Error::invariant(
                "gross-output-positive",
                "io_vectors.csv",
                l + 2,
                format!("sector index {l} has x0 = {}", x0[l]),
            ));
        }
        for k in 0..n {
            a.set(k, l, z.get(k, l) / x0[l]);
        }
    }
    Ok(a)
}

/// Sector willingness to voluntarily reduce workplace contacts:
/// `W_k = FP_k f_tel_k / sum_l FP_l f_tel_l share_l`. The employment-weighted
/// mean of W is 1 by construction.
pub fn willingness(
    physical_proximity: &[f64],
    f_telework: &[f64],
    employee_share: &[f64],
) -> Result<Vec<f64>> {
    let n = physical_proximity.len();
    assert_eq!(f_telework.len(), n);
    assert_eq!(employee_share.len(), n);
    let denom: f64 = (0..n)
        .map(|l| physical_proximity[l] * f_telework[l] * employee_share[l])
        .sum();
    if denom <= 0.0 {
        return Err(Error::invariant(
            "willingness-denominator",
            "sectors.csv",
            0,
            "all FP_k * f_telework_k products are zero",
        ));
    }
    Ok((0..n)
        .map(|k| physical_proximity[k] * f_telework[k] / denom)
        .collect())
}

/// Target inventory S0_kl = n_l * Z_kl, where n_l is the consuming sector's
/// inventory horizon in days.
pub fn target_inventory(z: &Mat, inventory_days: &[f64]) -> Mat {
    let n = z.rows();
    assert_eq!(inventory_days.len(), n);
    let mut s0 = Mat::zeros(n, n);
    for k in 0..n {
        for l in 0..n {
            s0.set(k, l, inventory_days[l] * z.get(k, l));
        }
    }
    s0
}

/// Run every dataset invariant; returns the list of violations (empty when
/// clean). `load_country_dataset` rejects the dataset on the first
/// violation; the validate CLI command reports them all.
pub fn validate(ds: &CountryDataset) -> Vec<Error> {
    let mut errs = Vec::new();
    let g = ds.n_patches();
    let k = ds.n_sectors();

    for gg in 0..g {
        for i in 0..N_AGE {
            if ds.geo.population.get(i, gg) <= 0.0 {
                errs.push(Error::invariant(
                    "population-positive",
                    "demography.csv",
                    2 + gg * N_AGE + i,
                    format!(
                        "patch {} age bin {i}: population {}",
                        ds.geo.patch_ids[gg],
                        ds.geo.population.get(i, gg)
                    ),
                ));
            }
        }
        if ds.geo.active_population[gg] <= 0.0 {
            errs.push(Error::invariant(
                "active-population-positive",
                "active_population.csv",
                gg + 2,
                format!("patch {}", ds.geo.patch_ids[gg]),
            ));
        }
    }

    // Normalized mobility lies in [0,1] and rows sum to at most 1.
    for origin in 0..g {
        let mut row_sum = 0.0;
        for dest in 0..g {
            let v = ds.mobility.normalized.get(origin, dest);
            if !(0.0..=1.0).contains(&v) {
                errs.push(Error::invariant(
                    "mobility-fraction-range",
                    "mobility.csv",
                    origin + 2,
                    format!("normalized flow {v} out of [0,1]"),
                ));
            }
            row_sum += v;
        }
        if row_sum > 1.0 + 1e-9 {
            errs.push(Error::invariant(
                "mobility-row-sum",
                "mobility.csv",
                origin + 2,
                format!("patch {} row sums to {row_sum}", ds.geo.patch_ids[origin]),
            ));
        }
    }

    // Contact matrices: non-negative everywhere; demographic reciprocity for
    // home and leisure.
    let t_age = ds.geo.national_age_population();
    let non_negative = |name: &'static str, m: &Mat, errs: &mut Vec<Error>| {
        for i in 0..N_AGE {
            for j in 0..N_AGE {
                if m.get(i, j) < 0.0 {
                    errs.push(Error::invariant(
                        "contact-non-negative",
                        name,
                        2 + i * N_AGE + j,
                        format!("entry ({i},{j}) = {}", m.get(i, j)),
                    ));
                }
            }
        }
    };
    non_negative("contacts_home.csv", &ds.contacts.home, &mut errs);
    non_negative("contacts_school.csv", &ds.contacts.school, &mut errs);
    non_negative(
        "contacts_leisure_public.csv",
        &ds.contacts.leisure_public,
        &mut errs,
    );
    non_negative(
        "contacts_leisure_private.csv",
        &ds.contacts.leisure_private,
        &mut errs,
    );
    for m in &ds.contacts.work {
        non_negative("contacts_work.csv", m, &mut errs);
    }
    let reciprocity = |name: &'static str, m: &Mat, errs: &mut Vec<Error>| {
        for i in 0..N_AGE {
            for j in (i + 1)..N_AGE {
                let a = t_age[i] * m.get(i, j);
                let b = t_age[j] * m.get(j, i);
                let scale = a.abs().max(b.abs());
                if scale > 0.0 && (a - b).abs() / scale > CONTACT_RECIPROCITY_TOL {
                    errs.push(Error::invariant(
                        "contact-reciprocity",
                        name,
                        2 + i * N_AGE + j,
                        format!("T_i N_ij = {a:.3} vs T_j N_ji = {b:.3} at ({i},{j})"),
                    ));
                }
            }
        }
    };
    reciprocity("contacts_home.csv", &ds.contacts.home, &mut errs);
    reciprocity(
        "contacts_leisure_public.csv",
        &ds.contacts.leisure_public,
        &mut errs,
    );
    reciprocity(
        "contacts_leisure_private.csv",
        &ds.contacts.leisure_private,
        &mut errs,
    );

    // Sector catalog.
    for s in 0..k {
        if ds.sectors.f_workplace[s] + ds.sectors.f_telework[s] > 1.0 + 1e-9 {
            errs.push(Error::invariant(
                "workplace-telework-sum",
                "sectors.csv",
                s + 2,
                format!(
                    "sector {}: f_workplace + f_telework = {}",
                    ds.sectors.codes[s],
                    ds.sectors.f_workplace[s] + ds.sectors.f_telework[s]
                ),
            ));
        }
        for l in 0..k {
            if Criticality::from_level(ds.sectors.criticality.get(s, l)).is_none() {
                errs.push(Error::invariant(
                    "criticality-level",
                    "criticality.csv",
                    s + 2,
                    format!(
                        "sector {} input {}: level {}",
                        ds.sectors.codes[s],
                        ds.sectors.codes[l],
                        ds.sectors.criticality.get(s, l)
                    ),
                ));
            }
        }
    }
    for gg in 0..g {
        let sum = ds.sectors.lmc.row_sum(gg);
        if (sum - 1.0).abs() > 1e-6 {
            errs.push(Error::invariant(
                "lmc-sum-to-one",
                "lmc.csv",
                gg + 2,
                format!("patch {} shares sum to {sum}", ds.geo.patch_ids[gg]),
            ));
        }
    }

    // Input-output accounting identity within tolerance.
    for s in 0..k {
        let closure = ds.io.z.row_sum(s) + ds.io.c0[s] + ds.io.f0[s];
        let rel = (ds.io.x0[s] - closure).abs() / ds.io.x0[s].abs().max(1e-12);
        if rel > IO_ACCOUNTING_TOL {
            errs.push(Error::invariant(
                "io-accounting-identity",
                "io_vectors.csv",
                s + 2,
                format!(
                    "sector {}: x0 = {} but Z row + c0 + f0 = {closure}",
                    ds.sectors.codes[s], ds.io.x0[s]
                ),
            ));
        }
        if ds.io.x0[s] <= 0.0 {
            errs.push(Error::invariant(
                "gross-output-positive",
                "io_vectors.csv",
                s + 2,
                format!("sector {}: x0 = {}", ds.sectors.codes[s], ds.io.x0[s]),
            ));
        }
        if ds.io.l0[s] <= 0.0 {
            errs.push(Error::invariant(
                "labor-compensation-positive",
                "io_vectors.csv",
                s + 2,
                format!("sector {}: l0 = {}", ds.sectors.codes[s], ds.io.l0[s]),
            ));
        }
    }

    errs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testkit;

    #[test]
    fn normalize_mobility_divides_by_origin_active_population() {
        let raw = Mat::from_vec(2, 2, vec![80.0, 10.0, 5.0, 40.0]);
        let p = normalize_mobility(&raw, &[100.0, 50.0]).unwrap();
        assert_eq!(p.data(), &[0.8, 0.1, 0.1, 0.8]);
    }

    #[test]
    fn normalize_mobility_zero_flows() {
        let raw = Mat::zeros(3, 3);
        let p = normalize_mobility(&raw, &[10.0, 10.0, 10.0]).unwrap();
        assert!(p.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn normalize_mobility_rejects_zero_active_population() {
        let raw = Mat::zeros(2, 2);
        assert!(normalize_mobility(&raw, &[10.0, 0.0]).is_err());
    }

    #[test]
    fn technical_coefficients_divide_by_column_output() {
        let z = Mat::from_vec(2, 2, vec![0.0, 10.0, 20.0, 0.0]);
        let a = technical_coefficients(&z, &[100.0, 50.0]).unwrap();
        assert_eq!(a.get(0, 1), 0.2);
        assert_eq!(a.get(1, 0), 0.2);
        assert_eq!(a.get(0, 0), 0.0);

        let zero = Mat::zeros(2, 2);
        let a = technical_coefficients(&zero, &[1.0, 1.0]).unwrap();
        assert!(a.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn technical_coefficients_reject_zero_output() {
        let z = Mat::zeros(2, 2);
        assert!(technical_coefficients(&z, &[1.0, 0.0]).is_err());
    }

    #[test]
    fn willingness_uniform_products_give_unit_weights() {
        let w = willingness(&[0.5, 0.5, 0.5], &[0.4, 0.4, 0.4], &[0.2, 0.3, 0.5]).unwrap();
        for v in w {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn willingness_hand_computed_two_sectors() {
        // FP*f_tel = {0.2, 0.4}, equal shares -> W = {2/3, 4/3}.
        let w = willingness(&[0.5, 0.5], &[0.4, 0.8], &[0.5, 0.5]).unwrap();
        assert!((w[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((w[1] - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn willingness_weighted_mean_is_one() {
        let fp = [0.3, 0.7, 0.5, 0.9];
        let ft = [0.1, 0.8, 0.0, 0.5];
        let sh = [0.4, 0.2, 0.3, 0.1];
        let w = willingness(&fp, &ft, &sh).unwrap();
        let mean: f64 = w.iter().zip(sh.iter()).map(|(w, s)| w * s).sum();
        assert!((mean - 1.0).abs() < 1e-12);
    }

    #[test]
    fn willingness_rejects_all_zero_products() {
        assert!(willingness(&[0.5, 0.5], &[0.0, 0.0], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn synthetic_fixture_is_clean() {
        let ds = testkit::small_dataset(2, 3);
        let errs = validate(&ds);
        assert!(errs.is_empty(), "unexpected violations: {errs:?}");
    }

    #[test]
    fn two_patch_aggregation_conserves_population_and_lmc() {
        let ds = testkit::small_dataset(4, 3);
        let agg = ds.aggregate_to_two_patches(1);
        assert_eq!(agg.n_patches(), 2);
        assert!((agg.geo.total_population() - ds.geo.total_population()).abs() < 1e-9);
        for row in 0..2 {
            assert!((agg.sectors.lmc.row_sum(row) - 1.0).abs() < 1e-9);
        }
        assert!(validate(&agg).is_empty());
    }
}
