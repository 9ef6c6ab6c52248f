//! Synthetic fixture builders shared by unit, integration, and acceptance
//! tests. Not part of the simulation API.

use crate::datahub::{
    normalize_mobility, target_inventory, technical_coefficients, willingness, ContactMatrixSet,
    CountryDataset, GeoFrame, IOTables, MobilityMatrix, SectorCatalog, ACTIVE_BINS, N_AGE,
};
use crate::math::Mat;

/// National age profile used for fixture populations (fractions over the 17
/// five-year bins, summing to 1).
pub const AGE_PROFILE: [f64; N_AGE] = [
    0.056, 0.058, 0.057, 0.056, 0.059, 0.064, 0.066, 0.065, 0.065, 0.067, 0.069, 0.067, 0.060,
    0.055, 0.049, 0.036, 0.051,
];

/// A small, fully valid country dataset with `g` patches and `k` sectors.
///
/// The economy starts at an exact equilibrium (the accounting identity holds
/// to float precision) and the contact matrices satisfy demographic
/// reciprocity by construction.
pub fn small_dataset(g: usize, k: usize) -> CountryDataset {
    assert!(g >= 1 && k >= 1);

    let patch_ids: Vec<String> = (0..g).map(|i| format!("P{i}")).collect();
    let mut population = Mat::zeros(N_AGE, g);
    let mut active = vec![0.0; g];
    let mut area = vec![0.0; g];
    for gg in 0..g {
        let total = 1.0e6 * (1.0 + 0.4 * gg as f64);
        for i in 0..N_AGE {
            population.set(i, gg, AGE_PROFILE[i] * total);
        }
        active[gg] = ACTIVE_BINS.map(|i| population.get(i, gg)).sum();
        area[gg] = 5000.0 * (1.0 + gg as f64);
    }
    let geo = GeoFrame {
        patch_ids: patch_ids.clone(),
        names: patch_ids,
        population,
        active_population: active.clone(),
        area,
    };

    // Diagonal-heavy mobility; every row sums to an employed fraction of 0.7.
    let employed = 0.7;
    let mut norm = Mat::zeros(g, g);
    for o in 0..g {
        if g == 1 {
            norm.set(0, 0, employed);
        } else {
            let outbound = 0.10;
            norm.set(o, o, employed - outbound);
            for d in 0..g {
                if d != o {
                    norm.set(o, d, outbound / (g - 1) as f64);
                }
            }
        }
    }
    let mut raw = Mat::zeros(g, g);
    for o in 0..g {
        for d in 0..g {
            raw.set(o, d, norm.get(o, d) * active[o]);
        }
    }
    let normalized = normalize_mobility(&raw, &active).unwrap();
    let mobility = MobilityMatrix { raw, normalized };

    let t_age: Vec<f64> = geo.national_age_population();
    let contacts = ContactMatrixSet {
        home: reciprocal_matrix(&t_age, |i, j| {
            let d = (i as f64 - j as f64).abs();
            1.8 * (-0.5 * (d / 1.5).powi(2)).exp() + 0.9 * (-0.5 * ((d - 6.0) / 2.0).powi(2)).exp()
        }),
        school: reciprocal_matrix(&t_age, |i, j| {
            if i <= 3 && j <= 3 {
                4.0 * (-0.5 * ((i as f64 - j as f64) / 1.0).powi(2)).exp()
            } else {
                0.0
            }
        }),
        leisure_public: reciprocal_matrix(&t_age, |i, j| {
            let mid = 5.0;
            1.0 * (-0.04 * ((i as f64 - mid).powi(2) + (j as f64 - mid).powi(2))).exp()
        }),
        leisure_private: reciprocal_matrix(&t_age, |i, j| {
            let d = (i as f64 - j as f64).abs();
            1.2 * (-0.5 * (d / 2.5).powi(2)).exp()
        }),
        work: (0..k)
            .map(|s| {
                let intensity = 3.0 + s as f64;
                reciprocal_matrix(&t_age, |i, j| {
                    if ACTIVE_BINS.contains(&i) && ACTIVE_BINS.contains(&j) {
                        intensity / 10.0
                    } else {
                        0.0
                    }
                })
            })
            .collect(),
    };

    let codes: Vec<String> = (0..k).map(|s| format!("S{s}")).collect();
    let f_workplace: Vec<f64> = (0..k).map(|s| 0.3 + 0.05 * (s % 5) as f64).collect();
    let f_telework: Vec<f64> = (0..k).map(|s| 0.2 + 0.04 * (s % 4) as f64).collect();
    let lav_contacts: Vec<f64> = (0..k)
        .map(|s| if s % 3 == 0 { 100.0 } else { 10.0 })
        .collect();
    let lav_demand: Vec<f64> = (0..k).map(|s| if s % 3 == 0 { 1.0 } else { 0.1 }).collect();
    let fp: Vec<f64> = (0..k).map(|s| 0.4 + 0.05 * (s % 6) as f64).collect();
    let inventory_days: Vec<f64> = (0..k).map(|s| 15.0 + 5.0 * s as f64).collect();
    let employee_share: Vec<f64> = vec![1.0 / k as f64; k];

    let mut lmc = Mat::zeros(g, k);
    for gg in 0..g {
        for s in 0..k {
            lmc.set(gg, s, 1.0 / k as f64);
        }
    }

    let mut criticality = Mat::zeros(k, k);
    if k >= 2 {
        for s in 0..k {
            criticality.set(s, (s + 1) % k, 1.0);
            if k >= 3 {
                criticality.set(s, (s + 2) % k, 0.5);
            }
        }
    }

    // Economy at an exact equilibrium: gravity-structured Z with row sums
    // x0 - c0 - f0.
    let x0: Vec<f64> = (0..k).map(|s| 1000.0 * (1.0 + 0.5 * s as f64)).collect();
    let c0: Vec<f64> = x0.iter().map(|x| 0.30 * x).collect();
    let f0: Vec<f64> = x0.iter().map(|x| 0.20 * x).collect();
    let l0: Vec<f64> = x0.iter().map(|x| 0.25 * x).collect();
    let z = gravity_io_matrix(&x0, &c0, &f0, &l0);

    let wk = willingness(&fp, &f_telework, &employee_share).unwrap();
    let tech_coeffs = technical_coefficients(&z, &x0).unwrap();
    let target_inv = target_inventory(&z, &inventory_days);

    CountryDataset {
        geo,
        mobility,
        contacts,
        sectors: SectorCatalog {
            codes,
            f_workplace,
            f_telework,
            lav_contacts,
            lav_demand,
            physical_proximity: fp,
            inventory_days,
            employee_share,
            criticality,
            lmc,
            willingness: wk,
        },
        io: IOTables {
            z,
            x0,
            c0,
            f0,
            l0,
            tech_coeffs,
            target_inventory: target_inv,
        },
    }
}

/// Build a contact matrix from a symmetric total-flow kernel so that
/// demographic reciprocity `T_i N_ij = T_j N_ji` holds exactly.
pub fn reciprocal_matrix(t_age: &[f64], kernel: impl Fn(usize, usize) -> f64) -> Mat {
    let t_total: f64 = t_age.iter().sum();
    let mut m = Mat::zeros(N_AGE, N_AGE);
    for i in 0..N_AGE {
        for j in 0..N_AGE {
            // Symmetrize the kernel, then convert total flows to per-capita
            // rates for age i.
            let w = 0.5 * (kernel(i, j) + kernel(j, i));
            let flow = w * t_age[i] / t_total * t_age[j] / t_total;
            m.set(i, j, flow * t_total / t_age[i]);
        }
    }
    m
}

/// Input-output matrix with exact row sums `x0 - c0 - f0` and column totals
/// proportional to `x0 - l0` (a biproportional gravity structure).
pub fn gravity_io_matrix(x0: &[f64], c0: &[f64], f0: &[f64], l0: &[f64]) -> Mat {
    let k = x0.len();
    let row_tot: Vec<f64> = (0..k).map(|s| (x0[s] - c0[s] - f0[s]).max(0.0)).collect();
    let col_raw: Vec<f64> = (0..k).map(|s| (x0[s] - l0[s]).max(0.0)).collect();
    let total: f64 = row_tot.iter().sum();
    let col_raw_sum: f64 = col_raw.iter().sum();
    let mut z = Mat::zeros(k, k);
    if total <= 0.0 || col_raw_sum <= 0.0 {
        return z;
    }
    let col_tot: Vec<f64> = col_raw.iter().map(|c| c * total / col_raw_sum).collect();
    for r in 0..k {
        for c in 0..k {
            z.set(r, c, row_tot[r] * col_tot[c] / total);
        }
    }
    z
}
