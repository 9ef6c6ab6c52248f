//! CSV ingestion and serialization of the country dataset directory.
//!
//! Layout (one directory per country, all files UTF-8 with a header row and
//! '.' decimal separator):
//!
//! - `demography.csv` (patch, age_bin, population)
//! - `active_population.csv` (patch, active_population, area_km2)
//! - `mobility.csv` (origin, destination, commuters)
//! - `contacts_{home,school,leisure_public,leisure_private}.csv` (age_i, age_j, rate)
//! - `contacts_work.csv` (sector, age_i, age_j, rate) — zero entries omitted
//! - `sectors.csv` (code, f_workplace, f_telework, lav_c, lav_d, fp, inventory_days, employee_share)
//! - `lmc.csv` (patch, sector, share)
//! - `io_z.csv` (supplier row, one column per consuming sector)
//! - `io_vectors.csv` (sector, x0, c0, f0, l0)
//! - `criticality.csv` (sector, input_sector, level) — zero entries omitted

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::math::Mat;

use super::{
    normalize_mobility, target_inventory, technical_coefficients, validate, willingness,
    ContactMatrixSet, CountryDataset, GeoFrame, IOTables, MobilityMatrix, SectorCatalog, N_AGE,
};

struct Table {
    file: String,
    headers: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn read(dir: &Path, name: &str) -> Result<Table> {
        let path = dir.join(name);
        if !path.exists() {
            return Err(Error::MissingFile(path));
        }
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_path(&path)
            .map_err(|e| Error::parse(name, 1, e.to_string()))?;
        let headers = reader
            .headers()
            .map_err(|e| Error::parse(name, 1, e.to_string()))?
            .iter()
            .map(|h| h.to_string())
            .collect();
        let mut rows = Vec::new();
        for (idx, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|e| Error::parse(name, idx + 2, e.to_string()))?;
            rows.push(rec.iter().map(|f| f.to_string()).collect());
        }
        Ok(Table {
            file: name.to_string(),
            headers,
            rows,
        })
    }

    fn col(&self, name: &str) -> Result<usize> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::parse(&self.file, 1, format!("missing column '{name}'")))
    }

    fn str_at(&self, row: usize, col: usize) -> &str {
        &self.rows[row][col]
    }

    fn f64_at(&self, row: usize, col: usize) -> Result<f64> {
        self.rows[row][col].parse().map_err(|_| {
            Error::parse(
                &self.file,
                row + 2,
                format!("expected a number, got {:?}", self.rows[row][col]),
            )
        })
    }

    fn usize_at(&self, row: usize, col: usize) -> Result<usize> {
        self.rows[row][col].parse().map_err(|_| {
            Error::parse(
                &self.file,
                row + 2,
                format!("expected an integer, got {:?}", self.rows[row][col]),
            )
        })
    }
}

fn dense_contact_matrix(dir: &Path, name: &str) -> Result<Mat> {
    let t = Table::read(dir, name)?;
    let (ci, cj, cr) = (t.col("age_i")?, t.col("age_j")?, t.col("rate")?);
    let mut m = Mat::zeros(N_AGE, N_AGE);
    for row in 0..t.rows.len() {
        let i = t.usize_at(row, ci)?;
        let j = t.usize_at(row, cj)?;
        if i >= N_AGE || j >= N_AGE {
            return Err(Error::dimension(
                name,
                format!("age bin ({i},{j}) outside 0..{N_AGE}"),
            ));
        }
        m.set(i, j, t.f64_at(row, cr)?);
    }
    Ok(m)
}

/// Load, derive, and validate a full country dataset from `root`.
pub fn load_country_dataset(root: impl AsRef<Path>) -> Result<CountryDataset> {
    let dir = root.as_ref();

    // Sector catalog first: everything else references sector codes.
    let t = Table::read(dir, "sectors.csv")?;
    let cols = (
        t.col("code")?,
        t.col("f_workplace")?,
        t.col("f_telework")?,
        t.col("lav_c")?,
        t.col("lav_d")?,
        t.col("fp")?,
        t.col("inventory_days")?,
        t.col("employee_share")?,
    );
    let mut codes = Vec::new();
    let mut f_workplace = Vec::new();
    let mut f_telework = Vec::new();
    let mut lav_contacts = Vec::new();
    let mut lav_demand = Vec::new();
    let mut physical_proximity = Vec::new();
    let mut inventory_days = Vec::new();
    let mut employee_share = Vec::new();
    for row in 0..t.rows.len() {
        codes.push(t.str_at(row, cols.0).to_string());
        f_workplace.push(t.f64_at(row, cols.1)?);
        f_telework.push(t.f64_at(row, cols.2)?);
        lav_contacts.push(t.f64_at(row, cols.3)?);
        lav_demand.push(t.f64_at(row, cols.4)?);
        physical_proximity.push(t.f64_at(row, cols.5)?);
        inventory_days.push(t.f64_at(row, cols.6)?);
        employee_share.push(t.f64_at(row, cols.7)?);
    }
    let n_sectors = codes.len();
    let sector_index: HashMap<String, usize> = codes
        .iter()
        .enumerate()
        .map(|(i, c)| (c.clone(), i))
        .collect();
    let share_sum: f64 = employee_share.iter().sum();
    if (share_sum - 1.0).abs() > 1e-6 {
        return Err(Error::invariant(
            "employee-share-sum",
            "sectors.csv",
            0,
            format!("shares sum to {share_sum}"),
        ));
    }

    // Demography: patches appear in file order, 17 bins each.
    let t = Table::read(dir, "demography.csv")?;
    let (cp, cb, cn) = (t.col("patch")?, t.col("age_bin")?, t.col("population")?);
    let mut patch_ids: Vec<String> = Vec::new();
    let mut patch_index: HashMap<String, usize> = HashMap::new();
    let mut pop_cells: Vec<(usize, usize, f64)> = Vec::new();
    for row in 0..t.rows.len() {
        let id = t.str_at(row, cp).to_string();
        let g = *patch_index.entry(id.clone()).or_insert_with(|| {
            patch_ids.push(id);
            patch_ids.len() - 1
        });
        let bin = t.usize_at(row, cb)?;
        if bin >= N_AGE {
            return Err(Error::dimension(
                "demography.csv",
                format!("age bin {bin} outside 0..{N_AGE}"),
            ));
        }
        pop_cells.push((bin, g, t.f64_at(row, cn)?));
    }
    let n_patches = patch_ids.len();
    if t.rows.len() != n_patches * N_AGE {
        return Err(Error::dimension(
            "demography.csv",
            format!(
                "expected {} rows for {n_patches} patches x {N_AGE} age bins, found {}",
                n_patches * N_AGE,
                t.rows.len()
            ),
        ));
    }
    let mut population = Mat::zeros(N_AGE, n_patches);
    for (bin, g, v) in pop_cells {
        population.set(bin, g, v);
    }

    let t = Table::read(dir, "active_population.csv")?;
    let (cp, ca, car) = (
        t.col("patch")?,
        t.col("active_population")?,
        t.col("area_km2")?,
    );
    let mut active_population = vec![f64::NAN; n_patches];
    let mut area = vec![f64::NAN; n_patches];
    for row in 0..t.rows.len() {
        let g = *patch_index.get(t.str_at(row, cp)).ok_or_else(|| {
            Error::parse(
                "active_population.csv",
                row + 2,
                format!("unknown patch {:?}", t.str_at(row, cp)),
            )
        })?;
        active_population[g] = t.f64_at(row, ca)?;
        area[g] = t.f64_at(row, car)?;
    }
    if active_population.iter().any(|v| v.is_nan()) {
        return Err(Error::dimension(
            "active_population.csv",
            "not every patch has an active population entry".to_string(),
        ));
    }

    let geo = GeoFrame {
        names: patch_ids.clone(),
        patch_ids,
        population,
        active_population,
        area,
    };

    // Mobility: absent origin-destination pairs mean zero commuters.
    let t = Table::read(dir, "mobility.csv")?;
    let (co, cd, cc) = (t.col("origin")?, t.col("destination")?, t.col("commuters")?);
    let mut raw = Mat::zeros(n_patches, n_patches);
    for row in 0..t.rows.len() {
        let lookup = |field: usize| {
            patch_index
                .get(t.str_at(row, field))
                .copied()
                .ok_or_else(|| {
                    Error::parse(
                        "mobility.csv",
                        row + 2,
                        format!("unknown patch {:?}", t.str_at(row, field)),
                    )
                })
        };
        raw.set(lookup(co)?, lookup(cd)?, t.f64_at(row, cc)?);
    }
    let normalized = normalize_mobility(&raw, &geo.active_population)?;
    let mobility = MobilityMatrix { raw, normalized };

    let home = dense_contact_matrix(dir, "contacts_home.csv")?;
    let school = dense_contact_matrix(dir, "contacts_school.csv")?;
    let leisure_public = dense_contact_matrix(dir, "contacts_leisure_public.csv")?;
    let leisure_private = dense_contact_matrix(dir, "contacts_leisure_private.csv")?;

    let t = Table::read(dir, "contacts_work.csv")?;
    let (cs, ci, cj, cr) = (
        t.col("sector")?,
        t.col("age_i")?,
        t.col("age_j")?,
        t.col("rate")?,
    );
    let mut work = vec![Mat::zeros(N_AGE, N_AGE); n_sectors];
    for row in 0..t.rows.len() {
        let s = *sector_index.get(t.str_at(row, cs)).ok_or_else(|| {
            Error::parse(
                "contacts_work.csv",
                row + 2,
                format!("unknown sector {:?}", t.str_at(row, cs)),
            )
        })?;
        let i = t.usize_at(row, ci)?;
        let j = t.usize_at(row, cj)?;
        if i >= N_AGE || j >= N_AGE {
            return Err(Error::dimension(
                "contacts_work.csv",
                format!("age bin ({i},{j}) outside 0..{N_AGE}"),
            ));
        }
        work[s].set(i, j, t.f64_at(row, cr)?);
    }
    let contacts = ContactMatrixSet {
        home,
        school,
        leisure_public,
        leisure_private,
        work,
    };

    let t = Table::read(dir, "lmc.csv")?;
    let (cp, cs, csh) = (t.col("patch")?, t.col("sector")?, t.col("share")?);
    let mut lmc = Mat::zeros(n_patches, n_sectors);
    for row in 0..t.rows.len() {
        let g = *patch_index.get(t.str_at(row, cp)).ok_or_else(|| {
            Error::parse(
                "lmc.csv",
                row + 2,
                format!("unknown patch {:?}", t.str_at(row, cp)),
            )
        })?;
        let s = *sector_index.get(t.str_at(row, cs)).ok_or_else(|| {
            Error::parse(
                "lmc.csv",
                row + 2,
                format!("unknown sector {:?}", t.str_at(row, cs)),
            )
        })?;
        lmc.set(g, s, t.f64_at(row, csh)?);
    }

    // Input-output matrix: one supplier row per sector, consuming sectors as
    // columns.
    let t = Table::read(dir, "io_z.csv")?;
    if t.headers.len() != n_sectors + 1 {
        return Err(Error::dimension(
            "io_z.csv",
            format!(
                "expected {} consumer columns, found {}",
                n_sectors,
                t.headers.len() - 1
            ),
        ));
    }
    if t.rows.len() != n_sectors {
        return Err(Error::dimension(
            "io_z.csv",
            format!(
                "expected {} supplier rows, found {}",
                n_sectors,
                t.rows.len()
            ),
        ));
    }
    let mut col_map = vec![0usize; n_sectors];
    for (pos, header) in t.headers.iter().enumerate().skip(1) {
        let l = *sector_index.get(header).ok_or_else(|| {
            Error::parse("io_z.csv", 1, format!("unknown sector column {header:?}"))
        })?;
        col_map[pos - 1] = l;
    }
    let mut z = Mat::zeros(n_sectors, n_sectors);
    for row in 0..n_sectors {
        let k = *sector_index.get(t.str_at(row, 0)).ok_or_else(|| {
            Error::parse(
                "io_z.csv",
                row + 2,
                format!("unknown sector row {:?}", t.str_at(row, 0)),
            )
        })?;
        for pos in 0..n_sectors {
            z.set(k, col_map[pos], t.f64_at(row, pos + 1)?);
        }
    }

    let t = Table::read(dir, "io_vectors.csv")?;
    let cols = (
        t.col("sector")?,
        t.col("x0")?,
        t.col("c0")?,
        t.col("f0")?,
        t.col("l0")?,
    );
    if t.rows.len() != n_sectors {
        return Err(Error::dimension(
            "io_vectors.csv",
            format!("expected {} rows, found {}", n_sectors, t.rows.len()),
        ));
    }
    let mut x0 = vec![0.0; n_sectors];
    let mut c0 = vec![0.0; n_sectors];
    let mut f0 = vec![0.0; n_sectors];
    let mut l0 = vec![0.0; n_sectors];
    for row in 0..t.rows.len() {
        let s = *sector_index.get(t.str_at(row, cols.0)).ok_or_else(|| {
            Error::parse(
                "io_vectors.csv",
                row + 2,
                format!("unknown sector {:?}", t.str_at(row, cols.0)),
            )
        })?;
        x0[s] = t.f64_at(row, cols.1)?;
        c0[s] = t.f64_at(row, cols.2)?;
        f0[s] = t.f64_at(row, cols.3)?;
        l0[s] = t.f64_at(row, cols.4)?;
    }

    let t = Table::read(dir, "criticality.csv")?;
    let (cs, cin, cl) = (t.col("sector")?, t.col("input_sector")?, t.col("level")?);
    let mut criticality = Mat::zeros(n_sectors, n_sectors);
    for row in 0..t.rows.len() {
        let s = *sector_index.get(t.str_at(row, cs)).ok_or_else(|| {
            Error::parse(
                "criticality.csv",
                row + 2,
                format!("unknown sector {:?}", t.str_at(row, cs)),
            )
        })?;
        let input = *sector_index.get(t.str_at(row, cin)).ok_or_else(|| {
            Error::parse(
                "criticality.csv",
                row + 2,
                format!("unknown input sector {:?}", t.str_at(row, cin)),
            )
        })?;
        criticality.set(s, input, t.f64_at(row, cl)?);
    }

    let wk = willingness(&physical_proximity, &f_telework, &employee_share)?;
    let tech_coeffs = technical_coefficients(&z, &x0)?;
    let target_inv = target_inventory(&z, &inventory_days);

    let sectors = SectorCatalog {
        codes,
        f_workplace,
        f_telework,
        lav_contacts,
        lav_demand,
        physical_proximity,
        inventory_days,
        employee_share,
        criticality,
        lmc,
        willingness: wk,
    };
    let io = IOTables {
        z,
        x0,
        c0,
        f0,
        l0,
        tech_coeffs,
        target_inventory: target_inv,
    };
    let ds = CountryDataset {
        geo,
        mobility,
        contacts,
        sectors,
        io,
    };

    if let Some(err) = validate(&ds).into_iter().next() {
        return Err(err);
    }
    Ok(ds)
}

fn fmt(v: f64) -> String {
    format!("{v}")
}

/// Serialize a dataset back to the documented CSV layout. Loading a saved
/// dataset and saving it again is byte-identical.
pub fn save_country_dataset(ds: &CountryDataset, root: impl AsRef<Path>) -> Result<()> {
    let dir = root.as_ref();
    fs::create_dir_all(dir)?;
    let g = ds.n_patches();
    let k = ds.n_sectors();

    let write = |name: &str, header: &[&str], rows: Vec<Vec<String>>| -> Result<()> {
        let mut w = csv::Writer::from_path(dir.join(name))
            .map_err(|e| Error::parse(name, 0, e.to_string()))?;
        w.write_record(header.iter())
            .map_err(|e| Error::parse(name, 1, e.to_string()))?;
        for row in rows {
            w.write_record(&row)
                .map_err(|e| Error::parse(name, 0, e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    };

    let mut rows = Vec::new();
    for gg in 0..g {
        for i in 0..N_AGE {
            rows.push(vec![
                ds.geo.patch_ids[gg].clone(),
                i.to_string(),
                fmt(ds.geo.population.get(i, gg)),
            ]);
        }
    }
    write("demography.csv", &["patch", "age_bin", "population"], rows)?;

    let rows = (0..g)
        .map(|gg| {
            vec![
                ds.geo.patch_ids[gg].clone(),
                fmt(ds.geo.active_population[gg]),
                fmt(ds.geo.area[gg]),
            ]
        })
        .collect();
    write(
        "active_population.csv",
        &["patch", "active_population", "area_km2"],
        rows,
    )?;

    let mut rows = Vec::new();
    for o in 0..g {
        for d in 0..g {
            rows.push(vec![
                ds.geo.patch_ids[o].clone(),
                ds.geo.patch_ids[d].clone(),
                fmt(ds.mobility.raw.get(o, d)),
            ]);
        }
    }
    write(
        "mobility.csv",
        &["origin", "destination", "commuters"],
        rows,
    )?;

    let dense = |m: &Mat| -> Vec<Vec<String>> {
        let mut rows = Vec::new();
        for i in 0..N_AGE {
            for j in 0..N_AGE {
                rows.push(vec![i.to_string(), j.to_string(), fmt(m.get(i, j))]);
            }
        }
        rows
    };
    write(
        "contacts_home.csv",
        &["age_i", "age_j", "rate"],
        dense(&ds.contacts.home),
    )?;
    write(
        "contacts_school.csv",
        &["age_i", "age_j", "rate"],
        dense(&ds.contacts.school),
    )?;
    write(
        "contacts_leisure_public.csv",
        &["age_i", "age_j", "rate"],
        dense(&ds.contacts.leisure_public),
    )?;
    write(
        "contacts_leisure_private.csv",
        &["age_i", "age_j", "rate"],
        dense(&ds.contacts.leisure_private),
    )?;

    let mut rows = Vec::new();
    for s in 0..k {
        for i in 0..N_AGE {
            for j in 0..N_AGE {
                let v = ds.contacts.work[s].get(i, j);
                if v != 0.0 {
                    rows.push(vec![
                        ds.sectors.codes[s].clone(),
                        i.to_string(),
                        j.to_string(),
                        fmt(v),
                    ]);
                }
            }
        }
    }
    write(
        "contacts_work.csv",
        &["sector", "age_i", "age_j", "rate"],
        rows,
    )?;

    let rows = (0..k)
        .map(|s| {
            vec![
                ds.sectors.codes[s].clone(),
                fmt(ds.sectors.f_workplace[s]),
                fmt(ds.sectors.f_telework[s]),
                fmt(ds.sectors.lav_contacts[s]),
                fmt(ds.sectors.lav_demand[s]),
                fmt(ds.sectors.physical_proximity[s]),
                fmt(ds.sectors.inventory_days[s]),
                fmt(ds.sectors.employee_share[s]),
            ]
        })
        .collect();
    write(
        "sectors.csv",
        &[
            "code",
            "f_workplace",
            "f_telework",
            "lav_c",
            "lav_d",
            "fp",
            "inventory_days",
            "employee_share",
        ],
        rows,
    )?;

    let mut rows = Vec::new();
    for gg in 0..g {
        for s in 0..k {
            rows.push(vec![
                ds.geo.patch_ids[gg].clone(),
                ds.sectors.codes[s].clone(),
                fmt(ds.sectors.lmc.get(gg, s)),
            ]);
        }
    }
    write("lmc.csv", &["patch", "sector", "share"], rows)?;

    let mut header: Vec<&str> = vec!["sector"];
    for code in &ds.sectors.codes {
        header.push(code);
    }
    let rows = (0..k)
        .map(|kk| {
            let mut row = vec![ds.sectors.codes[kk].clone()];
            for l in 0..k {
                row.push(fmt(ds.io.z.get(kk, l)));
            }
            row
        })
        .collect();
    write("io_z.csv", &header, rows)?;

    let rows = (0..k)
        .map(|s| {
            vec![
                ds.sectors.codes[s].clone(),
                fmt(ds.io.x0[s]),
                fmt(ds.io.c0[s]),
                fmt(ds.io.f0[s]),
                fmt(ds.io.l0[s]),
            ]
        })
        .collect();
    write("io_vectors.csv", &["sector", "x0", "c0", "f0", "l0"], rows)?;

    let mut rows = Vec::new();
    for s in 0..k {
        for input in 0..k {
            let v = ds.sectors.criticality.get(s, input);
            if v != 0.0 {
                rows.push(vec![
                    ds.sectors.codes[s].clone(),
                    ds.sectors.codes[input].clone(),
                    fmt(v),
                ]);
            }
        }
    }
    write(
        "criticality.csv",
        &["sector", "input_sector", "level"],
        rows,
    )?;

    Ok(())
}
