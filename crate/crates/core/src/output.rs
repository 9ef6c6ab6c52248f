//! Plot-ready exports: tidy record CSVs (date, variable, stratum, value),
//! scenario summary tables, chain CSVs, observation ingestion, and the run
//! manifest.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::calibrate::{
    Cadence, LikelihoodFamily, ObservationSeries, ObservationSet, PosteriorChain,
};
use crate::coupler::SimulationRecord;
use crate::date::Date;
use crate::error::{Error, Result};

fn fmt(v: f64) -> String {
    format!("{v}")
}

/// Write a record as tidy CSV: one row per (date, variable, stratum).
pub fn write_record_csv(record: &SimulationRecord, path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path.as_ref())
        .map_err(|e| Error::Config(format!("cannot write record: {e}")))?;
    w.write_record(["date", "variable", "stratum", "value"])
        .map_err(|e| Error::Config(e.to_string()))?;
    let mut row = |date: &Date, variable: &str, stratum: &str, value: f64| {
        w.write_record([date.to_string().as_str(), variable, stratum, &fmt(value)])
            .map_err(|e| Error::Config(e.to_string()))
    };
    for (i, date) in record.dates.iter().enumerate() {
        for (g, id) in record.patch_ids.iter().enumerate() {
            row(date, "q_hosp", id, record.q_hosp[i][g])?;
            row(date, "hosp_incidence", id, record.hosp_incidence[i][g])?;
            row(date, "ic_load", id, record.ic_load[i][g])?;
            row(date, "m_eff", id, record.m_eff[i][g])?;
            row(date, "m_leisure", id, record.m_leisure[i][g])?;
        }
        for (k, code) in record.sector_codes.iter().enumerate() {
            row(date, "x", code, record.x[i][k])?;
            row(date, "l", code, record.l[i][k])?;
            row(date, "d", code, record.d[i][k])?;
            row(date, "kappa_d", code, record.kappa_d[i][k])?;
            row(date, "kappa_s", code, record.kappa_s[i][k])?;
            row(date, "kappa_f", code, record.kappa_f[i][k])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// One row of a scenario summary table.
#[derive(Debug, Clone, Serialize)]
pub struct SummaryRow {
    pub scenario: String,
    pub country: String,
    pub policy: String,
    pub variant: String,
    pub output_reduction_pct: f64,
    pub labor_reduction_pct: f64,
    pub cumulative_ic_patients: f64,
}

pub fn write_summary_csv(rows: &[SummaryRow], path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path.as_ref())
        .map_err(|e| Error::Config(format!("cannot write summary: {e}")))?;
    w.write_record([
        "scenario",
        "country",
        "policy",
        "variant",
        "output_reduction_pct",
        "labor_reduction_pct",
        "cumulative_ic_patients",
    ])
    .map_err(|e| Error::Config(e.to_string()))?;
    for r in rows {
        w.write_record([
            r.scenario.as_str(),
            r.country.as_str(),
            r.policy.as_str(),
            r.variant.as_str(),
            &fmt(r.output_reduction_pct),
            &fmt(r.labor_reduction_pct),
            &fmt(r.cumulative_ic_patients),
        ])
        .map_err(|e| Error::Config(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Summarize a run over a quarter-style window.
pub fn summarize_window(
    record: &SimulationRecord,
    policy: &str,
    variant: &str,
    from: Date,
    to: Date,
) -> SummaryRow {
    SummaryRow {
        scenario: record.scenario.clone(),
        country: record.country.clone(),
        policy: policy.to_string(),
        variant: variant.to_string(),
        output_reduction_pct: record.gross_output_change_pct(from, to),
        labor_reduction_pct: record.labor_change_pct(from, to),
        cumulative_ic_patients: record.cumulative_ic_patients(from, to),
    }
}

/// Export a posterior chain as tidy CSV: one row per
/// (walker, step, parameter).
pub fn write_chain_csv(
    chain: &PosteriorChain,
    param_names: &[String],
    path: impl AsRef<Path>,
) -> Result<()> {
    let mut w = csv::Writer::from_path(path.as_ref())
        .map_err(|e| Error::Config(format!("cannot write chain: {e}")))?;
    w.write_record(["walker", "step", "parameter", "value", "log_posterior"])
        .map_err(|e| Error::Config(e.to_string()))?;
    for step in 0..chain.n_steps {
        for walker in 0..chain.n_walkers {
            let theta = chain.sample(step, walker);
            let lp = fmt(chain.log_prob(step, walker));
            for (name, value) in param_names.iter().zip(theta.iter()) {
                w.write_record([
                    walker.to_string().as_str(),
                    step.to_string().as_str(),
                    name,
                    &fmt(*value),
                    &lp,
                ])
                .map_err(|e| Error::Config(e.to_string()))?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Read a chain CSV back: returns the parameter names and the walker
/// positions at the last recorded step (the resume point).
pub fn read_chain_tail(path: impl AsRef<Path>) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::Config(format!("chain file: {e}")))?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Config(format!("chain file: {e}")))?
        .iter()
        .map(|h| h.to_string())
        .collect();
    if headers != ["walker", "step", "parameter", "value", "log_posterior"] {
        return Err(Error::Config("unrecognized chain file header".to_string()));
    }
    let mut names: Vec<String> = Vec::new();
    let mut last_step = 0usize;
    let mut tail: Vec<(usize, Vec<(String, f64)>)> = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::Config(format!("chain file: {e}")))?;
        let walker: usize = rec[0]
            .parse()
            .map_err(|_| Error::Config("bad walker".into()))?;
        let step: usize = rec[1]
            .parse()
            .map_err(|_| Error::Config("bad step".into()))?;
        let parameter = rec[2].to_string();
        let value: f64 = rec[3]
            .parse()
            .map_err(|_| Error::Config("bad value".into()))?;
        if !names.contains(&parameter) {
            names.push(parameter.clone());
        }
        if step > last_step {
            last_step = step;
            tail.clear();
        }
        if step == last_step {
            match tail.iter_mut().find(|(w, _)| *w == walker) {
                Some((_, values)) => values.push((parameter, value)),
                None => tail.push((walker, vec![(parameter, value)])),
            }
        }
    }
    tail.sort_by_key(|(w, _)| *w);
    let positions: Vec<Vec<f64>> = tail
        .into_iter()
        .map(|(_, values)| {
            names
                .iter()
                .map(|n| {
                    values
                        .iter()
                        .find(|(p, _)| p == n)
                        .map(|(_, v)| *v)
                        .ok_or_else(|| Error::Config(format!("walker missing parameter '{n}'")))
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    Ok((names, positions))
}

/// Load an observation set from `observations.csv` with columns
/// (date, country, variable, stratum, value, family); the family column is
/// one of `nb`, `poisson`, `gaussian` with optional `:parameter`
/// (dispersion or sigma).
pub fn load_observations(path: impl AsRef<Path>) -> Result<ObservationSet> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let name = "observations.csv";
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::parse(name, 1, e.to_string()))?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| Error::parse(name, 1, e.to_string()))?
        .iter()
        .map(|h| h.to_string())
        .collect();
    let col = |n: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == n)
            .ok_or_else(|| Error::parse(name, 1, format!("missing column '{n}'")))
    };
    let (cd, cc, cv, cs, cval, cf) = (
        col("date")?,
        col("country")?,
        col("variable")?,
        col("stratum")?,
        col("value")?,
        col("family")?,
    );
    let mut set = ObservationSet::default();
    for (idx, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::parse(name, idx + 2, e.to_string()))?;
        let date: Date = rec[cd]
            .parse()
            .map_err(|e| Error::parse(name, idx + 2, e))?;
        let value: f64 = rec[cval]
            .parse()
            .map_err(|_| Error::parse(name, idx + 2, format!("bad value {:?}", &rec[cval])))?;
        let family = parse_family(&rec[cf])
            .ok_or_else(|| Error::parse(name, idx + 2, format!("bad family {:?}", &rec[cf])))?;
        let key = (
            rec[cc].to_string(),
            rec[cv].to_string(),
            rec[cs].to_string(),
            family,
        );
        match set.series.iter_mut().find(|s| {
            (
                s.country.clone(),
                s.variable.clone(),
                s.stratum.clone(),
                s.family,
            ) == key
        }) {
            Some(series) => {
                series.dates.push(date);
                series.values.push(value);
            }
            None => set.series.push(ObservationSeries {
                country: key.0,
                variable: key.1,
                stratum: key.2,
                cadence: Cadence::Daily,
                dates: vec![date],
                values: vec![value],
                family,
            }),
        }
    }
    // Infer cadence from the spacing of the first two timestamps.
    for series in &mut set.series {
        if series.dates.len() >= 2 {
            let gap = series.dates[1].rata_die() - series.dates[0].rata_die();
            series.cadence = match gap {
                7 => Cadence::Weekly,
                28..=31 => Cadence::Monthly,
                _ => Cadence::Daily,
            };
        }
    }
    Ok(set)
}

fn parse_family(text: &str) -> Option<LikelihoodFamily> {
    let mut parts = text.splitn(2, ':');
    let kind = parts.next()?;
    let param: Option<f64> = parts.next().and_then(|p| p.parse().ok());
    match kind {
        "nb" | "negative-binomial" => Some(LikelihoodFamily::NegativeBinomial {
            dispersion: param.unwrap_or(0.1),
        }),
        "poisson" => Some(LikelihoodFamily::Poisson),
        "gaussian" => Some(LikelihoodFamily::Gaussian {
            sigma: param.unwrap_or(2.0),
        }),
        _ => None,
    }
}

/// Write the observation CSV counterpart of [`load_observations`].
pub fn write_observations(set: &ObservationSet, path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path.as_ref())
        .map_err(|e| Error::Config(format!("cannot write observations: {e}")))?;
    w.write_record(["date", "country", "variable", "stratum", "value", "family"])
        .map_err(|e| Error::Config(e.to_string()))?;
    for s in &set.series {
        let family = match s.family {
            LikelihoodFamily::NegativeBinomial { dispersion } => format!("nb:{dispersion}"),
            LikelihoodFamily::Poisson => "poisson".to_string(),
            LikelihoodFamily::Gaussian { sigma } => format!("gaussian:{sigma}"),
        };
        for (d, v) in s.dates.iter().zip(s.values.iter()) {
            w.write_record([
                d.to_string().as_str(),
                &s.country,
                &s.variable,
                &s.stratum,
                &fmt(*v),
                &family,
            ])
            .map_err(|e| Error::Config(e.to_string()))?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reproducibility manifest written next to every command's outputs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub dataset: Vec<String>,
    pub scenario: Option<String>,
    pub seed: u64,
    pub fidelity: String,
    pub overrides: Vec<String>,
    pub version: String,
}

pub fn write_manifest(manifest: &RunManifest, dir: impl AsRef<Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(manifest)
        .map_err(|e| Error::Config(format!("manifest: {e}")))?;
    let mut f = fs::File::create(dir.as_ref().join("run-manifest.json"))?;
    f.write_all(text.as_bytes())?;
    f.write_all(b"\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupler::{run, ModelParams, PolicySchedule, ScenarioSpec};
    use crate::memory::AwarenessMode;
    use crate::testkit;

    fn tiny_record() -> SimulationRecord {
        let ds = testkit::small_dataset(2, 3);
        let spec = ScenarioSpec {
            name: "tiny".to_string(),
            country: "FIX".to_string(),
            start: Date::from_ymd(2020, 1, 1),
            end: Date::from_ymd(2020, 1, 11),
            seasonality: false,
            holidays: false,
            exogenous_shocks: false,
            awareness: AwarenessMode::Off,
            seeds: Vec::new(),
            schedule: PolicySchedule::empty(),
            holiday_ranges: Vec::new(),
            params: ModelParams::default(),
        };
        run(&spec, &ds).unwrap()
    }

    #[test]
    fn record_csv_is_tidy_and_rewrites_identically() {
        let record = tiny_record();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("record.csv");
        write_record_csv(&record, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "date,variable,stratum,value");
        // 10 days x (2 patches x 5 vars + 3 sectors x 6 vars) rows.
        assert_eq!(text.lines().count() - 1, 10 * (2 * 5 + 3 * 6));
        assert!(text.contains("2020-01-01,q_hosp,P0,0"));
        // Re-running the export is byte-identical.
        let again = dir.path().join("again.csv");
        write_record_csv(&record, &again).unwrap();
        assert_eq!(fs::read(&path).unwrap(), fs::read(&again).unwrap());
    }

    #[test]
    fn summary_recomputable_from_record() {
        let record = tiny_record();
        let from = Date::from_ymd(2020, 1, 1);
        let to = Date::from_ymd(2020, 1, 11);
        let row = summarize_window(&record, "none", "base", from, to);
        assert!((row.output_reduction_pct - 0.0).abs() < 1e-9);
        assert_eq!(row.cumulative_ic_patients, 0.0);
    }

    #[test]
    fn observations_round_trip() {
        let set = ObservationSet {
            series: vec![ObservationSeries {
                country: "BE".into(),
                variable: "hosp_incidence".into(),
                stratum: "national".into(),
                cadence: Cadence::Daily,
                dates: vec![Date::from_ymd(2020, 3, 1), Date::from_ymd(2020, 3, 2)],
                values: vec![5.0, 8.0],
                family: LikelihoodFamily::NegativeBinomial { dispersion: 0.1 },
            }],
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("observations.csv");
        write_observations(&set, &path).unwrap();
        let loaded = load_observations(&path).unwrap();
        assert_eq!(loaded.series.len(), 1);
        assert_eq!(loaded.series[0].values, vec![5.0, 8.0]);
        assert_eq!(
            loaded.series[0].family,
            LikelihoodFamily::NegativeBinomial { dispersion: 0.1 }
        );
        assert!(load_observations(dir.path().join("missing.csv")).is_err());
    }

    #[test]
    fn weekly_cadence_inferred_from_spacing() {
        let set = ObservationSet {
            series: vec![ObservationSeries {
                country: "SWE".into(),
                variable: "hosp_incidence".into(),
                stratum: "national".into(),
                cadence: Cadence::Daily,
                dates: vec![Date::from_ymd(2020, 3, 2), Date::from_ymd(2020, 3, 9)],
                values: vec![12.0, 30.0],
                family: LikelihoodFamily::Poisson,
            }],
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("observations.csv");
        write_observations(&set, &path).unwrap();
        let loaded = load_observations(&path).unwrap();
        assert_eq!(loaded.series[0].cadence, Cadence::Weekly);
    }

    #[test]
    fn manifest_written_as_json() {
        let dir = tempfile::tempdir().unwrap();
        write_manifest(
            &RunManifest {
                command: "scenario".into(),
                dataset: vec!["data/BE".into()],
                scenario: Some("scenario1".into()),
                seed: 42,
                fidelity: "full".into(),
                overrides: vec!["nu=7".into()],
                version: "0.1.0".into(),
            },
            dir.path(),
        )
        .unwrap();
        let text = fs::read_to_string(dir.path().join("run-manifest.json")).unwrap();
        assert!(text.contains("\"seed\": 42"));
    }
}
