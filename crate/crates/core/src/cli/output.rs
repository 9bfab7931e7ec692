//! CSV tables and the JSON run record.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::SCHEMA_VERSION;
use super::{Overrides, PlanResult, PointResult, RunConfig};
use crate::constants::two_pi;
use crate::Result;

pub const CSV_COLUMNS: [&str; 6] = ["value", "mean_fidelity", "stderr", "log10_infidelity", "n_realizations", "seed"];

/// CSV text of one series. Floats use the shortest round-trip form, so equal
/// results always give equal bytes.
pub fn csv_text(points: &[PointResult]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| crate::Error::Io(std::io::Error::other(e));
    w.write_record(CSV_COLUMNS).map_err(io)?;
    for p in points {
        let log = p.log10_infidelity.map(|v| v.to_string()).unwrap_or_default();
        w.write_record([
            p.value.to_string(),
            p.mean_fidelity.to_string(),
            p.stderr.to_string(),
            log,
            p.n_realizations.to_string(),
            p.seed.to_string(),
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| crate::Error::Io(std::io::Error::other(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

pub fn csv_name(label: &str, series: &str) -> String {
    if series.is_empty() {
        format!("{label}.csv")
    } else {
        let clean: String = series.chars().map(|c| if c.is_ascii_alphanumeric() || "._-".contains(c) { c } else { '_' }).collect();
        format!("{label}_{clean}.csv")
    }
}

/// Angular frequencies of a schedule echoed in Hz.
#[derive(Serialize)]
struct FrequenciesHz {
    rabi: f64,
    detuning: f64,
    gate_detuning: f64,
    carrier: f64,
    effective_carrier: f64,
}

#[derive(Serialize)]
struct PointRecord<'a> {
    #[serde(flatten)]
    result: &'a PointResult,
    frequencies_hz: FrequenciesHz,
}

#[derive(Serialize)]
struct SeriesRecord<'a> {
    name: &'a str,
    csv: String,
    points: Vec<PointRecord<'a>>,
}

#[derive(Serialize)]
struct RunRecord<'a> {
    schema_version: u32,
    tool_version: &'static str,
    command: &'a str,
    preset: Option<&'a str>,
    parameter: Option<&'a str>,
    config_hash: String,
    config: &'a RunConfig,
    overrides: &'a Overrides,
    master_seed: u64,
    series: Vec<SeriesRecord<'a>>,
    wall_time_s: f64,
}

/// What produced a result, for the run record.
pub struct Provenance<'a> {
    pub command: &'a str,
    pub preset: Option<&'a str>,
    pub parameter: Option<&'a str>,
    pub config: &'a RunConfig,
    pub overrides: &'a Overrides,
}

/// Hash of the configuration together with everything that modified it.
pub fn run_hash(p: &Provenance) -> String {
    let mut c = p.config.clone();
    p.overrides.apply(&mut c);
    let tag = format!("{}|{}|{}|{}", c.hash(), p.command, p.preset.unwrap_or(""), p.parameter.unwrap_or(""));
    use sha2::{Digest, Sha256};
    hex::encode(Sha256::digest(tag.as_bytes()))
}

/// Writes one CSV per series and `<label>.json` into `dir`; returns the paths.
pub fn write_outputs(dir: &Path, result: &PlanResult, prov: &Provenance) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut series = Vec::new();
    for s in &result.series {
        let name = csv_name(&result.label, &s.name);
        let path = dir.join(&name);
        fs::write(&path, csv_text(&s.points)?)?;
        written.push(path);
        let points = s
            .points
            .iter()
            .map(|p| {
                let hz = |w: f64| w / two_pi(1.0);
                let sc = &p.schedule;
                PointRecord {
                    result: p,
                    frequencies_hz: FrequenciesHz {
                        rabi: hz(sc.rabi),
                        detuning: hz(sc.detuning),
                        gate_detuning: hz(sc.gate_detuning),
                        carrier: hz(sc.carrier),
                        effective_carrier: hz(sc.effective_carrier),
                    },
                }
            })
            .collect();
        series.push(SeriesRecord { name: &s.name, csv: name, points });
    }
    let mut seeded = prov.config.clone();
    prov.overrides.apply(&mut seeded);
    let record = RunRecord {
        schema_version: SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION"),
        command: prov.command,
        preset: prov.preset,
        parameter: prov.parameter,
        config_hash: run_hash(prov),
        config: prov.config,
        overrides: prov.overrides,
        master_seed: seeded.ensemble.master_seed,
        series,
        wall_time_s: result.wall_time_s,
    };
    let path = dir.join(format!("{}.json", result.label));
    fs::write(&path, serde_json::to_string_pretty(&record)?)?;
    written.push(path);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controls::{solve_schedule, PhysicalParams, ScheduleRequest};

    fn point(value: f64, mean: f64) -> PointResult {
        let p = PhysicalParams::ytterbium(two_pi(207e3), 38.5);
        let s = solve_schedule(&p, &ScheduleRequest::new(two_pi(26.6e3), 1, 31, 0.0, std::f64::consts::PI / 8.0)).unwrap();
        PointResult {
            value,
            mean_fidelity: mean,
            stderr: 0.0,
            log10_infidelity: (mean < 1.0).then(|| (1.0 - mean).log10()),
            n_realizations: 1,
            seed: 4,
            schedule: s,
            fidelities: vec![mean],
            max_norm_drift: 0.0,
            steps: 10,
        }
    }

    #[test]
    fn csv_has_exact_columns() {
        let t = csv_text(&[point(34e3, 0.999), point(0.0, 1.0)]).unwrap();
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines[0], "value,mean_fidelity,stderr,log10_infidelity,n_realizations,seed");
        let f: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(&f[..3], &["34000", "0.999", "0"]);
        assert!((f[3].parse::<f64>().unwrap() + 3.0).abs() < 1e-12);
        assert_eq!(&f[4..], &["1", "4"]);
        assert_eq!(lines[2], "0,1,0,,1,4");
    }

    #[test]
    fn file_names() {
        assert_eq!(csv_name("run", ""), "run.csv");
        assert_eq!(csv_name("sweep", "schedule.carrier_hz"), "sweep_schedule.carrier_hz.csv");
        assert_eq!(csv_name("fig3", "right tau/x"), "fig3_right_tau_x.csv");
    }
}
