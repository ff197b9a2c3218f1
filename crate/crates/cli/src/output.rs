//! Result files: `results.csv`, `summary.json` and `figures/*.csv`.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::run::{loglog_slope, slope_x, GridReport, Outcome, ResultRow, RunReport};
use crate::suite::SuiteReport;
use crate::HarnessError;

pub const SLOPE_HEADER: [&str; 5] = ["grid_id", "variant", "log_n", "log_distance", "log_shape"];
pub const RATIO_HEADER: [&str; 3] = ["grid_id", "variant", "ratio"];

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct VariantSummary {
    pub rows: usize,
    pub errors: usize,
    pub distance_slope: Option<f64>,
    pub shape_slope: Option<f64>,
    pub ratio_min: Option<f64>,
    pub ratio_max: Option<f64>,
    pub conditions_passed: usize,
    pub conditions_failed: usize,
    pub dominated: usize,
    pub not_dominated: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct CheckSummary {
    pub records: usize,
    pub passed: usize,
    pub failed: usize,
    pub min_margin: Option<f64>,
    pub max_margin: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub schema_version: u32,
    pub scenario: &'static str,
    pub seed: u64,
    pub generated_at_unix: u64,
    pub grid_points: usize,
    pub rows: usize,
    pub hard_failures: usize,
    pub variants: BTreeMap<&'static str, VariantSummary>,
    pub checks: BTreeMap<String, CheckSummary>,
}

fn extend_range(slot: &mut Option<(f64, f64)>, v: f64) {
    if !v.is_finite() {
        return;
    }
    *slot = Some(match *slot {
        Some((lo, hi)) => (lo.min(v), hi.max(v)),
        None => (v, v),
    });
}

pub fn summarize_grid(report: &GridReport) -> BTreeMap<&'static str, VariantSummary> {
    let mut grouped: BTreeMap<&'static str, Vec<&ResultRow>> = BTreeMap::new();
    for row in &report.rows {
        grouped.entry(row.variant).or_default().push(row);
    }
    grouped
        .into_iter()
        .map(|(name, rows)| {
            let mut s = VariantSummary { rows: rows.len(), ..Default::default() };
            let mut ratio = None;
            let mut dist = Vec::new();
            let mut shape = Vec::new();
            for r in &rows {
                if !r.error.is_empty() {
                    s.errors += 1;
                }
                match r.conditions_pass {
                    Some(true) => s.conditions_passed += 1,
                    Some(false) => s.conditions_failed += 1,
                    None => {}
                }
                match r.dominated {
                    Some(true) => s.dominated += 1,
                    Some(false) => s.not_dominated += 1,
                    None => {}
                }
                if let Some(v) = r.ratio {
                    extend_range(&mut ratio, v);
                }
                let x = slope_x(r);
                if let Some(d) = r.distance {
                    dist.push((x, d));
                }
                if let Some(t) = r.total {
                    shape.push((x, t));
                }
            }
            s.distance_slope = loglog_slope(&dist);
            s.shape_slope = loglog_slope(&shape);
            s.ratio_min = ratio.map(|r| r.0);
            s.ratio_max = ratio.map(|r| r.1);
            (name, s)
        })
        .collect()
}

pub fn summarize_suite(report: &SuiteReport) -> BTreeMap<String, CheckSummary> {
    let mut out: BTreeMap<String, CheckSummary> = BTreeMap::new();
    let mut ranges: BTreeMap<String, Option<(f64, f64)>> = BTreeMap::new();
    for row in report.rows() {
        let key = if row.check.is_empty() {
            format!("{}:error", row.family)
        } else {
            format!("{}:{}", row.family, row.check)
        };
        let s = out.entry(key.clone()).or_default();
        s.records += 1;
        if row.pass {
            s.passed += 1;
        } else {
            s.failed += 1;
        }
        if let Some(m) = row.margin {
            extend_range(ranges.entry(key).or_default(), m);
        }
    }
    for (key, range) in ranges {
        if let (Some(s), Some((lo, hi))) = (out.get_mut(&key), range) {
            s.min_margin = Some(lo);
            s.max_margin = Some(hi);
        }
    }
    out
}

pub fn summary(report: &RunReport) -> Summary {
    let generated_at_unix = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let (grid_points, rows, variants, checks) = match &report.outcome {
        Outcome::Grid(g) => (g.points.len(), g.rows.len(), summarize_grid(g), BTreeMap::new()),
        Outcome::Suite(s) => (0, s.entries.len(), BTreeMap::new(), summarize_suite(s)),
    };
    Summary {
        schema_version: crate::config::SCHEMA_VERSION,
        scenario: report.scenario.name(),
        seed: report.seed,
        generated_at_unix,
        grid_points,
        rows,
        hard_failures: report.hard_failures(),
        variants,
        checks,
    }
}

fn write_csv<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<(), HarnessError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub const RESULT_HEADER: [&str; 22] = [
    "grid_id",
    "N",
    "summands",
    "n",
    "p",
    "w",
    "variant",
    "approximant",
    "h",
    "distance",
    "factor",
    "factor_label",
    "breakdown",
    "total",
    "ratio",
    "conditions_pass",
    "failed_conditions",
    "unit_constants",
    "gamma_policy",
    "reference_only",
    "dominated",
    "error",
];

pub const SUITE_HEADER: [&str; 10] = [
    "family", "instance", "check", "kind", "lhs", "rhs", "margin", "pass", "inputs", "error",
];

/// Writes `results.csv` for a grid or suite report.
pub fn write_results(report: &RunReport, dir: &Path) -> Result<(), HarnessError> {
    fs::create_dir_all(dir)?;
    let path = dir.join("results.csv");
    match &report.outcome {
        Outcome::Grid(g) => write_csv(&path, &RESULT_HEADER, &g.rows),
        Outcome::Suite(s) => write_csv(&path, &SUITE_HEADER, &s.rows()),
    }
}

/// Shape rows (no distances) as CSV on any writer.
pub fn write_shapes<W: Write>(report: &GridReport, out: W) -> Result<(), HarnessError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(RESULT_HEADER)?;
    for r in &report.rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct SlopePoint {
    grid_id: usize,
    variant: &'static str,
    log_n: f64,
    log_distance: Option<f64>,
    log_shape: Option<f64>,
}

#[derive(Serialize)]
struct RatioPoint {
    grid_id: usize,
    variant: &'static str,
    ratio: f64,
}

fn positive_ln(v: Option<f64>) -> Option<f64> {
    v.filter(|x| x.is_finite() && *x > 0.0).map(f64::ln)
}

/// Per-figure CSV files under `figures/`; a report without grid rows gives
/// header-only files.
pub fn emit_plotdata(report: &RunReport, dir: &Path) -> Result<(), HarnessError> {
    let figures = dir.join("figures");
    fs::create_dir_all(&figures)?;
    let rows: &[ResultRow] = match &report.outcome {
        Outcome::Grid(g) => &g.rows,
        Outcome::Suite(_) => &[],
    };
    let slope: Vec<SlopePoint> = rows
        .iter()
        .filter(|r| r.error.is_empty())
        .map(|r| SlopePoint {
            grid_id: r.grid_id,
            variant: r.variant,
            log_n: slope_x(r).ln(),
            log_distance: positive_ln(r.distance),
            log_shape: positive_ln(r.total),
        })
        .collect();
    let ratio: Vec<RatioPoint> = rows
        .iter()
        .filter_map(|r| {
            r.ratio.map(|ratio| RatioPoint {
                grid_id: r.grid_id,
                variant: r.variant,
                ratio,
            })
        })
        .collect();
    write_csv(&figures.join("slope.csv"), &SLOPE_HEADER, &slope)?;
    write_csv(&figures.join("ratio.csv"), &RATIO_HEADER, &ratio)?;
    Ok(())
}

/// All output files of a run.
pub fn write_all(report: &RunReport, dir: &Path) -> Result<Summary, HarnessError> {
    write_results(report, dir)?;
    emit_plotdata(report, dir)?;
    let s = summary(report);
    let mut f = fs::File::create(dir.join("summary.json"))?;
    serde_json::to_writer_pretty(&mut f, &s)?;
    f.write_all(b"\n")?;
    Ok(s)
}
