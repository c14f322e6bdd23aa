//! End-to-end pipeline report, file emission, and run configuration.
//!
//! The report integrates the per-angle multiplicity profiles once over
//! a composite grid of the full angle circle, bucketed into the slope
//! cones `J_j` plus the out-of-cone remainder, and derives every row
//! quantity from that single pass.  Cut-offs that involve `log n` use
//! base 4 throughout, matching the 4-adic scale ladder; the emitted
//! summary carries `log_base` so consumers can re-slice rows.

use crate::cantor::build_generation;
use crate::error::{Error, Result};
use crate::favard::projection_profile;
use crate::noodle::Noodle;
use crate::numeric::pairwise_sum;
use crate::projection::{cone_interval, Direction};
use crate::rho::in_pipeline_range;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::ops::Range;
use std::path::Path;

/// Grid controls for the pipeline report.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BvConfig {
    /// Target node count for the whole circle; segments get shares
    /// proportional to their width.
    pub background_nodes: usize,
    /// Every cone gets at least this many nodes, however narrow.
    pub min_cone_nodes: usize,
}

impl Default for BvConfig {
    fn default() -> Self {
        BvConfig {
            background_nodes: 2048,
            min_cone_nodes: 64,
        }
    }
}

/// Per-cone quantities of the pipeline.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BVRow {
    pub j: u32,
    /// Cone integral of the projection mass.
    pub m1: f64,
    /// Cone integral of the squared multiplicity.
    pub m2: f64,
    /// Cone integral of the support length.
    pub e: f64,
    /// The Cauchy-Schwarz floor `m1^2 / m2` for `e`.
    pub cauchy_lb: f64,
    /// True when `3 < j < log4(n)`.
    pub in_range: bool,
}

/// Report aggregates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BvSummary {
    pub n: u32,
    pub noodle: String,
    /// Favard average over the full circle.
    pub favard: f64,
    /// `favard * n / ln(n)`, the normalized trend score.
    pub score: f64,
    /// Sum of `e` over rows with `in_range` set.
    pub sum_e_in_range: f64,
    /// Sum of `e` over all rows.
    pub sum_e_all: f64,
    /// Support integral over the angles outside every cone.
    pub out_of_cone: f64,
    /// Base of the logarithm in the `j` range cut (4).
    pub log_base: u32,
}

/// Resolved run parameters echoed into emitted files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub command: String,
    pub n: u32,
    pub noodle: String,
    pub background_nodes: usize,
    pub min_cone_nodes: usize,
}

/// The pipeline report: one row per cone plus aggregates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BVReport {
    pub config: ReportConfig,
    pub rows: Vec<BVRow>,
    pub summary: BvSummary,
}

enum SegmentKind {
    Cone(u32),
    Outside,
}

/// Runs the pipeline for generation `n` under the noodle `g`.
///
/// One parallel pass evaluates (support, mass, second moment) of the
/// sheared-projection profile at every node of a composite midpoint
/// grid: the slice below the narrowest cone, the cones `J_n .. J_1`,
/// and the remainder of the circle, all in the special frame.  Rows
/// for `j = 1..n` and the summary are assembled from those buckets, so
/// cone rows and the Favard value come from the same data.
pub fn bv_report(n: u32, g: &Noodle, cfg: &BvConfig) -> Result<BVReport> {
    if n < 2 {
        return Err(Error::validation(format!(
            "the pipeline needs n >= 2 (the cones are empty below that), got {n}"
        )));
    }
    if cfg.background_nodes < 16 {
        return Err(Error::validation(format!(
            "background grid needs at least 16 nodes, got {}",
            cfg.background_nodes
        )));
    }
    if cfg.min_cone_nodes < 4 {
        return Err(Error::validation(format!(
            "cones need at least 4 nodes each, got {}",
            cfg.min_cone_nodes
        )));
    }
    let ks = build_generation(n)?;

    // composite segments in ascending special-frame angle
    let mut segments: Vec<(f64, f64, SegmentKind)> = Vec::with_capacity(n as usize + 2);
    segments.push((0.0, cone_interval(n as i32).lo, SegmentKind::Outside));
    for j in (1..=n).rev() {
        let c = cone_interval(j as i32);
        segments.push((c.lo, c.hi, SegmentKind::Cone(j)));
    }
    segments.push((cone_interval(1).hi, TAU, SegmentKind::Outside));

    let mut nodes: Vec<f64> = Vec::new();
    let mut spans: Vec<(Range<usize>, f64)> = Vec::with_capacity(segments.len());
    for (lo, hi, kind) in &segments {
        let width = hi - lo;
        let share = (width / TAU * cfg.background_nodes as f64).round() as usize;
        let m = match kind {
            SegmentKind::Cone(_) => share.max(cfg.min_cone_nodes),
            SegmentKind::Outside => share.max(8),
        };
        let start = nodes.len();
        let h = width / m as f64;
        for i in 0..m {
            nodes.push(lo + (i as f64 + 0.5) * h);
        }
        spans.push((start..nodes.len(), h));
    }

    let vals: Vec<(f64, f64, f64)> = nodes
        .par_iter()
        .map(|&phi| {
            let profile = projection_profile(&ks, g, Direction::special(phi));
            (
                profile.support_length(),
                profile.mass(),
                profile.second_moment(),
            )
        })
        .collect();
    let integrate = |range: &Range<usize>, h: f64, pick: fn(&(f64, f64, f64)) -> f64| -> f64 {
        let slice: Vec<f64> = vals[range.clone()].iter().map(pick).collect();
        pairwise_sum(&slice) * h
    };

    let mut rows: Vec<BVRow> = Vec::with_capacity(n as usize);
    let mut out_of_cone = 0.0;
    let mut circle_support = 0.0;
    for ((range, h), (_, _, kind)) in spans.iter().zip(&segments) {
        let e = integrate(range, *h, |v| v.0);
        circle_support += e;
        match kind {
            SegmentKind::Cone(j) => {
                let m1 = integrate(range, *h, |v| v.1);
                let m2 = integrate(range, *h, |v| v.2);
                rows.push(BVRow {
                    j: *j,
                    m1,
                    m2,
                    e,
                    cauchy_lb: m1 * m1 / m2,
                    in_range: in_pipeline_range(*j, n),
                });
            }
            SegmentKind::Outside => out_of_cone += e,
        }
    }
    rows.sort_by_key(|r| r.j);

    let favard = circle_support / TAU;
    let sum_e_all = pairwise_sum(&rows.iter().map(|r| r.e).collect::<Vec<_>>());
    let sum_e_in_range = pairwise_sum(
        &rows
            .iter()
            .filter(|r| r.in_range)
            .map(|r| r.e)
            .collect::<Vec<_>>(),
    );
    Ok(BVReport {
        config: ReportConfig {
            command: "verify-bv".into(),
            n,
            noodle: g.spec_string(),
            background_nodes: cfg.background_nodes,
            min_cone_nodes: cfg.min_cone_nodes,
        },
        rows,
        summary: BvSummary {
            n,
            noodle: g.spec_string(),
            favard,
            score: favard * n as f64 / (n as f64).ln(),
            sum_e_in_range,
            sum_e_all,
            out_of_cone,
            log_base: 4,
        },
    })
}

/// Output format for emitted reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<ReportFormat> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::validation(format!(
                "unknown report format `{other}` (expected csv or json)"
            ))),
        }
    }
}

/// The JSON emission envelope; deserializable for round-trip checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmittedReport {
    pub schema_version: u32,
    pub config: ReportConfig,
    pub rows: Vec<BVRow>,
    pub summary: BvSummary,
}

/// CSV body of a report: header plus one line per row.
///
/// Floats are printed with 17 significant digits, enough to reparse
/// bit-for-bit.
pub fn report_csv(report: &BVReport) -> String {
    let mut s = String::from("j,m1,m2,e,cauchy_lb,in_range\n");
    for row in &report.rows {
        writeln!(
            s,
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{}",
            row.j, row.m1, row.m2, row.e, row.cauchy_lb, row.in_range
        )
        .expect("string write");
    }
    s
}

/// JSON body of a report, schema version 1.
pub fn report_json(report: &BVReport) -> String {
    let emitted = EmittedReport {
        schema_version: 1,
        config: report.config.clone(),
        rows: report.rows.clone(),
        summary: report.summary.clone(),
    };
    let mut text = serde_json::to_string_pretty(&emitted).expect("report serialization");
    text.push('\n');
    text
}

/// Writes a report to `path` in the chosen format.
pub fn emit_report(report: &BVReport, path: &Path, format: ReportFormat) -> Result<()> {
    let text = match format {
        ReportFormat::Csv => report_csv(report),
        ReportFormat::Json => report_json(report),
    };
    std::fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))
}

const CONFIG_KEYS: &[&str] = &[
    "n",
    "noodle",
    "angles",
    "tau-steps",
    "L",
    "r",
    "samples",
    "seed",
    "pairs",
    "exact",
    "quadrature",
    "theta",
    "frame",
    "out",
    "format",
    "min-cone-nodes",
];

/// Flat key=value run configuration; command-line flags override it.
#[derive(Clone, Debug, Default)]
pub struct RunConfig {
    values: BTreeMap<String, String>,
}

impl RunConfig {
    /// Loads `key = value` lines; `#` starts a comment, blanks ignored.
    /// Keys outside the known set are rejected so typos surface.
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let mut values = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::parse(format!(
                    "{}:{}: expected key=value, got `{raw}`",
                    path.display(),
                    idx + 1
                ))
            })?;
            let key = key.trim();
            if !CONFIG_KEYS.contains(&key) {
                return Err(Error::parse(format!(
                    "{}:{}: unknown config key `{key}`",
                    path.display(),
                    idx + 1
                )));
            }
            values.insert(key.to_string(), value.trim().to_string());
        }
        Ok(RunConfig { values })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Parses the value under `key`, if present.
    pub fn parsed<T>(&self, key: &str) -> Result<Option<T>>
    where
        T: std::str::FromStr,
        T::Err: std::fmt::Display,
    {
        match self.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|e| {
                Error::parse(format!("config key `{key}`: bad value `{raw}`: {e}"))
            }),
        }
    }
}
