//! File formats: maps, frames and series manifests as JSON (`"format": "qmap/1"`),
//! CSV edge lists as a convenience import, metric reports as JSON or CSV, and
//! SVG plots of a metric series.
//!
//! Map files look like
//!
//! ```json
//! { "format": "qmap/1", "map_id": "m", "period": "1990",
//!   "concepts": [{ "id": "a", "label": "A", "role": "plain" }],
//!   "links": [{ "source": "a", "target": "b", "sign": "positive" }] }
//! ```
//!
//! and frame files
//!
//! ```json
//! { "format": "qmap/1", "frame_id": "f", "alternatives": ["EA1"],
//!   "consequences": ["P1"], "relations": [["EA1", "P1"]] }
//! ```
//!
//! Unknown fields are rejected. Writers emit pretty-printed JSON with a fixed
//! key order and a trailing newline, so equal values give equal bytes.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::MapMetrics;
use crate::model::{CausalLink, CognitiveMap, Concept, DecisionFrame, Sign, Warning};
use crate::series::{Baseline, DisruptionReport, Flag, Metric, MetricSeries};

pub const FORMAT_TAG: &str = "qmap/1";

#[derive(Debug, Error)]
pub enum CodecError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}:{column}: {message}")]
    Schema {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: {field}: {message}")]
    Invalid {
        path: PathBuf,
        field: String,
        message: String,
    },
}

impl CodecError {
    fn invalid(path: &Path, field: impl Into<String>, message: impl Into<String>) -> Self {
        CodecError::Invalid {
            path: path.to_path_buf(),
            field: field.into(),
            message: message.into(),
        }
    }
}

/// A loaded value with the non-fatal findings made while reading it.
#[derive(Debug, Clone, PartialEq)]
pub struct Loaded<T> {
    pub value: T,
    pub warnings: Vec<Warning>,
}

fn read(path: &Path) -> Result<String, CodecError> {
    fs::read_to_string(path).map_err(|source| CodecError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, contents: &str) -> Result<(), CodecError> {
    fs::write(path, contents).map_err(|source| CodecError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_json<'a, T: Deserialize<'a>>(path: &Path, text: &'a str) -> Result<T, CodecError> {
    serde_json::from_str(text).map_err(|e| CodecError::Schema {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

fn check_format(path: &Path, format: &Option<String>) -> Result<(), CodecError> {
    match format.as_deref() {
        None | Some(FORMAT_TAG) => Ok(()),
        Some(other) => Err(CodecError::invalid(
            path,
            "format",
            format!("unsupported format `{other}` (expected `{FORMAT_TAG}`)"),
        )),
    }
}

fn to_pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MapFile {
    #[serde(default)]
    format: Option<String>,
    map_id: String,
    period: Option<String>,
    concepts: Vec<Concept>,
    links: Vec<CausalLink>,
}

/// Parses a map from JSON text. Repeated links are dropped with a warning;
/// other map invariants are left to [`crate::model::validate_map`].
pub fn parse_map(path: &Path, text: &str) -> Result<Loaded<CognitiveMap>, CodecError> {
    let file: MapFile = parse_json(path, text)?;
    check_format(path, &file.format)?;
    let mut map = CognitiveMap {
        map_id: file.map_id,
        period: file.period,
        concepts: file.concepts,
        links: file.links,
    };
    let warnings = map
        .dedup_links()
        .into_iter()
        .map(|l| Warning::DuplicateLink {
            source: l.source,
            target: l.target,
        })
        .collect();
    Ok(Loaded { value: map, warnings })
}

/// Loads a JSON map, or a CSV edge list when the extension is `.csv`.
pub fn load_map(path: &Path) -> Result<Loaded<CognitiveMap>, CodecError> {
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        return load_edge_list(path);
    }
    parse_map(path, &read(path)?)
}

pub fn map_to_json(map: &CognitiveMap) -> String {
    to_pretty(&MapFile {
        format: Some(FORMAT_TAG.into()),
        map_id: map.map_id.clone(),
        period: map.period.clone(),
        concepts: map.concepts.clone(),
        links: map.links.clone(),
    })
}

pub fn save_map(map: &CognitiveMap, path: &Path) -> Result<(), CodecError> {
    write(path, &map_to_json(map))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeRow {
    source: String,
    target: String,
    #[serde(default)]
    sign: Option<String>,
}

fn parse_sign(raw: Option<&str>) -> Option<Sign> {
    match raw.map(str::trim).unwrap_or("") {
        "" | "unsigned" | "0" => Some(Sign::Unsigned),
        "positive" | "+" | "+1" | "1" => Some(Sign::Positive),
        "negative" | "-" | "-1" => Some(Sign::Negative),
        _ => None,
    }
}

/// Reads a `source,target[,sign]` edge list with a header row. Concepts are
/// created in order of first appearance with their id as label; the map id is
/// the file stem.
pub fn load_edge_list(path: &Path) -> Result<Loaded<CognitiveMap>, CodecError> {
    let text = read(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut map = CognitiveMap::new(
        path.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default(),
    );
    let mut seen = HashSet::new();
    for (i, row) in reader.deserialize::<EdgeRow>().enumerate() {
        let row = row.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            CodecError::Schema {
                path: path.to_path_buf(),
                line,
                column: 0,
                message: e.to_string(),
            }
        })?;
        let sign = parse_sign(row.sign.as_deref()).ok_or_else(|| {
            CodecError::invalid(path, format!("row {}.sign", i + 1), "expected positive|negative|unsigned")
        })?;
        for id in [&row.source, &row.target] {
            if seen.insert(id.clone()) {
                map.concepts.push(Concept::plain(id.clone()));
            }
        }
        map.links.push(CausalLink::new(row.source, row.target, sign));
    }
    let warnings = map
        .dedup_links()
        .into_iter()
        .map(|l| Warning::DuplicateLink {
            source: l.source,
            target: l.target,
        })
        .collect();
    Ok(Loaded { value: map, warnings })
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FrameFile {
    #[serde(default)]
    format: Option<String>,
    frame_id: String,
    alternatives: Vec<String>,
    consequences: Vec<String>,
    relations: Vec<(String, String)>,
}

pub fn parse_frame(path: &Path, text: &str) -> Result<Loaded<DecisionFrame>, CodecError> {
    let file: FrameFile = parse_json(path, text)?;
    check_format(path, &file.format)?;
    let alternatives: HashSet<&str> = file.alternatives.iter().map(String::as_str).collect();
    let consequences: HashSet<&str> = file.consequences.iter().map(String::as_str).collect();
    for (i, (ea, pc)) in file.relations.iter().enumerate() {
        if !alternatives.contains(ea.as_str()) {
            return Err(CodecError::invalid(
                path,
                format!("relations[{i}][0]"),
                format!("undeclared alternative `{ea}`"),
            ));
        }
        if !consequences.contains(pc.as_str()) {
            return Err(CodecError::invalid(
                path,
                format!("relations[{i}][1]"),
                format!("undeclared consequence `{pc}`"),
            ));
        }
    }
    let (frame, warnings) = DecisionFrame::new(
        file.frame_id,
        file.alternatives,
        file.consequences,
        file.relations,
    )
    .map_err(|e| CodecError::invalid(path, "frame", e.to_string()))?;
    Ok(Loaded { value: frame, warnings })
}

pub fn load_frame(path: &Path) -> Result<Loaded<DecisionFrame>, CodecError> {
    parse_frame(path, &read(path)?)
}

pub fn frame_to_json(frame: &DecisionFrame) -> String {
    to_pretty(&FrameFile {
        format: Some(FORMAT_TAG.into()),
        frame_id: frame.frame_id.clone(),
        alternatives: frame.alternatives.iter().map(|c| c.id.clone()).collect(),
        consequences: frame.consequences.iter().map(|c| c.id.clone()).collect(),
        relations: frame.relations.iter().cloned().collect(),
    })
}

pub fn save_frame(frame: &DecisionFrame, path: &Path) -> Result<(), CodecError> {
    write(path, &frame_to_json(frame))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub period: String,
    pub map: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame: Option<PathBuf>,
}

/// Ordered periods, each pointing at a map file and optionally a frame file.
/// Relative paths are resolved against the manifest's directory on load.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeriesManifest {
    pub entries: Vec<ManifestEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestFile {
    #[serde(default)]
    format: Option<String>,
    entries: Vec<ManifestEntry>,
}

pub fn load_series(path: &Path) -> Result<SeriesManifest, CodecError> {
    let text = read(path)?;
    let file: ManifestFile = parse_json(path, &text)?;
    check_format(path, &file.format)?;
    let base = path.parent().unwrap_or(Path::new(""));
    let mut periods = HashSet::new();
    let mut entries = Vec::with_capacity(file.entries.len());
    for (i, mut e) in file.entries.into_iter().enumerate() {
        if e.period.is_empty() {
            return Err(CodecError::invalid(path, format!("entries[{i}].period"), "empty period label"));
        }
        if !periods.insert(e.period.clone()) {
            return Err(CodecError::invalid(
                path,
                format!("entries[{i}].period"),
                format!("duplicate period `{}`", e.period),
            ));
        }
        if e.map.as_os_str().is_empty() {
            return Err(CodecError::invalid(path, format!("entries[{i}].map"), "empty path"));
        }
        if e.frame.as_ref().is_some_and(|f| f.as_os_str().is_empty()) {
            return Err(CodecError::invalid(path, format!("entries[{i}].frame"), "empty path"));
        }
        e.map = base.join(&e.map);
        e.frame = e.frame.map(|f| base.join(f));
        entries.push(e);
    }
    Ok(SeriesManifest { entries })
}

/// Writes the manifest as given; paths are stored verbatim.
pub fn save_series(manifest: &SeriesManifest, path: &Path) -> Result<(), CodecError> {
    write(
        path,
        &to_pretty(&ManifestFile {
            format: Some(FORMAT_TAG.into()),
            entries: manifest.entries.clone(),
        }),
    )
}

/// Writes each map as `<period>.json` (map id when unlabelled) under `dir`
/// plus a `manifest.json` listing them in order; returns the manifest path.
pub fn write_series_bundle(maps: &[CognitiveMap], dir: &Path) -> Result<PathBuf, CodecError> {
    fs::create_dir_all(dir).map_err(|source| CodecError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut entries = Vec::with_capacity(maps.len());
    for map in maps {
        let period = map.period.clone().unwrap_or_else(|| map.map_id.clone());
        let file: String = period
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
            .collect();
        let name = PathBuf::from(format!("{file}.json"));
        save_map(map, &dir.join(&name))?;
        entries.push(ManifestEntry {
            period,
            map: name,
            frame: None,
        });
    }
    let manifest = dir.join("manifest.json");
    save_series(&SeriesManifest { entries }, &manifest)?;
    Ok(manifest)
}

/// Formats with six significant digits, trimming trailing zeros.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific notation");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-7..=15).contains(&exp) {
        let m = mantissa.trim_end_matches('0').trim_end_matches('.');
        return format!("{m}e{exp}");
    }
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    let point = 1 + exp;
    let mut body = if point <= 0 {
        format!("0.{}{digits}", "0".repeat((-point) as usize))
    } else if point as usize >= digits.len() {
        format!("{digits}{}", "0".repeat(point as usize - digits.len()))
    } else {
        format!("{}.{}", &digits[..point as usize], &digits[point as usize..])
    };
    if body.contains('.') {
        body = body.trim_end_matches('0').trim_end_matches('.').to_owned();
    }
    if negative {
        body.insert(0, '-');
    }
    body
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            other => Err(format!("unknown format `{other}` (expected json|csv)")),
        }
    }
}

impl ReportFormat {
    /// Guesses the format from a file extension.
    pub fn from_path(path: &Path) -> Option<Self> {
        path.extension()?.to_str()?.to_ascii_lowercase().parse().ok()
    }
}

/// What a report can carry.
#[derive(Debug, Clone, PartialEq)]
pub enum Report {
    Map {
        period: String,
        metrics: MapMetrics,
        complexity: Option<f64>,
    },
    Series {
        series: MetricSeries,
        baseline: Baseline,
        disruption: DisruptionReport,
    },
}

/// Fixed CSV column order.
pub const CSV_COLUMNS: [&str; 8] = [
    "period",
    "n_concepts",
    "n_links",
    "ratio",
    "density",
    "avg_closeness",
    "complexity",
    "flags",
];

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub period: String,
    pub n_concepts: usize,
    pub n_links: usize,
    pub ratio: Option<f64>,
    pub density: Option<f64>,
    pub avg_closeness: Option<f64>,
    pub reachable_pair_fraction: Option<f64>,
    pub complexity: Option<f64>,
    pub flags: Vec<Metric>,
}

impl ReportRow {
    fn new(period: &str, m: &MapMetrics, complexity: Option<f64>, flags: Vec<Metric>) -> Self {
        Self {
            period: period.to_owned(),
            n_concepts: m.num_concepts,
            n_links: m.num_links,
            ratio: m.links_per_concept,
            density: m.density,
            avg_closeness: m.avg_closeness,
            reachable_pair_fraction: m.reachable_pair_fraction,
            complexity,
            flags,
        }
    }
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct JsonReport {
    pub format: String,
    pub kind: String,
    pub rows: Vec<ReportRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub averages: Option<std::collections::BTreeMap<Metric, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flags: Option<Vec<Flag>>,
}

impl Report {
    pub fn rows(&self) -> Vec<ReportRow> {
        match self {
            Report::Map {
                period,
                metrics,
                complexity,
            } => vec![ReportRow::new(period, metrics, *complexity, Vec::new())],
            Report::Series {
                series, disruption, ..
            } => {
                let mut flagged: HashMap<&str, Vec<Metric>> = HashMap::new();
                for f in &disruption.flags {
                    flagged.entry(f.period.as_str()).or_default().push(f.metric);
                }
                series
                    .entries()
                    .iter()
                    .map(|e| {
                        let flags = flagged.remove(e.period.as_str()).unwrap_or_default();
                        ReportRow::new(&e.period, &e.metrics, e.complexity, flags)
                    })
                    .collect()
            }
        }
    }

    pub fn to_json_report(&self) -> JsonReport {
        let rows = self.rows();
        match self {
            Report::Map { .. } => JsonReport {
                format: FORMAT_TAG.into(),
                kind: "map".into(),
                rows,
                averages: None,
                threshold: None,
                baseline: None,
                flags: None,
            },
            Report::Series {
                series,
                baseline,
                disruption,
            } => JsonReport {
                format: FORMAT_TAG.into(),
                kind: "series".into(),
                rows,
                averages: Some(series.averages().clone()),
                threshold: Some(disruption.threshold),
                baseline: Some(baseline.to_string()),
                flags: Some(disruption.flags.clone()),
            },
        }
    }

    /// Floats keep full precision in JSON and six significant digits in CSV.
    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Json => to_pretty(&self.to_json_report()),
            ReportFormat::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(CSV_COLUMNS).expect("in-memory write");
                let opt = |x: Option<f64>| x.map(format_sig6).unwrap_or_default();
                for r in self.rows() {
                    let flags: Vec<&str> = r.flags.iter().map(|m| m.name()).collect();
                    w.write_record([
                        r.period.clone(),
                        r.n_concepts.to_string(),
                        r.n_links.to_string(),
                        opt(r.ratio),
                        opt(r.density),
                        opt(r.avg_closeness),
                        opt(r.complexity),
                        flags.join(";"),
                    ])
                    .expect("in-memory write");
                }
                String::from_utf8(w.into_inner().expect("flush to memory")).expect("utf-8 fields")
            }
        }
    }
}

pub fn write_report(report: &Report, format: ReportFormat, path: &Path) -> Result<(), CodecError> {
    write(path, &report.render(format))
}

const PLOT_WIDTH: f64 = 800.0;
const PLOT_HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;

fn polyline(
    out: &mut String,
    class: &str,
    metric: &str,
    style: &str,
    points: &[(f64, f64)],
) {
    let pts: Vec<String> = points.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
    let _ = writeln!(
        out,
        r#"  <polyline class="{class}" data-metric="{metric}" fill="none" {style} points="{}"/>"#,
        pts.join(" ")
    );
}

/// SVG chart of concepts and links per period, each with a dotted line at its
/// overall average, plus the links-per-concept ratio as a thick line on the
/// right-hand axis.
pub fn render_plot(series: &MetricSeries) -> String {
    let n = series.len();
    let inner_w = PLOT_WIDTH - 2.0 * MARGIN;
    let inner_h = PLOT_HEIGHT - 2.0 * MARGIN;
    let x = |t: usize| {
        if n <= 1 {
            MARGIN + inner_w / 2.0
        } else {
            MARGIN + inner_w * t as f64 / (n - 1) as f64
        }
    };
    let scale_of = |values: &[Option<f64>]| {
        let max = values.iter().flatten().fold(0.0f64, |a, &b| a.max(b));
        if max > 0.0 {
            max * 1.1
        } else {
            1.0
        }
    };
    let concepts = series.values(Metric::NumConcepts);
    let links = series.values(Metric::NumLinks);
    let ratio = series.values(Metric::LinksPerConcept);
    let left_max = scale_of(&concepts).max(scale_of(&links));
    let right_max = scale_of(&ratio);
    let y = |v: f64, max: f64| PLOT_HEIGHT - MARGIN - inner_h * v / max;
    let line = |values: &[Option<f64>], max: f64| -> Vec<(f64, f64)> {
        values
            .iter()
            .enumerate()
            .filter_map(|(t, v)| v.map(|v| (x(t), y(v, max))))
            .collect()
    };
    let flat = |avg: Option<f64>, max: f64| -> Vec<(f64, f64)> {
        avg.map(|a| (0..n).map(|t| (x(t), y(a, max))).collect())
            .unwrap_or_default()
    };

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{PLOT_WIDTH}" height="{PLOT_HEIGHT}" viewBox="0 0 {PLOT_WIDTH} {PLOT_HEIGHT}">"#
    );
    out.push_str("  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    let (x0, x1, y0, y1) = (MARGIN, PLOT_WIDTH - MARGIN, PLOT_HEIGHT - MARGIN, MARGIN);
    let _ = writeln!(
        out,
        r#"  <path class="axes" d="M{x0},{y1} L{x0},{y0} L{x1},{y0} L{x1},{y1}" stroke="gray" fill="none"/>"#
    );
    for (t, e) in series.entries().iter().enumerate() {
        let _ = writeln!(
            out,
            r#"  <text x="{:.2}" y="{:.2}" font-size="11" text-anchor="middle">{}</text>"#,
            x(t),
            y0 + 18.0,
            xml_escape(&e.period)
        );
    }
    let _ = writeln!(
        out,
        r#"  <text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{}</text>"#,
        x0 - 6.0,
        y1 + 4.0,
        format_sig6(left_max)
    );
    let _ = writeln!(
        out,
        r#"  <text x="{:.2}" y="{:.2}" font-size="11">{}</text>"#,
        x1 + 6.0,
        y1 + 4.0,
        format_sig6(right_max)
    );

    let black = r#"stroke="black" stroke-width="1.5""#;
    let green = r#"stroke="green" stroke-width="1.5""#;
    let black_dot = r#"stroke="black" stroke-width="1" stroke-dasharray="2,4""#;
    let green_dot = r#"stroke="green" stroke-width="1" stroke-dasharray="2,4""#;
    polyline(&mut out, "series", "n_concepts", black, &line(&concepts, left_max));
    polyline(
        &mut out,
        "average",
        "n_concepts",
        black_dot,
        &flat(series.average(Metric::NumConcepts), left_max),
    );
    polyline(&mut out, "series", "n_links", green, &line(&links, left_max));
    polyline(
        &mut out,
        "average",
        "n_links",
        green_dot,
        &flat(series.average(Metric::NumLinks), left_max),
    );
    polyline(
        &mut out,
        "series",
        "ratio",
        r#"stroke="black" stroke-width="4""#,
        &line(&ratio, right_max),
    );
    out.push_str("</svg>\n");
    out
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

pub fn write_plot(series: &MetricSeries, path: &Path) -> Result<(), CodecError> {
    write(path, &render_plot(series))
}
