//! Metric time series over an ordered sequence of maps, and detection of
//! sharp drops between periods.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::{map_metrics, MapMetrics, MetricOptions};
use crate::model::{to_simplicial_family, CognitiveMap, DecisionFrame};
use crate::qanalysis::{complexity_with, Convention};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeriesError {
    #[error("a series needs at least {0} period(s)")]
    TooShort(usize),
    #[error("duplicate period label `{0}`")]
    DuplicatePeriod(String),
    #[error("threshold {0} outside (0, 1)")]
    Threshold(f64),
    #[error("invalid baseline: {0}")]
    Baseline(String),
}

/// Metrics tracked per period. Ordering follows the metric name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Metric {
    #[serde(rename = "avg_closeness")]
    AvgCloseness,
    #[serde(rename = "complexity")]
    Complexity,
    #[serde(rename = "density")]
    Density,
    #[serde(rename = "n_concepts")]
    NumConcepts,
    #[serde(rename = "n_links")]
    NumLinks,
    #[serde(rename = "ratio")]
    LinksPerConcept,
}

impl Metric {
    pub const ALL: [Metric; 6] = [
        Metric::AvgCloseness,
        Metric::Complexity,
        Metric::Density,
        Metric::NumConcepts,
        Metric::NumLinks,
        Metric::LinksPerConcept,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::AvgCloseness => "avg_closeness",
            Metric::Complexity => "complexity",
            Metric::Density => "density",
            Metric::NumConcepts => "n_concepts",
            Metric::NumLinks => "n_links",
            Metric::LinksPerConcept => "ratio",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesEntry {
    pub period: String,
    pub metrics: MapMetrics,
    pub complexity: Option<f64>,
}

impl SeriesEntry {
    pub fn value(&self, metric: Metric) -> Option<f64> {
        match metric {
            Metric::NumConcepts => Some(self.metrics.num_concepts as f64),
            Metric::NumLinks => Some(self.metrics.num_links as f64),
            Metric::LinksPerConcept => self.metrics.links_per_concept,
            Metric::Density => self.metrics.density,
            Metric::AvgCloseness => self.metrics.avg_closeness,
            Metric::Complexity => self.complexity,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSeries {
    entries: Vec<SeriesEntry>,
    /// Mean of each metric over the periods where it is defined.
    averages: BTreeMap<Metric, f64>,
}

impl MetricSeries {
    /// Wraps per-period records, computing the overall averages.
    pub fn from_entries(entries: Vec<SeriesEntry>) -> Result<Self, SeriesError> {
        if entries.is_empty() {
            return Err(SeriesError::TooShort(1));
        }
        let mut seen = HashSet::new();
        for e in &entries {
            if !seen.insert(e.period.as_str()) {
                return Err(SeriesError::DuplicatePeriod(e.period.clone()));
            }
        }
        let averages = Metric::ALL
            .iter()
            .filter_map(|&m| {
                let values: Vec<f64> = entries.iter().filter_map(|e| e.value(m)).collect();
                (!values.is_empty()).then(|| (m, values.iter().sum::<f64>() / values.len() as f64))
            })
            .collect();
        Ok(Self { entries, averages })
    }

    pub fn entries(&self) -> &[SeriesEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn average(&self, metric: Metric) -> Option<f64> {
        self.averages.get(&metric).copied()
    }

    pub fn averages(&self) -> &BTreeMap<Metric, f64> {
        &self.averages
    }

    pub fn values(&self, metric: Metric) -> Vec<Option<f64>> {
        self.entries.iter().map(|e| e.value(metric)).collect()
    }
}

/// One period of input: its label, its map and optionally a decision frame
/// whose complexity is tracked alongside the map metrics.
#[derive(Debug, Clone)]
pub struct PeriodInput {
    pub period: String,
    pub map: CognitiveMap,
    pub frame: Option<DecisionFrame>,
}

impl PeriodInput {
    /// Uses the map's period label, falling back to its id.
    pub fn from_map(map: CognitiveMap) -> Self {
        Self {
            period: map.period.clone().unwrap_or_else(|| map.map_id.clone()),
            map,
            frame: None,
        }
    }
}

/// Computes the metrics of every period (in parallel) and keeps input order.
pub fn build_series(
    inputs: &[PeriodInput],
    options: &MetricOptions,
    convention: Convention,
) -> Result<MetricSeries, SeriesError> {
    let entries = inputs
        .par_iter()
        .map(|p| SeriesEntry {
            period: p.period.clone(),
            metrics: map_metrics(&p.map, options),
            complexity: p
                .frame
                .as_ref()
                .map(|f| complexity_with(&to_simplicial_family(f).family, convention).complexity),
        })
        .collect();
    MetricSeries::from_entries(entries)
}

pub fn build_series_from_maps(
    maps: &[CognitiveMap],
    options: &MetricOptions,
) -> Result<MetricSeries, SeriesError> {
    let inputs: Vec<PeriodInput> = maps.iter().cloned().map(PeriodInput::from_map).collect();
    build_series(&inputs, options, Convention::Paper)
}

/// Reference value a period is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Baseline {
    #[default]
    PrevPeriod,
    /// Mean of up to `k` preceding periods where the metric is defined.
    TrailingMean(usize),
    OverallMean,
}

impl FromStr for Baseline {
    type Err = SeriesError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "prev" => Ok(Baseline::PrevPeriod),
            "overall" => Ok(Baseline::OverallMean),
            _ => match s.strip_prefix("trailing:").map(str::parse::<usize>) {
                Some(Ok(k)) if k > 0 => Ok(Baseline::TrailingMean(k)),
                _ => Err(SeriesError::Baseline(format!(
                    "`{s}` (expected prev|trailing:k|overall with k >= 1)"
                ))),
            },
        }
    }
}

impl fmt::Display for Baseline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Baseline::PrevPeriod => f.write_str("prev"),
            Baseline::TrailingMean(k) => write!(f, "trailing:{k}"),
            Baseline::OverallMean => f.write_str("overall"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectOptions {
    pub threshold: f64,
    pub baseline: Baseline,
    /// Also flag rises of at least `threshold` relative to the baseline.
    pub two_sided: bool,
}

impl Default for DetectOptions {
    fn default() -> Self {
        Self {
            threshold: 0.30,
            baseline: Baseline::PrevPeriod,
            two_sided: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Drop,
    Rise,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Drop => "drop",
            Direction::Rise => "rise",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Flag {
    pub period: String,
    pub metric: Metric,
    /// `(baseline - value) / baseline`; for rises, the relative increase.
    pub relative_drop: f64,
    pub baseline: f64,
    pub value: f64,
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisruptionReport {
    pub threshold: f64,
    pub flags: Vec<Flag>,
}

impl DisruptionReport {
    pub fn is_disrupted(&self) -> bool {
        !self.flags.is_empty()
    }

    pub fn flags_at<'a>(&'a self, period: &'a str) -> impl Iterator<Item = &'a Flag> + 'a {
        self.flags.iter().filter(move |f| f.period == period)
    }
}

fn baseline_value(series: &MetricSeries, metric: Metric, t: usize, baseline: Baseline) -> Option<f64> {
    let entries = series.entries();
    match baseline {
        Baseline::PrevPeriod => entries[t - 1].value(metric),
        Baseline::TrailingMean(k) => {
            let window: Vec<f64> = entries[t.saturating_sub(k)..t]
                .iter()
                .filter_map(|e| e.value(metric))
                .collect();
            (!window.is_empty()).then(|| window.iter().sum::<f64>() / window.len() as f64)
        }
        Baseline::OverallMean => series.average(metric),
    }
}

/// Compares every period after the first with its baseline, metric by metric,
/// and flags relative drops of at least `threshold`. Periods or baselines where
/// a metric is undefined, and non-positive baselines, are skipped.
pub fn detect_disruption(
    series: &MetricSeries,
    options: &DetectOptions,
) -> Result<DisruptionReport, SeriesError> {
    let threshold = options.threshold;
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(SeriesError::Threshold(threshold));
    }
    if series.len() < 2 {
        return Err(SeriesError::TooShort(2));
    }
    let mut flags = Vec::new();
    for (t, entry) in series.entries().iter().enumerate().skip(1) {
        for metric in Metric::ALL {
            let (Some(value), Some(base)) = (
                entry.value(metric),
                baseline_value(series, metric, t, options.baseline),
            ) else {
                continue;
            };
            if base <= 0.0 {
                continue;
            }
            let change = (base - value) / base;
            let (magnitude, direction) = if change >= 0.0 {
                (change, Direction::Drop)
            } else if options.two_sided {
                (-change, Direction::Rise)
            } else {
                continue;
            };
            if magnitude >= threshold {
                flags.push(Flag {
                    period: entry.period.clone(),
                    metric,
                    relative_drop: magnitude,
                    baseline: base,
                    value,
                    direction,
                });
            }
        }
    }
    Ok(DisruptionReport { threshold, flags })
}
