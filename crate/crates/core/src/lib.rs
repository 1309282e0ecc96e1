//! Structural measures of cognitive maps for tracking non-probabilistic uncertainty.
//!
//! - [`model`]: cognitive maps, decision frames (evoked alternatives → perceived
//!   consequences) and the simplicial families they project to.
//! - [`qanalysis`]: q-connectivity classes, structure vectors and the
//!   complexity measure of a simplicial family.
//! - [`metrics`]: counts, density and closeness centrality of a map.
//! - [`series`]: metric time series and drop detection.
//! - [`synth`]: seeded generators for frames, maps, shocks and series.
//! - [`codec`]: JSON/CSV file formats, reports and SVG plots.

pub mod codec;
pub mod metrics;
pub mod model;
pub mod qanalysis;
pub mod series;
pub mod synth;

pub use metrics::{LinkMaximum, MapMetrics, MetricOptions};
pub use model::{
    to_simplicial_family, validate_map, CausalLink, CognitiveMap, Concept, DecisionFrame, Role,
    Sign, Simplex, SimplicialFamily,
};
pub use qanalysis::{complexity, structure_vector, Convention, StructureVector};
pub use series::{detect_disruption, Baseline, DetectOptions, DisruptionReport, MetricSeries};
