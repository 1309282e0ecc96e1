//! Structural metrics of a cognitive map: concept and link counts, their
//! ratio, density and closeness centrality.
//!
//! Links whose endpoints are not declared concepts are ignored here; run
//! [`crate::model::validate_map`] first when that matters.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::CognitiveMap;

/// Denominator used for density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LinkMaximum {
    /// `|C| (|C| - 1) / 2`, the undirected maximum.
    #[default]
    Paper,
    /// `|C| (|C| - 1)`, the directed maximum.
    Directed,
}

impl FromStr for LinkMaximum {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "paper" => Ok(Self::Paper),
            "directed" => Ok(Self::Directed),
            other => Err(format!("unknown link maximum `{other}` (expected paper|directed)")),
        }
    }
}

impl fmt::Display for LinkMaximum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Paper => "paper",
            Self::Directed => "directed",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MetricOptions {
    pub link_maximum: LinkMaximum,
    /// Measure distances ignoring link direction.
    pub undirected: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Counts {
    pub num_concepts: usize,
    pub num_links: usize,
    /// `|L| / |C|`, `None` for the empty map.
    pub links_per_concept: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Closeness {
    /// `(concept id, closeness)` in concept order.
    pub per_concept: Vec<(String, f64)>,
    /// `(|C| - 1) / sum of distances` over reachable ordered pairs, 0 when none are reachable.
    pub average: f64,
    /// Reachable ordered pairs divided by `|C| (|C| - 1)`.
    pub reachable_pair_fraction: f64,
}

/// Per-map metric record. Fields that are undefined for the map are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapMetrics {
    pub num_concepts: usize,
    pub num_links: usize,
    pub links_per_concept: Option<f64>,
    pub density: Option<f64>,
    pub avg_closeness: Option<f64>,
    pub reachable_pair_fraction: Option<f64>,
}

pub fn counts(map: &CognitiveMap) -> Counts {
    let num_concepts = map.concepts.len();
    let num_links = map.links.len();
    Counts {
        num_concepts,
        num_links,
        links_per_concept: (num_concepts > 0).then(|| num_links as f64 / num_concepts as f64),
    }
}

pub fn density(map: &CognitiveMap, link_maximum: LinkMaximum) -> Option<f64> {
    let n = map.concepts.len();
    if n < 2 {
        return None;
    }
    let pairs = (n * (n - 1)) as f64;
    let max = match link_maximum {
        LinkMaximum::Paper => pairs / 2.0,
        LinkMaximum::Directed => pairs,
    };
    Some(map.links.len() as f64 / max)
}

fn adjacency(map: &CognitiveMap, undirected: bool) -> Vec<Vec<usize>> {
    let index: HashMap<&str, usize> = map
        .concepts
        .iter()
        .enumerate()
        .map(|(i, c)| (c.id.as_str(), i))
        .collect();
    let mut adj = vec![Vec::new(); map.concepts.len()];
    for l in &map.links {
        if let (Some(&s), Some(&t)) = (index.get(l.source.as_str()), index.get(l.target.as_str())) {
            if s == t {
                continue;
            }
            adj[s].push(t);
            if undirected {
                adj[t].push(s);
            }
        }
    }
    for row in &mut adj {
        row.sort_unstable();
        row.dedup();
    }
    adj
}

/// Hop distances from `source`; `None` marks unreachable concepts.
fn bfs(adj: &[Vec<usize>], source: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; adj.len()];
    dist[source] = Some(0);
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        let d = dist[u].unwrap_or(0) + 1;
        for &v in &adj[u] {
            if dist[v].is_none() {
                dist[v] = Some(d);
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Shortest-path distance matrix by repeated BFS; row `i` holds distances from concept `i`.
pub fn distances(map: &CognitiveMap, undirected: bool) -> Vec<Vec<Option<usize>>> {
    let adj = adjacency(map, undirected);
    (0..adj.len()).into_par_iter().map(|s| bfs(&adj, s)).collect()
}

pub fn closeness(map: &CognitiveMap, undirected: bool) -> Option<Closeness> {
    let n = map.concepts.len();
    if n < 2 {
        return None;
    }
    let adj = adjacency(map, undirected);
    // (sum of distances, reachable count) per source
    let rows: Vec<(u64, u64)> = (0..n)
        .into_par_iter()
        .map(|s| {
            bfs(&adj, s)
                .into_iter()
                .enumerate()
                .filter(|&(t, _)| t != s)
                .filter_map(|(_, d)| d)
                .fold((0u64, 0u64), |(sum, k), d| (sum + d as u64, k + 1))
        })
        .collect();

    let scale = (n - 1) as f64;
    let ratio = |sum: u64| if sum == 0 { 0.0 } else { scale / sum as f64 };
    let total: u64 = rows.iter().map(|r| r.0).sum();
    let reachable: u64 = rows.iter().map(|r| r.1).sum();
    Some(Closeness {
        per_concept: map
            .concepts
            .iter()
            .zip(&rows)
            .map(|(c, r)| (c.id.clone(), ratio(r.0)))
            .collect(),
        average: ratio(total),
        reachable_pair_fraction: reachable as f64 / (n * (n - 1)) as f64,
    })
}

pub fn map_metrics(map: &CognitiveMap, options: &MetricOptions) -> MapMetrics {
    let c = counts(map);
    let cl = closeness(map, options.undirected);
    MapMetrics {
        num_concepts: c.num_concepts,
        num_links: c.num_links,
        links_per_concept: c.links_per_concept,
        density: density(map, options.link_maximum),
        avg_closeness: cl.as_ref().map(|x| x.average),
        reachable_pair_fraction: cl.map(|x| x.reachable_pair_fraction),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CausalLink, Concept, Sign};

    fn map(n: usize, links: &[(usize, usize)]) -> CognitiveMap {
        let mut m = CognitiveMap::new("m");
        m.concepts = (0..n).map(|i| Concept::plain(format!("c{i}"))).collect();
        m.links = links
            .iter()
            .map(|&(a, b)| CausalLink::new(format!("c{a}"), format!("c{b}"), Sign::Unsigned))
            .collect();
        m
    }

    fn complete(n: usize) -> CognitiveMap {
        let pairs: Vec<_> = (0..n)
            .flat_map(|a| (0..n).filter(move |&b| b != a).map(move |b| (a, b)))
            .collect();
        map(n, &pairs)
    }

    #[test]
    fn count_examples() {
        let c = counts(&map(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]));
        assert_eq!((c.num_concepts, c.num_links), (5, 4));
        assert_eq!(c.links_per_concept, Some(0.8));
        let e = counts(&CognitiveMap::new("e"));
        assert_eq!((e.num_concepts, e.num_links, e.links_per_concept), (0, 0, None));
        let k = counts(&complete(3));
        assert_eq!((k.num_concepts, k.num_links, k.links_per_concept), (3, 6, Some(2.0)));
    }

    #[test]
    fn density_examples() {
        let m = map(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]);
        assert_eq!(density(&m, LinkMaximum::Paper), Some(0.4));
        assert_eq!(density(&m, LinkMaximum::Directed), Some(0.2));
        let bip = map(4, &[(0, 2), (1, 3)]);
        assert!((density(&bip, LinkMaximum::Paper).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(density(&complete(6), LinkMaximum::Paper), Some(2.0));
        assert_eq!(density(&map(1, &[]), LinkMaximum::Paper), None);
    }

    #[test]
    fn path_closeness() {
        let m = map(3, &[(0, 1), (1, 2)]);
        let c = closeness(&m, false).unwrap();
        assert_eq!(c.average, 0.5);
        assert_eq!(c.reachable_pair_fraction, 0.5);
        assert_eq!(c.per_concept[0].1, 2.0 / 3.0);
        assert_eq!(c.per_concept[1].1, 2.0);
        assert_eq!(c.per_concept[2].1, 0.0);
        let reversed = closeness(&map(3, &[(1, 0), (2, 1)]), false).unwrap();
        assert_eq!(reversed.average, 0.5);
        let und = closeness(&m, true).unwrap();
        assert_eq!(und.reachable_pair_fraction, 1.0);
        assert_eq!(und.average, 2.0 / 8.0);
    }

    #[test]
    fn complete_closeness_is_reciprocal_of_size() {
        for n in [2, 5, 10] {
            let c = closeness(&complete(n), false).unwrap();
            assert!((c.average - 1.0 / n as f64).abs() < 1e-12);
            assert_eq!(c.reachable_pair_fraction, 1.0);
        }
    }

    #[test]
    fn linkless_map_has_zero_closeness() {
        let c = closeness(&map(4, &[]), false).unwrap();
        assert_eq!(c.average, 0.0);
        assert_eq!(c.reachable_pair_fraction, 0.0);
        assert!(closeness(&map(1, &[]), false).is_none());
    }

    #[test]
    fn distance_matrix() {
        let d = distances(&map(3, &[(0, 1), (1, 2)]), false);
        assert_eq!(d[0], vec![Some(0), Some(1), Some(2)]);
        assert_eq!(d[2], vec![None, None, Some(0)]);
    }
}
