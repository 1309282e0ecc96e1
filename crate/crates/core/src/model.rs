//! Domain types for cognitive maps, decision frames and simplicial families.
//!
//! A [`CognitiveMap`] is the unit of graph-metric analysis. A [`DecisionFrame`]
//! is the bipartite EA → PC structure that Q-Analysis works on; it projects to a
//! [`SimplicialFamily`] with one simplex per evoked alternative whose vertices
//! are the perceived consequences it is related to.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("simplex `{0}` has no vertices")]
    EmptySimplex(String),
    #[error("duplicate simplex name `{0}`")]
    DuplicateSimplex(String),
    #[error("invalid decision frame: {0}")]
    InvalidFrame(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    EvokedAlternative,
    PerceivedConsequence,
    Plain,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Concept {
    pub id: String,
    pub label: String,
    pub role: Role,
}

impl Concept {
    pub fn new(id: impl Into<String>, label: impl Into<String>, role: Role) -> Self {
        Self {
            id: id.into(),
            label: label.into(),
            role,
        }
    }

    /// A concept whose label is its id.
    pub fn plain(id: impl Into<String>) -> Self {
        let id = id.into();
        Self {
            label: id.clone(),
            id,
            role: Role::Plain,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Positive,
    Negative,
    #[default]
    Unsigned,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CausalLink {
    pub source: String,
    pub target: String,
    pub sign: Sign,
}

impl CausalLink {
    pub fn new(source: impl Into<String>, target: impl Into<String>, sign: Sign) -> Self {
        Self {
            source: source.into(),
            target: target.into(),
            sign,
        }
    }
}

/// A directed graph of concepts joined by causal links.
///
/// Construction does not enforce the invariants; call [`validate_map`] to get
/// a list of violations. Concept and link order is preserved as given.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CognitiveMap {
    pub map_id: String,
    pub period: Option<String>,
    pub concepts: Vec<Concept>,
    pub links: Vec<CausalLink>,
}

impl CognitiveMap {
    pub fn new(map_id: impl Into<String>) -> Self {
        Self {
            map_id: map_id.into(),
            ..Self::default()
        }
    }

    pub fn with_period(mut self, period: impl Into<String>) -> Self {
        self.period = Some(period.into());
        self
    }

    /// The map induced by a decision frame: every EA and PC becomes a concept
    /// and every relation an unsigned EA → PC link.
    pub fn from_frame(frame: &DecisionFrame) -> Self {
        let concepts = frame
            .alternatives
            .iter()
            .chain(frame.consequences.iter())
            .cloned()
            .collect();
        let links = frame
            .relations
            .iter()
            .map(|(ea, pc)| CausalLink::new(ea.clone(), pc.clone(), Sign::Unsigned))
            .collect();
        Self {
            map_id: frame.frame_id.clone(),
            period: None,
            concepts,
            links,
        }
    }

    /// Removes repeated (source, target) links, keeping the first occurrence.
    /// Returns the removed duplicates.
    pub fn dedup_links(&mut self) -> Vec<CausalLink> {
        let mut seen = HashSet::new();
        let mut removed = Vec::new();
        self.links.retain(|l| {
            if seen.insert((l.source.clone(), l.target.clone())) {
                true
            } else {
                removed.push(l.clone());
                false
            }
        });
        removed
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ViolationKind {
    EmptyId,
    DuplicateConcept,
    DanglingEndpoint,
    SelfLoop,
    DuplicateLink,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ViolationKind::EmptyId => "empty id",
            ViolationKind::DuplicateConcept => "duplicate concept",
            ViolationKind::DanglingEndpoint => "dangling endpoint",
            ViolationKind::SelfLoop => "self-loop",
            ViolationKind::DuplicateLink => "duplicate link",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Where the problem is, e.g. `links[3].target`.
    pub location: String,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}: {}", self.kind, self.location, self.detail)
    }
}

/// Checks every [`CognitiveMap`] invariant. An empty report means the map is valid.
pub fn validate_map(map: &CognitiveMap) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut ids = HashSet::new();
    for (i, c) in map.concepts.iter().enumerate() {
        if c.id.is_empty() {
            out.push(Violation {
                kind: ViolationKind::EmptyId,
                location: format!("concepts[{i}].id"),
                detail: "concept id is empty".into(),
            });
        } else if !ids.insert(c.id.as_str()) {
            out.push(Violation {
                kind: ViolationKind::DuplicateConcept,
                location: format!("concepts[{i}].id"),
                detail: format!("`{}` declared more than once", c.id),
            });
        }
    }

    let mut pairs = HashSet::new();
    for (i, l) in map.links.iter().enumerate() {
        for (field, end) in [("source", &l.source), ("target", &l.target)] {
            if !ids.contains(end.as_str()) {
                out.push(Violation {
                    kind: ViolationKind::DanglingEndpoint,
                    location: format!("links[{i}].{field}"),
                    detail: format!("unknown concept `{end}`"),
                });
            }
        }
        if l.source == l.target {
            out.push(Violation {
                kind: ViolationKind::SelfLoop,
                location: format!("links[{i}]"),
                detail: format!("`{}` links to itself", l.source),
            });
        }
        if !pairs.insert((l.source.as_str(), l.target.as_str())) {
            out.push(Violation {
                kind: ViolationKind::DuplicateLink,
                location: format!("links[{i}]"),
                detail: format!("`{}` -> `{}` repeated", l.source, l.target),
            });
        }
    }
    out
}

/// Non-fatal findings produced while building frames or projecting them.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Warning {
    /// An evoked alternative with no perceived consequence; it yields no simplex.
    EmptyAlternative(String),
    DuplicateRelation { alternative: String, consequence: String },
    DuplicateLink { source: String, target: String },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::EmptyAlternative(ea) => {
                write!(f, "alternative `{ea}` has no consequences; no simplex produced")
            }
            Warning::DuplicateRelation {
                alternative,
                consequence,
            } => write!(f, "duplicate relation `{alternative}` -> `{consequence}` dropped"),
            Warning::DuplicateLink { source, target } => {
                write!(f, "duplicate link `{source}` -> `{target}` dropped")
            }
        }
    }
}

/// Evoked alternatives, perceived consequences and the EA → PC relations between them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecisionFrame {
    pub frame_id: String,
    pub alternatives: Vec<Concept>,
    pub consequences: Vec<Concept>,
    pub relations: BTreeSet<(String, String)>,
}

impl DecisionFrame {
    /// Builds a frame from id lists, checking the frame invariants. Repeated
    /// relations are collapsed and reported as warnings.
    pub fn new<A, C, R>(
        frame_id: impl Into<String>,
        alternatives: A,
        consequences: C,
        relations: R,
    ) -> Result<(Self, Vec<Warning>), ModelError>
    where
        A: IntoIterator,
        A::Item: Into<String>,
        C: IntoIterator,
        C::Item: Into<String>,
        R: IntoIterator<Item = (String, String)>,
    {
        let alternatives: Vec<Concept> = alternatives
            .into_iter()
            .map(|id| {
                let id = id.into();
                Concept::new(id.clone(), id, Role::EvokedAlternative)
            })
            .collect();
        let consequences: Vec<Concept> = consequences
            .into_iter()
            .map(|id| {
                let id = id.into();
                Concept::new(id.clone(), id, Role::PerceivedConsequence)
            })
            .collect();

        let mut warnings = Vec::new();
        let mut set = BTreeSet::new();
        for (ea, pc) in relations {
            if !set.insert((ea.clone(), pc.clone())) {
                warnings.push(Warning::DuplicateRelation {
                    alternative: ea,
                    consequence: pc,
                });
            }
        }
        let frame = Self {
            frame_id: frame_id.into(),
            alternatives,
            consequences,
            relations: set,
        };
        frame.check()?;
        Ok((frame, warnings))
    }

    /// Verifies ids are non-empty and unique, the two lists are disjoint and
    /// every relation references declared concepts.
    pub fn check(&self) -> Result<(), ModelError> {
        let mut eas = HashSet::new();
        for c in &self.alternatives {
            if c.id.is_empty() {
                return Err(ModelError::InvalidFrame("empty alternative id".into()));
            }
            if !eas.insert(c.id.as_str()) {
                return Err(ModelError::InvalidFrame(format!(
                    "alternative `{}` declared twice",
                    c.id
                )));
            }
        }
        let mut pcs = HashSet::new();
        for c in &self.consequences {
            if c.id.is_empty() {
                return Err(ModelError::InvalidFrame("empty consequence id".into()));
            }
            if eas.contains(c.id.as_str()) {
                return Err(ModelError::InvalidFrame(format!(
                    "`{}` is both an alternative and a consequence",
                    c.id
                )));
            }
            if !pcs.insert(c.id.as_str()) {
                return Err(ModelError::InvalidFrame(format!(
                    "consequence `{}` declared twice",
                    c.id
                )));
            }
        }
        for (ea, pc) in &self.relations {
            if !eas.contains(ea.as_str()) {
                return Err(ModelError::InvalidFrame(format!(
                    "relation references undeclared alternative `{ea}`"
                )));
            }
            if !pcs.contains(pc.as_str()) {
                return Err(ModelError::InvalidFrame(format!(
                    "relation references undeclared consequence `{pc}`"
                )));
            }
        }
        Ok(())
    }
}

/// An evoked alternative seen as the set of consequences it may cause.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Simplex {
    name: String,
    vertices: BTreeSet<String>,
}

impl Simplex {
    pub fn new<I>(name: impl Into<String>, vertices: I) -> Result<Self, ModelError>
    where
        I: IntoIterator,
        I::Item: Into<String>,
    {
        let name = name.into();
        let vertices: BTreeSet<String> = vertices.into_iter().map(Into::into).collect();
        if vertices.is_empty() {
            return Err(ModelError::EmptySimplex(name));
        }
        Ok(Self { name, vertices })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn vertices(&self) -> &BTreeSet<String> {
        &self.vertices
    }

    /// Number of vertices minus one; never negative.
    pub fn dimension(&self) -> usize {
        self.vertices.len() - 1
    }
}

/// Simplices with unique names, kept sorted by name.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SimplicialFamily {
    simplices: Vec<Simplex>,
}

impl SimplicialFamily {
    pub fn new(mut simplices: Vec<Simplex>) -> Result<Self, ModelError> {
        simplices.sort_by(|a, b| a.name.cmp(&b.name));
        if let Some(w) = simplices.windows(2).find(|w| w[0].name == w[1].name) {
            return Err(ModelError::DuplicateSimplex(w[0].name.clone()));
        }
        Ok(Self { simplices })
    }

    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&Simplex> {
        self.simplices
            .binary_search_by(|s| s.name.as_str().cmp(name))
            .ok()
            .map(|i| &self.simplices[i])
    }

    pub fn vertex_universe(&self) -> BTreeSet<&str> {
        self.simplices
            .iter()
            .flat_map(|s| s.vertices.iter().map(String::as_str))
            .collect()
    }

    /// Sub-family made of the named simplices; unknown names are ignored.
    pub fn restrict<'a, I: IntoIterator<Item = &'a str>>(&self, names: I) -> Self {
        let keep: HashSet<&str> = names.into_iter().collect();
        Self {
            simplices: self
                .simplices
                .iter()
                .filter(|s| keep.contains(s.name.as_str()))
                .cloned()
                .collect(),
        }
    }

    /// Re-expresses the family as a frame: names become alternatives, vertices
    /// become consequences and each vertex slot a relation.
    pub fn to_frame(&self, frame_id: impl Into<String>) -> DecisionFrame {
        let consequences: BTreeSet<&str> = self.vertex_universe();
        let relations = self
            .simplices
            .iter()
            .flat_map(|s| s.vertices.iter().map(|v| (s.name.clone(), v.clone())))
            .collect();
        DecisionFrame {
            frame_id: frame_id.into(),
            alternatives: self
                .simplices
                .iter()
                .map(|s| Concept::new(s.name.clone(), s.name.clone(), Role::EvokedAlternative))
                .collect(),
            consequences: consequences
                .into_iter()
                .map(|v| Concept::new(v, v, Role::PerceivedConsequence))
                .collect(),
            relations,
        }
    }
}

/// Family built from a frame, plus the alternatives that produced no simplex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Projection {
    pub family: SimplicialFamily,
    pub warnings: Vec<Warning>,
}

/// One simplex per alternative that has at least one relation; its vertices
/// are the related consequences. Alternatives without relations are reported
/// as warnings in declaration order.
pub fn to_simplicial_family(frame: &DecisionFrame) -> Projection {
    let mut by_ea: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (ea, pc) in &frame.relations {
        by_ea.entry(ea.as_str()).or_default().push(pc.as_str());
    }
    let mut simplices = Vec::with_capacity(by_ea.len());
    let mut warnings = Vec::new();
    for ea in &frame.alternatives {
        match by_ea.remove(ea.id.as_str()) {
            Some(pcs) => simplices.push(Simplex {
                name: ea.id.clone(),
                vertices: pcs.into_iter().map(str::to_owned).collect(),
            }),
            None => warnings.push(Warning::EmptyAlternative(ea.id.clone())),
        }
    }
    // Relations on undeclared alternatives (frames built by hand without check()).
    for (ea, pcs) in by_ea {
        simplices.push(Simplex {
            name: ea.to_owned(),
            vertices: pcs.into_iter().map(str::to_owned).collect(),
        });
    }
    simplices.sort_by(|a, b| a.name.cmp(&b.name));
    simplices.dedup_by(|a, b| a.name == b.name);
    Projection {
        family: SimplicialFamily { simplices },
        warnings,
    }
}
