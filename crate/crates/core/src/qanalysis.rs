//! Q-Analysis of simplicial families.
//!
//! Two simplices are q-near when they share a face of dimension at least q
//! (at least q + 1 common vertices); q-connectivity is the transitive closure
//! of q-nearness. The structure vector counts q-connected classes for every
//! level from 0 up to Q, the largest face dimension shared by two distinct
//! simplices, and the complexity measure folds it into
//! `sum over q of (q + 1) / s_q`, skipping empty levels and adding up over
//! disconnected parts of the family.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use crate::model::{Simplex, SimplicialFamily};

/// How singleton classes are counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Convention {
    /// A class needs at least two simplices joined through shared faces.
    #[default]
    Paper,
    /// Every simplex of dimension >= q is a class on its own unless joined to others.
    Atkin,
}

impl FromStr for Convention {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "paper" => Ok(Convention::Paper),
            "atkin" => Ok(Convention::Atkin),
            other => Err(format!("unknown convention `{other}` (expected paper|atkin)")),
        }
    }
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Convention::Paper => "paper",
            Convention::Atkin => "atkin",
        })
    }
}

/// `s_0 .. s_Q`; empty when no two simplices share a vertex.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StructureVector {
    counts: Vec<usize>,
}

impl StructureVector {
    pub fn new(counts: Vec<usize>) -> Self {
        Self { counts }
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Largest shared face dimension, `None` when undefined.
    pub fn top_level(&self) -> Option<usize> {
        self.counts.len().checked_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// `sum (q + 1) / s_q` over levels with `s_q != 0`.
    pub fn weighted_sum(&self) -> f64 {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &s)| s != 0)
            .fold(0.0, |acc, (q, &s)| acc + (q + 1) as f64 / s as f64)
    }
}

impl fmt::Display for StructureVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, c) in self.counts.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(")")
    }
}

/// q-connected classes at one level. Members are sorted by name and classes by
/// their smallest member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QClasses {
    pub level: usize,
    pub classes: Vec<Vec<String>>,
}

/// Dimension of the common face of two simplices, `None` if they are disjoint.
pub fn shared_face_dim(a: &Simplex, b: &Simplex) -> Option<usize> {
    let common = a.vertices().intersection(b.vertices()).count();
    common.checked_sub(1)
}

struct DisjointSets {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Merges the sets of `a` and `b`; returns the sizes of the two sets if they were distinct.
    fn union(&mut self, a: usize, b: usize) -> Option<(usize, usize)> {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return None;
        }
        let sizes = (self.size[ra], self.size[rb]);
        let (big, small) = if sizes.0 >= sizes.1 { (ra, rb) } else { (rb, ra) };
        self.parent[small] = big;
        self.size[big] += self.size[small];
        Some(sizes)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Edge {
    a: usize,
    b: usize,
    shared: usize,
}

/// Simplices by index (family order) with every pair sharing at least one
/// vertex, sorted by shared dimension, highest first.
struct Incidence {
    dims: Vec<usize>,
    edges: Vec<Edge>,
}

impl Incidence {
    fn build(family: &SimplicialFamily) -> Self {
        let simplices = family.simplices();
        let universe: Vec<&str> = family.vertex_universe().into_iter().collect();
        let mut by_vertex: Vec<Vec<usize>> = vec![Vec::new(); universe.len()];
        let members: Vec<Vec<usize>> = simplices
            .iter()
            .enumerate()
            .map(|(i, s)| {
                s.vertices()
                    .iter()
                    .map(|v| {
                        let k = universe.binary_search(&v.as_str()).expect("vertex in universe");
                        by_vertex[k].push(i);
                        k
                    })
                    .collect()
            })
            .collect();

        let n = simplices.len();
        let mut common = vec![0usize; n];
        let mut touched = Vec::new();
        let mut edges = Vec::new();
        for (i, verts) in members.iter().enumerate() {
            for &v in verts {
                for &j in &by_vertex[v] {
                    if j > i {
                        if common[j] == 0 {
                            touched.push(j);
                        }
                        common[j] += 1;
                    }
                }
            }
            touched.sort_unstable();
            for &j in &touched {
                edges.push(Edge {
                    a: i,
                    b: j,
                    shared: common[j] - 1,
                });
                common[j] = 0;
            }
            touched.clear();
        }
        edges.sort_by(|x, y| y.shared.cmp(&x.shared).then(x.a.cmp(&y.a)).then(x.b.cmp(&y.b)));
        Self {
            dims: simplices.iter().map(Simplex::dimension).collect(),
            edges,
        }
    }

    fn top_level(&self) -> Option<usize> {
        self.edges.first().map(|e| e.shared)
    }

    /// Structure vector of the sub-family `nodes` (indices into `dims`, each
    /// edge endpoint must be in `nodes`) by sweeping q downwards with one
    /// incremental union-find.
    fn sweep(&self, nodes: &[usize], edges: &[Edge], convention: Convention) -> StructureVector {
        let Some(top) = edges.first().map(|e| e.shared) else {
            return StructureVector::default();
        };
        let local = |x: usize| nodes.binary_search(&x).expect("edge endpoint in node set");
        let mut sets = DisjointSets::new(nodes.len());
        let mut by_dim: Vec<usize> = (0..nodes.len()).collect();
        by_dim.sort_by(|&x, &y| self.dims[nodes[y]].cmp(&self.dims[nodes[x]]));

        let mut counts = vec![0; top + 1];
        let mut paired = 0usize; // sets of size >= 2
        let mut active = 0isize; // Atkin: simplices of dim >= q, minus merges
        let (mut e, mut d) = (0, 0);
        for q in (0..=top).rev() {
            while d < by_dim.len() && self.dims[nodes[by_dim[d]]] >= q {
                active += 1;
                d += 1;
            }
            while e < edges.len() && edges[e].shared >= q {
                if let Some((sa, sb)) = sets.union(local(edges[e].a), local(edges[e].b)) {
                    paired = paired + 1 - usize::from(sa >= 2) - usize::from(sb >= 2);
                    active -= 1;
                }
                e += 1;
            }
            counts[q] = match convention {
                Convention::Paper => paired,
                Convention::Atkin => active as usize,
            };
        }
        StructureVector::new(counts)
    }
}

fn group_names(
    family: &SimplicialFamily,
    sets: &mut DisjointSets,
    eligible: impl Fn(usize) -> bool,
    min_size: usize,
) -> Vec<Vec<String>> {
    let n = family.len();
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in (0..n).filter(|&i| eligible(i)) {
        let r = sets.find(i);
        groups[r].push(i);
    }
    let mut classes: Vec<Vec<String>> = groups
        .into_iter()
        .filter(|g| !g.is_empty() && g.len() >= min_size)
        .map(|g| {
            g.into_iter()
                .map(|i| family.simplices()[i].name().to_owned())
                .collect()
        })
        .collect();
    classes.sort();
    classes
}

/// q-connected classes at level `q` under the default convention.
pub fn q_components(family: &SimplicialFamily, q: usize) -> QClasses {
    q_components_with(family, q, Convention::Paper)
}

pub fn q_components_with(family: &SimplicialFamily, q: usize, convention: Convention) -> QClasses {
    let inc = Incidence::build(family);
    let mut sets = DisjointSets::new(family.len());
    for e in inc.edges.iter().take_while(|e| e.shared >= q) {
        sets.union(e.a, e.b);
    }
    let classes = match convention {
        Convention::Paper => group_names(family, &mut sets, |_| true, 2),
        Convention::Atkin => group_names(family, &mut sets, |i| inc.dims[i] >= q, 1),
    };
    QClasses { level: q, classes }
}

/// Same contract as [`q_components_with`], computed by breadth-first search
/// over the explicit q-nearness graph built from pairwise [`shared_face_dim`].
pub fn q_components_oracle(family: &SimplicialFamily, q: usize, convention: Convention) -> QClasses {
    let simplices = family.simplices();
    let n = simplices.len();
    let mut adjacency = vec![Vec::new(); n];
    for i in 0..n {
        for j in 0..n {
            if i != j && shared_face_dim(&simplices[i], &simplices[j]).is_some_and(|d| d >= q) {
                adjacency[i].push(j);
            }
        }
    }
    let eligible = |i: usize| match convention {
        Convention::Paper => !adjacency[i].is_empty(),
        Convention::Atkin => simplices[i].dimension() >= q,
    };

    let mut seen = vec![false; n];
    let mut classes = Vec::new();
    for start in 0..n {
        if seen[start] || !eligible(start) {
            continue;
        }
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        let mut members = BTreeSet::new();
        while let Some(u) = queue.pop_front() {
            members.insert(simplices[u].name().to_owned());
            for &v in &adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        classes.push(members.into_iter().collect::<Vec<_>>());
    }
    classes.sort();
    QClasses { level: q, classes }
}

/// Largest face dimension shared by two distinct simplices.
pub fn top_shared_dim(family: &SimplicialFamily) -> Option<usize> {
    Incidence::build(family).top_level()
}

pub fn structure_vector(family: &SimplicialFamily) -> StructureVector {
    structure_vector_with(family, Convention::Paper)
}

pub fn structure_vector_with(family: &SimplicialFamily, convention: Convention) -> StructureVector {
    let inc = Incidence::build(family);
    let nodes: Vec<usize> = (0..family.len()).collect();
    inc.sweep(&nodes, &inc.edges, convention)
}

/// A 0-connected part of the family with at least two simplices.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentComplexity {
    pub members: Vec<String>,
    pub structure_vector: StructureVector,
    pub complexity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityReport {
    pub convention: Convention,
    pub complexity: f64,
    /// Structure vector of the whole family.
    pub structure_vector: StructureVector,
    /// Connected parts in order of their smallest member; isolated simplices are omitted.
    pub components: Vec<ComponentComplexity>,
}

impl ComplexityReport {
    pub fn top_level(&self) -> Option<usize> {
        self.structure_vector.top_level()
    }
}

/// Complexity under the default convention.
pub fn complexity(family: &SimplicialFamily) -> f64 {
    complexity_with(family, Convention::Paper).complexity
}

/// Splits the family into parts connected through shared vertices and adds up
/// `sum (q + 1) / s_q` of each part. Isolated simplices contribute nothing, so
/// a purely one-to-one family scores zero.
pub fn complexity_with(family: &SimplicialFamily, convention: Convention) -> ComplexityReport {
    let inc = Incidence::build(family);
    let all: Vec<usize> = (0..family.len()).collect();
    let structure_vector = inc.sweep(&all, &inc.edges, convention);

    let mut sets = DisjointSets::new(family.len());
    for e in &inc.edges {
        sets.union(e.a, e.b);
    }
    let mut parts: Vec<Vec<usize>> = vec![Vec::new(); family.len()];
    for i in 0..family.len() {
        let r = sets.find(i);
        parts[r].push(i);
    }
    let mut edges_by_root: Vec<Vec<Edge>> = vec![Vec::new(); family.len()];
    for e in &inc.edges {
        let r = sets.find(e.a);
        edges_by_root[r].push(*e);
    }

    let mut components: Vec<ComponentComplexity> = parts
        .iter()
        .enumerate()
        .filter(|(_, nodes)| nodes.len() >= 2)
        .map(|(root, nodes)| {
            let sv = inc.sweep(nodes, &edges_by_root[root], convention);
            ComponentComplexity {
                members: nodes
                    .iter()
                    .map(|&i| family.simplices()[i].name().to_owned())
                    .collect(),
                complexity: sv.weighted_sum(),
                structure_vector: sv,
            }
        })
        .collect();
    components.sort_by(|a, b| a.members.cmp(&b.members));
    ComplexityReport {
        convention,
        complexity: components.iter().fold(0.0, |acc, c| acc + c.complexity),
        structure_vector,
        components,
    }
}

/// Classes at every level `0..=Q`, for explanations.
pub fn classes_by_level(family: &SimplicialFamily, convention: Convention) -> Vec<QClasses> {
    match top_shared_dim(family) {
        Some(top) => (0..=top)
            .map(|q| q_components_with(family, q, convention))
            .collect(),
        None => Vec::new(),
    }
}
