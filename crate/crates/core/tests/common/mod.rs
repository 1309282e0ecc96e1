#![allow(dead_code)]

use std::collections::BTreeSet;

use qmap_core::model::{Simplex, SimplicialFamily};
use qmap_core::qanalysis::{q_components_oracle, shared_face_dim, Convention};
use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64;

/// Random family with 1..=max_simplices simplices over vertices v0..v{max_vertices-1}.
pub fn random_family(seed: u64, max_simplices: usize, max_vertices: usize) -> SimplicialFamily {
    let mut rng = Pcg64::seed_from_u64(seed);
    let n = rng.gen_range(1..=max_simplices);
    let v = rng.gen_range(1..=max_vertices);
    let simplices = (0..n)
        .map(|i| {
            let mut verts = BTreeSet::new();
            let size = rng.gen_range(1..=v);
            while verts.len() < size {
                verts.insert(format!("v{}", rng.gen_range(0..v)));
            }
            Simplex::new(format!("s{i}"), verts).unwrap()
        })
        .collect();
    SimplicialFamily::new(simplices).unwrap()
}

pub fn family(spec: &[(&str, &[&str])]) -> SimplicialFamily {
    SimplicialFamily::new(
        spec.iter()
            .map(|(n, v)| Simplex::new(*n, v.iter().copied()).unwrap())
            .collect(),
    )
    .unwrap()
}

/// Brute-force complexity: 0-classes from the BFS oracle, Q from every pair,
/// s_q from the oracle at every level.
pub fn oracle_complexity(f: &SimplicialFamily, convention: Convention) -> f64 {
    let mut total = 0.0;
    for class in q_components_oracle(f, 0, Convention::Paper).classes {
        let sub = f.restrict(class.iter().map(String::as_str));
        let s = sub.simplices();
        let mut top = None;
        for i in 0..s.len() {
            for j in (i + 1)..s.len() {
                top = top.max(shared_face_dim(&s[i], &s[j]));
            }
        }
        let Some(top) = top else { continue };
        for q in 0..=top {
            let sq = q_components_oracle(&sub, q, convention).classes.len();
            if sq > 0 {
                total += (q + 1) as f64 / sq as f64;
            }
        }
    }
    total
}
