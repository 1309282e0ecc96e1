//! Deterministic generators for benchmark frames and maps, and shock injection.
//!
//! All randomness comes from PCG XSL-RR 128/64 (`rand_pcg::Pcg64`) seeded with
//! `Pcg64::seed_from_u64(seed)`; sampling uses `rand` 0.8's `gen_bool`,
//! `gen_range` and `seq::index::sample`. Given the same parameters and seed,
//! every generator returns the same value on every platform.

use std::collections::HashSet;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64;
use thiserror::Error;

use crate::model::{CausalLink, CognitiveMap, Concept, DecisionFrame, ModelError, Sign};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("invalid generator parameters: {0}")]
    Params(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn params_err(msg: impl Into<String>) -> SynthError {
    SynthError::Params(msg.into())
}

fn rng(seed: u64) -> Pcg64 {
    Pcg64::seed_from_u64(seed)
}

/// Stylized decision frames with known structure vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// `n` alternatives, each tied to its own consequence.
    OneToOne(usize),
    /// Two triangles sharing an edge: s = (1,1), C = 3.
    SharedEdge,
    /// Two shared-edge pairs bridged by a single vertex: s = (1,2), C = 2.
    BridgedClusters,
}

impl FromStr for Preset {
    type Err = SynthError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fig2b" => Ok(Preset::SharedEdge),
            "fig2c" => Ok(Preset::BridgedClusters),
            _ => match s.strip_prefix("fig2a:").map(str::parse::<usize>) {
                Some(Ok(n)) => Ok(Preset::OneToOne(n)),
                _ => Err(params_err(format!(
                    "unknown preset `{s}` (expected fig2a:N|fig2b|fig2c)"
                ))),
            },
        }
    }
}

fn frame_from_lists(
    id: &str,
    simplices: &[(&str, &[&str])],
    consequences: &[&str],
) -> Result<DecisionFrame, SynthError> {
    let relations = simplices
        .iter()
        .flat_map(|(ea, pcs)| pcs.iter().map(move |pc| (ea.to_string(), pc.to_string())));
    let (frame, _) = DecisionFrame::new(
        id,
        simplices.iter().map(|(ea, _)| *ea),
        consequences.iter().copied(),
        relations,
    )?;
    Ok(frame)
}

pub fn gen_preset(preset: Preset) -> Result<DecisionFrame, SynthError> {
    match preset {
        Preset::OneToOne(0) => Err(params_err("fig2a needs at least one alternative")),
        Preset::OneToOne(n) => {
            let (frame, _) = DecisionFrame::new(
                format!("fig2a-{n}"),
                (1..=n).map(|i| format!("EA{i}")),
                (1..=n).map(|i| format!("P{i}")),
                (1..=n).map(|i| (format!("EA{i}"), format!("P{i}"))),
            )?;
            Ok(frame)
        }
        Preset::SharedEdge => frame_from_lists(
            "fig2b",
            &[("EA1", &["P1", "P2", "P3"]), ("EA2", &["P2", "P3", "P4"])],
            &["P1", "P2", "P3", "P4"],
        ),
        Preset::BridgedClusters => frame_from_lists(
            "fig2c",
            &[
                ("EA1", &["P1", "P2", "P3"]),
                ("EA2", &["P2", "P3", "P4"]),
                ("EA3", &["P4", "P5", "P6"]),
                ("EA4", &["P5", "P6", "P7"]),
            ],
            &["P1", "P2", "P3", "P4", "P5", "P6", "P7"],
        ),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomFrameParams {
    pub n_alternatives: usize,
    pub n_consequences: usize,
    pub n_clusters: usize,
    pub cross_link_prob: f64,
}

/// Alternatives and consequences are dealt round-robin into clusters. Inside a
/// cluster every alternative relates to every consequence; each cross-cluster
/// pair is related with probability `cross_link_prob`, drawn in
/// (alternative, consequence) order.
pub fn gen_random_frame(params: &RandomFrameParams, seed: u64) -> Result<DecisionFrame, SynthError> {
    let &RandomFrameParams {
        n_alternatives,
        n_consequences,
        n_clusters,
        cross_link_prob,
    } = params;
    if n_clusters == 0 || n_clusters > n_alternatives.min(n_consequences) {
        return Err(params_err(format!(
            "clusters must be in 1..={} (got {n_clusters})",
            n_alternatives.min(n_consequences)
        )));
    }
    if !(0.0..=1.0).contains(&cross_link_prob) {
        return Err(params_err(format!("cross_link_prob {cross_link_prob} outside [0, 1]")));
    }
    let mut rng = rng(seed);
    let mut relations = Vec::new();
    for a in 0..n_alternatives {
        for c in 0..n_consequences {
            let linked = a % n_clusters == c % n_clusters || rng.gen_bool(cross_link_prob);
            if linked {
                relations.push((format!("EA{}", a + 1), format!("P{}", c + 1)));
            }
        }
    }
    let (frame, _) = DecisionFrame::new(
        format!("random-frame-{seed}"),
        (1..=n_alternatives).map(|i| format!("EA{i}")),
        (1..=n_consequences).map(|i| format!("P{i}")),
        relations,
    )?;
    Ok(frame)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomMapParams {
    pub n_concepts: usize,
    pub n_links: usize,
}

/// A map with `n_links` distinct directed links drawn uniformly from all
/// ordered pairs of distinct concepts, each signed positive or negative at
/// random. Links are listed in (source, target) order.
pub fn gen_random_map(params: &RandomMapParams, seed: u64) -> Result<CognitiveMap, SynthError> {
    let n = params.n_concepts;
    let pairs = n * n.saturating_sub(1);
    if params.n_links > pairs {
        return Err(params_err(format!(
            "{} links do not fit in {n} concepts (max {pairs})",
            params.n_links
        )));
    }
    let mut rng = rng(seed);
    let mut picked = sample(&mut rng, pairs, params.n_links).into_vec();
    picked.sort_unstable();
    let mut map = CognitiveMap::new(format!("random-map-{seed}"));
    map.concepts = (0..n)
        .map(|i| Concept::new(format!("c{i}"), format!("concept {i}"), crate::model::Role::Plain))
        .collect();
    map.links = picked
        .into_iter()
        .map(|k| {
            let (a, r) = (k / (n - 1), k % (n - 1));
            let b = if r >= a { r + 1 } else { r };
            let sign = if rng.gen_bool(0.5) {
                Sign::Positive
            } else {
                Sign::Negative
            };
            CausalLink::new(format!("c{a}"), format!("c{b}"), sign)
        })
        .collect();
    Ok(map)
}

/// A new concept forcing its way into the map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Injection {
    pub label: String,
    pub attach_count: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ShockSpec {
    pub link_removal_fraction: f64,
    pub concept_removal_fraction: f64,
    pub inject: Option<Injection>,
}

impl ShockSpec {
    pub fn check(&self) -> Result<(), SynthError> {
        for (name, f) in [
            ("link removal fraction", self.link_removal_fraction),
            ("concept removal fraction", self.concept_removal_fraction),
        ] {
            if !(0.0..=1.0).contains(&f) {
                return Err(params_err(format!("{name} {f} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

/// Parses `links=0.4,concepts=0.1,inject=PoisonPills:3`; every key is optional.
impl FromStr for ShockSpec {
    type Err = SynthError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut spec = ShockSpec::default();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| params_err(format!("shock item `{part}` is not key=value")))?;
            let fraction = |v: &str| {
                v.parse::<f64>()
                    .map_err(|_| params_err(format!("bad fraction `{v}` for `{key}`")))
            };
            match key {
                "links" => spec.link_removal_fraction = fraction(value)?,
                "concepts" => spec.concept_removal_fraction = fraction(value)?,
                "inject" => {
                    let (label, count) = value.rsplit_once(':').unwrap_or((value, "0"));
                    let attach_count = count
                        .parse()
                        .map_err(|_| params_err(format!("bad attach count `{count}`")))?;
                    if label.is_empty() {
                        return Err(params_err("injected concept needs a label"));
                    }
                    spec.inject = Some(Injection {
                        label: label.to_owned(),
                        attach_count,
                    });
                }
                other => return Err(params_err(format!("unknown shock key `{other}`"))),
            }
        }
        spec.check()?;
        Ok(spec)
    }
}

fn floor_fraction(fraction: f64, count: usize) -> usize {
    ((fraction * count as f64) + 1e-9).floor().min(count as f64) as usize
}

/// Removes `floor(fraction * |L|)` uniformly chosen links, then
/// `floor(fraction * |C|)` concepts with their incident links, then optionally
/// adds one concept linked to `attach_count` randomly chosen survivors (fewer
/// if not enough remain). Order of surviving concepts and links is preserved.
pub fn inject_shock(map: &CognitiveMap, spec: &ShockSpec, seed: u64) -> CognitiveMap {
    let mut rng = rng(seed);
    let mut out = map.clone();

    let drop_links = floor_fraction(spec.link_removal_fraction, out.links.len());
    if drop_links > 0 {
        let gone: HashSet<usize> = sample(&mut rng, out.links.len(), drop_links).into_iter().collect();
        out.links = std::mem::take(&mut out.links)
            .into_iter()
            .enumerate()
            .filter(|(i, _)| !gone.contains(i))
            .map(|(_, l)| l)
            .collect();
    }

    let drop_concepts = floor_fraction(spec.concept_removal_fraction, out.concepts.len());
    if drop_concepts > 0 {
        let gone: HashSet<usize> = sample(&mut rng, out.concepts.len(), drop_concepts)
            .into_iter()
            .collect();
        let removed: HashSet<String> = gone.iter().map(|&i| out.concepts[i].id.clone()).collect();
        out.concepts = std::mem::take(&mut out.concepts)
            .into_iter()
            .enumerate()
            .filter(|(i, _)| !gone.contains(i))
            .map(|(_, c)| c)
            .collect();
        out.links
            .retain(|l| !removed.contains(&l.source) && !removed.contains(&l.target));
    }

    if let Some(inj) = &spec.inject {
        let taken: HashSet<&str> = out.concepts.iter().map(|c| c.id.as_str()).collect();
        let id = std::iter::once(inj.label.clone())
            .chain((2..).map(|k| format!("{}#{k}", inj.label)))
            .find(|c| !taken.contains(c.as_str()))
            .expect("unbounded candidates");
        let attach = inj.attach_count.min(out.concepts.len());
        let mut targets = sample(&mut rng, out.concepts.len(), attach).into_vec();
        targets.sort_unstable();
        let new_links: Vec<CausalLink> = targets
            .into_iter()
            .map(|i| CausalLink::new(id.clone(), out.concepts[i].id.clone(), Sign::Negative))
            .collect();
        out.concepts.push(Concept::plain(id));
        out.links.extend(new_links);
    }
    out
}

/// A run of periods built around one base map: ordinary periods lose a random
/// share of up to `jitter` of the base links, the shocked period (if any) is
/// the base map hit by `shock`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesParams {
    pub periods: usize,
    pub first_period: i64,
    pub map: RandomMapParams,
    pub jitter: f64,
    /// Zero-based index of the shocked period.
    pub shock_at: Option<usize>,
    pub shock: ShockSpec,
}

pub fn gen_series(params: &SeriesParams, seed: u64) -> Result<Vec<CognitiveMap>, SynthError> {
    if params.periods == 0 {
        return Err(params_err("a series needs at least one period"));
    }
    if !(0.0..1.0).contains(&params.jitter) {
        return Err(params_err(format!("jitter {} outside [0, 1)", params.jitter)));
    }
    if params.shock_at.is_some_and(|t| t >= params.periods) {
        return Err(params_err("shocked period beyond the end of the series"));
    }
    params.shock.check()?;
    let base = gen_random_map(&params.map, seed)?;
    let mut rng = rng(seed ^ 0x5eed_5e71_e500_0000);
    (0..params.periods)
        .map(|t| {
            let period_seed: u64 = rng.gen();
            let spec = if params.shock_at == Some(t) {
                params.shock.clone()
            } else {
                ShockSpec {
                    link_removal_fraction: rng.gen_range(0.0..=params.jitter),
                    ..ShockSpec::default()
                }
            };
            let label = (params.first_period + t as i64).to_string();
            let mut m = inject_shock(&base, &spec, period_seed);
            m.map_id = format!("{}-{label}", base.map_id);
            m.period = Some(label);
            Ok(m)
        })
        .collect()
}

/// What `--random` asks for, parsed from `kind:key=value,...`:
///
/// - `frame:alternatives=A,consequences=C,clusters=K,cross=P`
/// - `map:concepts=N,links=L`
/// - `series:periods=T,concepts=N,links=L[,jitter=J][,shock_at=I][,start=Y]`
///
/// A series without `shock_at` has no shocked period. Its shock defaults to
/// removing half the links.
#[derive(Debug, Clone, PartialEq)]
pub enum RandomSpec {
    Frame(RandomFrameParams),
    Map(RandomMapParams),
    Series(SeriesParams),
}

impl FromStr for RandomSpec {
    type Err = SynthError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut values = std::collections::BTreeMap::new();
        for part in rest.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| params_err(format!("random item `{part}` is not key=value")))?;
            values.insert(k.to_owned(), v.to_owned());
        }
        let mut take = |key: &str| values.remove(key);
        fn num<T: FromStr>(key: &str, raw: Option<String>) -> Result<T, SynthError> {
            let raw = raw.ok_or_else(|| params_err(format!("missing `{key}`")))?;
            raw.parse()
                .map_err(|_| params_err(format!("bad value `{raw}` for `{key}`")))
        }
        let spec = match kind {
            "frame" => RandomSpec::Frame(RandomFrameParams {
                n_alternatives: num("alternatives", take("alternatives"))?,
                n_consequences: num("consequences", take("consequences"))?,
                n_clusters: num("clusters", take("clusters"))?,
                cross_link_prob: num("cross", take("cross"))?,
            }),
            "map" => RandomSpec::Map(RandomMapParams {
                n_concepts: num("concepts", take("concepts"))?,
                n_links: num("links", take("links"))?,
            }),
            "series" => RandomSpec::Series(SeriesParams {
                periods: num("periods", take("periods"))?,
                map: RandomMapParams {
                    n_concepts: num("concepts", take("concepts"))?,
                    n_links: num("links", take("links"))?,
                },
                jitter: take("jitter").map_or(Ok(0.05), |v| num("jitter", Some(v)))?,
                shock_at: take("shock_at").map(|v| num("shock_at", Some(v))).transpose()?,
                first_period: take("start").map_or(Ok(1), |v| num("start", Some(v)))?,
                shock: ShockSpec {
                    link_removal_fraction: 0.5,
                    ..ShockSpec::default()
                },
            }),
            other => {
                return Err(params_err(format!(
                    "unknown random kind `{other}` (expected frame|map|series)"
                )))
            }
        };
        if let Some(extra) = values.keys().next() {
            return Err(params_err(format!("unknown key `{extra}` for `{kind}`")));
        }
        Ok(spec)
    }
}
