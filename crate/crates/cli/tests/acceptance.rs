//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::BTreeSet;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use qmap_core::codec::{frame_to_json, map_to_json, parse_frame, parse_map, save_frame, save_map, Report, ReportFormat};
use qmap_core::metrics::{closeness, density, map_metrics, LinkMaximum, MapMetrics, MetricOptions};
use qmap_core::model::{to_simplicial_family, CausalLink, CognitiveMap, Concept, Sign, Simplex, SimplicialFamily};
use qmap_core::qanalysis::{
    complexity_with, q_components_oracle, q_components_with, shared_face_dim, structure_vector_with, Convention,
};
use qmap_core::series::{detect_disruption, Baseline, DetectOptions, Metric, MetricSeries, SeriesEntry};
use qmap_core::synth::{gen_preset, gen_random_frame, gen_random_map, Preset, RandomFrameParams, RandomMapParams};
use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64;

const ORACLE_FAMILIES: u64 = 2000;
const ORACLE_TOL: f64 = 1e-12;
const METRIC_TOL: f64 = 1e-12;
const RATIO_TOL: f64 = 1e-12;
const PRESET_BUDGET: Duration = Duration::from_millis(1);
const ORACLE_BUDGET: Duration = Duration::from_secs(10);
const ANALYZE_BUDGET: Duration = Duration::from_secs(1);
const COMPLEXITY_BUDGET: Duration = Duration::from_secs(5);
const DEFAULT_THRESHOLD: f64 = 0.30;
const DENSITY_DROP: f64 = 0.43;
const CLOSENESS_DROP: f64 = 0.53;
const MAX_FLUCTUATION: f64 = 0.10;
const COUNT_STEP: f64 = 0.04;
const DISRUPTION_SEEDS: u64 = 500;
const SCALING_SEEDS: u64 = 200;
const CLOSURE_SEEDS: u64 = 100;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

/// Slowest of several timed runs of `f`, after one warm-up call.
fn worst_time<T>(runs: usize, mut f: impl FnMut() -> T) -> (T, Duration) {
    let mut out = f();
    let mut worst = Duration::ZERO;
    for _ in 0..runs {
        let t = Instant::now();
        out = f();
        worst = worst.max(t.elapsed());
    }
    (out, worst)
}

fn c1_worked_values() -> Verdict {
    let cases = [
        (Preset::OneToOne(1), 0.0, "()"),
        (Preset::OneToOne(3), 0.0, "()"),
        (Preset::OneToOne(10), 0.0, "()"),
        (Preset::SharedEdge, 3.0, "(1,1)"),
        (Preset::BridgedClusters, 2.0, "(1,2)"),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (preset, want_c, want_s) in cases {
        let frame = gen_preset(preset).expect("preset");
        let ((c, s), took) = worst_time(5, || {
            let family = to_simplicial_family(&frame).family;
            (
                complexity_with(&family, Convention::Paper).complexity,
                structure_vector_with(&family, Convention::Paper).to_string(),
            )
        });
        let ok = c == want_c && s == want_s && took < PRESET_BUDGET;
        pass &= ok;
        parts.push(format!("{}: C={c} s={s} in {took:?}", frame.frame_id));
    }
    verdict(pass, parts.join("; "))
}

fn c2_additivity() -> Verdict {
    let copy = |tag: &str| -> Vec<Simplex> {
        [("EA1", &["P1", "P2"][..]), ("EA2", &["P1", "P2", "P3"]), ("EA3", &["P3", "P4"])]
            .iter()
            .map(|(n, vs)| Simplex::new(format!("{tag}{n}"), vs.iter().map(|v| format!("{tag}{v}"))).unwrap())
            .collect()
    };
    let single = SimplicialFamily::new(copy("a.")).unwrap();
    let double = SimplicialFamily::new(copy("a.").into_iter().chain(copy("b.")).collect()).unwrap();
    let one = complexity_with(&single, Convention::Paper).complexity;
    let two = complexity_with(&double, Convention::Paper).complexity;
    verdict(one == 3.0 && two == 6.0, format!("one copy C={one}, two disjoint copies C={two}"))
}

fn random_family(seed: u64) -> SimplicialFamily {
    let mut rng = Pcg64::seed_from_u64(seed);
    let n = rng.gen_range(1..=8);
    let v = rng.gen_range(1..=10);
    let simplices = (0..n)
        .map(|i| {
            let size = rng.gen_range(1..=v);
            let mut verts = BTreeSet::new();
            while verts.len() < size {
                verts.insert(format!("v{}", rng.gen_range(0..v)));
            }
            Simplex::new(format!("s{i}"), verts).unwrap()
        })
        .collect();
    SimplicialFamily::new(simplices).unwrap()
}

/// Complexity built only from oracle classes and pairwise shared faces.
fn oracle_complexity(f: &SimplicialFamily, convention: Convention) -> f64 {
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

fn c3_oracle_equivalence() -> Verdict {
    let start = Instant::now();
    let mut mismatches = 0;
    let mut worst = 0.0f64;
    for seed in 0..ORACLE_FAMILIES {
        let f = random_family(seed);
        let top_dim = f.simplices().iter().map(|s| s.dimension()).max().unwrap_or(0);
        for convention in [Convention::Paper, Convention::Atkin] {
            for q in 0..=top_dim + 1 {
                if q_components_with(&f, q, convention) != q_components_oracle(&f, q, convention) {
                    mismatches += 1;
                }
            }
            let fast = complexity_with(&f, convention).complexity;
            worst = worst.max((fast - oracle_complexity(&f, convention)).abs());
        }
    }
    let took = start.elapsed();
    verdict(
        mismatches == 0 && worst <= ORACLE_TOL && took < ORACLE_BUDGET,
        format!(
            "{ORACLE_FAMILIES} families x 2 conventions, {mismatches} class mismatches, max |dC| = {worst:e}, {took:?}"
        ),
    )
}

fn map_from(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> CognitiveMap {
    let mut m = CognitiveMap::new(format!("n{n}"));
    m.concepts = (0..n).map(|i| Concept::plain(format!("c{i}"))).collect();
    m.links = edges
        .into_iter()
        .map(|(a, b)| CausalLink::new(format!("c{a}"), format!("c{b}"), Sign::Unsigned))
        .collect();
    m
}

fn c4_metric_formulas() -> Verdict {
    let five = map_from(5, (0..4).map(|i| (i, i + 1)));
    let d = density(&five, LinkMaximum::Paper).unwrap();
    let path = map_from(3, [(0, 1), (1, 2)]);
    let u_path = closeness(&path, false).unwrap().average;
    let mut pass = d == 0.4 && u_path == 0.5;
    let mut parts = vec![format!("density(5,4)={d}"), format!("U(path3)={u_path}")];
    for n in [2, 5, 10] {
        let complete = map_from(n, (0..n).flat_map(|a| (0..n).filter(move |&b| b != a).map(move |b| (a, b))));
        let u = closeness(&complete, false).unwrap().average;
        pass &= (u - 1.0 / n as f64).abs() <= METRIC_TOL;
        parts.push(format!("U(K{n})={u}"));
    }
    verdict(pass, parts.join(", "))
}

fn record(period: usize, n_concepts: usize, n_links: usize, density: f64, avg_closeness: f64) -> SeriesEntry {
    SeriesEntry {
        period: (1990 + period).to_string(),
        metrics: MapMetrics {
            num_concepts: n_concepts,
            num_links: n_links,
            links_per_concept: Some(n_links as f64 / n_concepts as f64),
            density: Some(density),
            avg_closeness: Some(avg_closeness),
            reachable_pair_fraction: Some(1.0),
        },
        complexity: None,
    }
}

/// Eight periods where every metric moves by at most `MAX_FLUCTUATION`
/// between consecutive periods, except at `shock`, where density and average
/// closeness fall by the injected fractions. With `persist`, later periods
/// continue from the shocked level; otherwise they return to the pre-shock one.
/// Counts move by at most `COUNT_STEP` so their ratio stays within bounds.
fn synthetic_series(seed: u64, shock: usize, persist: bool) -> MetricSeries {
    let mut rng = Pcg64::seed_from_u64(seed);
    let (mut c, mut l, mut d, mut u) = (120.0, 600.0, 0.084, 0.31);
    let mut entries = Vec::new();
    for t in 0..8 {
        let (mut dt, mut ut) = (d, u);
        if t > 0 {
            c *= 1.0 + rng.gen_range(-COUNT_STEP..=COUNT_STEP);
            l *= 1.0 + rng.gen_range(-COUNT_STEP..=COUNT_STEP);
            if t == shock {
                dt = d * (1.0 - DENSITY_DROP);
                ut = u * (1.0 - CLOSENESS_DROP);
            } else {
                dt = d * (1.0 + rng.gen_range(-MAX_FLUCTUATION..=MAX_FLUCTUATION));
                ut = u * (1.0 + rng.gen_range(-MAX_FLUCTUATION..=MAX_FLUCTUATION));
            }
        }
        if t != shock || persist {
            d = dt;
            u = ut;
        }
        entries.push(record(t, c.round() as usize, l.round() as usize, dt, ut));
    }
    MetricSeries::from_entries(entries).unwrap()
}

/// Largest relative change between consecutive periods, ignoring the shock
/// and, when the series recovers, the period right after it.
fn max_fluctuation_outside(series: &MetricSeries, shock: usize, persist: bool) -> f64 {
    let mut worst = 0.0f64;
    for m in Metric::ALL {
        let v = series.values(m);
        for t in 1..v.len() {
            if t == shock || (t == shock + 1 && !persist) {
                continue;
            }
            if let (Some(prev), Some(cur)) = (v[t - 1], v[t]) {
                worst = worst.max(((cur - prev) / prev).abs());
            }
        }
    }
    worst
}

fn c5_disruption() -> Verdict {
    let options = DetectOptions::default();
    let mut pass = options.threshold == DEFAULT_THRESHOLD && options.baseline == Baseline::PrevPeriod;
    let mut runs = 0;
    let mut misses = 0;
    let mut false_positives = 0;
    let mut worst_fluct = 0.0f64;
    let mut drops = (f64::NAN, f64::NAN);
    for seed in 0..DISRUPTION_SEEDS {
        let shock = 1 + (seed as usize % 7);
        for persist in [true, false] {
            runs += 1;
            let series = synthetic_series(seed, shock, persist);
            worst_fluct = worst_fluct.max(max_fluctuation_outside(&series, shock, persist));
            let report = detect_disruption(&series, &options).unwrap();
            let shocked = &series.entries()[shock].period;
            let at_shock: BTreeSet<Metric> = report.flags_at(shocked).map(|f| f.metric).collect();
            if !(at_shock.contains(&Metric::Density) && at_shock.contains(&Metric::AvgCloseness)) {
                misses += 1;
            }
            false_positives += report.flags.iter().filter(|f| &f.period != shocked).count();
            if seed == 0 && persist {
                for f in report.flags_at(shocked) {
                    match f.metric {
                        Metric::Density => drops.0 = f.relative_drop,
                        Metric::AvgCloseness => drops.1 = f.relative_drop,
                        _ => {}
                    }
                }
            }
        }
    }
    pass &= misses == 0 && false_positives == 0 && worst_fluct <= MAX_FLUCTUATION + 1e-9;
    verdict(
        pass,
        format!(
            "{runs} series, drops {:.2}/{:.2}, {misses} missed, {false_positives} false positives, max fluctuation elsewhere {:.4}",
            drops.0, drops.1, worst_fluct
        ),
    )
}

fn disjoint_copies(base: &CognitiveMap, k: usize) -> CognitiveMap {
    let mut m = CognitiveMap::new(format!("{}x{k}", base.map_id));
    for copy in 0..k {
        m.concepts.extend(
            base.concepts
                .iter()
                .map(|c| Concept::new(format!("{copy}.{}", c.id), c.label.clone(), c.role)),
        );
        m.links.extend(
            base.links
                .iter()
                .map(|l| CausalLink::new(format!("{copy}.{}", l.source), format!("{copy}.{}", l.target), l.sign)),
        );
    }
    m
}

fn c6_ratio_stability() -> Verdict {
    let mut worst = 0.0f64;
    let mut periods = 0;
    for seed in 0..SCALING_SEEDS {
        let mut rng = Pcg64::seed_from_u64(seed);
        let n = rng.gen_range(2..=30);
        let l = rng.gen_range(1..=n * (n - 1));
        let base = gen_random_map(&RandomMapParams { n_concepts: n, n_links: l }, seed).unwrap();
        let ratios: Vec<f64> = (0..8)
            .map(|_| {
                let k = rng.gen_range(1..=6);
                map_metrics(&disjoint_copies(&base, k), &MetricOptions::default())
                    .links_per_concept
                    .unwrap()
            })
            .collect();
        periods += ratios.len();
        for r in &ratios {
            worst = worst.max((r - ratios[0]).abs());
        }
    }
    verdict(
        worst <= RATIO_TOL,
        format!("{SCALING_SEEDS} series, {periods} periods, max ratio deviation {worst:e}"),
    )
}

fn timed_cli(args: &[&str]) -> (bool, Duration, String) {
    let t = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_qmap")).args(args).output().expect("run qmap");
    let took = t.elapsed();
    (
        out.status.success(),
        took,
        String::from_utf8_lossy(&out.stdout).lines().next().unwrap_or("").to_owned(),
    )
}

fn c7_scale(dir: &Path) -> Verdict {
    let map = gen_random_map(
        &RandomMapParams {
            n_concepts: 1000,
            n_links: 10_000,
        },
        7,
    )
    .unwrap();
    let map_path = dir.join("big_map.json");
    save_map(&map, &map_path).unwrap();
    let frame = gen_random_frame(
        &RandomFrameParams {
            n_alternatives: 200,
            n_consequences: 200,
            n_clusters: 10,
            cross_link_prob: 1.0 / 36.0,
        },
        7,
    )
    .unwrap();
    let relations = frame.relations.len();
    let frame_path = dir.join("big_frame.json");
    save_frame(&frame, &frame_path).unwrap();

    let (ok_a, t_a, _) = timed_cli(&["analyze", map_path.to_str().unwrap()]);
    let (ok_c, t_c, line) = timed_cli(&["complexity", frame_path.to_str().unwrap()]);
    verdict(
        ok_a && ok_c && t_a < ANALYZE_BUDGET && t_c < COMPLEXITY_BUDGET,
        format!("analyze 1000/10000 in {t_a:?}; complexity 200x200 with {relations} relations in {t_c:?} ({line})"),
    )
}

fn c8_format_closure(dir: &Path) -> Verdict {
    let mut failures = 0;
    for seed in 0..CLOSURE_SEEDS {
        let mut rng = Pcg64::seed_from_u64(seed);
        let n = rng.gen_range(1..=40);
        let l = rng.gen_range(0..=(n * (n - 1)).min(200));
        let map = gen_random_map(&RandomMapParams { n_concepts: n, n_links: l }, seed).unwrap();
        let once = map_to_json(&parse_map(Path::new("m.json"), &map_to_json(&map)).unwrap().value);
        let twice = map_to_json(&parse_map(Path::new("m.json"), &once).unwrap().value);
        failures += usize::from(once != twice);

        let (alts, cons) = (rng.gen_range(1..=20), rng.gen_range(1..=20));
        let frame = gen_random_frame(
            &RandomFrameParams {
                n_alternatives: alts,
                n_consequences: cons,
                n_clusters: rng.gen_range(1..=alts.min(cons).min(4)),
                cross_link_prob: rng.gen_range(0.0..=1.0),
            },
            seed,
        )
        .unwrap();
        let once = frame_to_json(&parse_frame(Path::new("f.json"), &frame_to_json(&frame)).unwrap().value);
        let twice = frame_to_json(&parse_frame(Path::new("f.json"), &once).unwrap().value);
        failures += usize::from(once != twice);

        let report = Report::Map {
            period: seed.to_string(),
            metrics: map_metrics(&map, &MetricOptions::default()),
            complexity: Some(complexity_with(&to_simplicial_family(&frame).family, Convention::Paper).complexity),
        };
        for format in [ReportFormat::Json, ReportFormat::Csv] {
            failures += usize::from(report.render(format) != report.render(format));
        }
    }

    let manifest = dir.join("series/manifest.json");
    let maps = qmap_core::synth::gen_series(
        &qmap_core::synth::SeriesParams {
            periods: 8,
            first_period: 2000,
            map: RandomMapParams {
                n_concepts: 30,
                n_links: 160,
            },
            jitter: 0.05,
            shock_at: Some(4),
            shock: "links=0.45,inject=shock:5".parse().unwrap(),
        },
        3,
    )
    .unwrap();
    qmap_core::codec::write_series_bundle(&maps, &dir.join("series")).unwrap();
    let mut runs = Vec::new();
    for run in 0..2 {
        let json = dir.join(format!("r{run}.json"));
        let csv = dir.join(format!("r{run}.csv"));
        let svg = dir.join(format!("r{run}.svg"));
        let m = manifest.to_str().unwrap();
        Command::new(env!("CARGO_BIN_EXE_qmap"))
            .args(["series", m, "--out", json.to_str().unwrap(), "--plot", svg.to_str().unwrap()])
            .output()
            .unwrap();
        Command::new(env!("CARGO_BIN_EXE_qmap"))
            .args(["series", m, "--out", csv.to_str().unwrap()])
            .output()
            .unwrap();
        runs.push([json, csv, svg].map(|p| std::fs::read(p).unwrap_or_default()));
    }
    let reports_equal = runs[0] == runs[1] && runs[0].iter().all(|b| !b.is_empty());
    verdict(
        failures == 0 && reports_equal,
        format!(
            "{CLOSURE_SEEDS} maps + {CLOSURE_SEEDS} frames, {failures} mismatches; CLI series report and plot identical across two runs: {reports_equal}"
        ),
    )
}

fn main() -> ExitCode {
    let dir = tempfile::tempdir().expect("temp dir");
    let checks: Vec<(&str, Box<dyn Fn() -> Verdict>)> = vec![
        ("worked values", Box::new(c1_worked_values)),
        ("additivity", Box::new(c2_additivity)),
        ("oracle equivalence", Box::new(c3_oracle_equivalence)),
        ("metric formulas", Box::new(c4_metric_formulas)),
        ("disruption detection", Box::new(c5_disruption)),
        ("ratio stability", Box::new(c6_ratio_stability)),
        ("scale", Box::new(|| c7_scale(dir.path()))),
        ("format closure", Box::new(|| c8_format_closure(dir.path()))),
    ];
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let v = check();
        failed += usize::from(!v.pass);
        println!("{} {}. {name}: {}", if v.pass { "PASS" } else { "FAIL" }, i + 1, v.detail);
    }
    println!("acceptance: {} passed, {failed} failed", checks.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
