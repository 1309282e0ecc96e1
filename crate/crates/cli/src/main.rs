//! `qmap`: analyze cognitive maps, score decision-frame complexity, watch a
//! series of maps for disruption and generate benchmark inputs.
//!
//! Exit codes: 0 success, 1 invalid map, 2 I/O, schema or usage error,
//! 3 disruption detected by `series`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qmap_core::codec::{self, Report, ReportFormat};
use qmap_core::metrics::{map_metrics, LinkMaximum, MetricOptions};
use qmap_core::model::{to_simplicial_family, validate_map, CognitiveMap, Warning};
use qmap_core::qanalysis::{classes_by_level, complexity_with, Convention};
use qmap_core::series::{build_series, detect_disruption, Baseline, DetectOptions, PeriodInput};
use qmap_core::synth::{
    gen_preset, gen_random_frame, gen_random_map, gen_series, inject_shock, Preset, RandomSpec,
    ShockSpec,
};

const EXIT_INVALID: u8 = 1;
const EXIT_ERROR: u8 = 2;
const EXIT_DISRUPTED: u8 = 3;

#[derive(Parser)]
#[command(name = "qmap", version, about = "Structural uncertainty measures for cognitive maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct MetricArgs {
    /// Density denominator: paper = |C|(|C|-1)/2, directed = |C|(|C|-1)
    #[arg(long, default_value = "paper")]
    lmax: LinkMaximum,
    /// Measure closeness ignoring link direction
    #[arg(long)]
    undirected: bool,
}

impl MetricArgs {
    fn options(self) -> MetricOptions {
        MetricOptions {
            link_maximum: self.lmax,
            undirected: self.undirected,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Counts, density and closeness of one map
    Analyze {
        map: PathBuf,
        #[arg(long)]
        format: Option<ReportFormat>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        metrics: MetricArgs,
    },
    /// Structure vector and complexity of a decision frame
    Complexity {
        frame: PathBuf,
        #[arg(long, env = "QMAP_CONVENTION", default_value = "paper")]
        convention: Convention,
        /// Also print the q-connected classes at every level
        #[arg(long)]
        explain: bool,
    },
    /// Metric series over a manifest of maps, with drop detection
    Series {
        manifest: PathBuf,
        #[arg(long, default_value_t = 0.30)]
        threshold: f64,
        /// prev | trailing:k | overall
        #[arg(long, default_value = "prev")]
        baseline: Baseline,
        /// Flag rises as well as drops
        #[arg(long)]
        two_sided: bool,
        #[arg(long)]
        plot: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        format: Option<ReportFormat>,
        #[arg(long, env = "QMAP_CONVENTION", default_value = "paper")]
        convention: Convention,
        #[command(flatten)]
        metrics: MetricArgs,
    },
    /// Write a preset or random frame, a random or shocked map, or a synthetic series
    Gen(GenArgs),
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["preset", "random", "from"]))]
struct GenArgs {
    /// fig2a:N | fig2b | fig2c
    #[arg(long)]
    preset: Option<Preset>,
    /// frame:alternatives=A,consequences=C,clusters=K,cross=P | map:concepts=N,links=L |
    /// series:periods=T,concepts=N,links=L[,jitter=J][,shock_at=I][,start=Y]
    #[arg(long)]
    random: Option<RandomSpec>,
    /// Existing map to shock
    #[arg(long)]
    from: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// links=F,concepts=F,inject=LABEL:N (maps and series only)
    #[arg(long)]
    shock: Option<ShockSpec>,
    /// Output file; a directory for series. Defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("qmap: {msg}");
    ExitCode::from(code)
}

fn warn_all(origin: &Path, warnings: &[Warning]) {
    for w in warnings {
        eprintln!("warning: {}: {w}", origin.display());
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), ExitCode> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| fail(EXIT_ERROR, format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn report_format(explicit: Option<ReportFormat>, out: Option<&Path>) -> ReportFormat {
    explicit
        .or_else(|| out.and_then(ReportFormat::from_path))
        .unwrap_or(ReportFormat::Json)
}

fn load_valid_map(path: &Path) -> Result<CognitiveMap, ExitCode> {
    let loaded = codec::load_map(path).map_err(|e| fail(EXIT_ERROR, e))?;
    warn_all(path, &loaded.warnings);
    let violations = validate_map(&loaded.value);
    if !violations.is_empty() {
        for v in &violations {
            eprintln!("violation: {}: {v}", path.display());
        }
        return Err(fail(
            EXIT_INVALID,
            format!("{}: {} violation(s)", path.display(), violations.len()),
        ));
    }
    Ok(loaded.value)
}

fn analyze(map: &Path, format: Option<ReportFormat>, out: Option<&Path>, m: MetricArgs) -> Result<(), ExitCode> {
    let map = load_valid_map(map)?;
    let report = Report::Map {
        period: map.period.clone().unwrap_or_else(|| map.map_id.clone()),
        metrics: map_metrics(&map, &m.options()),
        complexity: None,
    };
    emit(&report.render(report_format(format, out)), out)
}

fn complexity(frame: &Path, convention: Convention, explain: bool) -> Result<(), ExitCode> {
    let loaded = codec::load_frame(frame).map_err(|e| fail(EXIT_ERROR, e))?;
    warn_all(frame, &loaded.warnings);
    let projection = to_simplicial_family(&loaded.value);
    warn_all(frame, &projection.warnings);
    let family = projection.family;
    let report = complexity_with(&family, convention);

    let mut text = format!(
        "C = {}, s = {}\n",
        codec::format_sig6(report.complexity),
        report.structure_vector
    );
    match report.top_level() {
        Some(q) => writeln!(text, "Q = {q}"),
        None => writeln!(text, "Q = undefined"),
    }
    .expect("write to string");
    if explain {
        writeln!(text, "convention = {convention}").expect("write to string");
        for level in classes_by_level(&family, convention) {
            let classes: Vec<String> = level
                .classes
                .iter()
                .map(|c| format!("{{{}}}", c.join(",")))
                .collect();
            writeln!(text, "q = {}: {}", level.level, classes.join(" ")).expect("write to string");
        }
        for part in &report.components {
            writeln!(
                text,
                "component {{{}}}: s = {}, C = {}",
                part.members.join(","),
                part.structure_vector,
                codec::format_sig6(part.complexity)
            )
            .expect("write to string");
        }
    }
    print!("{text}");
    Ok(())
}

struct SeriesArgs<'a> {
    manifest: &'a Path,
    detect: DetectOptions,
    plot: Option<&'a Path>,
    out: Option<&'a Path>,
    format: Option<ReportFormat>,
    convention: Convention,
    metrics: MetricArgs,
}

fn series(args: SeriesArgs) -> Result<bool, ExitCode> {
    let manifest = codec::load_series(args.manifest).map_err(|e| fail(EXIT_ERROR, e))?;
    let mut inputs = Vec::with_capacity(manifest.entries.len());
    for entry in &manifest.entries {
        let map = load_valid_map(&entry.map)?;
        let frame = match &entry.frame {
            Some(p) => {
                let loaded = codec::load_frame(p).map_err(|e| fail(EXIT_ERROR, e))?;
                warn_all(p, &loaded.warnings);
                Some(loaded.value)
            }
            None => None,
        };
        inputs.push(PeriodInput {
            period: entry.period.clone(),
            map,
            frame,
        });
    }
    let series = build_series(&inputs, &args.metrics.options(), args.convention)
        .map_err(|e| fail(EXIT_ERROR, e))?;
    let disruption = detect_disruption(&series, &args.detect).map_err(|e| fail(EXIT_ERROR, e))?;
    for f in &disruption.flags {
        eprintln!(
            "disruption: {} {} {} {}% (baseline {}, value {})",
            f.period,
            f.metric,
            f.direction,
            codec::format_sig6(100.0 * f.relative_drop),
            codec::format_sig6(f.baseline),
            codec::format_sig6(f.value)
        );
    }
    if let Some(p) = args.plot {
        codec::write_plot(&series, p).map_err(|e| fail(EXIT_ERROR, e))?;
    }
    let disrupted = disruption.is_disrupted();
    let report = Report::Series {
        series,
        baseline: args.detect.baseline,
        disruption,
    };
    emit(&report.render(report_format(args.format, args.out)), args.out)?;
    Ok(disrupted)
}

fn gen(args: &GenArgs) -> Result<(), ExitCode> {
    let out = args.out.as_deref();
    let frame_shock = || fail(EXIT_ERROR, "--shock applies to maps, not frames");
    if let Some(preset) = args.preset {
        if args.shock.is_some() {
            return Err(frame_shock());
        }
        let frame = gen_preset(preset).map_err(|e| fail(EXIT_ERROR, e))?;
        return emit(&codec::frame_to_json(&frame), out);
    }
    if let Some(path) = &args.from {
        let map = load_valid_map(path)?;
        let shocked = match &args.shock {
            Some(spec) => inject_shock(&map, spec, args.seed),
            None => map,
        };
        return emit(&codec::map_to_json(&shocked), out);
    }
    match args.random.as_ref().expect("clap requires one source") {
        RandomSpec::Frame(p) => {
            if args.shock.is_some() {
                return Err(frame_shock());
            }
            let frame = gen_random_frame(p, args.seed).map_err(|e| fail(EXIT_ERROR, e))?;
            emit(&codec::frame_to_json(&frame), out)
        }
        RandomSpec::Map(p) => {
            let map = gen_random_map(p, args.seed).map_err(|e| fail(EXIT_ERROR, e))?;
            let map = match &args.shock {
                Some(spec) => inject_shock(&map, spec, args.seed),
                None => map,
            };
            emit(&codec::map_to_json(&map), out)
        }
        RandomSpec::Series(p) => {
            let Some(dir) = out else {
                return Err(fail(EXIT_ERROR, "series generation needs --out <directory>"));
            };
            let mut params = p.clone();
            if let Some(spec) = &args.shock {
                params.shock = spec.clone();
            }
            let maps = gen_series(&params, args.seed).map_err(|e| fail(EXIT_ERROR, e))?;
            let manifest = codec::write_series_bundle(&maps, dir).map_err(|e| fail(EXIT_ERROR, e))?;
            println!("{}", manifest.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Analyze {
            map,
            format,
            out,
            metrics,
        } => analyze(map, *format, out.as_deref(), *metrics).map(|()| ExitCode::SUCCESS),
        Command::Complexity {
            frame,
            convention,
            explain,
        } => complexity(frame, *convention, *explain).map(|()| ExitCode::SUCCESS),
        Command::Series {
            manifest,
            threshold,
            baseline,
            two_sided,
            plot,
            out,
            format,
            convention,
            metrics,
        } => series(SeriesArgs {
            manifest,
            detect: DetectOptions {
                threshold: *threshold,
                baseline: *baseline,
                two_sided: *two_sided,
            },
            plot: plot.as_deref(),
            out: out.as_deref(),
            format: *format,
            convention: *convention,
            metrics: *metrics,
        })
        .map(|disrupted| {
            if disrupted {
                ExitCode::from(EXIT_DISRUPTED)
            } else {
                ExitCode::SUCCESS
            }
        }),
        Command::Gen(args) => gen(args).map(|()| ExitCode::SUCCESS),
    };
    outcome.unwrap_or_else(|code| code)
}
