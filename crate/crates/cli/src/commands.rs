//! Command-line front end.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use confein_core::chart::MetricChart;
use confein_core::curvature::CurvatureJets;
use confein_core::scales::{self, Curve, ScaleError};
use serde::Serialize;

use crate::analyze::{self, AnalyzeOptions, Report};
use crate::catalog;
use crate::spec::{self, MetricSpecFile, SpecError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_SPEC: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "confein", version, about = "Conformal curvature, tractors and conformally Einstein obstructions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the full pipeline at sampled points and write a JSON report.
    Analyze {
        file: PathBuf,
        #[arg(long, default_value_t = 20)]
        points: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Jet order; raised to at least 5 (6 for the dimension-6 obstruction).
        #[arg(long, default_value_t = 4)]
        order: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Skip a stage; only `b6` is recognised.
        #[arg(long, value_parser = ["b6"])]
        skip: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Human-readable verdicts at default settings.
    Classify { file: PathBuf },
    /// Write the metric file of e^{2ω}g.
    Rescale {
        file: PathBuf,
        #[arg(long)]
        omega: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parallel transport a tractor along a parametric curve.
    Transport {
        file: PathBuf,
        /// Coordinate expressions in `t ∈ [0,1]`, separated by `;`.
        #[arg(long)]
        curve: String,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        /// Initial upper slots `σ,μ^1..μ^n,ρ`; defaults to the scale tractor
        /// of the declared scale, or `(1, 0, …, 0)`.
        #[arg(long)]
        tractor: Option<String>,
    },
    /// List or dump the built-in metrics.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
}

#[derive(Debug, Subcommand)]
pub enum CatalogAction {
    List,
    Dump {
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// An error with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<SpecError> for Failure {
    fn from(e: SpecError) -> Failure {
        Failure { code: EXIT_SPEC, message: e.to_string() }
    }
}

fn numeric(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_NUMERIC, message: message.into() }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_USAGE, message: message.into() }
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn run_analyze(chart: &MetricChart, opts: &AnalyzeOptions) -> Result<Report, Failure> {
    if opts.points == 0 {
        return Err(usage("--points must be positive"));
    }
    if !(opts.tol > 0.0 && opts.tol < 1.0) {
        return Err(usage("--tol must lie in (0, 1)"));
    }
    let report = analyze::analyze(chart, opts);
    if report.aggregate.evaluated_points == 0 {
        let first = report.points.iter().find_map(|p| p.error.clone()).unwrap_or_default();
        return Err(numeric(format!("no point could be evaluated: {first}")));
    }
    Ok(report)
}

pub fn classify_text(report: &Report) -> String {
    let a = &report.aggregate;
    let yes = |b: bool| if b { "yes" } else { "no" };
    let mut s = format!("{} (dimension {}, {} points)\n", report.run.chart, report.run.dimension, report.run.points);
    s += &format!("einstein in declared coordinates: {}\n", yes(a.einstein));
    s += &format!("conformally einstein candidate: {}\n", yes(a.conformally_einstein_candidate));
    s += &format!("weakly generic fraction: {:.3}\n", a.weakly_generic_fraction);
    s += &format!("max rank of (Ω, ∇Ω): {} (full rank {})\n", a.max_rank, report.run.dimension + 2);
    for (name, st) in &a.norms {
        s += &format!("{name}: max {:.3e}, median {:.3e}\n", st.max, st.median);
    }
    if a.failed_points > 0 {
        s += &format!("points not evaluated: {}\n", a.failed_points);
    }
    s
}

#[derive(Serialize)]
struct TransportOutput {
    chart: String,
    curve: String,
    steps: usize,
    start: Vec<f64>,
    end: Vec<f64>,
    closure_deviation: Option<Vec<f64>>,
    h_drift: f64,
    h_drift_per_length: f64,
}

fn parse_tractor(text: &str, d: usize) -> Result<Vec<f64>, Failure> {
    let v: Vec<f64> = text
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| usage(format!("--tractor: {e}"))))
        .collect::<Result<_, _>>()?;
    if v.len() != d {
        return Err(usage(format!("--tractor needs {d} numbers, got {}", v.len())));
    }
    Ok(v)
}

fn transport(chart: &MetricChart, curve: &str, steps: usize, tractor: Option<&str>) -> Result<String, Failure> {
    let n = chart.dimension();
    let exprs: Vec<&str> = curve.split(';').map(str::trim).collect();
    let curve = Curve::parametric(chart, &exprs).map_err(|e| usage(e.to_string()))?;
    let i0 = match tractor {
        Some(t) => parse_tractor(t, n + 2)?,
        None => {
            let Curve::Parametric(e) = &curve else { unreachable!() };
            let params = chart.parameter_values();
            let start: Vec<f64> = e
                .iter()
                .map(|x| x.eval(&[0.0], &params))
                .collect::<Result<_, _>>()
                .map_err(|e| usage(format!("curve: {e}")))?;
            match &chart.scale {
                Some(s) => {
                    let curv = CurvatureJets::compute(chart, &start, 2).map_err(|e| numeric(e.to_string()))?;
                    let sigma = scales::scale_jet(chart, s, &start, 2).map_err(|e| numeric(e.to_string()))?;
                    scales::build_scale_tractor(&curv, &sigma).slots
                }
                None => {
                    let mut v = vec![0.0; n + 2];
                    v[0] = 1.0;
                    v
                }
            }
        }
    };
    let r = scales::parallel_transport(chart, &i0, &curve, steps).map_err(|e| match e {
        ScaleError::OutsideDomain { .. } | ScaleError::CurveDimension { .. } | ScaleError::Parse { .. } => {
            usage(e.to_string())
        }
        other => numeric(other.to_string()),
    })?;
    Ok(crate::json::to_string(&TransportOutput {
        chart: chart.name.clone(),
        curve: r.curve,
        steps: r.steps,
        start: r.start,
        end: r.end,
        closure_deviation: r.closure_deviation,
        h_drift_per_length: r.h_drift / r.parameter_length,
        h_drift: r.h_drift,
    }))
}

pub fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Analyze { file, points, seed, order, tol, skip, out } => {
            let chart = spec::load_spec(&file)?;
            let opts = AnalyzeOptions { points, seed, order, tol, skip_b6: skip.iter().any(|s| s == "b6") };
            let report = run_analyze(&chart, &opts)?;
            emit(&report.to_json(), out.as_deref())
        }
        Command::Classify { file } => {
            let chart = spec::load_spec(&file)?;
            let report = run_analyze(&chart, &AnalyzeOptions::default())?;
            emit(&classify_text(&report), None)
        }
        Command::Rescale { file, omega, out } => {
            let chart = spec::load_spec(&file)?;
            let rescaled = scales::rescale(&chart, &omega).map_err(|e| Failure { code: EXIT_SPEC, message: e.to_string() })?;
            emit(&MetricSpecFile::from_chart(&rescaled).to_json(), out.as_deref())
        }
        Command::Transport { file, curve, steps, tractor } => {
            let chart = spec::load_spec(&file)?;
            emit(&transport(&chart, &curve, steps, tractor.as_deref())?, None)
        }
        Command::Catalog { action: CatalogAction::List } => {
            let mut s = String::new();
            for e in catalog::ENTRIES {
                s += &format!("{}\t{}\n", e.name, e.summary);
            }
            emit(&s, None)
        }
        Command::Catalog { action: CatalogAction::Dump { name, out } } => {
            let e = catalog::get(&name).ok_or_else(|| usage(format!("unknown catalog entry {name:?}")))?;
            emit(&MetricSpecFile::from_description(&e.description()).to_json(), out.as_deref())
        }
    }
}

/// Parse arguments and run; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}
