#![allow(clippy::needless_range_loop)]

mod config;
mod report;
mod suites;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cr3kit::deform::{
    cr_reeb_sweep, deform_type0, deform_type2, holder_volume_check, reeb_deform_type1, Deformation,
    DeformationKind, HolderReport,
};
use cr3kit::{CurvatureReport, Error, Point, SasakiChart, ScalarField};
use serde::Serialize;

use config::{Config, ConnectionSpec, DeformationSpec};
use report::{Check, Sample, VerificationReport, SCHEMA, TOL_EXACT, TOL_QUADRATURE};
use suites::{Sampling, Suite};

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "cr3kit",
    version,
    about = "Checks Sasakian and CR invariants of circle-bundle charts"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Catalog model (flat, round, hyperbolic) or `custom:<u>`.
    #[arg(long, global = true, conflicts_with = "config")]
    model: Option<String>,
    /// TOML or JSON model file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Connection form override: "x-integral" or a one-form such as "x*dy - y*dx".
    #[arg(long, global = true)]
    connection: Option<String>,
    /// Base grid resolution per axis.
    #[arg(long, global = true, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..=512))]
    grid: u64,
    /// Tolerance applied to every check.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Include wall_time_ms in reports.
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run invariant suites and report the largest defect of every check.
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
    },
    /// Tabulate curvature quantities on the grid or at given points.
    Curvature {
        /// Semicolon-separated points `x,y[,t]`.
        #[arg(long)]
        points: Option<String>,
    },
    /// Apply a deformation and re-check the result.
    Deform {
        #[arg(long, value_enum)]
        kind: Option<KindArg>,
        /// Type-0 factor.
        #[arg(long)]
        c: Option<f64>,
        /// Type-1 function.
        #[arg(long)]
        f: Option<String>,
        /// Type-2 potential.
        #[arg(long)]
        sigma: Option<String>,
        /// Also run the volume inequality check.
        #[arg(long)]
        holder: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Type0,
    Type1,
    Type2,
}

impl From<KindArg> for DeformationKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Type0 => DeformationKind::Type0,
            KindArg::Type1 => DeformationKind::Type1,
            KindArg::Type2 => DeformationKind::Type2,
        }
    }
}

/// Failure that ends the run with a specific exit code.
struct Exit {
    code: u8,
    message: String,
}

fn usage(message: impl Into<String>) -> Exit {
    Exit {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

/// Output plus the pass flag that selects the exit code.
struct Outcome {
    body: Vec<u8>,
    pass: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("cr3kit: {}", e.message);
        return ExitCode::from(e.code);
    }
    let result = run(&cli).and_then(|o| {
        emit(&cli.common, &o.body)?;
        Ok(o.pass)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAIL),
        Err(e) => {
            eprintln!("cr3kit: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn configure_threads() -> Result<(), Exit> {
    let Ok(raw) = std::env::var("CR3KIT_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        usage(format!(
            "CR3KIT_THREADS must be a positive integer, got `{raw}`"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| usage(e.to_string()))
}

fn emit(common: &Common, body: &[u8]) -> Result<(), Exit> {
    let io = |e: std::io::Error| Exit {
        code: EXIT_USAGE,
        message: e.to_string(),
    };
    match &common.out {
        Some(path) => {
            std::fs::write(path, body).map_err(|e| usage(format!("{}: {e}", path.display())))
        }
        None => std::io::stdout().write_all(body).map_err(io),
    }
}

fn load_config(common: &Common) -> Result<Config, Exit> {
    let mut cfg = match (&common.model, &common.config) {
        (Some(tag), None) => Config::from_tag(tag),
        (None, Some(path)) => Config::load(path).map_err(usage)?,
        _ => return Err(usage("one of --model or --config is required")),
    };
    if let Some(conn) = &common.connection {
        cfg.connection = Some(ConnectionSpec::Text(conn.clone()));
    }
    Ok(cfg)
}

fn sampling(common: &Common, phi: bool) -> Sampling {
    Sampling {
        grid: common.grid as usize,
        seed: common.seed,
        phi,
    }
}

fn run(cli: &Cli) -> Result<Outcome, Exit> {
    let common = &cli.common;
    if let Some(t) = common.tol {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(usage(format!(
                "--tol must be a non-negative number, got {t}"
            )));
        }
    }
    let cfg = load_config(common)?;
    let chart = cfg.build().map_err(usage)?;
    let started = Instant::now();
    let elapsed = || common.timing.then(|| started.elapsed().as_millis() as u64);
    match &cli.command {
        Command::Verify { suite } => {
            let samples = suites::run(&chart, &[*suite], sampling(common, true));
            let checks = report::reduce(samples, common.tol);
            let pass = report::all_pass(&checks);
            let rep = VerificationReport {
                schema: SCHEMA,
                model: chart.name().to_string(),
                suite: suite.name().to_string(),
                grid: common.grid as usize,
                seed: common.seed,
                checks,
                pass,
                wall_time_ms: elapsed(),
            };
            let body = render(
                common.format.unwrap_or(Format::Json),
                |out, fmt| match fmt {
                    Format::Json => report::write_json(out, &rep),
                    Format::Csv => report::write_checks_csv(out, &rep.checks),
                },
            )?;
            Ok(Outcome { body, pass })
        }
        Command::Curvature { points } => {
            let points = match points {
                Some(src) => parse_points(src).map_err(usage)?,
                None => chart
                    .base
                    .domain
                    .grid(common.grid as usize)
                    .into_iter()
                    .map(|[x, y]| [x, y, 0.0])
                    .collect(),
            };
            let rows = cr3kit::sweep::try_map(&points, |&p| CurvatureReport::at(&chart, p));
            match rows {
                Ok(rows) => {
                    let body =
                        render(common.format.unwrap_or(Format::Csv), |out, fmt| match fmt {
                            Format::Json => report::write_json(out, &rows),
                            Format::Csv => write_curvature_csv(out, &rows),
                        })?;
                    Ok(Outcome { body, pass: true })
                }
                Err(e) => error_outcome(chart.name(), "curvature", &e),
            }
        }
        Command::Deform {
            kind,
            c,
            f,
            sigma,
            holder,
        } => {
            let spec = match (kind, &cfg.deformation) {
                (Some(k), _) => DeformationSpec {
                    kind: (*k).into(),
                    c: *c,
                    f: f.clone(),
                    sigma: sigma.clone(),
                },
                (None, Some(d)) => d.clone(),
                (None, None) => return Err(usage("deform needs --kind or a [deformation] table")),
            };
            let deformation = spec.build().map_err(usage)?;
            let mut rep = match deform(&chart, &deformation, *holder, common) {
                Ok(rep) => rep,
                Err(e) => return error_outcome(chart.name(), kind_name(spec.kind), &e),
            };
            rep.wall_time_ms = elapsed();
            let pass = rep.pass;
            let body = render(
                common.format.unwrap_or(Format::Json),
                |out, fmt| match fmt {
                    Format::Json => report::write_json(out, &rep),
                    Format::Csv => {
                        write_staged_csv(out, &[("before", &rep.before), ("after", &rep.after)])
                    }
                },
            )?;
            Ok(Outcome { body, pass })
        }
    }
}

fn render(
    format: Format,
    write: impl FnOnce(&mut dyn Write, Format) -> std::io::Result<()>,
) -> Result<Vec<u8>, Exit> {
    let mut body = Vec::new();
    write(&mut body, format).map_err(|e| Exit {
        code: EXIT_FAIL,
        message: e.to_string(),
    })?;
    Ok(body)
}

fn parse_points(src: &str) -> Result<Vec<Point>, String> {
    src.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            let v: Vec<f64> = item
                .split(',')
                .map(|x| {
                    x.trim()
                        .parse::<f64>()
                        .map_err(|e| format!("bad point `{item}`: {e}"))
                })
                .collect::<Result<_, _>>()?;
            match v.as_slice() {
                [x, y] => Ok([*x, *y, 0.0]),
                [x, y, t] => Ok([*x, *y, *t]),
                _ => Err(format!("bad point `{item}`: expected x,y or x,y,t")),
            }
        })
        .collect()
}

fn write_curvature_csv(out: &mut dyn Write, rows: &[CurvatureReport]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "y", "t", "K_base", "k_tanaka", "sec_Q", "phi_max"])?;
    for r in rows {
        let [x, y, t] = r.point;
        let vals = [x, y, t, r.k_base, r.k_tanaka, r.sec_q, r.phi_max()];
        w.write_record(vals.map(report::csv_number))?;
    }
    w.flush()
}

fn write_staged_csv(out: &mut dyn Write, stages: &[(&str, &Vec<Check>)]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["stage", "name", "max_defect", "tolerance", "pass", "error"])?;
    for (stage, checks) in stages {
        for c in checks.iter() {
            w.write_record([
                stage.to_string(),
                c.name.clone(),
                c.max_defect.map(report::csv_number).unwrap_or_default(),
                report::csv_number(c.tolerance),
                c.pass.to_string(),
                c.error.clone().unwrap_or_default(),
            ])?;
        }
    }
    w.flush()
}

#[derive(Debug, Serialize)]
struct ErrorBody {
    kind: &'static str,
    message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    point: Option<Point>,
    #[serde(skip_serializing_if = "Option::is_none")]
    value: Option<f64>,
}

#[derive(Debug, Serialize)]
struct ErrorReport<'a> {
    schema: u32,
    model: &'a str,
    command: &'a str,
    pass: bool,
    error: ErrorBody,
}

fn error_body(e: &Error) -> ErrorBody {
    let (kind, point, value) = match e {
        Error::Parse(_) => ("parse", None, None),
        Error::Field(_) => ("field", None, None),
        Error::OutsideDomain { point } => ("outside_domain", Some(*point), None),
        Error::NotBasic(_) => ("not_basic", None, None),
        Error::NotIntegrated(_) => ("not_integrated", None, None),
        Error::UnknownModel(_) => ("unknown_model", None, None),
        Error::NonPositive { point, value } => ("non_positive", Some(*point), Some(*value)),
        Error::ContactDegenerate { point, value } => {
            ("contact_degenerate", Some(*point), Some(*value))
        }
        Error::ReductionInvalid { point, defect } => {
            ("reduction_invalid", Some(*point), Some(*defect))
        }
        Error::NonCompactCell(_) => ("non_compact_cell", None, None),
        Error::InvalidParameter(_) => ("invalid_parameter", None, None),
        #[allow(unreachable_patterns)]
        _ => ("other", None, None),
    };
    ErrorBody {
        kind,
        message: e.to_string(),
        point,
        value,
    }
}

/// A failed computation, reported as a JSON object with exit code 1.
fn error_outcome(model: &str, command: &str, e: &Error) -> Result<Outcome, Exit> {
    let rep = ErrorReport {
        schema: SCHEMA,
        model,
        command,
        pass: false,
        error: error_body(e),
    };
    let mut body = Vec::new();
    report::write_json(&mut body, &rep).map_err(|e| Exit {
        code: EXIT_FAIL,
        message: e.to_string(),
    })?;
    Ok(Outcome { body, pass: false })
}

fn kind_name(k: DeformationKind) -> &'static str {
    match k {
        DeformationKind::Type0 => "type0",
        DeformationKind::Type1 => "type1",
        DeformationKind::Type2 => "type2",
    }
}

#[derive(Debug, Serialize)]
struct WorstPoint {
    max_defect: f64,
    worst_point: Point,
}

#[derive(Debug, Serialize)]
struct DeformReport {
    schema: u32,
    model: String,
    deformation: DeformationKind,
    grid: usize,
    seed: u64,
    before: Vec<Check>,
    after: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cr_reeb: Option<WorstPoint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    holder: Option<HolderReport>,
    pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_time_ms: Option<u64>,
}

const CORE_SUITES: [Suite; 3] = [Suite::Frame, Suite::Connection, Suite::Curvature];

fn deform(
    chart: &SasakiChart,
    d: &Deformation,
    holder: bool,
    common: &Common,
) -> Result<DeformReport, Error> {
    let before = report::reduce(
        suites::run(chart, &[Suite::Curvature], sampling(common, true)),
        common.tol,
    );
    let mut after_samples: Vec<Sample> = Vec::new();
    let mut cr_reeb = None;
    let mut holder_field: ScalarField = suites::test_function(common.seed);
    match d {
        Deformation::Type0 { c } => {
            let deformed = deform_type0(chart, *c)?;
            after_samples.extend(suites::run(&deformed, &CORE_SUITES, sampling(common, true)));
            after_samples.extend(suites::k_rescaled(
                chart,
                &deformed,
                *c,
                sampling(common, true),
            ));
        }
        Deformation::Type1 { f } => {
            let deformed = reeb_deform_type1(chart, f)?;
            after_samples.extend(suites::type1_samples(
                chart,
                &deformed,
                sampling(common, true),
            ));
            let (max_defect, worst_point) = cr_reeb_sweep(chart, f, common.grid as usize)?;
            after_samples.push(Sample::new(
                "cr_reeb",
                TOL_EXACT,
                Some(worst_point),
                Ok::<_, Error>(max_defect),
            ));
            cr_reeb = Some(WorstPoint {
                max_defect,
                worst_point,
            });
            holder_field = f.clone();
        }
        Deformation::Type2 { sigma } => {
            let deformed = deform_type2(chart, sigma)?;
            after_samples.extend(suites::run(
                &deformed.chart,
                &CORE_SUITES,
                sampling(common, false),
            ));
            after_samples.push(Sample::new(
                "type2_reeb",
                report::TOL_NESTED,
                None,
                Ok::<_, Error>(deformed.reeb_defect),
            ));
        }
    }
    let mut holder_report = None;
    if holder {
        let r = holder_volume_check(chart, &holder_field)?;
        after_samples.push(Sample::new(
            "holder",
            TOL_QUADRATURE,
            None,
            Ok::<_, Error>((-r.margin).max(0.0)),
        ));
        holder_report = Some(r);
    }
    let after = report::reduce(after_samples, common.tol);
    let pass = report::all_pass(&after);
    Ok(DeformReport {
        schema: SCHEMA,
        model: chart.name().to_string(),
        deformation: d.kind(),
        grid: common.grid as usize,
        seed: common.seed,
        before,
        after,
        cr_reeb,
        holder: holder_report,
        pass,
        wall_time_ms: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn point_lists() {
        assert_eq!(
            parse_points("0.1,0.2; 0.3, 0.4, 0.5;").unwrap(),
            vec![[0.1, 0.2, 0.0], [0.3, 0.4, 0.5]]
        );
        assert!(parse_points("1").is_err());
        assert!(parse_points("a,b").is_err());
    }

    #[test]
    fn error_bodies_carry_points() {
        let e = Error::ContactDegenerate {
            point: [0.75, 0.25, 0.0],
            value: -1.9,
        };
        let b = error_body(&e);
        assert_eq!(b.kind, "contact_degenerate");
        assert_eq!(b.point, Some([0.75, 0.25, 0.0]));
    }
}
