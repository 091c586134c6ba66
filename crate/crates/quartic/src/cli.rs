//! The `quartic` command line.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::algebra::fmt_rational;
use crate::gfunction::Lands;
use crate::maps::{c2g_constants, closed_form_count, enumerate_census, kg_constant, painleve_a, CENSUS_CAP};
use crate::model::{PhaseRegime, SigmaPoint, C64};
use crate::phase::{boundaries, boundary_distance, classify, diagram_json, diagram_svg, write_curve_csv, CurveId, PhaseError, SCHEMA_VERSION};
use crate::quaddiff::{build_qd, critical_graph_from, to_svg, write_csv, TraceOptions};
use crate::suite;
use crate::topo::{closed_form_coefficient, expansion_tables, free_energy_series, string_recursion_u, GENUS_HARD_CAP};

/// Exit status for malformed invocations.
pub const EXIT_USAGE: u8 = 64;
/// Exit status when a verification disagrees with the claimed result.
pub const EXIT_MISMATCH: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "quartic", version, about = "Phase diagram and topological expansion of the quartic matrix model")]
pub struct Cli {
    #[command(flatten)]
    pub config: RunConfig,
    #[command(subcommand)]
    pub command: Command,
}

/// Settings shared by every subcommand.
#[derive(Args, Debug, Clone)]
pub struct RunConfig {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Local error tolerance of the trajectory integrator.
    #[arg(long, global = true, value_parser = positive)]
    pub tol: Option<f64>,
    /// Radius at which trajectories count as escaping.
    #[arg(long, global = true, value_parser = positive)]
    pub rmax: Option<f64>,
    /// Largest integrator step.
    #[arg(long, global = true, value_parser = positive)]
    pub hmax: Option<f64>,
}

impl RunConfig {
    pub fn trace_options(&self) -> TraceOptions {
        let mut o = TraceOptions::default();
        if let Some(t) = self.tol {
            o.tol = t;
        }
        if let Some(r) = self.rmax {
            o.rmax = r;
        }
        if let Some(h) = self.hmax {
            o.hmax = h;
        }
        o
    }
}

fn positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err("must be a positive number".into())
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Phase of σ = RE + i·IM and the distance to the nearest boundary.
    Classify {
        #[arg(allow_negative_numbers = true)]
        re: f64,
        #[arg(allow_negative_numbers = true)]
        im: f64,
        /// Confirm the regime against the critical graph of its quadratic differential.
        #[arg(long)]
        verify: bool,
        /// Print a JSON object instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Export the critical graph of the regime's quadratic differential.
    Trace {
        /// Coupling σ = RE + i·IM.
        #[arg(long, required = true, num_args = 2, value_names = ["RE", "IM"], allow_negative_numbers = true)]
        sigma: Vec<f64>,
        /// one-cut, two-cut or three-cut (also 1, 2, 3).
        #[arg(long, value_parser = parse_regime)]
        regime: PhaseRegime,
        /// Output file; the format follows the extension unless --format is given.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Half-width of the SVG viewport.
        #[arg(long, default_value_t = 4.0, value_parser = positive)]
        window: f64,
    },
    /// Traced phase-boundary polylines.
    PhaseBoundary {
        /// g1..g6, or all.
        #[arg(long, default_value = "all")]
        curve: String,
        /// Output file; the format follows the extension unless --format is given.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Include the sign changes of Re Ψ that are not phase boundaries.
        #[arg(long)]
        show_fake: bool,
    },
    /// Connected 4-valent graphs on j labeled vertices, by genus.
    GenusCounts {
        /// Number of vertices j.
        #[arg(long)]
        vertices: usize,
        /// Compare with the closed-form counts for genus 0 to 3.
        #[arg(long)]
        oracle: bool,
        /// Permit the six-vertex enumeration (23!! pairings).
        #[arg(long)]
        allow_large: bool,
    },
    /// Taylor coefficients of the genus-g free energies.
    Series {
        /// Highest genus.
        #[arg(long)]
        genus: usize,
        /// Highest power of u.
        #[arg(long)]
        order: usize,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// C_2g, K_g and the Painlevé-I coefficients a_k.
    Constants {
        #[arg(long)]
        max_genus: usize,
    },
    /// Run the invariant suite.
    Verify {
        /// Run every check; without it the check names are listed.
        #[arg(long)]
        all: bool,
        /// Print one JSON report instead of text lines.
        #[arg(long)]
        json: bool,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Svg,
}

pub fn parse_regime(s: &str) -> Result<PhaseRegime, String> {
    let t = s.to_ascii_lowercase().replace(['-', '_'], "");
    match t.as_str() {
        "1" | "one" | "onecut" => Ok(PhaseRegime::OneCut),
        "2" | "two" | "twocut" => Ok(PhaseRegime::TwoCut),
        "3" | "three" | "threecut" => Ok(PhaseRegime::ThreeCut),
        _ => Err(format!("unknown regime {s:?}; expected one-cut, two-cut or three-cut")),
    }
}

/// Failure of a subcommand, with its exit status.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }

    fn usage(message: impl Into<String>) -> Self {
        Failure::new(EXIT_USAGE, message)
    }
}

impl<E: std::error::Error + 'static> From<E> for Failure {
    fn from(e: E) -> Self {
        let closed_pipe = (&e as &dyn std::any::Any)
            .downcast_ref::<io::Error>()
            .is_some_and(|io| io.kind() == io::ErrorKind::BrokenPipe);
        if closed_pipe {
            Failure::new(0, "")
        } else {
            Failure::new(1, e.to_string())
        }
    }
}

fn phase_failure(e: PhaseError) -> Failure {
    match e {
        PhaseError::VerificationMismatch { .. } => Failure::new(EXIT_MISMATCH, e.to_string()),
        other => Failure::new(1, other.to_string()),
    }
}

/// Parse the process arguments, run, and map the outcome to an exit code.
pub fn run() -> ExitCode {
    run_from(std::env::args_os(), &mut io::stdout().lock())
}

/// Entry point with explicit arguments and output stream.
pub fn run_from<I, T>(args: I, out: &mut dyn Write) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match execute(&cli, out) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            if !f.message.is_empty() {
                eprintln!("error: {}", f.message);
            }
            ExitCode::from(f.code)
        }
    }
}

/// Run a parsed command; returns the exit status on success paths.
pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<u8, Failure> {
    if let Some(n) = cli.config.threads {
        if n == 0 {
            return Err(Failure::usage("--threads must be at least 1"));
        }
        // a pool that is already initialised keeps its size
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match &cli.command {
        Command::Classify { re, im, verify, json } => cmd_classify(*re, *im, *verify, *json, out),
        Command::Trace { sigma, regime, out: path, format, window } => {
            cmd_trace(&cli.config, sigma, *regime, path.as_deref(), *format, *window, out)
        }
        Command::PhaseBoundary { curve, out: path, format, show_fake } => {
            cmd_phase_boundary(curve, path.as_deref(), *format, *show_fake, out)
        }
        Command::GenusCounts { vertices, oracle, allow_large } => cmd_genus_counts(*vertices, *oracle, *allow_large, out),
        Command::Series { genus, order, format } => cmd_series(*genus, *order, *format, out),
        Command::Constants { max_genus } => cmd_constants(*max_genus, out),
        Command::Verify { all, json } => cmd_verify(*all, *json, out),
    }
}

fn sigma_point(re: f64, im: f64) -> Result<SigmaPoint, Failure> {
    SigmaPoint::new(re, im).map_err(|e| Failure::usage(e.to_string()))
}

fn cmd_classify(re: f64, im: f64, verify: bool, as_json: bool, out: &mut dyn Write) -> Result<u8, Failure> {
    let s = sigma_point(re, im)?;
    let regime = classify(s, verify).map_err(phase_failure)?;
    let (curve, dist) = boundary_distance(s).map_err(phase_failure)?;
    if as_json {
        let v = json!({
            "schemaVersion": SCHEMA_VERSION,
            "sigma": [re, im],
            "regime": regime.to_string(),
            "verified": verify,
            "nearestBoundary": curve.to_string(),
            "distance": dist,
        });
        writeln!(out, "{v}")?;
    } else {
        writeln!(out, "{regime}")?;
        writeln!(out, "nearest boundary {curve} at distance {dist:.6e}")?;
    }
    Ok(0)
}

fn format_for(path: Option<&Path>, explicit: Option<Format>, fallback: Format) -> Result<Format, Failure> {
    if let Some(f) = explicit {
        return Ok(f);
    }
    let Some(p) = path else {
        return Ok(fallback);
    };
    match p.extension().and_then(|e| e.to_str()).map(|e| e.to_ascii_lowercase()).as_deref() {
        Some("json") => Ok(Format::Json),
        Some("csv") => Ok(Format::Csv),
        Some("svg") => Ok(Format::Svg),
        _ => Err(Failure::usage(format!("cannot infer the format of {}; pass --format", p.display()))),
    }
}

fn sink<'a>(path: Option<&Path>, out: &'a mut dyn Write) -> Result<Box<dyn Write + 'a>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(out),
    })
}

fn cmd_trace(
    config: &RunConfig,
    sigma: &[f64],
    regime: PhaseRegime,
    path: Option<&Path>,
    format: Option<Format>,
    window: f64,
    out: &mut dyn Write,
) -> Result<u8, Failure> {
    let s = sigma_point(sigma[0], sigma[1])?;
    let format = format_for(path, format, Format::Csv)?;
    let qd = build_qd(s, regime)?;
    let seeds: Vec<usize> = (0..qd.critical.len()).collect();
    let graph = critical_graph_from(&qd, &seeds, &config.trace_options())?;
    let mut w = sink(path, out)?;
    match format {
        Format::Csv => write_csv(&graph, &mut w)?,
        Format::Svg => {
            let lands = Lands::new(s, regime).ok();
            let shade = move |z: C64| lands.as_ref().and_then(|l| l.sign(z).ok()) == Some(-1);
            w.write_all(to_svg(&graph, window, Some(&shade)).as_bytes())?;
        }
        Format::Json => {
            let v = json!({ "schemaVersion": SCHEMA_VERSION, "sigma": [s.re, s.im], "regime": regime.to_string(), "graph": graph });
            writeln!(w, "{v}")?;
        }
    }
    w.flush()?;
    Ok(0)
}

fn cmd_phase_boundary(
    curve: &str,
    path: Option<&Path>,
    format: Option<Format>,
    show_fake: bool,
    out: &mut dyn Write,
) -> Result<u8, Failure> {
    let set = boundaries().map_err(phase_failure)?;
    let format = format_for(path, format, Format::Json)?;
    let ids: Vec<CurveId> = if curve.eq_ignore_ascii_case("all") {
        CurveId::ALL.into_iter().filter(|c| show_fake || c.is_boundary()).collect()
    } else {
        vec![CurveId::parse(curve).ok_or_else(|| Failure::usage(format!("unknown curve {curve:?}")))?]
    };
    let mut w = sink(path, out)?;
    match format {
        Format::Csv => {
            let curves: Vec<_> = ids.iter().map(|&id| set.get(id)).collect();
            write_curve_csv(&curves, &mut w)?;
        }
        Format::Svg => w.write_all(diagram_svg(set, 6.0, show_fake).as_bytes())?,
        Format::Json => {
            let v = if ids.len() == 1 {
                let c = set.get(ids[0]);
                json!({
                    "schemaVersion": SCHEMA_VERSION,
                    "curve": c.id.to_string(),
                    "component": c.id.component_label(),
                    "boundary": c.boundary,
                    "anchors": c.anchors.iter().map(|a| a.to_string()).collect::<Vec<_>>(),
                    "asymptoticAngle": c.asymptotic_angle,
                    "points": c.points.iter().map(|p| [p.re, p.im]).collect::<Vec<_>>(),
                })
            } else {
                diagram_json(set, show_fake, 60)
            };
            writeln!(w, "{v}")?;
        }
    }
    w.flush()?;
    Ok(0)
}

fn cmd_genus_counts(j: usize, oracle: bool, allow_large: bool, out: &mut dyn Write) -> Result<u8, Failure> {
    if j == 0 || (j > CENSUS_CAP && !allow_large) {
        return Err(Failure::usage(format!("--vertices must be in 1..={CENSUS_CAP} (or 6 with --allow-large)")));
    }
    let census = enumerate_census(j, allow_large)?;
    let mut v = json!({
        "schemaVersion": SCHEMA_VERSION,
        "vertices": j,
        "counts": census.counts,
        "connected": census.connected,
        "pairings": census.pairings,
    });
    let mut code = 0;
    if oracle {
        let closed: Vec<String> = (0..=3).map(|g| closed_form_count(j, g).map(|n| n.to_string())).collect::<Result<_, _>>()?;
        let agrees = (0..=3).all(|g| closed[g] == census.counts.get(g).copied().unwrap_or(0).to_string());
        v["closedForm"] = json!(closed);
        v["agrees"] = json!(agrees);
        if !agrees {
            code = EXIT_MISMATCH;
        }
    }
    writeln!(out, "{v}")?;
    Ok(code)
}

fn cmd_series(genus: usize, order: usize, format: Format, out: &mut dyn Write) -> Result<u8, Failure> {
    if genus > GENUS_HARD_CAP {
        return Err(Failure::usage(format!("--genus must be at most {GENUS_HARD_CAP}")));
    }
    let mut t = string_recursion_u(genus)?;
    let x = expansion_tables(&mut t);
    let fe = free_energy_series(&x, order)?;
    let rows: Vec<(usize, usize, String, String, Option<bool>)> = (0..=genus)
        .flat_map(|g| (1..=order).map(move |j| (g, j)))
        .map(|(g, j)| {
            let c = fe.get(g, j);
            let count = fe.implied_count(g, j);
            let matches = closed_form_coefficient(g, j).map(|cf| cf == c);
            (g, j, fmt_rational(&c), fmt_rational(&count), matches)
        })
        .collect();
    match format {
        Format::Json => {
            let genera: Vec<_> = (0..=genus)
                .map(|g| {
                    let mine: Vec<_> = rows.iter().filter(|r| r.0 == g).collect();
                    json!({
                        "genus": g,
                        "coefficients": mine.iter().map(|r| &r.2).collect::<Vec<_>>(),
                        "mapCounts": mine.iter().map(|r| &r.3).collect::<Vec<_>>(),
                        "closedFormMatch": mine.iter().map(|r| r.4).collect::<Option<Vec<bool>>>().map(|v| v.iter().all(|&b| b)),
                    })
                })
                .collect();
            let v = json!({ "schemaVersion": SCHEMA_VERSION, "order": order, "firstPower": 1, "genera": genera });
            writeln!(out, "{v}")?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut *out);
            w.write_record(["genus", "power", "coefficient", "map_count", "closed_form_match"])?;
            for (g, j, c, n, m) in &rows {
                let m = m.map(|b| b.to_string()).unwrap_or_default();
                w.write_record([g.to_string(), j.to_string(), c.clone(), n.clone(), m])?;
            }
            w.flush()?;
        }
        Format::Svg => return Err(Failure::usage("series supports json and csv")),
    }
    Ok(0)
}

fn cmd_constants(max_genus: usize, out: &mut dyn Write) -> Result<u8, Failure> {
    if max_genus > 4 * GENUS_HARD_CAP {
        return Err(Failure::usage("--max-genus is too large"));
    }
    let c = c2g_constants(max_genus);
    let a = painleve_a(max_genus);
    let v = json!({
        "schemaVersion": SCHEMA_VERSION,
        "C": c.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
        "K": (0..=max_genus).map(|g| kg_constant(g).to_string()).collect::<Vec<_>>(),
        "a": a.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
        "criticalPoint": "-1/12",
    });
    writeln!(out, "{v}")?;
    Ok(0)
}

fn cmd_verify(all: bool, as_json: bool, out: &mut dyn Write) -> Result<u8, Failure> {
    if !all {
        let names = suite::check_names().join("\n  ");
        writeln!(out, "checks (run with --all):\n  {names}")?;
        return Ok(0);
    }
    let results = suite::run_all();
    let passed = results.iter().all(|r| r.passed);
    if as_json {
        writeln!(out, "{}", json!({ "schemaVersion": SCHEMA_VERSION, "passed": passed, "checks": results }))?;
    } else {
        for r in &results {
            let tag = if r.passed { "PASS" } else { "FAIL" };
            writeln!(out, "{tag} {} ({:.2}s): {}", r.name, r.seconds, r.detail)?;
        }
    }
    Ok(if passed { 0 } else { EXIT_MISMATCH })
}
