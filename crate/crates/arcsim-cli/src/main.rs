//! `arcsim` command line: simulate arc toolpaths, inspect feed limits,
//! compute circularity metrics, and generate the built-in test paths.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use arcsim::error::Error;
use arcsim::geom::Point2;
use arcsim::limits::LimitBreakdown;
use arcsim::machine::load_machine;
use arcsim::profile::{simulate_toolpath_with, BlockPlan, Simulation, DEFAULT_SAMPLE_STEP};
use arcsim::toolpath::{
    bore_path, circle_path, load_toolpath, save_toolpath, spiral_path, toolpath_to_json_string,
    BoreParams, SpiralParams, Toolpath,
};
use arcsim::transition::JunctionRecord;
use arcsim::units;
use arcsim::metrics::CircularityReport;

const EXIT_VALIDATION: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;

#[derive(Parser)]
#[command(name = "arcsim", version, about = "Circular-interpolation kinematic simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a toolpath and write trace / summary / plot files.
    Simulate(RunConfig),
    /// Print the feed-limit breakdown for a full circle of a given radius.
    Limits(LimitsArgs),
    /// Circularity metrics on an XY point file.
    Metrics(MetricsArgs),
    /// Generate a built-in test toolpath as JSON.
    Generate(GenerateArgs),
}

#[derive(Args)]
struct RunConfig {
    /// Machine description JSON.
    #[arg(long)]
    machine: PathBuf,

    /// Toolpath JSON file.
    #[arg(long, group = "source")]
    path: Option<PathBuf>,

    /// G-code program (G2/G3 arcs).
    #[arg(long, group = "source")]
    gcode: Option<PathBuf>,

    /// Built-in generator instead of a file.
    #[arg(long, group = "source", value_enum)]
    generate: Option<PathKind>,

    #[command(flatten)]
    shape: ShapeArgs,

    /// Trace sampling step in ms (overrides ARCSIM_SAMPLE_MS).
    #[arg(long)]
    sample_ms: Option<f64>,

    /// Write the kinematic trace CSV here.
    #[arg(long)]
    trace: Option<PathBuf>,

    /// Write the summary JSON here (default: stdout).
    #[arg(long)]
    summary: Option<PathBuf>,

    /// Write a feed/acceleration SVG plot here.
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum PathKind {
    Circle,
    Semispiral,
    Quarterspiral,
    Bore,
}

#[derive(Args)]
struct ShapeArgs {
    /// Circle radius (circle generator), mm.
    #[arg(long)]
    radius_mm: Option<f64>,

    /// Programmed feed, mm/min.
    #[arg(long)]
    feed_mm_min: Option<f64>,

    /// First spiral radius, mm.
    #[arg(long, default_value_t = 10.0)]
    r_start_mm: f64,

    /// Last spiral radius, mm.
    #[arg(long, default_value_t = 30.0)]
    r_end_mm: f64,

    /// Spiral radius step, mm (default 5 for semispiral, 2 for quarterspiral).
    #[arg(long)]
    step_mm: Option<f64>,

    /// Junction inclination, degrees.
    #[arg(long, default_value_t = 0.0)]
    incline_deg: f64,

    /// Tool diameter (bore generator), mm.
    #[arg(long, default_value_t = 20.0)]
    tool_dia_mm: f64,

    /// Bore diameter (bore generator), mm.
    #[arg(long)]
    bore_dia_mm: Option<f64>,

    /// Approach/clearance arc radius (bore generator), mm.
    #[arg(long)]
    approach_radius_mm: Option<f64>,

    /// Approach/clearance arc span, degrees.
    #[arg(long, default_value_t = 90.0)]
    approach_span_deg: f64,
}

#[derive(Args)]
struct LimitsArgs {
    /// Machine description JSON.
    #[arg(long)]
    machine: PathBuf,

    /// Circle radius, mm.
    #[arg(long)]
    radius_mm: f64,

    /// Programmed feed, mm/min.
    #[arg(long)]
    feed_mm_min: f64,

    /// Also report the per-angle limits at this angular position, degrees.
    #[arg(long)]
    alpha_deg: Option<f64>,
}

#[derive(Args)]
struct MetricsArgs {
    /// Point file: trace CSV (x_mm,y_mm columns) or bare two-column CSV in mm.
    #[arg(long)]
    points: PathBuf,

    /// Nominal circle center X, mm.
    #[arg(long, requires_all = ["nominal_cy_mm", "nominal_r_mm"])]
    nominal_cx_mm: Option<f64>,

    /// Nominal circle center Y, mm.
    #[arg(long)]
    nominal_cy_mm: Option<f64>,

    /// Nominal circle radius, mm.
    #[arg(long)]
    nominal_r_mm: Option<f64>,

    /// Write the report JSON here (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    /// Which test path to generate.
    #[arg(long, value_enum)]
    kind: PathKind,

    #[command(flatten)]
    shape: ShapeArgs,

    /// Output toolpath JSON (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Limits(args) => cmd_limits(args),
        Command::Metrics(args) => cmd_metrics(args),
        Command::Generate(args) => cmd_generate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("arcsim: {err}");
            match err {
                Error::Infeasible { .. } => ExitCode::from(EXIT_INFEASIBLE),
                _ => ExitCode::from(EXIT_VALIDATION),
            }
        }
    }
}

fn build_path(kind: PathKind, shape: &ShapeArgs) -> Result<Toolpath, Error> {
    let feed = shape
        .feed_mm_min
        .ok_or_else(|| Error::InvalidArg("--feed-mm-min is required for generators".into()))?;
    let feed = units::mm_min_to_m_s(feed);
    match kind {
        PathKind::Circle => {
            let radius = shape
                .radius_mm
                .ok_or_else(|| Error::InvalidArg("--radius-mm is required for circles".into()))?;
            circle_path(units::mm_to_m(radius), feed)
        }
        PathKind::Semispiral | PathKind::Quarterspiral => {
            let default_step = match kind {
                PathKind::Semispiral => 5.0,
                _ => 2.0,
            };
            let params = SpiralParams {
                r_start: units::mm_to_m(shape.r_start_mm),
                r_end: units::mm_to_m(shape.r_end_mm),
                step: units::mm_to_m(shape.step_mm.unwrap_or(default_step)),
                incline: shape.incline_deg.to_radians(),
                feed,
            };
            let span = match kind {
                PathKind::Semispiral => std::f64::consts::PI,
                _ => std::f64::consts::FRAC_PI_2,
            };
            spiral_path(span, &params)
        }
        PathKind::Bore => {
            let bore_dia = shape
                .bore_dia_mm
                .ok_or_else(|| Error::InvalidArg("--bore-dia-mm is required for bores".into()))?;
            let approach = shape.approach_radius_mm.ok_or_else(|| {
                Error::InvalidArg("--approach-radius-mm is required for bores".into())
            })?;
            bore_path(&BoreParams {
                tool_dia: units::mm_to_m(shape.tool_dia_mm),
                bore_dia: units::mm_to_m(bore_dia),
                approach_radius: units::mm_to_m(approach),
                approach_span: shape.approach_span_deg.to_radians(),
                feed,
            })
        }
    }
}

fn sample_step(flag_ms: Option<f64>) -> Result<f64, Error> {
    let ms = match flag_ms {
        Some(ms) => ms,
        None => match std::env::var("ARCSIM_SAMPLE_MS") {
            Ok(value) => value.parse::<f64>().map_err(|_| {
                Error::InvalidArg(format!("ARCSIM_SAMPLE_MS is not a number: {value}"))
            })?,
            Err(_) => return Ok(DEFAULT_SAMPLE_STEP),
        },
    };
    if !(ms > 0.0) {
        return Err(Error::InvalidArg(format!(
            "sample step must be positive, got {ms} ms"
        )));
    }
    Ok(units::ms_to_s(ms))
}

#[derive(Serialize)]
struct BlockSummary {
    index: usize,
    r_mm: f64,
    arc_len_mm: f64,
    limits: LimitBreakdown,
    v_st_m_min: f64,
    plan: BlockPlan,
    duration_s: f64,
}

#[derive(Serialize)]
struct Summary {
    blocks: Vec<BlockSummary>,
    junctions: Vec<JunctionSummary>,
    total_time_s: f64,
}

#[derive(Serialize)]
struct JunctionSummary {
    #[serde(flatten)]
    record: JunctionRecord,
    vfr_m_min: Option<f64>,
    effective_m_min: f64,
}

fn summarize(path: &Toolpath, sim: &Simulation) -> Summary {
    Summary {
        blocks: path
            .blocks
            .iter()
            .zip(sim.breakdowns.iter().zip(&sim.plans))
            .enumerate()
            .map(|(index, (block, (limits, plan)))| BlockSummary {
                index,
                r_mm: units::m_to_mm(block.r),
                arc_len_mm: units::m_to_mm(block.arc_len()),
                limits: *limits,
                v_st_m_min: units::m_s_to_m_min(limits.v_st),
                plan: *plan,
                duration_s: plan.total_time(),
            })
            .collect(),
        junctions: sim
            .junctions
            .iter()
            .map(|record| JunctionSummary {
                record: *record,
                vfr_m_min: record.vfr_m_s.map(units::m_s_to_m_min),
                effective_m_min: units::m_s_to_m_min(record.effective_m_s),
            })
            .collect(),
        total_time_s: sim.total_time,
    }
}

fn write_or_print(target: Option<&Path>, content: &str) -> Result<(), Error> {
    match target {
        Some(path) => fs::write(path, content).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn cmd_simulate(args: RunConfig) -> Result<(), Error> {
    let machine = load_machine(&args.machine)?;
    let path = if let Some(file) = &args.path {
        load_toolpath(file)?
    } else if let Some(file) = &args.gcode {
        let text = fs::read_to_string(file).map_err(|source| Error::Io {
            path: file.clone(),
            source,
        })?;
        arcsim::gcode::parse_gcode(&text)?
    } else if let Some(kind) = args.generate {
        build_path(kind, &args.shape)?
    } else {
        return Err(Error::InvalidArg(
            "one of --path, --gcode or --generate is required".into(),
        ));
    };
    let step = sample_step(args.sample_ms)?;
    let sim = simulate_toolpath_with(&path, &machine, step)?;

    if let Some(trace_path) = &args.trace {
        fs::write(trace_path, sim.trace.to_csv_string()).map_err(|source| Error::Io {
            path: trace_path.clone(),
            source,
        })?;
    }
    if let Some(plot_path) = &args.plot {
        fs::write(plot_path, arcsim::plot::render_trace_svg(&sim.trace)).map_err(|source| {
            Error::Io {
                path: plot_path.clone(),
                source,
            }
        })?;
    }
    let mut summary = serde_json::to_string_pretty(&summarize(&path, &sim))
        .expect("summary serializes");
    summary.push('\n');
    write_or_print(args.summary.as_deref(), &summary)
}

#[derive(Serialize)]
struct LimitsOutput {
    #[serde(flatten)]
    breakdown: LimitBreakdown,
    v_st_m_min: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    at_alpha: Option<AlphaPoint>,
}

#[derive(Serialize)]
struct AlphaPoint {
    alpha_deg: f64,
    v_t_m_min: f64,
    v_an_m_min: f64,
    v_jt_m_min: f64,
}

fn cmd_limits(args: LimitsArgs) -> Result<(), Error> {
    let machine = load_machine(&args.machine)?;
    let caps = machine.planar()?;
    let block = circle_path(
        units::mm_to_m(args.radius_mm),
        units::mm_min_to_m_s(args.feed_mm_min),
    )?
    .blocks[0];
    let breakdown = arcsim::limits::feed_setpoint(&block, &caps, &machine.ncu);
    let at_alpha = args.alpha_deg.map(|deg| {
        let alpha = arcsim::geom::AngularPosition::new(deg.to_radians());
        AlphaPoint {
            alpha_deg: deg,
            v_t_m_min: units::m_s_to_m_min(arcsim::limits::axis_feed_limit(alpha, &caps)),
            v_an_m_min: units::m_s_to_m_min(arcsim::limits::feed_from_accel(
                arcsim::limits::normal_accel_limit(alpha, &caps),
                block.r,
            )),
            v_jt_m_min: units::m_s_to_m_min(arcsim::limits::feed_from_jerk(
                arcsim::limits::tangential_jerk_limit(alpha, &caps),
                block.r,
            )),
        }
    });
    let out = LimitsOutput {
        breakdown,
        v_st_m_min: units::m_s_to_m_min(breakdown.v_st),
        at_alpha,
    };
    let mut text = serde_json::to_string_pretty(&out).expect("limits serialize");
    text.push('\n');
    print!("{text}");
    Ok(())
}

#[derive(Serialize)]
struct MetricsOutput {
    g_um: f64,
    fmax_um: f64,
    fmin_um: f64,
    center_mm: [f64; 2],
    radius_mm: f64,
    rms_um: f64,
    points: usize,
    nominal_defaulted: bool,
}

fn parse_points(path: &Path) -> Result<Vec<Point2>, Error> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let bad = |message: String| Error::Schema {
        path: path.to_path_buf(),
        message,
    };
    let mut lines = text.lines().peekable();
    let mut xi = 0usize;
    let mut yi = 1usize;
    if let Some(first) = lines.peek() {
        let cells: Vec<&str> = first.split(',').map(str::trim).collect();
        if cells.iter().any(|c| c.parse::<f64>().is_err()) {
            // Header row: locate the x/y columns.
            xi = cells
                .iter()
                .position(|c| *c == "x_mm")
                .ok_or_else(|| bad("header has no x_mm column".into()))?;
            yi = cells
                .iter()
                .position(|c| *c == "y_mm")
                .ok_or_else(|| bad("header has no y_mm column".into()))?;
            lines.next();
        }
    }
    let mut points = Vec::new();
    for (n, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() <= xi.max(yi) {
            return Err(bad(format!("line {}: expected at least {} columns", n + 2, xi.max(yi) + 1)));
        }
        let x = cells[xi]
            .parse::<f64>()
            .map_err(|_| bad(format!("line {}: bad number `{}`", n + 2, cells[xi])))?;
        let y = cells[yi]
            .parse::<f64>()
            .map_err(|_| bad(format!("line {}: bad number `{}`", n + 2, cells[yi])))?;
        points.push(Point2::new(units::mm_to_m(x), units::mm_to_m(y)));
    }
    Ok(points)
}

fn cmd_metrics(args: MetricsArgs) -> Result<(), Error> {
    let points = parse_points(&args.points)?;
    let nominal = match (args.nominal_cx_mm, args.nominal_cy_mm, args.nominal_r_mm) {
        (Some(cx), Some(cy), Some(r)) => Some((
            Point2::new(units::mm_to_m(cx), units::mm_to_m(cy)),
            units::mm_to_m(r),
        )),
        _ => None,
    };
    let report = CircularityReport::from_points(&points, nominal)?;
    let um = 1e6;
    let out = MetricsOutput {
        g_um: report.g * um,
        fmax_um: report.f_max * um,
        fmin_um: report.f_min * um,
        center_mm: [
            units::m_to_mm(report.fit.center.x),
            units::m_to_mm(report.fit.center.y),
        ],
        radius_mm: units::m_to_mm(report.fit.radius),
        rms_um: report.fit.rms_residual * um,
        points: points.len(),
        nominal_defaulted: report.nominal_defaulted,
    };
    let mut text = serde_json::to_string_pretty(&out).expect("metrics serialize");
    text.push('\n');
    write_or_print(args.out.as_deref(), &text)
}

fn cmd_generate(args: GenerateArgs) -> Result<(), Error> {
    let path = build_path(args.kind, &args.shape)?;
    match &args.out {
        Some(file) => save_toolpath(&path, file),
        None => {
            print!("{}", toolpath_to_json_string(&path));
            Ok(())
        }
    }
}
