//! Batch front-end: body opening reports, regularization sweeps, Lusin
//! certificates, extensions, grid envelopes and second-order scans, with
//! JSON reports as the single source of truth and SVG/CSV as derived
//! views. Reports are deterministic functions of (inputs, config, seed)
//! for any worker count; `ROLLINGBALL_THREADS` caps the workers.

use clap::{Args, Parser, Subcommand, ValueEnum};
use rollingball::alexandrov::{alexandrov_scan, default_radii, NodeClass, ScanThresholds};
use rollingball::convex::chebyshev_center;
use rollingball::error::Error;
use rollingball::funcreg::{
    disagreement_measure, regularize, touch_points, MeasureMethod, PCQFunction,
    RegularizedFunction,
};
use rollingball::geometry::{BoxRegion, Vector};
use rollingball::glue::{convex_envelope, extend, second_difference, ConvexC1};
use rollingball::io;
use rollingball::morphology::{
    axis_box_measures_3d, boundary_measure_mc, contact_set_2d, lambda_factor, ContactMeasures3D,
    McEstimate,
};
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "rollingball",
    version,
    about = "Rolling-ball openings of convex bodies and C^{1,1} regularization of convex functions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convex-body operations.
    Body {
        #[command(subcommand)]
        cmd: BodyCmd,
    },
    /// Convex-function operations.
    Func {
        #[command(subcommand)]
        cmd: FuncCmd,
    },
    /// Lower convex hull of a sampled grid (CSV in, CSV out).
    Envelope(EnvelopeArgs),
    /// Second-order differentiability certification.
    Alexandrov {
        #[command(subcommand)]
        cmd: AlexandrovCmd,
    },
}

#[derive(Subcommand)]
enum BodyCmd {
    /// Ball opening K(r): exact 2D boundary decomposition, dilation
    /// factor, Monte Carlo boundary measures.
    Open(BodyOpenArgs),
    /// Boundary-measure estimation only.
    Measure(BodyMeasureArgs),
}

#[derive(Subcommand)]
enum FuncCmd {
    /// Epigraph-opening regularization g of f with disagreement measure.
    Regularize(FuncRegularizeArgs),
    /// Dyadic delta sweep with a Lusin-style certificate.
    Lusin(FuncLusinArgs),
    /// Convex C^{1,1} extension from a ball via the smooth maximum.
    Extend(FuncExtendArgs),
}

#[derive(Subcommand)]
enum AlexandrovCmd {
    /// Grid scan: touch classification, Hessian extraction, residuals.
    Scan(AlexandrovScanArgs),
}

#[derive(Args, Serialize)]
struct BodyOpenArgs {
    /// Body JSON file.
    #[arg(long)]
    input: PathBuf,
    /// Rolling radius r.
    #[arg(long)]
    radius: f64,
    /// Monte Carlo samples for the boundary-measure estimate.
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    /// Seed for the Monte Carlo stream (mandatory: the estimator is
    /// stochastic).
    #[arg(long)]
    seed: u64,
    /// Report JSON path.
    #[arg(long)]
    report: PathBuf,
    /// Optional SVG figure (2D bodies).
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct BodyMeasureArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    radius: f64,
    #[arg(long)]
    samples: u64,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    report: PathBuf,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum MethodArg {
    Grid,
    Mc,
}

#[derive(Args, Serialize)]
struct FuncRegularizeArgs {
    /// Function JSON file.
    #[arg(long)]
    input: PathBuf,
    /// Opening radius delta.
    #[arg(long)]
    delta: f64,
    /// Evaluation domain radius R (delta < R).
    #[arg(long, default_value_t = 8.0)]
    domain: f64,
    /// Probe region, e.g. "[-1,1]^1" or "[[0,1],[0,1]]".
    #[arg(long)]
    region: String,
    /// Grid cells per axis (grid method) and plot resolution.
    #[arg(long, default_value_t = 2001)]
    grid: usize,
    #[arg(long, value_enum, default_value_t = MethodArg::Grid)]
    method: MethodArg,
    /// Monte Carlo samples (mc method).
    #[arg(long, default_value_t = 200_000)]
    samples: u64,
    /// Seed (mandatory for the mc method).
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    report: PathBuf,
    /// Optional SVG plot: 1D curves (f, eroded, g) or 2D touch scatter.
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct FuncLusinArgs {
    #[arg(long)]
    input: PathBuf,
    /// Largest delta of the sweep; level k uses delta_base * 2^-k.
    #[arg(long, default_value_t = 0.2)]
    delta_base: f64,
    /// Number of sweep levels (k = 0..levels-1).
    #[arg(long, default_value_t = 7)]
    levels: u32,
    /// Target epsilon as a fraction of the region volume.
    #[arg(long, default_value_t = 1e-3)]
    epsilon_rel: f64,
    #[arg(long)]
    region: String,
    #[arg(long, default_value_t = 16.0)]
    domain: f64,
    #[arg(long, value_enum, default_value_t = MethodArg::Grid)]
    method: MethodArg,
    #[arg(long, default_value_t = 400_000)]
    samples: u64,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 4001)]
    grid: usize,
    #[arg(long)]
    report: PathBuf,
}

#[derive(Args, Serialize)]
struct FuncExtendArgs {
    #[arg(long)]
    input: PathBuf,
    /// Inner radius: the extension equals the input on |x| <= r.
    #[arg(long)]
    r: f64,
    /// Outer radius of the input's domain of validity.
    #[arg(long = "R")]
    big_r: f64,
    #[arg(long)]
    report: PathBuf,
}

#[derive(Args, Serialize)]
struct EnvelopeArgs {
    /// Grid CSV: coordinate columns then phi.
    #[arg(long)]
    input: PathBuf,
    /// Output CSV with columns coordinates, phi, F.
    #[arg(long)]
    out: PathBuf,
    /// Optional JSON summary.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct AlexandrovScanArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    delta: f64,
    #[arg(long)]
    region: String,
    /// Grid cells per axis.
    #[arg(long, default_value_t = 201)]
    grid: usize,
    #[arg(long, default_value_t = 8.0)]
    domain: f64,
    /// Residual decay factor required over the radius schedule.
    #[arg(long, default_value_t = 0.1)]
    decay_factor: f64,
    /// Absolute residual floor that also certifies.
    #[arg(long, default_value_t = 1e-8)]
    abs_threshold: f64,
    #[arg(long)]
    report: PathBuf,
    /// Optional per-node residual CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

/// Numeric tolerances pinned by the library, echoed into every report.
#[derive(Serialize)]
struct Tolerances {
    unit_normal: f64,
    membership: f64,
    min_interior_radius: f64,
    active_piece: f64,
    disagreement_threshold: f64,
}

impl Tolerances {
    fn current() -> Self {
        Tolerances {
            unit_normal: rollingball::convex::UNIT_NORMAL_TOL,
            membership: rollingball::convex::MEMBERSHIP_TOL,
            min_interior_radius: rollingball::convex::MIN_INTERIOR_RADIUS,
            active_piece: rollingball::funcreg::ACTIVE_TOL,
            disagreement_threshold: rollingball::funcreg::DISAGREE_TOL,
        }
    }
}

#[derive(Serialize)]
struct Report<C: Serialize, R: Serialize> {
    version: &'static str,
    command: &'static str,
    config: C,
    tolerances: Tolerances,
    results: R,
}

fn write_report<C: Serialize, R: Serialize>(
    path: &PathBuf,
    command: &'static str,
    config: C,
    results: R,
) -> Result<(), Error> {
    let report = Report {
        version: rollingball::VERSION,
        command,
        config,
        tolerances: Tolerances::current(),
        results,
    };
    let text = serde_json::to_string_pretty(&report)
        .map_err(|e| Error::InvalidInput(format!("report serialization: {e}")))?;
    std::fs::write(path, text + "\n")
        .map_err(|e| Error::InvalidInput(format!("writing {}: {e}", path.display())))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn read_to_string(path: &PathBuf) -> Result<String, Error> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("reading {}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Body { cmd } => match cmd {
            BodyCmd::Open(args) => body_open(args),
            BodyCmd::Measure(args) => body_measure(args),
        },
        Command::Func { cmd } => match cmd {
            FuncCmd::Regularize(args) => func_regularize(args),
            FuncCmd::Lusin(args) => func_lusin(args),
            FuncCmd::Extend(args) => func_extend(args),
        },
        Command::Envelope(args) => envelope_cmd(args),
        Command::Alexandrov { cmd } => match cmd {
            AlexandrovCmd::Scan(args) => alexandrov_cmd(args),
        },
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let (kind, code) = classify(&err);
            let field = extract_field(&err.to_string());
            let payload = serde_json::json!({
                "error": {
                    "kind": kind,
                    "message": err.to_string(),
                    "field": field,
                }
            });
            eprintln!("{payload}");
            ExitCode::from(code)
        }
    }
}

/// Exit code 2 for parse/validation problems, 3 for runtime failures.
fn classify(err: &Error) -> (&'static str, u8) {
    match err {
        Error::InvalidInput(_) => ("ParseError", 2),
        Error::InfeasibleBody(_)
        | Error::UnboundedBody(_)
        | Error::DegenerateBody(_)
        | Error::DegenerateGrid(_)
        | Error::InvalidSampleCount(_)
        | Error::OriginNotInterior(_)
        | Error::DomainExceeded(_) => ("ValidationError", 2),
        Error::ConvergenceFailure(_) | Error::InnerSolveFailure(_) => ("SolverError", 3),
        _ => ("RuntimeError", 3),
    }
}

fn extract_field(message: &str) -> Option<String> {
    let start = message.find("field '")? + 7;
    let rest = &message[start..];
    let end = rest.find('\'')?;
    Some(rest[..end].to_string())
}

// ---------------------------------------------------------------------------
// body
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct ExactMeasures {
    boundary_len: f64,
    contact_len: f64,
    lost_len: f64,
    gained_len: f64,
    sym_diff_len: f64,
}

#[derive(Serialize)]
struct BodyOpenResults {
    dim: usize,
    chebyshev_center: Vec<f64>,
    chebyshev_radius: f64,
    radius: f64,
    lambda: f64,
    /// Translation applied before computing lambda (to the Chebyshev
    /// center frame).
    lambda_translation: Vec<f64>,
    /// Exact decomposition measures (2D bodies only).
    exact: Option<ExactMeasures>,
    /// Exact boundary areas (3D axis boxes only).
    exact_3d: Option<ContactMeasures3D>,
    /// Monte Carlo estimate of the lost boundary measure.
    mc: McEstimate,
}

fn body_open(args: BodyOpenArgs) -> Result<(), Error> {
    let body = io::parse_body_json(&read_to_string(&args.input)?)?;
    let polytope = body.to_polytope()?;
    let (center, r_o) = chebyshev_center(&polytope);
    let (lambda, shift) = lambda_factor(&polytope, args.radius)?;
    let exact = if body.dim() == 2 {
        let polygon = body.polygon()?;
        let d = contact_set_2d(&polygon, args.radius)?;
        if let Some(svg_path) = &args.svg {
            std::fs::write(svg_path, io::svg_body_opening(&polygon, &d))
                .map_err(|e| Error::InvalidInput(format!("writing {}: {e}", svg_path.display())))?;
            println!("wrote {}", svg_path.display());
        }
        Some(ExactMeasures {
            boundary_len: d.boundary_len,
            contact_len: d.contact_len,
            lost_len: d.lost_len,
            gained_len: d.gained_len,
            sym_diff_len: d.sym_diff_len,
        })
    } else {
        if args.svg.is_some() {
            return Err(Error::InvalidInput(
                "--svg is only available for 2D bodies".into(),
            ));
        }
        None
    };
    let exact_3d = axis_box_measures_3d(&polytope, args.radius)?;
    let mc = boundary_measure_mc(&polytope, args.radius, args.samples, args.seed)?;
    let results = BodyOpenResults {
        dim: body.dim(),
        chebyshev_center: center.as_slice().to_vec(),
        chebyshev_radius: r_o,
        radius: args.radius,
        lambda,
        lambda_translation: shift.as_slice().to_vec(),
        exact,
        exact_3d,
        mc,
    };
    write_report(&args.report, "body open", &args, results)
}

#[derive(Serialize)]
struct BodyMeasureResults {
    dim: usize,
    radius: f64,
    /// Exact lost measure when available (2D bodies, 3D axis boxes).
    exact_lost: Option<f64>,
    mc: McEstimate,
}

fn body_measure(args: BodyMeasureArgs) -> Result<(), Error> {
    let body = io::parse_body_json(&read_to_string(&args.input)?)?;
    let polytope = body.to_polytope()?;
    let mc = boundary_measure_mc(&polytope, args.radius, args.samples, args.seed)?;
    let exact_lost = if body.dim() == 2 {
        Some(contact_set_2d(&body.polygon()?, args.radius)?.lost_len)
    } else {
        axis_box_measures_3d(&polytope, args.radius)?.map(|m| m.lost_area)
    };
    let results = BodyMeasureResults {
        dim: body.dim(),
        radius: args.radius,
        exact_lost,
        mc,
    };
    write_report(&args.report, "body measure", &args, results)
}

// ---------------------------------------------------------------------------
// func
// ---------------------------------------------------------------------------

fn measure_method(
    method: MethodArg,
    grid: usize,
    samples: u64,
    seed: Option<u64>,
) -> Result<MeasureMethod, Error> {
    match method {
        MethodArg::Grid => Ok(MeasureMethod::Grid { per_axis: grid }),
        MethodArg::Mc => {
            let seed = seed.ok_or_else(|| {
                Error::InvalidInput("--seed is mandatory for the mc method".into())
            })?;
            Ok(MeasureMethod::Mc { samples, seed })
        }
    }
}

#[derive(Serialize)]
struct RegularizeResults {
    delta: f64,
    domain: f64,
    disagreement: rollingball::funcreg::MeasureEstimate,
    /// Fraction of probe nodes on the touch set.
    touch_fraction: f64,
    /// Max of f - g over the probe nodes (nonpositive up to tolerance).
    max_f_minus_g: f64,
    probes: usize,
}

fn func_regularize(args: FuncRegularizeArgs) -> Result<(), Error> {
    let f = io::parse_function_json(&read_to_string(&args.input)?)?;
    let region = io::parse_region(&args.region)?;
    if region.dim() != f.dim() {
        return Err(Error::InvalidInput(format!(
            "region dimension {} does not match function dimension {}",
            region.dim(),
            f.dim()
        )));
    }
    let g = regularize(&f, args.delta, args.domain)?;
    let method = measure_method(args.method, args.grid, args.samples, args.seed)?;
    let disagreement = disagreement_measure(&g, &region, method)?;

    // Probe sweep for the sandwich check and the touch fraction.
    let per_axis = if f.dim() == 1 {
        args.grid.clamp(11, 4001)
    } else {
        61
    };
    let mut touch = 0usize;
    let mut max_violation = f64::NEG_INFINITY;
    let mut count = 0usize;
    for i in 0..region.cell_count(per_axis) {
        let x = region.cell_center(per_axis, i);
        if x.norm() > args.domain {
            continue;
        }
        count += 1;
        if g.is_touch(&x, 1e-9)? {
            touch += 1;
        }
        let diff = f.eval(&x) - g.value(&x)?;
        max_violation = max_violation.max(diff);
    }

    if let Some(plot) = &args.plot {
        let svg = plot_regularization(&f, &g, &region, args.grid)?;
        std::fs::write(plot, svg)
            .map_err(|e| Error::InvalidInput(format!("writing {}: {e}", plot.display())))?;
        println!("wrote {}", plot.display());
    }

    let results = RegularizeResults {
        delta: args.delta,
        domain: args.domain,
        disagreement,
        touch_fraction: touch as f64 / count.max(1) as f64,
        max_f_minus_g: max_violation,
        probes: count,
    };
    write_report(&args.report, "func regularize", &args, results)
}

fn plot_regularization(
    f: &PCQFunction,
    g: &RegularizedFunction,
    region: &BoxRegion,
    grid: usize,
) -> Result<String, Error> {
    if f.dim() == 1 {
        let n = grid.clamp(64, 2000);
        let mut cf = Vec::with_capacity(n);
        let mut ce = Vec::with_capacity(n);
        let mut cg = Vec::with_capacity(n);
        let mut touch = Vec::new();
        for i in 0..n {
            let x = region.lo[0] + (region.hi[0] - region.lo[0]) * i as f64 / (n - 1) as f64;
            let xv = Vector(vec![x]);
            let gv = g.value(&xv)?;
            cf.push([x, f.eval(&xv)]);
            ce.push([x, g.eroded().value(&xv)?]);
            cg.push([x, gv]);
            if g.is_touch(&xv, 1e-9)? {
                touch.push([x, gv]);
            }
        }
        Ok(io::svg_curves_1d(
            &[("f", &cf), ("eroded", &ce), ("g", &cg)],
            &[("touch", &touch)],
        ))
    } else if f.dim() == 2 {
        let pts = touch_points(g, region, 1e-9, 4000)?;
        let touch: Vec<[f64; 2]> = pts.iter().map(|p| [p[0], p[1]]).collect();
        let mut non_touch = Vec::new();
        for i in 0..region.cell_count(61) {
            let x = region.cell_center(61, i);
            if !g.is_touch(&x, 1e-9)? {
                non_touch.push([x[0], x[1]]);
            }
        }
        Ok(io::svg_points_2d(&[
            ("touch", &touch),
            ("disagree", &non_touch),
        ]))
    } else {
        Err(Error::InvalidInput("plots support 1D and 2D only".into()))
    }
}

#[derive(Serialize)]
struct LusinLevel {
    k: u32,
    delta: f64,
    measure: f64,
    error_bar: f64,
}

#[derive(Serialize)]
struct LusinResults {
    epsilon: f64,
    region_volume: f64,
    levels: Vec<LusinLevel>,
    monotone: bool,
    /// First sweep level whose measure (plus error bar) is below epsilon.
    achieved_level: Option<u32>,
    passed: bool,
}

fn func_lusin(args: FuncLusinArgs) -> Result<(), Error> {
    let f = io::parse_function_json(&read_to_string(&args.input)?)?;
    let region = io::parse_region(&args.region)?;
    if region.dim() != f.dim() {
        return Err(Error::InvalidInput(format!(
            "region dimension {} does not match function dimension {}",
            region.dim(),
            f.dim()
        )));
    }
    let epsilon = args.epsilon_rel * region.volume();
    let mut levels = Vec::new();
    let mut monotone = true;
    let mut achieved = None;
    let mut prev = f64::INFINITY;
    for k in 0..args.levels {
        let delta = args.delta_base * 0.5f64.powi(k as i32);
        let g = regularize(&f, delta, args.domain)?;
        let method = measure_method(args.method, args.grid, args.samples, args.seed)?;
        let est = disagreement_measure(&g, &region, method)?;
        if est.measure > prev + 1e-12 {
            monotone = false;
        }
        prev = est.measure;
        if achieved.is_none() && est.measure + est.error_bar <= epsilon {
            achieved = Some(k);
        }
        levels.push(LusinLevel {
            k,
            delta,
            measure: est.measure,
            error_bar: est.error_bar,
        });
    }
    let results = LusinResults {
        epsilon,
        region_volume: region.volume(),
        levels,
        monotone,
        achieved_level: achieved,
        passed: monotone && achieved.is_some(),
    };
    write_report(&args.report, "func lusin", &args, results)
}

#[derive(Serialize)]
struct ExtendResults {
    r: f64,
    big_r: f64,
    rho: f64,
    inner_min: f64,
    sphere_max: f64,
    quad_a: f64,
    quad_b: f64,
    epsilon: f64,
    /// Max |H - h| over inner-ball probes (0 when the glue is exact).
    inner_agreement: f64,
    /// Max |H - q| over probes beyond rho + epsilon.
    outer_agreement: f64,
    convex_on_probes: bool,
}

fn func_extend(args: FuncExtendArgs) -> Result<(), Error> {
    let f = io::parse_function_json(&read_to_string(&args.input)?)?;
    let n = f.dim();
    let glue = extend(Box::new(f.clone()), args.r, args.big_r)?;
    // Probe the defining identities.
    let dirs: Vec<Vector> = if n == 1 {
        vec![Vector(vec![1.0]), Vector(vec![-1.0])]
    } else {
        (0..64)
            .map(|i| {
                let a = 2.0 * std::f64::consts::PI * i as f64 / 64.0;
                let mut v = vec![0.0; n];
                v[0] = a.cos();
                v[1] = a.sin();
                Vector(v)
            })
            .collect()
    };
    let mut inner_agreement = 0.0_f64;
    for d in &dirs {
        for j in 0..=20 {
            let x = d.scale(args.r * j as f64 / 20.0);
            inner_agreement = inner_agreement.max((glue.value(&x)? - f.eval(&x)).abs());
        }
    }
    let mut outer_agreement = 0.0_f64;
    for d in &dirs {
        for j in 1..=20 {
            let x = d.scale(glue.rho + glue.epsilon + j as f64 * 0.1);
            outer_agreement = outer_agreement.max((glue.value(&x)? - glue.q_value(&x)).abs());
        }
    }
    let mut convex = true;
    for i in 0..dirs.len() {
        let a = dirs[i].scale(args.big_r * 1.2);
        let b = dirs[(i + dirs.len() / 2) % dirs.len()].scale(args.big_r * 0.8);
        let mid = a.axpy(1.0, &b).scale(0.5);
        if glue.value(&mid)? > 0.5 * (glue.value(&a)? + glue.value(&b)?) + 1e-9 {
            convex = false;
        }
    }
    let results = ExtendResults {
        r: args.r,
        big_r: args.big_r,
        rho: glue.rho,
        inner_min: glue.inner_min,
        sphere_max: glue.sphere_max,
        quad_a: glue.quad_a,
        quad_b: glue.quad_b,
        epsilon: glue.epsilon,
        inner_agreement,
        outer_agreement,
        convex_on_probes: convex,
    };
    write_report(&args.report, "func extend", &args, results)
}

// ---------------------------------------------------------------------------
// envelope
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct EnvelopeResults {
    nodes: usize,
    facets: usize,
    hull_vertices: usize,
    /// max(F - phi) over nodes; nonpositive up to rounding.
    max_envelope_excess: f64,
    /// sup of E_h(F)/|h|^2 over a coarse probe set.
    second_difference_ratio: f64,
}

fn envelope_cmd(args: EnvelopeArgs) -> Result<(), Error> {
    let (nodes, phi) = io::parse_grid_csv(&read_to_string(&args.input)?)?;
    let env = convex_envelope(&nodes, &phi)?;
    std::fs::write(&args.out, io::render_hull_csv(&env))
        .map_err(|e| Error::InvalidInput(format!("writing {}: {e}", args.out.display())))?;
    println!("wrote {}", args.out.display());
    if let Some(report) = &args.report {
        let max_excess = env
            .values()
            .iter()
            .zip(env.phi())
            .map(|(f, p)| f - p)
            .fold(f64::NEG_INFINITY, f64::max);
        let hull_vertices = (0..nodes.len()).filter(|&i| env.is_hull_vertex(i)).count();
        // Coarse second-difference scan inside the grid box.
        let dim = nodes[0].dim();
        let lo: Vec<f64> = (0..dim)
            .map(|d| nodes.iter().map(|p| p[d]).fold(f64::INFINITY, f64::min))
            .collect();
        let hi: Vec<f64> = (0..dim)
            .map(|d| {
                nodes
                    .iter()
                    .map(|p| p[d])
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect();
        let env_fn = |x: &Vector| env.value(x);
        let mut ratio = 0.0_f64;
        let span: f64 = (0..dim).map(|d| hi[d] - lo[d]).fold(f64::INFINITY, f64::min);
        for level in 1..=3 {
            let hstep = span * 0.02 / level as f64;
            let h = Vector(vec![hstep; dim]);
            for i in 0..60 {
                let x = Vector(
                    (0..dim)
                        .map(|d| {
                            lo[d] + hstep * 2.0 + (hi[d] - lo[d] - 4.0 * hstep) * i as f64 / 59.0
                        })
                        .collect(),
                );
                if let Ok(e) = second_difference(&env_fn, &x, &h) {
                    ratio = ratio.max(e / h.norm_sq());
                }
            }
        }
        let results = EnvelopeResults {
            nodes: nodes.len(),
            facets: env.facets().len(),
            hull_vertices,
            max_envelope_excess: max_excess,
            second_difference_ratio: ratio,
        };
        write_report(report, "envelope", &args, results)?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// alexandrov
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct ScanSummary {
    delta: f64,
    grid_per_axis: usize,
    radii: Vec<f64>,
    thresholds: ScanThresholds,
    cells: usize,
    certified: usize,
    kinks: usize,
    inconclusive: usize,
    certified_fraction: f64,
    touch_fraction: f64,
    non_touch_measure: f64,
    disagreement_measure: f64,
}

fn alexandrov_cmd(args: AlexandrovScanArgs) -> Result<(), Error> {
    let f = io::parse_function_json(&read_to_string(&args.input)?)?;
    let region = io::parse_region(&args.region)?;
    if region.dim() != f.dim() {
        return Err(Error::InvalidInput(format!(
            "region dimension {} does not match function dimension {}",
            region.dim(),
            f.dim()
        )));
    }
    let g = regularize(&f, args.delta, args.domain)?;
    let thresholds = ScanThresholds {
        decay_factor: args.decay_factor,
        absolute: args.abs_threshold,
    };
    let report = alexandrov_scan(&g, &region, args.grid, &default_radii(), thresholds)?;
    if let Some(csv) = &args.csv {
        let mut text = String::from("point,class,rho,tau\n");
        for node in &report.nodes {
            let join = |xs: &[f64]| {
                xs.iter()
                    .map(|c| format!("{c}"))
                    .collect::<Vec<_>>()
                    .join(";")
            };
            let class = match node.class {
                NodeClass::Certified => "certified",
                NodeClass::Kink => "kink",
                NodeClass::Inconclusive => "inconclusive",
            };
            text.push_str(&format!(
                "{},{class},{},{}\n",
                join(&node.point),
                join(&node.rho),
                join(&node.tau)
            ));
        }
        std::fs::write(csv, text)
            .map_err(|e| Error::InvalidInput(format!("writing {}: {e}", csv.display())))?;
        println!("wrote {}", csv.display());
    }
    let certified = report
        .nodes
        .iter()
        .filter(|n| n.class == NodeClass::Certified)
        .count();
    let kinks = report
        .nodes
        .iter()
        .filter(|n| n.class == NodeClass::Kink)
        .count();
    let summary = ScanSummary {
        delta: args.delta,
        grid_per_axis: args.grid,
        radii: report.radii.clone(),
        thresholds,
        cells: report.nodes.len(),
        certified,
        kinks,
        inconclusive: report.nodes.len() - certified - kinks,
        certified_fraction: report.certified_fraction,
        touch_fraction: report.touch_fraction,
        non_touch_measure: report.non_touch_measure,
        disagreement_measure: report.disagreement_measure,
    };
    write_report(&args.report, "alexandrov scan", &args, summary)
}
