//! Subcommands and their reports. Exit codes: 0 success, 1 domain error
//! (including points outside the moduli space), 2 usage error.

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use foliata_core::{
    assemble_omega, assemble_omega_degenerate, axis_seed, build_mesh, classify, degenerate_constants,
    derive_params, harmonic_residual, holonomy, integrate_frame, integrate_profile, isometry_check,
    jacobi_report, moduli_scan, profile_period, sinh_gordon_residual, weierstrass_flat, AssemblyOptions, Branch,
    ChartSpace, DegenerateSource, FrameField, FrameOptions, FrameSeed, GridSource, GridSpec, HolonomyReport,
    ModuliPoint, OmegaField, OmegaSource, ProfileKind, ProfileOptions, ProfileSolution, ProfileSource, Region,
    ResidualStats,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::io::field_file::{FieldFile, FieldOrigin};
use crate::io::obj::{write_obj, VertexCoords};
use crate::io::{fmt17, json as jsonio, sink};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Invalid combinations of otherwise well-formed flags (exit code 2).
#[derive(Debug)]
struct UsageError(String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Debug, Parser)]
#[command(name = "foliata", version, about = "Minimal surfaces foliated by constant-curvature horizontal curves")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "subcommand", rename_all = "lowercase")]
pub enum Command {
    /// Region label and membership certificate of a parameter point.
    Classify(ClassifyArgs),
    /// Region labels over a rectangle of (c, d), as CSV.
    Scan(ScanArgs),
    /// One profile function (f or g) as CSV, with a JSON sidecar.
    Profile(ProfileArgs),
    /// The conformal exponent omega on a grid, as a field file.
    Field(FieldArgs),
    /// Residual diagnostics for a field.
    Verify(VerifyArgs),
    /// OBJ mesh of the immersion.
    Mesh(MeshArgs),
    /// Period map of the frame over one period in x.
    Holonomy(HolonomyArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ParamArgs {
    /// Curvature of the base surface.
    #[arg(long, allow_hyphen_values = true)]
    pub c0: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub c: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub d: f64,
    /// Separation constant, only used when c0 = 0 (defaults to 0).
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
}

impl ParamArgs {
    fn point(&self) -> ModuliPoint {
        ModuliPoint { c0: self.c0, c: self.c, d: self.d, a: self.a }
    }
}

/// Parameters, optional so that a field file can stand in for them.
#[derive(Debug, Clone, Args, Serialize)]
pub struct MaybeParams {
    #[arg(long, allow_hyphen_values = true, requires_all = ["c", "d"])]
    pub c0: Option<f64>,
    #[arg(long, allow_hyphen_values = true, requires = "c0")]
    pub c: Option<f64>,
    #[arg(long, allow_hyphen_values = true, requires = "c0")]
    pub d: Option<f64>,
    #[arg(long, allow_hyphen_values = true, requires = "c0")]
    pub a: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GridArgs {
    #[arg(long, num_args = 4, value_names = ["X0", "X1", "Y0", "Y1"], allow_hyphen_values = true, default_values = ["0", "1", "0", "1"])]
    pub domain: Vec<f64>,
    #[arg(long, default_value_t = 101)]
    pub nx: usize,
    #[arg(long, default_value_t = 101)]
    pub ny: usize,
}

impl GridArgs {
    fn spec(&self) -> Result<GridSpec> {
        let [x0, x1, y0, y1] = self.domain[..] else { return Err(usage("--domain takes four values")) };
        GridSpec::new(x0, x1, y0, y1, self.nx, self.ny).map_err(|e| usage(e.to_string()))
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BuildArgs {
    /// Allowed first-integral drift of the profiles.
    #[arg(long, default_value_t = 1e-9)]
    pub tolerance: f64,
    /// Profile sampling step (default: the grid step, refined to at most 0.005).
    #[arg(long)]
    pub profile_step: Option<f64>,
    /// Use the constant solution f = 0 (requires c = 0).
    #[arg(long)]
    pub trivial_f: bool,
    /// Use the constant solution g = 0 (requires d = 0).
    #[arg(long)]
    pub trivial_g: bool,
    /// Denominator threshold of the reconstruction.
    #[arg(long, default_value_t = 1e-9)]
    pub eps_den: f64,
    /// Nodes with |sinh omega| above this are singular.
    #[arg(long, default_value_t = 1e8)]
    pub overflow_guard: f64,
}

impl BuildArgs {
    fn assembly(&self) -> AssemblyOptions {
        AssemblyOptions { eps_den: self.eps_den, overflow_guard: self.overflow_guard }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FrameArgs {
    /// Seed point; the nearest regular node is used. Defaults to an axis node.
    #[arg(long, num_args = 2, value_names = ["X", "Y"], allow_hyphen_values = true)]
    pub seed: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub psi0: f64,
    #[arg(long, num_args = 2, value_names = ["U1", "U2"], allow_hyphen_values = true)]
    pub u0: Option<Vec<f64>>,
    /// RK4 steps per grid spacing.
    #[arg(long, default_value_t = 2)]
    pub substeps: usize,
    /// Fail instead of truncating rows at singular or overflowing nodes.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ClassifyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub params: ParamArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ScanArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub c0: f64,
    #[arg(long, num_args = 4, value_names = ["CMIN", "CMAX", "DMIN", "DMAX"], allow_hyphen_values = true, required = true)]
    pub rect: Vec<f64>,
    #[arg(long, default_value_t = 64)]
    pub nx: usize,
    #[arg(long, default_value_t = 64)]
    pub ny: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KindArg {
    F,
    G,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ProfileArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub params: ParamArgs,
    #[arg(long, value_enum, default_value_t = KindArg::F)]
    pub kind: KindArg,
    #[arg(long, num_args = 2, value_names = ["X0", "X1"], allow_hyphen_values = true, default_values = ["0", "10"])]
    pub range: Vec<f64>,
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,
    /// Coordinate of the canonical initial conditions.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub origin: f64,
    #[arg(long, default_value_t = 1e-9)]
    pub tolerance: f64,
    /// Use the constant zero solution.
    #[arg(long)]
    pub trivial: bool,
    /// CSV output (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON sidecar (default: next to --out with extension .json).
    #[arg(long)]
    pub sidecar: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FieldArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub build: BuildArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A field from a file, or built from parameters on a grid.
#[derive(Debug, Clone, Args, Serialize)]
pub struct InputArgs {
    /// Field file written by `field`.
    #[arg(long, conflicts_with_all = ["c0", "c", "d", "a"])]
    pub field: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub params: MaybeParams,
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub build: BuildArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    /// Shiffman field, Jacobi identity and curvature cross-checks.
    #[arg(long)]
    pub shiffman: bool,
    /// Frame integration, isometry, harmonic-map and holonomy checks.
    #[arg(long)]
    pub immersion: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub frame: FrameArgs,
    /// Period for the holonomy check (default: the period of f, if any).
    #[arg(long)]
    pub period: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Frame,
    Weierstrass,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VerticesArg {
    Ambient,
    Chart,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MeshArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub frame: FrameArgs,
    /// Weierstrass integration is available for c0 = 0 only.
    #[arg(long, value_enum, default_value_t = MethodArg::Frame)]
    pub method: MethodArg,
    #[arg(long, value_enum, default_value_t = VerticesArg::Ambient)]
    pub vertices: VerticesArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct HolonomyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub frame: FrameArgs,
    #[arg(long)]
    pub period: Option<f64>,
    /// Rows on which the period map is tested.
    #[arg(long, default_value_t = 9)]
    pub rows: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    configure_threads();
    match execute(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<UsageError>() {
                2
            } else {
                1
            }
        }
    }
}

fn configure_threads() {
    let Ok(v) = std::env::var("FOLIATA_THREADS") else { return };
    match v.trim().parse::<usize>() {
        Ok(0) => {}
        Ok(n) => {
            if rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
                eprintln!("warning: thread pool already initialised; FOLIATA_THREADS ignored");
            }
        }
        Err(_) => eprintln!("warning: FOLIATA_THREADS={v:?} is not a thread count; ignored"),
    }
}

fn execute(cmd: &Command) -> Result<i32> {
    let config = serde_json::to_value(cmd)?;
    match cmd {
        Command::Classify(a) => run_classify(a, config),
        Command::Scan(a) => run_scan(a),
        Command::Profile(a) => run_profile(a, config),
        Command::Field(a) => run_field(a, config),
        Command::Verify(a) => run_verify(a, config),
        Command::Mesh(a) => run_mesh(a, config),
        Command::Holonomy(a) => run_holonomy(a, config),
    }
}

fn emit(out: Option<&Path>, value: &Value) -> Result<()> {
    let w = sink(out).context("opening output")?;
    jsonio::write(w, value, true).context("writing output")?;
    Ok(())
}

fn run_classify(a: &ClassifyArgs, config: Value) -> Result<i32> {
    let p = a.params.point();
    let rep = classify(&p)?;
    let d = &rep.derived;
    let r = d.roots;
    let certificate: Vec<Value> =
        rep.certificate.iter().map(|c| json!({"name": c.inequality, "value": c.lhs, "ok": c.satisfied})).collect();
    let value = json!({
        "version": VERSION,
        "config": config,
        "c0": p.c0,
        "c": p.c,
        "d": p.d,
        "label": rep.label.name(),
        "certificate": certificate,
        "derived": {
            "a": d.a, "cbar": d.cbar, "dbar": d.dbar, "delta": d.delta,
            "xminus": r.map(|r| r.xminus), "xplus": r.map(|r| r.xplus),
            "yminus": r.map(|r| r.yminus), "yplus": r.map(|r| r.yplus),
        },
    });
    emit(a.out.as_deref(), &value)?;
    if rep.inside() {
        Ok(0)
    } else {
        eprintln!("({}, {}, {}) lies outside the moduli space", p.c0, p.c, p.d);
        Ok(1)
    }
}

fn run_scan(a: &ScanArgs) -> Result<i32> {
    let [cmin, cmax, dmin, dmax] = a.rect[..] else { return Err(usage("--rect takes four values")) };
    let cells = moduli_scan(a.c0, (cmin, cmax, dmin, dmax), a.nx, a.ny).map_err(|e| usage(e.to_string()))?;
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(sink(a.out.as_deref())?);
    w.write_record(["c", "d", "label"])?;
    for cell in cells {
        w.write_record([fmt17(cell.c), fmt17(cell.d), cell.label.name().to_string()])?;
    }
    w.flush()?;
    Ok(0)
}

fn run_profile(a: &ProfileArgs, config: Value) -> Result<i32> {
    let dp = derive_params(&a.params.point())?;
    let kind = match a.kind {
        KindArg::F => ProfileKind::F,
        KindArg::G => ProfileKind::G,
    };
    let branch = if a.trivial { Branch::Trivial } else { Branch::Canonical };
    let opts = ProfileOptions { tolerance: a.tolerance, origin: a.origin, branch };
    let sol = integrate_profile(&dp, kind, (a.range[0], a.range[1]), a.step, &opts)?;
    let (col, dcol) = match kind {
        ProfileKind::F => ("f", "f_x"),
        ProfileKind::G => ("g", "g_y"),
    };
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(sink(a.out.as_deref())?);
    w.write_record(["x", col, dcol])?;
    for k in 0..sol.len() {
        w.write_record([fmt17(sol.x(k)), fmt17(sol.values[k]), fmt17(sol.derivs[k])])?;
    }
    w.flush()?;
    let sidecar = a.sidecar.clone().or_else(|| a.out.as_ref().map(|p| p.with_extension("json")));
    if let Some(path) = sidecar {
        let value = json!({
            "version": VERSION,
            "config": config,
            "kind": col,
            "params": dp,
            "range": [sol.x(0), sol.x(sol.len() - 1)],
            "square_interval": [sol.interval.0, sol.interval.1],
            "period": profile_period(&dp, kind).ok(),
            "first_integral_drift": sol.first_integral_drift,
        });
        emit(Some(&path), &value)?;
    }
    Ok(0)
}

/// An assembled field with the source used for stepping between nodes.
struct Problem {
    field: OmegaField,
    source: Box<dyn OmegaSource>,
    origin: Option<FieldOrigin>,
    f: Option<ProfileSolution>,
    params: Option<ModuliPoint>,
}

impl Problem {
    fn period(&self) -> Option<f64> {
        let f = self.f.as_ref()?;
        profile_period(&f.params, ProfileKind::F).ok()
    }
}

fn profile_step(spec: &GridSpec, build: &BuildArgs) -> f64 {
    build.profile_step.unwrap_or_else(|| {
        let h = spec.hx().min(spec.hy());
        h / (h / 0.005).ceil()
    })
}

fn build_profiles(p: &ModuliPoint, spec: &GridSpec, build: &BuildArgs, step: f64) -> Result<(ProfileSolution, ProfileSolution)> {
    let dp = derive_params(p)?;
    let branch = |trivial: bool| if trivial { Branch::Trivial } else { Branch::Canonical };
    let f_opts = ProfileOptions { tolerance: build.tolerance, origin: 0.0, branch: branch(build.trivial_f) };
    let g_opts = ProfileOptions { branch: branch(build.trivial_g), ..f_opts };
    let f = integrate_profile(&dp, ProfileKind::F, (spec.x0, spec.x1), step, &f_opts)?;
    let g = integrate_profile(&dp, ProfileKind::G, (spec.y0, spec.y1), step, &g_opts)?;
    Ok((f, g))
}

fn build_problem(p: &ModuliPoint, spec: &GridSpec, build: &BuildArgs) -> Result<Problem> {
    let rep = classify(p)?;
    if !rep.inside() {
        return Err(anyhow!("({}, {}, {}) lies outside the moduli space", p.c0, p.c, p.d));
    }
    if rep.label == Region::GammaHelicoidalType {
        let (alpha, beta) = degenerate_constants(p)?;
        let field = assemble_omega_degenerate(alpha, beta, spec, &build.assembly())?;
        return Ok(Problem {
            field,
            source: Box::new(DegenerateSource::new(alpha, beta)),
            origin: Some(FieldOrigin::Degenerate { alpha, beta }),
            f: None,
            params: Some(*p),
        });
    }
    let step = profile_step(spec, build);
    let (f, g) = build_profiles(p, spec, build, step)?;
    let field = assemble_omega(&f, &g, spec, &build.assembly())?;
    let origin = FieldOrigin::Profiles {
        params: *p,
        step,
        tolerance: build.tolerance,
        trivial_f: build.trivial_f,
        trivial_g: build.trivial_g,
        eps_den: build.eps_den,
        overflow_guard: build.overflow_guard,
    };
    Ok(Problem {
        field,
        source: Box::new(ProfileSource::new(f.clone(), g, build.assembly())?),
        origin: Some(origin),
        f: Some(f),
        params: Some(*p),
    })
}

fn load_problem(path: &Path) -> Result<Problem> {
    let file = FieldFile::read(path)?;
    let field = file.to_field()?;
    let spec = field.spec;
    match &file.origin {
        Some(FieldOrigin::Profiles { params, step, tolerance, trivial_f, trivial_g, eps_den, overflow_guard }) => {
            let build = BuildArgs {
                tolerance: *tolerance,
                profile_step: Some(*step),
                trivial_f: *trivial_f,
                trivial_g: *trivial_g,
                eps_den: *eps_den,
                overflow_guard: *overflow_guard,
            };
            let (f, g) = build_profiles(params, &spec, &build, *step)?;
            let source = ProfileSource::new(f.clone(), g, build.assembly())?;
            Ok(Problem { field, source: Box::new(source), origin: file.origin.clone(), f: Some(f), params: Some(*params) })
        }
        Some(FieldOrigin::Degenerate { alpha, beta }) => Ok(Problem {
            field,
            source: Box::new(DegenerateSource::new(*alpha, *beta)),
            origin: file.origin.clone(),
            f: None,
            params: None,
        }),
        None => {
            let source = GridSource::new(field.clone())?;
            Ok(Problem { field, source: Box::new(source), origin: None, f: None, params: None })
        }
    }
}

fn input_problem(input: &InputArgs) -> Result<Problem> {
    match (&input.field, input.params.c0) {
        (Some(path), _) => load_problem(path),
        (None, Some(c0)) => {
            let p = ModuliPoint { c0, c: input.params.c.unwrap_or(0.0), d: input.params.d.unwrap_or(0.0), a: input.params.a };
            build_problem(&p, &input.grid.spec()?, &input.build)
        }
        (None, None) => Err(usage("give either --field FILE or --c0, --c and --d")),
    }
}

fn run_field(a: &FieldArgs, config: Value) -> Result<i32> {
    let spec = a.grid.spec()?;
    let prob = build_problem(&a.params.point(), &spec, &a.build)?;
    eprintln!("{} of {} nodes singular", prob.field.singular_count(), spec.len());
    let mut file = FieldFile::from_field(&prob.field, prob.origin);
    file.version = Some(VERSION.to_string());
    file.config = Some(config);
    file.write(sink(a.out.as_deref())?).context("writing field file")?;
    Ok(0)
}

fn stats_json(s: &ResidualStats) -> Value {
    json!({"linf": s.linf, "l2": s.l2, "h": s.grid_h, "count": s.count})
}

fn frame_for(prob: &Problem, args: &FrameArgs) -> Result<FrameField> {
    let field = &prob.field;
    let mut seed = match &args.seed {
        Some(xy) => {
            let (i, j) = field.spec.nearest(xy[0], xy[1]);
            FrameSeed::nearest_regular(field, i, j)
        }
        None => axis_seed(field, prob.f.as_ref()),
    }
    .ok_or_else(|| anyhow!("no regular node to seed the frame"))?;
    seed.psi0 = args.psi0;
    if let Some(u) = &args.u0 {
        seed.u0 = [u[0], u[1]];
    }
    let opts = FrameOptions { substeps: args.substeps.max(1), strict: args.strict, ..FrameOptions::default() };
    Ok(integrate_frame(field, prob.source.as_ref(), &ChartSpace::for_curvature(field.c0), &seed, &opts)?)
}

fn holonomy_json(h: &HolonomyReport) -> Value {
    json!({
        "type": serde_json::to_value(h.kind).unwrap_or(Value::Null),
        "angle_or_length": h.angle_or_length,
        "fixed_point": h.fixed_point,
        "residual": h.residual,
        "closed": h.closed,
        "period": h.period,
    })
}

fn run_verify(a: &VerifyArgs, config: Value) -> Result<i32> {
    let prob = input_problem(&a.input)?;
    let field = &prob.field;
    let mut report = json!({
        "version": VERSION,
        "config": config,
        "c0": field.c0,
        "grid": {"domain": [field.spec.x0, field.spec.x1, field.spec.y0, field.spec.y1], "nx": field.spec.nx, "ny": field.spec.ny},
        "singular_count": field.singular_count(),
        "sinh_gordon": stats_json(&sinh_gordon_residual(field)?),
    });
    if a.shiffman {
        let j = jacobi_report(field)?;
        report["shiffman"] = json!({
            "max_u": j.max_u,
            "jacobi_residual": stats_json(&j.jacobi_residual),
            "potential_identity_linf": j.potential_identity_linf,
            "gauss_dual_route_linf": j.gauss_dual_route_linf,
            "curvature_route_linf": j.curvature_route_linf,
        });
    }
    if a.immersion {
        let fr = frame_for(&prob, &a.frame)?;
        let iso = isometry_check(&fr, field)?;
        let harm = harmonic_residual(&fr)?;
        let hol = match a.period.or_else(|| prob.period()) {
            Some(p) => match holonomy(&fr, prob.source.as_ref(), p, a.frame.substeps.max(1), 9) {
                Ok(h) => holonomy_json(&h),
                Err(e) => {
                    eprintln!("holonomy skipped: {e}");
                    Value::Null
                }
            },
            None => Value::Null,
        };
        report["immersion"] = json!({
            "reached": fr.reached(),
            "compat_linf": fr.compat_linf,
            "isometry_linf": iso.isometry_linf,
            "hopf_real_err": iso.hopf_real_err,
            "hopf_imag_err": iso.hopf_imag_err,
            "harmonic_linf": harm.linf,
            "holonomy": hol,
        });
    }
    emit(a.out.as_deref(), &report)?;
    Ok(0)
}

fn run_mesh(a: &MeshArgs, config: Value) -> Result<i32> {
    let prob = input_problem(&a.input)?;
    let fr = frame_for(&prob, &a.frame)?;
    let mut mesh = match a.method {
        MethodArg::Frame => build_mesh(&fr, &prob.field)?,
        MethodArg::Weierstrass => weierstrass_flat(&prob.field, &fr)?,
    };
    mesh.params = prob.params;
    let coords = match a.vertices {
        VerticesArg::Ambient => VertexCoords::Ambient,
        VerticesArg::Chart => VertexCoords::Chart,
    };
    let header = [format!("version {VERSION}"), format!("config {}", jsonio::to_string(&config, false))];
    let mut w = sink(a.out.as_deref())?;
    write_obj(&mut w, &mesh, coords, &header).context("writing mesh")?;
    w.flush()?;
    eprintln!("{} vertices, {} faces", mesh.nodes.len(), mesh.faces.len());
    Ok(0)
}

fn run_holonomy(a: &HolonomyArgs, config: Value) -> Result<i32> {
    let prob = input_problem(&a.input)?;
    let period = a.period.or_else(|| prob.period()).ok_or_else(|| anyhow!("no period: pass --period"))?;
    let fr = frame_for(&prob, &a.frame)?;
    let h = holonomy(&fr, prob.source.as_ref(), period, a.frame.substeps.max(1), a.rows)?;
    let mut value = holonomy_json(&h);
    value["version"] = json!(VERSION);
    value["config"] = config;
    emit(a.out.as_deref(), &value)?;
    Ok(0)
}
