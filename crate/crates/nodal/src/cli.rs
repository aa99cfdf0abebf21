//! Argument parsing and dispatch.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nodal_core::curvature::{weyl_from_decomposition, CurvatureTensor, ProductSphereWeyl, SymmetryDefects};
use nodal_core::ding::{find_solutions, flat_residual};
use nodal_core::green_mass::{mass_closed_form, mass_ode};
use nodal_core::math::critical_exponent;
use nodal_core::obstruction::{
    certify_no_blowup, implied_rate, rule_out_by_decay, BubbleSummary, PointData, Verdict, WeylData,
};
use nodal_core::pohozaev::pohozaev_terms;
use nodal_core::profile::{lambda_invariant, ProfileKind};
use nodal_core::weyl_product::{weyl_otimes_b, Methods};
use nodal_core::Profile;
use serde::Serialize;

use crate::config::{Format, RunConfig};
use crate::document::{Metadata, MassRow, MassSweep, ProfileDocument, Report, Stored, TensorDocument};
use crate::error::{CliError, Result};
use crate::invariants;
use crate::io::{emit, read_document, read_value, to_json_bytes};
use crate::plot;
use crate::schema::SchemaKind;

/// Nodal bubble profiles, curvature functionals and blow-up obstructions.
///
/// Exit codes: 0 success, 1 I/O failure, 2 usage or input error,
/// 3 numerical failure, 4 asserted verdict violated.
#[derive(Debug, Parser)]
#[command(name = "nodal", version)]
pub struct Cli {
    /// Run configuration (JSON); defaults to $NODAL_CONFIG.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output format. CSV is available for plot data only.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Find the nodal latitude solution on S^p x S^q and store its pullback.
    Ding(DingArgs),
    /// Evaluate Weyl (x) B for a profile.
    WeylProduct(WeylProductArgs),
    /// Mass of the Green's function of Δ + h0 on S³.
    Mass3d(MassArgs),
    /// Terms of the Pohozaev identity on a ball.
    Pohozaev(PohozaevArgs),
    /// Sign test of the implied blow-up rate at a point.
    Check(CheckArgs),
    /// Run the explicit no-blow-up certificate.
    Certify(CertifyArgs),
    /// Run the property suite and print a pass/fail table.
    Invariants(InvariantsArgs),
    /// Weyl tensor, Ricci tensor, scalar curvature and symmetry defects.
    Curvature(CurvatureArgs),
    /// CSV plot data from a stored document, regardless of --format.
    ///
    /// Columns: latitude profiles give t,u,du on [0, π/2]; with --grid a
    /// biradial profile gives r1,r2,V and a radial one r,V,dV; mass sweeps
    /// give h0,mass.
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
pub struct DingArgs {
    #[arg(long)]
    pub p: usize,
    #[arg(long)]
    pub q: usize,
    /// Interior zeros of the latitude solution.
    #[arg(long, default_value_t = 0)]
    pub nodes: usize,
    /// Write the profile document here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct WeylProductArgs {
    /// Profile document, or `standard:N` for the standard bubble.
    #[arg(long)]
    pub profile: String,
    /// `zero`, `product:PxQ`, or a tensor document.
    #[arg(long)]
    pub weyl: String,
    /// Comma-separated subset of hessian,gradient,reduced,montecarlo.
    #[arg(long, value_delimiter = ',', default_values_t = [Route::Hessian, Route::Gradient, Route::Reduced])]
    pub methods: Vec<Route>,
    /// Seed for the Monte-Carlo route; falls back to the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Route {
    Hessian,
    Gradient,
    Reduced,
    Montecarlo,
}

impl std::fmt::Display for Route {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.to_possible_value().expect("no skipped variants").get_name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MassMethodArg {
    Closed,
    Ode,
    Both,
}

#[derive(Debug, Args)]
pub struct MassArgs {
    #[arg(long, conflicts_with = "sweep", required_unless_present = "sweep")]
    pub h0: Option<f64>,
    /// `start:stop:count`, equally spaced and inclusive.
    #[arg(long)]
    pub sweep: Option<String>,
    #[arg(long, value_enum, default_value_t = MassMethodArg::Closed)]
    pub method: MassMethodArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PohozaevArgs {
    /// Profile document, or `standard:N`.
    #[arg(long)]
    pub profile: String,
    /// Ball radius.
    #[arg(long)]
    pub delta: f64,
    /// Constant potential.
    #[arg(long, default_value_t = 0.0)]
    pub h0: f64,
    /// Exponent: `critical` or a number in (2, 2*].
    #[arg(long, default_value = "critical")]
    pub p: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Point data document; overrides the individual point flags.
    #[arg(long)]
    pub point: Option<PathBuf>,
    #[arg(long, required_unless_present = "point")]
    pub dim: Option<usize>,
    /// h(x0)
    #[arg(long, allow_hyphen_values = true, required_unless_present = "point")]
    pub h: Option<f64>,
    /// Scalar curvature at x0.
    #[arg(long, allow_hyphen_values = true, required_unless_present = "point")]
    pub sg: Option<f64>,
    /// `zero`, `product:PxQ`, or a tensor document (n ≥ 5).
    #[arg(long)]
    pub weyl: Option<String>,
    /// Green's function mass at x0 (n = 3).
    #[arg(long, allow_hyphen_values = true)]
    pub mass: Option<f64>,
    /// Profile document, or `standard:N`; its summary is computed.
    #[arg(long, conflicts_with = "summary", required_unless_present = "summary")]
    pub bubble: Option<String>,
    /// Precomputed bubble summary document.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// The equation is exactly critical (no subcritical slack).
    #[arg(long)]
    pub exactly_critical: bool,
    /// Use the decay route (n ≥ 5, Weyl ⊗ B against the potential).
    #[arg(long)]
    pub decay: bool,
    /// Exit with code 4 when the verdict is RULED_OUT.
    #[arg(long)]
    pub assert_not_ruled_out: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[arg(long)]
    pub dim: usize,
    #[arg(long)]
    pub t: f64,
    /// Cutoff radius.
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    /// Comma-separated center; defaults to the origin.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub xi0: Option<Vec<f64>>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InvariantsArgs {
    /// Skip the Monte-Carlo and second-split checks.
    #[arg(long)]
    pub quick: bool,
    /// Also write the checks as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CurvatureArgs {
    /// Round S^P x S^Q, given as `PxQ`.
    #[arg(long, conflicts_with = "tensor", required_unless_present = "tensor")]
    pub product: Option<String>,
    /// Riemann tensor document.
    #[arg(long)]
    pub tensor: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Profile document or mass sweep report.
    #[arg(long)]
    pub input: PathBuf,
    /// CSV destination; stdout if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// `r_max:count` grid for profiles.
    #[arg(long)]
    pub grid: Option<String>,
    /// Samples along the latitude.
    #[arg(long, default_value_t = 201)]
    pub points: usize,
}

struct Ctx {
    config: RunConfig,
    format: Format,
}

impl Ctx {
    fn out(&self, path: &Option<PathBuf>) -> Option<PathBuf> {
        path.as_deref().map(|p| self.config.output_path(p))
    }

    fn json_only(&self, command: &str) -> Result<()> {
        if self.format == Format::Csv {
            return Err(CliError::Usage(format!("`{command}` has no CSV output")));
        }
        Ok(())
    }

    fn report<T: Serialize>(&self, out: &Option<PathBuf>, body: T) -> Result<()> {
        emit(self.out(out).as_deref(), &to_json_bytes(&Report::new(body))?)
    }
}

/// Parses `argv` and runs the command; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("nodal: {e}");
            e.exit_code()
        }
    }
}

pub fn dispatch(cli: Cli) -> Result<()> {
    let config = RunConfig::resolve(cli.config.as_deref())?;
    let format = cli.format.or(config.format).unwrap_or_default();
    let ctx = Ctx { config, format };
    match cli.command {
        Command::Ding(a) => ding(&ctx, a),
        Command::WeylProduct(a) => weyl_product(&ctx, a),
        Command::Mass3d(a) => mass3d(&ctx, a),
        Command::Pohozaev(a) => pohozaev(&ctx, a),
        Command::Check(a) => check(&ctx, a),
        Command::Certify(a) => certify(&ctx, a),
        Command::Invariants(a) => run_invariants(&ctx, a),
        Command::Curvature(a) => curvature(&ctx, a),
        Command::Plot(a) => plot_cmd(&ctx, a),
    }
}

/// `standard:N` or a profile document.
pub fn load_profile(spec: &str) -> Result<Profile> {
    if let Some(n) = spec.strip_prefix("standard:") {
        let n: usize = n
            .parse()
            .map_err(|_| CliError::Usage(format!("bad dimension in `{spec}`")))?;
        return Ok(Profile::standard(n)?);
    }
    let doc: ProfileDocument = read_document(Path::new(spec), SchemaKind::Profile)?;
    doc.to_profile()
}

fn parse_split(s: &str) -> Result<(usize, usize)> {
    let bad = || CliError::Usage(format!("expected PxQ, got `{s}`"));
    let (p, q) = s.split_once(['x', 'X']).ok_or_else(bad)?;
    Ok((p.trim().parse().map_err(|_| bad())?, q.trim().parse().map_err(|_| bad())?))
}

/// `zero`, `product:PxQ`, or a tensor document.
pub fn load_weyl(spec: &str) -> Result<WeylData> {
    if spec == "zero" {
        return Ok(WeylData::Zero);
    }
    if let Some(split) = spec.strip_prefix("product:") {
        let (p, q) = parse_split(split)?;
        return Ok(WeylData::ProductSphere { p, q });
    }
    let doc: TensorDocument = read_document(Path::new(spec), SchemaKind::Tensor)?;
    Ok(WeylData::Explicit { tensor: doc.to_tensor()? })
}

fn ding(ctx: &Ctx, a: DingArgs) -> Result<()> {
    let search = find_solutions(a.p, a.q, a.nodes, &ctx.config.ding())?;
    let sol = search
        .with_nodes(a.nodes)
        .ok_or_else(|| CliError::Numerical(format!("no {}-node solution found on S^{} x S^{}", a.nodes, a.p, a.q)))?
        .clone();
    if ctx.format == Format::Csv {
        return emit(ctx.out(&a.out).as_deref(), &plot::latitude(&sol, 201)?);
    }
    let energy = sol.energy;
    let v = Profile::from_latitude(Arc::new(sol))?;
    let residual = flat_residual(&v, a.p, a.q)?;
    let lambda = lambda_invariant(&v, &ctx.config.quadrature_2d())?.value();
    let meta = Metadata {
        generator: crate::document::generator(),
        nodes: Some(a.nodes),
        residual: Some(residual),
        lambda: Some(lambda),
        energy: Some(energy),
    };
    emit(ctx.out(&a.out).as_deref(), &to_json_bytes(&ProfileDocument::from_profile(&v, meta))?)
}

fn weyl_product(ctx: &Ctx, a: WeylProductArgs) -> Result<()> {
    ctx.json_only("weyl-product")?;
    let v = load_profile(&a.profile)?;
    let weyl = load_weyl(&a.weyl)?;
    let methods = Methods {
        hessian: a.methods.contains(&Route::Hessian),
        gradient: a.methods.contains(&Route::Gradient),
        reduced: a.methods.contains(&Route::Reduced),
        montecarlo: a.methods.contains(&Route::Montecarlo),
    };
    let seed = a.seed.or(ctx.config.seed);
    if methods.montecarlo && seed.is_none() {
        return Err(CliError::Usage("the Monte-Carlo route needs --seed (or a seed in the config)".into()));
    }
    let tensor = weyl.materialize(v.n())?;
    let psw = weyl.product();
    let result = weyl_otimes_b(
        &tensor,
        psw.as_ref(),
        &v,
        methods,
        &ctx.config.quadrature_2d(),
        &ctx.config.montecarlo(seed.unwrap_or(0)),
    )?;
    ctx.report(&a.out, result)
}

/// `start:stop:count`
fn parse_sweep(s: &str) -> Result<Vec<f64>> {
    let bad = || CliError::Usage(format!("expected start:stop:count, got `{s}`"));
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, c] = parts.as_slice() else { return Err(bad()) };
    let (a, b): (f64, f64) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
    let count: usize = c.parse().map_err(|_| bad())?;
    Ok(match count {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..count).map(|i| a + (b - a) * i as f64 / (count - 1) as f64).collect(),
    })
}

fn mass_row(ctx: &Ctx, h0: f64, method: MassMethodArg) -> Result<MassRow> {
    Ok(match method {
        MassMethodArg::Closed => MassRow {
            h0,
            mass: mass_closed_form(h0)?.mass,
            mass_ode: None,
        },
        MassMethodArg::Ode => MassRow {
            h0,
            mass: mass_ode(h0, &ctx.config.ode())?.mass,
            mass_ode: None,
        },
        MassMethodArg::Both => MassRow {
            h0,
            mass: mass_closed_form(h0)?.mass,
            mass_ode: Some(mass_ode(h0, &ctx.config.ode())?.mass),
        },
    })
}

fn mass3d(ctx: &Ctx, a: MassArgs) -> Result<()> {
    let out = ctx.out(&a.out);
    if let Some(h0) = a.h0 {
        let row = mass_row(ctx, h0, a.method)?;
        if ctx.format == Format::Csv {
            return emit(out.as_deref(), &plot::mass_sweep(&[row])?);
        }
        return ctx.report(&a.out, row);
    }
    let grid = parse_sweep(a.sweep.as_deref().expect("clap requires --h0 or --sweep"))?;
    let rows = grid
        .into_iter()
        .map(|h| mass_row(ctx, h, a.method))
        .collect::<Result<Vec<_>>>()?;
    if ctx.format == Format::Csv {
        return emit(out.as_deref(), &plot::mass_sweep(&rows)?);
    }
    ctx.report(&a.out, MassSweep { rows })
}

fn pohozaev(ctx: &Ctx, a: PohozaevArgs) -> Result<()> {
    ctx.json_only("pohozaev")?;
    let v = load_profile(&a.profile)?;
    let p_exp = if a.p == "critical" {
        critical_exponent(v.n())
    } else {
        a.p.parse()
            .map_err(|_| CliError::Usage(format!("--p expects `critical` or a number, got `{}`", a.p)))?
    };
    let spec = if v.biradial_split().is_some() && !v.is_radial() {
        ctx.config.quadrature_2d()
    } else {
        ctx.config.quadrature_1d()
    };
    ctx.report(&a.out, pohozaev_terms(&v, a.h0, p_exp, a.delta, &spec)?)
}

fn check(ctx: &Ctx, a: CheckArgs) -> Result<()> {
    ctx.json_only("check")?;
    let point = match &a.point {
        Some(path) => read_document::<Stored<PointData>>(path, SchemaKind::Point)?.into_inner()?,
        None => PointData {
            n: a.dim.expect("clap requires --dim"),
            h_at_x0: a.h.expect("clap requires --h"),
            sg_at_x0: a.sg.expect("clap requires --sg"),
            weyl: a.weyl.as_deref().map(load_weyl).transpose()?,
            mass_at_x0: a.mass,
        },
    };
    point.validate()?;
    let summary = match (&a.summary, &a.bubble) {
        (Some(path), _) => {
            let s = read_document::<Stored<BubbleSummary>>(path, SchemaKind::Summary)?.into_inner()?;
            s.validate()?;
            s
        }
        (None, Some(spec)) => {
            let v = load_profile(spec)?;
            let qspec = if v.is_radial() {
                ctx.config.quadrature_1d()
            } else {
                ctx.config.quadrature_2d()
            };
            BubbleSummary::compute(&v, point.weyl.as_ref(), &qspec)?
        }
        (None, None) => unreachable!("clap requires --bubble or --summary"),
    };
    if summary.n != point.n {
        return Err(nodal_core::Error::DimensionMismatch(format!(
            "bubble of dimension {} at a point of dimension {}",
            summary.n, point.n
        ))
        .into());
    }
    let report = if a.decay {
        rule_out_by_decay(&point, &summary)?
    } else {
        implied_rate(&point, &summary, a.exactly_critical)?
    };
    let ruled_out = report.verdict == Verdict::RuledOut;
    ctx.report(&a.out, &report)?;
    if a.assert_not_ruled_out && ruled_out {
        return Err(CliError::Assertion(format!("verdict RULED_OUT ({:?} branch)", report.branch)));
    }
    Ok(())
}

fn certify(ctx: &Ctx, a: CertifyArgs) -> Result<()> {
    ctx.json_only("certify")?;
    let xi0 = a.xi0.unwrap_or_else(|| vec![0.0; a.dim]);
    if xi0.len() != a.dim {
        return Err(CliError::Usage(format!("--xi0 has {} components for --dim {}", xi0.len(), a.dim)));
    }
    let report = certify_no_blowup(a.dim, a.t, &xi0, a.delta, &ctx.config.certify())?;
    ctx.report(&a.out, report)
}

fn run_invariants(ctx: &Ctx, a: InvariantsArgs) -> Result<()> {
    let report = invariants::run(a.quick);
    print!("{}", report.table());
    if let Some(path) = ctx.out(&a.out) {
        crate::io::write_atomic(&path, &to_json_bytes(&Report::new(&report))?)?;
    }
    match report.failures() {
        0 => Ok(()),
        k => Err(CliError::ChecksFailed(k)),
    }
}

#[derive(Debug, Serialize)]
struct CurvatureReport {
    n: usize,
    scalar: f64,
    ricci: Vec<f64>,
    weyl: Vec<(usize, usize, usize, usize, f64)>,
    weyl_max_abs: f64,
    input_defects: SymmetryDefects,
    weyl_defects: SymmetryDefects,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<String>,
}

fn curvature(ctx: &Ctx, a: CurvatureArgs) -> Result<()> {
    ctx.json_only("curvature")?;
    let rm: CurvatureTensor = match (&a.product, &a.tensor) {
        (Some(s), _) => {
            let (p, q) = parse_split(s)?;
            ProductSphereWeyl::product_curvature(p, q)?.0
        }
        (None, Some(path)) => read_document::<TensorDocument>(path, SchemaKind::Tensor)?.to_tensor()?,
        (None, None) => unreachable!("clap requires --product or --tensor"),
    };
    let n = rm.n;
    let ric = rm.ricci();
    let scalar = rm.scalar();
    let w = weyl_from_decomposition(&rm, &ric, scalar, n)?;
    let report = CurvatureReport {
        n,
        scalar,
        ricci: ric.data.clone(),
        weyl: TensorDocument::from_tensor(&w.tensor).components,
        weyl_max_abs: w.tensor.max_abs(),
        input_defects: rm.symmetry_defects(),
        weyl_defects: w.tensor.symmetry_defects(),
        note: w.note,
    };
    ctx.report(&a.out, report)
}

fn parse_grid(s: &str) -> Result<(f64, usize)> {
    let bad = || CliError::Usage(format!("expected r_max:count, got `{s}`"));
    let (r, c) = s.split_once(':').ok_or_else(bad)?;
    Ok((r.parse().map_err(|_| bad())?, c.parse().map_err(|_| bad())?))
}

fn plot_cmd(ctx: &Ctx, a: PlotArgs) -> Result<()> {
    let value = read_value(&a.input)?;
    let out = ctx.out(&a.out);
    if value.get("rows").is_some() {
        let sweep: MassSweep = serde_json::from_value(value)
            .map_err(|e| CliError::Schema { path: Some(a.input.clone()), errors: vec![e.to_string()] })?;
        return emit(out.as_deref(), &plot::mass_sweep(&sweep.rows)?);
    }
    let doc: ProfileDocument = read_document(&a.input, SchemaKind::Profile)?;
    let v = doc.to_profile()?;
    let bytes = match (a.grid.as_deref().map(parse_grid).transpose()?, v.kind()) {
        (None, ProfileKind::Biradial { solution, .. }) => plot::latitude(solution, a.points)?,
        (Some((r_max, count)), ProfileKind::Biradial { .. }) => plot::biradial_grid(&v, r_max, count)?,
        (Some((r_max, count)), _) => plot::radial(&v, r_max, count)?,
        (None, _) => plot::radial(&v, 10.0, a.points)?,
    };
    emit(out.as_deref(), &bytes)
}
