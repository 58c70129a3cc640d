use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use twingraph::catalog::{self, Params};
use twingraph::conformal::{self, ResampleOptions};
use twingraph::error::{Error, Result};
use twingraph::fields::{HeightMap, Signature};
use twingraph::gauss::{self, ProjectivePointField};
use twingraph::grid::{GridDomain, NodeIndex, ScalarField};
use twingraph::interp::Interpolation;
use twingraph::report::to_json;
use twingraph::slag::{self, RotateMode, SLParams};
use twingraph::solver::{self, SolveOptions};
use twingraph::systems::{self, Normalization};
use twingraph::twin::{self, TwinPair};
use twingraph::{gfield, verify};

#[derive(Parser)]
#[command(name = "twingraph", version, about = "Minimal and maximal graphs, twins, lifts and Gauss maps")]
struct Cli {
    /// Cap on worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Closed-form surfaces.
    #[command(subcommand)]
    Catalog(CatalogCmd),
    /// Residual of the minimal or maximal system.
    Residual {
        #[arg(long, value_enum)]
        system: SystemArg,
        #[arg(long, value_enum, default_value = "euclidean")]
        signature: SignatureArg,
        #[arg(long, value_enum, default_value = "scaled")]
        normalization: NormArg,
        #[command(flatten)]
        input: Input,
    },
    /// Minimal graph to maximal twin and back.
    #[command(subcommand)]
    Twin(TwinCmd),
    /// Special Lagrangian lift and graph rotation.
    #[command(subcommand)]
    Sl(SlCmd),
    /// Generalized Gauss map tools.
    #[command(subcommand)]
    Gauss(GaussCmd),
    /// Isothermal chart tools.
    #[command(subcommand)]
    Chart(ChartCmd),
    /// Dirichlet solvers; interior values of the input are ignored.
    #[command(subcommand)]
    Solve(SolveCmd),
    /// Runs every applicable invariant on a catalog surface.
    VerifyAll {
        #[command(flatten)]
        source: CatalogSource,
    },
}

#[derive(Subcommand)]
enum CatalogCmd {
    /// Names, parameters and default domains as JSON.
    List,
    /// Samples a catalog surface to a GFIELD file.
    Sample {
        #[command(flatten)]
        source: CatalogSource,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum TwinCmd {
    /// Maximal twin g of a minimal graph f.
    Forward {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        anchor: Anchor,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Minimal twin f of a spacelike maximal graph g.
    Backward {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        anchor: Anchor,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Diagnostics of a given (f, g) pair.
    Verify {
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        g: PathBuf,
        #[command(flatten)]
        anchor: Anchor,
    },
}

#[derive(Subcommand)]
enum SlCmd {
    /// Potentials (M, N, h) of the lift of a scalar minimal graph.
    Lift {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        anchor: Anchor,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Graph rotation of a potential; standard or reverse mode.
    Rotate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        theta: f64,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        epsilon: i8,
        #[arg(long, value_enum, default_value = "standard")]
        mode: ModeArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Special Lagrangian residual, or the split one with --signature split.
    Residual {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        theta: f64,
        #[arg(long, value_enum, default_value = "euclidean")]
        signature: SignatureArg,
    },
    /// Phase angle of a potential and how constant it is.
    DetectAngle {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "euclidean")]
        signature: SignatureArg,
    },
}

#[derive(Subcommand)]
enum GaussCmd {
    /// Generalized Gauss map of a minimal graph.
    Map {
        #[command(flatten)]
        input: Input,
        /// Use the conjugate-derivative formula instead of the normal-frame one.
        #[arg(long)]
        alt: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Max deviation of a Gauss field from the quadric sum z_k^2 = 0.
    Quadric {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Hyperplane z_i = lambda z_j (1-based indices).
    Fit {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        i: usize,
        #[arg(long)]
        j: usize,
    },
    /// Max chordal distance between Gauss points.
    Planarity {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Gauss field of the gradient graph of a det D^2 F = 1 solution.
    Jorgens {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ChartCmd {
    /// Writes M, N, xi1, xi2, J_psi and the conformal factor.
    Build {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        anchor: Anchor,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Writes x, y and the heights on a uniform grid in chart coordinates.
    Resample {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        anchor: Anchor,
        #[command(flatten)]
        resample: ResampleArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Null curve of an immersion already sampled in chart coordinates.
    Nullcurve {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "euclidean")]
        signature: SignatureArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Null-curve relations between a minimal graph and its twin.
    Weierstrass {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        anchor: Anchor,
        #[command(flatten)]
        resample: ResampleArgs,
    },
}

#[derive(Subcommand)]
enum SolveCmd {
    Minimal(SolveArgs),
    Maximal(SolveArgs),
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    max_outer: Option<usize>,
    #[arg(long)]
    max_inner: Option<usize>,
    #[arg(long)]
    inner_tol: Option<f64>,
    #[arg(long)]
    outer_tol: Option<f64>,
    #[arg(long)]
    relaxation: Option<f64>,
    #[arg(long)]
    spacelike_margin: Option<f64>,
}

/// A height map from a GFIELD file or a catalog surface.
#[derive(Args)]
struct Input {
    #[arg(long = "in", conflicts_with = "name")]
    file: Option<PathBuf>,
    #[command(flatten)]
    source: OptCatalogSource,
}

#[derive(Args)]
struct OptCatalogSource {
    #[arg(long)]
    name: Option<String>,
    /// Repeated `key=value`.
    #[arg(long = "param", allow_hyphen_values = true)]
    params: Vec<String>,
    /// `x0,y0,x1,y1`; defaults to the surface's standard domain.
    #[arg(long, allow_hyphen_values = true)]
    domain: Option<String>,
    /// `nx,ny`.
    #[arg(long, default_value = "129,129")]
    grid: String,
}

#[derive(Args)]
struct CatalogSource {
    #[arg(long)]
    name: String,
    #[arg(long = "param", allow_hyphen_values = true)]
    params: Vec<String>,
    #[arg(long, allow_hyphen_values = true)]
    domain: Option<String>,
    #[arg(long, default_value = "129,129")]
    grid: String,
}

#[derive(Args)]
struct Anchor {
    /// Basepoint node `i,j`.
    #[arg(long, default_value = "0,0")]
    basepoint: String,
    /// Override for the closedness and system tolerances.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct ResampleArgs {
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    ny: Option<usize>,
    /// Target rectangle `a0,b0,a1,b1` in chart coordinates.
    #[arg(long, allow_hyphen_values = true)]
    rect: Option<String>,
    #[arg(long, value_enum, default_value = "cubic")]
    method: MethodArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum SystemArg {
    Minimal,
    Maximal,
    Divergence,
    Closedness,
}

#[derive(Clone, Copy, ValueEnum)]
enum SignatureArg {
    Euclidean,
    Split,
}

impl From<SignatureArg> for Signature {
    fn from(s: SignatureArg) -> Self {
        match s {
            SignatureArg::Euclidean => Signature::Euclidean,
            SignatureArg::Split => Signature::Split,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum NormArg {
    Raw,
    Scaled,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Standard,
    Reverse,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Cubic,
    Bilinear,
}

fn invalid(msg: String) -> Error {
    Error::ParamConstraintViolation(msg)
}

fn numbers(s: &str, count: usize, what: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != count {
        return Err(invalid(format!("{what} needs {count} comma-separated values, got `{s}`")));
    }
    parts
        .iter()
        .map(|p| {
            p.trim().replace('\u{2212}', "-").parse::<f64>().map_err(|_| invalid(format!("bad number `{p}` in {what}")))
        })
        .collect()
}

fn counts(s: &str, what: &str) -> Result<(usize, usize)> {
    let v = numbers(s, 2, what)?;
    if v.iter().any(|x| *x < 0.0 || x.fract() != 0.0) {
        return Err(invalid(format!("{what} needs non-negative integers, got `{s}`")));
    }
    Ok((v[0] as usize, v[1] as usize))
}

fn params(list: &[String]) -> Result<Params> {
    let mut p = Params::new();
    for item in list {
        let (k, v) = item.split_once('=').ok_or_else(|| invalid(format!("--param expects key=value, got `{item}`")))?;
        let v =
            v.trim().replace('\u{2212}', "-").parse::<f64>().map_err(|_| invalid(format!("bad value in `{item}`")))?;
        p.insert(k.trim().to_string(), v);
    }
    Ok(p)
}

fn catalog_domain(name: &str, p: &Params, domain: Option<&str>, grid: &str) -> Result<GridDomain> {
    let surface = catalog::Surface::new(name, p)?;
    let b = match domain {
        Some(s) => {
            let v = numbers(s, 4, "--domain")?;
            [v[0], v[1], v[2], v[3]]
        }
        None => surface.default_bounds(),
    };
    let (nx, ny) = counts(grid, "--grid")?;
    GridDomain::from_bounds(b[0], b[1], b[2], b[3], nx, ny)
}

fn sample_catalog(name: &str, list: &[String], domain: Option<&str>, grid: &str) -> Result<HeightMap> {
    let p = params(list)?;
    let d = catalog_domain(name, &p, domain, grid)?;
    catalog::make_surface(name, &p, &d)
}

impl Input {
    fn load(&self) -> Result<HeightMap> {
        match (&self.file, &self.source.name) {
            (Some(path), _) => gfield::read_height_map(path),
            (None, Some(name)) => {
                sample_catalog(name, &self.source.params, self.source.domain.as_deref(), &self.source.grid)
            }
            (None, None) => Err(invalid("give --in FILE or --name SURFACE".into())),
        }
    }
}

impl Anchor {
    fn basepoint(&self) -> Result<NodeIndex> {
        let (i, j) = counts(&self.basepoint, "--basepoint")?;
        Ok(NodeIndex::new(i, j))
    }
}

impl ResampleArgs {
    fn options(&self) -> Result<ResampleOptions> {
        let rect = match &self.rect {
            Some(s) => {
                let v = numbers(s, 4, "--rect")?;
                Some([v[0], v[1], v[2], v[3]])
            }
            None => None,
        };
        let method = match self.method {
            MethodArg::Cubic => Interpolation::Cubic,
            MethodArg::Bilinear => Interpolation::Bilinear,
        };
        Ok(ResampleOptions { nx: self.nx, ny: self.ny, rect, method })
    }
}

impl SolveArgs {
    fn options(&self) -> Result<SolveOptions> {
        let d = SolveOptions::default();
        let o = SolveOptions {
            max_outer: self.max_outer.unwrap_or(d.max_outer),
            max_inner: self.max_inner.unwrap_or(d.max_inner),
            inner_tol: self.inner_tol.unwrap_or(d.inner_tol),
            outer_tol: self.outer_tol.unwrap_or(d.outer_tol),
            relaxation: self.relaxation.unwrap_or(d.relaxation),
            spacelike_margin: self.spacelike_margin.unwrap_or(d.spacelike_margin),
        };
        o.validate()?;
        Ok(o)
    }
}

fn scalar(path: &Path) -> Result<ScalarField> {
    let mut fields = gfield::read_file(path)?;
    if fields.len() != 1 {
        return Err(Error::ShapeMismatch(format!("expected one field in {}, found {}", path.display(), fields.len())));
    }
    Ok(fields.remove(0))
}

fn write(out: Option<&Path>, fields: &[ScalarField]) -> Result<()> {
    match out {
        Some(p) => gfield::write_file(p, fields),
        None => Ok(()),
    }
}

/// What a command produced: a report for stdout and whether its checks passed.
struct Outcome {
    report: String,
    pass: bool,
}

impl From<String> for Outcome {
    fn from(report: String) -> Self {
        Outcome { report, pass: true }
    }
}

fn run(cmd: Cmd) -> Result<Outcome> {
    Ok(match cmd {
        Cmd::Catalog(CatalogCmd::List) => to_json(&catalog::list()).into(),
        Cmd::Catalog(CatalogCmd::Sample { source, out }) => {
            let f = sample_catalog(&source.name, &source.params, source.domain.as_deref(), &source.grid)?;
            gfield::write_file(&out, f.components())?;
            to_json(&json!({"surface": source.name, "n": f.n(), "out": out.display().to_string()})).into()
        }
        Cmd::Residual { system, signature, normalization, input } => {
            let f = input.load()?;
            let norm = match normalization {
                NormArg::Raw => Normalization::Raw,
                NormArg::Scaled => Normalization::Scaled,
            };
            let sig = Signature::from(signature);
            let r = match (system, sig) {
                (SystemArg::Minimal, _) => systems::minimal_residual(&f, norm),
                (SystemArg::Maximal, _) => systems::maximal_residual(&f, norm),
                (SystemArg::Divergence, Signature::Euclidean) => systems::divergence_residual(&f, norm),
                (SystemArg::Divergence, Signature::Split) => systems::maximal_divergence_residual(&f, norm),
                (SystemArg::Closedness, s) => systems::closedness_identities(&f, s, norm),
            };
            r.to_json().into()
        }
        Cmd::Twin(TwinCmd::Forward { input, anchor, out }) => {
            let pair = twin::twin_forward(&input.load()?, anchor.basepoint()?, anchor.tol)?;
            write(out.as_deref(), pair.g.components())?;
            pair.diagnostics_json().into()
        }
        Cmd::Twin(TwinCmd::Backward { input, anchor, out }) => {
            let pair = twin::twin_backward(&input.load()?, anchor.basepoint()?, anchor.tol)?;
            write(out.as_deref(), pair.f.components())?;
            pair.diagnostics_json().into()
        }
        Cmd::Twin(TwinCmd::Verify { f, g, anchor }) => {
            let pair = TwinPair::from_maps(
                gfield::read_height_map(f)?,
                gfield::read_height_map(g)?,
                anchor.basepoint()?,
                anchor.tol,
            )?;
            pair.diagnostics_json().into()
        }
        Cmd::Sl(SlCmd::Lift { input, anchor, out }) => {
            let lift = slag::sl_lift(&input.load()?, anchor.basepoint()?, anchor.tol)?;
            write(out.as_deref(), &lift.fields())?;
            lift.residuals_json().into()
        }
        Cmd::Sl(SlCmd::Rotate { input, theta, epsilon, mode, out }) => {
            let mode = match mode {
                ModeArg::Standard => RotateMode::Standard,
                ModeArg::Reverse => RotateMode::Reverse,
            };
            let p = SLParams::from_angle(theta, epsilon, mode)?;
            let h = slag::graph_rotate(&scalar(&input)?, &p, mode)?;
            gfield::write_file(&out, &[h])?;
            to_json(&json!({"lambda1": p.lambda1, "lambda2": p.lambda2, "epsilon": p.epsilon, "theta": p.theta})).into()
        }
        Cmd::Sl(SlCmd::Residual { input, theta, signature }) => {
            let h = scalar(&input)?;
            match Signature::from(signature) {
                Signature::Euclidean => slag::sl_residual(&h, theta),
                Signature::Split => slag::split_sl_residual(&h, theta)?,
            }
            .to_json()
            .into()
        }
        Cmd::Sl(SlCmd::DetectAngle { input, signature }) => {
            slag::detect_angle(&scalar(&input)?, signature.into())?.to_json().into()
        }
        Cmd::Gauss(GaussCmd::Map { input, alt, out }) => {
            let f = input.load()?;
            let g = if alt { gauss::gauss_map_alt(&f) } else { gauss::gauss_map(&f) };
            write(out.as_deref(), &g.to_fields())?;
            to_json(&json!({"width": g.width(), "quadric_residual": gauss::quadric_residual(&g)})).into()
        }
        Cmd::Gauss(GaussCmd::Quadric { input }) => {
            let g = ProjectivePointField::from_fields(&gfield::read_file(input)?)?;
            to_json(&json!({"quadric_residual": gauss::quadric_residual(&g)})).into()
        }
        Cmd::Gauss(GaussCmd::Fit { input, i, j }) => {
            let g = ProjectivePointField::from_fields(&gfield::read_file(input)?)?;
            gauss::hyperplane_fit(&g, i, j)?.to_json().into()
        }
        Cmd::Gauss(GaussCmd::Planarity { input }) => {
            let g = ProjectivePointField::from_fields(&gfield::read_file(input)?)?;
            to_json(&json!({"planarity_score": gauss::planarity_score(&g)})).into()
        }
        Cmd::Gauss(GaussCmd::Jorgens { input, tol, out }) => {
            let g = gauss::jorgens_gauss(&scalar(&input)?, tol)?;
            write(out.as_deref(), &g.to_fields())?;
            to_json(&json!({"planarity_score": gauss::planarity_score(&g), "quadric_residual": gauss::quadric_residual(&g)})).into()
        }
        Cmd::Chart(ChartCmd::Build { input, anchor, out }) => {
            let chart = conformal::build_chart(&input.load()?, anchor.basepoint()?, anchor.tol)?;
            write(out.as_deref(), &chart.fields())?;
            let jmin = chart.j_psi.values().iter().copied().fold(f64::INFINITY, f64::min);
            to_json(&json!({"min_j_psi": jmin, "max_j_psi": chart.j_psi.max_abs()})).into()
        }
        Cmd::Chart(ChartCmd::Resample { input, anchor, resample, out }) => {
            let f = input.load()?;
            let chart = conformal::build_chart(&f, anchor.basepoint()?, anchor.tol)?;
            let x = conformal::resample_to_chart(&chart, &f, &resample.options()?)?;
            gfield::write_file(&out, x.components())?;
            to_json(&conformal::conformality(&x, Signature::Euclidean)).into()
        }
        Cmd::Chart(ChartCmd::Nullcurve { input, signature, out }) => {
            let phi = conformal::null_curve(&gfield::read_height_map(input)?, signature.into());
            write(out.as_deref(), &phi.to_fields())?;
            phi.to_json().into()
        }
        Cmd::Chart(ChartCmd::Weierstrass { input, anchor, resample }) => {
            let base = anchor.basepoint()?;
            let pair = twin::twin_forward(&input.load()?, base, anchor.tol)?;
            let chart = conformal::build_chart(&pair.f, base, anchor.tol)?;
            conformal::verify_weierstrass_twin(&pair, &chart, &resample.options()?)?.to_json().into()
        }
        Cmd::Solve(SolveCmd::Minimal(args)) => {
            let s = solver::solve_minimal(&gfield::read_height_map(&args.input)?, &args.options()?)?;
            gfield::write_file(&args.out, s.field.components())?;
            s.history_json().into()
        }
        Cmd::Solve(SolveCmd::Maximal(args)) => {
            let s = solver::solve_maximal(&gfield::read_height_map(&args.input)?, &args.options()?)?;
            gfield::write_file(&args.out, s.field.components())?;
            s.history_json().into()
        }
        Cmd::VerifyAll { source } => {
            let p = params(&source.params)?;
            let d = catalog_domain(&source.name, &p, source.domain.as_deref(), &source.grid)?;
            let r = verify::verify_all(&source.name, &p, &d)?;
            Outcome { report: r.to_json(), pass: r.pass }
        }
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("PARAM_CONSTRAINT_VIOLATION: --threads must be positive");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli.cmd) {
        Ok(out) => {
            // A closed stdout (e.g. piped into `head`) is not an error.
            let _ = writeln!(std::io::stdout().lock(), "{}", out.report);
            if out.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(3)
            }
        }
        Err(e) => {
            eprintln!("{}: {e}", e.code());
            if !e.nodes().is_empty() {
                eprintln!("nodes: {}", serde_json::to_string(e.nodes()).unwrap_or_default());
            }
            ExitCode::from(if e.is_validation() { 1 } else { 2 })
        }
    }
}
