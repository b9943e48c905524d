use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use spindirac::bounds::{compare, refinement_tolerance, BoundReport};
use spindirac::clifford::build_rep;
use spindirac::curvature::curvature;
use spindirac::dirac::{
    assemble_with, spectrum_with, DiracSettings, SolverSettings, SpectrumReport, SCHEMA_VERSION,
};
use spindirac::mesh::{self, load_mesh_file, make_ellipsoid, make_sphere, make_torus, TriMesh};
use spindirac::reilly::{
    random_spinor, verify, AmbientSpinorField, PolynomialSpinorField, RadialQuadraticSpinor,
    TwistorFamilySpinor, VerificationRecord,
};

/// Spectra of discrete surface Dirac operators and the eigenvalue bounds they satisfy.
#[derive(Parser, Debug)]
#[command(name = "spindirac", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Smallest-magnitude eigenvalues of the Dirac operator on a mesh.
    Spectrum(SpectrumArgs),
    /// Compare the first nonnegative eigenvalue with the curvature bounds.
    Bounds(BoundsArgs),
    /// Check the boundary integral identities on the unit ball.
    Reilly(ReillyArgs),
}

#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false)]
struct MeshSource {
    /// OFF or OBJ file.
    #[arg(long, value_name = "PATH")]
    mesh: Option<PathBuf>,
    /// Icosphere of radius r with s subdivisions.
    #[arg(long, value_name = "r,s")]
    sphere: Option<String>,
    /// Torus with radii R > r on an nu × nv grid.
    #[arg(long, value_name = "R,r,nu,nv")]
    torus: Option<String>,
    /// Ellipsoid with semi-axes a, b, c and s subdivisions.
    #[arg(long, value_name = "a,b,c,s")]
    ellipsoid: Option<String>,
}

#[derive(Args, Debug, Clone)]
struct OperatorArgs {
    #[command(flatten)]
    source: MeshSource,
    /// Wilson coefficient of the operator.
    #[arg(long, default_value_t = 1.0)]
    wilson: f64,
    /// Relative residual required of each eigenpair.
    #[arg(long, default_value_t = 1e-10)]
    solver_tol: f64,
    /// Seed of the eigensolver start block.
    #[arg(long, default_value_t = 0x5EED)]
    seed: u64,
    /// Output directory; reports go to stdout when absent.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SpectrumFormat {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum BoundsFormat {
    Json,
    Table,
}

#[derive(Args, Debug)]
struct SpectrumArgs {
    #[command(flatten)]
    op: OperatorArgs,
    /// Number of eigenpairs.
    #[arg(short, default_value_t = 12, value_parser = clap::value_parser!(u64).range(1..))]
    k: u64,
    #[arg(long, value_enum, default_value_t = SpectrumFormat::Json)]
    format: SpectrumFormat,
}

#[derive(Args, Debug)]
struct BoundsArgs {
    #[command(flatten)]
    op: OperatorArgs,
    /// Number of eigenpairs used to locate the first nonnegative eigenvalue.
    #[arg(short, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..))]
    k: u64,
    /// Discretization tolerance; estimated from one coarser mesh when omitted.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_enum, default_value_t = BoundsFormat::Table)]
    format: BoundsFormat,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Family {
    Twistor,
    NonTwistor,
    Polynomial,
}

#[derive(Args, Debug)]
struct ReillyArgs {
    /// Quadrature points per coordinate direction.
    #[arg(long, default_value_t = 32)]
    resolution: usize,
    /// Number of random fields.
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, value_enum, default_value_t = Family::Twistor)]
    family: Family,
    /// Largest accepted relative identity defect.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 0x5EED)]
    seed: u64,
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

/// How a mesh was obtained, kept so a coarser mesh can be built for tolerance estimates.
#[derive(Debug, Clone)]
enum Source {
    File(PathBuf),
    Sphere(f64, usize),
    Torus(f64, f64, usize, usize),
    Ellipsoid(f64, f64, f64, usize),
}

fn numbers(text: &str, n: usize, flag: &str) -> Result<Vec<f64>> {
    let v = text
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .with_context(|| format!("{flag} expects {n} comma-separated numbers, got {text:?}"))?;
    if v.len() != n {
        bail!(
            "{flag} expects {n} comma-separated numbers, got {}",
            v.len()
        );
    }
    Ok(v)
}

fn count(v: f64, what: &str) -> Result<usize> {
    if v.fract() != 0.0 || v < 0.0 {
        bail!("{what} must be a nonnegative integer, got {v}");
    }
    Ok(v as usize)
}

impl Source {
    fn parse(m: &MeshSource) -> Result<Self> {
        Ok(if let Some(p) = &m.mesh {
            Source::File(p.clone())
        } else if let Some(v) = &m.sphere {
            let v = numbers(v, 2, "--sphere")?;
            Source::Sphere(v[0], count(v[1], "subdivision level")?)
        } else if let Some(v) = &m.torus {
            let v = numbers(v, 4, "--torus")?;
            Source::Torus(v[0], v[1], count(v[2], "nu")?, count(v[3], "nv")?)
        } else if let Some(v) = &m.ellipsoid {
            let v = numbers(v, 4, "--ellipsoid")?;
            Source::Ellipsoid(v[0], v[1], v[2], count(v[3], "subdivision level")?)
        } else {
            bail!("no mesh source given")
        })
    }

    fn build(&self) -> Result<TriMesh> {
        let mesh = match *self {
            Source::File(ref p) => load_mesh_file(p),
            Source::Sphere(r, s) => make_sphere(r, s),
            Source::Torus(big, small, nu, nv) => make_torus(big, small, nu, nv),
            Source::Ellipsoid(a, b, c, s) => make_ellipsoid(a, b, c, s),
        };
        mesh.with_context(|| format!("cannot build mesh {self:?}"))
    }

    fn coarser(&self) -> Option<Source> {
        match *self {
            Source::File(_) => None,
            Source::Sphere(r, s) => (s > mesh::MIN_RESOLUTION).then(|| Source::Sphere(r, s - 1)),
            Source::Ellipsoid(a, b, c, s) => {
                (s > mesh::MIN_RESOLUTION).then(|| Source::Ellipsoid(a, b, c, s - 1))
            }
            Source::Torus(big, small, nu, nv) => {
                (nu >= 6 && nv >= 6).then(|| Source::Torus(big, small, nu / 2, nv / 2))
            }
        }
    }
}

fn compute(
    source: &Source,
    args: &OperatorArgs,
    k: usize,
) -> Result<(
    TriMesh,
    spindirac::curvature::CurvatureField,
    SpectrumReport,
)> {
    let mesh = source.build()?;
    let curv = curvature(&mesh)?;
    let op = assemble_with(
        &mesh,
        &build_rep(),
        &curv,
        &DiracSettings {
            wilson: args.wilson,
        },
    )?;
    let settings = SolverSettings {
        tolerance: args.solver_tol,
        seed: args.seed,
        ..SolverSettings::default()
    };
    let report = spectrum_with(&op, k.min(op.dim()), &settings)?;
    Ok((mesh, curv, report))
}

fn emit(out: Option<&Path>, name: &str, text: &str) -> Result<()> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
            let path = dir.join(name);
            fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
            eprintln!("wrote {}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn run_spectrum(args: &SpectrumArgs) -> Result<bool> {
    let source = Source::parse(&args.op.source)?;
    let (_, _, report) = compute(&source, &args.op, args.k as usize)?;
    match args.format {
        SpectrumFormat::Json => emit(
            args.op.out.as_deref(),
            "spectrum.json",
            &(report.to_json() + "\n"),
        )?,
        SpectrumFormat::Csv => emit(args.op.out.as_deref(), "spectrum.csv", &report.to_csv())?,
    }
    if !report.is_symmetric() {
        eprintln!(
            "warning: symmetry residual {:.3e} exceeds tolerance {:.3e}",
            report.symmetry_residual, report.symmetry_tolerance
        );
    }
    Ok(true)
}

#[derive(Serialize)]
struct BoundsOutput<'a> {
    schema_version: u32,
    mesh: &'a spindirac::dirac::MeshInfo,
    /// `λ₁` on the coarser mesh used for the tolerance estimate.
    coarse_lambda1: Option<f64>,
    #[serde(flatten)]
    report: &'a BoundReport,
}

fn run_bounds(args: &BoundsArgs) -> Result<bool> {
    let source = Source::parse(&args.op.source)?;
    let k = args.k as usize;
    let (_, curv, report) = compute(&source, &args.op, k)?;
    let lambda1 = report
        .lambda1()
        .context("no nonnegative eigenvalue among the computed pairs; raise -k")?;
    let residual = lambda1 * report.max_residual();
    let mut coarse_lambda1 = None;
    let tol = match (args.tol, source.coarser()) {
        (Some(t), _) => t,
        (None, Some(coarse)) => {
            let (_, _, r) = compute(&coarse, &args.op, k)?;
            let c = r
                .lambda1()
                .context("coarse mesh has no nonnegative eigenvalue")?;
            coarse_lambda1 = Some(c);
            refinement_tolerance(c, lambda1, residual)
        }
        (None, None) => {
            let t = 0.02 * lambda1.abs().max(1.0);
            eprintln!("warning: no refinement available for a mesh file; using tolerance {t:.3e} (override with --tol)");
            t
        }
    };
    let bounds = compare(&report, &curv, tol)?;
    match args.format {
        BoundsFormat::Table => emit(args.op.out.as_deref(), "bounds.txt", &bounds.to_table())?,
        BoundsFormat::Json => {
            let out = BoundsOutput {
                schema_version: SCHEMA_VERSION,
                mesh: &report.mesh,
                coarse_lambda1,
                report: &bounds,
            };
            emit(
                args.op.out.as_deref(),
                "bounds.json",
                &(serde_json::to_string_pretty(&out)? + "\n"),
            )?
        }
    }
    Ok(bounds.passed())
}

#[derive(Serialize)]
struct ReillyOutput {
    schema_version: u32,
    family: String,
    resolution: usize,
    trials: usize,
    seed: u64,
    tolerance: f64,
    max_defect: f64,
    /// Smallest `lhs - rhs` with the twistor term dropped.
    min_twistor_margin: f64,
    passed: bool,
    records: Vec<VerificationRecord>,
}

fn run_reilly(args: &ReillyArgs) -> Result<bool> {
    if args.resolution < spindirac::reilly::MIN_RESOLUTION {
        eprintln!(
            "warning: resolution {} is below the minimum {}; results are not reliable",
            args.resolution,
            spindirac::reilly::MIN_RESOLUTION
        );
    }
    if args.resolution == 0 {
        bail!("resolution must be positive");
    }
    let rep = build_rep();
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut records = Vec::with_capacity(args.trials);
    for _ in 0..args.trials {
        let field: Box<dyn AmbientSpinorField> = match args.family {
            Family::Twistor => Box::new(TwistorFamilySpinor::new(
                &rep,
                random_spinor(&mut rng),
                random_spinor(&mut rng),
            )),
            Family::NonTwistor => Box::new(RadialQuadraticSpinor {
                phi0: random_spinor(&mut rng),
            }),
            Family::Polynomial => Box::new(PolynomialSpinorField::random(&mut rng)),
        };
        records.push(verify(&rep, field.as_ref(), args.resolution, args.tol)?);
    }
    let max_defect = records.iter().map(|r| r.defect).fold(0.0, f64::max);
    let min_twistor_margin = records
        .iter()
        .map(|r| r.twistor_margin)
        .fold(f64::INFINITY, f64::min);
    let mut passed = max_defect < args.tol && records.iter().all(|r| r.converged);
    if args.family == Family::NonTwistor {
        passed &= min_twistor_margin > 0.0;
    }
    let out = ReillyOutput {
        schema_version: SCHEMA_VERSION,
        family: args
            .family
            .to_possible_value()
            .map_or_else(String::new, |v| v.get_name().to_string()),
        resolution: args.resolution,
        trials: args.trials,
        seed: args.seed,
        tolerance: args.tol,
        max_defect,
        min_twistor_margin,
        passed,
        records,
    };
    emit(
        args.out.as_deref(),
        "reilly.json",
        &(serde_json::to_string_pretty(&out)? + "\n"),
    )?;
    Ok(passed)
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("SPINDIRAC_THREADS") {
        let n: usize = v
            .parse()
            .with_context(|| format!("SPINDIRAC_THREADS must be a positive integer, got {v:?}"))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()?;
        if n <= 1 {
            faer::set_global_parallelism(faer::Par::Seq);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| match &cli.command {
        Command::Spectrum(a) => run_spectrum(a),
        Command::Bounds(a) => run_bounds(a),
        Command::Reilly(a) => run_reilly(a),
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("one or more checks failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
