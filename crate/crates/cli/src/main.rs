#![allow(clippy::neg_cmp_op_on_partial_ord)]

use clap::{Args, Parser, Subcommand, ValueEnum};
use elastic_esm::elastic::{Direction, Material, PlaneWave, Point, DEFAULT_DIRECTIONS};
use elastic_esm::esm::{
    esm_reconstruct, multilevel, EsmParams, Mode, NormKind, Quadrature, SamplingGrid,
    DEFAULT_ALPHA, DEFAULT_INITIAL_RADIUS, DEFAULT_RADIUS_FLOOR,
};
use elastic_esm::mfs::{
    add_noise, mfs_farfield, BoundaryCondition, MfsConfig, MfsSystem, ShapeKind, ShapeSpec,
    DEFAULT_SEED,
};
use elastic_esm_cli::error::CliError;
use elastic_esm_cli::formats::{
    indicator_csv, parse_grid, parse_list, pgm, DatasetMeta, FarFieldFile, InversionRecord,
    LevelRecord, MaterialRecord, MultilevelRecord,
};
use elastic_esm_cli::selftest;
use num_complex::Complex64;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Extended sampling method for 2-D inverse elastic obstacle scattering.
#[derive(Parser)]
#[command(name = "esm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic far-field dataset with the MFS forward solver.
    Forward(ForwardArgs),
    /// Single-level ESM: indicator field and reconstruction disk.
    Invert(InvertArgs),
    /// Multilevel ESM: halve the probe radius until the minimiser leaves the previous disk.
    Multilevel(MultilevelArgs),
    /// Run the numerical self-checks.
    Selftest(SelftestArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ShapeArg {
    Pear,
    Peanut,
    Kite,
    Disk,
}

#[derive(Clone, Copy, ValueEnum)]
enum BcArg {
    Dirichlet,
    Neumann,
    Impedance,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    IppP,
    IppS,
    Ipf,
}

#[derive(Clone, Copy, ValueEnum)]
enum QuadratureArg {
    Unweighted,
    Trapezoid,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormArg {
    L2,
    Weighted,
}

#[derive(Args)]
struct ForwardArgs {
    #[arg(long, value_enum)]
    shape: ShapeArg,
    #[arg(long, value_enum)]
    bc: BcArg,
    /// Impedance coefficient.
    #[arg(long, default_value_t = 2.0)]
    sigma: f64,
    /// Disk radius (disk shape only).
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    /// Shape offset `x,y`.
    #[arg(long, default_value = "-2,3", allow_hyphen_values = true)]
    center: String,
    #[arg(long, default_value_t = 2.0)]
    lambda: f64,
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
    #[arg(long, default_value_t = std::f64::consts::PI)]
    omega: f64,
    /// Incident direction angle in radians.
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_3, allow_hyphen_values = true)]
    theta: f64,
    /// Compressional amplitude `re,im`.
    #[arg(long, default_value = "1,0", allow_hyphen_values = true)]
    ap: String,
    /// Shear amplitude `re,im`.
    #[arg(long = "as", default_value = "1,0", allow_hyphen_values = true)]
    a_s: String,
    #[arg(long, default_value_t = DEFAULT_DIRECTIONS)]
    directions: usize,
    /// Multiplicative noise level.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long)]
    sources: Option<usize>,
    #[arg(long)]
    collocation: Option<usize>,
    /// Largest accepted relative boundary residual.
    #[arg(long, default_value_t = 1e-6)]
    max_residual: f64,
    #[arg(long)]
    out: PathBuf,
    /// Metadata sidecar (default: `<out>.meta.json`).
    #[arg(long)]
    meta: Option<PathBuf>,
}

#[derive(Args)]
struct InversionArgs {
    /// Far-field CSV.
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum)]
    mode: ModeArg,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    /// Sampling grid `x_min,x_max,y_min,y_max,step`.
    #[arg(long, default_value = "-5,5,-5,5,0.1", allow_hyphen_values = true)]
    grid: String,
    #[arg(long, value_enum, default_value_t = QuadratureArg::Unweighted)]
    quadrature: QuadratureArg,
    #[arg(long, value_enum, default_value_t = NormArg::L2)]
    norm: NormArg,
    /// Expected number of directions; must match the file.
    #[arg(long)]
    directions: Option<usize>,
    /// Material flags must agree with the file header when given.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    omega: Option<f64>,
}

#[derive(Args)]
struct InvertArgs {
    #[command(flatten)]
    common: InversionArgs,
    /// Probe disk radius.
    #[arg(long)]
    radius: f64,
    /// Indicator CSV.
    #[arg(long)]
    out: PathBuf,
    /// Result record (default: `<out>.json`).
    #[arg(long)]
    json: Option<PathBuf>,
    /// Optional PGM heatmap.
    #[arg(long)]
    pgm: Option<PathBuf>,
}

#[derive(Args)]
struct MultilevelArgs {
    #[command(flatten)]
    common: InversionArgs,
    #[arg(long, default_value_t = DEFAULT_INITIAL_RADIUS)]
    r0: f64,
    #[arg(long, default_value_t = DEFAULT_RADIUS_FLOOR)]
    floor: f64,
    /// JSON trace.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SelftestArgs {
    /// Negative control: perturb the inner-product weight in the adjoint check.
    #[arg(long, hide = true)]
    corrupt_dps: bool,
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn complex_arg(s: &str, what: &str) -> Result<Complex64, CliError> {
    let v = parse_list(s, 2, what)?;
    Ok(Complex64::new(v[0], v[1]))
}

fn value_name(v: impl ValueEnum) -> String {
    v.to_possible_value()
        .map(|p| p.get_name().to_string())
        .unwrap_or_default()
}

fn json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("records serialise") + "\n"
}

fn forward(a: &ForwardArgs) -> Result<(), CliError> {
    let material = Material::new(a.lambda, a.mu, a.omega)?;
    let c = parse_list(&a.center, 2, "center")?;
    let center = Point::new(c[0], c[1]);
    let shape = match a.shape {
        ShapeArg::Pear => ShapeSpec::new(ShapeKind::Pear, center)?,
        ShapeArg::Peanut => ShapeSpec::new(ShapeKind::Peanut, center)?,
        ShapeArg::Kite => ShapeSpec::new(ShapeKind::Kite, center)?,
        ShapeArg::Disk => ShapeSpec::new(ShapeKind::Disk { radius: a.radius }, center)?,
    };
    let bc = match a.bc {
        BcArg::Dirichlet => BoundaryCondition::Dirichlet,
        BcArg::Neumann => BoundaryCondition::Neumann,
        BcArg::Impedance => BoundaryCondition::impedance(a.sigma)?,
    };
    let (ap, a_s) = (complex_arg(&a.ap, "ap")?, complex_arg(&a.a_s, "as")?);
    let pw = PlaneWave::new(Direction::new(a.theta), ap, a_s)?;
    if !(a.noise >= 0.0) {
        return Err(CliError::Config(format!(
            "noise level must be >= 0, got {}",
            a.noise
        )));
    }
    let defaults = MfsConfig::default();
    let config = MfsConfig {
        n_sources: a.sources.unwrap_or(defaults.n_sources),
        n_collocation: a.collocation.unwrap_or(defaults.n_collocation),
        ..defaults
    };
    let system = MfsSystem::new(&shape, bc, &material, &config).map_err(|e| match e {
        elastic_esm::Error::Solver { .. } => CliError::Quality(e.to_string()),
        e => e.into(),
    })?;
    let sol = system
        .solve(&pw)
        .map_err(|e| CliError::Quality(e.to_string()))?;
    if !(sol.residual <= a.max_residual) {
        return Err(CliError::Quality(format!(
            "boundary residual {:.3e} exceeds {:.1e}",
            sol.residual, a.max_residual
        )));
    }
    let mut data = mfs_farfield(&sol, &material, a.directions);
    if a.noise > 0.0 {
        data = add_noise(&data, a.noise, a.seed);
    }
    let shape_name = value_name(a.shape);
    let bc_name = value_name(a.bc);
    let file = FarFieldFile {
        material,
        meta: vec![
            ("shape".into(), shape_name.clone()),
            ("bc".into(), bc_name.clone()),
            ("incidence_theta".into(), format!("{:.16e}", a.theta)),
            ("ap".into(), format!("{:.16e},{:.16e}", ap.re, ap.im)),
            ("as".into(), format!("{:.16e},{:.16e}", a_s.re, a_s.im)),
            ("residual".into(), format!("{:.16e}", sol.residual)),
            ("noise".into(), format!("{:.16e}", a.noise)),
            ("seed".into(), a.seed.to_string()),
        ],
        data,
    };
    let meta = DatasetMeta {
        shape: shape_name,
        bc: bc_name,
        sigma: matches!(a.bc, BcArg::Impedance).then_some(a.sigma),
        material: MaterialRecord::from(&material),
        incidence_theta: a.theta,
        ap: [ap.re, ap.im],
        a_s: [a_s.re, a_s.im],
        m: a.directions,
        residual: sol.residual,
        condition: sol.condition,
        n_sources: config.n_sources,
        n_collocation: config.n_collocation,
        noise: a.noise,
        seed: a.seed,
    };
    write(&a.out, file.to_csv())?;
    let meta_path = a
        .meta
        .clone()
        .unwrap_or_else(|| with_suffix(&a.out, ".meta.json"));
    write(&meta_path, json(&meta))?;
    eprintln!("wrote {} (residual {:.2e})", a.out.display(), sol.residual);
    Ok(())
}

fn mode_of(m: ModeArg) -> Mode {
    match m {
        ModeArg::IppP => Mode::IppP,
        ModeArg::IppS => Mode::IppS,
        ModeArg::Ipf => Mode::Ipf,
    }
}

/// Loads the data file and checks it against the requested configuration.
fn load(a: &InversionArgs) -> Result<(FarFieldFile, EsmParams, SamplingGrid), CliError> {
    let path = a.data.display().to_string();
    let text = std::fs::read_to_string(&a.data).map_err(|e| CliError::io(&a.data, e))?;
    let file = FarFieldFile::parse(&text, &path)?;
    let m = file.data.len();
    if let Some(d) = a.directions {
        if d != m {
            return Err(CliError::Config(format!(
                "--directions {d} but {path} has {m} directions"
            )));
        }
    }
    for (flag, given, stored) in [
        ("lambda", a.lambda, file.material.lambda),
        ("mu", a.mu, file.material.mu),
        ("omega", a.omega, file.material.omega),
    ] {
        if let Some(v) = given {
            if v != stored {
                return Err(CliError::Config(format!(
                    "--{flag} {v} but {path} was generated with {stored}"
                )));
            }
        }
    }
    let mode = mode_of(a.mode);
    let needed: &[&[Complex64]] = match mode {
        Mode::IppP => &[&file.data.up],
        Mode::IppS => &[&file.data.us],
        Mode::Ipf => &[&file.data.up, &file.data.us],
    };
    if needed
        .iter()
        .any(|part| part.iter().all(|v| *v == Complex64::new(0.0, 0.0)))
    {
        return Err(CliError::Config(format!(
            "{path} has no data for mode {}",
            mode.name()
        )));
    }
    let params = EsmParams {
        alpha: a.alpha,
        probe_radius: DEFAULT_INITIAL_RADIUS,
        mode,
        m_directions: m,
        quadrature: match a.quadrature {
            QuadratureArg::Unweighted => Quadrature::Unweighted,
            QuadratureArg::Trapezoid => Quadrature::Trapezoid,
        },
        norm: match a.norm {
            NormArg::L2 => NormKind::L2,
            NormArg::Weighted => NormKind::Weighted,
        },
    };
    params.validate()?;
    Ok((file, params, parse_grid(&a.grid)?))
}

fn invert(a: &InvertArgs) -> Result<(), CliError> {
    let (file, params, grid) = load(&a.common)?;
    let params = EsmParams {
        probe_radius: a.radius,
        ..params
    };
    let rec = esm_reconstruct(&params, &file.material, &file.data, &grid)?;
    write(&a.out, indicator_csv(&rec.field))?;
    let record = InversionRecord {
        z_star: [rec.z_star.x, rec.z_star.y],
        radius: a.radius,
        min_raw_norm: rec.field.min_raw_norm(),
        mode: params.mode.name().to_string(),
        alpha: params.alpha,
    };
    let json_path = a
        .json
        .clone()
        .unwrap_or_else(|| with_suffix(&a.out, ".json"));
    write(&json_path, json(&record))?;
    if let Some(p) = &a.pgm {
        write(p, pgm(&rec.field))?;
    }
    println!(
        "z* = ({:.4}, {:.4}), R = {}",
        rec.z_star.x, rec.z_star.y, a.radius
    );
    Ok(())
}

fn run_multilevel(a: &MultilevelArgs) -> Result<(), CliError> {
    let (file, params, grid) = load(&a.common)?;
    let r = multilevel(&params, a.r0, a.floor, &file.material, &file.data, &grid)?;
    let record = MultilevelRecord {
        levels: r
            .levels
            .iter()
            .enumerate()
            .map(|(j, l)| LevelRecord {
                level: j,
                radius: l.radius,
                z: [l.z.x, l.z.y],
            })
            .collect(),
        z_final: [r.z_final.x, r.z_final.y],
        r_final: r.r_final,
    };
    write(&a.out, json(&record))?;
    println!(
        "z_final = ({:.4}, {:.4}), R_final = {}",
        r.z_final.x, r.z_final.y, r.r_final
    );
    Ok(())
}

fn run_selftest(a: &SelftestArgs) -> Result<(), CliError> {
    let checks = selftest::run(a.corrupt_dps);
    print!("{}", selftest::report(&checks));
    let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.name).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Selftest(failed.join(", ")))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 4 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Forward(a) => forward(a),
        Command::Invert(a) => invert(a),
        Command::Multilevel(a) => run_multilevel(a),
        Command::Selftest(a) => run_selftest(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("esm: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
