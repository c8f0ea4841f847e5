//! Command-line front end for the `pipir` kinematics library.

pub mod config;
pub mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use pipir::kinematics::{enumerate_ik, forward_kinematics, inverse_kinematics, WorkingMode};
use pipir::model::{build_system, ConstraintSystem, JointInput, OperationMode, Pose, Preset};
use pipir::singularity::{classify, parallel_factor_values, SingularityKind};
use pipir::workspace::{jointspace_map, label_aspects, transition_report, workspace_map, GridSpec, MapKind};
use thiserror::Error;

use config::Config;
use output::{map_csv, transitions_csv, transitions_text, Format};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_EMPTY: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Empty(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Empty(_) => EXIT_EMPTY,
            CliError::Usage(_) | CliError::Io(_) => EXIT_USAGE,
        }
    }
}

impl From<pipir::Error> for CliError {
    fn from(e: pipir::Error) -> Self {
        match e {
            pipir::Error::Unreachable { .. } => CliError::Empty(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "pipir",
    version,
    about = "Kinematics and workspace analysis of the 3-PRPiR parallel robot"
)]
struct Cli {
    /// Configuration file (defaults to $PIPIR_CONFIG when set).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Constraint preset: consistent or paper-ik-mode4.
    #[arg(long, global = true)]
    preset: Option<Preset>,
    /// Significant digits for printed numbers.
    #[arg(long, global = true, default_value_t = 10)]
    digits: usize,
    /// Read and print angles in degrees.
    #[arg(long, global = true)]
    degrees: bool,
    /// Worker threads for map evaluation (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Actuator positions for a pose.
    Ik {
        #[arg(long)]
        mode: u8,
        /// x,y,z,alpha
        #[arg(long, allow_hyphen_values = true)]
        pose: String,
        /// Branch signs such as +-+, or `all`.
        #[arg(long, default_value = "+++")]
        wm: String,
    },
    /// Platform poses for actuator positions.
    Fk {
        #[arg(long)]
        mode: u8,
        /// rho1,rho2,rho3
        #[arg(long, allow_hyphen_values = true)]
        joints: String,
    },
    /// Serial/parallel singularity verdict at a pose.
    Singular {
        #[arg(long)]
        mode: u8,
        #[arg(long, allow_hyphen_values = true)]
        pose: String,
        #[arg(long, default_value = "+++")]
        wm: String,
    },
    /// Workspace section map with aspect labels.
    Wsmap {
        #[arg(long)]
        mode: u8,
        #[arg(long, default_value = "+++")]
        wm: String,
        #[command(flatten)]
        grid: GridArgs,
        /// Fixed y of the section.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        y: f64,
    },
    /// Joint-space slice map of forward-kinematics solution counts.
    Jsmap {
        #[arg(long)]
        mode: u8,
        #[command(flatten)]
        grid: GridArgs,
        /// Fixed rho1 of the slice.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        rho1: f64,
    },
    /// Reachable aspects and boundaries along the home lines of modes 2 to 4.
    Transitions {
        #[arg(long)]
        res: Option<usize>,
        /// Directory receiving transitions.txt and transitions.csv.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct GridArgs {
    /// Cells per axis.
    #[arg(long)]
    res: Option<usize>,
    /// lo,hi of the linear axes.
    #[arg(long, allow_hyphen_values = true)]
    range: Option<String>,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_list<const N: usize>(text: &str, what: &str) -> Result<[f64; N], CliError> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != N {
        return Err(CliError::Usage(format!(
            "{what} needs {N} comma-separated numbers, got `{text}`"
        )));
    }
    let mut out = [0.0; N];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| CliError::Usage(format!("{what}: `{p}` is not a finite number")))?;
    }
    Ok(out)
}

fn parse_mode(id: u8) -> Result<OperationMode, CliError> {
    Ok(OperationMode::from_id(id)?)
}

fn parse_wm(text: &str) -> Result<WorkingMode, CliError> {
    text.parse().map_err(|e: pipir::Error| CliError::Usage(e.to_string()))
}

struct Ctx {
    cfg: Config,
    fmt: Format,
}

impl Ctx {
    fn system(&self, mode: OperationMode) -> Result<ConstraintSystem, CliError> {
        Ok(build_system(mode, self.cfg.params, self.cfg.preset)?)
    }

    fn pose(&self, text: &str) -> Result<Pose, CliError> {
        let [x, y, z, a] = parse_list::<4>(text, "--pose")?;
        Ok(Pose::new(x, y, z, if self.fmt.degrees { a.to_radians() } else { a }))
    }
}

fn write_out(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(p, text)?;
        }
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn cmd_ik(ctx: &Ctx, mode: u8, pose: &str, wm: &str, out: &mut dyn Write) -> Result<(), CliError> {
    let sys = ctx.system(parse_mode(mode)?)?;
    let pose = ctx.pose(pose)?;
    let f = &ctx.fmt;
    if wm == "all" {
        let sols = enumerate_ik(&sys, &pose)?;
        if sols.is_empty() {
            // surface which legs are out of reach
            inverse_kinematics(&sys, &pose, WorkingMode::PPP)?;
        }
        writeln!(out, "rho1,rho2,rho3,wm")?;
        for (w, s) in sols {
            let r = s.joints.rho;
            writeln!(out, "{},{},{},{w}", f.num(r[0]), f.num(r[1]), f.num(r[2]))?;
        }
    } else {
        let s = inverse_kinematics(&sys, &pose, parse_wm(wm)?)?;
        let r = s.joints.rho;
        writeln!(out, "rho1,rho2,rho3")?;
        writeln!(out, "{},{},{}", f.num(r[0]), f.num(r[1]), f.num(r[2]))?;
        for (i, b) in s.boundary.iter().enumerate() {
            if *b {
                writeln!(out, "# leg {} at its reach limit", i + 1)?;
            }
        }
    }
    Ok(())
}

fn cmd_fk(ctx: &Ctx, mode: u8, joints: &str, out: &mut dyn Write) -> Result<(), CliError> {
    let sys = ctx.system(parse_mode(mode)?)?;
    let [r1, r2, r3] = parse_list::<3>(joints, "--joints")?;
    let set = forward_kinematics(&sys, &JointInput::new(r1, r2, r3))?;
    let f = &ctx.fmt;
    writeln!(out, "x,y,z,alpha,wm,residual")?;
    for s in &set.solutions {
        let p = s.pose;
        let wm = s.working_mode.map(|w| w.to_string()).unwrap_or_else(|| "?".into());
        writeln!(
            out,
            "{},{},{},{},{wm},{:.3e}",
            f.num(p.x),
            f.num(p.y),
            f.num(p.z),
            f.angle(p.alpha),
            s.max_residual
        )?;
    }
    if set.indeterminate {
        writeln!(out, "# orientation indeterminate for some position")?;
    }
    if set.is_empty() {
        return Err(CliError::Empty("no real forward-kinematics solution".into()));
    }
    Ok(())
}

fn cmd_singular(ctx: &Ctx, mode: u8, pose: &str, wm: &str, out: &mut dyn Write) -> Result<(), CliError> {
    let sys = ctx.system(parse_mode(mode)?)?;
    let pose = ctx.pose(pose)?;
    let ik = inverse_kinematics(&sys, &pose, parse_wm(wm)?)?;
    let v = classify(&sys, &pose, &ik.joints, &ctx.cfg.tol)?;
    let f = &ctx.fmt;
    let kind = match v.kind {
        SingularityKind::Regular => "regular",
        SingularityKind::Serial => "serial",
        SingularityKind::Parallel => "parallel",
        SingularityKind::SerialParallel => "serial+parallel",
    };
    let r = ik.joints.rho;
    writeln!(out, "joints: {},{},{}", f.num(r[0]), f.num(r[1]), f.num(r[2]))?;
    writeln!(out, "kind: {kind}")?;
    writeln!(out, "det_a: {}", f.num(v.det_a))?;
    let b: Vec<String> = v.b_diag.iter().map(|b| f.num(*b)).collect();
    writeln!(out, "b_diag: {}", b.join(","))?;
    let factors: Vec<String> = parallel_factor_values(&sys, &pose, &ik.joints)
        .iter()
        .map(|x| f.num(*x))
        .collect();
    writeln!(out, "parallel_factors: {}", factors.join(","))?;
    for s in &v.serial_legs {
        writeln!(out, "serial leg {}: {}", s.leg + 1, s.condition)?;
    }
    Ok(())
}

fn grid_with(ctx: &Ctx, mut spec: GridSpec, grid: &GridArgs) -> Result<GridSpec, CliError> {
    if let Some([lo, hi]) = grid
        .range
        .as_deref()
        .map(|r| parse_list::<2>(r, "--range"))
        .transpose()?
    {
        spec = spec.with_linear_range(lo, hi);
    }
    spec.tol = ctx.cfg.tol;
    Ok(spec)
}

fn cmd_wsmap(ctx: &Ctx, mode: u8, wm: &str, grid: &GridArgs, y: f64, out: &mut dyn Write) -> Result<(), CliError> {
    let mode = parse_mode(mode)?;
    let sys = ctx.system(mode)?;
    let wm = parse_wm(wm)?;
    let res = grid.res.unwrap_or(ctx.cfg.resolution);
    let mut spec = grid_with(ctx, GridSpec::workspace(mode, wm, res), grid)?;
    spec.kind = MapKind::Workspace { wm, y };
    let mut map = workspace_map(&sys, &spec)?;
    let aspects = label_aspects(&mut map);
    let mut text = map_csv(&map, &ctx.cfg.params, ctx.cfg.preset.name(), &ctx.fmt);
    text.insert_str(0, &format!("# aspects={}\n", aspects.count()));
    write_out(grid.out.as_deref(), &text, out)?;
    if map.feasible_count() == 0 {
        return Err(CliError::Empty("no feasible cell in the section".into()));
    }
    Ok(())
}

fn cmd_jsmap(ctx: &Ctx, mode: u8, grid: &GridArgs, rho1: f64, out: &mut dyn Write) -> Result<(), CliError> {
    let mode = parse_mode(mode)?;
    let sys = ctx.system(mode)?;
    let res = grid.res.unwrap_or(ctx.cfg.resolution);
    let mut spec = grid_with(ctx, GridSpec::jointspace(mode, res), grid)?;
    spec.kind = MapKind::JointSpace { rho1 };
    let map = jointspace_map(&sys, &spec)?;
    let text = map_csv(&map, &ctx.cfg.params, ctx.cfg.preset.name(), &ctx.fmt);
    write_out(grid.out.as_deref(), &text, out)?;
    if map.feasible_count() == 0 {
        return Err(CliError::Empty("no cell with a forward-kinematics solution".into()));
    }
    Ok(())
}

fn cmd_transitions(ctx: &Ctx, res: Option<usize>, out_dir: Option<&Path>, out: &mut dyn Write) -> Result<(), CliError> {
    let res = res.unwrap_or(ctx.cfg.resolution);
    let rep = transition_report(ctx.cfg.params, ctx.cfg.preset, res)?;
    let text = transitions_text(&rep, &ctx.cfg.params, &ctx.fmt);
    out.write_all(text.as_bytes())?;
    if let Some(dir) = out_dir.or(ctx.cfg.output_dir.as_deref()) {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("transitions.txt"), &text)?;
        std::fs::write(
            dir.join("transitions.csv"),
            transitions_csv(&rep, &ctx.cfg.params, &ctx.fmt),
        )?;
    }
    Ok(())
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let mut cfg = Config::resolve(cli.config.as_deref())?;
    if let Some(p) = cli.preset {
        cfg.preset = p;
    }
    if cli.digits == 0 {
        return Err(CliError::Usage("--digits must be at least 1".into()));
    }
    let ctx = Ctx {
        cfg,
        fmt: Format {
            digits: cli.digits,
            degrees: cli.degrees,
        },
    };
    let run = |out: &mut dyn Write| match &cli.command {
        Command::Ik { mode, pose, wm } => cmd_ik(&ctx, *mode, pose, wm, out),
        Command::Fk { mode, joints } => cmd_fk(&ctx, *mode, joints, out),
        Command::Singular { mode, pose, wm } => cmd_singular(&ctx, *mode, pose, wm, out),
        Command::Wsmap { mode, wm, grid, y } => cmd_wsmap(&ctx, *mode, wm, grid, *y, out),
        Command::Jsmap { mode, grid, rho1 } => cmd_jsmap(&ctx, *mode, grid, *rho1, out),
        Command::Transitions { res, out_dir } => cmd_transitions(&ctx, *res, out_dir.as_deref(), out),
    };
    match cli.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Usage(format!("cannot start {n} worker threads: {e}")))?;
            let mut buf = Vec::new();
            let result = pool.install(|| run(&mut buf));
            out.write_all(&buf)?;
            result
        }
        None => run(out),
    }
}

/// Run with explicit argument list and output streams; returns the exit code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return EXIT_OK;
            }
            let msg = e.to_string();
            let line = msg.lines().next().unwrap_or("invalid arguments");
            let _ = writeln!(err, "pipir: {}", line.trim_start_matches("error: "));
            return EXIT_USAGE;
        }
    };
    match dispatch(cli, out) {
        Ok(()) => EXIT_OK,
        // reader went away (e.g. `| head`)
        Err(CliError::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "pipir: {e}");
            e.code()
        }
    }
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let mut out = stdout.lock();
    let code = run_with(args, &mut out, &mut stderr.lock());
    let _ = out.flush();
    code
}
