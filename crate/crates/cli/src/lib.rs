//! Command-line front end for `flatrep`.
//!
//! Exit codes: 0 success, 1 other failure (I/O and the like), 2 usage
//! error, 3 input parse error, 4 solver non-convergence, 5 obstruction or
//! failed verification.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;

use flatrep::charforms::poincare_connection;
use flatrep::detect::{
    betti_inequality_check, bm_obstruction, detection_matrix, numeric_detection_matrix, parse_descriptor,
    DetectError, DetectionReport, Verdict,
};
use flatrep::families::{parse_family_expr, ExprError, FamilyContext, FamilyError, FAMILY_TOL};
use flatrep::presentation::{parse_presentation, PresentationError};
use flatrep::repvar::{relator_defect, solve_representation, RepError};
use flatrep::{CMat, Family, RepPoint, SolveConfig};

pub const EXIT_OTHER: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PARSE: i32 = 3;
pub const EXIT_NOT_CONVERGED: i32 = 4;
pub const EXIT_FAILED: i32 = 5;

const DEFAULT_GRID: usize = 64;

#[derive(Debug, Parser)]
#[command(name = "flatrep", version, about = "Unitary representation families and flat detectability")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: GlobalOpts,
}

#[derive(Debug, Args)]
struct GlobalOpts {
    /// Tolerance for solver defects and homomorphism checks.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Sampling resolution for numeric pairings and curvature grids.
    #[arg(long, global = true)]
    grid: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long = "max-iter", global = true)]
    max_iter: Option<usize>,
    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse a presentation file and print it in normal form.
    Parse { file: PathBuf },
    /// Representation varieties.
    #[command(subcommand)]
    Rep(RepCommand),
    /// Families of representations.
    #[command(subcommand)]
    Family(FamilyCommand),
    /// Characteristic forms.
    #[command(subcommand)]
    Forms(FormsCommand),
    /// Detection matrices.
    #[command(subcommand)]
    Detect(DetectCommand),
    /// Obstructions, Betti bounds and report rendering.
    #[command(subcommand)]
    Report(ReportCommand),
}

#[derive(Debug, Subcommand)]
enum RepCommand {
    /// Search Hom(G, U(n)) for a point with small relator defect.
    Solve {
        file: PathBuf,
        #[arg(long)]
        dim: usize,
    },
}

#[derive(Debug, Args)]
struct FamilySource {
    /// Family expression.
    #[arg(long = "family", value_name = "EXPR")]
    exprs: Vec<String>,
    /// Files holding a family expression each.
    #[arg(long = "families", value_name = "FILE", num_args = 1..)]
    files: Vec<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum FamilyCommand {
    /// Build a family and print its summary.
    Build {
        #[command(flatten)]
        source: FamilySource,
        /// Also sample the family and check the relators at every point.
        #[arg(long)]
        verify: bool,
    },
}

#[derive(Debug, Subcommand)]
enum FormsCommand {
    /// Exact Chern character of every component of a family.
    Chern {
        #[command(flatten)]
        source: FamilySource,
    },
    /// Lattice curvature and Chern number of the Poincaré line bundle.
    Poincare,
}

#[derive(Debug, Subcommand)]
enum DetectCommand {
    /// Detection matrix of families against the rational homology of a group.
    Run {
        /// Group descriptor, e.g. `zn(2)` or `product(free(2), surface(1))`.
        #[arg(long)]
        group: String,
        #[command(flatten)]
        source: FamilySource,
        /// Use the numeric pairing even when exact Chern data is available.
        #[arg(long)]
        numeric: bool,
        /// Apply the free-group Euler characteristic obstruction `F:INDEX`.
        #[arg(long, value_name = "F:INDEX")]
        bm: Option<String>,
    },
}

#[derive(Debug, Subcommand)]
enum ReportCommand {
    /// Euler characteristic bound for an index-`index` subgroup of F_f.
    Obstruction {
        #[arg(long)]
        f: u64,
        #[arg(long)]
        index: u64,
    },
    /// Betti sums of Hom(F_m, U(n)) against the wedge of m circles.
    Betti {
        #[arg(long)]
        m: u32,
        #[arg(long)]
        n: u32,
    },
    /// Render a detection report as a text table.
    Render { file: PathBuf },
}

/// Validated settings shared by all subcommands.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub tolerance: Option<f64>,
    pub grid: usize,
    pub seed: u64,
    pub max_iter: Option<usize>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    fn from_opts(o: &GlobalOpts) -> Result<Self, Failure> {
        if let Some(t) = o.tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Failure::Usage(format!("--tol must be positive, got {t}")));
            }
        }
        let grid = o.grid.unwrap_or(DEFAULT_GRID);
        if grid < 2 {
            return Err(Failure::Usage(format!("--grid must be at least 2, got {grid}")));
        }
        Ok(RunConfig { tolerance: o.tol, grid, seed: o.seed.unwrap_or(0), max_iter: o.max_iter, out: o.out.clone() })
    }

    fn solver(&self) -> SolveConfig {
        let mut cfg = SolveConfig { seed: self.seed, ..SolveConfig::default() };
        if let Some(t) = self.tolerance {
            cfg.tolerance = t;
        }
        if let Some(m) = self.max_iter {
            cfg.max_iter = m;
        }
        cfg
    }
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Parse(String),
    NotConverged(String),
    Failed(String),
    Other(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Parse(_) => EXIT_PARSE,
            Failure::NotConverged(_) => EXIT_NOT_CONVERGED,
            Failure::Failed(_) => EXIT_FAILED,
            Failure::Other(_) => EXIT_OTHER,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Parse(m) | Failure::NotConverged(m) | Failure::Failed(m) | Failure::Other(m) => m,
        }
    }
}

impl From<PresentationError> for Failure {
    fn from(e: PresentationError) -> Self {
        Failure::Parse(e.to_string())
    }
}

impl From<RepError> for Failure {
    fn from(e: RepError) -> Self {
        match e {
            RepError::NotConverged { .. } => Failure::NotConverged(e.to_string()),
            RepError::Presentation(p) => p.into(),
            RepError::InvalidConfig(_) => Failure::Usage(e.to_string()),
            other => Failure::Other(other.to_string()),
        }
    }
}

impl From<FamilyError> for Failure {
    fn from(e: FamilyError) -> Self {
        match e {
            FamilyError::NotHomomorphic { .. } => Failure::Failed(e.to_string()),
            FamilyError::Rep(r) => r.into(),
            other => Failure::Other(other.to_string()),
        }
    }
}

impl From<ExprError> for Failure {
    fn from(e: ExprError) -> Self {
        match e {
            ExprError::Io { .. } => Failure::Other(e.to_string()),
            _ => Failure::Parse(e.to_string()),
        }
    }
}

impl From<DetectError> for Failure {
    fn from(e: DetectError) -> Self {
        match e {
            DetectError::Syntax(_) | DetectError::Descriptor(_) | DetectError::MissingTable(_) => {
                Failure::Parse(e.to_string())
            }
            DetectError::Presentation(p) => p.into(),
            DetectError::Family(f) => f.into(),
            DetectError::Winding(_) => Failure::Failed(e.to_string()),
            other => Failure::Other(other.to_string()),
        }
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code. Results go to `--out` or `stdout`; diagnostics go
/// to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = if code == 0 { write!(stdout, "{e}") } else { write!(stderr, "{e}") };
            return code;
        }
    };
    match execute(cli, stdout) {
        Ok(()) => 0,
        Err((f, partial)) => {
            let _ = writeln!(stderr, "error: {}", f.message());
            if let Some(p) = partial {
                let _ = writeln!(stderr, "{p}");
            }
            f.code()
        }
    }
}

type Outcome = Result<(), (Failure, Option<String>)>;

fn fail(f: Failure) -> (Failure, Option<String>) {
    (f, None)
}

fn execute(cli: Cli, stdout: &mut dyn Write) -> Outcome {
    let cfg = RunConfig::from_opts(&cli.opts).map_err(fail)?;
    match cli.command {
        Command::Parse { file } => {
            let text = read(&file).map_err(fail)?;
            let g = parse_presentation(&text).map_err(|e| fail(e.into()))?;
            emit(&cfg, stdout, &format!("{g}\n")).map_err(fail)
        }
        Command::Rep(RepCommand::Solve { file, dim }) => rep_solve(&cfg, &file, dim, stdout),
        Command::Family(FamilyCommand::Build { source, verify }) => family_build(&cfg, &source, verify, stdout),
        Command::Forms(FormsCommand::Chern { source }) => forms_chern(&cfg, &source, stdout),
        Command::Forms(FormsCommand::Poincare) => forms_poincare(&cfg, stdout),
        Command::Detect(DetectCommand::Run { group, source, numeric, bm }) => {
            detect_run(&cfg, &group, &source, numeric, bm.as_deref(), stdout)
        }
        Command::Report(ReportCommand::Obstruction { f, index }) => {
            let o = bm_obstruction(f, index).map_err(|e| fail(Failure::Usage(e.to_string())))?;
            emit(&cfg, stdout, &to_json(&o)).map_err(fail)
        }
        Command::Report(ReportCommand::Betti { m, n }) => {
            let c = betti_inequality_check(m, n).map_err(|e| fail(Failure::Usage(e.to_string())))?;
            emit(&cfg, stdout, &to_json(&c)).map_err(fail)?;
            if c.holds {
                Ok(())
            } else {
                Err(fail(Failure::Failed(format!("Betti inequality fails: {} < {}", c.lhs, c.rhs))))
            }
        }
        Command::Report(ReportCommand::Render { file }) => {
            let text = read(&file).map_err(fail)?;
            let r: DetectionReport = serde_json::from_str(&text)
                .map_err(|e| fail(Failure::Parse(format!("{}: {e}", file.display()))))?;
            emit(&cfg, stdout, &render(&r)).map_err(fail)
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Other(format!("cannot read {}: {e}", path.display())))
}

fn emit(cfg: &RunConfig, stdout: &mut dyn Write, text: &str) -> Result<(), Failure> {
    match &cfg.out {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Other(format!("cannot write {}: {e}", p.display()))),
        None => stdout.write_all(text.as_bytes()).map_err(|e| Failure::Other(e.to_string())),
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serialisable");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct SolveOutput {
    group: String,
    dim: usize,
    seed: u64,
    tolerance: f64,
    converged: bool,
    defect: f64,
    iterations: usize,
    max_unitarity_deviation: f64,
    /// Row-major `[re, im]` entries, one matrix per generator.
    matrices: Vec<Vec<Vec<[f64; 2]>>>,
}

fn rep_solve(cfg: &RunConfig, file: &Path, dim: usize, stdout: &mut dyn Write) -> Outcome {
    let text = read(file).map_err(fail)?;
    let g = parse_presentation(&text).map_err(|e| fail(e.into()))?;
    let solver = cfg.solver();
    let out = solve_representation(&g, dim, &solver).map_err(|e| fail(e.into()))?;
    let matrices = out
        .point
        .matrices()
        .iter()
        .map(|m| (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect())
        .collect();
    let report = SolveOutput {
        group: g.to_string(),
        dim,
        seed: solver.seed,
        tolerance: solver.tolerance,
        converged: out.converged,
        defect: out.defect,
        iterations: out.iterations,
        max_unitarity_deviation: out.max_unitarity_deviation,
        matrices,
    };
    emit(cfg, stdout, &to_json(&report)).map_err(fail)?;
    if out.converged {
        Ok(())
    } else {
        Err(fail(Failure::NotConverged(format!(
            "no convergence after {} iterations (best defect {:.3e} > {:.1e})",
            out.iterations, out.defect, solver.tolerance
        ))))
    }
}

fn load_families(cfg: &RunConfig, source: &FamilySource) -> Result<Vec<Family>, Failure> {
    if source.exprs.is_empty() && source.files.is_empty() {
        return Err(Failure::Usage("give at least one --family EXPR or --families FILE".into()));
    }
    let solver = cfg.solver();
    let mut out = Vec::new();
    for e in &source.exprs {
        let ctx = FamilyContext { base_dir: PathBuf::from("."), solver: solver.clone() };
        out.push(parse_family_expr(e, &ctx)?);
    }
    for f in &source.files {
        let text = read(f)?;
        let base_dir = f.parent().map(Path::to_path_buf).unwrap_or_default();
        let ctx = FamilyContext { base_dir, solver: solver.clone() };
        out.push(
            parse_family_expr(text.trim(), &ctx)
                .map_err(|e| Failure::from(e).prefixed(&f.display().to_string()))?,
        );
    }
    Ok(out)
}

impl Failure {
    fn prefixed(self, p: &str) -> Self {
        let add = |m: String| format!("{p}: {m}");
        match self {
            Failure::Usage(m) => Failure::Usage(add(m)),
            Failure::Parse(m) => Failure::Parse(add(m)),
            Failure::NotConverged(m) => Failure::NotConverged(add(m)),
            Failure::Failed(m) => Failure::Failed(add(m)),
            Failure::Other(m) => Failure::Other(add(m)),
        }
    }
}

#[derive(Serialize)]
struct VerifyOutput {
    points: usize,
    max_defect: f64,
    max_unitarity_deviation: f64,
    tolerance: f64,
}

#[derive(Serialize)]
struct BuildOutput {
    family: flatrep::families::FamilySummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    verification: Option<VerifyOutput>,
}

fn family_build(cfg: &RunConfig, source: &FamilySource, verify: bool, stdout: &mut dyn Write) -> Outcome {
    let fams = load_families(cfg, source).map_err(fail)?;
    let tol = cfg.tolerance.unwrap_or(FAMILY_TOL);
    let mut outputs = Vec::with_capacity(fams.len());
    let mut failure = None;
    for f in &fams {
        let verification = if verify {
            match f.verify(tol, None) {
                Ok(r) => Some(VerifyOutput {
                    points: r.points,
                    max_defect: r.max_defect,
                    max_unitarity_deviation: r.max_unitarity_deviation,
                    tolerance: tol,
                }),
                Err(e) => {
                    failure.get_or_insert(Failure::from(e).prefixed(&f.structure()));
                    None
                }
            }
        } else {
            None
        };
        outputs.push(BuildOutput { family: f.summary(), verification });
    }
    emit(cfg, stdout, &to_json(&outputs)).map_err(fail)?;
    failure.map_or(Ok(()), |f| Err(fail(f)))
}

#[derive(Serialize)]
struct ChernOutput {
    structure: String,
    components: Vec<ComponentChern>,
}

#[derive(Serialize)]
struct ComponentChern {
    component: usize,
    rank: usize,
    text: String,
    form: flatrep::charforms::FormRecord,
}

fn forms_chern(cfg: &RunConfig, source: &FamilySource, stdout: &mut dyn Write) -> Outcome {
    let fams = load_families(cfg, source).map_err(fail)?;
    let mut outputs = Vec::new();
    for f in &fams {
        let ch = f.chern().ok_or_else(|| {
            fail(Failure::Failed(format!(
                "{} has no exact Chern data; use `detect run` for its numeric pairing",
                f.structure()
            )))
        })?;
        let components = ch
            .iter()
            .zip(f.ranks())
            .enumerate()
            .map(|(i, (c, &rank))| ComponentChern { component: i + 1, rank, text: c.to_string(), form: c.to_record() })
            .collect();
        outputs.push(ChernOutput { structure: f.structure(), components });
    }
    emit(cfg, stdout, &to_json(&outputs)).map_err(fail)
}

#[derive(Serialize)]
struct PoincareOutput {
    resolution: usize,
    expected_curvature: String,
    max_deviation: f64,
    chern_number: i64,
    raw: f64,
    residual: f64,
}

fn forms_poincare(cfg: &RunConfig, stdout: &mut dyn Write) -> Outcome {
    let c = poincare_connection(cfg.grid).map_err(|e| fail(Failure::Usage(e.to_string())))?;
    let curv = c.numerical_curvature();
    let target = CMat::from_element(1, 1, Complex64::new(0.0, 2.0 * std::f64::consts::PI));
    let dev = curv.plane(0, 1).map_or(0.0, |p| p.values.iter().map(|m| (m - &target).norm()).fold(0.0, f64::max));
    let ch = c.chern_number(0, 1).map_err(|e| fail(Failure::Failed(e.to_string())))?;
    let out = PoincareOutput {
        resolution: cfg.grid,
        expected_curvature: "2 pi i".into(),
        max_deviation: dev,
        chern_number: ch.value,
        raw: ch.raw,
        residual: ch.residual,
    };
    emit(cfg, stdout, &to_json(&out)).map_err(fail)
}

fn parse_bm(s: &str) -> Result<(u64, u64), Failure> {
    let (f, i) = s.split_once(':').ok_or_else(|| Failure::Usage(format!("--bm expects F:INDEX, got `{s}`")))?;
    let p = |x: &str| x.trim().parse::<u64>().map_err(|_| Failure::Usage(format!("--bm expects F:INDEX, got `{s}`")));
    Ok((p(f)?, p(i)?))
}

fn detect_run(
    cfg: &RunConfig,
    group: &str,
    source: &FamilySource,
    numeric: bool,
    bm: Option<&str>,
    stdout: &mut dyn Write,
) -> Outcome {
    let d = parse_descriptor(group).map_err(|e| fail(e.into()))?;
    let bm = bm.map(parse_bm).transpose().map_err(fail)?;
    let fams = load_families(cfg, source).map_err(fail)?;
    let exact = !numeric && fams.iter().all(|f| f.chern().is_some());
    let mut report = if exact {
        detection_matrix(&d, &fams)
    } else {
        numeric_detection_matrix(&d, &fams, cfg.grid)
    }
    .map_err(|e| fail(e.into()))?;
    if let Some((f, index)) = bm {
        let o = bm_obstruction(f, index).map_err(|e| fail(Failure::Usage(e.to_string())))?;
        report.apply_obstruction(&o);
    }
    emit(cfg, stdout, &to_json(&report)).map_err(fail)?;
    match &report.verdict {
        Verdict::FdCertified => Ok(()),
        Verdict::Undetected { classes } => {
            Err(fail(Failure::Failed(format!("not certified: undetected classes {}", classes.join(", ")))))
        }
        Verdict::Incomplete { undetermined, .. } => Err(fail(Failure::Failed(format!(
            "not certified: numeric pairing cannot decide {}",
            undetermined.join(", ")
        )))),
        Verdict::Obstructed { reason } => Err(fail(Failure::Failed(format!("obstructed: {reason}")))),
    }
}

/// Plain-text table of a detection report.
pub fn render(r: &DetectionReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "group: {}", r.group);
    for (i, f) in r.families.iter().enumerate() {
        let _ = writeln!(s, "family F{}: {f}", i + 1);
    }
    let method = match r.method {
        flatrep::detect::Method::Exact => "exact".to_string(),
        flatrep::detect::Method::Numeric { resolution } => format!("numeric (resolution {resolution})"),
    };
    let _ = writeln!(s, "method: {method}");
    let label_w = r.rows.iter().map(|row| row.label.chars().count()).max().unwrap_or(0).max(5);
    let cell = |v: &Option<String>| v.clone().unwrap_or_else(|| "?".into());
    let widths: Vec<usize> = r
        .columns
        .iter()
        .enumerate()
        .map(|(c, name)| {
            r.rows.iter().map(|row| cell(&row.entries[c]).chars().count()).max().unwrap_or(0).max(name.chars().count())
        })
        .collect();
    let _ = write!(s, "{:label_w$}  deg", "class");
    for (name, w) in r.columns.iter().zip(&widths) {
        let _ = write!(s, "  {name:>w$}");
    }
    let _ = writeln!(s, "  detected");
    for row in &r.rows {
        let _ = write!(s, "{:label_w$}  {:>3}", row.label, row.degree);
        for (v, w) in row.entries.iter().zip(&widths) {
            let _ = write!(s, "  {:>w$}", cell(v));
        }
        let _ = writeln!(s, "  {}", if row.detected { "yes" } else { "no" });
    }
    let verdict = match &r.verdict {
        Verdict::FdCertified => "FD-certified".to_string(),
        Verdict::Undetected { classes } => format!("undetected: {}", classes.join(", ")),
        Verdict::Incomplete { undetermined, undetected } => {
            format!("incomplete: undetermined {}; undetected {}", undetermined.join(", "), undetected.join(", "))
        }
        Verdict::Obstructed { reason } => format!("obstructed: {reason}"),
    };
    let _ = writeln!(s, "verdict: {verdict}");
    let _ = writeln!(s, "scope: {}", r.scope);
    s
}

/// Relator defect of a solved point, recomputed from the JSON written by
/// `rep solve`.
pub fn solved_defect(presentation: &str, solve_json: &str) -> Result<f64, String> {
    let g = parse_presentation(presentation).map_err(|e| e.to_string())?;
    let v: serde_json::Value = serde_json::from_str(solve_json).map_err(|e| e.to_string())?;
    let dim = v["dim"].as_u64().ok_or("missing dim")? as usize;
    let mats = v["matrices"].as_array().ok_or("missing matrices")?;
    let mut out = Vec::new();
    for m in mats {
        let rows = m.as_array().ok_or("bad matrix")?;
        let mut cm = CMat::zeros(dim, dim);
        for (i, row) in rows.iter().enumerate() {
            for (j, e) in row.as_array().ok_or("bad row")?.iter().enumerate() {
                let re = e[0].as_f64().ok_or("bad entry")?;
                let im = e[1].as_f64().ok_or("bad entry")?;
                cm[(i, j)] = Complex64::new(re, im);
            }
        }
        out.push(cm);
    }
    let p = RepPoint::new(out).map_err(|e| e.to_string())?;
    relator_defect(&p, &g).map_err(|e| e.to_string())
}
