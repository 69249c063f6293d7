//! Command-line front end: validate blow-up and write the certificate,
//! dump a trajectory trace as CSV, or list the built-in problems.
//!
//! Exit codes: 0 validation succeeded, 1 usage or configuration error,
//! 2 validation failed at some stage. Set BLOWUP_LOG to any value for
//! progress lines on stderr.

use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::OnceLock;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use blowcert::blowup::{
    chart_start_to_raw, validate_blowup, BlowUpOptions, RunStatus,
};
use blowcert::certificate::{certificate_string, parse_chart_label};
use blowcert::compact::{dir_inverse, para_inverse, ChartKind, CompactChart};
use blowcert::field::{desing_dir, desing_para, DesingularizedField, VectorFieldModel};
use blowcert::integrate::{integrate_for, StepRecord, WithTime};
use blowcert::problems::{builtin_problems, make_fvks, ProblemModel, ProblemSpec};
use blowcert::IntervalVector;

#[derive(Parser)]
#[command(
    name = "blowcert",
    about = "Rigorous enclosures of ODE blow-up times",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a validation and write the JSON certificate.
    Validate(RunArgs),
    /// Integrate and dump per-step enclosures as CSV.
    Trace(RunArgs),
    /// List problem ids and their parameter schemas.
    List,
}

#[derive(Args, Default)]
struct RunArgs {
    /// TOML file with the same keys as the flags; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Problem id: kk-simple, kk, fvks (with --d/--N), or fvks(d,N).
    #[arg(long)]
    problem: Option<String>,
    /// Space dimension parameter for fvks.
    #[arg(long)]
    d: Option<u32>,
    /// Cell count parameter for fvks.
    #[arg(long = "N")]
    n: Option<usize>,
    /// Chart: para, or dir:<coordinate>:<+|-> (1-based coordinate).
    #[arg(long)]
    chart: Option<String>,
    /// Initial state in chart coordinates, comma-separated.
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<String>,
    /// Initial state in raw coordinates, comma-separated.
    #[arg(long, allow_hyphen_values = true)]
    y0: Option<String>,
    /// Integrator tolerance per accepted step.
    #[arg(long)]
    tol: Option<f64>,
    /// Chart-time budget.
    #[arg(long)]
    tau_max: Option<f64>,
    /// Cap on the certified sublevel threshold.
    #[arg(long)]
    eps_override: Option<f64>,
    /// Output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// The TOML mirror of the flags.
#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    problem: Option<String>,
    d: Option<u32>,
    #[serde(rename = "N", alias = "n")]
    n: Option<usize>,
    chart: Option<String>,
    x0: Option<Vec<f64>>,
    y0: Option<Vec<f64>>,
    tol: Option<f64>,
    tau_max: Option<f64>,
    eps_override: Option<f64>,
    out: Option<PathBuf>,
}

/// A fully resolved run: problem, chart, raw-space start, and options.
struct RunConfig {
    problem: ProblemSpec,
    chart: ChartKind,
    y0: IntervalVector,
    options: BlowUpOptions,
    out: Option<PathBuf>,
}

fn log_enabled() -> bool {
    static ON: OnceLock<bool> = OnceLock::new();
    *ON.get_or_init(|| std::env::var_os("BLOWUP_LOG").is_some_and(|v| !v.is_empty()))
}

macro_rules! progress {
    ($($arg:tt)*) => {
        if log_enabled() {
            eprintln!($($arg)*);
        }
    };
}

fn parse_number_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .with_context(|| format!("bad number {part:?}"))
        })
        .collect()
}

fn resolve_problem(id: &str, d: Option<u32>, n: Option<usize>) -> Result<ProblemSpec> {
    let build = |d: u32, n: usize| {
        builtin_problems()
            .into_iter()
            .find(|p| p.id == format!("fvks({d},{n})"))
            .map_or_else(|| make_fvks(d, n).map_err(|e| anyhow!("{e}")), Ok)
    };
    match id {
        "kk-simple" | "kk" => {
            if d.is_some() || n.is_some() {
                bail!("--d/--N only apply to fvks");
            }
            Ok(builtin_problems()
                .into_iter()
                .find(|p| p.id == id)
                .expect("builtin id"))
        }
        "fvks" => {
            let (Some(d), Some(n)) = (d, n) else {
                bail!("fvks needs --d and --N");
            };
            build(d, n)
        }
        other => {
            let params = other
                .strip_prefix("fvks(")
                .and_then(|rest| rest.strip_suffix(')'))
                .ok_or_else(|| anyhow!("unknown problem {other:?}; see `blowcert list`"))?;
            if d.is_some() || n.is_some() {
                bail!("give parameters either in the id or as --d/--N, not both");
            }
            let (ds, ns) = params
                .split_once(',')
                .ok_or_else(|| anyhow!("expected fvks(d,N)"))?;
            build(ds.trim().parse()?, ns.trim().parse()?)
        }
    }
}

fn resolve(args: &RunArgs) -> Result<RunConfig> {
    let file: FileConfig = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => FileConfig::default(),
    };

    let id = args
        .problem
        .clone()
        .or(file.problem)
        .ok_or_else(|| anyhow!("--problem is required"))?;
    let problem = resolve_problem(&id, args.d.or(file.d), args.n.or(file.n))?;
    let dim = problem.model.dim();

    let chart_text = args.chart.clone().or(file.chart);
    let chart = match chart_text.as_deref() {
        None => ChartKind::QuasiParabolic,
        Some(s) => parse_chart_label(s).ok_or_else(|| anyhow!("bad chart {s:?}"))?,
    };
    if let ChartKind::Directional { index, sign } = chart {
        if index >= dim {
            bail!("chart coordinate {} exceeds dimension {dim}", index + 1);
        }
        if !problem.model.supports_dir_chart(index, sign) {
            bail!("problem {} has no sign condition on that chart", problem.id);
        }
    }

    let x0 = match &args.x0 {
        Some(s) => Some(parse_number_list(s)?),
        None => file.x0,
    };
    let y0 = match &args.y0 {
        Some(s) => Some(parse_number_list(s)?),
        None => file.y0,
    };
    let y0 = match (x0, y0) {
        (Some(_), Some(_)) => bail!("give exactly one of --x0 (chart) and --y0 (raw)"),
        (Some(x), None) => {
            if x.len() != dim {
                bail!("--x0 needs {dim} components, got {}", x.len());
            }
            chart_start_to_raw(problem.model.qh_type(), chart, &x)
                .map_err(|e| anyhow!("chart start is outside the chart: {e}"))?
        }
        (None, Some(y)) => {
            if y.len() != dim {
                bail!("--y0 needs {dim} components, got {}", y.len());
            }
            IntervalVector::from_points(&y)
        }
        (None, None) => match &problem.model {
            ProblemModel::Fvks(m) => m.default_initial(),
            _ => bail!("problem {} has no default data; give --x0 or --y0", problem.id),
        },
    };

    let mut options = BlowUpOptions::default();
    if let Some(tol) = args.tol.or(file.tol) {
        if !(tol > 0.0) {
            bail!("tolerance must be positive");
        }
        options.tol = tol;
    }
    if let Some(tau_max) = args.tau_max.or(file.tau_max) {
        if !(tau_max >= 0.0) {
            bail!("tau_max must be nonnegative");
        }
        options.tau_max = tau_max;
    }
    if let Some(eps) = args.eps_override.or(file.eps_override) {
        if !(eps > 0.0) {
            bail!("eps override must be positive");
        }
        options.eps_override = Some(eps);
    }

    Ok(RunConfig {
        problem,
        chart,
        y0,
        options,
        out: args.out.clone().or(file.out),
    })
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, content)
            .with_context(|| format!("writing {}", path.display())),
        None => {
            std::io::stdout()
                .write_all(content.as_bytes())
                .context("writing stdout")
        }
    }
}

fn cmd_validate(config: RunConfig) -> Result<u8> {
    progress!(
        "validating {} in chart {}",
        config.problem.id,
        blowcert::certificate::chart_label(config.chart)
    );
    let cert = validate_blowup(&config.problem, config.chart, &config.y0, &config.options);
    progress!("finished in {:.2}s: {}", cert.wall_seconds, cert.status);
    let code = match cert.status {
        RunStatus::Succeeded => 0,
        RunStatus::Failed(stage) => {
            eprintln!("validation failed at stage: {stage}");
            2
        }
    };
    if let (RunStatus::Succeeded, Some(t_max)) = (cert.status, cert.t_max) {
        progress!("t_max in [{}, {}]", t_max.lo(), t_max.hi());
    }
    emit(&config.out, &certificate_string(&cert))?;
    Ok(code)
}

/// One CSV row per accepted step: chart time, elapsed original time, the
/// endpoint box in compactified space, and its chart preimage (infinities
/// where the step box touches the horizon and the preimage is unbounded).
fn trace_csv<M: VectorFieldModel>(
    field: &DesingularizedField<M>,
    steps: &[StepRecord],
) -> String {
    let n = field.dim();
    let chart = field.chart();
    let mut out = String::from("tau,t_lo,t_hi");
    for i in 1..=n {
        out.push_str(&format!(",x{i}_lo,x{i}_hi"));
    }
    for i in 1..=n {
        out.push_str(&format!(",y{i}_lo,y{i}_hi"));
    }
    out.push('\n');
    for step in steps {
        let state = &step.tight_endpoint;
        out.push_str(&format!(
            "{},{},{}",
            step.tau.hi(),
            step.t_at_end.lo(),
            step.t_at_end.hi()
        ));
        for i in 0..n {
            out.push_str(&format!(",{},{}", state[i].lo(), state[i].hi()));
        }
        let raw = match chart.kind() {
            ChartKind::QuasiParabolic => para_inverse(state, chart.qh_type()).ok(),
            ChartKind::Directional { .. } => {
                let mut rest = IntervalVector::zeros(n - 1);
                for i in 1..n {
                    rest[i - 1] = state[i];
                }
                dir_inverse(state[0], &rest, chart).ok()
            }
        };
        match raw {
            Some(y) => {
                for i in 0..n {
                    out.push_str(&format!(",{},{}", y[i].lo(), y[i].hi()));
                }
            }
            None => {
                for _ in 0..n {
                    out.push_str(&format!(",{},{}", f64::NEG_INFINITY, f64::INFINITY));
                }
            }
        }
        out.push('\n');
    }
    out
}

fn cmd_trace(config: RunConfig) -> Result<u8> {
    let model = config.problem.model.clone();
    let t = model.qh_type().clone();
    let (field, compact_chart) = match config.chart {
        ChartKind::QuasiParabolic => (
            desing_para(model),
            CompactChart::parabolic(t),
        ),
        ChartKind::Directional { index, sign } => (
            desing_dir(model, index, sign).expect("chart support checked"),
            CompactChart::directional(t, index, sign).expect("chart support checked"),
        ),
    };
    let n = field.dim();
    let x0 = match blowcert::blowup::compactify_start(&config.y0, &compact_chart) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("initial state violates the chart sign condition: {e}");
            return Ok(2);
        }
    };
    progress!(
        "tracing {} for tau <= {}",
        config.problem.id,
        config.options.tau_max
    );
    let rhs = WithTime(&field);
    let mut z0 = IntervalVector::zeros(n + 1);
    for i in 0..n {
        z0[i] = x0[i];
    }
    match integrate_for(&rhs, &z0, config.options.tau_max, config.options.tol) {
        Ok(traj) => {
            emit(&config.out, &trace_csv(&field, &traj.steps))?;
            Ok(0)
        }
        Err(e) => {
            eprintln!("integration failed: {e}");
            Ok(2)
        }
    }
}

fn cmd_list() -> Result<u8> {
    let mut schema = String::new();
    schema.push_str("fvks(d,N)  finite-volume chemotaxis model; d >= 1 integer, N >= 2 integer\n");
    schema.push_str("kk         planar shock model with interval constants; no parameters\n");
    schema.push_str("kk-simple  planar principal-part model; no parameters\n");
    schema.push_str("\nbuilt-in reference configurations:\n");
    let mut ids: Vec<String> = builtin_problems().into_iter().map(|p| p.id).collect();
    ids.sort();
    for id in ids {
        schema.push_str("  ");
        schema.push_str(&id);
        schema.push('\n');
    }
    emit(&None, &schema)?;
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are informational, not usage errors.
            let informational = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            return if informational {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
        }
    };
    let result = match cli.cmd {
        Cmd::Validate(args) => resolve(&args).and_then(cmd_validate),
        Cmd::Trace(args) => resolve(&args).and_then(cmd_trace),
        Cmd::List => cmd_list(),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            eprintln!("run `blowcert --help` for usage");
            ExitCode::from(1)
        }
    }
}
