use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use qzzb::bounds::{crossover_kappa, BoundForm, CrossoverOptions};
use qzzb::states::{ChannelKind, PriorWindow, StateKind};
use qzzb::sweep::{
    compute_curve, curve_table, parse_grid, run_sweep, sweep_table, BoundSelection, Cell, CurveSpec,
    SweepConfig, Table, DEFAULT_BETA_SAMPLES, TOOL_VERSION,
};
use qzzb::verify::{run_verify, VerifyOptions};
use qzzb::QzzbError;

const EXIT_USAGE: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_VERIFY: u8 = 3;

#[derive(Parser)]
#[command(name = "qzzb", version, about = "Quantum Ziv-Zakai bounds for Gaussian probes under loss and phase diffusion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bounds over a (state x N x strength) grid
    Sweep(Common),
    /// Generalized fidelity F~(beta) for one configuration
    Curve(Common),
    /// Diffusion strength where two states' bounds cross
    Crossover(CrossoverArgs),
    /// Check the closed forms against the Fock-space oracle
    Verify(VerifyArgs),
}

#[derive(Args, Clone, Default)]
struct Common {
    /// TOML config; flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated states: cs, smsvs, tmsvs
    #[arg(long)]
    state: Option<String>,
    /// loss or diffusion
    #[arg(long)]
    channel: Option<String>,
    /// Channel strengths: `a,b,c` or `start:stop:count`
    #[arg(long)]
    strength: Option<String>,
    /// Mean photon numbers: `a,b,c` or `start:stop:count`
    #[arg(long)]
    n: Option<String>,
    /// Prior window width in radians
    #[arg(long)]
    window: Option<f64>,
    /// Uniform beta samples on [0, W] (at least 64)
    #[arg(long)]
    beta_samples: Option<usize>,
    /// tight, sine-relaxed or both
    #[arg(long)]
    bound_form: Option<String>,
    /// Output file (stdout if omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or json
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args)]
struct CrossoverArgs {
    #[command(flatten)]
    common: Common,
    /// kappa bracket `lo,hi`
    #[arg(long, default_value = "0.2,0.6")]
    bracket: String,
    /// Bisection tolerance on kappa
    #[arg(long, default_value_t = 1e-5)]
    tolerance: f64,
}

#[derive(Args)]
struct VerifyArgs {
    /// Report path (stdout if omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Multiplies every check tolerance
    #[arg(long, default_value_t = 1.0)]
    tolerance_scale: f64,
    /// Single-mode Fock cutoff
    #[arg(long, default_value_t = qzzb::oracle::DEFAULT_CUTOFF)]
    cutoff: usize,
    /// Per-mode cutoff for the two-mode state
    #[arg(long, default_value_t = qzzb::oracle::DEFAULT_TWO_MODE_CUTOFF)]
    two_mode_cutoff: usize,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<QzzbError> for Failure {
    fn from(e: QzzbError) -> Self {
        let code = match e {
            QzzbError::Numerical(_) | QzzbError::Range(_) | QzzbError::Truncation { .. } => EXIT_NUMERICAL,
            _ => EXIT_USAGE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: msg.into(),
    }
}

fn parse_states(s: &str) -> Result<Vec<StateKind>, Failure> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.parse::<StateKind>().map_err(Failure::from))
        .collect()
}

/// Defaults, then the config file, then flags.
fn resolve(c: &Common) -> Result<SweepConfig, Failure> {
    let mut cfg = match &c.config {
        Some(p) => SweepConfig::load(p)?,
        None => SweepConfig::default(),
    };
    if let Some(s) = &c.state {
        cfg.states = parse_states(s)?;
    }
    if let Some(s) = &c.channel {
        cfg.channel = s.parse::<ChannelKind>()?;
    }
    if let Some(s) = &c.strength {
        cfg.strength_grid = parse_grid(s)?;
    }
    if let Some(s) = &c.n {
        cfg.n_grid = parse_grid(s)?;
    }
    if let Some(w) = c.window {
        cfg.window = PriorWindow::with_width(w)?;
    }
    if let Some(k) = c.beta_samples {
        cfg.beta_samples = k;
    }
    if let Some(s) = &c.bound_form {
        cfg.bound_form = s.parse()?;
    }
    if let Some(p) = &c.out {
        cfg.output_path = Some(p.clone());
    }
    if let Some(s) = &c.format {
        cfg.format = s.parse()?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit(text: &str, path: Option<&Path>) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| QzzbError::Io { path: p.into(), source: e }.into()),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| usage(format!("stdout: {e}")))
        }
    }
}

fn cmd_sweep(c: &Common) -> Result<(), Failure> {
    let cfg = resolve(c)?;
    let rows = run_sweep(&cfg)?;
    let text = sweep_table(&cfg, &rows).render(cfg.format)?;
    emit(&text, cfg.output_path.as_deref())?;
    let failed: Vec<_> = rows.iter().filter(|r| !r.is_ok()).collect();
    if !failed.is_empty() {
        for r in &failed {
            eprintln!(
                "row {} N={} {}={}: {}",
                r.state,
                r.n,
                r.channel,
                r.strength,
                r.error.as_deref().unwrap_or("")
            );
        }
        return Err(Failure {
            code: EXIT_NUMERICAL,
            message: format!("{} of {} rows failed", failed.len(), rows.len()),
        });
    }
    Ok(())
}

fn single<T: Copy>(name: &str, xs: &[T]) -> Result<T, Failure> {
    match xs {
        [x] => Ok(*x),
        _ => Err(usage(format!("curve takes exactly one {name}, got {}", xs.len()))),
    }
}

fn cmd_curve(c: &Common) -> Result<(), Failure> {
    let mut c = c.clone();
    if c.beta_samples.is_none() && c.config.is_none() {
        c.beta_samples = Some(DEFAULT_BETA_SAMPLES);
    }
    // a curve is one configuration; require explicit single values unless a config supplies them
    if c.config.is_none() {
        for (flag, v) in [("--state", &c.state), ("--strength", &c.strength)] {
            if v.is_none() {
                return Err(usage(format!("curve needs {flag}")));
            }
        }
    }
    let cfg = resolve(&c)?;
    let spec = CurveSpec {
        state: single("state", &cfg.states)?,
        n: single("N", &cfg.n_grid)?,
        channel: cfg.channel,
        strength: single("strength", &cfg.strength_grid)?,
        window: cfg.window,
        beta_samples: cfg.beta_samples,
    };
    let data = compute_curve(&spec)?;
    let text = curve_table(&data).render(cfg.format)?;
    emit(&text, cfg.output_path.as_deref())
}

fn cmd_crossover(a: &CrossoverArgs) -> Result<(), Failure> {
    let mut common = a.common.clone();
    if common.state.is_none() && common.config.is_none() {
        common.state = Some("cs,tmsvs".into());
    }
    if common.channel.is_none() && common.config.is_none() {
        common.channel = Some("diffusion".into());
    }
    let mut cfg = resolve(&common)?;
    if cfg.channel != ChannelKind::PhaseDiffusion {
        return Err(usage("crossover runs over the diffusion strength"));
    }
    let [sa, sb] = cfg.states[..] else {
        return Err(usage("crossover needs exactly two states"));
    };
    let n = match cfg.n_grid[..] {
        [n] => n,
        _ => return Err(usage("crossover takes exactly one N")),
    };
    let bracket = parse_grid(&a.bracket)?;
    let [lo, hi] = bracket[..] else {
        return Err(usage("bracket must be lo,hi"));
    };
    let form = match cfg.bound_form {
        BoundSelection::Tight => BoundForm::Tight,
        BoundSelection::SineRelaxed => BoundForm::SineRelaxed,
        BoundSelection::Both => return Err(usage("crossover needs a single bound form")),
    };
    let opts = CrossoverOptions {
        form,
        tolerance: a.tolerance,
    };
    let kappa = crossover_kappa(sa, sb, n, (lo, hi), &cfg.window, &opts)?;
    cfg.bound_form = match form {
        BoundForm::Tight => BoundSelection::Tight,
        _ => BoundSelection::SineRelaxed,
    };
    let table = Table {
        meta: vec![
            ("tool".into(), json!("qzzb")),
            ("version".into(), json!(TOOL_VERSION)),
            ("command".into(), json!("crossover")),
            ("state_a".into(), json!(sa.label())),
            ("state_b".into(), json!(sb.label())),
            ("n".into(), json!(n)),
            ("bracket_lo".into(), json!(lo)),
            ("bracket_hi".into(), json!(hi)),
            ("tolerance".into(), json!(a.tolerance)),
            ("window_width".into(), json!(cfg.window.width())),
            ("bound_form".into(), json!(cfg.bound_form.label())),
        ],
        columns: vec!["kappa"],
        rows: vec![vec![Cell::Num(kappa)]],
    };
    emit(&table.render(cfg.format)?, cfg.output_path.as_deref())
}

fn cmd_verify(a: &VerifyArgs) -> Result<(), Failure> {
    if !(a.tolerance_scale >= 0.0) {
        return Err(usage("--tolerance-scale must be >= 0"));
    }
    let opts = VerifyOptions {
        tolerance_scale: a.tolerance_scale,
        cutoff: a.cutoff,
        two_mode_cutoff: a.two_mode_cutoff,
        ..Default::default()
    };
    let report = run_verify(&opts);
    let mut text = serde_json::to_string_pretty(&report.to_json()).expect("report serializes");
    text.push('\n');
    emit(&text, a.out.as_deref())?;
    for c in report.failed() {
        eprintln!(
            "FAIL {}: residual {:e} > tolerance {:e}{}",
            c.name,
            c.residual,
            c.tolerance,
            c.detail.as_deref().map(|d| format!(" ({d})")).unwrap_or_default()
        );
    }
    if report.passed {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_VERIFY,
            message: format!("{} verification checks failed", report.failed().len()),
        })
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Sweep(c) => cmd_sweep(c),
        Command::Curve(c) => cmd_curve(c),
        Command::Crossover(a) => cmd_crossover(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("qzzb: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
