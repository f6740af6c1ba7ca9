use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use upb::config::{preset_names, preset_source, Truncation};
use upb::emit::{render, Format};
use upb::optimal::{run_optimal, to_text};
use upb::sweep::{run_sweep, Route, RouteSettings, SweepResult, SweepSpec, SweptVariable};
use upb::tempscan::{run_tempscan, TempScanError, DEFAULT_TEMPERATURES_K, TEMPSCAN_DIMS};
use upb::{Config, ConfigError, EXIT_CONFIG, EXIT_NUMERICAL};
use upb_core::model::Direction;

/// Photon antibunching in a spinning optomechanical photonic molecule.
#[derive(Parser, Debug)]
#[command(name = "upb", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// g2 over a one-dimensional parameter grid.
    Sweep(SweepArgs),
    /// Optimal detuning and coupling from the weak-drive conditions.
    Optimal(OptimalArgs),
    /// g2 against bath temperature at the optimal point, both directions.
    Tempscan(TempscanArgs),
    /// g2 at the configured detuning on every requested route.
    Point(PointArgs),
    /// List the bundled parameter sets, or print one.
    Presets {
        /// Preset to print as JSON.
        name: Option<String>,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// Parameter file, or the name of a bundled preset.
    #[arg(long, short = 'c')]
    config: String,
    /// Override a config entry, e.g. `physical.omega_spin_rad_s=12000`.
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    set: Vec<String>,
    /// Drive directions (ccw, cw); defaults to the config's, else both.
    #[arg(long, value_delimiter = ',')]
    direction: Vec<Direction>,
    /// Fock levels per mode as `left,right,phonon`.
    #[arg(long)]
    truncation: Option<Truncation>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Output file (default: stdout).
    #[arg(long, short = 'o')]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// csv, json or svg.
    #[arg(long, default_value = "csv")]
    format: Format,
    /// Logarithmic g2 axis in SVG output.
    #[arg(long)]
    log_y: bool,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    output: OutputArgs,
    /// Routes (master, semiclassical, weakdrive); defaults to the config's.
    #[arg(long, value_delimiter = ',')]
    route: Vec<Route>,
    /// Swept variable; defaults to the config's.
    #[arg(long)]
    var: Option<SweptVariable>,
    #[arg(long, allow_hyphen_values = true)]
    start: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    stop: Option<f64>,
    #[arg(long)]
    step: Option<f64>,
}

#[derive(Args, Debug)]
struct OptimalArgs {
    #[command(flatten)]
    common: Common,
    /// text (summary and landscape CSV) or json.
    #[arg(long, default_value = "text")]
    format: String,
}

#[derive(Args, Debug)]
struct TempscanArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    output: OutputArgs,
    /// Temperatures in kelvin (comma-separated).
    #[arg(long, value_delimiter = ',')]
    temperatures: Vec<f64>,
}

#[derive(Args, Debug)]
struct PointArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    output: OutputArgs,
    /// Routes; default all three.
    #[arg(long, value_delimiter = ',')]
    route: Vec<Route>,
    /// Detuning in units of kappa; defaults to the config's.
    #[arg(long, allow_hyphen_values = true)]
    detuning: Option<f64>,
}

enum Failure {
    Config(String),
    Numerical(String),
    Io(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<TempScanError> for Failure {
    fn from(e: TempScanError) -> Self {
        match e {
            TempScanError::Config(c) => c.into(),
            other => Failure::Numerical(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = Cli::parse();
    let started = Instant::now();
    let outcome = run(cli.command);
    eprintln!("wall time: {:.3} s", started.elapsed().as_secs_f64());
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_NUMERICAL)
        }
        Err(Failure::Io(m)) => {
            eprintln!("error: {m}");
            ExitCode::FAILURE
        }
    }
}

fn directions(common: &Common, fallback: Option<&[Direction]>) -> Vec<Direction> {
    if !common.direction.is_empty() {
        return common.direction.clone();
    }
    fallback.map_or_else(|| Direction::BOTH.to_vec(), <[Direction]>::to_vec)
}

fn write_out(out: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Io(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Failure::Io(e.to_string()))
        }
    }
}

fn finish(result: &SweepResult, common: &Common, output: &OutputArgs) -> Result<(), Failure> {
    write_out(&common.out, &render(result, output.format, output.log_y))?;
    let (failed, total) = (result.failures(), result.points());
    if failed > 0 {
        eprintln!("{failed} of {total} points failed; see the status column");
    }
    if total > 0 && failed == total {
        return Err(Failure::Numerical("every point failed".into()));
    }
    Ok(())
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Presets { name: None } => {
            let mut s = String::new();
            for n in preset_names() {
                let cfg = Config::load(n, &[])?;
                let desc = serde_json::from_str::<serde_json::Value>(preset_source(n).unwrap_or("{}"))
                    .ok()
                    .and_then(|v| v.get("description").and_then(|d| d.as_str()).map(str::to_owned))
                    .unwrap_or_default();
                s.push_str(&format!("{}\t{}\n", cfg.name, desc));
            }
            write_out(&None, &s)
        }
        Command::Presets { name: Some(n) } => match preset_source(&n) {
            Some(src) => write_out(&None, src),
            None => Err(ConfigError::UnknownPreset(n).into()),
        },
        Command::Sweep(a) => {
            let cfg = Config::load(&a.common.config, &a.common.set)?;
            let base = cfg.sweep.clone();
            let variable = a.var.or(base.as_ref().map(|s| s.variable));
            let spec = SweepSpec {
                variable: variable
                    .ok_or_else(|| Failure::Config("no sweep variable: pass --var or add a sweep section".into()))?,
                start: a.start.or(base.as_ref().map(|s| s.start)).unwrap_or(f64::NAN),
                stop: a.stop.or(base.as_ref().map(|s| s.stop)).unwrap_or(f64::NAN),
                step: a.step.or(base.as_ref().map(|s| s.step)).unwrap_or(f64::NAN),
                routes: if a.route.is_empty() {
                    base.as_ref().map_or_else(|| vec![Route::Master], |s| s.routes.clone())
                } else {
                    a.route.clone()
                },
                directions: directions(&a.common, base.as_ref().map(|s| s.directions.as_slice())),
            }
            .validated()?;
            let settings = RouteSettings::from_config(&cfg, a.common.truncation.map(|t| t.0));
            let result = run_sweep(&cfg, &spec, &settings, a.common.jobs)?;
            finish(&result, &a.common, &a.output)
        }
        Command::Point(a) => {
            let cfg = Config::load(&a.common.config, &a.common.set)?;
            let x = a.detuning.or(cfg.overrides.detuning).unwrap_or(0.0);
            let spec = SweepSpec {
                variable: SweptVariable::DetuningOverKappa,
                start: x,
                stop: x + 1.0,
                step: 2.0,
                routes: if a.route.is_empty() {
                    Route::ALL.to_vec()
                } else {
                    a.route.clone()
                },
                directions: directions(&a.common, None),
            };
            let settings = RouteSettings::from_config(&cfg, a.common.truncation.map(|t| t.0));
            let result = run_sweep(&cfg, &spec, &settings, a.common.jobs)?;
            finish(&result, &a.common, &a.output)
        }
        Command::Optimal(a) => {
            let cfg = Config::load(&a.common.config, &a.common.set)?;
            let report = run_optimal(&cfg, &directions(&a.common, None))?;
            let text = match a.format.as_str() {
                "text" => to_text(&report),
                "json" => {
                    let mut s = serde_json::to_string_pretty(&report).map_err(|e| Failure::Io(e.to_string()))?;
                    s.push('\n');
                    s
                }
                other => {
                    return Err(Failure::Config(format!(
                        "unknown format '{other}' for optimal (expected text or json)"
                    )))
                }
            };
            write_out(&a.common.out, &text)?;
            if report.directions.iter().all(|d| d.delta_opt.is_none()) {
                return Err(Failure::Numerical("no admissible optimum in any direction".into()));
            }
            Ok(())
        }
        Command::Tempscan(a) => {
            let cfg = Config::load(&a.common.config, &a.common.set)?;
            let temps = if a.temperatures.is_empty() {
                DEFAULT_TEMPERATURES_K.to_vec()
            } else {
                a.temperatures.clone()
            };
            let dip = a.common.direction.first().copied().unwrap_or(Direction::Ccw);
            let trunc = a
                .common
                .truncation
                .map(|t| t.0)
                .or(cfg.truncation.map(|t| [t[0], t[1], t[2].max(TEMPSCAN_DIMS[2])]));
            let settings = RouteSettings::from_config(&cfg, Some(trunc.unwrap_or(TEMPSCAN_DIMS)));
            let scan = run_tempscan(&cfg, &temps, dip, &settings, a.common.jobs)?;
            match scan.crossing_k {
                Some(t) => eprintln!("direction ratio falls below 2 at T = {t} K"),
                None => eprintln!("direction ratio stays at or above 2 over the scanned temperatures"),
            }
            finish(&scan.result, &a.common, &a.output)
        }
    }
}
