use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;
use serde::Serialize;

use fracvis::error::{Error, Result};
use fracvis::fractals::{write_json_17, CurveApprox, CurveKind, CurveSpec};
use fracvis::geom::Point;
use fracvis::harness::{
    bound_value, exceptional_bound, read_rows_csv, render_scatter_svg, render_visible_svg,
    run_sweep, verify_bound, write_outputs, BoundReport, ExperimentConfig,
};
use fracvis::measurelab::{
    box_dimension, default_n_grid_for, default_s_grid, default_window, energy_dimension,
    scale_constants, BoxInput,
};
use fracvis::visibility::{sample_visible, visible_set, VisibleSetFile};

#[derive(Parser)]
#[command(
    name = "fracvis",
    version,
    about = "Visible parts of planar fractal curves"
)]
struct Cli {
    /// Seed for curve generation, viewpoints and sampling (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file, or directory for `sweep` and `render`. Defaults to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Only log errors.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CurveArgs {
    #[arg(long, value_parser = parse_kind)]
    kind: Option<CurveKind>,
    #[arg(long)]
    target_dim: Option<f64>,
    #[arg(long)]
    level: Option<u32>,
    /// Kind-specific parameters, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    params: Vec<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Build a curve approximation and write it as JSON.
    Generate(CurveArgs),
    /// Visible part of a curve from one viewpoint.
    Visible {
        #[arg(long)]
        curve: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long, allow_hyphen_values = true)]
        y: f64,
    },
    /// Box-counting dimension of a curve, or of a visible set when `--visible` is given.
    Dim {
        #[arg(long)]
        curve: PathBuf,
        #[arg(long)]
        visible: Option<PathBuf>,
        #[arg(long, default_value_t = 20_000)]
        samples: usize,
        #[arg(long, num_args = 2, value_names = ["MIN", "MAX"])]
        window: Option<Vec<f64>>,
        #[arg(long, default_value_t = 4)]
        n_scales: usize,
    },
    /// Energy-growth dimension of a curve.
    Energy {
        #[arg(long)]
        curve: PathBuf,
        #[arg(long, value_delimiter = ',')]
        s_grid: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        n_grid: Option<Vec<usize>>,
    },
    /// Run a viewpoint sweep from `--config`.
    Sweep {
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Recompute a bound report from a results file.
    VerifyBound {
        #[arg(long)]
        results: PathBuf,
        /// Take `d_hat`, `tol` and `s_threshold` from a sweep report.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        d_hat: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        s_threshold: Option<f64>,
    },
    /// Bound formulas and explicit scale constants.
    Constants {
        #[arg(long)]
        d: Option<f64>,
        #[arg(long)]
        s: f64,
        #[arg(long)]
        xi: Option<f64>,
        #[arg(long)]
        m: Option<f64>,
        #[arg(long)]
        d_minus: Option<f64>,
        #[arg(long)]
        d_plus: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        r1: f64,
    },
    /// Draw the visible part from a viewpoint, and/or the dimension scatter of a sweep.
    Render {
        #[arg(long)]
        curve: Option<PathBuf>,
        #[arg(long, num_args = 2, value_names = ["X", "Y"], allow_hyphen_values = true)]
        viewpoint: Option<Vec<f64>>,
        #[arg(long)]
        results: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

fn parse_kind(s: &str) -> std::result::Result<CurveKind, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| format!("unknown curve kind {s:?}"))
}

fn load_curve(path: &Path) -> Result<CurveApprox> {
    CurveApprox::read_json(&fs::read_to_string(path)?)
}

fn load_config(cli: &Cli) -> Result<Option<ExperimentConfig>> {
    let Some(path) = &cli.config else {
        return Ok(None);
    };
    let mut c = ExperimentConfig::load(path)?;
    if let Some(seed) = cli.seed {
        c.seed = seed;
    }
    Ok(Some(c))
}

fn output(cli: &Cli) -> Result<Box<dyn Write>> {
    Ok(match &cli.out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit_json<T: Serialize>(cli: &Cli, value: &T) -> Result<()> {
    let mut w = output(cli)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn curve_spec(cli: &Cli, a: &CurveArgs) -> Result<CurveSpec> {
    let mut spec = match (load_config(cli)?, a.kind) {
        (_, Some(kind)) => CurveSpec {
            kind,
            target_dim: a.target_dim.unwrap_or(1.0),
            level: a.level.unwrap_or(0),
            seed: 0,
            params: a.params.clone(),
        },
        (Some(c), None) => c.curve,
        (None, None) => return Err(Error::Invalid("generate needs --kind or --config".into())),
    };
    if let Some(d) = a.target_dim {
        spec.target_dim = d;
    }
    if let Some(l) = a.level {
        spec.level = l;
    }
    if let Some(s) = cli.seed {
        spec.seed = s;
    }
    Ok(spec)
}

#[derive(Serialize)]
struct ConstantsOutput {
    #[serde(skip_serializing_if = "Option::is_none")]
    bound_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    exceptional_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    scale_constants: Option<fracvis::measurelab::ScaleConstants>,
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Generate(a) => {
            let curve = curve_spec(cli, a)?.build()?;
            info!("{} segments, diameter {}", curve.len(), curve.diam);
            let mut w = output(cli)?;
            curve.write_json(&mut w)?;
            writeln!(w)?;
            w.flush()?;
        }
        Command::Visible { curve, x, y } => {
            let c = load_curve(curve)?;
            let vs = visible_set(&c, Point::try_new(*x, *y)?, None)?;
            info!("{} pieces, length {}", vs.pieces.len(), vs.total_length);
            let mut w = output(cli)?;
            vs.write_json(&mut w)?;
            writeln!(w)?;
            w.flush()?;
        }
        Command::Dim {
            curve,
            visible,
            samples,
            window,
            n_scales,
        } => {
            let c = load_curve(curve)?;
            let win = match window {
                Some(v) => (v[0], v[1]),
                None => default_window(&c),
            };
            let est = match visible {
                Some(p) => {
                    let file: VisibleSetFile = serde_json::from_str(&fs::read_to_string(p)?)?;
                    let vs = file.into_visible_set()?;
                    let (pts, _) = sample_visible(&vs, *samples, cli.seed.unwrap_or(0))?;
                    box_dimension(BoxInput::Points(&pts), win, *n_scales)?
                }
                None if c.connected => {
                    box_dimension(BoxInput::Segments(&c.segments), win, *n_scales)?
                }
                None => box_dimension(BoxInput::Points(&c.endpoints()), win, *n_scales)?,
            };
            emit_json(cli, &est)?;
        }
        Command::Energy {
            curve,
            s_grid,
            n_grid,
        } => {
            let c = load_curve(curve)?;
            let s = s_grid.clone().unwrap_or_else(default_s_grid);
            let n = n_grid.clone().unwrap_or_else(|| default_n_grid_for(&c));
            emit_json(cli, &energy_dimension(&c, &s, &n)?)?;
        }
        Command::Sweep { workers } => {
            let mut config =
                load_config(cli)?.ok_or_else(|| Error::Invalid("sweep needs --config".into()))?;
            if workers.is_some() {
                config.workers = *workers;
            }
            let dir = cli.out.clone().unwrap_or_else(|| config.output_dir.clone());
            let out = run_sweep(&config)?;
            write_outputs(&out, &dir)?;
            info!(
                "{} viewpoints, {:.3} within bound {:.4}; wrote {}",
                out.rows.len(),
                out.report.fraction_within,
                out.report.f_bound,
                dir.display()
            );
        }
        Command::VerifyBound {
            results,
            report,
            d_hat,
            tol,
            s_threshold,
        } => {
            let base: Option<BoundReport> = match report {
                Some(p) => Some(serde_json::from_str(&fs::read_to_string(p)?)?),
                None => None,
            };
            let pick = |v: Option<f64>, from: Option<f64>, name: &str| {
                v.or(from).ok_or_else(|| {
                    Error::Invalid(format!("verify-bound needs --{name} or --report"))
                })
            };
            let d = pick(*d_hat, base.as_ref().map(|b| b.d_hat), "d-hat")?;
            let t = tol.or(base.as_ref().map(|b| b.tol)).unwrap_or(0.1);
            let s = pick(
                *s_threshold,
                base.as_ref().map(|b| b.s_threshold),
                "s-threshold",
            )?;
            let mut rep = verify_bound(File::open(results)?, d, t, s)?;
            if let Some(b) = base {
                rep.d_hat_estimate = b.d_hat_estimate;
                rep.theoretical_dim = b.theoretical_dim;
            }
            emit_json(cli, &rep)?;
        }
        Command::Constants {
            d,
            s,
            xi,
            m,
            d_minus,
            d_plus,
            r1,
        } => {
            let scale = match (xi, m, d_minus, d_plus) {
                (Some(xi), Some(m), Some(dm), Some(dp)) => {
                    Some(scale_constants(*s, *xi, *m, *dm, *dp, *r1)?)
                }
                (None, None, None, None) => None,
                _ => {
                    return Err(Error::Invalid(
                        "scale constants need --xi, --m, --d-minus and --d-plus".into(),
                    ))
                }
            };
            let out = ConstantsOutput {
                bound_value: d.map(bound_value).transpose()?,
                exceptional_bound: d.map(|d| exceptional_bound(d, *s)).transpose()?,
                scale_constants: scale,
            };
            let mut w = output(cli)?;
            write_json_17(&mut w, &out)?;
            writeln!(w)?;
            w.flush()?;
        }
        Command::Render {
            curve,
            viewpoint,
            results,
            report,
        } => {
            let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
            fs::create_dir_all(&dir)?;
            let mut wrote = false;
            if let (Some(c), Some(v)) = (curve, viewpoint) {
                let c = load_curve(c)?;
                let vs = visible_set(&c, Point::try_new(v[0], v[1])?, None)?;
                fs::write(dir.join("visible.svg"), render_visible_svg(&c, &vs))?;
                wrote = true;
            }
            if let (Some(res), Some(rep)) = (results, report) {
                let rows = read_rows_csv(File::open(res)?)?;
                let rep: BoundReport = serde_json::from_str(&fs::read_to_string(rep)?)?;
                fs::write(dir.join("scatter.svg"), render_scatter_svg(&rows, &rep)?)?;
                wrote = true;
            }
            if !wrote {
                return Err(Error::Invalid(
                    "render needs --curve with --viewpoint, or --results with --report".into(),
                ));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = if cli.quiet { "error" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 1 } else { 2 })
        }
    }
}
