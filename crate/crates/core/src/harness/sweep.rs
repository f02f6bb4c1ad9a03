//! Viewpoint sweeps: one visible-part dimension estimate per viewpoint.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use log::{debug, info, warn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bounds::bound_value;
use super::config::{ExperimentConfig, ScalePolicy, ViewpointMode};
use super::svg::{render_scatter_svg, render_visible_svg};
use super::verify::{aggregate, BoundReport};
use crate::error::{Error, Result};
use crate::fractals::CurveApprox;
use crate::geom::Point;
use crate::measurelab::{box_dimension, default_window, BoxInput, DimEstimate};
use crate::visibility::{build_index, sample_visible, visible_set, SegmentIndex, VisibleSet};

/// Random viewpoints closer than this many shortest-segment lengths to the
/// curve are redrawn.
const MIN_CLEARANCE: f64 = 1.0;
const MAX_REDRAWS: usize = 1000;

/// One CSV row. Columns of failed rows other than the viewpoint are empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment_id: String,
    pub curve_kind: String,
    pub target_dim: f64,
    pub level: u32,
    pub seed: u64,
    pub vp_index: usize,
    pub vp_x: f64,
    pub vp_y: f64,
    pub dist_to_set: Option<f64>,
    pub n_pieces: Option<usize>,
    pub visible_length: Option<f64>,
    pub angular_coverage: Option<f64>,
    pub dim_visible: Option<f64>,
    pub dim_visible_stderr: Option<f64>,
    pub r_squared: Option<f64>,
    pub f_bound: f64,
    pub within_bound: bool,
    pub error_flag: bool,
}

pub const CSV_COLUMNS: [&str; 18] = [
    "experiment_id",
    "curve_kind",
    "target_dim",
    "level",
    "seed",
    "vp_index",
    "vp_x",
    "vp_y",
    "dist_to_set",
    "n_pieces",
    "visible_length",
    "angular_coverage",
    "dim_visible",
    "dim_visible_stderr",
    "r_squared",
    "f_bound",
    "within_bound",
    "error_flag",
];

/// Everything a sweep produces, before it is written out.
#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub curve: CurveApprox,
    pub rows: Vec<ResultRow>,
    pub report: BoundReport,
}

/// Streams `index` draw viewpoint positions; streams `2^32 + index` seed the
/// visible-set sampling.
fn viewpoint_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn sampling_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((1u64 << 32) | index as u64);
    rng
}

fn default_region(curve: &CurveApprox) -> [f64; 4] {
    let b = curve.bounds();
    let m = curve.diam;
    [b.min.x - m, b.min.y - m, b.max.x + m, b.max.y + m]
}

/// Viewpoint `index` of the sweep, drawn from its own RNG stream so that it
/// does not depend on any other viewpoint.
pub fn viewpoint(
    config: &ExperimentConfig,
    curve: &CurveApprox,
    idx: &SegmentIndex,
    index: usize,
) -> Point {
    let v = &config.viewpoints;
    let mut rng = viewpoint_rng(config.seed, index);
    match v.mode {
        ViewpointMode::Grid => {
            let [x0, y0, x1, y1] = v.region.unwrap_or_else(|| default_region(curve));
            let cols = (v.count as f64).sqrt().ceil() as usize;
            let rows = v.count.div_ceil(cols);
            let (i, j) = (index % cols, index / cols);
            let fx = (i as f64 + 0.5) / cols as f64;
            let fy = (j as f64 + 0.5) / rows as f64;
            Point::new(x0 + fx * (x1 - x0), y0 + fy * (y1 - y0))
        }
        ViewpointMode::Random => {
            let [x0, y0, x1, y1] = v.region.unwrap_or_else(|| default_region(curve));
            let clearance = MIN_CLEARANCE * curve.min_seg_len;
            let mut p = Point::ORIGIN;
            for _ in 0..MAX_REDRAWS {
                p = Point::new(rng.gen_range(x0..x1), rng.gen_range(y0..y1));
                if idx.nearest_distance(&curve.segments, p) > clearance {
                    break;
                }
            }
            p
        }
        ViewpointMode::Ring => {
            let [r0, r1] = v.ring_radii.unwrap_or([curve.diam, 3.0 * curve.diam]);
            let c = curve.centroid();
            // Uniform by area in the annulus.
            let u: f64 = rng.gen_range(0.0..1.0);
            let r = (r0 * r0 + u * (r1 * r1 - r0 * r0)).sqrt();
            let theta = rng.gen_range(0.0..std::f64::consts::TAU);
            c + Point::from_polar(r, theta)
        }
    }
}

fn scale_window(config: &ExperimentConfig, curve: &CurveApprox) -> (f64, f64) {
    match config.estimator.scale {
        ScalePolicy::Curve => default_window(curve),
        ScalePolicy::Explicit { min, max } => (min, max),
    }
}

struct RowOutcome {
    vs: VisibleSet,
    dim: DimEstimate,
}

fn measure_viewpoint(
    config: &ExperimentConfig,
    curve: &CurveApprox,
    idx: &SegmentIndex,
    index: usize,
    x: Point,
) -> Result<RowOutcome> {
    let vs = visible_set(curve, x, Some(idx))?;
    if vs.is_empty() {
        return Err(Error::Degenerate("nothing is visible".into()));
    }
    let sample_seed = sampling_rng(config.seed, index).gen::<u64>();
    let (pts, _) = sample_visible(&vs, config.samples_per_visible, sample_seed)?;
    let dim = box_dimension(
        BoxInput::Points(&pts),
        scale_window(config, curve),
        config.estimator.n_scales,
    )?;
    Ok(RowOutcome { vs, dim })
}

fn make_row(
    config: &ExperimentConfig,
    index: usize,
    x: Point,
    f_bound: f64,
    out: Result<RowOutcome>,
) -> ResultRow {
    let spec = &config.curve;
    let mut row = ResultRow {
        experiment_id: config.experiment_id.clone(),
        curve_kind: spec.kind.name().to_string(),
        target_dim: spec.target_dim,
        level: spec.level,
        seed: config.seed,
        vp_index: index,
        vp_x: x.x,
        vp_y: x.y,
        dist_to_set: None,
        n_pieces: None,
        visible_length: None,
        angular_coverage: None,
        dim_visible: None,
        dim_visible_stderr: None,
        r_squared: None,
        f_bound,
        within_bound: false,
        error_flag: true,
    };
    match out {
        Ok(RowOutcome { vs, dim }) => {
            row.dist_to_set = Some(vs.viewpoint.dist_to_set);
            row.n_pieces = Some(vs.pieces.len());
            row.visible_length = Some(vs.total_length);
            row.angular_coverage = Some(vs.angular_coverage);
            row.dim_visible = Some(dim.value);
            row.dim_visible_stderr = Some(dim.stderr);
            row.r_squared = Some(dim.r_squared);
            row.within_bound = dim.value <= f_bound + config.tol;
            row.error_flag = false;
        }
        Err(e) => warn!("viewpoint {index} at ({}, {}): {e}", x.x, x.y),
    }
    row
}

/// Runs the sweep in memory. Rows come back in viewpoint-index order and do
/// not depend on the number of worker threads.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepOutput> {
    config.validate()?;
    let curve = config.curve.build()?;
    if !curve.connected {
        return Err(Error::NotASegmentSet);
    }
    // The curve and its visible parts are measured over the same scales.
    let d_hat = box_dimension(
        BoxInput::Segments(&curve.segments),
        scale_window(config, &curve),
        config.estimator.n_scales,
    )?;
    let f_bound = bound_value(d_hat.value)?;
    info!(
        "{}: {} segments, estimated dimension {:.4} (target {}), bound {:.4}",
        config.experiment_id,
        curve.len(),
        d_hat.value,
        config.curve.target_dim,
        f_bound
    );
    let idx = build_index(&curve);
    let work = |i: usize| {
        let x = viewpoint(config, &curve, &idx, i);
        let out = measure_viewpoint(config, &curve, &idx, i, x);
        debug!("viewpoint {i} done");
        make_row(config, i, x, f_bound, out)
    };
    let rows: Vec<ResultRow> = match config.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::Degenerate(format!("thread pool: {e}")))?
            .install(|| {
                (0..config.viewpoints.count)
                    .into_par_iter()
                    .map(work)
                    .collect()
            }),
        None => (0..config.viewpoints.count)
            .into_par_iter()
            .map(work)
            .collect(),
    };
    let report = aggregate(
        &rows,
        d_hat.value,
        Some(d_hat),
        curve.theoretical_dim,
        config.tol,
        config.s_threshold,
    )?;
    Ok(SweepOutput {
        curve,
        rows,
        report,
    })
}

pub fn write_rows_csv<W: std::io::Write>(w: W, rows: &[ResultRow]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    if rows.is_empty() {
        wr.write_record(CSV_COLUMNS).map_err(csv_err)?;
    }
    for r in rows {
        wr.serialize(r).map_err(csv_err)?;
    }
    wr.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    Error::Csv {
        line,
        msg: e.to_string(),
    }
}

/// Writes `results.csv`, `report.json`, `visible.svg` (first successful
/// viewpoint) and `scatter.svg` into `dir`.
pub fn write_outputs(out: &SweepOutput, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_rows_csv(
        BufWriter::new(File::create(dir.join("results.csv"))?),
        &out.rows,
    )?;
    let f = BufWriter::new(File::create(dir.join("report.json"))?);
    serde_json::to_writer_pretty(f, &out.report)?;
    if let Some(row) = out.rows.iter().find(|r| !r.error_flag) {
        let vs = visible_set(&out.curve, Point::new(row.vp_x, row.vp_y), None)?;
        fs::write(dir.join("visible.svg"), render_visible_svg(&out.curve, &vs))?;
    }
    fs::write(
        dir.join("scatter.svg"),
        render_scatter_svg(&out.rows, &out.report)?,
    )?;
    Ok(())
}
