//! Box-counting dimension on origin-anchored dyadic grids.

use std::collections::HashSet;

use super::fit::{least_squares, DimEstimate};
use crate::error::{Error, Result};
use crate::fractals::CurveApprox;
use crate::geom::{Point, Segment};

pub const MIN_SCALES: usize = 4;

#[derive(Debug, Clone, Copy)]
pub enum BoxInput<'a> {
    Points(&'a [Point]),
    /// Zero-length segments count as points.
    Segments(&'a [Segment]),
}

/// Cells are half-open `[i eps, (i+1) eps) x [j eps, (j+1) eps)`.
fn cell(p: Point, eps: f64) -> (i64, i64) {
    ((p.x / eps).floor() as i64, (p.y / eps).floor() as i64)
}

/// Cell index along one axis of the segment end at coordinate `v`, seen from
/// inside the segment: an end lying on a grid line belongs to the cell the
/// segment runs into, not the one it merely touches.
fn end_cell(v: f64, inward: f64, eps: f64) -> i64 {
    let q = v / eps;
    let c = q.floor();
    if inward < 0.0 && q == c {
        c as i64 - 1
    } else {
        c as i64
    }
}

/// Visits every cell the open segment passes through (grid walk).
fn segment_cells(s: &Segment, eps: f64, out: &mut HashSet<(i64, i64)>) {
    let d = s.b - s.a;
    let (mut i, mut j) = (end_cell(s.a.x, d.x, eps), end_cell(s.a.y, d.y, eps));
    let (ie, je) = (end_cell(s.b.x, -d.x, eps), end_cell(s.b.y, -d.y, eps));
    out.insert((i, j));
    if (i, j) == (ie, je) {
        return;
    }
    let axis = |o: f64, dv: f64, c: i64| -> (i64, f64, f64) {
        if dv > 0.0 {
            (1, (((c + 1) as f64) * eps - o) / dv, eps / dv)
        } else if dv < 0.0 {
            (-1, ((c as f64) * eps - o) / dv, -eps / dv)
        } else {
            (0, f64::INFINITY, f64::INFINITY)
        }
    };
    let (sx, mut tx, dx) = axis(s.a.x, d.x, i);
    let (sy, mut ty, dy) = axis(s.a.y, d.y, j);
    let steps = (ie - i).unsigned_abs() + (je - j).unsigned_abs();
    for _ in 0..steps {
        if tx < ty {
            i += sx;
            tx += dx;
        } else {
            j += sy;
            ty += dy;
        }
        out.insert((i, j));
    }
    // Rounding in the walk can end one cell off; the true end cell is always occupied.
    out.insert((ie, je));
}

pub fn box_count(input: BoxInput<'_>, eps: f64) -> usize {
    let mut cells = HashSet::new();
    match input {
        BoxInput::Points(pts) => {
            for &p in pts {
                cells.insert(cell(p, eps));
            }
        }
        BoxInput::Segments(segs) => {
            for s in segs {
                segment_cells(s, eps, &mut cells);
            }
        }
    }
    cells.len()
}

/// Dyadic scales `2^-k` inside `[lo, hi]`, coarsest first.
pub fn dyadic_scales(lo: f64, hi: f64) -> Vec<f64> {
    if !(lo > 0.0 && hi >= lo) {
        return vec![];
    }
    let k0 = (-hi.log2()).ceil() as i32;
    let k1 = (-lo.log2()).floor() as i32;
    (k0..=k1)
        .map(|k| 2f64.powi(-k))
        .filter(|&e| e >= lo && e <= hi)
        .collect()
}

/// Scale window for a curve approximation: from four times the shortest
/// segment (below which the polygon looks one-dimensional) up to a quarter
/// of the diameter.
pub fn default_window(curve: &CurveApprox) -> (f64, f64) {
    (4.0 * curve.min_seg_len, curve.diam / 4.0)
}

/// Slope of `log N(eps)` against `log(1/eps)` over all dyadic `eps` in
/// `window`. Fails if fewer than `max(min_scales, 4)` scales fit.
pub fn box_dimension(
    input: BoxInput<'_>,
    window: (f64, f64),
    min_scales: usize,
) -> Result<DimEstimate> {
    let scales = dyadic_scales(window.0, window.1);
    let need = min_scales.max(MIN_SCALES);
    if scales.len() < need {
        return Err(Error::Degenerate(format!(
            "scale window [{:e}, {:e}] holds {} dyadic scales, need {need}",
            window.0,
            window.1,
            scales.len()
        )));
    }
    let empty = match input {
        BoxInput::Points(p) => p.is_empty(),
        BoxInput::Segments(s) => s.is_empty(),
    };
    if empty {
        return Err(Error::invalid("box_dimension of an empty set"));
    }
    let xs: Vec<f64> = scales.iter().map(|e| -e.ln()).collect();
    let ys: Vec<f64> = scales
        .iter()
        .map(|&e| (box_count(input, e) as f64).ln())
        .collect();
    let fit = least_squares(&xs, &ys)?;
    Ok(DimEstimate {
        value: fit.slope,
        stderr: fit.stderr,
        r_squared: fit.r_squared,
        scale_min: scales[scales.len() - 1],
        scale_max: scales[0],
        n_scales: scales.len(),
    })
}

/// Box dimension of a curve approximation over its default window.
pub fn curve_box_dimension(curve: &CurveApprox) -> Result<DimEstimate> {
    box_dimension(
        BoxInput::Segments(&curve.segments),
        default_window(curve),
        MIN_SCALES,
    )
}
