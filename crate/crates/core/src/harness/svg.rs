//! Static SVG figures with fixed-precision coordinates, so identical inputs
//! give byte-identical files.

use std::fmt::Write;

use super::sweep::ResultRow;
use super::verify::BoundReport;
use crate::error::{Error, Result};
use crate::fractals::CurveApprox;
use crate::geom::{Aabb, Point};
use crate::visibility::VisibleSet;

const SIZE: f64 = 800.0;
const MARGIN: f64 = 40.0;

/// Maps a world box onto the canvas, keeping the aspect ratio and flipping y.
struct Frame {
    min: Point,
    scale: f64,
    height: f64,
}

impl Frame {
    fn fit(b: Aabb) -> Frame {
        let e = b.extent();
        let span = e.x.max(e.y).max(f64::MIN_POSITIVE);
        let scale = (SIZE - 2.0 * MARGIN) / span;
        Frame {
            min: b.min,
            scale,
            height: e.y * scale + 2.0 * MARGIN,
        }
    }

    fn map(&self, p: Point) -> (f64, f64) {
        (
            MARGIN + (p.x - self.min.x) * self.scale,
            self.height - MARGIN - (p.y - self.min.y) * self.scale,
        )
    }
}

fn header(out: &mut String, w: f64, h: f64) {
    let _ = writeln!(
        out,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}">"##
    );
    let _ = writeln!(out, r##"<rect width="100%" height="100%" fill="white"/>"##);
}

fn polyline_path(frame: &Frame, segs: impl Iterator<Item = (Point, Point)>) -> String {
    let mut d = String::new();
    let mut last: Option<Point> = None;
    for (a, b) in segs {
        if last != Some(a) {
            let (x, y) = frame.map(a);
            let _ = write!(d, "M{x:.4} {y:.4}");
        }
        let (x, y) = frame.map(b);
        let _ = write!(d, "L{x:.4} {y:.4}");
        last = Some(b);
    }
    d
}

/// The curve in grey, the visible pieces in red and the viewpoint as a dot.
pub fn render_visible_svg(curve: &CurveApprox, vs: &VisibleSet) -> String {
    let x = vs.viewpoint.x;
    let frame = Frame::fit(curve.bounds().include(x));
    let w = SIZE;
    let mut out = String::new();
    header(&mut out, w, frame.height);
    let curve_path = polyline_path(&frame, curve.segments.iter().map(|s| (s.a, s.b)));
    let _ = writeln!(
        out,
        r##"<path class="curve" d="{curve_path}" fill="none" stroke="#999999" stroke-width="1"/>"##
    );
    let vis_path = polyline_path(&frame, vs.pieces.iter().map(|p| (p.piece.a, p.piece.b)));
    let _ = writeln!(
        out,
        r##"<path class="visible" d="{vis_path}" fill="none" stroke="#d62728" stroke-width="2"/>"##
    );
    let (cx, cy) = frame.map(x);
    let _ = writeln!(
        out,
        r##"<circle class="viewpoint" cx="{cx:.4}" cy="{cy:.4}" r="4" fill="#1f77b4"/>"##
    );
    out.push_str("</svg>\n");
    out
}

/// Visible dimension against distance to the curve, with horizontal lines
/// at the curve's estimated dimension and at the bound.
pub fn render_scatter_svg(rows: &[ResultRow], report: &BoundReport) -> Result<String> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| !r.error_flag)
        .filter_map(|r| Some((r.dist_to_set?, r.dim_visible?)))
        .collect();
    if pts.is_empty() {
        return Err(Error::invalid("nothing to plot: no successful rows"));
    }
    let x_max = pts.iter().map(|p| p.0).fold(0.0, f64::max) * 1.05;
    let x_max = if x_max > 0.0 { x_max } else { 1.0 };
    let y_max = 2.0f64.max(report.d_hat + 0.1);
    let (w, h) = (SIZE, SIZE * 0.6);
    let px = |x: f64| MARGIN + x / x_max * (w - 2.0 * MARGIN);
    let py = |y: f64| h - MARGIN - y / y_max * (h - 2.0 * MARGIN);
    let mut out = String::new();
    header(&mut out, w, h);
    let _ = writeln!(
        out,
        r##"<path class="axes" d="M{:.4} {:.4}L{:.4} {:.4}L{:.4} {:.4}" fill="none" stroke="black"/>"##,
        px(0.0),
        py(y_max),
        px(0.0),
        py(0.0),
        px(x_max),
        py(0.0)
    );
    for (label, y, colour) in [
        ("d_hat", report.d_hat, "#2ca02c"),
        ("f_bound", report.f_bound, "#d62728"),
    ] {
        let _ = writeln!(
            out,
            r##"<line class="{label}" x1="{:.4}" y1="{:.4}" x2="{:.4}" y2="{:.4}" stroke="{colour}" stroke-dasharray="6 4" data-value="{y}"/>"##,
            px(0.0),
            py(y),
            px(x_max),
            py(y)
        );
        let _ = writeln!(
            out,
            r##"<text x="{:.4}" y="{:.4}" font-size="12" fill="{colour}">{label} = {y:.4}</text>"##,
            px(x_max) - 110.0,
            py(y) - 4.0
        );
    }
    for (x, y) in pts {
        let _ = writeln!(
            out,
            r##"<circle cx="{:.4}" cy="{:.4}" r="3" fill="#1f77b4"/>"##,
            px(x),
            py(y)
        );
    }
    let _ = writeln!(
        out,
        r##"<text x="{:.4}" y="{:.4}" font-size="12">distance to curve</text>"##,
        w / 2.0 - 50.0,
        h - 8.0
    );
    let _ = writeln!(
        out,
        r##"<text x="4" y="16" font-size="12">visible dimension</text>"##
    );
    out.push_str("</svg>\n");
    Ok(out)
}
