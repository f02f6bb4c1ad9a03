//! Visible parts of segment-approximated sets.
//!
//! The visible part of `K` from `x` is `{u in K : [x, u] ∩ K = {u}}`. It is
//! computed exactly by an angular sweep: the directions around `x` are cut at
//! every segment endpoint and every crossing point between segments, so that
//! inside each elementary wedge the set of segments met by a ray is fixed and
//! their depth order cannot change. One first-hit query per wedge then
//! identifies the visible segment, and clipping it to the wedge gives the
//! visible sub-segment.

mod index;

use std::f64::consts::TAU;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use index::SegmentIndex;

use crate::error::{Error, Result};
use crate::fractals::{arclength_points, write_json_17, CurveApprox, DiscreteMeasure};
use crate::geom::{ray_hit_dir, Point, Segment, EPS_GEOM};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Viewpoint {
    pub x: Point,
    pub dist_to_set: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HitRecord {
    pub theta: f64,
    pub t: f64,
    pub point: Point,
    pub segment_index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VisiblePiece {
    pub segment_index: usize,
    pub piece: Segment,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VisibleSet {
    pub viewpoint: Viewpoint,
    /// In counter-clockwise angular order about the viewpoint.
    pub pieces: Vec<VisiblePiece>,
    pub total_length: f64,
    pub angular_coverage: f64,
}

impl VisibleSet {
    pub fn segments(&self) -> Vec<Segment> {
        self.pieces.iter().map(|p| p.piece).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    /// Whether `u` lies on a visible piece of segment `segment_index`.
    pub fn contains(&self, segment_index: usize, u: Point, tol: f64) -> bool {
        self.pieces
            .iter()
            .any(|p| p.segment_index == segment_index && p.piece.distance_to(u) <= tol)
    }

    pub fn to_file(&self) -> VisibleSetFile {
        VisibleSetFile {
            viewpoint: [self.viewpoint.x.x, self.viewpoint.x.y],
            pieces: self
                .pieces
                .iter()
                .map(|p| {
                    (
                        p.segment_index,
                        p.piece.a.x,
                        p.piece.a.y,
                        p.piece.b.x,
                        p.piece.b.y,
                    )
                })
                .collect(),
            total_length: self.total_length,
            angular_coverage: self.angular_coverage,
        }
    }

    pub fn write_json<W: Write>(&self, w: W) -> Result<()> {
        write_json_17(w, &self.to_file())
    }
}

/// On-disk visible-set representation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VisibleSetFile {
    pub viewpoint: [f64; 2],
    pub pieces: Vec<(usize, f64, f64, f64, f64)>,
    pub total_length: f64,
    pub angular_coverage: f64,
}

impl VisibleSetFile {
    /// Rebuilds a visible set; `dist_to_set` is not stored and comes back as NaN.
    pub fn into_visible_set(self) -> Result<VisibleSet> {
        let pieces = self
            .pieces
            .iter()
            .map(|&(i, x1, y1, x2, y2)| {
                Ok(VisiblePiece {
                    segment_index: i,
                    piece: Segment::new(Point::try_new(x1, y1)?, Point::try_new(x2, y2)?)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(VisibleSet {
            viewpoint: Viewpoint {
                x: Point::try_new(self.viewpoint[0], self.viewpoint[1])?,
                dist_to_set: f64::NAN,
            },
            pieces,
            total_length: self.total_length,
            angular_coverage: self.angular_coverage,
        })
    }
}

pub fn build_index(curve: &CurveApprox) -> SegmentIndex {
    SegmentIndex::build(&curve.segments)
}

fn tie_limit(t: f64) -> f64 {
    t + EPS_GEOM * (1.0 + t)
}

/// First hit along direction `d` from `x`: minimal `t`, ties within
/// `EPS_GEOM` going to the lowest segment index.
fn first_hit_dir(
    segments: &[Segment],
    x: Point,
    d: Point,
    index: Option<&SegmentIndex>,
) -> Option<(usize, f64)> {
    match index {
        Some(idx) => {
            let tmin = idx.min_hit(segments, x, d)?;
            idx.lowest_hit_within(segments, x, d, tie_limit(tmin))
        }
        None => {
            let tmin = segments
                .iter()
                .filter_map(|s| ray_hit_dir(x, d, s))
                .fold(f64::INFINITY, f64::min);
            if !tmin.is_finite() {
                return None;
            }
            let limit = tie_limit(tmin);
            segments
                .iter()
                .enumerate()
                .find_map(|(i, s)| ray_hit_dir(x, d, s).filter(|&t| t <= limit).map(|t| (i, t)))
        }
    }
}

fn distance_to_set(curve: &CurveApprox, x: Point, index: Option<&SegmentIndex>) -> f64 {
    match index {
        Some(idx) => idx.nearest_distance(&curve.segments, x),
        None => curve.distance_to(x),
    }
}

fn check_viewpoint(curve: &CurveApprox, x: Point, index: Option<&SegmentIndex>) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::invalid("non-finite viewpoint"));
    }
    let d = distance_to_set(curve, x, index);
    if d <= EPS_GEOM {
        return Err(Error::ViewpointOnCurve(d));
    }
    Ok(d)
}

/// `gamma(x, theta)`: the nearest point of the curve along the ray from `x`
/// in direction `theta`.
pub fn gamma(
    curve: &CurveApprox,
    x: Point,
    theta: f64,
    index: Option<&SegmentIndex>,
) -> Result<Option<HitRecord>> {
    if !x.is_finite() {
        return Err(Error::invalid("non-finite viewpoint"));
    }
    // Only the on-curve test is needed here, not the distance itself.
    let on_curve = match index {
        Some(idx) => idx.any_within(&curve.segments, x, EPS_GEOM),
        None => curve.distance_to(x) <= EPS_GEOM,
    };
    if on_curve {
        return Err(Error::ViewpointOnCurve(distance_to_set(curve, x, index)));
    }
    let d = Point::new(theta.cos(), theta.sin());
    Ok(
        first_hit_dir(&curve.segments, x, d, index).map(|(i, t)| HitRecord {
            theta,
            t,
            point: x + d * t,
            segment_index: i,
        }),
    )
}

/// Parameter along `s` where the ray from `x` in direction `d` meets the line of `s`.
fn clip_param(s: &Segment, x: Point, d: Point) -> f64 {
    let e = s.b - s.a;
    let denom = d.cross(e);
    if denom == 0.0 {
        // Edge-on: nearest endpoint.
        return if s.a.dist(x) <= s.b.dist(x) { 0.0 } else { 1.0 };
    }
    ((s.a - x).cross(d) / denom).clamp(0.0, 1.0)
}

/// Directions (in `(-pi, pi]`) at which the depth order of the segments can change.
fn event_angles(curve: &CurveApprox, x: Point, idx: &SegmentIndex) -> Vec<f64> {
    let segs = &curve.segments;
    let mut angles: Vec<f64> = curve.endpoints().iter().map(|&p| (p - x).angle()).collect();
    for (i, s) in segs.iter().enumerate() {
        idx.for_each_overlapping(&s.bounds(), EPS_GEOM, |j| {
            if j > i {
                if let Some(p) = s.crossing(&segs[j]) {
                    if p.dist(x) > EPS_GEOM {
                        angles.push((p - x).angle());
                    }
                }
            }
        });
    }
    angles.sort_by(f64::total_cmp);
    angles.dedup();
    angles
}

#[derive(Debug, Clone, Copy)]
struct Wedge {
    lo: f64,
    hi: f64,
    seg: usize,
}

/// Exact visible part of `curve` from `x`.
pub fn visible_set(
    curve: &CurveApprox,
    x: Point,
    index: Option<&SegmentIndex>,
) -> Result<VisibleSet> {
    if !curve.connected {
        return Err(Error::NotASegmentSet);
    }
    let owned;
    let idx = match index {
        Some(i) => i,
        None => {
            owned = SegmentIndex::build(&curve.segments);
            &owned
        }
    };
    let dist_to_set = check_viewpoint(curve, x, Some(idx))?;
    let segs = &curve.segments;
    let events = event_angles(curve, x, idx);

    let m = events.len();
    let mut wedges: Vec<Wedge> = Vec::with_capacity(m);
    for k in 0..m {
        let lo = events[k];
        let hi = if k + 1 < m {
            events[k + 1]
        } else {
            events[0] + TAU
        };
        if !(hi > lo) {
            continue;
        }
        let mid = 0.5 * (lo + hi);
        let d = Point::new(mid.cos(), mid.sin());
        if let Some((seg, _)) = first_hit_dir(segs, x, d, Some(idx)) {
            match wedges.last_mut() {
                Some(w) if w.seg == seg && w.hi == lo => w.hi = hi,
                _ => wedges.push(Wedge { lo, hi, seg }),
            }
        }
    }
    if wedges.len() > 1 {
        let (first, last) = (wedges[0], wedges[wedges.len() - 1]);
        if first.seg == last.seg && last.hi == first.lo + TAU {
            wedges[0].lo = last.lo - TAU;
            wedges.pop();
        }
    }

    let mut pieces = Vec::with_capacity(wedges.len());
    let mut total_length = 0.0;
    let mut angular_coverage = 0.0;
    for w in &wedges {
        let s = &segs[w.seg];
        let d_lo = Point::new(w.lo.cos(), w.lo.sin());
        let d_hi = Point::new(w.hi.cos(), w.hi.sin());
        let a = s.at(clip_param(s, x, d_lo));
        let b = s.at(clip_param(s, x, d_hi));
        angular_coverage += w.hi - w.lo;
        if a == b {
            continue;
        }
        let piece = Segment { a, b };
        total_length += piece.len();
        pieces.push(VisiblePiece {
            segment_index: w.seg,
            piece,
        });
    }
    Ok(VisibleSet {
        viewpoint: Viewpoint { x, dist_to_set },
        pieces,
        total_length,
        angular_coverage: angular_coverage.min(TAU),
    })
}

/// Does the open segment from `p` to `q` meet `s`?
fn open_segment_meets(p: Point, q: Point, s: &Segment) -> bool {
    let r = q - p;
    let e = s.b - s.a;
    let denom = r.cross(e);
    let w = s.a - p;
    let rl = r.norm();
    if rl == 0.0 {
        return false;
    }
    if denom.abs() <= EPS_GEOM * rl * e.norm().max(EPS_GEOM) {
        if w.cross(r).abs() > EPS_GEOM * rl * (1.0 + w.norm()) {
            return false;
        }
        // Collinear: overlap of parameter ranges along [p, q].
        let ta = w.dot(r) / (rl * rl);
        let tb = (s.b - p).dot(r) / (rl * rl);
        let (lo, hi) = (ta.min(tb), ta.max(tb));
        return hi > 0.0 && lo < 1.0;
    }
    let t = w.cross(e) / denom;
    let u = w.cross(r) / denom;
    t > 0.0 && t < 1.0 && (-EPS_GEOM..=1.0 + EPS_GEOM).contains(&u)
}

/// Brute-force definition test: the open segment from `x` to `u - eps*dir`
/// meets no curve segment.
pub fn visible_oracle(curve: &CurveApprox, x: Point, u: Point, eps: f64) -> Result<bool> {
    if curve.distance_to(u) > eps {
        return Err(Error::invalid("oracle point is not on the curve"));
    }
    let v = u - x;
    let len = v.norm();
    if len <= eps {
        return Err(Error::ViewpointOnCurve(len));
    }
    let end = u - v * (eps / len);
    Ok(!curve.segments.iter().any(|s| open_segment_meets(x, end, s)))
}

/// Oracle tolerance for a curve: one hundredth of its shortest segment.
pub fn oracle_eps(curve: &CurveApprox) -> f64 {
    curve.min_seg_len / 100.0
}

/// `n` points spread uniformly by arclength over the visible pieces, with
/// equal weights. For `n > 1` the sampling grid is shifted by a seeded random
/// phase; a single sample sits at the arclength midpoint.
pub fn sample_visible(
    vs: &VisibleSet,
    n: usize,
    seed: u64,
) -> Result<(Vec<Point>, DiscreteMeasure)> {
    if vs.pieces.is_empty() {
        return Err(Error::invalid("cannot sample an empty visible set"));
    }
    if n == 0 {
        return Err(Error::invalid("sample_visible needs n >= 1"));
    }
    let phase = if n == 1 {
        0.5
    } else {
        ChaCha8Rng::seed_from_u64(seed).gen_range(0.0..1.0)
    };
    let pts = arclength_points(&vs.segments(), n, phase);
    let mu = DiscreteMeasure::uniform(pts.clone())?;
    Ok((pts, mu))
}
