//! Deterministic generators of compact connected planar sets with known or
//! tunable dimension, emitted as ordered segment lists, and the uniform
//! arclength measures placed on them.

use std::f64::consts::TAU;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Aabb, Point, Segment, EPS_GEOM};

pub const MAX_LEVEL: u32 = 12;
pub const MAX_CANTOR_LEVEL: u32 = 10;
pub const KOCH_MAX_DIM: f64 = 1.79;

/// Scale of the radial displacement added at the first quasicircle refinement.
const QUASI_AMPLITUDE: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    Koch,
    Quasicircle,
    Circle,
    Polyline,
    CantorCross,
}

impl CurveKind {
    pub fn name(self) -> &'static str {
        match self {
            CurveKind::Koch => "koch",
            CurveKind::Quasicircle => "quasicircle",
            CurveKind::Circle => "circle",
            CurveKind::Polyline => "polyline",
            CurveKind::CantorCross => "cantor_cross",
        }
    }
}

/// Recipe for a curve. `params` depend on `kind`:
///
/// * koch: none (`target_dim` selects the contraction ratio)
/// * quasicircle: `[roughness]`
/// * circle: `[cx, cy, radius, n]`
/// * polyline: `[x0, y0, x1, y1, ...]`
/// * cantor_cross: `[ratio]`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSpec {
    pub kind: CurveKind,
    pub target_dim: f64,
    pub level: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub params: Vec<f64>,
}

impl CurveSpec {
    pub fn koch(target_dim: f64, level: u32) -> Self {
        CurveSpec {
            kind: CurveKind::Koch,
            target_dim,
            level,
            seed: 0,
            params: vec![],
        }
    }

    pub fn quasicircle(seed: u64, roughness: f64, level: u32) -> Self {
        CurveSpec {
            kind: CurveKind::Quasicircle,
            target_dim: 1.0,
            level,
            seed,
            params: vec![roughness],
        }
    }

    pub fn circle(center: Point, radius: f64, n: usize) -> Self {
        CurveSpec {
            kind: CurveKind::Circle,
            target_dim: 1.0,
            level: 0,
            seed: 0,
            params: vec![center.x, center.y, radius, n as f64],
        }
    }

    pub fn polyline(points: &[Point]) -> Self {
        CurveSpec {
            kind: CurveKind::Polyline,
            target_dim: 1.0,
            level: 0,
            seed: 0,
            params: points.iter().flat_map(|p| [p.x, p.y]).collect(),
        }
    }

    pub fn cantor_cross(ratio: f64, level: u32) -> Self {
        CurveSpec {
            kind: CurveKind::CantorCross,
            target_dim: cantor_dim(ratio),
            level,
            seed: 0,
            params: vec![ratio],
        }
    }

    fn param(&self, i: usize, what: &str) -> Result<f64> {
        self.params.get(i).copied().ok_or_else(|| {
            Error::invalid(format!(
                "{} spec is missing parameter {what}",
                self.kind.name()
            ))
        })
    }

    pub fn build(&self) -> Result<CurveApprox> {
        match self.kind {
            CurveKind::Koch => koch_generalized(self.target_dim, self.level),
            CurveKind::Quasicircle => {
                quasicircle(self.seed, self.param(0, "roughness")?, self.level)
            }
            CurveKind::Circle => {
                let n = self.param(3, "n")?;
                if n.fract() != 0.0 || n < 0.0 {
                    return Err(Error::invalid(format!(
                        "circle vertex count must be an integer, got {n}"
                    )));
                }
                circle(
                    Point::new(self.param(0, "cx")?, self.param(1, "cy")?),
                    self.param(2, "radius")?,
                    n as usize,
                )
            }
            CurveKind::Polyline => {
                if !self.params.len().is_multiple_of(2) {
                    return Err(Error::invalid("polyline params must be x,y pairs"));
                }
                let pts: Vec<Point> = self
                    .params
                    .chunks_exact(2)
                    .map(|c| Point::new(c[0], c[1]))
                    .collect();
                polyline(&pts)
            }
            CurveKind::CantorCross => cantor_cross(self.param(0, "ratio")?, self.level),
        }
    }
}

/// Ordered segment approximation of a compact set.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveApprox {
    pub segments: Vec<Segment>,
    pub level: u32,
    pub theoretical_dim: Option<f64>,
    pub min_seg_len: f64,
    pub diam: f64,
    pub spec: CurveSpec,
    /// False for point clouds (`cantor_cross`).
    pub connected: bool,
}

impl CurveApprox {
    fn from_segments(
        segments: Vec<Segment>,
        spec: CurveSpec,
        theoretical_dim: Option<f64>,
        connected: bool,
    ) -> Self {
        let min_seg_len = if connected {
            segments
                .iter()
                .map(Segment::len)
                .fold(f64::INFINITY, f64::min)
        } else {
            // Cell size of the point cloud.
            spec.params
                .first()
                .copied()
                .unwrap_or(1.0)
                .powi(spec.level as i32)
        };
        let pts: Vec<Point> = segments.iter().flat_map(|s| [s.a, s.b]).collect();
        let diam = point_set_diameter(&pts);
        CurveApprox {
            segments,
            level: spec.level,
            theoretical_dim,
            min_seg_len,
            diam,
            spec,
            connected,
        }
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn total_length(&self) -> f64 {
        self.segments.iter().map(Segment::len).sum()
    }

    /// Chain vertices: the first endpoint followed by every segment's far end.
    pub fn vertices(&self) -> Vec<Point> {
        let mut v = Vec::with_capacity(self.segments.len() + 1);
        if let Some(s) = self.segments.first() {
            v.push(s.a);
        }
        v.extend(self.segments.iter().map(|s| s.b));
        v
    }

    pub fn endpoints(&self) -> Vec<Point> {
        self.segments.iter().flat_map(|s| [s.a, s.b]).collect()
    }

    pub fn bounds(&self) -> Aabb {
        self.segments
            .iter()
            .fold(Aabb::EMPTY, |b, s| b.union(&s.bounds()))
    }

    /// Mean of the segment midpoints, weighted by length (for point clouds, the plain mean).
    pub fn centroid(&self) -> Point {
        let (mut acc, mut w) = (Point::ORIGIN, 0.0);
        for s in &self.segments {
            let l = if self.connected { s.len() } else { 1.0 };
            acc = acc + s.midpoint() * l;
            w += l;
        }
        acc * (1.0 / w)
    }

    /// Consecutive segments share an endpoint to within `tol`.
    pub fn is_chain(&self, tol: f64) -> bool {
        self.segments.windows(2).all(|w| w[0].b.dist(w[1].a) <= tol)
    }

    /// Distance from `p` to the nearest segment (brute force).
    pub fn distance_to(&self, p: Point) -> f64 {
        self.segments
            .iter()
            .map(|s| s.distance_to(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Brute-force self-avoidance test: returns the first pair of
    /// non-adjacent segments that touch or cross.
    pub fn find_self_intersection(&self) -> Option<(usize, usize)> {
        let n = self.segments.len();
        let closed = n > 2 && self.segments[0].a.dist(self.segments[n - 1].b) <= EPS_GEOM;
        for i in 0..n {
            let bi = self.segments[i].bounds();
            for j in (i + 1)..n {
                let adjacent = j == i + 1 || (closed && i == 0 && j == n - 1);
                if !bi.overlaps(&self.segments[j].bounds(), EPS_GEOM) {
                    continue;
                }
                if adjacent {
                    // Adjacent segments may only meet at their shared vertex.
                    if self.segments[i].crossing(&self.segments[j]).is_some() {
                        return Some((i, j));
                    }
                } else if segments_touch(&self.segments[i], &self.segments[j]) {
                    return Some((i, j));
                }
            }
        }
        None
    }

    pub fn to_file(&self) -> CurveFile {
        CurveFile {
            spec: self.spec.clone(),
            theoretical_dim: self.theoretical_dim,
            min_seg_len: self.min_seg_len,
            segments: self
                .segments
                .iter()
                .map(|s| [s.a.x, s.a.y, s.b.x, s.b.y])
                .collect(),
        }
    }

    pub fn from_file(f: CurveFile) -> Result<Self> {
        let connected = f.spec.kind != CurveKind::CantorCross;
        let segments = f
            .segments
            .iter()
            .map(|c| {
                let (a, b) = (Point::try_new(c[0], c[1])?, Point::try_new(c[2], c[3])?);
                if connected {
                    Segment::new(a, b)
                } else {
                    Ok(Segment::point(a))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        if segments.is_empty() {
            return Err(Error::invalid("curve file has no segments"));
        }
        let mut c = CurveApprox::from_segments(segments, f.spec, f.theoretical_dim, connected);
        c.min_seg_len = f.min_seg_len;
        Ok(c)
    }

    pub fn write_json<W: Write>(&self, w: W) -> Result<()> {
        write_json_17(w, &self.to_file())
    }

    pub fn read_json(s: &str) -> Result<Self> {
        let f: CurveFile = serde_json::from_str(s)?;
        CurveApprox::from_file(f)
    }
}

fn segments_touch(a: &Segment, b: &Segment) -> bool {
    if a.crossing(b).is_some() {
        return true;
    }
    // Shared or touching endpoints between non-adjacent segments.
    [a.a, a.b].iter().any(|&p| b.distance_to(p) <= EPS_GEOM)
        || [b.a, b.b].iter().any(|&p| a.distance_to(p) <= EPS_GEOM)
}

/// On-disk curve representation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurveFile {
    pub spec: CurveSpec,
    pub theoretical_dim: Option<f64>,
    pub min_seg_len: f64,
    pub segments: Vec<[f64; 4]>,
}

/// JSON formatter that writes every float with 17 significant digits.
struct Sig17;

impl serde_json::ser::Formatter for Sig17 {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> std::io::Result<()> {
        write!(w, "{value:.16e}")
    }
}

/// Serializes `value` as JSON with 17-significant-digit floats.
pub fn write_json_17<W: Write, T: Serialize>(w: W, value: &T) -> Result<()> {
    let mut ser = serde_json::Serializer::with_formatter(w, Sig17);
    value.serialize(&mut ser)?;
    Ok(())
}

/// Rotating calipers over the convex hull.
fn point_set_diameter(pts: &[Point]) -> f64 {
    let hull = convex_hull(pts);
    let h = hull.len();
    if h < 3 {
        return if h == 2 { hull[0].dist(hull[1]) } else { 0.0 };
    }
    let area = |a: Point, b: Point, c: Point| (b - a).cross(c - a).abs();
    let mut d: f64 = 0.0;
    let mut j = 1;
    for i in 0..h {
        let (a, b) = (hull[i], hull[(i + 1) % h]);
        while area(a, b, hull[(j + 1) % h]) > area(a, b, hull[j]) {
            j = (j + 1) % h;
        }
        d = d.max(a.dist(hull[j])).max(b.dist(hull[j]));
    }
    d
}

/// Andrew's monotone chain.
pub(crate) fn convex_hull(pts: &[Point]) -> Vec<Point> {
    let mut p: Vec<Point> = pts.to_vec();
    p.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    p.dedup();
    if p.len() < 3 {
        return p;
    }
    let mut hull: Vec<Point> = Vec::with_capacity(2 * p.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point>> = if pass == 0 {
            Box::new(p.iter())
        } else {
            Box::new(p.iter().rev())
        };
        for &q in iter {
            while hull.len() >= start + 2 {
                let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
                if (b - a).cross(q - a) <= 0.0 {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(q);
        }
        hull.pop();
    }
    hull
}

/// Contraction ratio of the four-map Cesàro curve with similarity dimension `d`.
pub fn koch_ratio(d: f64) -> f64 {
    4f64.powf(-1.0 / d)
}

/// Four-map self-similar curve from `(0,0)` to `(1,0)`: two flat outer pieces
/// of length `r` and two raised inner pieces of length `r` meeting above the
/// midpoint, with `r = 4^(-1/target_dim)`.
pub fn koch_generalized(target_dim: f64, level: u32) -> Result<CurveApprox> {
    if !(target_dim > 1.0 && target_dim <= KOCH_MAX_DIM) {
        return Err(Error::invalid(format!(
            "koch target_dim must lie in (1, {KOCH_MAX_DIM}], got {target_dim}"
        )));
    }
    if level > MAX_LEVEL {
        return Err(Error::invalid(format!("level {level} exceeds {MAX_LEVEL}")));
    }
    let r = koch_ratio(target_dim);
    let h = (r * r - (0.5 - r) * (0.5 - r)).sqrt();
    // Generator vertices in the frame where the parent edge is [0, 1].
    let gen = [
        Point::new(r, 0.0),
        Point::new(0.5, h),
        Point::new(1.0 - r, 0.0),
    ];
    let mut verts = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0)];
    for _ in 0..level {
        let mut next = Vec::with_capacity(4 * (verts.len() - 1) + 1);
        for w in verts.windows(2) {
            let (p, q) = (w[0], w[1]);
            let e = q - p;
            next.push(p);
            for g in gen {
                // p + e * g as complex multiplication
                next.push(p + Point::new(e.x * g.x - e.y * g.y, e.x * g.y + e.y * g.x));
            }
        }
        next.push(*verts.last().unwrap());
        verts = next;
    }
    let segments = verts
        .windows(2)
        .map(|w| Segment::new(w[0], w[1]))
        .collect::<Result<Vec<_>>>()?;
    Ok(CurveApprox::from_segments(
        segments,
        CurveSpec::koch(target_dim, level),
        Some(target_dim),
        true,
    ))
}

/// Closed star-shaped curve obtained from an inscribed triangle by repeated
/// midpoint refinement in polar coordinates. At refinement step `k` each new
/// vertex takes the mean radius of its neighbours plus a uniform displacement
/// of amplitude `1.5 * roughness * 2^(-k (1 - roughness))`, drawn from an RNG
/// stream keyed by `(seed, k, position)`.
pub fn quasicircle(seed: u64, roughness: f64, level: u32) -> Result<CurveApprox> {
    if !(0.0..1.0).contains(&roughness) {
        return Err(Error::invalid(format!(
            "roughness must lie in [0, 1), got {roughness}"
        )));
    }
    if level > MAX_LEVEL {
        return Err(Error::invalid(format!("level {level} exceeds {MAX_LEVEL}")));
    }
    let spec = CurveSpec::quasicircle(seed, roughness, level);
    // Polar vertices, angles strictly increasing in [0, 2pi).
    let mut radii = vec![1.0f64; 3];
    let mut n = 3usize;
    for k in 1..=level {
        let amp = QUASI_AMPLITUDE * roughness * 2f64.powf(-(k as f64) * (1.0 - roughness));
        let mut next = Vec::with_capacity(2 * n);
        for i in 0..n {
            let (ra, rb) = (radii[i], radii[(i + 1) % n]);
            next.push(ra);
            let mut rho = 0.5 * (ra + rb);
            if amp > 0.0 {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(((k as u64) << 32) | i as u64);
                rho += amp * rng.gen_range(-1.0..1.0);
            }
            if rho <= 0.0 {
                // A star-shaped polygon is simple exactly when every radius is positive.
                let j = 2 * i + 1;
                return Err(Error::SelfIntersection(j.saturating_sub(1), j));
            }
            next.push(rho);
        }
        radii = next;
        n *= 2;
    }
    let pts: Vec<Point> = radii
        .iter()
        .enumerate()
        .map(|(i, &rho)| Point::from_polar(rho, TAU * i as f64 / n as f64))
        .collect();
    let segments = (0..n)
        .map(|i| Segment::new(pts[i], pts[(i + 1) % n]))
        .collect::<Result<Vec<_>>>()?;
    Ok(CurveApprox::from_segments(segments, spec, None, true))
}

/// Regular `n`-gon inscribed in the circle, first vertex at angle 0.
pub fn circle(center: Point, radius: f64, n: usize) -> Result<CurveApprox> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::invalid(format!(
            "circle radius must be positive, got {radius}"
        )));
    }
    if n < 3 {
        return Err(Error::invalid(format!("circle needs n >= 3, got {n}")));
    }
    let pts: Vec<Point> = (0..n)
        .map(|i| center + Point::from_polar(radius, TAU * i as f64 / n as f64))
        .collect();
    let segments = (0..n)
        .map(|i| Segment::new(pts[i], pts[(i + 1) % n]))
        .collect::<Result<Vec<_>>>()?;
    Ok(CurveApprox::from_segments(
        segments,
        CurveSpec::circle(center, radius, n),
        Some(1.0),
        true,
    ))
}

pub fn polyline(points: &[Point]) -> Result<CurveApprox> {
    if points.len() < 2 {
        return Err(Error::invalid("polyline needs at least two points"));
    }
    let segments = points
        .windows(2)
        .map(|w| Segment::new(w[0], w[1]))
        .collect::<Result<Vec<_>>>()?;
    Ok(CurveApprox::from_segments(
        segments,
        CurveSpec::polyline(points),
        Some(1.0),
        true,
    ))
}

/// Straight segment from `a` to `b` split into `pieces` equal parts.
pub fn subdivided_segment(a: Point, b: Point, pieces: usize) -> Result<CurveApprox> {
    let pieces = pieces.max(1);
    let pts: Vec<Point> = (0..=pieces)
        .map(|i| a.lerp(b, i as f64 / pieces as f64))
        .collect();
    polyline(&pts)
}

pub fn cantor_dim(ratio: f64) -> f64 {
    2.0 * 2f64.ln() / (1.0 / ratio).ln()
}

/// Level-`level` sample of `C x C`, where `C` keeps the outer two intervals of
/// relative length `ratio` at each step. Points are the lower-left corners of
/// the surviving squares.
pub fn cantor_cross(ratio: f64, level: u32) -> Result<CurveApprox> {
    if !(ratio > 0.0 && ratio < 0.5) {
        return Err(Error::invalid(format!(
            "cantor ratio must lie in (0, 1/2), got {ratio}"
        )));
    }
    if level > MAX_CANTOR_LEVEL {
        return Err(Error::invalid(format!(
            "cantor level {level} exceeds {MAX_CANTOR_LEVEL}"
        )));
    }
    let mut line = vec![0.0f64];
    let mut len = 1.0;
    for _ in 0..level {
        let next_len = len * ratio;
        line = line.iter().flat_map(|&a| [a, a + len - next_len]).collect();
        len = next_len;
    }
    let segments = line
        .iter()
        .flat_map(|&y| line.iter().map(move |&x| Segment::point(Point::new(x, y))))
        .collect();
    Ok(CurveApprox::from_segments(
        segments,
        CurveSpec::cantor_cross(ratio, level),
        Some(cantor_dim(ratio)),
        false,
    ))
}

/// Weighted point cloud standing in for a finite measure.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
    pub total_mass: f64,
}

impl DiscreteMeasure {
    pub fn new(points: Vec<Point>, weights: Vec<f64>) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(Error::invalid("measure needs one weight per point"));
        }
        if points.is_empty() {
            return Err(Error::invalid("empty measure"));
        }
        if weights.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
            return Err(Error::invalid(
                "measure weights must be positive and finite",
            ));
        }
        let total_mass = weights.iter().sum();
        Ok(DiscreteMeasure {
            points,
            weights,
            total_mass,
        })
    }

    /// Equal weights `1/n`.
    pub fn uniform(points: Vec<Point>) -> Result<Self> {
        let n = points.len();
        DiscreteMeasure::new(points, vec![1.0 / n as f64; n])
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn scaled(&self, k: f64) -> Result<Self> {
        DiscreteMeasure::new(
            self.points.clone(),
            self.weights.iter().map(|w| w * k).collect(),
        )
    }

    pub fn diameter(&self) -> f64 {
        point_set_diameter(&self.points)
    }
}

/// Points at arclength positions `(k + phase) L / n` along `pieces`.
pub(crate) fn arclength_points(pieces: &[Segment], n: usize, phase: f64) -> Vec<Point> {
    let total: f64 = pieces.iter().map(Segment::len).sum();
    let mut out = Vec::with_capacity(n);
    let mut seg = 0usize;
    let mut start = 0.0;
    for k in 0..n {
        let target = (k as f64 + phase) * total / n as f64;
        while seg + 1 < pieces.len() && start + pieces[seg].len() < target {
            start += pieces[seg].len();
            seg += 1;
        }
        let l = pieces[seg].len();
        let t = if l > 0.0 {
            ((target - start) / l).clamp(0.0, 1.0)
        } else {
            0.0
        };
        out.push(pieces[seg].at(t));
    }
    out
}

/// `n` arclength-equispaced points (midpoint rule), weights `1/n`. Point
/// clouds return an evenly strided subset of their points.
pub fn uniform_measure(curve: &CurveApprox, n: usize) -> Result<DiscreteMeasure> {
    if n == 0 {
        return Err(Error::invalid("uniform_measure needs n >= 1"));
    }
    if curve.is_empty() {
        return Err(Error::invalid("uniform_measure on an empty curve"));
    }
    let points = if curve.connected {
        arclength_points(&curve.segments, n, 0.5)
    } else {
        let m = curve.segments.len();
        let take = n.min(m);
        (0..take).map(|k| curve.segments[k * m / take].a).collect()
    };
    DiscreteMeasure::uniform(points)
}
