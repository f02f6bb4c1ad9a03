//! Planar primitives: points, segments, annuli, cones and tubes, plus
//! numeric checkers for the elementary angle and cone inequalities that the
//! dimension-drop argument relies on.
//!
//! Cones and tubes are open sets and use strict inequalities. Annuli are
//! half-open: `d_minus < |p - c| <= d_plus`.

use std::f64::consts::{PI, TAU};
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for collinearity and degeneracy tests.
pub const EPS_GEOM: f64 = 1e-12;

/// Slack used by inequality checkers.
pub const CHECK_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn try_new(x: f64, y: f64) -> Result<Self> {
        if x.is_finite() && y.is_finite() {
            Ok(Point { x, y })
        } else {
            Err(Error::invalid(format!("non-finite point ({x}, {y})")))
        }
    }

    pub fn from_polar(r: f64, theta: f64) -> Self {
        Point::new(r * theta.cos(), r * theta.sin())
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn dist(self, o: Point) -> f64 {
        (self - o).norm()
    }

    /// Counter-clockwise quarter turn, `(x, y) -> (-y, x)`.
    pub fn perp(self) -> Point {
        Point::new(-self.y, self.x)
    }

    pub fn unit(self) -> Option<Point> {
        let n = self.norm();
        (n > 0.0).then(|| self * (1.0 / n))
    }

    /// Polar angle in `(-pi, pi]`.
    pub fn angle(self) -> f64 {
        let a = self.y.atan2(self.x);
        if a == -PI {
            PI
        } else {
            a
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn lerp(self, o: Point, t: f64) -> Point {
        self + (o - self) * t
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, k: f64) -> Point {
        Point::new(self.x * k, self.y * k)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

/// Closed segment `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
}

impl Segment {
    pub fn new(a: Point, b: Point) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::invalid("segment with non-finite endpoint"));
        }
        if a == b {
            return Err(Error::Degenerate(format!(
                "zero-length segment at ({}, {})",
                a.x, a.y
            )));
        }
        Ok(Segment { a, b })
    }

    /// Zero-length segment standing in for a single point of a point cloud.
    pub(crate) fn point(p: Point) -> Self {
        Segment { a: p, b: p }
    }

    pub fn len(&self) -> f64 {
        self.a.dist(self.b)
    }

    pub fn is_degenerate(&self) -> bool {
        self.a == self.b
    }

    pub fn at(&self, t: f64) -> Point {
        self.a.lerp(self.b, t)
    }

    pub fn midpoint(&self) -> Point {
        self.at(0.5)
    }

    pub fn distance_to(&self, p: Point) -> f64 {
        let e = self.b - self.a;
        let l2 = e.norm_sq();
        if l2 == 0.0 {
            return p.dist(self.a);
        }
        let t = ((p - self.a).dot(e) / l2).clamp(0.0, 1.0);
        p.dist(self.at(t))
    }

    pub fn bounds(&self) -> Aabb {
        Aabb {
            min: Point::new(self.a.x.min(self.b.x), self.a.y.min(self.b.y)),
            max: Point::new(self.a.x.max(self.b.x), self.a.y.max(self.b.y)),
        }
    }

    /// Intersection point of two segments that cross away from their shared
    /// endpoints. Touching at a common endpoint does not count.
    pub fn crossing(&self, other: &Segment) -> Option<Point> {
        let shared = |p: Point| p == other.a || p == other.b;
        let e = self.b - self.a;
        let f = other.b - other.a;
        let denom = e.cross(f);
        let scale = e.norm() * f.norm();
        let w = other.a - self.a;
        if denom.abs() <= EPS_GEOM * scale {
            // Parallel: only collinear overlaps beyond a shared endpoint count.
            if w.cross(e).abs() > EPS_GEOM * e.norm() * w.norm().max(1.0) {
                return None;
            }
            let l2 = e.norm_sq();
            let t0 = (other.a - self.a).dot(e) / l2;
            let t1 = (other.b - self.a).dot(e) / l2;
            let (lo, hi) = (t0.min(t1).max(0.0), t0.max(t1).min(1.0));
            if hi - lo > EPS_GEOM {
                return Some(self.at(0.5 * (lo + hi)));
            }
            return None;
        }
        let t = w.cross(f) / denom;
        let u = w.cross(e) / denom;
        let tol = EPS_GEOM;
        if t < -tol || t > 1.0 + tol || u < -tol || u > 1.0 + tol {
            return None;
        }
        let p = self.at(t.clamp(0.0, 1.0));
        if (shared(self.a) && p.dist(self.a) <= EPS_GEOM * (1.0 + self.a.norm()))
            || (shared(self.b) && p.dist(self.b) <= EPS_GEOM * (1.0 + self.b.norm()))
        {
            return None;
        }
        Some(p)
    }
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Point,
    pub max: Point,
}

impl Aabb {
    pub const EMPTY: Aabb = Aabb {
        min: Point::new(f64::INFINITY, f64::INFINITY),
        max: Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
    };

    pub fn union(&self, o: &Aabb) -> Aabb {
        Aabb {
            min: Point::new(self.min.x.min(o.min.x), self.min.y.min(o.min.y)),
            max: Point::new(self.max.x.max(o.max.x), self.max.y.max(o.max.y)),
        }
    }

    pub fn include(&self, p: Point) -> Aabb {
        Aabb {
            min: Point::new(self.min.x.min(p.x), self.min.y.min(p.y)),
            max: Point::new(self.max.x.max(p.x), self.max.y.max(p.y)),
        }
    }

    pub fn overlaps(&self, o: &Aabb, pad: f64) -> bool {
        self.min.x <= o.max.x + pad
            && o.min.x <= self.max.x + pad
            && self.min.y <= o.max.y + pad
            && o.min.y <= self.max.y + pad
    }

    pub fn center(&self) -> Point {
        self.min.lerp(self.max, 0.5)
    }

    pub fn extent(&self) -> Point {
        self.max - self.min
    }

    /// Lower bound on the distance from `p` to anything inside the box.
    pub fn distance_to(&self, p: Point) -> f64 {
        let dx = (self.min.x - p.x).max(0.0).max(p.x - self.max.x);
        let dy = (self.min.y - p.y).max(0.0).max(p.y - self.max.y);
        dx.hypot(dy)
    }

    /// Entry/exit parameters of the ray `o + t d` (slab test), clipped to `t >= 0`.
    pub fn ray_interval(&self, o: Point, inv_d: Point) -> Option<(f64, f64)> {
        let mut t0: f64 = 0.0;
        let mut t1 = f64::INFINITY;
        for (o, inv, lo, hi) in [
            (o.x, inv_d.x, self.min.x, self.max.x),
            (o.y, inv_d.y, self.min.y, self.max.y),
        ] {
            if inv.is_infinite() {
                // Ray parallel to this slab.
                if o < lo || o > hi {
                    return None;
                }
                continue;
            }
            let (mut a, mut b) = ((lo - o) * inv, (hi - o) * inv);
            if a > b {
                std::mem::swap(&mut a, &mut b);
            }
            t0 = t0.max(a);
            t1 = t1.min(b);
        }
        // Pad the exit so grazing hits on box faces are not lost to rounding.
        (t0 <= t1 * (1.0 + 4.0 * f64::EPSILON) + EPS_GEOM).then_some((t0, t1))
    }
}

/// Half-open annulus `B(center, d_plus) \ B(center, d_minus)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Annulus {
    pub center: Point,
    pub d_minus: f64,
    pub d_plus: f64,
}

impl Annulus {
    pub fn new(center: Point, d_minus: f64, d_plus: f64) -> Result<Self> {
        if !(d_minus > 0.0 && d_minus <= d_plus && d_plus.is_finite()) {
            return Err(Error::invalid(format!(
                "annulus radii must satisfy 0 < d_minus <= d_plus, got {d_minus}, {d_plus}"
            )));
        }
        Ok(Annulus {
            center,
            d_minus,
            d_plus,
        })
    }

    pub fn contains(&self, p: Point) -> bool {
        let d = p.dist(self.center);
        d > self.d_minus && d <= self.d_plus
    }
}

/// Open cone `{y : |<y - v, u_perp>| < sigma <y - v, u>}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cone {
    pub vertex: Point,
    pub direction: Point,
    pub opening: f64,
}

impl Cone {
    pub fn new(vertex: Point, direction: Point, opening: f64) -> Result<Self> {
        if direction.norm() == 0.0 {
            return Err(Error::invalid("cone direction must be nonzero"));
        }
        if !(opening > 0.0) {
            return Err(Error::invalid(format!(
                "cone opening must be positive, got {opening}"
            )));
        }
        Ok(Cone {
            vertex,
            direction,
            opening,
        })
    }

    /// Full angular width of the cone in radians.
    pub fn angular_width(&self) -> f64 {
        2.0 * self.opening.atan()
    }
}

pub fn cone_contains(c: &Cone, p: Point) -> bool {
    let v = p - c.vertex;
    v.dot(c.direction.perp()).abs() < c.opening * v.dot(c.direction)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Plus,
    Minus,
}

/// Radial tube `T_x^±(u, r)`: the cone from `origin` through `anchor` with
/// opening `r / |u - x|`, cut to the far (`Plus`) or near (`Minus`) side of the
/// circle through `anchor`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialTube {
    pub origin: Point,
    pub anchor: Point,
    pub half_width: f64,
    pub side: Side,
}

impl RadialTube {
    pub fn new(origin: Point, anchor: Point, half_width: f64, side: Side) -> Result<Self> {
        if origin.dist(anchor) <= 0.0 {
            return Err(Error::invalid("radial tube anchor coincides with origin"));
        }
        if !(half_width > 0.0) {
            return Err(Error::invalid("radial tube half-width must be positive"));
        }
        Ok(RadialTube {
            origin,
            anchor,
            half_width,
            side,
        })
    }
}

pub fn radial_tube_contains(t: &RadialTube, p: Point) -> bool {
    let axis = t.anchor - t.origin;
    let du = axis.norm();
    let cone = Cone {
        vertex: t.origin,
        direction: axis,
        opening: t.half_width / du,
    };
    if !cone_contains(&cone, p) {
        return false;
    }
    let dp = p.dist(t.origin);
    match t.side {
        Side::Plus => dp > du,
        Side::Minus => dp < du,
    }
}

/// Open vertical tube of width `2r` above (`Plus`) or below (`Minus`) `base`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParallelTube {
    pub base: Point,
    pub half_width: f64,
    pub side: Side,
}

impl ParallelTube {
    pub fn new(base: Point, half_width: f64, side: Side) -> Result<Self> {
        if !(half_width > 0.0) {
            return Err(Error::invalid("tube half-width must be positive"));
        }
        Ok(ParallelTube {
            base,
            half_width,
            side,
        })
    }
}

pub fn parallel_tube_contains(t: &ParallelTube, p: Point) -> bool {
    if (p.x - t.base.x).abs() >= t.half_width {
        return false;
    }
    match t.side {
        Side::Plus => p.y > t.base.y,
        Side::Minus => p.y < t.base.y,
    }
}

/// Angle of the smallest arc about `x` containing the radial projections of
/// `pts`; `2*pi` when `x` is one of the points.
pub fn arc_diam(x: Point, pts: &[Point]) -> Result<f64> {
    if pts.is_empty() {
        return Err(Error::invalid("arc_diam of an empty point set"));
    }
    let mut angles = Vec::with_capacity(pts.len());
    for &p in pts {
        let v = p - x;
        if v.norm() <= EPS_GEOM {
            return Ok(TAU);
        }
        angles.push(v.angle());
    }
    Ok(TAU - largest_angular_gap(&mut angles))
}

/// Largest gap between consecutive angles on the circle. Sorts `angles`.
pub(crate) fn largest_angular_gap(angles: &mut [f64]) -> f64 {
    angles.sort_by(f64::total_cmp);
    let n = angles.len();
    let mut gap = angles[0] + TAU - angles[n - 1];
    for w in angles.windows(2) {
        gap = gap.max(w[1] - w[0]);
    }
    gap
}

/// `<p - a, p + a> / (|p - a| |p + a|)`.
pub fn angle_ratio(p: Point, a: Point) -> Result<f64> {
    let m = p - a;
    let q = p + a;
    if m.norm() <= EPS_GEOM || q.norm() <= EPS_GEOM {
        return Err(Error::Degenerate("angle_ratio needs p != ±a".into()));
    }
    let denom = (m.norm_sq() * q.norm_sq()).sqrt();
    Ok((m.dot(q) / denom).clamp(-1.0, 1.0))
}

/// Outcome of checking the two-sided angle-ratio bound on a point set.
#[derive(Debug, Clone)]
pub struct AngleBoundCheck {
    pub alpha: f64,
    pub lower: f64,
    pub upper: f64,
    pub ratios: Vec<f64>,
}

impl AngleBoundCheck {
    pub fn violations(&self, slack: f64) -> usize {
        self.ratios
            .iter()
            .filter(|&&r| r < self.lower - slack || r > self.upper + slack)
            .count()
    }
}

/// Checks `1/2 <= angle_ratio(p, a) <= 1 - 9/(17 d_plus^2) (|a| alpha)^2` for
/// all `p` in `pts`, where `alpha = min |<p, a_perp> / <p, a>|`. Fails if the
/// preconditions (`|a| <= d_minus/2`, `d_minus <= 1`, points in the annulus
/// about the origin, `alpha <= 1`) do not hold.
pub fn check_angle_bound(
    a: Point,
    pts: &[Point],
    d_minus: f64,
    d_plus: f64,
) -> Result<AngleBoundCheck> {
    let ann = Annulus::new(Point::ORIGIN, d_minus, d_plus)?;
    if d_minus > 1.0 {
        return Err(Error::invalid("angle bound needs d_minus <= 1"));
    }
    let na = a.norm();
    if na == 0.0 || na > 0.5 * d_minus {
        return Err(Error::invalid("angle bound needs 0 < |a| <= d_minus/2"));
    }
    if pts.is_empty() {
        return Err(Error::invalid("angle bound needs a non-empty point set"));
    }
    let ap = a.perp();
    let mut alpha = f64::INFINITY;
    for &p in pts {
        if !ann.contains(p) {
            return Err(Error::invalid("angle bound point outside the annulus"));
        }
        let along = p.dot(a);
        if along != 0.0 {
            alpha = alpha.min((p.dot(ap) / along).abs());
        }
    }
    if alpha > 1.0 {
        return Err(Error::invalid(format!(
            "angle bound needs alpha <= 1, got {alpha}"
        )));
    }
    let upper = 1.0 - 9.0 / (17.0 * d_plus * d_plus) * (na * alpha).powi(2);
    let ratios = pts
        .iter()
        .map(|&p| angle_ratio(p, a))
        .collect::<Result<Vec<_>>>()?;
    Ok(AngleBoundCheck {
        alpha,
        lower: 0.5,
        upper,
        ratios,
    })
}

/// Lower bound `-sigma/(sigma+tau) |p|` on `<u - p, p_hat>` for `u` in
/// `V(0, p, sigma) \ V(p, -p, tau)`.
pub fn intercone_bound(p: Point, sigma: f64, tau: f64) -> Result<f64> {
    if p.norm() <= EPS_GEOM {
        return Err(Error::Degenerate("intercone bound needs p != 0".into()));
    }
    if !(sigma > 0.0 && tau > 0.0) {
        return Err(Error::invalid("intercone bound needs sigma, tau > 0"));
    }
    Ok(-sigma / (sigma + tau) * p.norm())
}

/// `Some(holds)` when `u` lies in the cone difference, `None` otherwise.
pub fn intercone_holds(
    p: Point,
    sigma: f64,
    tau: f64,
    u: Point,
    slack: f64,
) -> Result<Option<bool>> {
    let bound = intercone_bound(p, sigma, tau)?;
    let outer = Cone::new(Point::ORIGIN, p, sigma)?;
    let inner = Cone::new(p, -p, tau)?;
    if !cone_contains(&outer, u) || cone_contains(&inner, u) {
        return Ok(None);
    }
    let p_hat = p.unit().expect("p nonzero");
    Ok(Some((u - p).dot(p_hat) >= bound - slack))
}

/// `(|u - x|, arg(u - x))` with the angle in `(-pi, pi]`.
pub fn log_polar(x: Point, u: Point) -> Result<(f64, f64)> {
    let v = u - x;
    let r = v.norm();
    if r <= EPS_GEOM {
        return Err(Error::Degenerate("log_polar needs u != x".into()));
    }
    Ok((r, v.angle()))
}

pub fn log_polar_inverse(x: Point, r: f64, theta: f64) -> Point {
    x + Point::from_polar(r, theta)
}

/// Smallest `t > 0` with `origin + t (cos theta, sin theta)` on `s`.
///
/// A ray collinear with the segment hits its nearest endpoint. A ray whose
/// origin lies on the segment never hits it.
pub fn ray_segment_hit(origin: Point, theta: f64, s: &Segment) -> Option<f64> {
    ray_hit_dir(origin, Point::new(theta.cos(), theta.sin()), s)
}

pub(crate) fn ray_hit_dir(o: Point, d: Point, s: &Segment) -> Option<f64> {
    let e = s.b - s.a;
    let w = s.a - o;
    let el = e.norm();
    if el == 0.0 {
        // Point segment.
        let t = w.dot(d);
        return (t > EPS_GEOM && w.cross(d).abs() <= EPS_GEOM * (1.0 + t)).then_some(t);
    }
    let denom = d.cross(e);
    if denom.abs() <= EPS_GEOM * el {
        if w.cross(d).abs() > EPS_GEOM * (1.0 + w.norm()) {
            return None;
        }
        let ta = w.dot(d);
        let tb = (s.b - o).dot(d);
        let (lo, hi) = (ta.min(tb), ta.max(tb));
        if lo <= EPS_GEOM {
            // Origin on the segment, or segment behind the origin.
            return None;
        }
        return (hi > 0.0).then_some(lo);
    }
    let t = w.cross(e) / denom;
    let u = w.cross(d) / denom;
    let tol = EPS_GEOM * (1.0 + t.abs()) / el;
    if u < -tol || u > 1.0 + tol || t <= EPS_GEOM {
        return None;
    }
    Some(t)
}

/// Random configurations for the inequality fuzz suites. Samplers reject draws
/// within `1e-6` of a precondition boundary.
pub mod fuzz {
    use rand::Rng;

    use super::*;

    const MARGIN: f64 = 1e-6;

    /// One configuration for [`check_angle_bound`].
    #[derive(Debug, Clone)]
    pub struct AngleCase {
        pub a: Point,
        pub pts: Vec<Point>,
        pub d_minus: f64,
        pub d_plus: f64,
    }

    pub fn sample_angle_case<R: Rng>(rng: &mut R, n_pts: usize) -> AngleCase {
        loop {
            let d_minus = rng.gen_range(0.05..1.0);
            let d_plus = d_minus * rng.gen_range(1.0..4.0);
            let na = rng.gen_range(0.0..0.5 * d_minus);
            if na < MARGIN || 0.5 * d_minus - na < MARGIN || d_plus - d_minus < MARGIN {
                continue;
            }
            let phi = rng.gen_range(-PI..PI);
            let a = Point::from_polar(na, phi);
            let sample_in_annulus = |rng: &mut R, ang: f64| {
                let r2 = rng.gen_range((d_minus * d_minus)..(d_plus * d_plus));
                Point::from_polar(r2.sqrt(), ang)
            };
            let mut pts = Vec::with_capacity(n_pts);
            // One point within 45 degrees of the a-axis so that alpha <= 1.
            let off = rng.gen_range(-PI / 4.0..PI / 4.0);
            let flip = if rng.gen_bool(0.5) { 0.0 } else { PI };
            pts.push(sample_in_annulus(rng, phi + flip + off));
            for _ in 1..n_pts {
                let ang = rng.gen_range(-PI..PI);
                pts.push(sample_in_annulus(rng, ang));
            }
            let near_edge = pts.iter().any(|p| {
                let r = p.norm();
                r - d_minus < MARGIN || d_plus - r < MARGIN
            });
            if near_edge {
                continue;
            }
            let ap = a.perp();
            let alpha = pts
                .iter()
                .filter(|p| p.dot(a) != 0.0)
                .map(|p| (p.dot(ap) / p.dot(a)).abs())
                .fold(f64::INFINITY, f64::min);
            if alpha > 1.0 - MARGIN {
                continue;
            }
            return AngleCase {
                a,
                pts,
                d_minus,
                d_plus,
            };
        }
    }

    /// One configuration for [`intercone_holds`]: `u` is guaranteed to lie in
    /// `V(0, p, sigma) \ V(p, -p, tau)`.
    #[derive(Debug, Clone, Copy)]
    pub struct InterconeCase {
        pub p: Point,
        pub sigma: f64,
        pub tau: f64,
        pub u: Point,
    }

    pub fn sample_intercone_case<R: Rng>(rng: &mut R) -> InterconeCase {
        loop {
            let p = Point::from_polar(rng.gen_range(0.01..10.0), rng.gen_range(-PI..PI));
            let sigma = 10f64.powf(rng.gen_range(-2.0..1.0));
            let tau = 10f64.powf(rng.gen_range(-2.0..1.0));
            let p_hat = p.unit().unwrap();
            let t = rng.gen_range(0.0..3.0) * p.norm();
            let s = rng.gen_range(-sigma..sigma);
            if t < MARGIN || sigma - s.abs() < MARGIN {
                continue;
            }
            let u = (p_hat + p_hat.perp() * s) * t;
            // Distance-like margin from the inner cone's boundary.
            let v = u - p;
            let lhs = v.dot(p.perp()).abs();
            let rhs = tau * v.dot(-p);
            if (lhs - rhs).abs() < MARGIN * p.norm() || rhs > lhs {
                continue;
            }
            return InterconeCase { p, sigma, tau, u };
        }
    }
}
