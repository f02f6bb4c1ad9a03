//! Ball, tube and sector masses of discrete measures, and the Frostman
//! growth condition `mu(B(u, r)) <= r^s`.

use std::f64::consts::TAU;

use rayon::prelude::*;

use super::fit::{least_squares, LinearFit};
use crate::error::{Error, Result};
use crate::fractals::DiscreteMeasure;
use crate::geom::{
    parallel_tube_contains, radial_tube_contains, Annulus, Cone, ParallelTube, Point, RadialTube,
    CHECK_SLACK, EPS_GEOM,
};

/// Mass of the closed ball `B(x, r)`.
pub fn ball_mass(mu: &DiscreteMeasure, x: Point, r: f64) -> f64 {
    mu.points
        .iter()
        .zip(&mu.weights)
        .filter(|(p, _)| p.dist(x) <= r)
        .map(|(_, w)| w)
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tube {
    Parallel(ParallelTube),
    Radial(RadialTube),
}

impl Tube {
    pub fn contains(&self, p: Point) -> bool {
        match self {
            Tube::Parallel(t) => parallel_tube_contains(t, p),
            Tube::Radial(t) => radial_tube_contains(t, p),
        }
    }

    pub fn with_half_width(&self, r: f64) -> Tube {
        match *self {
            Tube::Parallel(t) => Tube::Parallel(ParallelTube { half_width: r, ..t }),
            Tube::Radial(t) => Tube::Radial(RadialTube { half_width: r, ..t }),
        }
    }
}

pub fn tube_mass(mu: &DiscreteMeasure, tube: &Tube) -> f64 {
    mu.points
        .iter()
        .zip(&mu.weights)
        .filter(|(p, _)| tube.contains(**p))
        .map(|(_, w)| w)
        .sum()
}

/// Slope of `log tube_mass` against `log r` as the tube's half-width runs
/// over `r_grid`. Radii with zero mass are dropped; at least four must remain.
pub fn tube_scaling_exponent(
    mu: &DiscreteMeasure,
    tube: &Tube,
    r_grid: &[f64],
) -> Result<LinearFit> {
    if r_grid.len() < 4 {
        return Err(Error::invalid("tube scaling needs at least four radii"));
    }
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for &r in r_grid {
        if !(r > 0.0) {
            return Err(Error::invalid("tube radii must be positive"));
        }
        let m = tube_mass(mu, &tube.with_half_width(r));
        if m > 0.0 {
            xs.push(r.ln());
            ys.push(m.ln());
        }
    }
    if xs.is_empty() {
        return Err(Error::Degenerate("all tube masses are zero".into()));
    }
    if xs.len() < 4 {
        return Err(Error::Degenerate(format!(
            "only {} radii with nonzero tube mass",
            xs.len()
        )));
    }
    least_squares(&xs, &ys)
}

/// `n` radii log-spaced from `hi` down to `lo`.
pub fn log_radii(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![hi];
    }
    let (a, b) = (hi.ln(), lo.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// For every point of `mu`, the mass of the ball of each radius about it.
/// Rows follow point order; radii follow `radii` order.
fn ball_mass_profiles(mu: &DiscreteMeasure, radii: &[f64]) -> Vec<Vec<f64>> {
    let mut order: Vec<usize> = (0..radii.len()).collect();
    order.sort_by(|&a, &b| radii[a].total_cmp(&radii[b]));
    mu.points
        .par_iter()
        .map(|&u| {
            let mut d: Vec<(f64, f64)> = mu
                .points
                .iter()
                .zip(&mu.weights)
                .map(|(p, &w)| (p.dist(u), w))
                .collect();
            d.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut out = vec![0.0; radii.len()];
            let (mut k, mut acc) = (0usize, 0.0);
            for &ri in &order {
                while k < d.len() && d[k].0 <= radii[ri] {
                    acc += d[k].1;
                    k += 1;
                }
                out[ri] = acc;
            }
            out
        })
        .collect()
}

/// `sup_u mu(B(u, r))` over the measure's own points, for each radius.
pub fn sup_ball_mass(mu: &DiscreteMeasure, radii: &[f64]) -> Vec<f64> {
    let profiles = ball_mass_profiles(mu, radii);
    (0..radii.len())
        .map(|j| profiles.iter().map(|p| p[j]).fold(0.0, f64::max))
        .collect()
}

/// Radii on which the growth condition is checked: 32 log-spaced values.
#[derive(Debug, Clone, PartialEq)]
pub struct FrostmanGrid {
    pub radii: Vec<f64>,
}

impl FrostmanGrid {
    pub const SIZE: usize = 32;

    pub fn new(r_min: f64, r_max: f64) -> Result<Self> {
        if !(r_min > 0.0 && r_min < r_max) {
            return Err(Error::invalid("Frostman grid needs 0 < r_min < r_max"));
        }
        Ok(FrostmanGrid {
            radii: log_radii(r_min, r_max, Self::SIZE),
        })
    }

    pub fn r_min(&self) -> f64 {
        self.radii.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// A measure known to satisfy `mu(B(u, r)) <= r^s` at every own point `u`
/// and every grid radius.
#[derive(Debug, Clone, Copy)]
pub struct FrostmanCertified<'a> {
    pub mu: &'a DiscreteMeasure,
    pub s: f64,
    pub grid: &'a FrostmanGrid,
}

pub fn frostman_check<'a>(
    mu: &'a DiscreteMeasure,
    s: f64,
    grid: &'a FrostmanGrid,
) -> Result<FrostmanCertified<'a>> {
    let profiles = ball_mass_profiles(mu, &grid.radii);
    for (i, prof) in profiles.iter().enumerate() {
        for (j, &m) in prof.iter().enumerate() {
            let bound = grid.radii[j].powf(s);
            if m > bound + CHECK_SLACK {
                return Err(Error::FrostmanViolation {
                    index: i,
                    radius: grid.radii[j],
                    mass: m,
                    bound,
                });
            }
        }
    }
    Ok(FrostmanCertified { mu, s, grid })
}

/// Rescales `mu` so that it satisfies the growth condition on `grid` with
/// equality at the tightest point.
pub fn frostman_normalize(
    mu: &DiscreteMeasure,
    s: f64,
    grid: &FrostmanGrid,
) -> Result<DiscreteMeasure> {
    let sup = sup_ball_mass(mu, &grid.radii);
    let worst = sup
        .iter()
        .zip(&grid.radii)
        .map(|(m, r)| m / r.powf(s))
        .fold(0.0, f64::max);
    mu.scaled(1.0 / worst)
}

/// Least-squares fit of `log sup_u mu(B(u, r))` against `log r`.
pub fn frostman_fit(mu: &DiscreteMeasure, r_grid: &[f64]) -> Result<LinearFit> {
    if mu.len() < 2 {
        return Err(Error::invalid(
            "Frostman exponent needs more than one point",
        ));
    }
    if r_grid.len() < 4 {
        return Err(Error::invalid(
            "Frostman exponent needs at least four radii",
        ));
    }
    let sup = sup_ball_mass(mu, r_grid);
    let xs: Vec<f64> = r_grid.iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = sup.iter().map(|m| m.ln()).collect();
    least_squares(&xs, &ys)
}

/// Exponent `s` in `sup_u mu(B(u, r)) ≈ C r^s` over `r_grid`.
pub fn frostman_exponent(mu: &DiscreteMeasure, r_grid: &[f64]) -> Result<f64> {
    frostman_fit(mu, r_grid).map(|f| f.slope)
}

/// Angular sector `{x + t (cos a, sin a) : t > 0, a in [start, start + width]}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sector {
    pub apex: Point,
    pub start: f64,
    pub width: f64,
}

impl Sector {
    pub fn new(apex: Point, start: f64, width: f64) -> Result<Self> {
        if !(0.0..=TAU).contains(&width) {
            return Err(Error::invalid(format!(
                "sector width must lie in [0, 2pi], got {width}"
            )));
        }
        Ok(Sector { apex, start, width })
    }

    pub fn contains(&self, p: Point) -> bool {
        let v = p - self.apex;
        if self.width == 0.0 || v.norm() <= EPS_GEOM {
            return false;
        }
        (v.angle() - self.start).rem_euclid(TAU) <= self.width
    }
}

/// Region `V` for the sector mass estimate; its apex must be the annulus centre.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SectorRegion {
    Sector(Sector),
    Cone(Cone),
}

impl SectorRegion {
    fn apex(&self) -> Point {
        match self {
            SectorRegion::Sector(s) => s.apex,
            SectorRegion::Cone(c) => c.vertex,
        }
    }

    /// Angle subtended at the apex.
    pub fn angle(&self) -> f64 {
        match self {
            SectorRegion::Sector(s) => s.width,
            SectorRegion::Cone(c) => c.angular_width(),
        }
    }

    fn contains(&self, p: Point) -> bool {
        match self {
            SectorRegion::Sector(s) => s.contains(p),
            SectorRegion::Cone(c) => crate::geom::cone_contains(c, p),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

/// Upper bound on `nu(V ∩ A(x, d_minus, d_plus))` in terms of the angle
/// `theta` that `V` subtends at `x`: `3 d_plus^s 2^(s/2 - 1) theta^(s-1)` for
/// `theta <= 1/2`, and `d_plus^s` beyond.
pub fn sector_mass_bound(theta: f64, d_plus: f64, s: f64) -> f64 {
    if theta <= 0.5 {
        3.0 * d_plus.powf(s) * 2f64.powf(0.5 * s - 1.0) * theta.powf(s - 1.0)
    } else {
        d_plus.powf(s)
    }
}

pub fn sector_mass_check(
    cert: &FrostmanCertified<'_>,
    region: &SectorRegion,
    ann: &Annulus,
) -> Result<SectorCheck> {
    if region.apex().dist(ann.center) > EPS_GEOM {
        return Err(Error::invalid("sector apex must be the annulus centre"));
    }
    if ann.d_minus > 0.5 * ann.d_plus {
        return Err(Error::invalid(
            "sector mass estimate needs d_minus <= d_plus/2",
        ));
    }
    let mu = cert.mu;
    let lhs: f64 = mu
        .points
        .iter()
        .zip(&mu.weights)
        .filter(|(p, _)| ann.contains(**p) && region.contains(**p))
        .map(|(_, w)| w)
        .sum();
    let rhs = sector_mass_bound(region.angle(), ann.d_plus, cert.s);
    Ok(SectorCheck {
        lhs,
        rhs,
        ok: lhs <= rhs + CHECK_SLACK,
    })
}
