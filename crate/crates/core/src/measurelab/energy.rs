//! Riesz `s`-energies `I_s(mu) = sum_{i != j} w_i w_j |p_i - p_j|^(-s)` and
//! the energy-growth dimension estimate.
//!
//! A set has dimension at least `s` when it carries a measure of finite
//! `s`-energy. For `n`-point samples of the natural measure on a set of
//! dimension `d`, the increments `I_s(2n) - I_s(n)` scale like
//! `n^(s/d - 1)`: they shrink (convergent energy) for `s < d` and grow
//! (divergent energy) for `s > d`. The estimate is the `s` at which the
//! increment exponent changes sign.

use log::warn;
use rayon::prelude::*;

use super::fit::{least_squares, DimEstimate};
use crate::error::{Error, Result};
use crate::fractals::{uniform_measure, CurveApprox, DiscreteMeasure};

/// Energies for every `s` in `s_grid` from a single pass over the point pairs.
///
/// Each row `i` sums its `j > i` terms sequentially and rows are combined in
/// index order, so the result does not depend on the thread count.
pub fn riesz_energies(mu: &DiscreteMeasure, s_grid: &[f64]) -> Result<Vec<f64>> {
    if s_grid.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::invalid("Riesz exponent must be positive"));
    }
    let pts = &mu.points;
    let w = &mu.weights;
    let k = s_grid.len();
    // Arithmetic grids use a running product instead of one powf per term.
    let step = if k > 1 { s_grid[1] - s_grid[0] } else { 0.0 };
    let arithmetic = k > 2
        && s_grid
            .windows(2)
            .all(|p| ((p[1] - p[0]) - step).abs() <= 1e-12 * step.abs().max(1.0));
    let rows: Vec<Result<Vec<f64>>> = (0..pts.len())
        .into_par_iter()
        .map(|i| {
            let mut acc = vec![0.0; k];
            let (pi, wi) = (pts[i], w[i]);
            for j in (i + 1)..pts.len() {
                let d = pts[j].dist(pi);
                if d == 0.0 {
                    return Err(Error::Degenerate(format!(
                        "coincident points {i} and {j} in energy sum"
                    )));
                }
                let ww = wi * w[j];
                let ld = d.ln();
                if arithmetic {
                    let mut term = (-s_grid[0] * ld).exp();
                    let ratio = (-step * ld).exp();
                    for a in acc.iter_mut() {
                        *a += ww * term;
                        term *= ratio;
                    }
                } else {
                    for (a, &s) in acc.iter_mut().zip(s_grid) {
                        *a += ww * (-s * ld).exp();
                    }
                }
            }
            Ok(acc)
        })
        .collect();
    let mut total = vec![0.0; k];
    for row in rows {
        for (t, r) in total.iter_mut().zip(row?) {
            *t += r;
        }
    }
    Ok(total.into_iter().map(|t| 2.0 * t).collect())
}

pub fn riesz_energy(mu: &DiscreteMeasure, s: f64) -> Result<f64> {
    Ok(riesz_energies(mu, &[s])?[0])
}

/// Per-`s` growth exponents of the energy increments across `n_grid`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyGrowth {
    pub s_grid: Vec<f64>,
    pub n_grid: Vec<usize>,
    /// `energies[a][b]` is `I_{s_b}` for the `n_grid[a]`-point measure.
    pub energies: Vec<Vec<f64>>,
    pub exponents: Vec<f64>,
}

fn validate_grids(s_grid: &[f64], n_grid: &[usize]) -> Result<()> {
    if s_grid.len() < 2 {
        return Err(Error::invalid(
            "energy dimension needs at least two exponents",
        ));
    }
    if s_grid.iter().any(|&s| !(s > 0.0 && s < 2.0)) || s_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("s_grid must be increasing within (0, 2)"));
    }
    if n_grid.len() < 4 {
        return Err(Error::invalid(
            "energy dimension needs at least four sample sizes",
        ));
    }
    if n_grid[0] < 2 || n_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("n_grid must be increasing with n >= 2"));
    }
    Ok(())
}

pub fn energy_growth(
    curve: &CurveApprox,
    s_grid: &[f64],
    n_grid: &[usize],
) -> Result<EnergyGrowth> {
    validate_grids(s_grid, n_grid)?;
    if curve.is_empty() || (curve.connected && curve.total_length() <= 0.0) {
        return Err(Error::Degenerate(
            "energy dimension of an empty curve".into(),
        ));
    }
    let n_max = *n_grid.last().unwrap();
    if curve.connected && 2 * n_max > curve.len() {
        // Samples finer than the polygon see its straight pieces, not the set.
        warn!(
            "energy samples of up to {n_max} points exceed half the {} segments; \
             the estimate describes the polygon at fine scales",
            curve.len()
        );
    }
    let energies = n_grid
        .iter()
        .map(|&n| riesz_energies(&uniform_measure(curve, n)?, s_grid))
        .collect::<Result<Vec<_>>>()?;
    let log_n: Vec<f64> = n_grid[..n_grid.len() - 1]
        .iter()
        .map(|&n| (n as f64).ln())
        .collect();
    let exponents = (0..s_grid.len())
        .map(|b| {
            let inc: Vec<f64> = energies
                .windows(2)
                .map(|w| (w[1][b] - w[0][b]).abs().max(f64::MIN_POSITIVE).ln())
                .collect();
            least_squares(&log_n, &inc).map(|f| f.slope)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EnergyGrowth {
        s_grid: s_grid.to_vec(),
        n_grid: n_grid.to_vec(),
        energies,
        exponents,
    })
}

impl EnergyGrowth {
    /// Zero crossing of the increment exponent, interpolated between the last
    /// `s` with convergent energy and the first with divergent energy.
    pub fn estimate(&self) -> Result<DimEstimate> {
        let s = &self.s_grid;
        let e = &self.exponents;
        let k = e.iter().position(|&x| x >= 0.0);
        let value = match k {
            None => *s.last().unwrap(),
            Some(0) => s[0],
            Some(k) => s[k - 1] + (0.0 - e[k - 1]) / (e[k] - e[k - 1]) * (s[k] - s[k - 1]),
        };
        // Local line through up to four grid points around the crossing.
        let centre = k.unwrap_or(s.len() - 1).clamp(1, s.len() - 1);
        let lo = centre.saturating_sub(2);
        let hi = (centre + 2).min(s.len());
        let fit = least_squares(&s[lo..hi], &e[lo..hi])?;
        let resid = if fit.n > 2 {
            let sse: f64 = (lo..hi)
                .map(|i| (e[i] - fit.intercept - fit.slope * s[i]).powi(2))
                .sum();
            (sse / (fit.n as f64 - 2.0)).sqrt()
        } else {
            0.0
        };
        let stderr = if fit.slope != 0.0 {
            resid / fit.slope.abs()
        } else {
            f64::INFINITY
        };
        let n_min = self.n_grid[0] as f64;
        let n_max = *self.n_grid.last().unwrap() as f64;
        Ok(DimEstimate {
            value,
            stderr,
            r_squared: fit.r_squared,
            scale_min: 1.0 / n_max,
            scale_max: 1.0 / n_min,
            n_scales: self.n_grid.len(),
        })
    }
}

/// Energy-growth dimension of `curve` from uniform arclength measures of
/// the sizes in `n_grid`.
pub fn energy_dimension(
    curve: &CurveApprox,
    s_grid: &[f64],
    n_grid: &[usize],
) -> Result<DimEstimate> {
    energy_growth(curve, s_grid, n_grid)?.estimate()
}

/// `0.50, 0.55, ..., 1.95`.
pub fn default_s_grid() -> Vec<f64> {
    (0..30).map(|i| 0.5 + 0.05 * i as f64).collect()
}

/// `256, 512, ..., 4096`.
pub fn default_n_grid() -> Vec<usize> {
    (8..=12).map(|k| 1usize << k).collect()
}

/// Five doubling sample sizes ending at the largest power of two not above
/// half the segment count, kept within `2048..=4096`.
pub fn default_n_grid_for(curve: &CurveApprox) -> Vec<usize> {
    let half = (curve.len() / 2).max(1);
    let top = (usize::BITS - 1 - half.leading_zeros()).clamp(11, 12);
    (top - 4..=top).map(|k| 1usize << k).collect()
}
