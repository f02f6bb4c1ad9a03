use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordinary least-squares line `y = slope * x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope.
    pub stderr: f64,
    pub r_squared: f64,
    pub n: usize,
}

pub fn least_squares(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    let n = xs.len();
    if n != ys.len() {
        return Err(Error::invalid("least_squares: length mismatch"));
    }
    if n < 2 {
        return Err(Error::invalid("least_squares needs at least two points"));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::invalid("least_squares: non-finite input"));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Degenerate(
            "least_squares: all x values equal".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let stderr = if n > 2 {
        (sse / (nf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    let r_squared = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    Ok(LinearFit {
        slope,
        intercept,
        stderr,
        r_squared,
        n,
    })
}

/// Minimum r² for a box-counting estimate to be reported as valid.
pub const MIN_VALID_R2: f64 = 0.98;

/// A dimension value with regression diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimEstimate {
    pub value: f64,
    pub stderr: f64,
    pub r_squared: f64,
    pub scale_min: f64,
    pub scale_max: f64,
    pub n_scales: usize,
}

impl DimEstimate {
    pub fn scale_window(&self) -> (f64, f64) {
        (self.scale_min, self.scale_max)
    }

    pub fn is_valid(&self) -> bool {
        self.r_squared >= MIN_VALID_R2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.0, 3.0, 5.0, 7.0];
        let f = least_squares(&xs, &ys).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-15);
        assert!((f.intercept - 1.0).abs() < 1e-15);
        assert!(f.stderr < 1e-15);
        assert!((f.r_squared - 1.0).abs() < 1e-15);
    }

    #[test]
    fn noisy_line_stderr() {
        // Residuals +-1 alternating around y = x.
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.0, 0.0, 3.0, 2.0];
        let f = least_squares(&xs, &ys).unwrap();
        // Hand computation: slope 0.6, sse 3.2, sxx 5 -> stderr sqrt(3.2/2/5)
        assert!((f.slope - 0.6).abs() < 1e-12);
        assert!((f.stderr - (0.32f64).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rejects_degenerate() {
        assert!(least_squares(&[1.0], &[1.0]).is_err());
        assert!(least_squares(&[1.0, 1.0], &[1.0, 2.0]).is_err());
        assert!(least_squares(&[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn dim_estimate_json_fields() {
        let d = DimEstimate {
            value: 1.25,
            stderr: 0.01,
            r_squared: 0.99,
            scale_min: 0.01,
            scale_max: 0.25,
            n_scales: 5,
        };
        let v: serde_json::Value = serde_json::to_value(d).unwrap();
        for k in [
            "value",
            "stderr",
            "r_squared",
            "scale_min",
            "scale_max",
            "n_scales",
        ] {
            assert!(v.get(k).is_some(), "{k}");
        }
        assert!(d.is_valid());
    }
}
