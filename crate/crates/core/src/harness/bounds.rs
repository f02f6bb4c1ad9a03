//! Upper bounds on the dimension of visible parts and on the size of the
//! set of viewpoints from which a visible part is large.

use log::warn;

use crate::error::{Error, Result};

/// Almost-every-viewpoint bound `1/2 + sqrt(d - 3/4)` for a set of dimension `d`.
pub fn bound_value(d: f64) -> Result<f64> {
    if !(d >= 0.75) || !d.is_finite() {
        return Err(Error::invalid(format!(
            "bound_value needs d >= 3/4, got {d}"
        )));
    }
    Ok(0.5 + (d - 0.75).sqrt())
}

/// Bound `(d - s) / (s - 1)` on the dimension of the viewpoints whose
/// visible part has dimension above `s`. Meaningful only for
/// `bound_value(d) < s <= d`; other `s` are computed but logged.
pub fn exceptional_bound(d: f64, s: f64) -> Result<f64> {
    if !(s > 1.0) || !s.is_finite() || !d.is_finite() {
        return Err(Error::invalid(format!(
            "exceptional_bound needs s > 1, got {s}"
        )));
    }
    if s > d {
        warn!("threshold s = {s} exceeds d = {d}");
    } else if d >= 0.75 && s <= bound_value(d)? {
        warn!("threshold s = {s} is at or below the almost-sure bound for d = {d}");
    }
    Ok((d - s) / (s - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOLDEN: f64 = 1.618_033_988_749_895;

    #[test]
    fn known_values() {
        assert!((bound_value(2.0).unwrap() - GOLDEN).abs() < 1e-15);
        assert_eq!(bound_value(1.0).unwrap(), 1.0);
        assert!((bound_value(1.5).unwrap() - (0.5 + 3f64.sqrt() / 2.0)).abs() < 1e-15);
        assert!((exceptional_bound(2.0, GOLDEN).unwrap() - (GOLDEN - 1.0)).abs() < 1e-15);
        assert_eq!(exceptional_bound(1.7, 1.7).unwrap(), 0.0);
        assert_eq!(exceptional_bound(2.0, 1.5).unwrap(), 1.0);
    }

    #[test]
    fn domain_errors() {
        assert!(bound_value(0.7).is_err());
        assert!(bound_value(f64::NAN).is_err());
        assert!(exceptional_bound(2.0, 1.0).is_err());
        assert!(exceptional_bound(2.0, 0.5).is_err());
    }

    #[test]
    fn monotonicity_on_grids() {
        let mut prev = f64::NEG_INFINITY;
        for i in 0..=125 {
            let v = bound_value(0.75 + 0.01 * i as f64).unwrap();
            assert!(v > prev);
            prev = v;
        }
        for d in [1.2, 1.5, 2.0] {
            let mut prev = f64::INFINITY;
            for i in 1..100 {
                let v = exceptional_bound(d, 1.0 + 0.01 * i as f64).unwrap();
                assert!(v < prev);
                prev = v;
            }
        }
    }
}
