//! Explicit scale and mass constants for the tube-mass and geometric
//! separation estimates, as closed-form functions of the inputs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantInputs {
    pub s: f64,
    pub xi: f64,
    pub m: f64,
    pub d_minus: f64,
    pub d_plus: f64,
    pub r1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleConstants {
    pub inputs: ConstantInputs,
    pub d0: f64,
    pub r2: f64,
    pub alpha0: f64,
    pub alpha1: f64,
    pub d1: f64,
    pub c1: f64,
    pub d2: f64,
    pub c2: f64,
}

impl ConstantInputs {
    pub fn validate(&self) -> Result<()> {
        let ConstantInputs {
            s,
            xi,
            m,
            d_minus,
            d_plus,
            r1,
        } = *self;
        if [s, xi, m, d_minus, d_plus, r1]
            .iter()
            .any(|v| !v.is_finite())
        {
            return Err(Error::invalid("constant inputs must be finite"));
        }
        if s <= 1.0 {
            return Err(Error::invalid(format!("s must exceed 1, got {s}")));
        }
        if !(xi > 0.0 && xi < s - 1.0) {
            return Err(Error::invalid(format!(
                "xi must lie in (0, s-1) = (0, {}), got {xi}",
                s - 1.0
            )));
        }
        if 2.0 + xi - s <= 0.0 {
            return Err(Error::invalid("2 + xi - s must be positive"));
        }
        if m <= 0.0 {
            return Err(Error::invalid(format!(
                "mass scale M must be positive, got {m}"
            )));
        }
        if !(r1 > 0.0 && r1 <= 1.0) {
            return Err(Error::invalid(format!("r1 must lie in (0, 1], got {r1}")));
        }
        if !(d_minus > 0.0 && d_minus <= d_plus) {
            return Err(Error::invalid(format!(
                "need 0 < d_minus <= d_plus, got {d_minus} and {d_plus}"
            )));
        }
        Ok(())
    }
}

pub fn scale_constants(
    s: f64,
    xi: f64,
    m: f64,
    d_minus: f64,
    d_plus: f64,
    r1: f64,
) -> Result<ScaleConstants> {
    let inputs = ConstantInputs {
        s,
        xi,
        m,
        d_minus,
        d_plus,
        r1,
    };
    inputs.validate()?;
    // Exponent gaps that recur throughout.
    let e = 2.0 + xi - s;
    let g = s - 1.0 - xi;
    let d0 = m / 12.0 * 2f64.powf(-s / 2.0);
    let r2 = (r1 / 2f64.sqrt())
        .min(3f64.sqrt() / 2.0 * d_minus)
        .min((d_minus / d0).powf(1.0 / e))
        .min(d0.powf(1.0 / g));
    let alpha0 = 60.0 * d_plus / d_minus;
    let alpha1 = ((alpha0 + 1.0) / d0).powf(1.0 / e);
    let d1 = (r2 / alpha1).powf(e).min(d_minus / alpha0);
    let c1 = 2f64.powf(5.0 + s / 2.0) * alpha1.powf(s - 1.0) * (d_plus / d_minus);
    let d2 = 5.0 / (2f64.powf(1.5) * alpha0) * d1;
    let c2 = 25.0
        * c1
        * d_plus
        * (4.0 * 2f64.sqrt() / 5.0).powf((1.0 + xi) / e)
        * alpha0.powf((s - 1.0) / e);
    let out = ScaleConstants {
        inputs,
        d0,
        r2,
        alpha0,
        alpha1,
        d1,
        c1,
        d2,
        c2,
    };
    let all = [d0, r2, alpha0, alpha1, d1, c1, d2, c2];
    if all.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::Degenerate(format!(
            "constants underflow or overflow: {out:?}"
        )));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn worked_example() {
        let c = scale_constants(2.0, 0.5, 12.0, 1.0, 1.0, 1.0).unwrap();
        assert!((c.d0 - 0.5).abs() < 1e-12);
        assert!((c.r2 - 0.25).abs() < 1e-12);
        assert!((c.alpha0 - 60.0).abs() < 1e-12);
        assert!((c.alpha1 - 14884.0).abs() < 1e-8);
        assert!((c.d1 - (0.25f64 / 14884.0).sqrt()).abs() < 1e-15);
        assert!((c.c1 - 952576.0).abs() < 1e-6);
    }

    #[test]
    fn small_mass_limit() {
        let mut prev = f64::INFINITY;
        for m in [1e-2, 1e-4, 1e-6] {
            let c = scale_constants(1.5, 0.2, m, 0.5, 1.0, 1.0).unwrap();
            assert!(c.d0 < prev);
            assert!(c.r2 <= c.d0.powf(1.0 / 0.3) * (1.0 + 1e-12));
            prev = c.d0;
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(scale_constants(1.0, 0.5, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(scale_constants(1.5, 0.5, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(scale_constants(1.5, 0.0, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(scale_constants(1.5, 0.2, 1.0, 2.0, 1.0, 1.0).is_err());
        assert!(scale_constants(1.5, 0.2, 1.0, 1.0, 1.0, 1.5).is_err());
        assert!(scale_constants(1.5, 0.2, 0.0, 1.0, 1.0, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn internal_orderings(
            s in 1.05f64..1.99,
            xi_frac in 0.05f64..0.95,
            m in 0.01f64..50.0,
            d_minus in 0.01f64..2.0,
            ratio in 1.0f64..5.0,
            r1 in 0.01f64..=1.0,
        ) {
            let xi = xi_frac * (s - 1.0);
            let c = scale_constants(s, xi, m, d_minus, d_minus * ratio, r1).unwrap();
            prop_assert!(c.r2 <= r1 / 2f64.sqrt());
            prop_assert!(c.d1 <= d_minus / c.alpha0);
            prop_assert!(c.d2 <= c.d1);
        }
    }
}
