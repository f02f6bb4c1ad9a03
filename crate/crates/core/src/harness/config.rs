use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fractals::CurveSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ViewpointMode {
    /// Regular grid over `region`, row by row from the bottom left.
    Grid,
    /// Uniform in `region`.
    Random,
    /// Uniform in the annulus around the curve centroid with radii `ring_radii`.
    Ring,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewpointConfig {
    pub mode: ViewpointMode,
    pub count: usize,
    /// `[xmin, ymin, xmax, ymax]`; defaults to the curve's bounding box
    /// grown by one diameter on each side.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<[f64; 4]>,
    /// `[inner, outer]` distances from the centroid; defaults to
    /// `[diam, 3 * diam]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ring_radii: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "policy")]
pub enum ScalePolicy {
    /// From four times the curve's shortest segment to a quarter of its diameter.
    Curve,
    Explicit {
        min: f64,
        max: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    #[serde(default = "default_scale_policy")]
    pub scale: ScalePolicy,
    /// Minimum number of dyadic scales; every dyadic scale in the window is used.
    #[serde(default = "default_n_scales")]
    pub n_scales: usize,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            scale: default_scale_policy(),
            n_scales: default_n_scales(),
        }
    }
}

fn default_scale_policy() -> ScalePolicy {
    ScalePolicy::Curve
}

fn default_n_scales() -> usize {
    4
}

fn default_samples() -> usize {
    20_000
}

fn default_tol() -> f64 {
    0.1
}

fn default_s_threshold() -> f64 {
    1.5
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_experiment_id() -> String {
    "sweep".to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default = "default_experiment_id")]
    pub experiment_id: String,
    pub curve: CurveSpec,
    pub viewpoints: ViewpointConfig,
    #[serde(default = "default_samples")]
    pub samples_per_visible: usize,
    #[serde(default)]
    pub estimator: EstimatorConfig,
    #[serde(default = "default_s_threshold")]
    pub s_threshold: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Worker threads; `None` uses all cores.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(curve: CurveSpec, viewpoints: ViewpointConfig) -> Self {
        ExperimentConfig {
            experiment_id: default_experiment_id(),
            curve,
            viewpoints,
            samples_per_visible: default_samples(),
            estimator: EstimatorConfig::default(),
            s_threshold: default_s_threshold(),
            tol: default_tol(),
            seed: 0,
            output_dir: default_output_dir(),
            workers: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: ExperimentConfig = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let v = &self.viewpoints;
        if v.count == 0 {
            return Err(Error::invalid("viewpoint count must be at least 1"));
        }
        if let Some([x0, y0, x1, y1]) = v.region {
            if ![x0, y0, x1, y1].iter().all(|c| c.is_finite()) || !(x1 > x0 && y1 > y0) {
                return Err(Error::invalid(
                    "viewpoint region must be [xmin, ymin, xmax, ymax] with positive extent",
                ));
            }
        }
        if let Some([r0, r1]) = v.ring_radii {
            if !(r0 > 0.0 && r1 >= r0 && r1.is_finite()) {
                return Err(Error::invalid("ring radii must satisfy 0 < inner <= outer"));
            }
        }
        if self.samples_per_visible < 2 {
            return Err(Error::invalid("samples_per_visible must be at least 2"));
        }
        if self.estimator.n_scales < 4 {
            return Err(Error::invalid("estimator n_scales must be at least 4"));
        }
        if let ScalePolicy::Explicit { min, max } = self.estimator.scale {
            if !(min > 0.0 && max > min && max.is_finite()) {
                return Err(Error::invalid("explicit scale window needs 0 < min < max"));
            }
        }
        if !(self.s_threshold > 1.0 && self.s_threshold < 2.0) {
            return Err(Error::invalid(format!(
                "s_threshold must lie in (1, 2), got {}",
                self.s_threshold
            )));
        }
        if !(self.tol >= 0.0 && self.tol.is_finite()) {
            return Err(Error::invalid("tol must be non-negative"));
        }
        if self.workers == Some(0) {
            return Err(Error::invalid("workers must be at least 1"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "curve": {"kind": "koch", "target_dim": 1.5, "level": 5},
        "viewpoints": {"mode": "ring", "count": 10}
    }"#;

    #[test]
    fn defaults_fill_in() {
        let c = ExperimentConfig::from_json(MINIMAL).unwrap();
        assert_eq!(c.samples_per_visible, 20_000);
        assert_eq!(c.tol, 0.1);
        assert_eq!(c.estimator.scale, ScalePolicy::Curve);
        assert_eq!(c.estimator.n_scales, 4);
        assert_eq!(c.viewpoints.ring_radii, None);
    }

    #[test]
    fn json_round_trip() {
        let mut c = ExperimentConfig::from_json(MINIMAL).unwrap();
        c.estimator.scale = ScalePolicy::Explicit {
            min: 0.01,
            max: 0.2,
        };
        c.workers = Some(3);
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(ExperimentConfig::from_json(&text).unwrap(), c);
    }

    #[test]
    fn rejects_invalid() {
        let base = ExperimentConfig::from_json(MINIMAL).unwrap();
        let mut c = base.clone();
        c.viewpoints.count = 0;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.viewpoints.ring_radii = Some([0.0, 1.0]);
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.s_threshold = 2.0;
        assert!(c.validate().is_err());
        let mut c = base;
        c.estimator.n_scales = 3;
        assert!(c.validate().is_err());
        assert!(ExperimentConfig::from_json("{}").is_err());
    }
}
