//! Profile files.
//!
//! ```json
//! {"components": [{"gamma": [1.0, 0.0], "weight": [1.0, 0.0]}],
//!  "n": 16, "k": 1, "w_max": 120, "grid": {"step": 0.02, "target_tail": 1e-10}}
//! ```
//! `w_max` and `grid` (and each of its fields) are optional.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use definetti_core::weight_basis::{Component, SuperpositionProfile};

use crate::{CliError, CliResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentSpec {
    pub gamma: [f64; 2],
    pub weight: [f64; 2],
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_tail: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileFile {
    pub components: Vec<ComponentSpec>,
    pub n: usize,
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
}

impl ProfileFile {
    pub fn parse(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("malformed profile: {e}")))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn profile(&self) -> CliResult<SuperpositionProfile> {
        let comps = self
            .components
            .iter()
            .map(|c| {
                Component::new(
                    Complex64::new(c.gamma[0], c.gamma[1]),
                    Complex64::new(c.weight[0], c.weight[1]),
                )
            })
            .collect();
        Ok(SuperpositionProfile::new(comps)?)
    }

    pub fn step(&self) -> Option<f64> {
        self.grid.as_ref().and_then(|g| g.step)
    }

    pub fn target_tail(&self) -> Option<f64> {
        self.grid.as_ref().and_then(|g| g.target_tail)
    }
}

/// Two Gaussian peaks sampled along the line through their centers.
///
/// Each peak gets `samples` midpoint nodes over ±3σ, weighted by
/// e^{−t²/(2σ²)}·Δt. One sample per peak gives the discrete two-component cat.
pub fn gaussian_components(
    center1: Complex64,
    center2: Complex64,
    sigma: f64,
    samples: usize,
) -> CliResult<Vec<ComponentSpec>> {
    if samples == 0 {
        return Err(CliError::Input("samples must be >= 1".into()));
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(CliError::Input(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    let diff = center2 - center1;
    let dir = if diff.norm() > 0.0 {
        diff / diff.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    let dt = 6.0 * sigma / samples as f64;
    let mut out = Vec::with_capacity(2 * samples);
    for center in [center1, center2] {
        for i in 0..samples {
            let t = -3.0 * sigma + (i as f64 + 0.5) * dt;
            let g = center + dir * t;
            let w = (-t * t / (2.0 * sigma * sigma)).exp() * dt;
            out.push(ComponentSpec {
                gamma: [g.re, g.im],
                weight: [w, 0.0],
            });
        }
    }
    Ok(out)
}
