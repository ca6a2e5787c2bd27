//! Phase-space integration ∫ d²α over ℂ on square lattices.
//!
//! Every grid is a midpoint rule: nodes sit on a lattice of spacing h and each
//! node stands for the h×h cell around it, so every weight is h². Nodes
//! outside the covered disk(s) are dropped.

use std::collections::HashSet;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::par;
use crate::weight_basis::SuperpositionProfile;

pub const DEFAULT_TARGET_TAIL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GridScheme {
    /// Single disk of radius R about one center.
    Cartesian,
    /// Union of disks about each profile component.
    ProfileAdapted,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridMeta {
    pub scheme: GridScheme,
    pub step: f64,
    /// Disk radius actually used (for adapted grids: core radius + 2h).
    pub radius: f64,
    /// Radius before the 2h margin; equals `radius` for Cartesian grids.
    pub core_radius: f64,
    pub centers: Vec<Complex64>,
}

#[derive(Clone, Debug)]
pub struct PhaseSpaceGrid {
    nodes: Vec<Complex64>,
    weights: Vec<f64>,
    meta: GridMeta,
}

impl PhaseSpaceGrid {
    pub fn nodes(&self) -> &[Complex64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn meta(&self) -> &GridMeta {
        &self.meta
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Area covered by the cells, h² × node count.
    pub fn area(&self) -> f64 {
        self.meta.step * self.meta.step * self.nodes.len() as f64
    }

    /// The same scheme at half the step.
    pub fn refined(&self) -> Result<Self> {
        let m = &self.meta;
        match m.scheme {
            GridScheme::Cartesian => cartesian_grid(m.centers[0], m.radius, 0.5 * m.step),
            GridScheme::ProfileAdapted => disk_union(&m.centers, m.core_radius, 0.5 * m.step),
        }
    }

    /// Σ_i w_i f(α_i) with the deterministic chunked reduction.
    pub fn integrate<F>(&self, f: F) -> f64
    where
        F: Fn(Complex64) -> f64 + Sync,
    {
        par::chunked_reduce(
            self.len(),
            1,
            || 0.0,
            |acc, i| *acc += self.weights[i] * f(self.nodes[i]),
            |a, b| a + b,
        )
    }
}

fn check_geometry(radius: f64, step: f64) -> Result<()> {
    if !(radius.is_finite() && radius > 0.0) {
        return invalid(format!("grid radius must be positive, got {radius}"));
    }
    if !(step.is_finite() && step > 0.0) {
        return invalid(format!("grid step must be positive, got {step}"));
    }
    Ok(())
}

/// Lattice nodes center + h(i, j) inside the closed disk of radius R.
pub fn cartesian_grid(center: Complex64, radius: f64, step: f64) -> Result<PhaseSpaceGrid> {
    check_geometry(radius, step)?;
    if !(center.re.is_finite() && center.im.is_finite()) {
        return invalid("grid center must be finite");
    }
    let span = (radius / step).floor() as i64;
    let r2 = radius * radius;
    let mut nodes = Vec::new();
    for i in -span..=span {
        for j in -span..=span {
            let off = Complex64::new(i as f64 * step, j as f64 * step);
            if off.norm_sqr() <= r2 {
                nodes.push(center + off);
            }
        }
    }
    let weights = vec![step * step; nodes.len()];
    Ok(PhaseSpaceGrid {
        nodes,
        weights,
        meta: GridMeta {
            scheme: GridScheme::Cartesian,
            step,
            radius,
            core_radius: radius,
            centers: vec![center],
        },
    })
}

/// Core radius √(ln(1/tail)/(n−k)) of the Gaussian envelope e^{−(n−k)|α−γ|²}.
pub fn adapted_core_radius(n: usize, k: usize, target_tail: f64) -> Result<f64> {
    if k == 0 || k >= n {
        return invalid(format!("need 1 <= k < n, got n={n}, k={k}"));
    }
    if !(target_tail > 0.0 && target_tail < 1.0) {
        return invalid(format!("target tail must lie in (0, 1), got {target_tail}"));
    }
    Ok(((1.0 / target_tail).ln() / (n - k) as f64).sqrt())
}

/// Largest step allowed for a core radius: h ≤ (r₀ + 2h)/20.
pub fn max_adapted_step(core_radius: f64) -> f64 {
    core_radius / 18.0
}

/// Union of disks about each component, radius r₀ + 2h, step h ≤ r/20.
pub fn profile_adapted_grid(
    profile: &SuperpositionProfile,
    n: usize,
    k: usize,
    target_tail: f64,
) -> Result<PhaseSpaceGrid> {
    profile_adapted_grid_with_step(profile, n, k, target_tail, None)
}

/// As [`profile_adapted_grid`]; a requested step is capped at r₀/18.
pub fn profile_adapted_grid_with_step(
    profile: &SuperpositionProfile,
    n: usize,
    k: usize,
    target_tail: f64,
    step: Option<f64>,
) -> Result<PhaseSpaceGrid> {
    let core = adapted_core_radius(n, k, target_tail)?;
    let cap = max_adapted_step(core);
    let h = match step {
        Some(h) => {
            check_geometry(core, h)?;
            h.min(cap)
        }
        None => cap,
    };
    let centers: Vec<Complex64> = profile.components().iter().map(|c| c.gamma).collect();
    disk_union(&centers, core, h)
}

fn disk_union(centers: &[Complex64], core_radius: f64, step: f64) -> Result<PhaseSpaceGrid> {
    check_geometry(core_radius, step)?;
    if centers.is_empty() {
        return invalid("grid needs at least one center");
    }
    let radius = core_radius + 2.0 * step;
    let r2 = radius * radius;
    // Lattice anchored at the origin so overlapping disks share nodes exactly.
    let mut seen = HashSet::new();
    let mut nodes = Vec::new();
    for c in centers {
        let (i0, i1) = (
            ((c.re - radius) / step).ceil() as i64,
            ((c.re + radius) / step).floor() as i64,
        );
        let (j0, j1) = (
            ((c.im - radius) / step).ceil() as i64,
            ((c.im + radius) / step).floor() as i64,
        );
        for i in i0..=i1 {
            for j in j0..=j1 {
                let z = Complex64::new(i as f64 * step, j as f64 * step);
                if (z - c).norm_sqr() <= r2 && seen.insert((i, j)) {
                    nodes.push(z);
                }
            }
        }
    }
    let weights = vec![step * step; nodes.len()];
    Ok(PhaseSpaceGrid {
        nodes,
        weights,
        meta: GridMeta {
            scheme: GridScheme::ProfileAdapted,
            step,
            radius,
            core_radius,
            centers: centers.to_vec(),
        },
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RichardsonReport {
    /// Value on the refined (h/2) grid.
    pub value: f64,
    /// |I_{h/2} − I_h| / 3.
    pub error_estimate: f64,
    /// Value on the original grid.
    pub coarse: f64,
}

/// Evaluates `f` on `grid` and on its h/2 refinement.
pub fn richardson_report<E, F>(
    f: F,
    grid: &PhaseSpaceGrid,
) -> std::result::Result<RichardsonReport, E>
where
    F: Fn(&PhaseSpaceGrid) -> std::result::Result<f64, E>,
    E: From<crate::Error>,
{
    let coarse = f(grid)?;
    let fine_grid = grid.refined()?;
    let value = f(&fine_grid)?;
    Ok(RichardsonReport {
        value,
        error_estimate: (value - coarse).abs() / 3.0,
        coarse,
    })
}
