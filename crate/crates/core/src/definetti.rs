//! The approximating mixture and its trace-distance report.
//!
//! For |Ψ⟩ ∈ 𝒞ₙ and a node α, the conditional state on the first k modes is
//! |Ψₖ^α⟩ = √((n−k)/π) (I_k ⊗ ⟨α|^{⊗(n−k)})|Ψ⟩ and ρₖ^α = |Ψₖ^α⟩⟨Ψₖ^α|.
//! These integrate to the reduced state. Projecting each onto
//! P^α = (|α⟩⟨α|)^{⊗k} gives the weight ν(α) = tr(P^α ρₖ^α) of the product
//! state (|α⟩⟨α|)^{⊗k} in the mixture. All vectors live in the weight basis
//! |j⟩ₖ, j ≤ w_max.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen, SVD};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::par;
use crate::quadrature::{richardson_report, GridMeta, PhaseSpaceGrid};
use crate::weight_basis::{
    coherent_row, hermiticity_defect, reduced_state_with, CoherentPowerState, SplitTable,
    WeightDensityOperator,
};

/// Negative ν values down to this are clamped to zero.
pub const NU_CLAMP: f64 = 1e-12;

/// Input to [`trace_norm`] must be Hermitian to this absolute tolerance.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Eigenvalues below this fraction of the largest entry count as zero.
pub const EIG_CUTOFF: f64 = 1e-13;

/// Slack added to every bound comparison.
pub const BOUND_SLACK: f64 = 1e-9;

/// A quadrature error above this fraction of 1.5·k/n raises the warning flag.
pub const QUAD_WARN_FRACTION: f64 = 0.1;

fn check_k(psi: &CoherentPowerState, k: usize) -> Result<()> {
    if k == 0 || k >= psi.n() {
        return invalid(format!("need 1 <= k < n, got n={}, k={k}", psi.n()));
    }
    Ok(())
}

/// |Ψₖ^α⟩ in the |j⟩ₖ basis (unnormalized).
pub fn conditional_state(
    psi: &CoherentPowerState,
    k: usize,
    alpha: Complex64,
) -> Result<Vec<Complex64>> {
    check_k(psi, k)?;
    let table = SplitTable::new(psi.n(), k, psi.w_max())?;
    conditional_with(psi, k, &table, alpha)
}

fn conditional_with(
    psi: &CoherentPowerState,
    k: usize,
    table: &SplitTable,
    alpha: Complex64,
) -> Result<Vec<Complex64>> {
    let n = psi.n();
    let wm = psi.w_max();
    let c = psi.coeffs();
    // ⟨α|^{⊗(n−k)}|m⟩_{n−k}
    let row = coherent_row(alpha, n - k, wm)?;
    let pref = ((n - k) as f64 / PI).sqrt();
    Ok((0..=wm)
        .map(|j| {
            let mut s = Complex64::new(0.0, 0.0);
            for w in j..=wm {
                s += c[w] * table.get(w, j) * row[w - j];
            }
            s * pref
        })
        .collect())
}

/// ν sampled on a grid.
#[derive(Clone, Debug)]
pub struct DeFinettiMeasure {
    grid: PhaseSpaceGrid,
    nu: Vec<f64>,
    total_mass: f64,
}

impl DeFinettiMeasure {
    /// Clamps values in [−1e−12, 0) to zero; rejects anything more negative.
    pub fn new(grid: PhaseSpaceGrid, nu: Vec<f64>) -> Result<Self> {
        if nu.len() != grid.len() {
            return invalid(format!(
                "{} density values for {} nodes",
                nu.len(),
                grid.len()
            ));
        }
        if let Some(v) = nu.iter().find(|v| !v.is_finite() || **v < -NU_CLAMP) {
            return invalid(format!("density value {v} is negative or non-finite"));
        }
        let nu: Vec<f64> = nu.into_iter().map(|v| v.max(0.0)).collect();
        let weights = grid.weights();
        let total_mass = par::chunked_reduce(
            nu.len(),
            1,
            || 0.0,
            |a, i| *a += weights[i] * nu[i],
            |a, b| a + b,
        );
        Ok(Self {
            grid,
            nu,
            total_mass,
        })
    }

    pub fn grid(&self) -> &PhaseSpaceGrid {
        &self.grid
    }

    pub fn nu(&self) -> &[f64] {
        &self.nu
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }
}

/// ν(αᵢ) = |⟨αᵢ|^{⊗k}|Ψₖ^{αᵢ}⟩|² at every node.
pub fn measure_nu(
    psi: &CoherentPowerState,
    k: usize,
    grid: &PhaseSpaceGrid,
) -> Result<DeFinettiMeasure> {
    check_k(psi, k)?;
    let table = SplitTable::new(psi.n(), k, psi.w_max())?;
    let nodes = grid.nodes();
    let nu = par::map_indexed(nodes.len(), |i| node_nu(psi, k, &table, nodes[i]));
    let nu = nu.into_iter().collect::<Result<Vec<_>>>()?;
    DeFinettiMeasure::new(grid.clone(), nu)
}

fn node_nu(
    psi: &CoherentPowerState,
    k: usize,
    table: &SplitTable,
    alpha: Complex64,
) -> Result<f64> {
    let v = conditional_with(psi, k, table, alpha)?;
    let bra = coherent_row(alpha, k, psi.w_max())?;
    Ok(bra
        .iter()
        .zip(&v)
        .map(|(a, b)| a * b)
        .sum::<Complex64>()
        .norm_sqr())
}

/// Σᵢ wᵢ νᵢ (|αᵢ⟩⟨αᵢ|)^{⊗k} in the |j⟩ₖ basis, j ≤ w_max.
pub fn mixture_state(
    measure: &DeFinettiMeasure,
    k: usize,
    w_max: usize,
) -> Result<WeightDensityOperator> {
    if k == 0 {
        return invalid("mixture needs k >= 1");
    }
    let dim = w_max + 1;
    let grid = measure.grid();
    let (nodes, weights) = (grid.nodes(), grid.weights());
    let acc = par::chunked_reduce(
        nodes.len(),
        dim * dim,
        || DMatrix::<Complex64>::zeros(dim, dim),
        |acc, i| {
            let s = weights[i] * measure.nu[i];
            if s == 0.0 {
                return;
            }
            let ket = ket_row(nodes[i], k, w_max);
            rank_one_update(acc, s, &ket, &ket);
        },
        |a, b| a + b,
    );
    WeightDensityOperator::new(k, acc)
}

/// ⟨j|α^{⊗k}⟩ for j ≤ w_max.
fn ket_row(alpha: Complex64, k: usize, w_max: usize) -> Vec<Complex64> {
    coherent_row(alpha, k, w_max)
        .expect("finite grid node")
        .into_iter()
        .map(|z| z.conj())
        .collect()
}

/// acc += s · x y†.
fn rank_one_update(acc: &mut DMatrix<Complex64>, s: f64, x: &[Complex64], y: &[Complex64]) {
    let dim = x.len();
    let data = acc.as_mut_slice();
    for (c, yc) in y.iter().enumerate() {
        let yc = yc.conj() * s;
        let col = &mut data[c * dim..(c + 1) * dim];
        for (o, xr) in col.iter_mut().zip(x) {
            *o += xr * yc;
        }
    }
}

/// Σ|λᵢ| of a Hermitian matrix.
pub fn trace_norm(m: &DMatrix<Complex64>) -> Result<f64> {
    if m.nrows() != m.ncols() {
        return invalid("trace norm of a non-square matrix");
    }
    let defect = hermiticity_defect(m);
    if !(defect <= HERMITIAN_TOL) {
        return invalid(format!("matrix is not Hermitian (defect {defect:e})"));
    }
    let h = DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| {
        0.5 * (m[(i, j)] + m[(j, i)].conj())
    });
    let scale = h.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let cut = EIG_CUTOFF * scale;
    Ok(SymmetricEigen::new(h)
        .eigenvalues
        .iter()
        .map(|l| l.abs())
        .filter(|&l| l >= cut)
        .sum())
}

/// Σ singular values, for the not-necessarily-Hermitian decomposition terms.
pub fn nuclear_norm(m: &DMatrix<Complex64>) -> f64 {
    SVD::new(m.clone(), false, false).singular_values.sum()
}

/// Σᵢ wᵢ ρₖ^{αᵢ}, which should reproduce the reduced state.
pub fn integrated_conditional(
    psi: &CoherentPowerState,
    k: usize,
    grid: &PhaseSpaceGrid,
) -> Result<WeightDensityOperator> {
    check_k(psi, k)?;
    let table = SplitTable::new(psi.n(), k, psi.w_max())?;
    let dim = psi.w_max() + 1;
    let (nodes, weights) = (grid.nodes(), grid.weights());
    let acc = par::chunked_reduce(
        nodes.len(),
        dim * dim,
        || DMatrix::<Complex64>::zeros(dim, dim),
        |acc, i| {
            let v = conditional_with(psi, k, &table, nodes[i]).expect("finite grid node");
            rank_one_update(acc, weights[i], &v, &v);
        },
        |a, b| a + b,
    );
    WeightDensityOperator::new(k, acc)
}

/// One verification run.
#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub n: usize,
    pub k: usize,
    pub w_max: usize,
    pub nodes: usize,
    /// Σ|λ| of ρ_red − σ.
    pub delta_full: f64,
    /// delta_full / 2.
    pub delta_half: f64,
    pub zeta: f64,
    pub eta: f64,
    pub theta: f64,
    /// 1.5·k/n
    pub bound_paper: f64,
    /// 3·k/n
    pub bound_conservative: f64,
    /// |Σ wν − (n−k)/n·‖Ψ‖²| plus the mixture mass lost above w_max.
    pub mass_error: f64,
    /// Richardson estimate for the ν mass.
    pub quad_error: f64,
    pub total_mass: f64,
    pub expected_mass: f64,
    /// tr ρ_red.
    pub trace_reduced: f64,
    /// ‖Σᵢ wᵢ ρₖ^{αᵢ} − ρ_red‖₁.
    pub completeness_error: f64,
    pub weight_tail: f64,
    pub conservative_bound_holds: bool,
    pub half_bound_holds: bool,
    pub decomposition_holds: bool,
    pub quad_warning: bool,
    pub grid: GridMeta,
}

struct NodeSums {
    integrated: DMatrix<Complex64>,
    projected: DMatrix<Complex64>,
    straddled: DMatrix<Complex64>,
    mixture: DMatrix<Complex64>,
    mass: f64,
}

impl NodeSums {
    fn zeros(dim: usize) -> Self {
        Self {
            integrated: DMatrix::zeros(dim, dim),
            projected: DMatrix::zeros(dim, dim),
            straddled: DMatrix::zeros(dim, dim),
            mixture: DMatrix::zeros(dim, dim),
            mass: 0.0,
        }
    }

    fn add(mut self, o: Self) -> Self {
        self.integrated += o.integrated;
        self.projected += o.projected;
        self.straddled += o.straddled;
        self.mixture += o.mixture;
        self.mass += o.mass;
        self
    }
}

/// Builds ρ_red, the mixture and the ζ/η/θ terms, and checks the bounds.
pub fn verify_bound(
    psi: &CoherentPowerState,
    k: usize,
    grid: &PhaseSpaceGrid,
) -> Result<BoundReport> {
    check_k(psi, k)?;
    let n = psi.n();
    let wm = psi.w_max();
    let dim = wm + 1;
    let table = SplitTable::new(n, k, wm)?;
    let rho = reduced_state_with(psi, k, &table);
    let (nodes, weights) = (grid.nodes(), grid.weights());

    let sums = par::chunked_reduce(
        nodes.len(),
        4 * dim * dim,
        || NodeSums::zeros(dim),
        |acc, i| {
            let alpha = nodes[i];
            let w = weights[i];
            let v = conditional_with(psi, k, &table, alpha).expect("finite grid node");
            let e = ket_row(alpha, k, wm);
            // ⟨α^k|Ψₖ^α⟩
            let overlap: Complex64 = e.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            let nu = overlap.norm_sqr();
            // P^α ρ^α = ⟨e|v⟩ |e⟩⟨v|
            let pe: Vec<Complex64> = e.iter().map(|z| z * overlap).collect();
            // (I − P^α)|v⟩
            let u: Vec<Complex64> = v.iter().zip(&pe).map(|(a, b)| a - b).collect();
            rank_one_update(&mut acc.integrated, w, &v, &v);
            rank_one_update(&mut acc.projected, w, &pe, &v);
            rank_one_update(&mut acc.straddled, w, &u, &u);
            rank_one_update(&mut acc.mixture, w * nu, &e, &e);
            acc.mass += w * nu;
        },
        NodeSums::add,
    );

    let rho_m = rho.matrix();
    let delta_full = trace_norm(&(rho_m - &sums.mixture))?;
    let zeta = nuclear_norm(&(rho_m - &sums.projected));
    let eta = nuclear_norm(&(rho_m - sums.projected.adjoint()));
    let theta = trace_norm(&sums.straddled)?;
    let completeness_error = trace_norm(&(&sums.integrated - rho_m))?;

    let trace_reduced = rho.trace();
    let expected_mass = (n - k) as f64 / n as f64 * psi.norm_sqr();
    let mixture_trace: f64 = sums.mixture.diagonal().iter().map(|z| z.re).sum();
    let mass_error = (sums.mass - expected_mass).abs() + (sums.mass - mixture_trace).abs();

    let quad = richardson_report(
        |g: &PhaseSpaceGrid| measure_nu(psi, k, g).map(|m| m.total_mass()),
        grid,
    )?;
    let quad_error = quad.error_estimate;

    let ratio = k as f64 / n as f64;
    let bound_paper = 1.5 * ratio;
    let bound_conservative = 3.0 * ratio;
    let delta_half = delta_full / 2.0;
    Ok(BoundReport {
        n,
        k,
        w_max: wm,
        nodes: grid.len(),
        delta_full,
        delta_half,
        zeta,
        eta,
        theta,
        bound_paper,
        bound_conservative,
        mass_error,
        quad_error,
        total_mass: sums.mass,
        expected_mass,
        trace_reduced,
        completeness_error,
        weight_tail: psi.weight_tail(),
        conservative_bound_holds: delta_full <= bound_conservative + quad_error + BOUND_SLACK,
        half_bound_holds: delta_half <= bound_paper,
        decomposition_holds: delta_full <= zeta + eta + theta + BOUND_SLACK,
        quad_warning: quad_error > QUAD_WARN_FRACTION * bound_paper,
        grid: grid.meta().clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::coherent_amplitudes;
    use crate::oracle::tensor_power;
    use crate::quadrature::{cartesian_grid, profile_adapted_grid, DEFAULT_TARGET_TAIL};
    use crate::weight_basis::{reduced_state, Component, SuperpositionProfile};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn single(gamma: Complex64) -> SuperpositionProfile {
        SuperpositionProfile::new(vec![Component::new(gamma, c(1.0, 0.0))]).unwrap()
    }

    // Well above the automatic cutoff so that truncation sits below 1e-12.
    fn product(beta: Complex64, n: usize) -> CoherentPowerState {
        let p = single(beta);
        CoherentPowerState::from_profile(&p, n, p.choose_w_max(n) + 25).unwrap()
    }

    #[test]
    fn vacuum_conditional_state() {
        let (n, k) = (6, 2);
        let psi = CoherentPowerState::vacuum(n, 5).unwrap();
        let alpha = c(0.4, -0.9);
        let v = conditional_state(&psi, k, alpha).unwrap();
        let want =
            ((n - k) as f64 / PI).sqrt() * (-((n - k) as f64) * alpha.norm_sqr() / 2.0).exp();
        assert!((v[0] - want).norm() < 1e-15);
        assert!(v[1..].iter().all(|z| z.norm() < 1e-15));
        assert!(conditional_state(&psi, 6, alpha).is_err());
    }

    #[test]
    fn product_conditional_state_matches_dense() {
        // ρ₁^α = (2/π) e^{−2|α−β|²} |β⟩⟨β| at n = 3, checked on dense vectors
        let (n, k, d) = (3usize, 1usize, 16usize);
        let beta = c(0.5, 0.2);
        let psi = product(beta, n);
        let dense = tensor_power(&coherent_amplitudes(beta, d).unwrap(), n).unwrap();
        for alpha in [c(0.0, 0.0), c(0.7, -0.3), c(-0.2, 0.9)] {
            let a = coherent_amplitudes(alpha, d).unwrap();
            let pref = ((n - k) as f64 / PI).sqrt();
            let mut dense_v = vec![c(0.0, 0.0); d];
            for (x, slot) in dense_v.iter_mut().enumerate() {
                for y in 0..d {
                    for z in 0..d {
                        *slot += a.amps()[y].conj()
                            * a.amps()[z].conj()
                            * dense.amps()[x * d * d + y * d + z];
                    }
                }
            }
            let v = conditional_state(&psi, k, alpha).unwrap();
            let b = coherent_amplitudes(beta, d).unwrap();
            let scale = (n - k) as f64 / PI * (-((n - k) as f64) * (alpha - beta).norm_sqr()).exp();
            for x in 0..d {
                assert!(
                    (v[x] - dense_v[x] * pref).norm() < 1e-12,
                    "x={x}: {} vs {}",
                    v[x],
                    dense_v[x] * pref
                );
                for y in 0..d {
                    let closed = b.amps()[x] * b.amps()[y].conj() * scale;
                    assert!((v[x] * v[y].conj() - closed).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn measure_closed_form_for_product() {
        let (n, k) = (8usize, 1usize);
        let beta = c(0.5, 0.0);
        let psi = product(beta, n);
        let grid = profile_adapted_grid(&single(beta), n, k, DEFAULT_TARGET_TAIL).unwrap();
        let m = measure_nu(&psi, k, &grid).unwrap();
        for (a, nu) in grid.nodes().iter().zip(m.nu()) {
            let want = (n - k) as f64 / PI * (-(n as f64) * (a - beta).norm_sqr()).exp();
            assert!((nu - want).abs() <= 1e-8);
        }
        assert!((m.total_mass() - 7.0 / 8.0).abs() <= 1e-6);
    }

    #[test]
    fn measure_for_vacuum() {
        let (n, k) = (5usize, 2usize);
        let psi = CoherentPowerState::vacuum(n, 0).unwrap();
        let grid = cartesian_grid(c(0.0, 0.0), 1.0, 0.25).unwrap();
        let m = measure_nu(&psi, k, &grid).unwrap();
        for (a, nu) in grid.nodes().iter().zip(m.nu()) {
            let want = (n - k) as f64 / PI * (-(n as f64) * a.norm_sqr()).exp();
            assert!((nu - want).abs() < 1e-14);
        }
    }

    #[test]
    fn measure_rejects_negative_density() {
        let grid = cartesian_grid(c(0.0, 0.0), 0.1, 0.2).unwrap();
        assert!(DeFinettiMeasure::new(grid.clone(), vec![-1e-3]).is_err());
        let m = DeFinettiMeasure::new(grid, vec![-1e-13]).unwrap();
        assert_eq!(m.nu()[0], 0.0);
    }

    #[test]
    fn point_mass_mixture() {
        let h = 0.5;
        let grid = cartesian_grid(c(0.0, 0.0), 0.1, h).unwrap();
        let m = DeFinettiMeasure::new(grid, vec![1.0 / (h * h)]).unwrap();
        let mix = mixture_state(&m, 3, 4).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let want = if i == 0 && j == 0 { 1.0 } else { 0.0 };
                assert!((mix.matrix()[(i, j)] - want).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn product_mixture_trace() {
        let (n, k) = (8usize, 2usize);
        let beta = c(-0.3, 0.4);
        let psi = product(beta, n);
        let grid = profile_adapted_grid(&single(beta), n, k, DEFAULT_TARGET_TAIL).unwrap();
        let m = measure_nu(&psi, k, &grid).unwrap();
        let mix = mixture_state(&m, k, psi.w_max()).unwrap();
        assert!((mix.trace() - (n - k) as f64 / n as f64).abs() < 1e-8);
        assert!((mix.trace() - m.total_mass()).abs() < 1e-12);
    }

    #[test]
    fn trace_norm_examples() {
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            c(0.5, 0.0),
            c(-0.5, 0.0),
        ]));
        assert!((trace_norm(&d).unwrap() - 1.0).abs() < 1e-15);

        let psi = product(c(0.3, 0.1), 4);
        let rho = reduced_state(&psi, 2).unwrap();
        assert!((trace_norm(rho.matrix()).unwrap() - 1.0).abs() < 1e-9);

        let bad =
            DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(trace_norm(&bad).is_err());
    }

    #[test]
    fn trace_norm_of_pure_state_difference() {
        let a = [c(0.6, 0.0), c(0.0, 0.8), c(0.0, 0.0)];
        let b = [c(0.5, 0.5), c(0.5, 0.0), c(0.0, 0.5)];
        let outer = |x: &[Complex64]| DMatrix::from_fn(3, 3, |i, j| x[i] * x[j].conj());
        let ip: Complex64 = a.iter().zip(&b).map(|(x, y)| x.conj() * y).sum();
        let want = 2.0 * (1.0 - ip.norm_sqr()).sqrt();
        let got = trace_norm(&(outer(&a) - outer(&b))).unwrap();
        assert!((got - want).abs() < 1e-14);
        assert!((nuclear_norm(&(outer(&a) - outer(&b))) - want).abs() < 1e-14);
    }

    #[test]
    fn product_state_report() {
        // For k = 1 and Ψ = |β⟩^{⊗n} the mixture is the displaced thermal state
        // ((n−1)/(n+1)) Σⱼ (n+1)^{−j} |j⟩⟨j|, giving Δ = (3n−1)/(n(n+1)).
        let beta = c(0.5, 0.0);
        for n in [4usize, 8, 16] {
            let k = 1;
            let psi = product(beta, n);
            let grid = profile_adapted_grid(&single(beta), n, k, DEFAULT_TARGET_TAIL).unwrap();
            let r = verify_bound(&psi, k, &grid).unwrap();
            let nf = n as f64;
            let closed = (3.0 * nf - 1.0) / (nf * (nf + 1.0));
            assert!(
                (r.delta_full - closed).abs() < 1e-8,
                "n={n}: {} vs {closed}",
                r.delta_full
            );
            assert!(r.delta_full <= 3.0 / nf + 1e-6);
            assert_eq!(r.delta_half, r.delta_full / 2.0);
            assert!((r.zeta - r.trace_reduced / nf).abs() < 1e-8);
            assert!((r.zeta - r.eta).abs() <= 1e-12);
            assert!(r.theta >= 0.0 && r.theta <= r.trace_reduced / nf + r.quad_error + 1e-9);
            assert!(r.decomposition_holds && r.conservative_bound_holds && r.half_bound_holds);
            assert!(r.completeness_error < 1e-8);
            assert!(!r.quad_warning);
        }
    }

    #[test]
    fn completeness_for_even_cat() {
        let p = SuperpositionProfile::new(vec![
            Component::new(c(1.0, 0.0), c(1.0, 0.0)),
            Component::new(c(-1.0, 0.0), c(1.0, 0.0)),
        ])
        .unwrap();
        let (n, k) = (8usize, 1usize);
        let psi = CoherentPowerState::from_profile_auto(&p, n).unwrap();
        let grid = profile_adapted_grid(&p, n, k, DEFAULT_TARGET_TAIL).unwrap();
        let int = integrated_conditional(&psi, k, &grid).unwrap();
        let rho = reduced_state(&psi, k).unwrap();
        assert!(trace_norm(&(int.matrix() - rho.matrix())).unwrap() <= 1e-6);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn nu_nonnegative_and_mixture_psd(
            g in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0), 3),
        ) {
            let comps: Vec<Component> = g.iter().map(|&(a, b, x, y)| Component::new(c(a, b), c(x + 1.5, y))).collect();
            let p = SuperpositionProfile::new(comps).unwrap();
            let (n, k) = (6usize, 2usize);
            prop_assume!(p.norm_sqr(n) > 1e-6);
            let psi = CoherentPowerState::from_profile_auto(&p, n).unwrap();
            let grid = profile_adapted_grid(&p, n, k, 1e-8).unwrap();
            let m = measure_nu(&psi, k, &grid).unwrap();
            prop_assert!(m.nu().iter().all(|&v| v >= 0.0));
            let mix = mixture_state(&m, k, psi.w_max()).unwrap();
            prop_assert!(mix.min_eigenvalue() >= -1e-10);
            prop_assert!(mix.hermiticity_defect() <= 1e-12);
        }
    }
}
