//! Single truncated bosonic mode: number basis |0⟩..|d−1⟩, coherent
//! amplitudes, the ladder operator and displacements.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use statrs::function::factorial::ln_factorial as ln_fact_u64;

use crate::error::{invalid, Result};

/// Largest truncation the default chooser will return.
pub const MAX_AUTO_DIM: usize = 512;

/// Tail target for [`choose_dim`].
pub const AUTO_DIM_TAIL: f64 = 1e-14;

/// ln(n!) via log-gamma.
#[inline]
pub fn ln_factorial(n: usize) -> f64 {
    ln_fact_u64(n as u64)
}

/// Amplitude vector of one truncated mode; index i holds the amplitude of |i⟩.
#[derive(Clone, Debug, PartialEq)]
pub struct FockVector {
    amps: Vec<Complex64>,
}

impl FockVector {
    pub fn new(amps: Vec<Complex64>) -> Result<Self> {
        if amps.is_empty() {
            return invalid("fock vector needs dim >= 1");
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return invalid("fock vector has non-finite amplitude");
        }
        Ok(Self { amps })
    }

    /// Number state |i⟩ truncated to `dim`.
    pub fn basis(i: usize, dim: usize) -> Result<Self> {
        if i >= dim {
            return invalid(format!("basis index {i} outside dim {dim}"));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[i] = Complex64::new(1.0, 0.0);
        Ok(Self { amps })
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amps(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// ⟨self|other⟩ over the common leading components.
    pub fn inner(&self, other: &FockVector) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

/// Square operator on one truncated mode.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeOperator {
    entries: DMatrix<Complex64>,
}

impl ModeOperator {
    pub fn from_matrix(entries: DMatrix<Complex64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() || entries.nrows() == 0 {
            return invalid("mode operator must be square and non-empty");
        }
        if entries
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return invalid("mode operator has non-finite entries");
        }
        Ok(Self { entries })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            entries: DMatrix::identity(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.entries
    }

    pub fn apply(&self, v: &FockVector) -> Result<FockVector> {
        if v.dim() != self.dim() {
            return invalid(format!(
                "dimension mismatch: operator {} vs vector {}",
                self.dim(),
                v.dim()
            ));
        }
        let d = self.dim();
        let amps = (0..d)
            .map(|i| (0..d).map(|j| self.entries[(i, j)] * v.amps[j]).sum())
            .collect();
        Ok(FockVector { amps })
    }
}

fn check_finite(alpha: Complex64) -> Result<()> {
    if alpha.re.is_finite() && alpha.im.is_finite() {
        Ok(())
    } else {
        invalid(format!("non-finite coherent amplitude {alpha}"))
    }
}

/// Amplitudes e^{−|α|²/2} αⁱ/√(i!) for i < d, assembled in log-magnitude form.
pub fn coherent_amplitudes(alpha: Complex64, d: usize) -> Result<FockVector> {
    check_finite(alpha)?;
    if d == 0 {
        return invalid("truncation d must be >= 1");
    }
    let mut amps = vec![Complex64::new(0.0, 0.0); d];
    let r = alpha.norm();
    if r == 0.0 {
        amps[0] = Complex64::new(1.0, 0.0);
        return Ok(FockVector { amps });
    }
    let ln_r = r.ln();
    let phase = alpha.arg();
    let base = -0.5 * r * r;
    for (i, a) in amps.iter_mut().enumerate() {
        let ln_mag = base + i as f64 * ln_r - 0.5 * ln_factorial(i);
        *a = Complex64::from_polar(ln_mag.exp(), i as f64 * phase);
    }
    Ok(FockVector { amps })
}

/// Lowering operator a|j⟩ = √j |j−1⟩ on d levels.
pub fn annihilation(d: usize) -> Result<ModeOperator> {
    if d < 2 {
        return invalid(format!("annihilation needs d >= 2, got {d}"));
    }
    let mut m = DMatrix::zeros(d, d);
    for i in 1..d {
        m[(i - 1, i)] = Complex64::new((i as f64).sqrt(), 0.0);
    }
    Ok(ModeOperator { entries: m })
}

/// Working dimension used to build the d×d block of D(α).
pub fn padded_dim(alpha: Complex64, d: usize) -> usize {
    d + (10.0 * alpha.norm_sqr()).ceil() as usize + 20
}

/// Top-left d×d block of D(α) = exp(α a† − ᾱ a).
///
/// The generator is built at [`padded_dim`] levels and exponentiated through
/// the eigendecomposition of the Hermitian matrix i(α a† − ᾱ a); the result is
/// cropped back to d.
pub fn displacement_matrix(alpha: Complex64, d: usize) -> Result<ModeOperator> {
    check_finite(alpha)?;
    if d == 0 {
        return invalid("truncation d must be >= 1");
    }
    if alpha == Complex64::new(0.0, 0.0) {
        return Ok(ModeOperator::identity(d));
    }
    let p = padded_dim(alpha, d);
    let i = Complex64::new(0.0, 1.0);
    // H = i(α a† − ᾱ a), Hermitian.
    let mut h = DMatrix::<Complex64>::zeros(p, p);
    for j in 1..p {
        let s = (j as f64).sqrt();
        // ⟨j|a†|j−1⟩ = √j, ⟨j−1|a|j⟩ = √j
        h[(j, j - 1)] = i * alpha * s;
        h[(j - 1, j)] = -i * alpha.conj() * s;
    }
    let eig = SymmetricEigen::new(h);
    let v = &eig.eigenvectors;
    let phases: Vec<Complex64> = eig
        .eigenvalues
        .iter()
        .map(|&lam| Complex64::from_polar(1.0, -lam))
        .collect();
    let mut out = DMatrix::<Complex64>::zeros(d, d);
    for r in 0..d {
        for c in 0..d {
            let mut acc = Complex64::new(0.0, 0.0);
            for (m, ph) in phases.iter().enumerate() {
                acc += v[(r, m)] * ph * v[(c, m)].conj();
            }
            out[(r, c)] = acc;
        }
    }
    Ok(ModeOperator { entries: out })
}

/// Poisson upper tail P(X ≥ d) for mean `lambda`.
pub fn poisson_tail(lambda: f64, d: usize) -> f64 {
    if d == 0 {
        return 1.0;
    }
    if lambda <= 0.0 {
        return 0.0;
    }
    let ln_l = lambda.ln();
    let term = |i: usize| (-lambda + i as f64 * ln_l - ln_factorial(i)).exp();
    let t = if d as f64 > lambda {
        // terms decrease from i = d onwards
        let mut sum = 0.0;
        let mut t = term(d);
        let mut i = d;
        while t > 0.0 && t > sum * 1e-18 {
            sum += t;
            i += 1;
            t *= lambda / i as f64;
        }
        sum
    } else {
        1.0 - (0..d).map(term).sum::<f64>()
    };
    t.clamp(0.0, 1.0)
}

/// Mass Σ_{i ≥ d} e^{−|α|²}|α|^{2i}/i! that a d-level truncation discards.
pub fn tail(alpha: Complex64, d: usize) -> Result<f64> {
    check_finite(alpha)?;
    if d == 0 {
        return invalid("truncation d must be >= 1");
    }
    Ok(poisson_tail(alpha.norm_sqr(), d))
}

/// Smallest d with tail(α, d) ≤ 1e−14 for |α| = `max_abs_alpha`, capped at 512.
pub fn choose_dim(max_abs_alpha: f64) -> usize {
    let lambda = max_abs_alpha * max_abs_alpha;
    (1..=MAX_AUTO_DIM)
        .find(|&d| poisson_tail(lambda, d) <= AUTO_DIM_TAIL)
        .unwrap_or(MAX_AUTO_DIM)
}
