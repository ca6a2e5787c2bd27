//! The coherent-power span 𝒞ₙ in its weight basis |w⟩ₙ.
//!
//! |w⟩ₙ = n^{−w/2} Σ_{y₁+…+yₙ=w} √(w!/(y₁!…yₙ!)) |y₁…yₙ⟩ is the single state of
//! total excitation w inside 𝒞ₙ, and |γ⟩^{⊗n} is the single-mode coherent
//! state of amplitude √n·γ written in these labels. Everything here costs
//! polynomially in the weight cutoff and nothing in n.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::fock::{coherent_amplitudes, ln_factorial, poisson_tail};
use crate::oracle::{Budget, DenseOperator, DenseState};

/// Components closer than this are merged.
pub const COINCIDENT_TOL: f64 = 1e-12;

/// Relative discarded mass accepted by [`CoherentPowerState::from_profile`].
pub const ACCEPT_TAIL: f64 = 1e-9;

/// Target used by [`SuperpositionProfile::choose_w_max`].
pub const CHOOSER_TAIL: f64 = 1e-10;

pub const MAX_W: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Component {
    pub gamma: Complex64,
    pub weight: Complex64,
}

impl Component {
    pub fn new(gamma: Complex64, weight: Complex64) -> Self {
        Self { gamma, weight }
    }
}

/// Finite superposition Σⱼ weightⱼ |γⱼ⟩^{⊗n} (unnormalized).
#[derive(Clone, Debug, PartialEq)]
pub struct SuperpositionProfile {
    components: Vec<Component>,
}

fn finite(z: Complex64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

impl SuperpositionProfile {
    /// Validates and merges components with coincident γ (weights summed).
    pub fn new(components: Vec<Component>) -> Result<Self> {
        if components.is_empty() {
            return invalid("profile has no components");
        }
        if components
            .iter()
            .any(|c| !finite(c.gamma) || !finite(c.weight))
        {
            return invalid("profile has non-finite entries");
        }
        if components.iter().all(|c| c.weight.norm() == 0.0) {
            return invalid("profile weights are all zero");
        }
        let mut merged: Vec<Component> = Vec::with_capacity(components.len());
        for c in components {
            match merged
                .iter_mut()
                .find(|m| (m.gamma - c.gamma).norm() <= COINCIDENT_TOL)
            {
                Some(m) => m.weight += c.weight,
                None => merged.push(c),
            }
        }
        Ok(Self { components: merged })
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn max_abs_gamma(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.gamma.norm())
            .fold(0.0, f64::max)
    }

    /// ‖Σⱼ weightⱼ |γⱼ⟩^{⊗n}‖² from the analytic overlaps ⟨γᵢ|γⱼ⟩ⁿ.
    pub fn norm_sqr(&self, n: usize) -> f64 {
        let nf = n as f64;
        let mut s = Complex64::new(0.0, 0.0);
        for a in &self.components {
            for b in &self.components {
                let ln_ov = nf
                    * (a.gamma.conj() * b.gamma
                        - 0.5 * a.gamma.norm_sqr()
                        - 0.5 * b.gamma.norm_sqr());
                s += a.weight.conj() * b.weight * ln_ov.exp();
            }
        }
        s.re
    }

    /// Upper bound on the relative mass above weight `w_max`:
    /// (Σⱼ |weightⱼ| √tail(√n γⱼ, w_max+1))² / ‖Ψ‖².
    pub fn declared_tail(&self, n: usize, w_max: usize) -> f64 {
        let norm2 = self.norm_sqr(n);
        let amp: f64 = self
            .components
            .iter()
            .map(|c| {
                c.weight.norm() * poisson_tail(n as f64 * c.gamma.norm_sqr(), w_max + 1).sqrt()
            })
            .sum();
        amp * amp / norm2
    }

    /// Smallest cutoff with declared tail ≤ 1e−10, capped at 4096.
    pub fn choose_w_max(&self, n: usize) -> usize {
        self.choose_w_max_for(n, CHOOSER_TAIL)
    }

    /// Smallest cutoff with declared tail ≤ `tail`, capped at 4096.
    ///
    /// Coefficient errors scale like √tail, so pointwise quantities such as
    /// ν need a much smaller `tail` than the default.
    pub fn choose_w_max_for(&self, n: usize, tail: f64) -> usize {
        (0..=MAX_W)
            .find(|&w| self.declared_tail(n, w) <= tail)
            .unwrap_or(MAX_W)
    }
}

/// A normalized state of 𝒞ₙ stored by its weight coefficients c₀..c_{w_max}.
#[derive(Clone, Debug, PartialEq)]
pub struct CoherentPowerState {
    n: usize,
    c: Vec<Complex64>,
}

impl CoherentPowerState {
    /// Expands `profile` in the weight basis up to `w_max`.
    ///
    /// Fails with [`Error::Truncation`] when the declared tail exceeds 1e−9.
    pub fn from_profile(profile: &SuperpositionProfile, n: usize, w_max: usize) -> Result<Self> {
        if n == 0 {
            return invalid("n must be >= 1");
        }
        let tail = profile.declared_tail(n, w_max);
        if !(tail <= ACCEPT_TAIL) {
            return Err(Error::Truncation {
                tail,
                threshold: ACCEPT_TAIL,
                required: profile.choose_w_max(n),
            });
        }
        Self::from_profile_truncated(profile, n, w_max)
    }

    /// [`Self::from_profile`] with the cutoff from [`SuperpositionProfile::choose_w_max`].
    pub fn from_profile_auto(profile: &SuperpositionProfile, n: usize) -> Result<Self> {
        Self::from_profile(profile, n, profile.choose_w_max(n))
    }

    /// Expansion without the tail check; the deficit shows up in [`Self::weight_tail`].
    pub fn from_profile_truncated(
        profile: &SuperpositionProfile,
        n: usize,
        w_max: usize,
    ) -> Result<Self> {
        if n == 0 {
            return invalid("n must be >= 1");
        }
        let norm2 = profile.norm_sqr(n);
        if !(norm2 > 0.0) || !norm2.is_finite() {
            return invalid(format!("profile state has non-positive norm {norm2:e}"));
        }
        let scale = 1.0 / norm2.sqrt();
        let sqrt_n = (n as f64).sqrt();
        let mut c = vec![Complex64::new(0.0, 0.0); w_max + 1];
        for comp in profile.components() {
            let amps = coherent_amplitudes(comp.gamma * sqrt_n, w_max + 1)?;
            for (cw, a) in c.iter_mut().zip(amps.amps()) {
                *cw += comp.weight * a * scale;
            }
        }
        Ok(Self { n, c })
    }

    pub fn from_coefficients(n: usize, c: Vec<Complex64>) -> Result<Self> {
        if n == 0 {
            return invalid("n must be >= 1");
        }
        if c.is_empty() || c.iter().any(|z| !finite(*z)) {
            return invalid("coefficients must be non-empty and finite");
        }
        let norm2: f64 = c.iter().map(|z| z.norm_sqr()).sum();
        if norm2 > 1.0 + 1e-12 {
            return invalid(format!("coefficient norm² {norm2} exceeds 1"));
        }
        Ok(Self { n, c })
    }

    /// |0⟩^{⊗n}, which is |w = 0⟩.
    pub fn vacuum(n: usize, w_max: usize) -> Result<Self> {
        let mut c = vec![Complex64::new(0.0, 0.0); w_max + 1];
        c[0] = Complex64::new(1.0, 0.0);
        Self::from_coefficients(n, c)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn w_max(&self) -> usize {
        self.c.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.c
    }

    pub fn norm_sqr(&self) -> f64 {
        self.c.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Mass lost to the weight cutoff, 1 − Σ|c_w|².
    pub fn weight_tail(&self) -> f64 {
        (1.0 - self.norm_sqr()).max(0.0)
    }

    /// Dense n-mode vector Σ_w c_w |w⟩ with letters < d (partially truncated
    /// weights allowed).
    pub fn to_dense(&self, d: usize) -> Result<DenseState> {
        let budget = Budget::current();
        let size = budget.check(d, self.n)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); size];
        for (w, cw) in self.c.iter().enumerate() {
            if cw.norm() == 0.0 {
                continue;
            }
            for_each_word_of_weight(self.n, w, d, |idx, amp| amps[idx] += cw * amp);
        }
        DenseState::new(self.n, d, amps)
    }
}

/// Calls `f(index, ⟨y|w⟩)` for every word y with Σy = w and all letters < d.
fn for_each_word_of_weight(n: usize, w: usize, d: usize, mut f: impl FnMut(usize, f64)) {
    let base = -0.5 * w as f64 * (n as f64).ln() + 0.5 * ln_factorial(w);
    let mut word = vec![0usize; n];
    // Enumerate compositions of w into n parts with parts < d, last letter implied.
    fn rec(
        pos: usize,
        remaining: usize,
        n: usize,
        d: usize,
        word: &mut Vec<usize>,
        base: f64,
        f: &mut dyn FnMut(usize, f64),
    ) {
        if pos == n - 1 {
            if remaining < d {
                word[pos] = remaining;
                let ln_amp = base - 0.5 * word.iter().map(|&y| ln_factorial(y)).sum::<f64>();
                let idx = word.iter().fold(0usize, |acc, &y| acc * d + y);
                f(idx, ln_amp.exp());
            }
            return;
        }
        for y in 0..=remaining.min(d - 1) {
            word[pos] = y;
            rec(pos + 1, remaining - y, n, d, word, base, f);
        }
    }
    rec(0, w, n, d, &mut word, base, &mut f);
}

/// Dense vector of |w⟩ₙ over d levels per mode; requires d > w.
pub fn weight_state_dense(n: usize, w: usize, d: usize) -> Result<DenseState> {
    if d <= w {
        return invalid(format!("weight {w} does not fit in {d} levels per mode"));
    }
    weight_state_dense_partial(n, w, d)
}

/// |w⟩ₙ restricted to words whose letters are all < d (not unit norm if d ≤ w).
pub fn weight_state_dense_partial(n: usize, w: usize, d: usize) -> Result<DenseState> {
    if n == 0 || d == 0 {
        return invalid("n and d must be >= 1");
    }
    let size = Budget::current().check(d, n)?;
    let mut amps = vec![Complex64::new(0.0, 0.0); size];
    for_each_word_of_weight(n, w, d, |idx, a| amps[idx] = Complex64::new(a, 0.0));
    DenseState::new(n, d, amps)
}

fn ln_binomial(w: usize, j: usize) -> f64 {
    ln_factorial(w) - ln_factorial(j) - ln_factorial(w - j)
}

/// Coefficient of |j⟩ₖ ⊗ |w−j⟩_{n−k} in |w⟩ₙ: √(C(w,j)(k/n)^j((n−k)/n)^{w−j}).
pub fn split_amplitude(n: usize, k: usize, w: usize, j: usize) -> Result<f64> {
    if k == 0 || k >= n {
        return invalid(format!("need 1 <= k < n, got n={n}, k={k}"));
    }
    if j > w {
        return invalid(format!("split index {j} exceeds weight {w}"));
    }
    Ok(split_unchecked(n, k, w, j))
}

fn split_unchecked(n: usize, k: usize, w: usize, j: usize) -> f64 {
    let p = k as f64 / n as f64;
    let q = (n - k) as f64 / n as f64;
    (0.5 * (ln_binomial(w, j) + j as f64 * p.ln() + (w - j) as f64 * q.ln())).exp()
}

/// All split amplitudes for w ≤ w_max, stored row by row (w, 0..=w).
#[derive(Clone, Debug)]
pub struct SplitTable {
    w_max: usize,
    vals: Vec<f64>,
}

impl SplitTable {
    pub fn new(n: usize, k: usize, w_max: usize) -> Result<Self> {
        if k == 0 || k >= n {
            return invalid(format!("need 1 <= k < n, got n={n}, k={k}"));
        }
        let mut vals = Vec::with_capacity((w_max + 1) * (w_max + 2) / 2);
        for w in 0..=w_max {
            for j in 0..=w {
                vals.push(split_unchecked(n, k, w, j));
            }
        }
        Ok(Self { w_max, vals })
    }

    pub fn w_max(&self) -> usize {
        self.w_max
    }

    #[inline]
    pub fn get(&self, w: usize, j: usize) -> f64 {
        debug_assert!(j <= w && w <= self.w_max);
        self.vals[w * (w + 1) / 2 + j]
    }
}

/// Operator on 𝒞ₖ in the weight basis |j⟩ₖ, j = 0..=w_max.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightDensityOperator {
    k: usize,
    mat: DMatrix<Complex64>,
}

impl WeightDensityOperator {
    pub fn new(k: usize, mat: DMatrix<Complex64>) -> Result<Self> {
        if k == 0 || mat.nrows() != mat.ncols() || mat.nrows() == 0 {
            return invalid("weight operator needs k >= 1 and a square, non-empty matrix");
        }
        Ok(Self { k, mat })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn w_max(&self) -> usize {
        self.mat.nrows() - 1
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn trace(&self) -> f64 {
        self.mat.diagonal().iter().map(|z| z.re).sum()
    }

    /// max |M − M†|.
    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect(&self.mat)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.mat.clone())
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }

    /// Σ mat[j][j'] |j⟩ₖ⟨j'|ₖ on k modes of d levels; needs d > w_max.
    pub fn to_dense(&self, d: usize) -> Result<DenseOperator> {
        let dim = Budget::current().check(d, self.k)?;
        Budget::current().check_entries(dim)?;
        let basis = (0..=self.w_max())
            .map(|j| weight_state_dense(self.k, j, d))
            .collect::<Result<Vec<_>>>()?;
        let mut out = DMatrix::<Complex64>::zeros(dim, dim);
        for (j, bj) in basis.iter().enumerate() {
            for (jp, bjp) in basis.iter().enumerate() {
                let m = self.mat[(j, jp)];
                if m.norm() == 0.0 {
                    continue;
                }
                for (x, ax) in bj
                    .amps()
                    .iter()
                    .enumerate()
                    .filter(|(_, a)| a.norm() != 0.0)
                {
                    for (y, ay) in bjp
                        .amps()
                        .iter()
                        .enumerate()
                        .filter(|(_, a)| a.norm() != 0.0)
                    {
                        out[(x, y)] += m * ax * ay.conj();
                    }
                }
            }
        }
        DenseOperator::new(self.k, d, out)
    }
}

pub(crate) fn hermiticity_defect(m: &DMatrix<Complex64>) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// tr_{n−k} of |Ψ⟩⟨Ψ| in the weight basis of the first k modes.
///
/// mat[j][j'] = Σ_m c_{j+m} c̄_{j'+m} s(j+m, j) s(j'+m, j'), i.e. B B† with
/// B[j][m] = c_{j+m} s(j+m, j).
pub fn reduced_state(psi: &CoherentPowerState, k: usize) -> Result<WeightDensityOperator> {
    let n = psi.n();
    let table = SplitTable::new(n, k, psi.w_max())?;
    Ok(reduced_state_with(psi, k, &table))
}

pub(crate) fn reduced_state_with(
    psi: &CoherentPowerState,
    k: usize,
    table: &SplitTable,
) -> WeightDensityOperator {
    let wm = psi.w_max();
    let c = psi.coeffs();
    let b = DMatrix::from_fn(wm + 1, wm + 1, |j, m| {
        if j + m <= wm {
            c[j + m] * table.get(j + m, j)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let g = &b * b.adjoint();
    let mat = DMatrix::from_fn(wm + 1, wm + 1, |i, j| 0.5 * (g[(i, j)] + g[(j, i)].conj()));
    WeightDensityOperator { k, mat }
}

/// ⟨α|^{⊗m}|w⟩ₘ = e^{−m|α|²/2}(√m ᾱ)^w/√(w!) for w = 0..=w_max.
pub fn coherent_row(alpha: Complex64, m: usize, w_max: usize) -> Result<Vec<Complex64>> {
    if m == 0 {
        return invalid("coherent_row needs m >= 1");
    }
    let amps = coherent_amplitudes(alpha * (m as f64).sqrt(), w_max + 1)?;
    Ok(amps.into_amps().into_iter().map(|z| z.conj()).collect())
}
