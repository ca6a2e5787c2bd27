//! Brute-force dense computations on n modes of d levels each.
//!
//! Words x₁…xₙ are indexed base d with x₁ most significant. These routines
//! are deliberately naive; they exist to check the compact weight-basis code
//! and the operator identities behind the approximation.

use std::f64::consts::PI;
use std::io::{Read, Write};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::fock::{coherent_amplitudes, displacement_matrix, padded_dim, FockVector};
use crate::par;
use crate::quadrature::PhaseSpaceGrid;
use crate::weight_basis::hermiticity_defect;

pub const DEFAULT_BUDGET: u128 = 1 << 22;
pub const BUDGET_ENV: &str = "DEFINETTI_BUDGET";

/// Full matrices over d^n are only formed for n ≤ 3 and d ≤ 16.
pub const MATRIX_MAX_MODES: usize = 3;
pub const MATRIX_MAX_LEVELS: usize = 16;

/// Cap on dense amplitudes, d^n.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    pub amplitudes: u128,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            amplitudes: DEFAULT_BUDGET,
        }
    }
}

impl Budget {
    /// Default cap, overridden by `DEFINETTI_BUDGET` when it parses.
    pub fn current() -> Self {
        std::env::var(BUDGET_ENV)
            .ok()
            .and_then(|s| s.trim().parse::<u128>().ok())
            .map(|amplitudes| Self { amplitudes })
            .unwrap_or_default()
    }

    /// d^n, or a budget error.
    pub fn check(&self, d: usize, n: usize) -> Result<usize> {
        let requested = (d as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
        if requested > self.amplitudes {
            return Err(Error::Budget {
                requested,
                cap: self.amplitudes,
            });
        }
        Ok(requested as usize)
    }

    /// Gate for full d^n × d^n matrices.
    pub fn check_matrix(&self, d: usize, n: usize) -> Result<usize> {
        let dim = self.check(d, n)?;
        if n > MATRIX_MAX_MODES || d > MATRIX_MAX_LEVELS {
            let requested = (dim as u128).saturating_mul(dim as u128);
            let cap = (MATRIX_MAX_LEVELS as u128).pow(2 * MATRIX_MAX_MODES as u32);
            return Err(Error::Budget { requested, cap });
        }
        Ok(dim)
    }

    pub(crate) fn check_entries(&self, dim: usize) -> Result<()> {
        let cap = (MATRIX_MAX_LEVELS as u128).pow(2 * MATRIX_MAX_MODES as u32);
        let requested = (dim as u128) * (dim as u128);
        if requested > cap {
            return Err(Error::Budget { requested, cap });
        }
        Ok(())
    }
}

/// Amplitudes over the d^n words of n modes.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseState {
    n: usize,
    d: usize,
    amps: Vec<Complex64>,
}

impl DenseState {
    pub fn new(n: usize, d: usize, amps: Vec<Complex64>) -> Result<Self> {
        if n == 0 || d == 0 {
            return invalid("dense state needs n, d >= 1");
        }
        let want = (d as u128).checked_pow(n as u32);
        if want != Some(amps.len() as u128) {
            return invalid(format!("expected {d}^{n} amplitudes, got {}", amps.len()));
        }
        Ok(Self { n, d, amps })
    }

    pub fn vacuum(n: usize, d: usize) -> Result<Self> {
        let dim = Budget::current().check(d, n)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[0] = Complex64::new(1.0, 0.0);
        Self::new(n, d, amps)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn word_index(&self, word: &[usize]) -> usize {
        word.iter().fold(0, |acc, &x| acc * self.d + x)
    }

    pub fn word(&self, mut idx: usize) -> Vec<usize> {
        let mut w = vec![0; self.n];
        for slot in w.iter_mut().rev() {
            *slot = idx % self.d;
            idx /= self.d;
        }
        w
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &DenseState) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// ‖self − other‖.
    pub fn distance(&self, other: &DenseState) -> f64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// Square matrix over the words of `modes` modes of d levels.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    modes: usize,
    d: usize,
    mat: DMatrix<Complex64>,
}

impl DenseOperator {
    pub fn new(modes: usize, d: usize, mat: DMatrix<Complex64>) -> Result<Self> {
        let dim = (d as u128).checked_pow(modes as u32);
        if modes == 0 || d == 0 || mat.nrows() != mat.ncols() || dim != Some(mat.nrows() as u128) {
            return invalid(format!(
                "operator shape {}x{} does not match {d}^{modes}",
                mat.nrows(),
                mat.ncols()
            ));
        }
        Ok(Self { modes, d, mat })
    }

    /// |ψ⟩⟨ψ|.
    pub fn from_pure(psi: &DenseState) -> Result<Self> {
        Budget::current().check_matrix(psi.d, psi.n)?;
        let v = nalgebra::DVector::from_column_slice(&psi.amps);
        Self::new(psi.n, psi.d, &v * v.adjoint())
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn trace(&self) -> Complex64 {
        self.mat.trace()
    }

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

    /// self ⊗ other.
    pub fn tensor(&self, other: &DenseOperator) -> Result<DenseOperator> {
        if self.d != other.d {
            return invalid("tensor product of operators with different d");
        }
        Budget::current().check_matrix(self.d, self.modes + other.modes)?;
        Self::new(
            self.modes + other.modes,
            self.d,
            self.mat.kronecker(&other.mat),
        )
    }

    pub fn apply(&self, v: &DenseState) -> Result<DenseState> {
        if v.n != self.modes || v.d != self.d {
            return invalid("operator/state shape mismatch");
        }
        let x = nalgebra::DVector::from_column_slice(&v.amps);
        let y = &self.mat * x;
        DenseState::new(v.n, v.d, y.iter().cloned().collect())
    }
}

/// v^{⊗n}.
pub fn tensor_power(v: &FockVector, n: usize) -> Result<DenseState> {
    if n == 0 {
        return invalid("tensor power needs n >= 1");
    }
    let d = v.dim();
    Budget::current().check(d, n)?;
    let mut amps = v.amps().to_vec();
    for _ in 1..n {
        let mut next = Vec::with_capacity(amps.len() * d);
        for a in &amps {
            next.extend(v.amps().iter().map(|b| a * b));
        }
        amps = next;
    }
    DenseState::new(n, d, amps)
}

/// Trace over the last n−k modes.
pub fn partial_trace(rho: &DenseOperator, k: usize) -> Result<DenseOperator> {
    let n = rho.modes;
    if k == 0 || k >= n {
        return invalid(format!("need 1 <= k < n, got n={n}, k={k}"));
    }
    let d = rho.d;
    let keep = d.pow(k as u32);
    let traced = d.pow((n - k) as u32);
    let mut out = DMatrix::<Complex64>::zeros(keep, keep);
    for x in 0..keep {
        for y in 0..keep {
            let mut s = Complex64::new(0.0, 0.0);
            for z in 0..traced {
                s += rho.mat[(x * traced + z, y * traced + z)];
            }
            out[(x, y)] = s;
        }
    }
    DenseOperator::new(k, d, out)
}

/// tr_{n−k}|ψ⟩⟨ψ| without forming the n-mode matrix.
pub fn partial_trace_pure(psi: &DenseState, k: usize) -> Result<DenseOperator> {
    let n = psi.n;
    if k == 0 || k >= n {
        return invalid(format!("need 1 <= k < n, got n={n}, k={k}"));
    }
    Budget::current().check_matrix(psi.d, k)?;
    let keep = psi.d.pow(k as u32);
    let traced = psi.d.pow((n - k) as u32);
    let m = DMatrix::from_row_slice(keep, traced, &psi.amps);
    DenseOperator::new(k, psi.d, &m * m.adjoint())
}

/// Λ_{n,k} = ((n−k)/π) Σᵢ wᵢ I_k ⊗ (|αᵢ⟩⟨αᵢ|)^{⊗(n−k)} on d-level truncations,
/// kept as its rank-one terms.
#[derive(Clone, Debug)]
pub struct LambdaOperator {
    n: usize,
    k: usize,
    d: usize,
    weights: Vec<f64>,
    /// (a_i)^{⊗(n−k)} for each node, truncated coherent amplitudes.
    suffix: Vec<Vec<Complex64>>,
}

/// Assembles Λ_{n,k} for the given grid.
pub fn lambda_dense(n: usize, k: usize, d: usize, grid: &PhaseSpaceGrid) -> Result<LambdaOperator> {
    if k >= n {
        return invalid(format!("need 0 <= k < n, got n={n}, k={k}"));
    }
    Budget::current().check(d, n)?;
    let m = n - k;
    let suffix = grid
        .nodes()
        .iter()
        .map(|&a| tensor_power(&coherent_amplitudes(a, d)?, m).map(|s| s.amps))
        .collect::<Result<Vec<_>>>()?;
    Ok(LambdaOperator {
        n,
        k,
        d,
        weights: grid.weights().to_vec(),
        suffix,
    })
}

impl LambdaOperator {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> usize {
        self.d
    }

    fn prefactor(&self) -> f64 {
        (self.n - self.k) as f64 / PI
    }

    /// Λ v as a sum over grid nodes of rank-one contractions.
    pub fn apply(&self, v: &DenseState) -> Result<DenseState> {
        if v.n != self.n || v.d != self.d {
            return invalid("lambda/state shape mismatch");
        }
        let s_dim = self.suffix.first().map_or(1, |s| s.len());
        let p_dim = v.dim() / s_dim;
        let acc = par::chunked_reduce(
            self.weights.len(),
            v.dim(),
            || vec![Complex64::new(0.0, 0.0); v.dim()],
            |acc, i| {
                let t = &self.suffix[i];
                let w = self.weights[i];
                for p in 0..p_dim {
                    let block = &v.amps[p * s_dim..(p + 1) * s_dim];
                    let s: Complex64 = t
                        .iter()
                        .zip(block)
                        .map(|(a, b)| a.conj() * b)
                        .sum::<Complex64>()
                        * w;
                    for (o, a) in acc[p * s_dim..(p + 1) * s_dim].iter_mut().zip(t) {
                        *o += s * a;
                    }
                }
            },
            add_vecs,
        );
        let pref = self.prefactor();
        DenseState::new(self.n, self.d, acc.into_iter().map(|z| z * pref).collect())
    }

    /// The full d^n × d^n matrix (n ≤ 3, d ≤ 16 only).
    pub fn to_dense(&self) -> Result<DenseOperator> {
        let dim = Budget::current().check_matrix(self.d, self.n)?;
        let s_dim = self.suffix.first().map_or(1, |s| s.len());
        let local = par::chunked_reduce(
            self.weights.len(),
            s_dim * s_dim,
            || DMatrix::<Complex64>::zeros(s_dim, s_dim),
            |acc, i| {
                let t = &self.suffix[i];
                let w = self.weights[i];
                for r in 0..s_dim {
                    let tr = t[r] * w;
                    for c in 0..s_dim {
                        acc[(r, c)] += tr * t[c].conj();
                    }
                }
            },
            |a, b| a + b,
        ) * Complex64::new(self.prefactor(), 0.0);
        let ident = DMatrix::<Complex64>::identity(dim / s_dim, dim / s_dim);
        DenseOperator::new(self.n, self.d, ident.kronecker(&local))
    }

    /// ‖Λ|0…0⟩ − |0…0⟩‖.
    pub fn vacuum_residual(&self) -> Result<f64> {
        let vac = DenseState::vacuum(self.n, self.d)?;
        Ok(self.apply(&vac)?.distance(&vac))
    }

    /// ‖Λ|α⟩^{⊗n} − |α⟩^{⊗n}‖ with d-level coherent amplitudes.
    pub fn coherent_residual(&self, alpha: Complex64) -> Result<f64> {
        let v = tensor_power(&coherent_amplitudes(alpha, self.d)?, self.n)?;
        Ok(self.apply(&v)?.distance(&v))
    }
}

/// ‖P_d(Λ|α⟩^{⊗n}) − P_d|α⟩^{⊗n}‖ with Λ and the coherent power built at
/// the padded dimension of [`padded_dim`], so the cut at d does not enter.
pub fn coherent_residual_padded(
    n: usize,
    k: usize,
    alpha: Complex64,
    d: usize,
    grid: &PhaseSpaceGrid,
) -> Result<f64> {
    let p = padded_dim(alpha, d);
    let lam = lambda_dense(n, k, p, grid)?;
    let v = tensor_power(&coherent_amplitudes(alpha, p)?, n)?;
    let out = lam.apply(&v)?;
    let mut s = 0.0;
    for (i, (a, b)) in out.amps.iter().zip(&v.amps).enumerate() {
        if v.word(i).iter().all(|&l| l < d) {
            s += (a - b).norm_sqr();
        }
    }
    Ok(s.sqrt())
}

fn add_vecs(mut a: Vec<Complex64>, b: Vec<Complex64>) -> Vec<Complex64> {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
    a
}

fn kron_vec_power(v: &[Complex64], m: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(1.0, 0.0)];
    for _ in 0..m {
        out = out
            .iter()
            .flat_map(|a| v.iter().map(move |b| a * b))
            .collect();
    }
    out
}

/// max |⟨x|[Λ_{n,k}, D(α)^{⊗n}]|y⟩| over words x, y with letters < d.
///
/// Products are taken at the padded dimension of [`padded_dim`] and only the
/// d-level block is compared, so the cut at d does not leak into the
/// residual. Since Λ = I_k ⊗ L and D^{⊗n} = D^{⊗k} ⊗ D^{⊗(n−k)}, the
/// commutator is D^{⊗k} ⊗ [L, D^{⊗(n−k)}] and its max entry factorizes.
pub fn commutator_check(
    n: usize,
    k: usize,
    alpha: Complex64,
    d: usize,
    grid: &PhaseSpaceGrid,
) -> Result<f64> {
    if k >= n {
        return invalid(format!("need 0 <= k < n, got n={n}, k={k}"));
    }
    let m = n - k;
    let budget = Budget::current();
    budget.check(d, n)?;
    let sd = budget.check_matrix(d, m)?;
    if alpha == Complex64::new(0.0, 0.0) {
        return Ok(0.0);
    }
    let p = padded_dim(alpha, d);
    let dp = displacement_matrix(alpha, p)?.into_matrix();
    let d_max = (0..d)
        .flat_map(|i| (0..d).map(move |j| (i, j)))
        .map(|(i, j)| dp[(i, j)].norm())
        .fold(0.0, f64::max);

    let nodes = grid.nodes();
    let weights = grid.weights();
    let comm = par::chunked_reduce(
        nodes.len(),
        sd * sd,
        || DMatrix::<Complex64>::zeros(sd, sd),
        |acc, i| {
            let a = coherent_amplitudes(nodes[i], p).expect("finite grid node");
            let a = a.amps();
            // rows of D a and a† D restricted to the d-level block
            let da: Vec<Complex64> = (0..d)
                .map(|x| (0..p).map(|z| dp[(x, z)] * a[z]).sum())
                .collect();
            let ad: Vec<Complex64> = (0..d)
                .map(|y| (0..p).map(|z| a[z].conj() * dp[(z, y)]).sum())
                .collect();
            let a_low = &a[..d];
            let a_bar: Vec<Complex64> = a_low.iter().map(|z| z.conj()).collect();
            let u1 = kron_vec_power(a_low, m);
            let v1 = kron_vec_power(&ad, m);
            let u2 = kron_vec_power(&da, m);
            let v2 = kron_vec_power(&a_bar, m);
            let w = weights[i];
            for r in 0..sd {
                let (x1, x2) = (u1[r] * w, u2[r] * w);
                for c in 0..sd {
                    acc[(r, c)] += x1 * v1[c] - x2 * v2[c];
                }
            }
        },
        |a, b| a + b,
    );
    let pref = m as f64 / PI;
    let c_max = comm.iter().map(|z| z.norm()).fold(0.0, f64::max) * pref;
    Ok(d_max.powi(k as i32) * c_max)
}

const MAGIC: &[u8; 4] = b"DFNT";
const VERSION: u32 = 1;

/// Payload of a binary dump.
#[derive(Clone, Debug, PartialEq)]
pub enum Dump {
    State(DenseState),
    Operator(DenseOperator),
}

fn write_header<W: Write>(
    w: &mut W,
    kind: u32,
    modes: usize,
    d: usize,
    rows: usize,
    cols: usize,
) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&kind.to_le_bytes())?;
    w.write_all(&(modes as u32).to_le_bytes())?;
    w.write_all(&(d as u32).to_le_bytes())?;
    w.write_all(&(rows as u64).to_le_bytes())?;
    w.write_all(&(cols as u64).to_le_bytes())?;
    Ok(())
}

fn write_complex<W: Write>(w: &mut W, z: Complex64) -> Result<()> {
    w.write_all(&z.re.to_le_bytes())?;
    w.write_all(&z.im.to_le_bytes())?;
    Ok(())
}

/// Header (magic, version, kind = 0, n, d, rows = d^n, cols = 1), then amplitudes.
pub fn write_state<W: Write>(w: &mut W, s: &DenseState) -> Result<()> {
    write_header(w, 0, s.n, s.d, s.dim(), 1)?;
    for &z in &s.amps {
        write_complex(w, z)?;
    }
    Ok(())
}

/// Header with kind = 1, then row-major entries.
pub fn write_operator<W: Write>(w: &mut W, op: &DenseOperator) -> Result<()> {
    let (r, c) = op.mat.shape();
    write_header(w, 1, op.modes, op.d, r, c)?;
    for i in 0..r {
        for j in 0..c {
            write_complex(w, op.mat[(i, j)])?;
        }
    }
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

pub fn read_dump<R: Read>(r: &mut R) -> Result<Dump> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = read_u32(r)?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let kind = read_u32(r)?;
    let modes = read_u32(r)? as usize;
    let d = read_u32(r)? as usize;
    let rows = read_u64(r)? as usize;
    let cols = read_u64(r)? as usize;
    let expected_rows = (d as u128).checked_pow(modes as u32);
    if expected_rows != Some(rows as u128) {
        return Err(Error::Format(format!(
            "rows {rows} do not match {d}^{modes}"
        )));
    }
    let count = rows
        .checked_mul(cols)
        .ok_or_else(|| Error::Format("entry count overflows".into()))?;
    let mut vals = Vec::with_capacity(count.min(1 << 24));
    for _ in 0..count {
        let re = read_f64(r)?;
        let im = read_f64(r)?;
        vals.push(Complex64::new(re, im));
    }
    match (kind, cols) {
        (0, 1) => Ok(Dump::State(DenseState::new(modes, d, vals)?)),
        (1, c) if c == rows => Ok(Dump::Operator(DenseOperator::new(
            modes,
            d,
            DMatrix::from_row_slice(rows, cols, &vals),
        )?)),
        _ => Err(Error::Format(format!(
            "kind {kind} with shape {rows}x{cols}"
        ))),
    }
}
