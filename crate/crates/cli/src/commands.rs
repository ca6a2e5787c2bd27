//! Subcommand implementations.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use definetti_core::definetti::{verify_bound, BoundReport};
use definetti_core::oracle::{coherent_residual_padded, commutator_check, lambda_dense, Budget};
use definetti_core::par;
use definetti_core::quadrature::{
    cartesian_grid, profile_adapted_grid_with_step, GridMeta, DEFAULT_TARGET_TAIL,
};
use definetti_core::weight_basis::{CoherentPowerState, SuperpositionProfile};

use crate::output::{emit, fmt_f64, reports_csv, to_json};
use crate::profile::{gaussian_components, GridSpec, ProfileFile};
use crate::{
    ApproxArgs, Cli, CliError, CliResult, Command, Format, GaussianArgs, GridArgs, IdentityArgs,
    SweepArgs, EXIT_FAILURE, EXIT_OK,
};

/// Runs the parsed command on a pool of `--workers` threads.
pub fn execute(cli: &Cli) -> CliResult<i32> {
    par::with_workers(cli.workers, || match &cli.command {
        Command::IdentityCheck(a) => identity_check(a, cli.seed),
        Command::Approx(a) => approx(a),
        Command::Sweep(a) => sweep(a),
        Command::GaussianProfile(a) => gaussian_profile(a),
    })
}

fn positive(name: &str, v: f64) -> CliResult<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Input(format!("{name} must be positive, got {v}")))
    }
}

fn check_nk(n: usize, k: usize) -> CliResult<()> {
    if k == 0 || k >= n {
        return Err(CliError::Input(format!(
            "need 1 <= k < n, got n={n}, k={k}"
        )));
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct Residual {
    pub alpha: [f64; 2],
    /// Λ and the coherent power at padded dimension, compared on the d-block.
    pub residual: f64,
    /// Same check with the coherent power cut at d before Λ acts.
    pub cropped_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CommutatorResidual {
    pub alpha: [f64; 2],
    pub residual: f64,
    /// Same check on the grid with twice the step.
    pub coarse_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub tolerance: f64,
    pub grid: GridMeta,
    pub nodes: usize,
    pub vacuum_residual: f64,
    pub coherent: Vec<Residual>,
    pub commutator: Vec<CommutatorResidual>,
    pub max_residual: f64,
    pub pass: bool,
}

/// Residuals of Λ|0…0⟩ = |0…0⟩, Λ|α⟩^{⊗n} = |α⟩^{⊗n} and [Λ, D(α)^{⊗n}] = 0.
pub fn identity_report(a: &IdentityArgs, seed: u64) -> CliResult<IdentityReport> {
    if a.n == 0 || a.k >= a.n {
        return Err(CliError::Input(format!(
            "need 0 <= k < n, got n={}, k={}",
            a.n, a.k
        )));
    }
    if a.d < 2 {
        return Err(CliError::Input("d must be >= 2".into()));
    }
    positive("tolerance", a.tolerance)?;
    positive("grid-step", a.grid_step)?;
    positive("grid-radius", a.grid_radius)?;
    let budget = Budget::current();
    budget.check(a.d, a.n)?;
    budget.check_matrix(a.d, a.n - a.k)?;

    let mut alphas = a.alphas.clone();
    if alphas.is_empty() {
        alphas.push(Complex64::new(0.5, 0.0));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..a.random_alphas {
        let r = rng.gen::<f64>().sqrt();
        let t = rng.gen::<f64>() * std::f64::consts::TAU;
        alphas.push(Complex64::from_polar(r, t));
    }

    let origin = Complex64::new(0.0, 0.0);
    let grid = cartesian_grid(origin, a.grid_radius, a.grid_step)?;
    let coarse = cartesian_grid(origin, a.grid_radius, 2.0 * a.grid_step)?;
    let lam = lambda_dense(a.n, a.k, a.d, &grid)?;
    let vacuum_residual = lam.vacuum_residual()?;
    let mut coherent = Vec::new();
    let mut commutator = Vec::new();
    for &alpha in &alphas {
        let pair = [alpha.re, alpha.im];
        coherent.push(Residual {
            alpha: pair,
            residual: coherent_residual_padded(a.n, a.k, alpha, a.d, &grid)?,
            cropped_residual: lam.coherent_residual(alpha)?,
        });
        commutator.push(CommutatorResidual {
            alpha: pair,
            residual: commutator_check(a.n, a.k, alpha, a.d, &grid)?,
            coarse_residual: commutator_check(a.n, a.k, alpha, a.d, &coarse)?,
        });
    }
    let max_residual = coherent
        .iter()
        .map(|r| r.residual)
        .chain(commutator.iter().map(|r| r.residual))
        .fold(vacuum_residual, f64::max);
    Ok(IdentityReport {
        n: a.n,
        k: a.k,
        d: a.d,
        tolerance: a.tolerance,
        nodes: grid.len(),
        grid: grid.meta().clone(),
        vacuum_residual,
        coherent,
        commutator,
        max_residual,
        pass: max_residual <= a.tolerance,
    })
}

fn identity_check(a: &IdentityArgs, seed: u64) -> CliResult<i32> {
    let report = identity_report(a, seed)?;
    let text = match a.output.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&report)?,
        Format::Csv => {
            let mut s = String::from("check,alpha_re,alpha_im,residual\n");
            s += &format!(
                "vacuum,{},{},{}\n",
                fmt_f64(0.0),
                fmt_f64(0.0),
                fmt_f64(report.vacuum_residual)
            );
            for r in &report.coherent {
                s += &format!(
                    "coherent,{},{},{}\n",
                    fmt_f64(r.alpha[0]),
                    fmt_f64(r.alpha[1]),
                    fmt_f64(r.residual)
                );
            }
            for r in &report.commutator {
                s += &format!(
                    "commutator,{},{},{}\n",
                    fmt_f64(r.alpha[0]),
                    fmt_f64(r.alpha[1]),
                    fmt_f64(r.residual)
                );
            }
            s
        }
    };
    emit(a.output.out.as_deref(), &text)?;
    Ok(if report.pass { EXIT_OK } else { EXIT_FAILURE })
}

/// Resolved grid and truncation settings for one (n, k).
struct Setup {
    profile: SuperpositionProfile,
    w_max: Option<usize>,
    step: Option<f64>,
    target_tail: f64,
    tolerance: f64,
}

impl Setup {
    fn new(g: &GridArgs, file: &ProfileFile) -> CliResult<Self> {
        let step = g.grid_step.or(file.step());
        if let Some(h) = step {
            positive("grid step", h)?;
        }
        let target_tail = g
            .target_tail
            .or(file.target_tail())
            .unwrap_or(DEFAULT_TARGET_TAIL);
        if !(target_tail > 0.0 && target_tail < 1.0) {
            return Err(CliError::Input(format!(
                "target tail must lie in (0, 1), got {target_tail}"
            )));
        }
        Ok(Self {
            profile: file.profile()?,
            w_max: g.w_max.or(file.w_max),
            step,
            target_tail,
            tolerance: positive("tolerance", g.tolerance)?,
        })
    }

    fn report(&self, n: usize, k: usize) -> CliResult<BoundReport> {
        check_nk(n, k)?;
        let psi = match self.w_max {
            Some(w) => CoherentPowerState::from_profile(&self.profile, n, w)?,
            None => CoherentPowerState::from_profile_auto(&self.profile, n)?,
        };
        let grid =
            profile_adapted_grid_with_step(&self.profile, n, k, self.target_tail, self.step)?;
        Ok(verify_bound(&psi, k, &grid)?)
    }

    fn conservative_ok(&self, r: &BoundReport) -> bool {
        r.delta_full <= r.bound_conservative + r.quad_error + self.tolerance
    }
}

fn approx(a: &ApproxArgs) -> CliResult<i32> {
    let file = ProfileFile::load(&a.grid.profile)?;
    let setup = Setup::new(&a.grid, &file)?;
    let (n, k) = (a.n.unwrap_or(file.n), a.k.unwrap_or(file.k));
    let report = setup.report(n, k)?;
    let text = match a.output.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&report)?,
        Format::Csv => reports_csv(&[&report], &[])?,
    };
    emit(a.output.out.as_deref(), &text)?;
    if !setup.conservative_ok(&report) {
        eprintln!(
            "bound violated: delta_full {} > {} + {}",
            report.delta_full, report.bound_conservative, report.quad_error
        );
        return Ok(EXIT_FAILURE);
    }
    if report.quad_warning {
        eprintln!(
            "quadrature error {} exceeds 10% of {}",
            report.quad_error, report.bound_paper
        );
        return Ok(EXIT_FAILURE);
    }
    Ok(EXIT_OK)
}

#[derive(Clone, Debug, Serialize)]
pub struct SlopeFit {
    pub k: usize,
    pub slope: Option<f64>,
    pub points: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct MonotoneCheck {
    pub n: usize,
    /// delta_full is nondecreasing in k at this n.
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RowError {
    pub n: usize,
    pub k: usize,
    pub error: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub rows: Vec<BoundReport>,
    pub errors: Vec<RowError>,
    pub slopes: Vec<SlopeFit>,
    pub k_monotone: Vec<MonotoneCheck>,
    pub conservative_violations: usize,
    pub half_bound_violations: usize,
}

/// Least-squares slope of ln y against ln x; `None` with fewer than two
/// distinct x or any non-positive value.
pub fn fit_loglog(points: &[(f64, f64)]) -> Option<f64> {
    if points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0)) {
        return None;
    }
    let m = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / m;
    let my = ly.iter().sum::<f64>() / m;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return None;
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    Some(sxy / sxx)
}

/// One verification per (n, k) pair, rows in n-major order.
pub fn sweep_report(a: &SweepArgs) -> CliResult<(SweepReport, f64)> {
    if a.n_list.is_empty() || a.k_list.is_empty() {
        return Err(CliError::Input(
            "n-list and k-list must be non-empty".into(),
        ));
    }
    let file = ProfileFile::load(&a.grid.profile)?;
    let setup = Setup::new(&a.grid, &file)?;
    let pairs: Vec<(usize, usize)> = a
        .n_list
        .iter()
        .flat_map(|&n| a.k_list.iter().map(move |&k| (n, k)))
        .collect();
    for &(n, k) in &pairs {
        check_nk(n, k)?;
    }
    let results = par::map_indexed(pairs.len(), |i| setup.report(pairs[i].0, pairs[i].1));

    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for (&(n, k), res) in pairs.iter().zip(results) {
        match res {
            Ok(r) => rows.push(r),
            Err(CliError::Budget(m)) => return Err(CliError::Budget(m)),
            Err(e) => errors.push(RowError {
                n,
                k,
                error: e.to_string(),
            }),
        }
    }

    let mut ks: Vec<usize> = a.k_list.clone();
    ks.sort_unstable();
    ks.dedup();
    let slopes = ks
        .iter()
        .map(|&k| {
            let pts: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| r.k == k)
                .map(|r| (r.n as f64, r.delta_full))
                .collect();
            SlopeFit {
                k,
                slope: fit_loglog(&pts),
                points: pts.len(),
            }
        })
        .collect();

    let mut ns: Vec<usize> = a.n_list.clone();
    ns.sort_unstable();
    ns.dedup();
    let k_monotone = ns
        .iter()
        .filter_map(|&n| {
            let mut at_n: Vec<(usize, f64)> = rows
                .iter()
                .filter(|r| r.n == n)
                .map(|r| (r.k, r.delta_full))
                .collect();
            at_n.sort_by_key(|p| p.0);
            (at_n.len() > 1).then(|| MonotoneCheck {
                n,
                holds: at_n.windows(2).all(|w| w[1].1 >= w[0].1),
            })
        })
        .collect();

    let conservative_violations = rows.iter().filter(|r| !setup.conservative_ok(r)).count();
    let half_bound_violations = rows.iter().filter(|r| !r.half_bound_holds).count();
    Ok((
        SweepReport {
            rows,
            errors,
            slopes,
            k_monotone,
            conservative_violations,
            half_bound_violations,
        },
        setup.tolerance,
    ))
}

fn sweep(a: &SweepArgs) -> CliResult<i32> {
    let (report, _) = sweep_report(a)?;
    let text = match a.output.format.unwrap_or(Format::Csv) {
        Format::Json => to_json(&report)?,
        Format::Csv => {
            let mut comments = Vec::new();
            for e in &report.errors {
                comments.push(format!("error n={} k={}: {}", e.n, e.k, e.error));
            }
            for s in &report.slopes {
                let v = s.slope.map_or("none".to_string(), fmt_f64);
                comments.push(format!("slope k={} points={} value={v}", s.k, s.points));
            }
            for m in &report.k_monotone {
                comments.push(format!("monotone_in_k n={} holds={}", m.n, m.holds));
            }
            comments.push(format!(
                "conservative_violations={}",
                report.conservative_violations
            ));
            comments.push(format!(
                "half_bound_violations={}",
                report.half_bound_violations
            ));
            let refs: Vec<&BoundReport> = report.rows.iter().collect();
            reports_csv(&refs, &comments)?
        }
    };
    emit(a.output.out.as_deref(), &text)?;
    Ok(
        if report.errors.is_empty() && report.conservative_violations == 0 {
            EXIT_OK
        } else {
            EXIT_FAILURE
        },
    )
}

/// The profile file written by `gaussian-profile`.
pub fn gaussian_profile_file(a: &GaussianArgs) -> CliResult<ProfileFile> {
    check_nk(a.n, a.k)?;
    let components = gaussian_components(a.center1, a.center2, a.sigma, a.samples)?;
    let grid = (a.grid_step.is_some() || a.target_tail.is_some()).then_some(GridSpec {
        step: a.grid_step,
        target_tail: a.target_tail,
    });
    let file = ProfileFile {
        components,
        n: a.n,
        k: a.k,
        w_max: None,
        grid,
    };
    // must expand to a normalizable state
    CoherentPowerState::from_profile_auto(&file.profile()?, a.n)?;
    Ok(file)
}

fn gaussian_profile(a: &GaussianArgs) -> CliResult<i32> {
    let file = gaussian_profile_file(a)?;
    emit(a.out.as_deref(), &to_json(&file)?)?;
    Ok(EXIT_OK)
}
