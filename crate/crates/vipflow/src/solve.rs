//! Least-squares solves and gauge handling.
//!
//! The saddle matrix is rectangular and can be genuinely rank deficient:
//! on unperturbed fully periodic lattices the half-spacing evaluation
//! points fall midway between node columns, where the even interpolation
//! weights annihilate alternating (Nyquist) node modes, and wall-layer
//! pressure modes on coarse Dirichlet lattices are just as invisible to
//! every row. Ties are broken by the minimum-Euclidean-norm solution. The
//! default path is a sparse QR factorization of the ridge-augmented system
//! `[K; eps I]` with `eps` far below every reported precision: null
//! components come out exactly zero (the minimum-norm choice) and the
//! factorization never meets a zero pivot. The whole path is pinned to
//! sequential execution so repeated runs produce identical bytes. Builds
//! without the `direct` feature use LSQR started from zero, which also
//! converges to the minimum-norm minimizer; the direct path falls back to
//! it when the factorization misbehaves.
//!
//! Least-squares residuals do not vanish at the solution, so the acceptance
//! gate is the optimality residual `|K^T (K x - b)| / |K^T b|` measured
//! against the original, unaugmented system; the plain residual norm is
//! reported alongside.

use std::time::Instant;

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::fields::FlowField;
use crate::nodes::NodeSet;
use crate::shape::KernelConfig;
use crate::sparse::SparseOperator;
use crate::system::{BoundaryCondition, SaddleSystem, SystemConfig};

/// A solve whose optimality residual exceeds this is reported as failed.
const OPTIMALITY_TOL: f64 = 1e-6;

/// Ridge weight for the direct path, relative to the largest row norm.
/// Large enough to dominate roundoff in exactly-null directions, small
/// enough that the squared bias `(eps/sigma)^2` on resolved components
/// sits far below every tolerance in the crate; wall-layer pressure
/// modes come as low as `sigma/scale ~ 1e-7`, so the ridge must stay
/// well under that.
const RIDGE_REL: f64 = 1e-10;

#[derive(Debug, Clone, Copy)]
pub struct LsqrOptions {
    /// Stop when the optimality residual drops below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for LsqrOptions {
    fn default() -> Self {
        Self {
            tol: 1e-11,
            max_iter: 50_000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolveReport {
    pub rows: usize,
    pub cols: usize,
    pub method: &'static str,
    /// `|K^T (K x - b)| / |K^T b|` at the returned solution.
    pub optimality_residual: f64,
    /// Plain residual norm `|K x - b|`; nonzero even at the exact
    /// least-squares minimizer.
    pub ls_residual: f64,
    /// Iteration count for the iterative path.
    pub iterations: Option<usize>,
    pub wall_seconds: f64,
    /// Means removed by the gauge projection, `(u, v, p)`.
    pub gauge_means: [f64; 3],
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `(optimality residual, plain residual norm)` of `x`.
pub fn residual_pair(k: &SparseOperator, x: &[f64], b: &[f64]) -> (f64, f64) {
    let mut r = k.mul_vec(x);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri -= bi;
    }
    let ktr = norm(&k.transpose_mul_vec(&r));
    let ktb = norm(&k.transpose_mul_vec(b));
    let opt = if ktb > 0.0 { ktr / ktb } else { ktr };
    (opt, norm(&r))
}

/// Solve `min |K x - b|` by sparse QR (with the `direct` feature) or LSQR,
/// breaking rank-deficient ties by minimum Euclidean norm.
pub fn solve_linear_ls(k: &SparseOperator, b: &[f64]) -> Result<(Vec<f64>, SolveReport)> {
    if b.len() != k.nrows() {
        return Err(Error::SizeMismatch(format!(
            "right-hand side holds {} entries for {} rows",
            b.len(),
            k.nrows()
        )));
    }
    if k.nrows() < k.ncols() {
        return Err(Error::SizeMismatch(format!(
            "system is wide ({}x{}); the least-squares path needs at least as many rows as columns",
            k.nrows(),
            k.ncols()
        )));
    }
    #[cfg(feature = "direct")]
    if let Some(solved) = solve_direct_checked(k, b) {
        return Ok(solved);
    }
    let (x, report) = solve_linear_lsqr(k, b, &LsqrOptions::default())?;
    let opt = report.optimality_residual;
    if !x.iter().all(|v| v.is_finite()) || opt > OPTIMALITY_TOL {
        return Err(Error::SingularSystem(format!(
            "optimality residual {opt:.3e} exceeds {OPTIMALITY_TOL:.0e}"
        )));
    }
    Ok((x, report))
}

/// Direct attempt; `None` hands over to the LSQR fallback.
#[cfg(feature = "direct")]
fn solve_direct_checked(k: &SparseOperator, b: &[f64]) -> Option<(Vec<f64>, SolveReport)> {
    use faer::linalg::solvers::SolveLstsq;
    let start = Instant::now();
    // sequential execution keeps float summation order, and therefore every
    // emitted byte, identical across runs and thread setups
    faer::set_global_parallelism(faer::Par::Seq);
    let max_row_norm = (0..k.nrows())
        .map(|i| k.row(i).1.iter().map(|v| v * v).sum::<f64>().sqrt())
        .fold(0.0_f64, f64::max);
    let ridge = RIDGE_REL * max_row_norm;
    if !(ridge > 0.0) {
        return None;
    }
    let damped = SparseOperator::vstack(&[k, &SparseOperator::identity(k.ncols()).scale(ridge)])
        .expect("column counts match by construction");
    let mut rhs = faer::Mat::<f64>::zeros(damped.nrows(), 1);
    for (i, bi) in b.iter().enumerate() {
        rhs[(i, 0)] = *bi;
    }
    let qr = damped.to_faer().sp_qr().ok()?;
    let sol = qr.solve_lstsq(rhs);
    let x: Vec<f64> = (0..k.ncols()).map(|i| sol[(i, 0)]).collect();
    if !x.iter().all(|v| v.is_finite()) {
        return None;
    }
    let (opt, ls) = residual_pair(k, &x, b);
    if opt > OPTIMALITY_TOL {
        return None;
    }
    Some((
        x,
        SolveReport {
            rows: k.nrows(),
            cols: k.ncols(),
            method: "sparse-qr",
            optimality_residual: opt,
            ls_residual: ls,
            iterations: None,
            wall_seconds: start.elapsed().as_secs_f64(),
            gauge_means: [0.0; 3],
        },
    ))
}

/// Golub-Kahan bidiagonalization least squares from the zero vector.
pub fn solve_linear_lsqr(
    k: &SparseOperator,
    b: &[f64],
    opts: &LsqrOptions,
) -> Result<(Vec<f64>, SolveReport)> {
    if b.len() != k.nrows() {
        return Err(Error::SizeMismatch(format!(
            "right-hand side holds {} entries for {} rows",
            b.len(),
            k.nrows()
        )));
    }
    let start = Instant::now();
    let n = k.ncols();
    let mut x = vec![0.0; n];
    let mut u = b.to_vec();
    let mut beta = norm(&u);
    let mut iterations = 0;
    if beta > 0.0 {
        for t in &mut u {
            *t /= beta;
        }
        let mut v = k.transpose_mul_vec(&u);
        let mut alpha = norm(&v);
        if alpha > 0.0 {
            for t in &mut v {
                *t /= alpha;
            }
        }
        let ktb_norm = alpha * beta;
        let mut w = v.clone();
        let mut phibar = beta;
        let mut rhobar = alpha;
        for it in 1..=opts.max_iter {
            iterations = it;
            // continue the bidiagonalization
            let kv = k.mul_vec(&v);
            for (ui, kvi) in u.iter_mut().zip(&kv) {
                *ui = kvi - alpha * *ui;
            }
            beta = norm(&u);
            if beta > 0.0 {
                for t in &mut u {
                    *t /= beta;
                }
            }
            let ktu = k.transpose_mul_vec(&u);
            for (vi, ktui) in v.iter_mut().zip(&ktu) {
                *vi = ktui - beta * *vi;
            }
            alpha = norm(&v);
            if alpha > 0.0 {
                for t in &mut v {
                    *t /= alpha;
                }
            }
            // plane rotation folding beta into the bidiagonal factor
            let rho = rhobar.hypot(beta);
            let c = rhobar / rho;
            let s = beta / rho;
            let theta = s * alpha;
            rhobar = -c * alpha;
            let phi = c * phibar;
            phibar *= s;
            let t1 = phi / rho;
            let t2 = -theta / rho;
            for j in 0..n {
                x[j] += t1 * w[j];
                w[j] = v[j] + t2 * w[j];
            }
            // |K^T r| at the current iterate is phibar * alpha * |c|
            let opt_est = phibar * alpha * c.abs();
            if opt_est <= opts.tol * ktb_norm || alpha == 0.0 || beta == 0.0 {
                break;
            }
        }
    }
    let (opt, ls) = residual_pair(k, &x, b);
    Ok((
        x,
        SolveReport {
            rows: k.nrows(),
            cols: n,
            method: "lsqr",
            optimality_residual: opt,
            ls_residual: ls,
            iterations: Some(iterations),
            wall_seconds: start.elapsed().as_secs_f64(),
            gauge_means: [0.0; 3],
        },
    ))
}

/// Remove the means the gauge rows only pin weakly: pressure always, the
/// velocity components only when nothing but the gauges fixes them (fully
/// periodic domains). Returns the removed `(u, v, p)` means.
pub fn apply_gauges(domain: &Domain, u: &mut [f64], v: &mut [f64], p: &mut [f64]) -> [f64; 3] {
    let mut means = [0.0; 3];
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len().max(1) as f64;
    if domain.fully_periodic() {
        means[0] = mean(u);
        means[1] = mean(v);
        for t in u.iter_mut() {
            *t -= means[0];
        }
        for t in v.iter_mut() {
            *t -= means[1];
        }
    }
    means[2] = mean(p);
    for t in p.iter_mut() {
        *t -= means[2];
    }
    means
}

/// Solve the Stokes system assembled in `sys` for collocated forcing.
pub fn solve_stokes_system(
    sys: &SaddleSystem,
    forcing: &[f64],
) -> Result<(FlowField, SolveReport)> {
    let k = sys.matrix(None)?;
    let b = sys.rhs(forcing)?;
    let (x, mut report) = solve_linear_ls(&k, &b)?;
    let n = sys.nodes().len();
    let mut u = x[0..n].to_vec();
    let mut v = x[n..2 * n].to_vec();
    let mut p = x[2 * n..3 * n].to_vec();
    report.gauge_means = apply_gauges(sys.nodes().domain(), &mut u, &mut v, &mut p);
    let field = FlowField::new(
        sys.nodes().clone(),
        sys.kernel().clone(),
        sys.grid().h(),
        u,
        v,
        p,
    )?;
    Ok((field, report))
}

/// Assemble and solve a Stokes problem in one call.
pub fn solve_stokes(
    nodes: &NodeSet,
    h: f64,
    kernel: &KernelConfig,
    config: &SystemConfig,
    bc: BoundaryCondition,
    forcing: &[f64],
) -> Result<(FlowField, SolveReport)> {
    let sys = SaddleSystem::assemble(nodes, h, kernel, config, bc)?;
    solve_stokes_system(&sys, forcing)
}
