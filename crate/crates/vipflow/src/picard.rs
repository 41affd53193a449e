//! Steady Navier-Stokes through Picard (frozen-coefficient) sweeps.
//!
//! Each sweep interpolates the previous velocity iterate to the virtual
//! points and adds the advection block `diag(a) Gx + diag(b) Gy` to both
//! momentum blocks of the saddle system, so the nonlinearity costs one
//! scalar operator per sweep while the Stokes blocks stay fixed.  The
//! first iterate is the creeping-flow solution of the same data.

use crate::assembly;
use crate::error::{Error, Result};
use crate::fields::FlowField;
use crate::solve::{apply_gauges, solve_linear_ls, solve_stokes_system};
use crate::sparse::SparseOperator;
use crate::system::SaddleSystem;

/// Iteration controls for the steady Navier-Stokes solver.
#[derive(Debug, Clone, PartialEq)]
pub struct PicardOptions {
    /// Stop once the relative velocity update falls to this level.  The
    /// update norm watches velocity only: the advecting field is the
    /// entire state of the sweep map, while pressure is recovered from
    /// each linear solve and on wall-bounded domains carries weakly
    /// determined near-wall components that never settle to machine
    /// precision.
    pub tol: f64,
    /// Sweep cap before the solver reports failure.
    pub max_iter: usize,
    /// Blend weight for the fresh solve, in (0, 1].  When an update norm
    /// grows the weight drops to [`FALLBACK_RELAXATION`] for the
    /// remaining sweeps.
    pub relaxation: f64,
}

/// Damping applied after the first observed update-norm increase.
pub const FALLBACK_RELAXATION: f64 = 0.7;

impl Default for PicardOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 50,
            relaxation: 1.0,
        }
    }
}

/// What the iteration did: sweep count, update-norm history, and the
/// blend weight in effect when it stopped.
#[derive(Debug, Clone)]
pub struct PicardReport {
    pub iterations: usize,
    pub trace: Vec<f64>,
    pub relaxation_used: f64,
}

/// Advection operator linearised at `current`, acting on a stacked
/// velocity unknown (all of u, then all of v).  The row at evaluation
/// point y applies the interpolated current velocity against the shape
/// gradient there, once per component.
pub fn assemble_convection(
    points: &[[f64; 2]],
    current: &FlowField,
) -> Result<SparseOperator> {
    let scalar = advection_block(points, current)?;
    Ok(SparseOperator::block_diag2(&scalar, &scalar))
}

/// The scalar block `diag(Γu) Gx + diag(Γv) Gy` shared by both velocity
/// components.
pub fn advection_block(points: &[[f64; 2]], current: &FlowField) -> Result<SparseOperator> {
    let interp = assembly::interpolation(points, current.nodes(), current.kernel())?;
    let (gx, gy) = assembly::gradient_direct(points, current.nodes(), current.kernel())?;
    scaled_block(&interp, &gx, &gy, &current.u, &current.v)
}

fn scaled_block(
    interp: &SparseOperator,
    gx: &SparseOperator,
    gy: &SparseOperator,
    u: &[f64],
    v: &[f64],
) -> Result<SparseOperator> {
    let a = interp.mul_vec(u);
    let b = interp.mul_vec(v);
    gx.scale_rows(&a).add_scaled(1.0, &gy.scale_rows(&b), 1.0)
}

/// Solve steady Navier-Stokes on an assembled saddle system.  The
/// viscosity in the system config is read as the inverse Reynolds
/// number of the nondimensional momentum balance.
pub fn solve_steady_ns(
    sys: &SaddleSystem,
    forcing: &[f64],
    opts: &PicardOptions,
) -> Result<(FlowField, PicardReport)> {
    let (start, _) = solve_stokes_system(sys, forcing)?;
    continue_steady_ns(sys, forcing, opts, start)
}

/// Same as [`solve_steady_ns`] but sweeping from a caller-supplied
/// iterate instead of the creeping-flow solution.
pub fn continue_steady_ns(
    sys: &SaddleSystem,
    forcing: &[f64],
    opts: &PicardOptions,
    start: FlowField,
) -> Result<(FlowField, PicardReport)> {
    if !(opts.relaxation > 0.0 && opts.relaxation <= 1.0) {
        return Err(Error::Config(format!(
            "relaxation {} lies outside (0, 1]",
            opts.relaxation
        )));
    }
    if opts.max_iter == 0 {
        return Err(Error::Config("max_iter must be at least 1".into()));
    }
    let n = sys.nodes().len();
    if start.len() != n {
        return Err(Error::SizeMismatch(format!(
            "initial iterate holds {} nodes, system {}",
            start.len(),
            n
        )));
    }
    let sites = sys.grid().points();
    // Frozen pieces reused by every sweep; only the row scalings move.
    let interp = assembly::interpolation(&sites, sys.nodes(), sys.kernel())?;
    let (gx, gy) = assembly::gradient_direct(&sites, sys.nodes(), sys.kernel())?;
    let rhs = sys.rhs(forcing)?;

    let mut u = start.u;
    let mut v = start.v;
    let mut p = start.p;
    let mut omega = opts.relaxation;
    let mut trace: Vec<f64> = Vec::new();
    let mut last_update = f64::INFINITY;

    for sweep in 1..=opts.max_iter {
        let advection = scaled_block(&interp, &gx, &gy, &u, &v)?;
        let k = sys.matrix(Some(&advection))?;
        let (x, _) = solve_linear_ls(&k, &rhs)?;

        let mut step2 = 0.0;
        let mut size2 = 0.0;
        for i in 0..n {
            let nu = (1.0 - omega) * u[i] + omega * x[i];
            let nv = (1.0 - omega) * v[i] + omega * x[n + i];
            step2 += (nu - u[i]).powi(2) + (nv - v[i]).powi(2);
            size2 += nu * nu + nv * nv;
            u[i] = nu;
            v[i] = nv;
            p[i] = (1.0 - omega) * p[i] + omega * x[2 * n + i];
        }
        let update = (step2 / size2.max(f64::MIN_POSITIVE)).sqrt();
        trace.push(update);

        if update <= opts.tol {
            apply_gauges(sys.nodes().domain(), &mut u, &mut v, &mut p);
            let field = FlowField::new(
                sys.nodes().clone(),
                sys.kernel().clone(),
                sys.grid().h(),
                u,
                v,
                p,
            )?;
            return Ok((
                field,
                PicardReport {
                    iterations: sweep,
                    trace,
                    relaxation_used: omega,
                },
            ));
        }
        if update > last_update {
            omega = omega.min(FALLBACK_RELAXATION);
        }
        last_update = update;
    }

    apply_gauges(sys.nodes().domain(), &mut u, &mut v, &mut p);
    let field = FlowField::new(
        sys.nodes().clone(),
        sys.kernel().clone(),
        sys.grid().h(),
        u,
        v,
        p,
    )?;
    Err(Error::NoConvergence {
        iterations: opts.max_iter,
        last_update,
        field: Box::new(field),
        trace,
    })
}
