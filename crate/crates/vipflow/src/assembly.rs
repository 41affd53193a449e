//! Discrete operators built from kernel rows.
//!
//! First-order operators are staggered: the derivative at a collocation site
//! is the half-spacing difference of the kernel interpolant, evaluated at the
//! four points one half spacing away along each axis. Stacking the two blocks
//! side by side gives the velocity divergence `[Dx | Dy]`; stacking them on
//! top of each other gives the pressure gradient `[Dx; Dy]`. On a fully
//! periodic unperturbed lattice each block is antisymmetric, which makes the
//! pair exactly dual and is what the inf-sup certificate rests on.
//!
//! The viscous term composes the same blocks: `Dx*Dx + Dy*Dy`. That product
//! only exists when collocation sites and nodes coincide (square blocks); it
//! inherits exactness on quadratics from the kernel, boundary regions
//! included, and never evaluates anything outside the domain.

use crate::error::{Error, Result};
use crate::grid::{StaggeredStencil, VirtualGrid};
use crate::nodes::NodeSet;
use crate::shape::{shape_values, DerivMask, KernelConfig};
use crate::sparse::SparseOperator;

/// Kernel interpolation from nodal coefficients to `points`.
pub fn interpolation(
    points: &[[f64; 2]],
    nodes: &NodeSet,
    cfg: &KernelConfig,
) -> Result<SparseOperator> {
    let rows = points
        .iter()
        .map(|&x| {
            let r = shape_values(x, nodes, cfg, DerivMask::value())?;
            Ok(r.indices.iter().copied().zip(r.psi).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    SparseOperator::from_rows(nodes.len(), rows)
}

/// Analytic first-derivative operators `(Gx, Gy)` at `points`.
pub fn gradient_direct(
    points: &[[f64; 2]],
    nodes: &NodeSet,
    cfg: &KernelConfig,
) -> Result<(SparseOperator, SparseOperator)> {
    if cfg.degree() < 1 {
        return Err(Error::DegreeTooLow {
            got: cfg.degree(),
            need: 1,
        });
    }
    let mut rx = Vec::with_capacity(points.len());
    let mut ry = Vec::with_capacity(points.len());
    for &x in points {
        let r = shape_values(x, nodes, cfg, DerivMask::first())?;
        rx.push(r.indices.iter().copied().zip(r.dx.iter().copied()).collect());
        ry.push(r.indices.iter().copied().zip(r.dy.iter().copied()).collect());
    }
    Ok((
        SparseOperator::from_rows(nodes.len(), rx)?,
        SparseOperator::from_rows(nodes.len(), ry)?,
    ))
}

/// Analytic second-derivative Laplacian rows at `points`.
pub fn laplacian_direct(
    points: &[[f64; 2]],
    nodes: &NodeSet,
    cfg: &KernelConfig,
) -> Result<SparseOperator> {
    if cfg.degree() < 2 {
        return Err(Error::DegreeTooLow {
            got: cfg.degree(),
            need: 2,
        });
    }
    let rows = points
        .iter()
        .map(|&x| {
            let r = shape_values(x, nodes, cfg, DerivMask::full())?;
            Ok(r.indices
                .iter()
                .enumerate()
                .map(|(k, &i)| (i, r.dxx[k] + r.dyy[k]))
                .collect())
        })
        .collect::<Result<Vec<_>>>()?;
    SparseOperator::from_rows(nodes.len(), rows)
}

/// Staggered difference blocks `(Dx, Dy)`, one row per virtual grid point.
///
/// Row `I` of `Dx` is `(psi(x_I + h/2 e_x) - psi(x_I - h/2 e_x)) / h`; the
/// arm points stay inside the closed domain because the grid is cell
/// centered, so the kernel is never evaluated outside.
pub fn staggered_blocks(
    grid: &VirtualGrid,
    nodes: &NodeSet,
    cfg: &KernelConfig,
) -> Result<(SparseOperator, SparseOperator)> {
    let stencil = StaggeredStencil::new(grid);
    let h = grid.h();
    let inv_h = 1.0 / h;
    let m = grid.len();
    let mut rx = Vec::with_capacity(m);
    let mut ry = Vec::with_capacity(m);
    for i in 0..m {
        let [xp, xm, yp, ym] = stencil.arms(i);
        let mut row_x = Vec::new();
        for (point, sign) in [(xp, inv_h), (xm, -inv_h)] {
            let r = shape_values(point, nodes, cfg, DerivMask::value())?;
            row_x.extend(r.indices.iter().copied().zip(r.psi.iter().map(|&v| v * sign)));
        }
        rx.push(row_x);
        let mut row_y = Vec::new();
        for (point, sign) in [(yp, inv_h), (ym, -inv_h)] {
            let r = shape_values(point, nodes, cfg, DerivMask::value())?;
            row_y.extend(r.indices.iter().copied().zip(r.psi.iter().map(|&v| v * sign)));
        }
        ry.push(row_y);
    }
    Ok((
        SparseOperator::from_rows(nodes.len(), rx)?,
        SparseOperator::from_rows(nodes.len(), ry)?,
    ))
}

/// Velocity divergence `[Dx | Dy]`, mapping stacked `(u, v)` to one value
/// per collocation site.
pub fn divergence_staggered(dx: &SparseOperator, dy: &SparseOperator) -> Result<SparseOperator> {
    SparseOperator::hstack(&[dx, dy])
}

/// Pressure gradient `[Dx; Dy]`, mapping nodal pressure to stacked
/// `(d/dx, d/dy)` values.
pub fn gradient_staggered(dx: &SparseOperator, dy: &SparseOperator) -> Result<SparseOperator> {
    SparseOperator::vstack(&[dx, dy])
}

/// Scalar viscous operator `Dx*Dx + Dy*Dy`.
///
/// Requires square blocks, i.e. collocation sites coinciding with the nodes;
/// anything else cannot be composed and is a dimension error.
pub fn laplacian_composite(dx: &SparseOperator, dy: &SparseOperator) -> Result<SparseOperator> {
    if dx.nrows() != dx.ncols() || dy.nrows() != dy.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "composite Laplacian needs square staggered blocks (co-located sites); got {}x{} and {}x{}",
            dx.nrows(),
            dx.ncols(),
            dy.nrows(),
            dy.ncols()
        )));
    }
    dx.matmul(dx)?.add_scaled(1.0, &dy.matmul(dy)?, 1.0)
}

/// Result of the collocation rank certificate.
#[derive(Debug, Clone, Copy)]
pub struct RealizationReport {
    pub rank: usize,
    pub rows: usize,
    pub min_singular_value: f64,
}

/// Certify that nodal coefficients can realize arbitrary values at the
/// collocation sites: the dense interpolation matrix must have full row
/// rank. Dense SVD diagnostic, intended for setup-time checks.
pub fn realization_check(
    points: &[[f64; 2]],
    nodes: &NodeSet,
    cfg: &KernelConfig,
) -> Result<RealizationReport> {
    let m = points.len();
    let n = nodes.len();
    if n < m {
        return Err(Error::SizeMismatch(format!(
            "{n} nodes cannot realize {m} collocation sites"
        )));
    }
    let gamma = interpolation(points, nodes, cfg)?.to_dense();
    let svd = gamma.svd(false, false);
    let max_sv = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let tol = 1e-10 * max_sv;
    let kept: Vec<f64> = svd
        .singular_values
        .iter()
        .cloned()
        .filter(|&s| s > tol)
        .collect();
    let rank = kept.len();
    let min_sv = kept.iter().cloned().fold(f64::INFINITY, f64::min);
    if rank < m {
        return Err(Error::RealizationFailure {
            rank,
            rows: m,
            min_sv: if rank > 0 { min_sv } else { 0.0 },
        });
    }
    Ok(RealizationReport {
        rank,
        rows: m,
        min_singular_value: min_sv,
    })
}
