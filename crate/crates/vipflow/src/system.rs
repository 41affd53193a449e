//! Velocity-pressure saddle system.
//!
//! Unknowns are stacked nodal coefficients `(u, v, p)`. Rows, in order:
//!
//! 1. x momentum: `-nu A u + C u + (B p)_x = f_x` at every collocation site
//!    kept away from walls, followed by the x component of the wall rows;
//! 2. y momentum, same layout;
//! 3. continuity `Dx u + Dy v = 0` at every collocation site;
//! 4. gauge rows pinning the pressure mean (and the velocity means on fully
//!    periodic domains, where nothing else fixes them).
//!
//! A collocation site within one spacing of a wall trades its momentum rows
//! for interpolation rows `psi(x_b) . u = g(x_b)` at wall points, one per
//! cell face; the viscous stencil so close to a wall is one sided and weak,
//! while the interpolation rows pin the no-slip data strongly. The result is
//! a slightly overdetermined full-column-rank system solved in the
//! least-squares sense.

use crate::assembly;
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::grid::VirtualGrid;
use crate::nodes::{lattice_counts, NodeSet};
use crate::shape::KernelConfig;
use crate::sparse::SparseOperator;

/// How the viscous block is discretized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LaplacianMode {
    /// Product of the staggered first-derivative blocks, `Dx*Dx + Dy*Dy`.
    /// Needs co-located sites and keeps the viscous block compatible with
    /// the divergence: `<A u, u> = -|D u|^2` on fully periodic lattices.
    #[default]
    Composite,
    /// Analytic second-derivative kernel rows.
    Direct,
}

/// How the pressure gradient block is discretized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PressureGradientMode {
    /// Staggered half-spacing differences; dual to the divergence.
    #[default]
    Staggered,
    /// Analytic first-derivative kernel rows.
    Direct,
}

#[derive(Debug, Clone)]
pub struct SystemConfig {
    pub viscosity: f64,
    pub laplacian: LaplacianMode,
    pub pressure_gradient: PressureGradientMode,
    /// Scale applied to the wall interpolation rows and their data.
    pub bc_row_weight: f64,
    /// Weight of the pressure smoothness ties appended on wall-bounded
    /// domains: one row `w h^2 (laplacian p)(x_i) = 0` per node.  Wall
    /// layers leave a handful of near-null pressure modes whose inverse
    /// singular values amplify any irreducible data residual (corner
    /// jumps, coarse boundary layers) into large oscillations; the ties
    /// lift those modes to O(w) while staying exact for pressures the
    /// kernel reproduces with zero second derivative and O(h^2)
    /// consistent otherwise.  0 disables the rows; fully periodic
    /// domains never carry them.
    pub pressure_tie_weight: f64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            viscosity: 1.0,
            laplacian: LaplacianMode::default(),
            pressure_gradient: PressureGradientMode::default(),
            bc_row_weight: 1.0,
            pressure_tie_weight: 0.0,
        }
    }
}

/// Velocity data sampled on the non-periodic boundary faces.
#[derive(Debug, Clone)]
pub struct DirichletBc {
    pub points: Vec<[f64; 2]>,
    pub values: Vec<[f64; 2]>,
}

impl DirichletBc {
    /// Sample `g` at the face midpoints `(k + 1/2) h` of every non-periodic
    /// side, in the fixed order bottom, top, left, right. Corners are never
    /// sampled; the first and last midpoints sit half a spacing away.
    pub fn sample<G>(domain: &Domain, h: f64, g: G) -> Result<Self>
    where
        G: Fn([f64; 2]) -> [f64; 2],
    {
        if domain.fully_periodic() {
            return Err(Error::Config(
                "a fully periodic domain has no boundary to sample".into(),
            ));
        }
        let [nx, ny] = lattice_counts(domain, h)?;
        let mut points = Vec::new();
        if !domain.periodic()[1] {
            for k in 0..nx {
                points.push([domain.lo(0) + (k as f64 + 0.5) * h, domain.lo(1)]);
            }
            for k in 0..nx {
                points.push([domain.lo(0) + (k as f64 + 0.5) * h, domain.hi(1)]);
            }
        }
        if !domain.periodic()[0] {
            for k in 0..ny {
                points.push([domain.lo(0), domain.lo(1) + (k as f64 + 0.5) * h]);
            }
            for k in 0..ny {
                points.push([domain.hi(0), domain.lo(1) + (k as f64 + 0.5) * h]);
            }
        }
        let values = points.iter().map(|&p| g(p)).collect();
        Ok(Self { points, values })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.points.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Debug, Clone)]
pub enum BoundaryCondition {
    /// All axes periodic; velocity is pinned by gauge rows only.
    Periodic,
    Dirichlet(DirichletBc),
}

/// Assembled blocks of the saddle system for one node set and grid.
#[derive(Debug, Clone)]
pub struct SaddleSystem {
    nodes: NodeSet,
    grid: VirtualGrid,
    kernel: KernelConfig,
    config: SystemConfig,
    bc: BoundaryCondition,
    laplacian: SparseOperator,
    dx: SparseOperator,
    dy: SparseOperator,
    bp: (SparseOperator, SparseOperator),
    bc_interp: Option<SparseOperator>,
    /// Unscaled kernel Laplacian collocated at the nodes themselves;
    /// present exactly when the config's tie weight is active.
    pressure_tie: Option<SparseOperator>,
    kept: Vec<usize>,
    replaced: Vec<usize>,
}

impl SaddleSystem {
    pub fn assemble(
        nodes: &NodeSet,
        h: f64,
        kernel: &KernelConfig,
        config: &SystemConfig,
        bc: BoundaryCondition,
    ) -> Result<Self> {
        let domain = nodes.domain().clone();
        match &bc {
            BoundaryCondition::Periodic if !domain.fully_periodic() => {
                return Err(Error::Config(
                    "periodic closure requires a fully periodic domain".into(),
                ))
            }
            BoundaryCondition::Dirichlet(_) if domain.fully_periodic() => {
                return Err(Error::Config(
                    "wall data given, but the domain has no walls".into(),
                ))
            }
            _ => {}
        }
        if !(config.viscosity > 0.0) {
            return Err(Error::Config(format!(
                "viscosity must be positive, got {}",
                config.viscosity
            )));
        }
        if !(config.bc_row_weight > 0.0) {
            return Err(Error::Config(format!(
                "boundary row weight must be positive, got {}",
                config.bc_row_weight
            )));
        }
        if !(config.pressure_tie_weight >= 0.0) {
            return Err(Error::Config(format!(
                "pressure tie weight must be non-negative, got {}",
                config.pressure_tie_weight
            )));
        }
        let grid = VirtualGrid::new(&domain, h)?;
        let (dx, dy) = assembly::staggered_blocks(&grid, nodes, kernel)?;
        let laplacian = match config.laplacian {
            LaplacianMode::Composite => {
                // The composite form feeds lattice values back through the
                // staggered blocks, which reads them as node coefficients.
                // That identification only holds when the nodes sit on the
                // lattice; on any other node set it silently assembles the
                // wrong equations, so refuse instead.
                let colocated = nodes.len() == grid.len()
                    && nodes
                        .positions()
                        .iter()
                        .enumerate()
                        .all(|(i, q)| domain.distance_max(*q, grid.point(i)) <= 1e-9 * h);
                if !colocated {
                    return Err(Error::Config(
                        "composite Laplacian requires nodes co-located with the virtual \
                         lattice; use the direct mode for perturbed or scattered node sets"
                            .into(),
                    ));
                }
                assembly::laplacian_composite(&dx, &dy)?
            }
            LaplacianMode::Direct => assembly::laplacian_direct(&grid.points(), nodes, kernel)?,
        };
        let bp = match config.pressure_gradient {
            PressureGradientMode::Staggered => (dx.clone(), dy.clone()),
            PressureGradientMode::Direct => assembly::gradient_direct(&grid.points(), nodes, kernel)?,
        };
        let (mut kept, mut replaced) = (Vec::new(), Vec::new());
        match &bc {
            BoundaryCondition::Periodic => kept = (0..grid.len()).collect(),
            BoundaryCondition::Dirichlet(_) => {
                for i in 0..grid.len() {
                    if domain.distance_to_boundary(grid.point(i)) < h {
                        replaced.push(i);
                    } else {
                        kept.push(i);
                    }
                }
            }
        }
        let bc_interp = match &bc {
            BoundaryCondition::Periodic => None,
            BoundaryCondition::Dirichlet(data) => {
                if data.values.len() != data.points.len() {
                    return Err(Error::SizeMismatch(format!(
                        "{} boundary values for {} boundary points",
                        data.values.len(),
                        data.points.len()
                    )));
                }
                Some(assembly::interpolation(&data.points, nodes, kernel)?)
            }
        };
        let pressure_tie = if config.pressure_tie_weight > 0.0 && !domain.fully_periodic() {
            Some(assembly::laplacian_direct(
                nodes.positions(),
                nodes,
                kernel,
            )?)
        } else {
            None
        };
        Ok(Self {
            nodes: nodes.clone(),
            grid,
            kernel: kernel.clone(),
            config: config.clone(),
            bc,
            laplacian,
            dx,
            dy,
            bp,
            bc_interp,
            pressure_tie,
            kept,
            replaced,
        })
    }

    #[inline]
    pub fn nodes(&self) -> &NodeSet {
        &self.nodes
    }

    #[inline]
    pub fn grid(&self) -> &VirtualGrid {
        &self.grid
    }

    #[inline]
    pub fn kernel(&self) -> &KernelConfig {
        &self.kernel
    }

    #[inline]
    pub fn config(&self) -> &SystemConfig {
        &self.config
    }

    #[inline]
    pub fn boundary_condition(&self) -> &BoundaryCondition {
        &self.bc
    }

    #[inline]
    pub fn laplacian(&self) -> &SparseOperator {
        &self.laplacian
    }

    /// Staggered first-derivative blocks `(Dx, Dy)`.
    #[inline]
    pub fn staggered(&self) -> (&SparseOperator, &SparseOperator) {
        (&self.dx, &self.dy)
    }

    pub fn divergence(&self) -> Result<SparseOperator> {
        assembly::divergence_staggered(&self.dx, &self.dy)
    }

    /// Interpolation rows at the wall points, when walls exist.
    #[inline]
    pub fn bc_interpolation(&self) -> Option<&SparseOperator> {
        self.bc_interp.as_ref()
    }

    /// Collocation sites whose momentum rows are kept.
    #[inline]
    pub fn kept(&self) -> &[usize] {
        &self.kept
    }

    /// Collocation sites whose momentum rows were traded for wall rows.
    #[inline]
    pub fn replaced(&self) -> &[usize] {
        &self.replaced
    }

    #[inline]
    pub fn n_unknowns(&self) -> usize {
        3 * self.nodes.len()
    }

    fn n_bc_points(&self) -> usize {
        self.bc_interp.as_ref().map_or(0, |g| g.nrows())
    }

    fn n_gauges(&self) -> usize {
        if self.nodes.domain().fully_periodic() {
            3
        } else {
            1
        }
    }

    #[inline]
    fn n_ties(&self) -> usize {
        self.pressure_tie.as_ref().map_or(0, |t| t.nrows())
    }

    #[inline]
    pub fn n_rows(&self) -> usize {
        2 * (self.kept.len() + self.n_bc_points()) + self.grid.len() + self.n_ties()
            + self.n_gauges()
    }

    /// Full system matrix. `convection` is an optional scalar advection
    /// block (one row per collocation site) added to both momentum blocks.
    pub fn matrix(&self, convection: Option<&SparseOperator>) -> Result<SparseOperator> {
        let n = self.nodes.len();
        let m = self.grid.len();
        let mut mom = self.laplacian.scale(-self.config.viscosity);
        if let Some(c) = convection {
            if c.nrows() != m || c.ncols() != n {
                return Err(Error::DimensionMismatch(format!(
                    "advection block is {}x{}, need {}x{}",
                    c.nrows(),
                    c.ncols(),
                    m,
                    n
                )));
            }
            mom = mom.add_scaled(1.0, c, 1.0)?;
        }
        let mom_kept = mom.select_rows(&self.kept);
        let bpx_kept = self.bp.0.select_rows(&self.kept);
        let bpy_kept = self.bp.1.select_rows(&self.kept);
        let z_kept = SparseOperator::zeros(self.kept.len(), n);
        let mut parts: Vec<SparseOperator> = Vec::new();
        parts.push(SparseOperator::hstack(&[&mom_kept, &z_kept, &bpx_kept])?);
        if let Some(gamma) = &self.bc_interp {
            let w = gamma.scale(self.config.bc_row_weight);
            let zb = SparseOperator::zeros(gamma.nrows(), n);
            parts.push(SparseOperator::hstack(&[&w, &zb, &zb])?);
        }
        parts.push(SparseOperator::hstack(&[&z_kept, &mom_kept, &bpy_kept])?);
        if let Some(gamma) = &self.bc_interp {
            let w = gamma.scale(self.config.bc_row_weight);
            let zb = SparseOperator::zeros(gamma.nrows(), n);
            parts.push(SparseOperator::hstack(&[&zb, &w, &zb])?);
        }
        let zm = SparseOperator::zeros(m, n);
        parts.push(SparseOperator::hstack(&[&self.dx, &self.dy, &zm])?);
        if let Some(tie) = &self.pressure_tie {
            let s = self.config.pressure_tie_weight * self.grid.h() * self.grid.h();
            let zt = SparseOperator::zeros(tie.nrows(), n);
            parts.push(SparseOperator::hstack(&[&zt, &zt, &tie.scale(s)])?);
        }
        let mut gauge_rows: Vec<Vec<(usize, f64)>> =
            vec![(2 * n..3 * n).map(|j| (j, 1.0)).collect()];
        if self.nodes.domain().fully_periodic() {
            gauge_rows.push((0..n).map(|j| (j, 1.0)).collect());
            gauge_rows.push((n..2 * n).map(|j| (j, 1.0)).collect());
        }
        parts.push(SparseOperator::from_rows(3 * n, gauge_rows)?);
        let refs: Vec<&SparseOperator> = parts.iter().collect();
        SparseOperator::vstack(&refs)
    }

    /// Right-hand side for collocated forcing values `(f_x at all sites,
    /// f_y at all sites)`.
    pub fn rhs(&self, forcing: &[f64]) -> Result<Vec<f64>> {
        let m = self.grid.len();
        if forcing.len() != 2 * m {
            return Err(Error::SizeMismatch(format!(
                "forcing holds {} values, need {}",
                forcing.len(),
                2 * m
            )));
        }
        let w = self.config.bc_row_weight;
        let mut b = Vec::with_capacity(self.n_rows());
        for &i in &self.kept {
            b.push(forcing[i]);
        }
        if let BoundaryCondition::Dirichlet(data) = &self.bc {
            b.extend(data.values.iter().map(|g| w * g[0]));
        }
        for &i in &self.kept {
            b.push(forcing[m + i]);
        }
        if let BoundaryCondition::Dirichlet(data) = &self.bc {
            b.extend(data.values.iter().map(|g| w * g[1]));
        }
        b.extend(std::iter::repeat(0.0).take(m + self.n_ties() + self.n_gauges()));
        Ok(b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn boundary_sampling_hits_face_midpoints_only() {
        let d = Domain::unit_square([false, false]);
        let bcs = DirichletBc::sample(&d, 0.25, |p| [p[0], p[1]]).unwrap();
        assert_eq!(bcs.len(), 16);
        assert_eq!(bcs.points[0], [0.125, 0.0]);
        assert_eq!(bcs.points[4], [0.125, 1.0]);
        assert_eq!(bcs.points[8], [0.0, 0.125]);
        assert_eq!(bcs.points[12], [1.0, 0.125]);
        for p in &bcs.points {
            let on_x_face = p[0] == 0.0 || p[0] == 1.0;
            let on_y_face = p[1] == 0.0 || p[1] == 1.0;
            assert!(on_x_face ^ on_y_face, "corner or interior point {p:?}");
        }
        // channel: periodic in x leaves only the two walls
        let c = Domain::unit_square([true, false]);
        let bcs = DirichletBc::sample(&c, 0.25, |_| [0.0, 0.0]).unwrap();
        assert_eq!(bcs.len(), 8);
        assert!(bcs.points.iter().all(|p| p[1] == 0.0 || p[1] == 1.0));
        let f = Domain::unit_square([true, true]);
        assert!(DirichletBc::sample(&f, 0.25, |_| [0.0, 0.0]).is_err());
    }

    #[test]
    fn periodic_system_has_expected_shape() {
        let h = 1.0 / 8.0;
        let d = Domain::unit_square([true, true]);
        let nodes = NodeSet::generate_regular(&d, h).unwrap();
        let kernel = KernelConfig::quadratic(h);
        let sys = SaddleSystem::assemble(&nodes, h, &kernel, &SystemConfig::default(), BoundaryCondition::Periodic).unwrap();
        let n = nodes.len();
        assert_eq!(sys.kept().len(), n);
        assert!(sys.replaced().is_empty());
        assert_eq!(sys.n_rows(), 2 * n + n + 3);
        let k = sys.matrix(None).unwrap();
        assert_eq!((k.nrows(), k.ncols()), (sys.n_rows(), 3 * n));
        // gauge rows: pressure mean, then u and v means
        let (cols, vals) = k.row(k.nrows() - 3);
        assert_eq!(cols.len(), n);
        assert!(cols.iter().all(|&c| c >= 2 * n) && vals.iter().all(|&v| v == 1.0));
        let (cols, _) = k.row(k.nrows() - 2);
        assert!(cols.iter().all(|&c| c < n));
        let (cols, _) = k.row(k.nrows() - 1);
        assert!(cols.iter().all(|&c| (n..2 * n).contains(&c)));
    }

    #[test]
    fn dirichlet_system_trades_wall_rows() {
        let h = 0.25;
        let d = Domain::unit_square([false, false]);
        let nodes = NodeSet::generate_regular(&d, h).unwrap();
        let kernel = KernelConfig::quadratic(h);
        let bc = DirichletBc::sample(&d, h, |_| [0.0, 0.0]).unwrap();
        let sys = SaddleSystem::assemble(
            &nodes,
            h,
            &kernel,
            &SystemConfig::default(),
            BoundaryCondition::Dirichlet(bc),
        )
        .unwrap();
        // 4x4 sites: the outer ring sits half a spacing from a wall
        assert_eq!(sys.replaced().len(), 12);
        assert_eq!(sys.kept(), &[5, 6, 9, 10]);
        assert_eq!(sys.n_rows(), 2 * (4 + 16) + 16 + 1);
        let k = sys.matrix(None).unwrap();
        assert_eq!(k.nrows(), 57);
        assert_eq!(k.ncols(), 48);
        // overdetermined by the familiar margin
        assert_eq!(k.nrows() - k.ncols(), 9);
    }

    #[test]
    fn rhs_layout_follows_row_order() {
        let h = 0.25;
        let d = Domain::unit_square([false, false]);
        let nodes = NodeSet::generate_regular(&d, h).unwrap();
        let kernel = KernelConfig::quadratic(h);
        let bc = DirichletBc::sample(&d, h, |p| [p[0], -p[1]]).unwrap();
        let mut cfg = SystemConfig::default();
        cfg.bc_row_weight = 2.0;
        let sys = SaddleSystem::assemble(&nodes, h, &kernel, &cfg, BoundaryCondition::Dirichlet(bc)).unwrap();
        let m = sys.grid().len();
        let forcing: Vec<f64> = (0..2 * m).map(|i| i as f64).collect();
        let b = sys.rhs(&forcing).unwrap();
        assert_eq!(b.len(), sys.n_rows());
        // kept x-forcing first
        assert_eq!(&b[0..4], &[5.0, 6.0, 9.0, 10.0]);
        // then weighted boundary data, first bottom point (0.125, 0)
        assert_relative_eq!(b[4], 2.0 * 0.125);
        // y block mirrors it with the offset
        assert_eq!(b[20], 21.0);
        assert_relative_eq!(b[24], 0.0);
        // continuity and gauge rows are homogeneous
        assert!(b[40..].iter().all(|&v| v == 0.0));
        assert!(sys.rhs(&forcing[..3]).is_err());
    }

    #[test]
    fn convection_block_lands_on_momentum_rows() {
        let h = 1.0 / 8.0;
        let d = Domain::unit_square([true, true]);
        let nodes = NodeSet::generate_regular(&d, h).unwrap();
        let kernel = KernelConfig::quadratic(h);
        let sys = SaddleSystem::assemble(&nodes, h, &kernel, &SystemConfig::default(), BoundaryCondition::Periodic).unwrap();
        let n = nodes.len();
        let base = sys.matrix(None).unwrap();
        let conv = SparseOperator::identity(n).scale(3.0);
        let with = sys.matrix(Some(&conv)).unwrap();
        let diff = with.add_scaled(1.0, &base, -1.0).unwrap();
        // difference is exactly 3 I in each momentum diagonal block
        assert_eq!(diff.nnz(), 2 * n);
        for i in 0..n {
            assert_eq!(diff.row(i), (&[i][..], &[3.0][..]));
            assert_eq!(diff.row(n + i), (&[n + i][..], &[3.0][..]));
        }
        let bad = SparseOperator::identity(2 * n);
        assert!(sys.matrix(Some(&bad)).is_err());
    }

    #[test]
    fn mismatched_closures_are_rejected() {
        let h = 0.25;
        let open = Domain::unit_square([false, false]);
        let nodes = NodeSet::generate_regular(&open, h).unwrap();
        let kernel = KernelConfig::quadratic(h);
        assert!(matches!(
            SaddleSystem::assemble(&nodes, h, &kernel, &SystemConfig::default(), BoundaryCondition::Periodic),
            Err(Error::Config(_))
        ));
    }
}
