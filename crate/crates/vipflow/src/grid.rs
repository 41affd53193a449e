//! Collocation lattice and the staggered evaluation stencil.
//!
//! Momentum and continuity equations are collocated at the cell-centered
//! lattice sites of [`VirtualGrid`]. First-order operators do not
//! differentiate shape functions; they take half-spacing differences of the
//! interpolant at the four staggered points `y +- (h/2) e_k`, which is what
//! makes the divergence/gradient pair dual and filters the checkerboard
//! pressure mode on a single node cloud.

use crate::domain::Domain;
use crate::error::Result;
use crate::nodes::lattice_counts;

/// Cell-centered lattice `origin + (k h, j h)`, row-major, first axis
/// fastest. Every site keeps distance `>= h/2` from non-periodic boundaries,
/// so all staggered arms stay inside the closed domain.
#[derive(Debug, Clone)]
pub struct VirtualGrid {
    domain: Domain,
    h: f64,
    dims: [usize; 2],
}

impl VirtualGrid {
    pub fn new(domain: &Domain, h: f64) -> Result<Self> {
        let dims = lattice_counts(domain, h)?;
        Ok(Self {
            domain: domain.clone(),
            h,
            dims,
        })
    }

    #[inline]
    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    #[inline]
    pub fn h(&self) -> f64 {
        self.h
    }

    #[inline]
    pub fn dims(&self) -> [usize; 2] {
        self.dims
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1]
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Lattice origin, the first site `(a1 + h/2, a2 + h/2)`.
    #[inline]
    pub fn origin(&self) -> [f64; 2] {
        [
            self.domain.lo(0) + 0.5 * self.h,
            self.domain.lo(1) + 0.5 * self.h,
        ]
    }

    #[inline]
    pub fn point(&self, idx: usize) -> [f64; 2] {
        let ix = idx % self.dims[0];
        let iy = idx / self.dims[0];
        [
            self.domain.lo(0) + (ix as f64 + 0.5) * self.h,
            self.domain.lo(1) + (iy as f64 + 0.5) * self.h,
        ]
    }

    pub fn points(&self) -> Vec<[f64; 2]> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }
}

/// The four staggered arms around a collocation site.
#[derive(Debug, Clone)]
pub struct StaggeredStencil {
    grid: VirtualGrid,
}

/// Arms of one site, in the fixed order `x+`, `x-`, `y+`, `y-`.
pub type StencilArms = [[f64; 2]; 4];

impl StaggeredStencil {
    pub fn new(grid: &VirtualGrid) -> Self {
        Self { grid: grid.clone() }
    }

    #[inline]
    pub fn grid(&self) -> &VirtualGrid {
        &self.grid
    }

    /// `y +- (h/2) e_k`, wrapped on periodic axes. On non-periodic axes the
    /// arms of lattice sites land inside the closed domain, touching the
    /// boundary only for the first layer of sites.
    pub fn arms(&self, idx: usize) -> StencilArms {
        let y = self.grid.point(idx);
        let s = 0.5 * self.grid.h();
        let d = self.grid.domain();
        [
            d.wrap([y[0] + s, y[1]]),
            d.wrap([y[0] - s, y[1]]),
            d.wrap([y[0], y[1] + s]),
            d.wrap([y[0], y[1] - s]),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn lattice_counts_and_points() {
        // mixed extents: [-0.5, 1.5] x [0, 2] at h = 0.25 gives 8 x 8 sites
        let d = Domain::new([[-0.5, 1.5], [0.0, 2.0]], [false, false]).unwrap();
        let g = VirtualGrid::new(&d, 0.25).unwrap();
        assert_eq!(g.dims(), [8, 8]);
        assert_eq!(g.len(), 64);
        assert_eq!(g.point(0), [-0.375, 0.125]);
        assert_eq!(g.point(9), [-0.125, 0.375]);
    }

    #[test]
    fn arms_offset_one_coordinate_by_half_spacing() {
        let d = Domain::unit_square([false, false]);
        let g = VirtualGrid::new(&d, 0.25).unwrap();
        let s = StaggeredStencil::new(&g);
        for idx in 0..g.len() {
            let y = g.point(idx);
            let arms = s.arms(idx);
            for (k, arm) in arms.iter().enumerate() {
                let axis = k / 2;
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                assert_relative_eq!(arm[axis], y[axis] + sign * 0.125, epsilon = 1e-15);
                assert_eq!(arm[1 - axis], y[1 - axis]);
                assert!(d.contains(*arm), "arm outside closed domain");
            }
        }
    }

    #[test]
    fn arms_wrap_on_periodic_axes() {
        let d = Domain::unit_square([true, true]);
        let g = VirtualGrid::new(&d, 0.25).unwrap();
        let s = StaggeredStencil::new(&g);
        // site 0 sits at (0.125, 0.125); its x- arm wraps to x = 0
        let arms = s.arms(0);
        assert_relative_eq!(arms[1][0], 0.0, epsilon = 1e-15);
        // wrapped distance from the site is still h/2
        assert_relative_eq!(d.distance(arms[1], g.point(0)), 0.125, epsilon = 1e-15);
    }

    #[test]
    fn grid_matches_regular_nodes() {
        use crate::nodes::NodeSet;
        let d = Domain::unit_square([true, true]);
        let g = VirtualGrid::new(&d, 0.125).unwrap();
        let n = NodeSet::generate_regular(&d, 0.125).unwrap();
        assert_eq!(g.len(), n.len());
        for i in 0..g.len() {
            assert_eq!(g.point(i), n.position(i));
        }
    }
}
