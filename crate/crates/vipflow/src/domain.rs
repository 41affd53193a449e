//! Axis-aligned rectangular domains with optional per-axis periodicity.
//!
//! Periodic axes identify the two bounds; all difference and distance
//! helpers below return the minimal image, so wrapped distance is a metric.

use crate::error::{Error, Result};

/// Rectangle `[a1, b1] x [a2, b2]`, each axis independently periodic.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    bounds: [[f64; 2]; 2],
    periodic: [bool; 2],
}

impl Domain {
    /// `bounds[i] = [a_i, b_i]` with `a_i < b_i` and finite.
    pub fn new(bounds: [[f64; 2]; 2], periodic: [bool; 2]) -> Result<Self> {
        for (axis, b) in bounds.iter().enumerate() {
            if !(b[0].is_finite() && b[1].is_finite() && b[0] < b[1]) {
                return Err(Error::Config(format!(
                    "domain axis {axis} has invalid bounds [{}, {}]",
                    b[0], b[1]
                )));
            }
        }
        Ok(Self { bounds, periodic })
    }

    pub fn unit_square(periodic: [bool; 2]) -> Self {
        Self {
            bounds: [[0.0, 1.0], [0.0, 1.0]],
            periodic,
        }
    }

    #[inline]
    pub fn bounds(&self) -> [[f64; 2]; 2] {
        self.bounds
    }

    #[inline]
    pub fn lo(&self, axis: usize) -> f64 {
        self.bounds[axis][0]
    }

    #[inline]
    pub fn hi(&self, axis: usize) -> f64 {
        self.bounds[axis][1]
    }

    #[inline]
    pub fn periodic(&self) -> [bool; 2] {
        self.periodic
    }

    #[inline]
    pub fn fully_periodic(&self) -> bool {
        self.periodic[0] && self.periodic[1]
    }

    #[inline]
    pub fn extent(&self, axis: usize) -> f64 {
        self.bounds[axis][1] - self.bounds[axis][0]
    }

    /// Maps a point into the fundamental cell along periodic axes;
    /// non-periodic coordinates pass through unchanged.
    pub fn wrap(&self, mut p: [f64; 2]) -> [f64; 2] {
        for axis in 0..2 {
            if self.periodic[axis] {
                let a = self.bounds[axis][0];
                let len = self.extent(axis);
                p[axis] = a + (p[axis] - a).rem_euclid(len);
                // rem_euclid can return len when the offset is a tiny
                // negative number; fold the seam onto the lower bound.
                if p[axis] >= self.bounds[axis][1] {
                    p[axis] = a;
                }
            }
        }
        p
    }

    /// Minimal image of `a - b`, component by component.
    pub fn wrapped_diff(&self, a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
        let mut d = [a[0] - b[0], a[1] - b[1]];
        for axis in 0..2 {
            if self.periodic[axis] {
                let len = self.extent(axis);
                d[axis] -= len * (d[axis] / len).round();
            }
        }
        d
    }

    /// Euclidean wrapped distance.
    pub fn distance(&self, a: [f64; 2], b: [f64; 2]) -> f64 {
        let d = self.wrapped_diff(a, b);
        d[0].hypot(d[1])
    }

    /// Max-norm wrapped distance. Kernel supports are max-norm balls, so
    /// neighbor queries use this metric.
    pub fn distance_max(&self, a: [f64; 2], b: [f64; 2]) -> f64 {
        let d = self.wrapped_diff(a, b);
        d[0].abs().max(d[1].abs())
    }

    /// Closed containment with a small absolute slack for boundary points.
    pub fn contains(&self, p: [f64; 2]) -> bool {
        (0..2).all(|axis| {
            if self.periodic[axis] {
                true
            } else {
                let tol = 1e-12 * self.extent(axis).max(1.0);
                p[axis] >= self.bounds[axis][0] - tol && p[axis] <= self.bounds[axis][1] + tol
            }
        })
    }

    /// Distance to the nearest non-periodic boundary face; infinite when the
    /// domain is fully periodic.
    pub fn distance_to_boundary(&self, p: [f64; 2]) -> f64 {
        let mut d = f64::INFINITY;
        for axis in 0..2 {
            if !self.periodic[axis] {
                d = d
                    .min(p[axis] - self.bounds[axis][0])
                    .min(self.bounds[axis][1] - p[axis]);
            }
        }
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn wrap_into_cell() {
        let d = Domain::unit_square([true, false]);
        let p = d.wrap([1.25, 0.5]);
        assert_relative_eq!(p[0], 0.25, max_relative = 1e-15);
        assert_eq!(p[1], 0.5);
        let q = d.wrap([-0.25, 0.5]);
        assert_relative_eq!(q[0], 0.75, max_relative = 1e-15);
    }

    #[test]
    fn minimal_image_difference() {
        let d = Domain::unit_square([true, true]);
        let diff = d.wrapped_diff([0.01, 0.0], [0.99, 0.0]);
        assert_relative_eq!(diff[0], 0.02, epsilon = 1e-15);
        assert_relative_eq!(d.distance([0.01, 0.0], [0.99, 0.0]), 0.02, epsilon = 1e-15);
    }

    #[test]
    fn wrapped_distance_is_a_metric() {
        // symmetry, identity, and triangle inequality on random triples
        let d = Domain::unit_square([true, true]);
        let pts = [
            [0.1, 0.9],
            [0.95, 0.05],
            [0.5, 0.45],
            [0.02, 0.51],
            [0.73, 0.99],
        ];
        for &a in &pts {
            assert_eq!(d.distance(a, a), 0.0);
            for &b in &pts {
                assert_relative_eq!(d.distance(a, b), d.distance(b, a), epsilon = 1e-15);
                for &c in &pts {
                    assert!(d.distance(a, c) <= d.distance(a, b) + d.distance(b, c) + 1e-14);
                }
            }
        }
    }

    #[test]
    fn boundary_distance() {
        let d = Domain::unit_square([false, false]);
        assert_relative_eq!(d.distance_to_boundary([0.25, 0.5]), 0.25);
        let p = Domain::unit_square([true, true]);
        assert!(p.distance_to_boundary([0.5, 0.5]).is_infinite());
    }

    #[test]
    fn rejects_bad_bounds() {
        assert!(Domain::new([[0.0, 0.0], [0.0, 1.0]], [false, false]).is_err());
        assert!(Domain::new([[0.0, f64::NAN], [0.0, 1.0]], [false, false]).is_err());
    }
}
