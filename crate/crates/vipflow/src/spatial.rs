//! Uniform-bucket spatial index for fixed point sets.
//!
//! Buckets exactly tile the domain, so on periodic axes a wrapped query is a
//! modular shift of bucket coordinates. Queries accept any radius; the scan
//! widens to as many bucket columns as the radius needs. Results are exact:
//! candidates are filtered by wrapped max-norm distance strictly below the
//! radius and returned in ascending index order.

use crate::domain::Domain;

#[derive(Debug, Clone)]
pub struct SpatialHash {
    domain: Domain,
    dims: [usize; 2],
    cell: [f64; 2],
    /// CSR-style bucket storage: `items[starts[b]..starts[b+1]]` are the
    /// point indices in bucket `b`, ascending.
    starts: Vec<usize>,
    items: Vec<u32>,
}

impl SpatialHash {
    /// `cell_hint` sets the target bucket width; the actual width per axis is
    /// the extent divided by a whole bucket count.
    pub fn build(domain: &Domain, points: &[[f64; 2]], cell_hint: f64) -> Self {
        assert!(points.len() < u32::MAX as usize, "point count exceeds index width");
        let hint = if cell_hint.is_finite() && cell_hint > 0.0 {
            cell_hint
        } else {
            1.0
        };
        let mut dims = [1usize; 2];
        let mut cell = [0.0f64; 2];
        for axis in 0..2 {
            let extent = domain.extent(axis);
            dims[axis] = ((extent / hint).round() as usize).max(1);
            cell[axis] = extent / dims[axis] as f64;
        }

        let nb = dims[0] * dims[1];
        let mut counts = vec![0usize; nb + 1];
        let flat: Vec<usize> = points
            .iter()
            .map(|&p| Self::bucket_index(domain, dims, cell, p))
            .collect();
        for &b in &flat {
            counts[b + 1] += 1;
        }
        for b in 0..nb {
            counts[b + 1] += counts[b];
        }
        let mut items = vec![0u32; points.len()];
        let mut cursor = counts.clone();
        for (i, &b) in flat.iter().enumerate() {
            items[cursor[b]] = i as u32;
            cursor[b] += 1;
        }
        // insertion above preserves ascending order inside each bucket

        Self {
            domain: domain.clone(),
            dims,
            cell,
            starts: counts,
            items,
        }
    }

    fn bucket_coord(domain: &Domain, dims: [usize; 2], cell: [f64; 2], axis: usize, x: f64) -> usize {
        let rel = (x - domain.lo(axis)) / cell[axis];
        let mut k = rel.floor() as isize;
        let n = dims[axis] as isize;
        if domain.periodic()[axis] {
            k = k.rem_euclid(n);
        }
        k.clamp(0, n - 1) as usize
    }

    fn bucket_index(domain: &Domain, dims: [usize; 2], cell: [f64; 2], p: [f64; 2]) -> usize {
        let bx = Self::bucket_coord(domain, dims, cell, 0, p[0]);
        let by = Self::bucket_coord(domain, dims, cell, 1, p[1]);
        by * dims[0] + bx
    }

    /// Indices of stored points with wrapped max-norm distance `< radius`
    /// from `p`, ascending. `p` may lie outside the domain on non-periodic
    /// axes; the scan clamps to existing buckets.
    pub fn query(&self, points: &[[f64; 2]], p: [f64; 2], radius: f64) -> Vec<usize> {
        let mut out = Vec::new();
        if radius <= 0.0 {
            return out;
        }
        let mut ranges: [(isize, isize); 2] = [(0, 0); 2];
        for axis in 0..2 {
            let n = self.dims[axis] as isize;
            let lo_rel = (p[axis] - radius - self.domain.lo(axis)) / self.cell[axis];
            let hi_rel = (p[axis] + radius - self.domain.lo(axis)) / self.cell[axis];
            let mut lo = lo_rel.floor() as isize;
            let mut hi = hi_rel.floor() as isize;
            if self.domain.periodic()[axis] {
                if hi - lo + 1 >= n {
                    lo = 0;
                    hi = n - 1;
                }
            } else {
                lo = lo.clamp(0, n - 1);
                hi = hi.clamp(0, n - 1);
            }
            ranges[axis] = (lo, hi);
        }
        let nx = self.dims[0] as isize;
        let ny = self.dims[1] as isize;
        for by in ranges[1].0..=ranges[1].1 {
            let wy = by.rem_euclid(ny) as usize;
            for bx in ranges[0].0..=ranges[0].1 {
                let wx = bx.rem_euclid(nx) as usize;
                let b = wy * self.dims[0] + wx;
                for &i in &self.items[self.starts[b]..self.starts[b + 1]] {
                    let idx = i as usize;
                    if self.domain.distance_max(p, points[idx]) < radius {
                        out.push(idx);
                    }
                }
            }
        }
        out.sort_unstable();
        out.dedup(); // a wrapped scan can visit a bucket twice only when ranges collapse
        out
    }
}
