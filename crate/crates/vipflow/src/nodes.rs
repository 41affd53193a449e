//! Node sets: generation, perturbation, queries, and CSV round-trip.
//!
//! Nodes carry the velocity and pressure coefficients. The regular generator
//! places them at cell centers `a + (k + 1/2) h`, which on periodic axes
//! makes the set translation invariant and aligned with the collocation
//! lattice of [`crate::grid::VirtualGrid`].

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::spatial::SpatialHash;

/// Nodes closer than this are considered duplicates.
pub const MIN_SEPARATION: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct NodeSet {
    domain: Domain,
    positions: Vec<[f64; 2]>,
    /// Lattice spacing when generated by `generate_regular`; perturbation
    /// amplitudes are measured in units of this spacing.
    spacing: Option<f64>,
    hash: SpatialHash,
}

/// Number of lattice cells per axis; errors unless `h` tiles both extents
/// within `1e-9` relative.
pub(crate) fn lattice_counts(domain: &Domain, h: f64) -> Result<[usize; 2]> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::Config(format!("spacing must be positive, got {h}")));
    }
    let mut counts = [0usize; 2];
    for axis in 0..2 {
        let extent = domain.extent(axis);
        let n = (extent / h).round();
        if n < 1.0 || (n * h - extent).abs() > 1e-9 * extent.max(1.0) {
            return Err(Error::NonconformingSpacing { h, extent, axis });
        }
        counts[axis] = n as usize;
    }
    Ok(counts)
}

impl NodeSet {
    /// Wraps positions into the domain, validates containment and pairwise
    /// separation, and builds the spatial index.
    pub fn from_positions(domain: Domain, positions: Vec<[f64; 2]>) -> Result<Self> {
        Self::build(domain, positions, None)
    }

    fn build(domain: Domain, positions: Vec<[f64; 2]>, spacing: Option<f64>) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::Config("node set is empty".into()));
        }
        let mut wrapped = Vec::with_capacity(positions.len());
        for (i, &p) in positions.iter().enumerate() {
            if !(p[0].is_finite() && p[1].is_finite()) {
                return Err(Error::Config(format!("node {i} is not finite")));
            }
            let w = domain.wrap(p);
            if !domain.contains(w) {
                return Err(Error::Config(format!(
                    "node {i} at ({}, {}) lies outside the domain",
                    p[0], p[1]
                )));
            }
            wrapped.push(w);
        }
        let cell = spacing.unwrap_or_else(|| {
            let area = domain.extent(0) * domain.extent(1);
            (area / wrapped.len() as f64).sqrt().max(1e-9)
        });
        let hash = SpatialHash::build(&domain, &wrapped, cell);
        // duplicate scan through the index keeps construction near linear
        for (i, &p) in wrapped.iter().enumerate() {
            for j in hash.query(&wrapped, p, MIN_SEPARATION) {
                if j != i {
                    return Err(Error::DegenerateNodes { i: i.min(j), j: i.max(j) });
                }
            }
        }
        Ok(Self {
            domain,
            positions: wrapped,
            spacing,
            hash,
        })
    }

    /// Cell-centered lattice with spacing `h`, row-major with the first axis
    /// fastest. `h` must tile both extents.
    pub fn generate_regular(domain: &Domain, h: f64) -> Result<Self> {
        let counts = lattice_counts(domain, h)?;
        let mut positions = Vec::with_capacity(counts[0] * counts[1]);
        for iy in 0..counts[1] {
            for ix in 0..counts[0] {
                positions.push([
                    domain.lo(0) + (ix as f64 + 0.5) * h,
                    domain.lo(1) + (iy as f64 + 0.5) * h,
                ]);
            }
        }
        Self::build(domain.clone(), positions, Some(h))
    }

    /// Independent uniform offsets in `[-amplitude*h, amplitude*h]` per
    /// coordinate, reproducible for a fixed seed.
    ///
    /// Panics if `amplitude` is outside `[0, 0.45)` or the set was not built
    /// by `generate_regular` (there is no spacing to scale by). Amplitudes
    /// below `0.45` keep interior lattice nodes inside non-periodic domains
    /// and keep all nodes pairwise separated.
    pub fn perturbed(&self, amplitude: f64, seed: u64) -> Result<Self> {
        assert!(
            (0.0..0.45).contains(&amplitude),
            "perturbation amplitude must lie in [0, 0.45)"
        );
        let h = self
            .spacing
            .expect("perturbation requires a lattice-generated node set");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let positions = self
            .positions
            .iter()
            .map(|&p| {
                let dx = (2.0 * rng.random::<f64>() - 1.0) * amplitude * h;
                let dy = (2.0 * rng.random::<f64>() - 1.0) * amplitude * h;
                [p[0] + dx, p[1] + dy]
            })
            .collect();
        Self::build(self.domain.clone(), positions, Some(h))
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    #[inline]
    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    #[inline]
    pub fn positions(&self) -> &[[f64; 2]] {
        &self.positions
    }

    #[inline]
    pub fn position(&self, i: usize) -> [f64; 2] {
        self.positions[i]
    }

    #[inline]
    pub fn spacing(&self) -> Option<f64> {
        self.spacing
    }

    /// Indices with wrapped max-norm distance `< radius` from `point`,
    /// ascending. Exact: agrees with a brute-force scan.
    pub fn neighbor_query(&self, point: [f64; 2], radius: f64) -> Vec<usize> {
        self.hash.query(&self.positions, point, radius)
    }

    /// Plain-text CSV with header `x,y`; floats are shortest round-trip.
    pub fn save_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x,y")?;
        for p in &self.positions {
            writeln!(w, "{},{}", p[0], p[1])?;
        }
        Ok(())
    }

    pub fn save_csv_path<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.save_csv(std::io::BufWriter::new(f))
    }

    /// Reads a node CSV written by [`NodeSet::save_csv`]. The domain is not
    /// stored in the file and must be supplied.
    pub fn load_csv<P: AsRef<Path>>(domain: Domain, path: P) -> Result<Self> {
        let f = std::fs::File::open(&path)?;
        let reader = BufReader::new(f);
        let mut lines = reader.lines();
        match lines.next() {
            Some(Ok(h)) if h.trim() == "x,y" => {}
            _ => return Err(Error::Parse("node CSV must start with header 'x,y'".into())),
        }
        let mut positions = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            let mut cols = t.split(',');
            let x = cols
                .next()
                .and_then(|s| s.trim().parse::<f64>().ok())
                .ok_or_else(|| Error::Parse(format!("bad x on data line {}", lineno + 1)))?;
            let y = cols
                .next()
                .and_then(|s| s.trim().parse::<f64>().ok())
                .ok_or_else(|| Error::Parse(format!("bad y on data line {}", lineno + 1)))?;
            if cols.next().is_some() {
                return Err(Error::Parse(format!(
                    "extra columns on data line {}",
                    lineno + 1
                )));
            }
            positions.push([x, y]);
        }
        Self::from_positions(domain, positions)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn unit_square_half_spacing_gives_four_nodes() {
        let d = Domain::unit_square([true, true]);
        let n = NodeSet::generate_regular(&d, 0.5).unwrap();
        assert_eq!(n.len(), 4);
        assert_eq!(n.position(0), [0.25, 0.25]);
        assert_eq!(n.position(3), [0.75, 0.75]);
    }

    #[test]
    fn nonconforming_spacing_rejected() {
        let d = Domain::unit_square([true, true]);
        match NodeSet::generate_regular(&d, 0.3) {
            Err(Error::NonconformingSpacing { axis: 0, .. }) => {}
            other => panic!("expected NonconformingSpacing, got {other:?}"),
        }
    }

    #[test]
    fn wrapped_neighbor_across_seam() {
        let d = Domain::unit_square([true, true]);
        let n = NodeSet::from_positions(d, vec![[0.99, 0.0], [0.5, 0.5]]).unwrap();
        let hits = n.neighbor_query([0.01, 0.0], 0.05);
        assert_eq!(hits, vec![0]);
        assert_relative_eq!(
            n.domain().distance(n.position(0), [0.01, 0.0]),
            0.02,
            epsilon = 1e-15
        );
    }

    #[test]
    fn neighbor_query_matches_brute_force_after_perturbation() {
        let d = Domain::unit_square([true, true]);
        let n = NodeSet::generate_regular(&d, 1.0 / 8.0)
            .unwrap()
            .perturbed(0.2, 7)
            .unwrap();
        let p = [0.33, 0.61];
        let r = 0.3;
        let want: Vec<usize> = (0..n.len())
            .filter(|&i| n.domain().distance_max(p, n.position(i)) < r)
            .collect();
        assert_eq!(n.neighbor_query(p, r), want);
    }

    #[test]
    fn perturbation_is_deterministic_and_bounded() {
        let d = Domain::unit_square([true, true]);
        let base = NodeSet::generate_regular(&d, 1.0 / 16.0).unwrap();
        let a = base.perturbed(0.2, 123).unwrap();
        let b = base.perturbed(0.2, 123).unwrap();
        assert_eq!(a.positions(), b.positions());
        let c = base.perturbed(0.2, 124).unwrap();
        assert_ne!(a.positions(), c.positions());
        let h = 1.0 / 16.0;
        for (orig, new) in base.positions().iter().zip(a.positions()) {
            let diff = d.wrapped_diff(*new, *orig);
            assert!(diff[0].abs() <= 0.2 * h + 1e-15);
            assert!(diff[1].abs() <= 0.2 * h + 1e-15);
        }
    }

    #[test]
    fn duplicate_nodes_rejected() {
        let d = Domain::unit_square([false, false]);
        let r = NodeSet::from_positions(d, vec![[0.5, 0.5], [0.5, 0.5]]);
        match r {
            Err(Error::DegenerateNodes { i: 0, j: 1 }) => {}
            other => panic!("expected DegenerateNodes, got {other:?}"),
        }
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let d = Domain::unit_square([true, true]);
        let n = NodeSet::generate_regular(&d, 0.25)
            .unwrap()
            .perturbed(0.31, 9)
            .unwrap();
        let mut buf = Vec::new();
        n.save_csv(&mut buf).unwrap();
        let tmp = std::env::temp_dir().join("vipflow_nodes_roundtrip.csv");
        std::fs::write(&tmp, &buf).unwrap();
        let back = NodeSet::load_csv(n.domain().clone(), &tmp).unwrap();
        assert_eq!(back.positions(), n.positions());
        std::fs::remove_file(&tmp).ok();
    }
}
