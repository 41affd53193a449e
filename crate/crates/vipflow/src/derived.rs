//! Fields derived from a velocity solution: vorticity, stream
//! function, and centerline profiles.

use crate::assembly;
use crate::error::{Error, Result};
use crate::fields::FlowField;
use crate::grid::VirtualGrid;
use crate::solve::solve_linear_ls;
use crate::sparse::SparseOperator;
use crate::system::DirichletBc;

/// Vorticity samples `dv/dx - du/dy` at the given points.
pub fn compute_vorticity(field: &FlowField, points: &[[f64; 2]]) -> Result<Vec<f64>> {
    let (gx, gy) = assembly::gradient_direct(points, field.nodes(), field.kernel())?;
    let wx = gx.mul_vec(&field.v);
    let wy = gy.mul_vec(&field.u);
    Ok(wx.iter().zip(&wy).map(|(a, b)| a - b).collect())
}

/// Stream-function coefficients on the field's nodes, from solving
/// `-laplacian(psi) = vorticity` collocated at the interior virtual
/// points.  Enclosed domains pin `psi = 0` along the walls (which also
/// fixes the gauge); fully periodic domains use a mean-zero gauge row.
pub fn compute_streamfunction(field: &FlowField) -> Result<Vec<f64>> {
    let domain = field.domain().clone();
    let h = field.h();
    let nodes = field.nodes();
    let kernel = field.kernel();
    let grid = VirtualGrid::new(&domain, h)?;
    let sites = grid.points();

    let colocated = nodes.len() == grid.len()
        && nodes
            .positions()
            .iter()
            .enumerate()
            .all(|(i, q)| domain.distance_max(*q, grid.point(i)) <= 1e-9 * h);
    let laplacian = if colocated {
        let (dx, dy) = assembly::staggered_blocks(&grid, nodes, kernel)?;
        assembly::laplacian_composite(&dx, &dy)?
    } else {
        assembly::laplacian_direct(&sites, nodes, kernel)?
    };

    let omega = compute_vorticity(field, &sites)?;
    let n = nodes.len();

    let mut blocks: Vec<SparseOperator> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    if domain.fully_periodic() {
        blocks.push(laplacian.scale(-1.0));
        rhs.extend_from_slice(&omega);
        let mean_row = SparseOperator::from_rows(
            n,
            vec![(0..n).map(|j| (j, 1.0 / n as f64)).collect()],
        );
        blocks.push(mean_row?);
        rhs.push(0.0);
    } else {
        let kept: Vec<usize> = (0..grid.len())
            .filter(|&i| domain.distance_to_boundary(grid.point(i)) >= h)
            .collect();
        blocks.push(laplacian.select_rows(&kept).scale(-1.0));
        rhs.extend(kept.iter().map(|&i| omega[i]));
        let bc = DirichletBc::sample(&domain, h, |_| [0.0, 0.0])?;
        blocks.push(assembly::interpolation(&bc.points, nodes, kernel)?);
        rhs.extend(std::iter::repeat(0.0).take(bc.points.len()));
    }
    let refs: Vec<&SparseOperator> = blocks.iter().collect();
    let k = SparseOperator::vstack(&refs)?;
    let (mut psi, _) = solve_linear_ls(&k, &rhs)?;
    if domain.fully_periodic() {
        let mean = psi.iter().sum::<f64>() / n as f64;
        for t in psi.iter_mut() {
            *t -= mean;
        }
    }
    Ok(psi)
}

/// Which centerline of the domain to walk.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Centerline {
    /// Vertical line x = position; reports the u component against y.
    Vertical,
    /// Horizontal line y = position; reports the v component against x.
    Horizontal,
}

/// `(coordinate, velocity)` rows at equispaced stations along a line
/// through the domain.
pub fn extract_centerline(
    field: &FlowField,
    line: Centerline,
    position: f64,
    samples: usize,
) -> Result<Vec<(f64, f64)>> {
    if samples < 2 {
        return Err(Error::Config(format!(
            "centerline needs at least 2 samples, got {samples}"
        )));
    }
    let domain = field.domain();
    let axis = match line {
        Centerline::Vertical => 1,
        Centerline::Horizontal => 0,
    };
    let fixed = 1 - axis;
    let bounds = domain.bounds();
    if !(bounds[fixed][0] <= position && position <= bounds[fixed][1]) {
        return Err(Error::Config(format!(
            "line position {position} falls outside the domain"
        )));
    }
    let (lo, hi) = (bounds[axis][0], bounds[axis][1]);
    let mut rows = Vec::with_capacity(samples);
    for k in 0..samples {
        let t = lo + (hi - lo) * k as f64 / (samples - 1) as f64;
        let mut q = [position; 2];
        q[axis] = t;
        let vel = field.velocity_at(q)?;
        let value = match line {
            Centerline::Vertical => vel[0],
            Centerline::Horizontal => vel[1],
        };
        rows.push((t, value));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Domain;
    use crate::manufactured;
    use crate::nodes::NodeSet;
    use crate::shape::KernelConfig;

    fn nodal_field(
        domain: Domain,
        h: f64,
        f: impl Fn([f64; 2]) -> [f64; 2],
    ) -> FlowField {
        let nodes = NodeSet::generate_regular(&domain, h).unwrap();
        let kernel = KernelConfig::quadratic(h);
        let u = nodes.positions().iter().map(|q| f(*q)[0]).collect();
        let v = nodes.positions().iter().map(|q| f(*q)[1]).collect();
        let p = vec![0.0; nodes.len()];
        FlowField::new(nodes, kernel, h, u, v, p).unwrap()
    }

    #[test]
    fn rigid_rotation_has_vorticity_two() {
        let field = nodal_field(Domain::unit_square([false, false]), 0.125, |q| {
            [-q[1], q[0]]
        });
        let grid = VirtualGrid::new(field.domain(), field.h()).unwrap();
        for w in compute_vorticity(&field, &grid.points()).unwrap() {
            assert!((w - 2.0).abs() < 1e-8, "vorticity {w}");
        }
    }

    #[test]
    fn constant_field_has_zero_vorticity() {
        let field = nodal_field(Domain::unit_square([false, false]), 0.125, |_| [0.7, -0.3]);
        for w in compute_vorticity(&field, &[[0.4, 0.6], [0.9, 0.1]]).unwrap() {
            assert!(w.abs() < 1e-9);
        }
    }

    #[test]
    fn kovasznay_vorticity_tracks_the_closed_form() {
        let problem = manufactured::kovasznay(40.0);
        let h = 0.0625;
        let field = nodal_field(problem.domain.clone(), h, |q| problem.velocity(q));
        let flow = crate::kovasznay::KovasznayFlow::new(40.0);
        let lam = flow.lambda;
        let points = [[0.3, 0.7], [0.8, 1.2], [0.1, 0.4], [1.1, 1.7]];
        let omega = compute_vorticity(&field, &points).unwrap();
        let two_pi = 2.0 * std::f64::consts::PI;
        for (q, w) in points.iter().zip(&omega) {
            let exact =
                (lam * lam / two_pi - two_pi) * (lam * q[0]).exp() * (two_pi * q[1]).sin();
            assert!(
                (w - exact).abs() < 0.05 * exact.abs().max(1.0),
                "at {q:?}: {w} vs {exact}"
            );
        }
    }

    #[test]
    fn zero_velocity_gives_zero_streamfunction() {
        let field = nodal_field(Domain::unit_square([false, false]), 0.25, |_| [0.0, 0.0]);
        let psi = compute_streamfunction(&field).unwrap();
        assert!(psi.iter().all(|t| t.abs() < 1e-12));
    }

    #[test]
    fn trig_velocity_recovers_its_stream_function() {
        // u = d(psi)/dy, v = -d(psi)/dx for psi = sin(2 pi x) sin(2 pi y)
        let problem = manufactured::trig_periodic();
        let h = 1.0 / 16.0;
        let field = nodal_field(problem.domain.clone(), h, |q| problem.velocity(q));
        let psi = compute_streamfunction(&field).unwrap();
        let two_pi = 2.0 * std::f64::consts::PI;
        let mut worst: f64 = 0.0;
        for (q, got) in field.nodes().positions().iter().zip(&psi) {
            let exact = (two_pi * q[0]).sin() * (two_pi * q[1]).sin();
            worst = worst.max((got - exact).abs());
        }
        assert!(worst < 0.05, "max-norm gap {worst}");
        // mean-zero gauge is idempotent
        let mean = psi.iter().sum::<f64>() / psi.len() as f64;
        assert!(mean.abs() < 1e-12);
    }

    #[test]
    fn centerline_rows_are_equispaced_and_component_correct() {
        let field = nodal_field(Domain::unit_square([false, false]), 0.125, |_| [0.4, -0.9]);
        let rows = extract_centerline(&field, Centerline::Vertical, 0.5, 5).unwrap();
        assert_eq!(rows.len(), 5);
        assert_eq!(rows[0].0, 0.0);
        assert_eq!(rows[4].0, 1.0);
        assert!((rows[1].0 - 0.25).abs() < 1e-15);
        for (_, val) in &rows {
            assert!((val - 0.4).abs() < 1e-9);
        }
        let rows = extract_centerline(&field, Centerline::Horizontal, 0.5, 2).unwrap();
        assert_eq!(rows.len(), 2);
        for (_, val) in &rows {
            assert!((val + 0.9).abs() < 1e-9);
        }
    }

    #[test]
    fn centerline_rejects_degenerate_requests() {
        let field = nodal_field(Domain::unit_square([false, false]), 0.25, |_| [0.0, 0.0]);
        assert!(extract_centerline(&field, Centerline::Vertical, 0.5, 1).is_err());
        assert!(extract_centerline(&field, Centerline::Vertical, 1.5, 3).is_err());
    }
}
