//! Benchmark problems with known solutions.
//!
//! Each problem carries closures for the exact velocity, pressure, and
//! forcing, plus how the domain is closed. The polynomial problem sits
//! inside the kernel's reproduction space, so the discrete solve is exact to
//! rounding; the trigonometric and Kovasznay problems probe genuine
//! convergence orders.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::domain::Domain;
use crate::error::Result;
use crate::kovasznay::KovasznayFlow;
use crate::system::{BoundaryCondition, DirichletBc};

type VectorFn = Arc<dyn Fn([f64; 2]) -> [f64; 2] + Send + Sync>;
type ScalarFn = Arc<dyn Fn([f64; 2]) -> f64 + Send + Sync>;

/// How the domain boundary is closed for a problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Closure {
    Periodic,
    /// Wall data sampled from the exact velocity.
    DirichletFromTruth,
}

#[derive(Clone)]
pub struct ManufacturedProblem {
    pub name: &'static str,
    pub domain: Domain,
    pub viscosity: f64,
    /// Forcing already includes the convective term when this is set, so the
    /// problem must be solved with the nonlinear iteration.
    pub convective: bool,
    pub closure: Closure,
    velocity: VectorFn,
    pressure: ScalarFn,
    forcing: VectorFn,
}

impl ManufacturedProblem {
    #[inline]
    pub fn velocity(&self, p: [f64; 2]) -> [f64; 2] {
        (self.velocity)(p)
    }

    #[inline]
    pub fn pressure(&self, p: [f64; 2]) -> f64 {
        (self.pressure)(p)
    }

    #[inline]
    pub fn forcing(&self, p: [f64; 2]) -> [f64; 2] {
        (self.forcing)(p)
    }

    /// Exact velocity sampled at a point list, stacked `(all u, all v)`.
    pub fn velocity_samples(&self, points: &[[f64; 2]]) -> Vec<f64> {
        let mut out = Vec::with_capacity(2 * points.len());
        out.extend(points.iter().map(|&p| self.velocity(p)[0]));
        out.extend(points.iter().map(|&p| self.velocity(p)[1]));
        out
    }

    pub fn pressure_samples(&self, points: &[[f64; 2]]) -> Vec<f64> {
        points.iter().map(|&p| self.pressure(p)).collect()
    }

    /// Collocated forcing values, stacked `(f_x at all points, f_y ...)`.
    pub fn forcing_samples(&self, points: &[[f64; 2]]) -> Vec<f64> {
        let mut out = Vec::with_capacity(2 * points.len());
        out.extend(points.iter().map(|&p| self.forcing(p)[0]));
        out.extend(points.iter().map(|&p| self.forcing(p)[1]));
        out
    }

    /// Closure of the domain at spacing `h`.
    pub fn boundary_condition(&self, h: f64) -> Result<BoundaryCondition> {
        match self.closure {
            Closure::Periodic => Ok(BoundaryCondition::Periodic),
            Closure::DirichletFromTruth => {
                let vel = self.velocity.clone();
                Ok(BoundaryCondition::Dirichlet(DirichletBc::sample(
                    &self.domain,
                    h,
                    move |p| vel(p),
                )?))
            }
        }
    }
}

impl std::fmt::Debug for ManufacturedProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ManufacturedProblem")
            .field("name", &self.name)
            .field("viscosity", &self.viscosity)
            .field("convective", &self.convective)
            .field("closure", &self.closure)
            .finish()
    }
}

/// Divergence-free trigonometric field on the fully periodic unit square:
/// the stream function `sin(2 pi x) sin(2 pi y)` with pressure
/// `cos(2 pi x)`, unit viscosity.
pub fn trig_periodic() -> ManufacturedProblem {
    let velocity = |p: [f64; 2]| {
        let (sx, cx) = (2.0 * PI * p[0]).sin_cos();
        let (sy, cy) = (2.0 * PI * p[1]).sin_cos();
        [2.0 * PI * sx * cy, -2.0 * PI * cx * sy]
    };
    ManufacturedProblem {
        name: "trig-periodic",
        domain: Domain::unit_square([true, true]),
        viscosity: 1.0,
        convective: false,
        closure: Closure::Periodic,
        velocity: Arc::new(velocity),
        pressure: Arc::new(|p| (2.0 * PI * p[0]).cos()),
        forcing: Arc::new(move |p| {
            // -lap(v) + grad(q) with lap(v) = -8 pi^2 v
            let v = velocity(p);
            let k = 8.0 * PI * PI;
            [k * v[0] - 2.0 * PI * (2.0 * PI * p[0]).sin(), k * v[1]]
        }),
    }
}

/// Divergence-free quadratic velocity with linear pressure on the unit
/// square, walls from truth. Lies in the reproduction space of a quadratic
/// kernel: the discrete residual is exactly zero and the solve reproduces
/// the coefficients to rounding.
pub fn polynomial_square() -> ManufacturedProblem {
    ManufacturedProblem {
        name: "polynomial-square",
        domain: Domain::unit_square([false, false]),
        viscosity: 1.0,
        convective: false,
        closure: Closure::DirichletFromTruth,
        velocity: Arc::new(|p| {
            [
                p[0] * p[0] + p[0] * p[1],
                p[0] * p[0] - 2.0 * p[0] * p[1] - 0.5 * p[1] * p[1],
            ]
        }),
        pressure: Arc::new(|p| 1.0 + 2.0 * p[0] + 3.0 * p[1]),
        forcing: Arc::new(|_| [0.0, 2.0]),
    }
}

/// Kovasznay wake at the given Reynolds number: zero forcing, viscosity
/// `1/Re`, convective.
pub fn kovasznay(re: f64) -> ManufacturedProblem {
    let flow = KovasznayFlow::new(re);
    ManufacturedProblem {
        name: "kovasznay",
        domain: KovasznayFlow::domain(),
        viscosity: flow.viscosity(),
        convective: true,
        closure: Closure::DirichletFromTruth,
        velocity: Arc::new(move |p| flow.velocity(p)),
        pressure: Arc::new(move |p| flow.pressure(p)),
        forcing: Arc::new(|_| [0.0, 0.0]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn fd_residual_stokes(pr: &ManufacturedProblem, x: [f64; 2]) -> [f64; 3] {
        // [momentum_x, momentum_y, divergence] by central differences
        let e = 1e-5;
        let f = |p: [f64; 2]| pr.velocity(p);
        let vc = f(x);
        let vxp = f([x[0] + e, x[1]]);
        let vxm = f([x[0] - e, x[1]]);
        let vyp = f([x[0], x[1] + e]);
        let vym = f([x[0], x[1] - e]);
        let frc = pr.forcing(x);
        let mut out = [0.0; 3];
        for comp in 0..2 {
            let lap = (vxp[comp] - 2.0 * vc[comp] + vxm[comp]) / (e * e)
                + (vyp[comp] - 2.0 * vc[comp] + vym[comp]) / (e * e);
            let gp = if comp == 0 {
                (pr.pressure([x[0] + e, x[1]]) - pr.pressure([x[0] - e, x[1]])) / (2.0 * e)
            } else {
                (pr.pressure([x[0], x[1] + e]) - pr.pressure([x[0], x[1] - e])) / (2.0 * e)
            };
            out[comp] = -pr.viscosity * lap + gp - frc[comp];
        }
        out[2] = (vxp[0] - vxm[0]) / (2.0 * e) + (vyp[1] - vym[1]) / (2.0 * e);
        out
    }

    #[test]
    fn trig_problem_satisfies_stokes() {
        let pr = trig_periodic();
        for &x in &[[0.13, 0.82], [0.5, 0.25], [0.99, 0.01]] {
            let r = fd_residual_stokes(&pr, x);
            assert_abs_diff_eq!(r[0], 0.0, epsilon = 5e-3); // 8 pi^2 scale
            assert_abs_diff_eq!(r[1], 0.0, epsilon = 5e-3);
            assert_abs_diff_eq!(r[2], 0.0, epsilon = 1e-5);
        }
    }

    #[test]
    fn polynomial_problem_satisfies_stokes() {
        let pr = polynomial_square();
        for &x in &[[0.2, 0.7], [0.5, 0.5], [0.9, 0.1]] {
            let r = fd_residual_stokes(&pr, x);
            assert_abs_diff_eq!(r[0], 0.0, epsilon = 1e-5);
            assert_abs_diff_eq!(r[1], 0.0, epsilon = 1e-5);
            assert_abs_diff_eq!(r[2], 0.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn boundary_closures_match_domains() {
        assert!(matches!(
            trig_periodic().boundary_condition(0.25).unwrap(),
            BoundaryCondition::Periodic
        ));
        match polynomial_square().boundary_condition(0.25).unwrap() {
            BoundaryCondition::Dirichlet(d) => {
                assert_eq!(d.len(), 16);
                let pr = polynomial_square();
                for (p, v) in d.points.iter().zip(&d.values) {
                    assert_eq!(*v, pr.velocity(*p));
                }
            }
            _ => panic!("expected wall data"),
        }
    }

    #[test]
    fn kovasznay_problem_is_convective_with_zero_forcing() {
        let pr = kovasznay(40.0);
        assert!(pr.convective);
        assert_eq!(pr.forcing([0.3, 0.8]), [0.0, 0.0]);
        assert_abs_diff_eq!(pr.viscosity, 0.025);
    }
}
