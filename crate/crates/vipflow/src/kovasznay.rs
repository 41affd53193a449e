//! Kovasznay's closed-form steady wake flow.
//!
//! With `lambda = Re/2 - sqrt(Re^2/4 + 4 pi^2)`:
//!
//! ```text
//! u = 1 - exp(lambda x) cos(2 pi y)
//! v = (lambda / 2 pi) exp(lambda x) sin(2 pi y)
//! p = (1 - exp(2 lambda x)) / 2
//! ```
//!
//! solves the steady Navier-Stokes equations with viscosity `1/Re` and zero
//! forcing, conventionally posed on `[-0.5, 1.5] x [0, 2]` with the exact
//! velocity as wall data.

use std::f64::consts::PI;

use crate::domain::Domain;

#[derive(Debug, Clone, Copy)]
pub struct KovasznayFlow {
    pub re: f64,
    pub lambda: f64,
}

impl KovasznayFlow {
    pub fn new(re: f64) -> Self {
        assert!(re > 0.0, "Reynolds number must be positive");
        let lambda = 0.5 * re - (0.25 * re * re + 4.0 * PI * PI).sqrt();
        Self { re, lambda }
    }

    /// The conventional benchmark window.
    pub fn domain() -> Domain {
        Domain::new([[-0.5, 1.5], [0.0, 2.0]], [false, false]).unwrap()
    }

    #[inline]
    pub fn viscosity(&self) -> f64 {
        1.0 / self.re
    }

    pub fn velocity(&self, p: [f64; 2]) -> [f64; 2] {
        let e = (self.lambda * p[0]).exp();
        let t = 2.0 * PI * p[1];
        [
            1.0 - e * t.cos(),
            self.lambda / (2.0 * PI) * e * t.sin(),
        ]
    }

    pub fn pressure(&self, p: [f64; 2]) -> f64 {
        0.5 * (1.0 - (2.0 * self.lambda * p[0]).exp())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn frozen_values_at_re_40() {
        let k = KovasznayFlow::new(40.0);
        assert_relative_eq!(k.lambda, -0.9637405441957689, epsilon = 1e-15);
        let p = [0.5, 0.25];
        let vel = k.velocity(p);
        assert_relative_eq!(vel[0], 1.0, epsilon = 1e-15);
        assert_relative_eq!(vel[1], -0.09473417152405315, epsilon = 1e-15);
        assert_relative_eq!(k.pressure(p), 0.3092683332341288, epsilon = 1e-15);
    }

    #[test]
    fn satisfies_momentum_and_continuity_pointwise() {
        // finite-difference check of -nu lap(v) + (v . grad) v + grad p = 0
        // and div v = 0 at a few interior points
        let k = KovasznayFlow::new(40.0);
        let nu = k.viscosity();
        let e = 1e-5;
        for &x in &[[0.0, 0.3], [0.7, 1.2], [-0.3, 1.9], [1.2, 0.05]] {
            let f = |p: [f64; 2]| k.velocity(p);
            let vc = f(x);
            let xp = [[x[0] + e, x[1]], [x[0] - e, x[1]], [x[0], x[1] + e], [x[0], x[1] - e]];
            let (vxp, vxm, vyp, vym) = (f(xp[0]), f(xp[1]), f(xp[2]), f(xp[3]));
            let div = (vxp[0] - vxm[0]) / (2.0 * e) + (vyp[1] - vym[1]) / (2.0 * e);
            assert_abs_diff_eq!(div, 0.0, epsilon = 1e-6);
            for comp in 0..2 {
                let lap = (vxp[comp] - 2.0 * vc[comp] + vxm[comp]) / (e * e)
                    + (vyp[comp] - 2.0 * vc[comp] + vym[comp]) / (e * e);
                let adv = vc[0] * (vxp[comp] - vxm[comp]) / (2.0 * e)
                    + vc[1] * (vyp[comp] - vym[comp]) / (2.0 * e);
                let gp = if comp == 0 {
                    (k.pressure(xp[0]) - k.pressure(xp[1])) / (2.0 * e)
                } else {
                    (k.pressure(xp[2]) - k.pressure(xp[3])) / (2.0 * e)
                };
                assert_abs_diff_eq!(-nu * lap + adv + gp, 0.0, epsilon = 1e-4);
            }
        }
    }
}
