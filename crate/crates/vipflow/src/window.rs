//! Compactly supported window: tensor product of the C2 cubic spline.
//!
//! The 1D profile on `r = |t|` is
//! `2/3 - 4r^2 + 4r^3` for `r <= 1/2`, `4/3 - 4r + 4r^2 - (4/3) r^3` for
//! `1/2 < r <= 1`, zero beyond. Value, first, and second derivative all
//! vanish at `r = 1`, so the tensor window is C2 on the whole plane and the
//! support is exactly the unit max-norm ball in scaled coordinates.

/// Value, gradient, and the two pure second derivatives of the window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowJet {
    pub value: f64,
    pub grad: [f64; 2],
    /// `[d11, d22]`; the mixed derivative is `d1 phi * d2 phi` and is not
    /// needed by any operator here.
    pub hess_diag: [f64; 2],
    pub hess_mixed: f64,
}

/// Tensor-product cubic-spline window, support `max(|z1|, |z2|) < 1`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct WindowFunction;

/// 1D profile value, first, and second derivative at signed `t`.
#[inline]
pub fn spline_jet(t: f64) -> (f64, f64, f64) {
    let r = t.abs();
    let s = if t < 0.0 { -1.0 } else { 1.0 };
    if r <= 0.5 {
        (
            2.0 / 3.0 - 4.0 * r * r + 4.0 * r * r * r,
            s * (-8.0 * r + 12.0 * r * r),
            -8.0 + 24.0 * r,
        )
    } else if r <= 1.0 {
        let omr = 1.0 - r;
        (
            (4.0 / 3.0) * omr * omr * omr,
            s * (-4.0 * omr * omr),
            8.0 * omr,
        )
    } else {
        (0.0, 0.0, 0.0)
    }
}

impl WindowFunction {
    /// Window value at scaled coordinates.
    #[inline]
    pub fn value(&self, z: [f64; 2]) -> f64 {
        spline_jet(z[0]).0 * spline_jet(z[1]).0
    }

    /// Full jet at scaled coordinates.
    #[inline]
    pub fn jet(&self, z: [f64; 2]) -> WindowJet {
        let (f1, d1, dd1) = spline_jet(z[0]);
        let (f2, d2, dd2) = spline_jet(z[1]);
        WindowJet {
            value: f1 * f2,
            grad: [d1 * f2, f1 * d2],
            hess_diag: [dd1 * f2, f1 * dd2],
            hess_mixed: d1 * d2,
        }
    }
}
