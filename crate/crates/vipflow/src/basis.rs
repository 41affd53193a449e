//! Bivariate monomial basis in graded ordering, with analytic derivatives.
//!
//! Ordering is by total degree, first exponent descending inside each degree
//! block: `1, x1, x2, x1^2, x1 x2, x2^2, ...`. The constant comes first, so
//! the reproducing-kernel weight vector is the first column of the inverse
//! moment matrix.

/// Monomials of total degree `<= degree` in two variables.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialBasis {
    degree: usize,
    exps: Vec<[u32; 2]>,
}

impl PolynomialBasis {
    pub fn new(degree: usize) -> Self {
        assert!(degree <= 6, "basis degree above 6 is not supported");
        let mut exps = Vec::new();
        for d in 0..=degree as u32 {
            for a2 in 0..=d {
                exps.push([d - a2, a2]);
            }
        }
        Self { degree, exps }
    }

    #[inline]
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Number of basis functions, `(m+1)(m+2)/2`.
    #[inline]
    pub fn len(&self) -> usize {
        self.exps.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn exponents(&self) -> &[[u32; 2]] {
        &self.exps
    }

    /// Writes all monomials at `z` into `out`.
    pub fn eval_into(&self, z: [f64; 2], out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.exps.len());
        let p1 = powers(z[0], self.degree);
        let p2 = powers(z[1], self.degree);
        for (k, e) in self.exps.iter().enumerate() {
            out[k] = p1[e[0] as usize] * p2[e[1] as usize];
        }
    }

    /// Writes `d^beta` of all monomials at `z` into `out`.
    pub fn eval_deriv_into(&self, z: [f64; 2], beta: [u32; 2], out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.exps.len());
        let p1 = powers(z[0], self.degree);
        let p2 = powers(z[1], self.degree);
        for (k, e) in self.exps.iter().enumerate() {
            if e[0] < beta[0] || e[1] < beta[1] {
                out[k] = 0.0;
                continue;
            }
            let c = falling(e[0], beta[0]) * falling(e[1], beta[1]);
            out[k] = c
                * p1[(e[0] - beta[0]) as usize]
                * p2[(e[1] - beta[1]) as usize];
        }
    }
}

fn powers(x: f64, max: usize) -> [f64; 7] {
    let mut p = [1.0; 7];
    for k in 1..=max {
        p[k] = p[k - 1] * x;
    }
    p
}

/// `a (a-1) ... (a-b+1)` as a float; `1` when `b = 0`.
fn falling(a: u32, b: u32) -> f64 {
    let mut acc = 1.0;
    for k in 0..b {
        acc *= (a - k) as f64;
    }
    acc
}
