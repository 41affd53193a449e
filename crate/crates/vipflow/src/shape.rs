//! Moving least squares reproducing-kernel shape functions.
//!
//! At an evaluation point `x` with scaled offsets `z_I = (x - x_I) / rho`,
//! the moment matrix is `M(x) = sum_I P(z_I) P(z_I)^T Phi(z_I) / rho^2` and
//! the shape function of node `I` is
//! `psi_I(x) = e_1^T M(x)^{-1} P(z_I) Phi(z_I) / rho^2`.
//! Discrete fields are projected through `sum_I psi_I(x) c_I`, which
//! reproduces every polynomial up to the basis degree exactly.
//!
//! Derivatives are the full analytic ones: the chain rule runs through the
//! moment matrix via `d(M^{-1}) = -M^{-1} (dM) M^{-1}` and its second-order
//! analogue, not the cheaper fixed-coefficient shortcut, so derivative
//! reproduction holds on arbitrary (including perturbed) node layouts.
//!
//! Offsets use the minimal image on periodic axes; the dilation must not
//! exceed half the extent of any periodic axis or a node could enter the
//! support twice.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::basis::PolynomialBasis;
use crate::error::{Error, Result};
use crate::nodes::NodeSet;
use crate::window::WindowFunction;

/// Cholesky pivots whose relative spread exceeds this are treated as a
/// factorization failure (condition of order 1e14).
const MAX_PIVOT_RATIO: f64 = 1e7;

/// Support radius `rho` and its ratio to the lattice spacing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DilationParameter {
    pub rho: f64,
    pub ratio: f64,
}

impl DilationParameter {
    /// `rho = ratio * h`. The default ratio 2.6 gives a quadratic basis a
    /// comfortably unisolvent support on cell-centered lattices, including
    /// one-sided supports at boundaries.
    pub fn from_ratio(ratio: f64, h: f64) -> Self {
        assert!(ratio > 0.0 && h > 0.0, "dilation requires positive ratio and spacing");
        Self { rho: ratio * h, ratio }
    }
}

/// Degree and dilation of the kernel; the window profile is fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelConfig {
    degree: usize,
    dilation: DilationParameter,
    basis: PolynomialBasis,
    window: WindowFunction,
}

impl KernelConfig {
    pub fn new(degree: usize, dilation: DilationParameter) -> Self {
        Self {
            degree,
            dilation,
            basis: PolynomialBasis::new(degree),
            window: WindowFunction,
        }
    }

    /// Quadratic basis at ratio 2.6, the configuration used by the flow
    /// benchmarks.
    pub fn quadratic(h: f64) -> Self {
        Self::new(2, DilationParameter::from_ratio(2.6, h))
    }

    #[inline]
    pub fn degree(&self) -> usize {
        self.degree
    }

    #[inline]
    pub fn dilation(&self) -> DilationParameter {
        self.dilation
    }

    #[inline]
    pub fn rho(&self) -> f64 {
        self.dilation.rho
    }

    #[inline]
    pub fn basis(&self) -> &PolynomialBasis {
        &self.basis
    }

    #[inline]
    pub fn window(&self) -> &WindowFunction {
        &self.window
    }
}

/// Which derivative orders to produce alongside the values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DerivMask {
    pub first: bool,
    pub second: bool,
}

impl DerivMask {
    /// Values only.
    pub fn value() -> Self {
        Self { first: false, second: false }
    }

    /// Values and first derivatives.
    pub fn first() -> Self {
        Self { first: true, second: false }
    }

    /// Values, first derivatives, and the pure second derivatives.
    pub fn full() -> Self {
        Self { first: true, second: true }
    }
}

/// Shape values (and requested derivatives) of all nodes in the support of
/// one evaluation point. Vectors run parallel to `indices`, which ascend.
#[derive(Debug, Clone, Default)]
pub struct ShapeRow {
    pub indices: Vec<usize>,
    pub psi: Vec<f64>,
    pub dx: Vec<f64>,
    pub dy: Vec<f64>,
    pub dxx: Vec<f64>,
    pub dyy: Vec<f64>,
}

impl ShapeRow {
    #[inline]
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    fn dot(idx: &[usize], w: &[f64], coeffs: &[f64]) -> f64 {
        idx.iter().zip(w).map(|(&i, &wi)| wi * coeffs[i]).sum()
    }

    /// Interpolated value `sum_I psi_I c_I`.
    pub fn dot_value(&self, coeffs: &[f64]) -> f64 {
        Self::dot(&self.indices, &self.psi, coeffs)
    }

    pub fn dot_dx(&self, coeffs: &[f64]) -> f64 {
        Self::dot(&self.indices, &self.dx, coeffs)
    }

    pub fn dot_dy(&self, coeffs: &[f64]) -> f64 {
        Self::dot(&self.indices, &self.dy, coeffs)
    }

    pub fn dot_dxx(&self, coeffs: &[f64]) -> f64 {
        Self::dot(&self.indices, &self.dxx, coeffs)
    }

    pub fn dot_dyy(&self, coeffs: &[f64]) -> f64 {
        Self::dot(&self.indices, &self.dyy, coeffs)
    }
}

/// Moment matrix of one evaluation point with a spectral condition estimate.
#[derive(Debug, Clone)]
pub struct MomentMatrix {
    pub matrix: DMatrix<f64>,
    pub condition_estimate: f64,
}

struct Support {
    indices: Vec<usize>,
    /// per neighbor: scaled offset z and window jet pieces, chain-rule scaled
    z: Vec<[f64; 2]>,
    w: Vec<f64>,
    wx: Vec<[f64; 2]>,
    wxx: Vec<[f64; 2]>,
}

fn gather_support(
    x: [f64; 2],
    nodes: &NodeSet,
    cfg: &KernelConfig,
    mask: DerivMask,
) -> Result<Support> {
    let rho = cfg.rho();
    let q = cfg.basis().len();
    let indices = nodes.neighbor_query(x, rho);
    if indices.len() < q {
        return Err(Error::InsufficientNeighbors {
            x: x[0],
            y: x[1],
            found: indices.len(),
            needed: q,
        });
    }
    let inv_rho = 1.0 / rho;
    let s2 = inv_rho * inv_rho;
    let s3 = s2 * inv_rho;
    let s4 = s3 * inv_rho;
    let domain = nodes.domain();
    let n = indices.len();
    let mut sup = Support {
        indices,
        z: Vec::with_capacity(n),
        w: Vec::with_capacity(n),
        wx: Vec::new(),
        wxx: Vec::new(),
    };
    if mask.first {
        sup.wx.reserve(n);
    }
    if mask.second {
        sup.wxx.reserve(n);
    }
    for &i in &sup.indices {
        let d = domain.wrapped_diff(x, nodes.position(i));
        let z = [d[0] * inv_rho, d[1] * inv_rho];
        sup.z.push(z);
        if mask.first || mask.second {
            let jet = cfg.window().jet(z);
            sup.w.push(jet.value * s2);
            if mask.first {
                sup.wx.push([jet.grad[0] * s3, jet.grad[1] * s3]);
            }
            if mask.second {
                sup.wxx.push([jet.hess_diag[0] * s4, jet.hess_diag[1] * s4]);
            }
        } else {
            sup.w.push(cfg.window().value(z) * s2);
        }
    }
    Ok(sup)
}

fn checked_cholesky(m: &DMatrix<f64>, x: [f64; 2]) -> Result<Cholesky<f64, Dyn>> {
    let chol = m
        .clone()
        .cholesky()
        .ok_or(Error::SingularMoment { x: x[0], y: x[1] })?;
    let l = chol.l_dirty();
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for k in 0..m.nrows() {
        let d = l[(k, k)];
        lo = lo.min(d);
        hi = hi.max(d);
    }
    if !(lo > 0.0) || hi / lo > MAX_PIVOT_RATIO {
        return Err(Error::SingularMoment { x: x[0], y: x[1] });
    }
    Ok(chol)
}

/// Moment matrix at `x`. The condition estimate is the symmetric
/// eigenvalue ratio.
pub fn moment_matrix(x: [f64; 2], nodes: &NodeSet, cfg: &KernelConfig) -> Result<MomentMatrix> {
    let sup = gather_support(x, nodes, cfg, DerivMask::value())?;
    let q = cfg.basis().len();
    let mut p = vec![0.0; q];
    let mut m = DMatrix::<f64>::zeros(q, q);
    for (k, &z) in sup.z.iter().enumerate() {
        cfg.basis().eval_into(z, &mut p);
        let w = sup.w[k];
        for i in 0..q {
            let piw = p[i] * w;
            for j in 0..=i {
                m[(i, j)] += piw * p[j];
            }
        }
    }
    for i in 0..q {
        for j in (i + 1)..q {
            m[(i, j)] = m[(j, i)];
        }
    }
    // reject degenerate layouts the same way shape evaluation does
    checked_cholesky(&m, x)?;
    let eig = m.clone().symmetric_eigen();
    let max = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let condition_estimate = if min > 0.0 { max / min } else { f64::INFINITY };
    Ok(MomentMatrix {
        matrix: m,
        condition_estimate,
    })
}

/// Shape values and requested derivatives at one evaluation point.
///
/// The sparsity equals the neighbor query at the dilation radius: the row
/// holds exactly the nodes with wrapped max-norm distance `< rho`, and
/// `psi_I(x)` vanishes identically beyond that radius.
pub fn shape_values(
    x: [f64; 2],
    nodes: &NodeSet,
    cfg: &KernelConfig,
    mask: DerivMask,
) -> Result<ShapeRow> {
    let sup = gather_support(x, nodes, cfg, mask)?;
    let basis = cfg.basis();
    let q = basis.len();
    let n = sup.indices.len();
    let inv_rho = 1.0 / cfg.rho();

    // monomial jets per neighbor, flattened n x q
    let mut p = vec![0.0; n * q];
    let mut px = Vec::new();
    let mut py = Vec::new();
    let mut pxx = Vec::new();
    let mut pyy = Vec::new();
    for (k, &z) in sup.z.iter().enumerate() {
        basis.eval_into(z, &mut p[k * q..(k + 1) * q]);
    }
    if mask.first {
        px = vec![0.0; n * q];
        py = vec![0.0; n * q];
        for (k, &z) in sup.z.iter().enumerate() {
            basis.eval_deriv_into(z, [1, 0], &mut px[k * q..(k + 1) * q]);
            basis.eval_deriv_into(z, [0, 1], &mut py[k * q..(k + 1) * q]);
            for t in &mut px[k * q..(k + 1) * q] {
                *t *= inv_rho;
            }
            for t in &mut py[k * q..(k + 1) * q] {
                *t *= inv_rho;
            }
        }
    }
    if mask.second {
        pxx = vec![0.0; n * q];
        pyy = vec![0.0; n * q];
        let s2 = inv_rho * inv_rho;
        for (k, &z) in sup.z.iter().enumerate() {
            basis.eval_deriv_into(z, [2, 0], &mut pxx[k * q..(k + 1) * q]);
            basis.eval_deriv_into(z, [0, 2], &mut pyy[k * q..(k + 1) * q]);
            for t in &mut pxx[k * q..(k + 1) * q] {
                *t *= s2;
            }
            for t in &mut pyy[k * q..(k + 1) * q] {
                *t *= s2;
            }
        }
    }

    // moment matrix and its requested derivatives
    let mut m = DMatrix::<f64>::zeros(q, q);
    let mut mx = mask.first.then(|| DMatrix::<f64>::zeros(q, q));
    let mut my = mask.first.then(|| DMatrix::<f64>::zeros(q, q));
    let mut mxx = mask.second.then(|| DMatrix::<f64>::zeros(q, q));
    let mut myy = mask.second.then(|| DMatrix::<f64>::zeros(q, q));
    for k in 0..n {
        let pk = &p[k * q..(k + 1) * q];
        let w = sup.w[k];
        for i in 0..q {
            let piw = pk[i] * w;
            for j in 0..=i {
                m[(i, j)] += piw * pk[j];
            }
        }
        if mask.first {
            let pxk = &px[k * q..(k + 1) * q];
            let pyk = &py[k * q..(k + 1) * q];
            let [wx, wy] = sup.wx[k];
            accumulate_dm(mx.as_mut().unwrap(), pk, pxk, w, wx, q);
            accumulate_dm(my.as_mut().unwrap(), pk, pyk, w, wy, q);
        }
        if mask.second {
            let pxk = &px[k * q..(k + 1) * q];
            let pyk = &py[k * q..(k + 1) * q];
            let pxxk = &pxx[k * q..(k + 1) * q];
            let pyyk = &pyy[k * q..(k + 1) * q];
            let [wx, wy] = sup.wx[k];
            let [wxx, wyy] = sup.wxx[k];
            accumulate_d2m(mxx.as_mut().unwrap(), pk, pxk, pxxk, w, wx, wxx, q);
            accumulate_d2m(myy.as_mut().unwrap(), pk, pyk, pyyk, w, wy, wyy, q);
        }
    }
    for i in 0..q {
        for j in (i + 1)..q {
            m[(i, j)] = m[(j, i)];
        }
    }

    let chol = checked_cholesky(&m, x)?;
    let mut e1 = DVector::<f64>::zeros(q);
    e1[0] = 1.0;
    let a = chol.solve(&e1);

    let (ax, ay) = if mask.first {
        let mx = mx.as_ref().unwrap();
        let my = my.as_ref().unwrap();
        let ax = -chol.solve(&(mx * &a));
        let ay = -chol.solve(&(my * &a));
        (Some(ax), Some(ay))
    } else {
        (None, None)
    };
    let (axx, ayy) = if mask.second {
        let mx = mx.as_ref().unwrap();
        let my = my.as_ref().unwrap();
        let mxx = mxx.as_ref().unwrap();
        let myy = myy.as_ref().unwrap();
        let ax = ax.as_ref().unwrap();
        let ay = ay.as_ref().unwrap();
        let axx = -chol.solve(&(mxx * &a + 2.0 * (mx * ax)));
        let ayy = -chol.solve(&(myy * &a + 2.0 * (my * ay)));
        (Some(axx), Some(ayy))
    } else {
        (None, None)
    };

    let mut row = ShapeRow {
        indices: sup.indices,
        psi: vec![0.0; n],
        dx: Vec::new(),
        dy: Vec::new(),
        dxx: Vec::new(),
        dyy: Vec::new(),
    };
    if mask.first {
        row.dx = vec![0.0; n];
        row.dy = vec![0.0; n];
    }
    if mask.second {
        row.dxx = vec![0.0; n];
        row.dyy = vec![0.0; n];
    }

    for k in 0..n {
        let pk = &p[k * q..(k + 1) * q];
        let w = sup.w[k];
        // B = P w and its derivatives
        let b_dot = |vec: &DVector<f64>| -> f64 {
            let mut acc = 0.0;
            for i in 0..q {
                acc += vec[i] * pk[i];
            }
            acc * w
        };
        row.psi[k] = b_dot(&a);
        if mask.first {
            let pxk = &px[k * q..(k + 1) * q];
            let pyk = &py[k * q..(k + 1) * q];
            let [wx, wy] = sup.wx[k];
            let ax = ax.as_ref().unwrap();
            let ay = ay.as_ref().unwrap();
            row.dx[k] = b_dot(ax) + dot_b1(&a, pk, pxk, w, wx, q);
            row.dy[k] = b_dot(ay) + dot_b1(&a, pk, pyk, w, wy, q);
            if mask.second {
                let pxxk = &pxx[k * q..(k + 1) * q];
                let pyyk = &pyy[k * q..(k + 1) * q];
                let [wxx, wyy] = sup.wxx[k];
                let axx = axx.as_ref().unwrap();
                let ayy = ayy.as_ref().unwrap();
                row.dxx[k] = b_dot(axx)
                    + 2.0 * dot_b1(ax, pk, pxk, w, wx, q)
                    + dot_b2(&a, pk, pxk, pxxk, w, wx, wxx, q);
                row.dyy[k] = b_dot(ayy)
                    + 2.0 * dot_b1(ay, pk, pyk, w, wy, q)
                    + dot_b2(&a, pk, pyk, pyyk, w, wy, wyy, q);
            }
        }
    }
    Ok(row)
}

/// `dM += (P' P^T + P P'^T) w + P P^T w'` for one neighbor.
fn accumulate_dm(dm: &mut DMatrix<f64>, p: &[f64], pd: &[f64], w: f64, wd: f64, q: usize) {
    for i in 0..q {
        for j in 0..q {
            dm[(i, j)] += (pd[i] * p[j] + p[i] * pd[j]) * w + p[i] * p[j] * wd;
        }
    }
}

/// Second derivative of the moment sum for one neighbor:
/// `(P'' P^T + 2 P' P'^T + P P''^T) w + 2 (P' P^T + P P'^T) w' + P P^T w''`.
#[allow(clippy::too_many_arguments)]
fn accumulate_d2m(
    dm: &mut DMatrix<f64>,
    p: &[f64],
    pd: &[f64],
    pdd: &[f64],
    w: f64,
    wd: f64,
    wdd: f64,
    q: usize,
) {
    for i in 0..q {
        for j in 0..q {
            dm[(i, j)] += (pdd[i] * p[j] + 2.0 * pd[i] * pd[j] + p[i] * pdd[j]) * w
                + 2.0 * (pd[i] * p[j] + p[i] * pd[j]) * wd
                + p[i] * p[j] * wdd;
        }
    }
}

/// `a . dB` where `dB = P' w + P w'`.
fn dot_b1(a: &DVector<f64>, p: &[f64], pd: &[f64], w: f64, wd: f64, q: usize) -> f64 {
    let mut acc = 0.0;
    for i in 0..q {
        acc += a[i] * (pd[i] * w + p[i] * wd);
    }
    acc
}

/// `a . ddB` where `ddB = P'' w + 2 P' w' + P w''`.
#[allow(clippy::too_many_arguments)]
fn dot_b2(
    a: &DVector<f64>,
    p: &[f64],
    pd: &[f64],
    pdd: &[f64],
    w: f64,
    wd: f64,
    wdd: f64,
    q: usize,
) -> f64 {
    let mut acc = 0.0;
    for i in 0..q {
        acc += a[i] * (pdd[i] * w + 2.0 * pd[i] * wd + p[i] * wdd);
    }
    acc
}

/// Kernel projection of nodal coefficients evaluated at one point.
pub fn discrete_projection(
    x: [f64; 2],
    nodes: &NodeSet,
    cfg: &KernelConfig,
    coeffs: &[f64],
) -> Result<f64> {
    if coeffs.len() != nodes.len() {
        return Err(Error::SizeMismatch(format!(
            "{} coefficients for {} nodes",
            coeffs.len(),
            nodes.len()
        )));
    }
    Ok(shape_values(x, nodes, cfg, DerivMask::value())?.dot_value(coeffs))
}

/// Shape rows for a fixed list of evaluation points.
#[derive(Debug, Clone)]
pub struct ShapeTable {
    rows: Vec<ShapeRow>,
    n_nodes: usize,
    mask: DerivMask,
}

impl ShapeTable {
    pub fn build(
        points: &[[f64; 2]],
        nodes: &NodeSet,
        cfg: &KernelConfig,
        mask: DerivMask,
    ) -> Result<Self> {
        let rows = points
            .iter()
            .map(|&x| shape_values(x, nodes, cfg, mask))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            rows,
            n_nodes: nodes.len(),
            mask,
        })
    }

    #[inline]
    pub fn rows(&self) -> &[ShapeRow] {
        &self.rows
    }

    #[inline]
    pub fn row(&self, i: usize) -> &ShapeRow {
        &self.rows[i]
    }

    #[inline]
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    #[inline]
    pub fn mask(&self) -> DerivMask {
        self.mask
    }
}
