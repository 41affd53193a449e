//! Discrete flow fields and derived quantities.

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::nodes::NodeSet;
use crate::shape::{shape_values, DerivMask, KernelConfig};

/// Velocity and pressure coefficients on a node set.
///
/// Coefficients are kernel-expansion weights, not point values; evaluate
/// through the shape functions to get fields. Layout matches the solver
/// unknown ordering: `u` then `v` then `p`, each of length `nodes.len()`.
#[derive(Debug, Clone)]
pub struct FlowField {
    nodes: NodeSet,
    kernel: KernelConfig,
    h: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub p: Vec<f64>,
}

impl FlowField {
    pub fn new(nodes: NodeSet, kernel: KernelConfig, h: f64, u: Vec<f64>, v: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        let n = nodes.len();
        if u.len() != n || v.len() != n || p.len() != n {
            return Err(Error::SizeMismatch(format!(
                "coefficient lengths ({}, {}, {}) do not match node count {}",
                u.len(),
                v.len(),
                p.len(),
                n
            )));
        }
        Ok(Self {
            nodes,
            kernel,
            h,
            u,
            v,
            p,
        })
    }

    pub fn zeros(nodes: NodeSet, kernel: KernelConfig, h: f64) -> Self {
        let n = nodes.len();
        Self {
            nodes,
            kernel,
            h,
            u: vec![0.0; n],
            v: vec![0.0; n],
            p: vec![0.0; n],
        }
    }

    #[inline]
    pub fn nodes(&self) -> &NodeSet {
        &self.nodes
    }

    #[inline]
    pub fn domain(&self) -> &Domain {
        self.nodes.domain()
    }

    #[inline]
    pub fn kernel(&self) -> &KernelConfig {
        &self.kernel
    }

    #[inline]
    pub fn h(&self) -> f64 {
        self.h
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Stacked velocity vector `(u_1..u_N, v_1..v_N)`.
    pub fn velocity_stacked(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(2 * self.u.len());
        out.extend_from_slice(&self.u);
        out.extend_from_slice(&self.v);
        out
    }

    pub fn pressure_mean(&self) -> f64 {
        mean(&self.p)
    }

    pub fn velocity_means(&self) -> [f64; 2] {
        [mean(&self.u), mean(&self.v)]
    }

    /// Interpolated velocity at a point.
    pub fn velocity_at(&self, x: [f64; 2]) -> Result<[f64; 2]> {
        let row = shape_values(x, &self.nodes, &self.kernel, DerivMask::value())?;
        Ok([row.dot_value(&self.u), row.dot_value(&self.v)])
    }

    /// Interpolated pressure at a point.
    pub fn pressure_at(&self, x: [f64; 2]) -> Result<f64> {
        let row = shape_values(x, &self.nodes, &self.kernel, DerivMask::value())?;
        Ok(row.dot_value(&self.p))
    }

    /// Vorticity `dv/dx - du/dy` at a point.
    pub fn vorticity_at(&self, x: [f64; 2]) -> Result<f64> {
        let row = shape_values(x, &self.nodes, &self.kernel, DerivMask::first())?;
        Ok(row.dot_dx(&self.v) - row.dot_dy(&self.u))
    }
}

pub(crate) fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}
