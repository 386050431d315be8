//! Discrete grids over fragmented spatial domains and the trait interval.
//!
//! All grids are cell-centered: quadrature is the midpoint rule and the
//! Neumann stencil stays symmetric. Each spatial component carries its own
//! spacing `h_i`; the weighted inner product `<u,v>_w = sum w_j u_j v_j` is
//! carried everywhere.

use crate::error::{Result, SelmutError};
use crate::model::KernelSpec;

/// A union of disjoint open intervals `(a_1,b_1) u ... u (a_m,b_m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialDomain {
    components: Vec<(f64, f64)>,
}

impl SpatialDomain {
    pub fn new(components: Vec<(f64, f64)>) -> Result<Self> {
        if components.is_empty() {
            return Err(SelmutError::Domain("empty component list".into()));
        }
        let mut prev = f64::NEG_INFINITY;
        for &(a, b) in &components {
            if !a.is_finite() || !b.is_finite() {
                return Err(SelmutError::Domain("non-finite endpoint".into()));
            }
            if a <= prev || b <= a {
                return Err(SelmutError::Domain(format!(
                    "endpoints must be strictly increasing and disjoint, got ({a}, {b}) after {prev}"
                )));
            }
            prev = b;
        }
        Ok(Self { components })
    }

    pub fn interval(a: f64, b: f64) -> Result<Self> {
        Self::new(vec![(a, b)])
    }

    pub fn components(&self) -> &[(f64, f64)] {
        &self.components
    }

    pub fn total_length(&self) -> f64 {
        self.components.iter().map(|&(a, b)| b - a).sum()
    }

    /// Convex hull `[a_1, b_m]`.
    pub fn hull(&self) -> (f64, f64) {
        (self.components[0].0, self.components[self.components.len() - 1].1)
    }
}

/// Cell-centered discretization of a [`SpatialDomain`].
#[derive(Debug, Clone)]
pub struct Grid1D {
    pub domain: SpatialDomain,
    pub nodes: Vec<f64>,
    /// Cell widths (units of length); `sum w_j = |Omega|`.
    pub weights: Vec<f64>,
    pub component_of: Vec<usize>,
    /// Node index range `[start, end)` per component.
    pub comp_ranges: Vec<(usize, usize)>,
    /// Spacing per component.
    pub comp_h: Vec<f64>,
}

impl Grid1D {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_length(&self) -> f64 {
        self.domain.total_length()
    }
}

/// Uniform cell-centered grid on the trait interval `(-A, A)`.
#[derive(Debug, Clone)]
pub struct TraitGrid {
    pub half_width: f64,
    pub nodes: Vec<f64>,
    pub h: f64,
}

impl TraitGrid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Tensor grid over `Omega x (-A, A)` with x-major flat indexing.
#[derive(Debug, Clone)]
pub struct Grid2D {
    pub x: Grid1D,
    pub theta: TraitGrid,
}

impl Grid2D {
    pub fn new(x: Grid1D, theta: TraitGrid) -> Self {
        Self { x, theta }
    }

    #[inline]
    pub fn index(&self, j: usize, m: usize) -> usize {
        j * self.theta.len() + m
    }

    pub fn len(&self) -> usize {
        self.x.len() * self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Node weight `w_j * h_theta` for the flat index layout.
    pub fn weights(&self) -> Vec<f64> {
        let nt = self.theta.len();
        let mut w = Vec::with_capacity(self.len());
        for &wx in &self.x.weights {
            for _ in 0..nt {
                w.push(wx * self.theta.h);
            }
        }
        w
    }
}

/// Sampled function on a [`Grid1D`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field1D(pub Vec<f64>);

impl Field1D {
    pub fn constant(value: f64, n: usize) -> Self {
        Self(vec![value; n])
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }
}

/// Sampled function on a [`Grid2D`], x-major (`index = j * n_theta + m`).
#[derive(Debug, Clone, PartialEq)]
pub struct Field2D {
    pub values: Vec<f64>,
    pub n_x: usize,
    pub n_theta: usize,
}

impl Field2D {
    pub fn constant(value: f64, n_x: usize, n_theta: usize) -> Self {
        Self { values: vec![value; n_x * n_theta], n_x, n_theta }
    }

    #[inline]
    pub fn at(&self, j: usize, m: usize) -> f64 {
        self.values[j * self.n_theta + m]
    }

    #[inline]
    pub fn at_mut(&mut self, j: usize, m: usize) -> &mut f64 {
        &mut self.values[j * self.n_theta + m]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().fold(f64::NEG_INFINITY, |acc, &v| acc.max(v))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |acc, &v| acc.min(v))
    }
}

/// Sampled kernel values `K_jk = K(x_j - x_k)` on a [`Grid1D`]; symmetric.
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    pub n: usize,
    /// Row-major full storage.
    pub values: Vec<f64>,
}

impl KernelMatrix {
    #[inline]
    pub fn at(&self, j: usize, k: usize) -> f64 {
        self.values[j * self.n + k]
    }

    /// All-zero kernel; decouples components. Test and study helper, bypasses
    /// the positivity validation of [`sample_kernel`].
    pub fn zero(n: usize) -> Self {
        Self { n, values: vec![0.0; n * n] }
    }
}

pub fn build_spatial_grid(domain: &SpatialDomain, h_target: f64) -> Result<Grid1D> {
    if !(h_target > 0.0) {
        return Err(SelmutError::Domain(format!("h_target must be positive, got {h_target}")));
    }
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let mut component_of = Vec::new();
    let mut comp_ranges = Vec::new();
    let mut comp_h = Vec::new();
    for (i, &(a, b)) in domain.components().iter().enumerate() {
        let len = b - a;
        let n = ((len / h_target).round() as usize).max(2);
        let h = len / n as f64;
        let start = nodes.len();
        for k in 0..n {
            nodes.push(a + (k as f64 + 0.5) * h);
            weights.push(h);
            component_of.push(i);
        }
        comp_ranges.push((start, nodes.len()));
        comp_h.push(h);
    }
    Ok(Grid1D { domain: domain.clone(), nodes, weights, component_of, comp_ranges, comp_h })
}

pub fn build_trait_grid(half_width: f64, h_target: f64) -> Result<TraitGrid> {
    if !(half_width > 0.0) || !(h_target > 0.0) {
        return Err(SelmutError::Domain(format!(
            "trait grid inputs must be positive, got A = {half_width}, h_target = {h_target}"
        )));
    }
    let span = 2.0 * half_width;
    let n = ((span / h_target).round() as usize).max(4);
    let h = span / n as f64;
    let nodes = (0..n).map(|m| -half_width + (m as f64 + 0.5) * h).collect();
    Ok(TraitGrid { half_width, nodes, h })
}

pub fn sample_kernel(grid: &Grid1D, kernel: &KernelSpec) -> Result<KernelMatrix> {
    let n = grid.len();
    let mut values = vec![0.0; n * n];
    for j in 0..n {
        for k in 0..=j {
            let v = kernel.eval(grid.nodes[j] - grid.nodes[k]);
            if !(v > 0.0) {
                return Err(SelmutError::Model(format!(
                    "kernel must be positive, K({}) = {v}",
                    grid.nodes[j] - grid.nodes[k]
                )));
            }
            values[j * n + k] = v;
            values[k * n + j] = v;
        }
    }
    let (lo, hi) = (kernel.lower_bound(), kernel.upper_bound());
    for &v in &values {
        if v < lo - 1e-12 || v > hi + 1e-12 {
            return Err(SelmutError::Model(format!(
                "sampled kernel value {v} outside declared bounds [{lo}, {hi}]"
            )));
        }
    }
    Ok(KernelMatrix { n, values })
}
