//! Finite differences on tensor-product grids, and metric operators built on them.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::ops::{AddAssign, Mul};

/// Fornberg's algorithm: weights `c[k][j]` of the `k`-th derivative at `z`
/// from values at nodes `x[j]`, for `k ≤ m`.
pub fn fornberg_weights(z: f64, x: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Uniform axis `start + i·step`, `i < n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub start: f64,
    pub step: f64,
    pub n: usize,
}

impl Axis {
    /// `n` points spanning `[a, b]` inclusive.
    pub fn new(a: f64, b: f64, n: usize) -> Self {
        Self {
            start: a,
            step: (b - a) / (n - 1) as f64,
            n,
        }
    }

    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        self.start + self.step * i as f64
    }

    pub fn end(&self) -> f64 {
        self.coord(self.n - 1)
    }
}

/// First-derivative stencils for every point of an axis: centered where
/// possible, shifted inward near the ends.
#[derive(Debug, Clone)]
struct Stencils {
    first: Vec<(usize, Vec<f64>)>,
}

impl Stencils {
    fn new(axis: &Axis, width: usize) -> Self {
        let n = axis.n;
        let half = width / 2;
        let first = (0..n)
            .map(|i| {
                let lo = i.saturating_sub(half).min(n - width);
                let nodes: Vec<f64> = (lo..lo + width).map(|k| (k as f64 - i as f64) * axis.step).collect();
                (lo, fornberg_weights(0.0, &nodes, 1).swap_remove(1))
            })
            .collect();
        Self { first }
    }
}

/// Tensor grid in row-major order (last axis fastest).
#[derive(Debug, Clone)]
pub struct TensorGrid {
    axes: Vec<Axis>,
    strides: Vec<usize>,
    stencils: Vec<Stencils>,
    order: usize,
}

impl TensorGrid {
    /// `order` is the (even) accuracy order of the first-derivative stencils.
    pub fn new(axes: Vec<Axis>, order: usize) -> Result<Self> {
        let width = order + 1;
        for (k, a) in axes.iter().enumerate() {
            if a.n < width {
                return Err(Error::Resolution(format!(
                    "axis {k} has {} points, order-{order} stencils need {width}",
                    a.n
                )));
            }
        }
        let mut strides = vec![1; axes.len()];
        for k in (0..axes.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * axes[k + 1].n;
        }
        let stencils = axes.iter().map(|a| Stencils::new(a, width)).collect();
        Ok(Self {
            axes,
            strides,
            stencils,
            order,
        })
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.n).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn multi_index(&self, mut p: usize) -> Vec<usize> {
        let mut out = vec![0; self.dim()];
        for k in 0..self.dim() {
            out[k] = p / self.strides[k];
            p %= self.strides[k];
        }
        out
    }

    pub fn coords(&self, p: usize) -> Vec<f64> {
        self.multi_index(p)
            .iter()
            .zip(&self.axes)
            .map(|(&i, a)| a.coord(i))
            .collect()
    }

    pub fn sample<T>(&self, f: impl Fn(&[f64]) -> T) -> Vec<T> {
        (0..self.len()).map(|p| f(&self.coords(p))).collect()
    }

    /// `∂u/∂x_axis`.
    pub fn diff<T>(&self, u: &[T], axis: usize) -> Vec<T>
    where
        T: Copy + Default + AddAssign + Mul<f64, Output = T>,
    {
        let stride = self.strides[axis];
        let n = self.axes[axis].n;
        let st = &self.stencils[axis].first;
        let mut out = vec![T::default(); u.len()];
        for p in 0..u.len() {
            let i = (p / stride) % n;
            let base = p - i * stride;
            let (lo, w) = &st[i];
            let mut acc = T::default();
            for (k, wk) in w.iter().enumerate() {
                acc += u[base + (lo + k) * stride] * *wk;
            }
            out[p] = acc;
        }
        out
    }

    /// Trapezoid cell weights restricted to points at least `margin` nodes
    /// away from every face (zero elsewhere).
    pub fn interior_weights(&self, margin: usize) -> Vec<f64> {
        (0..self.len())
            .map(|p| {
                let mi = self.multi_index(p);
                let mut w = 1.0;
                for (k, a) in self.axes.iter().enumerate() {
                    if mi[k] < margin || mi[k] + margin >= a.n {
                        return 0.0;
                    }
                    w *= a.step;
                }
                w
            })
            .collect()
    }
}

/// Metric sampled on a tensor grid: `√|g|`, `g^{ij}` and `√|g| g^{ij}`.
#[derive(Debug, Clone)]
pub struct GridMetric {
    dim: usize,
    pub sqrt_g: Vec<f64>,
    ginv: Vec<f64>,
    kmat: Vec<f64>,
}

pub type Field = Vec<Complex64>;

impl GridMetric {
    pub fn from_fn(grid: &TensorGrid, g: impl Fn(&[f64]) -> DMatrix<f64>) -> Result<Self> {
        Self::from_fn_indexed(grid, |p| g(&grid.coords(p)))
    }

    /// Diagonal metric `diag(d_0, …, d_{n−1})` given pointwise.
    pub fn diagonal(grid: &TensorGrid, diag: &[Vec<f64>]) -> Result<Self> {
        let dim = grid.dim();
        Self::from_fn_indexed(grid, |p| {
            let mut m = DMatrix::zeros(dim, dim);
            for k in 0..dim {
                m[(k, k)] = diag[k][p];
            }
            m
        })
    }

    pub fn from_fn_indexed(grid: &TensorGrid, g: impl Fn(usize) -> DMatrix<f64>) -> Result<Self> {
        let dim = grid.dim();
        let mut sqrt_g = Vec::with_capacity(grid.len());
        let mut ginv = Vec::with_capacity(grid.len() * dim * dim);
        let mut kmat = Vec::with_capacity(grid.len() * dim * dim);
        for p in 0..grid.len() {
            let m = g(p);
            let det = m.determinant();
            if !(det > 0.0) {
                return Err(Error::Geometry(format!(
                    "metric not positive definite at {:?}",
                    grid.coords(p)
                )));
            }
            let inv = m.try_inverse().ok_or_else(|| Error::Geometry("singular metric".into()))?;
            let s = det.sqrt();
            sqrt_g.push(s);
            for i in 0..dim {
                for j in 0..dim {
                    ginv.push(inv[(i, j)]);
                    kmat.push(s * inv[(i, j)]);
                }
            }
        }
        Ok(Self {
            dim,
            sqrt_g,
            ginv,
            kmat,
        })
    }

    #[inline]
    pub fn ginv(&self, p: usize, i: usize, j: usize) -> f64 {
        self.ginv[(p * self.dim + i) * self.dim + j]
    }

    #[inline]
    fn k(&self, p: usize, i: usize, j: usize) -> f64 {
        self.kmat[(p * self.dim + i) * self.dim + j]
    }

    pub fn gradient(&self, grid: &TensorGrid, u: &[Complex64]) -> Vec<Field> {
        (0..self.dim).map(|j| grid.diff(u, j)).collect()
    }

    /// Laplace–Beltrami `|g|^{-1/2} ∂_i(|g|^{1/2} g^{ij} ∂_j u)`.
    pub fn laplacian(&self, grid: &TensorGrid, u: &[Complex64]) -> Field {
        let du = self.gradient(grid, u);
        let mut out = vec![Complex64::default(); u.len()];
        for i in 0..self.dim {
            let flux: Field = (0..u.len())
                .map(|p| (0..self.dim).map(|j| du[j][p] * self.k(p, i, j)).sum())
                .collect();
            let d = grid.diff(&flux, i);
            for p in 0..u.len() {
                out[p] += d[p];
            }
        }
        for p in 0..u.len() {
            out[p] /= self.sqrt_g[p];
        }
        out
    }

    /// `X^j ∂_j u` for vector components `X^j`.
    pub fn apply_vector(&self, grid: &TensorGrid, x: &[Field], u: &[Complex64]) -> Field {
        let du = self.gradient(grid, u);
        (0..u.len())
            .map(|p| (0..self.dim).map(|j| x[j][p] * du[j][p]).sum())
            .collect()
    }

    /// `|g|^{-1/2} ∂_j(|g|^{1/2} X^j)`.
    pub fn divergence(&self, grid: &TensorGrid, x: &[Field]) -> Field {
        let mut out = vec![Complex64::default(); grid.len()];
        for j in 0..self.dim {
            let f: Field = (0..grid.len()).map(|p| x[j][p] * self.sqrt_g[p]).collect();
            let d = grid.diff(&f, j);
            for p in 0..grid.len() {
                out[p] += d[p];
            }
        }
        for p in 0..grid.len() {
            out[p] /= self.sqrt_g[p];
        }
        out
    }

    /// Complex-bilinear `g^{ij} a_i b_j` of two covectors given by components.
    pub fn bilinear(&self, a: &[Field], b: &[Field]) -> Field {
        let n = a[0].len();
        (0..n)
            .map(|p| {
                let mut s = Complex64::default();
                for i in 0..self.dim {
                    for j in 0..self.dim {
                        s += a[i][p] * b[j][p] * self.ginv(p, i, j);
                    }
                }
                s
            })
            .collect()
    }

    /// Raises a covector: `g^{ij} a_j`.
    pub fn raise(&self, a: &[Field]) -> Vec<Field> {
        let n = a[0].len();
        (0..self.dim)
            .map(|i| {
                (0..n)
                    .map(|p| (0..self.dim).map(|j| a[j][p] * self.ginv(p, i, j)).sum())
                    .collect()
            })
            .collect()
    }

    /// `(∫ |u|² dVol)^{1/2}` with the given cell weights.
    pub fn l2_norm(&self, u: &[Complex64], weights: &[f64]) -> f64 {
        let terms: Vec<f64> = (0..u.len()).map(|p| u[p].norm_sqr() * weights[p] * self.sqrt_g[p]).collect();
        crate::quadrature::pairwise_sum(&terms).sqrt()
    }

    /// `∫ u w dVol` (bilinear, no conjugation).
    pub fn integrate_product(&self, u: &[Complex64], w: &[Complex64], weights: &[f64]) -> Complex64 {
        let terms: Vec<Complex64> = (0..u.len()).map(|p| u[p] * w[p] * (weights[p] * self.sqrt_g[p])).collect();
        crate::quadrature::pairwise_sum_c(&terms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fornberg_central_first_derivative() {
        let w = fornberg_weights(0.0, &[-1.0, 0.0, 1.0], 2);
        assert!((w[1][0] + 0.5).abs() < 1e-15 && w[1][1].abs() < 1e-15 && (w[1][2] - 0.5).abs() < 1e-15);
        assert!((w[2][0] - 1.0).abs() < 1e-15 && (w[2][1] + 2.0).abs() < 1e-15);
    }

    #[test]
    fn eighth_order_convergence() {
        let err = |n: usize| {
            let g = TensorGrid::new(vec![Axis::new(0.0, 1.0, n)], 8).unwrap();
            let u = g.sample(|x| (3.0 * x[0]).sin());
            let d = g.diff(&u, 0);
            (0..n)
                .map(|i| (d[i] - 3.0 * (3.0 * g.coords(i)[0]).cos()).abs())
                .fold(0.0, f64::max)
        };
        let (a, b) = (err(21), err(41));
        assert!(a / b > 150.0, "{a} {b}");
    }

    #[test]
    fn flat_laplacian_of_quadratic() {
        let g = TensorGrid::new(vec![Axis::new(-1.0, 1.0, 11), Axis::new(-1.0, 1.0, 13)], 8).unwrap();
        let m = GridMetric::from_fn(&g, |_| DMatrix::identity(2, 2)).unwrap();
        let u: Field = g.sample(|x| Complex64::new(x[0] * x[0] + 3.0 * x[1] * x[1], x[0] * x[1]));
        let l = m.laplacian(&g, &u);
        assert!(l.iter().all(|v| (v - Complex64::new(8.0, 0.0)).norm() < 1e-9));
    }
}
