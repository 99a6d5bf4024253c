//! Tensor grids in polar chart coordinates `(x₁, r, θ)` of a product manifold.

use super::phase::Phase;
use crate::error::{Error, Result};
use crate::fd::{Axis, Field, GridMetric, TensorGrid};
use crate::geometry::{ConformalProduct, Point2};
use nalgebra::Vector3;
use num_complex::Complex64;
use rayon::prelude::*;
use std::sync::Arc;

/// Box `[x₁] × [r] × [θ]` in chart coordinates; `M` is its image. The default
/// box, seen from [`Phase::DEFAULT_CENTER`], lies inside the unit disk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartBox {
    pub x1: (f64, f64),
    pub r: (f64, f64),
    pub theta: (f64, f64),
}

impl Default for ChartBox {
    fn default() -> Self {
        Self {
            x1: (-0.5, 0.5),
            r: (1.2, 2.2),
            theta: (-0.25, 0.25),
        }
    }
}

impl ChartBox {
    pub fn contains(&self, x1: f64, r: f64, theta: f64) -> bool {
        (self.x1.0..=self.x1.1).contains(&x1) && (self.r.0..=self.r.1).contains(&r) && (self.theta.0..=self.theta.1).contains(&theta)
    }
}

/// Geometry sampled on a chart grid: `g = c·diag(1, 1, j²)` in `(x₁, r, θ)`.
#[derive(Debug, Clone)]
pub struct ChartGrid {
    pub bounds: ChartBox,
    pub grid: TensorGrid,
    pub metric: GridMetric,
    /// Transversal point `exp_ω(rθ)` per grid node.
    pub transversal: Vec<Point2>,
    pub jacobi: Vec<f64>,
    pub conformal: Vec<f64>,
    /// Stencil order of the first-derivative operators.
    pub order: usize,
}

impl ChartGrid {
    /// `n` nodes per axis and 8th-order differences.
    pub fn new(product: &ConformalProduct, phase: &Phase, bounds: ChartBox, n: [usize; 3]) -> Result<Arc<Self>> {
        Self::with_order(product, phase, bounds, n, 8)
    }

    pub fn with_order(
        product: &ConformalProduct,
        phase: &Phase,
        bounds: ChartBox,
        n: [usize; 3],
        order: usize,
    ) -> Result<Arc<Self>> {
        if bounds.r.0 <= 0.0 {
            return Err(Error::Precondition("chart box must keep r > 0 (ω ∉ M)".into()));
        }
        let grid = TensorGrid::new(
            vec![
                Axis::new(bounds.x1.0, bounds.x1.1, n[0]),
                Axis::new(bounds.r.0, bounds.r.1, n[1]),
                Axis::new(bounds.theta.0, bounds.theta.1, n[2]),
            ],
            order,
        )?;
        let (ra, ta) = (grid.axes()[1], grid.axes()[2]);
        // exp map per (r, θ), shared across x₁
        let slab: Vec<(Point2, f64)> = (0..ra.n * ta.n)
            .into_par_iter()
            .map(|k| {
                let (i, l) = (k / ta.n, k % ta.n);
                let s = phase.chart().exp(ra.coord(i), ta.coord(l))?;
                if s.j <= 0.0 {
                    return Err(Error::Chart(format!(
                        "conjugate point inside the chart box at r={}, θ={}",
                        ra.coord(i),
                        ta.coord(l)
                    )));
                }
                Ok((s.x, s.j))
            })
            .collect::<Result<_>>()?;
        let len = grid.len();
        let mut transversal = Vec::with_capacity(len);
        let mut jacobi = Vec::with_capacity(len);
        let mut conformal = Vec::with_capacity(len);
        for p in 0..len {
            let mi = grid.multi_index(p);
            let (x, j) = slab[mi[1] * ta.n + mi[2]];
            let x1 = grid.axes()[0].coord(mi[0]);
            transversal.push(x);
            jacobi.push(j);
            conformal.push(product.c(&Vector3::new(x1, x.x, x.y)));
        }
        let diag = vec![
            conformal.clone(),
            conformal.clone(),
            conformal.iter().zip(&jacobi).map(|(c, j)| c * j * j).collect(),
        ];
        let metric = GridMetric::diagonal(&grid, &diag)?;
        Ok(Arc::new(Self {
            bounds,
            grid,
            metric,
            transversal,
            jacobi,
            conformal,
            order,
        }))
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// `(x₁, r, θ)` of node `p`.
    pub fn coords(&self, p: usize) -> [f64; 3] {
        let c = self.grid.coords(p);
        [c[0], c[1], c[2]]
    }

    pub fn sample(&self, f: impl Fn(usize, [f64; 3]) -> Complex64) -> Field {
        (0..self.len()).map(|p| f(p, self.coords(p))).collect()
    }

    /// Interior quadrature weights, dropping `margin` layers of nodes.
    pub fn weights(&self, margin: usize) -> Vec<f64> {
        self.grid.interior_weights(margin)
    }

    /// Refuses derivative chains deeper than the grid can support.
    pub fn check_order(&self, derivatives: usize) -> Result<()> {
        let min_n = self.grid.axes().iter().map(|a| a.n).min().unwrap_or(0);
        if derivatives * (self.order / 2) >= min_n {
            return Err(Error::Resolution(format!(
                "{derivatives} chained derivatives need more than {min_n} nodes per axis"
            )));
        }
        Ok(())
    }
}

/// Complex values on a [`ChartGrid`].
#[derive(Debug, Clone)]
pub struct GridFieldM {
    pub grid: Arc<ChartGrid>,
    pub values: Field,
}

impl GridFieldM {
    pub fn new(grid: Arc<ChartGrid>, values: Field) -> Self {
        assert_eq!(grid.len(), values.len());
        Self { grid, values }
    }

    pub fn from_fn(grid: Arc<ChartGrid>, f: impl Fn(usize, [f64; 3]) -> Complex64) -> Self {
        let values = grid.sample(f);
        Self { grid, values }
    }

    /// `L²(M)` norm over interior nodes.
    pub fn l2_norm(&self, margin: usize) -> f64 {
        self.grid.metric.l2_norm(&self.values, &self.grid.weights(margin))
    }

    pub fn laplacian(&self) -> Self {
        let v = self.grid.metric.laplacian(&self.grid.grid, &self.values);
        Self::new(self.grid.clone(), v)
    }

    /// Rows `x1,r,theta,re,im`.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x1", "r", "theta", "re", "im"])?;
        for (p, v) in self.values.iter().enumerate() {
            let c = self.grid.coords(p);
            w.write_record([c[0], c[1], c[2], v.re, v.im].map(|x| format!("{x:.17e}")))?;
        }
        w.flush()?;
        Ok(())
    }
}
