//! Discrete check of `(𝓛_{g,X,q} u, v) = (u, 𝓛_{g,−X,−div X + q} v)` for
//! `u, v` vanishing to high order on the boundary of a coordinate box.

use crate::error::{Error, Result};
use crate::fd::{Axis, Field, GridMetric, TensorGrid};
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::fmt;
use std::sync::Arc;

type C = Complex64;
type ScalarFn = Arc<dyn Fn(&[f64]) -> C + Send + Sync>;
type VectorFn = Arc<dyn Fn(&[f64]) -> Vec<C> + Send + Sync>;
type MetricFn = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;

/// Operator data and test functions on a coordinate box.
#[derive(Clone)]
pub struct GreenProblem {
    pub bounds: Vec<(f64, f64)>,
    pub metric: MetricFn,
    pub m: usize,
    /// Contravariant components `X^j`.
    pub x: VectorFn,
    pub q: ScalarFn,
    pub u: ScalarFn,
    pub v: ScalarFn,
}

impl fmt::Debug for GreenProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GreenProblem")
            .field("bounds", &self.bounds)
            .field("m", &self.m)
            .finish_non_exhaustive()
    }
}

impl GreenProblem {
    pub fn new(
        bounds: Vec<(f64, f64)>,
        metric: impl Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
        m: usize,
        x: impl Fn(&[f64]) -> Vec<C> + Send + Sync + 'static,
        q: impl Fn(&[f64]) -> C + Send + Sync + 'static,
        u: impl Fn(&[f64]) -> C + Send + Sync + 'static,
        v: impl Fn(&[f64]) -> C + Send + Sync + 'static,
    ) -> Self {
        Self {
            bounds,
            metric: Arc::new(metric),
            m,
            x: Arc::new(x),
            q: Arc::new(q),
            u: Arc::new(u),
            v: Arc::new(v),
        }
    }

    /// `Π_k (1 − t_k²)^{2m+2}` with `t_k` the box coordinate rescaled to
    /// `[−1, 1]`; vanishes to order `2m + 1` on every face.
    pub fn cutoff(&self, x: &[f64]) -> f64 {
        self.bounds
            .iter()
            .zip(x)
            .map(|(&(a, b), &xi)| {
                let t = (2.0 * xi - a - b) / (b - a);
                (1.0 - t * t).max(0.0).powi(2 * self.m as i32 + 2)
            })
            .product()
    }
}

/// Both sides of the identity on one grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenReport {
    pub n: usize,
    pub lhs: C,
    pub rhs: C,
    pub defect: f64,
}

fn polyharmonic(metric: &GridMetric, grid: &TensorGrid, u: &[C], m: usize) -> Field {
    let mut w = u.to_vec();
    for _ in 0..m {
        w = metric.laplacian(grid, &w).into_iter().map(|z| -z).collect();
    }
    w
}

/// Relative defect `|(𝓛u, v) − (u, 𝓛*v)| / max(|(𝓛u, v)|, |(u, 𝓛*v)|)` on an
/// `n^d` grid with fourth-order differencing, after multiplying `u` and `v`
/// by [`GreenProblem::cutoff`]. The pairing is bilinear.
pub fn green_identity_check(p: &GreenProblem, n: usize) -> Result<GreenReport> {
    green_identity_check_with_order(p, n, 4)
}

pub fn green_identity_check_with_order(p: &GreenProblem, n: usize, order: usize) -> Result<GreenReport> {
    if p.m < 1 {
        return Err(Error::Precondition("operator order m must be positive".into()));
    }
    let axes = p.bounds.iter().map(|&(a, b)| Axis::new(a, b, n)).collect();
    let grid = TensorGrid::new(axes, order)?;
    let metric = GridMetric::from_fn(&grid, |x| (p.metric)(x))?;
    let dim = grid.dim();
    let u: Field = grid.sample(|x| (p.u)(x) * p.cutoff(x));
    let v: Field = grid.sample(|x| (p.v)(x) * p.cutoff(x));
    // traces: the cut-off fields must vanish on every face
    let peak = u.iter().chain(&v).map(|z| z.norm()).fold(0.0, f64::max);
    for k in 0..grid.len() {
        let mi = grid.multi_index(k);
        if mi.iter().any(|&i| i == 0 || i + 1 == n) {
            let t = u[k].norm().max(v[k].norm());
            if t > 1e-12 * peak {
                return Err(Error::Precondition(format!("boundary trace {t:e} does not vanish")));
            }
        }
    }
    let xs: Vec<Vec<C>> = grid.sample(|x| (p.x)(x));
    if xs.iter().any(|c| c.len() != dim) {
        return Err(Error::Precondition(format!("vector field must have {dim} components")));
    }
    let xf: Vec<Field> = (0..dim).map(|j| xs.iter().map(|c| c[j]).collect()).collect();
    let q: Field = grid.sample(|x| (p.q)(x));
    let div = metric.divergence(&grid, &xf);

    let xu = metric.apply_vector(&grid, &xf, &u);
    let lu: Field = polyharmonic(&metric, &grid, &u, p.m)
        .into_iter()
        .enumerate()
        .map(|(k, w)| w + xu[k] + q[k] * u[k])
        .collect();
    let xv = metric.apply_vector(&grid, &xf, &v);
    let lsv: Field = polyharmonic(&metric, &grid, &v, p.m)
        .into_iter()
        .enumerate()
        .map(|(k, w)| w - xv[k] + (q[k] - div[k]) * v[k])
        .collect();
    let weights = grid.interior_weights(0);
    let lhs = metric.integrate_product(&lu, &v, &weights);
    let rhs = metric.integrate_product(&u, &lsv, &weights);
    let scale = lhs.norm().max(rhs.norm()).max(1e-300);
    Ok(GreenReport {
        n,
        lhs,
        rhs,
        defect: (lhs - rhs).norm() / scale,
    })
}

/// Observed orders `log₂(d_k / d_{k+1})` between consecutive reports.
pub fn observed_orders(reports: &[GreenReport]) -> Vec<f64> {
    reports.windows(2).map(|w| (w[0].defect / w[1].defect).log2()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(dim: usize) -> impl Fn(&[f64]) -> DMatrix<f64> {
        move |_| DMatrix::identity(dim, dim)
    }

    #[test]
    fn symmetric_case_is_exact() {
        let p = GreenProblem::new(
            vec![(-1.0, 1.0); 2],
            flat(2),
            2,
            |_| vec![C::default(); 2],
            |x| C::new(1.0 + x[0], 0.0),
            |x| C::new((x[0] + 2.0 * x[1]).cos(), 0.0),
            |x| C::new((x[0] + 2.0 * x[1]).cos(), 0.0),
        );
        let r = green_identity_check(&p, 41).unwrap();
        assert!(r.defect < 1e-9, "{r:?}");
    }

    #[test]
    fn constant_shift_of_q() {
        let mk = |shift: f64| {
            GreenProblem::new(
                vec![(-1.0, 1.0); 2],
                flat(2),
                2,
                |x| vec![C::new(x[1], 0.5), C::new(1.0, 0.0)],
                move |x| C::new(x[0] * x[1] + shift, 0.0),
                |x| C::new((x[0] - x[1]).sin(), 0.0),
                |x| C::new((0.5 * x[0]).exp(), x[1]),
            )
        };
        let (a, b) = (green_identity_check(&mk(0.0), 33).unwrap(), green_identity_check(&mk(3.0), 33).unwrap());
        let p = mk(0.0);
        let axes = p.bounds.iter().map(|&(lo, hi)| Axis::new(lo, hi, 33)).collect();
        let grid = TensorGrid::new(axes, 4).unwrap();
        let uv: Vec<C> = grid.sample(|x| (p.u)(x) * (p.v)(x) * p.cutoff(x) * p.cutoff(x));
        let w = grid.interior_weights(0);
        let pair: C = uv.iter().zip(&w).map(|(z, w)| z * w).sum();
        assert!((b.lhs - a.lhs - pair * 3.0).norm() < 1e-12 * b.lhs.norm());
        assert!((b.rhs - a.rhs - pair * 3.0).norm() < 1e-12 * b.rhs.norm());
    }
}
