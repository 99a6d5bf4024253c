//! Metrics in boundary normal coordinates, lower-order perturbations and the
//! coefficients of `−Δ_g = D_n² + iE D_n + Q₂(x, D′) + Q₁(x, D′)`.

use super::jet::{jet_inverse_logdet, Jet, JetMatrix};
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::fmt;
use std::sync::Arc;

type TangentialFn = dyn Fn(&[Jet]) -> JetMatrix + Send + Sync;

/// `g = g_{αβ}(x′, x_n) dx^α dx^β + dx^n ⊗ dx^n`. The tangential block is a
/// closure over jets so that its partials are exact.
#[derive(Clone)]
pub struct BoundaryNormalMetric {
    n: usize,
    g_tan: Arc<TangentialFn>,
}

impl fmt::Debug for BoundaryNormalMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoundaryNormalMetric").field("n", &self.n).finish_non_exhaustive()
    }
}

impl BoundaryNormalMetric {
    /// `n ∈ {2, 3}` so that `x` and `ξ′` fit in one jet.
    pub fn new(n: usize, g_tan: impl Fn(&[Jet]) -> JetMatrix + Send + Sync + 'static) -> Result<Self> {
        if !(2..=3).contains(&n) {
            return Err(Error::Precondition(format!("boundary dimension must be 2 or 3, got {n}")));
        }
        Ok(Self { n, g_tan: Arc::new(g_tan) })
    }

    pub fn flat(n: usize) -> Result<Self> {
        Self::new(n, move |_| super::jet::jet_scalar(n - 1, Jet::real(1.0)))
    }

    /// `g_{αβ} = e^{2k·x_n} δ_{αβ}`.
    pub fn exponential(n: usize, k: f64) -> Result<Self> {
        Self::new(n, move |x| super::jet::jet_scalar(n - 1, (x[n - 1] * (2.0 * k)).exp()))
    }

    /// `g_{αβ} = (1 + c₀x_n + c₁x_n² + c₂x₁x_n + c₃|x′|²) δ_{αβ} + c₄ x_α x_β`.
    pub fn polynomial(n: usize, c: [f64; 5]) -> Result<Self> {
        Self::new(n, move |x| {
            let xn = x[n - 1];
            let mut tan2 = Jet::real(0.0);
            for xa in &x[..n - 1] {
                tan2 = tan2 + *xa * *xa;
            }
            let s = Jet::real(1.0) + xn * c[0] + xn * xn * c[1] + x[0] * xn * c[2] + tan2 * c[3];
            let mut g = super::jet::jet_scalar(n - 1, s);
            for a in 0..n - 1 {
                for b in 0..n - 1 {
                    g[a][b] = g[a][b] + x[a] * x[b] * c[4];
                }
            }
            g
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Tangential block at jet-valued coordinates.
    pub fn g_tan(&self, x: &[Jet]) -> JetMatrix {
        (self.g_tan)(x)
    }

    /// Full `n × n` metric at a point.
    pub fn full(&self, x: &[f64]) -> DMatrix<f64> {
        let xs: Vec<Jet> = x.iter().map(|&v| Jet::real(v)).collect();
        let gt = self.g_tan(&xs);
        DMatrix::from_fn(self.n, self.n, |i, j| {
            if i < self.n - 1 && j < self.n - 1 {
                gt[i][j].v.re
            } else if i == j {
                1.0
            } else {
                0.0
            }
        })
    }
}

type VectorFn = dyn Fn(&[Jet]) -> Vec<Jet> + Send + Sync;
type ScalarFn = dyn Fn(&[Jet]) -> Jet + Send + Sync;

/// Lower-order perturbation `X^j ∂_j + q` of `(−Δ_g)^m`.
#[derive(Clone)]
pub struct PerturbationJet {
    pub m: usize,
    x: Arc<VectorFn>,
    q: Arc<ScalarFn>,
}

impl fmt::Debug for PerturbationJet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PerturbationJet").field("m", &self.m).finish_non_exhaustive()
    }
}

impl PerturbationJet {
    /// `x` returns `X^1..X^n`, `X^n` the normal component.
    pub fn new(
        m: usize,
        x: impl Fn(&[Jet]) -> Vec<Jet> + Send + Sync + 'static,
        q: impl Fn(&[Jet]) -> Jet + Send + Sync + 'static,
    ) -> Result<Self> {
        if m < 2 {
            return Err(Error::Precondition(format!("operator order m must be at least 2, got {m}")));
        }
        Ok(Self {
            m,
            x: Arc::new(x),
            q: Arc::new(q),
        })
    }

    pub fn constant(m: usize, x: Vec<f64>, q: f64) -> Result<Self> {
        Self::new(m, move |_| x.iter().map(|&v| Jet::real(v)).collect(), move |_| Jet::real(q))
    }

    pub fn zero(m: usize, n: usize) -> Result<Self> {
        Self::constant(m, vec![0.0; n], 0.0)
    }

    pub fn x(&self, at: &[Jet]) -> Vec<Jet> {
        (self.x)(at)
    }

    pub fn q(&self, at: &[Jet]) -> Jet {
        (self.q)(at)
    }

    /// Plain values `(X^1..X^n, q)` at a point.
    pub fn values(&self, at: &[f64]) -> (Vec<Complex64>, Complex64) {
        let xs: Vec<Jet> = at.iter().map(|&v| Jet::real(v)).collect();
        (self.x(&xs).iter().map(|j| j.v).collect(), self.q(&xs).v)
    }
}

/// Jet-valued coefficients in variables `x_0..x_{n−1}, ξ_0..ξ_{n−2}`.
pub(crate) struct CoefficientJets {
    pub ginv: JetMatrix,
    pub q2: Jet,
    /// First-order jets.
    pub e: Jet,
    pub q1: Jet,
}

pub(crate) fn variables(n: usize, x: &[f64], xi: &[f64]) -> (Vec<Jet>, Vec<Jet>) {
    let xs = (0..n).map(|k| Jet::var(x[k], k)).collect();
    let xis = (0..n - 1).map(|b| Jet::var(xi[b], n + b)).collect();
    (xs, xis)
}

fn check_point(metric: &BoundaryNormalMetric, x: &[f64], xi: &[f64]) -> Result<()> {
    let n = metric.n;
    if x.len() != n || xi.len() != n - 1 {
        return Err(Error::Precondition(format!("expected x ∈ ℝ^{n} and ξ′ ∈ ℝ^{}", n - 1)));
    }
    if x.iter().chain(xi).any(|v| !v.is_finite()) {
        return Err(Error::Precondition("non-finite point or covector".into()));
    }
    Ok(())
}

pub(crate) fn coefficient_jets(metric: &BoundaryNormalMetric, x: &[f64], xi: &[f64]) -> Result<CoefficientJets> {
    check_point(metric, x, xi)?;
    let n = metric.n;
    let (xs, xis) = variables(n, x, xi);
    let g = metric.g_tan(&xs);
    let gv = DMatrix::from_fn(n - 1, n - 1, |a, b| g[a][b].v.re);
    let asym = (&gv - gv.transpose()).amax();
    if asym > 1e-12 * gv.amax() {
        return Err(Error::NotSymmetric { x: x[0], y: x[n - 1], asym });
    }
    let min_eig = gv.clone().symmetric_eigenvalues().min();
    if !(min_eig > 0.0) {
        return Err(Error::NotPositiveDefinite { x: x[0], y: x[n - 1], min_eig });
    }
    let (ginv, logdet) = jet_inverse_logdet(&g);
    let mut q2 = Jet::real(0.0);
    let mut e = Jet::real(0.0);
    let mut q1 = Jet::real(0.0);
    for a in 0..n - 1 {
        for b in 0..n - 1 {
            q2 = q2 + ginv[a][b] * xis[a] * xis[b];
            e = e + g[a][b] * ginv[a][b].diff(n - 1) * 0.5;
        }
    }
    for b in 0..n - 1 {
        let mut c = Jet::real(0.0);
        for a in 0..n - 1 {
            c = c + ginv[a][b] * logdet.diff(a) * 0.5 + ginv[a][b].diff(a);
        }
        q1 = q1 + c * xis[b];
    }
    q1 = q1 * Complex64::new(0.0, -1.0);
    Ok(CoefficientJets { ginv, q2, e, q1 })
}

/// `E`, `Q₂ = g^{αβ}ξ_αξ_β` and `Q₁ = −i c^β ξ_β` at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct EqCoefficients {
    pub e: f64,
    /// `g^{αβ}`.
    pub q2: DMatrix<f64>,
    /// `c^β = ½g^{αβ}∂_α log|g| + ∂_α g^{αβ}`.
    pub q1: DVector<f64>,
}

impl EqCoefficients {
    pub fn q2_at(&self, xi: &[f64]) -> f64 {
        let v = DVector::from_column_slice(xi);
        v.dot(&(&self.q2 * &v))
    }

    pub fn q1_at(&self, xi: &[f64]) -> Complex64 {
        Complex64::new(0.0, -self.q1.dot(&DVector::from_column_slice(xi)))
    }
}

/// Coefficients of `−Δ_g` in boundary normal coordinates at `x`.
pub fn coeffs_eq(metric: &BoundaryNormalMetric, x: &[f64]) -> Result<EqCoefficients> {
    let n = metric.n;
    let c = coefficient_jets(metric, x, &vec![0.0; n - 1])?;
    Ok(EqCoefficients {
        e: c.e.v.re,
        q2: DMatrix::from_fn(n - 1, n - 1, |a, b| c.ginv[a][b].v.re),
        // Q₁ is linear in ξ′, so its ξ-gradient is −i c
        q1: DVector::from_fn(n - 1, |b, _| -c.q1.g[n + b].im),
    })
}

/// `(D_n² + iE D_n + Q₂(x, D′) + Q₁(x, D′)) u` at `x`, with `D = −i∂` and
/// the derivatives of `u` taken from its jet.
pub fn assembled_laplacian(metric: &BoundaryNormalMetric, u: &dyn Fn(&[Jet]) -> Jet, x: &[f64]) -> Result<Complex64> {
    let n = metric.n;
    let co = coeffs_eq(metric, x)?;
    let xs: Vec<Jet> = (0..n).map(|k| Jet::var(x[k], k)).collect();
    let j = u(&xs);
    let mut out = -j.h[n - 1][n - 1] + co.e * j.g[n - 1];
    for a in 0..n - 1 {
        for b in 0..n - 1 {
            out -= co.q2[(a, b)] * j.h[a][b];
        }
        out -= co.q1[a] * j.g[a];
    }
    Ok(out)
}
