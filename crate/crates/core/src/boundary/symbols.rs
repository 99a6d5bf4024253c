//! Homogeneous terms `b₁, b₀, b₋₁` of the factorization
//! `L = (D_n + iE + iA₁₂ − iB)(D_n + iB)` modulo smoothing.
//!
//! Products of symbols are composed with `Σ (1/α!) ∂_ξ^α a · D_x^α b`; since
//! `b₁` is scalar the order of factors inside each term does not matter.

use super::jet::{jet_zeros, Jet, JetMatrix};
use super::metric::{coefficient_jets, variables, BoundaryNormalMetric, PerturbationJet};
use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::fmt;
use std::sync::Arc;

type C = Complex64;
const I: C = C { re: 0.0, im: 1.0 };

/// Everything the recursion produces at one `(x, ξ′)`.
#[derive(Debug, Clone)]
pub struct SymbolStack {
    pub xi: Vec<f64>,
    pub b1: DMatrix<C>,
    pub b0: DMatrix<C>,
    pub bm1: DMatrix<C>,
    /// `∂_{x_k} b₀`, `k = 0..n`, the last one normal.
    pub b0_dx: Vec<DMatrix<C>>,
    /// `∂_{ξ_β} b₀`.
    pub b0_dxi: Vec<DMatrix<C>>,
    /// Max-entry residuals of the degree 2, 1 and 0 relations, relative to
    /// the largest term in each.
    pub residuals: [f64; 3],
}

fn values(a: &JetMatrix) -> DMatrix<C> {
    DMatrix::from_fn(a.len(), a.len(), |i, j| a[i][j].v)
}

fn gradient(a: &JetMatrix, k: usize) -> DMatrix<C> {
    DMatrix::from_fn(a.len(), a.len(), |i, j| a[i][j].g[k])
}

fn relative(parts: &[&DMatrix<C>]) -> f64 {
    let mut sum = DMatrix::zeros(parts[0].nrows(), parts[0].ncols());
    let mut scale: f64 = 0.0;
    for p in parts {
        sum += *p;
        scale = scale.max(p.iter().map(|z| z.norm()).fold(0.0, f64::max));
    }
    let r = sum.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        r
    } else {
        r / scale
    }
}

/// Runs the recursion at `(x, ξ′)`.
pub fn symbol_stack(metric: &BoundaryNormalMetric, jet: &PerturbationJet, x: &[f64], xi: &[f64]) -> Result<SymbolStack> {
    let n = metric.n();
    let m = jet.m;
    let co = coefficient_jets(metric, x, xi)?;
    if xi.iter().all(|v| *v == 0.0) {
        return Err(Error::ZeroCovector);
    }
    let (xs, xis) = variables(n, x, xi);
    let xv = jet.x(&xs);
    if xv.len() != n {
        return Err(Error::Precondition(format!("perturbation has {} components, expected {n}", xv.len())));
    }
    let q = jet.q(&xs);
    let normal = n - 1;

    // degree 2: b₁ = −√Q₂
    let s1 = -co.q2.sqrt();
    let dx = |j: &Jet, b: usize| j.diff(b);
    let dxi = |j: &Jet, b: usize| j.diff(n + b);

    // degree 1
    let mut c1 = Jet::real(0.0);
    for b in 0..n - 1 {
        c1 = c1 + dx(&s1, b) * dxi(&s1, b);
    }
    c1 = c1 * -I;
    let mut a11 = Jet::real(0.0);
    for a in 0..n - 1 {
        a11 = a11 + xv[a] * xis[a];
    }
    let a12 = xv[normal];
    let scalar1 = co.q1 - c1 - dx(&s1, normal) + co.e * s1;
    let two_s1 = s1 * 2.0;
    let mut rhs1 = jet_zeros(m);
    for (k, row) in rhs1.iter_mut().enumerate() {
        row[k] = scalar1;
    }
    rhs1[m - 1][0] = rhs1[m - 1][0] + a11 * I + a12 * s1;
    let b0: JetMatrix = rhs1.iter().map(|row| row.iter().map(|e| *e / two_s1).collect()).collect();

    // degree 0
    let s1v = s1.v;
    let b0v = values(&b0);
    let b0_dx: Vec<DMatrix<C>> = (0..n).map(|k| gradient(&b0, k)).collect();
    let b0_dxi: Vec<DMatrix<C>> = (0..n - 1).map(|b| gradient(&b0, n + b)).collect();
    let c0 = composition_zero(n, &s1, &b0_dx, &b0_dxi);
    let a0 = companion(m, q.v);
    let a12v = a12.v;
    let a12_b0 = left_a12(a12v, &b0v);
    let rhs0 = &a0 - &b0v * &b0v - &c0 - &b0_dx[normal] + &b0v * co.e.v + &a12_b0;
    let bm1 = rhs0 / (2.0 * s1v);

    // residuals, every relation written as Σ terms = 0
    let id = DMatrix::<C>::identity(m, m);
    let b1 = &id * s1v;
    let r2 = relative(&[&(&b1 * &b1), &(-&id * co.q2.v)]);
    let mut a11m = DMatrix::zeros(m, m);
    a11m[(m - 1, 0)] = a11.v;
    let mut a12b1 = DMatrix::zeros(m, m);
    a12b1[(m - 1, 0)] = a12v * s1v;
    let r1 = relative(&[
        &(&b0v * &b1),
        &(&b1 * &b0v),
        &(&id * c1.v),
        &(&id * s1.g[normal]),
        &(-&b1 * co.e.v),
        &(-a12b1),
        &(-&id * co.q1.v),
        &(-a11m * I),
    ]);
    let r0 = relative(&[
        &(&b0v * &b0v),
        &(&b1 * &bm1),
        &(&bm1 * &b1),
        &c0,
        &b0_dx[normal],
        &(-&b0v * co.e.v),
        &(-a12_b0),
        &(-a0),
    ]);

    Ok(SymbolStack {
        xi: xi.to_vec(),
        b1,
        b0: b0v,
        bm1,
        b0_dx,
        b0_dxi,
        residuals: [r2, r1, r0],
    })
}

/// `A₀`: `−1` on the superdiagonal, `q` at `(m, 1)`.
pub(crate) fn companion(m: usize, q: C) -> DMatrix<C> {
    let mut a = DMatrix::zeros(m, m);
    for k in 0..m - 1 {
        a[(k, k + 1)] = C::new(-1.0, 0.0);
    }
    a[(m - 1, 0)] += q;
    a
}

/// `A₁₂ M` where `A₁₂` only has `X^n` at `(m, 1)`.
pub(crate) fn left_a12(xn: C, b: &DMatrix<C>) -> DMatrix<C> {
    let m = b.nrows();
    let mut out = DMatrix::zeros(m, m);
    for j in 0..m {
        out[(m - 1, j)] = xn * b[(0, j)];
    }
    out
}

/// Degree-zero composition terms
/// `−i Σ_β (∂_{x_β}b₁ ∂_{ξ_β}b₀ + ∂_{x_β}b₀ ∂_{ξ_β}b₁) − ½ Σ_{β,γ} ∂²_{x_βx_γ}b₁ ∂²_{ξ_βξ_γ}b₁`.
pub(crate) fn composition_zero(n: usize, s1: &Jet, b0_dx: &[DMatrix<C>], b0_dxi: &[DMatrix<C>]) -> DMatrix<C> {
    let m = b0_dx[0].nrows();
    let mut c0 = DMatrix::<C>::zeros(m, m);
    for b in 0..n - 1 {
        c0 += (&b0_dxi[b] * s1.g[b] + &b0_dx[b] * s1.g[n + b]) * -I;
    }
    let mut second = C::default();
    for b in 0..n - 1 {
        for g in 0..n - 1 {
            second += s1.h[b][g] * s1.h[n + b][n + g];
        }
    }
    for k in 0..m {
        c0[(k, k)] -= second * 0.5;
    }
    c0
}

/// `b₁ = −√Q₂ · I_m`.
pub fn symbol_b1(metric: &BoundaryNormalMetric, m: usize, x: &[f64], xi: &[f64]) -> Result<DMatrix<C>> {
    symbol_stack(metric, &PerturbationJet::zero(m, metric.n())?, x, xi).map(|s| s.b1)
}

/// `b₀` from the degree-one relation.
pub fn solve_b0(metric: &BoundaryNormalMetric, jet: &PerturbationJet, x: &[f64], xi: &[f64]) -> Result<DMatrix<C>> {
    symbol_stack(metric, jet, x, xi).map(|s| s.b0)
}

/// `b₋₁` from the degree-zero relation.
pub fn solve_bm1(metric: &BoundaryNormalMetric, jet: &PerturbationJet, x: &[f64], xi: &[f64]) -> Result<DMatrix<C>> {
    symbol_stack(metric, jet, x, xi).map(|s| s.bm1)
}

type SymbolFn = dyn Fn(&[f64], &[f64]) -> Result<DMatrix<C>> + Send + Sync;

/// A term `b_j`, positively homogeneous of degree `j` in `ξ′`.
#[derive(Clone)]
pub struct HomSymbol {
    pub degree: i32,
    eval: Arc<SymbolFn>,
}

impl fmt::Debug for HomSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HomSymbol").field("degree", &self.degree).finish_non_exhaustive()
    }
}

impl HomSymbol {
    /// `b_degree` for `degree ∈ {1, 0, −1}`.
    pub fn new(metric: &BoundaryNormalMetric, jet: &PerturbationJet, degree: i32) -> Result<Self> {
        if !(-1..=1).contains(&degree) {
            return Err(Error::Precondition(format!("only b₁, b₀, b₋₁ are available, not degree {degree}")));
        }
        let (metric, jet) = (metric.clone(), jet.clone());
        Ok(Self {
            degree,
            eval: Arc::new(move |x, xi| {
                let s = symbol_stack(&metric, &jet, x, xi)?;
                Ok(match degree {
                    1 => s.b1,
                    0 => s.b0,
                    _ => s.bm1,
                })
            }),
        })
    }

    pub fn eval(&self, x: &[f64], xi: &[f64]) -> Result<DMatrix<C>> {
        (self.eval)(x, xi)
    }

    /// `max|b(x, tξ′) − t^j b(x, ξ′)| / max|b(x, ξ′)|`.
    pub fn homogeneity_defect(&self, x: &[f64], xi: &[f64], t: f64) -> Result<f64> {
        let a = self.eval(x, xi)?;
        let scaled: Vec<f64> = xi.iter().map(|v| v * t).collect();
        let b = self.eval(x, &scaled)?;
        let d = (b - &a * C::new(t.powi(self.degree), 0.0)).iter().map(|z| z.norm()).fold(0.0, f64::max);
        let s = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
        Ok(if s == 0.0 { d } else { d / s })
    }
}
