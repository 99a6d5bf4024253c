//! Partial Fourier transforms in `x₁`: `f = ∫ e^{iλx₁} X♭_{x₁} dx₁`,
//! `α = Σ_j (∫ e^{iλx₁} X♭_j dx₁) dx^j` and `Q_λ = ∫ e^{iλx₁} q c dx₁`.

use super::field::{SupportBox, VectorFieldM};
use crate::error::{Error, Result};
use crate::geometry::{ConformalProduct, Point2};
use crate::quadrature::CompositeGauss;
use crate::raytransform::{OneFormD, Regularity, ScalarFieldD};
use nalgebra::Vector3;
use num_complex::Complex64;
use std::sync::Arc;

type C = Complex64;

/// Composite Gauss rule in `x₁` over the support interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierQuadrature {
    pub points: usize,
    pub panels: usize,
}

impl Default for FourierQuadrature {
    fn default() -> Self {
        Self { points: 8, panels: 16 }
    }
}

impl FourierQuadrature {
    pub fn refined(&self) -> Self {
        Self {
            panels: 2 * self.panels,
            ..*self
        }
    }

    pub fn nodes(&self, a: f64, b: f64) -> Vec<(f64, f64)> {
        CompositeGauss::new(self.points, (b - a) / self.panels as f64 * (1.0 + 1e-12)).nodes(a, b)
    }
}

/// Integration interval in `x₁`: the support when recorded, otherwise the
/// whole range of `M` with a check that the integrand has died out at both
/// ends.
fn x1_interval(
    product: &ConformalProduct,
    support: Option<SupportBox>,
    probe: impl Fn(&Vector3<f64>) -> f64,
) -> Result<(f64, f64)> {
    if let Some(s) = support {
        return Ok(s.x1);
    }
    let (lo, hi) = product.x1_range();
    let pts = product.base().domain().interior_samples(60);
    let mut peak: f64 = 0.0;
    let mut tail: f64 = 0.0;
    for k in 0..=16 {
        let x1 = lo + (hi - lo) * k as f64 / 16.0;
        for p in &pts {
            let v = probe(&Vector3::new(x1, p.x, p.y));
            peak = peak.max(v);
            if k == 0 || k == 16 {
                tail = tail.max(v);
            }
        }
    }
    if tail > 1e-12 * peak.max(1e-300) {
        return Err(Error::Support(format!(
            "integrand is {tail:e} at the ends of x₁ ∈ [{lo}, {hi}] (peak {peak:e})"
        )));
    }
    Ok((lo, hi))
}

/// `(f, α)` at one `λ`, evaluated lazily at points of `D`.
#[derive(Clone)]
pub struct FourierSlice {
    pub lambda: f64,
    pub f: ScalarFieldD,
    pub alpha: OneFormD,
}

impl std::fmt::Debug for FourierSlice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FourierSlice").field("lambda", &self.lambda).finish_non_exhaustive()
    }
}

/// `[f, α₁, α₂](x′)` by the given quadrature.
pub fn slice_at(x: &VectorFieldM, lambda: f64, nodes: &[(f64, f64)], y: &Point2) -> [C; 3] {
    let mut acc = [C::default(); 3];
    for &(x1, w) in nodes {
        let e = C::new(0.0, lambda * x1).exp() * w;
        let v = x.flat(&Vector3::new(x1, y.x, y.y));
        for k in 0..3 {
            acc[k] += v[k] * e;
        }
    }
    acc
}

/// Partial Fourier transform of `X♭` in `x₁`.
pub fn partial_fourier(x: &VectorFieldM, lambda: f64, quad: &FourierQuadrature) -> Result<FourierSlice> {
    let (a, b) = x1_interval(x.product(), x.support(), |p| x.flat(p).iter().map(|c| c.norm()).fold(0.0, f64::max))?;
    let nodes = Arc::new(quad.nodes(a, b));
    let dom = x.product().base().domain().clone();
    let (xf, nf) = (x.clone(), nodes.clone());
    let f = ScalarFieldD::new(&dom, move |y| slice_at(&xf, lambda, &nf, y)[0]);
    let xa = x.clone();
    let alpha = OneFormD::new(
        &dom,
        move |y| {
            let s = slice_at(&xa, lambda, &nodes, y);
            [s[1], s[2]]
        },
        Regularity::Smooth,
    );
    Ok(FourierSlice { lambda, f, alpha })
}

/// `Q_λ(x′) = ∫ e^{iλx₁} q(x₁, x′) c(x₁, x′) dx₁` for a difference of potentials
/// extended by zero outside `support`.
pub fn q_slice(
    q_diff: impl Fn(&Vector3<f64>) -> C + Send + Sync + 'static,
    product: &ConformalProduct,
    lambda: f64,
    support: Option<SupportBox>,
    quad: &FourierQuadrature,
) -> Result<ScalarFieldD> {
    let q_diff = Arc::new(q_diff);
    let qp = q_diff.clone();
    let (a, b) = x1_interval(product, support, move |p| qp(p).norm())?;
    let nodes = quad.nodes(a, b);
    let prod = product.clone();
    Ok(ScalarFieldD::new(product.base().domain(), move |y| {
        let mut acc = C::default();
        for &(x1, w) in &nodes {
            let p = Vector3::new(x1, y.x, y.y);
            if support.is_none_or(|s| s.contains(&p)) {
                acc += q_diff(&p) * prod.c(&p) * C::new(0.0, lambda * x1).exp() * w;
            }
        }
        acc
    }))
}
