//! Contour integrals `∮_{∂M_θ} φ a₀ dρ` over the `(x₁, r)` shadow of `M`.

use super::phase::Phase;
use crate::error::{Error, Result};
use crate::quadrature::{pairwise_sum_c, GaussLegendre};
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

/// Positively oriented boundary of a region in the `(x₁, r)` plane, stored as
/// quadrature nodes with velocities and weights.
#[derive(Debug, Clone)]
pub struct ShadowContour {
    pub points: Vec<(f64, f64)>,
    pub velocity: Vec<(f64, f64)>,
    pub weights: Vec<f64>,
}

impl ShadowContour {
    /// Polygon with Gauss nodes on each edge; vertices counter-clockwise.
    pub fn polygon(vertices: &[(f64, f64)], per_edge: usize) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::Geometry("polygon needs at least three vertices".into()));
        }
        let gl = GaussLegendre::new(per_edge);
        let mut c = Self {
            points: vec![],
            velocity: vec![],
            weights: vec![],
        };
        for k in 0..vertices.len() {
            let (a, b) = (vertices[k], vertices[(k + 1) % vertices.len()]);
            for (t, w) in gl.on_interval(0.0, 1.0) {
                c.points.push((a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1)));
                c.velocity.push((b.0 - a.0, b.1 - a.1));
                c.weights.push(w);
            }
        }
        if c.signed_area() <= 0.0 {
            return Err(Error::Geometry("polygon is not counter-clockwise".into()));
        }
        Ok(c)
    }

    /// Boundary of `{f < 0}`, star-shaped about `center`: radial root finding at
    /// `n` equispaced angles, spectral differentiation of the radius.
    pub fn trace(f: impl Fn(f64, f64) -> f64, center: (f64, f64), reach: f64, n: usize) -> Result<Self> {
        if !(f(center.0, center.1) < 0.0) {
            return Err(Error::Geometry("contour center is not inside the region".into()));
        }
        let march = reach / 256.0;
        let mut radius = Vec::with_capacity(n);
        for k in 0..n {
            let psi = 2.0 * PI * k as f64 / n as f64;
            let (c, s) = (psi.cos(), psi.sin());
            let g = |t: f64| f(center.0 + t * c, center.1 + t * s);
            let mut lo = 0.0;
            let mut hi = march;
            while g(hi) < 0.0 {
                lo = hi;
                hi += march;
                if hi > reach {
                    return Err(Error::Geometry(format!("no boundary crossing within reach along ψ = {psi:.4}")));
                }
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid == lo || mid == hi {
                    break;
                }
                if g(mid) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            radius.push(0.5 * (lo + hi));
        }
        let dr = spectral_derivative(&radius);
        let mut c = Self {
            points: vec![],
            velocity: vec![],
            weights: vec![],
        };
        for k in 0..n {
            let psi = 2.0 * PI * k as f64 / n as f64;
            let (cs, sn) = (psi.cos(), psi.sin());
            c.points.push((center.0 + radius[k] * cs, center.1 + radius[k] * sn));
            c.velocity.push((dr[k] * cs - radius[k] * sn, dr[k] * sn + radius[k] * cs));
            c.weights.push(2.0 * PI / n as f64);
        }
        Ok(c)
    }

    /// `½∮(x₁ dr − r dx₁)`.
    pub fn signed_area(&self) -> f64 {
        (0..self.points.len())
            .map(|k| 0.5 * self.weights[k] * (self.points[k].0 * self.velocity[k].1 - self.points[k].1 * self.velocity[k].0))
            .sum()
    }
}

/// Derivative of periodic samples on `[0, 2π)`.
fn spectral_derivative(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    let mut planner = FftPlanner::<f64>::new();
    let mut buf: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut buf);
    for (k, b) in buf.iter_mut().enumerate() {
        let freq = if k < n / 2 {
            k as f64
        } else if k == n / 2 && n.is_multiple_of(2) {
            0.0
        } else {
            k as f64 - n as f64
        };
        *b *= Complex64::new(0.0, freq / n as f64);
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    buf.iter().map(|c| c.re).collect()
}

/// `∮ φ(x₁, r) a₀(ρ) dρ` with `dρ = dx₁ + iσ dr`.
pub fn holomorphic_moment(
    phi: impl Fn(f64, f64) -> Complex64,
    a0: impl Fn(Complex64) -> Complex64,
    phase: &Phase,
    contour: &ShadowContour,
) -> Complex64 {
    let s = phase.sign() * phase.distortion();
    let terms: Vec<Complex64> = (0..contour.points.len())
        .map(|k| {
            let (x1, r) = contour.points[k];
            let (v1, vr) = contour.velocity[k];
            phi(x1, r) * a0(phase.rho(x1, r)) * Complex64::new(v1, s * vr) * contour.weights[k]
        })
        .collect();
    pairwise_sum_c(&terms)
}
