//! Complex phases `ρ = x₁ + i·σ·r` built from polar normal coordinates.

use crate::error::{Error, Result};
use crate::geometry::{MetricField2D, PolarChart, Point2};
use num_complex::Complex64;

#[derive(Debug, Clone)]
pub struct Phase {
    omega: Point2,
    sign: f64,
    chart: PolarChart,
    metric: MetricField2D,
    /// Multiplies `r` in the imaginary part; `1` for a genuine phase.
    distortion: f64,
}

impl Phase {
    /// Chart center used by the default [`super::ChartBox`].
    pub const DEFAULT_CENTER: [f64; 2] = [-2.0, 0.0];

    pub fn default_center() -> Point2 {
        Point2::new(Self::DEFAULT_CENTER[0], Self::DEFAULT_CENTER[1])
    }

    /// `sign = ±1` selects `ψ = ±r`.
    pub fn new(metric: &MetricField2D, omega: Point2, sign: f64) -> Result<Self> {
        if sign != 1.0 && sign != -1.0 {
            return Err(Error::Precondition(format!("phase sign must be ±1, got {sign}")));
        }
        Ok(Self {
            omega,
            sign,
            chart: PolarChart::new(metric, omega),
            metric: metric.clone(),
            distortion: 1.0,
        })
    }

    /// `ρ = x₁ + i·σ·k·r`, which solves the eikonal equation only for `k = 1`.
    pub fn with_distortion(mut self, k: f64) -> Self {
        self.distortion = k;
        self
    }

    pub fn omega(&self) -> Point2 {
        self.omega
    }

    pub fn sign(&self) -> f64 {
        self.sign
    }

    pub fn distortion(&self) -> f64 {
        self.distortion
    }

    pub fn chart(&self) -> &PolarChart {
        &self.chart
    }

    pub fn metric(&self) -> &MetricField2D {
        &self.metric
    }

    /// `ρ(x₁, r)`.
    #[inline]
    pub fn rho(&self, x1: f64, r: f64) -> Complex64 {
        Complex64::new(x1, self.sign * self.distortion * r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EikonalReport {
    /// `sup |⟨dρ, dρ⟩_g|` times `c`.
    pub eikonal: f64,
    /// `sup |g₀^{-1}dr − ∂_r|_{g₀}`: the gradient of `ρ` against `(2/c)∂̄`.
    pub gradient: f64,
    pub samples: usize,
}

impl EikonalReport {
    pub fn max(&self) -> f64 {
        self.eikonal.max(self.gradient)
    }
}

/// Checks `⟨dρ, dρ⟩_g = 0` and `∇ρ = (2/c)∂̄` on an `n × n` sample of the
/// `(r, θ)` box, differentiating the inverse chart in Cartesian coordinates.
///
/// `ρ` does not depend on `x₁` and the conformal factor only rescales the
/// dual metric, so the residual is reported for `c = 1`.
pub fn eikonal_residual(phase: &Phase, r: (f64, f64), theta: (f64, f64), n: usize) -> Result<EikonalReport> {
    // eighth-order central differences
    const STEP: f64 = 5e-3;
    const W: [(f64, f64); 4] = [(1.0, 4.0 / 5.0), (2.0, -1.0 / 5.0), (3.0, 4.0 / 105.0), (4.0, -1.0 / 280.0)];
    let chart = phase.chart();
    let metric = phase.metric();
    let k = phase.distortion();
    let mut eik: f64 = 0.0;
    let mut grad: f64 = 0.0;
    for a in 0..n {
        for b in 0..n {
            let rr = r.0 + (r.1 - r.0) * (a as f64 + 0.5) / n as f64;
            let th = theta.0 + (theta.1 - theta.0) * (b as f64 + 0.5) / n as f64;
            let s = chart.exp(rr, th)?;
            let mut dr = Point2::zeros();
            for axis in 0..2 {
                let mut e = Point2::zeros();
                e[axis] = STEP;
                for (m, w) in W {
                    let plus = chart.polar(&(s.x + e * m))?.0;
                    let minus = chart.polar(&(s.x - e * m))?.0;
                    dr[axis] += w * (plus - minus) / STEP;
                }
            }
            let ginv = metric.g(&s.x).try_inverse().ok_or_else(|| Error::Geometry("singular g₀".into()))?;
            let up = ginv * dr;
            // ⟨dρ, dρ⟩ = (1 − k²|dr|²)/c with ∂_{x₁}ψ = 0
            eik = eik.max((1.0 - k * k * dr.dot(&up)).abs());
            let diff = up - s.v;
            grad = grad.max(metric.norm2(&s.x, &diff).sqrt());
        }
    }
    Ok(EikonalReport {
        eikonal: eik,
        gradient: grad,
        samples: n * n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::gallery;

    #[test]
    fn flat_phase_is_eikonal() {
        let m = gallery::metric("euclidean_disk").unwrap();
        for sign in [1.0, -1.0] {
            let p = Phase::new(&m, Phase::default_center(), sign).unwrap();
            let r = eikonal_residual(&p, (1.2, 2.2), (-0.25, 0.25), 5).unwrap();
            assert!(r.max() < 1e-10, "{r:?}");
        }
    }

    #[test]
    fn distorted_phase_fails() {
        let m = gallery::metric("euclidean_disk").unwrap();
        let p = Phase::new(&m, Phase::default_center(), 1.0).unwrap().with_distortion(0.5);
        let r = eikonal_residual(&p, (1.2, 2.2), (-0.25, 0.25), 3).unwrap();
        assert!((r.eikonal - 0.75).abs() < 1e-8);
    }

    #[test]
    fn bad_sign_rejected() {
        let m = gallery::metric("euclidean_disk").unwrap();
        assert!(Phase::new(&m, Phase::default_center(), 0.5).is_err());
    }
}
