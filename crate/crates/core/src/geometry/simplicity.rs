//! Numerical sufficient test for simplicity: no conjugate points along
//! boundary-to-boundary geodesics, and a strictly convex boundary.

use super::geodesic::{jacobi_rhs, shoot_geodesic, UnitTangent};
use super::influx::{boundary_frame, InfluxGrid};
use super::metric::{MetricField2D, Point2};
use crate::error::Result;
use crate::ode::{dopri5_step, step_factor};
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub struct SimplicityReport {
    /// `min j(t)/t` over sampled geodesics; `j` the normal Jacobi field with
    /// `j(0) = 0`, `j'(0) = 1`.
    pub jacobi_margin: f64,
    /// Minimum geodesic curvature of `∂D` (positive when strictly convex).
    pub convexity_margin: f64,
    pub rays: usize,
    pub fd_derivatives: bool,
    pub pass: bool,
}

pub fn simplicity_diagnostics(metric: &MetricField2D, samples: usize) -> Result<SimplicityReport> {
    let n = samples.max(4);
    let grid = InfluxGrid::new(metric, n, n)?;
    let tol = 1e-10;
    let mut jacobi_margin = f64::INFINITY;
    for node in grid.nodes() {
        let start = UnitTangent::new(metric, node.x, node.v)?;
        let path = shoot_geodesic(metric, &start, tol)?;
        jacobi_margin = jacobi_margin.min(min_jacobi_ratio(metric, &start, path.tau, tol));
    }

    let mut convexity_margin = f64::INFINITY;
    for k in 0..(4 * n) {
        let s = 2.0 * PI * k as f64 / (4 * n) as f64;
        convexity_margin = convexity_margin.min(boundary_curvature(metric, s));
    }
    Ok(SimplicityReport {
        jacobi_margin,
        convexity_margin,
        rays: grid.len(),
        fd_derivatives: metric.uses_fd_derivatives(),
        pass: jacobi_margin > 0.0 && convexity_margin > 0.0,
    })
}

fn min_jacobi_ratio(metric: &MetricField2D, start: &UnitTangent, tau: f64, tol: f64) -> f64 {
    let f = |y: &[f64; 6]| jacobi_rhs(metric, y);
    let mut y = [start.x.x, start.x.y, start.v.x, start.v.y, 0.0, 1.0];
    let mut k1 = f(&y);
    let mut t = 0.0;
    let mut h = 0.05 * tau;
    let mut worst = 1.0f64;
    while t < tau && h > 1e-14 {
        let step = h.min(tau - t);
        let (y5, k7, err) = dopri5_step(&f, &y, &k1, step, tol);
        if err <= 1.0 {
            t += step;
            y = y5;
            k1 = k7;
            worst = worst.min(y[4] / t);
        }
        h = step * step_factor(err);
    }
    worst
}

/// Geodesic curvature `⟨∇_ẋ ẋ, N_in⟩ / |ẋ|²` of the boundary at parameter `s`.
pub fn boundary_curvature(metric: &MetricField2D, s: f64) -> f64 {
    let d = metric.domain();
    let fr = boundary_frame(metric, s);
    let xd: Point2 = d.boundary_velocity(s);
    let xdd = d.boundary_acceleration(s);
    let gam = metric.christoffel_unchecked(&fr.x);
    let acc = xdd + gam.contract(&xd, &xd);
    let speed2 = metric.norm2(&fr.x, &xd);
    -metric.inner(&fr.x, &acc, &fr.outward) / speed2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::domain::StarDomain;

    #[test]
    fn flat_disk_passes() {
        let m = MetricField2D::euclidean(StarDomain::unit_disk());
        let r = simplicity_diagnostics(&m, 8).unwrap();
        assert!(r.pass);
        assert!((r.convexity_margin - 1.0).abs() < 1e-12);
        assert!((r.jacobi_margin - 1.0).abs() < 1e-9);
    }
}
