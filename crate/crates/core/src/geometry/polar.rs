//! Polar normal coordinates `x = exp_ω(r θ)` in `(D, g₀)`.

use super::geodesic::{jacobi_rhs, shoot_geodesic, UnitTangent};
use super::metric::{MetricField2D, Point2};
use crate::error::{Error, Result};
use crate::ode::integrate_to;
use nalgebra::{Matrix2, SymmetricEigen};
use std::f64::consts::PI;

/// Point of the chart with its velocity and the normal Jacobi field `j`.
#[derive(Debug, Clone, Copy)]
pub struct ExpState {
    pub x: Point2,
    pub v: Point2,
    /// `∂_θ exp_ω(rθ) = j · n`, with `n` the positively oriented unit normal.
    pub j: f64,
    pub dj: f64,
}

#[derive(Debug, Clone)]
pub struct PolarChart {
    metric: MetricField2D,
    center: Point2,
    /// `g₀(ω)^{-1/2}`: maps Euclidean unit vectors to `g₀`-unit vectors at `ω`.
    frame: Matrix2<f64>,
    frame_inv: Matrix2<f64>,
    tol: f64,
}

impl PolarChart {
    pub fn new(metric: &MetricField2D, center: Point2) -> Self {
        let eig = SymmetricEigen::new(metric.g(&center));
        let q = eig.eigenvectors;
        let d = eig.eigenvalues;
        let frame = q * Matrix2::from_diagonal(&d.map(|l| 1.0 / l.sqrt())) * q.transpose();
        let frame_inv = q * Matrix2::from_diagonal(&d.map(f64::sqrt)) * q.transpose();
        Self {
            metric: metric.clone(),
            center,
            frame,
            frame_inv,
            tol: 1e-12,
        }
    }

    pub fn center(&self) -> Point2 {
        self.center
    }

    /// Unit initial direction for angle `θ`.
    pub fn direction(&self, theta: f64) -> Point2 {
        self.frame * Point2::new(theta.cos(), theta.sin())
    }

    pub fn exp(&self, r: f64, theta: f64) -> Result<ExpState> {
        let v0 = self.direction(theta);
        let c = self.center;
        let f = |y: &[f64; 6]| jacobi_rhs(&self.metric, y);
        let y = integrate_to(&f, [c.x, c.y, v0.x, v0.y, 0.0, 1.0], r, self.tol)
            .ok_or_else(|| Error::Chart(format!("integration failed at r={r}, θ={theta}")))?;
        Ok(ExpState {
            x: Point2::new(y[0], y[1]),
            v: Point2::new(y[2], y[3]),
            j: y[4],
            dj: y[5],
        })
    }

    /// `g₀`-area density in `(r, θ)`: `dA = jacobian · dr dθ`.
    pub fn jacobian(&self, r: f64, theta: f64) -> Result<f64> {
        Ok(self.exp(r, theta)?.j)
    }

    /// Distance from `ω` to `∂D` along direction `θ`; zero for directions that
    /// leave immediately when `ω ∈ ∂D`.
    pub fn r_max(&self, theta: f64) -> Result<f64> {
        let start = UnitTangent::new(&self.metric, self.center, self.direction(theta))?;
        match shoot_geodesic(&self.metric, &start, self.tol) {
            Ok(p) => Ok(p.tau),
            Err(Error::Tangency { t }) if t == 0.0 => Ok(0.0),
            Err(e) => Err(e),
        }
    }

    /// Inverse of [`Self::exp`] by Newton iteration on `(r, θ)`.
    pub fn polar(&self, x: &Point2) -> Result<(f64, f64)> {
        let d = self.frame_inv * (x - self.center);
        let mut r = d.norm();
        if r == 0.0 {
            return Err(Error::Precondition("point coincides with the chart center".into()));
        }
        let mut theta = d.y.atan2(d.x);
        let scale = 1.0 + x.norm();
        for _ in 0..60 {
            let s = self.exp(r, theta)?;
            let res = s.x - x;
            // one polishing step after the tolerance is met
            let converged = res.norm() < 1e-13 * scale;
            let n = self.metric.rotate_unit(&s.x, &s.v);
            let jac = Matrix2::from_columns(&[s.v, s.j * n]);
            let step = jac
                .try_inverse()
                .ok_or_else(|| Error::Chart("singular exponential map (conjugate point)".into()))?
                * res;
            let mut dr = step.x;
            let mut dth = step.y;
            let lim = 0.5f64;
            let big = (dth.abs() / lim).max(dr.abs() / (0.5 * r)).max(1.0);
            dr /= big;
            dth /= big;
            r -= dr;
            theta -= dth;
            if r <= 0.0 {
                r = 1e-3;
            }
            if converged {
                return Ok((r, wrap_angle(theta)));
            }
        }
        Err(Error::Chart(format!("Newton did not converge for x=({}, {})", x.x, x.y)))
    }
}

fn wrap_angle(a: f64) -> f64 {
    let t = (a + PI).rem_euclid(2.0 * PI) - PI;
    if t == -PI {
        PI
    } else {
        t
    }
}

/// Polar normal coordinates `(r, θ)` of `x` about `ω`, with `θ ∈ (−π, π]`.
pub fn polar_coords(metric: &MetricField2D, omega: Point2, x: Point2) -> Result<(f64, f64)> {
    PolarChart::new(metric, omega).polar(&x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::domain::StarDomain;
    use crate::quadrature::GaussLegendre;

    #[test]
    fn flat_polar() {
        let m = MetricField2D::euclidean(StarDomain::unit_disk());
        let (r, th) = polar_coords(&m, Point2::zeros(), Point2::new(0.3, 0.4)).unwrap();
        assert!((r - 0.5).abs() < 1e-13);
        assert!((th - 0.4f64.atan2(0.3)).abs() < 1e-13);
        let c = PolarChart::new(&m, Point2::zeros());
        assert!((c.r_max(0.3).unwrap() - 1.0).abs() < 1e-11);
        assert!((c.jacobian(0.7, 1.0).unwrap() - 0.7).abs() < 1e-12);
    }

    #[test]
    fn radial_conformal_matches_quadrature() {
        // u(x) = 0.3|x|²
        let m = MetricField2D::conformal("radial", StarDomain::unit_disk(), |x| {
            (0.3 * x.norm_squared(), 0.6 * x, Matrix2::identity() * 0.6)
        })
        .unwrap();
        let x = Point2::new(-0.5, 0.35);
        let (r, th) = polar_coords(&m, Point2::zeros(), x).unwrap();
        let rho = x.norm();
        let gl = GaussLegendre::new(20);
        let oracle: f64 = gl.on_interval(0.0, rho).map(|(s, w)| w * (0.3 * s * s).exp()).sum();
        assert!((r - oracle).abs() < 1e-10, "{r} vs {oracle}");
        assert!((th - x.y.atan2(x.x)).abs() < 1e-10);
    }

    #[test]
    fn boundary_center_chart() {
        let m = MetricField2D::euclidean(StarDomain::unit_disk());
        let c = PolarChart::new(&m, Point2::new(-1.0, 0.0));
        assert!((c.r_max(0.0).unwrap() - 2.0).abs() < 1e-11);
        assert_eq!(c.r_max(PI).unwrap(), 0.0);
    }
}
