//! Named test metrics on the unit disk.

use super::domain::StarDomain;
use super::metric::{ConformalProduct, MetricField2D, Point2};
use crate::error::{Error, Result};
use nalgebra::{Matrix2, Vector3};

/// Names accepted by [`metric`]. The last one has conjugate points and a
/// concave boundary.
pub const NAMES: [&str; 5] = [
    "euclidean_disk",
    "conformal_bump",
    "sphere_cap_small",
    "perturbed_disk",
    "sphere_cap_large",
];

/// Transversal metric `g₀` by name.
pub fn metric(name: &str) -> Result<MetricField2D> {
    let disk = StarDomain::unit_disk();
    match name {
        "euclidean_disk" => Ok(MetricField2D::euclidean(disk)),
        "conformal_bump" => MetricField2D::conformal(name, disk, |x| {
            // g₀ = (1 + 0.2 e^{−|x|²}) I
            let e = (-x.norm_squared()).exp();
            let w = 1.0 + 0.2 * e;
            let dw = -0.4 * e * x;
            let hw = Matrix2::identity() * (-0.4 * e) + 0.8 * e * x * x.transpose();
            (0.5 * w.ln(), 0.5 * dw / w, 0.5 * (hw / w - dw * dw.transpose() / (w * w)))
        }),
        "sphere_cap_small" => sphere_cap(name, 0.5),
        "sphere_cap_large" => sphere_cap(name, 2.0),
        "perturbed_disk" => perturbed(name, 0.05),
        _ => Err(Error::Precondition(format!(
            "unknown metric '{name}' (known: {})",
            NAMES.join(", ")
        ))),
    }
}

/// Conformal factor paired with each gallery metric.
pub fn conformal_factor(name: &str) -> fn(&Vector3<f64>) -> f64 {
    match name {
        "conformal_bump" => |x| 1.0 + 0.2 * (-x.norm_squared()).exp(),
        _ => |_| 1.0,
    }
}

/// Admissible product `c·(1 ⊕ g₀)` for a gallery name.
pub fn product(name: &str, x1_range: (f64, f64)) -> Result<ConformalProduct> {
    ConformalProduct::new(metric(name)?, conformal_factor(name), x1_range)
}

/// Stereographic round-sphere metric `4k²/(1 + k²|x|²)² I`; the unit disk is a
/// cap of angular radius `2 atan k`.
fn sphere_cap(name: &str, k: f64) -> Result<MetricField2D> {
    MetricField2D::conformal(name, StarDomain::unit_disk(), move |x| {
        let s = 1.0 + k * k * x.norm_squared();
        let u = (2.0 * k).ln() - s.ln();
        let du = -2.0 * k * k * x / s;
        let h = Matrix2::identity() * (-2.0 * k * k / s) + 4.0 * k.powi(4) * x * x.transpose() / (s * s);
        (u, du, h)
    })
}

/// `I + ε S(x)` with a non-conformal symmetric perturbation `S`.
fn perturbed(name: &str, eps: f64) -> Result<MetricField2D> {
    let parts = |x: &Point2| (x.x + 2.0 * x.y, 2.0 * x.x - x.y);
    MetricField2D::new(
        name,
        StarDomain::unit_disk(),
        move |x| {
            let (a, b) = parts(x);
            let c = x.x * x.y;
            Matrix2::identity() + eps * Matrix2::new(a.sin(), c, c, b.cos())
        },
        move |x| {
            let (a, b) = parts(x);
            [
                eps * Matrix2::new(a.cos(), x.y, x.y, -2.0 * b.sin()),
                eps * Matrix2::new(2.0 * a.cos(), x.x, x.x, b.sin()),
            ]
        },
        move |x| {
            let (a, b) = parts(x);
            let xy = eps * Matrix2::new(-2.0 * a.sin(), 1.0, 1.0, 2.0 * b.cos());
            [
                [eps * Matrix2::new(-a.sin(), 0.0, 0.0, -4.0 * b.cos()), xy],
                [xy, eps * Matrix2::new(-4.0 * a.sin(), 0.0, 0.0, -b.cos())],
            ]
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analytic_derivatives_agree_with_fd() {
        let pts = StarDomain::unit_disk().interior_samples(30);
        for name in NAMES {
            let m = metric(name).unwrap();
            // fourth-order FD at step 1e-3: truncation ~1e-12
            assert!(m.derivative_defect(&pts, 1e-3) < 1e-9, "{name}");
        }
    }

    #[test]
    fn second_derivatives_agree_with_fd() {
        let m = metric("perturbed_disk").unwrap();
        let x = Point2::new(0.2, -0.4);
        let h = 1e-4;
        let d2 = m.d2g(&x);
        for a in 0..2 {
            let mut e = Point2::zeros();
            e[a] = h;
            let fd = [0, 1].map(|b| (m.dg(&(x + e))[b] - m.dg(&(x - e))[b]) / (2.0 * h));
            for b in 0..2 {
                assert!((fd[b] - d2[a][b]).abs().max() < 1e-8);
            }
        }
    }

    #[test]
    fn unknown_name_rejected() {
        assert!(metric("nope").is_err());
    }
}
