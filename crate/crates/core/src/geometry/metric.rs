//! Transversal metrics `g₀` on `D ⊂ ℝ²` and admissible product metrics
//! `g = c(x)·(1 ⊕ g₀)` on `ℝ × D`.

use super::domain::StarDomain;
use crate::error::{Error, Result};
use nalgebra::{Matrix2, Matrix3, SymmetricEigen, Vector2, Vector3};
use std::fmt;
use std::sync::Arc;

pub type Point2 = Vector2<f64>;

/// Smallest admissible eigenvalue of `g₀`.
pub const EPS_PD: f64 = 1e-8;
/// Smallest admissible value of the conformal factor.
pub const EPS_C: f64 = 1e-8;

type MetricFn = Arc<dyn Fn(&Point2) -> Matrix2<f64> + Send + Sync>;
type FirstFn = Arc<dyn Fn(&Point2) -> [Matrix2<f64>; 2] + Send + Sync>;
type SecondFn = Arc<dyn Fn(&Point2) -> [[Matrix2<f64>; 2]; 2] + Send + Sync>;

/// Christoffel symbols `Γ^i_{jk}` stored as `gamma[i][j][k]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Christoffel(pub [[[f64; 2]; 2]; 2]);

impl Christoffel {
    /// `Γ^i_{jk} v^j w^k`.
    #[inline]
    pub fn contract(&self, v: &Point2, w: &Point2) -> Point2 {
        let g = &self.0;
        let mut out = Point2::zeros();
        for i in 0..2 {
            let mut s = 0.0;
            for j in 0..2 {
                for k in 0..2 {
                    s += g[i][j][k] * v[j] * w[k];
                }
            }
            out[i] = s;
        }
        out
    }
}

/// A Riemannian metric on a star-shaped planar domain, with first and second
/// partial derivatives.
#[derive(Clone)]
pub struct MetricField2D {
    name: String,
    domain: StarDomain,
    g: MetricFn,
    dg: FirstFn,
    d2g: SecondFn,
    fd_derivatives: bool,
}

impl fmt::Debug for MetricField2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MetricField2D")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("fd_derivatives", &self.fd_derivatives)
            .finish()
    }
}

impl MetricField2D {
    /// Metric with closed-form derivatives. Validates symmetry and definiteness
    /// on a dense interior sample.
    pub fn new(
        name: impl Into<String>,
        domain: StarDomain,
        g: impl Fn(&Point2) -> Matrix2<f64> + Send + Sync + 'static,
        dg: impl Fn(&Point2) -> [Matrix2<f64>; 2] + Send + Sync + 'static,
        d2g: impl Fn(&Point2) -> [[Matrix2<f64>; 2]; 2] + Send + Sync + 'static,
    ) -> Result<Self> {
        let m = Self {
            name: name.into(),
            domain,
            g: Arc::new(g),
            dg: Arc::new(dg),
            d2g: Arc::new(d2g),
            fd_derivatives: false,
        };
        m.validate()?;
        Ok(m)
    }

    /// Metric given by values only; derivatives come from central differences
    /// with step `ε^{1/3}` (first) and `ε^{1/4}` (second), scaled by the domain size.
    pub fn from_values(
        name: impl Into<String>,
        domain: StarDomain,
        g: impl Fn(&Point2) -> Matrix2<f64> + Send + Sync + 'static,
    ) -> Result<Self> {
        let g: MetricFn = Arc::new(g);
        let scale = domain.diameter().max(1.0);
        let h1 = f64::EPSILON.cbrt() * scale;
        let h2 = f64::EPSILON.powf(0.25) * scale;
        let g1 = g.clone();
        let dg: FirstFn = Arc::new(move |x: &Point2| {
            let e = [Point2::new(h1, 0.0), Point2::new(0.0, h1)];
            [0, 1].map(|k| (g1(&(x + e[k])) - g1(&(x - e[k]))) / (2.0 * h1))
        });
        let g2 = g.clone();
        let d2g: SecondFn = Arc::new(move |x: &Point2| {
            let e = [Point2::new(h2, 0.0), Point2::new(0.0, h2)];
            let mut out = [[Matrix2::zeros(); 2]; 2];
            for a in 0..2 {
                for b in 0..2 {
                    out[a][b] = (g2(&(x + e[a] + e[b])) - g2(&(x + e[a] - e[b])) - g2(&(x - e[a] + e[b]))
                        + g2(&(x - e[a] - e[b])))
                        / (4.0 * h2 * h2);
                }
            }
            out
        });
        let m = Self {
            name: name.into(),
            domain,
            g,
            dg,
            d2g,
            fd_derivatives: true,
        };
        m.validate()?;
        Ok(m)
    }

    /// `g₀ = e^{2u} I` from `u` with gradient and Hessian.
    pub fn conformal(
        name: impl Into<String>,
        domain: StarDomain,
        u: impl Fn(&Point2) -> (f64, Point2, Matrix2<f64>) + Send + Sync + 'static,
    ) -> Result<Self> {
        let u = Arc::new(u);
        let (u1, u2, u3) = (u.clone(), u.clone(), u);
        Self::new(
            name,
            domain,
            move |x| Matrix2::identity() * (2.0 * u1(x).0).exp(),
            move |x| {
                let (v, du, _) = u2(x);
                let e = (2.0 * v).exp();
                [0, 1].map(|k| Matrix2::identity() * (2.0 * e * du[k]))
            },
            move |x| {
                let (v, du, hu) = u3(x);
                let e = (2.0 * v).exp();
                let mut out = [[Matrix2::zeros(); 2]; 2];
                for a in 0..2 {
                    for b in 0..2 {
                        out[a][b] = Matrix2::identity() * (2.0 * e * (hu[(a, b)] + 2.0 * du[a] * du[b]));
                    }
                }
                out
            },
        )
    }

    pub fn euclidean(domain: StarDomain) -> Self {
        Self {
            name: "euclidean".into(),
            domain,
            g: Arc::new(|_| Matrix2::identity()),
            dg: Arc::new(|_| [Matrix2::zeros(); 2]),
            d2g: Arc::new(|_| [[Matrix2::zeros(); 2]; 2]),
            fd_derivatives: false,
        }
    }

    fn validate(&self) -> Result<()> {
        for x in self.domain.interior_samples(400) {
            check_spd(&x, &(self.g)(&x))?;
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> &StarDomain {
        &self.domain
    }

    /// True when derivatives come from the finite-difference fallback.
    pub fn uses_fd_derivatives(&self) -> bool {
        self.fd_derivatives
    }

    #[inline]
    pub fn g(&self, x: &Point2) -> Matrix2<f64> {
        (self.g)(x)
    }

    #[inline]
    pub fn dg(&self, x: &Point2) -> [Matrix2<f64>; 2] {
        (self.dg)(x)
    }

    #[inline]
    pub fn d2g(&self, x: &Point2) -> [[Matrix2<f64>; 2]; 2] {
        (self.d2g)(x)
    }

    #[inline]
    pub fn inner(&self, x: &Point2, u: &Point2, v: &Point2) -> f64 {
        u.dot(&(self.g(x) * v))
    }

    #[inline]
    pub fn norm2(&self, x: &Point2, v: &Point2) -> f64 {
        self.inner(x, v, v)
    }

    pub fn sqrt_det(&self, x: &Point2) -> f64 {
        self.g(x).determinant().sqrt()
    }

    /// Christoffel symbols without domain checks (used inside integrators,
    /// which may probe slightly outside `D`).
    #[inline]
    pub fn christoffel_unchecked(&self, x: &Point2) -> Christoffel {
        let g = self.g(x);
        let dg = self.dg(x);
        let gi = inv2(&g);
        christoffel_from(&gi, &dg)
    }

    /// Gaussian curvature (Brioschi formula).
    pub fn gaussian_curvature(&self, x: &Point2) -> f64 {
        let g = self.g(x);
        let dg = self.dg(x);
        let d2 = self.d2g(x);
        let (e, f, gg) = (g[(0, 0)], g[(0, 1)], g[(1, 1)]);
        let (e_u, e_v) = (dg[0][(0, 0)], dg[1][(0, 0)]);
        let (f_u, f_v) = (dg[0][(0, 1)], dg[1][(0, 1)]);
        let (g_u, g_v) = (dg[0][(1, 1)], dg[1][(1, 1)]);
        let e_vv = d2[1][1][(0, 0)];
        let f_uv = d2[0][1][(0, 1)];
        let g_uu = d2[0][0][(1, 1)];
        let a = Matrix3::new(
            -0.5 * e_vv + f_uv - 0.5 * g_uu,
            0.5 * e_u,
            f_u - 0.5 * e_v,
            f_v - 0.5 * g_u,
            e,
            f,
            0.5 * g_v,
            f,
            gg,
        );
        let b = Matrix3::new(0.0, 0.5 * e_v, 0.5 * g_u, 0.5 * e_v, e, f, 0.5 * g_u, f, gg);
        let det = e * gg - f * f;
        (a.determinant() - b.determinant()) / (det * det)
    }

    /// Positively oriented `g₀`-unit normal to the `g₀`-unit vector `v`.
    #[inline]
    pub fn rotate_unit(&self, x: &Point2, v: &Point2) -> Point2 {
        let g = self.g(x);
        let w = g * v;
        Point2::new(-w.y, w.x) / g.determinant().sqrt()
    }

    /// Maximum relative mismatch between the supplied first derivatives and
    /// fourth-order central differences of `g₀` on the given points.
    pub fn derivative_defect(&self, points: &[Point2], step: f64) -> f64 {
        let mut worst = 0.0f64;
        for x in points {
            let dg = self.dg(x);
            for k in 0..2 {
                let mut e = Point2::zeros();
                e[k] = step;
                let fd = (self.g(&(x - 2.0 * e)) - 8.0 * self.g(&(x - e)) + 8.0 * self.g(&(x + e))
                    - self.g(&(x + 2.0 * e)))
                    / (12.0 * step);
                worst = worst.max((fd - dg[k]).abs().max() / (1.0 + dg[k].abs().max()));
            }
        }
        worst
    }
}

#[inline]
pub(crate) fn inv2(g: &Matrix2<f64>) -> Matrix2<f64> {
    let det = g[(0, 0)] * g[(1, 1)] - g[(0, 1)] * g[(1, 0)];
    Matrix2::new(g[(1, 1)], -g[(0, 1)], -g[(1, 0)], g[(0, 0)]) / det
}

#[inline]
fn christoffel_from(gi: &Matrix2<f64>, dg: &[Matrix2<f64>; 2]) -> Christoffel {
    let mut out = [[[0.0; 2]; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            for k in j..2 {
                let mut s = 0.0;
                for l in 0..2 {
                    s += gi[(i, l)] * (dg[j][(l, k)] + dg[k][(l, j)] - dg[l][(j, k)]);
                }
                out[i][j][k] = 0.5 * s;
                out[i][k][j] = 0.5 * s;
            }
        }
    }
    Christoffel(out)
}

fn check_spd(x: &Point2, g: &Matrix2<f64>) -> Result<()> {
    let asym = (g[(0, 1)] - g[(1, 0)]).abs();
    if asym > 1e-12 * (1.0 + g.abs().max()) {
        return Err(Error::NotSymmetric { x: x.x, y: x.y, asym });
    }
    let eig = SymmetricEigen::new(*g);
    let min_eig = eig.eigenvalues.min();
    if !(min_eig >= EPS_PD) {
        return Err(Error::NotPositiveDefinite { x: x.x, y: x.y, min_eig });
    }
    Ok(())
}

/// Christoffel symbols at a point of `D`.
pub fn christoffels(metric: &MetricField2D, x: &Point2) -> Result<Christoffel> {
    if !metric.domain().contains(x, 1e-12) {
        return Err(Error::OutsideDomain { x: x.x, y: x.y });
    }
    let g = metric.g(x);
    check_spd(x, &g)?;
    Ok(christoffel_from(&inv2(&g), &metric.dg(x)))
}

type ConformalFn = Arc<dyn Fn(&Vector3<f64>) -> f64 + Send + Sync>;

/// Admissible metric `g(x₁, x′) = c(x)·diag(1, g₀(x′))`.
#[derive(Clone)]
pub struct ConformalProduct {
    base: MetricField2D,
    c: ConformalFn,
    x1_range: (f64, f64),
}

impl fmt::Debug for ConformalProduct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConformalProduct")
            .field("base", &self.base)
            .field("x1_range", &self.x1_range)
            .finish()
    }
}

impl ConformalProduct {
    pub fn new(
        base: MetricField2D,
        c: impl Fn(&Vector3<f64>) -> f64 + Send + Sync + 'static,
        x1_range: (f64, f64),
    ) -> Result<Self> {
        let m = Self {
            base,
            c: Arc::new(c),
            x1_range,
        };
        let (lo, hi) = x1_range;
        for k in 0..9 {
            let x1 = lo + (hi - lo) * k as f64 / 8.0;
            for p in m.base.domain().interior_samples(100) {
                let cv = m.c(&Vector3::new(x1, p.x, p.y));
                if !(cv >= EPS_C) {
                    return Err(Error::Precondition(format!(
                        "conformal factor {cv:e} below {EPS_C:e} at ({x1}, {}, {})",
                        p.x, p.y
                    )));
                }
            }
        }
        Ok(m)
    }

    /// Product with `c ≡ 1`.
    pub fn product(base: MetricField2D, x1_range: (f64, f64)) -> Self {
        Self {
            base,
            c: Arc::new(|_| 1.0),
            x1_range,
        }
    }

    pub fn base(&self) -> &MetricField2D {
        &self.base
    }

    pub fn x1_range(&self) -> (f64, f64) {
        self.x1_range
    }

    #[inline]
    pub fn c(&self, x: &Vector3<f64>) -> f64 {
        (self.c)(x)
    }

    /// The assembled 3×3 metric.
    pub fn metric(&self, x: &Vector3<f64>) -> Matrix3<f64> {
        let c = self.c(x);
        let g0 = self.base.g(&Point2::new(x.y, x.z));
        let mut g = Matrix3::zeros();
        g[(0, 0)] = c;
        for i in 0..2 {
            for j in 0..2 {
                g[(i + 1, j + 1)] = c * g0[(i, j)];
            }
        }
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn conformal_linear() -> MetricField2D {
        // u = x₁
        MetricField2D::conformal("exp_x1", StarDomain::unit_disk(), |x| {
            (x.x, Point2::new(1.0, 0.0), Matrix2::zeros())
        })
        .unwrap()
    }

    #[test]
    fn flat_christoffels_vanish() {
        let m = MetricField2D::euclidean(StarDomain::unit_disk());
        let c = christoffels(&m, &Point2::new(0.2, -0.3)).unwrap();
        assert_eq!(c, Christoffel([[[0.0; 2]; 2]; 2]));
    }

    #[test]
    fn conformal_christoffels() {
        let m = conformal_linear();
        let c = christoffels(&m, &Point2::new(0.1, 0.4)).unwrap().0;
        let close = |a: f64, b: f64| (a - b).abs() < 1e-14;
        assert!(close(c[0][0][0], 1.0));
        assert!(close(c[0][1][1], -1.0));
        assert!(close(c[1][0][1], 1.0) && close(c[1][1][0], 1.0));
        assert!(close(c[0][0][1], 0.0) && close(c[1][0][0], 0.0) && close(c[1][1][1], 0.0));
    }

    #[test]
    fn conformal_christoffels_match_fd_metric() {
        let analytic = conformal_linear();
        let fd = MetricField2D::from_values("fd", StarDomain::unit_disk(), |x| {
            Matrix2::identity() * (2.0 * x.x).exp()
        })
        .unwrap();
        assert!(fd.uses_fd_derivatives());
        let x = Point2::new(-0.3, 0.5);
        let a = christoffels(&analytic, &x).unwrap().0;
        let b = christoffels(&fd, &x).unwrap().0;
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    assert!((a[i][j][k] - b[i][j][k]).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn outside_domain_rejected() {
        let m = MetricField2D::euclidean(StarDomain::unit_disk());
        assert!(matches!(
            christoffels(&m, &Point2::new(1.5, 0.0)),
            Err(Error::OutsideDomain { .. })
        ));
    }

    #[test]
    fn indefinite_metric_rejected() {
        let r = MetricField2D::from_values("bad", StarDomain::unit_disk(), |x| {
            Matrix2::new(1.0, 0.0, 0.0, x.x)
        });
        assert!(matches!(r, Err(Error::NotPositiveDefinite { .. })));
    }

    #[test]
    fn sphere_curvature_is_one() {
        let k = 0.5;
        let m = MetricField2D::conformal("cap", StarDomain::unit_disk(), move |x| {
            let s = 1.0 + k * k * x.norm_squared();
            let u = (2.0 * k).ln() - s.ln();
            let du = -2.0 * k * k * x / s;
            let mut h = Matrix2::identity() * (-2.0 * k * k / s);
            h += 4.0 * k.powi(4) * x * x.transpose() / (s * s);
            (u, du, h)
        })
        .unwrap();
        for p in [Point2::new(0.0, 0.0), Point2::new(0.3, -0.6)] {
            assert!((m.gaussian_curvature(&p) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn christoffel_symmetry_on_anisotropic_metric() {
        let m = MetricField2D::from_values("aniso", StarDomain::unit_disk(), |x| {
            Matrix2::new(1.0 + 0.1 * x.x * x.x, 0.05 * x.x * x.y, 0.05 * x.x * x.y, 1.0 + 0.2 * x.y)
        })
        .unwrap();
        let c = christoffels(&m, &Point2::new(0.3, 0.2)).unwrap().0;
        for i in 0..2 {
            assert_eq!(c[i][0][1], c[i][1][0]);
        }
    }
}
