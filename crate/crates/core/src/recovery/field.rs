//! Vector fields and potentials on `M ⊂ ℝ × D`, stored through `X♭`.

use crate::error::{Error, Result};
use crate::geometry::{ConformalProduct, Point2};
use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use std::fmt;
use std::sync::Arc;

type C = Complex64;
type FormFn = Arc<dyn Fn(&Vector3<f64>) -> [C; 3] + Send + Sync>;
type ScalarFn = Arc<dyn Fn(&Vector3<f64>) -> C + Send + Sync>;

/// `[x₁] × {|x′ − center| ≤ radius}`, compactly inside `M`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportBox {
    pub x1: (f64, f64),
    pub center: Point2,
    pub radius: f64,
}

impl SupportBox {
    pub fn contains(&self, x: &Vector3<f64>) -> bool {
        x.x >= self.x1.0 && x.x <= self.x1.1 && (Point2::new(x.y, x.z) - self.center).norm() <= self.radius
    }

    /// Requires the box to stay `margin` inside `M`.
    pub fn check_inside(&self, product: &ConformalProduct, margin: f64) -> Result<()> {
        let (lo, hi) = product.x1_range();
        if self.x1.0 < lo + margin || self.x1.1 > hi - margin || !(self.x1.1 > self.x1.0) || !(self.radius > 0.0) {
            return Err(Error::Precondition(format!(
                "support x₁ ∈ [{}, {}] is not inside [{lo}, {hi}]",
                self.x1.0, self.x1.1
            )));
        }
        let dom = product.base().domain();
        for k in 0..128 {
            let a = 2.0 * std::f64::consts::PI * k as f64 / 128.0;
            let p = self.center + Point2::new(a.cos(), a.sin()) * (self.radius + margin);
            if dom.defining_fn(&p) >= 0.0 {
                return Err(Error::Precondition(format!(
                    "support disk of radius {} about ({}, {}) reaches ∂D",
                    self.radius, self.center.x, self.center.y
                )));
            }
        }
        Ok(())
    }
}

/// A vector field `X` on `M`, kept as its dual 1-form `X♭ = g(X, ·)`.
#[derive(Clone)]
pub struct VectorFieldM {
    product: ConformalProduct,
    flat: FormFn,
    support: Option<SupportBox>,
}

impl fmt::Debug for VectorFieldM {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VectorFieldM").field("support", &self.support).finish_non_exhaustive()
    }
}

impl VectorFieldM {
    /// From covariant components `X♭_{x₁}, X♭_{y₁}, X♭_{y₂}`.
    pub fn from_flat(
        product: &ConformalProduct,
        flat: impl Fn(&Vector3<f64>) -> [C; 3] + Send + Sync + 'static,
        support: Option<SupportBox>,
    ) -> Self {
        Self {
            product: product.clone(),
            flat: Arc::new(flat),
            support,
        }
    }

    /// From contravariant components, lowered with `g`.
    pub fn from_vector(
        product: &ConformalProduct,
        x: impl Fn(&Vector3<f64>) -> [C; 3] + Send + Sync + 'static,
        support: Option<SupportBox>,
    ) -> Self {
        let p = product.clone();
        Self::from_flat(
            product,
            move |y| {
                let g = p.metric(y);
                let v = x(y);
                [0, 1, 2].map(|i| (0..3).map(|j| v[j] * g[(i, j)]).sum())
            },
            support,
        )
    }

    /// `∇φ`, so that `X♭ = dφ`.
    pub fn gradient(potential: &Potential) -> Self {
        let p = potential.clone();
        Self::from_flat(&potential.product, move |x| p.grad(x), Some(potential.support))
    }

    pub fn product(&self) -> &ConformalProduct {
        &self.product
    }

    pub fn support(&self) -> Option<SupportBox> {
        self.support
    }

    #[inline]
    pub fn flat(&self, x: &Vector3<f64>) -> [C; 3] {
        (self.flat)(x)
    }

    /// Contravariant components `g^{ij} X♭_j`.
    pub fn vector(&self, x: &Vector3<f64>) -> [C; 3] {
        let gi: Matrix3<f64> = self.product.metric(x).try_inverse().unwrap_or_else(Matrix3::zeros);
        let a = self.flat(x);
        [0, 1, 2].map(|i| (0..3).map(|j| a[j] * gi[(i, j)]).sum())
    }

    /// Samples `M` outside the recorded support and fails if `X♭` is not
    /// negligible there.
    pub fn check_support(&self) -> Result<()> {
        let Some(s) = self.support else {
            return Ok(());
        };
        let (lo, hi) = self.product.x1_range();
        let pts = self.product.base().domain().interior_samples(150);
        let mut peak: f64 = 0.0;
        let mut outside: f64 = 0.0;
        for k in 0..=20 {
            let x1 = lo + (hi - lo) * k as f64 / 20.0;
            for p in &pts {
                let x = Vector3::new(x1, p.x, p.y);
                let v = self.flat(&x).iter().map(|c| c.norm()).fold(0.0, f64::max);
                peak = peak.max(v);
                if !s.contains(&x) {
                    outside = outside.max(v);
                }
            }
        }
        if outside > 1e-12 * peak.max(1e-300) {
            return Err(Error::Support(format!("field reaches {outside:e} outside its recorded support")));
        }
        Ok(())
    }
}

/// Scalar potential on `M` with a closed-form differential.
#[derive(Clone)]
pub struct Potential {
    product: ConformalProduct,
    value: ScalarFn,
    grad: FormFn,
    pub support: SupportBox,
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Potential").field("support", &self.support).finish_non_exhaustive()
    }
}

impl Potential {
    pub fn new(
        product: &ConformalProduct,
        value: impl Fn(&Vector3<f64>) -> C + Send + Sync + 'static,
        grad: impl Fn(&Vector3<f64>) -> [C; 3] + Send + Sync + 'static,
        support: SupportBox,
    ) -> Self {
        Self {
            product: product.clone(),
            value: Arc::new(value),
            grad: Arc::new(grad),
            support,
        }
    }

    /// `amp · (1 − t²)^p · (1 − s)^p` with `t = (x₁ − mid)/half` and
    /// `s = |x′ − center|²/radius²`, zero outside the box. `C^{p−1}`.
    pub fn bump(product: &ConformalProduct, support: SupportBox, amp: C, p: i32) -> Self {
        let mid = 0.5 * (support.x1.0 + support.x1.1);
        let half = 0.5 * (support.x1.1 - support.x1.0);
        let r2 = support.radius * support.radius;
        let parts = move |x: &Vector3<f64>| {
            let t = (x.x - mid) / half;
            let d = Point2::new(x.y, x.z) - support.center;
            let s = d.norm_squared() / r2;
            if t.abs() >= 1.0 || s >= 1.0 {
                return None;
            }
            let a = 1.0 - t * t;
            let b = 1.0 - s;
            let pf = p as f64;
            let value = a.powi(p) * b.powi(p);
            let dx1 = pf * a.powi(p - 1) * (-2.0 * t / half) * b.powi(p);
            let dy = d * (pf * b.powi(p - 1) * (-2.0 / r2) * a.powi(p));
            Some((value, [dx1, dy.x, dy.y]))
        };
        Self::new(
            product,
            move |x| parts(x).map_or(C::default(), |(v, _)| amp * v),
            move |x| parts(x).map_or([C::default(); 3], |(_, g)| g.map(|v| amp * v)),
            support,
        )
    }

    pub fn product(&self) -> &ConformalProduct {
        &self.product
    }

    #[inline]
    pub fn value(&self, x: &Vector3<f64>) -> C {
        (self.value)(x)
    }

    #[inline]
    pub fn grad(&self, x: &Vector3<f64>) -> [C; 3] {
        (self.grad)(x)
    }

    /// Sum of two potentials on the same product; the support is the smallest
    /// box holding both.
    pub fn sum(&self, other: &Potential) -> Self {
        let (a, b) = (self.clone(), other.clone());
        let (a2, b2) = (self.clone(), other.clone());
        let (s, t) = (self.support, other.support);
        let x1 = (s.x1.0.min(t.x1.0), s.x1.1.max(t.x1.1));
        let center = (s.center + t.center) * 0.5;
        let radius = ((s.center - center).norm() + s.radius).max((t.center - center).norm() + t.radius);
        Self::new(
            &self.product,
            move |x| a.value(x) + b.value(x),
            move |x| {
                let (u, v) = (a2.grad(x), b2.grad(x));
                [u[0] + v[0], u[1] + v[1], u[2] + v[2]]
            },
            SupportBox { x1, center, radius },
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::gallery;

    fn bump() -> Potential {
        let prod = gallery::product("conformal_bump", (-1.0, 1.0)).unwrap();
        let s = SupportBox {
            x1: (-0.5, 0.4),
            center: Point2::new(0.1, -0.2),
            radius: 0.5,
        };
        Potential::bump(&prod, s, C::new(1.0, 0.5), 6)
    }

    #[test]
    fn bump_gradient_matches_differences() {
        let p = bump();
        let x = Vector3::new(0.1, 0.2, -0.1);
        let g = p.grad(&x);
        let h = 1e-5;
        for k in 0..3 {
            let mut e = Vector3::zeros();
            e[k] = h;
            let fd = (p.value(&(x + e)) - p.value(&(x - e))) / (2.0 * h);
            assert!((fd - g[k]).norm() < 1e-8);
        }
    }

    #[test]
    fn gradient_field_support_and_lowering() {
        let p = bump();
        let x = VectorFieldM::gradient(&p);
        x.check_support().unwrap();
        p.support.check_inside(p.product(), 0.05).unwrap();
        let y = Vector3::new(0.0, 0.1, 0.1);
        let back = VectorFieldM::from_vector(p.product(), {
            let x = x.clone();
            move |z| x.vector(z)
        }, None);
        for (a, b) in back.flat(&y).iter().zip(x.flat(&y)) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn escaping_support_detected() {
        let prod = gallery::product("euclidean_disk", (-1.0, 1.0)).unwrap();
        let s = SupportBox {
            x1: (-0.2, 0.2),
            center: Point2::new(0.0, 0.0),
            radius: 0.3,
        };
        let x = VectorFieldM::from_flat(&prod, |_| [C::new(1.0, 0.0); 3], Some(s));
        assert!(matches!(x.check_support(), Err(Error::Support(_))));
        let big = SupportBox { radius: 0.99, ..s };
        assert!(big.check_inside(&prod, 0.05).is_err());
    }
}
