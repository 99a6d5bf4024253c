//! Complex scalar fields, 1-forms and (function, 1-form) pairs on `D`.

use crate::error::{Error, Result};
use crate::geometry::{MetricField2D, Point2, StarDomain};
use num_complex::Complex64;
use std::fmt;
use std::io::Write;
use std::sync::Arc;

pub type C64 = Complex64;
type ScalarFn = Arc<dyn Fn(&Point2) -> C64 + Send + Sync>;
type FormFn = Arc<dyn Fn(&Point2) -> [C64; 2] + Send + Sync>;

/// Fourth-order central-difference step used when no analytic gradient is given.
const FD_STEP: f64 = 1e-3;

#[derive(Clone)]
pub struct ScalarFieldD {
    domain: StarDomain,
    f: ScalarFn,
    grad: Option<FormFn>,
    support_margin: f64,
}

impl fmt::Debug for ScalarFieldD {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarFieldD")
            .field("support_margin", &self.support_margin)
            .field("analytic_gradient", &self.grad.is_some())
            .finish()
    }
}

impl ScalarFieldD {
    pub fn new(domain: &StarDomain, f: impl Fn(&Point2) -> C64 + Send + Sync + 'static) -> Self {
        Self {
            domain: domain.clone(),
            f: Arc::new(f),
            grad: None,
            support_margin: 0.0,
        }
    }

    pub fn real(domain: &StarDomain, f: impl Fn(&Point2) -> f64 + Send + Sync + 'static) -> Self {
        Self::new(domain, move |x| C64::new(f(x), 0.0))
    }

    pub fn zero(domain: &StarDomain) -> Self {
        Self::new(domain, |_| C64::new(0.0, 0.0)).with_gradient(|_| [C64::new(0.0, 0.0); 2])
    }

    /// Attaches a closed-form gradient `(∂₁f, ∂₂f)`.
    pub fn with_gradient(mut self, grad: impl Fn(&Point2) -> [C64; 2] + Send + Sync + 'static) -> Self {
        self.grad = Some(Arc::new(grad));
        self
    }

    /// Declares the support to stay at least `margin` away from `∂D`; evaluation
    /// outside `D` then returns zero.
    pub fn with_support_margin(mut self, margin: f64) -> Self {
        self.support_margin = margin.max(0.0);
        self
    }

    pub fn support_margin(&self) -> f64 {
        self.support_margin
    }

    pub fn domain(&self) -> &StarDomain {
        &self.domain
    }

    pub fn has_gradient(&self) -> bool {
        self.grad.is_some()
    }

    #[inline]
    pub fn eval(&self, x: &Point2) -> C64 {
        if self.support_margin > 0.0 && self.domain.defining_fn(x) > 0.0 {
            return C64::new(0.0, 0.0);
        }
        (self.f)(x)
    }

    /// Differential `(∂₁f, ∂₂f)`; falls back to fourth-order central differences.
    pub fn gradient(&self, x: &Point2) -> [C64; 2] {
        if let Some(g) = &self.grad {
            return g(x);
        }
        let h = FD_STEP;
        [0, 1].map(|k| {
            let mut e = Point2::zeros();
            e[k] = h;
            let f = &self.f;
            (f(&(x - 2.0 * e)) - 8.0 * f(&(x - e)) + 8.0 * f(&(x + e)) - f(&(x + 2.0 * e))) / (12.0 * h)
        })
    }

    /// Exact differential as a 1-form.
    pub fn differential(&self) -> OneFormD {
        let me = self.clone();
        OneFormD::new(&self.domain, move |x| me.gradient(x), Regularity::Smooth)
    }

    pub fn scaled(&self, c: C64) -> Self {
        let f = self.f.clone();
        let mut out = Self::new(&self.domain, move |x| c * f(x));
        out.support_margin = self.support_margin;
        if let Some(g) = self.grad.clone() {
            out.grad = Some(Arc::new(move |x| g(x).map(|v| c * v)));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Regularity {
    Linf,
    W1inf,
    Smooth,
}

#[derive(Clone)]
pub struct OneFormD {
    domain: StarDomain,
    a: FormFn,
    regularity: Regularity,
}

impl fmt::Debug for OneFormD {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OneFormD").field("regularity", &self.regularity).finish()
    }
}

impl OneFormD {
    pub fn new(
        domain: &StarDomain,
        a: impl Fn(&Point2) -> [C64; 2] + Send + Sync + 'static,
        regularity: Regularity,
    ) -> Self {
        Self {
            domain: domain.clone(),
            a: Arc::new(a),
            regularity,
        }
    }

    pub fn zero(domain: &StarDomain) -> Self {
        Self::new(domain, |_| [C64::new(0.0, 0.0); 2], Regularity::Smooth)
    }

    /// Co-closed form `⋆dψ` for a real stream function `ψ` with gradient `dψ`:
    /// `α♯ = |g|^{-1/2} (∂₂ψ, −∂₁ψ)`, lowered with `g₀`.
    pub fn co_exact(metric: &MetricField2D, dpsi: impl Fn(&Point2) -> [f64; 2] + Send + Sync + 'static) -> Self {
        let m = metric.clone();
        Self::new(
            metric.domain(),
            move |x| {
                let d = dpsi(x);
                let g = m.g(x);
                let sharp = Point2::new(d[1], -d[0]) / g.determinant().sqrt();
                let low = g * sharp;
                [C64::new(low.x, 0.0), C64::new(low.y, 0.0)]
            },
            Regularity::Smooth,
        )
    }

    pub fn regularity(&self) -> Regularity {
        self.regularity
    }

    pub fn domain(&self) -> &StarDomain {
        &self.domain
    }

    #[inline]
    pub fn eval(&self, x: &Point2) -> [C64; 2] {
        (self.a)(x)
    }

    /// Checks finiteness on interior samples and, for `W1inf` or smoother,
    /// that difference quotients stay bounded under step halving.
    pub fn check(&self) -> Result<()> {
        let pts = self.domain.interior_samples(200);
        for x in &pts {
            let v = self.eval(x);
            if !v.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::Precondition(format!("non-finite 1-form at ({}, {})", x.x, x.y)));
            }
        }
        if self.regularity >= Regularity::W1inf {
            let quot = |h: f64| {
                pts.iter()
                    .map(|x| {
                        let a = self.eval(&(x + Point2::new(h, 0.0)));
                        let b = self.eval(&(x - Point2::new(h, 0.0)));
                        ((a[0] - b[0]).norm() + (a[1] - b[1]).norm()) / (2.0 * h)
                    })
                    .fold(0.0, f64::max)
            };
            let (q1, q2) = (quot(1e-3), quot(5e-4));
            if !(q2 <= 2.0 * q1 + 1e-9) {
                return Err(Error::Precondition("1-form fails Lipschitz difference-quotient check".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct PairField {
    pub f: ScalarFieldD,
    pub alpha: OneFormD,
}

impl PairField {
    pub fn new(f: ScalarFieldD, alpha: OneFormD) -> Self {
        Self { f, alpha }
    }

    pub fn zero(domain: &StarDomain) -> Self {
        Self::new(ScalarFieldD::zero(domain), OneFormD::zero(domain))
    }

    pub fn function_only(f: ScalarFieldD) -> Self {
        let d = f.domain().clone();
        Self::new(f, OneFormD::zero(&d))
    }

    pub fn form_only(alpha: OneFormD) -> Self {
        let d = alpha.domain().clone();
        Self::new(ScalarFieldD::zero(&d), alpha)
    }

    /// `f(x) + α_k(x) v^k`.
    #[inline]
    pub fn integrand(&self, x: &Point2, v: &Point2) -> C64 {
        let a = self.alpha.eval(x);
        self.f.eval(x) + a[0] * v.x + a[1] * v.y
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: C64, other: &PairField, b: C64) -> PairField {
        let (f1, f2) = (self.f.clone(), other.f.clone());
        let (a1, a2) = (self.alpha.clone(), other.alpha.clone());
        let d = self.f.domain().clone();
        let reg = a1.regularity().min(a2.regularity());
        PairField::new(
            ScalarFieldD::new(&d, move |x| a * f1.eval(x) + b * f2.eval(x)),
            OneFormD::new(
                &d,
                move |x| {
                    let (u, w) = (a1.eval(x), a2.eval(x));
                    [a * u[0] + b * w[0], a * u[1] + b * w[1]]
                },
                reg,
            ),
        )
    }

    /// Writes samples at `points` as CSV, with comment header rows recording
    /// the metric name and sample count.
    pub fn write_csv<W: Write>(&self, mut out: W, metric_name: &str, points: &[Point2]) -> Result<()> {
        writeln!(out, "# metric={metric_name}")?;
        writeln!(out, "# points={}", points.len())?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x1", "x2", "f_re", "f_im", "a1_re", "a1_im", "a2_re", "a2_im"])?;
        for x in points {
            let f = self.f.eval(x);
            let a = self.alpha.eval(x);
            w.write_record(
                [x.x, x.y, f.re, f.im, a[0].re, a[0].im, a[1].re, a[1].im].map(|v| format!("{v:.17e}")),
            )?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fd_gradient_accuracy() {
        let d = StarDomain::unit_disk();
        let f = ScalarFieldD::real(&d, |x| (x.x * 2.0).sin() * x.y.exp());
        let x = Point2::new(0.2, -0.3);
        let g = f.gradient(&x);
        assert!((g[0].re - 2.0 * (0.4f64).cos() * (-0.3f64).exp()).abs() < 1e-10);
        assert!((g[1].re - (0.4f64).sin() * (-0.3f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn support_margin_zeroes_outside() {
        let d = StarDomain::unit_disk();
        let f = ScalarFieldD::real(&d, |_| 1.0).with_support_margin(0.1);
        assert_eq!(f.eval(&Point2::new(1.2, 0.0)), C64::new(0.0, 0.0));
        assert_eq!(f.eval(&Point2::new(0.2, 0.0)), C64::new(1.0, 0.0));
    }

    #[test]
    fn co_exact_is_divergence_free_flat() {
        let m = MetricField2D::euclidean(StarDomain::unit_disk());
        let a = OneFormD::co_exact(&m, |x| [2.0 * x.x, 2.0 * x.y]);
        let v = a.eval(&Point2::new(0.3, 0.5));
        assert!((v[0].re - 1.0).abs() < 1e-15 && (v[1].re + 0.6).abs() < 1e-15);
        a.check().unwrap();
    }
}
