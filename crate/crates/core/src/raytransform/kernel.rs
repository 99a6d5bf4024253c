//! Kernel pairs `[−λp, dp]` and empirical conditioning of `T_λ` on a basis.

use super::fields::{OneFormD, PairField, Regularity, ScalarFieldD, C64};
use super::forward::{RayBundle, RayQuadrature};
use crate::error::{Error, Result};
use crate::geometry::MetricField2D;
use nalgebra::DMatrix;
use std::f64::consts::PI;

/// `[−λp, dp]` for a potential vanishing on `∂D`.
pub fn kernel_pair(lambda: f64, p: &ScalarFieldD) -> Result<PairField> {
    let d = p.domain();
    let scale = d
        .interior_samples(100)
        .iter()
        .map(|x| p.eval(x).norm())
        .fold(0.0, f64::max)
        .max(1e-300);
    for k in 0..256 {
        let s = 2.0 * PI * k as f64 / 256.0;
        let v = p.eval(&d.boundary_point(s)).norm();
        if v > 1e-10 * scale {
            return Err(Error::Precondition(format!(
                "potential does not vanish on the boundary: |p| = {v:e} at s = {s:.4}"
            )));
        }
    }
    let pf = p.clone();
    let f = ScalarFieldD::new(d, move |x| pf.eval(x) * (-lambda));
    let pd = p.clone();
    let alpha = OneFormD::new(d, move |x| pd.gradient(x), Regularity::Smooth);
    Ok(PairField::new(f, alpha))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditioningReport {
    pub lambda: f64,
    /// Singular values of `T_λ` restricted to the basis, in decreasing order.
    pub singular_values: Vec<f64>,
}

impl ConditioningReport {
    pub fn smallest(&self) -> f64 {
        *self.singular_values.last().unwrap_or(&0.0)
    }

    pub fn condition_number(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0) / self.smallest()
    }
}

/// Singular values of the matrix `[√(wμ)·T_λ b_k]` over basis pairs `b_k`.
pub fn conditioning_study(
    bundle: &RayBundle,
    lambda: f64,
    basis: &[PairField],
    quad: &RayQuadrature,
) -> Result<ConditioningReport> {
    if bundle.invalid_count() > 0 {
        return Err(Error::Geometry(format!("{} rays failed", bundle.invalid_count())));
    }
    let nodes = bundle.grid.nodes();
    let mut a = DMatrix::<C64>::zeros(nodes.len(), basis.len());
    for (k, b) in basis.iter().enumerate() {
        let data = bundle.transform(lambda, b, quad);
        for (i, (n, v)) in nodes.iter().zip(&data.values).enumerate() {
            a[(i, k)] = v * (n.weight * n.mu).sqrt();
        }
    }
    let mut singular_values: Vec<f64> = a.singular_values().iter().copied().collect();
    singular_values.sort_by(|x, y| y.total_cmp(x));
    Ok(ConditioningReport {
        lambda,
        singular_values,
    })
}

/// Default basis: Gaussian bumps for the function part and co-closed forms
/// `⋆dψ` for the 1-form part, alternating.
pub fn default_basis(metric: &MetricField2D, size: usize) -> Vec<PairField> {
    let d = metric.domain().clone();
    (0..size)
        .map(|k| {
            let ang = 2.399_963 * k as f64;
            let rad = 0.5 * ((k / 2) as f64 / (size as f64 / 2.0).max(1.0)).sqrt();
            let (cx, cy) = (rad * ang.cos(), rad * ang.sin());
            if k % 2 == 0 {
                PairField::function_only(ScalarFieldD::real(&d, move |x| {
                    (-((x.x - cx).powi(2) + (x.y - cy).powi(2)) / 0.08).exp()
                }))
            } else {
                PairField::form_only(OneFormD::co_exact(metric, move |x| {
                    let e = (-((x.x - cx).powi(2) + (x.y - cy).powi(2)) / 0.08).exp();
                    [-2.0 * (x.x - cx) / 0.08 * e, -2.0 * (x.y - cy) / 0.08 * e]
                }))
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{InfluxGrid, Point2, StarDomain};
    use std::sync::Arc;

    #[test]
    fn boundary_violation_rejected() {
        let d = StarDomain::unit_disk();
        let p = ScalarFieldD::real(&d, |x: &Point2| x.x);
        assert!(matches!(kernel_pair(0.1, &p), Err(Error::Precondition(_))));
    }

    #[test]
    fn zero_lambda_pure_potential() {
        let d = StarDomain::unit_disk();
        let p = ScalarFieldD::real(&d, |x: &Point2| 1.0 - x.norm_squared());
        let k = kernel_pair(0.0, &p).unwrap();
        let x = Point2::new(0.3, 0.1);
        assert_eq!(k.f.eval(&x).norm(), 0.0);
        assert!((k.alpha.eval(&x)[0].re + 0.6).abs() < 1e-10);
    }

    #[test]
    fn kernel_direction_collapses_spectrum() {
        let m = MetricField2D::euclidean(StarDomain::unit_disk());
        let grid = Arc::new(InfluxGrid::new(&m, 32, 16).unwrap());
        let bundle = RayBundle::trace(&m, grid, 1e-12);
        let q = RayQuadrature::with_step(0.1);
        let lambda = 0.2;
        let mut basis = default_basis(&m, 4);
        let p = ScalarFieldD::real(m.domain(), |x: &Point2| (1.0 - x.norm_squared()) * (1.0 + x.y));
        basis.push(kernel_pair(lambda, &p).unwrap());
        let r = conditioning_study(&bundle, lambda, &basis, &q).unwrap();
        assert!(r.smallest() < 1e-8 * r.singular_values[0], "{:?}", r.singular_values);
        let clean = conditioning_study(&bundle, lambda, &default_basis(&m, 4), &q).unwrap();
        assert!(clean.smallest() > 1e-3 * clean.singular_values[0]);
    }
}
