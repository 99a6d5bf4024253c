//! Forward attenuated transform `T_λ[f, α](x, v) = ∫₀^τ (f(γ) + α_k γ̇^k) e^{−λt} dt`.

use super::fields::{PairField, C64};
use crate::error::Result;
use crate::geometry::{shoot_geodesic, GeodesicPath, InfluxGrid, MetricField2D, UnitTangent};
use crate::quadrature::{pairwise_sum_c, CompositeGauss, GaussLegendre};
use rayon::prelude::*;
use std::io::Write;
use std::sync::Arc;

/// Quadrature along each ray.
#[derive(Debug, Clone)]
pub enum RayQuadrature {
    /// Composite Gauss rule with panels of at most the given length.
    Composite(CompositeGauss),
    /// A single Gauss rule stretched over `[0, τ]`.
    PerRay(GaussLegendre),
}

impl RayQuadrature {
    /// Four-point Gauss panels of length `step`.
    pub fn with_step(step: f64) -> Self {
        Self::Composite(CompositeGauss::new(4, step))
    }

    pub fn per_ray(points: usize) -> Self {
        Self::PerRay(GaussLegendre::new(points))
    }

    pub fn nodes(&self, tau: f64) -> Vec<(f64, f64)> {
        match self {
            Self::Composite(c) => c.nodes(0.0, tau),
            Self::PerRay(g) => g.on_interval(0.0, tau).collect(),
        }
    }

    /// Same rule with twice the resolution.
    pub fn refined(&self) -> Self {
        match self {
            Self::Composite(c) => Self::Composite(CompositeGauss::new(c.points_per_panel(), 0.5 * c.panel_len())),
            Self::PerRay(g) => Self::PerRay(GaussLegendre::new(2 * g.len())),
        }
    }
}

/// Geodesics traced from every influx node; reusable across fields and `λ`.
#[derive(Debug, Clone)]
pub struct RayBundle {
    pub grid: Arc<InfluxGrid>,
    pub paths: Vec<std::result::Result<GeodesicPath, String>>,
}

impl RayBundle {
    pub fn trace(metric: &MetricField2D, grid: Arc<InfluxGrid>, tol: f64) -> Self {
        let paths = grid
            .nodes()
            .par_iter()
            .map(|n| {
                UnitTangent::new(metric, n.x, n.v)
                    .and_then(|s| shoot_geodesic(metric, &s, tol))
                    .map_err(|e| e.to_string())
            })
            .collect();
        Self { grid, paths }
    }

    pub fn invalid_count(&self) -> usize {
        self.paths.iter().filter(|p| p.is_err()).count()
    }

    pub fn transform(&self, lambda: f64, pair: &PairField, quad: &RayQuadrature) -> FanBeamData {
        let (values, valid): (Vec<C64>, Vec<bool>) = self
            .paths
            .par_iter()
            .map(|p| match p {
                Ok(path) => (integrate_ray(lambda, pair, path, quad), true),
                Err(_) => (C64::new(0.0, 0.0), false),
            })
            .unzip();
        FanBeamData {
            grid: self.grid.clone(),
            values,
            valid,
            lambda,
        }
    }
}

fn integrate_ray(lambda: f64, pair: &PairField, path: &GeodesicPath, quad: &RayQuadrature) -> C64 {
    let terms: Vec<C64> = quad
        .nodes(path.tau)
        .into_iter()
        .map(|(t, w)| {
            let (x, v) = path.state_at(t);
            pair.integrand(&x, &v) * (w * (-lambda * t).exp())
        })
        .collect();
    pairwise_sum_c(&terms)
}

/// Transform values on an influx grid.
#[derive(Debug, Clone)]
pub struct FanBeamData {
    pub grid: Arc<InfluxGrid>,
    pub values: Vec<C64>,
    pub valid: Vec<bool>,
    /// Attenuation constant: integrand weighted by `e^{−λt}`.
    pub lambda: f64,
}

impl FanBeamData {
    /// Samples a function of `(s, φ)` on the grid nodes.
    pub fn from_fn(grid: Arc<InfluxGrid>, lambda: f64, h: impl Fn(f64, f64) -> C64) -> Self {
        let values: Vec<C64> = grid.nodes().iter().map(|n| h(n.s, n.phi)).collect();
        let valid = vec![true; values.len()];
        Self {
            grid,
            values,
            valid,
            lambda,
        }
    }

    /// `(self, other)_{L²_μ} = Σ w μ · self · conj(other)`.
    pub fn inner(&self, other: &FanBeamData) -> C64 {
        let terms: Vec<C64> = self
            .grid
            .nodes()
            .iter()
            .zip(self.values.iter().zip(&other.values))
            .map(|(n, (a, b))| a * b.conj() * (n.weight * n.mu))
            .collect();
        pairwise_sum_c(&terms)
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).re.max(0.0).sqrt()
    }

    pub fn all_valid(&self) -> bool {
        self.valid.iter().all(|&v| v)
    }

    /// Writes `s,phi,re,im,valid` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["s", "phi", "re", "im", "valid"])?;
        for (n, (v, ok)) in self.grid.nodes().iter().zip(self.values.iter().zip(&self.valid)) {
            w.write_record(&[
                format!("{:.17e}", n.s),
                format!("{:.17e}", n.phi),
                format!("{:.17e}", v.re),
                format!("{:.17e}", v.im),
                (*ok as u8).to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Traces every ray and integrates the pair along it. Rays whose geodesic
/// fails are marked invalid.
pub fn forward_t(
    metric: &MetricField2D,
    lambda: f64,
    pair: &PairField,
    grid: Arc<InfluxGrid>,
    quad: &RayQuadrature,
) -> FanBeamData {
    RayBundle::trace(metric, grid, 1e-12).transform(lambda, pair, quad)
}
