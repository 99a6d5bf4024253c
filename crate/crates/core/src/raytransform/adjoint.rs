//! Adjoint `T*_λ`, the pairing check between the two sides of the duality, and
//! the normal operator `T*_λ T_λ`.

use super::fields::{PairField, C64};
use super::forward::{FanBeamData, RayBundle, RayQuadrature};
use crate::error::{Error, Result};
use crate::geometry::{shoot_geodesic, InfluxGrid, MetricField2D, Point2, UnitTangent};
use crate::quadrature::{pairwise_sum_c, GaussLegendre};
use nalgebra::{Matrix2, SymmetricEigen};
use rayon::prelude::*;
use std::f64::consts::PI;
use std::sync::Arc;

/// Volume quadrature on a star-shaped `D`: Gauss in the radial fraction,
/// trapezoid in angle, weights including `|g₀|^{1/2}`.
#[derive(Debug, Clone)]
pub struct DomainQuadrature {
    pub points: Vec<Point2>,
    pub weights: Vec<f64>,
    /// Radial fraction `ρ ∈ (0, 1)` of each point.
    pub fractions: Vec<f64>,
}

impl DomainQuadrature {
    pub fn new(metric: &MetricField2D, n_rho: usize, n_theta: usize) -> Self {
        let d = metric.domain();
        let gl = GaussLegendre::new(n_rho);
        let dth = 2.0 * PI / n_theta as f64;
        let mut points = Vec::with_capacity(n_rho * n_theta);
        let mut weights = Vec::with_capacity(n_rho * n_theta);
        let mut fractions = Vec::with_capacity(n_rho * n_theta);
        for k in 0..n_theta {
            let th = dth * k as f64;
            let r = d.radius_at(th)[0];
            for (rho, w) in gl.on_interval(0.0, 1.0) {
                let x = d.boundary_point(th) * rho;
                points.push(x);
                weights.push(w * dth * rho * r * r * metric.sqrt_det(&x));
                fractions.push(rho);
            }
        }
        Self { points, weights, fractions }
    }

    pub fn integrate(&self, f: impl Fn(usize, &Point2) -> C64) -> C64 {
        let terms: Vec<C64> = self
            .points
            .iter()
            .enumerate()
            .map(|(i, x)| f(i, x) * self.weights[i])
            .collect();
        pairwise_sum_c(&terms)
    }
}

/// Value of `T*_λ h` at a point: the scalar part and the vector part
/// `∫ v^k h_ψ e^{−λτ(x,−v)} dσ`, which pairs with 1-forms as `α_k w^k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdjointValue {
    pub scalar: C64,
    pub vector: [C64; 2],
}

fn inverse_sqrt(g: &Matrix2<f64>) -> Matrix2<f64> {
    let e = SymmetricEigen::new(*g);
    e.eigenvectors * Matrix2::from_diagonal(&e.eigenvalues.map(|l| 1.0 / l.sqrt())) * e.eigenvectors.transpose()
}

pub fn adjoint_tstar(metric: &MetricField2D, h: &FanBeamData, x: &Point2, sphere_nodes: usize) -> Result<AdjointValue> {
    if !metric.domain().contains(x, -1e-12) {
        return Err(Error::OutsideDomain { x: x.x, y: x.y });
    }
    let frame = inverse_sqrt(&metric.g(x));
    let dth = 2.0 * PI / sphere_nodes as f64;
    let mut scal = Vec::with_capacity(sphere_nodes);
    let mut v1 = Vec::with_capacity(sphere_nodes);
    let mut v2 = Vec::with_capacity(sphere_nodes);
    for k in 0..sphere_nodes {
        let th = dth * k as f64;
        let v = frame * Point2::new(th.cos(), th.sin());
        let back = shoot_geodesic(metric, &UnitTangent { x: *x, v: -v }, 1e-12)?;
        let (s, phi) = InfluxGrid::locate(metric, &back.exit_point, &(-back.exit_dir));
        let val = h.grid.interpolate(&h.values, s, phi)? * ((-h.lambda * back.tau).exp() * dth);
        scal.push(val);
        v1.push(val * v.x);
        v2.push(val * v.y);
    }
    Ok(AdjointValue {
        scalar: pairwise_sum_c(&scal),
        vector: [pairwise_sum_c(&v1), pairwise_sum_c(&v2)],
    })
}

/// Sphere nodes at radial fraction `rho`. Backward rays from a point at
/// distance `δ` from `∂D` leave through a window of directions of width
/// about `√δ`, so the count grows like `(1 − ρ)^{−½}` near the boundary.
pub fn sphere_nodes_at(base: usize, rho: f64) -> usize {
    let scale = (0.25 / (1.0 - rho).max(1e-12).sqrt()).clamp(1.0, 8.0);
    (base as f64 * scale).ceil() as usize
}

/// Resolution knobs for the duality check; [`Self::refined`] doubles all of them.
#[derive(Debug, Clone)]
pub struct SantaloResolution {
    pub n_s: usize,
    pub n_phi: usize,
    pub n_rho: usize,
    pub n_theta: usize,
    pub sphere_nodes: usize,
    pub quad: RayQuadrature,
}

impl Default for SantaloResolution {
    fn default() -> Self {
        Self {
            n_s: 128,
            n_phi: 64,
            n_rho: 16,
            n_theta: 32,
            sphere_nodes: 32,
            quad: RayQuadrature::with_step(0.25),
        }
    }
}

impl SantaloResolution {
    pub fn refined(&self) -> Self {
        Self {
            n_s: 2 * self.n_s,
            n_phi: 2 * self.n_phi,
            n_rho: 2 * self.n_rho,
            n_theta: 2 * self.n_theta,
            sphere_nodes: 2 * self.sphere_nodes,
            quad: self.quad.refined(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SantaloReport {
    pub lhs: C64,
    pub rhs: C64,
    pub defect: f64,
    /// Set when both sides vanish and `defect` is absolute.
    pub absolute: bool,
}

/// Compares `(T_λ pair, h)_{L²_μ}` with `(pair, T*_λ h)` for a test function `h(s, φ)`.
pub fn santalo_check(
    metric: &MetricField2D,
    lambda: f64,
    pair: &PairField,
    h: &(dyn Fn(f64, f64) -> C64 + Sync),
    res: &SantaloResolution,
) -> Result<SantaloReport> {
    let grid = Arc::new(InfluxGrid::new(metric, res.n_s, res.n_phi)?);
    let data = RayBundle::trace(metric, grid.clone(), 1e-12).transform(lambda, pair, &res.quad);
    if !data.all_valid() {
        return Err(Error::Geometry("ray tracing failed on the influx grid".into()));
    }
    let hdata = FanBeamData::from_fn(grid, lambda, h);
    let lhs = data.inner(&hdata);
    let dq = DomainQuadrature::new(metric, res.n_rho, res.n_theta);
    let adj: Vec<AdjointValue> = dq
        .points
        .par_iter()
        .zip(&dq.fractions)
        .map(|(x, &rho)| adjoint_tstar(metric, &hdata, x, sphere_nodes_at(res.sphere_nodes, rho)))
        .collect::<Result<_>>()?;
    let rhs = dq.integrate(|i, x| {
        let a = pair.alpha.eval(x);
        let t = &adj[i];
        pair.f.eval(x) * t.scalar.conj() + a[0] * t.vector[0].conj() + a[1] * t.vector[1].conj()
    });
    let scale = lhs.norm().max(rhs.norm());
    let absolute = scale < 1e-14;
    let defect = if absolute { (lhs - rhs).norm() } else { (lhs - rhs).norm() / scale };
    Ok(SantaloReport {
        lhs,
        rhs,
        defect,
        absolute,
    })
}

/// `T*_λ T_λ pair` sampled at target points.
#[derive(Debug, Clone)]
pub struct SampledPair {
    pub points: Vec<Point2>,
    pub scalar: Vec<C64>,
    pub vector: Vec<[C64; 2]>,
}

pub fn normal_operator(
    bundle: &RayBundle,
    metric: &MetricField2D,
    lambda: f64,
    pair: &PairField,
    quad: &RayQuadrature,
    targets: &[Point2],
    sphere_nodes: usize,
) -> Result<SampledPair> {
    let data = bundle.transform(lambda, pair, quad);
    let vals: Vec<AdjointValue> = targets
        .par_iter()
        .map(|x| adjoint_tstar(metric, &data, x, sphere_nodes))
        .collect::<Result<_>>()?;
    Ok(SampledPair {
        points: targets.to_vec(),
        scalar: vals.iter().map(|v| v.scalar).collect(),
        vector: vals.iter().map(|v| v.vector).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::StarDomain;

    fn flat() -> MetricField2D {
        MetricField2D::euclidean(StarDomain::unit_disk())
    }

    #[test]
    fn constant_h_gives_full_circle() {
        let m = flat();
        let grid = Arc::new(InfluxGrid::new(&m, 16, 8).unwrap());
        let h = FanBeamData::from_fn(grid, 0.0, |_, _| C64::new(1.0, 0.0));
        let a = adjoint_tstar(&m, &h, &Point2::new(0.2, -0.1), 32).unwrap();
        assert!((a.scalar - C64::new(2.0 * PI, 0.0)).norm() < 1e-12);
        assert!(a.vector[0].norm() < 1e-12 && a.vector[1].norm() < 1e-12);
    }

    #[test]
    fn first_moment_of_direction() {
        // h(x, v) = v¹ is constant along straight rays
        let m = flat();
        let grid = Arc::new(InfluxGrid::new(&m, 64, 32).unwrap());
        let mut h = FanBeamData::from_fn(grid.clone(), 0.0, |_, _| C64::new(0.0, 0.0));
        for (i, n) in grid.nodes().iter().enumerate() {
            h.values[i] = C64::new(n.v.x, 0.0);
        }
        let a = adjoint_tstar(&m, &h, &Point2::new(0.1, 0.3), 64).unwrap();
        assert!(a.scalar.norm() < 1e-4);
        assert!((a.vector[0].re - PI).abs() < 1e-4 && a.vector[1].norm() < 1e-4);
    }

    #[test]
    fn zero_pair_zero_defect() {
        let m = flat();
        let d = m.domain().clone();
        let res = SantaloResolution {
            n_s: 16,
            n_phi: 8,
            n_rho: 4,
            n_theta: 8,
            sphere_nodes: 8,
            quad: RayQuadrature::with_step(0.5),
        };
        let r = santalo_check(&m, 0.1, &PairField::zero(&d), &|_, _| C64::new(1.0, 0.0), &res).unwrap();
        assert!(r.absolute && r.defect == 0.0);
    }

    #[test]
    fn outside_point_rejected() {
        let m = flat();
        let grid = Arc::new(InfluxGrid::new(&m, 8, 4).unwrap());
        let h = FanBeamData::from_fn(grid, 0.0, |_, _| C64::new(1.0, 0.0));
        assert!(adjoint_tstar(&m, &h, &Point2::new(1.1, 0.0), 8).is_err());
    }
}
