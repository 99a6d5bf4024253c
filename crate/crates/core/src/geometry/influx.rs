//! Quadrature on the influx boundary `∂₊SD` in fan-beam coordinates `(s, φ)`.

use super::domain::StarDomain;
use super::metric::{MetricField2D, Point2};
use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;
use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfluxNode {
    /// Boundary parameter (polar angle of the boundary point).
    pub s: f64,
    /// Incidence angle measured from the inward normal, in `(−π/2, π/2)`.
    pub phi: f64,
    pub x: Point2,
    pub v: Point2,
    /// `dΣ` weight: boundary arclength times fiber angle.
    pub weight: f64,
    /// `|⟨v, ν⟩_{g₀}| = cos φ`.
    pub mu: f64,
}

/// Boundary frame at parameter `s`: point, outward unit normal, unit tangent
/// (counterclockwise), all with respect to `g₀`.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryFrame {
    pub x: Point2,
    pub outward: Point2,
    pub tangent: Point2,
}

pub fn boundary_frame(metric: &MetricField2D, s: f64) -> BoundaryFrame {
    let x = metric.domain().boundary_point(s);
    let dfn = metric.domain().defining_grad(&x);
    let gi = super::metric::inv2(&metric.g(&x));
    let nu = gi * dfn;
    let outward = nu / dfn.dot(&nu).sqrt();
    let tangent = metric.rotate_unit(&x, &outward);
    BoundaryFrame { x, outward, tangent }
}

/// Tensor grid: periodic trapezoid in `s`, Gauss–Legendre in `φ`.
#[derive(Debug, Clone)]
pub struct InfluxGrid {
    nodes: Vec<InfluxNode>,
    s_nodes: Vec<f64>,
    phi_nodes: Vec<f64>,
}

impl InfluxGrid {
    pub fn new(metric: &MetricField2D, n_s: usize, n_phi: usize) -> Result<Self> {
        if n_s < 4 || n_phi < 4 {
            return Err(Error::Resolution(format!("influx grid {n_s}×{n_phi} below 4×4")));
        }
        let ds = 2.0 * PI / n_s as f64;
        let gl = GaussLegendre::new(n_phi);
        let phi: Vec<(f64, f64)> = gl.on_interval(-FRAC_PI_2, FRAC_PI_2).collect();
        let mut nodes = Vec::with_capacity(n_s * n_phi);
        let mut s_nodes = Vec::with_capacity(n_s);
        for i in 0..n_s {
            let s = ds * i as f64;
            s_nodes.push(s);
            let fr = boundary_frame(metric, s);
            let vel = metric.domain().boundary_velocity(s);
            let arc = metric.norm2(&fr.x, &vel).sqrt();
            for &(p, wp) in &phi {
                let v = -p.cos() * fr.outward + p.sin() * fr.tangent;
                nodes.push(InfluxNode {
                    s,
                    phi: p,
                    x: fr.x,
                    v,
                    weight: ds * arc * wp,
                    mu: p.cos(),
                });
            }
        }
        Ok(Self {
            nodes,
            s_nodes,
            phi_nodes: phi.iter().map(|p| p.0).collect(),
        })
    }

    pub fn nodes(&self) -> &[InfluxNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn n_s(&self) -> usize {
        self.s_nodes.len()
    }

    pub fn n_phi(&self) -> usize {
        self.phi_nodes.len()
    }

    /// `Σ w·μ`, the discrete μ-volume of `∂₊SD`.
    pub fn mu_volume(&self) -> f64 {
        let v: Vec<f64> = self.nodes.iter().map(|n| n.weight * n.mu).collect();
        crate::quadrature::pairwise_sum(&v)
    }

    /// Fan-beam coordinates of an inward boundary vector.
    pub fn locate(metric: &MetricField2D, x: &Point2, v: &Point2) -> (f64, f64) {
        let s = StarDomain::angle_of(x);
        let fr = boundary_frame(metric, s);
        let a = -metric.inner(&fr.x, v, &fr.outward);
        let b = metric.inner(&fr.x, v, &fr.tangent);
        (s, b.atan2(a))
    }

    /// Six-point Lagrange interpolation of nodal values (fewer on tiny
    /// grids): periodic in `s`, on the Gauss nodes in `φ`.
    pub fn interpolate(&self, values: &[Complex64], s: f64, phi: f64) -> Result<Complex64> {
        if phi.abs() > FRAC_PI_2 + 1e-9 {
            return Err(Error::Coverage(format!("incidence angle {phi} outside (−π/2, π/2)")));
        }
        let ns = self.n_s();
        let np = self.n_phi();
        let ks = STENCIL.min(ns);
        let kp = STENCIL.min(np);
        let ds = 2.0 * PI / ns as f64;
        let u = s.rem_euclid(2.0 * PI) / ds;
        let i0 = u.floor() as isize;
        let lead = (ks as isize - 1) / 2;
        let s_off: Vec<f64> = (0..ks).map(|a| (a as isize - lead) as f64).collect();
        let ws = lagrange(&s_off, u - i0 as f64);
        let j = self.phi_nodes.partition_point(|&p| p <= phi) as isize - kp as isize / 2;
        let j0 = j.clamp(0, (np - kp) as isize) as usize;
        let wp = lagrange(&self.phi_nodes[j0..j0 + kp], phi);
        let mut acc = Complex64::new(0.0, 0.0);
        for (a, wa) in ws.iter().enumerate() {
            let i = (i0 - lead + a as isize).rem_euclid(ns as isize) as usize;
            for (b, wb) in wp.iter().enumerate() {
                acc += values[i * np + j0 + b] * (wa * wb);
            }
        }
        Ok(acc)
    }
}

const STENCIL: usize = 6;

fn lagrange(nodes: &[f64], x: f64) -> Vec<f64> {
    (0..nodes.len())
        .map(|i| {
            (0..nodes.len())
                .filter(|&k| k != i)
                .map(|k| (x - nodes[k]) / (nodes[i] - nodes[k]))
                .product()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mu_volume_unit_disk() {
        let m = MetricField2D::euclidean(StarDomain::unit_disk());
        let g = InfluxGrid::new(&m, 32, 16).unwrap();
        assert!((g.mu_volume() - 4.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn nodes_point_inward() {
        let m = MetricField2D::euclidean(StarDomain::star(|s| {
            [1.0 + 0.1 * (2.0 * s).cos(), -0.2 * (2.0 * s).sin(), -0.4 * (2.0 * s).cos()]
        }));
        let g = InfluxGrid::new(&m, 16, 8).unwrap();
        for n in g.nodes() {
            let fr = boundary_frame(&m, n.s);
            assert!(m.inner(&n.x, &n.v, &fr.outward) <= 0.0);
            assert!((m.norm2(&n.x, &n.v) - 1.0).abs() < 1e-12);
            let (s, phi) = InfluxGrid::locate(&m, &n.x, &n.v);
            assert!((s - n.s).abs() < 1e-12 && (phi - n.phi).abs() < 1e-12);
        }
    }

    #[test]
    fn interpolation_reproduces_smooth_function() {
        let m = MetricField2D::euclidean(StarDomain::unit_disk());
        let f = |s: f64, p: f64| Complex64::new(s.sin() * p.cos(), (2.0 * s).cos() * p);
        let err = |n: usize| {
            let g = InfluxGrid::new(&m, 4 * n, n).unwrap();
            let vals: Vec<_> = g.nodes().iter().map(|q| f(q.s, q.phi)).collect();
            (0..50)
                .map(|k| {
                    let s = 0.123 * k as f64;
                    let p = -1.2 + 0.048 * k as f64;
                    (g.interpolate(&vals, s, p).unwrap() - f(s, p)).norm()
                })
                .fold(0.0, f64::max)
        };
        let (a, b) = (err(16), err(32));
        assert!(b < 1e-6 && a / b > 32.0, "{a} {b}");
    }
}
