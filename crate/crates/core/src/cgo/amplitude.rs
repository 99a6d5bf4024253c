//! Amplitudes `a = |g|^{-1/4} c^{1/2} a₀ b(θ)` and the transport operator.

use super::grid::{ChartGrid, GridFieldM};
use super::phase::Phase;
use crate::error::Result;
use crate::fd::Field;
use num_complex::Complex64;
use std::fmt;
use std::sync::Arc;

type A0Fn = Arc<dyn Fn(f64, f64, f64) -> Complex64 + Send + Sync>;
type BFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct Amplitude {
    a0: A0Fn,
    b: BFn,
}

impl fmt::Debug for Amplitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Amplitude")
    }
}

impl Amplitude {
    /// `a₀(x₁, r, θ)` arbitrary.
    pub fn new(
        a0: impl Fn(f64, f64, f64) -> Complex64 + Send + Sync + 'static,
        b: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            a0: Arc::new(a0),
            b: Arc::new(b),
        }
    }

    /// `a₀ = F(ρ)` for an entire `F`, so `∂̄a₀ = 0`.
    pub fn holomorphic(
        phase: &Phase,
        f: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static,
        b: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        let p = phase.clone();
        Self::new(move |x1, r, _| f(p.rho(x1, r)), b)
    }

    /// `a₀ = e^{iλρ}`.
    pub fn exponential(phase: &Phase, lambda: f64, b: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::holomorphic(phase, move |z| (Complex64::i() * lambda * z).exp(), b)
    }

    /// The bare amplitude `a₀(x₁, r, θ) b(θ)` without the integrating factor.
    pub fn bare(&self, x1: f64, r: f64, theta: f64) -> Complex64 {
        (self.a0)(x1, r, theta) * (self.b)(theta)
    }

    /// Assembled `a` on the grid.
    pub fn assemble(&self, grid: &Arc<ChartGrid>) -> GridFieldM {
        let g = grid.clone();
        GridFieldM::from_fn(grid.clone(), move |p, [x1, r, th]| {
            let factor = g.metric.sqrt_g[p].powf(-0.5) * g.conformal[p].sqrt();
            self.bare(x1, r, th) * factor
        })
    }
}

/// `∇ρ` (raised) and `Δ_g ρ` on the grid, both by finite differences.
#[derive(Debug, Clone)]
pub struct PhaseOnGrid {
    pub rho: Field,
    pub grad: Vec<Field>,
    pub laplacian: Field,
    /// `⟨dρ, dρ⟩_g` (complex bilinear).
    pub square: Field,
}

impl PhaseOnGrid {
    pub fn new(grid: &ChartGrid, phase: &Phase) -> Self {
        Self::from_values(grid, grid.sample(|_, [x1, r, _]| phase.rho(x1, r)))
    }

    /// Any weight sampled on the grid, real or complex.
    pub fn from_values(grid: &ChartGrid, rho: Field) -> Self {
        let d = grid.metric.gradient(&grid.grid, &rho);
        let grad = grid.metric.raise(&d);
        let laplacian = grid.metric.laplacian(&grid.grid, &rho);
        let square = grid.metric.bilinear(&d, &d);
        Self {
            rho,
            grad,
            laplacian,
            square,
        }
    }

    /// `L₁u = 2⟨∇ρ, ∇u⟩ + (Δ_gρ) u`.
    pub fn transport(&self, grid: &ChartGrid, u: &[Complex64]) -> Field {
        let du = grid.metric.apply_vector(&grid.grid, &self.grad, u);
        du.iter()
            .zip(&self.laplacian)
            .zip(u)
            .map(|((d, l), v)| d * 2.0 + l * v)
            .collect()
    }
}

/// Interior layers skipped by the norms.
pub const MARGIN: usize = 4;

/// `‖L₁^m a‖ / ‖a‖` over the interior of the grid.
pub fn transport_residual(amp: &Amplitude, phase: &Phase, grid: &Arc<ChartGrid>, m: usize) -> Result<f64> {
    grid.check_order(m)?;
    let a = amp.assemble(grid);
    let pg = PhaseOnGrid::new(grid, phase);
    let mut u = a.values.clone();
    for _ in 0..m {
        u = pg.transport(grid, &u);
    }
    let w = grid.weights(MARGIN);
    Ok(grid.metric.l2_norm(&u, &w) / grid.metric.l2_norm(&a.values, &w))
}
