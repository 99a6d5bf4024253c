//! Semiclassical conjugation `e^{ρ/h} h^{2m} 𝓛(e^{−ρ/h} ·)` expanded in powers
//! of `h`, and the L² Carleman ratio for the weight `φ = x₁`.

use super::amplitude::{Amplitude, PhaseOnGrid, MARGIN};
use super::grid::ChartGrid;
use super::phase::Phase;
use crate::error::{Error, Result};
use crate::fd::Field;
use crate::quadrature::linear_fit;
use num_complex::Complex64;
use std::io::Write;
use std::sync::Arc;

/// Lower-order terms `X` (chart components) and `q` sampled on a grid.
#[derive(Debug, Clone)]
pub struct LowerOrder {
    pub x: Vec<Field>,
    pub q: Field,
}

impl LowerOrder {
    pub fn zero(grid: &ChartGrid) -> Self {
        Self {
            x: vec![vec![Complex64::default(); grid.len()]; 3],
            q: vec![Complex64::default(); grid.len()],
        }
    }

    pub fn from_fn(
        grid: &ChartGrid,
        x: impl Fn([f64; 3]) -> [Complex64; 3],
        q: impl Fn([f64; 3]) -> Complex64,
    ) -> Self {
        let xs: Vec<[Complex64; 3]> = (0..grid.len()).map(|p| x(grid.coords(p))).collect();
        Self {
            x: (0..3).map(|k| xs.iter().map(|v| v[k]).collect()).collect(),
            q: grid.sample(|_, c| q(c)),
        }
    }
}

/// The three pieces of `e^{ρ/h}(−h²Δ_g)e^{−ρ/h} = A + hB + h²C`:
/// `A = −⟨dρ,dρ⟩_g`, `B = 2∇ρ·∇ + Δ_gρ`, `C = −Δ_g`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Piece {
    A,
    B,
    C,
}

impl Piece {
    fn degree(self) -> usize {
        match self {
            Piece::A => 0,
            Piece::B => 1,
            Piece::C => 2,
        }
    }

    fn apply(self, grid: &ChartGrid, ph: &PhaseOnGrid, u: &[Complex64]) -> Field {
        match self {
            Piece::A => u.iter().zip(&ph.square).map(|(v, s)| -v * s).collect(),
            Piece::B => ph.transport(grid, u),
            Piece::C => grid.metric.laplacian(&grid.grid, u).into_iter().map(|v| -v).collect(),
        }
    }
}

/// Coefficients `V_k` with `e^{ρ/h}h^{2m}(−Δ_g)^m e^{−ρ/h}u = Σ_k h^k V_k`,
/// summed over all `3^m` words in `A, B, C`.
fn polyharmonic_coefficients(grid: &ChartGrid, ph: &PhaseOnGrid, u: &[Complex64], m: usize) -> Vec<Field> {
    fn walk(grid: &ChartGrid, ph: &PhaseOnGrid, u: Field, depth: usize, deg: usize, acc: &mut [Field]) {
        if depth == 0 {
            for (a, v) in acc[deg].iter_mut().zip(&u) {
                *a += v;
            }
            return;
        }
        for piece in [Piece::A, Piece::B, Piece::C] {
            let next = piece.apply(grid, ph, &u);
            walk(grid, ph, next, depth - 1, deg + piece.degree(), acc);
        }
    }
    let mut acc = vec![vec![Complex64::default(); u.len()]; 2 * m + 1];
    walk(grid, ph, u.to_vec(), m, 0, &mut acc);
    acc
}

/// Log-log fit of `‖v_h‖` against `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingReport {
    pub h: Vec<f64>,
    pub norms: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub rms: f64,
    /// Set when the fit residual exceeds [`NOISY_FIT_RMS`].
    pub noisy: bool,
    /// `‖V_k‖` for `k = 0, …, 2m`.
    pub coefficient_norms: Vec<f64>,
}

pub const NOISY_FIT_RMS: f64 = 0.25;

impl ScalingReport {
    fn fit(h: &[f64], norms: Vec<f64>, coefficient_norms: Vec<f64>) -> Self {
        let lx: Vec<f64> = h.iter().map(|v| v.ln()).collect();
        let ly: Vec<f64> = norms.iter().map(|v| v.max(1e-300).ln()).collect();
        let (slope, intercept, rms) = linear_fit(&lx, &ly);
        Self {
            h: h.to_vec(),
            norms,
            slope,
            intercept,
            rms,
            noisy: rms > NOISY_FIT_RMS,
            coefficient_norms,
        }
    }

    /// Rows `h,residual_norm`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["h", "residual_norm"])?;
        for (h, n) in self.h.iter().zip(&self.norms) {
            w.write_record(&[format!("{h:.17e}"), format!("{n:.17e}")])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn summary(&self) -> String {
        format!(
            "slope={:.4} rms={:.3e}{}",
            self.slope,
            self.rms,
            if self.noisy { " (noisy fit)" } else { "" }
        )
    }
}

fn check_h_list(h_list: &[f64]) -> Result<()> {
    if h_list.len() < 2 || h_list.iter().any(|h| !(*h > 0.0)) {
        return Err(Error::Precondition("need at least two positive semiclassical parameters".into()));
    }
    let (lo, hi) = h_list.iter().fold((f64::MAX, 0.0f64), |(a, b), &h| (a.min(h), b.max(h)));
    if hi / lo < 10.0 * (1.0 - 1e-12) {
        return Err(Error::Precondition(format!("h range [{lo}, {hi}] spans less than a decade")));
    }
    Ok(())
}

/// `n` log-spaced values from `hi` down to `lo`.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| (hi.ln() + (lo.ln() - hi.ln()) * k as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Fits the decay of `v_h = e^{ρ/h} h^{2m}((−Δ_g)^m + X + q)(e^{−ρ/h}a)`.
pub fn conjugated_residual_scaling(
    amp: &Amplitude,
    phase: &Phase,
    grid: &Arc<ChartGrid>,
    lower: &LowerOrder,
    m: usize,
    h_list: &[f64],
) -> Result<ScalingReport> {
    check_h_list(h_list)?;
    grid.check_order(2 * m)?;
    let a = amp.assemble(grid).values;
    let ph = PhaseOnGrid::new(grid, phase);
    let mut coeffs = polyharmonic_coefficients(grid, &ph, &a, m);
    // h^{2m}(X + q)a − h^{2m−1} X(ρ) a
    let xa = grid.metric.apply_vector(&grid.grid, &lower.x, &a);
    let xrho = grid.metric.apply_vector(&grid.grid, &lower.x, &ph.rho);
    for p in 0..a.len() {
        coeffs[2 * m][p] += xa[p] + lower.q[p] * a[p];
        coeffs[2 * m - 1][p] -= xrho[p] * a[p];
    }
    let w = grid.weights(MARGIN);
    let coefficient_norms = coeffs.iter().map(|c| grid.metric.l2_norm(c, &w)).collect();
    let norms = h_list
        .iter()
        .map(|&h| {
            let v: Field = (0..a.len())
                .map(|p| {
                    // Horner in h
                    coeffs.iter().rev().fold(Complex64::default(), |acc, c| acc * h + c[p])
                })
                .collect();
            grid.metric.l2_norm(&v, &w)
        })
        .collect();
    Ok(ScalingReport::fit(h_list, norms, coefficient_norms))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CarlemanReport {
    pub h: Vec<f64>,
    /// `‖P_φ^m u‖ / (h^m ‖u‖)` per `h`.
    pub ratios: Vec<f64>,
    pub min: f64,
}

/// Carleman ratio for `P_φ = e^{φ/h}(−h²Δ_g)e^{−φ/h}` with `φ = x₁`,
/// iterated `m` times (`m = 1` is the plain estimate).
pub fn carleman_ratio(
    u: impl Fn([f64; 3]) -> Complex64,
    grid: &Arc<ChartGrid>,
    h_list: &[f64],
    m: usize,
) -> Result<CarlemanReport> {
    if h_list.is_empty() || h_list.iter().any(|h| !(*h > 0.0)) {
        return Err(Error::Precondition("need positive semiclassical parameters".into()));
    }
    grid.check_order(2 * m)?;
    let vals = grid.sample(|_, c| u(c));
    let peak = vals.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return Err(Error::Precondition("test function vanishes identically".into()));
    }
    let inner = grid.weights(MARGIN);
    let edge = (0..vals.len())
        .filter(|&p| inner[p] == 0.0)
        .map(|p| vals[p].norm())
        .fold(0.0, f64::max);
    if edge > 1e-12 * peak {
        return Err(Error::Support(format!(
            "test function reaches the edge of M (|u| = {edge:e} within {MARGIN} layers)"
        )));
    }
    let ph = PhaseOnGrid::from_values(grid, grid.sample(|_, [x1, _, _]| Complex64::new(x1, 0.0)));
    let coeffs = polyharmonic_coefficients(grid, &ph, &vals, m);
    let w = grid.weights(0);
    let base = grid.metric.l2_norm(&vals, &w);
    let ratios: Vec<f64> = h_list
        .iter()
        .map(|&h| {
            let v: Field = (0..vals.len())
                .map(|p| coeffs.iter().rev().fold(Complex64::default(), |acc, c| acc * h + c[p]))
                .collect();
            grid.metric.l2_norm(&v, &w) / (h.powi(m as i32) * base)
        })
        .collect();
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(CarlemanReport {
        h: h_list.to_vec(),
        ratios,
        min,
    })
}
