//! Recovery of `X|_{x_n=0}` and `q|_{x_n=0}` from sampled symbols.

use super::metric::{coefficient_jets, BoundaryNormalMetric, PerturbationJet};
use super::symbols::{companion, composition_zero, left_a12, symbol_stack, SymbolStack};
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

type C = Complex64;

/// Smallest singular value, relative to the largest, accepted in the fit.
pub const CONDITIONING_FLOOR: f64 = 1e-10;

/// `n` directions in `ξ′`-space, each at scales `1` and `2`.
pub fn xi_design(n: usize) -> Vec<Vec<f64>> {
    let dirs: Vec<Vec<f64>> = if n == 2 {
        vec![vec![1.0], vec![-1.0]]
    } else {
        (0..n)
            .map(|k| {
                let psi = 0.3 + 2.0 * PI * k as f64 / n as f64;
                vec![psi.cos(), psi.sin()]
            })
            .collect()
    };
    [1.0, 2.0]
        .iter()
        .flat_map(|t| dirs.iter().map(move |d| d.iter().map(|v| v * t).collect()))
        .collect()
}

/// Boundary values extracted from symbols at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryValues {
    /// `X^1..X^n`.
    pub x: Vec<C>,
    pub q: C,
    /// RMS misfit of the `X` least-squares problem.
    pub fit_residual: f64,
    /// Spread of the per-sample `q` estimates.
    pub q_spread: f64,
}

/// Reads `−X^n√Q₂ + iX^αξ_α = −2√Q₂ b₀[m,1]` across the samples and fits
/// `X`, then takes `q` from the `(m, 1)` entry of the degree-zero relation.
///
/// Besides `b₀` and `b₋₁` the samples carry the `x`- and `ξ′`-derivatives of
/// `b₀`; the normal one is not determined by `b₀|_{x_n=0}` alone.
pub fn recover_xq_boundary(samples: &[SymbolStack], metric: &BoundaryNormalMetric, x: &[f64]) -> Result<BoundaryValues> {
    let n = metric.n();
    if samples.len() < n {
        return Err(Error::Precondition(format!("need at least {n} ξ′ samples, got {}", samples.len())));
    }
    let m = samples[0].b0.nrows();
    let mut rows = Vec::with_capacity(samples.len() * n);
    let mut rhs = Vec::with_capacity(samples.len());
    let mut pieces = Vec::with_capacity(samples.len());
    for s in samples {
        let co = coefficient_jets(metric, x, &s.xi)?;
        let s1 = -co.q2.sqrt();
        let root = -s1.v;
        rhs.push(-2.0 * root * s.b0[(m - 1, 0)]);
        rows.push(-root);
        for a in 0..n - 1 {
            rows.push(C::new(0.0, s.xi[a]));
        }
        pieces.push((s1, co.e.v));
    }
    // unknowns (X^n, X^1, .., X^{n−1})
    let a = DMatrix::from_row_slice(samples.len(), n, &rows);
    let b = DVector::from_vec(rhs);
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > CONDITIONING_FLOOR * smax) {
        return Err(Error::Conditioning { sigma_min: smin / smax });
    }
    let sol = svd
        .solve(&b, 0.0)
        .map_err(|e| Error::Solver {
            reason: e.to_string(),
            residual: f64::NAN,
        })?;
    let fit_residual = ((&a * &sol - &b).norm_squared() / samples.len() as f64).sqrt();
    let xn = sol[0];
    let mut xvec: Vec<C> = (1..n).map(|k| sol[k]).collect();
    xvec.push(xn);

    let normal = n - 1;
    let estimates: Vec<C> = samples
        .iter()
        .zip(&pieces)
        .map(|(s, (s1, e))| {
            let c0 = composition_zero(n, s1, &s.b0_dx, &s.b0_dxi);
            let a0_minus_q = companion(m, C::default());
            let total = &s.b1 * &s.bm1 + &s.bm1 * &s.b1 + &s.b0 * &s.b0 + c0 + &s.b0_dx[normal] - &s.b0 * *e
                - left_a12(xn, &s.b0)
                - a0_minus_q;
            total[(m - 1, 0)]
        })
        .collect();
    let q = estimates.iter().sum::<C>() / estimates.len() as f64;
    let q_spread = estimates.iter().map(|e| (e - q).norm()).fold(0.0, f64::max);
    Ok(BoundaryValues {
        x: xvec,
        q,
        fit_residual,
        q_spread,
    })
}

/// One row of a recovery report.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryRow {
    pub point: Vec<f64>,
    pub x_true: Vec<C>,
    pub q_true: C,
    pub recovered: BoundaryValues,
    /// Largest defining-relation residual over the samples.
    pub relation_residual: f64,
}

impl RecoveryRow {
    /// `max(|X − X_true|, |q − q_true|)`.
    pub fn error(&self) -> f64 {
        self.x_true
            .iter()
            .zip(&self.recovered.x)
            .map(|(a, b)| (a - b).norm())
            .fold((self.q_true - self.recovered.q).norm(), f64::max)
    }
}

/// Generates symbols from `jet` at boundary points `x′` (with `x_n = 0`) and
/// recovers `X`, `q` from them, in parallel over points.
pub fn recovery_round_trip(metric: &BoundaryNormalMetric, jet: &PerturbationJet, points: &[Vec<f64>]) -> Result<Vec<RecoveryRow>> {
    let n = metric.n();
    let design = xi_design(n);
    points
        .par_iter()
        .map(|p| {
            if p.len() != n - 1 {
                return Err(Error::Precondition(format!("boundary points need {} coordinates", n - 1)));
            }
            let mut x = p.clone();
            x.push(0.0);
            let samples = design.iter().map(|xi| symbol_stack(metric, jet, &x, xi)).collect::<Result<Vec<_>>>()?;
            let relation_residual = samples.iter().flat_map(|s| s.residuals).fold(0.0, f64::max);
            let recovered = recover_xq_boundary(&samples, metric, &x)?;
            let (x_true, q_true) = jet.values(&x);
            Ok(RecoveryRow {
                point: x,
                x_true,
                q_true,
                recovered,
                relation_residual,
            })
        })
        .collect()
}

/// Rows `x1..xn, X1_true_re, X1_true_im, .., X1_rec_re, .., q_true_re, ..,
/// fit_residual, q_spread, relation_residual`.
pub fn write_recovery_csv<W: std::io::Write>(rows: &[RecoveryRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let Some(first) = rows.first() else {
        w.flush()?;
        return Ok(());
    };
    let n = first.point.len();
    let mut header: Vec<String> = (1..=n).map(|k| format!("x{k}")).collect();
    for tag in ["true", "rec"] {
        for k in 1..=n {
            header.push(format!("X{k}_{tag}_re"));
            header.push(format!("X{k}_{tag}_im"));
        }
    }
    for h in ["q_true_re", "q_true_im", "q_rec_re", "q_rec_im", "fit_residual", "q_spread", "relation_residual"] {
        header.push(h.into());
    }
    w.write_record(&header)?;
    for r in rows {
        let mut rec: Vec<f64> = r.point.clone();
        for v in r.x_true.iter().chain(&r.recovered.x) {
            rec.push(v.re);
            rec.push(v.im);
        }
        rec.extend([
            r.q_true.re,
            r.q_true.im,
            r.recovered.q.re,
            r.recovered.q.im,
            r.recovered.fit_residual,
            r.recovered.q_spread,
            r.relation_residual,
        ]);
        w.write_record(rec.iter().map(|v| format!("{v:.17e}")))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::jet::Jet;

    #[test]
    fn flat_constant_round_trip() {
        let f = BoundaryNormalMetric::flat(3).unwrap();
        let jet = PerturbationJet::constant(2, vec![1.0, 2.0, 3.0], 5.0).unwrap();
        let rows = recovery_round_trip(&f, &jet, &[vec![0.1, -0.3]]).unwrap();
        assert!(rows[0].error() < 1e-10, "{:?}", rows[0]);
    }

    #[test]
    fn zero_field_on_curved_metric() {
        let g = BoundaryNormalMetric::polynomial(2, [0.4, 0.1, -0.2, 0.3, 0.1]).unwrap();
        let jet = PerturbationJet::zero(3, 2).unwrap();
        let rows = recovery_round_trip(&g, &jet, &[vec![0.25]]).unwrap();
        assert!(rows[0].recovered.x.iter().all(|v| v.norm() < 1e-13));
    }

    #[test]
    fn collinear_design_is_rejected() {
        let f = BoundaryNormalMetric::flat(3).unwrap();
        let jet = PerturbationJet::constant(2, vec![1.0, 2.0, 3.0], 5.0).unwrap();
        let x = [0.0, 0.0, 0.0];
        let samples: Vec<_> = [[1.0, 0.0], [2.0, 0.0], [3.0, 0.0]]
            .iter()
            .map(|xi| symbol_stack(&f, &jet, &x, xi).unwrap())
            .collect();
        assert!(matches!(recover_xq_boundary(&samples, &f, &x), Err(Error::Conditioning { .. })));
    }

    #[test]
    fn csv_has_one_row_per_point() {
        let f = BoundaryNormalMetric::flat(2).unwrap();
        let jet = PerturbationJet::new(2, |x| vec![x[0] + 1.0, Jet::real(0.5)], |_| Jet::real(1.0)).unwrap();
        let rows = recovery_round_trip(&f, &jet, &[vec![0.0], vec![0.5]]).unwrap();
        let mut buf = Vec::new();
        write_recovery_csv(&rows, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 3);
    }
}
