//! Checks that gradient perturbations are invisible to the ray integrals,
//! closedness of `X♭`, and integration of closed forms to potentials.

use super::field::{Potential, SupportBox, VectorFieldM};
use super::fourier::{partial_fourier, q_slice, FourierQuadrature};
use crate::error::{Error, Result};
use crate::geometry::{ConformalProduct, InfluxGrid, MetricField2D, Point2};
use crate::quadrature::CompositeGauss;
use crate::raytransform::{OneFormD, PairField, RayBundle, RayQuadrature, Regularity, ScalarFieldD};
use nalgebra::Vector3;
use num_complex::Complex64;
use rayon::prelude::*;
use std::sync::Arc;

type C = Complex64;
const I: C = C { re: 0.0, im: 1.0 };

/// Resolution of the ray-integral checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaugeResolution {
    pub n_s: usize,
    pub n_phi: usize,
    /// Panel length of the 4-point Gauss rule along rays.
    pub ray_step: f64,
    pub fourier: FourierQuadrature,
}

impl Default for GaugeResolution {
    fn default() -> Self {
        Self {
            n_s: 32,
            n_phi: 16,
            ray_step: 0.05,
            fourier: FourierQuadrature::default(),
        }
    }
}

/// Eleven equispaced values in `[−0.5, 0.5]`.
pub fn default_lambdas() -> Vec<f64> {
    (0..11).map(|k| -0.5 + 0.1 * k as f64).collect()
}

/// Largest ray integral per `λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct RayIntegralReport {
    pub lambdas: Vec<f64>,
    pub max_modulus: Vec<f64>,
}

impl RayIntegralReport {
    pub fn max(&self) -> f64 {
        self.max_modulus.iter().copied().fold(0.0, f64::max)
    }
}

fn bundle(metric: &MetricField2D, res: &GaugeResolution) -> Result<RayBundle> {
    let grid = Arc::new(InfluxGrid::new(metric, res.n_s, res.n_phi)?);
    let b = RayBundle::trace(metric, grid, 1e-12);
    if b.invalid_count() == b.paths.len() {
        return Err(Error::Geometry("no ray could be traced".into()));
    }
    Ok(b)
}

fn max_over_rays(b: &RayBundle, lambda: f64, pair: &PairField, res: &GaugeResolution) -> f64 {
    let data = b.transform(lambda, pair, &RayQuadrature::with_step(res.ray_step));
    data.values
        .iter()
        .zip(&data.valid)
        .filter(|(_, ok)| **ok)
        .map(|(v, _)| v.norm())
        .fold(0.0, f64::max)
}

/// `max_{rays} |∫ e^{−λt} (f(γ) + iα(γ̇)) dt|` for the partial Fourier slices
/// of `X♭`, over rays entering `D` from `∂D`.
pub fn ray_integral_check(x: &VectorFieldM, lambdas: &[f64], res: &GaugeResolution) -> Result<RayIntegralReport> {
    x.check_support()?;
    let b = bundle(x.product().base(), res)?;
    let max_modulus = lambdas
        .iter()
        .map(|&lambda| {
            let s = partial_fourier(x, lambda, &res.fourier)?;
            let a = s.alpha.clone();
            let dom = a.domain().clone();
            let ia = OneFormD::new(&dom, move |y| a.eval(y).map(|c| c * I), Regularity::Smooth);
            Ok(max_over_rays(&b, lambda, &PairField::new(s.f, ia), res))
        })
        .collect::<Result<_>>()?;
    Ok(RayIntegralReport {
        lambdas: lambdas.to_vec(),
        max_modulus,
    })
}

/// [`ray_integral_check`] for `X = ∇φ`, which should vanish for every `λ`.
pub fn gauge_vanishing_check(phi: &Potential, lambdas: &[f64], res: &GaugeResolution) -> Result<RayIntegralReport> {
    phi.support.check_inside(phi.product(), 1e-3)?;
    ray_integral_check(&VectorFieldM::gradient(phi), lambdas, res)
}

/// `max |T_λ[Q_λ, 0]|` for `Q_λ` the slice of `(q₁ − q₂)c`.
pub fn q_pipeline(
    q_diff: impl Fn(&Vector3<f64>) -> C + Send + Sync + Clone + 'static,
    product: &ConformalProduct,
    support: Option<SupportBox>,
    lambdas: &[f64],
    res: &GaugeResolution,
) -> Result<RayIntegralReport> {
    if let Some(s) = support {
        s.check_inside(product, 1e-3)?;
    }
    let b = bundle(product.base(), res)?;
    let max_modulus = lambdas
        .iter()
        .map(|&lambda| {
            let q = q_slice(q_diff.clone(), product, lambda, support, &res.fourier)?;
            Ok(max_over_rays(&b, lambda, &PairField::function_only(q), res))
        })
        .collect::<Result<_>>()?;
    Ok(RayIntegralReport {
        lambdas: lambdas.to_vec(),
        max_modulus,
    })
}

/// Sup-norms of `∂_k X♭_j − ∂_j X♭_k` (`j, k ≥ 2`) and of `∂_j f + iλα_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosednessReport {
    pub form: f64,
    /// `(λ, sup_j |∂_j f + iλα_j|)`.
    pub slices: Vec<(f64, f64)>,
}

impl ClosednessReport {
    pub fn max(&self) -> f64 {
        self.slices.iter().map(|s| s.1).fold(self.form, f64::max)
    }
}

/// Fourth-order central difference of `f` along `e` with step `h`.
fn central<T>(f: impl Fn(f64) -> T, h: f64) -> T
where
    T: std::ops::Sub<Output = T> + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>,
{
    (f(-2.0 * h) * (1.0 / 12.0) + f(-h) * (-8.0 / 12.0) + f(h) * (8.0 / 12.0) + f(2.0 * h) * (-1.0 / 12.0)) * (1.0 / h)
}

const FD_STEP: f64 = 1e-3;

/// Evaluates both closedness relations on `n` sample points of `D` (times
/// nine `x₁` levels for the first one).
pub fn closedness_check(x: &VectorFieldM, lambdas: &[f64], n: usize, quad: &FourierQuadrature) -> Result<ClosednessReport> {
    let dom = x.product().base().domain().clone();
    let pts: Vec<Point2> = dom
        .interior_samples(n)
        .into_iter()
        .filter(|p| dom.defining_fn(p) < -4.0 * FD_STEP)
        .collect();
    let (lo, hi) = x.product().x1_range();
    let form = (0..9)
        .into_par_iter()
        .map(|k| {
            let x1 = lo + (hi - lo) * (k as f64 + 0.5) / 9.0;
            pts.iter()
                .map(|p| {
                    let d2a3 = central(|t| x.flat(&Vector3::new(x1, p.x + t, p.y))[2], FD_STEP);
                    let d3a2 = central(|t| x.flat(&Vector3::new(x1, p.x, p.y + t))[1], FD_STEP);
                    (d2a3 - d3a2).norm()
                })
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    let slices = lambdas
        .par_iter()
        .map(|&lambda| {
            let s = partial_fourier(x, lambda, quad)?;
            let worst = pts
                .iter()
                .map(|p| {
                    let a = s.alpha.eval(p);
                    let d1 = central(|t| s.f.eval(&Point2::new(p.x + t, p.y)), FD_STEP);
                    let d2 = central(|t| s.f.eval(&Point2::new(p.x, p.y + t)), FD_STEP);
                    (d1 + I * lambda * a[0]).norm().max((d2 + I * lambda * a[1]).norm())
                })
                .fold(0.0, f64::max);
            Ok((lambda, worst))
        })
        .collect::<Result<_>>()?;
    Ok(ClosednessReport { form, slices })
}

/// Values of a potential integrated from a closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegratedPotential {
    pub values: Vec<C>,
    /// Largest difference between the two path families.
    pub discrepancy: f64,
}

/// Panel length for segment integrals.
const SEGMENT_PANEL: f64 = 0.05;

fn path_integral(form: &(dyn Fn(&[f64]) -> Vec<C> + Sync), base: &[f64], target: &[f64], order: &[usize]) -> C {
    let rule = CompositeGauss::new(8, SEGMENT_PANEL);
    let mut cur = base.to_vec();
    let mut total = C::default();
    for &k in order {
        let (a, b) = (cur[k], target[k]);
        let (lo, hi, sign) = if b >= a { (a, b, 1.0) } else { (b, a, -1.0) };
        for (t, w) in rule.nodes(lo, hi) {
            let mut p = cur.clone();
            p[k] = t;
            total += form(&p)[k] * (w * sign);
        }
        cur[k] = b;
    }
    total
}

/// `φ(p) = ∫_base^p ω` along axis-aligned polylines, once in increasing and
/// once in decreasing coordinate order. Fails with [`Error::NotClosed`] when
/// the two disagree by more than `tol` relative to the largest value.
pub fn integrate_potential(
    form: &(dyn Fn(&[f64]) -> Vec<C> + Sync),
    base: &[f64],
    targets: &[Vec<f64>],
    tol: f64,
) -> Result<IntegratedPotential> {
    let dim = base.len();
    let up: Vec<usize> = (0..dim).collect();
    let down: Vec<usize> = (0..dim).rev().collect();
    let pairs: Vec<(C, C)> = targets
        .par_iter()
        .map(|t| (path_integral(form, base, t, &up), path_integral(form, base, t, &down)))
        .collect();
    let scale = pairs.iter().map(|p| p.0.norm()).fold(0.0, f64::max).max(1e-300);
    let discrepancy = pairs.iter().map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    if discrepancy > tol * scale {
        return Err(Error::NotClosed(discrepancy));
    }
    Ok(IntegratedPotential {
        values: pairs.into_iter().map(|p| p.0).collect(),
        discrepancy,
    })
}

/// Integrates `dφ` back and compares with `φ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialRoundTrip {
    /// `max |φ_int(p) − (φ(p) − φ(base))|`.
    pub value_defect: f64,
    /// `max |dφ_int − dφ|` by central differences of the integrated potential.
    pub differential_defect: f64,
    pub discrepancy: f64,
}

impl PotentialRoundTrip {
    pub fn max(&self) -> f64 {
        self.value_defect.max(self.differential_defect)
    }
}

/// Round trip `φ → dφ → ∫dφ` on `n` points of `D` at three `x₁` levels,
/// based at the center of `M`.
pub fn potential_round_trip(phi: &Potential, n: usize) -> Result<PotentialRoundTrip> {
    let prod = phi.product();
    let (lo, hi) = prod.x1_range();
    let base = [0.5 * (lo + hi), 0.0, 0.0];
    let p = phi.clone();
    let form = move |x: &[f64]| p.grad(&Vector3::new(x[0], x[1], x[2])).to_vec();
    let dom = prod.base().domain();
    let mut targets = Vec::new();
    for k in 0..3 {
        let x1 = lo + (hi - lo) * (k as f64 + 1.0) / 4.0;
        for q in dom.interior_samples(n) {
            targets.push(vec![x1, q.x, q.y]);
        }
    }
    let ip = integrate_potential(&form, &base, &targets, 1e-8)?;
    let at = |x: &[f64]| phi.value(&Vector3::new(x[0], x[1], x[2]));
    let b0 = at(&base);
    let value_defect = targets
        .iter()
        .zip(&ip.values)
        .map(|(t, v)| (v - (at(t) - b0)).norm())
        .fold(0.0, f64::max);
    // differential at a subset of the targets
    let h = FD_STEP;
    let differential_defect = targets
        .par_iter()
        .step_by(7)
        .map(|t| {
            let g = phi.grad(&Vector3::new(t[0], t[1], t[2]));
            (0..3)
                .map(|k| {
                    let shifted: Vec<Vec<f64>> = [-2.0, -1.0, 1.0, 2.0]
                        .iter()
                        .map(|s| {
                            let mut q = t.clone();
                            q[k] += s * h;
                            q
                        })
                        .collect();
                    let v: Vec<C> = shifted.iter().map(|q| path_integral(&form, &base, q, &[0, 1, 2])).collect();
                    let d = (v[0] - v[1] * 8.0 + v[2] * 8.0 - v[3]) / (12.0 * h);
                    (d - g[k]).norm()
                })
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    Ok(PotentialRoundTrip {
        value_defect,
        differential_defect,
        discrepancy: ip.discrepancy,
    })
}

/// One line of the gauge pipeline report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineRow {
    pub lambda: f64,
    pub max_ray_integral: f64,
    pub closedness_residual: f64,
    pub potential_roundtrip_defect: f64,
}

/// Ray integrals, closedness and the potential round trip for `X = ∇φ`.
pub fn gauge_pipeline(phi: &Potential, lambdas: &[f64], res: &GaugeResolution) -> Result<Vec<PipelineRow>> {
    let rays = gauge_vanishing_check(phi, lambdas, res)?;
    let closed = closedness_check(&VectorFieldM::gradient(phi), lambdas, 120, &res.fourier)?;
    let rt = potential_round_trip(phi, 40)?;
    Ok(lambdas
        .iter()
        .enumerate()
        .map(|(k, &lambda)| PipelineRow {
            lambda,
            max_ray_integral: rays.max_modulus[k],
            closedness_residual: closed.slices[k].1.max(closed.form),
            potential_roundtrip_defect: rt.max(),
        })
        .collect())
}

pub fn write_pipeline_csv<W: std::io::Write>(rows: &[PipelineRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["lambda", "max_ray_integral", "closedness_residual", "potential_roundtrip_defect"])?;
    for r in rows {
        w.write_record(
            [r.lambda, r.max_ray_integral, r.closedness_residual, r.potential_roundtrip_defect].map(|v| format!("{v:.17e}")),
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Scalar field on `D` from the slice of a potential: `Φ_λ = ∫ e^{iλx₁} φ c dx₁`.
pub fn potential_slice(phi: &Potential, lambda: f64, quad: &FourierQuadrature) -> Result<ScalarFieldD> {
    let p = phi.clone();
    q_slice(move |x| p.value(x), phi.product(), lambda, Some(phi.support), quad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::gallery;

    fn setup(name: &str) -> Potential {
        let prod = gallery::product(name, (-1.0, 1.0)).unwrap();
        let s = SupportBox {
            x1: (-0.5, 0.6),
            center: Point2::new(0.1, -0.05),
            radius: 0.55,
        };
        Potential::bump(&prod, s, C::new(0.8, -0.3), 8)
    }

    #[test]
    fn zero_potential_gives_zero() {
        let prod = gallery::product("euclidean_disk", (-1.0, 1.0)).unwrap();
        let s = SupportBox {
            x1: (-0.5, 0.5),
            center: Point2::new(0.0, 0.0),
            radius: 0.5,
        };
        let phi = Potential::bump(&prod, s, C::default(), 8);
        let r = gauge_vanishing_check(&phi, &[0.0, 0.3], &GaugeResolution { n_s: 8, n_phi: 4, ..Default::default() }).unwrap();
        assert_eq!(r.max(), 0.0);
    }

    #[test]
    fn gradient_is_invisible() {
        let phi = setup("conformal_bump");
        let res = GaugeResolution { n_s: 12, n_phi: 6, ..Default::default() };
        let r = gauge_vanishing_check(&phi, &[-0.4, 0.0, 0.5], &res).unwrap();
        assert!(r.max() < 1e-7, "{r:?}");
    }

    #[test]
    fn closed_and_integrable() {
        let phi = setup("euclidean_disk");
        let c = closedness_check(&VectorFieldM::gradient(&phi), &[0.0, 0.3], 40, &FourierQuadrature::default()).unwrap();
        assert!(c.max() < 1e-6, "{c:?}");
        let rt = potential_round_trip(&phi, 10).unwrap();
        assert!(rt.max() < 1e-8, "{rt:?}");
    }

    #[test]
    fn exact_differential_of_product() {
        let f = |x: &[f64]| vec![C::new(x[1], 0.0), C::new(x[0], 0.0)];
        let ip = integrate_potential(&f, &[0.2, -0.1], &[vec![0.7, 0.4], vec![-0.3, 0.5]], 1e-12).unwrap();
        assert!((ip.values[0] - C::new(0.7 * 0.4 + 0.02, 0.0)).norm() < 1e-14);
        let rot = |x: &[f64]| vec![C::new(-x[1], 0.0), C::new(x[0], 0.0)];
        assert!(matches!(integrate_potential(&rot, &[0.0, 0.0], &[vec![0.5, 0.5]], 1e-8), Err(Error::NotClosed(_))));
    }

    #[test]
    fn support_touching_boundary_rejected() {
        let prod = gallery::product("euclidean_disk", (-1.0, 1.0)).unwrap();
        let s = SupportBox {
            x1: (-0.5, 0.5),
            center: Point2::new(0.5, 0.0),
            radius: 0.5,
        };
        let phi = Potential::bump(&prod, s, C::new(1.0, 0.0), 8);
        assert!(matches!(gauge_vanishing_check(&phi, &[0.0], &GaugeResolution::default()), Err(Error::Precondition(_))));
    }
}
