//! Solving `∂̄u = f` on a rectangle by the Cauchy transform
//! `u(ρ) = (1/π) ∫_B f(z) / (ρ − z) dA(z)`.

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;
use num_complex::Complex64;
use rayon::prelude::*;

/// Rectangle `B = [re] × [im]` with an `n_re × n_im` node grid at least one
/// cell inside `∂B`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CauchyDomain {
    pub re: (f64, f64),
    pub im: (f64, f64),
    pub n_re: usize,
    pub n_im: usize,
}

impl CauchyDomain {
    pub fn new(re: (f64, f64), im: (f64, f64), n_re: usize, n_im: usize) -> Result<Self> {
        if !(re.1 > re.0 && im.1 > im.0) || n_re < 5 || n_im < 5 {
            return Err(Error::Precondition("degenerate Cauchy rectangle or node grid".into()));
        }
        Ok(Self { re, im, n_re, n_im })
    }

    /// Rectangle in the upper half-plane for the `(x₁, r)` shadow of `M`.
    pub fn upper(x1: (f64, f64), r: (f64, f64), n_re: usize, n_im: usize) -> Result<Self> {
        if r.0 <= 0.0 {
            return Err(Error::Precondition("Cauchy rectangle must lie in Im z > 0".into()));
        }
        Self::new(x1, r, n_re, n_im)
    }

    pub fn cell(&self) -> (f64, f64) {
        (
            (self.re.1 - self.re.0) / (self.n_re + 1) as f64,
            (self.im.1 - self.im.0) / (self.n_im + 1) as f64,
        )
    }

    /// Node `(i, j)`.
    pub fn node(&self, i: usize, j: usize) -> Complex64 {
        let (dx, dy) = self.cell();
        Complex64::new(self.re.0 + dx * (i + 1) as f64, self.im.0 + dy * (j + 1) as f64)
    }

    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re.0, self.im.0),
            Complex64::new(self.re.1, self.im.0),
            Complex64::new(self.re.1, self.im.1),
            Complex64::new(self.re.0, self.im.1),
        ]
    }

    fn check_margin(&self, z: Complex64) -> Result<()> {
        let (dx, dy) = self.cell();
        let tol = 1e-12 * (dx + dy);
        if z.re < self.re.0 + dx - tol || z.re > self.re.1 - dx + tol || z.im < self.im.0 + dy - tol || z.im > self.im.1 - dy + tol {
            return Err(Error::Margin(format!("({}, {})", z.re, z.im)));
        }
        Ok(())
    }
}

/// Gauss points per panel in both directions of each triangle.
const POINTS: usize = 16;

/// Panels on `[0, 1]` graded geometrically towards `c`, with finest width `delta`.
fn graded_panels(c: f64, delta: f64) -> Vec<(f64, f64)> {
    let mut cuts = vec![0.0, 1.0];
    let c = c.clamp(0.0, 1.0);
    cuts.push(c);
    let mut d = delta.max(1e-14);
    while d < 1.0 {
        cuts.push(c - d);
        cuts.push(c + d);
        d *= 2.0;
    }
    cuts.retain(|t| (0.0..=1.0).contains(t));
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    cuts.windows(2).map(|w| (w[0], w[1])).collect()
}

/// `(1/π) ∫_B f(z)/(ρ − z) dA` by splitting `B` into four triangles with apex
/// `ρ`. On each, `z = ρ + u·w(v)` with `w(v) = P₁ − ρ + v(P₂ − P₁)` cancels the
/// `1/|z − ρ|` singularity; panels in `v` are graded towards the foot of the
/// perpendicular from `ρ`.
pub fn cauchy_transform(rhs: &(dyn Fn(Complex64) -> Complex64 + Sync), domain: &CauchyDomain, rho: Complex64) -> Result<Complex64> {
    domain.check_margin(rho)?;
    let gl = GaussLegendre::new(POINTS);
    let corners = domain.corners();
    let mut total = Complex64::default();
    for k in 0..4 {
        let p1 = corners[k];
        let p2 = corners[(k + 1) % 4];
        let e = p2 - p1;
        let a = p1 - rho;
        let jac = (a.conj() * e).im.abs();
        let len2 = e.norm_sqr();
        let foot = -(a.conj() * e).re / len2;
        let dist = jac / len2.sqrt();
        let mut acc = Complex64::default();
        for (v0, v1) in graded_panels(foot, dist / len2.sqrt()) {
            for (v, wv) in gl.on_interval(v0, v1) {
                let w = a + e * v;
                let mut inner = Complex64::default();
                for (u, wu) in gl.on_interval(0.0, 1.0) {
                    inner += rhs(rho + w * u) * wu;
                }
                acc += inner / w * wv;
            }
        }
        total -= acc * jac;
    }
    Ok(total / std::f64::consts::PI)
}

/// Cauchy transform sampled on the node grid of a domain.
#[derive(Debug, Clone)]
pub struct CauchyGrid {
    pub domain: CauchyDomain,
    /// Row-major in `(i, j)`, `j` fastest.
    pub values: Vec<Complex64>,
}

impl CauchyGrid {
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.domain.n_im + j]
    }

    /// Fourth-order `∂̄ = ½(∂_x + i∂_y)` at node `(i, j)`, `2 ≤ i < n_re − 2`.
    pub fn dbar_fd(&self, i: usize, j: usize) -> Complex64 {
        let (dx, dy) = self.domain.cell();
        let d = |f: &dyn Fn(isize) -> Complex64, h: f64| (f(-2) - f(-1) * 8.0 + f(1) * 8.0 - f(2)) / (12.0 * h);
        let fx = |o: isize| self.at((i as isize + o) as usize, j);
        let fy = |o: isize| self.at(i, (j as isize + o) as usize);
        (d(&fx, dx) + Complex64::i() * d(&fy, dy)) * 0.5
    }

    /// `(Σ |∂̄u − f|² / Σ |f|²)^{1/2}` over nodes at least `margin` (≥ 2) away
    /// from the edge of the node grid; RMS when `f` vanishes there.
    ///
    /// The transform of a discontinuous extension has corner singularities, so
    /// constant data converge slowly near `∂B`; interior subgrids do not see them.
    pub fn dbar_defect(&self, rhs: &dyn Fn(Complex64) -> Complex64, margin: usize) -> f64 {
        let m = margin.max(2);
        let (mut num, mut den, mut count) = (0.0, 0.0, 0usize);
        for i in m..self.domain.n_re.saturating_sub(m) {
            for j in m..self.domain.n_im.saturating_sub(m) {
                let f = rhs(self.domain.node(i, j));
                num += (self.dbar_fd(i, j) - f).norm_sqr();
                den += f.norm_sqr();
                count += 1;
            }
        }
        if den == 0.0 {
            (num / count.max(1) as f64).sqrt()
        } else {
            (num / den).sqrt()
        }
    }

    /// Rows `re,im,u_re,u_im`.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["re", "im", "u_re", "u_im"])?;
        for i in 0..self.domain.n_re {
            for j in 0..self.domain.n_im {
                let z = self.domain.node(i, j);
                let u = self.at(i, j);
                w.write_record([z.re, z.im, u.re, u.im].map(|x| format!("{x:.17e}")))?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Solves `∂̄a₀ = rhs` on the node grid (parallel over nodes).
pub fn dbar_cauchy_solve(rhs: &(dyn Fn(Complex64) -> Complex64 + Sync), domain: &CauchyDomain) -> Result<CauchyGrid> {
    let values = (0..domain.n_re * domain.n_im)
        .into_par_iter()
        .map(|k| cauchy_transform(rhs, domain, domain.node(k / domain.n_im, k % domain.n_im)))
        .collect::<Result<_>>()?;
    Ok(CauchyGrid { domain: *domain, values })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dom(n: usize) -> CauchyDomain {
        CauchyDomain::upper((-0.5, 0.5), (1.2, 2.2), n, n).unwrap()
    }

    #[test]
    fn constant_rhs_is_conjugate_plus_holomorphic() {
        let k = Complex64::new(0.7, -0.2);
        let g = dbar_cauchy_solve(&|_| k, &dom(16)).unwrap();
        let d = g.dbar_defect(&|_| k, 4);
        assert!(d < 1e-6, "{d}");
        // u − k ρ̄ is holomorphic: its ∂̄ vanishes
        let h = CauchyGrid {
            domain: g.domain,
            values: (0..g.values.len())
                .map(|p| g.values[p] - k * g.domain.node(p / 16, p % 16).conj())
                .collect(),
        };
        assert!(h.dbar_defect(&|_| Complex64::default(), 4) < 1e-6);
    }

    #[test]
    fn zero_rhs_zero_output() {
        let g = dbar_cauchy_solve(&|_| Complex64::default(), &dom(6)).unwrap();
        assert!(g.values.iter().all(|v| *v == Complex64::default()));
    }

    #[test]
    fn pointwise_dbar_by_central_differences() {
        let d = dom(10);
        let z0 = d.node(4, 5);
        let u = cauchy_transform(&|_| Complex64::new(1.0, 0.0), &d, z0).unwrap();
        let eps = 1e-4;
        let up = cauchy_transform(&|_| Complex64::new(1.0, 0.0), &d, z0 + eps).unwrap();
        let um = cauchy_transform(&|_| Complex64::new(1.0, 0.0), &d, z0 - eps).unwrap();
        let vp = cauchy_transform(&|_| Complex64::new(1.0, 0.0), &d, z0 + Complex64::i() * eps).unwrap();
        let vm = cauchy_transform(&|_| Complex64::new(1.0, 0.0), &d, z0 - Complex64::i() * eps).unwrap();
        let dbar = ((up - um) + Complex64::i() * (vp - vm)) / (4.0 * eps);
        assert!((dbar - 1.0).norm() < 1e-7, "{dbar} {u}");
    }

    #[test]
    fn margin_enforced() {
        let d = dom(10);
        let r = cauchy_transform(&|_| Complex64::new(1.0, 0.0), &d, Complex64::new(-0.49, 1.7));
        assert!(matches!(r, Err(Error::Margin(_))));
    }
}
