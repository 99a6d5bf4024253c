use nalgebra::Vector2;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

type Radial = Arc<dyn Fn(f64) -> [f64; 3] + Send + Sync>;

/// Star-shaped region `{ x : |x| <= R(arg x) }` around the origin.
///
/// The radial function returns `[R, R', R'']` at a polar angle. Boundary points
/// are parameterized by that polar angle `s`; on the unit disk this is arc length.
#[derive(Clone)]
pub struct StarDomain {
    radial: Radial,
    r_max: f64,
}

impl fmt::Debug for StarDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StarDomain").field("r_max", &self.r_max).finish()
    }
}

impl StarDomain {
    pub fn unit_disk() -> Self {
        Self::disk(1.0)
    }

    pub fn disk(radius: f64) -> Self {
        Self {
            radial: Arc::new(move |_| [radius, 0.0, 0.0]),
            r_max: radius,
        }
    }

    /// Arbitrary star-shaped domain; `radial(s)` must be positive and `2π`-periodic.
    pub fn star(radial: impl Fn(f64) -> [f64; 3] + Send + Sync + 'static) -> Self {
        let r_max = (0..720)
            .map(|k| radial(2.0 * PI * k as f64 / 720.0)[0])
            .fold(0.0f64, f64::max);
        Self {
            radial: Arc::new(radial),
            r_max,
        }
    }

    pub fn radius_at(&self, s: f64) -> [f64; 3] {
        (self.radial)(s)
    }

    /// Upper bound on the Euclidean diameter.
    pub fn diameter(&self) -> f64 {
        2.0 * self.r_max
    }

    pub fn angle_of(x: &Vector2<f64>) -> f64 {
        let a = x.y.atan2(x.x);
        if a < 0.0 {
            a + 2.0 * PI
        } else {
            a
        }
    }

    /// Boundary-defining function, negative inside.
    pub fn defining_fn(&self, x: &Vector2<f64>) -> f64 {
        let r = x.norm();
        if r == 0.0 {
            return -self.radius_at(0.0)[0];
        }
        r - self.radius_at(Self::angle_of(x))[0]
    }

    /// Euclidean gradient of the defining function (the outward conormal, unnormalized).
    pub fn defining_grad(&self, x: &Vector2<f64>) -> Vector2<f64> {
        let r = x.norm();
        let s = Self::angle_of(x);
        let [_, dr, _] = self.radius_at(s);
        let er = x / r;
        let es = Vector2::new(-er.y, er.x);
        er - es * (dr / r)
    }

    pub fn contains(&self, x: &Vector2<f64>, tol: f64) -> bool {
        self.defining_fn(x) <= tol
    }

    pub fn boundary_point(&self, s: f64) -> Vector2<f64> {
        let [r, _, _] = self.radius_at(s);
        Vector2::new(r * s.cos(), r * s.sin())
    }

    /// `d/ds` of the boundary parameterization.
    pub fn boundary_velocity(&self, s: f64) -> Vector2<f64> {
        let [r, dr, _] = self.radius_at(s);
        let (sn, cs) = s.sin_cos();
        Vector2::new(dr * cs - r * sn, dr * sn + r * cs)
    }

    /// `d²/ds²` of the boundary parameterization.
    pub fn boundary_acceleration(&self, s: f64) -> Vector2<f64> {
        let [r, dr, d2r] = self.radius_at(s);
        let (sn, cs) = s.sin_cos();
        Vector2::new(
            d2r * cs - 2.0 * dr * sn - r * cs,
            d2r * sn + 2.0 * dr * cs - r * sn,
        )
    }

    /// Deterministic sample of interior points on a polar lattice.
    pub fn interior_samples(&self, n: usize) -> Vec<Vector2<f64>> {
        let rings = ((n as f64).sqrt().ceil() as usize).max(2);
        let per_ring = n.div_ceil(rings).max(3);
        let mut out = Vec::with_capacity(rings * per_ring);
        for i in 0..rings {
            let frac = (i as f64 + 0.5) / rings as f64;
            for k in 0..per_ring {
                let s = 2.0 * PI * (k as f64 + 0.37 * i as f64) / per_ring as f64;
                out.push(self.boundary_point(s) * frac);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_defining_fn() {
        let d = StarDomain::unit_disk();
        assert!(d.defining_fn(&Vector2::new(0.3, 0.4)) < 0.0);
        assert!((d.defining_fn(&Vector2::new(0.6, 0.8))).abs() < 1e-15);
        assert!(d.defining_fn(&Vector2::new(1.0, 1.0)) > 0.0);
    }

    #[test]
    fn star_boundary_derivatives_match_fd() {
        let d = StarDomain::star(|s| {
            [1.0 + 0.1 * (3.0 * s).cos(), -0.3 * (3.0 * s).sin(), -0.9 * (3.0 * s).cos()]
        });
        let s = 0.7;
        let h = 1e-5;
        let fd = (d.boundary_point(s + h) - d.boundary_point(s - h)) / (2.0 * h);
        assert!((fd - d.boundary_velocity(s)).norm() < 1e-9);
        let fd2 = (d.boundary_velocity(s + h) - d.boundary_velocity(s - h)) / (2.0 * h);
        assert!((fd2 - d.boundary_acceleration(s)).norm() < 1e-8);
        let x = d.boundary_point(s);
        assert!(d.defining_fn(&x).abs() < 1e-14);
        // gradient is normal to the boundary
        assert!(d.defining_grad(&x).dot(&d.boundary_velocity(s)).abs() < 1e-12);
    }
}
