//! Explicit Runge–Kutta steppers for small autonomous systems.

// Dormand–Prince 5(4) tableau (autonomous form, stage nodes not needed).
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[inline]
fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// One Dormand–Prince step. Returns the fifth-order solution and the scaled
/// error norm (`<= 1` means the step is acceptable for tolerance `tol`).
pub fn dopri5_step<const N: usize, F>(f: &F, y: &[f64; N], k1: &[f64; N], h: f64, tol: f64) -> ([f64; N], [f64; N], f64)
where
    F: Fn(&[f64; N]) -> [f64; N],
{
    let k2 = f(&axpy(y, h, &[(A21, k1)]));
    let k3 = f(&axpy(y, h, &[(A31, k1), (A32, &k2)]));
    let k4 = f(&axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]));
    let k5 = f(&axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
    let k6 = f(&axpy(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
    let y5 = axpy(y, h, &[(B1, k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
    let k7 = f(&y5);
    let mut err = 0.0f64;
    for i in 0..N {
        let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let sc = tol * (1.0 + y[i].abs().max(y5[i].abs()));
        err = err.max((e / sc).abs());
    }
    (y5, k7, err)
}

/// Classical fourth-order Runge–Kutta step.
pub fn rk4_step<const N: usize, F>(f: &F, y: &[f64; N], h: f64) -> [f64; N]
where
    F: Fn(&[f64; N]) -> [f64; N],
{
    let k1 = f(y);
    let k2 = f(&axpy(y, h, &[(0.5, &k1)]));
    let k3 = f(&axpy(y, h, &[(0.5, &k2)]));
    let k4 = f(&axpy(y, h, &[(1.0, &k3)]));
    axpy(y, h, &[(1.0 / 6.0, &k1), (1.0 / 3.0, &k2), (1.0 / 3.0, &k3), (1.0 / 6.0, &k4)])
}

/// Integrates `y' = f(y)` over `[0, t_end]` with adaptive Dormand–Prince steps,
/// landing exactly on `t_end`.
pub fn integrate_to<const N: usize, F>(f: &F, y0: [f64; N], t_end: f64, tol: f64) -> Option<[f64; N]>
where
    F: Fn(&[f64; N]) -> [f64; N],
{
    if t_end == 0.0 {
        return Some(y0);
    }
    let dir = t_end.signum();
    let mut t = 0.0;
    let mut y = y0;
    let mut k1 = f(&y);
    let mut h = dir * (0.05f64).min(t_end.abs());
    let mut guard = 0usize;
    while (t_end - t) * dir > 0.0 {
        guard += 1;
        if guard > 1_000_000 || h.abs() < 1e-14 {
            return None;
        }
        if (t + h - t_end) * dir > 0.0 {
            h = t_end - t;
        }
        let (y_new, k_new, err) = dopri5_step(f, &y, &k1, h, tol);
        if err <= 1.0 {
            t += h;
            y = y_new;
            k1 = k_new;
        }
        h *= step_factor(err);
    }
    Some(y)
}

/// Step-size multiplier from the scaled error.
#[inline]
pub fn step_factor(err: f64) -> f64 {
    if err == 0.0 {
        5.0
    } else {
        (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
    }
}
