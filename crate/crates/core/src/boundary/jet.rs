//! Second-order forward-mode jets: value, gradient and Hessian in up to
//! [`MAXV`] variables.

use num_complex::Complex64;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Maximum number of independent variables (`x₁..x_n, ξ₁..ξ_{n−1}` for `n ≤ 3`).
pub const MAXV: usize = 5;

type C = Complex64;

/// Truncated Taylor expansion of order two. A jet obtained by
/// [`Jet::diff`] has unknown second derivatives, stored as NaN so that any
/// accidental use shows up.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub v: C,
    pub g: [C; MAXV],
    pub h: [[C; MAXV]; MAXV],
}

const Z: C = C { re: 0.0, im: 0.0 };

impl Jet {
    pub fn constant(v: impl Into<C>) -> Self {
        Self {
            v: v.into(),
            g: [Z; MAXV],
            h: [[Z; MAXV]; MAXV],
        }
    }

    pub fn real(v: f64) -> Self {
        Self::constant(C::new(v, 0.0))
    }

    /// Independent variable number `k` with value `v`.
    pub fn var(v: f64, k: usize) -> Self {
        let mut j = Self::real(v);
        j.g[k] = C::new(1.0, 0.0);
        j
    }

    /// `∂_k` of this jet, as a first-order jet.
    pub fn diff(&self, k: usize) -> Self {
        Self {
            v: self.g[k],
            g: self.h[k],
            h: [[C::new(f64::NAN, f64::NAN); MAXV]; MAXV],
        }
    }

    pub fn scale(&self, s: C) -> Self {
        let mut out = *self;
        out.v *= s;
        for i in 0..MAXV {
            out.g[i] *= s;
            for j in 0..MAXV {
                out.h[i][j] *= s;
            }
        }
        out
    }

    /// `f(self)` given `f`, `f'`, `f''` at the value.
    fn chain(&self, f0: C, f1: C, f2: C) -> Self {
        let mut out = Self::constant(f0);
        for i in 0..MAXV {
            out.g[i] = f1 * self.g[i];
            for j in 0..MAXV {
                out.h[i][j] = f1 * self.h[i][j] + f2 * self.g[i] * self.g[j];
            }
        }
        out
    }

    pub fn sqrt(&self) -> Self {
        let s = self.v.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * self.v))
    }

    pub fn exp(&self) -> Self {
        let e = self.v.exp();
        self.chain(e, e, e)
    }

    pub fn ln(&self) -> Self {
        self.chain(self.v.ln(), 1.0 / self.v, -1.0 / (self.v * self.v))
    }

    pub fn sin(&self) -> Self {
        self.chain(self.v.sin(), self.v.cos(), -self.v.sin())
    }

    pub fn cos(&self) -> Self {
        self.chain(self.v.cos(), -self.v.sin(), -self.v.cos())
    }

    pub fn recip(&self) -> Self {
        let r = 1.0 / self.v;
        self.chain(r, -r * r, 2.0 * r * r * r)
    }

    pub fn powi(&self, n: i32) -> Self {
        let nf = n as f64;
        self.chain(self.v.powi(n), self.v.powi(n - 1) * nf, self.v.powi(n - 2) * nf * (nf - 1.0))
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(mut self, o: Jet) -> Jet {
        self.v += o.v;
        for i in 0..MAXV {
            self.g[i] += o.g[i];
            for j in 0..MAXV {
                self.h[i][j] += o.h[i][j];
            }
        }
        self
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        self + (-o)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(C::new(-1.0, 0.0))
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let mut out = Jet::constant(self.v * o.v);
        for i in 0..MAXV {
            out.g[i] = self.v * o.g[i] + o.v * self.g[i];
            for j in 0..MAXV {
                out.h[i][j] = self.v * o.h[i][j] + o.v * self.h[i][j] + self.g[i] * o.g[j] + o.g[i] * self.g[j];
            }
        }
        out
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, o: Jet) -> Jet {
        self * o.recip()
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, s: f64) -> Jet {
        self.scale(C::new(s, 0.0))
    }
}

impl Mul<C> for Jet {
    type Output = Jet;
    fn mul(self, s: C) -> Jet {
        self.scale(s)
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, s: f64) -> Jet {
        self.v += s;
        self
    }
}

/// Square matrix of jets.
pub type JetMatrix = Vec<Vec<Jet>>;

pub fn jet_zeros(m: usize) -> JetMatrix {
    vec![vec![Jet::real(0.0); m]; m]
}

pub fn jet_scalar(m: usize, s: Jet) -> JetMatrix {
    let mut a = jet_zeros(m);
    for (k, row) in a.iter_mut().enumerate() {
        row[k] = s;
    }
    a
}

/// Inverse and `log det` of a symmetric positive definite jet matrix by
/// Gauss–Jordan elimination without pivoting.
pub fn jet_inverse_logdet(a: &JetMatrix) -> (JetMatrix, Jet) {
    let n = a.len();
    let mut m = a.clone();
    let mut inv = jet_scalar(n, Jet::real(1.0));
    let mut logdet = Jet::real(0.0);
    for c in 0..n {
        let piv = m[c][c];
        logdet = logdet + piv.ln();
        let r = piv.recip();
        for k in 0..n {
            m[c][k] = m[c][k] * r;
            inv[c][k] = inv[c][k] * r;
        }
        for row in 0..n {
            if row != c {
                let f = m[row][c];
                for k in 0..n {
                    m[row][k] = m[row][k] - f * m[c][k];
                    inv[row][k] = inv[row][k] - f * inv[c][k];
                }
            }
        }
    }
    (inv, logdet)
}
