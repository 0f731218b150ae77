//! Forward-mode jets: values carried together with their first (and second)
//! partial derivatives with respect to the chart coordinates.
//!
//! Metric coefficients, frames and spinor fields are all evaluated as jets,
//! so every derivative that enters a curvature or spinor identity is exact
//! up to rounding. Finite differences only appear in test oracles.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Largest base dimension handled by the metric/frame machinery.
pub const MAX_DIM: usize = 6;

pub type C64 = Complex64;

/// Value and gradient.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet1 {
    pub v: f64,
    pub d: [f64; MAX_DIM],
}

/// Value, gradient and Hessian.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet2 {
    pub v: f64,
    pub d: [f64; MAX_DIM],
    pub h: [[f64; MAX_DIM]; MAX_DIM],
}

impl Jet1 {
    pub const ZERO: Jet1 = Jet1 { v: 0.0, d: [0.0; MAX_DIM] };

    pub fn constant(v: f64) -> Self {
        Jet1 { v, ..Self::ZERO }
    }

    pub fn scale(self, c: f64) -> Self {
        let mut out = self;
        out.v *= c;
        out.d.iter_mut().for_each(|x| *x *= c);
        out
    }
}

impl Add for Jet1 {
    type Output = Jet1;
    fn add(self, o: Jet1) -> Jet1 {
        let mut out = self;
        out.v += o.v;
        for k in 0..MAX_DIM {
            out.d[k] += o.d[k];
        }
        out
    }
}

impl AddAssign for Jet1 {
    fn add_assign(&mut self, o: Jet1) {
        *self = *self + o;
    }
}

impl Sub for Jet1 {
    type Output = Jet1;
    fn sub(self, o: Jet1) -> Jet1 {
        self + (-o)
    }
}

impl Neg for Jet1 {
    type Output = Jet1;
    fn neg(self) -> Jet1 {
        self.scale(-1.0)
    }
}

impl Mul for Jet1 {
    type Output = Jet1;
    fn mul(self, o: Jet1) -> Jet1 {
        let mut d = [0.0; MAX_DIM];
        for k in 0..MAX_DIM {
            d[k] = self.d[k] * o.v + self.v * o.d[k];
        }
        Jet1 { v: self.v * o.v, d }
    }
}

impl Jet2 {
    pub const ZERO: Jet2 = Jet2 {
        v: 0.0,
        d: [0.0; MAX_DIM],
        h: [[0.0; MAX_DIM]; MAX_DIM],
    };

    pub fn constant(v: f64) -> Self {
        Jet2 { v, ..Self::ZERO }
    }

    /// The coordinate function `x^k` evaluated at `value`.
    pub fn var(value: f64, k: usize) -> Self {
        let mut j = Self::constant(value);
        j.d[k] = 1.0;
        j
    }

    pub fn scale(self, c: f64) -> Self {
        let mut out = self;
        out.v *= c;
        for k in 0..MAX_DIM {
            out.d[k] *= c;
            for l in 0..MAX_DIM {
                out.h[k][l] *= c;
            }
        }
        out
    }

    /// Applies a scalar function given its value and first two derivatives at `self.v`.
    fn chain(self, f0: f64, f1: f64, f2: f64) -> Self {
        let mut out = Self::constant(f0);
        for k in 0..MAX_DIM {
            out.d[k] = f1 * self.d[k];
            for l in 0..MAX_DIM {
                out.h[k][l] = f2 * self.d[k] * self.d[l] + f1 * self.h[k][l];
            }
        }
        out
    }

    pub fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e, e)
    }

    pub fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * self.v))
    }

    pub fn recip(self) -> Self {
        let r = 1.0 / self.v;
        self.chain(r, -r * r, 2.0 * r * r * r)
    }

    pub fn powi(self, p: i32) -> Self {
        match p {
            0 => Self::constant(1.0),
            1 => self,
            _ => {
                let pf = p as f64;
                self.chain(
                    self.v.powi(p),
                    pf * self.v.powi(p - 1),
                    pf * (pf - 1.0) * self.v.powi(p - 2),
                )
            }
        }
    }

    /// Partial derivative `∂_k` as a first-order jet.
    pub fn partial(&self, k: usize) -> Jet1 {
        Jet1 { v: self.d[k], d: self.h[k] }
    }

    pub fn truncate(&self) -> Jet1 {
        Jet1 { v: self.v, d: self.d }
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(self, o: Jet2) -> Jet2 {
        let mut out = self;
        out.v += o.v;
        for k in 0..MAX_DIM {
            out.d[k] += o.d[k];
            for l in 0..MAX_DIM {
                out.h[k][l] += o.h[k][l];
            }
        }
        out
    }
}

impl AddAssign for Jet2 {
    fn add_assign(&mut self, o: Jet2) {
        *self = *self + o;
    }
}

impl Add<f64> for Jet2 {
    type Output = Jet2;
    fn add(self, c: f64) -> Jet2 {
        let mut out = self;
        out.v += c;
        out
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, o: Jet2) -> Jet2 {
        self + (-o)
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, o: Jet2) -> Jet2 {
        let mut out = Self::constant(self.v * o.v);
        for k in 0..MAX_DIM {
            out.d[k] = self.d[k] * o.v + self.v * o.d[k];
            for l in 0..MAX_DIM {
                out.h[k][l] = self.h[k][l] * o.v
                    + self.d[k] * o.d[l]
                    + self.d[l] * o.d[k]
                    + self.v * o.h[k][l];
            }
        }
        out
    }
}

impl Mul<f64> for Jet2 {
    type Output = Jet2;
    fn mul(self, c: f64) -> Jet2 {
        self.scale(c)
    }
}

/// Spinor-valued jet to first order: components and their partials.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinorJet1 {
    pub v: DVector<C64>,
    pub d: Vec<DVector<C64>>,
}

/// Spinor-valued jet to second order.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinorJet2 {
    pub v: DVector<C64>,
    pub d: Vec<DVector<C64>>,
    pub h: Vec<Vec<DVector<C64>>>,
}

impl SpinorJet1 {
    pub fn zeros(base_dim: usize, spinor_dim: usize) -> Self {
        SpinorJet1 {
            v: DVector::zeros(spinor_dim),
            d: vec![DVector::zeros(spinor_dim); base_dim],
        }
    }

    pub fn base_dim(&self) -> usize {
        self.d.len()
    }

    pub fn apply(&self, m: &DMatrix<C64>) -> Self {
        SpinorJet1 {
            v: m * &self.v,
            d: self.d.iter().map(|x| m * x).collect(),
        }
    }

    pub fn scale_c(&self, c: C64) -> Self {
        SpinorJet1 {
            v: &self.v * c,
            d: self.d.iter().map(|x| x * c).collect(),
        }
    }

    /// Product with a real scalar jet.
    pub fn mul_scalar(&self, s: &Jet1) -> Self {
        SpinorJet1 {
            v: &self.v * C64::from(s.v),
            d: (0..self.base_dim())
                .map(|k| &self.d[k] * C64::from(s.v) + &self.v * C64::from(s.d[k]))
                .collect(),
        }
    }

    /// Product `S · self` with a matrix-valued jet `S`.
    pub fn apply_jet(&self, m: &MatrixJet1) -> Self {
        SpinorJet1 {
            v: &m.v * &self.v,
            d: (0..self.base_dim())
                .map(|k| &m.d[k] * &self.v + &m.v * &self.d[k])
                .collect(),
        }
    }

    pub fn add_assign(&mut self, o: &SpinorJet1) {
        self.v += &o.v;
        for (a, b) in self.d.iter_mut().zip(&o.d) {
            *a += b;
        }
    }
}

impl SpinorJet2 {
    pub fn zeros(base_dim: usize, spinor_dim: usize) -> Self {
        SpinorJet2 {
            v: DVector::zeros(spinor_dim),
            d: vec![DVector::zeros(spinor_dim); base_dim],
            h: vec![vec![DVector::zeros(spinor_dim); base_dim]; base_dim],
        }
    }

    /// A field with constant components.
    pub fn constant(base_dim: usize, value: DVector<C64>) -> Self {
        let mut out = Self::zeros(base_dim, value.len());
        out.v = value;
        out
    }

    pub fn base_dim(&self) -> usize {
        self.d.len()
    }

    pub fn spinor_dim(&self) -> usize {
        self.v.len()
    }

    pub fn apply(&self, m: &DMatrix<C64>) -> Self {
        SpinorJet2 {
            v: m * &self.v,
            d: self.d.iter().map(|x| m * x).collect(),
            h: self
                .h
                .iter()
                .map(|row| row.iter().map(|x| m * x).collect())
                .collect(),
        }
    }

    /// Product with a real scalar jet (Leibniz rule up to second order).
    pub fn mul_scalar(&self, s: &Jet2) -> Self {
        let n = self.base_dim();
        let c = |x: f64| C64::from(x);
        SpinorJet2 {
            v: &self.v * c(s.v),
            d: (0..n)
                .map(|k| &self.d[k] * c(s.v) + &self.v * c(s.d[k]))
                .collect(),
            h: (0..n)
                .map(|k| {
                    (0..n)
                        .map(|l| {
                            &self.h[k][l] * c(s.v)
                                + &self.d[k] * c(s.d[l])
                                + &self.d[l] * c(s.d[k])
                                + &self.v * c(s.h[k][l])
                        })
                        .collect()
                })
                .collect(),
        }
    }

    /// The constant vector `value` times a real scalar jet.
    pub fn from_scalar(s: &Jet2, value: &DVector<C64>, base_dim: usize) -> Self {
        Self::constant(base_dim, value.clone()).mul_scalar(s)
    }

    pub fn add_assign(&mut self, o: &SpinorJet2) {
        self.v += &o.v;
        for k in 0..self.base_dim() {
            self.d[k] += &o.d[k];
            for l in 0..self.base_dim() {
                self.h[k][l] += &o.h[k][l];
            }
        }
    }

    pub fn partial(&self, k: usize) -> SpinorJet1 {
        SpinorJet1 {
            v: self.d[k].clone(),
            d: self.h[k].clone(),
        }
    }

    pub fn truncate(&self) -> SpinorJet1 {
        SpinorJet1 {
            v: self.v.clone(),
            d: self.d.clone(),
        }
    }
}

/// Matrix-valued jet to first order (spin-connection matrices).
#[derive(Clone, Debug)]
pub struct MatrixJet1 {
    pub v: DMatrix<C64>,
    pub d: Vec<DMatrix<C64>>,
}

impl MatrixJet1 {
    pub fn zeros(base_dim: usize, size: usize) -> Self {
        MatrixJet1 {
            v: DMatrix::zeros(size, size),
            d: vec![DMatrix::zeros(size, size); base_dim],
        }
    }

    /// Adds `s · m` for a real scalar jet `s` and constant matrix `m`.
    pub fn add_scaled(&mut self, s: &Jet1, m: &DMatrix<C64>) {
        self.v += m * C64::from(s.v);
        for (k, dk) in self.d.iter_mut().enumerate() {
            *dk += m * C64::from(s.d[k]);
        }
    }
}
