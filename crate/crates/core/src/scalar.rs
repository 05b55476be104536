//! Scalar abstraction shared by plain complex evaluation and the
//! forward-mode jet algebra.
//!
//! Every field on jet space is written once, generically over [`Scalar`],
//! in terms of the polarized variables `(z, z̄, v, v̄)`. Evaluating with
//! `Complex64` at `z̄ = conj(z)` gives the ordinary value; evaluating with
//! [`crate::jet::Jet`] treats `z` and `z̄` as independent and yields
//! Wirtinger derivatives.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;

pub type C64 = Complex64;

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    Complex64::new(re, im)
}

pub trait Scalar:
    Copy
    + Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_c(c: C64) -> Self;

    fn value(&self) -> C64;

    /// Applies an analytic function given its derivatives at the value
    /// point: `derivs[j] = f^(j)(value)`.
    fn apply(&self, derivs: &[C64; 5]) -> Self;

    fn from_f(x: f64) -> Self {
        Self::from_c(c64(x, 0.0))
    }

    fn zero() -> Self {
        Self::from_f(0.0)
    }

    fn one() -> Self {
        Self::from_f(1.0)
    }

    fn scale(self, c: C64) -> Self {
        self * Self::from_c(c)
    }

    fn recip(self) -> Self {
        let a = self.value();
        let r = a.inv();
        let r2 = r * r;
        let r3 = r2 * r;
        self.apply(&[r, -r2, r3 * 2.0, -r2 * r2 * 6.0, r2 * r3 * 24.0])
    }

    fn exp(self) -> Self {
        let e = self.value().exp();
        self.apply(&[e; 5])
    }

    fn ln(self) -> Self {
        let a = self.value();
        let r = a.inv();
        let r2 = r * r;
        self.apply(&[a.ln(), r, -r2, r2 * r * 2.0, -r2 * r2 * 6.0])
    }

    fn powf(self, p: f64) -> Self {
        let a = self.value();
        let mut d = [c64(0.0, 0.0); 5];
        let mut coef = 1.0;
        for (j, slot) in d.iter_mut().enumerate() {
            *slot = a.powf(p - j as f64) * coef;
            coef *= p - j as f64;
        }
        self.apply(&d)
    }

    fn powi(self, n: i32) -> Self {
        match n {
            0 => Self::one(),
            1 => self,
            2 => self * self,
            n if n < 0 => self.powi(-n).recip(),
            n => {
                let half = self.powi(n / 2);
                if n % 2 == 0 {
                    half * half
                } else {
                    half * half * self
                }
            }
        }
    }

    fn sqrt(self) -> Self {
        self.powf(0.5)
    }

    fn sin(self) -> Self {
        let a = self.value();
        let (s, c) = (a.sin(), a.cos());
        self.apply(&[s, c, -s, -c, s])
    }

    fn cos(self) -> Self {
        let a = self.value();
        let (s, c) = (a.sin(), a.cos());
        self.apply(&[c, -s, -c, s, c])
    }

    fn sinh(self) -> Self {
        let a = self.value();
        let (s, c) = (a.sinh(), a.cosh());
        self.apply(&[s, c, s, c, s])
    }

    fn cosh(self) -> Self {
        let a = self.value();
        let (s, c) = (a.sinh(), a.cosh());
        self.apply(&[c, s, c, s, c])
    }

    fn tanh(self) -> Self {
        let a = self.value();
        let t = a.tanh();
        let one = c64(1.0, 0.0);
        let s = one - t * t;
        // d/dx tanh = 1 - t^2, higher orders by the chain rule in t.
        let d2 = -t * s * 2.0;
        let d3 = s * (t * t * 6.0 - 2.0);
        let d4 = s * t * (one * 16.0 - t * t * 24.0);
        self.apply(&[t, s, d2, d3, d4])
    }

    fn atanh(self) -> Self {
        let a = self.value();
        let one = c64(1.0, 0.0);
        let p = (one - a).inv();
        let m = (one + a).inv();
        // atanh^(j) = (j-1)!/2 * [ (1-x)^-j + (-1)^(j-1) (1+x)^-j ]
        let d1 = (p + m) * 0.5;
        let d2 = (p * p - m * m) * 0.5;
        let d3 = (p * p * p + m * m * m) * 1.0;
        let d4 = (p * p * p * p - m * m * m * m) * 3.0;
        let v = ((one + a) / (one - a)).ln() * 0.5;
        self.apply(&[v, d1, d2, d3, d4])
    }

    /// `atanh(√w)/√w`, analytic in `w` near 0.
    fn atanh_sqrt_ratio(self) -> Self {
        let w = self.value();
        if w.norm() < 1e-2 {
            // Sum_k w^k / (2k+1)
            let mut acc = Self::zero();
            for k in (0..16).rev() {
                acc = acc * self + Self::from_f(1.0 / (2 * k + 1) as f64);
            }
            acc
        } else {
            let s = self.sqrt();
            s.atanh() / s
        }
    }
}

impl Scalar for Complex64 {
    #[inline]
    fn from_c(c: C64) -> Self {
        c
    }

    #[inline]
    fn value(&self) -> C64 {
        *self
    }

    #[inline]
    fn apply(&self, derivs: &[C64; 5]) -> Self {
        derivs[0]
    }

    fn recip(self) -> Self {
        self.inv()
    }

    fn exp(self) -> Self {
        Complex64::exp(self)
    }

    fn ln(self) -> Self {
        Complex64::ln(self)
    }

    fn powf(self, p: f64) -> Self {
        Complex64::powf(self, p)
    }

    fn sqrt(self) -> Self {
        Complex64::sqrt(self)
    }
}
