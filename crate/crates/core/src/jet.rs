//! Truncated hyper-dual numbers with up to four nilpotent generators.
//!
//! A `Jet` carries the coefficients of `a + Σ_S c_S ε_S` where `S` ranges
//! over subsets of `{ε₁, …, ε_k}` and every `ε_i² = 0`. Seeding a variable
//! with several generators (possibly the same variable more than once)
//! makes the coefficient of the full subset equal to the mixed partial
//! derivative along the seeded variables.

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::scalar::{c64, Scalar, C64};

pub const MAX_GENERATORS: usize = 4;
const SLOTS: usize = 1 << MAX_GENERATORS;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    coeffs: [C64; SLOTS],
    generators: u8,
}

impl Jet {
    pub fn constant(c: C64) -> Self {
        let mut coeffs = [c64(0.0, 0.0); SLOTS];
        coeffs[0] = c;
        Jet {
            coeffs,
            generators: 0,
        }
    }

    /// A variable with value `c` whose infinitesimal part is `ε_i` for every
    /// bit `i` set in `mask`; `generators` fixes the algebra size.
    pub fn variable(c: C64, mask: u8, generators: usize) -> Self {
        assert!(generators <= MAX_GENERATORS);
        let mut j = Jet::constant(c);
        j.generators = generators as u8;
        for i in 0..generators {
            if mask & (1 << i) != 0 {
                j.coeffs[1 << i] = c64(1.0, 0.0);
            }
        }
        j
    }

    /// Variable with a complex tangent: value `c`, infinitesimal part
    /// `t·ε_i` for each bit in `mask`.
    pub fn variable_along(c: C64, tangent: C64, mask: u8, generators: usize) -> Self {
        let mut j = Jet::variable(c, mask, generators);
        for i in 0..generators {
            if mask & (1 << i) != 0 {
                j.coeffs[1 << i] = tangent;
            }
        }
        j
    }

    pub fn generators(&self) -> usize {
        self.generators as usize
    }

    /// Coefficient of the monomial `Π_{i ∈ mask} ε_i`.
    pub fn coeff(&self, mask: usize) -> C64 {
        self.coeffs[mask]
    }

    /// Coefficient of the product of all generators.
    pub fn top(&self) -> C64 {
        self.coeffs[(1usize << self.generators) - 1]
    }

    #[inline]
    fn width(a: &Jet, b: &Jet) -> u8 {
        a.generators.max(b.generators)
    }
}

impl Add for Jet {
    type Output = Jet;
    #[inline]
    fn add(mut self, rhs: Jet) -> Jet {
        let g = Jet::width(&self, &rhs);
        for m in 0..(1usize << g) {
            self.coeffs[m] += rhs.coeffs[m];
        }
        self.generators = g;
        self
    }
}

impl Sub for Jet {
    type Output = Jet;
    #[inline]
    fn sub(mut self, rhs: Jet) -> Jet {
        let g = Jet::width(&self, &rhs);
        for m in 0..(1usize << g) {
            self.coeffs[m] -= rhs.coeffs[m];
        }
        self.generators = g;
        self
    }
}

impl Neg for Jet {
    type Output = Jet;
    #[inline]
    fn neg(mut self) -> Jet {
        for m in 0..(1usize << self.generators) {
            self.coeffs[m] = -self.coeffs[m];
        }
        self
    }
}

impl Mul for Jet {
    type Output = Jet;
    #[inline]
    fn mul(self, rhs: Jet) -> Jet {
        let g = Jet::width(&self, &rhs);
        if self.generators == 0 {
            let mut out = rhs;
            let a = self.coeffs[0];
            for m in 0..(1usize << g) {
                out.coeffs[m] *= a;
            }
            return out;
        }
        if rhs.generators == 0 {
            let mut out = self;
            let b = rhs.coeffs[0];
            for m in 0..(1usize << g) {
                out.coeffs[m] *= b;
            }
            return out;
        }
        let mut out = Jet::constant(c64(0.0, 0.0));
        out.generators = g;
        for m in 0..(1usize << g) {
            // subset convolution over submasks of m
            let mut acc = self.coeffs[0] * rhs.coeffs[m];
            let mut s = m;
            while s != 0 {
                acc += self.coeffs[s] * rhs.coeffs[m ^ s];
                s = (s - 1) & m;
            }
            out.coeffs[m] = acc;
        }
        out
    }
}

impl Div for Jet {
    type Output = Jet;
    #[inline]
    fn div(self, rhs: Jet) -> Jet {
        if rhs.generators == 0 {
            let inv = rhs.coeffs[0].inv();
            let mut out = self;
            for m in 0..(1usize << out.generators) {
                out.coeffs[m] *= inv;
            }
            return out;
        }
        self * rhs.recip()
    }
}

impl Scalar for Jet {
    fn from_c(c: C64) -> Self {
        Jet::constant(c)
    }

    fn value(&self) -> C64 {
        self.coeffs[0]
    }

    fn apply(&self, derivs: &[C64; 5]) -> Self {
        // f(a + N) = Σ_j f^(j)(a) N^j / j!, with N^(k+1) = 0.
        let mut nil = *self;
        nil.coeffs[0] = c64(0.0, 0.0);
        let mut out = Jet::constant(derivs[0]);
        out.generators = self.generators;
        let mut power = nil;
        let mut fact = 1.0;
        for (j, d) in derivs.iter().enumerate().skip(1) {
            if j > self.generators as usize {
                break;
            }
            fact *= j as f64;
            let c = *d / fact;
            for m in 1..(1usize << self.generators) {
                out.coeffs[m] += c * power.coeffs[m];
            }
            if j < self.generators as usize {
                power = power * nil;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn second_derivative_of_cube_by_double_seeding() {
        // d²/dx² x³ = 6x
        let x = Jet::variable(c64(1.5, 0.0), 0b11, 2);
        let y = x * x * x;
        assert!(close(y.top(), c64(9.0, 0.0), 1e-14));
        assert!(close(y.coeff(1), c64(3.0 * 2.25, 0.0), 1e-14));
    }

    #[test]
    fn fourth_derivative_of_exp_and_log() {
        let x = Jet::variable(c64(0.7, 0.2), 0b1111, 4);
        let e = x.exp();
        assert!(close(e.top(), c64(0.7, 0.2).exp(), 1e-13));
        // (ln x)'''' = -6/x^4
        let l = x.ln();
        let want = -6.0 / c64(0.7, 0.2).powi(4);
        assert!(close(l.top(), want, 1e-12));
    }

    #[test]
    fn mixed_partial_of_product() {
        // f = x² y, ∂x∂y f = 2x
        let x = Jet::variable(c64(2.0, 0.0), 0b01, 2);
        let y = Jet::variable(c64(3.0, 0.0), 0b10, 2);
        let f = x * x * y;
        assert!(close(f.top(), c64(4.0, 0.0), 1e-14));
    }

    #[test]
    fn division_matches_quotient_rule() {
        let x = Jet::variable(c64(0.4, -0.3), 0b111, 3);
        let f = Jet::constant(c64(1.0, 0.0)) / (Jet::constant(c64(1.0, 0.0)) - x);
        // (1-x)^-1 third derivative = 6 (1-x)^-4
        let want = 6.0 / (c64(1.0, 0.0) - c64(0.4, -0.3)).powi(4);
        assert!(close(f.top(), want, 1e-12));
    }

    #[test]
    fn tanh_and_atanh_derivatives_agree_with_recurrences() {
        let a = c64(0.3, 0.0);
        let x = Jet::variable(a, 0b1111, 4);
        // atanh'(x) = 1/(1-x²) ⇒ compare fourth derivative with third derivative of 1/(1-x²)
        let lhs = x.atanh().top();
        let y = Jet::variable(a, 0b111, 3);
        let rhs = (Jet::constant(c64(1.0, 0.0)) - y * y).recip().top();
        assert!(close(lhs, rhs, 1e-12));
        let t = x.tanh().top();
        let s = (x.sinh() / x.cosh()).top();
        assert!(close(t, s, 1e-12));
    }
}
