//! Forward-mode dual numbers.
//!
//! `Dual<S>` carries a value and one directional derivative. `S` is itself a
//! [`Scalar`], so `Dual<Dual<f64>>` is a hyper-dual number whose innermost
//! derivative slot holds a mixed second derivative.

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual<S> {
    pub re: S,
    pub eps: S,
}

impl<S: Scalar> Dual<S> {
    pub fn new(re: S, eps: S) -> Self {
        Self { re, eps }
    }

    /// Independent variable: derivative seed 1.
    pub fn variable(re: S) -> Self {
        Self { re, eps: S::constant(1.0) }
    }

    pub fn constant_of(re: S) -> Self {
        Self { re, eps: S::constant(0.0) }
    }
}

impl<S: Scalar> Add for Dual<S> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Dual::new(self.re + o.re, self.eps + o.eps)
    }
}

impl<S: Scalar> Sub for Dual<S> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Dual::new(self.re - o.re, self.eps - o.eps)
    }
}

impl<S: Scalar> Mul for Dual<S> {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        Dual::new(self.re * o.re, self.eps * o.re + self.re * o.eps)
    }
}

impl<S: Scalar> Div for Dual<S> {
    type Output = Self;
    #[inline]
    fn div(self, o: Self) -> Self {
        let inv = S::constant(1.0) / o.re;
        let re = self.re * inv;
        Dual::new(re, (self.eps - re * o.eps) * inv)
    }
}

impl<S: Scalar> Neg for Dual<S> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Dual::new(-self.re, -self.eps)
    }
}

impl<S: Scalar> Scalar for Dual<S> {
    type Base = S::Base;

    fn from_base(c: S::Base) -> Self {
        Dual::constant_of(S::from_base(c))
    }

    fn base(&self) -> S::Base {
        self.re.base()
    }

    fn sin(self) -> Self {
        Dual::new(self.re.sin(), self.eps * self.re.cos())
    }

    fn cos(self) -> Self {
        Dual::new(self.re.cos(), -(self.eps * self.re.sin()))
    }

    fn tan(self) -> Self {
        let t = self.re.tan();
        Dual::new(t, self.eps * (S::constant(1.0) + t * t))
    }

    fn sqrt(self) -> Self {
        let r = self.re.sqrt();
        Dual::new(r, self.eps / (S::constant(2.0) * r))
    }

    fn exp(self) -> Self {
        let e = self.re.exp();
        Dual::new(e, self.eps * e)
    }

    fn ln(self) -> Self {
        Dual::new(self.re.ln(), self.eps / self.re)
    }

    fn powi(self, k: i32) -> Self {
        if k == 0 {
            return Dual::new(S::constant(1.0), S::constant(0.0));
        }
        let lower = self.re.powi(k - 1);
        Dual::new(lower * self.re, self.eps * S::constant(k as f64) * lower)
    }

    fn powf_const(self, e: S::Base) -> Self {
        let one = <S::Base as num_traits::One>::one();
        let lower = self.re.powf_const(e - one);
        Dual::new(lower * self.re, self.eps * S::from_base(e) * lower)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type D = Dual<f64>;
    type DD = Dual<Dual<f64>>;

    #[test]
    fn product_rule() {
        // f(x) = x^2 + 2x at 3
        let x = D::variable(3.0);
        let f = x * x + D::from_base(2.0) * x;
        assert_eq!(f.re, 15.0);
        assert_eq!(f.eps, 8.0);
    }

    #[test]
    fn quotient_and_transcendentals() {
        let x = D::variable(0.7_f64);
        let f = x.sin() / x.exp();
        let expected = (0.7_f64.cos() - 0.7_f64.sin()) / 0.7_f64.exp();
        assert!((f.eps - expected).abs() < 1e-15);

        let g = x.ln().powi(3);
        assert!((g.eps - 3.0 * 0.7_f64.ln().powi(2) / 0.7).abs() < 1e-14);

        let h = x.tan();
        assert!((h.eps - 1.0 / 0.7_f64.cos().powi(2)).abs() < 1e-14);
    }

    #[test]
    fn powi_zero_and_negative() {
        let x = D::variable(2.0);
        assert_eq!(x.powi(0), D::new(1.0, 0.0));
        let r = x.powi(-2);
        assert_eq!(r.re, 0.25);
        assert_eq!(r.eps, -0.25);
    }

    #[test]
    fn nested_dual_gives_second_derivative() {
        // f(x, y) = x^2 y + sin(x y); d2f/dxdy = 2x + cos(xy) - xy sin(xy)
        let (x0, y0) = (0.4_f64, -1.3_f64);
        let x = DD::new(Dual::new(x0, 1.0), Dual::new(0.0, 0.0));
        let y = DD::new(Dual::new(y0, 0.0), Dual::new(1.0, 0.0));
        let f = x * x * y + (x * y).sin();
        let mixed = 2.0 * x0 + (x0 * y0).cos() - x0 * y0 * (x0 * y0).sin();
        assert!((f.eps.eps - mixed).abs() < 1e-14);
        assert_eq!(f.base(), x0 * x0 * y0 + (x0 * y0).sin());
    }
}
